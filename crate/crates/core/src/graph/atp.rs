use super::{LabeledGraph, VertexId};
use crate::error::{Error, Result};
use crate::hashing::{hash_words, TAG_ATP};
use serde::{Deserialize, Serialize};

/// Canonical code of a tuple's equality, adjacency and label pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicType(pub u64);

/// The explicit pattern an [`AtomicType`] code is derived from.
///
/// `first_occurrence[i]` is the smallest position holding the same vertex as
/// position `i`, which encodes the equality pattern (and hence the multiset of
/// positions carried by a repeated vertex). `adjacent` lists the upper triangle
/// `(i, j), i < j` row by row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicPattern {
    pub first_occurrence: Vec<u32>,
    pub adjacent: Vec<bool>,
    pub labels: Vec<u32>,
}

impl AtomicPattern {
    pub fn code(&self) -> AtomicType {
        let k = self.labels.len();
        let mut words = Vec::with_capacity(1 + 2 * k + self.adjacent.len().div_ceil(64));
        words.push(k as u64);
        words.extend(self.first_occurrence.iter().map(|&x| x as u64));
        words.extend(self.labels.iter().map(|&x| x as u64));
        for chunk in self.adjacent.chunks(64) {
            let mut w = 0u64;
            for (b, &bit) in chunk.iter().enumerate() {
                if bit {
                    w |= 1 << b;
                }
            }
            words.push(w);
        }
        AtomicType(hash_words(TAG_ATP, &words))
    }
}

pub fn atomic_pattern(graph: &LabeledGraph, tuple: &[VertexId]) -> Result<AtomicPattern> {
    if tuple.is_empty() {
        return Err(Error::InvalidArgument("atomic type of an empty tuple".into()));
    }
    if let Some(&id) = tuple.iter().find(|&&v| v >= graph.n()) {
        return Err(Error::VertexOutOfRange { id, n: graph.n() });
    }
    let k = tuple.len();
    let first_occurrence = (0..k)
        .map(|i| tuple.iter().position(|&w| w == tuple[i]).unwrap() as u32)
        .collect();
    let mut adjacent = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            adjacent.push(graph.has_edge(tuple[i], tuple[j]));
        }
    }
    let labels = tuple.iter().map(|&v| graph.label(v)).collect();
    Ok(AtomicPattern {
        first_occurrence,
        adjacent,
        labels,
    })
}

/// Atomic type of `tuple`: equal codes iff `v_i -> w_i` is a label-preserving partial isomorphism.
pub fn atomic_type(graph: &LabeledGraph, tuple: &[VertexId]) -> Result<AtomicType> {
    Ok(atomic_pattern(graph, tuple)?.code())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn repeated_vs_distinct() {
        let k2 = named::complete(2);
        assert_ne!(
            atomic_type(&k2, &[0, 0]).unwrap(),
            atomic_type(&k2, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn adjacency_pattern_matters() {
        let p3 = named::path(3);
        assert_ne!(
            atomic_type(&p3, &[0, 2]).unwrap(),
            atomic_type(&p3, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn mirrored_pairs_in_path_agree() {
        // (0,1) and (2,1): both distinct, both adjacent, all labels 0
        let p3 = named::path(3);
        let a = atomic_pattern(&p3, &[0, 1]).unwrap();
        let b = atomic_pattern(&p3, &[2, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.code(), b.code());
    }

    #[test]
    fn labels_are_part_of_the_type() {
        let g = crate::build_graph(2, &[(0, 1)], Some(vec![1, 2])).unwrap();
        assert_ne!(
            atomic_type(&g, &[0, 1]).unwrap(),
            atomic_type(&g, &[1, 0]).unwrap()
        );
    }

    #[test]
    fn errors() {
        let p3 = named::path(3);
        assert!(matches!(
            atomic_type(&p3, &[0, 3]),
            Err(Error::VertexOutOfRange { id: 3, n: 3 })
        ));
        assert!(atomic_type(&p3, &[]).is_err());
    }
}
