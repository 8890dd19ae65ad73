use super::{LabeledGraph, VertexId};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A k-tuple of vertices; `ordered = false` interprets it as a sorted k-set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedSubgraph {
    pub graph_id: u64,
    pub tuple: Vec<VertexId>,
    pub ordered: bool,
}

impl OrderedSubgraph {
    pub fn k(&self) -> usize {
        self.tuple.len()
    }

    /// Positions (1-based) at which `v` occurs in the tuple.
    pub fn positions_of(&self, v: VertexId) -> Vec<usize> {
        self.tuple
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.tuple.contains(&v)
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Restartable stream over all ordered k-tuples (`n^k`) or all k-sets (`C(n, k)`).
#[derive(Debug, Clone)]
pub struct SubgraphIter {
    n: usize,
    graph_id: u64,
    ordered: bool,
    current: Option<Vec<VertexId>>,
}

impl Iterator for SubgraphIter {
    type Item = OrderedSubgraph;

    fn next(&mut self) -> Option<OrderedSubgraph> {
        let tuple = self.current.clone()?;
        self.current = if self.ordered {
            next_tuple(&tuple, self.n)
        } else {
            next_combination(&tuple, self.n)
        };
        Some(OrderedSubgraph {
            graph_id: self.graph_id,
            tuple,
            ordered: self.ordered,
        })
    }
}

fn next_tuple(t: &[VertexId], n: usize) -> Option<Vec<VertexId>> {
    let mut t = t.to_vec();
    for pos in (0..t.len()).rev() {
        if t[pos] + 1 < n {
            t[pos] += 1;
            return Some(t);
        }
        t[pos] = 0;
    }
    None
}

fn next_combination(t: &[VertexId], n: usize) -> Option<Vec<VertexId>> {
    let k = t.len();
    let mut t = t.to_vec();
    for pos in (0..k).rev() {
        if t[pos] < n - k + pos {
            t[pos] += 1;
            for j in pos + 1..k {
                t[j] = t[j - 1] + 1;
            }
            return Some(t);
        }
    }
    None
}

pub fn enumerate_subgraphs(graph: &LabeledGraph, k: usize, ordered: bool) -> Result<SubgraphIter> {
    if k == 0 {
        return Err(Error::InvalidArgument("subgraph size must be at least 1".into()));
    }
    let n = graph.n();
    if !ordered && k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot choose {k} distinct vertices out of {n}"
        )));
    }
    let current = if n == 0 {
        None
    } else if ordered {
        Some(vec![0; k])
    } else {
        Some((0..k).collect())
    };
    Ok(SubgraphIter {
        n,
        graph_id: graph.fingerprint(),
        ordered,
        current,
    })
}
