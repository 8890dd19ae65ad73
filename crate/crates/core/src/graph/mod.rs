//! Labeled simple graphs, atomic types, subgraph enumeration and file formats.

mod atp;
pub mod io;
mod subgraphs;

pub use atp::{atomic_pattern, atomic_type, AtomicPattern, AtomicType};
pub use subgraphs::{binomial, enumerate_subgraphs, OrderedSubgraph, SubgraphIter};

use crate::error::{Error, Result};
use crate::hashing::{hash_words, TAG_GRAPH};
use serde::{Deserialize, Serialize};

pub type VertexId = usize;

/// A finite simple undirected graph with integer vertex labels and optional features.
///
/// Edges are stored normalized (`u < v`) and sorted lexicographically; this order is
/// the canonical edge indexing used by edge features, edge policies and per-edge
/// gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct LabeledGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<VertexId>>,
    labels: Vec<u32>,
    vertex_features: Option<Vec<Vec<f64>>>,
    edge_features: Option<Vec<Vec<f64>>>,
}

/// Builds a normalized graph from an edge list.
///
/// Rejects self-loops, out-of-range endpoints and duplicate edges (in either orientation).
/// Missing labels default to 0.
pub fn build_graph(
    n: usize,
    edge_list: &[(VertexId, VertexId)],
    labels: Option<Vec<u32>>,
) -> Result<LabeledGraph> {
    let labels = match labels {
        Some(l) if l.len() != n => {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} vertices",
                l.len(),
                n
            )))
        }
        Some(l) => l,
        None => vec![0; n],
    };
    let mut edges = Vec::with_capacity(edge_list.len());
    for &(u, v) in edge_list {
        for id in [u, v] {
            if id >= n {
                return Err(Error::VertexOutOfRange { id, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateEdge(w[0].0, w[0].1));
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(LabeledGraph {
        n,
        edges,
        adj,
        labels,
        vertex_features: None,
        edge_features: None,
    })
}

impl LabeledGraph {
    /// Graph on `n` isolated vertices.
    pub fn empty(n: usize) -> Self {
        build_graph(n, &[], None).expect("edgeless graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> u32 {
        self.labels[v]
    }

    pub fn vertex_features(&self) -> Option<&[Vec<f64>]> {
        self.vertex_features.as_deref()
    }

    pub fn edge_features(&self) -> Option<&[Vec<f64>]> {
        self.edge_features.as_deref()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u != v && self.adj[u].binary_search(&v).is_ok()
    }

    /// Index of the edge `{u, v}` in the canonical edge order.
    pub fn edge_index(&self, u: VertexId, v: VertexId) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }

    /// Sorted `(label, count)` pairs.
    pub fn label_histogram(&self) -> Vec<(u32, usize)> {
        let mut map = std::collections::BTreeMap::new();
        for &l in &self.labels {
            *map.entry(l).or_insert(0usize) += 1;
        }
        map.into_iter().collect()
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_vertex_features(mut self, features: Vec<Vec<f64>>) -> Result<Self> {
        check_features(&features, self.n, "vertex")?;
        self.vertex_features = Some(features);
        Ok(self)
    }

    /// Attaches edge features given in canonical edge order.
    pub fn with_edge_features(mut self, features: Vec<Vec<f64>>) -> Result<Self> {
        check_features(&features, self.edges.len(), "edge")?;
        self.edge_features = Some(features);
        Ok(self)
    }

    /// Relabels vertices so that old vertex `v` becomes `perm[v]`.
    ///
    /// Labels and features travel with their vertices (resp. edges).
    pub fn permute(&self, perm: &[VertexId]) -> Result<LabeledGraph> {
        if perm.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "permutation of length {} for {} vertices",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut labels = vec![0; self.n];
        for v in 0..self.n {
            labels[perm[v]] = self.labels[v];
        }
        let mut g = build_graph(self.n, &edges, Some(labels))?;
        if let Some(vf) = &self.vertex_features {
            let mut out = vec![Vec::new(); self.n];
            for v in 0..self.n {
                out[perm[v]] = vf[v].clone();
            }
            g.vertex_features = Some(out);
        }
        if let Some(ef) = &self.edge_features {
            let mut out = vec![Vec::new(); ef.len()];
            for (i, &(u, v)) in self.edges.iter().enumerate() {
                let j = g.edge_index(perm[u], perm[v]).expect("permuted edge exists");
                out[j] = ef[i].clone();
            }
            g.edge_features = Some(out);
        }
        Ok(g)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`. Features are dropped.
    pub fn disjoint_union(&self, other: &LabeledGraph) -> LabeledGraph {
        let shift = self.n;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        build_graph(self.n + other.n, &edges, Some(labels)).expect("union of valid graphs")
    }

    /// Content fingerprint of the structure and labels (features excluded).
    pub fn fingerprint(&self) -> u64 {
        let mut words = Vec::with_capacity(2 + 2 * self.edges.len() + self.n);
        words.push(self.n as u64);
        words.extend(self.labels.iter().map(|&l| l as u64));
        words.push(self.edges.len() as u64);
        for &(u, v) in &self.edges {
            words.push(u as u64);
            words.push(v as u64);
        }
        hash_words(TAG_GRAPH, &words)
    }

    /// Shortest-path distances from `source` (`usize::MAX` for unreachable vertices).
    pub fn bfs_distances(&self, source: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn check_features(features: &[Vec<f64>], expected: usize, what: &str) -> Result<()> {
    if features.len() != expected {
        return Err(Error::InvalidGraph(format!(
            "{} {what} feature vectors for {expected} {what}s",
            features.len()
        )));
    }
    if let Some(first) = features.first() {
        if features.iter().any(|f| f.len() != first.len()) {
            return Err(Error::InvalidGraph(format!(
                "{what} features have mixed dimensionality"
            )));
        }
    }
    Ok(())
}

/// Serialized form shared by the JSON format and serde.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GraphRecord {
    pub n: usize,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(default)]
    pub labels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_features: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_features: Option<Vec<Vec<f64>>>,
}

impl TryFrom<GraphRecord> for LabeledGraph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        let mut g = build_graph(r.n, &r.edges, r.labels)?;
        if let Some(vf) = r.vertex_features {
            g = g.with_vertex_features(vf)?;
        }
        if let Some(ef) = r.edge_features {
            // features follow the record's edge order; map them onto the canonical order
            let mut out = vec![Vec::new(); ef.len()];
            if ef.len() != r.edges.len() {
                return Err(Error::InvalidGraph("edge feature count mismatch".into()));
            }
            for (i, &(u, v)) in r.edges.iter().enumerate() {
                out[g.edge_index(u, v).expect("edge present")] = ef[i].clone();
            }
            g = g.with_edge_features(out)?;
        }
        Ok(g)
    }
}

impl From<LabeledGraph> for GraphRecord {
    fn from(g: LabeledGraph) -> Self {
        GraphRecord {
            n: g.n,
            edges: g.edges,
            labels: Some(g.labels),
            vertex_features: g.vertex_features,
            edge_features: g.edge_features,
        }
    }
}

/// Named small graphs used throughout tests and examples.
pub mod named {
    use super::{build_graph, LabeledGraph};

    pub fn path(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        build_graph(n, &edges, None).expect("path")
    }

    pub fn cycle(n: usize) -> LabeledGraph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        build_graph(n, &edges, None).expect("cycle")
    }

    pub fn complete(n: usize) -> LabeledGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        build_graph(n, &edges, None).expect("complete graph")
    }

    /// Two disjoint triangles.
    pub fn two_triangles() -> LabeledGraph {
        cycle(3).disjoint_union(&cycle(3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_path() {
        let g = build_graph(3, &[(0, 1), (1, 2)], None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.labels(), &[0, 0, 0]);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn isolated_vertex() {
        let g = build_graph(1, &[], None).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(build_graph(4, &[(0, 0)], None), Err(Error::SelfLoop(0)));
        assert_eq!(
            build_graph(2, &[(0, 2)], None),
            Err(Error::VertexOutOfRange { id: 2, n: 2 })
        );
        assert_eq!(
            build_graph(3, &[(0, 1), (1, 0)], None),
            Err(Error::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn normalizes_orientation() {
        let g = build_graph(3, &[(2, 1), (1, 0)], None).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.edge_index(2, 1), Some(1));
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn permute_moves_labels_and_features() {
        let g = build_graph(3, &[(0, 1)], Some(vec![5, 6, 7]))
            .unwrap()
            .with_vertex_features(vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap()
            .with_edge_features(vec![vec![9.0]])
            .unwrap();
        let p = g.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[6, 7, 5]);
        assert_eq!(p.edges(), &[(0, 2)]);
        assert_eq!(p.vertex_features().unwrap()[2], vec![0.0]);
        assert_eq!(p.edge_features().unwrap()[0], vec![9.0]);
        assert!(g.permute(&[0, 0, 1]).is_err());
    }

    #[test]
    fn feature_dimensionality_must_agree() {
        let g = named::path(2);
        assert!(g.with_vertex_features(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
