use super::Encoding;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use std::fmt;
use std::str::FromStr;

/// How a sampled encoding turns into a subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    NodeDelete,
    NodeSelect,
    EdgeDelete,
    EdgeSelect,
    /// Keep the closed `r`-hop neighborhoods of the sampled centers.
    EgoSelect(usize),
    /// Drop the closed `r`-hop neighborhoods of the sampled centers.
    EgoDelete(usize),
}

impl Policy {
    /// Edge policies draw `theta` over the canonical edge list instead of the vertices.
    pub fn is_edge_policy(self) -> bool {
        matches!(self, Policy::EdgeDelete | Policy::EdgeSelect)
    }

    pub fn is_delete(self) -> bool {
        matches!(self, Policy::NodeDelete | Policy::EdgeDelete | Policy::EgoDelete(_))
    }

    /// Number of entries `theta` must have on `graph`.
    pub fn domain_size(self, graph: &LabeledGraph) -> usize {
        if self.is_edge_policy() {
            graph.num_edges()
        } else {
            graph.n()
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// `node-delete`, `node-select`, `edge-delete`, `edge-select`, `ego-select:R`, `ego-delete:R`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown policy {s:?}"));
        let radius = |r: &str| r.parse::<usize>().map_err(|_| bad());
        Ok(match s {
            "node-delete" => Policy::NodeDelete,
            "node-select" => Policy::NodeSelect,
            "edge-delete" => Policy::EdgeDelete,
            "edge-select" => Policy::EdgeSelect,
            _ => match s.split_once(':') {
                Some(("ego-select", r)) => Policy::EgoSelect(radius(r)?),
                Some(("ego-delete", r)) => Policy::EgoDelete(radius(r)?),
                _ => return Err(bad()),
            },
        })
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::NodeDelete => write!(f, "node-delete"),
            Policy::NodeSelect => write!(f, "node-select"),
            Policy::EdgeDelete => write!(f, "edge-delete"),
            Policy::EdgeSelect => write!(f, "edge-select"),
            Policy::EgoSelect(r) => write!(f, "ego-select:{r}"),
            Policy::EgoDelete(r) => write!(f, "ego-delete:{r}"),
        }
    }
}

/// Surviving vertices and edges of one subgraph; `edges` follows the canonical edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphMask {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
}

impl SubgraphMask {
    pub fn num_vertices(&self) -> usize {
        self.vertices.iter().filter(|&&b| b).count()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().filter(|&&b| b).count()
    }

    fn induced(graph: &LabeledGraph, vertices: Vec<bool>) -> Self {
        let edges = graph
            .edges()
            .iter()
            .map(|&(u, v)| vertices[u] && vertices[v])
            .collect();
        SubgraphMask { vertices, edges }
    }
}

/// The whole graph.
pub fn full_mask(graph: &LabeledGraph) -> SubgraphMask {
    SubgraphMask {
        vertices: vec![true; graph.n()],
        edges: vec![true; graph.num_edges()],
    }
}

fn closed_ball(graph: &LabeledGraph, centers: &[usize], r: usize) -> Vec<bool> {
    let mut inside = vec![false; graph.n()];
    for &c in centers {
        for (v, &d) in graph.bfs_distances(c).iter().enumerate() {
            if d <= r {
                inside[v] = true;
            }
        }
    }
    inside
}

pub fn apply_policy(policy: Policy, z: &Encoding, graph: &LabeledGraph) -> Result<SubgraphMask> {
    let expected = policy.domain_size(graph);
    if z.n() != expected {
        return Err(Error::Shape(format!(
            "{policy} expects an encoding of length {expected}, got {}",
            z.n()
        )));
    }
    let picked: Vec<bool> = z.z.iter().map(|&x| x > 0).collect();
    Ok(match policy {
        Policy::NodeSelect => SubgraphMask::induced(graph, picked),
        Policy::NodeDelete => SubgraphMask::induced(graph, picked.iter().map(|b| !b).collect()),
        Policy::EdgeSelect => SubgraphMask {
            vertices: vec![true; graph.n()],
            edges: picked,
        },
        Policy::EdgeDelete => SubgraphMask {
            vertices: vec![true; graph.n()],
            edges: picked.iter().map(|b| !b).collect(),
        },
        Policy::EgoSelect(r) => SubgraphMask::induced(graph, closed_ball(graph, &z.selected(), r)),
        Policy::EgoDelete(r) => SubgraphMask::induced(
            graph,
            closed_ball(graph, &z.selected(), r).iter().map(|b| !b).collect(),
        ),
    })
}

/// Dense `n x n` adjacency restricted to a selection, in original vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedAdjacency {
    pub n: usize,
    /// Row-major.
    pub values: Vec<f64>,
    pub vertex_mask: Vec<bool>,
    /// 1-based rank per vertex (ordered encodings only).
    pub rank_of_vertex: Option<Vec<Option<usize>>>,
}

impl MaskedAdjacency {
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    pub fn from_mask(mask: &SubgraphMask, graph: &LabeledGraph) -> Self {
        let n = graph.n();
        let mut values = vec![0.0; n * n];
        for (&(u, v), &keep) in graph.edges().iter().zip(&mask.edges) {
            if keep {
                values[u * n + v] = 1.0;
                values[v * n + u] = 1.0;
            }
        }
        MaskedAdjacency {
            n,
            values,
            vertex_mask: mask.vertices.clone(),
            rank_of_vertex: None,
        }
    }
}

/// Keeps the edges with both endpoints selected by `z`.
pub fn to_masked_adjacency(z: &Encoding, graph: &LabeledGraph) -> Result<MaskedAdjacency> {
    if z.n() != graph.n() {
        return Err(Error::Shape(format!(
            "encoding of length {} for a graph with {} vertices",
            z.n(),
            graph.n()
        )));
    }
    let picked: Vec<bool> = z.z.iter().map(|&x| x > 0).collect();
    let mut adj = MaskedAdjacency::from_mask(&SubgraphMask::induced(graph, picked), graph);
    if z.mode == super::Mode::Ordered {
        adj.rank_of_vertex = Some((0..z.n()).map(|i| z.rank_of(i)).collect());
    }
    Ok(adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;
    use crate::imle::Mode;

    fn enc(z: Vec<u32>) -> Encoding {
        let k = z.iter().filter(|&&x| x > 0).count();
        Encoding {
            z,
            mode: Mode::Unordered,
            k,
        }
    }

    #[test]
    fn node_delete_middle_of_p3() {
        let m = apply_policy(Policy::NodeDelete, &enc(vec![0, 1, 0]), &named::path(3)).unwrap();
        assert_eq!(m.vertices, vec![true, false, true]);
        assert_eq!(m.num_edges(), 0);
    }

    #[test]
    fn edge_delete_on_triangle() {
        let c3 = named::cycle(3);
        let z = enc(vec![1, 0, 0]);
        let m = apply_policy(Policy::EdgeDelete, &z, &c3).unwrap();
        assert_eq!(c3.edges()[0], (0, 1));
        assert_eq!(m.edges, vec![false, true, true]);
        assert_eq!(m.num_vertices(), 3);
    }

    #[test]
    fn ego_select_center_of_p3() {
        let m = apply_policy(Policy::EgoSelect(1), &enc(vec![0, 1, 0]), &named::path(3)).unwrap();
        assert_eq!(m.vertices, vec![true; 3]);
        let m = apply_policy(Policy::EgoDelete(5), &enc(vec![1, 0, 0]), &named::path(3)).unwrap();
        assert_eq!(m.num_vertices(), 0);
    }

    #[test]
    fn masked_adjacency_examples() {
        let p3 = named::path(3);
        let full = to_masked_adjacency(&enc(vec![1, 1, 1]), &p3).unwrap();
        assert_eq!(full.values, vec![0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        let indep = to_masked_adjacency(&enc(vec![1, 0, 1]), &p3).unwrap();
        assert!(indep.values.iter().all(|&x| x == 0.0));
        let one = to_masked_adjacency(&enc(vec![1, 1, 0]), &p3).unwrap();
        assert_eq!(one.get(0, 1), 1.0);
        assert_eq!(one.get(1, 2), 0.0);
        assert!(to_masked_adjacency(&enc(vec![1, 1]), &p3).is_err());
        let ordered = Encoding::from_ranking(3, &[2, 0], Mode::Ordered);
        let adj = to_masked_adjacency(&ordered, &p3).unwrap();
        assert_eq!(adj.rank_of_vertex, Some(vec![Some(2), None, Some(1)]));
    }

    #[test]
    fn policy_names_round_trip() {
        for p in ["node-delete", "edge-select", "ego-select:2", "ego-delete:1"] {
            assert_eq!(p.parse::<Policy>().unwrap().to_string(), p);
        }
        assert!("ego-select".parse::<Policy>().is_err());
    }
}
