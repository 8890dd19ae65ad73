use super::{CloudMap, CloudMember};
use crate::error::{Error, Result};
use crate::graph::{build_graph, LabeledGraph};
use std::fmt;
use std::str::FromStr;

/// `k` at or above this is rejected (clouds grow as `2^(k-1)`).
pub const MAX_CFI_K: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfiVariant {
    G,
    H,
}

impl FromStr for CfiVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(CfiVariant::G),
            "H" | "h" => Ok(CfiVariant::H),
            _ => Err(Error::InvalidArgument(format!("variant must be G or H, got {s:?}"))),
        }
    }
}

impl fmt::Display for CfiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CfiVariant::G => "G",
            CfiVariant::H => "H",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CfiGadget {
    pub k: usize,
    pub variant: CfiVariant,
    pub graph: LabeledGraph,
    pub cloud_map: CloudMap,
}

/// `(k+1) * 2^(k-1) + 2 * C(k+1, 2)`, counted from the construction itself.
pub fn cfi_vertex_count(k: usize) -> usize {
    (k + 1) * (1 << (k - 1)) + (k + 1) * k
}

/// CFI gadget over `K_{k+1}`.
///
/// Vertex order: the vertex clouds of base vertices `0..=k` (subsets in increasing
/// bitmask order over the local edge index), then `e^0, e^1` for each base edge in
/// lexicographic order. Cloud `v` is labeled `v`; edge cloud `e` is labeled `k + 1 + e`.
/// Variant `H` uses the odd subsets at base vertex 0.
pub fn gen_cfi(k: usize, variant: CfiVariant) -> Result<CfiGadget> {
    if k == 0 || k >= MAX_CFI_K {
        return Err(Error::Guard(format!(
            "CFI parameter k must satisfy 1 <= k < {MAX_CFI_K}, got {k}"
        )));
    }
    let base_n = k + 1;
    let mut base_edges = Vec::new();
    for a in 0..base_n {
        for b in a + 1..base_n {
            base_edges.push([a, b]);
        }
    }
    let edge_id = |a: usize, b: usize| {
        base_edges
            .iter()
            .position(|e| *e == [a.min(b), a.max(b)])
            .unwrap()
    };
    let vertex_nodes = base_n * (1 << (k - 1));
    let edge_node = |e: usize, bit: usize| vertex_nodes + 2 * e + bit;

    let mut labels = Vec::new();
    let mut clouds = Vec::new();
    let mut edges = Vec::new();
    for v in 0..base_n {
        // E(v) in increasing order of the other endpoint
        let incident: Vec<usize> = (0..base_n).filter(|&w| w != v).map(|w| edge_id(v, w)).collect();
        let parity = if variant == CfiVariant::H && v == 0 { 1 } else { 0 };
        for mask in 0u32..(1 << k) {
            if mask.count_ones() % 2 != parity {
                continue;
            }
            let node = labels.len();
            labels.push(v as u32);
            let mut subset = Vec::new();
            for (j, &e) in incident.iter().enumerate() {
                let bit = (mask >> j) & 1;
                if bit == 1 {
                    subset.push(base_edges[e]);
                }
                edges.push((node, edge_node(e, bit as usize)));
            }
            clouds.push(CloudMember::Vertex {
                copy: 0,
                cloud: v,
                subset,
            });
        }
    }
    debug_assert_eq!(labels.len(), vertex_nodes);
    for (e, &be) in base_edges.iter().enumerate() {
        for bit in 0..2u8 {
            labels.push((base_n + e) as u32);
            clouds.push(CloudMember::Edge {
                copy: 0,
                cloud: be,
                bit,
            });
        }
        edges.push((edge_node(e, 0), edge_node(e, 1)));
    }
    let graph = build_graph(labels.len(), &edges, Some(labels))?;
    Ok(CfiGadget {
        k,
        variant,
        graph,
        cloud_map: clouds,
    })
}
