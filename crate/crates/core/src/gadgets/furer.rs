use super::{CloudMap, CloudMember};
use crate::error::{Error, Result};
use crate::graph::{build_graph, LabeledGraph};

/// Base vertices of higher degree are rejected (clouds grow as `2^(d-1)`).
pub const MAX_FURER_DEGREE: usize = 12;

#[derive(Debug, Clone)]
pub struct FurerGraph {
    pub graph: LabeledGraph,
    pub cloud_map: CloudMap,
    /// Base edges using the twisted rule, sorted.
    pub twisted_edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct FurerPair {
    pub h: usize,
    pub n: usize,
    pub twist_edge: [usize; 2],
    pub x_graph: LabeledGraph,
    pub y_graph: LabeledGraph,
    pub cloud_map: CloudMap,
}

/// `h x n` grid; vertex `(r, c)` has id `r * n + c`.
pub fn grid_graph(h: usize, n: usize) -> Result<LabeledGraph> {
    if h == 0 || n < 2 {
        return Err(Error::Guard(format!("grid needs h >= 1 and n >= 2, got {h}x{n}")));
    }
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..n {
            let v = r * n + c;
            if c + 1 < n {
                edges.push((v, v + 1));
            }
            if r + 1 < h {
                edges.push((v, v + n));
            }
        }
    }
    build_graph(h * n, &edges, None)
}

/// First base edge (in canonical order) whose endpoints both have degree 3, else the first edge.
pub fn default_twist_edge(base: &LabeledGraph) -> Option<[usize; 2]> {
    let edges = base.edges();
    edges
        .iter()
        .find(|&&(u, v)| base.degree(u) == 3 && base.degree(v) == 3)
        .or(edges.first())
        .map(|&(u, v)| [u, v])
}

/// Furer construction over an arbitrary base graph.
///
/// Base vertex `v` of degree `d` becomes `2^(d-1)` vertices `(v, S)` for the even
/// subsets `S` of its incident edges (bitmask order over the canonical edge order),
/// all labeled `v`. Listing an edge in `twisted` an odd number of times switches it
/// to the twisted rule.
pub fn furer_from_base(base: &LabeledGraph, twisted: &[[usize; 2]]) -> Result<FurerGraph> {
    if let Some(v) = (0..base.n()).find(|&v| base.degree(v) > MAX_FURER_DEGREE) {
        return Err(Error::Guard(format!(
            "base vertex {v} has degree {} > {MAX_FURER_DEGREE}",
            base.degree(v)
        )));
    }
    let mut twist = vec![false; base.num_edges()];
    for &[a, b] in twisted {
        let e = base
            .edge_index(a, b)
            .ok_or_else(|| Error::InvalidArgument(format!("({a}, {b}) is not a base edge")))?;
        twist[e] ^= true;
    }
    let incident: Vec<Vec<usize>> = (0..base.n())
        .map(|v| {
            let mut es: Vec<usize> = base
                .neighbors(v)
                .iter()
                .map(|&w| base.edge_index(v, w).unwrap())
                .collect();
            es.sort_unstable();
            es
        })
        .collect();

    let mut offset = vec![0usize; base.n() + 1];
    let mut masks: Vec<Vec<u32>> = Vec::with_capacity(base.n());
    for v in 0..base.n() {
        let d = incident[v].len();
        let m: Vec<u32> = (0u32..(1 << d)).filter(|m| m.count_ones() % 2 == 0).collect();
        offset[v + 1] = offset[v] + m.len();
        masks.push(m);
    }
    let total = offset[base.n()];
    let mut labels = Vec::with_capacity(total);
    let mut clouds = Vec::with_capacity(total);
    for v in 0..base.n() {
        for &mask in &masks[v] {
            labels.push(v as u32);
            let subset = incident[v]
                .iter()
                .enumerate()
                .filter(|&(j, _)| mask >> j & 1 == 1)
                .map(|(_, &e)| {
                    let (a, b) = base.edges()[e];
                    [a, b]
                })
                .collect();
            clouds.push(CloudMember::Vertex {
                copy: 0,
                cloud: v,
                subset,
            });
        }
    }
    let mut edges = Vec::new();
    for (e, &(u, v)) in base.edges().iter().enumerate() {
        let ju = incident[u].iter().position(|&x| x == e).unwrap();
        let jv = incident[v].iter().position(|&x| x == e).unwrap();
        for (a, &mu) in masks[u].iter().enumerate() {
            for (b, &mv) in masks[v].iter().enumerate() {
                let same = (mu >> ju & 1) == (mv >> jv & 1);
                if same != twist[e] {
                    edges.push((offset[u] + a, offset[v] + b));
                }
            }
        }
    }
    let graph = build_graph(total, &edges, Some(labels))?;
    let twisted_edges = base
        .edges()
        .iter()
        .zip(&twist)
        .filter(|&(_, &t)| t)
        .map(|(&(a, b), _)| [a, b])
        .collect();
    Ok(FurerGraph {
        graph,
        cloud_map: clouds,
        twisted_edges,
    })
}

/// `X(G^h_n)`, or `Y(G^h_n)` with the default twist edge when `twisted`.
pub fn gen_furer(h: usize, n: usize, twisted: bool) -> Result<FurerGraph> {
    let base = grid_graph(h, n)?;
    let twist: Vec<[usize; 2]> = if twisted {
        default_twist_edge(&base).into_iter().collect()
    } else {
        Vec::new()
    };
    furer_from_base(&base, &twist)
}

pub fn gen_furer_pair(h: usize, n: usize) -> Result<FurerPair> {
    let base = grid_graph(h, n)?;
    let twist_edge = default_twist_edge(&base).expect("grid with n >= 2 has an edge");
    let x = furer_from_base(&base, &[])?;
    let y = furer_from_base(&base, &[twist_edge])?;
    Ok(FurerPair {
        h,
        n,
        twist_edge,
        x_graph: x.graph,
        y_graph: y.graph,
        cloud_map: x.cloud_map,
    })
}
