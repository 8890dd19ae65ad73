use super::coloring::{ColorHistogram, Coloring, ObjectSpace};
use super::refine::refine;
use super::table::{Color, ColorTable};
use super::EngineRun;
use crate::error::{Error, Result};
use crate::graph::{atomic_type, LabeledGraph};
use crate::hashing::{TAG_KWL, TAG_MULTISET};

pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KwlConfig {
    pub k: usize,
    /// Refuse to refine more than this many tuples.
    pub cap: u128,
}

impl KwlConfig {
    pub fn new(k: usize) -> Self {
        KwlConfig {
            k,
            cap: DEFAULT_TUPLE_CAP,
        }
    }
}

/// Dense mixed-radix indexing of `V^k`: position `j` has stride `n^(k-1-j)`.
struct TupleSpace {
    n: usize,
    k: usize,
    strides: Vec<usize>,
    len: usize,
}

impl TupleSpace {
    fn new(n: usize, k: usize) -> Self {
        let mut strides = vec![1; k];
        for j in (0..k.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * n;
        }
        TupleSpace {
            n,
            k,
            strides,
            len: n.pow(k as u32),
        }
    }

    fn decode(&self, mut idx: usize, out: &mut Vec<usize>) {
        out.clear();
        for j in 0..self.k {
            out.push(idx / self.strides[j]);
            idx %= self.strides[j];
        }
    }

    fn diagonal(&self, v: usize) -> usize {
        self.strides.iter().map(|s| s * v).sum()
    }
}

/// Folklore k-WL: tuples start at their atomic type and are refined by the multiset
/// over `w` of the k-vector of colors of `phi_j(t, w)`.
pub fn k_wl(graph: &LabeledGraph, cfg: KwlConfig, table: &ColorTable) -> Result<Coloring> {
    Ok(k_wl_run(graph, cfg, table)?.coloring)
}

/// Stable color of each vertex, read off the diagonal tuple `(v, ..., v)`.
pub fn k_wl_vertex_colors(coloring: &Coloring, n: usize) -> Vec<Color> {
    let k = match coloring.space {
        ObjectSpace::Tuples { k } => k,
        _ => panic!("not a tuple coloring"),
    };
    let space = TupleSpace::new(n, k);
    (0..n).map(|v| coloring.colors[space.diagonal(v)]).collect()
}

pub fn k_wl_run(graph: &LabeledGraph, cfg: KwlConfig, table: &ColorTable) -> Result<EngineRun> {
    let k = cfg.k;
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "folklore k-WL needs k >= 2, got {k}"
        )));
    }
    let n = graph.n();
    let objects = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if objects > cfg.cap {
        return Err(Error::CapExceeded {
            objects,
            cap: cfg.cap,
        });
    }
    let space = TupleSpace::new(n, k);
    let init: Vec<Color> = crate::par::map_range(space.len, |idx| {
        let mut t = Vec::with_capacity(k);
        space.decode(idx, &mut t);
        Color(atomic_type(graph, &t).expect("valid tuple").0)
    });
    let mut rounds = Vec::new();
    let outcome = refine(
        init,
        table,
        TAG_KWL,
        None,
        |idx, colors, buf| {
            let mut t = Vec::with_capacity(k);
            space.decode(idx, &mut t);
            buf.push(colors[idx].0);
            let mut vectors = Vec::with_capacity(space.n * k);
            for w in 0..space.n {
                for j in 0..k {
                    let swapped = idx + w * space.strides[j] - t[j] * space.strides[j];
                    vectors.push(colors[swapped].0);
                }
            }
            let mut order: Vec<usize> = (0..space.n).collect();
            order.sort_unstable_by(|&a, &b| vectors[a * k..(a + 1) * k].cmp(&vectors[b * k..(b + 1) * k]));
            for w in order {
                buf.extend_from_slice(&vectors[w * k..(w + 1) * k]);
            }
        },
        |_, colors| rounds.push(ColorHistogram::from_colors(colors)),
    );
    let coloring = Coloring {
        space: ObjectSpace::Tuples { k },
        colors: outcome.colors,
        round: outcome.round,
        stable: outcome.stable,
    };
    Ok(EngineRun::from_coloring(coloring, rounds, table, TAG_MULTISET))
}
