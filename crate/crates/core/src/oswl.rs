//! k-ordered-subgraph Weisfeiler-Leman.
//!
//! Every selected subgraph `g` marks the graph; refinement objects are the pairs
//! `(v, g)`, stored block-wise at index `g * n + v`. Within one block the update
//! is exactly color refinement on the `g`-marked graph (or, with
//! [`Square::AllVertices`], on the block's full multiset). All blocks advance in
//! lockstep until the total number of pair classes stops growing, so that colors
//! of different blocks come from the same round and stay comparable.

use crate::error::{Error, Result};
use crate::graph::{atomic_type, enumerate_subgraphs, binomial, LabeledGraph, OrderedSubgraph, VertexId};
use crate::hashing::{TAG_MULTISET, TAG_OSWL_INIT, TAG_OSWL_STEP, TAG_OSWL_SUBGRAPH, TAG_OSWL_VERTEX};
use crate::par;
use crate::wl::{multiset_color, Color, ColorHistogram, ColorTable, Coloring, EngineRun, ObjectSpace};
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_PAIR_CAP: u128 = 10_000_000;

/// Aggregation neighborhood of a pair `(v, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Square {
    Neighbors,
    AllVertices,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubgraphSet {
    All,
    Explicit(Vec<OrderedSubgraph>),
}

/// Per-vertex selection hook: `(v, g)` pairs for which it returns false are left
/// out of `v`'s final multiset.
pub type VertexPredicate = Arc<dyn Fn(VertexId, &OrderedSubgraph) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct OswlConfig {
    pub k: usize,
    pub square: Square,
    pub ordered: bool,
    pub subgraph_set: SubgraphSet,
    pub max_rounds: Option<usize>,
    /// Refuse to refine more than this many `(v, g)` pairs.
    pub cap: u128,
    pub predicate: Option<VertexPredicate>,
}

impl OswlConfig {
    pub fn new(k: usize) -> Self {
        OswlConfig {
            k,
            square: Square::Neighbors,
            ordered: true,
            subgraph_set: SubgraphSet::All,
            max_rounds: None,
            cap: DEFAULT_PAIR_CAP,
            predicate: None,
        }
    }

    pub fn unordered(mut self) -> Self {
        self.ordered = false;
        self
    }

    pub fn all_vertices(mut self) -> Self {
        self.square = Square::AllVertices;
        self
    }

    pub fn with_subgraphs(mut self, subgraphs: Vec<OrderedSubgraph>) -> Self {
        self.subgraph_set = SubgraphSet::Explicit(subgraphs);
        self
    }
}

impl fmt::Debug for OswlConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = match &self.subgraph_set {
            SubgraphSet::All => "all".to_string(),
            SubgraphSet::Explicit(s) => format!("{} explicit", s.len()),
        };
        f.debug_struct("OswlConfig")
            .field("k", &self.k)
            .field("square", &self.square)
            .field("ordered", &self.ordered)
            .field("subgraph_set", &set)
            .field("max_rounds", &self.max_rounds)
            .field("cap", &self.cap)
            .field("predicate", &self.predicate.is_some())
            .finish()
    }
}

/// Colors of all `(v, g)` pairs after refinement.
#[derive(Debug, Clone)]
pub struct PairColoring {
    pub n: usize,
    pub subgraphs: Vec<OrderedSubgraph>,
    /// Indexed `g * n + v`.
    pub colors: Vec<Color>,
    /// Round at which each block's own partition became stable, if it did.
    pub stable_round: Vec<Option<usize>>,
    pub round: usize,
    pub stable: bool,
}

impl PairColoring {
    pub fn block(&self, g: usize) -> &[Color] {
        &self.colors[g * self.n..(g + 1) * self.n]
    }

    pub fn color(&self, v: VertexId, g: usize) -> Color {
        self.colors[g * self.n + v]
    }

    pub fn as_coloring(&self) -> Coloring {
        Coloring {
            space: ObjectSpace::Pairs {
                k: self.subgraphs.first().map_or(0, OrderedSubgraph::k),
            },
            colors: self.colors.clone(),
            round: self.round,
            stable: self.stable,
        }
    }
}

fn selected_subgraphs(graph: &LabeledGraph, cfg: &OswlConfig) -> Result<Vec<OrderedSubgraph>> {
    let n = graph.n();
    let subgraphs = match &cfg.subgraph_set {
        SubgraphSet::All if cfg.k == 0 => vec![OrderedSubgraph {
            graph_id: graph.fingerprint(),
            tuple: Vec::new(),
            ordered: cfg.ordered,
        }],
        SubgraphSet::All => {
            let count = if cfg.ordered {
                (n as u128).checked_pow(cfg.k as u32).unwrap_or(u128::MAX)
            } else {
                binomial(n, cfg.k)
            };
            check_cap(count, n, cfg.cap)?;
            enumerate_subgraphs(graph, cfg.k, cfg.ordered)?.collect()
        }
        SubgraphSet::Explicit(list) => {
            if cfg.k == 0 {
                return Err(Error::InvalidArgument(
                    "k = 0 only supports the full subgraph set".into(),
                ));
            }
            if list.is_empty() {
                return Err(Error::EmptySelection);
            }
            check_cap(list.len() as u128, n, cfg.cap)?;
            let mut out = Vec::with_capacity(list.len());
            for s in list {
                if s.k() != cfg.k {
                    return Err(Error::InvalidArgument(format!(
                        "subgraph {:?} has size {}, expected {}",
                        s.tuple,
                        s.k(),
                        cfg.k
                    )));
                }
                if let Some(&id) = s.tuple.iter().find(|&&v| v >= n) {
                    return Err(Error::VertexOutOfRange { id, n });
                }
                let mut tuple = s.tuple.clone();
                if !cfg.ordered {
                    tuple.sort_unstable();
                }
                out.push(OrderedSubgraph {
                    graph_id: s.graph_id,
                    tuple,
                    ordered: cfg.ordered,
                });
            }
            out
        }
    };
    Ok(subgraphs)
}

fn check_cap(subgraphs: u128, n: usize, cap: u128) -> Result<()> {
    let objects = subgraphs.saturating_mul(n as u128);
    if objects > cap {
        return Err(Error::CapExceeded { objects, cap });
    }
    Ok(())
}

fn initial_color(graph: &LabeledGraph, v: VertexId, g: &OrderedSubgraph, table: &ColorTable) -> Color {
    if g.ordered {
        let mut tuple = Vec::with_capacity(1 + g.k());
        tuple.push(v);
        tuple.extend_from_slice(&g.tuple);
        let atp = atomic_type(graph, &tuple).expect("ids validated");
        table.relabel(TAG_OSWL_INIT, &[0, atp.0])
    } else {
        // positions collapse to membership: label, member bit, number of adjacent members
        let member = g.contains(v) as u64;
        let adjacent = g.tuple.iter().filter(|&&w| graph.has_edge(v, w)).count() as u64;
        table.relabel(TAG_OSWL_INIT, &[1, graph.label(v) as u64, member, adjacent])
    }
}

fn block_classes(colors: &[Color], n: usize, blocks: usize) -> Vec<usize> {
    par::map_range(blocks, |g| {
        let mut b: Vec<u64> = colors[g * n..(g + 1) * n].iter().map(|c| c.0).collect();
        b.sort_unstable();
        b.dedup();
        b.len()
    })
}

fn total_classes(colors: &[Color]) -> usize {
    let mut all: Vec<u64> = colors.iter().map(|c| c.0).collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Refines all `(v, g)` pairs; `observe` sees every round's pair colors, the initial one included.
fn refine_pairs_observed<O>(
    graph: &LabeledGraph,
    cfg: &OswlConfig,
    table: &ColorTable,
    mut observe: O,
) -> Result<PairColoring>
where
    O: FnMut(&[OrderedSubgraph], &[Color]),
{
    let n = graph.n();
    let subgraphs = selected_subgraphs(graph, cfg)?;
    let blocks = subgraphs.len();
    let mut current = par::map_range(blocks * n, |i| {
        initial_color(graph, i % n, &subgraphs[i / n], table)
    });
    observe(&subgraphs, &current);

    let mut per_block = block_classes(&current, n, blocks);
    let mut stable_round = vec![None; blocks];
    let mut classes = total_classes(&current);
    let mut round = 0;
    let stable = loop {
        if cfg.max_rounds.is_some_and(|m| round >= m) {
            break false;
        }
        let block_hash: Vec<u64> = match cfg.square {
            Square::Neighbors => Vec::new(),
            Square::AllVertices => par::map_range(blocks, |g| {
                multiset_color(&current[g * n..(g + 1) * n], table, TAG_MULTISET).0
            }),
        };
        let mut next = vec![Color(0); current.len()];
        {
            let cur = &current;
            let block_hash = &block_hash;
            par::fill_with_scratch(&mut next, Vec::new, |i, buf: &mut Vec<u64>| {
                let (g, v) = (i / n, i % n);
                buf.clear();
                buf.push(cur[i].0);
                match cfg.square {
                    Square::Neighbors => {
                        let base = g * n;
                        buf.extend(graph.neighbors(v).iter().map(|&u| cur[base + u].0));
                        buf[1..].sort_unstable();
                    }
                    Square::AllVertices => buf.push(block_hash[g]),
                }
                table.relabel(TAG_OSWL_STEP, buf)
            });
        }
        round += 1;
        observe(&subgraphs, &next);
        let next_block = block_classes(&next, n, blocks);
        for g in 0..blocks {
            if stable_round[g].is_none() && next_block[g] == per_block[g] {
                stable_round[g] = Some(round - 1);
            }
        }
        per_block = next_block;
        let next_classes = total_classes(&next);
        current = next;
        if next_classes == classes {
            round -= 1;
            break true;
        }
        classes = next_classes;
    };
    Ok(PairColoring {
        n,
        subgraphs,
        colors: current,
        stable_round,
        round,
        stable,
    })
}

/// Refines all `(v, g)` pairs of the configured subgraph set.
pub fn refine_pairs(graph: &LabeledGraph, cfg: &OswlConfig, table: &ColorTable) -> Result<PairColoring> {
    refine_pairs_observed(graph, cfg, table, |_, _| {})
}

/// `C(v) = RELABEL({{C(v, g) : g selected, predicate(v, g)}})`.
fn vertex_aggregate(
    n: usize,
    subgraphs: &[OrderedSubgraph],
    colors: &[Color],
    predicate: Option<&VertexPredicate>,
    table: &ColorTable,
) -> Vec<Color> {
    par::map_range(n, |v| {
        let mut words: Vec<u64> = (0..subgraphs.len())
            .filter(|&g| predicate.is_none_or(|p| p(v, &subgraphs[g])))
            .map(|g| colors[g * n + v].0)
            .collect();
        words.sort_unstable();
        table.relabel(TAG_OSWL_VERTEX, &words)
    })
}

/// `C(g) = RELABEL({{C(v, g) : v in V(G)}})`.
fn subgraph_aggregate(n: usize, blocks: usize, colors: &[Color], table: &ColorTable) -> Vec<Color> {
    par::map_range(blocks, |g| {
        multiset_color(&colors[g * n..(g + 1) * n], table, TAG_OSWL_SUBGRAPH)
    })
}

pub fn oswl_run(graph: &LabeledGraph, cfg: &OswlConfig, table: &ColorTable) -> Result<EngineRun> {
    let n = graph.n();
    let predicate = cfg.predicate.as_ref();
    let mut rounds = Vec::new();
    let pairs = refine_pairs_observed(graph, cfg, table, |subgraphs, colors| {
        let agg = vertex_aggregate(n, subgraphs, colors, predicate, table);
        rounds.push(ColorHistogram::from_colors(&agg));
    })?;
    let colors = vertex_aggregate(n, &pairs.subgraphs, &pairs.colors, predicate, table);
    let coloring = Coloring {
        space: ObjectSpace::Vertices,
        colors,
        round: pairs.round,
        stable: pairs.stable,
    };
    Ok(EngineRun::from_coloring(coloring, rounds, table, TAG_MULTISET))
}

pub fn vs_oswl_run(graph: &LabeledGraph, cfg: &OswlConfig, table: &ColorTable) -> Result<EngineRun> {
    let n = graph.n();
    let mut rounds = Vec::new();
    let pairs = refine_pairs_observed(graph, cfg, table, |subgraphs, colors| {
        let agg = subgraph_aggregate(n, subgraphs.len(), colors, table);
        rounds.push(ColorHistogram::from_colors(&agg));
    })?;
    let colors = subgraph_aggregate(n, pairs.subgraphs.len(), &pairs.colors, table);
    let coloring = Coloring {
        space: ObjectSpace::Subgraphs { k: cfg.k },
        colors,
        round: pairs.round,
        stable: pairs.stable,
    };
    Ok(EngineRun::from_coloring(coloring, rounds, table, TAG_MULTISET))
}

/// Final vertex colors `C(v)`.
pub fn oswl_vertex_colors(graph: &LabeledGraph, cfg: &OswlConfig, table: &ColorTable) -> Result<Coloring> {
    Ok(oswl_run(graph, cfg, table)?.coloring)
}

/// Graph color as the RELABEL of the vertex-color multiset, with that multiset.
pub fn oswl_graph_color(
    graph: &LabeledGraph,
    cfg: &OswlConfig,
    table: &ColorTable,
) -> Result<(Color, ColorHistogram)> {
    let run = oswl_run(graph, cfg, table)?;
    Ok((run.graph_color, run.coloring.histogram()))
}

/// Graph color of the vertex-subgraph variant, with the subgraph-color multiset.
pub fn vs_oswl_graph_color(
    graph: &LabeledGraph,
    cfg: &OswlConfig,
    table: &ColorTable,
) -> Result<(Color, ColorHistogram)> {
    let run = vs_oswl_run(graph, cfg, table)?;
    Ok((run.graph_color, run.coloring.histogram()))
}
