use super::loss::{Loss, Target};
use crate::error::{Error, Result};
use crate::gadgets::{gen_cfi, CfiVariant};
use crate::graph::{build_graph, LabeledGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Regress the number of triangles of small random graphs.
    Triangles,
    /// Tell permuted CFI `G_k` copies from `H_k` copies.
    CfiPairs,
}

impl Task {
    pub fn loss(self) -> Loss {
        match self {
            Task::Triangles => Loss::L1,
            Task::CfiPairs => Loss::CrossEntropy,
        }
    }

    pub fn out_dim(self) -> usize {
        match self {
            Task::Triangles => 1,
            Task::CfiPairs => 2,
        }
    }

    /// Whether a larger metric is better (accuracy) or worse (MAE).
    pub fn higher_is_better(self) -> bool {
        self == Task::CfiPairs
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangles" => Ok(Task::Triangles),
            "cfi-pairs" => Ok(Task::CfiPairs),
            _ => Err(Error::InvalidArgument(format!("unknown task {s:?} (triangles, cfi-pairs)"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Triangles => "triangles",
            Task::CfiPairs => "cfi-pairs",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub graph: LabeledGraph,
    pub target: Target,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: Task,
    pub num_labels: usize,
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
}

pub fn count_triangles(g: &LabeledGraph) -> usize {
    let mut t = 0;
    for &(u, v) in g.edges() {
        // common neighbours above v close a triangle exactly once
        t += g.neighbors(u).iter().filter(|&&w| w > v && g.has_edge(v, w)).count();
    }
    t
}

fn split<T>(mut items: Vec<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
    let n = items.len();
    let n_train = n * 8 / 10;
    let n_val = (n - n_train) / 2;
    let test = items.split_off(n_train + n_val);
    let val = items.split_off(n_train);
    (items, val, test)
}

fn random_perm<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Erdos-Renyi graphs on 6..=`max_n` vertices with edge probability in [0.2, 0.5).
pub fn triangle_dataset(num_graphs: usize, max_n: usize, seed: u64) -> Result<Dataset> {
    if max_n < 6 {
        return Err(Error::InvalidArgument("triangle graphs need max_n >= 6".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(num_graphs);
    for _ in 0..num_graphs {
        let n = rng.random_range(6..=max_n);
        let p: f64 = rng.random_range(0.2..0.5);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let graph = build_graph(n, &edges, None)?;
        let t = count_triangles(&graph) as f64;
        samples.push(Sample {
            graph,
            target: Target::Values(vec![t]),
        });
    }
    let (train, val, test) = split(samples);
    Ok(Dataset {
        task: Task::Triangles,
        num_labels: 1,
        train,
        val,
        test,
    })
}

/// Randomly permuted `(G_k, H_k)` pairs, class 0 for `G` and 1 for `H`.
///
/// Each pair also relabels its clouds by a random symmetry of the complete base graph,
/// so that label identities carry no class information. Splits are made per pair.
pub fn cfi_pair_dataset(num_pairs: usize, k: usize, seed: u64) -> Result<Dataset> {
    let g = gen_cfi(k, CfiVariant::G)?;
    let h = gen_cfi(k, CfiVariant::H)?;
    let base = k + 1;
    let base_edges: Vec<(usize, usize)> = (0..base).flat_map(|a| (a + 1..base).map(move |b| (a, b))).collect();
    let edge_idx = |a: usize, b: usize| base_edges.binary_search(&(a.min(b), a.max(b))).expect("base edge");
    let num_labels = base + base_edges.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(num_pairs);
    for _ in 0..num_pairs {
        let sigma = random_perm(base, &mut rng);
        let relabel = |l: u32| -> u32 {
            let l = l as usize;
            if l < base {
                sigma[l] as u32
            } else {
                let (a, b) = base_edges[l - base];
                (base + edge_idx(sigma[a], sigma[b])) as u32
            }
        };
        let mut pair = Vec::with_capacity(2);
        for (class, gadget) in [(0, &g), (1, &h)] {
            let labels = gadget.graph.labels().iter().map(|&l| relabel(l)).collect();
            let graph = gadget.graph.clone().with_labels(labels)?;
            let graph = graph.permute(&random_perm(graph.n(), &mut rng))?;
            pair.push(Sample {
                graph,
                target: Target::Class(class),
            });
        }
        pairs.push(pair);
    }
    let (train, val, test) = split(pairs);
    let flat = |v: Vec<Vec<Sample>>| v.into_iter().flatten().collect();
    Ok(Dataset {
        task: Task::CfiPairs,
        num_labels,
        train: flat(train),
        val: flat(val),
        test: flat(test),
    })
}
