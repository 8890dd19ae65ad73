//! Distinguishability matrices over generated graph pairs.
//!
//! An [`ExperimentSpec`] lists pair generators, each with the algorithms to run on
//! it. [`run_matrix`] evaluates every cell independently (in parallel when enabled)
//! and returns the verdicts in spec order, so the matrix depends only on the spec.
//! Wall times are returned separately and never enter the matrix itself.

use crate::error::{Error, Result};
use crate::gadgets::{gen_backbone_pair, gen_cfi, gen_furer_pair, gen_gnp, CfiVariant};
use crate::graph::LabeledGraph;
use crate::par;
use crate::wl::{distinguish, Algorithm, ColorTable};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Smallest grid width `n` for which folklore 2-WL separates the `2 x n` Furer pair
/// while `oswl:1` does not. Smaller widths are separated by both (and 2-WL separates
/// every width from 2 on), so this is the first instance of the separation.
pub const FURER_N_STAR: usize = 4;

/// Algorithms of the canonical suite, in column order.
pub const CANONICAL_ALGORITHMS: [&str; 4] = ["cr", "oswl:1", "vs-oswl:1", "kwl:2"];

/// A graph-pair generator: `cfi:K`, `furer:HxN`, `backbone:K` or `random:N:P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSpec {
    /// `(G_k, H_k)`.
    Cfi { k: usize },
    /// `X` vs `Y` over the `h x n` grid.
    Furer { h: usize, n: usize },
    /// Alternating vs blocked backbone over `G_k`/`H_k` gadgets.
    Backbone { k: usize },
    /// Two independent `G(n, p)` draws.
    Random { n: usize, p: f64 },
}

impl PairSpec {
    /// Builds both graphs; `stream` separates random draws of different suite rows.
    pub fn build(&self, seed: u64, stream: u64) -> Result<(LabeledGraph, LabeledGraph)> {
        Ok(match *self {
            PairSpec::Cfi { k } => (gen_cfi(k, CfiVariant::G)?.graph, gen_cfi(k, CfiVariant::H)?.graph),
            PairSpec::Furer { h, n } => {
                let p = gen_furer_pair(h, n)?;
                (p.x_graph, p.y_graph)
            }
            PairSpec::Backbone { k } => {
                let p = gen_backbone_pair(k)?;
                (p.x_graph, p.y_graph)
            }
            PairSpec::Random { n, p } => (gen_gnp(n, p, seed, 2 * stream)?, gen_gnp(n, p, seed, 2 * stream + 1)?),
        })
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSpec::Cfi { k } => write!(f, "cfi:{k}"),
            PairSpec::Furer { h, n } => write!(f, "furer:{h}x{n}"),
            PairSpec::Backbone { k } => write!(f, "backbone:{k}"),
            PairSpec::Random { n, p } => write!(f, "random:{n}:{p}"),
        }
    }
}

impl FromStr for PairSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown pair generator {s:?}"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["cfi", k] => Ok(PairSpec::Cfi { k: num(k)? }),
            ["backbone", k] => Ok(PairSpec::Backbone { k: num(k)? }),
            ["furer", dims] => {
                let (h, n) = dims.split_once('x').ok_or_else(bad)?;
                Ok(PairSpec::Furer { h: num(h)?, n: num(n)? })
            }
            ["random", n, p] => Ok(PairSpec::Random {
                n: num(n)?,
                p: p.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// One suite row as written in spec files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub pair: String,
    pub algorithms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub suite: Vec<SuiteEntry>,
    /// Required when the suite contains random pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Overrides every engine's object cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentSpec {
    /// `{cfi:2, cfi:3, furer:2xN*, backbone:1} x {cr, oswl:1, vs-oswl:1, kwl:2}`.
    pub fn canonical() -> Self {
        let pairs = ["cfi:2".to_string(), "cfi:3".to_string(), format!("furer:2x{FURER_N_STAR}"), "backbone:1".to_string()];
        ExperimentSpec {
            suite: pairs
                .into_iter()
                .map(|pair| SuiteEntry {
                    pair,
                    algorithms: CANONICAL_ALGORITHMS.iter().map(|a| a.to_string()).collect(),
                })
                .collect(),
            seed: None,
            cap: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            offset: e.column(),
            message: e.to_string(),
        })
    }

    /// Parses every generator and algorithm without building anything.
    pub fn resolve(&self) -> Result<Vec<(PairSpec, Vec<Algorithm>)>> {
        let resolved = self.suite
            .iter()
            .map(|e| {
                let pair: PairSpec = e.pair.parse()?;
                let algs = e
                    .algorithms
                    .iter()
                    .map(|a| a.parse::<Algorithm>().map(|alg| with_cap(alg, self.cap)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((pair, algs))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.seed.is_none() && resolved.iter().any(|(p, _)| matches!(p, PairSpec::Random { .. })) {
            return Err(Error::InvalidArgument("random pairs need an explicit seed".into()));
        }
        Ok(resolved)
    }
}

fn with_cap(alg: Algorithm, cap: Option<u64>) -> Algorithm {
    let Some(cap) = cap else { return alg };
    match alg {
        Algorithm::ColorRefinement => alg,
        Algorithm::FolkloreKwl(mut c) => {
            c.cap = cap as u128;
            Algorithm::FolkloreKwl(c)
        }
        Algorithm::Oswl(mut c) => {
            c.cap = cap as u128;
            Algorithm::Oswl(c)
        }
        Algorithm::VertexSubgraphOswl(mut c) => {
            c.cap = cap as u128;
            Algorithm::VertexSubgraphOswl(c)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Distinguished,
    Equivalent,
    Capped,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Distinguished => "distinguished",
            CellStatus::Equivalent => "equivalent",
            CellStatus::Capped => "capped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub algorithm: String,
    pub status: CellStatus,
    /// Deciding round; absent for capped cells.
    pub round: Option<usize>,
    /// Objects the engine refused to refine, for capped cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub pair: String,
    pub n: [usize; 2],
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishabilityMatrix {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rows: Vec<MatrixRow>,
}

impl DistinguishabilityMatrix {
    pub fn cell(&self, pair: &str, algorithm: &str) -> Option<&Cell> {
        self.rows
            .iter()
            .find(|r| r.pair == pair)?
            .cells
            .iter()
            .find(|c| c.algorithm == algorithm)
    }

    /// Long format: one `pair,algorithm,status,round` line per cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pair,algorithm,status,round\n");
        for row in &self.rows {
            for c in &row.cells {
                let round = c.round.map(|r| r.to_string()).unwrap_or_default();
                s.push_str(&format!("{},{},{},{}\n", row.pair, c.algorithm, c.status, round));
            }
        }
        s
    }
}

/// Wall time of one cell, in spec order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub pair: String,
    pub algorithm: String,
    pub seconds: f64,
}

fn run_cell(g: &LabeledGraph, h: &LabeledGraph, alg: &Algorithm) -> Result<Cell> {
    let table = ColorTable::new();
    let algorithm = alg.to_string();
    match distinguish(g, h, alg, &table) {
        Ok(v) => Ok(Cell {
            algorithm,
            status: if v.distinguished() {
                CellStatus::Distinguished
            } else {
                CellStatus::Equivalent
            },
            round: Some(v.round),
            objects: None,
        }),
        Err(Error::CapExceeded { objects, .. }) => Ok(Cell {
            algorithm,
            status: CellStatus::Capped,
            round: None,
            objects: Some(u64::try_from(objects).unwrap_or(u64::MAX)),
        }),
        Err(e) => Err(e),
    }
}

/// Runs every cell of `spec`. Errors other than cap overflow abort the run.
pub fn run_matrix(spec: &ExperimentSpec) -> Result<(DistinguishabilityMatrix, Vec<CellTiming>)> {
    let resolved = spec.resolve()?;
    let graphs = resolved
        .iter()
        .enumerate()
        .map(|(i, (pair, _))| pair.build(spec.seed.unwrap_or_default(), i as u64))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = resolved
        .iter()
        .enumerate()
        .flat_map(|(i, (_, algs))| (0..algs.len()).map(move |j| (i, j)))
        .collect();
    let results = par::map_slice(&jobs, |&(i, j)| {
        let (g, h) = &graphs[i];
        let start = Instant::now();
        let cell = run_cell(g, h, &resolved[i].1[j]);
        (cell, start.elapsed().as_secs_f64())
    });

    let mut rows: Vec<MatrixRow> = resolved
        .iter()
        .zip(&graphs)
        .map(|((pair, _), (g, h))| MatrixRow {
            pair: pair.to_string(),
            n: [g.n(), h.n()],
            cells: Vec::new(),
        })
        .collect();
    let mut timings = Vec::with_capacity(jobs.len());
    for (&(i, _), (cell, seconds)) in jobs.iter().zip(results) {
        let cell = cell?;
        timings.push(CellTiming {
            pair: rows[i].pair.clone(),
            algorithm: cell.algorithm.clone(),
            seconds,
        });
        rows[i].cells.push(cell);
    }
    Ok((DistinguishabilityMatrix { seed: spec.seed, rows }, timings))
}

/// Per-width verdicts of `kwl:2` and `oswl:1` on the `h x n` Furer pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FurerScanRow {
    pub n: usize,
    pub kwl2: CellStatus,
    pub oswl1: CellStatus,
}

/// Scans widths `2..=max_n` and returns the rows plus the first width where 2-WL
/// distinguishes and `oswl:1` does not.
pub fn scan_furer_widths(h: usize, max_n: usize) -> Result<(Vec<FurerScanRow>, Option<usize>)> {
    let kwl: Algorithm = "kwl:2".parse()?;
    let oswl: Algorithm = "oswl:1".parse()?;
    let mut rows = Vec::new();
    let mut found = None;
    for n in 2..=max_n {
        let p = gen_furer_pair(h, n)?;
        let row = FurerScanRow {
            n,
            kwl2: run_cell(&p.x_graph, &p.y_graph, &kwl)?.status,
            oswl1: run_cell(&p.x_graph, &p.y_graph, &oswl)?.status,
        };
        if found.is_none() && row.kwl2 == CellStatus::Distinguished && row.oswl1 == CellStatus::Equivalent {
            found = Some(n);
        }
        rows.push(row);
    }
    Ok((rows, found))
}
