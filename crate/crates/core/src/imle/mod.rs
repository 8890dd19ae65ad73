//! Distributions over subgraph encodings, MAP solving, perturb-and-MAP sampling,
//! the I-MLE gradient estimator and selection policies.

mod gradient;
mod map;
mod oracle;
mod policy;
mod sampler;

pub use gradient::{aggregate_vertex_grad, imle_difference, imle_estimate, imle_gradient, target_grad};
pub use map::map_solve;
pub use oracle::{exact_distribution, expected_gradient, ExactDistribution, ORACLE_CAP};
pub use policy::{apply_policy, full_mask, to_masked_adjacency, MaskedAdjacency, Policy, SubgraphMask};
pub use sampler::{perturb, row_rng, sample_rows, sample_subgraph};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unordered,
    Ordered,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unordered" => Ok(Mode::Unordered),
            "ordered" => Ok(Mode::Ordered),
            _ => Err(Error::InvalidArgument(format!(
                "mode must be ordered or unordered, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unordered => "unordered",
            Mode::Ordered => "ordered",
        })
    }
}

/// A subgraph encoding `z`.
///
/// Unordered: a 0/1 vector with exactly `k` ones. Ordered: the vertex of rank `j`
/// (1-based) holds `k + 1 - j`, unselected vertices hold 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub z: Vec<u32>,
    pub mode: Mode,
    pub k: usize,
}

impl Encoding {
    pub fn from_ranking(n: usize, ranked: &[usize], mode: Mode) -> Self {
        let k = ranked.len();
        let mut z = vec![0; n];
        for (j, &v) in ranked.iter().enumerate() {
            z[v] = match mode {
                Mode::Unordered => 1,
                Mode::Ordered => (k - j) as u32,
            };
        }
        Encoding { z, mode, k }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn selected(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&i| self.z[i] > 0).collect()
    }

    pub fn is_selected(&self, i: usize) -> bool {
        self.z[i] > 0
    }

    /// 1-based rank of entry `i` in ordered mode.
    pub fn rank_of(&self, i: usize) -> Option<usize> {
        match (self.mode, self.z[i]) {
            (_, 0) => None,
            (Mode::Ordered, z) => Some(self.k + 1 - z as usize),
            (Mode::Unordered, _) => None,
        }
    }

    /// Selected entries ordered by rank (unordered mode: by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut sel = self.selected();
        if self.mode == Mode::Ordered {
            sel.sort_by_key(|&i| std::cmp::Reverse(self.z[i]));
        }
        sel
    }

    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.z.iter().zip(theta).map(|(&z, &t)| z as f64 * t).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.z.iter().map(|&z| z as f64).collect()
    }

    /// Checks the encoding invariants.
    pub fn validate(&self) -> Result<()> {
        let nonzero: Vec<u32> = self.z.iter().copied().filter(|&z| z > 0).collect();
        if nonzero.len() != self.k {
            return Err(Error::InvalidArgument(format!(
                "encoding has {} non-zero entries, expected {}",
                nonzero.len(),
                self.k
            )));
        }
        match self.mode {
            Mode::Unordered if nonzero.iter().any(|&z| z != 1) => {
                Err(Error::InvalidArgument("unordered encoding must be binary".into()))
            }
            Mode::Ordered => {
                let mut vals = nonzero;
                vals.sort_unstable();
                if vals != (1..=self.k as u32).collect::<Vec<_>>() {
                    return Err(Error::InvalidArgument(
                        "ordered encoding must use each value 1..=k exactly once".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `m x n` parameters, row `i` driving the `i`-th sampled subgraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMatrix {
    pub m: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl ThetaMatrix {
    pub fn new(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != m * n {
            return Err(Error::Shape(format!(
                "{} values for a {m}x{n} theta matrix",
                values.len()
            )));
        }
        check_finite(&values, "theta")?;
        Ok(ThetaMatrix { m, n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("theta rows differ in length".into()));
        }
        Self::new(rows.len(), n, rows.concat())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Noise {
    Gumbel { scale: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradAgg {
    Sum,
    Mean,
}

impl FromStr for GradAgg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(GradAgg::Sum),
            "mean" => Ok(GradAgg::Mean),
            _ => Err(Error::InvalidArgument(format!("aggregation must be sum or mean, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub k: usize,
    pub m: usize,
    pub mode: Mode,
    pub noise: Noise,
    pub lambda: f64,
    pub grad_agg: GradAgg,
    pub num_noise_samples: usize,
    pub seed: u64,
}

impl SamplerConfig {
    /// Gumbel(1) noise, `lambda = 1`, sum aggregation, one noise sample.
    pub fn new(k: usize, m: usize, mode: Mode, seed: u64) -> Self {
        SamplerConfig {
            k,
            m,
            mode,
            noise: Noise::Gumbel { scale: 1.0 },
            lambda: 1.0,
            grad_agg: GradAgg::Sum,
            num_noise_samples: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if let Noise::Gumbel { scale } = self.noise {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InvalidArgument(format!("noise scale must be positive, got {scale}")));
            }
        }
        if self.num_noise_samples == 0 {
            return Err(Error::InvalidArgument("need at least one noise sample".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("{what}[{i}] = {}", values[i]))),
        None => Ok(()),
    }
}
