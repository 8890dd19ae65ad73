use super::{check_finite, Encoding, Mode};
use crate::error::{Error, Result};
use crate::graph::binomial;

/// Largest `|Z|` the oracle enumerates.
pub const ORACLE_CAP: u128 = 100_000;

/// `p(z; theta) = exp(<z, theta> - A(theta))` tabulated over all of `Z`.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    /// Outcomes in enumeration order (lexicographic rankings) with their probabilities.
    pub outcomes: Vec<(Encoding, f64)>,
    pub log_partition: f64,
}

impl ExactDistribution {
    pub fn probability(&self, z: &[u32]) -> Option<f64> {
        self.outcomes.iter().find(|(e, _)| e.z == z).map(|&(_, p)| p)
    }

    /// Most probable outcome; the first one in enumeration order on ties.
    pub fn argmax(&self) -> &Encoding {
        let mut best = 0;
        for (i, (_, p)) in self.outcomes.iter().enumerate() {
            if *p > self.outcomes[best].1 {
                best = i;
            }
        }
        &self.outcomes[best].0
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.outcomes.first().map_or(0, |(e, _)| e.n());
        let mut mu = vec![0.0; n];
        for (e, p) in &self.outcomes {
            for (m, &z) in mu.iter_mut().zip(&e.z) {
                *m += p * z as f64;
            }
        }
        mu
    }
}

fn space_size(n: usize, k: usize, mode: Mode) -> u128 {
    match mode {
        Mode::Unordered => binomial(n, k),
        Mode::Ordered => (0..k).map(|i| (n - i) as u128).product(),
    }
}

fn for_each_ranking(n: usize, k: usize, mode: Mode, f: &mut impl FnMut(&[usize])) {
    fn rec(
        n: usize,
        k: usize,
        mode: Mode,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let start = match (mode, cur.last()) {
            (Mode::Unordered, Some(&last)) => last + 1,
            _ => 0,
        };
        for v in start..n {
            if used[v] {
                continue;
            }
            used[v] = true;
            cur.push(v);
            rec(n, k, mode, used, cur, f);
            cur.pop();
            used[v] = false;
        }
    }
    rec(n, k, mode, &mut vec![false; n], &mut Vec::with_capacity(k), f);
}

/// Enumerates `Z` and normalizes with a log-sum-exp partition function.
pub fn exact_distribution(theta: &[f64], k: usize, mode: Mode) -> Result<ExactDistribution> {
    let n = theta.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    check_finite(theta, "theta")?;
    let size = space_size(n, k, mode);
    if size > ORACLE_CAP {
        return Err(Error::CapExceeded {
            objects: size,
            cap: ORACLE_CAP,
        });
    }
    let mut encodings = Vec::with_capacity(size as usize);
    for_each_ranking(n, k, mode, &mut |r| encodings.push(Encoding::from_ranking(n, r, mode)));
    let scores: Vec<f64> = encodings.iter().map(|e| e.dot(theta)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_partition = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    let outcomes = encodings
        .into_iter()
        .zip(&scores)
        .map(|(e, s)| (e, (s - log_partition).exp()))
        .collect();
    Ok(ExactDistribution {
        outcomes,
        log_partition,
    })
}

/// `d/dtheta E_{z ~ p(.; theta)}[loss(z)] = E[loss(z) (z - E[z])]`.
pub fn expected_gradient(dist: &ExactDistribution, loss: impl Fn(&Encoding) -> f64) -> Vec<f64> {
    let mu = dist.mean();
    let mut g = vec![0.0; mu.len()];
    for (e, p) in &dist.outcomes {
        let l = loss(e);
        for i in 0..g.len() {
            g[i] += p * l * (e.z[i] as f64 - mu[i]);
        }
    }
    g
}
