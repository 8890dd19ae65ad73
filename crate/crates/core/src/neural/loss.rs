use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    L1,
    L2,
    CrossEntropy,
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Loss::L1),
            "l2" => Ok(Loss::L2),
            "cross-entropy" | "ce" => Ok(Loss::CrossEntropy),
            _ => Err(Error::InvalidArgument(format!("unknown loss {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Class(usize),
    Values(Vec<f64>),
}

/// Loss value and its gradient with respect to `pred`.
///
/// L1 and L2 average over the output dimensions; cross-entropy takes logits.
pub fn loss_and_grad(loss: Loss, pred: &[f64], target: &Target) -> Result<(f64, Vec<f64>)> {
    match (loss, target) {
        (Loss::CrossEntropy, Target::Class(c)) => {
            if *c >= pred.len() {
                return Err(Error::Shape(format!("class {c} with {} logits", pred.len())));
            }
            let mx = pred.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = pred.iter().map(|&p| (p - mx).exp()).collect();
            let z: f64 = exps.iter().sum();
            let value = z.ln() + mx - pred[*c];
            let mut grad: Vec<f64> = exps.iter().map(|e| e / z).collect();
            grad[*c] -= 1.0;
            Ok((value, grad))
        }
        (Loss::L1 | Loss::L2, Target::Values(t)) => {
            if t.len() != pred.len() {
                return Err(Error::Shape(format!("{} targets for {} outputs", t.len(), pred.len())));
            }
            let d = pred.len() as f64;
            let mut value = 0.0;
            let mut grad = Vec::with_capacity(pred.len());
            for (&p, &y) in pred.iter().zip(t) {
                let r = p - y;
                if loss == Loss::L1 {
                    value += r.abs() / d;
                    grad.push(if r > 0.0 { 1.0 / d } else if r < 0.0 { -1.0 / d } else { 0.0 });
                } else {
                    value += r * r / d;
                    grad.push(2.0 * r / d);
                }
            }
            Ok((value, grad))
        }
        _ => Err(Error::InvalidArgument(format!("{loss:?} does not match the target kind"))),
    }
}

/// Task metric for one prediction: absolute error (mean over outputs) or 0/1 correctness.
pub fn sample_metric(pred: &[f64], target: &Target) -> f64 {
    match target {
        Target::Class(c) => {
            let best = (0..pred.len())
                .max_by(|&a, &b| pred[a].total_cmp(&pred[b]).then(b.cmp(&a)))
                .unwrap_or(0);
            (best == *c) as u8 as f64
        }
        Target::Values(t) => pred.iter().zip(t).map(|(p, y)| (p - y).abs()).sum::<f64>() / t.len().max(1) as f64,
    }
}

/// Mean cosine similarity over unordered pairs of rows, with gradients per row.
///
/// Zero rows contribute 0 similarity and receive 0 gradient. Fewer than two rows give 0.
pub fn mean_pairwise_cosine(rows: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let m = rows.len();
    let mut grads: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
    if m < 2 {
        return (0.0, grads);
    }
    let pairs = (m * (m - 1) / 2) as f64;
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            if norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            let c = dot / (norms[i] * norms[j]);
            total += c;
            for (a, b) in [(i, j), (j, i)] {
                for t in 0..rows[a].len() {
                    grads[a][t] += (rows[b][t] / (norms[a] * norms[b]) - c * rows[a][t] / (norms[a] * norms[a])) / pairs;
                }
            }
        }
    }
    (total / pairs, grads)
}
