use super::{check_finite, map_solve, perturb, Encoding, GradAgg, Policy, SamplerConfig};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use rand::Rng;

/// `grad_hat_v = agg({{ edge_grad[vw] : w in N(v) }})`; isolated vertices get 0.
pub fn aggregate_vertex_grad(graph: &LabeledGraph, edge_grad: &[f64], agg: GradAgg) -> Result<Vec<f64>> {
    if edge_grad.len() != graph.num_edges() {
        return Err(Error::Shape(format!(
            "{} edge gradients for {} edges",
            edge_grad.len(),
            graph.num_edges()
        )));
    }
    check_finite(edge_grad, "edge gradient")?;
    let mut out = vec![0.0; graph.n()];
    for (&(u, v), &g) in graph.edges().iter().zip(edge_grad) {
        out[u] += g;
        out[v] += g;
    }
    if agg == GradAgg::Mean {
        for (v, x) in out.iter_mut().enumerate() {
            let d = graph.degree(v);
            if d > 0 {
                *x /= d as f64;
            }
        }
    }
    Ok(out)
}

/// Downstream gradient expressed in the policy's `theta` domain.
///
/// Node and ego policies aggregate per vertex; edge policies use the edge gradients
/// directly. Delete policies keep what the encoding does not select, so the sign flips.
pub fn target_grad(policy: Policy, graph: &LabeledGraph, edge_grad: &[f64], agg: GradAgg) -> Result<Vec<f64>> {
    let mut g = if policy.is_edge_policy() {
        if edge_grad.len() != graph.num_edges() {
            return Err(Error::Shape("edge gradient length".into()));
        }
        check_finite(edge_grad, "edge gradient")?;
        edge_grad.to_vec()
    } else {
        aggregate_vertex_grad(graph, edge_grad, agg)?
    };
    if policy.is_delete() {
        for x in &mut g {
            *x = -*x;
        }
    }
    Ok(g)
}

/// `(z*(perturbed) - z*(perturbed - lambda * target)) / lambda` for an already drawn perturbation.
pub fn imle_difference(perturbed: &[f64], sample: &Encoding, target: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let shifted: Vec<f64> = perturbed
        .iter()
        .zip(target)
        .map(|(&t, &g)| t - lambda * g)
        .collect();
    let z_target = map_solve(&shifted, sample.k, sample.mode)?;
    Ok(sample
        .z
        .iter()
        .zip(&z_target.z)
        .map(|(&a, &b)| (a as f64 - b as f64) / lambda)
        .collect())
}

/// I-MLE estimate of `dL/dtheta`, averaged over `cfg.num_noise_samples` perturbations.
pub fn imle_estimate<R: Rng + ?Sized>(
    theta_row: &[f64],
    target: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if target.len() != theta_row.len() {
        return Err(Error::Shape(format!(
            "target gradient of length {} for theta of length {}",
            target.len(),
            theta_row.len()
        )));
    }
    check_finite(theta_row, "theta")?;
    check_finite(target, "target gradient")?;
    let mut acc = vec![0.0; theta_row.len()];
    for _ in 0..cfg.num_noise_samples {
        let perturbed = perturb(theta_row, cfg.noise, rng);
        let sample = map_solve(&perturbed, cfg.k, cfg.mode)?;
        let d = imle_difference(&perturbed, &sample, target, cfg.lambda)?;
        for (a, x) in acc.iter_mut().zip(d) {
            *a += x;
        }
    }
    let s = cfg.num_noise_samples as f64;
    Ok(acc.into_iter().map(|a| a / s).collect())
}

/// I-MLE gradient of a vertex-level `theta_row` from per-edge downstream gradients.
pub fn imle_gradient<R: Rng + ?Sized>(
    theta_row: &[f64],
    edge_grad: &[f64],
    graph: &LabeledGraph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let target = aggregate_vertex_grad(graph, edge_grad, cfg.grad_agg)?;
    imle_estimate(theta_row, &target, cfg, rng)
}
