//! Layers with hand-written backward passes.
//!
//! Every `forward` is pure; `backward` takes what the forward saw, accumulates
//! parameter gradients into the store and returns the input gradient.

use super::params::{Group, ParamId, ParamStore};
use super::tensor::Tensor;
use crate::graph::LabeledGraph;
use rand::Rng;

/// `y = x W + b` on row vectors.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        group: Group,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        let w = store.add_glorot(format!("{name}.w"), group, in_dim, out_dim, rng);
        // uniform in +-1/sqrt(fan_in): zero biases leave every unit in the same linear
        // region at init, where structurally different multisets can cancel exactly
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let b = (0..out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        let b = store.add(format!("{name}.b"), group, Tensor::matrix(1, out_dim, b));
        Linear { w, b, in_dim, out_dim }
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> Tensor {
        let mut y = x.matmul(store.value(self.w));
        let b = store.value(self.b).data();
        for r in 0..y.rows() {
            for (o, bi) in y.row_mut(r).iter_mut().zip(b) {
                *o += bi;
            }
        }
        y
    }

    pub fn backward(&self, store: &mut ParamStore, x: &Tensor, dy: &Tensor) -> Tensor {
        store.accumulate(self.w, &x.t_matmul(dy));
        let mut db = vec![0.0; self.out_dim];
        for r in 0..dy.rows() {
            for (d, g) in db.iter_mut().zip(dy.row(r)) {
                *d += g;
            }
        }
        store.accumulate(self.b, &Tensor::matrix(1, self.out_dim, db));
        dy.matmul_t(store.value(self.w))
    }
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Gradient through a ReLU whose pre-activation was `pre`.
pub fn relu_backward(pre: &Tensor, dy: &Tensor) -> Tensor {
    let data = pre
        .data()
        .iter()
        .zip(dy.data())
        .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(pre.shape(), data).expect("same shape")
}

/// Feature standardization over the surviving rows of one subgraph, then `gamma * x + beta`.
///
/// Statistics come from the current subgraph only, so training and inference compute the
/// same function and a sample's output never depends on its batch. Masked rows output 0.
#[derive(Debug, Clone, Copy)]
pub struct MaskedNorm {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub dim: usize,
}

pub const NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct NormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
    mask: Vec<bool>,
}

impl MaskedNorm {
    pub fn new(store: &mut ParamStore, name: &str, group: Group, dim: usize) -> Self {
        let gamma = store.add(format!("{name}.gamma"), group, Tensor::matrix(1, dim, vec![1.0; dim]));
        let beta = store.add(format!("{name}.beta"), group, Tensor::zeros(&[1, dim]));
        MaskedNorm { gamma, beta, dim }
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor, mask: &[bool]) -> (Tensor, NormCache) {
        let (n, d) = (x.rows(), x.cols());
        let rows: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();
        let c = rows.len().max(1) as f64;
        let mut xhat = Tensor::zeros(&[n, d]);
        let mut inv_std = vec![0.0; d];
        for j in 0..d {
            let mean = rows.iter().map(|&v| x.at(v, j)).sum::<f64>() / c;
            let var = rows.iter().map(|&v| (x.at(v, j) - mean).powi(2)).sum::<f64>() / c;
            inv_std[j] = 1.0 / (var + NORM_EPS).sqrt();
            for &v in &rows {
                *xhat.at_mut(v, j) = (x.at(v, j) - mean) * inv_std[j];
            }
        }
        let (g, b) = (store.value(self.gamma).data(), store.value(self.beta).data());
        let mut y = Tensor::zeros(&[n, d]);
        for &v in &rows {
            for j in 0..d {
                *y.at_mut(v, j) = g[j] * xhat.at(v, j) + b[j];
            }
        }
        let cache = NormCache {
            xhat,
            inv_std,
            mask: mask.to_vec(),
        };
        (y, cache)
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &NormCache, dy: &Tensor) -> Tensor {
        let (n, d) = (dy.rows(), dy.cols());
        let rows: Vec<usize> = (0..n).filter(|&v| cache.mask[v]).collect();
        let mut dx = Tensor::zeros(&[n, d]);
        let mut dgamma = vec![0.0; d];
        let mut dbeta = vec![0.0; d];
        if rows.is_empty() {
            return dx;
        }
        let c = rows.len() as f64;
        let g = store.value(self.gamma).data().to_vec();
        for j in 0..d {
            let (mut s1, mut s2) = (0.0, 0.0);
            for &v in &rows {
                let (gy, xh) = (dy.at(v, j), cache.xhat.at(v, j));
                dgamma[j] += gy * xh;
                dbeta[j] += gy;
                s1 += gy * g[j];
                s2 += gy * g[j] * xh;
            }
            let (m1, m2) = (s1 / c, s2 / c);
            for &v in &rows {
                let dxh = dy.at(v, j) * g[j];
                *dx.at_mut(v, j) = cache.inv_std[j] * (dxh - m1 - cache.xhat.at(v, j) * m2);
            }
        }
        store.accumulate(self.gamma, &Tensor::matrix(1, d, dgamma));
        store.accumulate(self.beta, &Tensor::matrix(1, d, dbeta));
        dx
    }
}

/// Symmetric-normalized adjacency with self-loops, `D^-1/2 (A + I) D^-1/2`.
pub fn gcn_normalized_adjacency(graph: &LabeledGraph) -> Tensor {
    let n = graph.n();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / ((graph.degree(v) + 1) as f64).sqrt()).collect();
    let mut a = Tensor::zeros(&[n, n]);
    for v in 0..n {
        *a.at_mut(v, v) = inv_sqrt[v] * inv_sqrt[v];
    }
    for &(u, v) in graph.edges() {
        let w = inv_sqrt[u] * inv_sqrt[v];
        *a.at_mut(u, v) = w;
        *a.at_mut(v, u) = w;
    }
    a
}

/// `H' = A_hat H W + b`, no activation.
#[derive(Debug, Clone, Copy)]
pub struct Gcn {
    pub lin: Linear,
}

#[derive(Debug, Clone)]
pub struct GcnCache {
    agg: Tensor,
}

impl Gcn {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        group: Group,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        Gcn {
            lin: Linear::new(store, name, group, in_dim, out_dim, rng),
        }
    }

    pub fn forward(&self, store: &ParamStore, a_hat: &Tensor, h: &Tensor) -> (Tensor, GcnCache) {
        let agg = a_hat.matmul(h);
        (self.lin.forward(store, &agg), GcnCache { agg })
    }

    pub fn backward(&self, store: &mut ParamStore, a_hat: &Tensor, cache: &GcnCache, dy: &Tensor) -> Tensor {
        let dagg = self.lin.backward(store, &cache.agg, dy);
        a_hat.t_matmul(&dagg)
    }
}

/// `relu(norm(relu(norm(((1 + eps) H + A H) W1 + b1)) W2 + b2))` over a dense (possibly
/// masked) adjacency; the optional norms only see surviving vertices.
#[derive(Debug, Clone, Copy)]
pub struct Gin {
    pub eps: f64,
    pub l1: Linear,
    pub n1: Option<MaskedNorm>,
    pub l2: Linear,
    pub n2: Option<MaskedNorm>,
}

fn norm_forward(norm: &Option<MaskedNorm>, store: &ParamStore, x: Tensor, mask: &[bool]) -> (Tensor, Option<NormCache>) {
    match norm {
        Some(nm) => {
            let (y, c) = nm.forward(store, &x, mask);
            (y, Some(c))
        }
        None => (x, None),
    }
}

fn norm_backward(norm: &Option<MaskedNorm>, store: &mut ParamStore, cache: &Option<NormCache>, dy: Tensor) -> Tensor {
    match (norm, cache) {
        (Some(nm), Some(c)) => nm.backward(store, c, &dy),
        _ => dy,
    }
}

#[derive(Debug, Clone)]
pub struct GinCache {
    h: Tensor,
    agg: Tensor,
    c1: Option<NormCache>,
    y1: Tensor,
    a1: Tensor,
    c2: Option<NormCache>,
    y2: Tensor,
}

impl Gin {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        group: Group,
        in_dim: usize,
        out_dim: usize,
        eps: f64,
        norm: bool,
        rng: &mut R,
    ) -> Self {
        let l1 = Linear::new(store, &format!("{name}.mlp0"), group, in_dim, out_dim, rng);
        let n1 = norm.then(|| MaskedNorm::new(store, &format!("{name}.norm0"), group, out_dim));
        let l2 = Linear::new(store, &format!("{name}.mlp1"), group, out_dim, out_dim, rng);
        let n2 = norm.then(|| MaskedNorm::new(store, &format!("{name}.norm1"), group, out_dim));
        Gin { eps, l1, n1, l2, n2 }
    }

    pub fn forward(&self, store: &ParamStore, adj: &Tensor, mask: &[bool], h: &Tensor) -> (Tensor, GinCache) {
        let mut agg = adj.matmul(h);
        for (a, x) in agg.data_mut().iter_mut().zip(h.data()) {
            *a += (1.0 + self.eps) * x;
        }
        let (y1, c1) = norm_forward(&self.n1, store, self.l1.forward(store, &agg), mask);
        let a1 = relu(&y1);
        let (y2, c2) = norm_forward(&self.n2, store, self.l2.forward(store, &a1), mask);
        let out = relu(&y2);
        let cache = GinCache {
            h: h.clone(),
            agg,
            c1,
            y1,
            a1,
            c2,
            y2,
        };
        (out, cache)
    }

    /// Returns `(dL/dH, dL/dA)`; the adjacency gradient treats every entry as free.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        adj: &Tensor,
        cache: &GinCache,
        dy: &Tensor,
    ) -> (Tensor, Tensor) {
        let dz2 = norm_backward(&self.n2, store, &cache.c2, relu_backward(&cache.y2, dy));
        let da1 = self.l2.backward(store, &cache.a1, &dz2);
        let dz1 = norm_backward(&self.n1, store, &cache.c1, relu_backward(&cache.y1, &da1));
        let dagg = self.l1.backward(store, &cache.agg, &dz1);
        let mut dh = adj.t_matmul(&dagg);
        for (d, g) in dh.data_mut().iter_mut().zip(dagg.data()) {
            *d += (1.0 + self.eps) * g;
        }
        let dadj = dagg.matmul_t(&cache.h);
        (dh, dadj)
    }
}

/// Mean of the rows with `mask[v]`; all zeros when nothing survives.
pub fn masked_mean_pool(h: &Tensor, mask: &[bool]) -> Tensor {
    let d = h.cols();
    let mut out = vec![0.0; d];
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return Tensor::matrix(1, d, out);
    }
    for v in (0..h.rows()).filter(|&v| mask[v]) {
        for (o, x) in out.iter_mut().zip(h.row(v)) {
            *o += x;
        }
    }
    let c = count as f64;
    Tensor::matrix(1, d, out.into_iter().map(|x| x / c).collect())
}

pub fn masked_mean_pool_backward(n: usize, mask: &[bool], dy: &Tensor) -> Tensor {
    let d = dy.cols();
    let mut dh = Tensor::zeros(&[n, d]);
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return dh;
    }
    let c = count as f64;
    for v in (0..n).filter(|&v| mask[v]) {
        for (o, g) in dh.row_mut(v).iter_mut().zip(dy.data()) {
            *o = g / c;
        }
    }
    dh
}

/// Mean over the per-subgraph embeddings (rows of `hs`).
pub fn inter_mean_pool(hs: &Tensor) -> Tensor {
    let all = vec![true; hs.rows()];
    masked_mean_pool(hs, &all)
}

pub fn inter_mean_pool_backward(m: usize, dy: &Tensor) -> Tensor {
    masked_mean_pool_backward(m, &vec![true; m], dy)
}

/// Two-layer readout, `relu(x W1 + b1) W2 + b2`.
#[derive(Debug, Clone, Copy)]
pub struct ReadoutMlp {
    pub l1: Linear,
    pub l2: Linear,
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    x: Tensor,
    z1: Tensor,
    a1: Tensor,
}

impl ReadoutMlp {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        group: Group,
        dims: (usize, usize, usize),
        rng: &mut R,
    ) -> Self {
        ReadoutMlp {
            l1: Linear::new(store, &format!("{name}.0"), group, dims.0, dims.1, rng),
            l2: Linear::new(store, &format!("{name}.1"), group, dims.1, dims.2, rng),
        }
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> (Tensor, MlpCache) {
        let z1 = self.l1.forward(store, x);
        let a1 = relu(&z1);
        let y = self.l2.forward(store, &a1);
        (y, MlpCache { x: x.clone(), z1, a1 })
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &MlpCache, dy: &Tensor) -> Tensor {
        let da1 = self.l2.backward(store, &cache.a1, dy);
        let dz1 = relu_backward(&cache.z1, &da1);
        self.l1.backward(store, &cache.x, &dz1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn normalized_adjacency_of_an_edge() {
        let a = gcn_normalized_adjacency(&named::path(2));
        assert!((a.at(0, 0) - 0.5).abs() < 1e-15);
        assert!((a.at(0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pooling_ignores_masked_rows() {
        let h = Tensor::matrix(3, 1, vec![1.0, 100.0, 3.0]);
        assert_eq!(masked_mean_pool(&h, &[true, false, true]).data(), &[2.0]);
        assert_eq!(masked_mean_pool(&h, &[false; 3]).data(), &[0.0]);
    }
}
