use super::layers::{
    gcn_normalized_adjacency, inter_mean_pool, inter_mean_pool_backward, masked_mean_pool,
    masked_mean_pool_backward, relu, relu_backward, Gcn, GcnCache, Gin, GinCache, MaskedNorm, MlpCache, NormCache,
    ReadoutMlp,
};
use super::params::{Group, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::imle::{Encoding, Policy, SubgraphMask, ThetaMatrix};
use rand::Rng;

/// One-hot labels followed by any stored vertex features.
pub fn base_features(graph: &LabeledGraph, num_labels: usize) -> Result<Tensor> {
    let extra = graph.vertex_features().map_or(0, |f| f.first().map_or(0, Vec::len));
    let d = num_labels + extra;
    let mut x = Tensor::zeros(&[graph.n(), d]);
    for v in 0..graph.n() {
        let l = graph.label(v) as usize;
        if l >= num_labels {
            return Err(Error::Shape(format!("label {l} outside the {num_labels}-wide one-hot")));
        }
        *x.at_mut(v, l) = 1.0;
        if let Some(f) = graph.vertex_features() {
            x.row_mut(v)[num_labels..].copy_from_slice(&f[v]);
        }
    }
    Ok(x)
}

/// What the downstream network sees of one sampled subgraph.
#[derive(Debug, Clone)]
pub struct SubgraphView {
    /// Dense `n x n` adjacency with removed edges zeroed.
    pub adj: Tensor,
    /// Surviving vertices; they take part in message passing and pooling.
    pub vertices: Vec<bool>,
    /// 1-based rank per vertex when an ordered encoding is fed as a channel.
    pub ranks: Option<Vec<Option<usize>>>,
}

impl SubgraphView {
    pub fn from_mask(mask: &SubgraphMask, graph: &LabeledGraph) -> Self {
        let n = graph.n();
        let mut adj = Tensor::zeros(&[n, n]);
        for (&(u, v), &keep) in graph.edges().iter().zip(&mask.edges) {
            if keep && mask.vertices[u] && mask.vertices[v] {
                *adj.at_mut(u, v) = 1.0;
                *adj.at_mut(v, u) = 1.0;
            }
        }
        SubgraphView {
            adj,
            vertices: mask.vertices.clone(),
            ranks: None,
        }
    }

    /// Adds rank positions from a vertex-level ordered encoding.
    pub fn with_ranks(mut self, z: &Encoding) -> Self {
        if z.n() == self.vertices.len() {
            self.ranks = Some((0..z.n()).map(|i| z.rank_of(i)).collect());
        }
        self
    }

    pub fn full(graph: &LabeledGraph) -> Self {
        Self::from_mask(&crate::imle::full_mask(graph), graph)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownstreamConfig {
    pub in_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub out_dim: usize,
    pub eps: f64,
    /// Width of the rank one-hot channel; 0 disables it.
    pub rank_channels: usize,
    /// Per-subgraph feature normalization inside every GIN layer.
    pub norm: bool,
}

/// Shared GIN over each subgraph, masked mean pooling, mean over subgraphs, MLP readout.
#[derive(Debug, Clone)]
pub struct Downstream {
    pub cfg: DownstreamConfig,
    gin: Vec<Gin>,
    readout: ReadoutMlp,
}

#[derive(Debug, Clone)]
pub struct DownstreamCache {
    per_subgraph: Vec<Vec<GinCache>>,
    readout: MlpCache,
    n: usize,
}

impl Downstream {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, cfg: DownstreamConfig, rng: &mut R) -> Self {
        let mut dim = cfg.in_dim + 1 + cfg.rank_channels;
        let mut gin = Vec::with_capacity(cfg.layers);
        for l in 0..cfg.layers {
            gin.push(Gin::new(store, &format!("down.gin{l}"), Group::Downstream, dim, cfg.hidden, cfg.eps, cfg.norm, rng));
            dim = cfg.hidden;
        }
        let readout = ReadoutMlp::new(store, "down.readout", Group::Downstream, (dim, cfg.hidden, cfg.out_dim), rng);
        Downstream { cfg, gin, readout }
    }

    fn input(&self, x: &Tensor, view: &SubgraphView) -> Tensor {
        let n = x.rows();
        let member = Tensor::matrix(n, 1, view.vertices.iter().map(|&b| b as u8 as f64).collect());
        let mut rank = Tensor::zeros(&[n, self.cfg.rank_channels]);
        if let Some(ranks) = &view.ranks {
            for (v, r) in ranks.iter().enumerate() {
                if let Some(r) = r.filter(|&r| r >= 1 && r <= self.cfg.rank_channels) {
                    *rank.at_mut(v, r - 1) = 1.0;
                }
            }
        }
        Tensor::hcat(&[x, &member, &rank])
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor, views: &[SubgraphView]) -> Result<(Tensor, DownstreamCache)> {
        if views.is_empty() {
            return Err(Error::InvalidArgument("downstream needs at least one subgraph".into()));
        }
        if x.cols() != self.cfg.in_dim {
            return Err(Error::Shape(format!("features have width {}, model expects {}", x.cols(), self.cfg.in_dim)));
        }
        let mut pooled = Vec::with_capacity(views.len());
        let mut caches = Vec::with_capacity(views.len());
        for view in views {
            let mut h = self.input(x, view);
            let mut layer_caches = Vec::with_capacity(self.gin.len());
            for layer in &self.gin {
                let (out, c) = layer.forward(store, &view.adj, &view.vertices, &h);
                layer_caches.push(c);
                h = out;
            }
            pooled.push(masked_mean_pool(&h, &view.vertices).into_data());
            caches.push(layer_caches);
        }
        let hs = Tensor::from_rows(&pooled);
        let (y, readout) = self.readout.forward(store, &inter_mean_pool(&hs));
        Ok((
            y,
            DownstreamCache {
                per_subgraph: caches,
                readout,
                n: x.rows(),
            },
        ))
    }

    /// Accumulates parameter gradients; returns `dL/dA` for every subgraph.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        views: &[SubgraphView],
        cache: &DownstreamCache,
        dy: &Tensor,
    ) -> Vec<Tensor> {
        let dpool = self.readout.backward(store, &cache.readout, dy);
        let dhs = inter_mean_pool_backward(views.len(), &dpool);
        let mut dadj = Vec::with_capacity(views.len());
        for (g, view) in views.iter().enumerate() {
            let mut dh = masked_mean_pool_backward(cache.n, &view.vertices, &Tensor::matrix(1, dhs.cols(), dhs.row(g).to_vec()));
            let mut da = Tensor::zeros(&[cache.n, cache.n]);
            for (layer, c) in self.gin.iter().zip(&cache.per_subgraph[g]).rev() {
                let (dprev, dadj_l) = layer.backward(store, &view.adj, c, &dh);
                da.add_assign(&dadj_l);
                dh = dprev;
            }
            dadj.push(da);
        }
        dadj
    }
}

/// `dL/dA` folded onto the canonical edges: `G[u][v] + G[v][u]`.
pub fn edge_gradients(graph: &LabeledGraph, dadj: &Tensor) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|&(u, v)| dadj.at(u, v) + dadj.at(v, u))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpstreamConfig {
    pub in_dim: usize,
    pub hidden: usize,
    pub m: usize,
    pub norm: bool,
}

/// Three GCN layers producing one score column per sampled subgraph; the first two are
/// followed by (optional) normalization and ReLU.
#[derive(Debug, Clone)]
pub struct Upstream {
    pub cfg: UpstreamConfig,
    layers: [Gcn; 3],
    norms: Vec<Option<MaskedNorm>>,
}

#[derive(Debug, Clone)]
pub struct UpstreamCache {
    a_hat: Tensor,
    gcn: Vec<GcnCache>,
    norm: Vec<Option<NormCache>>,
    pre: Vec<Tensor>,
}

impl Upstream {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, cfg: UpstreamConfig, rng: &mut R) -> Self {
        let g = Group::Upstream;
        let layers = [
            Gcn::new(store, "up.gcn0", g, cfg.in_dim, cfg.hidden, rng),
            Gcn::new(store, "up.gcn1", g, cfg.hidden, cfg.hidden, rng),
            Gcn::new(store, "up.gcn2", g, cfg.hidden, cfg.m, rng),
        ];
        let norms = (0..2)
            .map(|i| cfg.norm.then(|| MaskedNorm::new(store, &format!("up.norm{i}"), g, cfg.hidden)))
            .collect();
        Upstream { cfg, layers, norms }
    }

    /// Vertex scores `C` (`n x m`).
    pub fn forward(&self, store: &ParamStore, graph: &LabeledGraph, x: &Tensor) -> (Tensor, UpstreamCache) {
        let a_hat = gcn_normalized_adjacency(graph);
        let all = vec![true; graph.n()];
        let mut h = x.clone();
        let (mut gcn, mut norm, mut pre) = (Vec::new(), Vec::new(), Vec::new());
        for (i, layer) in self.layers.iter().enumerate() {
            let (z, c) = layer.forward(store, &a_hat, &h);
            gcn.push(c);
            h = if i + 1 < self.layers.len() {
                let (y, nc) = match &self.norms[i] {
                    Some(nm) => {
                        let (y, c) = nm.forward(store, &z, &all);
                        (y, Some(c))
                    }
                    None => (z, None),
                };
                norm.push(nc);
                let a = relu(&y);
                pre.push(y);
                a
            } else {
                z
            };
        }
        (h, UpstreamCache { a_hat, gcn, norm, pre })
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &UpstreamCache, dc: &Tensor) -> Tensor {
        let mut d = dc.clone();
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                d = relu_backward(&cache.pre[i], &d);
                if let (Some(nm), Some(c)) = (&self.norms[i], &cache.norm[i]) {
                    d = nm.backward(store, c, &d);
                }
            }
            d = self.layers[i].backward(store, &cache.a_hat, &cache.gcn[i], &d);
        }
        d
    }
}

/// Rows of `theta` from vertex scores; edge policies score `c_u + c_v`.
pub fn theta_from_scores(scores: &Tensor, policy: Policy, graph: &LabeledGraph) -> Result<ThetaMatrix> {
    let m = scores.cols();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let row: Vec<f64> = if policy.is_edge_policy() {
            graph.edges().iter().map(|&(u, v)| scores.at(u, i) + scores.at(v, i)).collect()
        } else {
            (0..graph.n()).map(|v| scores.at(v, i)).collect()
        };
        rows.push(row);
    }
    if graph.n() == 0 || (policy.is_edge_policy() && graph.num_edges() == 0) {
        return Ok(ThetaMatrix { m, n: 0, values: Vec::new() });
    }
    ThetaMatrix::from_rows(&rows)
}

/// Inverse of [`theta_from_scores`] for gradients: `dtheta` rows to `dC` (`n x m`).
pub fn scores_grad(dtheta: &[Vec<f64>], policy: Policy, graph: &LabeledGraph) -> Tensor {
    let m = dtheta.len();
    let mut dc = Tensor::zeros(&[graph.n(), m]);
    for (i, row) in dtheta.iter().enumerate() {
        if policy.is_edge_policy() {
            for (&(u, v), &g) in graph.edges().iter().zip(row) {
                *dc.at_mut(u, i) += g;
                *dc.at_mut(v, i) += g;
            }
        } else {
            for (v, &g) in row.iter().enumerate() {
                *dc.at_mut(v, i) += g;
            }
        }
    }
    dc
}
