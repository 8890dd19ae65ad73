use super::data::{Dataset, Sample, Task};
use super::loss::{loss_and_grad, mean_pairwise_cosine, sample_metric};
use super::model::{
    base_features, edge_gradients, scores_grad, theta_from_scores, Downstream, DownstreamConfig, SubgraphView,
    Upstream, UpstreamConfig,
};
use super::optim::Adam;
use super::params::{Group, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::imle::{
    apply_policy, full_mask, imle_difference, map_solve, perturb, row_rng, target_grad, Encoding, GradAgg, Mode,
    Noise, Policy,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    /// Plain GIN on the whole graph.
    Baseline,
    /// Learned upstream scores, subgraphs sampled by perturb-and-MAP, I-MLE gradients.
    Imle,
    /// Uniformly random `k`-subsets (zero scores plus Gumbel noise), no upstream.
    Random,
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(TrainMode::Baseline),
            "imle" => Ok(TrainMode::Imle),
            "random" => Ok(TrainMode::Random),
            _ => Err(Error::InvalidArgument(format!("unknown training mode {s:?} (baseline, imle, random)"))),
        }
    }
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Baseline => "baseline",
            TrainMode::Imle => "imle",
            TrainMode::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub policy: Policy,
    pub k: usize,
    pub m: usize,
    pub sampler_mode: Mode,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: usize,
    pub gin_layers: usize,
    pub gin_eps: f64,
    pub upstream_hidden: usize,
    pub aux_weight: f64,
    pub lambda: f64,
    pub noise_scale: f64,
    pub grad_agg: GradAgg,
    /// Feed ordered ranks to the downstream model as a one-hot channel.
    pub rank_channel: bool,
    /// Per-subgraph feature normalization in both networks.
    pub norm: bool,
    pub divergence_threshold: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(mode: TrainMode, seed: u64) -> Self {
        TrainConfig {
            mode,
            policy: Policy::NodeDelete,
            k: 1,
            m: 3,
            sampler_mode: Mode::Unordered,
            epochs: 50,
            lr: 1e-3,
            batch_size: 8,
            hidden: 32,
            gin_layers: 3,
            gin_eps: 0.0,
            upstream_hidden: 16,
            aux_weight: 0.0,
            lambda: 1.0,
            noise_scale: 1.0,
            grad_agg: GradAgg::Sum,
            rank_channel: false,
            norm: true,
            divergence_threshold: 1e6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.mode != TrainMode::Baseline && (self.m == 0 || self.m > 255) {
            return bad(format!("m must be in 1..=255, got {}", self.m));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 || self.hidden == 0 || self.upstream_hidden == 0 {
            return bad("batch size and widths must be positive".into());
        }
        if !(self.lambda > 0.0 && self.noise_scale > 0.0) {
            return bad("lambda and noise scale must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub metric: f64,
}

/// Upstream scorer (when sampling is learned) plus downstream GIN over sampled subgraphs.
#[derive(Debug, Clone)]
pub struct OsanModel {
    pub store: ParamStore,
    pub cfg: TrainConfig,
    pub task: Task,
    pub num_labels: usize,
    upstream: Option<Upstream>,
    downstream: Downstream,
}

struct Forward {
    pred: Vec<f64>,
    loss: f64,
}

impl OsanModel {
    pub fn new(cfg: TrainConfig, task: Task, num_labels: usize) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut store = ParamStore::new();
        let rank_channels = if cfg.rank_channel && cfg.sampler_mode == Mode::Ordered { cfg.k } else { 0 };
        let downstream = Downstream::new(
            &mut store,
            DownstreamConfig {
                in_dim: num_labels,
                hidden: cfg.hidden,
                layers: cfg.gin_layers,
                out_dim: task.out_dim(),
                eps: cfg.gin_eps,
                rank_channels,
                norm: cfg.norm,
            },
            &mut rng,
        );
        let upstream = (cfg.mode == TrainMode::Imle).then(|| {
            Upstream::new(
                &mut store,
                UpstreamConfig {
                    in_dim: num_labels,
                    hidden: cfg.upstream_hidden,
                    m: cfg.m,
                    norm: cfg.norm,
                },
                &mut rng,
            )
        });
        Ok(OsanModel {
            store,
            cfg,
            task,
            num_labels,
            upstream,
            downstream,
        })
    }

    fn draw(&self, graph: &LabeledGraph, theta_row: &[f64], seed: u64, stream: u64) -> Result<(Vec<f64>, Encoding)> {
        let noise = Noise::Gumbel {
            scale: self.cfg.noise_scale,
        };
        if self.cfg.k > self.cfg.policy.domain_size(graph) {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds the {} domain of a graph with {} vertices",
                self.cfg.k,
                self.cfg.policy,
                graph.n()
            )));
        }
        let perturbed = perturb(theta_row, noise, &mut row_rng(seed, stream));
        let z = map_solve(&perturbed, self.cfg.k, self.cfg.sampler_mode)?;
        Ok((perturbed, z))
    }

    fn view(&self, graph: &LabeledGraph, z: &Encoding) -> Result<SubgraphView> {
        let view = SubgraphView::from_mask(&apply_policy(self.cfg.policy, z, graph)?, graph);
        Ok(if self.downstream.cfg.rank_channels > 0 && !self.cfg.policy.is_edge_policy() {
            view.with_ranks(z)
        } else {
            view
        })
    }

    /// Forward pass on one graph; with `learn` the gradients are accumulated into the store.
    fn run(&mut self, sample: &Sample, seed: u64, epoch: usize, stream_base: u64, learn: bool) -> Result<Forward> {
        let graph = &sample.graph;
        let x = base_features(graph, self.num_labels)?;
        let domain = self.cfg.policy.domain_size(graph);
        let mut draws = Vec::new();
        let mut up_cache = None;
        let views: Vec<SubgraphView> = match self.cfg.mode {
            TrainMode::Baseline => vec![SubgraphView::from_mask(&full_mask(graph), graph)],
            TrainMode::Random | TrainMode::Imle => {
                let rows: Vec<Vec<f64>> = match &self.upstream {
                    Some(up) => {
                        let (scores, cache) = up.forward(&self.store, graph, &x);
                        up_cache = Some(cache);
                        theta_from_scores(&scores, self.cfg.policy, graph)?.rows()
                    }
                    None => vec![vec![0.0; domain]; self.cfg.m],
                };
                let mut views = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let (perturbed, z) = self.draw(graph, row, seed, stream_base + i as u64)?;
                    views.push(self.view(graph, &z)?);
                    draws.push((perturbed, z));
                }
                views
            }
        };
        let (y, cache) = self.downstream.forward(&self.store, &x, &views)?;
        let pred = y.data().to_vec();
        let (mut loss, dpred) = loss_and_grad(self.task.loss(), &pred, &sample.target)?;
        let (aux, aux_grads) = if self.cfg.aux_weight > 0.0 {
            mean_pairwise_cosine(&draws.iter().map(|(_, z)| z.as_f64()).collect::<Vec<_>>())
        } else {
            (0.0, vec![])
        };
        loss += self.cfg.aux_weight * aux;
        if !loss.is_finite() || loss > self.cfg.divergence_threshold {
            return Err(Error::Diverged { epoch, loss });
        }
        if learn {
            let dy = Tensor::matrix(1, pred.len(), dpred);
            let dadj = self.downstream.backward(&mut self.store, &views, &cache, &dy);
            if let (Some(up), Some(up_cache)) = (&self.upstream, &up_cache) {
                let mut dtheta = Vec::with_capacity(draws.len());
                for (i, (perturbed, z)) in draws.iter().enumerate() {
                    let eg = edge_gradients(graph, &dadj[i]);
                    let mut target = target_grad(self.cfg.policy, graph, &eg, self.cfg.grad_agg)?;
                    if let Some(g) = aux_grads.get(i) {
                        for (t, a) in target.iter_mut().zip(g) {
                            *t += self.cfg.aux_weight * a;
                        }
                    }
                    dtheta.push(imle_difference(perturbed, z, &target, self.cfg.lambda)?);
                }
                let dc = scores_grad(&dtheta, self.cfg.policy, graph);
                up.backward(&mut self.store, up_cache, &dc);
            }
        }
        Ok(Forward { pred, loss })
    }

    /// Prediction with sampling driven by `(seed, stream_base + row)`.
    pub fn predict(&mut self, sample: &Sample, seed: u64, stream_base: u64) -> Result<(Vec<f64>, f64)> {
        let f = self.run(sample, seed, 0, stream_base, false)?;
        Ok((f.pred, f.loss))
    }

    /// Downstream prediction on explicitly given subgraphs, bypassing the sampler.
    pub fn predict_on(&self, graph: &LabeledGraph, views: &[SubgraphView]) -> Result<Vec<f64>> {
        let x = base_features(graph, self.num_labels)?;
        Ok(self.downstream.forward(&self.store, &x, views)?.0.into_data())
    }

    pub fn downstream(&self) -> &Downstream {
        &self.downstream
    }

    pub fn upstream(&self) -> Option<&Upstream> {
        self.upstream.as_ref()
    }
}

const EVAL_SALT: u64 = 0xe7a1_u64 << 32;

fn stream_base(epoch: usize, index: usize) -> u64 {
    ((epoch as u64) << 40) | ((index as u64) << 8)
}

pub fn evaluate(model: &mut OsanModel, samples: &[Sample]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Ok((0.0, 0.0));
    }
    let seed = model.cfg.seed ^ EVAL_SALT;
    let (mut loss, mut metric) = (0.0, 0.0);
    for (i, s) in samples.iter().enumerate() {
        let (pred, l) = model.predict(s, seed, stream_base(0, i))?;
        loss += l;
        metric += sample_metric(&pred, &s.target);
    }
    let n = samples.len() as f64;
    Ok((loss / n, metric / n))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub metrics: Vec<EpochMetrics>,
    pub model: OsanModel,
}

impl TrainReport {
    /// Metric of `split` after the last epoch.
    pub fn final_metric(&self, split: &str) -> Option<f64> {
        self.metrics.iter().rev().find(|m| m.split == split).map(|m| m.metric)
    }
}

/// Trains on `data.train`, reporting train/val/test metrics after every epoch.
pub fn train(cfg: &TrainConfig, data: &Dataset, mut on_epoch: impl FnMut(&EpochMetrics)) -> Result<TrainReport> {
    if data.train.is_empty() {
        return Err(Error::InvalidArgument("empty training split".into()));
    }
    let mut model = OsanModel::new(cfg.clone(), data.task, data.num_labels)?;
    let mut adam_up = Adam::new(&model.store, Group::Upstream, cfg.lr);
    let mut adam_down = Adam::new(&model.store, Group::Downstream, cfg.lr);
    let mut shuffle = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle.set_stream(0x5u64 << 56);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut metrics = Vec::new();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        let (mut loss, mut metric) = (0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            model.store.zero_grad();
            for &i in batch {
                let s = &data.train[i];
                let f = model.run(s, cfg.seed, epoch, stream_base(epoch, i), true)?;
                loss += f.loss;
                metric += sample_metric(&f.pred, &s.target);
            }
            let scale = 1.0 / batch.len() as f64;
            model.store.scale_grads(Group::Upstream, scale);
            model.store.scale_grads(Group::Downstream, scale);
            adam_up.step(&mut model.store);
            adam_down.step(&mut model.store);
        }
        let n = data.train.len() as f64;
        let mut push = |split: &str, loss: f64, metric: f64| {
            let m = EpochMetrics {
                epoch,
                split: split.to_string(),
                loss,
                metric,
            };
            on_epoch(&m);
            metrics.push(m);
        };
        push("train", loss / n, metric / n);
        let (l, m) = evaluate(&mut model, &data.val)?;
        push("val", l, m);
        let (l, m) = evaluate(&mut model, &data.test)?;
        push("test", l, m);
    }
    Ok(TrainReport { metrics, model })
}
