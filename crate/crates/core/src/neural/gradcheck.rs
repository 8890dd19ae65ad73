//! Central-difference checks of every hand-written backward pass.

use super::layers::{
    gcn_normalized_adjacency, inter_mean_pool, inter_mean_pool_backward, masked_mean_pool,
    masked_mean_pool_backward, relu, relu_backward, Gcn, Gin, Linear, MaskedNorm, ReadoutMlp,
};
use super::loss::{loss_and_grad, mean_pairwise_cosine, Loss, Target};
use super::model::{base_features, Downstream, DownstreamConfig, SubgraphView, Upstream, UpstreamConfig};
use super::params::{Group, ParamStore};
use super::tensor::Tensor;
use crate::graph::{build_graph, LabeledGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckRow {
    pub layer: String,
    pub checked: usize,
    pub max_rel_err: f64,
}

impl GradcheckRow {
    pub fn passed(&self) -> bool {
        self.max_rel_err < TOLERANCE
    }
}

/// `|a - n| / max(1, |n|)`.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

fn random_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Compares analytic gradients of a scalar `f(store, inputs)` against central differences,
/// over every parameter entry and every entry of `inputs`.
fn check(
    layer: &str,
    store: &mut ParamStore,
    inputs: &[Tensor],
    f: &dyn Fn(&ParamStore, &[Tensor]) -> f64,
    grads: &dyn Fn(&mut ParamStore, &[Tensor]) -> Vec<Tensor>,
) -> GradcheckRow {
    store.zero_grad();
    let input_grads = grads(store, inputs);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let ids: Vec<_> = store.ids().collect();
    for id in ids {
        let analytic = store.grad(id).clone();
        for i in 0..analytic.len() {
            let orig = store.value(id).data()[i];
            store.value_mut(id).data_mut()[i] = orig + STEP;
            let up = f(store, inputs);
            store.value_mut(id).data_mut()[i] = orig - STEP;
            let down = f(store, inputs);
            store.value_mut(id).data_mut()[i] = orig;
            worst = worst.max(rel_err(analytic.data()[i], (up - down) / (2.0 * STEP)));
            checked += 1;
        }
    }
    for (t, g) in input_grads.iter().enumerate() {
        for i in 0..g.len() {
            let mut shifted = inputs.to_vec();
            shifted[t].data_mut()[i] += STEP;
            let up = f(store, &shifted);
            shifted[t].data_mut()[i] -= 2.0 * STEP;
            let down = f(store, &shifted);
            worst = worst.max(rel_err(g.data()[i], (up - down) / (2.0 * STEP)));
            checked += 1;
        }
    }
    GradcheckRow {
        layer: layer.to_string(),
        checked,
        max_rel_err: worst,
    }
}

fn check_graph() -> LabeledGraph {
    build_graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)], Some(vec![0, 1, 0, 1, 2])).expect("valid graph")
}

/// Runs all checks with inputs drawn from `seed`.
pub fn run_gradchecks(seed: u64) -> Vec<GradcheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Group::Downstream;
    let graph = check_graph();
    let n = graph.n();
    let mut rows = Vec::new();

    let mut store = ParamStore::new();
    let lin = Linear::new(&mut store, "lin", g, 4, 3, &mut rng);
    let r = random_tensor(&mut rng, 5, 3);
    let x = random_tensor(&mut rng, 5, 4);
    rows.push(check(
        "linear",
        &mut store,
        &[x],
        &|s, i| dot(&lin.forward(s, &i[0]), &r),
        &|s, i| vec![lin.backward(s, &i[0], &r)],
    ));

    let r = random_tensor(&mut rng, 5, 4);
    let x = random_tensor(&mut rng, 5, 4);
    rows.push(check(
        "relu",
        &mut ParamStore::new(),
        &[x],
        &|_, i| dot(&relu(&i[0]), &r),
        &|_, i| vec![relu_backward(&i[0], &r)],
    ));

    let mut store = ParamStore::new();
    let gcn = Gcn::new(&mut store, "gcn", g, 4, 3, &mut rng);
    let a_hat = gcn_normalized_adjacency(&graph);
    let r = random_tensor(&mut rng, n, 3);
    let x = random_tensor(&mut rng, n, 4);
    rows.push(check(
        "gcn",
        &mut store,
        &[x],
        &|s, i| dot(&gcn.forward(s, &a_hat, &i[0]).0, &r),
        &|s, i| {
            let (_, c) = gcn.forward(s, &a_hat, &i[0]);
            vec![gcn.backward(s, &a_hat, &c, &r)]
        },
    ));

    let mut store = ParamStore::new();
    let gin = Gin::new(&mut store, "gin", g, 4, 6, 0.1, true, &mut rng);
    let r = random_tensor(&mut rng, n, 6);
    let x = random_tensor(&mut rng, n, 4);
    // adjacency entries are checked as free inputs, as the sampler's gradient needs
    let adj = SubgraphView::full(&graph).adj;
    let gin_mask = vec![true, true, false, true, true];
    rows.push(check(
        "gin",
        &mut store,
        &[x, adj],
        &|s, i| dot(&gin.forward(s, &i[1], &gin_mask, &i[0]).0, &r),
        &|s, i| {
            let (_, c) = gin.forward(s, &i[1], &gin_mask, &i[0]);
            let (dh, da) = gin.backward(s, &i[1], &c, &r);
            vec![dh, da]
        },
    ));

    let mut store = ParamStore::new();
    let norm = MaskedNorm::new(&mut store, "norm", g, 4);
    for id in [norm.gamma, norm.beta] {
        let t = random_tensor(&mut rng, 1, 4);
        *store.value_mut(id) = t;
    }
    let mask = vec![true, false, true, true, false];
    let r = random_tensor(&mut rng, n, 4);
    let x = random_tensor(&mut rng, n, 4);
    rows.push(check(
        "masked_norm",
        &mut store,
        &[x],
        &|s, i| dot(&norm.forward(s, &i[0], &mask).0, &r),
        &|s, i| {
            let (_, c) = norm.forward(s, &i[0], &mask);
            vec![norm.backward(s, &c, &r)]
        },
    ));

    let r = random_tensor(&mut rng, 1, 4);
    let x = random_tensor(&mut rng, n, 4);
    rows.push(check(
        "masked_mean_pool",
        &mut ParamStore::new(),
        &[x],
        &|_, i| dot(&masked_mean_pool(&i[0], &mask), &r),
        &|_, _| vec![masked_mean_pool_backward(n, &mask, &r)],
    ));

    let r = random_tensor(&mut rng, 1, 4);
    let x = random_tensor(&mut rng, 3, 4);
    rows.push(check(
        "inter_mean_pool",
        &mut ParamStore::new(),
        &[x],
        &|_, i| dot(&inter_mean_pool(&i[0]), &r),
        &|_, _| vec![inter_mean_pool_backward(3, &r)],
    ));

    let mut store = ParamStore::new();
    let mlp = ReadoutMlp::new(&mut store, "mlp", g, (4, 5, 2), &mut rng);
    let r = random_tensor(&mut rng, 1, 2);
    let x = random_tensor(&mut rng, 1, 4);
    rows.push(check(
        "readout_mlp",
        &mut store,
        &[x],
        &|s, i| dot(&mlp.forward(s, &i[0]).0, &r),
        &|s, i| {
            let (_, c) = mlp.forward(s, &i[0]);
            vec![mlp.backward(s, &c, &r)]
        },
    ));

    for (name, loss, target) in [
        ("loss_l1", Loss::L1, Target::Values(vec![0.3, -2.0])),
        ("loss_l2", Loss::L2, Target::Values(vec![0.3, -2.0])),
        ("loss_cross_entropy", Loss::CrossEntropy, Target::Class(1)),
    ] {
        let x = Tensor::matrix(1, 2, vec![0.9, 0.4]);
        rows.push(check(
            name,
            &mut ParamStore::new(),
            &[x],
            &|_, i| loss_and_grad(loss, i[0].data(), &target).expect("matching target").0,
            &|_, i| {
                let g = loss_and_grad(loss, i[0].data(), &target).expect("matching target").1;
                vec![Tensor::matrix(1, 2, g)]
            },
        ));
    }

    let x = random_tensor(&mut rng, 3, 5);
    let as_rows = |t: &Tensor| (0..t.rows()).map(|i| t.row(i).to_vec()).collect::<Vec<_>>();
    rows.push(check(
        "aux_cosine",
        &mut ParamStore::new(),
        &[x],
        &|_, i| mean_pairwise_cosine(&as_rows(&i[0])).0,
        &|_, i| vec![Tensor::from_rows(&mean_pairwise_cosine(&as_rows(&i[0])).1)],
    ));

    let mut store = ParamStore::new();
    let cfg = DownstreamConfig {
        in_dim: 3,
        hidden: 6,
        layers: 2,
        out_dim: 2,
        eps: 0.0,
        rank_channels: 2,
        norm: true,
    };
    let down = Downstream::new(&mut store, cfg, &mut rng);
    let feats = base_features(&graph, 3).expect("labels fit");
    let mut v0 = SubgraphView::full(&graph);
    v0.ranks = Some(vec![Some(1), None, Some(2), None, None]);
    let mut v1 = SubgraphView::full(&graph);
    v1.vertices[2] = false;
    let masked_adj = {
        let mut a = v1.adj.clone();
        for u in 0..n {
            *a.at_mut(u, 2) = 0.0;
            *a.at_mut(2, u) = 0.0;
        }
        a
    };
    let target = Target::Class(0);
    let views_with = |i: &[Tensor]| {
        let mut a = v0.clone();
        a.adj = i[0].clone();
        let mut b = v1.clone();
        b.adj = i[1].clone();
        vec![a, b]
    };
    rows.push(check(
        "downstream_model",
        &mut store,
        &[v0.adj.clone(), masked_adj],
        &|s, i| {
            let (y, _) = down.forward(s, &feats, &views_with(i)).expect("valid views");
            loss_and_grad(Loss::CrossEntropy, y.data(), &target).expect("class target").0
        },
        &|s, i| {
            let views = views_with(i);
            let (y, c) = down.forward(s, &feats, &views).expect("valid views");
            let dy = loss_and_grad(Loss::CrossEntropy, y.data(), &target).expect("class target").1;
            down.backward(s, &views, &c, &Tensor::matrix(1, 2, dy))
        },
    ));

    let mut store = ParamStore::new();
    let up = Upstream::new(
        &mut store,
        UpstreamConfig {
            in_dim: 3,
            hidden: 5,
            m: 2,
            norm: true,
        },
        &mut rng,
    );
    let r = random_tensor(&mut rng, n, 2);
    let x = random_tensor(&mut rng, n, 3);
    rows.push(check(
        "upstream_model",
        &mut store,
        &[x],
        &|s, i| dot(&up.forward(s, &graph, &i[0]).0, &r),
        &|s, i| {
            let (_, c) = up.forward(s, &graph, &i[0]);
            vec![up.backward(s, &c, &r)]
        },
    ));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_layers_pass() {
        for row in run_gradchecks(7) {
            assert!(row.passed(), "{row:?}");
            assert!(row.checked > 0);
        }
    }
}
