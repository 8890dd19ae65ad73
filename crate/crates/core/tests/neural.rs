use oswl_core::gadgets::{gen_cfi, CfiVariant};
use oswl_core::imle::{apply_policy, Encoding, Mode, Policy};
use oswl_core::neural::{
    base_features, cfi_pair_dataset, checkpoint, train, triangle_dataset, Adam, Group, OsanModel, ParamStore, Sample,
    SubgraphView, Target, Task, Tensor, TrainConfig, TrainMode, Upstream, UpstreamConfig,
};
use oswl_core::LabeledGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn g2() -> LabeledGraph {
    gen_cfi(2, CfiVariant::G).unwrap().graph
}

fn model(mode: TrainMode, seed: u64) -> OsanModel {
    OsanModel::new(TrainConfig::new(mode, seed), Task::CfiPairs, 6).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn prediction_is_permutation_invariant() {
    let g = g2();
    let m = model(TrainMode::Random, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..5 {
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rng);
        let h = g.permute(&perm).unwrap();
        let deleted = [trial, (trial + 5) % g.n()];
        let views = |graph: &LabeledGraph, del: &[usize]| -> Vec<SubgraphView> {
            del.iter()
                .map(|&x| {
                    let z = Encoding::from_ranking(graph.n(), &[x], Mode::Unordered);
                    SubgraphView::from_mask(&apply_policy(Policy::NodeDelete, &z, graph).unwrap(), graph)
                })
                .collect()
        };
        let moved: Vec<usize> = deleted.iter().map(|&x| perm[x]).collect();
        let a = m.predict_on(&g, &views(&g, &deleted)).unwrap();
        let b = m.predict_on(&h, &views(&h, &moved)).unwrap();
        assert!(close(&a, &b, 1e-10), "{a:?} vs {b:?}");
        // reordering the subgraphs changes nothing either
        let mut rev = moved.clone();
        rev.reverse();
        assert!(close(&b, &m.predict_on(&h, &views(&h, &rev)).unwrap(), 1e-12));
    }
}

#[test]
fn full_masks_reduce_to_the_baseline() {
    let g = g2();
    let mut m = model(TrainMode::Baseline, 2);
    let sample = Sample {
        graph: g.clone(),
        target: Target::Class(0),
    };
    let (base, _) = m.predict(&sample, 2, 0).unwrap();
    let one = m.predict_on(&g, &[SubgraphView::full(&g)]).unwrap();
    assert_eq!(base, one);
    let three = m.predict_on(&g, &vec![SubgraphView::full(&g); 3]).unwrap();
    assert!(close(&one, &three, 1e-12));
}

#[test]
fn upstream_is_equivariant_and_constant_without_weights() {
    let g = g2();
    let mut store = ParamStore::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let up = Upstream::new(
        &mut store,
        UpstreamConfig {
            in_dim: 6,
            hidden: 8,
            m: 3,
            norm: true,
        },
        &mut rng,
    );
    let x = base_features(&g, 6).unwrap();
    let (scores, _) = up.forward(&store, &g, &x);
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(&mut rng);
    let h = g.permute(&perm).unwrap();
    let (moved, _) = up.forward(&store, &h, &base_features(&h, 6).unwrap());
    for v in 0..g.n() {
        assert!(close(scores.row(v), moved.row(perm[v]), 1e-10));
    }

    for id in store.ids_in(Group::Upstream) {
        if store.param(id).name.ends_with(".w") {
            let shape = store.value(id).shape().to_vec();
            *store.value_mut(id) = Tensor::zeros(&shape);
        }
    }
    let (flat, _) = up.forward(&store, &g, &x);
    for v in 1..g.n() {
        assert_eq!(flat.row(v), flat.row(0));
    }
}

#[test]
fn adam_follows_the_closed_form_recurrence() {
    let mut store = ParamStore::new();
    let id = store.add("x", Group::Downstream, Tensor::matrix(1, 1, vec![2.0]));
    let mut adam = Adam::new(&store, Group::Downstream, 0.1);
    // f(x) = x^2 evaluated by hand with the textbook update
    let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8, 0.1);
    let (mut x, mut m, mut v) = (2.0f64, 0.0f64, 0.0f64);
    for t in 1..=5 {
        store.zero_grad();
        let g = 2.0 * store.value(id).data()[0];
        store.accumulate(id, &Tensor::matrix(1, 1, vec![g]));
        adam.step(&mut store);

        let gr = 2.0 * x;
        m = b1 * m + (1.0 - b1) * gr;
        v = b2 * v + (1.0 - b2) * gr * gr;
        let mh = m / (1.0 - b1.powi(t));
        let vh = v / (1.0 - b2.powi(t));
        x -= lr * mh / (vh.sqrt() + eps);
        assert!((store.value(id).data()[0] - x).abs() < 1e-14, "step {t}");
    }
    assert_eq!(adam.steps(), 5);
}

#[test]
fn triangle_mae_falls_early() {
    let data = triangle_dataset(200, 12, 3).unwrap();
    let mut cfg = TrainConfig::new(TrainMode::Baseline, 3);
    cfg.epochs = 10;
    let mut mae = Vec::new();
    train(&cfg, &data, |m| {
        if m.split == "train" {
            mae.push(m.metric);
        }
    })
    .unwrap();
    let rises = mae.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(rises <= 2, "train MAE {mae:?}");
    assert!(mae[9] < mae[0]);
}

#[test]
fn training_is_deterministic_and_checkpoints_round_trip() {
    let data = cfi_pair_dataset(20, 2, 5).unwrap();
    let mut cfg = TrainConfig::new(TrainMode::Imle, 5);
    cfg.epochs = 3;
    let a = train(&cfg, &data, |_| {}).unwrap();
    let b = train(&cfg, &data, |_| {}).unwrap();
    assert_eq!(a.metrics, b.metrics);
    let bytes = checkpoint::to_bytes(&a.model.store);
    assert_eq!(bytes, checkpoint::to_bytes(&b.model.store));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    checkpoint::save(&a.model.store, &path).unwrap();
    let mut fresh = model(TrainMode::Imle, 99);
    checkpoint::restore(&mut fresh.store, checkpoint::load(&path).unwrap()).unwrap();
    assert_eq!(checkpoint::to_bytes(&fresh.store), bytes);
    let g = data.test[0].graph.clone();
    let view = [SubgraphView::full(&g)];
    assert_eq!(fresh.predict_on(&g, &view).unwrap(), a.model.predict_on(&g, &view).unwrap());

    // a baseline model has no upstream tensors to receive them
    let mut other = model(TrainMode::Baseline, 0);
    assert!(checkpoint::restore(&mut other.store, checkpoint::load(&path).unwrap()).is_err());
}
