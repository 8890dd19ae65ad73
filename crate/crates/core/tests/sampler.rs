use oswl_core::imle::{
    exact_distribution, expected_gradient, imle_difference, imle_estimate, map_solve, perturb, row_rng, sample_subgraph,
    Encoding, Mode, Noise, SamplerConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Every k-subset (as a sorted list) or k-arrangement of `0..n`, built independently of the crate.
fn brute_rankings(n: usize, k: usize, ordered: bool) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for r in &out {
            for v in 0..n {
                if !r.contains(&v) && (ordered || r.last().is_none_or(|&l| v > l)) {
                    let mut r2 = r.clone();
                    r2.push(v);
                    next.push(r2);
                }
            }
        }
        out = next;
    }
    out
}

fn brute_argmax(theta: &[f64], k: usize, mode: Mode) -> Vec<u32> {
    let ordered = mode == Mode::Ordered;
    let score = |r: &[usize]| -> f64 {
        r.iter()
            .enumerate()
            .map(|(j, &v)| theta[v] * if ordered { (k - j) as f64 } else { 1.0 })
            .sum()
    };
    let all = brute_rankings(theta.len(), k, ordered);
    let best = all.iter().map(|r| score(r)).fold(f64::NEG_INFINITY, f64::max);
    // tie rule: lexicographically smallest ranking among the maximizers
    let winner = all.iter().filter(|r| score(r) == best).min().expect("nonempty");
    let mut z = vec![0u32; theta.len()];
    for (j, &v) in winner.iter().enumerate() {
        z[v] = if ordered { (k - j) as u32 } else { 1 };
    }
    z
}

#[test]
fn map_matches_brute_force_including_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=7 {
        for k in 1..=3.min(n) {
            for mode in [Mode::Unordered, Mode::Ordered] {
                for trial in 0..60 {
                    let theta: Vec<f64> = if trial % 2 == 0 {
                        (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
                    } else {
                        (0..n).map(|_| rng.random_range(-1..=1) as f64).collect()
                    };
                    let z = map_solve(&theta, k, mode).unwrap();
                    assert_eq!(z.z, brute_argmax(&theta, k, mode), "theta {theta:?} k {k} {mode}");
                }
            }
        }
    }
}

#[test]
fn uniform_theta_gives_uniform_subsets() {
    let cfg = SamplerConfig::new(2, 1, Mode::Unordered, 5);
    let mut rng = row_rng(5, 0);
    let draws = 10_000;
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(sample_subgraph(&[0.0; 4], &cfg, &mut rng).unwrap().z).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    for c in counts.values() {
        assert!((*c as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.02);
    }
}

/// Probability that Gumbel top-k selects the set `s`: the sum over orderings of
/// sequential softmax draws without replacement.
fn plackett_luce_set(theta: &[f64], s: &[usize]) -> f64 {
    fn rec(w: &[f64], left: &mut Vec<usize>, remaining_mass: f64) -> f64 {
        if left.is_empty() {
            return 1.0;
        }
        let mut total = 0.0;
        for i in 0..left.len() {
            let v = left.remove(i);
            total += w[v] / remaining_mass * rec(w, left, remaining_mass - w[v]);
            left.insert(i, v);
        }
        total
    }
    let w: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    rec(&w, &mut s.to_vec(), w.iter().sum())
}

#[test]
fn gumbel_top_k_follows_plackett_luce() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let draws = 20_000;
    for trial in 0..5 {
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = SamplerConfig::new(2, 1, Mode::Unordered, trial);
        let mut srng = row_rng(trial, 0);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(sample_subgraph(&theta, &cfg, &mut srng).unwrap().selected()).or_default() += 1;
        }
        for s in brute_rankings(4, 2, false) {
            let p = plackett_luce_set(&theta, &s);
            let f = counts.get(&s).copied().unwrap_or(0) as f64 / draws as f64;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((f - p).abs() <= 4.0 * sigma, "set {s:?}: freq {f} vs {p}");
        }
    }
}

#[test]
fn plackett_luce_is_not_the_exponential_family() {
    // documents a gap between the sampler and p(z; theta) for non-constant theta
    let theta = [1.0, 0.0, 0.0, -1.0];
    let exact = exact_distribution(&theta, 2, Mode::Unordered).unwrap();
    let p01 = exact.probability(&[1, 1, 0, 0]).unwrap();
    assert!((plackett_luce_set(&theta, &[0, 1]) - p01).abs() > 0.01);
    let flat = exact_distribution(&[0.0; 4], 2, Mode::Unordered).unwrap();
    assert!((plackett_luce_set(&[0.0; 4], &[0, 1]) - flat.probability(&[1, 1, 0, 0]).unwrap()).abs() < 1e-12);
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[test]
fn imle_tracks_the_expected_gradient() {
    let (n, k) = (6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let loss = |e: &Encoding| e.z.iter().zip(&b).map(|(&z, t)| (z as f64 - t).powi(2)).sum::<f64>();
    let thetas: Vec<Vec<f64>> = (0..20).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut cos = 0.0;
    for (i, theta) in thetas.iter().enumerate() {
        let exact = expected_gradient(&exact_distribution(theta, k, Mode::Unordered).unwrap(), loss);
        let cfg = SamplerConfig::new(k, 1, Mode::Unordered, i as u64);
        let mut srng = row_rng(i as u64, 0);
        let mut est = vec![0.0; n];
        for _ in 0..64 {
            let perturbed = perturb(theta, cfg.noise, &mut srng);
            let z = map_solve(&perturbed, k, Mode::Unordered).unwrap();
            let target: Vec<f64> = z.z.iter().zip(&b).map(|(&zi, t)| 2.0 * (zi as f64 - t)).collect();
            for (e, d) in est.iter_mut().zip(imle_difference(&perturbed, &z, &target, 1.0).unwrap()) {
                *e += d / 64.0;
            }
        }
        cos += cosine(&est, &exact) / thetas.len() as f64;
    }
    assert!(cos >= 0.5, "mean cosine {cos}");
}

#[test]
fn zero_target_is_an_exact_fixed_point() {
    let cfg = SamplerConfig {
        num_noise_samples: 32,
        ..SamplerConfig::new(2, 1, Mode::Ordered, 8)
    };
    let theta = [0.3, -0.2, 1.1, 0.0, 0.4, -0.7];
    let est = imle_estimate(&theta, &[0.0; 6], &cfg, &mut row_rng(8, 0)).unwrap();
    assert!(est.iter().all(|&x| x == 0.0));
    let none = SamplerConfig {
        noise: Noise::None,
        ..cfg
    };
    assert!(imle_estimate(&theta, &[0.0; 6], &none, &mut row_rng(8, 0)).unwrap().iter().all(|&x| x == 0.0));
}
