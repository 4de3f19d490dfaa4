mod common;

use cellnet_core::{evaluate, probability, CellularNetwork, Evaluator, Mode};
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn matches_literal_evaluator() {
    let mut rng = rng(3);
    let net = random_net(&mut rng, Mode::Regression, 5, 2);
    let ev = Evaluator::new(&net);
    for _ in 0..1000 {
        let p = random_point(&mut rng, 2, 1.5);
        let a = ev.value(&p);
        let b = literal_value(&net, &p);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn breakdown_is_consistent() {
    let mut rng = rng(4);
    let net = random_net(&mut rng, Mode::Regression, 7, 3);
    for _ in 0..200 {
        let p = random_point(&mut rng, 3, 1.5);
        let b = evaluate(&net, &p).unwrap();
        assert!((b.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let v: f64 = b.weights.iter().zip(&b.cell_values).map(|(w, l)| w * l).sum();
        assert!((v - b.value).abs() < 1e-12);
        for i in 0..7 {
            assert!((b.cell_values[i] - literal_affine(&net, i, &p)).abs() < 1e-12);
        }
    }
}

#[test]
fn partition_of_unity_high_dimension() {
    let mut rng = rng(8);
    for (k, d) in [(50, 784), (10, 20), (2, 2)] {
        let net = random_net(&mut rng, Mode::Regression, k, d);
        for _ in 0..20 {
            let p = random_point(&mut rng, d, 1.0);
            let b = evaluate(&net, &p).unwrap();
            assert!(b.raw_weights.iter().sum::<f64>() >= 1.0 - 1e-12);
            assert!((b.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn shared_coefficients_reproduce_the_affine_function() {
    let mut rng = rng(9);
    let base = random_net(&mut rng, Mode::Regression, 6, 4);
    let beta: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut net = base.clone();
    for row in net.params_mut().0.chunks_mut(5) {
        row.copy_from_slice(&beta);
    }
    let ev = Evaluator::new(&net);
    for _ in 0..200 {
        let p = random_point(&mut rng, 4, 3.0);
        let expect = beta[0] + (0..4).map(|j| beta[j + 1] * p[j]).sum::<f64>();
        assert!((ev.value(&p) - expect).abs() < 1e-12);
    }
}

#[test]
fn value_is_continuous_along_segments() {
    let mut rng = rng(12);
    for _ in 0..20 {
        let net = random_net(&mut rng, Mode::Regression, 6, 2);
        let ev = Evaluator::new(&net);
        let a = random_point(&mut rng, 2, 2.0);
        let b = random_point(&mut rng, 2, 2.0);
        let jump = |steps: usize| {
            let mut prev = ev.value(&a);
            let mut worst: f64 = 0.0;
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
                let v = ev.value(&p);
                worst = worst.max((v - prev).abs());
                prev = v;
            }
            worst
        };
        let ratio = jump(4000) / jump(2000);
        assert!((ratio - 0.5).abs() <= 0.2, "halving ratio {ratio}");
    }
}

#[test]
fn interior_away_from_blending_is_the_cell_function() {
    // three well separated seeds with narrow blend zones
    let net = CellularNetwork::new(
        Mode::Regression,
        2,
        vec![0.0, 0.0, 10.0, 0.0, 0.0, 10.0],
        vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.5, 4.0, -2.0, 1.0],
        vec![0.1, 0.1, 0.1],
    )
    .unwrap();
    let ev = Evaluator::new(&net);
    for p in [[1.0, 1.0], [-3.0, 2.0], [0.5, -4.0]] {
        assert_eq!(ev.value(&p), literal_affine(&net, 0, &p));
    }
}

proptest! {
    #[test]
    fn weights_partition_unity(seed in any::<u64>(), k in 1usize..30, d in 1usize..12) {
        let mut rng = rng(seed);
        let net = random_net(&mut rng, Mode::Regression, k, d);
        let p = random_point(&mut rng, d, 2.0);
        let b = evaluate(&net, &p).unwrap();
        prop_assert!((b.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(b.raw_weights.iter().sum::<f64>() >= 1.0 - 1e-12);
    }

    #[test]
    fn sigmoid_symmetry(seed in any::<u64>()) {
        // negating every coefficient negates the blended value
        let mut rng = rng(seed);
        let net = random_net(&mut rng, Mode::Binary, 4, 3);
        let mut neg = net.clone();
        neg.params_mut().0.iter_mut().for_each(|b| *b = -*b);
        let p = random_point(&mut rng, 3, 2.0);
        let a = probability(&net, &p).unwrap();
        let b = probability(&neg, &p).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }
}
