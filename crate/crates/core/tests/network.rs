//! Networks and the tape against direct evaluation and finite differences.

use mdgan::nn::{adam_step, AdamConfig, AdamState, MlpNetwork, Nonlinearity, Tape, Tensor};
use mdgan::sgmm::SimplexMixture;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Layer-by-layer evaluation with scalar loops.
fn direct_forward(net: &MlpNetwork, x: &[f64]) -> Vec<f64> {
    let layers = net.params().len() / 2;
    let mut h = x.to_vec();
    for l in 0..layers {
        let w = &net.params()[2 * l];
        let b = &net.params()[2 * l + 1];
        let mut next = vec![0.0; w.cols()];
        for (j, out) in next.iter_mut().enumerate() {
            *out = b.get(0, j);
            for (i, hi) in h.iter().enumerate() {
                *out += hi * w.get(i, j);
            }
        }
        if l + 1 < layers {
            for v in &mut next {
                *v = match net.hidden() {
                    Nonlinearity::LeakyRelu => if *v > 0.0 { *v } else { 0.2 * *v },
                    Nonlinearity::Relu => v.max(0.0),
                    Nonlinearity::Tanh => v.tanh(),
                };
            }
        }
        h = next;
    }
    h
}

fn random_input(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_vec(n, k, (0..n * k).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

#[test]
fn forward_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for kind in [Nonlinearity::LeakyRelu, Nonlinearity::Relu, Nonlinearity::Tanh] {
        let mut net = MlpNetwork::init(&[2, 8, 3], kind, &mut rng).unwrap();
        // Non-zero biases so they are exercised too.
        for p in net.params_mut() {
            if p.rows() == 1 {
                p.data_mut().iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
            }
        }
        let x = random_input(17, 2, &mut rng);
        let out = net.predict(&x).unwrap();
        assert_eq!(out.shape(), (17, 3));
        for r in 0..17 {
            let expect = direct_forward(&net, x.row(r));
            for (a, b) in out.row(r).iter().zip(&expect) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn log_lk_mean_backward_matches_finite_differences() {
    // mean(log_lk(net(x))) differentiated with respect to the input batch.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = SimplexMixture::new(4, 0.5, 1.0).unwrap();
    let net = MlpNetwork::init(&[2, 16, 4], Nonlinearity::Tanh, &mut rng).unwrap();
    let x = random_input(5, 2, &mut rng);
    let f = |x: &Tensor| {
        let e = net.predict(x).unwrap();
        e.iter_rows().map(|r| m.log_lk(r).unwrap()).sum::<f64>() / e.rows() as f64
    };

    let mut tape = Tape::new();
    let xin = tape.leaf(&x, true);
    let pass = net.forward(xin, &mut tape, false).unwrap();
    let ll = tape.log_lk(pass.output, &m).unwrap();
    let loss = tape.mean(ll).unwrap();
    assert!((tape.value(loss).get(0, 0) - f(&x)).abs() < 1e-12);
    let grads = tape.backward(loss).unwrap();
    let gx = grads.get(xin).unwrap();

    let h = 1e-5;
    for i in 0..x.len() {
        let mut up = x.clone();
        up.data_mut()[i] += h;
        let mut down = x.clone();
        down.data_mut()[i] -= h;
        let numeric = (f(&up) - f(&down)) / (2.0 * h);
        let analytic = gx.data()[i];
        assert!(
            (analytic - numeric).abs() <= 1e-6 * numeric.abs().max(1.0),
            "{i}: {analytic} vs {numeric}"
        );
    }
    // Parameters were recorded as frozen.
    assert!(pass.params.iter().all(|p| grads.get(*p).is_none()));
}

#[test]
fn adam_descends_a_quadratic() {
    // Minimising |p - t|^2 from a fixed start: Adam with a large step size
    // reaches the target closely.
    let target = [0.3, -1.2, 2.0];
    let mut params = vec![Tensor::zeros(1, 3)];
    let mut state = AdamState::new(
        AdamConfig { lr: 0.05, beta1: 0.9, beta2: 0.999, eps: 1e-8 },
        &params,
    );
    for _ in 0..2000 {
        let g: Vec<f64> = params[0].data().iter().zip(&target).map(|(p, t)| 2.0 * (p - t)).collect();
        adam_step(&mut params, &[Tensor::from_vec(1, 3, g).unwrap()], &mut state).unwrap();
    }
    for (p, t) in params[0].data().iter().zip(&target) {
        assert!((p - t).abs() < 1e-3, "{p} vs {t}");
    }
    assert_eq!(state.step_count(), 2000);
}

#[test]
fn seeded_init_is_reproducible() {
    let a = MlpNetwork::init(&[32, 128, 128, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = MlpNetwork::init(&[32, 128, 128, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let c = MlpNetwork::init(&[32, 128, 128, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
