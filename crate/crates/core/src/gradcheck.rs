//! Finite-difference verification of every analytic gradient in the crate.
//!
//! Each check draws random cases, computes the analytic gradient, and
//! compares it against central differences with step `1e-5`. The error of a
//! case is `|analytic - numeric| / max(|analytic|, |numeric|)` over the whole
//! gradient vector (Euclidean norms). Cases within `1e-3` of a hard-max tie,
//! of the clamp boundary of the fake term, or of a ReLU kink are redrawn,
//! since the loss is not differentiable there.

use crate::error::Result;
use crate::nn::{MlpNetwork, Nonlinearity, Tape, Tensor};
use crate::objective::{self, GeneratorMode, LossConfig};
use crate::sgmm::SimplexMixture;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const STEP: f64 = 1e-5;
pub const HEAD_TOLERANCE: f64 = 1e-5;
pub const NETWORK_TOLERANCE: f64 = 1e-4;
const MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub checks: Vec<CheckResult>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
    }
}

/// Central differences of `f` at `x`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Norm-wise relative error; zero when both vectors vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Runs every check with `cases` random cases each.
pub fn run_suite(cases: usize, seed: u64) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(GradcheckReport {
        checks: vec![
            check_log_lk(cases, &mut rng)?,
            check_d_loss_mdgan(cases, &mut rng)?,
            check_g_loss_mdgan(cases, GeneratorMode::Minimax, &mut rng)?,
            check_g_loss_mdgan(cases, GeneratorMode::NonSaturating, &mut rng)?,
            check_vanilla(cases, &mut rng)?,
            check_network_d_loss(cases, &mut rng)?,
            check_network_g_loss(cases, &mut rng)?,
        ],
    })
}

const DIMS: [usize; 4] = [1, 2, 8, 24];
const SIGMAS: [f64; 3] = [0.1, 0.2, 0.5];

fn random_mixture(rng: &mut ChaCha8Rng) -> Result<SimplexMixture> {
    let d = DIMS[rng.random_range(0..DIMS.len())];
    let s = SIGMAS[rng.random_range(0..SIGMAS.len())];
    SimplexMixture::new(d, s, 1.0)
}

/// A point near a random vertex, at a random multiple of sigma.
fn random_embedding(m: &SimplexMixture, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mu = m.mean(rng.random_range(0..m.n_components()));
    let scale = m.sigma() * rng.random_range(0.2..4.0) / (m.dim() as f64).sqrt();
    mu.iter().map(|x| x + scale * rng.random_range(-1.5..1.5)).collect()
}

/// Gap between the two smallest squared vertex distances.
fn tie_gap(m: &SimplexMixture, e: &[f64]) -> f64 {
    let mut d: Vec<f64> = m
        .vertices()
        .iter()
        .map(|mu| mu.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    d.sort_by(f64::total_cmp);
    d[1] - d[0]
}

fn away_from_clamp(m: &SimplexMixture, e: &[f64], eps: f64) -> bool {
    let delta = m.log_lk(e).expect("dims match") - m.log_lambda();
    delta < -eps - MARGIN
}

fn random_batch(
    m: &SimplexMixture,
    n: usize,
    rng: &mut ChaCha8Rng,
    clamp: Option<f64>,
) -> Tensor {
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let e = random_embedding(m, rng);
        if tie_gap(m, &e) < MARGIN {
            continue;
        }
        if let Some(eps) = clamp {
            if !away_from_clamp(m, &e, eps) {
                continue;
            }
        }
        rows.push(e);
    }
    Tensor::from_rows(&rows).expect("rectangular")
}

fn check_log_lk(cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cases {
        let m = random_mixture(rng)?;
        let e = random_embedding(&m, rng);
        if tie_gap(&m, &e) < MARGIN {
            continue;
        }
        let analytic = m.log_lk_grad(&e)?;
        let numeric = central_difference(|x| m.log_lk(x).expect("dims"), &e, STEP);
        worst = worst.max(relative_error(&analytic, &numeric));
        done += 1;
    }
    Ok(CheckResult {
        name: "sgmm.log_lk",
        cases,
        max_rel_error: worst,
        tolerance: HEAD_TOLERANCE,
    })
}

fn check_d_loss_mdgan(cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let cfg = LossConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = random_mixture(rng)?;
        let nr = rng.random_range(1..6);
        let nf = rng.random_range(1..6);
        let real = random_batch(&m, nr, rng, None);
        let fake = random_batch(&m, nf, rng, Some(cfg.clamp_epsilon()));
        let d = objective::d_loss_mdgan(&m, &real, &fake, &cfg)?;
        let mut analytic = d.loss.grads[0].data().to_vec();
        analytic.extend_from_slice(d.loss.grads[1].data());
        let mut x = real.data().to_vec();
        x.extend_from_slice(fake.data());
        let split = real.len();
        let numeric = central_difference(
            |p| {
                let r = Tensor::from_vec(nr, m.dim(), p[..split].to_vec()).expect("shape");
                let f = Tensor::from_vec(nf, m.dim(), p[split..].to_vec()).expect("shape");
                objective::d_loss_mdgan(&m, &r, &f, &cfg).expect("valid").loss.value
            },
            &x,
            STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    Ok(CheckResult {
        name: "objective.d_loss_mdgan",
        cases,
        max_rel_error: worst,
        tolerance: HEAD_TOLERANCE,
    })
}

fn check_g_loss_mdgan(cases: usize, mode: GeneratorMode, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let cfg = LossConfig::new(objective::DEFAULT_CLAMP_EPSILON, mode)?;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = random_mixture(rng)?;
        let n = rng.random_range(1..6);
        let fake = random_batch(&m, n, rng, Some(cfg.clamp_epsilon()));
        let analytic = objective::g_loss_mdgan(&m, &fake, &cfg)?.grads[0].data().to_vec();
        let numeric = central_difference(
            |p| {
                let f = Tensor::from_vec(n, m.dim(), p.to_vec()).expect("shape");
                objective::g_loss_mdgan(&m, &f, &cfg).expect("valid").value
            },
            fake.data(),
            STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    Ok(CheckResult {
        name: match mode {
            GeneratorMode::Minimax => "objective.g_loss_mdgan.minimax",
            GeneratorMode::NonSaturating => "objective.g_loss_mdgan.nonsaturating",
        },
        cases,
        max_rel_error: worst,
        tolerance: HEAD_TOLERANCE,
    })
}

fn check_vanilla(cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let logits = |n: usize, rng: &mut ChaCha8Rng| {
        Tensor::from_vec(n, 1, (0..n).map(|_| rng.random_range(-8.0..8.0)).collect()).expect("shape")
    };
    for _ in 0..cases {
        let nr = rng.random_range(1..6);
        let nf = rng.random_range(1..6);
        let real = logits(nr, rng);
        let fake = logits(nf, rng);
        let d = objective::d_loss_vanilla(&real, &fake)?;
        let mut analytic = d.loss.grads[0].data().to_vec();
        analytic.extend_from_slice(d.loss.grads[1].data());
        let mut x = real.data().to_vec();
        x.extend_from_slice(fake.data());
        let numeric = central_difference(
            |p| {
                let r = Tensor::from_vec(nr, 1, p[..nr].to_vec()).expect("shape");
                let f = Tensor::from_vec(nf, 1, p[nr..].to_vec()).expect("shape");
                objective::d_loss_vanilla(&r, &f).expect("valid").loss.value
            },
            &x,
            STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));

        let g = objective::g_loss_vanilla(&fake)?;
        let numeric = central_difference(
            |p| {
                let f = Tensor::from_vec(nf, 1, p.to_vec()).expect("shape");
                objective::g_loss_vanilla(&f).expect("valid").value
            },
            fake.data(),
            STEP,
        );
        worst = worst.max(relative_error(g.grads[0].data(), &numeric));
    }
    Ok(CheckResult {
        name: "objective.vanilla",
        cases,
        max_rel_error: worst,
        tolerance: HEAD_TOLERANCE,
    })
}

/// Smallest |pre-activation| over all hidden units, by direct evaluation.
fn min_preactivation(net: &MlpNetwork, input: &Tensor) -> f64 {
    let layers = net.params().len() / 2;
    let mut h: Vec<Vec<f64>> = input.iter_rows().map(<[f64]>::to_vec).collect();
    let mut closest = f64::INFINITY;
    for l in 0..layers {
        let w = &net.params()[2 * l];
        let b = &net.params()[2 * l + 1];
        h = h
            .iter()
            .map(|row| {
                (0..w.cols())
                    .map(|j| b.data()[j] + (0..w.rows()).map(|i| row[i] * w.get(i, j)).sum::<f64>())
                    .collect()
            })
            .collect();
        if l + 1 < layers {
            for row in &mut h {
                for v in row.iter_mut() {
                    closest = closest.min(v.abs());
                    *v = net.hidden().apply(*v);
                }
            }
        }
    }
    closest
}

fn flat_params(net: &MlpNetwork) -> Vec<f64> {
    net.params().iter().flat_map(|p| p.data().iter().copied()).collect()
}

fn with_params(net: &MlpNetwork, flat: &[f64]) -> MlpNetwork {
    let mut out = net.clone();
    let mut offset = 0;
    for p in out.params_mut() {
        let n = p.len();
        p.data_mut().copy_from_slice(&flat[offset..offset + n]);
        offset += n;
    }
    out
}

fn random_nonlinearity(rng: &mut ChaCha8Rng) -> Nonlinearity {
    [Nonlinearity::LeakyRelu, Nonlinearity::Relu, Nonlinearity::Tanh][rng.random_range(0..3)]
}

fn points(n: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_vec(n, 2, (0..2 * n).map(|_| rng.random_range(-4.5..4.5)).collect()).expect("shape")
}

/// Mixture discriminator loss through a `2 -> 16 -> 16 -> d` network,
/// differentiated with respect to every network parameter.
fn check_network_d_loss(cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let cfg = LossConfig::default();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cases {
        let m = SimplexMixture::new(DIMS[rng.random_range(0..DIMS.len())], SIGMAS[rng.random_range(0..3)], 1.0)?;
        let net = MlpNetwork::init(&[2, 16, 16, m.dim()], random_nonlinearity(rng), rng)?;
        let n = 4;
        let input = Tensor::vstack(&points(n, rng), &points(n, rng))?;
        if min_preactivation(&net, &input) < MARGIN {
            continue;
        }
        let emb = net.predict(&input)?;
        let fake_ok = (n..2 * n).all(|r| away_from_clamp(&m, emb.row(r), cfg.clamp_epsilon()));
        if !fake_ok || emb.iter_rows().any(|e| tie_gap(&m, e) < MARGIN) {
            continue;
        }

        let mut tape = Tape::new();
        let x = tape.leaf(&input, false);
        let pass = net.forward(x, &mut tape, true)?;
        let out = tape.value(pass.output);
        let d = objective::d_loss_mdgan(&m, &out.slice_rows(0, n), &out.slice_rows(n, 2 * n), &cfg)?;
        let stacked = Tensor::vstack(&d.loss.grads[0], &d.loss.grads[1])?;
        let head = tape.scalar_head(d.loss.value, vec![(pass.output, stacked)])?;
        let grads = tape.backward(head)?;
        let analytic: Vec<f64> = net
            .param_grads(&grads, &pass)
            .iter()
            .flat_map(|g| g.data().to_vec())
            .collect();

        let numeric = central_difference(
            |p| {
                let e = with_params(&net, p).predict(&input).expect("shape");
                objective::d_loss_mdgan(&m, &e.slice_rows(0, n), &e.slice_rows(n, 2 * n), &cfg)
                    .expect("valid")
                    .loss
                    .value
            },
            &flat_params(&net),
            STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));
        done += 1;
    }
    Ok(CheckResult {
        name: "nn.backward.d_loss_mdgan",
        cases,
        max_rel_error: worst,
        tolerance: NETWORK_TOLERANCE,
    })
}

/// Generator loss through `generator -> frozen discriminator`, differentiated
/// with respect to the generator parameters. Alternates the mixture and the
/// vanilla heads.
fn check_network_g_loss(cases: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let cfg = LossConfig::default();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cases {
        let mdgan = done % 2 == 0;
        let m = SimplexMixture::new(DIMS[rng.random_range(0..DIMS.len())], 0.5, 1.0)?;
        let out_dim = if mdgan { m.dim() } else { 1 };
        let gen = MlpNetwork::init(&[3, 12, 2], random_nonlinearity(rng), rng)?;
        let disc = MlpNetwork::init(&[2, 12, out_dim], random_nonlinearity(rng), rng)?;
        let n = 4;
        let z = Tensor::from_vec(n, 3, (0..3 * n).map(|_| rng.random_range(-2.0..2.0)).collect())?;
        let fake = gen.predict(&z)?;
        if min_preactivation(&gen, &z) < MARGIN || min_preactivation(&disc, &fake) < MARGIN {
            continue;
        }
        let emb = disc.predict(&fake)?;
        if mdgan
            && emb
                .iter_rows()
                .any(|e| tie_gap(&m, e) < MARGIN || !away_from_clamp(&m, e, cfg.clamp_epsilon()))
        {
            continue;
        }
        let loss_of = |e: &Tensor| -> Result<objective::LossValue> {
            if mdgan {
                objective::g_loss_mdgan(&m, e, &cfg)
            } else {
                objective::g_loss_vanilla(e)
            }
        };

        let mut tape = Tape::new();
        let zin = tape.leaf(&z, false);
        let g_pass = gen.forward(zin, &mut tape, true)?;
        let d_pass = disc.forward(g_pass.output, &mut tape, false)?;
        let loss = loss_of(tape.value(d_pass.output))?;
        let head = loss.record(&mut tape, &[d_pass.output])?;
        let grads = tape.backward(head)?;
        let analytic: Vec<f64> = gen
            .param_grads(&grads, &g_pass)
            .iter()
            .flat_map(|g| g.data().to_vec())
            .collect();
        let numeric = central_difference(
            |p| {
                let f = with_params(&gen, p).predict(&z).expect("shape");
                loss_of(&disc.predict(&f).expect("shape")).expect("valid").value
            },
            &flat_params(&gen),
            STEP,
        );
        worst = worst.max(relative_error(&analytic, &numeric));
        done += 1;
    }
    Ok(CheckResult {
        name: "nn.backward.g_loss",
        cases,
        max_rel_error: worst,
        tolerance: NETWORK_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_of_quadratic() {
        let g = central_difference(|x| x[0] * x[0] + 3.0 * x[1], &[2.0, -1.0], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn relative_error_basics() {
        assert_eq!(relative_error(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(relative_error(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((relative_error(&[1.0], &[2.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_suite_passes() {
        let report = run_suite(5, 11).unwrap();
        assert_eq!(report.checks.len(), 7);
        for c in &report.checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
