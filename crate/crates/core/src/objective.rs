//! Adversarial losses: the simplex-mixture objective and the vanilla GAN
//! baseline.
//!
//! The discriminator maximises
//!
//! ```text
//! E_real[ log lk(D(x)) ] + E_fake[ log(lambda - lk(D(G(z)))) ]
//! ```
//!
//! and the generator minimises the same value. `lambda` is the peak of `lk`,
//! so `lambda - lk >= 0`. The fake term is evaluated as
//!
//! ```text
//! log(lambda - lk) = log_lambda + log(1 - exp(delta)),  delta = log lk - log_lambda <= 0
//! ```
//!
//! with `delta` clamped to at most `-clamp_epsilon`; without the clamp the
//! term is `-inf` whenever a fake embedding sits exactly on a vertex.
//!
//! Every loss returns its value together with the analytic gradient with
//! respect to each input batch. [`LossValue::record`] attaches such a loss to
//! a [`Tape`] so it can be backpropagated through the networks.

use crate::error::{invalid, Result};
use crate::nn::{NodeId, Tape, Tensor};
use crate::sgmm::SimplexMixture;

pub const DEFAULT_CLAMP_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorMode {
    /// Minimise the fake term of the discriminator objective as written.
    #[default]
    Minimax,
    /// Maximise `log lk` of fake embeddings instead.
    NonSaturating,
}

impl GeneratorMode {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorMode::Minimax => "minimax",
            GeneratorMode::NonSaturating => "nonsaturating",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "minimax" => Some(GeneratorMode::Minimax),
            "nonsaturating" => Some(GeneratorMode::NonSaturating),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    clamp_epsilon: f64,
    pub generator_mode: GeneratorMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            clamp_epsilon: DEFAULT_CLAMP_EPSILON,
            generator_mode: GeneratorMode::Minimax,
        }
    }
}

impl LossConfig {
    pub fn new(clamp_epsilon: f64, generator_mode: GeneratorMode) -> Result<Self> {
        if !(clamp_epsilon > 0.0 && clamp_epsilon < 0.1) {
            return invalid(format!(
                "clamp_epsilon must lie in (0, 0.1), got {clamp_epsilon}"
            ));
        }
        Ok(Self {
            clamp_epsilon,
            generator_mode,
        })
    }

    pub fn clamp_epsilon(&self) -> f64 {
        self.clamp_epsilon
    }
}

/// A scalar loss with its gradient for each input batch, in argument order.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grads: Vec<Tensor>,
}

impl LossValue {
    /// Records the loss as a head node whose inputs are `inputs`, which must
    /// line up with `grads`.
    pub fn record(self, tape: &mut Tape, inputs: &[NodeId]) -> Result<NodeId> {
        if inputs.len() != self.grads.len() {
            return invalid("loss inputs and gradients do not line up");
        }
        tape.scalar_head(self.value, inputs.iter().copied().zip(self.grads).collect())
    }
}

/// Discriminator loss with the real and fake terms kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorLoss {
    pub loss: LossValue,
    /// `mean(log lk(real))`.
    pub real_term: f64,
    /// `mean(log(lambda - lk(fake)))`.
    pub fake_term: f64,
}

/// `log(1 - exp(x))` for `x < 0`, accurate on both sides of `-ln 2`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

fn check_batch(m: &SimplexMixture, emb: &Tensor, what: &str) -> Result<()> {
    if emb.rows() == 0 {
        return invalid(format!("{what} batch is empty"));
    }
    if emb.cols() != m.dim() {
        return invalid(format!(
            "{what} embeddings have dimension {}, mixture expects {}",
            emb.cols(),
            m.dim()
        ));
    }
    Ok(())
}

/// Mean of `log lk` over the batch, and its gradient.
fn mean_log_lk(m: &SimplexMixture, emb: &Tensor) -> (f64, Tensor) {
    let n = emb.rows() as f64;
    let mut grad = Tensor::zeros(emb.rows(), emb.cols());
    let mut total = 0.0;
    for r in 0..emb.rows() {
        let (v, _) = m.log_lk_and_grad_into(emb.row(r), grad.row_mut(r));
        total += v;
    }
    for g in grad.data_mut() {
        *g /= n;
    }
    (total / n, grad)
}

/// Mean of `log(lambda - lk)` over the batch, and its gradient.
fn mean_log_lambda_minus_lk(m: &SimplexMixture, emb: &Tensor, eps: f64) -> (f64, Tensor) {
    let n = emb.rows() as f64;
    let mut grad = Tensor::zeros(emb.rows(), emb.cols());
    let mut total = 0.0;
    for r in 0..emb.rows() {
        let row = grad.row_mut(r);
        let (v, _) = m.log_lk_and_grad_into(emb.row(r), row);
        let delta = v - m.log_lambda();
        if delta > -eps {
            // Clamped: the value is constant here, so no gradient.
            total += m.log_lambda() + log1m_exp(-eps);
            row.fill(0.0);
        } else {
            total += m.log_lambda() + log1m_exp(delta);
            // d/d delta log(1 - e^delta) = -1 / (e^{-delta} - 1)
            let scale = -1.0 / (-delta).exp_m1() / n;
            for g in row.iter_mut() {
                *g *= scale;
            }
        }
    }
    (total / n, grad)
}

/// `-mean(log lk(real)) - mean(log(lambda - lk(fake)))`; gradients are
/// `[d/d real, d/d fake]`.
pub fn d_loss_mdgan(
    m: &SimplexMixture,
    real: &Tensor,
    fake: &Tensor,
    cfg: &LossConfig,
) -> Result<DiscriminatorLoss> {
    check_batch(m, real, "real")?;
    check_batch(m, fake, "fake")?;
    let (real_term, mut g_real) = mean_log_lk(m, real);
    let (fake_term, mut g_fake) = mean_log_lambda_minus_lk(m, fake, cfg.clamp_epsilon);
    g_real.data_mut().iter_mut().for_each(|g| *g = -*g);
    g_fake.data_mut().iter_mut().for_each(|g| *g = -*g);
    Ok(DiscriminatorLoss {
        loss: LossValue {
            value: -real_term - fake_term,
            grads: vec![g_real, g_fake],
        },
        real_term,
        fake_term,
    })
}

/// Generator loss. In minimax mode this is `mean(log(lambda - lk(fake)))`,
/// the negated fake term of [`d_loss_mdgan`]; in non-saturating mode it is
/// `-mean(log lk(fake))`.
pub fn g_loss_mdgan(m: &SimplexMixture, fake: &Tensor, cfg: &LossConfig) -> Result<LossValue> {
    check_batch(m, fake, "fake")?;
    match cfg.generator_mode {
        GeneratorMode::Minimax => {
            let (v, g) = mean_log_lambda_minus_lk(m, fake, cfg.clamp_epsilon);
            Ok(LossValue {
                value: v,
                grads: vec![g],
            })
        }
        GeneratorMode::NonSaturating => {
            let (v, mut g) = mean_log_lk(m, fake);
            g.data_mut().iter_mut().for_each(|x| *x = -*x);
            Ok(LossValue {
                value: -v,
                grads: vec![g],
            })
        }
    }
}

/// `log(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_logits(t: &Tensor, what: &str) -> Result<()> {
    if t.rows() == 0 {
        return invalid(format!("{what} logit batch is empty"));
    }
    if t.cols() != 1 {
        return invalid(format!("{what} logits must have one column, got {}", t.cols()));
    }
    Ok(())
}

/// Binary cross-entropy discriminator loss on logits:
/// `mean(softplus(-real)) + mean(softplus(fake))`.
pub fn d_loss_vanilla(real_logit: &Tensor, fake_logit: &Tensor) -> Result<DiscriminatorLoss> {
    check_logits(real_logit, "real")?;
    check_logits(fake_logit, "fake")?;
    let nr = real_logit.rows() as f64;
    let nf = fake_logit.rows() as f64;
    let mut g_real = Tensor::zeros(real_logit.rows(), 1);
    let mut g_fake = Tensor::zeros(fake_logit.rows(), 1);
    let mut real_loss = 0.0;
    for (g, &x) in g_real.data_mut().iter_mut().zip(real_logit.data()) {
        real_loss += softplus(-x);
        *g = -sigmoid(-x) / nr;
    }
    let mut fake_loss = 0.0;
    for (g, &x) in g_fake.data_mut().iter_mut().zip(fake_logit.data()) {
        fake_loss += softplus(x);
        *g = sigmoid(x) / nf;
    }
    let (real_loss, fake_loss) = (real_loss / nr, fake_loss / nf);
    Ok(DiscriminatorLoss {
        loss: LossValue {
            value: real_loss + fake_loss,
            grads: vec![g_real, g_fake],
        },
        // log sigma(real) and log(1 - sigma(fake))
        real_term: -real_loss,
        fake_term: -fake_loss,
    })
}

/// Non-saturating generator loss `mean(softplus(-fake))`.
pub fn g_loss_vanilla(fake_logit: &Tensor) -> Result<LossValue> {
    check_logits(fake_logit, "fake")?;
    let n = fake_logit.rows() as f64;
    let mut g = Tensor::zeros(fake_logit.rows(), 1);
    let mut total = 0.0;
    for (gi, &x) in g.data_mut().iter_mut().zip(fake_logit.data()) {
        total += softplus(-x);
        *gi = -sigmoid(-x) / n;
    }
    Ok(LossValue {
        value: total / n,
        grads: vec![g],
    })
}
