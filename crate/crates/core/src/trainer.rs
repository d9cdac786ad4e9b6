//! Alternating adversarial training on the Gaussian grid.
//!
//! Each generator step is preceded by `d_steps_per_g` discriminator steps.
//! A discriminator step draws a real batch and a fake batch, runs both
//! through the discriminator in one stacked pass, and descends on the
//! discriminator loss. A generator step draws fresh latents and backpropagates
//! the generator loss through a frozen discriminator.
//!
//! A run is a pure function of its [`TrainConfig`]: parameters are initialised
//! and batches drawn from one ChaCha8 stream seeded with `cfg.seed`.
//! Evaluation draws from a separate stream keyed by `(seed, step)`, so
//! changing `eval_every` never perturbs the training trajectory.

use crate::checkpoint::Checkpoint;
use crate::error::{invalid, Error, Result};
use crate::metrics::{fit_gaussian, frechet_distance, mode_report, ModeReport, DEFAULT_THRESHOLD_SIGMAS};
use crate::nn::{adam_step, AdamConfig, AdamState, MlpNetwork, Nonlinearity, Tape, Tensor};
use crate::objective::{self, LossConfig};
use crate::sgmm::{SimplexMixture, DEFAULT_CIRCUMRADIUS, DEFAULT_SIGMA};
use crate::synthdata::{GridDataset, LatentSpec, DEFAULT_DATA_SIGMA};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

const EVAL_SALT: u64 = 0x6576_616c_5f73_6565;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    #[default]
    MdGan,
    Vanilla,
}

impl ObjectiveKind {
    pub fn code(self) -> u8 {
        match self {
            ObjectiveKind::MdGan => 0,
            ObjectiveKind::Vanilla => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ObjectiveKind::MdGan),
            1 => Some(ObjectiveKind::Vanilla),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::MdGan => "mdgan",
            ObjectiveKind::Vanilla => "vanilla",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mdgan" => Some(ObjectiveKind::MdGan),
            "vanilla" => Some(ObjectiveKind::Vanilla),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub hidden: Vec<usize>,
    pub nonlinearity: Nonlinearity,
    pub adam: AdamConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub total_g_steps: u64,
    pub d_steps_per_g: u32,
    pub batch_size: usize,
    /// Embedding dimension `d`; the mixture has `d + 1` components.
    pub embed_dim: usize,
    pub sigma: f64,
    pub circumradius: f64,
    pub objective: ObjectiveKind,
    pub loss: LossConfig,
    pub latent: LatentSpec,
    pub data_sigma: f64,
    pub generator: NetworkConfig,
    pub discriminator: NetworkConfig,
    pub eval_every: u64,
    pub eval_samples: usize,
    pub threshold_sigmas: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            total_g_steps: 30_000,
            d_steps_per_g: 1,
            batch_size: 128,
            embed_dim: 24,
            sigma: DEFAULT_SIGMA,
            circumradius: DEFAULT_CIRCUMRADIUS,
            objective: ObjectiveKind::MdGan,
            loss: LossConfig::default(),
            latent: LatentSpec::default(),
            data_sigma: DEFAULT_DATA_SIGMA,
            generator: NetworkConfig {
                hidden: vec![128, 128],
                nonlinearity: Nonlinearity::Relu,
                adam: AdamConfig::default(),
            },
            discriminator: NetworkConfig {
                hidden: vec![128, 128],
                nonlinearity: Nonlinearity::LeakyRelu,
                adam: AdamConfig::default(),
            },
            eval_every: 1000,
            eval_samples: 2500,
            threshold_sigmas: DEFAULT_THRESHOLD_SIGMAS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_steps_per_g == 0 {
            return invalid("d_steps_per_g must be at least 1");
        }
        if self.batch_size == 0 {
            return invalid("batch_size must be at least 1");
        }
        if self.embed_dim == 0 {
            return invalid("embed_dim must be at least 1");
        }
        if self.eval_every == 0 {
            return invalid("eval_every must be at least 1");
        }
        if self.eval_samples < 3 {
            return invalid("eval_samples must be at least 3 to fit a 2D Gaussian");
        }
        if self.latent.latent_dim == 0 {
            return invalid("latent_dim must be at least 1");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid("sigma must be positive");
        }
        if !(self.circumradius > 0.0 && self.circumradius.is_finite()) {
            return invalid("circumradius must be positive");
        }
        if !(self.data_sigma >= 0.0 && self.data_sigma.is_finite()) {
            return invalid("data_sigma must be non-negative");
        }
        if !(self.threshold_sigmas >= 0.0) {
            return invalid("threshold_sigmas must be non-negative");
        }
        for (name, net) in [("generator", &self.generator), ("discriminator", &self.discriminator)] {
            if net.hidden.contains(&0) {
                return invalid(format!("{name} hidden sizes must be positive"));
            }
            let a = net.adam;
            if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
                return invalid(format!("{name} optimizer settings out of range"));
            }
        }
        Ok(())
    }

    /// Discriminator output width: `d` for the mixture head, one logit for
    /// the vanilla baseline.
    pub fn disc_output_dim(&self) -> usize {
        match self.objective {
            ObjectiveKind::MdGan => self.embed_dim,
            ObjectiveKind::Vanilla => 1,
        }
    }

    pub fn generator_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.latent.latent_dim];
        s.extend(&self.generator.hidden);
        s.push(2);
        s
    }

    pub fn discriminator_sizes(&self) -> Vec<usize> {
        let mut s = vec![2];
        s.extend(&self.discriminator.hidden);
        s.push(self.disc_output_dim());
        s
    }

    pub fn dataset(&self) -> Result<GridDataset> {
        GridDataset::with_data_sigma(self.data_sigma)
    }

    pub fn mixture(&self) -> Result<SimplexMixture> {
        SimplexMixture::new(self.embed_dim, self.sigma, self.circumradius)
    }
}

/// One evaluation point of a run. `wall_time` is kept out of the serialised
/// form so that logs of identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub step: u64,
    pub objective: ObjectiveKind,
    pub embed_dim: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub frechet: f64,
    pub modes: ModeReport,
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunRecord {
    pub fn to_ndjson(&self) -> String {
        serde_json::to_string(self).expect("plain data serialises")
    }
}

/// Losses of the most recent generator step and its discriminator steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLosses {
    pub d_loss: f64,
    pub g_loss: f64,
    /// Fake term of the last discriminator loss.
    pub d_fake_term: f64,
}

/// Training state for one run.
pub struct Trainer {
    cfg: TrainConfig,
    ds: GridDataset,
    mixture: Option<SimplexMixture>,
    generator: MlpNetwork,
    discriminator: MlpNetwork,
    g_adam: AdamState,
    d_adam: AdamState,
    rng: ChaCha8Rng,
    step: u64,
    last: StepLosses,
    tape: Tape,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let ds = cfg.dataset()?;
        let mixture = match cfg.objective {
            ObjectiveKind::MdGan => Some(cfg.mixture()?),
            ObjectiveKind::Vanilla => None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let generator = MlpNetwork::init(&cfg.generator_sizes(), cfg.generator.nonlinearity, &mut rng)?;
        let discriminator =
            MlpNetwork::init(&cfg.discriminator_sizes(), cfg.discriminator.nonlinearity, &mut rng)?;
        let g_adam = AdamState::new(cfg.generator.adam, generator.params());
        let d_adam = AdamState::new(cfg.discriminator.adam, discriminator.params());
        Ok(Self {
            cfg,
            ds,
            mixture,
            generator,
            discriminator,
            g_adam,
            d_adam,
            rng,
            step: 0,
            last: StepLosses {
                d_loss: f64::NAN,
                g_loss: f64::NAN,
                d_fake_term: f64::NAN,
            },
            tape: Tape::new(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn generator(&self) -> &MlpNetwork {
        &self.generator
    }

    pub fn discriminator(&self) -> &MlpNetwork {
        &self.discriminator
    }

    pub fn last_losses(&self) -> StepLosses {
        self.last
    }

    /// Discriminator loss on explicit batches, returning the loss and its fake
    /// term. Does not touch parameters.
    pub fn discriminator_loss_on(&self, real: &Tensor, fake: &Tensor) -> Result<objective::DiscriminatorLoss> {
        let re = self.discriminator.predict(real)?;
        let fe = self.discriminator.predict(fake)?;
        match &self.mixture {
            Some(m) => objective::d_loss_mdgan(m, &re, &fe, &self.cfg.loss),
            None => objective::d_loss_vanilla(&re, &fe),
        }
    }

    /// Generator loss on an explicit fake batch. Does not touch parameters.
    pub fn generator_loss_on(&self, fake: &Tensor) -> Result<f64> {
        let fe = self.discriminator.predict(fake)?;
        Ok(match &self.mixture {
            Some(m) => objective::g_loss_mdgan(m, &fe, &self.cfg.loss)?.value,
            None => objective::g_loss_vanilla(&fe)?.value,
        })
    }

    fn discriminator_step(&mut self) -> Result<(f64, f64)> {
        let n = self.cfg.batch_size;
        let real = self.ds.sample_real(n, &mut self.rng)?;
        let z = self.cfg.latent.sample(n, &mut self.rng)?;
        let fake = self.generator.predict(&z)?;
        check_finite(&fake, self.step, "generator output")?;

        self.tape.clear();
        let input = self.tape.leaf(&Tensor::vstack(&real, &fake)?, false);
        let pass = self.discriminator.forward(input, &mut self.tape, true)?;
        let out = self.tape.value(pass.output);
        check_finite(out, self.step, "discriminator output")?;
        let (re, fe) = (out.slice_rows(0, n), out.slice_rows(n, 2 * n));
        let d = match &self.mixture {
            Some(m) => objective::d_loss_mdgan(m, &re, &fe, &self.cfg.loss)?,
            None => objective::d_loss_vanilla(&re, &fe)?,
        };
        if !d.loss.value.is_finite() {
            return Err(non_finite(self.step, "discriminator loss", d.loss.value));
        }
        let value = d.loss.value;
        let stacked = Tensor::vstack(&d.loss.grads[0], &d.loss.grads[1])?;
        let head = self.tape.scalar_head(value, vec![(pass.output, stacked)])?;
        let grads = self.tape.backward(head)?;
        let param_grads = self.discriminator.param_grads(&grads, &pass);
        check_all_finite(&param_grads, self.step, "discriminator gradient")?;
        adam_step(self.discriminator.params_mut(), &param_grads, &mut self.d_adam)?;
        Ok((value, d.fake_term))
    }

    fn generator_step(&mut self) -> Result<f64> {
        let n = self.cfg.batch_size;
        let z = self.cfg.latent.sample(n, &mut self.rng)?;
        self.tape.clear();
        let zin = self.tape.leaf(&z, false);
        let g_pass = self.generator.forward(zin, &mut self.tape, true)?;
        let d_pass = self.discriminator.forward(g_pass.output, &mut self.tape, false)?;
        let emb = self.tape.value(d_pass.output);
        check_finite(emb, self.step, "discriminator output")?;
        let loss = match &self.mixture {
            Some(m) => objective::g_loss_mdgan(m, emb, &self.cfg.loss)?,
            None => objective::g_loss_vanilla(emb)?,
        };
        if !loss.value.is_finite() {
            return Err(non_finite(self.step, "generator loss", loss.value));
        }
        let value = loss.value;
        let head = loss.record(&mut self.tape, &[d_pass.output])?;
        let grads = self.tape.backward(head)?;
        let param_grads = self.generator.param_grads(&grads, &g_pass);
        check_all_finite(&param_grads, self.step, "generator gradient")?;
        adam_step(self.generator.params_mut(), &param_grads, &mut self.g_adam)?;
        Ok(value)
    }

    /// One generator update preceded by `d_steps_per_g` discriminator updates.
    pub fn step(&mut self) -> Result<StepLosses> {
        let mut d = (f64::NAN, f64::NAN);
        for _ in 0..self.cfg.d_steps_per_g {
            d = self.discriminator_step()?;
        }
        let g = self.generator_step()?;
        self.step += 1;
        self.last = StepLosses {
            d_loss: d.0,
            g_loss: g,
            d_fake_term: d.1,
        };
        Ok(self.last)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            objective: self.cfg.objective,
            generator_mode: self.cfg.loss.generator_mode,
            latent_distribution: self.cfg.latent.distribution,
            seed: self.cfg.seed,
            step: self.step,
            embed_dim: self.cfg.embed_dim,
            sigma: self.cfg.sigma,
            circumradius: self.cfg.circumradius,
            clamp_epsilon: self.cfg.loss.clamp_epsilon(),
            latent_dim: self.cfg.latent.latent_dim,
            data_sigma: self.cfg.data_sigma,
            last_d_loss: self.last.d_loss,
            last_g_loss: self.last.g_loss,
            generator: self.generator.clone(),
            discriminator: self.discriminator.clone(),
            generator_adam: self.g_adam.clone(),
            discriminator_adam: self.d_adam.clone(),
        }
    }
}

/// Result of a complete run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub records: Vec<RunRecord>,
}

/// Runs `cfg.total_g_steps` generator steps, calling `on_record` with a
/// [`RunRecord`] and the checkpoint it was computed from every `eval_every`
/// steps, and once more at the end if the final step is not on that cadence.
/// A run with zero steps produces no records.
pub fn train<F>(cfg: &TrainConfig, mut on_record: F) -> Result<TrainOutcome>
where
    F: FnMut(&RunRecord, &Checkpoint) -> Result<()>,
{
    let start = Instant::now();
    let mut trainer = Trainer::new(cfg.clone())?;
    let ds = trainer.ds.clone();
    let mut records = Vec::new();
    while trainer.step < cfg.total_g_steps {
        trainer.step()?;
        let at_end = trainer.step == cfg.total_g_steps;
        if trainer.step % cfg.eval_every == 0 || at_end {
            let ckpt = trainer.checkpoint();
            let mut rec = evaluate(&ckpt, &ds, cfg)?;
            rec.wall_time = start.elapsed().as_secs_f64();
            on_record(&rec, &ckpt)?;
            records.push(rec);
        }
    }
    Ok(TrainOutcome {
        checkpoint: trainer.checkpoint(),
        records,
    })
}

/// RNG used for evaluating the checkpoint at `step` of run `seed`.
pub fn eval_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ EVAL_SALT);
    rng.set_stream(step);
    rng
}

/// Draws `n` generated points from a checkpoint.
pub fn generate(ckpt: &Checkpoint, n: usize, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    let latent = LatentSpec {
        latent_dim: ckpt.latent_dim,
        distribution: ckpt.latent_distribution,
    };
    let z = latent.sample(n, rng)?;
    ckpt.generator.predict(&z)
}

/// Mode coverage and Fréchet distance of a generated batch against an equally
/// sized real batch drawn from `rng`.
pub fn evaluate_samples(
    generated: &Tensor,
    ds: &GridDataset,
    threshold_sigmas: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(ModeReport, f64)> {
    let report = mode_report(generated, ds, threshold_sigmas)?;
    let real = ds.sample_real(generated.rows(), rng)?;
    let frechet = frechet_distance(&fit_gaussian(&real)?, &fit_gaussian(generated)?)?;
    Ok((report, frechet))
}

/// Evaluates a checkpoint on `cfg.eval_samples` generated points. The result
/// depends only on the checkpoint and on the evaluation settings in `cfg`.
pub fn evaluate(ckpt: &Checkpoint, ds: &GridDataset, cfg: &TrainConfig) -> Result<RunRecord> {
    let mut rng = eval_rng(ckpt.seed, ckpt.step);
    let generated = generate(ckpt, cfg.eval_samples, &mut rng)?;
    check_finite(&generated, ckpt.step, "generator output")?;
    let (modes, frechet) = evaluate_samples(&generated, ds, cfg.threshold_sigmas, &mut rng)?;
    Ok(RunRecord {
        step: ckpt.step,
        objective: ckpt.objective,
        embed_dim: ckpt.embed_dim,
        d_loss: ckpt.last_d_loss,
        g_loss: ckpt.last_g_loss,
        frechet,
        modes,
        wall_time: 0.0,
    })
}

/// A discriminator embedding of a real sample and its nearest simplex vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPoint {
    pub embedding: Vec<f64>,
    pub component: usize,
    /// Euclidean distance to the nearest vertex.
    pub distance: f64,
}

/// Embeds `n` real samples with the checkpoint's discriminator and assigns
/// each to its nearest vertex. Only meaningful for the mixture objective.
pub fn embedding_snapshot(ckpt: &Checkpoint, ds: &GridDataset, n: usize) -> Result<Vec<EmbeddingPoint>> {
    if n == 0 {
        return invalid("embedding_snapshot needs at least one sample");
    }
    if ckpt.objective != ObjectiveKind::MdGan {
        return invalid("embedding_snapshot requires an mdgan checkpoint");
    }
    let mixture = SimplexMixture::new(ckpt.embed_dim, ckpt.sigma, ckpt.circumradius)?;
    let mut rng = eval_rng(ckpt.seed, ckpt.step);
    rng.set_word_pos(1 << 40);
    let real = ds.sample_real(n, &mut rng)?;
    let emb = ckpt.discriminator.predict(&real)?;
    emb.iter_rows()
        .map(|e| {
            let (component, sq) = mixture.nearest_component(e)?;
            Ok(EmbeddingPoint {
                embedding: e.to_vec(),
                component,
                distance: sq.sqrt(),
            })
        })
        .collect()
}

fn non_finite(step: u64, what: &'static str, value: f64) -> Error {
    Error::NonFinite { step, what, value }
}

fn check_finite(t: &Tensor, step: u64, what: &'static str) -> Result<()> {
    match t.data().iter().find(|x| !x.is_finite()) {
        Some(&v) => Err(non_finite(step, what, v)),
        None => Ok(()),
    }
}

fn check_all_finite(ts: &[Tensor], step: u64, what: &'static str) -> Result<()> {
    ts.iter().try_for_each(|t| check_finite(t, step, what))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse {value:?}")))
}

fn parse_sizes(key: &str, value: &str) -> Result<Vec<usize>> {
    let v = value.trim().trim_start_matches('[').trim_end_matches(']');
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse(key, s)).collect()
}

fn join_sizes(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl TrainConfig {
    /// Every addressable key, in the order [`entries`](Self::entries) lists them.
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "total_g_steps",
        "d_steps_per_g",
        "batch_size",
        "embed_dim",
        "sigma",
        "circumradius",
        "objective",
        "loss.clamp_epsilon",
        "loss.generator_mode",
        "latent.latent_dim",
        "latent.distribution",
        "data_sigma",
        "generator.hidden",
        "generator.nonlinearity",
        "generator.adam.lr",
        "generator.adam.beta1",
        "generator.adam.beta2",
        "generator.adam.eps",
        "discriminator.hidden",
        "discriminator.nonlinearity",
        "discriminator.adam.lr",
        "discriminator.adam.beta1",
        "discriminator.adam.beta2",
        "discriminator.adam.eps",
        "eval_every",
        "eval_samples",
        "threshold_sigmas",
    ];

    /// Sets one field from its dotted key and textual value. Unknown keys and
    /// unparsable values are errors naming the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "total_g_steps" => self.total_g_steps = parse(key, value)?,
            "d_steps_per_g" => self.d_steps_per_g = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "embed_dim" => self.embed_dim = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "circumradius" => self.circumradius = parse(key, value)?,
            "objective" => {
                self.objective = ObjectiveKind::from_name(value.trim())
                    .ok_or_else(|| Error::InvalidArgument(format!("{key}: expected mdgan or vanilla, got {value:?}")))?
            }
            "loss.clamp_epsilon" => {
                self.loss = LossConfig::new(parse(key, value)?, self.loss.generator_mode)
                    .map_err(|e| Error::InvalidArgument(format!("{key}: {e}")))?
            }
            "loss.generator_mode" => {
                self.loss.generator_mode = objective::GeneratorMode::from_name(value.trim()).ok_or_else(|| {
                    Error::InvalidArgument(format!("{key}: expected minimax or nonsaturating, got {value:?}"))
                })?
            }
            "latent.latent_dim" => self.latent.latent_dim = parse(key, value)?,
            "latent.distribution" => {
                self.latent.distribution = crate::synthdata::LatentDistribution::from_name(value.trim())
                    .ok_or_else(|| Error::InvalidArgument(format!("{key}: expected normal or uniform, got {value:?}")))?
            }
            "data_sigma" => self.data_sigma = parse(key, value)?,
            "eval_every" => self.eval_every = parse(key, value)?,
            "eval_samples" => self.eval_samples = parse(key, value)?,
            "threshold_sigmas" => self.threshold_sigmas = parse(key, value)?,
            _ => {
                let Some((which, field)) = key.split_once('.') else {
                    return invalid(format!("unknown config key {key:?}"));
                };
                let n = match which {
                    "generator" => &mut self.generator,
                    "discriminator" => &mut self.discriminator,
                    _ => return invalid(format!("unknown config key {key:?}")),
                };
                match field {
                    "hidden" => n.hidden = parse_sizes(key, value)?,
                    "nonlinearity" => {
                        n.nonlinearity = Nonlinearity::from_name(value.trim()).ok_or_else(|| {
                            Error::InvalidArgument(format!("{key}: expected leaky_relu, relu or tanh, got {value:?}"))
                        })?
                    }
                    "adam.lr" => n.adam.lr = parse(key, value)?,
                    "adam.beta1" => n.adam.beta1 = parse(key, value)?,
                    "adam.beta2" => n.adam.beta2 = parse(key, value)?,
                    "adam.eps" => n.adam.eps = parse(key, value)?,
                    _ => return invalid(format!("unknown config key {key:?}")),
                }
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs for every field; feeding them back through
    /// [`set`](Self::set) reproduces the config exactly.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:?}");
        let mut out = vec![
            ("seed", self.seed.to_string()),
            ("total_g_steps", self.total_g_steps.to_string()),
            ("d_steps_per_g", self.d_steps_per_g.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("embed_dim", self.embed_dim.to_string()),
            ("sigma", f(self.sigma)),
            ("circumradius", f(self.circumradius)),
            ("objective", self.objective.name().to_string()),
            ("loss.clamp_epsilon", f(self.loss.clamp_epsilon())),
            ("loss.generator_mode", self.loss.generator_mode.name().to_string()),
            ("latent.latent_dim", self.latent.latent_dim.to_string()),
            ("latent.distribution", self.latent.distribution.name().to_string()),
            ("data_sigma", f(self.data_sigma)),
        ];
        for (names, n) in [
            (
                [
                    "generator.hidden",
                    "generator.nonlinearity",
                    "generator.adam.lr",
                    "generator.adam.beta1",
                    "generator.adam.beta2",
                    "generator.adam.eps",
                ],
                &self.generator,
            ),
            (
                [
                    "discriminator.hidden",
                    "discriminator.nonlinearity",
                    "discriminator.adam.lr",
                    "discriminator.adam.beta1",
                    "discriminator.adam.beta2",
                    "discriminator.adam.eps",
                ],
                &self.discriminator,
            ),
        ] {
            out.push((names[0], join_sizes(&n.hidden)));
            out.push((names[1], n.nonlinearity.name().to_string()));
            out.push((names[2], f(n.adam.lr)));
            out.push((names[3], f(n.adam.beta1)));
            out.push((names[4], f(n.adam.beta2)));
            out.push((names[5], f(n.adam.eps)));
        }
        out.push(("eval_every", self.eval_every.to_string()));
        out.push(("eval_samples", self.eval_samples.to_string()));
        out.push(("threshold_sigmas", f(self.threshold_sigmas)));
        out
    }
}
