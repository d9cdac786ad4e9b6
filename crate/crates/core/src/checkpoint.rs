//! Versioned little-endian binary checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic          8 bytes  "MDGANCKP"
//! version        u32      1
//! objective      u8       0 = mdgan, 1 = vanilla
//! generator_mode u8       0 = minimax, 1 = nonsaturating
//! latent_dist    u8       0 = normal, 1 = uniform
//! seed           u64
//! step           u64      generator steps taken
//! embed_dim      u32      d
//! sigma          f64
//! circumradius   f64
//! clamp_epsilon  f64
//! latent_dim     u32
//! data_sigma     f64
//! last_d_loss    f64
//! last_g_loss    f64
//! 2 x network    generator then discriminator:
//!   n_sizes      u32, then n_sizes x u32 layer sizes
//!   nonlinearity u8       0 = leaky_relu, 1 = relu, 2 = tanh
//! 2 x params     generator then discriminator: W_1, b_1, W_2, .. as f64, row-major
//! 2 x adam       generator then discriminator:
//!   lr, beta1, beta2, eps   f64
//!   step                    u64
//!   first moments, second moments  f64, laid out like the params
//! ```
//!
//! Loading validates every count against the declared shapes and rejects
//! trailing bytes. Saving a loaded checkpoint reproduces the input exactly.

use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, MlpNetwork, Nonlinearity, Tensor};
use crate::objective::GeneratorMode;
use crate::synthdata::LatentDistribution;
use crate::trainer::ObjectiveKind;
use std::fs;
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"MDGANCKP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub objective: ObjectiveKind,
    pub generator_mode: GeneratorMode,
    pub latent_distribution: LatentDistribution,
    pub seed: u64,
    pub step: u64,
    pub embed_dim: usize,
    pub sigma: f64,
    pub circumradius: f64,
    pub clamp_epsilon: f64,
    pub latent_dim: usize,
    pub data_sigma: f64,
    pub last_d_loss: f64,
    pub last_g_loss: f64,
    pub generator: MlpNetwork,
    pub discriminator: MlpNetwork,
    pub generator_adam: AdamState,
    pub discriminator_adam: AdamState,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.u8(self.objective.code());
        w.u8(match self.generator_mode {
            GeneratorMode::Minimax => 0,
            GeneratorMode::NonSaturating => 1,
        });
        w.u8(self.latent_distribution.code());
        w.u64(self.seed);
        w.u64(self.step);
        w.u32(self.embed_dim as u32);
        w.f64(self.sigma);
        w.f64(self.circumradius);
        w.f64(self.clamp_epsilon);
        w.u32(self.latent_dim as u32);
        w.f64(self.data_sigma);
        w.f64(self.last_d_loss);
        w.f64(self.last_g_loss);
        for net in [&self.generator, &self.discriminator] {
            w.u32(net.sizes().len() as u32);
            for &s in net.sizes() {
                w.u32(s as u32);
            }
            w.u8(net.hidden().code());
        }
        for net in [&self.generator, &self.discriminator] {
            for p in net.params() {
                w.f64s(p.data());
            }
        }
        for adam in [&self.generator_adam, &self.discriminator_adam] {
            let c = adam.config;
            w.f64(c.lr);
            w.f64(c.beta1);
            w.f64(c.beta2);
            w.f64(c.eps);
            w.u64(adam.step_count());
            for m in adam.first_moments() {
                w.f64s(m);
            }
            for v in adam.second_moments() {
                w.f64s(v);
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let objective = ObjectiveKind::from_code(r.u8()?).ok_or_else(|| bad("unknown objective"))?;
        let generator_mode = match r.u8()? {
            0 => GeneratorMode::Minimax,
            1 => GeneratorMode::NonSaturating,
            c => return Err(bad(format!("unknown generator mode {c}"))),
        };
        let latent_distribution =
            LatentDistribution::from_code(r.u8()?).ok_or_else(|| bad("unknown latent distribution"))?;
        let seed = r.u64()?;
        let step = r.u64()?;
        let embed_dim = r.u32()? as usize;
        let sigma = r.f64()?;
        let circumradius = r.f64()?;
        let clamp_epsilon = r.f64()?;
        let latent_dim = r.u32()? as usize;
        let data_sigma = r.f64()?;
        let last_d_loss = r.f64()?;
        let last_g_loss = r.f64()?;

        let mut layouts = Vec::with_capacity(2);
        for _ in 0..2 {
            let n = r.u32()? as usize;
            if !(2..=64).contains(&n) {
                return Err(bad(format!("implausible layer count {n}")));
            }
            let sizes = (0..n).map(|_| r.u32().map(|s| s as usize)).collect::<Result<Vec<_>>>()?;
            let hidden = Nonlinearity::from_code(r.u8()?).ok_or_else(|| bad("unknown nonlinearity"))?;
            layouts.push((sizes, hidden));
        }
        let mut nets = Vec::with_capacity(2);
        for (sizes, hidden) in &layouts {
            let params = read_param_tensors(&mut r, sizes)?;
            nets.push(MlpNetwork::from_params(sizes, *hidden, params).map_err(|e| bad(e.to_string()))?);
        }
        let mut adams = Vec::with_capacity(2);
        for net in &nets {
            let config = AdamConfig {
                lr: r.f64()?,
                beta1: r.f64()?,
                beta2: r.f64()?,
                eps: r.f64()?,
            };
            let adam_step = r.u64()?;
            let first = net.params().iter().map(|p| r.f64s(p.len())).collect::<Result<Vec<_>>>()?;
            let second = net.params().iter().map(|p| r.f64s(p.len())).collect::<Result<Vec<_>>>()?;
            adams.push(AdamState::from_parts(config, adam_step, first, second));
        }
        if r.pos != bytes.len() {
            return Err(bad(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let discriminator_adam = adams.pop().expect("two states");
        let generator_adam = adams.pop().expect("two states");
        let discriminator = nets.pop().expect("two networks");
        let generator = nets.pop().expect("two networks");
        Ok(Self {
            objective,
            generator_mode,
            latent_distribution,
            seed,
            step,
            embed_dim,
            sigma,
            circumradius,
            clamp_epsilon,
            latent_dim,
            data_sigma,
            last_d_loss,
            last_g_loss,
            generator,
            discriminator,
            generator_adam,
            discriminator_adam,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn read_param_tensors(r: &mut Reader<'_>, sizes: &[usize]) -> Result<Vec<Tensor>> {
    let mut out = Vec::with_capacity(2 * (sizes.len() - 1));
    for pair in sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let len = fan_in
            .checked_mul(fan_out)
            .ok_or_else(|| bad("layer too large"))?;
        out.push(Tensor::from_vec(fan_in, fan_out, r.f64s(len)?)?);
        out.push(Tensor::from_vec(1, fan_out, r.f64s(fan_out)?)?);
    }
    Ok(out)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(bad(format!("truncated at byte {}", self.pos)));
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| bad("length overflow"))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
