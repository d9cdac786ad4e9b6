//! Simplex Gaussian mixture likelihood over discriminator embeddings.
//!
//! The mixture has one spherical Gaussian per simplex vertex, all sharing the
//! standard deviation `sigma`. Component weights are hard-max: the component
//! with the highest density gets weight one, every other component zero. With
//! a shared `sigma` the highest-density component is simply the nearest vertex,
//! so
//!
//! ```text
//! log lk(e) = log_lambda - min_i |e - mu_i|^2 / (2 sigma^2)
//! log_lambda = -(d / 2) ln(2 pi sigma^2)
//! ```
//!
//! where `lambda = exp(log_lambda)` is the peak density. Raw densities are
//! never formed: at `d = 24, sigma = 0.2` the peak is already about `1.6e7`,
//! and it overflows for larger `d` or smaller `sigma`.

use crate::error::{invalid, Result};
use crate::simplex::{build_simplex, SimplexVertices};
use std::f64::consts::PI;

pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_CIRCUMRADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMixture {
    vertices: SimplexVertices,
    sigma: f64,
    log_lambda: f64,
}

impl SimplexMixture {
    /// Mixture over the vertices of a regular `dim`-simplex of the given
    /// circumradius, with shared standard deviation `sigma`.
    pub fn new(dim: usize, sigma: f64, circumradius: f64) -> Result<Self> {
        let vertices = build_simplex(dim, circumradius)?;
        Self::from_vertices(vertices, sigma)
    }

    pub fn from_vertices(vertices: SimplexVertices, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return invalid(format!("sigma must be positive and finite, got {sigma}"));
        }
        let d = vertices.dim() as f64;
        let log_lambda = -0.5 * d * (2.0 * PI * sigma * sigma).ln();
        Ok(Self {
            vertices,
            sigma,
            log_lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    pub fn n_components(&self) -> usize {
        self.vertices.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices.circumradius()
    }

    pub fn vertices(&self) -> &SimplexVertices {
        &self.vertices
    }

    pub fn mean(&self, index: usize) -> &[f64] {
        self.vertices.vertex(index)
    }

    /// Log of the peak density, attained at every component mean.
    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    fn check_dim(&self, e: &[f64]) -> Result<()> {
        if e.len() != self.dim() {
            return invalid(format!(
                "embedding has dimension {}, mixture expects {}",
                e.len(),
                self.dim()
            ));
        }
        Ok(())
    }

    /// Index of the highest-likelihood component and the squared distance to
    /// its mean. Ties go to the lowest index.
    pub fn nearest_component(&self, e: &[f64]) -> Result<(usize, f64)> {
        self.check_dim(e)?;
        Ok(self.nearest_unchecked(e))
    }

    pub(crate) fn nearest_unchecked(&self, e: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, mu) in self.vertices.iter().enumerate() {
            let sq: f64 = mu.iter().zip(e).map(|(m, x)| (x - m) * (x - m)).sum();
            // Strict comparison keeps the lowest index on ties.
            if sq < best.1 {
                best = (i, sq);
            }
        }
        best
    }

    /// `log lk(e)` under hard-max weights.
    pub fn log_lk(&self, e: &[f64]) -> Result<f64> {
        self.check_dim(e)?;
        let (_, sq) = self.nearest_unchecked(e);
        Ok(self.log_lk_from_sq(sq))
    }

    pub(crate) fn log_lk_from_sq(&self, sq: f64) -> f64 {
        self.log_lambda - sq / (2.0 * self.sigma * self.sigma)
    }

    /// Gradient of [`log_lk`](Self::log_lk) with respect to the embedding:
    /// `(mu_nearest - e) / sigma^2`. On the tie set the lowest-index component
    /// is differentiated.
    pub fn log_lk_grad(&self, e: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(e)?;
        let mut out = vec![0.0; e.len()];
        self.log_lk_and_grad_into(e, &mut out);
        Ok(out)
    }

    /// Writes the gradient into `grad` and returns `(log_lk, nearest index)`.
    /// The caller guarantees dimensions.
    pub(crate) fn log_lk_and_grad_into(&self, e: &[f64], grad: &mut [f64]) -> (f64, usize) {
        let (idx, sq) = self.nearest_unchecked(e);
        let inv_var = 1.0 / (self.sigma * self.sigma);
        for ((g, m), x) in grad.iter_mut().zip(self.mean(idx)).zip(e) {
            *g = (m - x) * inv_var;
        }
        (self.log_lk_from_sq(sq), idx)
    }
}
