//! Mode coverage and Fréchet distance for generated 2D samples.

use crate::error::{invalid, Result};
use crate::nn::Tensor;
use crate::synthdata::GridDataset;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub const DEFAULT_THRESHOLD_SIGMAS: f64 = 3.0;
/// Most negative eigenvalue still treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Coverage of the grid modes by a batch of samples.
///
/// A sample is high quality when it lies within `threshold_sigmas *
/// data_sigma` of its nearest centre; it then counts towards that centre.
/// A mode is captured when it has at least one high-quality sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub n_samples: u64,
    pub threshold_sigmas: f64,
    pub modes_captured: u32,
    pub hq_fraction: f64,
    pub per_mode_counts: Vec<u64>,
}

impl ModeReport {
    pub fn to_ndjson(&self) -> String {
        serde_json::to_string(self).expect("plain data serialises")
    }
}

pub fn mode_report(samples: &Tensor, ds: &GridDataset, threshold_sigmas: f64) -> Result<ModeReport> {
    if samples.rows() == 0 {
        return invalid("mode_report needs at least one sample");
    }
    if samples.cols() != 2 {
        return invalid(format!("expected 2D samples, got {} columns", samples.cols()));
    }
    if !(threshold_sigmas >= 0.0) {
        return invalid("threshold_sigmas must be non-negative");
    }
    let radius = threshold_sigmas * ds.data_sigma();
    let mut counts = vec![0u64; ds.n_modes()];
    for p in samples.iter_rows() {
        let (idx, dist) = ds.nearest_center(p);
        if dist <= radius {
            counts[idx] += 1;
        }
    }
    let hq: u64 = counts.iter().sum();
    Ok(ModeReport {
        n_samples: samples.rows() as u64,
        threshold_sigmas,
        modes_captured: counts.iter().filter(|&&c| c > 0).count() as u32,
        hq_fraction: hq as f64 / samples.rows() as f64,
        per_mode_counts: counts,
    })
}

/// Mean and covariance of a sample, the summary a Fréchet distance compares.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    mean: Vec<f64>,
    /// Row-major `k x k`.
    covariance: Vec<f64>,
}

impl GaussianSummary {
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let k = mean.len();
        if k == 0 || covariance.len() != k * k {
            return invalid("covariance must be k x k for a mean of length k >= 1");
        }
        for i in 0..k {
            for j in 0..i {
                if (covariance[i * k + j] - covariance[j * k + i]).abs() > 1e-12 {
                    return invalid("covariance is not symmetric");
                }
            }
        }
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    fn cov_matrix(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_row_slice(k, k, &self.covariance)
    }

    fn trace(&self) -> f64 {
        let k = self.dim();
        (0..k).map(|i| self.covariance[i * k + i]).sum()
    }

    fn check_psd(&self) -> Result<()> {
        let eig = SymmetricEigen::new(self.cov_matrix());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            return invalid(format!("covariance is not PSD (eigenvalue {min})"));
        }
        Ok(())
    }
}

/// Maximum-likelihood mean and covariance (`1/n` normalisation).
pub fn fit_gaussian(samples: &Tensor) -> Result<GaussianSummary> {
    let (n, k) = samples.shape();
    if k == 0 {
        return invalid("samples have no columns");
    }
    if n < k + 1 {
        return invalid(format!("need at least {} samples to fit {k} dimensions, got {n}", k + 1));
    }
    let nf = n as f64;
    let mut mean = vec![0.0; k];
    for row in samples.iter_rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let mut cov = vec![0.0; k * k];
    for row in samples.iter_rows() {
        for i in 0..k {
            let di = row[i] - mean[i];
            for j in 0..k {
                cov[i * k + j] += di * (row[j] - mean[j]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= nf);
    for i in 0..k {
        for j in 0..i {
            let avg = 0.5 * (cov[i * k + j] + cov[j * k + i]);
            cov[i * k + j] = avg;
            cov[j * k + i] = avg;
        }
    }
    GaussianSummary::new(mean, cov)
}

/// `|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2})`.
///
/// One and two dimensions use closed forms; larger summaries go through the
/// singular values of `S_b^{1/2} S_a^{1/2}`.
pub fn frechet_distance(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    if a.dim() != b.dim() {
        return invalid(format!(
            "summaries have dimensions {} and {}",
            a.dim(),
            b.dim()
        ));
    }
    a.check_psd()?;
    b.check_psd()?;
    if a == b {
        return Ok(0.0);
    }
    let mean_sq: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y) * (x - y)).sum();
    let tr_sqrt = match a.dim() {
        1 => (a.covariance[0].max(0.0) * b.covariance[0].max(0.0)).sqrt(),
        2 => trace_sqrt_product_2x2(&a.covariance, &b.covariance),
        _ => trace_sqrt_product(a, b),
    };
    Ok((mean_sq + a.trace() + b.trace() - 2.0 * tr_sqrt).max(0.0))
}

/// `tr((A B)^{1/2})` for 2x2 PSD `A`, `B`. The eigenvalues of `AB` are real
/// and non-negative, so the trace of the root is
/// `sqrt(tr(AB) + 2 sqrt(det(AB)))`. Both terms are formed so that swapping
/// `A` and `B` gives the same floating-point result.
fn trace_sqrt_product_2x2(a: &[f64], b: &[f64]) -> f64 {
    let tr = a[0] * b[0] + 2.0 * (a[1] * b[1]) + a[3] * b[3];
    let det_a = (a[0] * a[3] - a[1] * a[1]).max(0.0);
    let det_b = (b[0] * b[3] - b[1] * b[1]).max(0.0);
    (tr + 2.0 * (det_a * det_b).sqrt()).max(0.0).sqrt()
}

/// Symmetric PSD square root. Eigenvalues at rounding level relative to the
/// largest one are treated as exact zeros.
fn psd_sqrt(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let floor = top * f64::EPSILON * eig.eigenvalues.len() as f64;
    let roots = eig.eigenvalues.map(|l| if l > floor { l.sqrt() } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// `tr((S_a^{1/2} S_b S_a^{1/2})^{1/2})`, computed as the sum of singular
/// values of `S_b^{1/2} S_a^{1/2}`. Working with singular values avoids a
/// final square root of eigenvalues near zero, which would amplify rounding
/// noise to `sqrt(eps)`.
fn trace_sqrt_product(a: &GaussianSummary, b: &GaussianSummary) -> f64 {
    let m = psd_sqrt(b.cov_matrix()) * psd_sqrt(a.cov_matrix());
    m.singular_values().iter().sum()
}

/// Fréchet distance between Gaussians fitted to two batches.
pub fn sample_frechet(a: &Tensor, b: &Tensor) -> Result<f64> {
    frechet_distance(&fit_gaussian(a)?, &fit_gaussian(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(mean: &[f64], cov: &[f64]) -> GaussianSummary {
        GaussianSummary::new(mean.to_vec(), cov.to_vec()).unwrap()
    }

    #[test]
    fn exact_centres() {
        let ds = GridDataset::default();
        let rows: Vec<[f64; 2]> = ds
            .mode_centers()
            .iter()
            .flat_map(|c| std::iter::repeat_n(*c, 100))
            .collect();
        let r = mode_report(&Tensor::from_rows(&rows).unwrap(), &ds, 3.0).unwrap();
        assert_eq!(r.modes_captured, 25);
        assert_eq!(r.hq_fraction, 1.0);
        assert!(r.per_mode_counts.iter().all(|&c| c == 100));
        assert_eq!(r.n_samples, 2500);
    }

    #[test]
    fn collapsed_to_one_mode() {
        let ds = GridDataset::default();
        let rows = vec![[2.0, -4.0]; 300];
        let r = mode_report(&Tensor::from_rows(&rows).unwrap(), &ds, 3.0).unwrap();
        assert_eq!(r.modes_captured, 1);
        assert_eq!(r.hq_fraction, 1.0);
    }

    #[test]
    fn off_grid_samples_are_low_quality() {
        let ds = GridDataset::default();
        let pts = Tensor::from_rows(&[[1.0, 1.0], [0.1, 0.0], [0.2, 0.0]]).unwrap();
        let r = mode_report(&pts, &ds, 3.0).unwrap();
        // Only (0.1, 0) is within 0.15 of a centre.
        assert_eq!(r.modes_captured, 1);
        assert!((r.hq_fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn report_errors_and_json() {
        let ds = GridDataset::default();
        assert!(mode_report(&Tensor::zeros(0, 2), &ds, 3.0).is_err());
        assert!(mode_report(&Tensor::zeros(3, 3), &ds, 3.0).is_err());
        let r = mode_report(&Tensor::from_rows(&[[0.0, 0.0]]).unwrap(), &ds, 3.0).unwrap();
        let line = r.to_ndjson();
        assert!(line.starts_with(r#"{"n_samples":1,"threshold_sigmas":3.0,"modes_captured":1,"hq_fraction":1.0,"per_mode_counts":["#));
        assert!(!line.contains('\n'));
    }

    #[test]
    fn fit_constant_and_grid() {
        let same = Tensor::from_rows(&[[1.5, -2.0]; 10]).unwrap();
        let s = fit_gaussian(&same).unwrap();
        assert_eq!(s.mean(), &[1.5, -2.0]);
        assert_eq!(s.covariance(), &[0.0; 4]);

        let ds = GridDataset::default();
        let s = fit_gaussian(&Tensor::from_rows(ds.mode_centers()).unwrap()).unwrap();
        assert_eq!(s.mean(), &[0.0, 0.0]);
        // Var of {-4,-2,0,2,4} is 8; the axes are uncorrelated.
        assert_eq!(s.covariance(), &[8.0, 0.0, 0.0, 8.0]);
        assert!(fit_gaussian(&Tensor::zeros(2, 2)).is_err());
    }

    #[test]
    fn one_dimensional_closed_forms() {
        let n01 = summary(&[0.0], &[1.0]);
        assert_eq!(frechet_distance(&n01, &summary(&[1.0], &[1.0])).unwrap(), 1.0);
        assert_eq!(frechet_distance(&n01, &summary(&[0.0], &[4.0])).unwrap(), 1.0);
        assert_eq!(frechet_distance(&n01, &n01).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_matches_eigen_route() {
        let a = summary(&[0.3, -1.0], &[2.0, 0.4, 0.4, 0.5]);
        let b = summary(&[1.0, 0.5], &[0.7, -0.2, -0.2, 1.3]);
        let closed = trace_sqrt_product_2x2(a.covariance(), b.covariance());
        let eig = trace_sqrt_product(&a, &b);
        assert!((closed - eig).abs() < 1e-12, "{closed} vs {eig}");
    }

    #[test]
    fn rejects_non_psd_and_mismatch() {
        let a = summary(&[0.0, 0.0], &[1.0, 2.0, 2.0, 1.0]);
        let b = summary(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(frechet_distance(&a, &b).is_err());
        assert!(frechet_distance(&b, &summary(&[0.0], &[1.0])).is_err());
        assert!(GaussianSummary::new(vec![0.0, 0.0], vec![1.0, 0.5, 0.0, 1.0]).is_err());
    }
}
