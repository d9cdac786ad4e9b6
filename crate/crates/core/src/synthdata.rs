//! The 2D grid-of-Gaussians benchmark and latent noise.

use crate::error::{invalid, Result};
use crate::nn::Tensor;
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

pub const DEFAULT_DATA_SIGMA: f64 = 0.05;

/// Isotropic Gaussians on a square grid centred at the origin. The default
/// is a 5x5 grid with spacing 2, i.e. centres at `{-4, -2, 0, 2, 4}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDataset {
    centers: Vec<[f64; 2]>,
    grid_size: usize,
    spacing: f64,
    data_sigma: f64,
}

impl Default for GridDataset {
    fn default() -> Self {
        Self::new(5, 2.0, DEFAULT_DATA_SIGMA).expect("valid defaults")
    }
}

impl GridDataset {
    pub fn new(grid_size: usize, spacing: f64, data_sigma: f64) -> Result<Self> {
        if grid_size == 0 {
            return invalid("grid size must be at least 1");
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return invalid(format!("grid spacing must be positive, got {spacing}"));
        }
        if !(data_sigma >= 0.0 && data_sigma.is_finite()) {
            return invalid(format!("data_sigma must be non-negative, got {data_sigma}"));
        }
        // Offsets are integers (or half-integers for even sizes), so the
        // centres below are exact for integral spacing.
        let half = (grid_size as f64 - 1.0) / 2.0;
        let coords: Vec<f64> = (0..grid_size).map(|i| (i as f64 - half) * spacing).collect();
        let centers = coords
            .iter()
            .flat_map(|&x| coords.iter().map(move |&y| [x, y]))
            .collect();
        Ok(Self {
            centers,
            grid_size,
            spacing,
            data_sigma,
        })
    }

    pub fn with_data_sigma(data_sigma: f64) -> Result<Self> {
        Self::new(5, 2.0, data_sigma)
    }

    /// Centres in row-major order over `(x, y)`.
    pub fn mode_centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn n_modes(&self) -> usize {
        self.centers.len()
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn data_sigma(&self) -> f64 {
        self.data_sigma
    }

    /// Index of the nearest centre and the Euclidean distance to it.
    pub fn nearest_center(&self, p: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centers.iter().enumerate() {
            let sq = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            if sq < best.1 {
                best = (i, sq);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// `n` points: a uniformly chosen centre plus `N(0, data_sigma^2 I)` noise.
    pub fn sample_real<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Tensor> {
        if n == 0 {
            return invalid("sample count must be at least 1");
        }
        let mut data = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let c = self.centers[rng.random_range(0..self.centers.len())];
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            data.push(c[0] + self.data_sigma * nx);
            data.push(c[1] + self.data_sigma * ny);
        }
        Tensor::from_vec(n, 2, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatentDistribution {
    #[default]
    StandardNormal,
    /// Uniform on `[-1, 1]` per coordinate.
    Uniform,
}

impl LatentDistribution {
    pub fn code(self) -> u8 {
        match self {
            LatentDistribution::StandardNormal => 0,
            LatentDistribution::Uniform => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LatentDistribution::StandardNormal),
            1 => Some(LatentDistribution::Uniform),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatentDistribution::StandardNormal => "normal",
            LatentDistribution::Uniform => "uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "normal" => Some(LatentDistribution::StandardNormal),
            "uniform" => Some(LatentDistribution::Uniform),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentSpec {
    pub latent_dim: usize,
    pub distribution: LatentDistribution,
}

impl Default for LatentSpec {
    fn default() -> Self {
        Self {
            latent_dim: 32,
            distribution: LatentDistribution::StandardNormal,
        }
    }
}

impl LatentSpec {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Tensor> {
        if self.latent_dim == 0 {
            return invalid("latent_dim must be at least 1");
        }
        if n == 0 {
            return invalid("sample count must be at least 1");
        }
        let len = n * self.latent_dim;
        let data = match self.distribution {
            LatentDistribution::StandardNormal => {
                (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
            }
            LatentDistribution::Uniform => (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        };
        Tensor::from_vec(n, self.latent_dim, data)
    }
}

/// Writes `x,y,kind` CSV rows for a batch of 2D points. The header is written
/// only when `header` is set, so several batches can share one file.
pub fn write_points_csv<W: Write>(
    out: &mut W,
    points: &Tensor,
    kind: &str,
    header: bool,
) -> Result<()> {
    if points.cols() != 2 {
        return invalid(format!("expected 2D points, got {} columns", points.cols()));
    }
    if header {
        writeln!(out, "x,y,kind")?;
    }
    for p in points.iter_rows() {
        writeln!(out, "{},{},{kind}", p[0], p[1])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_grid_geometry() {
        let ds = GridDataset::default();
        assert_eq!(ds.n_modes(), 25);
        let vals = [-4.0, -2.0, 0.0, 2.0, 4.0];
        for c in ds.mode_centers() {
            assert!(vals.contains(&c[0]) && vals.contains(&c[1]));
            assert!(ds.mode_centers().contains(&[-c[0], -c[1]]));
        }
        let mut min_sep = f64::INFINITY;
        for (i, a) in ds.mode_centers().iter().enumerate() {
            for b in &ds.mode_centers()[i + 1..] {
                min_sep = min_sep.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        assert_eq!(min_sep, 2.0);
    }

    #[test]
    fn zero_sigma_hits_centres() {
        let ds = GridDataset::with_data_sigma(0.0).unwrap();
        let s = ds.sample_real(500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for p in s.iter_rows() {
            assert!(ds.mode_centers().contains(&[p[0], p[1]]));
        }
    }

    #[test]
    fn errors() {
        let ds = GridDataset::default();
        assert!(ds.sample_real(0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(GridDataset::new(0, 2.0, 0.05).is_err());
        assert!(GridDataset::new(5, 2.0, -0.1).is_err());
        let spec = LatentSpec {
            latent_dim: 0,
            ..Default::default()
        };
        assert!(spec.sample(3, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(LatentSpec::default().sample(0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn uniform_latents_in_range() {
        let spec = LatentSpec {
            latent_dim: 8,
            distribution: LatentDistribution::Uniform,
        };
        let z = spec.sample(1000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(z.data().iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn seeded_sampling_repeats() {
        let ds = GridDataset::default();
        let a = ds.sample_real(64, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = ds.sample_real(64, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        let spec = LatentSpec::default();
        let a = spec.sample(16, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = spec.sample(16, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_rows() {
        let pts = Tensor::from_rows(&[[1.0, 2.5], [-0.5, 0.0]]).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &pts, "real", true).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,kind\n1,2.5,real\n-0.5,0,real\n");
    }
}
