//! Vertices of a regular simplex centred at the origin.
//!
//! The construction starts from the standard basis `e_1..e_{d+1}` of
//! `R^{d+1}`, subtracts the centroid, and expresses the result in the
//! Helmert basis of the hyperplane `sum(x) = 0`:
//!
//! ```text
//! u_k = (1, .., 1, -k, 0, .., 0) / sqrt(k (k + 1)),   k = 1..d
//!        \_ k ones _/
//! ```
//!
//! Coordinate `k` of vertex `i` is therefore `u_k[i]`, which has a closed
//! form and needs no numerical orthogonalisation. Every centred basis vector
//! has norm `sqrt(d / (d + 1))`; the vertices are rescaled so that their norm
//! equals the requested circumradius. Vertex `i` is the image of `e_{i+1}`,
//! and this ordering is part of the checkpoint format.

use crate::error::{invalid, Result};

/// The `d + 1` vertices of a regular `d`-simplex with a given circumradius.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVertices {
    dim: usize,
    circumradius: f64,
    vertices: Vec<Vec<f64>>,
}

impl SimplexVertices {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Always false; a simplex has at least two vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, index: usize) -> &[f64] {
        &self.vertices[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.vertices.iter().map(Vec::as_slice)
    }

    /// Distance between any two distinct vertices, `R * sqrt(2 (d + 1) / d)`.
    pub fn edge_length(&self) -> f64 {
        let d = self.dim as f64;
        self.circumradius * (2.0 * (d + 1.0) / d).sqrt()
    }
}

/// Builds the vertices of a regular `dim`-simplex with the given circumradius.
///
/// The output is a pure function of the arguments. Coordinates are computed as
/// `unit_coordinate * circumradius` with the multiplication by the radius done
/// last, so scaling the radius by a power of two scales every coordinate
/// exactly.
///
/// ```
/// let s = mdgan::simplex::build_simplex(1, 1.0).unwrap();
/// assert_eq!(s.vertex(0), &[1.0]);
/// assert_eq!(s.vertex(1), &[-1.0]);
/// ```
pub fn build_simplex(dim: usize, circumradius: f64) -> Result<SimplexVertices> {
    if dim == 0 {
        return invalid("simplex dimension must be at least 1");
    }
    if !(circumradius > 0.0 && circumradius.is_finite()) {
        return invalid(format!(
            "simplex circumradius must be positive and finite, got {circumradius}"
        ));
    }

    let d = dim as f64;

    let vertices = (0..=dim)
        .map(|i| {
            (1..=dim)
                .map(|k| {
                    let kf = k as f64;
                    let helmert = if i < k {
                        1.0
                    } else if i == k {
                        -kf
                    } else {
                        0.0
                    };
                    // Helmert entry divided by the centred norm sqrt(d / (d + 1)).
                    let unit = helmert * ((d + 1.0) / (d * kf * (kf + 1.0))).sqrt();
                    unit * circumradius
                })
                .collect()
        })
        .collect();

    Ok(SimplexVertices {
        dim,
        circumradius,
        vertices,
    })
}
