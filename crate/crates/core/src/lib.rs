//! Mixture Density GAN on small dense networks.
//!
//! The discriminator maps samples to a `d`-dimensional embedding which is
//! scored by a Gaussian mixture whose `d + 1` components sit on the vertices
//! of a regular simplex ([`sgmm`]). Real samples are pulled towards the
//! vertices and fakes pushed away ([`objective`]); the generator is rewarded
//! for fakes that land near any vertex, which spreads it across data modes.
//!
//! The crate ships its own tiny autodiff engine ([`nn`]), the 25-mode
//! Gaussian grid benchmark ([`synthdata`]), mode-coverage and Fréchet metrics
//! ([`metrics`]), and a deterministic training loop ([`trainer`]).

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod nn;
pub mod objective;
pub mod sgmm;
pub mod simplex;
pub mod synthdata;
pub mod trainer;

pub use error::{Error, Result};

/// Version of this crate, recorded in run directories.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// The guide's Rust snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/simplex-mixture.md")]
    mod simplex_mixture {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
