//! Dense reverse-mode differentiation, fully connected networks and Adam.
//!
//! This is the minimum needed to train small MLPs on 2D data: an affine op,
//! three nonlinearities, a mean, the simplex-mixture head, and scalar loss
//! heads whose partial derivatives are supplied by [`crate::objective`].

mod adam;
mod mlp;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{ForwardPass, MlpNetwork};
pub use tape::{Gradients, NodeId, Nonlinearity, Tape};
pub use tensor::Tensor;
