use super::tape::{Gradients, NodeId, Nonlinearity, Tape};
use super::tensor::Tensor;
use crate::error::{invalid, Result};
use rand::Rng;

/// Fully connected network: hidden layers apply `hidden`, the output layer is
/// linear. Parameters are stored flat as `[W_1, b_1, W_2, b_2, ..]` with
/// `W_l` of shape `sizes[l-1] x sizes[l]` and `b_l` of shape `1 x sizes[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    sizes: Vec<usize>,
    hidden: Nonlinearity,
    params: Vec<Tensor>,
}

/// Tape nodes produced by one [`MlpNetwork::forward`] call.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub output: NodeId,
    pub params: Vec<NodeId>,
}

impl MlpNetwork {
    /// Weights drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
    pub fn init<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Nonlinearity,
        rng: &mut R,
    ) -> Result<Self> {
        check_sizes(sizes)?;
        let mut params = Vec::with_capacity(2 * (sizes.len() - 1));
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            params.push(Tensor::from_vec(fan_in, fan_out, w)?);
            params.push(Tensor::zeros(1, fan_out));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden,
            params,
        })
    }

    /// Rebuilds a network from explicit parameters in layer order.
    pub fn from_params(sizes: &[usize], hidden: Nonlinearity, params: Vec<Tensor>) -> Result<Self> {
        check_sizes(sizes)?;
        if params.len() != 2 * (sizes.len() - 1) {
            return invalid(format!(
                "expected {} parameter tensors, got {}",
                2 * (sizes.len() - 1),
                params.len()
            ));
        }
        for (l, pair) in sizes.windows(2).enumerate() {
            if params[2 * l].shape() != (pair[0], pair[1]) || params[2 * l + 1].shape() != (1, pair[1]) {
                return invalid(format!("layer {l} parameters have the wrong shape"));
            }
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden,
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn hidden(&self) -> Nonlinearity {
        self.hidden
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Records the forward pass on `tape`. With `trainable = false` the
    /// parameters are frozen and no parameter gradients are computed.
    pub fn forward(&self, input: NodeId, tape: &mut Tape, trainable: bool) -> Result<ForwardPass> {
        let cols = tape.value(input).cols();
        if cols != self.input_dim() {
            return invalid(format!(
                "network expects {} input columns, got {cols}",
                self.input_dim()
            ));
        }
        let params: Vec<NodeId> = self.params.iter().map(|p| tape.leaf(p, trainable)).collect();
        let layers = params.len() / 2;
        let mut h = input;
        for l in 0..layers {
            h = tape.affine(h, params[2 * l], params[2 * l + 1])?;
            if l + 1 < layers {
                h = tape.activation(h, self.hidden);
            }
        }
        Ok(ForwardPass { output: h, params })
    }

    /// Evaluates the network on a batch without keeping a tape around.
    pub fn predict(&self, input: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let x = tape.leaf(input, false);
        let fwd = self.forward(x, &mut tape, false)?;
        Ok(tape.value(fwd.output).detached())
    }

    /// Parameter gradients from a backward pass, in parameter order. Parameters
    /// that did not influence the loss get zeros.
    pub fn param_grads(&self, grads: &Gradients, pass: &ForwardPass) -> Vec<Tensor> {
        self.params
            .iter()
            .zip(&pass.params)
            .map(|(p, id)| {
                grads
                    .get(*id)
                    .cloned()
                    .unwrap_or_else(|| Tensor::zeros(p.rows(), p.cols()))
            })
            .collect()
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return invalid("a network needs at least an input and an output size");
    }
    if sizes.contains(&0) {
        return invalid("layer sizes must be positive");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let params = vec![
            Tensor::zeros(3, 4),
            Tensor::zeros(1, 4),
            Tensor::zeros(4, 2),
            Tensor::zeros(1, 2),
        ];
        let net = MlpNetwork::from_params(&[3, 4, 2], Nonlinearity::Tanh, params).unwrap();
        let x = Tensor::from_rows(&[[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]]).unwrap();
        let y = net.predict(&x).unwrap();
        assert_eq!(y.data(), &[0.0; 4]);
    }

    #[test]
    fn identity_layer() {
        let net = MlpNetwork::from_params(
            &[3, 3],
            Nonlinearity::Relu,
            vec![Tensor::identity(3), Tensor::zeros(1, 3)],
        )
        .unwrap();
        let x = Tensor::from_rows(&[[1.0, -2.0, 3.0]]).unwrap();
        assert_eq!(net.predict(&x).unwrap().data(), x.data());
    }

    #[test]
    fn param_count_and_init_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = MlpNetwork::init(&[2, 16, 16, 5], Nonlinearity::LeakyRelu, &mut rng).unwrap();
        assert_eq!(net.param_count(), 2 * 16 + 16 + 16 * 16 + 16 + 16 * 5 + 5);
        for (l, pair) in net.sizes().windows(2).enumerate() {
            let bound = 1.0 / (pair[0] as f64).sqrt();
            assert!(net.params()[2 * l].data().iter().all(|w| w.abs() <= bound));
            assert!(net.params()[2 * l + 1].data().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = MlpNetwork::init(&[4, 8, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(5));
        let b = MlpNetwork::init(&[4, 8, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn bad_shapes() {
        assert!(MlpNetwork::init(&[3], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(MlpNetwork::init(&[3, 0, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let net = MlpNetwork::init(&[3, 2], Nonlinearity::Relu, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(net.predict(&Tensor::zeros(1, 2)).is_err());
        assert!(MlpNetwork::from_params(&[3, 2], Nonlinearity::Relu, vec![Tensor::zeros(3, 2)]).is_err());
    }
}
