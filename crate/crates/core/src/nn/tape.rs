//! Reverse-mode differentiation over a linear record of matrix operations.
//!
//! Every operation appends a node holding its output value and the ids of its
//! inputs. [`Tape::backward`] walks the nodes in exact reverse order of
//! recording and accumulates adjoints. Nodes that do not depend on any leaf
//! created with `requires_grad = true` are skipped entirely, which is how the
//! trainer freezes one player while updating the other.

use super::tensor::{gemm, Tensor};
use crate::error::{invalid, Result};
use crate::sgmm::SimplexMixture;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// Leaky ReLU with negative slope 0.2.
    LeakyRelu,
    Relu,
    Tanh,
}

impl Nonlinearity {
    pub const LEAKY_SLOPE: f64 = 0.2;

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Nonlinearity::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    Self::LEAKY_SLOPE * x
                }
            }
            Nonlinearity::Relu => x.max(0.0),
            Nonlinearity::Tanh => x.tanh(),
        }
    }

    /// Derivative given the input `x` and output `y = apply(x)`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Nonlinearity::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    Self::LEAKY_SLOPE
                }
            }
            Nonlinearity::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Nonlinearity::Tanh => 1.0 - y * y,
        }
    }

    /// Stable numeric code used in checkpoints.
    pub fn code(self) -> u8 {
        match self {
            Nonlinearity::LeakyRelu => 0,
            Nonlinearity::Relu => 1,
            Nonlinearity::Tanh => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Nonlinearity::LeakyRelu),
            1 => Some(Nonlinearity::Relu),
            2 => Some(Nonlinearity::Tanh),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::LeakyRelu => "leaky_relu",
            Nonlinearity::Relu => "relu",
            Nonlinearity::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "leaky_relu" => Some(Nonlinearity::LeakyRelu),
            "relu" => Some(Nonlinearity::Relu),
            "tanh" => Some(Nonlinearity::Tanh),
            _ => None,
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Affine { x: NodeId, w: NodeId, b: NodeId },
    Activation { x: NodeId, kind: Nonlinearity },
    Mean { x: NodeId },
    /// Row-wise `log lk`; `partials` holds the per-row gradient.
    LogLk { x: NodeId, partials: Tensor },
    /// Scalar with precomputed partial derivatives for each input.
    Head { inputs: Vec<(NodeId, Tensor)> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Tape::backward`], indexed by node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// `None` when the node does not influence the loss or was frozen.
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads.get_mut(id.0).and_then(Option::take)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every record.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn requires(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// Records a constant or parameter. The gradient buffer of `value` is not
    /// carried onto the tape.
    pub fn leaf(&mut self, value: &Tensor, requires_grad: bool) -> NodeId {
        self.push(value.detached(), Op::Leaf, requires_grad)
    }

    /// `x w + b` with `b` broadcast over rows.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let (n, fan_in) = self.value(x).shape();
        let (w_rows, fan_out) = self.value(w).shape();
        if w_rows != fan_in {
            return invalid(format!(
                "affine: input has {fan_in} columns, weight has {w_rows} rows"
            ));
        }
        if self.value(b).shape() != (1, fan_out) {
            return invalid(format!(
                "affine: bias must be 1x{fan_out}, got {:?}",
                self.value(b).shape()
            ));
        }
        let mut out = Tensor::zeros(n, fan_out);
        {
            let bias = self.value(b).data();
            for r in 0..n {
                out.row_mut(r).copy_from_slice(bias);
            }
        }
        gemm(
            n,
            fan_in,
            fan_out,
            1.0,
            self.value(x).data(),
            false,
            self.value(w).data(),
            false,
            1.0,
            out.data_mut(),
        );
        let rg = self.requires(x) || self.requires(w) || self.requires(b);
        Ok(self.push(out, Op::Affine { x, w, b }, rg))
    }

    pub fn activation(&mut self, x: NodeId, kind: Nonlinearity) -> NodeId {
        let src = self.value(x);
        let mut out = Tensor::zeros(src.rows(), src.cols());
        for (o, &v) in out.data_mut().iter_mut().zip(src.data()) {
            *o = kind.apply(v);
        }
        let rg = self.requires(x);
        self.push(out, Op::Activation { x, kind }, rg)
    }

    /// Mean over every entry, as a 1x1 node.
    pub fn mean(&mut self, x: NodeId) -> Result<NodeId> {
        let src = self.value(x);
        if src.is_empty() {
            return invalid("mean of an empty tensor");
        }
        let m = src.data().iter().sum::<f64>() / src.len() as f64;
        let rg = self.requires(x);
        Ok(self.push(Tensor::scalar(m), Op::Mean { x }, rg))
    }

    /// Row-wise simplex-mixture log-likelihood, producing an `n x 1` node.
    pub fn log_lk(&mut self, x: NodeId, mixture: &SimplexMixture) -> Result<NodeId> {
        let src = self.value(x);
        let (n, d) = src.shape();
        if d != mixture.dim() {
            return invalid(format!(
                "log_lk: embeddings have {d} columns, mixture expects {}",
                mixture.dim()
            ));
        }
        let mut partials = Tensor::zeros(n, d);
        let mut out = Tensor::zeros(n, 1);
        for r in 0..n {
            let (v, _) = mixture.log_lk_and_grad_into(src.row(r), partials.row_mut(r));
            out.data_mut()[r] = v;
        }
        let rg = self.requires(x);
        Ok(self.push(out, Op::LogLk { x, partials }, rg))
    }

    /// Records a scalar whose derivative with respect to each input node was
    /// computed analytically by the caller.
    pub fn scalar_head(&mut self, value: f64, inputs: Vec<(NodeId, Tensor)>) -> Result<NodeId> {
        for (id, partial) in &inputs {
            if self.value(*id).shape() != partial.shape() {
                return invalid(format!(
                    "head partial shape {:?} differs from input shape {:?}",
                    partial.shape(),
                    self.value(*id).shape()
                ));
            }
        }
        let rg = inputs.iter().any(|(id, _)| self.requires(*id));
        Ok(self.push(Tensor::scalar(value), Op::Head { inputs }, rg))
    }

    /// Propagates `d loss / d node` to every node recorded before `loss`.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if self.value(loss).shape() != (1, 1) {
            return invalid(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            ));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        if !self.nodes[loss.0].requires_grad {
            return Ok(Gradients { grads });
        }
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(upstream) = grads[idx].take() else {
                continue;
            };
            match &node.op {
                Op::Leaf => {}
                Op::Affine { x, w, b } => {
                    let xv = self.value(*x);
                    let wv = self.value(*w);
                    let (n, fan_in) = xv.shape();
                    let fan_out = wv.cols();
                    if self.requires(*x) {
                        let g = slot(&mut grads, *x, n, fan_in);
                        gemm(
                            n,
                            fan_out,
                            fan_in,
                            1.0,
                            upstream.data(),
                            false,
                            wv.data(),
                            true,
                            1.0,
                            g.data_mut(),
                        );
                    }
                    if self.requires(*w) {
                        let g = slot(&mut grads, *w, fan_in, fan_out);
                        gemm(
                            fan_in,
                            n,
                            fan_out,
                            1.0,
                            xv.data(),
                            true,
                            upstream.data(),
                            false,
                            1.0,
                            g.data_mut(),
                        );
                    }
                    if self.requires(*b) {
                        let g = slot(&mut grads, *b, 1, fan_out);
                        for row in upstream.iter_rows() {
                            for (acc, v) in g.data_mut().iter_mut().zip(row) {
                                *acc += v;
                            }
                        }
                    }
                }
                Op::Activation { x, kind } => {
                    let xv = self.value(*x);
                    let (r, c) = xv.shape();
                    let g = slot(&mut grads, *x, r, c);
                    for (((acc, &u), &xi), &yi) in g
                        .data_mut()
                        .iter_mut()
                        .zip(upstream.data())
                        .zip(xv.data())
                        .zip(node.value.data())
                    {
                        *acc += u * kind.derivative(xi, yi);
                    }
                }
                Op::Mean { x } => {
                    let (r, c) = self.value(*x).shape();
                    let share = upstream.data()[0] / (r * c) as f64;
                    let g = slot(&mut grads, *x, r, c);
                    for acc in g.data_mut() {
                        *acc += share;
                    }
                }
                Op::LogLk { x, partials } => {
                    let (r, c) = partials.shape();
                    let g = slot(&mut grads, *x, r, c);
                    for row in 0..r {
                        let u = upstream.data()[row];
                        for (acc, p) in g.row_mut(row).iter_mut().zip(partials.row(row)) {
                            *acc += u * p;
                        }
                    }
                }
                Op::Head { inputs } => {
                    let u = upstream.data()[0];
                    for (id, partial) in inputs {
                        if !self.requires(*id) {
                            continue;
                        }
                        let (r, c) = partial.shape();
                        let g = slot(&mut grads, *id, r, c);
                        for (acc, p) in g.data_mut().iter_mut().zip(partial.data()) {
                            *acc += u * p;
                        }
                    }
                }
            }
            // Leaves keep their adjoint; intermediates are dropped as we go.
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(upstream);
            }
        }
        Ok(Gradients { grads })
    }
}

fn slot(grads: &mut [Option<Tensor>], id: NodeId, rows: usize, cols: usize) -> &mut Tensor {
    grads[id.0].get_or_insert_with(|| Tensor::zeros(rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_layer_gradient_is_outer_product() {
        let mut tape = Tape::new();
        let x = tape.leaf(&Tensor::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap(), true);
        let w = tape.leaf(
            &Tensor::from_rows(&[[0.5, -1.0, 2.0], [1.5, 0.0, -0.5]]).unwrap(),
            true,
        );
        let b = tape.leaf(&Tensor::from_rows(&[[0.1, 0.2, 0.3]]).unwrap(), true);
        let y = tape.affine(x, w, b).unwrap();
        // sum(y) = mean(y) * 6
        let m = tape.mean(y).unwrap();
        let g = tape.backward(m).unwrap();
        // d mean / dW[i][j] = sum_r x[r][i] / 6
        let gw = g.get(w).unwrap();
        assert_eq!(gw.data(), &[4.0 / 6.0, 4.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert_eq!(g.get(b).unwrap().data(), &[2.0 / 6.0; 3]);
        // d mean / dx[r][i] = sum_j W[i][j] / 6
        let gx = g.get(x).unwrap().data();
        for (got, want) in gx.iter().zip([1.5 / 6.0, 1.0 / 6.0, 1.5 / 6.0, 1.0 / 6.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn frozen_leaves_get_no_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(&Tensor::from_rows(&[[1.0, 2.0]]).unwrap(), true);
        let w = tape.leaf(&Tensor::identity(2), false);
        let b = tape.leaf(&Tensor::zeros(1, 2), false);
        let y = tape.affine(x, w, b).unwrap();
        let m = tape.mean(y).unwrap();
        let g = tape.backward(m).unwrap();
        assert!(g.get(w).is_none());
        assert!(g.get(b).is_none());
        assert_eq!(g.get(x).unwrap().data(), &[0.5, 0.5]);
    }

    #[test]
    fn constant_loss_has_no_gradients() {
        let mut tape = Tape::new();
        let w = tape.leaf(&Tensor::identity(2), true);
        let c = tape.leaf(&Tensor::scalar(3.0), false);
        let g = tape.backward(c).unwrap();
        assert!(g.get(w).is_none());
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::new();
        let x = tape.leaf(&Tensor::zeros(2, 2), true);
        assert!(tape.backward(x).is_err());
    }

    #[test]
    fn affine_shape_errors() {
        let mut tape = Tape::new();
        let x = tape.leaf(&Tensor::zeros(2, 3), true);
        let w = tape.leaf(&Tensor::zeros(2, 2), true);
        let b = tape.leaf(&Tensor::zeros(1, 2), true);
        assert!(tape.affine(x, w, b).is_err());
        let w = tape.leaf(&Tensor::zeros(3, 2), true);
        let bad_b = tape.leaf(&Tensor::zeros(1, 3), true);
        assert!(tape.affine(x, w, bad_b).is_err());
    }

    #[test]
    fn nonlinearity_codes_round_trip() {
        for n in [Nonlinearity::LeakyRelu, Nonlinearity::Relu, Nonlinearity::Tanh] {
            assert_eq!(Nonlinearity::from_code(n.code()), Some(n));
            assert_eq!(Nonlinearity::from_name(n.name()), Some(n));
        }
        assert_eq!(Nonlinearity::from_code(7), None);
    }

    #[test]
    fn clear_frees_records() {
        let mut tape = Tape::new();
        tape.leaf(&Tensor::zeros(1, 1), true);
        assert_eq!(tape.len(), 1);
        tape.clear();
        assert!(tape.is_empty());
    }
}
