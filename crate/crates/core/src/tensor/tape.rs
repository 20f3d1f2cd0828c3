use super::{
    BinaryOp, Broadcast, ParamId, ParamSet, ReduceOp, Result, Tensor, TensorError, UnaryOp,
};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    Const,
    MatMul(Var, Var),
    Binary(BinaryOp, Var, Var, Broadcast),
    Scale(Var, f32),
    Unary(UnaryOp, Var),
    Reduce {
        op: ReduceOp,
        x: Var,
        axis: Option<usize>,
        argmax: Vec<usize>,
    },
    Gather(Var, Vec<usize>),
    ScatterAdd(Var, Vec<usize>),
    SelectCols(Var, Vec<usize>),
    ScaleRows(Var, Vec<f32>),
    Reshape(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    tracked: bool,
}

/// Append-only record of tensor operations for reverse-mode differentiation.
///
/// Inputs of a node always precede it, so a single reverse sweep visits the
/// graph in topological order. A tape belongs to one thread; build a fresh one
/// per training step.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
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

    fn push(&mut self, value: Tensor, op: Op, tracked: bool) -> Var {
        self.nodes.push(Node { value, op, tracked });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, v: Var) -> bool {
        self.nodes[v.0].tracked
    }

    /// A differentiable input whose gradient is read back with [`Tape::grad`].
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A value that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Const, false)
    }

    /// Records the current value of a parameter; `backward` accumulates into it.
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        self.push(params.value(id).clone(), Op::Param(id), true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient accumulated for `v` by all `backward` calls so far.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.0].as_ref()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(value, Op::MatMul(a, b), tracked))
    }

    pub fn binary(&mut self, op: BinaryOp, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        let value = va.binary(op, vb)?;
        let kind = Tensor::broadcast_kind("binary", va, vb)?;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(value, Op::Binary(op, a, b, kind), tracked))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Mul, a, b)
    }

    pub fn scale(&mut self, x: Var, factor: f32) -> Var {
        let value = self.value(x).scale(factor);
        let tracked = self.tracked(x);
        self.push(value, Op::Scale(x, factor), tracked)
    }

    pub fn neg(&mut self, x: Var) -> Var {
        self.scale(x, -1.0)
    }

    /// `x + c` for a constant `c`.
    pub fn add_scalar(&mut self, x: Var, c: f32) -> Result<Var> {
        let k = self.constant(Tensor::scalar(c));
        self.add(x, k)
    }

    pub fn unary(&mut self, op: UnaryOp, x: Var) -> Result<Var> {
        let value = self.value(x).unary(op)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::Unary(op, x), tracked))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Relu, x).expect("relu is total")
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Sigmoid, x).expect("sigmoid is total")
    }

    pub fn exp(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Exp, x).expect("exp is total")
    }

    pub fn log(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Log, x)
    }

    pub fn softplus(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Softplus, x).expect("softplus is total")
    }

    pub fn abs(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Abs, x).expect("abs is total")
    }

    pub fn sqrt(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Sqrt, x)
    }

    pub fn sin(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Sin, x).expect("sin is total")
    }

    pub fn cos(&mut self, x: Var) -> Var {
        self.unary(UnaryOp::Cos, x).expect("cos is total")
    }

    pub fn reduce(&mut self, op: ReduceOp, x: Var, axis: Option<usize>) -> Result<Var> {
        let (value, argmax) = self.value(x).reduce_with_argmax(op, axis)?;
        let tracked = self.tracked(x);
        Ok(self.push(
            value,
            Op::Reduce {
                op,
                x,
                axis,
                argmax,
            },
            tracked,
        ))
    }

    pub fn sum(&mut self, x: Var, axis: Option<usize>) -> Result<Var> {
        self.reduce(ReduceOp::Sum, x, axis)
    }

    pub fn mean(&mut self, x: Var, axis: Option<usize>) -> Result<Var> {
        self.reduce(ReduceOp::Mean, x, axis)
    }

    pub fn max(&mut self, x: Var, axis: Option<usize>) -> Result<Var> {
        self.reduce(ReduceOp::Max, x, axis)
    }

    pub fn gather_rows(&mut self, x: Var, idx: &[usize]) -> Result<Var> {
        let value = self.value(x).gather_rows(idx)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::Gather(x, idx.to_vec()), tracked))
    }

    pub fn scatter_add_rows(&mut self, x: Var, idx: &[usize], n: usize) -> Result<Var> {
        let value = self.value(x).scatter_add_rows(idx, n)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::ScatterAdd(x, idx.to_vec()), tracked))
    }

    pub fn select_cols(&mut self, x: Var, cols: &[usize]) -> Result<Var> {
        let value = self.value(x).select_cols(cols)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::SelectCols(x, cols.to_vec()), tracked))
    }

    /// Multiplies row `i` by the constant `weights[i]`.
    pub fn scale_rows(&mut self, x: Var, weights: &[f32]) -> Result<Var> {
        let value = self.value(x).scale_rows(weights)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::ScaleRows(x, weights.to_vec()), tracked))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(x).reshape(shape)?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::Reshape(x), tracked))
    }

    /// Reverse sweep from a scalar `loss`. Gradients accumulate both on the tape
    /// and into the parameters of `params` referenced by this tape.
    pub fn backward(&mut self, loss: Var, params: &mut ParamSet) -> Result<()> {
        let lv = self.value(loss);
        if lv.numel() != 1 {
            return Err(TensorError::Contract(format!(
                "backward needs a scalar loss, shape is {:?}",
                lv.shape()
            )));
        }
        if !self.tracked(loss) {
            return Err(TensorError::Contract(
                "loss does not depend on any tracked value".into(),
            ));
        }
        let mut local: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        local[loss.0] = Some(Tensor::ones(lv.shape()));
        for i in (0..=loss.0).rev() {
            let Some(g) = local[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.tracked {
                continue;
            }
            for (input, contribution) in self.input_grads(node, &g)? {
                if !self.nodes[input.0].tracked {
                    continue;
                }
                accumulate(&mut local[input.0], contribution);
            }
            if let Op::Param(id) = node.op {
                params.accumulate_grad(id, &g);
            }
            accumulate(&mut self.grads[i], g);
        }
        Ok(())
    }

    fn input_grads(&self, node: &Node, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let val = |v: Var| &self.nodes[v.0].value;
        Ok(match &node.op {
            Op::Leaf | Op::Param(_) | Op::Const => Vec::new(),
            Op::MatMul(a, b) => {
                let da = g.matmul(&val(*b).transpose()?)?;
                let db = val(*a).transpose()?.matmul(g)?;
                vec![(*a, da), (*b, db)]
            }
            Op::Binary(op, a, b, kind) => {
                let (ga, gb) = match op {
                    BinaryOp::Add => (g.clone(), g.clone()),
                    BinaryOp::Sub => (g.clone(), g.scale(-1.0)),
                    BinaryOp::Mul => (g.mul(val(*b))?, g.mul(val(*a))?),
                };
                let ga = unbroadcast(ga, val(*a), *kind, true)?;
                let gb = unbroadcast(gb, val(*b), *kind, false)?;
                vec![(*a, ga), (*b, gb)]
            }
            Op::Scale(x, c) => vec![(*x, g.scale(*c))],
            Op::Unary(op, x) => {
                let xv = val(*x);
                let y = &node.value;
                let d: Vec<f32> = match op {
                    UnaryOp::Relu => zip3(g, xv, y, |g, x, _| if x > 0.0 { g } else { 0.0 }),
                    UnaryOp::Sigmoid => zip3(g, xv, y, |g, _, y| g * y * (1.0 - y)),
                    UnaryOp::Exp => zip3(g, xv, y, |g, _, y| g * y),
                    UnaryOp::Log => zip3(g, xv, y, |g, x, _| g / x),
                    UnaryOp::Softplus => zip3(g, xv, y, |g, x, _| g * super::sigmoid(x)),
                    UnaryOp::Abs => zip3(g, xv, y, |g, x, _| {
                        if x > 0.0 {
                            g
                        } else if x < 0.0 {
                            -g
                        } else {
                            0.0
                        }
                    }),
                    // Subgradient 0 at the origin keeps the sweep finite.
                    UnaryOp::Sqrt => {
                        zip3(g, xv, y, |g, _, y| if y > 0.0 { 0.5 * g / y } else { 0.0 })
                    }
                    UnaryOp::Sin => zip3(g, xv, y, |g, x, _| g * x.cos()),
                    UnaryOp::Cos => zip3(g, xv, y, |g, x, _| -g * x.sin()),
                };
                vec![(*x, Tensor::new(xv.shape().to_vec(), d)?)]
            }
            Op::Reduce {
                op,
                x,
                axis,
                argmax,
            } => {
                let xv = val(*x);
                let mut d = Tensor::zeros_like(xv);
                match (op, axis) {
                    (ReduceOp::Max, _) => {
                        for (&p, &gv) in argmax.iter().zip(g.data()) {
                            d.data_mut()[p] += gv;
                        }
                    }
                    (_, None) => {
                        let scale = if *op == ReduceOp::Mean {
                            1.0 / xv.numel() as f32
                        } else {
                            1.0
                        };
                        d.data_mut().fill(g.data()[0] * scale);
                    }
                    (_, Some(axis)) => {
                        let shape = xv.shape();
                        let extent = shape[*axis];
                        let inner: usize = shape[axis + 1..].iter().product();
                        let scale = if *op == ReduceOp::Mean {
                            1.0 / extent as f32
                        } else {
                            1.0
                        };
                        for (p, out) in d.data_mut().iter_mut().enumerate() {
                            let o = p / (extent * inner);
                            let i = p % inner;
                            *out = g.data()[o * inner + i] * scale;
                        }
                    }
                }
                vec![(*x, d)]
            }
            Op::Gather(x, idx) => vec![(*x, g.scatter_add_rows(idx, val(*x).rows())?)],
            Op::ScatterAdd(x, idx) => vec![(*x, g.gather_rows(idx)?)],
            Op::SelectCols(x, cols) => {
                let xv = val(*x);
                let (m, n) = (xv.shape()[0], xv.shape()[1]);
                let k = cols.len();
                let mut d = Tensor::zeros_like(xv);
                for i in 0..m {
                    for (j, &c) in cols.iter().enumerate() {
                        d.data_mut()[i * n + c] += g.data()[i * k + j];
                    }
                }
                vec![(*x, d)]
            }
            Op::ScaleRows(x, w) => vec![(*x, g.scale_rows(w)?)],
            Op::Reshape(x) => vec![(*x, g.reshape(val(*x).shape())?)],
        })
    }
}

fn zip3(g: &Tensor, x: &Tensor, y: &Tensor, f: impl Fn(f32, f32, f32) -> f32) -> Vec<f32> {
    g.data()
        .iter()
        .zip(x.data())
        .zip(y.data())
        .map(|((&g, &x), &y)| f(g, x, y))
        .collect()
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(acc) => {
            for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                *a += *b;
            }
        }
        None => *slot = Some(g),
    }
}

/// Folds a result-shaped gradient back onto the operand's shape.
fn unbroadcast(g: Tensor, operand: &Tensor, kind: Broadcast, is_lhs: bool) -> Result<Tensor> {
    let reduced = match (kind, is_lhs) {
        (Broadcast::Same, _) => return Ok(g),
        (Broadcast::LhsScalar, true) | (Broadcast::RhsScalar, false) => g.sum(None)?,
        (Broadcast::LhsRow, true) | (Broadcast::RhsRow, false) => g.sum(Some(0))?,
        _ => return Ok(g),
    };
    reduced.reshape(operand.shape())
}
