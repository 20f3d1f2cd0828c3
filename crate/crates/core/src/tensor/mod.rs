//! Dense row-major `f32` tensors, a reverse-mode tape and first-order optimizers.
//!
//! [`Tensor`] values are immutable and cheap to reason about: every operation
//! returns a new tensor. Differentiable computation is recorded on a [`Tape`],
//! whose gradients flow into the [`Parameter`]s of a [`ParamSet`].
//!
//! Binary element-wise operations accept three operand layouts:
//!
//! * identical shapes;
//! * one operand is a scalar (rank 0 or a single element of shape `[1]`);
//! * one operand is a matrix `[m, n]` and the other a row, `[n]` or `[1, n]`,
//!   which is repeated over the `m` rows.
//!
//! Nothing else broadcasts.

mod optim;
mod tape;

pub use optim::{Optimizer, OptimizerConfig, OptimizerKind, ParamId, ParamSet, Parameter};
pub use tape::{Tape, Var};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: axis {axis} out of range for shape {shape:?}")]
    Axis {
        op: &'static str,
        axis: usize,
        shape: Vec<usize>,
    },
    #[error("{op}: index {index} out of range for extent {extent}")]
    Index {
        op: &'static str,
        index: usize,
        extent: usize,
    },
    #[error("{op}: value {value} at position {position} is outside the domain")]
    Domain {
        op: &'static str,
        value: f32,
        position: usize,
    },
    #[error("data of length {len} does not fit shape {shape:?}")]
    Shape { shape: Vec<usize>, len: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("non-finite gradient in parameter `{name}`")]
    NonFiniteGradient { name: String },
}

pub type Result<T> = std::result::Result<T, TensorError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Relu,
    Sigmoid,
    Exp,
    Log,
    Softplus,
    Abs,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Mean,
    Max,
}

/// How the operands of a binary op line up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Broadcast {
    Same,
    LhsScalar,
    RhsScalar,
    /// lhs is `[m, n]`, rhs a row of `n`.
    RhsRow,
    /// rhs is `[m, n]`, lhs a row of `n`.
    LhsRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if numel(&shape) != data.len() {
            return Err(TensorError::Shape {
                shape,
                len: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn scalar(value: f32) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    /// Rank-1 tensor over `data`.
    pub fn from_vec(data: Vec<f32>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    /// Builds a matrix from equally long rows. `cols` is needed for the empty case.
    pub fn from_rows(rows: &[Vec<f32>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(TensorError::Dimension {
                    op: "from_rows",
                    lhs: vec![rows.len(), cols],
                    rhs: vec![row.len()],
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            shape: vec![rows.len(), cols],
            data,
        })
    }

    pub fn full(shape: &[usize], value: f32) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; numel(shape)],
        }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn ones(shape: &[usize]) -> Self {
        Self::full(shape, 1.0)
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Self::zeros(&other.shape)
    }

    pub fn eye(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.shape.iter().all(|&e| e == 1)
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> Result<f32> {
        if self.is_scalar() {
            Ok(self.data[0])
        } else {
            Err(TensorError::Contract(format!(
                "item() needs a single element, shape is {:?}",
                self.shape
            )))
        }
    }

    /// Extent of the leading axis (1 for a scalar).
    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }

    /// Number of values per leading-axis row.
    pub fn row_len(&self) -> usize {
        if self.shape.is_empty() {
            1
        } else {
            numel(&self.shape[1..])
        }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let w = self.row_len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        if numel(shape) != self.numel() {
            return Err(TensorError::Dimension {
                op: "reshape",
                lhs: self.shape.clone(),
                rhs: shape.to_vec(),
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 || self.shape[1] != other.shape[0] {
            return Err(TensorError::Dimension {
                op: "matmul",
                lhs: self.shape.clone(),
                rhs: other.shape.clone(),
            });
        }
        let (m, k, n) = (self.shape[0], self.shape[1], other.shape[1]);
        let mut out = vec![0.0f32; m * n];
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let o_row = &mut out[i * n..(i + 1) * n];
            for (p, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * n..(p + 1) * n];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Tensor {
            shape: vec![m, n],
            data: out,
        })
    }

    pub fn transpose(&self) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(TensorError::Contract(format!(
                "transpose needs a matrix, shape is {:?}",
                self.shape
            )));
        }
        let (m, n) = (self.shape[0], self.shape[1]);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = self.data[i * n + j];
            }
        }
        Ok(Tensor {
            shape: vec![n, m],
            data: out,
        })
    }

    pub(crate) fn broadcast_kind(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Broadcast> {
        let is_row_of = |row: &Tensor, mat: &Tensor| {
            mat.rank() == 2
                && ((row.rank() == 1 && row.shape[0] == mat.shape[1])
                    || (row.rank() == 2 && row.shape[0] == 1 && row.shape[1] == mat.shape[1]))
        };
        if a.shape == b.shape {
            Ok(Broadcast::Same)
        } else if b.is_scalar() {
            Ok(Broadcast::RhsScalar)
        } else if a.is_scalar() {
            Ok(Broadcast::LhsScalar)
        } else if is_row_of(b, a) {
            Ok(Broadcast::RhsRow)
        } else if is_row_of(a, b) {
            Ok(Broadcast::LhsRow)
        } else {
            Err(TensorError::Dimension {
                op,
                lhs: a.shape.clone(),
                rhs: b.shape.clone(),
            })
        }
    }

    pub fn binary(&self, op: BinaryOp, other: &Tensor) -> Result<Tensor> {
        let name = match op {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
        };
        let kind = Self::broadcast_kind(name, self, other)?;
        let f = |x: f32, y: f32| match op {
            BinaryOp::Add => x + y,
            BinaryOp::Sub => x - y,
            BinaryOp::Mul => x * y,
        };
        let (shape, data) = match kind {
            Broadcast::Same => (
                self.shape.clone(),
                self.data
                    .iter()
                    .zip(&other.data)
                    .map(|(&x, &y)| f(x, y))
                    .collect(),
            ),
            Broadcast::RhsScalar => {
                let y = other.data[0];
                (
                    self.shape.clone(),
                    self.data.iter().map(|&x| f(x, y)).collect(),
                )
            }
            Broadcast::LhsScalar => {
                let x = self.data[0];
                (
                    other.shape.clone(),
                    other.data.iter().map(|&y| f(x, y)).collect(),
                )
            }
            Broadcast::RhsRow => {
                let n = other.numel();
                (
                    self.shape.clone(),
                    self.data
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| f(x, other.data[i % n]))
                        .collect(),
                )
            }
            Broadcast::LhsRow => {
                let n = self.numel();
                (
                    other.shape.clone(),
                    other
                        .data
                        .iter()
                        .enumerate()
                        .map(|(i, &y)| f(self.data[i % n], y))
                        .collect(),
                )
            }
        };
        Ok(Tensor { shape, data })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(BinaryOp::Add, other)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(BinaryOp::Sub, other)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(BinaryOp::Mul, other)
    }

    pub fn scale(&self, factor: f32) -> Tensor {
        self.map(|v| v * factor)
    }

    pub fn unary(&self, op: UnaryOp) -> Result<Tensor> {
        match op {
            UnaryOp::Log => {
                if let Some((position, &value)) = self
                    .data
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| v <= 0.0 || v.is_nan())
                {
                    return Err(TensorError::Domain {
                        op: "log",
                        value,
                        position,
                    });
                }
                Ok(self.map(f32::ln))
            }
            UnaryOp::Sqrt => {
                if let Some((position, &value)) = self
                    .data
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| v < 0.0 || v.is_nan())
                {
                    return Err(TensorError::Domain {
                        op: "sqrt",
                        value,
                        position,
                    });
                }
                Ok(self.map(f32::sqrt))
            }
            UnaryOp::Relu => Ok(self.map(|v| v.max(0.0))),
            UnaryOp::Sigmoid => Ok(self.map(sigmoid)),
            UnaryOp::Exp => Ok(self.map(f32::exp)),
            UnaryOp::Softplus => Ok(self.map(softplus)),
            UnaryOp::Abs => Ok(self.map(f32::abs)),
            UnaryOp::Sin => Ok(self.map(f32::sin)),
            UnaryOp::Cos => Ok(self.map(f32::cos)),
        }
    }

    pub fn relu(&self) -> Tensor {
        self.map(|v| v.max(0.0))
    }

    pub fn sigmoid(&self) -> Tensor {
        self.map(sigmoid)
    }

    pub fn exp(&self) -> Tensor {
        self.map(f32::exp)
    }

    pub fn log(&self) -> Result<Tensor> {
        self.unary(UnaryOp::Log)
    }

    /// Reduces `axis` away, or everything to a scalar when `axis` is `None`.
    pub fn reduce(&self, op: ReduceOp, axis: Option<usize>) -> Result<Tensor> {
        Ok(self.reduce_with_argmax(op, axis)?.0)
    }

    /// Like [`Tensor::reduce`]; for `Max` also returns the flat source index of
    /// every output element (first maximum wins).
    pub(crate) fn reduce_with_argmax(
        &self,
        op: ReduceOp,
        axis: Option<usize>,
    ) -> Result<(Tensor, Vec<usize>)> {
        let name = match op {
            ReduceOp::Sum => "sum",
            ReduceOp::Mean => "mean",
            ReduceOp::Max => "max",
        };
        let Some(axis) = axis else {
            if op == ReduceOp::Max && self.data.is_empty() {
                return Err(TensorError::Contract("max of an empty tensor".into()));
            }
            return Ok(match op {
                ReduceOp::Sum => (Tensor::scalar(self.data.iter().sum()), Vec::new()),
                ReduceOp::Mean => (
                    Tensor::scalar(self.data.iter().sum::<f32>() / self.data.len() as f32),
                    Vec::new(),
                ),
                ReduceOp::Max => {
                    let (i, v) = argmax(self.data.iter().copied().enumerate());
                    (Tensor::scalar(v), vec![i])
                }
            });
        };
        if axis >= self.rank() {
            return Err(TensorError::Axis {
                op: name,
                axis,
                shape: self.shape.clone(),
            });
        }
        let outer: usize = self.shape[..axis].iter().product();
        let extent = self.shape[axis];
        let inner: usize = self.shape[axis + 1..].iter().product();
        if op == ReduceOp::Max && extent == 0 {
            return Err(TensorError::Contract("max over an empty axis".into()));
        }
        let mut out_shape = self.shape.clone();
        out_shape.remove(axis);
        let mut out = Vec::with_capacity(outer * inner);
        let mut arg = Vec::new();
        for o in 0..outer {
            for i in 0..inner {
                let idx = (0..extent).map(|e| (o * extent + e) * inner + i);
                match op {
                    ReduceOp::Sum => out.push(idx.map(|p| self.data[p]).sum()),
                    ReduceOp::Mean => {
                        out.push(idx.map(|p| self.data[p]).sum::<f32>() / extent as f32)
                    }
                    ReduceOp::Max => {
                        let (p, v) = argmax(idx.map(|p| (p, self.data[p])));
                        out.push(v);
                        arg.push(p);
                    }
                }
            }
        }
        Ok((
            Tensor {
                shape: out_shape,
                data: out,
            },
            arg,
        ))
    }

    pub fn sum(&self, axis: Option<usize>) -> Result<Tensor> {
        self.reduce(ReduceOp::Sum, axis)
    }

    pub fn mean(&self, axis: Option<usize>) -> Result<Tensor> {
        self.reduce(ReduceOp::Mean, axis)
    }

    pub fn max(&self, axis: Option<usize>) -> Result<Tensor> {
        self.reduce(ReduceOp::Max, axis)
    }

    /// Row `i` of the output is row `idx[i]` of `self`.
    pub fn gather_rows(&self, idx: &[usize]) -> Result<Tensor> {
        if self.rank() == 0 {
            return Err(TensorError::Contract("gather_rows on a scalar".into()));
        }
        let n = self.shape[0];
        let w = self.row_len();
        let mut data = Vec::with_capacity(idx.len() * w);
        for &i in idx {
            if i >= n {
                return Err(TensorError::Index {
                    op: "gather_rows",
                    index: i,
                    extent: n,
                });
            }
            data.extend_from_slice(&self.data[i * w..(i + 1) * w]);
        }
        let mut shape = self.shape.clone();
        shape[0] = idx.len();
        Ok(Tensor { shape, data })
    }

    /// Output row `j` is the sum of the rows `i` of `self` with `idx[i] == j`.
    pub fn scatter_add_rows(&self, idx: &[usize], n: usize) -> Result<Tensor> {
        if self.rank() == 0 || self.shape[0] != idx.len() {
            return Err(TensorError::Dimension {
                op: "scatter_add_rows",
                lhs: self.shape.clone(),
                rhs: vec![idx.len()],
            });
        }
        let w = self.row_len();
        let mut data = vec![0.0f32; n * w];
        for (i, &j) in idx.iter().enumerate() {
            if j >= n {
                return Err(TensorError::Index {
                    op: "scatter_add_rows",
                    index: j,
                    extent: n,
                });
            }
            for (o, &v) in data[j * w..(j + 1) * w]
                .iter_mut()
                .zip(&self.data[i * w..(i + 1) * w])
            {
                *o += v;
            }
        }
        let mut shape = self.shape.clone();
        shape[0] = n;
        Ok(Tensor { shape, data })
    }

    /// Picks columns of a matrix in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(TensorError::Contract(format!(
                "select_cols needs a matrix, shape is {:?}",
                self.shape
            )));
        }
        let (m, n) = (self.shape[0], self.shape[1]);
        if let Some(&bad) = cols.iter().find(|&&c| c >= n) {
            return Err(TensorError::Index {
                op: "select_cols",
                index: bad,
                extent: n,
            });
        }
        let mut data = Vec::with_capacity(m * cols.len());
        for i in 0..m {
            data.extend(cols.iter().map(|&c| self.data[i * n + c]));
        }
        Ok(Tensor {
            shape: vec![m, cols.len()],
            data,
        })
    }

    /// Multiplies row `i` by `weights[i]`.
    pub fn scale_rows(&self, weights: &[f32]) -> Result<Tensor> {
        if self.rank() == 0 || self.shape[0] != weights.len() {
            return Err(TensorError::Dimension {
                op: "scale_rows",
                lhs: self.shape.clone(),
                rhs: vec![weights.len()],
            });
        }
        let w = self.row_len();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| v * weights[i / w.max(1)])
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    /// Concatenates along the leading axis. All parts must share the trailing
    /// extents; `suffix` fixes them when `parts` is empty.
    pub fn concat_rows(parts: &[&Tensor], suffix: &[usize]) -> Result<Tensor> {
        let mut rows = 0;
        let mut data = Vec::new();
        for p in parts {
            if p.rank() == 0 || p.shape[1..] != *suffix {
                return Err(TensorError::Dimension {
                    op: "concat_rows",
                    lhs: suffix.to_vec(),
                    rhs: p.shape.clone(),
                });
            }
            rows += p.shape[0];
            data.extend_from_slice(&p.data);
        }
        let mut shape = vec![rows];
        shape.extend_from_slice(suffix);
        Ok(Tensor { shape, data })
    }

    /// Stacks equally shaped tensors under a new leading axis.
    pub fn stack(parts: &[&Tensor], shape: &[usize]) -> Result<Tensor> {
        let mut data = Vec::with_capacity(parts.len() * numel(shape));
        for p in parts {
            if p.shape != shape {
                return Err(TensorError::Dimension {
                    op: "stack",
                    lhs: shape.to_vec(),
                    rhs: p.shape.clone(),
                });
            }
            data.extend_from_slice(&p.data);
        }
        let mut out_shape = vec![parts.len()];
        out_shape.extend_from_slice(shape);
        Ok(Tensor {
            shape: out_shape,
            data,
        })
    }

    /// Rows `start..end` of the leading axis.
    pub fn slice_rows(&self, start: usize, end: usize) -> Tensor {
        let w = self.row_len();
        let mut shape = self.shape.clone();
        shape[0] = end - start;
        Tensor {
            shape,
            data: self.data[start * w..end * w].to_vec(),
        }
    }

    /// Little-endian `f32` bytes, row-major.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(shape: Vec<usize>, bytes: &[u8]) -> Result<Tensor> {
        if bytes.len() != numel(&shape) * 4 {
            return Err(TensorError::Shape {
                shape,
                len: bytes.len() / 4,
            });
        }
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Tensor::new(shape, data)
    }
}

fn argmax(values: impl Iterator<Item = (usize, f32)>) -> (usize, f32) {
    let mut best = (0, f32::NEG_INFINITY);
    let mut first = true;
    for (i, v) in values {
        if first || v > best.1 {
            best = (i, v);
            first = false;
        }
    }
    best
}

pub fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f32) -> f32 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
