use super::{Result, Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A trainable tensor with its gradient accumulator and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    /// Optimizer moments; empty until the first Adam step.
    pub state: Vec<Tensor>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros_like(&value);
        Self {
            name: name.into(),
            value,
            grad,
            state: Vec::new(),
        }
    }
}

/// An ordered collection of named parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    params: Vec<Parameter>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.params.push(Parameter::new(name, value));
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].grad
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.data_mut().fill(0.0);
        }
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, g: &Tensor) {
        let p = &mut self.params[id.0];
        for (a, b) in p.grad.data_mut().iter_mut().zip(g.data()) {
            *a += *b;
        }
    }

    /// Replaces every value with the same-named tensor from `values`, checking shapes.
    pub fn load_values<'a>(
        &mut self,
        mut lookup: impl FnMut(&str) -> Option<&'a Tensor>,
    ) -> Result<()> {
        for p in &mut self.params {
            let v = lookup(&p.name)
                .ok_or_else(|| TensorError::Contract(format!("missing tensor `{}`", p.name)))?;
            if v.shape() != p.value.shape() {
                return Err(TensorError::Dimension {
                    op: "load_values",
                    lhs: p.value.shape().to_vec(),
                    rhs: v.shape().to_vec(),
                });
            }
            p.value = v.clone();
            p.grad = Tensor::zeros_like(v);
            p.state.clear();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
}

impl OptimizerConfig {
    pub fn sgd(lr: f32) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            lr,
            ..Self::adam(lr)
        }
    }

    pub fn adam(lr: f32) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub config: OptimizerConfig,
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Self {
        Self { config, steps: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update to every parameter. Gradients are left in place;
    /// call [`ParamSet::zero_grad`] before the next backward pass.
    pub fn step(&mut self, params: &mut ParamSet) -> Result<()> {
        if let Some(p) = params.params.iter().find(|p| !p.grad.is_finite()) {
            return Err(TensorError::NonFiniteGradient {
                name: p.name.clone(),
            });
        }
        self.steps += 1;
        let c = self.config;
        match c.kind {
            OptimizerKind::Sgd => {
                for p in &mut params.params {
                    for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                        *v -= c.lr * g;
                    }
                }
            }
            OptimizerKind::Adam => {
                let t = self.steps as i32;
                let bc1 = 1.0 - c.beta1.powi(t);
                let bc2 = 1.0 - c.beta2.powi(t);
                for p in &mut params.params {
                    if p.state.len() != 2 {
                        p.state = vec![Tensor::zeros_like(&p.value), Tensor::zeros_like(&p.value)];
                    }
                    let (m, v) = p.state.split_at_mut(1);
                    let (m, v) = (m[0].data_mut(), v[0].data_mut());
                    for (i, (x, &g)) in p.value.data_mut().iter_mut().zip(p.grad.data()).enumerate()
                    {
                        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
                        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
                        let m_hat = m[i] / bc1;
                        let v_hat = v[i] / bc2;
                        *x -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
                    }
                }
            }
        }
        Ok(())
    }
}
