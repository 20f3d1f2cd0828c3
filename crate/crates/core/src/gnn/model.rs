use rand::Rng;

use super::layers::{readout, Activation, Affine, GcnLayer, GinLayer, Readout};
use super::message::MessageGraph;
use super::{GnnError, Result};
use crate::molecule::ATOM_FEATURES;
use crate::tensor::{ParamSet, Tape, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Gcn,
    Gin,
}

impl LayerKind {
    pub const ALL: [LayerKind; 2] = [LayerKind::Gcn, LayerKind::Gin];

    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Gcn => "gcn",
            LayerKind::Gin => "gin",
        }
    }
}

impl std::str::FromStr for LayerKind {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self> {
        LayerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GnnError::Config(format!("unknown layer kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Binary classification on one logit, trained with cross-entropy.
    Binary,
    /// Scalar regression, trained with mean squared error.
    Regression,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::Binary, TaskKind::Regression];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Binary => "binary",
            TaskKind::Regression => "regression",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GnnError::Config(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub layer: LayerKind,
    pub input_dim: usize,
    /// Output width of each message-passing layer.
    pub hidden: Vec<usize>,
    /// Applied after every message-passing layer.
    pub activation: Activation,
    pub readout: Readout,
    pub task: TaskKind,
    /// Train GIN's ε instead of fixing it at 0.
    pub learn_eps: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            layer: LayerKind::Gin,
            input_dim: ATOM_FEATURES,
            hidden: vec![32, 32],
            activation: Activation::Relu,
            readout: Readout::Sum,
            task: TaskKind::Binary,
            learn_eps: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Gcn(GcnLayer),
    Gin(GinLayer),
}

impl Layer {
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], g: &MessageGraph, h: Var) -> Result<Var> {
        match self {
            Layer::Gcn(l) => l.forward(tape, vars, g, h),
            Layer::Gin(l) => l.forward(tape, vars, g, h),
        }
    }
}

/// Message-passing stack, graph readout and an affine head with one output.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyModel {
    pub config: ModelConfig,
    pub params: ParamSet,
    layers: Vec<Layer>,
    head: Affine,
}

impl PropertyModel {
    /// Glorot-uniform weights, zero biases. Parameters are named
    /// `layer{i}.*` and `head.*`.
    pub fn new(config: ModelConfig, rng: &mut impl Rng) -> Result<Self> {
        if config.input_dim == 0 || config.hidden.is_empty() || config.hidden.contains(&0) {
            return Err(GnnError::Config(
                "input width and every hidden width must be positive, with at least one layer"
                    .into(),
            ));
        }
        let mut params = ParamSet::new();
        let mut layers = Vec::with_capacity(config.hidden.len());
        let mut d_in = config.input_dim;
        for (i, &d_out) in config.hidden.iter().enumerate() {
            let name = format!("layer{i}");
            layers.push(match config.layer {
                LayerKind::Gcn => Layer::Gcn(GcnLayer::new(&mut params, &name, d_in, d_out, rng)),
                LayerKind::Gin => Layer::Gin(GinLayer::new(
                    &mut params,
                    &name,
                    d_in,
                    d_out,
                    d_out,
                    config.learn_eps,
                    rng,
                )),
            });
            d_in = d_out;
        }
        let head = Affine::new(&mut params, "head", d_in, 1, rng);
        Ok(Self {
            config,
            params,
            layers,
            head,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Outputs `[num graphs × 1]`: logits for binary tasks, values for regression.
    pub fn forward(&self, tape: &mut Tape, g: &MessageGraph, x: Var) -> Result<Var> {
        let vars: Vec<Var> = self
            .params
            .iter()
            .map(|(id, _)| tape.param(&self.params, id))
            .collect();
        self.forward_with(tape, &vars, g, x)
    }

    /// Like [`PropertyModel::forward`] with caller-supplied parameter
    /// variables, indexed like `params`.
    pub fn forward_with(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        g: &MessageGraph,
        x: Var,
    ) -> Result<Var> {
        if vars.len() != self.params.len() {
            return Err(GnnError::Config(format!(
                "expected {} parameter variables, got {}",
                self.params.len(),
                vars.len()
            )));
        }
        let mut h = x;
        for layer in &self.layers {
            h = layer.forward(tape, vars, g, h)?;
            h = self.config.activation.apply(tape, h);
        }
        let pooled = readout(tape, g, h, self.config.readout)?;
        self.head.forward(tape, vars, pooled)
    }

    /// Forward pass without gradients; one output per graph.
    pub fn predict(&self, g: &MessageGraph, x: &Tensor) -> Result<Vec<f32>> {
        let mut tape = Tape::new();
        let x = tape.constant(x.clone());
        let vars: Vec<Var> = self
            .params
            .iter()
            .map(|(_, p)| tape.constant(p.value.clone()))
            .collect();
        let out = self.forward_with(&mut tape, &vars, g, x)?;
        Ok(tape.value(out).data().to_vec())
    }
}

/// Mean task loss over graphs: binary cross-entropy on logits, or squared error.
pub fn property_loss(tape: &mut Tape, task: TaskKind, out: Var, labels: &[f32]) -> Result<Var> {
    let n = tape.value(out).numel();
    if n != labels.len() {
        return Err(GnnError::Width {
            layer: "loss".into(),
            expected: vec![labels.len()],
            found: tape.value(out).shape().to_vec(),
        });
    }
    let out = tape.reshape(out, &[n])?;
    let y = tape.constant(Tensor::from_vec(labels.to_vec()));
    let per = match task {
        TaskKind::Binary => {
            // softplus(z) − y·z = −[y log σ(z) + (1 − y) log(1 − σ(z))]
            let sp = tape.softplus(out);
            let yz = tape.mul(y, out)?;
            tape.sub(sp, yz)?
        }
        TaskKind::Regression => {
            let d = tape.sub(out, y)?;
            tape.mul(d, d)?
        }
    };
    Ok(tape.mean(per, None)?)
}
