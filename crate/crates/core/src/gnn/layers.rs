use rand::Rng;

use super::message::MessageGraph;
use super::{GnnError, Result};
use crate::tensor::{ParamId, ParamSet, Tape, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 2] = [Activation::Relu, Activation::Identity];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn apply(self, tape: &mut Tape, x: Var) -> Var {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Identity => x,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GnnError::Config(format!("unknown activation `{s}`")))
    }
}

/// Glorot-uniform weight `[d_in × d_out]`.
pub(crate) fn glorot(rng: &mut impl Rng, d_in: usize, d_out: usize) -> Tensor {
    let bound = (6.0 / (d_in + d_out) as f32).sqrt();
    let data = (0..d_in * d_out)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    Tensor::new(vec![d_in, d_out], data).expect("sized")
}

/// `x W + b` with parameters read from `vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub d_in: usize,
    pub d_out: usize,
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Affine {
    pub fn new(
        params: &mut ParamSet,
        name: &str,
        d_in: usize,
        d_out: usize,
        rng: &mut impl Rng,
    ) -> Self {
        Self {
            d_in,
            d_out,
            weight: params.add(format!("{name}.weight"), glorot(rng, d_in, d_out)),
            bias: params.add(format!("{name}.bias"), Tensor::zeros(&[d_out])),
        }
    }

    pub fn forward(&self, tape: &mut Tape, vars: &[Var], x: Var) -> Result<Var> {
        let y = tape.matmul(x, vars[self.weight.index()])?;
        Ok(tape.add(y, vars[self.bias.index()])?)
    }
}

fn check_width(tape: &Tape, layer: &str, h: Var, g: &MessageGraph, d_in: usize) -> Result<()> {
    let shape = tape.value(h).shape();
    if shape.len() != 2 || shape[1] != d_in || shape[0] != g.num_nodes() {
        return Err(GnnError::Width {
            layer: layer.to_string(),
            expected: vec![g.num_nodes(), d_in],
            found: shape.to_vec(),
        });
    }
    Ok(())
}

/// Graph convolution `D̂^{-1/2} (A + I) D̂^{-1/2} H W + b`, without activation.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer {
    pub affine: Affine,
}

impl GcnLayer {
    pub fn new(
        params: &mut ParamSet,
        name: &str,
        d_in: usize,
        d_out: usize,
        rng: &mut impl Rng,
    ) -> Self {
        Self {
            affine: Affine::new(params, name, d_in, d_out, rng),
        }
    }

    pub fn forward(&self, tape: &mut Tape, vars: &[Var], g: &MessageGraph, h: Var) -> Result<Var> {
        check_width(tape, "gcn", h, g, self.affine.d_in)?;
        let hw = tape.matmul(h, vars[self.affine.weight.index()])?;
        let own = tape.scale_rows(hw, g.gcn_self_weights())?;
        let msg = tape.gather_rows(hw, g.sources())?;
        let msg = tape.scale_rows(msg, g.gcn_edge_weights())?;
        let agg = tape.scatter_add_rows(msg, g.targets(), g.num_nodes())?;
        let out = tape.add(own, agg)?;
        Ok(tape.add(out, vars[self.affine.bias.index()])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Fixed(f32),
    Learned(ParamId),
}

/// Graph isomorphism layer `MLP((1 + ε) h_v + Σ_{u ∈ N(v)} h_u)`, the MLP
/// being two affine maps with a relu between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GinLayer {
    pub epsilon: Epsilon,
    pub mlp: [Affine; 2],
}

impl GinLayer {
    /// `ε` starts at 0; it is a parameter named `{name}.eps` when `learn_eps`.
    pub fn new(
        params: &mut ParamSet,
        name: &str,
        d_in: usize,
        d_hidden: usize,
        d_out: usize,
        learn_eps: bool,
        rng: &mut impl Rng,
    ) -> Self {
        let epsilon = if learn_eps {
            Epsilon::Learned(params.add(format!("{name}.eps"), Tensor::scalar(0.0)))
        } else {
            Epsilon::Fixed(0.0)
        };
        let first = Affine::new(params, &format!("{name}.mlp0"), d_in, d_hidden, rng);
        let second = Affine::new(params, &format!("{name}.mlp1"), d_hidden, d_out, rng);
        Self {
            epsilon,
            mlp: [first, second],
        }
    }

    pub fn forward(&self, tape: &mut Tape, vars: &[Var], g: &MessageGraph, h: Var) -> Result<Var> {
        check_width(tape, "gin", h, g, self.mlp[0].d_in)?;
        let own = match self.epsilon {
            Epsilon::Fixed(eps) => tape.scale(h, 1.0 + eps),
            Epsilon::Learned(id) => {
                let factor = tape.add_scalar(vars[id.index()], 1.0)?;
                tape.mul(h, factor)?
            }
        };
        let msg = tape.gather_rows(h, g.sources())?;
        let agg = tape.scatter_add_rows(msg, g.targets(), g.num_nodes())?;
        let x = tape.add(own, agg)?;
        let x = self.mlp[0].forward(tape, vars, x)?;
        let x = tape.relu(x);
        self.mlp[1].forward(tape, vars, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Sum,
    Mean,
}

impl Readout {
    pub const ALL: [Readout; 2] = [Readout::Sum, Readout::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Readout::Sum => "sum",
            Readout::Mean => "mean",
        }
    }
}

impl std::str::FromStr for Readout {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self> {
        Readout::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| GnnError::Config(format!("unknown readout `{s}`")))
    }
}

/// Per-member sum or mean of node rows, `[num graphs × d]`. Empty members
/// give zero rows.
pub fn readout(tape: &mut Tape, g: &MessageGraph, h: Var, kind: Readout) -> Result<Var> {
    let rows = tape.value(h).shape().first().copied().unwrap_or(0);
    if rows != g.num_nodes() {
        return Err(GnnError::Width {
            layer: "readout".into(),
            expected: vec![g.num_nodes()],
            found: vec![rows],
        });
    }
    let sum = tape.scatter_add_rows(h, g.graph_ids(), g.num_graphs())?;
    match kind {
        Readout::Sum => Ok(sum),
        Readout::Mean => {
            let empty = g.graph_sizes().iter().filter(|&&n| n == 0).count();
            if empty > 0 {
                log::warn!("mean readout over {empty} empty graph(s) gives zero rows");
            }
            let inv: Vec<f32> = g
                .graph_sizes()
                .iter()
                .map(|&n| if n == 0 { 0.0 } else { 1.0 / n as f32 })
                .collect();
            Ok(tape.scale_rows(sum, &inv)?)
        }
    }
}
