use crate::tensor::{Result, Tape, Tensor, TensorError, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `mean(max(0, γ − pos + neg))`
    Margin,
    /// `mean softplus(−pos) + mean softplus(neg)`
    Logistic,
    /// `softplus(−γ − pos) + Σ_j w_j softplus(γ + neg_j)` averaged over
    /// positives, with detached weights `w = softmax_j(α · neg_j)`.
    SelfAdversarial,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Margin => "margin",
            LossKind::Logistic => "logistic",
            LossKind::SelfAdversarial => "self_adversarial",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            LossKind::Margin,
            LossKind::Logistic,
            LossKind::SelfAdversarial,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown loss `{s}`"))
    }
}

/// Scalar loss from positive scores `[B]` and negative scores `[k × B]`.
pub fn kg_loss(
    tape: &mut Tape,
    kind: LossKind,
    pos: Var,
    neg: Var,
    margin: f32,
    temperature: f32,
) -> Result<Var> {
    let b = tape.value(pos).numel();
    let neg_shape = tape.value(neg).shape().to_vec();
    if neg_shape.len() != 2 || neg_shape[1] != b || neg_shape[0] == 0 {
        return Err(TensorError::Dimension {
            op: "kg_loss",
            lhs: vec![b],
            rhs: neg_shape,
        });
    }
    match kind {
        LossKind::Margin => {
            let gap = tape.sub(neg, pos)?;
            let gap = tape.add_scalar(gap, margin)?;
            let hinge = tape.relu(gap);
            tape.mean(hinge, None)
        }
        LossKind::Logistic => {
            let p = tape.neg(pos);
            let p = tape.softplus(p);
            let p = tape.mean(p, None)?;
            let n = tape.softplus(neg);
            let n = tape.mean(n, None)?;
            tape.add(p, n)
        }
        LossKind::SelfAdversarial => {
            let weights = softmax_columns(tape.value(neg), temperature);
            let w = tape.constant(weights);
            let p = tape.neg(pos);
            let p = tape.add_scalar(p, -margin)?;
            let p = tape.softplus(p);
            let n = tape.add_scalar(neg, margin)?;
            let n = tape.softplus(n);
            let n = tape.mul(n, w)?;
            let n = tape.sum(n, Some(0))?;
            let per = tape.add(p, n)?;
            tape.mean(per, None)
        }
    }
}

/// Softmax of `α · x` down each column of a `[k × B]` matrix.
fn softmax_columns(x: &Tensor, alpha: f32) -> Tensor {
    let (k, b) = (x.shape()[0], x.shape()[1]);
    let mut out = vec![0.0; k * b];
    for i in 0..b {
        let col: Vec<f32> = (0..k).map(|j| alpha * x.data()[j * b + i]).collect();
        let max = col.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let exps: Vec<f32> = col.iter().map(|v| (v - max).exp()).collect();
        let total: f32 = exps.iter().sum();
        for j in 0..k {
            out[j * b + i] = exps[j] / total;
        }
    }
    Tensor::new(vec![k, b], out).expect("sized")
}
