//! Central finite-difference oracle. Evaluates only forward values, so it is
//! independent of every backward rule it checks.
//!
//! The checked function may return any shape; the oracle projects it onto a
//! scalar with fixed random weights. The projection and the differences are
//! taken in f64 and divided by the step actually representable in f32, which
//! keeps the oracle's own rounding well under the tolerances.

use graphrx::tensor::{ParamSet, Tape, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f32 = 1e-3;
pub const REL_TOL: f32 = 1e-2;
pub const ABS_TOL: f32 = 1e-4;

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], lo: f32, hi: f32) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(
        shape.to_vec(),
        (0..n).map(|_| rng.gen_range(lo..hi)).collect(),
    )
    .unwrap()
}

/// Compares analytic gradients of `f(inputs)` (projected to a scalar) with
/// central differences. Mismatch descriptions are returned as the error.
pub fn check<F>(inputs: &[Tensor], f: F) -> Result<(), String>
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars);
    let shape = tape.value(out).shape().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ shape.iter().product::<usize>() as u64);
    let weights = random_tensor(&mut rng, &shape, -1.0, 1.0);
    let w = tape.constant(weights.clone());
    let prod = tape.mul(out, w).map_err(|e| e.to_string())?;
    let loss = tape.sum(prod, None).map_err(|e| e.to_string())?;
    tape.backward(loss, &mut ParamSet::new())
        .map_err(|e| e.to_string())?;

    let eval = |perturbed: &[Tensor]| -> Vec<f32> {
        let mut t = Tape::new();
        let vs: Vec<Var> = perturbed.iter().map(|x| t.constant(x.clone())).collect();
        let out = f(&mut t, &vs);
        t.value(out).data().to_vec()
    };
    for (k, input) in inputs.iter().enumerate() {
        let analytic = tape
            .grad(vars[k])
            .cloned()
            .unwrap_or_else(|| Tensor::zeros_like(input));
        let mut numeric_all = Vec::with_capacity(input.numel());
        for p in 0..input.numel() {
            let x = input.data()[p];
            let (hi, lo) = (x + STEP, x - STEP);
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[p] = hi;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[p] = lo;
            let diff: f64 = eval(&plus)
                .iter()
                .zip(eval(&minus))
                .zip(weights.data())
                .map(|((&a, b), &w)| (a as f64 - b as f64) * w as f64)
                .sum();
            numeric_all.push((diff / (hi as f64 - lo as f64)) as f32);
        }
        let scale = analytic
            .data()
            .iter()
            .chain(&numeric_all)
            .fold(0.0f32, |m, v| m.max(v.abs()));
        for (p, (&a, &n)) in analytic.data().iter().zip(&numeric_all).enumerate() {
            if !close(a, n, scale) {
                return Err(format!(
                    "input {k} element {p}: analytic {a} vs numeric {n} (scale {scale})"
                ));
            }
        }
    }
    Ok(())
}

/// An element passes when its absolute error is within `ABS_TOL`, or its error
/// relative to the gradient's largest component is within `REL_TOL`.
pub fn close(a: f32, b: f32, scale: f32) -> bool {
    let err = (a - b).abs();
    err <= ABS_TOL || err <= REL_TOL * scale
}
