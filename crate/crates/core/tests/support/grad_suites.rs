//! Every gradient-check suite, shared by the unit-level tests and the
//! acceptance harness. Each suite returns how many instances it checked.

use graphrx::datasets::corpus_smiles;
use graphrx::gnn::{
    property_loss, Dataset, Epsilon, Layer, LayerKind, MessageGraph, ModelConfig, PropertyModel,
    Readout, TaskKind,
};
use graphrx::kg::{kg_loss, EmbeddingModel, LossKind, ModelKind};
use graphrx::tensor::{Tape, Tensor, Var};
use graphrx::Molecule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gradcheck::{check, random_tensor};
use super::kg::random_model;

pub const INSTANCES: usize = 20;

type OpCase = fn(&mut ChaCha8Rng) -> Result<(), String>;

pub type Suite = (String, Box<dyn Fn() -> Result<usize, String>>);

/// All suites: tensor operations, KG scores per model, KG losses, and the
/// property loss per layer and task.
pub fn all() -> Vec<Suite> {
    let mut suites: Vec<Suite> = Vec::new();
    let ops: [(&str, OpCase); 6] = [
        ("matmul", matmul),
        ("add/sub/mul", binary),
        ("unary", unary),
        ("reductions", reductions),
        ("indexing", indexing),
        ("composite", composite),
    ];
    for (name, case) in ops {
        suites.push((format!("op {name}"), Box::new(move || op_suite(name, case))));
    }
    for kind in ModelKind::ALL {
        suites.push((format!("kg score {kind}"), Box::new(move || kg_score(kind))));
    }
    for kind in [
        LossKind::Margin,
        LossKind::Logistic,
        LossKind::SelfAdversarial,
    ] {
        suites.push((
            format!("kg loss {}", kind.name()),
            Box::new(move || kg_loss_suite(kind)),
        ));
    }
    for layer in [LayerKind::Gcn, LayerKind::Gin] {
        for task in [TaskKind::Binary, TaskKind::Regression] {
            suites.push((
                format!("property {} {}", layer.name(), task.name()),
                Box::new(move || property(layer, task)),
            ));
        }
    }
    suites
}

/// Runs every suite whose name starts with `prefix`, panicking on the first error.
pub fn run(prefix: &str) {
    let mut matched = 0;
    for (name, suite) in all().into_iter().filter(|(n, _)| n.starts_with(prefix)) {
        let checked = suite().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(checked >= INSTANCES, "{name}: only {checked} instances");
        matched += 1;
    }
    assert!(matched > 0, "no suite matches {prefix}");
}

fn op_suite(name: &str, case: OpCase) -> Result<usize, String> {
    for seed in 0..INSTANCES as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 7919 + name.len() as u64);
        case(&mut rng).map_err(|e| format!("instance {seed}: {e}"))?;
    }
    Ok(INSTANCES)
}

/// Values bounded away from zero, for ops with a kink there.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let mut t = random_tensor(rng, shape, 0.05, 2.0);
    for v in t.data_mut() {
        if rng.gen_bool(0.5) {
            *v = -*v;
        }
    }
    t
}

fn dims(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    (
        rng.gen_range(1..=6),
        rng.gen_range(1..=6),
        rng.gen_range(1..=6),
    )
}

fn matmul(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (m, k, n) = dims(rng);
    let a = random_tensor(rng, &[m, k], -2.0, 2.0);
    let b = random_tensor(rng, &[k, n], -2.0, 2.0);
    check(&[a, b], |t, v| t.matmul(v[0], v[1]).unwrap())
}

fn binary(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (m, n, _) = dims(rng);
    let a = random_tensor(rng, &[m, n], -2.0, 2.0);
    let same = random_tensor(rng, &[m, n], -2.0, 2.0);
    let row = random_tensor(rng, &[n], -2.0, 2.0);
    let scalar = random_tensor(rng, &[], -2.0, 2.0);
    for op in 0..3 {
        for other in [&same, &row, &scalar] {
            for swap in [false, true] {
                let inputs = if swap {
                    vec![other.clone(), a.clone()]
                } else {
                    vec![a.clone(), other.clone()]
                };
                check(&inputs, |t, v| {
                    match op {
                        0 => t.add(v[0], v[1]),
                        1 => t.sub(v[0], v[1]),
                        _ => t.mul(v[0], v[1]),
                    }
                    .unwrap()
                })?;
            }
        }
    }
    Ok(())
}

fn unary(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (m, n, _) = dims(rng);
    let kinked = away_from_zero(rng, &[m, n]);
    let smooth = random_tensor(rng, &[m, n], -2.0, 2.0);
    let positive = random_tensor(rng, &[m, n], 0.2, 2.0);
    check(std::slice::from_ref(&kinked), |t, v| t.relu(v[0]))?;
    check(&[kinked], |t, v| t.abs(v[0]))?;
    check(std::slice::from_ref(&smooth), |t, v| t.sigmoid(v[0]))?;
    check(std::slice::from_ref(&smooth), |t, v| t.exp(v[0]))?;
    check(std::slice::from_ref(&smooth), |t, v| t.softplus(v[0]))?;
    check(std::slice::from_ref(&smooth), |t, v| t.sin(v[0]))?;
    check(std::slice::from_ref(&smooth), |t, v| t.cos(v[0]))?;
    check(&[smooth], |t, v| t.scale(v[0], -1.7))?;
    check(std::slice::from_ref(&positive), |t, v| t.log(v[0]).unwrap())?;
    check(&[positive], |t, v| t.sqrt(v[0]).unwrap())
}

fn well_separated_max(t: &Tensor) -> bool {
    let mut v = t.data().to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.windows(2).all(|w| (w[0] - w[1]).abs() > 0.01)
}

fn reductions(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (m, n, _) = dims(rng);
    let mut x = random_tensor(rng, &[m, n], -2.0, 2.0);
    while !well_separated_max(&x) {
        x = random_tensor(rng, &[m, n], -2.0, 2.0);
    }
    for axis in [None, Some(0), Some(1)] {
        for op in 0..3 {
            check(&[x.clone()], |t, v| {
                match op {
                    0 => t.sum(v[0], axis),
                    1 => t.mean(v[0], axis),
                    _ => t.max(v[0], axis),
                }
                .unwrap()
            })?;
        }
    }
    Ok(())
}

fn indexing(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (n, d, m) = dims(rng);
    let x = random_tensor(rng, &[n, d], -2.0, 2.0);
    let idx: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
    let cols: Vec<usize> = (0..m).map(|_| rng.gen_range(0..d)).collect();
    let weights: Vec<f32> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let src = random_tensor(rng, &[m, d], -2.0, 2.0);
    check(std::slice::from_ref(&x), |t, v| {
        t.gather_rows(v[0], &idx).unwrap()
    })?;
    check(&[src], |t, v| t.scatter_add_rows(v[0], &idx, n).unwrap())?;
    check(std::slice::from_ref(&x), |t, v| {
        t.select_cols(v[0], &cols).unwrap()
    })?;
    check(std::slice::from_ref(&x), |t, v| {
        t.scale_rows(v[0], &weights).unwrap()
    })?;
    check(&[x], |t, v| t.reshape(v[0], &[n * d]).unwrap())
}

/// Message-passing shaped composite: swish(scatter(gather(X W) * w) + b), then mean.
fn composite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (n, d, h) = dims(rng);
    let x = random_tensor(rng, &[n, d], -2.0, 2.0);
    let w = random_tensor(rng, &[d, h], -1.0, 1.0);
    let b = random_tensor(rng, &[h], -1.0, 1.0);
    let e = rng.gen_range(1..=8);
    let src: Vec<usize> = (0..e).map(|_| rng.gen_range(0..n)).collect();
    let dst: Vec<usize> = (0..e).map(|_| rng.gen_range(0..n)).collect();
    let coef: Vec<f32> = (0..e).map(|_| rng.gen_range(0.1..1.0)).collect();
    check(&[x, w, b], |t, v| {
        let xw = t.matmul(v[0], v[1]).unwrap();
        let msg = t.gather_rows(xw, &src).unwrap();
        let msg = t.scale_rows(msg, &coef).unwrap();
        let agg = t.scatter_add_rows(msg, &dst, n).unwrap();
        let z = t.add(agg, v[2]).unwrap();
        let s = t.sigmoid(z);
        let y = t.mul(s, z).unwrap();
        t.mean(y, Some(0)).unwrap()
    })
}

pub fn small_batch(
    rng: &mut ChaCha8Rng,
    ne: usize,
    nr: usize,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let b = rng.gen_range(1..=5);
    let pick =
        |rng: &mut ChaCha8Rng, n: usize| (0..b).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>();
    (pick(rng, ne), pick(rng, nr), pick(rng, ne))
}

/// TransE residuals and RotatE distances stay clear of the kinks of |x| and
/// √x so that central differences do not straddle them.
fn smooth_at(model: &EmbeddingModel, h: &[usize], r: &[usize], t: &[usize]) -> bool {
    match model.kind {
        // With h = t the TransE score does not depend on the entity table.
        ModelKind::TransE => {
            let (e, w) = (model.entity_table(), model.relation_table());
            h.iter().zip(r).zip(t).all(|((&h, &r), &t)| {
                h != t
                    && (0..model.dim)
                        .all(|j| (e.row(h)[j] + w.row(r)[j] - e.row(t)[j]).abs() > 0.01)
            })
        }
        ModelKind::RotatE => model.score(h, r, t).unwrap().iter().all(|s| s.abs() > 0.05),
        _ => true,
    }
}

fn kg_score(kind: ModelKind) -> Result<usize, String> {
    let mut done = 0;
    let mut seed = 0;
    while done < INSTANCES {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + kind as u64);
        let (ne, nr, dim) = (
            rng.gen_range(2..=5),
            rng.gen_range(1..=3),
            rng.gen_range(1..=4),
        );
        let model = random_model(&mut rng, kind, dim, ne, nr, false);
        let (h, r, t) = small_batch(&mut rng, ne, nr);
        if !smooth_at(&model, &h, &r, &t) {
            continue;
        }
        let inputs = [model.entity_table().clone(), model.relation_table().clone()];
        check(&inputs, |tape, v| {
            model.score_with(tape, v[0], v[1], &h, &r, &t).unwrap()
        })
        .map_err(|e| format!("seed {seed}: {e}"))?;
        done += 1;
    }
    Ok(done)
}

fn kg_loss_suite(kind: LossKind) -> Result<usize, String> {
    for seed in 0..INSTANCES as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let (b, k) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let pos = random_tensor(&mut rng, &[b], -2.0, 2.0);
        let mut neg = random_tensor(&mut rng, &[k, b], -2.0, 2.0);
        if kind == LossKind::Margin {
            // Keep every hinge argument away from zero.
            for j in 0..k {
                for i in 0..b {
                    let x = &mut neg.data_mut()[j * b + i];
                    while (1.0 - pos.data()[i] + *x).abs() < 0.05 {
                        *x += 0.1;
                    }
                }
            }
        }
        // Self-adversarial weights are detached, so only constant weights
        // (α = 0) agree with differences through the softmax.
        check(&[pos, neg], |tape, v| {
            kg_loss(tape, kind, v[0], v[1], 1.0, 0.0).unwrap()
        })
        .map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(INSTANCES)
}

fn small_corpus_pair(rng: &mut ChaCha8Rng) -> Vec<Molecule> {
    let small: Vec<&str> = corpus_smiles()
        .into_iter()
        .filter(|s| Molecule::from_smiles(s).unwrap().num_atoms() <= 12)
        .collect();
    (0..2)
        .map(|_| Molecule::from_smiles(small[rng.gen_range(0..small.len())]).unwrap())
        .collect()
}

/// Smallest |input| over every relu in the model's forward pass. Finite
/// differences are only meaningful away from the kinks.
fn relu_margin(model: &PropertyModel, g: &MessageGraph, x: &Tensor) -> f32 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = model
        .params
        .iter()
        .map(|(_, p)| tape.constant(p.value.clone()))
        .collect();
    let mut h = tape.constant(x.clone());
    let mut margin = f32::INFINITY;
    let mut observe = |t: &Tensor| margin = t.data().iter().fold(margin, |m, v| m.min(v.abs()));
    for layer in model.layers() {
        if let Layer::Gin(gin) = layer {
            let eps = match gin.epsilon {
                Epsilon::Fixed(e) => e,
                Epsilon::Learned(id) => model.params.value(id).item().unwrap(),
            };
            let own = tape.scale(h, 1.0 + eps);
            let msg = tape.gather_rows(h, g.sources()).unwrap();
            let agg = tape
                .scatter_add_rows(msg, g.targets(), g.num_nodes())
                .unwrap();
            let sum = tape.add(own, agg).unwrap();
            let pre = gin.mlp[0].forward(&mut tape, &vars, sum).unwrap();
            observe(tape.value(pre));
        }
        let out = layer.forward(&mut tape, &vars, g, h).unwrap();
        observe(tape.value(out));
        h = tape.relu(out);
    }
    margin
}

fn property(kind: LayerKind, task: TaskKind) -> Result<usize, String> {
    let mut checked = 0;
    for seed in 0..200u64 {
        if checked == INSTANCES {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100 * kind as u64);
        let labels = match task {
            TaskKind::Binary => vec![0.0, 1.0],
            TaskKind::Regression => vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        };
        let data = Dataset::new(task, small_corpus_pair(&mut rng), labels).unwrap();
        let batch = data.batch(&[0, 1]);
        let config = ModelConfig {
            layer: kind,
            hidden: vec![4, 3],
            readout: if seed % 2 == 0 {
                Readout::Sum
            } else {
                Readout::Mean
            },
            task,
            learn_eps: true,
            ..ModelConfig::default()
        };
        let mut model = PropertyModel::new(config, &mut rng).unwrap();
        for (id, p) in model.params.clone().iter() {
            if p.name.ends_with(".eps") || p.name.ends_with(".bias") {
                model.params.get_mut(id).value =
                    random_tensor(&mut rng, p.value.shape(), -0.3, 0.3);
            }
        }
        if relu_margin(&model, &batch.graph, &batch.features) < 0.02 {
            continue;
        }
        checked += 1;
        let inputs: Vec<Tensor> = model.params.iter().map(|(_, p)| p.value.clone()).collect();
        check(&inputs, |tape, vars| {
            let x = tape.constant(batch.features.clone());
            let out = model.forward_with(tape, vars, &batch.graph, x).unwrap();
            property_loss(tape, task, out, &batch.labels).unwrap()
        })
        .map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(checked)
}
