use std::f32::consts::PI;

use rand::Rng;

use super::{KgError, Result};
use crate::tensor::{ParamId, ParamSet, Tape, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    TransE,
    DistMult,
    ComplEx,
    RotatE,
    SimplE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::TransE,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::RotatE,
        ModelKind::SimplE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::DistMult => "distmult",
            ModelKind::ComplEx => "complex",
            ModelKind::RotatE => "rotate",
            ModelKind::SimplE => "simple",
        }
    }

    /// Entity and relation table widths and the relation row count factor.
    fn layout(self, dim: usize) -> (usize, usize, usize) {
        match self {
            ModelKind::TransE | ModelKind::DistMult => (dim, dim, 1),
            ModelKind::ComplEx => (2 * dim, 2 * dim, 1),
            ModelKind::RotatE => (2 * dim, dim, 1),
            ModelKind::SimplE => (2 * dim, dim, 2),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| KgError::UnknownModel(s.to_string()))
    }
}

pub const ENTITY_PARAM: &str = "entity";
pub const RELATION_PARAM: &str = "relation";

/// Knowledge-graph embedding tables.
///
/// ComplEx and RotatE entities interleave real and imaginary parts
/// (`[re0, im0, re1, im1, ...]`). RotatE relations hold one phase per
/// complex dimension. SimplE entities are `[head half | tail half]` and its
/// relation table has `2|R|` rows, row `|R| + r` being the inverse of `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub kind: ModelKind,
    pub dim: usize,
    num_entities: usize,
    num_relations: usize,
    pub params: ParamSet,
    entity: ParamId,
    relation: ParamId,
}

impl EmbeddingModel {
    /// Entries uniform in `[-6/√d, 6/√d]`; RotatE phases uniform in `(-π, π]`.
    pub fn init(
        kind: ModelKind,
        dim: usize,
        num_entities: usize,
        num_relations: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let (de, dr, rf) = kind.layout(dim);
        let bound = 6.0 / (dim as f32).sqrt();
        let mut uniform = |rows: usize, cols: usize, lo: f32, hi: f32| {
            let data = (0..rows * cols)
                .map(|_| hi - rng.gen::<f32>() * (hi - lo))
                .collect();
            Tensor::new(vec![rows, cols], data).expect("sized")
        };
        let entity = uniform(num_entities, de, -bound, bound);
        let relation = match kind {
            ModelKind::RotatE => uniform(num_relations * rf, dr, -PI, PI),
            _ => uniform(num_relations * rf, dr, -bound, bound),
        };
        Self::from_tables(kind, dim, entity, relation).expect("shapes follow the layout")
    }

    pub fn from_tables(
        kind: ModelKind,
        dim: usize,
        entity: Tensor,
        relation: Tensor,
    ) -> Result<Self> {
        let (de, dr, rf) = kind.layout(dim);
        if entity.rank() != 2 || entity.shape()[1] != de {
            return Err(KgError::TableShape {
                table: ENTITY_PARAM,
                expected: format!("[_, {de}]"),
                found: entity.shape().to_vec(),
            });
        }
        if relation.rank() != 2
            || relation.shape()[1] != dr
            || !relation.shape()[0].is_multiple_of(rf)
        {
            return Err(KgError::TableShape {
                table: RELATION_PARAM,
                expected: format!("[{rf}·|R|, {dr}]"),
                found: relation.shape().to_vec(),
            });
        }
        let num_entities = entity.shape()[0];
        let num_relations = relation.shape()[0] / rf;
        let mut params = ParamSet::new();
        let entity = params.add(ENTITY_PARAM, entity);
        let relation = params.add(RELATION_PARAM, relation);
        Ok(Self {
            kind,
            dim,
            num_entities,
            num_relations,
            params,
            entity,
            relation,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn entity_table(&self) -> &Tensor {
        self.params.value(self.entity)
    }

    pub fn relation_table(&self) -> &Tensor {
        self.params.value(self.relation)
    }

    fn check(&self, h: &[usize], r: &[usize], t: &[usize]) -> Result<()> {
        if h.len() != r.len() || h.len() != t.len() {
            return Err(KgError::BatchLength);
        }
        for (&h, (&r, &t)) in h.iter().zip(r.iter().zip(t)) {
            if h >= self.num_entities || t >= self.num_entities || r >= self.num_relations {
                return Err(KgError::TripleOutOfRange { triple: (h, r, t) });
            }
        }
        Ok(())
    }

    fn inverse_rows(&self, r: &[usize]) -> Vec<usize> {
        r.iter().map(|&r| r + self.num_relations).collect()
    }

    /// Differentiable scores `[B]` on `tape`, reading the tables as parameters.
    pub fn score_on_tape(
        &self,
        tape: &mut Tape,
        h: &[usize],
        r: &[usize],
        t: &[usize],
    ) -> Result<Var> {
        let ent = tape.param(&self.params, self.entity);
        let rel = tape.param(&self.params, self.relation);
        self.score_with(tape, ent, rel, h, r, t)
    }

    /// Scores against caller-supplied table variables shaped like this
    /// model's tables.
    pub fn score_with(
        &self,
        tape: &mut Tape,
        ent: Var,
        rel: Var,
        h: &[usize],
        r: &[usize],
        t: &[usize],
    ) -> Result<Var> {
        self.check(h, r, t)?;
        let eh = tape.gather_rows(ent, h)?;
        let et = tape.gather_rows(ent, t)?;
        let wr = tape.gather_rows(rel, r)?;
        let wr_inv = match self.kind {
            ModelKind::SimplE => Some(tape.gather_rows(rel, &self.inverse_rows(r))?),
            _ => None,
        };
        Ok(score_rows(self.kind, self.dim, tape, eh, wr, wr_inv, et)?)
    }

    /// Scores without recording gradients.
    pub fn score(&self, h: &[usize], r: &[usize], t: &[usize]) -> Result<Vec<f32>> {
        self.check(h, r, t)?;
        let mut tape = Tape::new();
        let ent = self.entity_table();
        let rel = self.relation_table();
        let eh = tape.constant(ent.gather_rows(h)?);
        let et = tape.constant(ent.gather_rows(t)?);
        let wr = tape.constant(rel.gather_rows(r)?);
        let wr_inv = match self.kind {
            ModelKind::SimplE => Some(tape.constant(rel.gather_rows(&self.inverse_rows(r))?)),
            _ => None,
        };
        let s = score_rows(self.kind, self.dim, &mut tape, eh, wr, wr_inv, et)?;
        Ok(tape.value(s).data().to_vec())
    }

    /// Scores of `(h, r, e)` for every entity `e`.
    pub fn score_tails(&self, h: usize, r: usize) -> Result<Vec<f32>> {
        let n = self.num_entities;
        self.score(&vec![h; n], &vec![r; n], &(0..n).collect::<Vec<_>>())
    }

    /// Scores of `(e, r, t)` for every entity `e`.
    pub fn score_heads(&self, r: usize, t: usize) -> Result<Vec<f32>> {
        let n = self.num_entities;
        self.score(&(0..n).collect::<Vec<_>>(), &vec![r; n], &vec![t; n])
    }

    /// Post-step projection: unit-norm TransE entities, wrapped RotatE phases.
    pub fn project(&mut self) {
        match self.kind {
            ModelKind::TransE => {
                let table = &mut self.params.get_mut(self.entity).value;
                let width = table.shape()[1];
                for row in table.data_mut().chunks_mut(width) {
                    let norm = row.iter().map(|x| x * x).sum::<f32>().sqrt();
                    if norm > 0.0 {
                        row.iter_mut().for_each(|x| *x /= norm);
                    }
                }
            }
            ModelKind::RotatE => {
                for x in self.params.get_mut(self.relation).value.data_mut() {
                    *x = wrap_phase(*x);
                }
            }
            _ => {}
        }
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(x: f32) -> f32 {
    if x > -PI && x <= PI {
        return x;
    }
    let w = (x + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        PI
    } else {
        w
    }
}

fn evens_odds(width: usize) -> (Vec<usize>, Vec<usize>) {
    (
        (0..width).step_by(2).collect(),
        (1..width).step_by(2).collect(),
    )
}

/// Scores gathered rows: `eh`, `et` are entity rows, `wr` relation rows and
/// `wr_inv` the SimplE inverse relation rows.
fn score_rows(
    kind: ModelKind,
    dim: usize,
    tape: &mut Tape,
    eh: Var,
    wr: Var,
    wr_inv: Option<Var>,
    et: Var,
) -> crate::tensor::Result<Var> {
    let row_sum = |tape: &mut Tape, x: Var| tape.sum(x, Some(1));
    match kind {
        ModelKind::TransE => {
            let x = tape.add(eh, wr)?;
            let x = tape.sub(x, et)?;
            let x = tape.abs(x);
            let s = row_sum(tape, x)?;
            Ok(tape.neg(s))
        }
        ModelKind::DistMult => {
            let x = tape.mul(eh, wr)?;
            let x = tape.mul(x, et)?;
            row_sum(tape, x)
        }
        ModelKind::ComplEx => {
            let (re, im) = evens_odds(2 * dim);
            let hr = tape.select_cols(eh, &re)?;
            let hi = tape.select_cols(eh, &im)?;
            let rr = tape.select_cols(wr, &re)?;
            let ri = tape.select_cols(wr, &im)?;
            let tr = tape.select_cols(et, &re)?;
            let ti = tape.select_cols(et, &im)?;
            // Re(h · r · conj(t)) = rr(hr tr + hi ti) + ri(hr ti − hi tr)
            let a = tape.mul(hr, tr)?;
            let b = tape.mul(hi, ti)?;
            let real_part = tape.add(a, b)?;
            let c = tape.mul(hr, ti)?;
            let d = tape.mul(hi, tr)?;
            let imag_part = tape.sub(c, d)?;
            let x = tape.mul(rr, real_part)?;
            let y = tape.mul(ri, imag_part)?;
            let z = tape.add(x, y)?;
            row_sum(tape, z)
        }
        ModelKind::RotatE => {
            let (re, im) = evens_odds(2 * dim);
            let hr = tape.select_cols(eh, &re)?;
            let hi = tape.select_cols(eh, &im)?;
            let tr = tape.select_cols(et, &re)?;
            let ti = tape.select_cols(et, &im)?;
            let c = tape.cos(wr);
            let s = tape.sin(wr);
            let a = tape.mul(hr, c)?;
            let b = tape.mul(hi, s)?;
            let rot_re = tape.sub(a, b)?;
            let a = tape.mul(hr, s)?;
            let b = tape.mul(hi, c)?;
            let rot_im = tape.add(a, b)?;
            let dre = tape.sub(rot_re, tr)?;
            let dim_ = tape.sub(rot_im, ti)?;
            let dre2 = tape.mul(dre, dre)?;
            let dim2 = tape.mul(dim_, dim_)?;
            let sq = tape.add(dre2, dim2)?;
            let sq = row_sum(tape, sq)?;
            let norm = tape.sqrt(sq)?;
            Ok(tape.neg(norm))
        }
        ModelKind::SimplE => {
            let wr_inv = wr_inv.expect("inverse rows gathered for SimplE");
            let head: Vec<usize> = (0..dim).collect();
            let tail: Vec<usize> = (dim..2 * dim).collect();
            let h_head = tape.select_cols(eh, &head)?;
            let h_tail = tape.select_cols(eh, &tail)?;
            let t_head = tape.select_cols(et, &head)?;
            let t_tail = tape.select_cols(et, &tail)?;
            let x = tape.mul(h_head, wr)?;
            let x = tape.mul(x, t_tail)?;
            let y = tape.mul(t_head, wr_inv)?;
            let y = tape.mul(y, h_tail)?;
            let z = tape.add(x, y)?;
            let s = row_sum(tape, z)?;
            Ok(tape.scale(s, 0.5))
        }
    }
}
