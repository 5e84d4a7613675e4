//! Abstract transformers of statements over a template domain.

use crate::arith::{dot, ExtRational, Matrix, Rational};
use crate::domain::{AbstractValue, Template};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpProblem, LpResult};
use crate::program::Statement;
use crate::smt::{encode_query, strategy_from_model, SatResult, SmtBackend};
use crate::transform::{apply_strategy, normalize_sequential, SequentialNormalForm};

/// Row `j` of the transformer of `G y <= g; x := M y + c` at `d`:
/// `sup { T_j (M y + c) | T y <= d, G y <= g }`.
pub fn sequential_row_value(
    nf: &SequentialNormalForm,
    d: &AbstractValue,
    tpl: &Template,
    j: usize,
) -> Result<ExtRational> {
    if d.has_neg_inf() {
        return Ok(ExtRational::NegInf);
    }
    let n = tpl.num_vars();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut b = Vec::new();
    for (i, bound) in d.0.iter().enumerate() {
        if let ExtRational::Fin(q) = bound {
            rows.push(tpl.row(i).to_vec());
            b.push(q.clone());
        }
    }
    for (i, row) in nf.g.row_iter().enumerate() {
        rows.push(row.to_vec());
        b.push(nf.g_bound[i].clone());
    }
    let tj = Matrix::from_rows(n, vec![tpl.row(j).to_vec()])?;
    let objective = tj.mul(&nf.m)?.row(0).to_vec();
    let offset = dot(tpl.row(j), &nf.c);
    let lp = LpProblem::new(Matrix::from_rows(n, rows)?, b, objective)?;
    Ok(match lp_solve(&lp)? {
        LpResult::Infeasible => ExtRational::NegInf,
        LpResult::Unbounded { .. } => ExtRational::PosInf,
        LpResult::Optimal { value, .. } => ExtRational::Fin(value + offset),
    })
}

/// All rows of the transformer of a sequential statement.
pub fn sequential_transformer(s: &Statement, d: &AbstractValue, tpl: &Template) -> Result<AbstractValue> {
    let nf = normalize_sequential(s)?;
    (0..tpl.len())
        .map(|j| sequential_row_value(&nf, d, tpl, j))
        .collect::<Result<Vec<_>>>()
        .map(AbstractValue)
}

/// Row `j` of the best abstract transformer of `s` at `d`, found by asking
/// the solver for ever better paths until none exists.
pub fn abstract_post_row(
    s: &Statement,
    d: &AbstractValue,
    tpl: &Template,
    j: usize,
    backend: &mut dyn SmtBackend,
) -> Result<ExtRational> {
    let mut best = ExtRational::NegInf;
    loop {
        let (f, ctx) = encode_query(s, d, j, &best, tpl)?;
        match backend.check(&f)? {
            SatResult::Unsat => return Ok(best),
            SatResult::Sat(m) => {
                let path = apply_strategy(s, &strategy_from_model(s, &ctx, &m))?;
                let value = sequential_row_value(&normalize_sequential(&path)?, d, tpl, j)?;
                if value <= best {
                    return Err(Error::Internal(format!(
                        "witness path value {value} does not exceed {best}"
                    )));
                }
                if value.is_pos_inf() {
                    return Ok(value);
                }
                best = value;
            }
        }
    }
}

/// The best abstract transformer `[[s]]#(d)` computed with SMT queries.
pub fn abstract_post(
    s: &Statement,
    d: &AbstractValue,
    tpl: &Template,
    backend: &mut dyn SmtBackend,
) -> Result<AbstractValue> {
    (0..tpl.len())
        .map(|j| abstract_post_row(s, d, tpl, j, backend))
        .collect::<Result<Vec<_>>>()
        .map(AbstractValue)
}
