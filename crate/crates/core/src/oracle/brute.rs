//! Reference transformer: path expansion plus one LP per path and row.
//!
//! Each path is encoded by chaining a fresh state vector after every
//! assignment, independently of the normal-form folding used by the engine.

use num_traits::{One, Zero};

use crate::arith::{ExtRational, Matrix, Rational};
use crate::domain::{AbstractValue, Template};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpProblem, LpResult};
use crate::program::Statement;
use crate::transform::{sequential_paths, DEFAULT_PATH_LIMIT};

/// `[[s]]#(d)` as the join over all paths of `s` of the best transformer of
/// each path.
pub fn brute_force_transformer(s: &Statement, d: &AbstractValue, tpl: &Template) -> Result<AbstractValue> {
    brute_force_transformer_with_limit(s, d, tpl, DEFAULT_PATH_LIMIT)
}

pub fn brute_force_transformer_with_limit(
    s: &Statement,
    d: &AbstractValue,
    tpl: &Template,
    limit: u64,
) -> Result<AbstractValue> {
    if d.len() != tpl.len() {
        return Err(Error::Dimension(format!("{} bounds for {} rows", d.len(), tpl.len())));
    }
    let m = tpl.len();
    let paths = sequential_paths(s, limit)?;
    let mut out = AbstractValue::bottom(m);
    if d.has_neg_inf() {
        return Ok(out);
    }
    for path in &paths {
        let chain = Chain::build(path, d, tpl)?;
        for j in 0..m {
            let v = chain.maximize(tpl.row(j))?;
            if v > out.0[j] {
                out.0[j] = v;
            }
        }
    }
    Ok(out)
}

struct Chain {
    n: usize,
    cols: usize,
    rows: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    /// First column of the final state vector.
    last: usize,
}

impl Chain {
    fn build(path: &[Statement], d: &AbstractValue, tpl: &Template) -> Result<Chain> {
        let n = tpl.num_vars();
        let assigns = path.iter().filter(|s| matches!(s, Statement::Assign { .. })).count();
        let cols = n * (assigns + 1);
        let mut c = Chain {
            n,
            cols,
            rows: Vec::new(),
            b: Vec::new(),
            last: 0,
        };
        for (i, bound) in d.0.iter().enumerate() {
            if let ExtRational::Fin(q) = bound {
                c.push(0, tpl.row(i), None, q.clone());
            }
        }
        for s in path {
            match s {
                Statement::Guard { a, b } => {
                    for (i, row) in a.row_iter().enumerate() {
                        c.push(c.last, row, None, b[i].clone());
                    }
                }
                Statement::Assign { a, b } => {
                    let next = c.last + n;
                    // next_i - A_i cur = b_i, as two inequalities
                    for (i, row) in a.row_iter().enumerate() {
                        c.push(c.last, row, Some((next, i, true)), b[i].clone());
                        c.push(c.last, row, Some((next, i, false)), -b[i].clone());
                    }
                    c.last = next;
                }
                _ => return Err(Error::NotSequential),
            }
        }
        Ok(c)
    }

    /// Adds `coeffs · state(at) [± e_out] <= bound`. With `out = (col, i,
    /// positive)` the row becomes `± (state(col)_i - coeffs·state(at))`.
    fn push(&mut self, at: usize, coeffs: &[Rational], out: Option<(usize, usize, bool)>, bound: Rational) {
        let mut r = vec![Rational::zero(); self.cols];
        match out {
            None => r[at..at + self.n].clone_from_slice(coeffs),
            Some((col, i, positive)) => {
                let sign = if positive { Rational::one() } else { -Rational::one() };
                for (k, c) in coeffs.iter().enumerate() {
                    r[at + k] = -(c * &sign);
                }
                r[col + i] += &sign;
            }
        }
        self.rows.push(r);
        self.b.push(bound);
    }

    fn maximize(&self, row: &[Rational]) -> Result<ExtRational> {
        let mut obj = vec![Rational::zero(); self.cols];
        obj[self.last..self.last + self.n].clone_from_slice(row);
        let lp = LpProblem::new(Matrix::from_rows(self.cols, self.rows.clone())?, self.b.clone(), obj)?;
        Ok(match lp_solve(&lp)? {
            LpResult::Infeasible => ExtRational::NegInf,
            LpResult::Unbounded { .. } => ExtRational::PosInf,
            LpResult::Optimal { value, .. } => ExtRational::Fin(value),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ints};

    fn interval2() -> Template {
        let m = Matrix::from_ints(2, &[&[-1, 0], &[0, -1], &[1, 0], &[0, 1]]).unwrap();
        Template::from_matrix(m, &["x1".into(), "x2".into()]).unwrap()
    }

    fn v(items: &[Option<i64>]) -> AbstractValue {
        AbstractValue(
            items
                .iter()
                .map(|x| x.map_or(ExtRational::PosInf, ExtRational::from_int))
                .collect(),
        )
    }

    #[test]
    fn en_bloc_beats_composition() {
        let tpl = interval2();
        let s1 = Statement::assign_var(2, 1, &ints(&[1, 0]), int(0)).unwrap();
        let s2 = Statement::assign_var(2, 0, &ints(&[1, -1]), int(0)).unwrap();
        let s = Statement::seq(vec![s1.clone(), s2.clone()]).unwrap();
        let d = v(&[Some(0), None, Some(1), None]);
        assert_eq!(
            brute_force_transformer(&s, &d, &tpl).unwrap(),
            v(&[Some(0), Some(0), Some(0), Some(1)])
        );
        let mid = brute_force_transformer(&s1, &d, &tpl).unwrap();
        assert_eq!(
            brute_force_transformer(&s2, &mid, &tpl).unwrap(),
            v(&[Some(1), Some(0), Some(1), Some(1)])
        );
    }

    #[test]
    fn bottom_maps_to_bottom() {
        let tpl = interval2();
        let s = Statement::skip(2);
        assert_eq!(
            brute_force_transformer(&s, &AbstractValue::bottom(4), &tpl).unwrap(),
            AbstractValue::bottom(4)
        );
    }
}
