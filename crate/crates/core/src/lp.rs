//! Exact rational linear programming.
//!
//! Solves `sup { cᵀx | A x <= b }` over free variables `x` with a dense
//! two-phase tableau simplex and Bland's anti-cycling rule. Free variables
//! are pivoted into the basis first and never leave it, so the remaining
//! iterations run over slack variables only.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{dot, format_rational, ExtRational, Matrix, Rational};
use crate::error::{Error, Result};

/// `maximize cᵀx subject to A x <= b`, `x` free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub a: Matrix,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Infeasible,
    /// `point` is feasible; `ray` satisfies `A·ray <= 0` and `cᵀray > 0`.
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
    /// `x` attains `value`; `dual` is a multiplier vector `y >= 0` with
    /// `yᵀA = cᵀ` and `yᵀb = value`.
    Optimal {
        x: Vec<Rational>,
        value: Rational,
        dual: Vec<Rational>,
    },
}

impl LpResult {
    pub fn value(&self) -> ExtRational {
        match self {
            LpResult::Infeasible => ExtRational::NegInf,
            LpResult::Unbounded { .. } => ExtRational::PosInf,
            LpResult::Optimal { value, .. } => ExtRational::Fin(value.clone()),
        }
    }
}

impl LpProblem {
    pub fn new(a: Matrix, b: Vec<Rational>, c: Vec<Rational>) -> Result<Self> {
        let p = LpProblem { a, b, c };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.a.rows() != self.b.len() || self.a.cols() != self.c.len() {
            return Err(Error::Dimension(format!(
                "LP with {}x{} matrix, {} bounds and {} objective coefficients",
                self.a.rows(),
                self.a.cols(),
                self.b.len(),
                self.c.len()
            )));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.rows()
    }

    /// Checks `A x <= b` exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars() && self.a.row_iter().zip(&self.b).all(|(r, b)| dot(r, x) <= *b)
    }

    /// Checks a dual certificate: `y >= 0`, `yᵀA = cᵀ`, `yᵀb = value`.
    pub fn is_dual_certificate(&self, y: &[Rational], value: &Rational) -> bool {
        if y.len() != self.num_constraints() || y.iter().any(Signed::is_negative) {
            return false;
        }
        let cols_ok = (0..self.num_vars()).all(|j| {
            let s: Rational = (0..self.num_constraints())
                .filter(|&i| !y[i].is_zero())
                .map(|i| &y[i] * self.a.get(i, j))
                .sum();
            s == self.c[j]
        });
        cols_ok && dot(y, &self.b) == *value
    }

    /// Plain-text dump in a "maximize / subject to" layout.
    pub fn to_text(&self, var_names: Option<&[String]>) -> String {
        let name = |j: usize| match var_names {
            Some(names) if j < names.len() => names[j].clone(),
            _ => format!("v{j}"),
        };
        let form = |coeffs: &[Rational]| {
            let mut s = String::new();
            for (j, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if s.is_empty() {
                    if c.is_negative() {
                        s.push_str("- ");
                    }
                } else {
                    s.push_str(if c.is_negative() { " - " } else { " + " });
                }
                let mag = c.abs();
                if !mag.is_one() {
                    s.push_str(&format_rational(&mag));
                    s.push(' ');
                }
                s.push_str(&name(j));
            }
            if s.is_empty() {
                s.push('0');
            }
            s
        };
        let mut out = format!("maximize\n  {}\nsubject to\n", form(&self.c));
        for (i, row) in self.a.row_iter().enumerate() {
            out.push_str(&format!("  c{i}: {} <= {}\n", form(row), format_rational(&self.b[i])));
        }
        out.push_str("free\n");
        for j in 0..self.num_vars() {
            out.push_str(&format!("  {}\n", name(j)));
        }
        out.push_str("end\n");
        out
    }
}

impl fmt::Display for LpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(None))
    }
}

/// Solves the LP exactly.
pub fn lp_solve(p: &LpProblem) -> Result<LpResult> {
    p.check()?;
    Simplex::build(p).map_or(Ok(LpResult::Infeasible), |s| Ok(s.run(p)))
}

/// Supremum of each target coordinate over the feasible region.
pub fn lp_sup_each(p: &LpProblem, targets: &[usize]) -> Result<Vec<ExtRational>> {
    p.check()?;
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if t >= p.num_vars() {
            return Err(Error::Dimension(format!("target {t} out of {} variables", p.num_vars())));
        }
        let mut c = vec![Rational::zero(); p.num_vars()];
        c[t] = Rational::one();
        let q = LpProblem {
            a: p.a.clone(),
            b: p.b.clone(),
            c,
        };
        out.push(lp_solve(&q)?.value());
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ColKind {
    Free,
    Slack,
    Artificial,
}

struct Simplex {
    /// Tableau rows over all columns.
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Original constraint index of each slack column.
    slack_row: HashMap<usize, usize>,
    nvars: usize,
    nconstraints: usize,
}

enum Phase {
    Optimal,
    Unbounded(usize),
    FreeUnbounded(usize),
}

impl Simplex {
    /// Builds the initial tableau; returns `None` when a constant row is
    /// violated (0 <= negative).
    fn build(p: &LpProblem) -> Option<Simplex> {
        let q = p.num_vars();
        let mut kept: Vec<usize> = Vec::new();
        let mut seen: HashMap<(Vec<Rational>, Rational), usize> = HashMap::new();
        for i in 0..p.num_constraints() {
            let row = p.a.row(i);
            if row.iter().all(Zero::is_zero) {
                if p.b[i].is_negative() {
                    return None;
                }
                continue;
            }
            let key = (row.to_vec(), p.b[i].clone());
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, i);
            kept.push(i);
        }
        let r = kept.len();
        let ncols = q + r;
        let mut rows = Vec::with_capacity(r);
        let mut rhs = Vec::with_capacity(r);
        let mut basis = Vec::with_capacity(r);
        let mut slack_row = HashMap::new();
        for (k, &i) in kept.iter().enumerate() {
            let mut row = vec![Rational::zero(); ncols];
            row[..q].clone_from_slice(p.a.row(i));
            row[q + k] = Rational::one();
            rows.push(row);
            rhs.push(p.b[i].clone());
            basis.push(q + k);
            slack_row.insert(q + k, i);
        }
        let mut kinds = vec![ColKind::Free; q];
        kinds.extend(std::iter::repeat_n(ColKind::Slack, r));
        Some(Simplex {
            rows,
            rhs,
            basis,
            kinds,
            slack_row,
            nvars: q,
            nconstraints: p.num_constraints(),
        })
    }

    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn is_free_row(&self, i: usize) -> bool {
        self.kinds[self.basis[i]] == ColKind::Free
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational], obj_val: &mut Rational) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<(usize, Rational)> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (k, v.clone()))
            .collect();
        let prow_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (k, v) in &nz {
                row[*k] -= &f * v;
            }
            if !prow_rhs.is_zero() {
                self.rhs[i] -= &f * &prow_rhs;
            }
        }
        let f = obj[c].clone();
        if !f.is_zero() {
            for (k, v) in &nz {
                obj[*k] -= &f * v;
            }
            *obj_val += &f * &prow_rhs;
        }
        self.basis[r] = c;
    }

    /// Reduced profits `c_j - c_B B^-1 A_j` and the current objective value.
    fn reduced(&self, costs: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut d = costs.to_vec();
        let mut val = Rational::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    d[k] -= cb * v;
                }
            }
            val += cb * &self.rhs[i];
        }
        (d, val)
    }

    fn iterate(
        &mut self,
        obj: &mut [Rational],
        obj_val: &mut Rational,
        allow_artificial: bool,
    ) -> Phase {
        let mut is_basic = vec![false; self.ncols()];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        loop {
            for j in 0..self.ncols() {
                if self.kinds[j] == ColKind::Free && !is_basic[j] && !obj[j].is_zero() {
                    return Phase::FreeUnbounded(j);
                }
            }
            // Bland: lowest-index improving column.
            let entering = (0..self.ncols()).find(|&j| {
                !is_basic[j]
                    && self.kinds[j] != ColKind::Free
                    && (allow_artificial || self.kinds[j] != ColKind::Artificial)
                    && obj[j].is_positive()
            });
            let Some(c) = entering else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.is_free_row(i) {
                    continue;
                }
                let t = &self.rows[i][c];
                if !t.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / t;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Phase::Unbounded(c);
            };
            is_basic[self.basis[r]] = false;
            is_basic[c] = true;
            self.pivot(r, c, obj, obj_val);
        }
    }

    fn primal_point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.nvars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.nvars {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    fn ray(&self, col: usize, sign: &Rational) -> Vec<Rational> {
        let mut ray = vec![Rational::zero(); self.nvars];
        if col < self.nvars {
            ray[col] = sign.clone();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.nvars {
                ray[b] = -(&self.rows[i][col] * sign);
            }
        }
        ray
    }

    fn run(mut self, p: &LpProblem) -> LpResult {
        let q = self.nvars;
        let mut scratch_obj = vec![Rational::zero(); self.ncols()];
        let mut scratch_val = Rational::zero();

        // Pivot free variables into the basis; they never leave.
        for j in 0..q {
            let row = (0..self.rows.len()).find(|&i| !self.is_free_row(i) && !self.rows[i][j].is_zero());
            if let Some(r) = row {
                self.pivot(r, j, &mut scratch_obj, &mut scratch_val);
            }
        }

        // Phase 1: artificial variables for rows with negative right-hand side.
        let mut any_art = false;
        for i in 0..self.rows.len() {
            if self.is_free_row(i) || !self.rhs[i].is_negative() {
                continue;
            }
            for v in self.rows[i].iter_mut() {
                if !v.is_zero() {
                    *v = -v.clone();
                }
            }
            self.rhs[i] = -self.rhs[i].clone();
            let col = self.kinds.len();
            self.kinds.push(ColKind::Artificial);
            for (k, row) in self.rows.iter_mut().enumerate() {
                row.push(if k == i { Rational::one() } else { Rational::zero() });
            }
            self.basis[i] = col;
            any_art = true;
        }
        if any_art {
            let costs: Vec<Rational> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { -Rational::one() } else { Rational::zero() })
                .collect();
            let (mut d, mut val) = self.reduced(&costs);
            // Artificial columns never become unbounded: the phase 1 objective
            // is bounded above by zero.
            let _ = self.iterate(&mut d, &mut val, true);
            if val.is_negative() {
                return LpResult::Infeasible;
            }
            // Drive remaining artificials out of the basis.
            for i in 0..self.rows.len() {
                if self.kinds[self.basis[i]] != ColKind::Artificial {
                    continue;
                }
                let col = (0..self.ncols())
                    .find(|&k| self.kinds[k] == ColKind::Slack && !self.rows[i][k].is_zero());
                if let Some(k) = col {
                    self.pivot(i, k, &mut d, &mut val);
                }
            }
        }

        // Phase 2.
        let mut costs = vec![Rational::zero(); self.ncols()];
        costs[..q].clone_from_slice(&p.c);
        let (mut d, mut val) = self.reduced(&costs);
        match self.iterate(&mut d, &mut val, false) {
            Phase::Unbounded(c) => LpResult::Unbounded {
                point: self.primal_point(),
                ray: self.ray(c, &Rational::one()),
            },
            Phase::FreeUnbounded(c) => {
                let sign = if d[c].is_positive() { Rational::one() } else { -Rational::one() };
                LpResult::Unbounded {
                    point: self.primal_point(),
                    ray: self.ray(c, &sign),
                }
            }
            Phase::Optimal => {
                let mut dual = vec![Rational::zero(); self.nconstraints];
                for (&col, &orig) in &self.slack_row {
                    dual[orig] = -d[col].clone();
                }
                LpResult::Optimal {
                    x: self.primal_point(),
                    value: val,
                    dual,
                }
            }
        }
    }
}
