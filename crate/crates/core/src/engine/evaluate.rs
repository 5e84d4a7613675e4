//! Strategy evaluation: the greatest finite pre-solution of the system
//! selected by a strategy, computed by linear programming.
//!
//! Equations selecting a transfer are split into strongly connected
//! components of their dependency graph and solved in dependency order, one
//! LP per component. Coordinates that turn out unbounded are fixed at `+inf`
//! and the component is solved again without them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::arith::{dot, ExtRational, Matrix, Rational};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, lp_sup_each, LpProblem, LpResult};
use crate::transform::{apply_strategy, normalize_sequential, SequentialNormalForm};

use super::equations::{Atom, EquationSystem, SysStrategy, VarAssignment};

/// One LP issued during evaluation, kept for inspection.
#[derive(Clone, Debug)]
pub struct LpRecord {
    /// Equation variables occupying the first columns, in column order.
    pub vars: Vec<usize>,
    pub column_names: Vec<String>,
    pub problem: LpProblem,
    pub result: LpResult,
    /// Per-variable suprema, computed only when `result` is unbounded.
    pub suprema: Option<Vec<ExtRational>>,
}

impl LpRecord {
    /// Column index of the `k`-th coordinate of the `y` vector belonging to
    /// equation variable `var`.
    pub fn y_column(&self, var: usize, k: usize) -> Option<usize> {
        let pos = self.vars.iter().position(|&v| v == var)?;
        let n = (self.problem.num_vars() - self.vars.len()) / self.vars.len();
        Some(self.vars.len() + pos * n + k)
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub rho: VarAssignment,
    pub lps: Vec<LpRecord>,
    /// Variables fixed at `+inf` because their LP coordinate was unbounded.
    pub promoted: Vec<usize>,
}

struct Transfer {
    source: usize,
    row: usize,
    nf: SequentialNormalForm,
}

/// Computes the least solution above `rho` of the system fixed by `sigma`.
pub fn evaluate(es: &EquationSystem, sigma: &SysStrategy, rho: &VarAssignment) -> Result<Evaluation> {
    let nvars = es.num_vars();
    let mut value: Vec<Option<ExtRational>> = vec![None; nvars];
    let mut transfers: BTreeMap<usize, Transfer> = BTreeMap::new();
    for x in 0..nvars {
        let sel = &sigma.0[x];
        match &es.equations[x][sel.atom] {
            Atom::Const(q) => value[x] = Some(q.clone()),
            _ if rho.0[x].is_pos_inf() => value[x] = Some(ExtRational::PosInf),
            Atom::Transfer { source, edge, row } => {
                let path = apply_strategy(es.statement(*edge), &sel.path)?;
                transfers.insert(
                    x,
                    Transfer {
                        source: *source,
                        row: *row,
                        nf: normalize_sequential(&path)?,
                    },
                );
            }
        }
    }

    let deps: BTreeMap<usize, Vec<usize>> = transfers
        .iter()
        .map(|(&x, t)| (x, es.block(t.source).filter(|y| transfers.contains_key(y)).collect()))
        .collect();
    let mut lps = Vec::new();
    let mut promoted = Vec::new();
    for component in strongly_connected(&deps) {
        let mut open: Vec<usize> = component;
        loop {
            // A source with an empty bound makes the equation empty as well.
            let dead: Vec<usize> = open
                .iter()
                .copied()
                .filter(|x| {
                    es.block(transfers[x].source)
                        .any(|y| matches!(&value[y], Some(ExtRational::NegInf)))
                })
                .collect();
            if !dead.is_empty() {
                for x in &dead {
                    value[*x] = Some(ExtRational::NegInf);
                }
                open.retain(|x| !dead.contains(x));
                continue;
            }
            if open.is_empty() {
                break;
            }
            let (problem, names) = component_lp(es, &open, &transfers, &value)?;
            let result = lp_solve(&problem)?;
            let mut record = LpRecord {
                vars: open.clone(),
                column_names: names,
                problem,
                result: result.clone(),
                suprema: None,
            };
            match result {
                LpResult::Infeasible => {
                    lps.push(record);
                    return Err(Error::Internal(format!(
                        "evaluation LP infeasible for {}",
                        open.iter().map(|&x| es.var_label(x)).collect::<Vec<_>>().join(", ")
                    )));
                }
                LpResult::Optimal { x, .. } => {
                    for (k, &var) in open.iter().enumerate() {
                        value[var] = Some(ExtRational::Fin(x[k].clone()));
                    }
                    lps.push(record);
                    break;
                }
                LpResult::Unbounded { .. } => {
                    let targets: Vec<usize> = (0..open.len()).collect();
                    let sups = lp_sup_each(&record.problem, &targets)?;
                    let unbounded: Vec<usize> = open
                        .iter()
                        .zip(&sups)
                        .filter(|(_, s)| s.is_pos_inf())
                        .map(|(&x, _)| x)
                        .collect();
                    record.suprema = Some(sups);
                    lps.push(record);
                    if unbounded.is_empty() {
                        return Err(Error::Internal("unbounded LP without unbounded coordinate".into()));
                    }
                    for &x in &unbounded {
                        value[x] = Some(ExtRational::PosInf);
                        promoted.push(x);
                    }
                    open.retain(|x| !unbounded.contains(x));
                }
            }
        }
    }
    let rho = value
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::Internal("variable left unevaluated".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation {
        rho: VarAssignment(rho),
        lps,
        promoted,
    })
}

/// LP over the variables `open` (first columns) plus one state vector `y`
/// per equation: `x <= T_j (M y + c)`, `G y <= g`, `T_i y <= x_{source,i}`.
fn component_lp(
    es: &EquationSystem,
    open: &[usize],
    transfers: &BTreeMap<usize, Transfer>,
    value: &[Option<ExtRational>],
) -> Result<(LpProblem, Vec<String>)> {
    let tpl = &es.template;
    let n = tpl.num_vars();
    let k = open.len();
    let cols = k + k * n;
    let col_of: BTreeMap<usize, usize> = open.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut names: Vec<String> = open.iter().map(|&x| es.var_label(x)).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    for (e, &x) in open.iter().enumerate() {
        let t = &transfers[&x];
        let label = es.var_label(x);
        for var in &es.program.var_names {
            names.push(format!("y[{label}].{var}"));
        }
        let y0 = k + e * n;
        let tj = tpl.row(t.row);
        // x - T_j M y <= T_j c
        let mut r = vec![Rational::zero(); cols];
        r[e] = Rational::one();
        for col in 0..n {
            let coeff: Rational = (0..n).map(|i| &tj[i] * t.nf.m.get(i, col)).sum();
            r[y0 + col] = -coeff;
        }
        rows.push(r);
        b.push(dot(tj, &t.nf.c));
        // G y <= g
        for (gi, grow) in t.nf.g.row_iter().enumerate() {
            let mut r = vec![Rational::zero(); cols];
            r[y0..y0 + n].clone_from_slice(grow);
            rows.push(r);
            b.push(t.nf.g_bound[gi].clone());
        }
        // T_i y <= x_{source,i}
        for (i, y) in es.block(t.source).enumerate() {
            let mut r = vec![Rational::zero(); cols];
            r[y0..y0 + n].clone_from_slice(tpl.row(i));
            if let Some(&c) = col_of.get(&y) {
                r[c] = -Rational::one();
                rows.push(r);
                b.push(Rational::zero());
            } else {
                match &value[y] {
                    Some(ExtRational::Fin(q)) => {
                        rows.push(r);
                        b.push(q.clone());
                    }
                    Some(ExtRational::PosInf) => {}
                    Some(ExtRational::NegInf) => {
                        return Err(Error::Internal("empty source bound reached the LP".into()))
                    }
                    None => return Err(Error::Internal("source evaluated out of order".into())),
                }
            }
        }
    }
    let mut c = vec![Rational::zero(); cols];
    for v in c.iter_mut().take(k) {
        *v = Rational::one();
    }
    Ok((LpProblem::new(Matrix::from_rows(cols, rows)?, b, c)?, names))
}

/// Tarjan's algorithm; components come out with dependencies first.
fn strongly_connected(deps: &BTreeMap<usize, Vec<usize>>) -> Vec<Vec<usize>> {
    struct State<'a> {
        deps: &'a BTreeMap<usize, Vec<usize>>,
        index: BTreeMap<usize, usize>,
        low: BTreeMap<usize, usize>,
        on_stack: BTreeMap<usize, bool>,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut State<'_>, v: usize) {
        let i = s.index.len();
        s.index.insert(v, i);
        s.low.insert(v, i);
        s.stack.push(v);
        s.on_stack.insert(v, true);
        for &w in &s.deps[&v] {
            if !s.index.contains_key(&w) {
                visit(s, w);
                let lw = s.low[&w];
                let lv = s.low.get_mut(&v).unwrap();
                *lv = (*lv).min(lw);
            } else if s.on_stack[&w] {
                let iw = s.index[&w];
                let lv = s.low.get_mut(&v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if s.low[&v] == s.index[&v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack.insert(w, false);
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let mut s = State {
        deps,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        on_stack: BTreeMap::new(),
        stack: Vec::new(),
        out: Vec::new(),
    };
    for &v in deps.keys() {
        if !s.index.contains_key(&v) {
            visit(&mut s, v);
        }
    }
    s.out
}
