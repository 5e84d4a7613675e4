//! Complete decision procedure for quantifier-free linear real arithmetic.
//!
//! The formula is put in negation normal form and explored depth-first:
//! conjunctions, literals and atoms are absorbed eagerly, disjunctions are
//! deferred and split one at a time. Disjuncts contradicting the current
//! Boolean assignment are dropped, which amounts to unit propagation on the
//! selector skeleton. Before each split the collected linear atoms are
//! checked with the exact LP solver, so infeasible prefixes are cut early.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::arith::{Matrix, Rational};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpProblem, LpResult};

use super::formula::{BoolVar, LinExpr, LraFormula, Model, RealVar};
use super::{SatResult, SmtBackend, SolverStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    /// `e <= 0`
    Le,
    /// `e < 0`
    Lt,
    /// `e = 0`
    Eq,
}

#[derive(Clone, Debug)]
struct Atom {
    expr: LinExpr,
    rel: Rel,
}

#[derive(Clone, Debug)]
enum Nnf {
    True,
    False,
    Lit(BoolVar, bool),
    Atom(Atom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn atom(l: &LinExpr, r: &LinExpr, rel: Rel) -> Nnf {
    let expr = l.sub(r);
    if expr.is_constant() {
        let c = &expr.constant;
        let holds = match rel {
            Rel::Le => !c.is_positive(),
            Rel::Lt => c.is_negative(),
            Rel::Eq => c.is_zero(),
        };
        return if holds { Nnf::True } else { Nnf::False };
    }
    Nnf::Atom(Atom { expr, rel })
}

fn to_nnf(f: &LraFormula, positive: bool) -> Nnf {
    match (f, positive) {
        (LraFormula::True, p) | (LraFormula::False, p) => {
            if matches!(f, LraFormula::True) == p {
                Nnf::True
            } else {
                Nnf::False
            }
        }
        (LraFormula::Bool(b), p) => Nnf::Lit(*b, p),
        (LraFormula::Leq(l, r), true) => atom(l, r, Rel::Le),
        (LraFormula::Leq(l, r), false) => atom(r, l, Rel::Lt),
        (LraFormula::Lt(l, r), true) => atom(l, r, Rel::Lt),
        (LraFormula::Lt(l, r), false) => atom(r, l, Rel::Le),
        (LraFormula::Eq(l, r), true) => atom(l, r, Rel::Eq),
        (LraFormula::Eq(l, r), false) => {
            simplify_or(vec![atom(l, r, Rel::Lt), atom(r, l, Rel::Lt)])
        }
        (LraFormula::Not(g), p) => to_nnf(g, !p),
        (LraFormula::And(fs), true) | (LraFormula::Or(fs), false) => {
            simplify_and(fs.iter().map(|g| to_nnf(g, positive)).collect())
        }
        (LraFormula::Or(fs), true) | (LraFormula::And(fs), false) => {
            simplify_or(fs.iter().map(|g| to_nnf(g, positive)).collect())
        }
    }
}

fn simplify_and(items: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for i in items {
        match i {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().unwrap(),
        _ => Nnf::And(out),
    }
}

fn simplify_or(items: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for i in items {
        match i {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().unwrap(),
        _ => Nnf::Or(out),
    }
}

/// The built-in solver. Stateless apart from statistics.
#[derive(Clone, Debug, Default)]
pub struct InternalSolver {
    stats: SolverStats,
}

impl InternalSolver {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SmtBackend for InternalSolver {
    fn name(&self) -> String {
        "internal".into()
    }

    fn check(&mut self, f: &LraFormula) -> Result<SatResult> {
        self.stats.queries += 1;
        let nnf = to_nnf(f, true);
        let mut search = Search {
            lp_calls: 0,
            branches: 0,
        };
        let root = Branch {
            bools: HashMap::new(),
            atoms: Vec::new(),
            agenda: vec![&nnf],
            deferred: VecDeque::new(),
            checked_atoms: 0,
        };
        let found = search.explore(root)?;
        self.stats.lp_calls += search.lp_calls;
        self.stats.branches += search.branches;
        match found {
            None => {
                self.stats.unsat += 1;
                Ok(SatResult::Unsat)
            }
            Some(mut model) => {
                model.complete_for(f);
                if !f.eval(&model) {
                    return Err(Error::Internal(format!("model does not satisfy the formula: {f}")));
                }
                self.stats.sat += 1;
                Ok(SatResult::Sat(model))
            }
        }
    }

    fn stats(&self) -> SolverStats {
        self.stats.clone()
    }
}

#[derive(Clone)]
struct Branch<'a> {
    bools: HashMap<BoolVar, bool>,
    atoms: Vec<&'a Atom>,
    agenda: Vec<&'a Nnf>,
    deferred: VecDeque<&'a Nnf>,
    /// Atom count at the last successful feasibility check.
    checked_atoms: usize,
}

struct Search {
    lp_calls: u64,
    branches: u64,
}

enum Filtered<'a> {
    Satisfied,
    Conflict,
    Unit(&'a Nnf),
    Split(Vec<&'a Nnf>),
}

impl Search {
    fn explore<'a>(&mut self, mut b: Branch<'a>) -> Result<Option<Model>> {
        loop {
            // Absorb everything that is not a disjunction.
            let mut fresh_ors = Vec::new();
            while let Some(item) = b.agenda.pop() {
                match item {
                    Nnf::True => {}
                    Nnf::False => return Ok(None),
                    Nnf::Lit(v, val) => match b.bools.get(v) {
                        Some(old) if old != val => return Ok(None),
                        _ => {
                            b.bools.insert(*v, *val);
                        }
                    },
                    Nnf::Atom(a) => b.atoms.push(a),
                    Nnf::And(items) => b.agenda.extend(items.iter().rev()),
                    Nnf::Or(_) => fresh_ors.push(item),
                }
            }
            // Disjunctions discovered inside the last split go first.
            for o in fresh_ors.into_iter().rev() {
                b.deferred.push_front(o);
            }
            let Some(or) = b.deferred.pop_front() else {
                return Ok(self.feasible(&b.atoms)?.map(|reals| Model {
                    reals,
                    bools: b.bools.iter().map(|(k, v)| (*k, *v)).collect(),
                }));
            };
            match filter(or, &b.bools) {
                Filtered::Satisfied => continue,
                Filtered::Conflict => return Ok(None),
                Filtered::Unit(child) => {
                    b.agenda.push(child);
                    continue;
                }
                Filtered::Split(children) => {
                    if b.atoms.len() > b.checked_atoms {
                        if self.feasible(&b.atoms)?.is_none() {
                            return Ok(None);
                        }
                        b.checked_atoms = b.atoms.len();
                    }
                    for child in children {
                        self.branches += 1;
                        let mut nb = b.clone();
                        nb.agenda.push(child);
                        if let Some(m) = self.explore(nb)? {
                            return Ok(Some(m));
                        }
                    }
                    return Ok(None);
                }
            }
        }
    }

    /// Satisfying real assignment for a conjunction of atoms, if any.
    fn feasible(&mut self, atoms: &[&Atom]) -> Result<Option<BTreeMap<RealVar, Rational>>> {
        // Eliminate equalities by substitution.
        let mut subst: Vec<(RealVar, LinExpr)> = Vec::new();
        let mut ineqs: Vec<(LinExpr, Rel)> = Vec::new();
        for a in atoms {
            if a.rel == Rel::Eq {
                let mut e = a.expr.clone();
                for (v, s) in &subst {
                    e = e.substitute(*v, s);
                }
                if e.is_constant() {
                    if !e.constant.is_zero() {
                        return Ok(None);
                    }
                    continue;
                }
                let (&v, c) = e.terms.iter().next_back().unwrap();
                // v = -(e - c v) / c
                let mut rest = e.clone();
                rest.terms.remove(&v);
                let sol = rest.scale(&-c.recip());
                for (_, s) in subst.iter_mut() {
                    *s = s.substitute(v, &sol);
                }
                subst.push((v, sol));
            } else {
                ineqs.push((a.expr.clone(), a.rel));
            }
        }
        let mut rows: Vec<(LinExpr, Rel)> = Vec::with_capacity(ineqs.len());
        for (mut e, rel) in ineqs {
            for (v, s) in &subst {
                e = e.substitute(*v, s);
            }
            if e.is_constant() {
                let ok = match rel {
                    Rel::Le => !e.constant.is_positive(),
                    _ => e.constant.is_negative(),
                };
                if !ok {
                    return Ok(None);
                }
                continue;
            }
            rows.push((e, rel));
        }

        let mut reals: BTreeMap<RealVar, Rational> = BTreeMap::new();
        if !rows.is_empty() {
            let mut index: BTreeMap<RealVar, usize> = BTreeMap::new();
            for (e, _) in &rows {
                for v in e.terms.keys() {
                    let k = index.len();
                    index.entry(*v).or_insert(k);
                }
            }
            let strict = rows.iter().any(|(_, r)| *r == Rel::Lt);
            let q = index.len() + usize::from(strict);
            let t = index.len();
            let mut a_rows = Vec::with_capacity(rows.len() + 1);
            let mut b = Vec::with_capacity(rows.len() + 1);
            for (e, rel) in &rows {
                let mut r = vec![Rational::zero(); q];
                for (v, c) in &e.terms {
                    r[index[v]] = c.clone();
                }
                if *rel == Rel::Lt {
                    r[t] = Rational::one();
                }
                a_rows.push(r);
                b.push(-e.constant.clone());
            }
            let mut c = vec![Rational::zero(); q];
            if strict {
                let mut cap = vec![Rational::zero(); q];
                cap[t] = Rational::one();
                a_rows.push(cap);
                b.push(Rational::one());
                c[t] = Rational::one();
            }
            let lp = LpProblem::new(Matrix::from_rows(q, a_rows)?, b, c)?;
            self.lp_calls += 1;
            let point = match lp_solve(&lp)? {
                LpResult::Infeasible => return Ok(None),
                LpResult::Unbounded { .. } => {
                    return Err(Error::Internal("bounded slack LP reported unbounded".into()))
                }
                LpResult::Optimal { x, value, .. } => {
                    if strict && !value.is_positive() {
                        return Ok(None);
                    }
                    x
                }
            };
            for (v, k) in &index {
                reals.insert(*v, point[*k].clone());
            }
        }
        // Back-substitute eliminated variables; later substitutions never
        // mention earlier eliminated variables.
        for (v, s) in subst.iter().rev() {
            let mut val = s.constant.clone();
            for (w, c) in &s.terms {
                val += c * reals.get(w).cloned().unwrap_or_else(Rational::zero);
            }
            reals.insert(*v, val);
        }
        Ok(Some(reals))
    }
}

fn filter<'a>(or: &'a Nnf, bools: &HashMap<BoolVar, bool>) -> Filtered<'a> {
    let Nnf::Or(children) = or else {
        unreachable!("only disjunctions are deferred")
    };
    let mut live = Vec::with_capacity(children.len());
    for c in children {
        match lead_literal_status(c, bools) {
            Some(true) if matches!(c, Nnf::Lit(..)) => return Filtered::Satisfied,
            Some(false) => {}
            _ => live.push(c),
        }
    }
    match live.len() {
        0 => Filtered::Conflict,
        1 => Filtered::Unit(live[0]),
        _ => Filtered::Split(live),
    }
}

/// `Some(b)` when the leading literals of `f` already decide it under the
/// current assignment: a bare literal evaluates directly, a conjunction is
/// refuted by any falsified literal.
fn lead_literal_status(f: &Nnf, bools: &HashMap<BoolVar, bool>) -> Option<bool> {
    match f {
        Nnf::Lit(v, val) => bools.get(v).map(|b| b == val),
        Nnf::False => Some(false),
        Nnf::And(items) => {
            let refuted = items.iter().any(|i| match i {
                Nnf::Lit(v, val) => bools.get(v).is_some_and(|b| b != val),
                Nnf::False => true,
                _ => false,
            });
            refuted.then_some(false)
        }
        _ => None,
    }
}
