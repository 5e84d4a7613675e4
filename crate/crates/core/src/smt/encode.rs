//! Formulas describing the input/output relation of statements and the
//! improvement queries built on top of them.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::arith::{ExtRational, Rational};
use crate::domain::{AbstractValue, Template};
use crate::error::{Error, Result};
use crate::program::{statement_positions, Position, Statement};
use crate::transform::StatementStrategy;

use super::formula::{BoolVar, LinExpr, LraFormula, Model, RealVar};

/// Variable bookkeeping for one encoding.
///
/// A binary choice is driven by one Boolean `a` (child 0 when false, child 1
/// when true). A choice with `k > 2` children owns `k` Booleans used one-hot.
#[derive(Clone, Debug, Default)]
pub struct EncodingContext {
    next_real: RealVar,
    next_bool: BoolVar,
    pub selectors: BTreeMap<Position, Vec<BoolVar>>,
    pub real_names: BTreeMap<RealVar, String>,
    pub input: Vec<RealVar>,
    pub output: Vec<RealVar>,
    /// The objective variable `v` of a query, if any.
    pub value_var: Option<RealVar>,
}

impl EncodingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_real(&mut self, name: impl Into<String>) -> RealVar {
        let v = self.next_real;
        self.next_real += 1;
        self.real_names.insert(v, name.into());
        v
    }

    pub fn fresh_reals(&mut self, prefix: &str, n: usize) -> Vec<RealVar> {
        (0..n).map(|i| self.fresh_real(format!("{prefix}{}", i + 1))).collect()
    }

    pub fn fresh_bool(&mut self) -> BoolVar {
        let b = self.next_bool;
        self.next_bool += 1;
        b
    }

    pub fn num_reals(&self) -> usize {
        self.next_real
    }

    pub fn num_bools(&self) -> usize {
        self.next_bool
    }

    /// Selector literal activating child `k` of the choice at `pos`.
    fn selector(&self, pos: &Position, k: usize, arity: usize) -> LraFormula {
        let vars = &self.selectors[pos];
        if arity == 2 {
            let a = LraFormula::Bool(vars[0]);
            return if k == 0 { LraFormula::not(a) } else { a };
        }
        LraFormula::and(
            vars.iter()
                .enumerate()
                .map(|(i, &b)| {
                    if i == k {
                        LraFormula::Bool(b)
                    } else {
                        LraFormula::not(LraFormula::Bool(b))
                    }
                })
                .collect(),
        )
    }
}

/// Φ(s) over fresh input vector `x` and output vector `x'`, recorded in
/// `ctx.input` / `ctx.output`.
pub fn encode_statement(s: &Statement, n: usize, ctx: &mut EncodingContext) -> LraFormula {
    let input = ctx.fresh_reals("x", n);
    let output = ctx.fresh_reals("x'", n);
    ctx.input = input.clone();
    ctx.output = output.clone();
    allocate_selectors(s, ctx);
    let mut path = Vec::new();
    encode(s, &input, &output, ctx, &mut path)
}

fn allocate_selectors(s: &Statement, ctx: &mut EncodingContext) {
    for pos in statement_positions(s) {
        let arity = match s.at(&pos.0) {
            Some(Statement::Choice(items)) => items.len(),
            _ => unreachable!("positions point at choices"),
        };
        let count = if arity == 2 { 1 } else { arity };
        let vars = (0..count).map(|_| ctx.fresh_bool()).collect();
        ctx.selectors.insert(pos, vars);
    }
}

fn vec_eq(lhs: &[RealVar], rhs: &[RealVar]) -> Vec<LraFormula> {
    lhs.iter()
        .zip(rhs)
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| LraFormula::eq(LinExpr::var(a), LinExpr::var(b)))
        .collect()
}

fn encode(
    s: &Statement,
    input: &[RealVar],
    output: &[RealVar],
    ctx: &mut EncodingContext,
    path: &mut Vec<usize>,
) -> LraFormula {
    match s {
        Statement::Assign { a, b } => LraFormula::and(
            (0..a.rows())
                .map(|i| {
                    LraFormula::eq(
                        LinExpr::var(output[i]),
                        LinExpr::linear(a.row(i), input, b[i].clone()),
                    )
                })
                .collect(),
        ),
        Statement::Guard { a, b } => {
            let mut parts: Vec<LraFormula> = (0..a.rows())
                .map(|i| {
                    LraFormula::leq(
                        LinExpr::linear(a.row(i), input, Rational::zero()),
                        LinExpr::constant(b[i].clone()),
                    )
                })
                .collect();
            parts.extend(vec_eq(output, input));
            LraFormula::and(parts)
        }
        Statement::Seq(items) => {
            let n = input.len();
            let mut parts = Vec::with_capacity(items.len());
            let mut cur = input.to_vec();
            for (i, item) in items.iter().enumerate() {
                let next = if i + 1 == items.len() {
                    output.to_vec()
                } else {
                    ctx.fresh_reals("x''", n)
                };
                path.push(i);
                parts.push(encode(item, &cur, &next, ctx, path));
                path.pop();
                cur = next;
            }
            LraFormula::and(parts)
        }
        Statement::Choice(items) => {
            let pos = Position(path.clone());
            let mut branches = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let sel = ctx.selector(&pos, k, items.len());
                path.push(k);
                let body = encode(item, input, output, ctx, path);
                path.pop();
                branches.push(LraFormula::and(vec![sel, body]));
            }
            LraFormula::or(branches)
        }
    }
}

/// Φ(s, d, j, c): some `x` in γ(d) reaches `x'` through `s` with
/// `T_j x' > c`.
pub fn encode_query(
    s: &Statement,
    d: &AbstractValue,
    j: usize,
    c: &ExtRational,
    tpl: &Template,
) -> Result<(LraFormula, EncodingContext)> {
    if c.is_pos_inf() {
        return Err(Error::ThresholdIsTop);
    }
    if d.len() != tpl.len() || j >= tpl.len() {
        return Err(Error::Dimension(format!(
            "query row {j} with {} bounds over a {}-row template",
            d.len(),
            tpl.len()
        )));
    }
    let n = tpl.num_vars();
    let mut ctx = EncodingContext::new();
    let phi = encode_statement(s, n, &mut ctx);
    if d.has_neg_inf() {
        return Ok((LraFormula::False, ctx));
    }
    let mut parts = Vec::new();
    for (i, bound) in d.0.iter().enumerate() {
        if let ExtRational::Fin(q) = bound {
            parts.push(LraFormula::leq(
                LinExpr::linear(tpl.row(i), &ctx.input, Rational::zero()),
                LinExpr::constant(q.clone()),
            ));
        }
    }
    parts.push(phi);
    let v = ctx.fresh_real("v");
    ctx.value_var = Some(v);
    parts.push(LraFormula::eq(
        LinExpr::var(v),
        LinExpr::linear(tpl.row(j), &ctx.output, Rational::zero()),
    ));
    if let ExtRational::Fin(q) = c {
        parts.push(LraFormula::lt(LinExpr::constant(q.clone()), LinExpr::var(v)));
    }
    Ok((LraFormula::and(parts), ctx))
}

/// Reads the chosen child of every choice off the selector Booleans.
pub fn strategy_from_model(s: &Statement, ctx: &EncodingContext, m: &Model) -> StatementStrategy {
    let mut sigma = StatementStrategy::new();
    for pos in statement_positions(s) {
        let vars = &ctx.selectors[&pos];
        let child = if vars.len() == 1 {
            usize::from(m.bool_value(vars[0]))
        } else {
            vars.iter().position(|&b| m.bool_value(b)).unwrap_or(0)
        };
        sigma.choices.insert(pos, child);
    }
    sigma
}
