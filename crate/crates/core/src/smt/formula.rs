use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, Rational};

pub type RealVar = usize;
pub type BoolVar = usize;

/// `constant + Σ coeff·var`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub constant: Rational,
    pub terms: BTreeMap<RealVar, Rational>,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Rational) -> Self {
        LinExpr {
            constant: q,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(v: RealVar) -> Self {
        let mut e = Self::zero();
        e.add_term(v, &Rational::one());
        e
    }

    /// `Σ coeffs[k]·vars[k] + constant`.
    pub fn linear(coeffs: &[Rational], vars: &[RealVar], constant: Rational) -> Self {
        let mut e = Self::constant(constant);
        for (c, &v) in coeffs.iter().zip(vars) {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: RealVar, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.constant += &other.constant;
        for (v, c) in &other.terms {
            e.add_term(*v, c);
        }
        e
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn coeff(&self, v: RealVar) -> Rational {
        self.terms.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Replaces `v` by `e`.
    pub fn substitute(&self, v: RealVar, e: &LinExpr) -> LinExpr {
        match self.terms.get(&v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.terms.remove(&v);
                rest.add(&e.scale(c))
            }
        }
    }

    /// Evaluates with unassigned variables read as 0.
    pub fn eval(&self, reals: &BTreeMap<RealVar, Rational>) -> Rational {
        let mut s = self.constant.clone();
        for (v, c) in &self.terms {
            if let Some(x) = reals.get(v) {
                s += c * x;
            }
        }
        s
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            write!(f, "r{v}")?;
            first = false;
        }
        if first {
            write!(f, "{}", format_rational(&self.constant))
        } else if self.constant.is_zero() {
            Ok(())
        } else {
            let sign = if self.constant.is_negative() { " - " } else { " + " };
            write!(f, "{sign}{}", format_rational(&self.constant.abs()))
        }
    }
}

/// Quantifier-free formula over linear real arithmetic and Boolean variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LraFormula {
    True,
    False,
    Bool(BoolVar),
    Leq(LinExpr, LinExpr),
    Lt(LinExpr, LinExpr),
    Eq(LinExpr, LinExpr),
    Not(Box<LraFormula>),
    And(Vec<LraFormula>),
    Or(Vec<LraFormula>),
}

impl LraFormula {
    /// Conjunction with constant folding and flattening.
    pub fn and(items: Vec<LraFormula>) -> LraFormula {
        let mut out = Vec::with_capacity(items.len());
        for f in items {
            match f {
                LraFormula::True => {}
                LraFormula::False => return LraFormula::False,
                LraFormula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => LraFormula::True,
            1 => out.pop().unwrap(),
            _ => LraFormula::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(items: Vec<LraFormula>) -> LraFormula {
        let mut out = Vec::with_capacity(items.len());
        for f in items {
            match f {
                LraFormula::False => {}
                LraFormula::True => return LraFormula::True,
                LraFormula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => LraFormula::False,
            1 => out.pop().unwrap(),
            _ => LraFormula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LraFormula) -> LraFormula {
        match f {
            LraFormula::True => LraFormula::False,
            LraFormula::False => LraFormula::True,
            LraFormula::Not(inner) => *inner,
            other => LraFormula::Not(Box::new(other)),
        }
    }

    pub fn leq(l: LinExpr, r: LinExpr) -> LraFormula {
        LraFormula::Leq(l, r)
    }

    pub fn lt(l: LinExpr, r: LinExpr) -> LraFormula {
        LraFormula::Lt(l, r)
    }

    pub fn eq(l: LinExpr, r: LinExpr) -> LraFormula {
        LraFormula::Eq(l, r)
    }

    /// Truth value under `m`; unassigned variables read as 0 / false.
    pub fn eval(&self, m: &Model) -> bool {
        match self {
            LraFormula::True => true,
            LraFormula::False => false,
            LraFormula::Bool(b) => m.bool_value(*b),
            LraFormula::Leq(l, r) => l.eval(&m.reals) <= r.eval(&m.reals),
            LraFormula::Lt(l, r) => l.eval(&m.reals) < r.eval(&m.reals),
            LraFormula::Eq(l, r) => l.eval(&m.reals) == r.eval(&m.reals),
            LraFormula::Not(f) => !f.eval(m),
            LraFormula::And(fs) => fs.iter().all(|f| f.eval(m)),
            LraFormula::Or(fs) => fs.iter().any(|f| f.eval(m)),
        }
    }

    pub fn real_vars(&self) -> BTreeSet<RealVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let LraFormula::Leq(l, r) | LraFormula::Lt(l, r) | LraFormula::Eq(l, r) = f {
                out.extend(l.terms.keys().chain(r.terms.keys()).copied());
            }
        });
        out
    }

    pub fn bool_vars(&self) -> BTreeSet<BoolVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let LraFormula::Bool(b) = f {
                out.insert(*b);
            }
        });
        out
    }

    fn visit(&self, k: &mut impl FnMut(&LraFormula)) {
        k(self);
        match self {
            LraFormula::Not(f) => f.visit(k),
            LraFormula::And(fs) | LraFormula::Or(fs) => fs.iter().for_each(|f| f.visit(k)),
            _ => {}
        }
    }

    /// Number of nodes in the formula tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for LraFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, items: &[LraFormula], op: &str| {
            f.write_str("(")?;
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(op)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            LraFormula::True => f.write_str("true"),
            LraFormula::False => f.write_str("false"),
            LraFormula::Bool(b) => write!(f, "a{b}"),
            LraFormula::Leq(l, r) => write!(f, "{l} <= {r}"),
            LraFormula::Lt(l, r) => write!(f, "{l} < {r}"),
            LraFormula::Eq(l, r) => write!(f, "{l} = {r}"),
            LraFormula::Not(x) => write!(f, "!({x})"),
            LraFormula::And(xs) => join(f, xs, " & "),
            LraFormula::Or(xs) => join(f, xs, " | "),
        }
    }
}

/// An interpretation of real and Boolean variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub reals: BTreeMap<RealVar, Rational>,
    pub bools: BTreeMap<BoolVar, bool>,
}

impl Model {
    pub fn real(&self, v: RealVar) -> Rational {
        self.reals.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn bool_value(&self, b: BoolVar) -> bool {
        self.bools.get(&b).copied().unwrap_or(false)
    }

    /// Assigns defaults (0 / false) to every variable of `f` not yet set.
    pub fn complete_for(&mut self, f: &LraFormula) {
        for v in f.real_vars() {
            self.reals.entry(v).or_insert_with(Rational::zero);
        }
        for b in f.bool_vars() {
            self.bools.entry(b).or_insert(false);
        }
    }
}
