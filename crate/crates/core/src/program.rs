//! Affine statements and control-flow graphs.
//!
//! Statements form the algebra of affine assignments `x := Ax + b`, affine
//! guards `Ax <= b`, sequencing and nondeterministic choice. Sequences and
//! choices are n-ary; nested sequences are flattened on construction.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, Matrix, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    /// `x := A x + b` with `A` n×n.
    Assign { a: Matrix, b: Vec<Rational> },
    /// `A x <= b` with `A` k×n.
    Guard { a: Matrix, b: Vec<Rational> },
    Seq(Vec<Statement>),
    Choice(Vec<Statement>),
}

impl Statement {
    pub fn assign(a: Matrix, b: Vec<Rational>) -> Result<Self> {
        if a.rows() != a.cols() || b.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "assignment needs an n×n matrix and n-vector, got {}x{} and {}",
                a.rows(),
                a.cols(),
                b.len()
            )));
        }
        Ok(Statement::Assign { a, b })
    }

    pub fn guard(a: Matrix, b: Vec<Rational>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "guard with {} rows but {} bounds",
                a.rows(),
                b.len()
            )));
        }
        Ok(Statement::Guard { a, b })
    }

    /// `x_var := coeffs·x + constant`, all other variables unchanged.
    pub fn assign_var(n: usize, var: usize, coeffs: &[Rational], constant: Rational) -> Result<Self> {
        if coeffs.len() != n || var >= n {
            return Err(Error::Dimension(format!(
                "single assignment to x{var} over {n} variables with {} coefficients",
                coeffs.len()
            )));
        }
        let mut a = Matrix::identity(n);
        let mut b = vec![Rational::zero(); n];
        for (j, c) in coeffs.iter().enumerate() {
            a.set(var, j, c.clone());
        }
        b[var] = constant;
        Statement::assign(a, b)
    }

    /// Single-row guard `coeffs·x <= bound`.
    pub fn guard_row(coeffs: Vec<Rational>, bound: Rational) -> Result<Self> {
        let n = coeffs.len();
        Statement::guard(Matrix::from_rows(n, vec![coeffs])?, vec![bound])
    }

    /// Guard for `coeffs·x = value`, i.e. the pair `c·x <= v; -c·x <= -v`.
    pub fn guard_eq(coeffs: Vec<Rational>, value: Rational) -> Result<Self> {
        let n = coeffs.len();
        let neg: Vec<Rational> = coeffs.iter().map(|c| -c).collect();
        Statement::guard(Matrix::from_rows(n, vec![coeffs, neg])?, vec![value.clone(), -value])
    }

    /// The statement that does nothing (`0 <= 0`), used for empty paths.
    pub fn skip(n: usize) -> Self {
        Statement::Guard {
            a: Matrix::zeros(0, n),
            b: Vec::new(),
        }
    }

    /// Sequential composition; nested sequences are spliced in and a single
    /// item is returned as-is.
    pub fn seq(items: Vec<Statement>) -> Result<Self> {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Statement::Seq(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Err(Error::InvalidProgram("empty sequence".into())),
            1 => Ok(flat.pop().unwrap()),
            _ => Ok(Statement::Seq(flat)),
        }
    }

    /// Nondeterministic choice over at least two alternatives; a single
    /// alternative is returned as-is.
    pub fn choice(items: Vec<Statement>) -> Result<Self> {
        match items.len() {
            0 => Err(Error::InvalidProgram("empty choice".into())),
            1 => Ok(items.into_iter().next().unwrap()),
            _ => Ok(Statement::Choice(items)),
        }
    }

    pub fn is_elementary(&self) -> bool {
        matches!(self, Statement::Assign { .. } | Statement::Guard { .. })
    }

    /// No choice anywhere.
    pub fn is_sequential(&self) -> bool {
        match self {
            Statement::Assign { .. } | Statement::Guard { .. } => true,
            Statement::Seq(items) => items.iter().all(Statement::is_sequential),
            Statement::Choice(_) => false,
        }
    }

    /// A choice of sequential statements (or a sequential statement).
    pub fn is_merge_simple(&self) -> bool {
        match self {
            Statement::Choice(items) => items.iter().all(Statement::is_sequential),
            other => other.is_sequential(),
        }
    }

    /// Number of program variables the statement is written over, if it
    /// contains any elementary statement.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Statement::Assign { a, .. } | Statement::Guard { a, .. } => Some(a.cols()),
            Statement::Seq(items) | Statement::Choice(items) => items.iter().find_map(Statement::arity),
        }
    }

    /// Checks that every embedded matrix has `n` columns.
    pub fn check_arity(&self, n: usize) -> Result<()> {
        match self {
            Statement::Assign { a, .. } | Statement::Guard { a, .. } => {
                if a.cols() != n {
                    return Err(Error::Dimension(format!(
                        "statement over {} variables in a program with {n}",
                        a.cols()
                    )));
                }
                Ok(())
            }
            Statement::Seq(items) | Statement::Choice(items) => {
                items.iter().try_for_each(|s| s.check_arity(n))
            }
        }
    }

    /// Returns the sub-statement at `path` (child indices from the root).
    pub fn at(&self, path: &[usize]) -> Option<&Statement> {
        let mut cur = self;
        for &i in path {
            cur = match cur {
                Statement::Seq(items) | Statement::Choice(items) => items.get(i)?,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Number of elementary statements.
    pub fn size(&self) -> usize {
        match self {
            Statement::Assign { .. } | Statement::Guard { .. } => 1,
            Statement::Seq(items) | Statement::Choice(items) => items.iter().map(Statement::size).sum(),
        }
    }

    /// Display helper with variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> StatementDisplay<'a> {
        StatementDisplay { stmt: self, names }
    }
}

/// Identifies one occurrence of a choice inside a statement by the child
/// indices leading to it from the root.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(pub Vec<usize>);

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("@")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// Positions of all choice occurrences in `s`.
pub fn statement_positions(s: &Statement) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    let mut path = Vec::new();
    collect_positions(s, &mut path, &mut out);
    out
}

fn collect_positions(s: &Statement, path: &mut Vec<usize>, out: &mut BTreeSet<Position>) {
    match s {
        Statement::Assign { .. } | Statement::Guard { .. } => {}
        Statement::Seq(items) | Statement::Choice(items) => {
            if matches!(s, Statement::Choice(_)) {
                out.insert(Position(path.clone()));
            }
            for (i, item) in items.iter().enumerate() {
                path.push(i);
                collect_positions(item, path, out);
                path.pop();
            }
        }
    }
}

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub stmt: Statement,
    pub to: NodeId,
}

/// Polyhedral description `A x <= b` of the states allowed at the start node.
/// No rows means all of `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialStates {
    pub a: Matrix,
    pub b: Vec<Rational>,
}

impl InitialStates {
    pub fn universe(n: usize) -> Self {
        InitialStates {
            a: Matrix::zeros(0, n),
            b: Vec::new(),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.a
            .row_iter()
            .zip(&self.b)
            .all(|(row, bound)| crate::arith::dot(row, x) <= *bound)
    }
}

/// An affine program: nodes, statement-labelled edges and a start node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub var_names: Vec<String>,
    pub node_names: Vec<String>,
    pub start: NodeId,
    pub edges: Vec<Edge>,
    pub initial: InitialStates,
}

impl Program {
    pub fn new(
        var_names: Vec<String>,
        node_names: Vec<String>,
        start: NodeId,
        edges: Vec<Edge>,
        initial: Option<InitialStates>,
    ) -> Result<Self> {
        let n = var_names.len();
        let initial = initial.unwrap_or_else(|| InitialStates::universe(n));
        let p = Program {
            var_names,
            node_names,
            start,
            edges,
            initial,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.var_names.len();
        let nodes = self.node_names.len();
        if self.start >= nodes {
            return Err(Error::InvalidProgram(format!("start node {} does not exist", self.start)));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.from >= nodes || e.to >= nodes {
                return Err(Error::InvalidProgram(format!("edge {k} has an unknown endpoint")));
            }
            e.stmt.check_arity(n)?;
        }
        if self.initial.a.cols() != n || self.initial.a.rows() != self.initial.b.len() {
            return Err(Error::Dimension("initial constraints do not match the variables".into()));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn incoming(&self, v: NodeId) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.to == v)
    }

    pub fn outgoing(&self, u: NodeId) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.from == u)
    }
}

pub struct StatementDisplay<'a> {
    stmt: &'a Statement,
    names: &'a [String],
}

fn linear_term(coeffs: &[Rational], constant: &Rational, names: &[String]) -> String {
    let mut out = String::new();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1));
        let mag = c.abs();
        let coef = if mag.is_one() {
            String::new()
        } else {
            format!("{}*", format_rational(&mag))
        };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        out.push_str(&coef);
        out.push_str(&name);
    }
    if out.is_empty() {
        return format_rational(constant);
    }
    if !constant.is_zero() {
        out.push_str(if constant.is_negative() { " - " } else { " + " });
        out.push_str(&format_rational(&constant.abs()));
    }
    out
}

impl fmt::Display for StatementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stmt {
            Statement::Assign { a, b } => {
                let mut first = true;
                for i in 0..a.rows() {
                    let unchanged = b[i].is_zero()
                        && (0..a.cols()).all(|j| if i == j { a.get(i, j).is_one() } else { a.get(i, j).is_zero() });
                    if unchanged {
                        continue;
                    }
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    let name = self.names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
                    write!(f, "{name} := {}", linear_term(a.row(i), &b[i], self.names))?;
                }
                if first {
                    f.write_str("skip")?;
                }
                Ok(())
            }
            Statement::Guard { a, b } => {
                if a.rows() == 0 {
                    return f.write_str("skip");
                }
                f.write_str("guard ")?;
                for i in 0..a.rows() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(
                        f,
                        "{} <= {}",
                        linear_term(a.row(i), &Rational::zero(), self.names),
                        format_rational(&b[i])
                    )?;
                }
                Ok(())
            }
            Statement::Seq(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}", item.display(self.names))?;
                }
                Ok(())
            }
            Statement::Choice(items) => {
                f.write_str("(")?;
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", item.display(self.names))?;
                }
                f.write_str(")")
            }
        }
    }
}
