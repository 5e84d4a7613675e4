//! Program families used to exercise worst cases and to cross-check the
//! analyzer against propositional reasoning.

use crate::arith::{int, Rational};
use crate::error::Result;
use crate::program::{Edge, Program, Statement};

use num_traits::{One, Zero};

/// Propositional formula with negation only on variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropFormula {
    Lit { var: usize, positive: bool },
    And(Vec<PropFormula>),
    Or(Vec<PropFormula>),
}

impl PropFormula {
    pub fn pos(var: usize) -> Self {
        PropFormula::Lit { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        PropFormula::Lit { var, positive: false }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            PropFormula::Lit { var, positive } => assignment[*var] == *positive,
            PropFormula::And(fs) => fs.iter().all(|f| f.eval(assignment)),
            PropFormula::Or(fs) => fs.iter().any(|f| f.eval(assignment)),
        }
    }

    /// One more than the largest variable index.
    pub fn num_vars(&self) -> usize {
        match self {
            PropFormula::Lit { var, .. } => var + 1,
            PropFormula::And(fs) | PropFormula::Or(fs) => fs.iter().map(Self::num_vars).max().unwrap_or(0),
        }
    }
}

/// Satisfiability by enumerating all `2^k` assignments.
pub fn truth_table_sat(phi: &PropFormula, k: usize) -> bool {
    (0..1u64 << k).any(|bits| {
        let a: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
        phi.eval(&a)
    })
}

/// `z = 1` for a positive literal, `z = 0` for a negative one; conjunction
/// becomes sequencing and disjunction becomes choice. Variable `i` of the
/// formula is program variable `map(i)` out of `n`.
pub fn sat_to_statement_over(phi: &PropFormula, n: usize, map: &dyn Fn(usize) -> usize) -> Result<Statement> {
    match phi {
        PropFormula::Lit { var, positive } => {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[map(*var)] = Rational::one();
            let value = if *positive { Rational::one() } else { Rational::zero() };
            Statement::guard_eq(coeffs, value)
        }
        PropFormula::And(fs) => Statement::seq(
            fs.iter()
                .map(|f| sat_to_statement_over(f, n, map))
                .collect::<Result<Vec<_>>>()?,
        ),
        PropFormula::Or(fs) => Statement::choice(
            fs.iter()
                .map(|f| sat_to_statement_over(f, n, map))
                .collect::<Result<Vec<_>>>()?,
        ),
    }
}

/// The statement `s(φ)` over variables `z1..zk`.
pub fn sat_to_statement(phi: &PropFormula, k: usize) -> Result<Statement> {
    sat_to_statement_over(phi, k, &|i| i)
}

fn names(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}{i}"))
}

fn assign(n: usize, var: usize, terms: &[(usize, i64)], constant: i64) -> Result<Statement> {
    let mut coeffs = vec![Rational::zero(); n];
    for &(v, c) in terms {
        coeffs[v] += int(c);
    }
    Statement::assign_var(n, var, &coeffs, int(constant))
}

fn guard(n: usize, terms: &[(usize, i64)], bound: i64) -> Result<Statement> {
    let mut coeffs = vec![Rational::zero(); n];
    for &(v, c) in terms {
        coeffs[v] += int(c);
    }
    Statement::guard_row(coeffs, int(bound))
}

/// The loop that enumerates all `2^n` bit patterns of a counter: variables
/// `x1, x2, y1..yn` with `y_i = 2^(i-1)`; each iteration decomposes `x1`
/// into binary with one choice per bit, then increments `x1`.
pub fn make_exponential_program(n: usize) -> Result<Program> {
    let nv = n + 2;
    let (x1, x2) = (0, 1);
    let y = |i: usize| i + 1;
    let mut init = vec![assign(nv, x1, &[], 0)?];
    if n >= 1 {
        init.push(assign(nv, y(1), &[], 1)?);
    }
    for i in 2..=n {
        init.push(assign(nv, y(i), &[(y(i - 1), 2)], 0)?);
    }
    let mut body = vec![assign(nv, x2, &[(x1, 1)], 0)?];
    for i in (1..=n).rev() {
        let take = Statement::seq(vec![
            guard(nv, &[(x2, -1), (y(i), 1)], 0)?,
            assign(nv, x2, &[(x2, 1), (y(i), -1)], 0)?,
        ])?;
        let skip = guard(nv, &[(x2, 1), (y(i), -1)], -1)?;
        body.push(Statement::choice(vec![take, skip])?);
    }
    body.push(assign(nv, x1, &[(x1, 1)], 1)?);
    let vars = ["x1".to_string(), "x2".to_string()].into_iter().chain(names("y", n)).collect();
    Program::new(
        vars,
        vec!["st".into(), "1".into()],
        0,
        vec![
            Edge { from: 0, stmt: Statement::seq(init)?, to: 1 },
            Edge { from: 1, stmt: Statement::seq(body)?, to: 1 },
        ],
        None,
    )
}

/// `∀ x_1..x_n ∃ y_1..y_m . matrix`, where formula variables `0..n` are the
/// `x_i` and `n..n+m` are the `y_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForallExists {
    pub universal: usize,
    pub existential: usize,
    pub matrix: PropFormula,
}

impl ForallExists {
    /// Truth by enumeration.
    pub fn holds(&self) -> bool {
        let (n, m) = (self.universal, self.existential);
        (0..1u64 << n).all(|xs| {
            (0..1u64 << m).any(|ys| {
                let a: Vec<bool> = (0..n)
                    .map(|i| xs >> i & 1 == 1)
                    .chain((0..m).map(|j| ys >> j & 1 == 1))
                    .collect();
                self.matrix.eval(&a)
            })
        })
    }
}

/// Program with nodes `st, 1, 2` whose node `2` has a non-bottom interval
/// bound exactly when the formula holds. Variables are
/// `x, x', x1..xn, y1..ym`.
pub fn make_forall_exists_program(phi: &ForallExists) -> Result<Program> {
    let (n, m) = (phi.universal, phi.existential);
    let nv = 2 + n + m;
    let (x, xp) = (0, 1);
    let xi = |i: usize| 1 + i;
    let mut body = vec![assign(nv, xp, &[(x, 1)], 0)?];
    for i in (1..=n).rev() {
        let w = 1i64 << (i - 1);
        let one = Statement::seq(vec![
            guard(nv, &[(xp, -1)], -w)?,
            assign(nv, xp, &[(xp, 1)], -w)?,
            assign(nv, xi(i), &[], 1)?,
        ])?;
        let zero = Statement::seq(vec![guard(nv, &[(xp, 1)], w - 1)?, assign(nv, xi(i), &[], 0)?])?;
        body.push(Statement::choice(vec![one, zero])?);
    }
    body.push(sat_to_statement_over(&phi.matrix, nv, &|v| 2 + v)?);
    body.push(assign(nv, x, &[(x, 1)], 1)?);
    let vars = ["x".to_string(), "x'".to_string()]
        .into_iter()
        .chain(names("x", n))
        .chain(names("y", m))
        .collect();
    Program::new(
        vars,
        vec!["st".into(), "1".into(), "2".into()],
        0,
        vec![
            Edge { from: 0, stmt: assign(nv, x, &[], 0)?, to: 1 },
            Edge { from: 1, stmt: Statement::seq(body)?, to: 1 },
            Edge { from: 1, stmt: guard(nv, &[(x, -1)], -(1i64 << n))?, to: 2 },
        ],
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::statement_positions;

    #[test]
    fn exponential_program_shape() {
        let p = make_exponential_program(3).unwrap();
        assert_eq!(p.num_vars(), 5);
        assert_eq!(statement_positions(&p.edges[1].stmt).len(), 3);
        let p1 = make_exponential_program(1).unwrap();
        assert_eq!(statement_positions(&p1.edges[1].stmt).len(), 1);
    }

    #[test]
    fn truth_tables() {
        let taut = PropFormula::Or(vec![PropFormula::pos(0), PropFormula::neg(0)]);
        let contra = PropFormula::And(vec![PropFormula::pos(0), PropFormula::neg(0)]);
        assert!(truth_table_sat(&taut, 1));
        assert!(!truth_table_sat(&contra, 1));
        let fe = ForallExists {
            universal: 1,
            existential: 1,
            matrix: PropFormula::Or(vec![PropFormula::pos(0), PropFormula::pos(1)]),
        };
        assert!(fe.holds());
        let no = ForallExists {
            universal: 1,
            existential: 0,
            matrix: PropFormula::pos(0),
        };
        assert!(!no.holds());
    }

    #[test]
    fn forall_exists_program_uses_all_variables() {
        let fe = ForallExists {
            universal: 2,
            existential: 1,
            matrix: PropFormula::Or(vec![PropFormula::pos(0), PropFormula::pos(2)]),
        };
        let p = make_forall_exists_program(&fe).unwrap();
        assert_eq!(p.var_names, vec!["x", "x'", "x1", "x2", "y1"]);
        assert_eq!(p.edges.len(), 3);
    }
}
