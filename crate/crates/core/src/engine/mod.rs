//! Least solutions of abstract semantic equations by strategy improvement.
//!
//! [`solve`] starts from the strategy selecting `-inf` everywhere and
//! alternates two steps until no equation can improve: [`improve`] asks the
//! SMT backend for disjuncts and paths that beat the current values, and
//! [`evaluate`] computes the least solution above the current values for the
//! new strategy with linear programming.

pub mod equations;
pub mod evaluate;
pub mod improve;
pub mod post;

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::arith::ExtRational;
use crate::domain::{AbstractValue, Template};
use crate::error::Result;
use crate::program::Program;
use crate::smt::{SmtBackend, SolverStats};

pub use equations::{
    abstract_initial, build_equations, init, Atom, EqVar, EquationSystem, Selection, SysStrategy,
    VarAssignment,
};
pub use evaluate::{evaluate, Evaluation, LpRecord};
pub use improve::{improve, Improvement, Switch};
pub use post::{abstract_post, abstract_post_row, sequential_row_value, sequential_transformer};

#[derive(Clone, Debug, Default)]
pub struct Limits {
    pub max_steps: Option<usize>,
    pub timeout: Option<Duration>,
}

/// A switch as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub var: String,
    pub atom: usize,
    pub description: String,
    pub path: String,
    pub witness: ExtRational,
}

/// One improvement step followed by its evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub switches: Vec<SwitchRecord>,
    pub rho: Vec<ExtRational>,
    pub smt_queries: u64,
    pub lp_count: usize,
    pub promoted: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("trace steps serialize") + "\n")
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub system: EquationSystem,
    pub strategy: SysStrategy,
    pub rho: VarAssignment,
    pub invariants: Vec<AbstractValue>,
    pub trace: IterationTrace,
    /// Number of improvement steps taken.
    pub steps: usize,
    /// A limit stopped the iteration; `rho` is then only a lower bound.
    pub hit_limits: bool,
    /// Some bound reached `+inf` through a transfer.
    pub has_top_components: bool,
    pub solver: SolverStats,
    pub lp_calls: usize,
    pub elapsed: Duration,
}

impl AnalysisResult {
    /// Upper bound on the number of improvement steps: strategies plus
    /// variables.
    pub fn step_bound(&self) -> BigUint {
        self.system.strategy_count() + BigUint::from(self.system.num_vars())
    }
}

/// Computes the abstract semantics of `p` over `tpl`.
pub fn solve(p: &Program, tpl: &Template, backend: &mut dyn SmtBackend, limits: &Limits) -> Result<AnalysisResult> {
    let started = Instant::now();
    let es = build_equations(p, tpl)?;
    let (mut sigma, mut rho) = init(&es);
    let mut trace = IterationTrace::default();
    let mut steps = 0;
    let mut lp_calls = 0;
    let mut hit_limits = false;
    loop {
        if limits.max_steps.is_some_and(|m| steps >= m)
            || limits.timeout.is_some_and(|t| started.elapsed() >= t)
        {
            // Still decide whether the current values are final.
            hit_limits = matches!(improve(&es, &sigma, &rho, backend)?, Improvement::Improved { .. });
            break;
        }
        let before = backend.stats().queries;
        let (next, switches) = match improve(&es, &sigma, &rho, backend)? {
            Improvement::NoImprovement => break,
            Improvement::Improved { strategy, switches } => (strategy, switches),
        };
        let eval = evaluate(&es, &next, &rho)?;
        steps += 1;
        lp_calls += eval.lps.len();
        trace.steps.push(TraceStep {
            step: steps,
            switches: switches
                .iter()
                .map(|sw| SwitchRecord {
                    var: es.var_label(sw.var),
                    atom: sw.to.atom,
                    description: es.describe_atom(&es.equations[sw.var][sw.to.atom]),
                    path: sw.to.path.to_string(),
                    witness: sw.witness.clone(),
                })
                .collect(),
            rho: eval.rho.0.clone(),
            smt_queries: backend.stats().queries - before,
            lp_count: eval.lps.len(),
            promoted: eval.promoted.iter().map(|&x| es.var_label(x)).collect(),
        });
        sigma = next;
        rho = eval.rho;
    }
    let has_top_components = (0..es.num_vars()).any(|x| {
        rho.0[x].is_pos_inf() && matches!(es.equations[x][sigma.0[x].atom], Atom::Transfer { .. })
    });
    Ok(AnalysisResult {
        invariants: rho.per_node(&es),
        system: es,
        strategy: sigma,
        rho,
        trace,
        steps,
        hit_limits,
        has_top_components,
        solver: backend.stats(),
        lp_calls,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ints, Matrix};
    use crate::program::{Edge, Statement};
    use crate::smt::InternalSolver;

    fn guard(c: &[i64], b: i64) -> Statement {
        Statement::guard_row(ints(c), int(b)).unwrap()
    }

    fn set(n: usize, var: usize, c: &[i64], k: i64) -> Statement {
        Statement::assign_var(n, var, &ints(c), int(k)).unwrap()
    }

    fn running_example() -> Program {
        let s1 = Statement::seq(vec![guard(&[0, 1], -1), set(2, 0, &[-2, 0], 0)]).unwrap();
        let s2 = Statement::seq(vec![guard(&[0, -1], 0), set(2, 0, &[-1, 0], 1)]).unwrap();
        let body = Statement::seq(vec![
            guard(&[1, 0], 1000),
            set(2, 1, &[-1, 0], 0),
            Statement::choice(vec![s1, s2]).unwrap(),
        ])
        .unwrap();
        Program::new(
            vec!["x1".into(), "x2".into()],
            vec!["st".into(), "1".into()],
            0,
            vec![
                Edge { from: 0, stmt: set(2, 0, &[0, 0], 0), to: 1 },
                Edge { from: 1, stmt: body, to: 1 },
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn running_example_reaches_2001_2000() {
        let tpl = Template::from_matrix(Matrix::from_ints(2, &[&[1, 0], &[-1, 0]]).unwrap(), &[]).unwrap();
        let r = solve(&running_example(), &tpl, &mut InternalSolver::new(), &Limits::default()).unwrap();
        assert_eq!(r.invariants[1], AbstractValue(vec![ExtRational::from_int(2001), ExtRational::from_int(2000)]));
        assert!(!r.hit_limits);
        assert!(!r.has_top_components);
        assert!(BigUint::from(r.steps) <= r.step_bound());
    }

    #[test]
    fn counting_loop_and_divergent_loop() {
        let names = vec!["x".to_string()];
        let nodes = vec!["st".to_string(), "h".to_string()];
        let mk = |body: Statement| {
            Program::new(
                names.clone(),
                nodes.clone(),
                0,
                vec![
                    Edge { from: 0, stmt: set(1, 0, &[0], 0), to: 1 },
                    Edge { from: 1, stmt: body, to: 1 },
                ],
                None,
            )
            .unwrap()
        };
        let tpl = Template::from_matrix(Matrix::from_ints(1, &[&[-1], &[1]]).unwrap(), &names).unwrap();
        let bounded = mk(Statement::seq(vec![guard(&[1], 3), set(1, 0, &[1], 1)]).unwrap());
        let r = solve(&bounded, &tpl, &mut InternalSolver::new(), &Limits::default()).unwrap();
        assert_eq!(r.invariants[1], AbstractValue(vec![ExtRational::from_int(0), ExtRational::from_int(4)]));
        let divergent = mk(set(1, 0, &[1], 1));
        let r = solve(&divergent, &tpl, &mut InternalSolver::new(), &Limits::default()).unwrap();
        assert_eq!(r.invariants[1], AbstractValue(vec![ExtRational::from_int(0), ExtRational::PosInf]));
        assert!(r.has_top_components);
    }

    #[test]
    fn step_limit_reports_partial_result() {
        let tpl = Template::from_matrix(Matrix::from_ints(2, &[&[1, 0], &[-1, 0]]).unwrap(), &[]).unwrap();
        let limits = Limits { max_steps: Some(1), timeout: None };
        let r = solve(&running_example(), &tpl, &mut InternalSolver::new(), &limits).unwrap();
        assert!(r.hit_limits);
        assert_eq!(r.steps, 1);
    }
}
