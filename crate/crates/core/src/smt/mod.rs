//! Satisfiability modulo linear real arithmetic.

pub mod encode;
pub mod formula;
pub mod internal;
pub mod smtlib2;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use encode::{encode_query, encode_statement, strategy_from_model, EncodingContext};
pub use formula::{BoolVar, LinExpr, LraFormula, Model, RealVar};
pub use internal::InternalSolver;
pub use smtlib2::SmtLib2Solver;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub queries: u64,
    pub sat: u64,
    pub unsat: u64,
    /// LP feasibility checks issued by the internal solver.
    pub lp_calls: u64,
    /// Disjunction branches explored by the internal solver.
    pub branches: u64,
}

/// A decision procedure for [`LraFormula`].
pub trait SmtBackend {
    fn name(&self) -> String;
    fn check(&mut self, f: &LraFormula) -> Result<SatResult>;
    fn stats(&self) -> SolverStats;
}

impl<B: SmtBackend + ?Sized> SmtBackend for Box<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn check(&mut self, f: &LraFormula) -> Result<SatResult> {
        (**self).check(f)
    }

    fn stats(&self) -> SolverStats {
        (**self).stats()
    }
}

/// Decides `f` with a fresh internal solver.
pub fn smt_solve(f: &LraFormula) -> Result<SatResult> {
    InternalSolver::new().check(f)
}
