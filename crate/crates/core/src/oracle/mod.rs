//! Independent reference implementations used to cross-check the engine.
//!
//! Nothing here shares code with the strategy-improvement loop beyond the
//! LP solver and path expansion: transformers are computed per path, fixed
//! points by bounded Kleene iteration, and reachable states by explicit
//! enumeration.

pub mod brute;
pub mod concrete;
pub mod generators;
pub mod kleene;

pub use brute::{brute_force_transformer, brute_force_transformer_with_limit};
pub use concrete::{concrete_enumerate, concrete_post, ConcreteStateSet, State};
pub use generators::{
    make_exponential_program, make_forall_exists_program, sat_to_statement, sat_to_statement_over,
    truth_table_sat, ForallExists, PropFormula,
};
pub use kleene::{kleene_bounded, kleene_step, KleeneResult};
