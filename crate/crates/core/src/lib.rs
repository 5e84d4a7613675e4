pub mod arith;
pub mod domain;
pub mod error;
pub mod lp;
pub mod program;
pub mod transform;
pub mod smt;
pub mod engine;
pub mod oracle;
pub mod cli;
