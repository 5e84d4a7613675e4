use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arith::ExtRational;
use crate::engine::AnalysisResult;
use crate::error::{Error, Result};
use crate::smt::SolverStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowBound {
    pub label: String,
    pub bound: ExtRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: String,
    pub bounds: Vec<RowBound>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportStats {
    pub solver: String,
    pub smt: SolverStats,
    pub lp_calls: usize,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFlags {
    pub has_top_components: bool,
    pub hit_limits: bool,
}

/// The outcome of `analyze`, in a fixed and versioned JSON schema.
/// Bounds are exact: integers, `p/q`, `inf` or `-inf`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub variables: Vec<String>,
    pub nodes: Vec<NodeReport>,
    pub iterations: usize,
    pub stats: ReportStats,
    pub flags: ReportFlags,
}

impl AnalysisReport {
    pub fn from_result(r: &AnalysisResult, solver: &str) -> Self {
        let p = &r.system.program;
        let labels = r.system.template.labels();
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            variables: p.var_names.clone(),
            nodes: p
                .node_names
                .iter()
                .zip(&r.invariants)
                .map(|(node, d)| NodeReport {
                    node: node.clone(),
                    bounds: labels
                        .iter()
                        .zip(&d.0)
                        .map(|(label, bound)| RowBound {
                            label: label.clone(),
                            bound: bound.clone(),
                        })
                        .collect(),
                })
                .collect(),
            iterations: r.steps,
            stats: ReportStats {
                solver: solver.to_string(),
                smt: r.solver.clone(),
                lp_calls: r.lp_calls,
                elapsed_ms: r.elapsed.as_millis() as u64,
            },
            flags: ReportFlags {
                has_top_components: r.has_top_components,
                hit_limits: r.hit_limits,
            },
        }
    }

    pub fn node(&self, name: &str) -> Option<&NodeReport> {
        self.nodes.iter().find(|n| n.node == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(out, "node {}:", n.node);
            if n.bounds.iter().any(|b| b.bound.is_neg_inf()) {
                let _ = writeln!(out, "  unreachable");
            }
            for b in &n.bounds {
                let _ = writeln!(out, "  {} <= {}", b.label, b.bound);
            }
        }
        let _ = writeln!(out, "iterations: {}", self.iterations);
        let s = &self.stats;
        let _ = writeln!(
            out,
            "solver: {} ({} queries, {} sat, {} unsat), {} evaluation LPs, {} ms",
            s.solver, s.smt.queries, s.smt.sat, s.smt.unsat, s.lp_calls, s.elapsed_ms
        );
        let _ = writeln!(
            out,
            "has_top_components: {}\nhit_limits: {}",
            self.flags.has_top_components, self.flags.hit_limits
        );
        out
    }
}
