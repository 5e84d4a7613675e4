use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{ExtRational, Rational};
use crate::domain::{AbstractValue, Template};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpProblem};
use crate::program::{NodeId, Program, Statement};
use crate::transform::{path_count, StatementStrategy};

/// The unknown `x_{v,i}`: bound of template row `i` at node `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EqVar {
    pub node: NodeId,
    pub row: usize,
}

impl fmt::Display for EqVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x_{{{},{}}}", self.node, self.row + 1)
    }
}

/// One disjunct of an equation's right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Const(ExtRational),
    /// Row `row` of the abstract effect of edge `edge` applied to the bounds
    /// at `source`.
    Transfer { source: NodeId, edge: usize, row: usize },
}

/// Equations `x_{v,i} = e_1 ∨ … ∨ e_k` for every node and template row.
/// Disjunct 0 is always `Const(-inf)`.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub program: Program,
    pub template: Template,
    /// Abstraction of the initial states.
    pub initial: AbstractValue,
    pub equations: Vec<Vec<Atom>>,
}

impl EquationSystem {
    pub fn num_vars(&self) -> usize {
        self.equations.len()
    }

    pub fn rows(&self) -> usize {
        self.template.len()
    }

    pub fn index(&self, x: EqVar) -> usize {
        x.node * self.rows() + x.row
    }

    pub fn var(&self, index: usize) -> EqVar {
        EqVar {
            node: index / self.rows(),
            row: index % self.rows(),
        }
    }

    /// Indices of the variables `x_{v,1..m}`.
    pub fn block(&self, node: NodeId) -> std::ops::Range<usize> {
        let m = self.rows();
        node * m..(node + 1) * m
    }

    pub fn statement(&self, edge: usize) -> &Statement {
        &self.program.edges[edge].stmt
    }

    /// Printable name `x_{node,i}` using node names.
    pub fn var_label(&self, index: usize) -> String {
        let x = self.var(index);
        format!("x_{{{},{}}}", self.program.node_names[x.node], x.row + 1)
    }

    /// Number of ∨-strategies of the system: the product over equations of
    /// the number of (disjunct, path) selections.
    pub fn strategy_count(&self) -> BigUint {
        self.equations
            .iter()
            .map(|atoms| {
                atoms
                    .iter()
                    .map(|a| match a {
                        Atom::Const(_) => BigUint::from(1u32),
                        Atom::Transfer { edge, .. } => path_count(self.statement(*edge)),
                    })
                    .sum::<BigUint>()
            })
            .product()
    }

    pub fn describe_atom(&self, a: &Atom) -> String {
        match a {
            Atom::Const(q) => format!("const {q}"),
            Atom::Transfer { source, edge, row } => format!(
                "row {} of edge {} from {}",
                row + 1,
                edge,
                self.program.node_names[*source]
            ),
        }
    }
}

/// Best template bounds of the initial states: `sup T_i x` subject to the
/// initial constraints, by LP.
pub fn abstract_initial(p: &Program, tpl: &Template) -> Result<AbstractValue> {
    if tpl.num_vars() != p.num_vars() {
        return Err(Error::Dimension(format!(
            "template over {} variables for a program with {}",
            tpl.num_vars(),
            p.num_vars()
        )));
    }
    let mut out = Vec::with_capacity(tpl.len());
    for i in 0..tpl.len() {
        let row = tpl.row(i);
        let bound = if p.initial.a.rows() == 0 {
            if row.iter().all(Zero::is_zero) {
                ExtRational::Fin(Rational::zero())
            } else {
                ExtRational::PosInf
            }
        } else {
            let lp = LpProblem::new(p.initial.a.clone(), p.initial.b.clone(), row.to_vec())?;
            lp_solve(&lp)?.value()
        };
        out.push(bound);
    }
    Ok(AbstractValue(out))
}

/// Builds `E(G)` with the extra `-inf` disjunct on every equation.
pub fn build_equations(p: &Program, tpl: &Template) -> Result<EquationSystem> {
    p.validate()?;
    let initial = abstract_initial(p, tpl)?;
    let m = tpl.len();
    let mut equations = Vec::with_capacity(p.num_nodes() * m);
    for v in 0..p.num_nodes() {
        for i in 0..m {
            let mut atoms = vec![Atom::Const(ExtRational::NegInf)];
            if v == p.start {
                atoms.push(Atom::Const(initial.0[i].clone()));
            }
            for (k, e) in p.incoming(v) {
                atoms.push(Atom::Transfer {
                    source: e.from,
                    edge: k,
                    row: i,
                });
            }
            equations.push(atoms);
        }
    }
    Ok(EquationSystem {
        program: p.clone(),
        template: tpl.clone(),
        initial,
        equations,
    })
}

/// The selection for one equation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    pub atom: usize,
    /// Path through the transfer's statement; empty for constants.
    pub path: StatementStrategy,
}

/// A ∨-strategy for the whole system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SysStrategy(pub Vec<Selection>);

/// `ρ : X -> Q ∪ {±inf}`, indexed like the equations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarAssignment(pub Vec<ExtRational>);

impl VarAssignment {
    pub fn bottom(n: usize) -> Self {
        VarAssignment(vec![ExtRational::NegInf; n])
    }

    pub fn get(&self, i: usize) -> &ExtRational {
        &self.0[i]
    }

    pub fn le(&self, other: &VarAssignment) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Bounds at one node.
    pub fn block(&self, es: &EquationSystem, node: NodeId) -> AbstractValue {
        AbstractValue(self.0[es.block(node)].to_vec())
    }

    /// Per-node abstract values.
    pub fn per_node(&self, es: &EquationSystem) -> Vec<AbstractValue> {
        (0..es.program.num_nodes()).map(|v| self.block(es, v)).collect()
    }
}

/// The starting point: every equation selects `-inf`, and `ρ ≡ -inf`.
pub fn init(es: &EquationSystem) -> (SysStrategy, VarAssignment) {
    let sel = Selection {
        atom: 0,
        path: StatementStrategy::new(),
    };
    (SysStrategy(vec![sel; es.num_vars()]), VarAssignment::bottom(es.num_vars()))
}
