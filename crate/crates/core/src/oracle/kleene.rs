//! Plain Kleene iteration from bottom, as a lower-bound reference.

use std::collections::HashMap;

use crate::arith::ExtRational;
use crate::domain::AbstractValue;
use crate::engine::{Atom, EquationSystem, VarAssignment};
use crate::error::Result;

use super::brute::brute_force_transformer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KleeneResult {
    pub rho: VarAssignment,
    /// Rounds actually performed.
    pub iterations: usize,
    /// The last round changed nothing, so `rho` is the least solution.
    pub stabilized: bool,
}

/// One application of the equations to `rho`.
pub fn kleene_step(es: &EquationSystem, rho: &VarAssignment) -> Result<VarAssignment> {
    let mut posts: HashMap<usize, AbstractValue> = HashMap::new();
    let mut out = Vec::with_capacity(es.num_vars());
    for atoms in &es.equations {
        let mut best = ExtRational::NegInf;
        for atom in atoms {
            let v = match atom {
                Atom::Const(q) => q.clone(),
                Atom::Transfer { source, edge, row } => {
                    if !posts.contains_key(edge) {
                        let d = rho.block(es, *source);
                        posts.insert(*edge, brute_force_transformer(es.statement(*edge), &d, &es.template)?);
                    }
                    posts[edge].0[*row].clone()
                }
            };
            if v > best {
                best = v;
            }
        }
        out.push(best);
    }
    Ok(VarAssignment(out))
}

/// Up to `k` rounds of Kleene iteration from the all-bottom assignment.
pub fn kleene_bounded(es: &EquationSystem, k: usize) -> Result<KleeneResult> {
    let mut rho = VarAssignment::bottom(es.num_vars());
    for i in 0..k {
        let next = kleene_step(es, &rho)?;
        if next == rho {
            return Ok(KleeneResult {
                rho,
                iterations: i + 1,
                stabilized: true,
            });
        }
        rho = next;
    }
    Ok(KleeneResult {
        rho,
        iterations: k,
        stabilized: false,
    })
}
