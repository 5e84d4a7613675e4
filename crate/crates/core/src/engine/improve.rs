use crate::arith::ExtRational;
use crate::error::{Error, Result};
use crate::smt::{encode_query, strategy_from_model, SatResult, SmtBackend};
use crate::transform::StatementStrategy;

use super::equations::{Atom, EquationSystem, Selection, SysStrategy, VarAssignment};

/// One equation changing its selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Switch {
    pub var: usize,
    pub from: Selection,
    pub to: Selection,
    /// A value of the new selection at the current `ρ` that exceeds `ρ(x)`:
    /// the constant itself, or the objective value of the solver's model.
    pub witness: ExtRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Improvement {
    Improved { strategy: SysStrategy, switches: Vec<Switch> },
    NoImprovement,
}

/// Switches every equation whose right-hand side can exceed its current
/// value to the lowest-index disjunct that does so.
pub fn improve(
    es: &EquationSystem,
    sigma: &SysStrategy,
    rho: &VarAssignment,
    backend: &mut dyn SmtBackend,
) -> Result<Improvement> {
    let mut next = sigma.clone();
    let mut switches = Vec::new();
    for (x, atoms) in es.equations.iter().enumerate() {
        let current = &rho.0[x];
        if current.is_pos_inf() {
            continue;
        }
        for (k, atom) in atoms.iter().enumerate() {
            if let Some((sel, witness)) = try_atom(es, k, atom, rho, current, backend)? {
                if sel == sigma.0[x] {
                    return Err(Error::Internal(format!(
                        "{} improves under its current selection",
                        es.var_label(x)
                    )));
                }
                switches.push(Switch {
                    var: x,
                    from: sigma.0[x].clone(),
                    to: sel.clone(),
                    witness,
                });
                next.0[x] = sel;
                break;
            }
        }
    }
    if switches.is_empty() {
        Ok(Improvement::NoImprovement)
    } else {
        Ok(Improvement::Improved {
            strategy: next,
            switches,
        })
    }
}

fn try_atom(
    es: &EquationSystem,
    k: usize,
    atom: &Atom,
    rho: &VarAssignment,
    threshold: &ExtRational,
    backend: &mut dyn SmtBackend,
) -> Result<Option<(Selection, ExtRational)>> {
    match atom {
        Atom::Const(q) => Ok((q > threshold).then(|| {
            (
                Selection {
                    atom: k,
                    path: StatementStrategy::new(),
                },
                q.clone(),
            )
        })),
        Atom::Transfer { source, edge, row } => {
            let d = rho.block(es, *source);
            if d.has_neg_inf() {
                return Ok(None);
            }
            let s = es.statement(*edge);
            let (f, ctx) = encode_query(s, &d, *row, threshold, &es.template)?;
            match backend.check(&f)? {
                SatResult::Unsat => Ok(None),
                SatResult::Sat(m) => {
                    let witness = ctx
                        .value_var
                        .map(|v| ExtRational::Fin(m.real(v)))
                        .unwrap_or(ExtRational::PosInf);
                    Ok(Some((
                        Selection {
                            atom: k,
                            path: strategy_from_model(s, &ctx, &m),
                        },
                        witness,
                    )))
                }
            }
        }
    }
}
