//! Breadth-first exploration of concrete reachable states.

use std::collections::{BTreeSet, VecDeque};

use crate::arith::{dot, int, vec_add, Rational};
use crate::error::{Error, Result};
use crate::program::{Program, Statement};

pub type State = Vec<Rational>;

/// Reachable states per node, possibly cut short.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteStateSet {
    pub states: Vec<BTreeSet<State>>,
    /// Exploration stopped at the state budget; the sets are then an
    /// under-approximation.
    pub truncated: bool,
}

impl ConcreteStateSet {
    pub fn total(&self) -> usize {
        self.states.iter().map(BTreeSet::len).sum()
    }
}

/// Every final state of running `s` from `x`.
pub fn concrete_post(s: &Statement, x: &State) -> Vec<State> {
    match s {
        Statement::Guard { a, b } => {
            if a.row_iter().zip(b).all(|(row, bound)| dot(row, x) <= *bound) {
                vec![x.clone()]
            } else {
                Vec::new()
            }
        }
        Statement::Assign { a, b } => vec![vec_add(&a.mul_vec(x).expect("arity checked"), b)],
        Statement::Choice(items) => {
            let mut out: Vec<State> = items.iter().flat_map(|i| concrete_post(i, x)).collect();
            out.sort();
            out.dedup();
            out
        }
        Statement::Seq(items) => {
            let mut cur = vec![x.clone()];
            for item in items {
                let mut next: Vec<State> = cur.iter().flat_map(|y| concrete_post(item, y)).collect();
                next.sort();
                next.dedup();
                cur = next;
                if cur.is_empty() {
                    break;
                }
            }
            cur
        }
    }
}

/// Explores from every integer point of the box `bounds` (one inclusive
/// range per variable) that satisfies the initial constraints.
pub fn concrete_enumerate(p: &Program, bounds: &[(i64, i64)], max_states: usize) -> Result<ConcreteStateSet> {
    if bounds.len() != p.num_vars() {
        return Err(Error::Dimension(format!(
            "{} ranges for {} variables",
            bounds.len(),
            p.num_vars()
        )));
    }
    let mut states: Vec<BTreeSet<State>> = vec![BTreeSet::new(); p.num_nodes()];
    let mut queue: VecDeque<(usize, State)> = VecDeque::new();
    let mut truncated = false;
    let mut total = 0usize;
    let mut point: Vec<i64> = bounds.iter().map(|r| r.0).collect();
    if bounds.iter().all(|(lo, hi)| lo <= hi) {
        'outer: loop {
            let x: State = point.iter().map(|&v| int(v)).collect();
            if p.initial.contains(&x) {
                if total >= max_states {
                    truncated = true;
                    break;
                }
                states[p.start].insert(x.clone());
                queue.push_back((p.start, x));
                total += 1;
            }
            for k in 0..point.len() {
                if point[k] < bounds[k].1 {
                    point[k] += 1;
                    continue 'outer;
                }
                point[k] = bounds[k].0;
            }
            break;
        }
    }
    while let Some((u, x)) = queue.pop_front() {
        if truncated {
            break;
        }
        for (_, e) in p.outgoing(u) {
            for y in concrete_post(&e.stmt, &x) {
                if states[e.to].contains(&y) {
                    continue;
                }
                if total >= max_states {
                    truncated = true;
                    break;
                }
                states[e.to].insert(y.clone());
                queue.push_back((e.to, y));
                total += 1;
            }
        }
    }
    Ok(ConcreteStateSet { states, truncated })
}
