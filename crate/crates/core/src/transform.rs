//! Statement and graph rewrites.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{vec_add, vec_sub, Matrix, Rational};
use crate::error::{Error, Result};
use crate::program::{statement_positions, Edge, NodeId, Position, Program, Statement};

/// Default cap on the number of paths `path_expand` will materialize.
pub const DEFAULT_PATH_LIMIT: u64 = 1 << 20;

/// Selects one child for every choice position of a statement.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatementStrategy {
    pub choices: BTreeMap<Position, usize>,
}

impl StatementStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, pos: Vec<usize>, child: usize) -> Self {
        self.choices.insert(Position(pos), child);
        self
    }

    pub fn get(&self, pos: &Position) -> Option<usize> {
        self.choices.get(pos).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// The strategy selecting child 0 everywhere.
    pub fn first_choices(s: &Statement) -> Self {
        StatementStrategy {
            choices: statement_positions(s).into_iter().map(|p| (p, 0)).collect(),
        }
    }
}

impl std::fmt::Display for StatementStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (k, (p, c)) in self.choices.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}->{c}")?;
        }
        f.write_str("}")
    }
}

/// Replaces every choice by the child selected in `sigma`.
pub fn apply_strategy(s: &Statement, sigma: &StatementStrategy) -> Result<Statement> {
    let mut path = Vec::new();
    apply_at(s, sigma, &mut path)
}

fn apply_at(s: &Statement, sigma: &StatementStrategy, path: &mut Vec<usize>) -> Result<Statement> {
    match s {
        Statement::Assign { .. } | Statement::Guard { .. } => Ok(s.clone()),
        Statement::Seq(items) => {
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                path.push(i);
                out.push(apply_at(item, sigma, path)?);
                path.pop();
            }
            Statement::seq(out)
        }
        Statement::Choice(items) => {
            let pos = Position(path.clone());
            let k = sigma
                .get(&pos)
                .ok_or_else(|| Error::InvalidStrategy(format!("no choice for position {pos}")))?;
            if k >= items.len() {
                return Err(Error::InvalidStrategy(format!(
                    "position {pos} selects child {k} of {}",
                    items.len()
                )));
            }
            path.push(k);
            let r = apply_at(&items[k], sigma, path);
            path.pop();
            r
        }
    }
}

/// Number of sequential paths through `s` (its number of strategies).
pub fn path_count(s: &Statement) -> BigUint {
    match s {
        Statement::Assign { .. } | Statement::Guard { .. } => BigUint::one(),
        Statement::Seq(items) => items.iter().map(path_count).product(),
        Statement::Choice(items) => items.iter().map(path_count).sum(),
    }
}

/// All sequential paths of `s`, each a list of elementary statements, in
/// leftmost-outermost order: earlier sequence items vary slowest.
pub fn sequential_paths(s: &Statement, limit: u64) -> Result<Vec<Vec<Statement>>> {
    let count = path_count(s);
    if count > BigUint::from(limit) {
        return Err(Error::PathExplosion {
            count: count.to_string(),
            limit,
        });
    }
    Ok(paths_of(s))
}

fn paths_of(s: &Statement) -> Vec<Vec<Statement>> {
    match s {
        Statement::Assign { .. } | Statement::Guard { .. } => vec![vec![s.clone()]],
        Statement::Choice(items) => items.iter().flat_map(paths_of).collect(),
        Statement::Seq(items) => {
            let mut acc: Vec<Vec<Statement>> = vec![Vec::new()];
            for item in items {
                let tails = paths_of(item);
                let mut next = Vec::with_capacity(acc.len() * tails.len());
                for head in &acc {
                    for tail in &tails {
                        let mut p = head.clone();
                        p.extend(tail.iter().cloned());
                        next.push(p);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// The merge-simple path expansion `[s]`: a choice with one sequential
/// branch per strategy of `s`.
pub fn path_expand(s: &Statement) -> Result<Statement> {
    path_expand_with_limit(s, DEFAULT_PATH_LIMIT)
}

pub fn path_expand_with_limit(s: &Statement, limit: u64) -> Result<Statement> {
    let branches = sequential_paths(s, limit)?
        .into_iter()
        .map(Statement::seq)
        .collect::<Result<Vec<_>>>()?;
    Statement::choice(branches)
}

/// `G x <= g; x := M x + c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequentialNormalForm {
    pub g: Matrix,
    pub g_bound: Vec<Rational>,
    pub m: Matrix,
    pub c: Vec<Rational>,
}

impl SequentialNormalForm {
    pub fn identity(n: usize) -> Self {
        SequentialNormalForm {
            g: Matrix::zeros(0, n),
            g_bound: Vec::new(),
            m: Matrix::identity(n),
            c: vec![Rational::zero(); n],
        }
    }

    /// Runs a concrete state through the normal form.
    pub fn apply(&self, x: &[Rational]) -> Result<Option<Vec<Rational>>> {
        let gx = self.g.mul_vec(x)?;
        if gx.iter().zip(&self.g_bound).any(|(l, r)| l > r) {
            return Ok(None);
        }
        Ok(Some(vec_add(&self.m.mul_vec(x)?, &self.c)))
    }
}

/// Folds a sequential statement into a single guard followed by a single
/// affine assignment.
pub fn normalize_sequential(s: &Statement) -> Result<SequentialNormalForm> {
    let n = s
        .arity()
        .ok_or_else(|| Error::Internal("statement without elementary parts".into()))?;
    let mut nf = SequentialNormalForm::identity(n);
    fold_into(s, &mut nf)?;
    Ok(nf)
}

fn fold_into(s: &Statement, nf: &mut SequentialNormalForm) -> Result<()> {
    match s {
        Statement::Choice(_) => Err(Error::NotSequential),
        Statement::Seq(items) => items.iter().try_for_each(|i| fold_into(i, nf)),
        Statement::Assign { a, b } => {
            nf.m = a.mul(&nf.m)?;
            nf.c = vec_add(&a.mul_vec(&nf.c)?, b);
            Ok(())
        }
        Statement::Guard { a, b } => {
            if a.rows() == 0 {
                return Ok(());
            }
            let rows = a.mul(&nf.m)?;
            let bounds = vec_sub(b, &a.mul_vec(&nf.c)?);
            nf.g = nf.g.vstack(&rows)?;
            nf.g_bound.extend(bounds);
            Ok(())
        }
    }
}

fn check_cut(p: &Program, cut: &BTreeSet<NodeId>) -> Result<()> {
    match cut.iter().find(|&&v| v >= p.num_nodes()) {
        Some(v) => Err(Error::InvalidProgram(format!("cut-set names unknown node {v}"))),
        None => Ok(()),
    }
}

/// Some cycle that survives removing `cut` and the start node.
pub fn find_unbroken_cycle(p: &Program, cut: &BTreeSet<NodeId>) -> Option<Vec<NodeId>> {
    let removed = |v: NodeId| v == p.start || cut.contains(&v);
    let n = p.num_nodes();
    let mut succ: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for e in &p.edges {
        if !removed(e.from) && !removed(e.to) {
            succ[e.from].push(e.to);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<NodeId> = Vec::new();
    fn dfs(
        v: NodeId,
        succ: &[Vec<NodeId>],
        state: &mut [u8],
        stack: &mut Vec<NodeId>,
    ) -> Option<Vec<NodeId>> {
        state[v] = 1;
        stack.push(v);
        for &w in &succ[v] {
            if state[w] == 1 {
                let start = stack.iter().position(|&x| x == w).unwrap();
                return Some(stack[start..].to_vec());
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, succ, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }
    (0..n)
        .filter(|&v| !removed(v))
        .find_map(|v| if state[v] == 0 { dfs(v, &succ, &mut state, &mut stack) } else { None })
}

/// True iff every cycle passes through the cut-set or the start node.
pub fn verify_cutset(p: &Program, cut: &BTreeSet<NodeId>) -> bool {
    cut.iter().all(|&v| v < p.num_nodes()) && find_unbroken_cycle(p, cut).is_none()
}

/// Rewrites the program so that only the start node and the cut-set remain.
/// Each retained pair `(u, v)` gets one edge whose statement describes all
/// paths from `u` to `v` through removed nodes.
pub fn cutset_rewrite(p: &Program, cut: &BTreeSet<NodeId>) -> Result<Program> {
    check_cut(p, cut)?;
    if let Some(cycle) = find_unbroken_cycle(p, cut) {
        return Err(Error::InvalidCutset(cycle.into_iter().map(|v| p.node_names[v].clone()).collect()));
    }
    let mut retained: Vec<NodeId> = cut.iter().copied().collect();
    if !cut.contains(&p.start) {
        retained.push(p.start);
    }
    retained.sort_unstable();
    let is_retained: Vec<bool> = (0..p.num_nodes()).map(|v| retained.contains(&v)).collect();
    let mut rw = Regions {
        p,
        retained: &is_retained,
        memo: HashMap::new(),
    };
    let index: HashMap<NodeId, usize> = retained.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut edges = Vec::new();
    for &u in &retained {
        for &v in &retained {
            if let Some(stmt) = rw.region(u, v)? {
                edges.push(Edge {
                    from: index[&u],
                    stmt,
                    to: index[&v],
                });
            }
        }
    }
    Program::new(
        p.var_names.clone(),
        retained.iter().map(|&v| p.node_names[v].clone()).collect(),
        index[&p.start],
        edges,
        Some(p.initial.clone()),
    )
}

const SINK: usize = usize::MAX;

struct Regions<'a> {
    p: &'a Program,
    retained: &'a [bool],
    memo: HashMap<(NodeId, NodeId), Option<Statement>>,
}

impl Regions<'_> {
    /// Interior nodes (removed, not the target) that lie on some path from
    /// `src` to `target`.
    fn interior(&self, src: NodeId, target: NodeId) -> BTreeSet<NodeId> {
        let inner = |v: NodeId| !self.retained[v] && v != target && v != src;
        let mut fwd = BTreeSet::new();
        let mut work = vec![src];
        while let Some(u) = work.pop() {
            for (_, e) in self.p.outgoing(u) {
                if inner(e.to) && fwd.insert(e.to) {
                    work.push(e.to);
                }
            }
        }
        let mut bwd = BTreeSet::new();
        let mut work = vec![target];
        while let Some(v) = work.pop() {
            for (_, e) in self.p.incoming(v) {
                if inner(e.from) && bwd.insert(e.from) {
                    work.push(e.from);
                }
            }
        }
        fwd.intersection(&bwd).copied().collect()
    }

    fn successors(&self, x: NodeId, target: NodeId, inner: &BTreeSet<NodeId>) -> Vec<usize> {
        self.p
            .outgoing(x)
            .filter_map(|(_, e)| {
                if e.to == target {
                    Some(SINK)
                } else if inner.contains(&e.to) {
                    Some(e.to)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Immediate post-dominator of `src` with respect to reaching `target`.
    fn immediate_postdominator(&self, src: NodeId, target: NodeId, inner: &BTreeSet<NodeId>) -> usize {
        let mut pdom: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        pdom.insert(SINK, BTreeSet::from([SINK]));
        // Interior nodes form a DAG; resolve them in dependency order.
        let mut pending: Vec<NodeId> = inner.iter().copied().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|&x| {
                let succ = self.successors(x, target, inner);
                if succ.iter().all(|y| pdom.contains_key(y)) {
                    let mut set = intersect_all(succ.iter().map(|y| &pdom[y]));
                    set.insert(x);
                    pdom.insert(x, set);
                    false
                } else {
                    true
                }
            });
            debug_assert!(pending.len() < before, "interior of a region must be acyclic");
            if pending.len() == before {
                return SINK;
            }
        }
        let succ = self.successors(src, target, inner);
        let set = intersect_all(succ.iter().map(|y| &pdom[y]));
        // Post-dominator sets form a chain; the nearest one has the largest set.
        set.into_iter().max_by_key(|y| pdom[y].len()).unwrap_or(SINK)
    }

    fn region(&mut self, src: NodeId, target: NodeId) -> Result<Option<Statement>> {
        if let Some(r) = self.memo.get(&(src, target)) {
            return Ok(r.clone());
        }
        let inner = self.interior(src, target);
        let succ = self.successors(src, target, &inner);
        let result = if succ.is_empty() {
            None
        } else {
            let ipdom = self.immediate_postdominator(src, target, &inner);
            if ipdom != SINK {
                let head = self.region(src, ipdom)?.expect("post-dominator is reachable");
                let tail = self.region(ipdom, target)?.expect("target is reachable");
                Some(Statement::seq(vec![head, tail])?)
            } else {
                let mut branches = Vec::new();
                let edges: Vec<Edge> = self.p.outgoing(src).map(|(_, e)| e.clone()).collect();
                for e in edges {
                    if e.to == target {
                        branches.push(e.stmt);
                    } else if inner.contains(&e.to) {
                        let tail = self.region(e.to, target)?.expect("interior reaches target");
                        branches.push(Statement::seq(vec![e.stmt, tail])?);
                    }
                }
                Some(Statement::choice(branches)?)
            }
        };
        self.memo.insert((src, target), result.clone());
        Ok(result)
    }
}

fn intersect_all<'a>(mut sets: impl Iterator<Item = &'a BTreeSet<usize>>) -> BTreeSet<usize> {
    let Some(first) = sets.next() else {
        return BTreeSet::new();
    };
    let mut acc = first.clone();
    for s in sets {
        acc = acc.intersection(s).copied().collect();
    }
    acc
}

/// Converts a path count to `u64` when it fits.
pub fn path_count_u64(s: &Statement) -> Option<u64> {
    path_count(s).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ints};

    fn names() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    fn guard(c: &[i64], b: i64) -> Statement {
        Statement::guard_row(ints(c), int(b)).unwrap()
    }

    fn set(var: usize, c: &[i64], k: i64) -> Statement {
        Statement::assign_var(2, var, &ints(c), int(k)).unwrap()
    }

    /// st -> 1 -> 2 -> 3 -> {4,5} -> 1.
    fn running_graph() -> Program {
        let nodes = ["st", "1", "2", "3", "4", "5"].iter().map(|s| s.to_string()).collect();
        let e = |from, stmt, to| Edge { from, stmt, to };
        Program::new(
            names(),
            nodes,
            0,
            vec![
                e(0, set(0, &[0, 0], 0), 1),
                e(1, guard(&[1, 0], 1000), 2),
                e(2, set(1, &[-1, 0], 0), 3),
                e(3, guard(&[0, 1], -1), 4),
                e(4, set(0, &[-2, 0], 0), 1),
                e(3, guard(&[0, -1], 0), 5),
                e(5, set(0, &[-1, 0], 1), 1),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn cutset_rewrite_reproduces_running_example() {
        let p = running_graph();
        let cut = BTreeSet::from([1]);
        assert!(verify_cutset(&p, &cut));
        assert!(!verify_cutset(&p, &BTreeSet::new()));
        let q = cutset_rewrite(&p, &cut).unwrap();
        assert_eq!(q.node_names, vec!["st", "1"]);
        assert_eq!(q.edges.len(), 2);
        let loop_edge = q.edges.iter().find(|e| e.from == 1 && e.to == 1).unwrap();
        assert_eq!(
            loop_edge.stmt.display(&names()).to_string(),
            "guard x1 <= 1000; x2 := -x1; (guard x2 <= -1; x1 := -2*x1 | guard -x2 <= 0; x1 := -x1 + 1)"
        );
    }

    #[test]
    fn invalid_cutset_names_cycle() {
        let p = running_graph();
        match cutset_rewrite(&p, &BTreeSet::from([4])) {
            Err(Error::InvalidCutset(cycle)) => assert!(cycle.contains(&"1".to_string())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chain_collapses_to_sequence() {
        let nodes = vec!["st".into(), "a".into(), "b".into()];
        let p = Program::new(
            names(),
            nodes,
            0,
            vec![
                Edge { from: 0, stmt: set(0, &[0, 0], 1), to: 1 },
                Edge { from: 1, stmt: set(1, &[1, 0], 0), to: 2 },
            ],
            None,
        )
        .unwrap();
        let q = cutset_rewrite(&p, &BTreeSet::from([2])).unwrap();
        assert_eq!(q.edges.len(), 1);
        assert_eq!(q.edges[0].stmt.display(&names()).to_string(), "x1 := 1; x2 := x1");
    }

    #[test]
    fn diamonds_factor_through_join_points() {
        // st -> a, a -(p|q)-> b, b -(r|t)-> c, cut {c}
        let nodes = vec!["st".into(), "a".into(), "b".into(), "c".into()];
        let e = |from, stmt, to| Edge { from, stmt, to };
        let p = Program::new(
            names(),
            nodes,
            0,
            vec![
                e(0, set(0, &[0, 0], 0), 1),
                e(1, guard(&[1, 0], 0), 2),
                e(1, guard(&[-1, 0], 0), 2),
                e(2, guard(&[0, 1], 0), 3),
                e(2, guard(&[0, -1], 0), 3),
            ],
            None,
        )
        .unwrap();
        let q = cutset_rewrite(&p, &BTreeSet::from([3])).unwrap();
        let s = &q.edges[0].stmt;
        assert_eq!(statement_positions(s).len(), 2);
        assert_eq!(path_count(s), BigUint::from(4u32));
    }

    #[test]
    fn apply_and_expand() {
        let a = guard(&[1, 0], 1);
        let b = guard(&[1, 0], 2);
        let c = guard(&[1, 0], 3);
        let d = guard(&[1, 0], 4);
        let s = Statement::seq(vec![
            Statement::choice(vec![a.clone(), b.clone()]).unwrap(),
            Statement::choice(vec![c.clone(), d.clone()]).unwrap(),
        ])
        .unwrap();
        let sigma = StatementStrategy::new().with(vec![0], 0).with(vec![1], 1);
        assert_eq!(apply_strategy(&s, &sigma).unwrap(), Statement::seq(vec![a.clone(), d.clone()]).unwrap());
        assert!(apply_strategy(&s, &StatementStrategy::new().with(vec![0], 0)).is_err());
        assert!(apply_strategy(&s, &sigma.clone().with(vec![0], 2)).is_err());
        let seq = |x: &Statement, y: &Statement| Statement::seq(vec![x.clone(), y.clone()]).unwrap();
        assert_eq!(
            path_expand(&s).unwrap(),
            Statement::Choice(vec![seq(&a, &c), seq(&a, &d), seq(&b, &c), seq(&b, &d)])
        );
        assert_eq!(path_expand(&a).unwrap(), a);
        assert!(matches!(
            path_expand_with_limit(&s, 3),
            Err(Error::PathExplosion { .. })
        ));
    }

    #[test]
    fn normal_form_of_running_paths() {
        let s_prime = Statement::seq(vec![guard(&[1, 0], 1000), set(1, &[-1, 0], 0)]).unwrap();
        let s2 = Statement::seq(vec![guard(&[0, -1], 0), set(0, &[-1, 0], 1)]).unwrap();
        let nf = normalize_sequential(&Statement::seq(vec![s_prime, s2]).unwrap()).unwrap();
        assert_eq!(nf.g, Matrix::from_ints(2, &[&[1, 0], &[1, 0]]).unwrap());
        assert_eq!(nf.g_bound, ints(&[1000, 0]));
        assert_eq!(nf.m, Matrix::from_ints(2, &[&[-1, 0], &[-1, 0]]).unwrap());
        assert_eq!(nf.c, ints(&[1, 0]));
        assert_eq!(nf.apply(&ints(&[-3, 9])).unwrap(), Some(ints(&[4, 3])));
        assert_eq!(nf.apply(&ints(&[3, 9])).unwrap(), None);
    }

    #[test]
    fn normalizing_a_choice_fails() {
        let s = Statement::choice(vec![guard(&[1, 0], 0), guard(&[0, 1], 0)]).unwrap();
        assert_eq!(normalize_sequential(&s), Err(Error::NotSequential));
    }
}
