#![allow(dead_code)]

use proptest::prelude::*;

use stratimp::arith::{frac, int, ExtRational, Matrix, Rational};
use stratimp::cli::{parse_program, parse_template, template_preset};
use stratimp::domain::{AbstractValue, Template};
use stratimp::oracle::PropFormula;
use stratimp::program::{Program, Statement};

pub const RUNNING_EXAMPLE: &str = include_str!("../../examples/programs/running_example.prog");
pub const RUNNING_TEMPLATE: &str = include_str!("../../examples/programs/running_example.tpl");
pub const COUNTER: &str = include_str!("../../examples/programs/counter.prog");
pub const DIVERGENT: &str = include_str!("../../examples/programs/divergent.prog");
pub const INTRO_FRAGMENT: &str = include_str!("../../examples/programs/intro_fragment.prog");
pub const EN_BLOC_SEQUENCE: &str = include_str!("../../examples/programs/en_bloc_sequence.prog");

pub fn running_example() -> (Program, Template) {
    let p = parse_program(RUNNING_EXAMPLE).unwrap();
    let t = parse_template(RUNNING_TEMPLATE, &p.var_names).unwrap();
    (p, t)
}

pub fn with_intervals(src: &str) -> (Program, Template) {
    let p = parse_program(src).unwrap();
    let t = template_preset("interval", &p.var_names).unwrap();
    (p, t)
}

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub fn ext(v: Option<i64>) -> ExtRational {
    v.map_or(ExtRational::PosInf, ExtRational::from_int)
}

pub fn value(items: &[Option<i64>]) -> AbstractValue {
    AbstractValue(items.iter().map(|&v| ext(v)).collect())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![
        4 => (-3i64..=3).prop_map(int),
        1 => prop::sample::select(vec![frac(1, 2), frac(-1, 2), frac(3, 2)]),
    ]
}

fn coeff() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![int(-2), int(-1), int(0), int(0), int(1), int(1), int(2), frac(1, 2)])
}

fn leaf(n: usize) -> impl Strategy<Value = Statement> {
    let assign = (0..n, prop::collection::vec(coeff(), n), small_rational())
        .prop_map(move |(v, c, b)| Statement::assign_var(n, v, &c, b).unwrap());
    let guard = (prop::collection::vec(coeff(), n), small_rational())
        .prop_map(|(c, b)| Statement::guard_row(c, b).unwrap());
    prop_oneof![3 => assign, 2 => guard]
}

/// Statements over `n` variables with nesting depth at most 4.
pub fn statement(n: usize) -> impl Strategy<Value = Statement> {
    leaf(n).prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|v| Statement::seq(v).unwrap()),
            prop::collection::vec(inner, 2..=3).prop_map(|v| Statement::choice(v).unwrap()),
        ]
    })
}

pub fn bound() -> impl Strategy<Value = ExtRational> {
    prop_oneof![
        6 => small_rational().prop_map(ExtRational::Fin),
        2 => Just(ExtRational::PosInf),
        1 => Just(ExtRational::NegInf),
    ]
}

pub fn template_for(n: usize, octagon: bool) -> Template {
    template_preset(if octagon { "octagon" } else { "interval" }, &names(n)).unwrap()
}

/// A statement, its arity, a template over it, a value and a row.
pub fn query_case() -> impl Strategy<Value = (Statement, Template, AbstractValue, usize, ExtRational)> {
    (1usize..=3, any::<bool>()).prop_flat_map(|(n, oct)| {
        let tpl = template_for(n, oct);
        let m = tpl.len();
        (
            statement(n),
            Just(tpl),
            prop::collection::vec(bound(), m).prop_map(AbstractValue),
            0..m,
            prop_oneof![
                4 => small_rational().prop_map(ExtRational::Fin),
                1 => Just(ExtRational::NegInf),
            ],
        )
    })
}

/// Formulas in negation normal form over `k` variables.
pub fn prop_formula(k: usize) -> impl Strategy<Value = PropFormula> {
    let lit = (0..k, any::<bool>()).prop_map(|(var, positive)| PropFormula::Lit { var, positive });
    lit.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(PropFormula::And),
            prop::collection::vec(inner, 2..=3).prop_map(PropFormula::Or),
        ]
    })
}

/// Small programs: a start node with one initializing edge and up to three
/// further edges among up to three nodes.
pub fn small_program() -> impl Strategy<Value = Program> {
    (1usize..=2).prop_flat_map(|n| {
        let edge = (1usize..=2, 1usize..=2, statement_shallow(n));
        (
            statement_shallow(n),
            prop::collection::vec(edge, 1..=3),
        )
            .prop_map(move |(init, rest)| {
                let mut edges = vec![stratimp::program::Edge { from: 0, stmt: init, to: 1 }];
                for (from, to, stmt) in rest {
                    edges.push(stratimp::program::Edge { from, stmt, to });
                }
                Program::new(
                    names(n),
                    vec!["st".into(), "a".into(), "b".into()],
                    0,
                    edges,
                    None,
                )
                .unwrap()
            })
    })
}

fn statement_shallow(n: usize) -> impl Strategy<Value = Statement> {
    leaf(n).prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2).prop_map(|v| Statement::seq(v).unwrap()),
            prop::collection::vec(inner, 2).prop_map(|v| Statement::choice(v).unwrap()),
        ]
    })
}

pub fn matrix(cols: usize, rows: Vec<Vec<Rational>>) -> Matrix {
    Matrix::from_rows(cols, rows).unwrap()
}

use stratimp::engine::{
    build_equations, improve, sequential_row_value, solve, Improvement, Limits,
};
use stratimp::domain::gamma_contains;
use stratimp::lp::{lp_solve, LpProblem, LpResult};
use stratimp::oracle::{brute_force_transformer, concrete_enumerate, kleene_bounded};
use stratimp::smt::{encode_query, strategy_from_model, InternalSolver, SatResult, SmtBackend};
use stratimp::transform::{apply_strategy, normalize_sequential};

/// `Sat(Φ(s,d,j,c))` iff the best transformer exceeds `c` in row `j`; a
/// model's path must itself exceed `c`.
pub fn check_query(
    s: &Statement,
    tpl: &Template,
    d: &AbstractValue,
    j: usize,
    c: &ExtRational,
    backend: &mut dyn SmtBackend,
) -> Result<(), String> {
    let expected = brute_force_transformer(s, d, tpl).map_err(|e| e.to_string())?;
    let (f, ctx) = encode_query(s, d, j, c, tpl).map_err(|e| e.to_string())?;
    let got = backend.check(&f).map_err(|e| e.to_string())?;
    let truth = expected.0[j] > *c;
    if got.is_sat() != truth {
        return Err(format!(
            "{}: sat={} but brute-force row {j} = {} vs threshold {c}",
            backend.name(),
            got.is_sat(),
            expected.0[j]
        ));
    }
    if let SatResult::Sat(m) = got {
        let path = apply_strategy(s, &strategy_from_model(s, &ctx, &m)).map_err(|e| e.to_string())?;
        let v = sequential_row_value(&normalize_sequential(&path).map_err(|e| e.to_string())?, d, tpl, j)
            .map_err(|e| e.to_string())?;
        if v <= *c {
            return Err(format!("model path value {v} does not exceed {c}"));
        }
    }
    Ok(())
}

/// Final values are a solution, dominate bounded Kleene iterates, match a
/// stabilized Kleene result and respect the step bound.
pub fn check_solution(p: &Program, tpl: &Template, kleene_rounds: &[usize]) -> Result<(), String> {
    let r = solve(p, tpl, &mut InternalSolver::new(), &Limits::default()).map_err(|e| e.to_string())?;
    let es = build_equations(p, tpl).map_err(|e| e.to_string())?;
    match improve(&es, &r.strategy, &r.rho, &mut InternalSolver::new()).map_err(|e| e.to_string())? {
        Improvement::NoImprovement => {}
        Improvement::Improved { switches, .. } => {
            return Err(format!("final values still improve at {}", es.var_label(switches[0].var)))
        }
    }
    for &k in kleene_rounds {
        let kr = kleene_bounded(&es, k).map_err(|e| e.to_string())?;
        if !kr.rho.le(&r.rho) {
            return Err(format!("Kleene iterate {k} exceeds the final values"));
        }
        if kr.stabilized && kr.rho != r.rho {
            return Err(format!("stabilized Kleene result after {k} rounds differs"));
        }
    }
    if num_bigint::BigUint::from(r.steps) > r.step_bound() {
        return Err(format!("{} steps exceed bound {}", r.steps, r.step_bound()));
    }
    Ok(())
}

/// Every enumerated state lies in the invariant of its node.
pub fn check_concrete(p: &Program, tpl: &Template, bx: &[(i64, i64)], max_states: usize) -> Result<bool, String> {
    let r = solve(p, tpl, &mut InternalSolver::new(), &Limits::default()).map_err(|e| e.to_string())?;
    let set = concrete_enumerate(p, bx, max_states).map_err(|e| e.to_string())?;
    for (v, states) in set.states.iter().enumerate() {
        for x in states {
            if !gamma_contains(tpl, &r.invariants[v], x).map_err(|e| e.to_string())? {
                return Err(format!("state {x:?} at {} escapes {}", p.node_names[v], r.invariants[v]));
            }
        }
    }
    Ok(set.truncated)
}

/// Random LP with small integer data.
pub fn lp_case() -> impl Strategy<Value = LpProblem> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-3i64..=3, n), m),
            prop::collection::vec(-4i64..=6, m),
            prop::collection::vec(-3i64..=3, n),
        )
            .prop_map(move |(a, b, c)| {
                let rows = a.into_iter().map(|r| r.into_iter().map(int).collect()).collect();
                LpProblem::new(matrix(n, rows), b.into_iter().map(int).collect(), c.into_iter().map(int).collect())
                    .unwrap()
            })
    })
}

/// Optimal results are primal feasible and carry a valid dual certificate.
pub fn check_lp_certificate(p: &LpProblem) -> Result<(), String> {
    match lp_solve(p).map_err(|e| e.to_string())? {
        LpResult::Optimal { x, value, dual } => {
            if !p.is_feasible_point(&x) {
                return Err("optimum is infeasible".into());
            }
            if stratimp::arith::dot(&p.c, &x) != value {
                return Err("objective value mismatch".into());
            }
            if !p.is_dual_certificate(&dual, &value) {
                return Err("dual certificate rejected".into());
            }
        }
        LpResult::Unbounded { point, ray } => {
            if !p.is_feasible_point(&point) {
                return Err("unbounded witness point infeasible".into());
            }
            let zero = Rational::from_integer(0.into());
            if stratimp::arith::dot(&p.c, &ray) <= zero
                || p.a.row_iter().any(|r| stratimp::arith::dot(r, &ray) > zero)
            {
                return Err("invalid unbounded ray".into());
            }
        }
        LpResult::Infeasible => {}
    }
    Ok(())
}
