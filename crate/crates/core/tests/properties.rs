mod common;

use proptest::prelude::*;

use common::*;
use stratimp::arith::{format_rational, int, parse_rational, ExtRational, Rational};
use stratimp::cli::template_preset;
use stratimp::domain::{gamma_contains, AbstractValue};
use stratimp::engine::{abstract_post, sequential_transformer};
use stratimp::lp::{lp_solve, LpProblem, LpResult};
use stratimp::oracle::{brute_force_transformer, concrete_post, sat_to_statement, truth_table_sat};
use stratimp::smt::InternalSolver;
use stratimp::transform::{path_count_u64, path_expand, sequential_paths, DEFAULT_PATH_LIMIT};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Maximum of `c x` over the vertices of `{x | A x <= b}` for two variables,
/// when the polyhedron is bounded in the direction `c` and has a vertex.
fn vertex_max(p: &LpProblem) -> Option<Rational> {
    let m = p.a.rows();
    let mut best: Option<Rational> = None;
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (p.a.row(i), p.a.row(j));
            let det = &a[0] * &b[1] - &a[1] * &b[0];
            if det == int(0) {
                continue;
            }
            let x0 = (&p.b[i] * &b[1] - &a[1] * &p.b[j]) / &det;
            let x1 = (&a[0] * &p.b[j] - &p.b[i] * &b[0]) / &det;
            let x = vec![x0, x1];
            if p.is_feasible_point(&x) {
                let v = stratimp::arith::dot(&p.c, &x);
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn query_is_sat_iff_transformer_exceeds_threshold((s, tpl, d, j, c) in query_case()) {
        let mut solver = InternalSolver::new();
        check_query(&s, &tpl, &d, j, &c, &mut solver).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn smt_transformer_equals_brute_force((s, tpl, d, _j, _c) in query_case()) {
        let smt = abstract_post(&s, &d, &tpl, &mut InternalSolver::new()).unwrap();
        prop_assert_eq!(smt, brute_force_transformer(&s, &d, &tpl).unwrap());
    }

    #[test]
    fn path_expansion_preserves_transformer((s, tpl, d, _j, _c) in query_case()) {
        let expanded = path_expand(&s).unwrap();
        prop_assert!(expanded.is_merge_simple());
        prop_assert_eq!(
            brute_force_transformer(&expanded, &d, &tpl).unwrap(),
            brute_force_transformer(&s, &d, &tpl).unwrap()
        );
        prop_assert_eq!(path_count_u64(&s).unwrap() as usize, sequential_paths(&s, DEFAULT_PATH_LIMIT).unwrap().len());
    }

    #[test]
    fn transformer_is_monotone((s, tpl, d, _j, _c) in query_case(), widen in prop::collection::vec(0i64..3, 10)) {
        let bigger = AbstractValue(d.0.iter().zip(widen.iter().cycle()).map(|(b, w)| b.add_finite(&int(*w))).collect());
        let lo = brute_force_transformer(&s, &d, &tpl).unwrap();
        let hi = brute_force_transformer(&s, &bigger, &tpl).unwrap();
        prop_assert!(lo.le(&hi));
    }

    #[test]
    fn concrete_successors_stay_in_abstract_image(
        (s, tpl, _d, _j, _c) in query_case(),
        x in prop::collection::vec(-3i64..=3, 3),
    ) {
        let n = tpl.num_vars();
        let x: Vec<Rational> = x[..n].iter().map(|&v| int(v)).collect();
        let d = AbstractValue(tpl.matrix().row_iter().map(|r| ExtRational::Fin(stratimp::arith::dot(r, &x))).collect());
        let image = brute_force_transformer(&s, &d, &tpl).unwrap();
        for y in concrete_post(&s, &x) {
            prop_assert!(gamma_contains(&tpl, &image, &y).unwrap());
        }
    }

    #[test]
    fn lp_optima_carry_certificates(lp in lp_case()) {
        check_lp_certificate(&lp).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn lp_matches_vertex_enumeration(
        a in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 2..=5),
        b in prop::collection::vec(0i64..=6, 5),
        c in prop::collection::vec(-3i64..=3, 2),
    ) {
        // Box rows keep the problem bounded and non-empty.
        let mut rows: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        let mut rhs: Vec<Rational> = b[..a.len()].iter().map(|&v| int(v)).collect();
        for (r, k) in [([1, 0], 10), ([-1, 0], 10), ([0, 1], 10), ([0, -1], 10)] {
            rows.push(r.iter().map(|&v| int(v)).collect());
            rhs.push(int(k));
        }
        let lp = LpProblem::new(matrix(2, rows), rhs, c.iter().map(|&v| int(v)).collect()).unwrap();
        match lp_solve(&lp).unwrap() {
            LpResult::Optimal { value, .. } => prop_assert_eq!(Some(value), vertex_max(&lp)),
            other => prop_assert!(false, "bounded feasible LP gave {:?}", other.value()),
        }
    }

    #[test]
    fn sequential_transformer_agrees_with_brute_force((s, tpl, d, _j, _c) in query_case()) {
        for path in sequential_paths(&s, DEFAULT_PATH_LIMIT).unwrap().into_iter().take(4) {
            let p = stratimp::program::Statement::seq(path).unwrap();
            prop_assert_eq!(sequential_transformer(&p, &d, &tpl).unwrap(), brute_force_transformer(&p, &d, &tpl).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn sat_reduction_agrees_with_truth_tables((k, phi) in (1usize..=3).prop_flat_map(|k| (Just(k), prop_formula(k)))) {
        let tpl = template_preset("interval", &names(k)).unwrap();
        let s = sat_to_statement(&phi, k).unwrap();
        let out = brute_force_transformer(&s, &AbstractValue::top(tpl.len()), &tpl).unwrap();
        prop_assert_eq!(!out.has_neg_inf(), truth_table_sat(&phi, k));
    }

    #[test]
    fn final_values_are_solutions(p in small_program()) {
        let tpl = template_preset("interval", &p.var_names).unwrap();
        check_solution(&p, &tpl, &[0, 1, 3, 8]).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(config(512))]

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let q = stratimp::arith::frac(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q.clone());
        let e = ExtRational::Fin(q);
        prop_assert_eq!(e.to_string().parse::<ExtRational>().unwrap(), e);
    }

    #[test]
    fn gamma_is_monotone(
        d in prop::collection::vec(bound(), 4),
        widen in prop::collection::vec(0i64..3, 4),
        x in prop::collection::vec(-4i64..=4, 2),
    ) {
        let tpl = template_preset("interval", &names(2)).unwrap();
        let d = AbstractValue(d);
        let e = AbstractValue(d.0.iter().zip(&widen).map(|(b, w)| b.add_finite(&int(*w))).collect());
        prop_assert!(d.le(&e));
        let x: Vec<Rational> = x.into_iter().map(int).collect();
        if gamma_contains(&tpl, &d, &x).unwrap() {
            prop_assert!(gamma_contains(&tpl, &e, &x).unwrap());
        }
    }

    #[test]
    fn join_and_meet_are_bounds(a in prop::collection::vec(bound(), 4), b in prop::collection::vec(bound(), 4)) {
        let (a, b) = (AbstractValue(a), AbstractValue(b));
        let j = a.join(&b);
        let m = a.meet(&b);
        prop_assert!(a.le(&j) && b.le(&j) && m.le(&a) && m.le(&b));
    }
}

#[test]
fn solver_statistics_accumulate() {
    let (p, tpl) = running_example();
    let r = stratimp::engine::solve(&p, &tpl, &mut InternalSolver::new(), &Default::default()).unwrap();
    assert_eq!(r.solver.queries, r.solver.sat + r.solver.unsat);
    // The closing round that finds no improvement is not part of any step.
    let per_step: u64 = r.trace.steps.iter().map(|s| s.smt_queries).sum();
    assert!(per_step < r.solver.queries);
    assert_eq!(r.trace.steps.len(), r.steps);
}
