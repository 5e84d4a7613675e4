//! Evaluates a fixed strategy of the running example and prints the LP,
//! its optimum and the dual certificate.

use stratimp::arith::{format_rational, ExtRational};
use stratimp::cli::{parse_program, parse_template};
use stratimp::engine::{build_equations, evaluate, Atom, EqVar, Selection, SysStrategy, VarAssignment};
use stratimp::lp::LpResult;
use stratimp::transform::StatementStrategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program(include_str!("programs/running_example.prog"))?;
    let tpl = parse_template(include_str!("programs/running_example.tpl"), &p.var_names)?;
    let es = build_equations(&p, &tpl)?;
    let (st, head) = (p.node_id("st").unwrap(), p.node_id("1").unwrap());

    // Start rows take the initial value; row x1 at the loop head takes the
    // second branch of the body, row -x1 the first.
    let mut sigma = Vec::new();
    for x in 0..es.num_vars() {
        let EqVar { node, row } = es.var(x);
        let sel = if node == st {
            Selection { atom: 1, path: StatementStrategy::new() }
        } else {
            let atom = es.equations[x]
                .iter()
                .position(|a| matches!(a, Atom::Transfer { source, .. } if *source == head))
                .expect("self-loop disjunct");
            Selection { atom, path: StatementStrategy::new().with(vec![2], if row == 0 { 1 } else { 0 }) }
        };
        sigma.push(sel);
    }
    let mut rho = VarAssignment::bottom(es.num_vars());
    for x in es.block(st) {
        rho.0[x] = ExtRational::PosInf;
    }
    let eval = evaluate(&es, &SysStrategy(sigma), &rho)?;
    for lp in &eval.lps {
        println!("{}", lp.problem.to_text(Some(&lp.column_names)));
        if let LpResult::Optimal { x, value, dual } = &lp.result {
            for (name, v) in lp.column_names.iter().zip(x) {
                println!("  {name} = {}", format_rational(v));
            }
            println!("  objective {}", format_rational(value));
            println!("  dual certificate valid: {}", lp.problem.is_dual_certificate(dual, value));
        }
    }
    let values: Vec<String> = eval.rho.block(&es, head).0.iter().map(ToString::to_string).collect();
    println!("loop head: ({})", values.join(", "));
    Ok(())
}
