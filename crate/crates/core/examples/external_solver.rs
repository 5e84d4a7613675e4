//! Runs the same analysis with the internal solver and with an external
//! SMT-LIB2 solver (from `$STRATIMP_SMT_SOLVER`, or z3/cvc5 on `PATH`).

use stratimp::cli::{parse_program, parse_template};
use stratimp::engine::{solve, Limits};
use stratimp::arith::ExtRational;
use stratimp::domain::AbstractValue;
use stratimp::smt::smtlib2::to_script;
use stratimp::smt::{encode_query, InternalSolver, SmtBackend, SmtLib2Solver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program(include_str!("programs/running_example.prog"))?;
    let tpl = parse_template(include_str!("programs/running_example.tpl"), &p.var_names)?;
    let mut backends: Vec<Box<dyn SmtBackend>> = vec![Box::new(InternalSolver::new())];
    match SmtLib2Solver::discover() {
        Some(s) => {
            println!("external solver: {}", s.command_line());
            backends.push(Box::new(s));
        }
        None => println!("no external solver found; set STRATIMP_SMT_SOLVER to enable it"),
    }
    for mut b in backends {
        let r = solve(&p, &tpl, b.as_mut(), &Limits::default())?;
        println!(
            "{:<20} loop head {}  ({} queries, {} steps)",
            b.name(),
            r.invariants[1],
            r.solver.queries,
            r.steps
        );
    }
    let d = AbstractValue(vec![ExtRational::from_int(0), ExtRational::from_int(0)]);
    let (phi, _) = encode_query(&p.edges[1].stmt, &d, 0, &ExtRational::from_int(0), &tpl)?;
    println!("\nthe query at values (0, 0) for row x1 as SMT-LIB2:\n{}", to_script(&phi));
    Ok(())
}
