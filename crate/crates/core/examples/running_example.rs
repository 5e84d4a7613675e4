//! Analyzes the sign-alternating loop with the two-row template `x1`,
//! `-x1` and prints the trace of strategy improvement steps.

use stratimp::cli::{parse_program, parse_template};
use stratimp::engine::{solve, Limits};
use stratimp::smt::InternalSolver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program(include_str!("programs/running_example.prog"))?;
    let tpl = parse_template(include_str!("programs/running_example.tpl"), &p.var_names)?;
    let r = solve(&p, &tpl, &mut InternalSolver::new(), &Limits::default())?;

    for step in &r.trace.steps {
        println!("step {}:", step.step);
        for sw in &step.switches {
            println!("  {} switches to {} {} (witness {})", sw.var, sw.description, sw.path, sw.witness);
        }
        let values: Vec<String> = step.rho.iter().map(ToString::to_string).collect();
        println!("  values after evaluation: ({})", values.join(", "));
    }
    for (node, d) in p.node_names.iter().zip(&r.invariants) {
        println!("invariant at {node}: {d}");
    }
    println!(
        "{} improvement steps (bound {}), {} SMT queries",
        r.steps,
        r.step_bound(),
        r.solver.queries
    );
    Ok(())
}
