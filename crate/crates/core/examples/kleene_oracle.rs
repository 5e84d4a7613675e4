//! Bounded Kleene iteration as a lower bound for the least solution, and
//! concrete enumeration as a lower bound for the invariants.

use stratimp::cli::{parse_program, parse_template, template_preset};
use stratimp::domain::gamma_contains;
use stratimp::engine::{build_equations, solve, Limits};
use stratimp::oracle::{concrete_enumerate, kleene_bounded};
use stratimp::smt::InternalSolver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let counter = parse_program(include_str!("programs/counter.prog"))?;
    let tpl = template_preset("interval", &counter.var_names)?;
    let es = build_equations(&counter, &tpl)?;
    let k = kleene_bounded(&es, 20)?;
    let r = solve(&counter, &tpl, &mut InternalSolver::new(), &Limits::default())?;
    println!("counter: Kleene stabilized={} after {} rounds", k.stabilized, k.iterations);
    for (i, node) in counter.node_names.iter().enumerate() {
        println!("  {node}: kleene {}  strategy improvement {}", k.rho.per_node(&es)[i], r.invariants[i]);
    }

    let p = parse_program(include_str!("programs/running_example.prog"))?;
    let tpl = parse_template(include_str!("programs/running_example.tpl"), &p.var_names)?;
    let es = build_equations(&p, &tpl)?;
    let r = solve(&p, &tpl, &mut InternalSolver::new(), &Limits::default())?;
    for iters in [1, 5, 10, 20, 40] {
        let k = kleene_bounded(&es, iters)?;
        println!("running example, {iters:>2} Kleene rounds: {}", k.rho.per_node(&es)[1]);
    }
    println!("least solution:                 {}", r.invariants[1]);

    let states = concrete_enumerate(&p, &[(0, 0), (0, 0)], 10_000)?;
    let head = p.node_id("1").unwrap();
    let all_inside = states.states[head]
        .iter()
        .all(|x| gamma_contains(&tpl, &r.invariants[head], x).unwrap_or(false));
    let max = states.states[head].iter().map(|x| x[0].clone()).max().unwrap();
    println!(
        "{} concrete loop-head states, max x1 = {max}, all inside the invariant: {all_inside}",
        states.states[head].len()
    );
    Ok(())
}
