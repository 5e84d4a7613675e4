//! Abstracting a loop-free fragment as a whole is more precise than
//! abstracting after each statement.

use stratimp::arith::{int, ints, ExtRational};
use stratimp::cli::{apply_cutset, parse_program, template_preset};
use stratimp::domain::AbstractValue;
use stratimp::engine::{solve, Limits};
use stratimp::oracle::brute_force_transformer;
use stratimp::program::Statement;
use stratimp::smt::InternalSolver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // y = 0; if (x <= -1 || x >= 1) { if (x == 0) y = 1; }
    let p = parse_program(include_str!("programs/intro_fragment.prog"))?;
    let tpl = template_preset("interval", &p.var_names)?;
    let exit = p.node_id("exit").expect("exit node");

    let per_node = solve(&p, &tpl, &mut InternalSolver::new(), &Limits::default())?;
    println!("every node abstracted, at exit: {}", per_node.invariants[exit]);

    let rewritten = apply_cutset(&p, "exit")?;
    let en_bloc = solve(&rewritten, &tpl, &mut InternalSolver::new(), &Limits::default())?;
    let exit2 = rewritten.node_id("exit").expect("exit node");
    println!("cut-set {{exit}}, at exit:       {}", en_bloc.invariants[exit2]);
    println!("(rows: {})", tpl.labels().join(", "));

    // y := x; x := x - y from x in [0, 1], as one block and statement by statement.
    let s1 = Statement::assign_var(2, 1, &ints(&[1, 0]), int(0))?;
    let s2 = Statement::assign_var(2, 0, &ints(&[1, -1]), int(0))?;
    let block = Statement::seq(vec![s1.clone(), s2.clone()])?;
    let start = AbstractValue(vec![
        ExtRational::from_int(0),
        ExtRational::PosInf,
        ExtRational::from_int(1),
        ExtRational::PosInf,
    ]);
    let whole = brute_force_transformer(&block, &start, &tpl)?;
    let mid = brute_force_transformer(&s1, &start, &tpl)?;
    let composed = brute_force_transformer(&s2, &mid, &tpl)?;
    println!("en bloc:  {whole}");
    println!("composed: {composed}");
    Ok(())
}
