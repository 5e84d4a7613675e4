//! The improvement query for the loop body at values (0, 0): is there a
//! path and a state with `x1 <= 0, -x1 <= 0` whose successor has `x1 > 0`?

use stratimp::arith::{int, ExtRational};
use stratimp::cli::{parse_program, parse_template};
use stratimp::domain::AbstractValue;
use stratimp::engine::sequential_row_value;
use stratimp::smt::{encode_query, strategy_from_model, InternalSolver, SatResult, SmtBackend};
use stratimp::transform::{apply_strategy, normalize_sequential};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program(include_str!("programs/running_example.prog"))?;
    let tpl = parse_template(include_str!("programs/running_example.tpl"), &p.var_names)?;
    let body = &p.edges[1].stmt;
    let d = AbstractValue(vec![ExtRational::from_int(0), ExtRational::from_int(0)]);
    let threshold = ExtRational::Fin(int(0));

    let (phi, ctx) = encode_query(body, &d, 0, &threshold, &tpl)?;
    println!("query has {} nodes, {} reals", phi.size(), phi.real_vars().len());
    let SatResult::Sat(model) = InternalSolver::new().check(&phi)? else {
        println!("unsat");
        return Ok(());
    };
    for (pos, bools) in &ctx.selectors {
        let values: Vec<bool> = bools.iter().map(|b| model.bool_value(*b)).collect();
        println!("selector at {pos}: {values:?}");
    }
    let sigma = strategy_from_model(body, &ctx, &model);
    let path = apply_strategy(body, &sigma)?;
    println!("selected path {sigma}: {}", path.display(&p.var_names));
    let value = sequential_row_value(&normalize_sequential(&path)?, &d, &tpl, 0)?;
    println!("best value of row {} along it: {value}", tpl.labels()[0]);
    Ok(())
}
