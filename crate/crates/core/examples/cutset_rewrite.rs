//! Collapses every node outside a cut-set into en-bloc edge statements.

use std::collections::BTreeSet;

use stratimp::cli::parse_program;
use stratimp::transform::{cutset_rewrite, find_unbroken_cycle, path_count};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program(include_str!("programs/intro_fragment.prog"))?;
    let exit = p.node_id("exit").unwrap();

    let empty = BTreeSet::new();
    println!("cycle left by the empty cut-set: {:?}", find_unbroken_cycle(&p, &empty));

    let q = cutset_rewrite(&p, &BTreeSet::from([exit]))?;
    for e in &q.edges {
        println!(
            "{} -> {} ({} paths): {}",
            q.node_names[e.from],
            q.node_names[e.to],
            path_count(&e.stmt),
            e.stmt.display(&q.var_names)
        );
    }

    let looping = parse_program(include_str!("programs/running_example.prog"))?;
    match cutset_rewrite(&looping, &BTreeSet::new()) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
