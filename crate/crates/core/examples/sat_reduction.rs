//! Propositional satisfiability as reachability: a formula is satisfiable
//! iff the abstract transformer of its statement maps top to a non-empty
//! value.

use stratimp::cli::template_preset;
use stratimp::domain::AbstractValue;
use stratimp::oracle::{brute_force_transformer, sat_to_statement, truth_table_sat, PropFormula};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use PropFormula::{And, Or};
    let z = PropFormula::pos;
    let nz = PropFormula::neg;
    let formulas = vec![
        ("z1 | !z1", Or(vec![z(0), nz(0)]), 1),
        ("z1 & !z1", And(vec![z(0), nz(0)]), 1),
        ("(z1 | z2) & (!z1 | z3) & (!z2 | !z3) & !z3", And(vec![Or(vec![z(0), z(1)]), Or(vec![nz(0), z(2)]), Or(vec![nz(1), nz(2)]), nz(2)]), 3),
        ("(z1 | z2) & !z1 & !z2", And(vec![Or(vec![z(0), z(1)]), nz(0), nz(1)]), 2),
    ];
    for (text, phi, k) in formulas {
        let names: Vec<String> = (1..=k).map(|i| format!("z{i}")).collect();
        let tpl = template_preset("interval", &names)?;
        let s = sat_to_statement(&phi, k)?;
        let out = brute_force_transformer(&s, &AbstractValue::top(tpl.len()), &tpl)?;
        println!(
            "{text:<45} abstract: {:<5} truth table: {}",
            !out.has_neg_inf(),
            truth_table_sat(&phi, k)
        );
    }
    Ok(())
}
