//! Strategy improvement on the binary-counter family: the number of
//! improvement steps roughly doubles with every extra bit.
//!
//! Usage: `cargo run --release --example exponential_family -- [max_n]`

use std::time::Instant;

use stratimp::arith::Matrix;
use stratimp::domain::Template;
use stratimp::engine::{solve, Limits};
use stratimp::oracle::make_exponential_program;
use stratimp::smt::InternalSolver;

fn interval(names: &[String]) -> Template {
    let n = names.len();
    let mut rows = Vec::new();
    for sign in [-1i64, 1] {
        for i in 0..n {
            let mut r = vec![0i64; n];
            r[i] = sign;
            rows.push(r);
        }
    }
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    Template::from_matrix(Matrix::from_ints(n, &refs).expect("rows"), names).expect("template")
}

fn main() {
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let mut previous: Option<usize> = None;
    println!("{:>3} {:>7} {:>8} {:>9} {:>10}", "n", "steps", "2^n", "ratio", "seconds");
    for n in 1..=max_n {
        let p = make_exponential_program(n).expect("generator");
        let tpl = interval(&p.var_names);
        let started = Instant::now();
        let r = solve(&p, &tpl, &mut InternalSolver::new(), &Limits::default()).expect("analysis");
        let ratio = previous.map_or("-".to_string(), |prev| format!("{:.3}", r.steps as f64 / prev as f64));
        println!(
            "{:>3} {:>7} {:>8} {:>9} {:>10.3}",
            n,
            r.steps,
            1u64 << n,
            ratio,
            started.elapsed().as_secs_f64()
        );
        println!("    loop head: {}", tpl.labels().iter().zip(&r.invariants[1].0).map(|(l, b)| format!("{l} <= {b}")).collect::<Vec<_>>().join(", "));
        previous = Some(r.steps);
    }
}
