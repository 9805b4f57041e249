//! Parse, combine and evaluate exact polynomial expressions.
//!
//!     cargo run --example expressions

use ixcomplex::symexpr::{combine, CombineOp};
use ixcomplex::{parse_expr, Binding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let step = parse_expr("a * (r + 1)")?;
    let back = parse_expr("(a - 1) * 3")?;
    let sum = combine(CombineOp::Add, &step, &back)?;

    println!("step:      {step}");
    println!("back:      {back}");
    println!("sum:       {sum}");
    println!("factored:  {}", sum.factored());
    println!("degree:    {}", sum.total_degree());

    let b = Binding::from_pairs([("a", 5), ("r", 4)]);
    println!("at {b}:  {}", sum.eval(&b)?);

    // negative results are rejected: counts cannot go below zero
    let b = Binding::from_pairs([("a", 0), ("r", 4)]);
    match back.eval(&b) {
        Ok(v) => println!("{back} at {b} = {v}"),
        Err(e) => println!("{back} at {b}: {e}"),
    }

    match parse_expr("2 * (m + ") {
        Ok(_) => unreachable!(),
        Err(e) => println!("parse error: {e}"),
    }
    Ok(())
}
