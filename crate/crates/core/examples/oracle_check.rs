//! Cross-check the symbolic pipeline against brute-force counting over a
//! grid of bindings.
//!
//!     cargo run --example oracle_check

use ixcomplex::bigi::{instantiate, normalize, sum_steps};
use ixcomplex::movie_booking as mb;
use ixcomplex::synth::count_actions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let concept = mb::v1();
    let n = normalize(&sum_steps(&concept)?)?;
    println!("f_IS = {}", n.is_function.factored());

    let mut checked = 0;
    let mut b = mb::v1_complexity_binding();
    for a in 1..=6 {
        for t in 0..=8 {
            b.set("a", a)?;
            b.set("t", t)?;
            let symbolic = instantiate(&n, &b)?;
            let counted = count_actions(&concept, &b)?;
            assert_eq!(symbolic, counted.total, "at {b}");
            checked += 1;
        }
    }
    println!("{checked} bindings agree");

    let counts = count_actions(&concept, &mb::v1_complexity_binding())?;
    println!("at {}: {counts}", mb::v1_complexity_binding());

    b.set("a", 0)?;
    if let Err(e) = count_actions(&concept, &b) {
        println!("a = 0 is rejected: {e}");
    }
    Ok(())
}
