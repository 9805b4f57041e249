//! Big-I analysis of the two movie-booking concepts, next to the formulas
//! that were published for them.
//!
//!     cargo run --example movie_booking_bigi

use ixcomplex::bigi::{instantiate, simplify, NormalizedComplexity};
use ixcomplex::movie_booking as mb;
use ixcomplex::{analyze, parse_expr, serialize_concept};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (mb::v1(), mb::v1_complexity_binding(), mb::V1_PUBLISHED_IS),
        (mb::v2(), mb::v2_complexity_binding(), mb::V2_PUBLISHED_IS),
    ];
    for (concept, binding, published) in cases {
        println!("{}", serialize_concept(&concept));
        let report = analyze(&concept, Some(&binding))?;
        print!("{}", report.render_text());

        let n = NormalizedComplexity::new(parse_expr(published)?);
        let s = simplify(&n);
        println!("published: {} IS", n.is_function.factored());
        println!("           I({}) {}", s.retained.factored(), s.class_label);
        println!("           IS = {}", instantiate(&n, &binding)?);
        println!();
    }
    Ok(())
}
