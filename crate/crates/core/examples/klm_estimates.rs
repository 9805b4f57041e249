//! Keystroke-level-model times for the movie-booking flows.
//!
//!     cargo run --example klm_estimates

use ixcomplex::bigi::{instantiate, NormalizedComplexity};
use ixcomplex::klm::{klm_from_concept, klm_parse, klm_speed, klm_time, ActionMapping, KlmModel, Operator};
use ixcomplex::movie_booking as mb;
use ixcomplex::{fmt2, parse_expr};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = KlmModel::default();
    println!(
        "unit times: PointClick {} s, Glance {} s",
        fmt2(model.unit_time(Operator::PointClick)),
        fmt2(model.unit_time(Operator::Glance))
    );

    // times use the KLM binding, IS counts the complexity binding
    let v1 = klm_parse(mb::V1_PUBLISHED_KLM)?;
    let v1_is = NormalizedComplexity::new(parse_expr(mb::V1_PUBLISHED_IS)?);
    println!("\nV1 formula: {}", v1.formula());
    println!("attempts  IS     time      speed");
    for a in 1..=5u64 {
        let mut b = mb::v1_klm_binding();
        b.set("a", a)?;
        let mut ib = mb::v1_complexity_binding();
        ib.set("a", a)?;
        let is = instantiate(&v1_is, &ib)?;
        let t = klm_time(&v1, &model, &b)?;
        println!("{a:>8}  {is:<5}  {:>7} s  {} IS/s", fmt2(t), fmt2(klm_speed(is, t)?));
    }

    let v2 = klm_parse(mb::V2_PUBLISHED_KLM)?;
    let t = klm_time(&v2, &model, &mb::v2_klm_binding())?;
    println!("\nV2: {} s, {} IS/s", fmt2(t), fmt2(klm_speed(46, t)?));

    // operator counts derived from the concept itself
    let derived = klm_from_concept(&mb::v2(), &ActionMapping::default())?;
    println!("\nV2 concept under the default mapping: {}", derived.formula());
    println!(
        "at {}: {} s",
        mb::v2_complexity_binding(),
        fmt2(klm_time(&derived, &model, &mb::v2_complexity_binding())?)
    );
    Ok(())
}
