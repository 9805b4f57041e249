//! Time estimates from interaction-speed models, and the pooled speeds of
//! the measured task table.
//!
//!     cargo run --example speed_estimates

use ixcomplex::fmt2;
use ixcomplex::movie_booking::MEASURED_TASKS;
use ixcomplex::speed::{aggregate_speed, estimate_time, SpeedModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, is) in [("v2", 46), ("v1", 171), ("overall", 171)] {
        let model = SpeedModel::builtin(name)?;
        let e = estimate_time(is, &model);
        print!("{is} IS at `{name}` ({} IS/s): {} s", fmt2(model.mean), fmt2(e.expected));
        if let (Some(lo), Some(hi)) = (e.fastest, e.slowest) {
            print!(", between {} s and {} s", fmt2(lo), fmt2(hi));
        }
        println!();
    }

    println!("\nmeasured rows:");
    for r in MEASURED_TASKS {
        println!(
            "  {:<16} n={:<4} {:>3} IS  {:>6} s  {} IS/s",
            r.label,
            r.n,
            r.is_count,
            fmt2(r.mean_s),
            fmt2(r.mean_speed)
        );
    }
    let rows = |v: Option<u8>| -> Vec<(u64, f64)> {
        MEASURED_TASKS.iter().filter(|r| v.is_none_or(|v| r.version == v)).map(|r| (r.n as u64, r.mean_speed)).collect()
    };
    println!("pooled overall: {} IS/s", fmt2(aggregate_speed(&rows(None))?));
    println!("pooled V1:      {} IS/s", fmt2(aggregate_speed(&rows(Some(1)))?));
    Ok(())
}
