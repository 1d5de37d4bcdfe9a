//! Rate bracket over the reference distortion grid.
//!
//! cargo run --example rate_bracket

use skfb::bounds::{reference_d_grid, sweep, UpperMode};
use skfb::ChannelParams;

fn main() -> skfb::Result<()> {
    let params = ChannelParams::reference();
    let (epsilon, delta) = (1e-5, 0.01);
    let reports = sweep(&params, epsilon, delta, &reference_d_grid(), UpperMode::Exact)?;

    println!("{:>5} {:>10} {:>10} {:>8} {:>5} {:>5} {:>4}  binding", "d", "classic", "modified", "upper", "Ñ1", "N2", "N3");
    for r in &reports {
        println!(
            "{:>5.2} {:>10.6} {:>10.6} {:>8.4} {:>5} {:>5} {:>4}  {}",
            r.d, r.rate_lower_classic, r.rate_lower_modified, r.rate_upper, r.ntilde1, r.n2, r.n3, r.binding_modified
        );
    }

    let asym = sweep(&params, epsilon, delta, &[0.1, 0.5, 0.9], UpperMode::ASYMPTOTIC)?;
    println!("\nasymptotic F1 upper bound (approximate):");
    for r in &asym {
        println!("  d={:.1}: 1/(N1-1) = {:.6} with N1 = {}", r.d, r.rate_upper, r.n1);
    }
    Ok(())
}
