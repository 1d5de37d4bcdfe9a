//! Exact eavesdropper leakage of both schemes against the analytic bound.
//!
//! cargo run --example leakage_profile

use skfb::leakage::{leakage_profile, n3_search, ntilde2_classic};
use skfb::{ChannelParams, SchemeVariant};

fn main() -> skfb::Result<()> {
    let params = ChannelParams::reference();
    let modified = leakage_profile(SchemeVariant::Modified, &params, 200)?;
    let classic = leakage_profile(SchemeVariant::Classic, &params, 200)?;

    println!("{:>4} {:>12} {:>12} {:>12}", "N", "modified", "classic", "F2(N)");
    for n in [1, 2, 5, 10, 20, 50, 85, 100, 200] {
        println!(
            "{n:>4} {:>12.4e} {:>12.4e} {:>12.4e}",
            modified.exact[n - 1],
            classic.exact[n - 1],
            modified.f2[n - 1]
        );
    }
    println!("bound violations (modified): {:?}", modified.violations(1e-10));
    println!("joint covariance condition estimate: {:.3e}", modified.condition);

    let delta = 0.01;
    println!("N3(delta={delta}) = {}", n3_search(&params, delta)?);
    println!("Ñ2(delta={delta}) = {}", ntilde2_classic(&params, delta)?);
    Ok(())
}
