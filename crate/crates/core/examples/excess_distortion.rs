//! Monte Carlo excess-distortion probability against the closed form.
//!
//! cargo run --release --example excess_distortion

use skfb::schemes::{
    alpha_closed_form, distortion_bound, exact_excess_probability, monte_carlo_excess_profile,
};
use skfb::{ChannelParams, SchemeVariant};

fn main() -> skfb::Result<()> {
    let params = ChannelParams::reference();
    let ds = [0.1, 0.5, 0.9];
    let trials = 200_000;
    for variant in SchemeVariant::ALL {
        for n in [1, 10, 50] {
            let alpha = alpha_closed_form(variant, &params, n)?;
            let reports = monte_carlo_excess_profile(variant, &params, n, &ds, trials, 7)?;
            for (&d, r) in ds.iter().zip(&reports) {
                let exact = exact_excess_probability(variant, &params, n, d)?.value();
                print!(
                    "{variant:>8} N={n:>2} alpha={alpha:.4e} d={d}: mc {:.5} ± {:.5}, exact {exact:.5}",
                    r.estimate, r.ci_halfwidth
                );
                if variant == SchemeVariant::Modified {
                    print!(", bound {:.5}", distortion_bound(&params, n, d)?.value());
                }
                println!();
            }
        }
    }
    Ok(())
}
