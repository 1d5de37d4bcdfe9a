//! One run of each scheme, step by step, with the recursive error variance
//! next to its closed form.
//!
//! cargo run --example scheme_trace

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use skfb::schemes::{alpha_closed_form, initialize};
use skfb::{ChannelParams, SchemeVariant};

fn main() -> skfb::Result<()> {
    let params = ChannelParams::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let s = params.sigma_s2.sqrt() * normal();
    let noise: Vec<f64> = (0..10).map(|_| params.sigma_eta2.sqrt() * normal()).collect();

    println!("source S = {s:.5}, kappa = {:.5}, lambda = {:.5}", params.kappa(), params.lambda());
    for variant in SchemeVariant::ALL {
        println!("\n{variant}");
        let mut state = initialize(variant, &params, s, noise[0]);
        loop {
            let closed = alpha_closed_form(variant, &params, state.step)?;
            println!(
                "  i={:>2} estimate {:>9.5} error {:>9.5} alpha {:.5e} (closed form {:.5e})",
                state.step,
                state.estimate,
                state.error(),
                state.alpha,
                closed
            );
            if state.step == noise.len() {
                break;
            }
            state = state.step(&params, noise[state.step])?;
        }
    }
    Ok(())
}
