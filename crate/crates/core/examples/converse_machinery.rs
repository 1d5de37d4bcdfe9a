//! Converse ingredients: B*, the feasibility verdict per N', and the Monte
//! Carlo checks of the moment generating function and Berry-Esseen step.
//!
//! cargo run --release --example converse_machinery

use skfb::bounds::{b_star, converse_verdict_at, ConverseContext, TargetSpec};
use skfb::verify::{run_suite, Suite, VerifySettings};
use skfb::ChannelParams;

fn main() -> skfb::Result<()> {
    let params = ChannelParams::reference();
    let targets = TargetSpec::new(0.5, 1e-5, 0.01);
    let p0 = params.power / (1.0 - targets.epsilon);
    println!("B* at P0 = {p0}: {:.3}", b_star(p0, params.sigma_eta2)?);

    for n_prime in [2, 100, 10_000, 20_000_000] {
        let verdict = converse_verdict_at(n_prime, &params, &targets)?;
        match ConverseContext::new(n_prime, &params, &targets) {
            Ok(ctx) => println!(
                "N'={n_prime}: P'={:.6} eps'={:.6} Q^-1 argument {:.6} -> {verdict:?}",
                ctx.p_prime,
                ctx.epsilon_prime,
                ctx.q_inverse_argument()
            ),
            Err(e) => println!("N'={n_prime}: {e} -> {verdict:?}"),
        }
    }

    let settings = VerifySettings {
        p_prime: p0,
        sigma_eta2: params.sigma_eta2,
        trials: Some(100_000),
        seed: 5,
    };
    for suite in Suite::ALL {
        for line in run_suite(suite, &settings)? {
            println!(
                "{:<40} observed {:>12.5e} expected {:>12.5e} tol {:>10.3e} {}",
                line.name,
                line.observed,
                line.expected,
                line.tolerance,
                if line.passed() { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(())
}
