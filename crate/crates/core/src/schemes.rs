//! Classic and modified SK state machines and their excess-distortion
//! probabilities.
//!
//! Both variants send `X_1 = √(P/σ_s²)·S` and then, at every later step, the
//! receiver's current estimation error scaled to power `P`. They differ only
//! in how the receiver forms its first estimate: the classic scheme inverts
//! the channel gain (zero-forcing), the modified scheme uses the MMSE
//! estimate.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{gaussian_capacity, q_raw, rate_distortion, Probability};
use crate::sampling::{self, Moments};

/// Variances of the source and of the three noises, and the power budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub sigma_s2: f64,
    pub sigma_eta2: f64,
    pub sigma_e2: f64,
    pub sigma_e2_tilde: f64,
    pub power: f64,
}

impl ChannelParams {
    pub fn new(
        sigma_s2: f64,
        sigma_eta2: f64,
        sigma_e2: f64,
        sigma_e2_tilde: f64,
        power: f64,
    ) -> Result<Self> {
        let p = Self {
            sigma_s2,
            sigma_eta2,
            sigma_e2,
            sigma_e2_tilde,
            power,
        };
        p.validate()?;
        Ok(p)
    }

    /// `σ_s² = 1, σ_η² = 30, σ_e² = 30, σ̃_e² = 40, P = 1`.
    pub fn reference() -> Self {
        Self {
            sigma_s2: 1.0,
            sigma_eta2: 30.0,
            sigma_e2: 30.0,
            sigma_e2_tilde: 40.0,
            power: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("sigma_s2", self.sigma_s2),
            ("sigma_eta2", self.sigma_eta2),
            ("sigma_e2", self.sigma_e2),
            ("sigma_e2_tilde", self.sigma_e2_tilde),
            ("P", self.power),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }

    /// Per-step contraction of the error variance, `σ_η²/(P + σ_η²)`.
    pub fn kappa(&self) -> f64 {
        self.sigma_eta2 / (self.power + self.sigma_eta2)
    }

    /// Channel gain of the first transmission, `√(P/σ_s²)`.
    pub fn lambda(&self) -> f64 {
        (self.power / self.sigma_s2).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeVariant {
    /// Zero-forcing first estimate.
    Classic,
    /// MMSE first estimate.
    Modified,
}

impl SchemeVariant {
    pub const ALL: [SchemeVariant; 2] = [SchemeVariant::Classic, SchemeVariant::Modified];
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeVariant::Classic => "classic",
            SchemeVariant::Modified => "modified",
        })
    }
}

impl FromStr for SchemeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classic" => Ok(SchemeVariant::Classic),
            "modified" => Ok(SchemeVariant::Modified),
            other => Err(domain("SchemeVariant", format!("unknown variant `{other}`"))),
        }
    }
}

/// Receiver estimate after `step` channel uses, plus the realized source held
/// by the transmitter side of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeState {
    pub step: usize,
    pub estimate: f64,
    /// `α_i = Var(ε_i)`.
    pub alpha: f64,
    pub source: f64,
}

impl SchemeState {
    /// `ε_i = Ŝ_i − S`.
    #[inline]
    pub fn error(&self) -> f64 {
        self.estimate - self.source
    }

    /// Channel input for the next step, `√(P/α_i)·ε_i`.
    #[inline]
    pub fn next_input(&self, params: &ChannelParams) -> f64 {
        (params.power / self.alpha).sqrt() * self.error()
    }

    /// MMSE coefficient used at the next step, `√(Pα_i)/(P + σ_η²)`.
    pub fn next_beta(&self, params: &ChannelParams) -> f64 {
        (params.power * self.alpha).sqrt() / (params.power + params.sigma_eta2)
    }

    /// Advances one channel use with Bob's noise sample `eta`.
    pub fn step(&self, params: &ChannelParams, eta: f64) -> Result<SchemeState> {
        step(self, params, eta)
    }
}

/// First transmission `X_1 = λS` and the receiver's first estimate.
pub fn initialize(variant: SchemeVariant, params: &ChannelParams, s: f64, eta1: f64) -> SchemeState {
    let lam = params.lambda();
    let (estimate, alpha) = match variant {
        // Ŝ_1 = Y_1/λ = S + η_1/λ
        SchemeVariant::Classic => (
            s + eta1 / lam,
            params.sigma_eta2 * params.sigma_s2 / params.power,
        ),
        SchemeVariant::Modified => {
            let y1 = lam * s + eta1;
            let gain = lam * params.sigma_s2 / (params.power + params.sigma_eta2);
            (
                gain * y1,
                params.sigma_eta2 * params.sigma_s2 / (params.power + params.sigma_eta2),
            )
        }
    };
    SchemeState {
        step: 1,
        estimate,
        alpha,
        source: s,
    }
}

/// `X_i = √(P/α_{i−1})ε_{i−1}`, `Y_i = X_i + η_i`, `Ŝ_i = Ŝ_{i−1} − β_iY_i`,
/// `α_i = α_{i−1}·κ`. Identical for both variants.
pub fn step(state: &SchemeState, params: &ChannelParams, eta: f64) -> Result<SchemeState> {
    if !(state.alpha > 0.0) || state.step == 0 {
        return Err(Error::CorruptedState {
            step: state.step,
            alpha: state.alpha,
        });
    }
    let y = state.next_input(params) + eta;
    let beta = state.next_beta(params);
    Ok(SchemeState {
        step: state.step + 1,
        estimate: state.estimate - beta * y,
        alpha: state.alpha * params.kappa(),
        source: state.source,
    })
}

/// Closed-form `α_n`: classic `(σ_η²σ_s²/P)κ^{n−1}`, modified `σ_s²κ^n`.
pub fn alpha_closed_form(variant: SchemeVariant, params: &ChannelParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(domain("alpha_closed_form", "blocklength must be at least 1"));
    }
    let k = params.kappa();
    Ok(match variant {
        SchemeVariant::Classic => {
            params.sigma_eta2 * params.sigma_s2 / params.power * k.powi(n as i32 - 1)
        }
        SchemeVariant::Modified => params.sigma_s2 * k.powi(n as i32),
    })
}

/// `P[(S − Ŝ_N)² ≥ d] = 2Q(√(d/α_N))`; the two tails of the zero-mean Gaussian
/// error are disjoint, so this is an equality.
pub fn exact_excess_probability(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    d: f64,
) -> Result<Probability> {
    rate_distortion(d, params.sigma_s2)?;
    let alpha = alpha_closed_form(variant, params, n)?;
    Probability::new((2.0 * q_raw((d / alpha).sqrt())).min(1.0))
}

/// `2Q(exp(−R(d) + N·C(P)))`, the modified scheme's distortion bound.
pub fn distortion_bound(params: &ChannelParams, n: usize, d: f64) -> Result<Probability> {
    if n == 0 {
        return Err(domain("distortion_bound", "blocklength must be at least 1"));
    }
    let r = rate_distortion(d, params.sigma_s2)?.value();
    let c = gaussian_capacity(params.power, params.sigma_eta2)?.value();
    Probability::new((2.0 * q_raw((-r + n as f64 * c).exp())).min(1.0))
}

/// Outcome of a Monte Carlo estimate of the excess-distortion probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    /// `3·√(p̂(1−p̂)/trials)`.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

impl MonteCarloReport {
    pub fn from_counts(trials: u64, hits: u64, seed: u64) -> Self {
        let estimate = hits as f64 / trials as f64;
        Self {
            trials,
            hits,
            estimate,
            ci_halfwidth: 3.0 * (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            seed,
        }
    }
}

fn check_run(n: usize, trials: u64) -> Result<()> {
    if n == 0 {
        return Err(domain("monte carlo", "blocklength must be at least 1"));
    }
    if trials == 0 {
        return Err(domain("monte carlo", "trials must be at least 1"));
    }
    Ok(())
}

/// Draws `S`, then `η_1 … η_N` from the trial stream and runs the scheme,
/// handing every channel input to `on_input` and returning the final state.
#[inline]
fn simulate_trial(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    mut on_input: impl FnMut(usize, f64),
) -> SchemeState {
    let sd_s = params.sigma_s2.sqrt();
    let sd_eta = params.sigma_eta2.sqrt();
    let s = sd_s * sampling::std_normal(rng);
    on_input(0, params.lambda() * s);
    let mut state = initialize(variant, params, s, sd_eta * sampling::std_normal(rng));
    for i in 1..n {
        on_input(i, state.next_input(params));
        let eta = sd_eta * sampling::std_normal(rng);
        state = step(&state, params, eta).expect("alpha stays positive for valid params");
    }
    state
}

/// Estimates `P[(S − Ŝ_N)² ≥ d]` from `trials` independent runs.
pub fn monte_carlo_excess_probability(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    d: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    Ok(monte_carlo_excess_profile(variant, params, n, &[d], trials, seed)?[0])
}

/// Same as [`monte_carlo_excess_probability`] for several thresholds, all
/// scored on the same simulated runs.
pub fn monte_carlo_excess_profile(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<MonteCarloReport>> {
    params.validate()?;
    check_run(n, trials)?;
    if let Some(&d) = thresholds.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(domain("monte carlo", format!("threshold {d} must be positive and finite")));
    }
    let hits: Vec<u64> = sampling::run_trials(
        trials,
        seed,
        || vec![0u64; thresholds.len()],
        |rng, acc| {
            let e = simulate_trial(variant, params, n, rng, |_, _| {}).error();
            let e2 = e * e;
            for (h, &d) in acc.iter_mut().zip(thresholds) {
                *h += u64::from(e2 >= d);
            }
        },
    );
    Ok(hits
        .into_iter()
        .map(|h| MonteCarloReport::from_counts(trials, h, seed))
        .collect())
}

/// Sample mean of `X_i²` at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Per-step sample power `E[X_i²]`, `i = 1..=N`.
pub fn empirical_power(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<PowerEstimate>> {
    params.validate()?;
    check_run(n, trials)?;
    let sums: Vec<Moments> = sampling::run_trials(
        trials,
        seed,
        || vec![Moments::default(); n],
        |rng, acc| {
            simulate_trial(variant, params, n, rng, |i, x| acc[i].push(x * x));
        },
    );
    Ok(sums
        .iter()
        .map(|m| PowerEstimate {
            mean: m.mean(),
            std_error: m.std_error_of_mean(),
        })
        .collect())
}

/// Sample moments of the final error `ε_N`.
pub fn error_moments(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Moments> {
    params.validate()?;
    check_run(n, trials)?;
    Ok(sampling::run_trials(trials, seed, Moments::default, |rng, acc: &mut Moments| {
        acc.push(simulate_trial(variant, params, n, rng, |_, _| {}).error())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: ChannelParams = ChannelParams {
        sigma_s2: 1.0,
        sigma_eta2: 30.0,
        sigma_e2: 30.0,
        sigma_e2_tilde: 40.0,
        power: 1.0,
    };

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(1.0, 30.0, 30.0, 40.0, 1.0).is_ok());
        assert!(ChannelParams::new(1.0, 0.0, 30.0, 40.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 30.0, 30.0, 40.0, -1.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 30.0, 30.0, 40.0, 1.0).is_err());
    }

    #[test]
    fn initialization_examples() {
        let st = initialize(SchemeVariant::Classic, &REF, 0.731, 0.0);
        assert_eq!(st.estimate, 0.731);
        assert_eq!(st.error(), 0.0);
        assert_eq!(st.alpha, 30.0);

        let st = initialize(SchemeVariant::Modified, &REF, 0.2, 0.1);
        assert!((st.alpha - 30.0 / 31.0).abs() < 1e-15);
        // Ŝ_1 = (P/(P+σ_η²))S + (√(Pσ_s²)/(P+σ_η²))η_1
        assert!((st.estimate - (0.2 / 31.0 + 0.1 / 31.0)).abs() < 1e-15);
    }

    #[test]
    fn noiseless_step_shrinks_error_by_kappa() {
        for v in SchemeVariant::ALL {
            let st = initialize(v, &REF, 1.3, 2.0);
            let next = st.step(&REF, 0.0).unwrap();
            let want = st.error() * REF.kappa();
            assert!((next.error() - want).abs() < 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn corrupted_state_is_rejected() {
        let mut st = initialize(SchemeVariant::Classic, &REF, 1.0, 0.0);
        st.alpha = 0.0;
        assert!(matches!(st.step(&REF, 0.1), Err(Error::CorruptedState { .. })));
    }

    #[test]
    fn iterated_alpha_matches_closed_form() {
        let params = ChannelParams::new(2.0, 0.7, 1.0, 1.0, 3.0).unwrap();
        for v in SchemeVariant::ALL {
            for p in [REF, params] {
                let mut st = initialize(v, &p, 0.3, -0.2);
                for n in 1..=10_000usize {
                    if n > 1 {
                        st = st.step(&p, 0.01).unwrap();
                    }
                    let cf = alpha_closed_form(v, &p, n).unwrap();
                    if cf < 1e-300 {
                        break;
                    }
                    assert!(((st.alpha - cf) / cf).abs() < 1e-12, "{v} n={n}");
                }
            }
        }
        assert!(alpha_closed_form(SchemeVariant::Classic, &REF, 0).is_err());
    }

    #[test]
    fn closed_form_first_values_and_ratio() {
        let c1 = alpha_closed_form(SchemeVariant::Classic, &REF, 1).unwrap();
        let m1 = alpha_closed_form(SchemeVariant::Modified, &REF, 1).unwrap();
        assert_eq!(c1, 30.0);
        assert!((m1 - 30.0 / 31.0).abs() < 1e-15);
        assert!(m1 < c1);
        for v in SchemeVariant::ALL {
            for n in 1..50 {
                let r = alpha_closed_form(v, &REF, n + 1).unwrap()
                    / alpha_closed_form(v, &REF, n).unwrap();
                assert!((r - 30.0 / 31.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_excess_examples() {
        let v = SchemeVariant::Modified;
        let alpha = alpha_closed_form(v, &REF, 5).unwrap();
        let q14 = crate::numerics::q_inverse(0.25).unwrap();
        let d = alpha * q14 * q14;
        let p = exact_excess_probability(v, &REF, 5, d).unwrap().value();
        assert!((p - 0.5).abs() < 1e-12);

        let p = exact_excess_probability(v, &REF, 2000, 0.9).unwrap().value();
        assert_eq!(p, 0.0);
        assert!(exact_excess_probability(v, &REF, 5, 1.0).is_err());
    }

    #[test]
    fn modified_excess_equals_distortion_bound() {
        let c = 0.5 * (31.0f64 / 30.0).ln();
        for n in [1, 3, 10, 50, 100, 200] {
            for d in [0.05, 0.1, 0.5, 0.9] {
                let x = (d / alpha_closed_form(SchemeVariant::Modified, &REF, n).unwrap()).sqrt();
                let y = (-0.5 * (1.0 / d).ln() + n as f64 * c).exp();
                assert!(((x - y) / y).abs() < 1e-13, "n={n} d={d}: {x} {y}");
                let a = exact_excess_probability(SchemeVariant::Modified, &REF, n, d)
                    .unwrap()
                    .value();
                let b = distortion_bound(&REF, n, d).unwrap().value();
                // relative sensitivity of Q at x is about x² times that of x
                let tol = 1e-14 * (1.0 + y * y);
                assert!((a - b).abs() <= tol * b, "n={n} d={d}: {a} {b}");
            }
        }
    }

    #[test]
    fn excess_probability_nonincreasing_in_n() {
        for v in SchemeVariant::ALL {
            for d in [0.1, 0.5, 0.9] {
                let mut prev = 1.0;
                for n in 1..400 {
                    let p = exact_excess_probability(v, &REF, n, d).unwrap().value();
                    assert!(p <= prev);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn monte_carlo_far_tail_and_determinism() {
        let v = SchemeVariant::Classic;
        let alpha = alpha_closed_form(v, &REF, 4).unwrap();
        let r = monte_carlo_excess_probability(v, &REF, 4, 1e6 * alpha, 10_000, 5).unwrap();
        assert_eq!(r.hits, 0);
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.ci_halfwidth, 0.0);

        let a = monte_carlo_excess_probability(v, &REF, 10, 0.5, 20_000, 99).unwrap();
        let b = monte_carlo_excess_probability(v, &REF, 10, 0.5, 20_000, 99).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_excess_probability(v, &REF, 10, 0.5, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_tracks_analytic_value() {
        let v = SchemeVariant::Modified;
        let r = monte_carlo_excess_probability(v, &REF, 50, 0.5, 200_000, 1234).unwrap();
        let exact = exact_excess_probability(v, &REF, 50, 0.5).unwrap().value();
        assert!((r.estimate - exact).abs() <= r.ci_halfwidth, "{r:?} vs {exact}");
    }

    #[test]
    fn per_step_power_is_p() {
        for v in SchemeVariant::ALL {
            let pw = empirical_power(v, &REF, 12, 100_000, 77).unwrap();
            assert_eq!(pw.len(), 12);
            for (i, e) in pw.iter().enumerate() {
                assert!((e.mean - REF.power).abs() <= 5.0 * e.std_error, "{v} step {}: {e:?}", i + 1);
            }
        }
    }

    #[test]
    fn final_error_moments() {
        for v in SchemeVariant::ALL {
            let m = error_moments(v, &REF, 20, 200_000, 3).unwrap();
            let alpha = alpha_closed_form(v, &REF, 20).unwrap();
            assert!(m.mean().abs() <= 5.0 * m.std_error_of_mean());
            assert!((m.variance() - alpha).abs() <= 5.0 * m.std_error_of_variance());
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("Classic".parse::<SchemeVariant>().unwrap(), SchemeVariant::Classic);
        assert_eq!("modified".parse::<SchemeVariant>().unwrap(), SchemeVariant::Modified);
        assert!("mmse".parse::<SchemeVariant>().is_err());
    }
}
