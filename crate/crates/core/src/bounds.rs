//! Blocklength and rate bounds for the secrecy-constrained JSCC problem.
//!
//! Lower bounds come from the classic and modified SK schemes (the smallest
//! blocklength meeting both the distortion and the secrecy target). The upper
//! bound comes from the converse: either the fully explicit finite-`N′`
//! inequality ([`UpperMode::Exact`]) or the normal approximation `F1` with a
//! caller-chosen `O(√x)` constant ([`UpperMode::AsymptoticF1`]).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{domain, Error, Result};
use crate::leakage::{n3_search, ntilde2_classic};
use crate::numerics::{
    dispersion, gaussian_capacity, q_inverse_raw, rate_distortion, Nats, SOURCE_DISPERSION,
};
use crate::schemes::ChannelParams;

/// Default upper end of the converse scans.
pub const SCAN_CEILING: usize = 10_000_000;

/// Smallest `P′` accepted by [`b_star`].
pub const B_STAR_POWER_FLOOR: f64 = 1e-9;

/// Distortion threshold, excess-distortion target and secrecy threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub d: f64,
    pub epsilon: f64,
    /// Nats per channel use.
    pub delta: f64,
}

impl TargetSpec {
    pub fn new(d: f64, epsilon: f64, delta: f64) -> Self {
        Self { d, epsilon, delta }
    }

    pub fn validate(&self, params: &ChannelParams) -> Result<()> {
        params.validate()?;
        if !(self.d > 0.0 && self.d < params.sigma_s2) {
            return Err(Error::InvalidParameter {
                name: "d",
                value: self.d,
                reason: "must lie strictly between 0 and sigma_s2",
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must lie strictly between 0 and 1",
            });
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
                reason: "must be finite and strictly positive",
            });
        }
        Ok(())
    }
}

fn ceil_blocklength(v: f64) -> usize {
    if v <= 1.0 {
        1
    } else {
        v.ceil() as usize
    }
}

/// `ln Q⁻¹(ε/2)`; negative when `Q⁻¹(ε/2) < 1`.
fn ln_q_inverse_half(epsilon: f64) -> f64 {
    q_inverse_raw(epsilon / 2.0).ln()
}

/// Classic-scheme blocklengths `(Ñ1, Ñ2)`:
/// `Ñ1 = ⌈(R(d) + ln Q⁻¹(ε/2) + ½ln(1 + σ_η²/P))/C(P)⌉`, `Ñ2` from
/// [`ntilde2_classic`].
pub fn lemma1_lower(params: &ChannelParams, targets: &TargetSpec) -> Result<(usize, usize)> {
    targets.validate(params)?;
    let r = rate_distortion(targets.d, params.sigma_s2)?.value();
    let c = gaussian_capacity(params.power, params.sigma_eta2)?.value();
    let extra = 0.5 * (params.sigma_eta2 / params.power).ln_1p();
    let n1 = ceil_blocklength((r + ln_q_inverse_half(targets.epsilon) + extra) / c);
    Ok((n1, ntilde2_classic(params, targets.delta)?))
}

/// Modified-scheme blocklengths `(N2, N3)`:
/// `N2 = ⌈(R(d) + ln Q⁻¹(ε/2))/C(P)⌉`, `N3` from [`n3_search`].
pub fn theorem2_lower(params: &ChannelParams, targets: &TargetSpec) -> Result<(usize, usize)> {
    targets.validate(params)?;
    let r = rate_distortion(targets.d, params.sigma_s2)?.value();
    let c = gaussian_capacity(params.power, params.sigma_eta2)?.value();
    let n2 = ceil_blocklength((r + ln_q_inverse_half(targets.epsilon)) / c);
    Ok((n2, n3_search(params, targets.delta)?))
}

/// Third-moment coefficients `A = P′/(2(P′+σ²))`, `B = −√(P′σ²)/(P′+σ²)` of
/// the per-channel-use term of the auxiliary sum.
pub fn auxiliary_coefficients(p_prime: f64, sigma_eta2: f64) -> (f64, f64) {
    let s = p_prime + sigma_eta2;
    (p_prime / (2.0 * s), -(p_prime * sigma_eta2).sqrt() / s)
}

/// Bound on `E|T*_0|³` for the source term.
pub const RHO0: f64 = 3.5;

/// Bound on `E|T*_i|³`, `i ≥ 1`: `224|A|³ + 16|B|³√(2/π)`.
pub fn rho1(p_prime: f64, sigma_eta2: f64) -> f64 {
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    224.0 * a.abs().powi(3) + 16.0 * b.abs().powi(3) * (2.0 / std::f64::consts::PI).sqrt()
}

/// `B* = 6·max(ρ0, ρ1)/min(V_d, V(P′))^{3/2}`.
pub fn b_star(p_prime: f64, sigma_eta2: f64) -> Result<f64> {
    if !(p_prime >= B_STAR_POWER_FLOOR && p_prime.is_finite()) {
        return Err(domain(
            "b_star",
            format!("P' = {p_prime} is below the floor {B_STAR_POWER_FLOOR:e}"),
        ));
    }
    let v = dispersion(p_prime, sigma_eta2)?;
    let denom = v.min(SOURCE_DISPERSION).powf(1.5);
    Ok(6.0 * RHO0.max(rho1(p_prime, sigma_eta2)) / denom)
}

/// Quantities of the explicit converse at one candidate blocklength `N′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseContext {
    pub n_prime: usize,
    /// `½ ln N′`.
    pub gamma: f64,
    /// `√(N′−1)·(2/√N′ + B*/√(N′+1))`.
    pub zeta: f64,
    /// `P/(1 − ε − ζ/√(N′−1))`.
    pub p_prime: f64,
    /// `1 − ζ/√(N′−1)`.
    pub epsilon_prime: f64,
    pub b_star: f64,
}

impl ConverseContext {
    /// Builds the context with `B*` evaluated at `P/(1−ε)`, the smallest
    /// power any admissible `P′` can take.
    pub fn new(n_prime: usize, params: &ChannelParams, targets: &TargetSpec) -> Result<Self> {
        let p0 = params.power / (1.0 - targets.epsilon);
        Self::with_b_star(n_prime, params, targets, b_star(p0, params.sigma_eta2)?)
    }

    /// Same as [`ConverseContext::new`] with an explicit Berry-Esseen
    /// constant.
    pub fn with_b_star(
        n_prime: usize,
        params: &ChannelParams,
        targets: &TargetSpec,
        b_star: f64,
    ) -> Result<Self> {
        targets.validate(params)?;
        if n_prime < 2 {
            return Err(Error::InadmissibleContext {
                n_prime,
                reason: "N' must be at least 2".into(),
            });
        }
        if !(b_star > 0.0 && b_star.is_finite()) {
            return Err(domain("ConverseContext", format!("B* = {b_star} must be positive and finite")));
        }
        let n = n_prime as f64;
        let zeta = (n - 1.0).sqrt() * (2.0 / n.sqrt() + b_star / (n + 1.0).sqrt());
        let backoff = zeta / (n - 1.0).sqrt();
        let denom = 1.0 - targets.epsilon - backoff;
        if !(denom > 0.0) {
            return Err(Error::InadmissibleContext {
                n_prime,
                reason: format!("1 - eps - zeta/sqrt(N'-1) = {denom:e} <= 0, P' undefined"),
            });
        }
        Ok(Self {
            n_prime,
            gamma: 0.5 * n.ln(),
            zeta,
            p_prime: params.power / denom,
            epsilon_prime: 1.0 - backoff,
            b_star,
        })
    }

    /// `ε′ + e^{−γ} + B*/√(N′+1)`.
    pub fn q_inverse_argument(&self) -> f64 {
        let n = self.n_prime as f64;
        self.epsilon_prime + (-self.gamma).exp() + self.b_star / (n + 1.0).sqrt()
    }
}

/// Outcome of the converse test at one `N′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConverseVerdict {
    /// The inequality holds: `N′` is not excluded.
    Feasible,
    /// The inequality fails: no code of this blocklength meets the targets.
    Infeasible,
    /// The bound carries no information at this `N′`.
    Vacuous,
}

impl ConverseVerdict {
    pub fn admits(self) -> bool {
        !matches!(self, ConverseVerdict::Infeasible)
    }
}

/// Evaluates `N′C(P′) − R(d) ≥ √(V_d + N′V(P′))·Q⁻¹(ε′ + e^{−γ} + B*/√(N′+1)) − γ`.
pub fn converse_verdict(
    ctx: &ConverseContext,
    params: &ChannelParams,
    targets: &TargetSpec,
) -> Result<ConverseVerdict> {
    let arg = ctx.q_inverse_argument();
    if arg >= 1.0 {
        return Ok(ConverseVerdict::Vacuous);
    }
    if !(arg > 0.0) {
        return Err(domain("converse_verdict", format!("Q^-1 argument {arg} is not positive")));
    }
    let n = ctx.n_prime as f64;
    let r = rate_distortion(targets.d, params.sigma_s2)?.value();
    let lhs = n * gaussian_capacity(ctx.p_prime, params.sigma_eta2)?.value() - r;
    let spread = (SOURCE_DISPERSION + n * dispersion(ctx.p_prime, params.sigma_eta2)?).sqrt();
    let rhs = spread * q_inverse_raw(arg) - ctx.gamma;
    Ok(if lhs >= rhs {
        ConverseVerdict::Feasible
    } else {
        ConverseVerdict::Infeasible
    })
}

/// Whether blocklength `ctx.n_prime` survives the converse.
pub fn converse_feasible(
    ctx: &ConverseContext,
    params: &ChannelParams,
    targets: &TargetSpec,
) -> Result<bool> {
    Ok(converse_verdict(ctx, params, targets)?.admits())
}

/// Verdict at `N′` with the default `B*`; an undefined `P′` is vacuous.
pub fn converse_verdict_at(
    n_prime: usize,
    params: &ChannelParams,
    targets: &TargetSpec,
) -> Result<ConverseVerdict> {
    match ConverseContext::new(n_prime, params, targets) {
        Ok(ctx) => converse_verdict(&ctx, params, targets),
        Err(Error::InadmissibleContext { .. }) if n_prime >= 2 => Ok(ConverseVerdict::Vacuous),
        Err(e) => Err(e),
    }
}

/// `F1(x) = x·C(P/(1−ε)) + √(V_d + x·V(P/(1−ε)))·√(ln x) + o·√x`.
pub fn f1(x: f64, params: &ChannelParams, epsilon: f64, o_coefficient: f64) -> Result<Nats> {
    if !(x >= 2.0) {
        return Err(domain("f1", format!("x = {x} must be at least 2")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain("f1", format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let p = params.power / (1.0 - epsilon);
    let c = gaussian_capacity(p, params.sigma_eta2)?.value();
    let v = dispersion(p, params.sigma_eta2)?;
    Ok(Nats(
        x * c + (SOURCE_DISPERSION + x * v).sqrt() * x.ln().sqrt() + o_coefficient * x.sqrt(),
    ))
}

/// How the converse blocklength is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperMode {
    /// Explicit finite-`N′` inequality, no free constants.
    Exact,
    /// Crossing of `F1` with `R(d)`, `O(√x)` term set to `o_coefficient·√x`.
    /// Approximate.
    AsymptoticF1 { o_coefficient: f64 },
}

impl UpperMode {
    pub const ASYMPTOTIC: UpperMode = UpperMode::AsymptoticF1 { o_coefficient: 0.0 };

    pub fn is_approximate(&self) -> bool {
        matches!(self, UpperMode::AsymptoticF1 { .. })
    }
}

impl fmt::Display for UpperMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperMode::Exact => f.write_str("exact"),
            UpperMode::AsymptoticF1 { .. } => f.write_str("asymptotic"),
        }
    }
}

impl FromStr for UpperMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(UpperMode::Exact),
            "asymptotic" => Ok(UpperMode::ASYMPTOTIC),
            other => Err(domain("UpperMode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Converse blocklength `N1` with the default scan ceiling.
pub fn theorem1_upper(params: &ChannelParams, targets: &TargetSpec, mode: UpperMode) -> Result<usize> {
    theorem1_upper_with_ceiling(params, targets, mode, SCAN_CEILING)
}

/// Smallest `N′ ≥ 2` the converse does not exclude (Exact) or the first
/// `x ≥ 2` with `F1(x) ≥ R(d)` (AsymptoticF1).
pub fn theorem1_upper_with_ceiling(
    params: &ChannelParams,
    targets: &TargetSpec,
    mode: UpperMode,
    ceiling: usize,
) -> Result<usize> {
    targets.validate(params)?;
    let r = rate_distortion(targets.d, params.sigma_s2)?.value();
    let mut last = None;
    for n in 2..=ceiling.max(2) {
        let hit = match mode {
            UpperMode::Exact => {
                let v = converse_verdict_at(n, params, targets)?;
                last = Some(format!("last verdict {v:?}"));
                v.admits()
            }
            UpperMode::AsymptoticF1 { o_coefficient } => {
                let v = f1(n as f64, params, targets.epsilon, o_coefficient)?.value();
                last = Some(format!("F1 = {v} against R(d) = {r}"));
                v >= r
            }
        };
        if hit {
            return Ok(n);
        }
    }
    Err(Error::ScanOverflow {
        what: "theorem1_upper",
        ceiling,
        diagnostics: format!("mode {mode}, d = {}: {}", targets.d, last.unwrap_or_default()),
    })
}

/// Which constraint set a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    Distortion,
    Secrecy,
    Tie,
}

impl Binding {
    fn of(distortion: usize, secrecy: usize) -> Self {
        use std::cmp::Ordering::*;
        match distortion.cmp(&secrecy) {
            Greater => Binding::Distortion,
            Less => Binding::Secrecy,
            Equal => Binding::Tie,
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Binding::Distortion => "distortion",
            Binding::Secrecy => "secrecy",
            Binding::Tie => "tie",
        })
    }
}

impl FromStr for Binding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distortion" => Ok(Binding::Distortion),
            "secrecy" => Ok(Binding::Secrecy),
            "tie" => Ok(Binding::Tie),
            other => Err(domain("Binding", format!("unknown binding `{other}`"))),
        }
    }
}

/// Every blocklength and the resulting rate bracket at one distortion level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub d: f64,
    pub rate_lower_classic: f64,
    pub rate_lower_modified: f64,
    pub rate_upper: f64,
    pub ntilde1: usize,
    pub ntilde2: usize,
    pub n2: usize,
    pub n3: usize,
    pub n1: usize,
    pub binding_classic: Binding,
    pub binding_modified: Binding,
}

/// `min(1/N2, 1/N3) ≤ rate ≤ 1/(N1 − 1)`, plus the classic-scheme bound.
pub fn bracket(params: &ChannelParams, targets: &TargetSpec, mode: UpperMode) -> Result<BoundReport> {
    let (ntilde1, ntilde2) = lemma1_lower(params, targets)?;
    let (n2, n3) = theorem2_lower(params, targets)?;
    let n1 = theorem1_upper(params, targets, mode)?;
    Ok(BoundReport {
        d: targets.d,
        rate_lower_classic: 1.0 / ntilde1.max(ntilde2) as f64,
        rate_lower_modified: 1.0 / n2.max(n3) as f64,
        rate_upper: 1.0 / (n1 - 1) as f64,
        ntilde1,
        ntilde2,
        n2,
        n3,
        n1,
        binding_classic: Binding::of(ntilde1, ntilde2),
        binding_modified: Binding::of(n2, n3),
    })
}

/// [`bracket`] over a distortion grid, in grid order.
pub fn sweep(
    params: &ChannelParams,
    epsilon: f64,
    delta: f64,
    d_grid: &[f64],
    mode: UpperMode,
) -> Result<Vec<BoundReport>> {
    d_grid
        .par_iter()
        .map(|&d| bracket(params, &TargetSpec::new(d, epsilon, delta), mode))
        .collect()
}

/// `d = 0.05, 0.10, …, 0.95`.
pub fn reference_d_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}
