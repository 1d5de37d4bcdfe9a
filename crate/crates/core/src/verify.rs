//! Numerical checks of the converse's probabilistic ingredients: the
//! d-tilted information, the information density and its decomposition, the
//! auxiliary variable `T`, its moment generating function and moments, and
//! the Berry-Esseen step.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;

use crate::bounds::{auxiliary_coefficients, b_star, rho1, RHO0};
use crate::error::{domain, Error, Result};
use crate::numerics::{dispersion, q_raw, rate_distortion, Nats, SOURCE_DISPERSION};
use crate::sampling::{self, Accumulator, Moments};

fn check_channel(op: &'static str, p_prime: f64, sigma_eta2: f64) -> Result<()> {
    if !(p_prime > 0.0 && p_prime.is_finite()) {
        return Err(domain(op, format!("P' = {p_prime} must be positive and finite")));
    }
    if !(sigma_eta2 > 0.0 && sigma_eta2.is_finite()) {
        return Err(domain(op, format!("sigma_eta2 = {sigma_eta2} must be positive and finite")));
    }
    Ok(())
}

/// `j_S(s, d) = R(d) − ½ + s²/(2σ_s²)`.
pub fn d_tilted_information(s: f64, d: f64, sigma_s2: f64) -> Result<Nats> {
    let r = rate_distortion(d, sigma_s2)?.value();
    Ok(Nats(r - 0.5 + s * s / (2.0 * sigma_s2)))
}

/// `ι(x; y)` against the output law `N(0, P′ + σ_η²)`.
pub fn information_density(x: f64, y: f64, p_prime: f64, sigma_eta2: f64) -> Result<Nats> {
    check_channel("information_density", p_prime, sigma_eta2)?;
    let z = y - x;
    let s = p_prime + sigma_eta2;
    Ok(Nats(
        0.5 * (p_prime / sigma_eta2).ln_1p()
            + (-(p_prime / sigma_eta2) * z * z + x * x + 2.0 * x * z) / (2.0 * s),
    ))
}

/// `Ψ(x, y) = (−(P′/σ_η²)(y−x)² + 2x(y−x))/(2(P′+σ_η²))`.
pub fn psi(x: f64, y: f64, p_prime: f64, sigma_eta2: f64) -> Result<f64> {
    check_channel("psi", p_prime, sigma_eta2)?;
    let z = y - x;
    Ok((-(p_prime / sigma_eta2) * z * z + 2.0 * x * z) / (2.0 * (p_prime + sigma_eta2)))
}

/// Independent standard normals `G, K_1 … K_{N′}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryGaussians {
    pub g: f64,
    pub k: Vec<f64>,
}

impl AuxiliaryGaussians {
    pub fn new(g: f64, k: Vec<f64>) -> Result<Self> {
        if k.is_empty() {
            return Err(domain("AuxiliaryGaussians", "need at least one K draw"));
        }
        Ok(Self { g, k })
    }

    pub fn draw(rng: &mut ChaCha8Rng, n_prime: usize) -> Self {
        let g = sampling::std_normal(rng);
        let k = (0..n_prime).map(|_| sampling::std_normal(rng)).collect();
        Self { g, k }
    }
}

/// `T = ½G² + Σ(A·K_i² + B·K_i)`.
pub fn sample_t(aux: &AuxiliaryGaussians, p_prime: f64, sigma_eta2: f64) -> f64 {
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    0.5 * aux.g * aux.g + aux.k.iter().map(|k| a * k * k + b * k).sum::<f64>()
}

/// Centred terms: `T*_0 = ½(G² − 1)`, `T*_i = A(K_i² − 1) + B·K_i`.
pub fn centred_terms(aux: &AuxiliaryGaussians, p_prime: f64, sigma_eta2: f64) -> (f64, Vec<f64>) {
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    (
        0.5 * (aux.g * aux.g - 1.0),
        aux.k.iter().map(|k| a * (k * k - 1.0) + b * k).collect(),
    )
}

/// `E[e^{tT}]` in closed form.
pub fn mgf_closed_form(t: f64, n_prime: usize, p_prime: f64, sigma_eta2: f64) -> Result<f64> {
    check_channel("mgf_closed_form", p_prime, sigma_eta2)?;
    if n_prime == 0 {
        return Err(domain("mgf_closed_form", "N' must be at least 1"));
    }
    if !(t < 1.0) {
        return Err(domain("mgf_closed_form", format!("pole of (1/(1-t))^(1/2): t = {t} >= 1")));
    }
    let s = p_prime + sigma_eta2;
    let tilted = s - p_prime * t;
    if !(tilted > 0.0) {
        return Err(domain(
            "mgf_closed_form",
            format!("pole of ((P'+s2)/(P'+s2-P't))^(N'/2): P'+s2-P't = {tilted} <= 0"),
        ));
    }
    let n = n_prime as f64;
    let log = 0.5 * n * (s / tilted).ln()
        + sigma_eta2 * t * t * n * p_prime / (2.0 * s * tilted)
        - 0.5 * (1.0 - t).ln();
    Ok(log.exp())
}

/// `E[T] = ½ + N′P′/(2(P′+σ_η²))`.
pub fn t_mean(n_prime: usize, p_prime: f64, sigma_eta2: f64) -> f64 {
    0.5 + n_prime as f64 * p_prime / (2.0 * (p_prime + sigma_eta2))
}

/// Mean, variance and third-absolute-moment bound of `Σ_{i=0}^{N′} T*_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSums {
    pub mean: f64,
    pub variance: f64,
    pub rho_bound: f64,
}

/// Mean 0, variance `V_d + N′·V(P′)`, `ρ ≤ 3.5 + N′·(224|A|³ + 16|B|³√(2/π))`.
pub fn moment_sums(n_prime: usize, p_prime: f64, sigma_eta2: f64) -> Result<MomentSums> {
    check_channel("moment_sums", p_prime, sigma_eta2)?;
    if n_prime == 0 {
        return Err(domain("moment_sums", "N' must be at least 1"));
    }
    let n = n_prime as f64;
    Ok(MomentSums {
        mean: 0.0,
        variance: SOURCE_DISPERSION + n * dispersion(p_prime, sigma_eta2)?,
        rho_bound: RHO0 + n * rho1(p_prime, sigma_eta2),
    })
}

/// Monte Carlo against closed form for one `(t, N′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfCheck {
    pub t: f64,
    pub n_prime: usize,
    pub closed_form: f64,
    pub mc_estimate: f64,
    /// One standard error of `mc_estimate`.
    pub mc_halfwidth: f64,
    pub trials: u64,
}

impl MgfCheck {
    pub fn tolerance(&self) -> f64 {
        (3.0 * self.mc_halfwidth).max(0.01 * self.closed_form)
    }

    pub fn passes(&self) -> bool {
        (self.closed_form - self.mc_estimate).abs() <= self.tolerance()
    }
}

/// Checks several `t` values on the same draws of `T`.
pub fn mgf_checks(
    ts: &[f64],
    n_prime: usize,
    p_prime: f64,
    sigma_eta2: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<MgfCheck>> {
    check_trials(trials)?;
    let closed: Vec<f64> = ts
        .iter()
        .map(|&t| mgf_closed_form(t, n_prime, p_prime, sigma_eta2))
        .collect::<Result<_>>()?;
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    let acc: Vec<Moments> = sampling::run_trials(
        trials,
        seed,
        || vec![Moments::default(); ts.len()],
        |rng, acc| {
            let g = sampling::std_normal(rng);
            let mut t_val = 0.5 * g * g;
            for _ in 0..n_prime {
                let k = sampling::std_normal(rng);
                t_val += a * k * k + b * k;
            }
            for (m, &t) in acc.iter_mut().zip(ts) {
                m.push((t * t_val).exp());
            }
        },
    );
    Ok(ts
        .iter()
        .zip(closed)
        .zip(acc)
        .map(|((&t, closed_form), m)| MgfCheck {
            t,
            n_prime,
            closed_form,
            mc_estimate: m.mean(),
            mc_halfwidth: m.std_error_of_mean(),
            trials,
        })
        .collect())
}

/// Single-`t` form of [`mgf_checks`].
pub fn mgf_check(t: f64, n_prime: usize, p_prime: f64, sigma_eta2: f64, trials: u64, seed: u64) -> Result<MgfCheck> {
    Ok(mgf_checks(&[t], n_prime, p_prime, sigma_eta2, trials, seed)?[0])
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 2 {
        return Err(domain("monte carlo", "trials must be at least 2"));
    }
    Ok(())
}

/// Simulated moments of the centred sum and of its first two kinds of term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimulatedMoments {
    /// `Σ_{i=0}^{N′} T*_i`.
    pub sum: Moments,
    /// `T*_0`.
    pub source_term: Moments,
    /// `T*_1`.
    pub channel_term: Moments,
}

impl Accumulator for SimulatedMoments {
    fn merge(&mut self, o: Self) {
        self.sum.merge(o.sum);
        self.source_term.merge(o.source_term);
        self.channel_term.merge(o.channel_term);
    }
}

pub fn simulate_moments(
    n_prime: usize,
    p_prime: f64,
    sigma_eta2: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulatedMoments> {
    check_channel("simulate_moments", p_prime, sigma_eta2)?;
    check_trials(trials)?;
    if n_prime == 0 {
        return Err(domain("simulate_moments", "N' must be at least 1"));
    }
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    Ok(sampling::run_trials(trials, seed, SimulatedMoments::default, |rng, acc| {
        let g = sampling::std_normal(rng);
        let t0 = 0.5 * (g * g - 1.0);
        acc.source_term.push(t0);
        let mut total = t0;
        for i in 0..n_prime {
            let k = sampling::std_normal(rng);
            let ti = a * (k * k - 1.0) + b * k;
            if i == 0 {
                acc.channel_term.push(ti);
            }
            total += ti;
        }
        acc.sum.push(total);
    }))
}

/// Empirical and Gaussian tails of the centred sum, with the Berry-Esseen
/// allowance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryEsseenGap {
    pub threshold: f64,
    pub empirical_tail: f64,
    pub normal_tail: f64,
    /// `B*/√(N′+1)`.
    pub bound: f64,
    /// `3·√(p̂(1−p̂)/trials)`.
    pub mc_halfwidth: f64,
    pub trials: u64,
}

impl BerryEsseenGap {
    pub fn gap(&self) -> f64 {
        (self.empirical_tail - self.normal_tail).abs()
    }

    pub fn contained(&self) -> bool {
        self.gap() <= self.bound + self.mc_halfwidth
    }
}

/// `P[Σ T*_i ≥ threshold]` for several thresholds on shared draws.
pub fn berry_esseen_gaps(
    n_prime: usize,
    p_prime: f64,
    sigma_eta2: f64,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<BerryEsseenGap>> {
    let sums = moment_sums(n_prime, p_prime, sigma_eta2)?;
    check_trials(trials)?;
    let bound = b_star(p_prime, sigma_eta2)? / ((n_prime + 1) as f64).sqrt();
    let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
    let hits: Vec<u64> = sampling::run_trials(
        trials,
        seed,
        || vec![0u64; thresholds.len()],
        |rng, acc| {
            let g = sampling::std_normal(rng);
            let mut total = 0.5 * (g * g - 1.0);
            for _ in 0..n_prime {
                let k = sampling::std_normal(rng);
                total += a * (k * k - 1.0) + b * k;
            }
            for (h, &th) in acc.iter_mut().zip(thresholds) {
                *h += u64::from(total >= th);
            }
        },
    );
    let sd = sums.variance.sqrt();
    Ok(thresholds
        .iter()
        .zip(hits)
        .map(|(&threshold, h)| {
            let p = h as f64 / trials as f64;
            BerryEsseenGap {
                threshold,
                empirical_tail: p,
                normal_tail: q_raw(threshold / sd),
                bound,
                mc_halfwidth: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
                trials,
            }
        })
        .collect())
}

pub fn berry_esseen_gap(
    n_prime: usize,
    p_prime: f64,
    sigma_eta2: f64,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> Result<BerryEsseenGap> {
    Ok(berry_esseen_gaps(n_prime, p_prime, sigma_eta2, &[threshold], trials, seed)?[0])
}

/// The verification grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Mgf,
    Moments,
    BerryEsseen,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Mgf, Suite::Moments, Suite::BerryEsseen];

    pub fn default_trials(self) -> u64 {
        match self {
            Suite::Mgf => 10_000_000,
            Suite::Moments => 1_000_000,
            Suite::BerryEsseen => 10_000_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Mgf => "mgf",
            Suite::Moments => "moments",
            Suite::BerryEsseen => "berry_esseen",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mgf" => Ok(Suite::Mgf),
            "moments" => Ok(Suite::Moments),
            "berry_esseen" | "berry-esseen" => Ok(Suite::BerryEsseen),
            other => Err(domain("Suite", format!("unknown suite `{other}`"))),
        }
    }
}

/// How a check compares `observed` with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `|observed − expected| ≤ tolerance`.
    Within,
    /// `observed ≤ expected + tolerance`.
    AtMost,
}

/// One line of a verification summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
}

impl CheckLine {
    pub fn within(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            expected,
            tolerance,
            relation: Relation::Within,
        }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            expected: bound,
            tolerance,
            relation: Relation::AtMost,
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::Within => (self.observed - self.expected).abs() <= self.tolerance,
            Relation::AtMost => self.observed <= self.expected + self.tolerance,
        }
    }
}

/// Channel and sampling settings shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub p_prime: f64,
    pub sigma_eta2: f64,
    /// `None` uses [`Suite::default_trials`].
    pub trials: Option<u64>,
    pub seed: u64,
}

pub const MGF_T_GRID: [f64; 5] = [-2.0, -1.0, -0.3, 0.3, 0.7];
pub const MGF_N_GRID: [usize; 4] = [1, 5, 20, 100];
pub const MOMENTS_N_GRID: [usize; 3] = [1, 10, 50];
pub const BERRY_ESSEEN_N_GRID: [usize; 3] = [10, 50, 200];
pub const BERRY_ESSEEN_SIGMAS: [f64; 3] = [0.0, 1.0, 3.0];

/// Central difference of the closed-form MGF at 0 with step `1e-5`.
pub fn mgf_derivative_at_zero(n_prime: usize, p_prime: f64, sigma_eta2: f64) -> Result<f64> {
    let h = 1e-5;
    Ok((mgf_closed_form(h, n_prime, p_prime, sigma_eta2)?
        - mgf_closed_form(-h, n_prime, p_prime, sigma_eta2)?)
        / (2.0 * h))
}

/// Runs one suite; every grid point gets its own seed derived from
/// `settings.seed`.
pub fn run_suite(suite: Suite, settings: &VerifySettings) -> Result<Vec<CheckLine>> {
    let VerifySettings {
        p_prime,
        sigma_eta2,
        seed,
        ..
    } = *settings;
    check_channel("run_suite", p_prime, sigma_eta2)?;
    let trials = settings.trials.unwrap_or(suite.default_trials());
    check_trials(trials)?;
    let mut lines = Vec::new();
    match suite {
        Suite::Mgf => {
            for (j, &n) in MGF_N_GRID.iter().enumerate() {
                let deriv = mgf_derivative_at_zero(n, p_prime, sigma_eta2)?;
                lines.push(CheckLine::within(
                    format!("mgf_derivative n={n}"),
                    deriv,
                    t_mean(n, p_prime, sigma_eta2),
                    1e-6,
                ));
                let ts: Vec<f64> = MGF_T_GRID
                    .iter()
                    .copied()
                    .filter(|&t| mgf_closed_form(t, n, p_prime, sigma_eta2).is_ok())
                    .collect();
                for c in mgf_checks(&ts, n, p_prime, sigma_eta2, trials, seed.wrapping_add(j as u64))? {
                    lines.push(CheckLine::within(
                        format!("mgf t={} n={n}", c.t),
                        c.mc_estimate,
                        c.closed_form,
                        c.tolerance(),
                    ));
                }
            }
        }
        Suite::Moments => {
            let (a, b) = auxiliary_coefficients(p_prime, sigma_eta2);
            let v = dispersion(p_prime, sigma_eta2)?;
            lines.push(CheckLine::within("identity 2A^2+B^2=V(P')", 2.0 * a * a + b * b, v, 1e-14));
            for (j, &n) in MOMENTS_N_GRID.iter().enumerate() {
                let want = moment_sums(n, p_prime, sigma_eta2)?;
                let sim = simulate_moments(n, p_prime, sigma_eta2, trials, seed.wrapping_add(j as u64))?;
                lines.push(CheckLine::within(
                    format!("sum_mean n={n}"),
                    sim.sum.mean(),
                    want.mean,
                    5.0 * sim.sum.std_error_of_mean(),
                ));
                lines.push(CheckLine::within(
                    format!("sum_variance n={n}"),
                    sim.sum.variance(),
                    want.variance,
                    5.0 * sim.sum.std_error_of_variance(),
                ));
                lines.push(CheckLine::at_most(
                    format!("rho0 n={n}"),
                    sim.source_term.mean_abs_cubed(),
                    RHO0,
                    0.0,
                ));
                lines.push(CheckLine::at_most(
                    format!("rho1 n={n}"),
                    sim.channel_term.mean_abs_cubed(),
                    rho1(p_prime, sigma_eta2),
                    0.0,
                ));
            }
        }
        Suite::BerryEsseen => {
            for (j, &n) in BERRY_ESSEEN_N_GRID.iter().enumerate() {
                let sd = moment_sums(n, p_prime, sigma_eta2)?.variance.sqrt();
                let ths: Vec<f64> = BERRY_ESSEEN_SIGMAS.iter().map(|k| k * sd).collect();
                let gaps = berry_esseen_gaps(n, p_prime, sigma_eta2, &ths, trials, seed.wrapping_add(j as u64))?;
                for (g, k) in gaps.iter().zip(BERRY_ESSEEN_SIGMAS) {
                    lines.push(CheckLine::at_most(
                        format!("berry_esseen n={n} threshold={k}sd"),
                        g.gap(),
                        g.bound,
                        g.mc_halfwidth,
                    ));
                }
            }
        }
    }
    Ok(lines)
}
