//! Exact eavesdropper leakage for SK-type encoders and its analytic upper
//! bound.
//!
//! Every channel input is a fixed linear combination of the source and of
//! Bob's past noise samples, so `(S, Z^N, Z̃^N)` is jointly Gaussian and the
//! leakage `I(S; Z^N, Z̃^N)/N` follows from log-determinants of its
//! covariance.

use crate::error::{domain, Result};
use crate::numerics::{gaussian_mutual_information, CovarianceMatrix, Nats};
use crate::schemes::{alpha_closed_form, ChannelParams, SchemeVariant};

/// `X_i = s_coeff·S + Σ_k noise_coeffs[k]·η_{k+1}`, over `η_1 … η_{i−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub s_coeff: f64,
    pub noise_coeffs: Vec<f64>,
}

impl LinearForm {
    /// Channel use this form belongs to.
    pub fn step(&self) -> usize {
        self.noise_coeffs.len() + 1
    }

    pub fn variance(&self, params: &ChannelParams) -> f64 {
        params.sigma_s2 * self.s_coeff * self.s_coeff
            + params.sigma_eta2 * self.noise_coeffs.iter().map(|c| c * c).sum::<f64>()
    }

    /// Coefficient of `η_k` (1-based); zero for noises the form does not see.
    pub fn noise(&self, k: usize) -> f64 {
        self.noise_coeffs.get(k.wrapping_sub(1)).copied().unwrap_or(0.0)
    }
}

fn check_blocklength(op: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain(op, "blocklength must be at least 1"));
    }
    Ok(())
}

/// Channel inputs `X_1 … X_N` as linear forms, obtained by pushing the
/// estimator recursion through coefficient vectors.
pub fn input_linear_forms(
    variant: SchemeVariant,
    params: &ChannelParams,
    n: usize,
) -> Result<Vec<LinearForm>> {
    params.validate()?;
    check_blocklength("input_linear_forms", n)?;
    let lam = params.lambda();
    let mut forms = Vec::with_capacity(n);
    forms.push(LinearForm {
        s_coeff: lam,
        noise_coeffs: Vec::new(),
    });

    // u_i = ε_i/√α_i over (S, η_1 … η_i), so X_{i+1} = √P·u_i. Dividing
    // ε_i = ε_{i−1} − β_i(X_i + η_i) by √α_i = √(κα_{i−1}) gives
    // u_i = √κ·u_{i−1} − (√P/((P+σ_η²)√κ))·η_i, which never forms α_i and so
    // cannot underflow at large i.
    let alpha1 = alpha_closed_form(variant, params, 1)?;
    let root_alpha1 = alpha1.sqrt();
    let (mut u_s, mut u_noise) = match variant {
        SchemeVariant::Classic => (0.0, vec![1.0 / (lam * root_alpha1)]),
        SchemeVariant::Modified => {
            let g = lam * params.sigma_s2 / (params.power + params.sigma_eta2);
            ((g * lam - 1.0) / root_alpha1, vec![g / root_alpha1])
        }
    };
    let root_p = params.power.sqrt();
    let root_k = params.kappa().sqrt();
    let gain = root_p / ((params.power + params.sigma_eta2) * root_k);
    for _ in 2..=n {
        forms.push(LinearForm {
            s_coeff: root_p * u_s,
            noise_coeffs: u_noise.iter().map(|c| root_p * c).collect(),
        });
        u_s *= root_k;
        for c in u_noise.iter_mut() {
            *c *= root_k;
        }
        u_noise.push(-gain);
    }
    Ok(forms)
}

/// Closed-form input of the modified scheme at step `n`:
/// `X_n = −λκ^{(n−1)/2}S + (1−κ)κ^{(n−3)/2}η_1 − Σ_{k=2}^{n−1}(1−κ)κ^{(n−k−2)/2}η_k`.
pub fn modified_input_closed_form(params: &ChannelParams, n: usize) -> Result<LinearForm> {
    check_blocklength("modified_input_closed_form", n)?;
    let lam = params.lambda();
    if n == 1 {
        return Ok(LinearForm {
            s_coeff: lam,
            noise_coeffs: Vec::new(),
        });
    }
    let k = params.kappa();
    let one_minus = params.power / (params.power + params.sigma_eta2);
    let nf = n as f64;
    let mut noise = Vec::with_capacity(n - 1);
    noise.push(one_minus * k.powf((nf - 3.0) / 2.0));
    for j in 2..n {
        noise.push(-one_minus * k.powf((nf - j as f64 - 2.0) / 2.0));
    }
    Ok(LinearForm {
        s_coeff: -lam * k.powf((nf - 1.0) / 2.0),
        noise_coeffs: noise,
    })
}

/// Covariance of `(S, Z_1, Z̃_1, …, Z_N, Z̃_N)` with `Z_i = X_i + η_{e,i}` and
/// `Z̃_i = X_i + η_i + η̃_{e,i}`. Interleaving the two eavesdroppers keeps
/// every leading block equal to the covariance for a shorter blocklength.
pub fn eavesdropper_covariance(forms: &[LinearForm], params: &ChannelParams) -> CovarianceMatrix {
    let n = forms.len();
    // Each coordinate as (coefficient of S, coefficients of η_1..η_N); the
    // eavesdropper noises only touch the diagonal.
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::with_capacity(1 + 2 * n);
    rows.push((1.0, vec![0.0; n]));
    for (i, f) in forms.iter().enumerate() {
        let mut c = vec![0.0; n];
        c[..f.noise_coeffs.len()].copy_from_slice(&f.noise_coeffs);
        rows.push((f.s_coeff, c.clone()));
        c[i] += 1.0;
        rows.push((f.s_coeff, c));
    }
    CovarianceMatrix::from_lower_fn(1 + 2 * n, |i, j| {
        let (si, ci) = &rows[i];
        let (sj, cj) = &rows[j];
        let shared = ci.iter().zip(cj).map(|(a, b)| a * b).sum::<f64>();
        let mut v = params.sigma_s2 * si * sj + params.sigma_eta2 * shared;
        if i == j && i > 0 {
            v += if i % 2 == 1 {
                params.sigma_e2
            } else {
                params.sigma_e2_tilde
            };
        }
        v
    })
}

/// `L_N = I(S; Z^N, Z̃^N)/N` in nats per channel use.
pub fn exact_leakage(variant: SchemeVariant, params: &ChannelParams, n: usize) -> Result<Nats> {
    let forms = input_linear_forms(variant, params, n)?;
    let joint = eavesdropper_covariance(&forms, params);
    Ok(Nats(gaussian_mutual_information(&joint, 1)?.value() / n as f64))
}

/// Exact leakage and its analytic bound for every `N = 1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageProfile {
    pub variant: SchemeVariant,
    pub n_max: usize,
    /// `exact[N−1] = L_N`.
    pub exact: Vec<f64>,
    /// `f2[N−1] = F2(N)`.
    pub f2: Vec<f64>,
    /// Conditioning diagnostic of the full joint covariance.
    pub condition: f64,
}

impl LeakageProfile {
    /// `F2(N) − L_N`.
    pub fn margin(&self, n: usize) -> f64 {
        self.f2[n - 1] - self.exact[n - 1]
    }

    /// Blocklengths at which the exact leakage exceeds the bound by more
    /// than `tol`.
    pub fn violations(&self, tol: f64) -> Vec<usize> {
        (1..=self.n_max).filter(|&n| self.margin(n) < -tol).collect()
    }
}

/// Builds the profile from two factorizations: the joint covariance and the
/// observation block without `S`.
pub fn leakage_profile(
    variant: SchemeVariant,
    params: &ChannelParams,
    n_max: usize,
) -> Result<LeakageProfile> {
    let forms = input_linear_forms(variant, params, n_max)?;
    let joint = eavesdropper_covariance(&forms, params);
    let obs_idx: Vec<usize> = (1..joint.dim()).collect();
    let ld_joint = joint.log_det_prefixes()?;
    let ld_obs = joint.submatrix(&obs_idx).log_det_prefixes()?;
    let ld_s = params.sigma_s2.ln();
    let condition = joint.log_det()?.condition;
    let mut exact = Vec::with_capacity(n_max);
    let mut f2 = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mi = 0.5 * (ld_s + ld_obs[2 * n - 1] - ld_joint[2 * n]);
        exact.push(mi.max(0.0) / n as f64);
        f2.push(f2_bound(params, n)?.value());
    }
    Ok(LeakageProfile {
        variant,
        n_max,
        exact,
        f2,
        condition,
    })
}

/// `F2(N) = (1/2N)·((P+σ_η²)(σ_e²+σ̃_e²)/(σ_e²σ̃_e²))·(1 − κ^N)`.
pub fn f2_bound(params: &ChannelParams, n: usize) -> Result<Nats> {
    check_blocklength("f2_bound", n)?;
    let pre = (params.power + params.sigma_eta2) * (params.sigma_e2 + params.sigma_e2_tilde)
        / (params.sigma_e2 * params.sigma_e2_tilde);
    // 1 − κ^N without cancellation for small P
    let one_minus = -(n as f64 * params.kappa().ln()).exp_m1();
    Ok(Nats(pre * one_minus / (2.0 * n as f64)))
}

fn check_delta(op: &'static str, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(op, format!("delta = {delta} must be positive and finite")));
    }
    Ok(())
}

/// Smallest `N ≥ 1` with `F2(N) ≤ δ`.
pub fn n3_search(params: &ChannelParams, delta: f64) -> Result<usize> {
    params.validate()?;
    check_delta("n3_search", delta)?;
    let f = |n: usize| f2_bound(params, n).map(|v| v.value());
    if f(1)? <= delta {
        return Ok(1);
    }
    // F2(N) < prefactor/(2N) gives an upper end for a bisection on the
    // monotone sequence.
    let pre = (params.power + params.sigma_eta2) * (params.sigma_e2 + params.sigma_e2_tilde)
        / (params.sigma_e2 * params.sigma_e2_tilde);
    let mut hi = ((pre / (2.0 * delta)).ceil() as usize).max(2);
    while f(hi)? > delta {
        hi *= 2;
    }
    let mut lo = 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid)? <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `Ñ2 = ⌈(1/2δ)·ln((1+P/σ_e²)(1+P/σ̃_e²))⌉`, at least 1.
pub fn ntilde2_classic(params: &ChannelParams, delta: f64) -> Result<usize> {
    params.validate()?;
    check_delta("ntilde2_classic", delta)?;
    let v = ((params.power / params.sigma_e2).ln_1p() + (params.power / params.sigma_e2_tilde).ln_1p())
        / (2.0 * delta);
    Ok((v.ceil() as usize).max(1))
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
    fn first_input_is_scaled_source() {
        for v in SchemeVariant::ALL {
            let f = &input_linear_forms(v, &REF, 1).unwrap()[0];
            assert_eq!(f.s_coeff, 1.0);
            assert!(f.noise_coeffs.is_empty());
        }
        assert!(input_linear_forms(SchemeVariant::Classic, &REF, 0).is_err());
    }

    #[test]
    fn modified_forms_match_closed_form() {
        let other = ChannelParams::new(2.5, 0.4, 1.0, 3.0, 7.0).unwrap();
        for p in [REF, other] {
            let forms = input_linear_forms(SchemeVariant::Modified, &p, 120).unwrap();
            for (i, f) in forms.iter().enumerate() {
                let cf = modified_input_closed_form(&p, i + 1).unwrap();
                assert_eq!(f.step(), i + 1);
                assert_eq!(f.noise_coeffs.len(), cf.noise_coeffs.len());
                assert!((f.s_coeff - cf.s_coeff).abs() < 1e-10);
                for (a, b) in f.noise_coeffs.iter().zip(&cf.noise_coeffs) {
                    assert!((a - b).abs() < 1e-10, "step {}: {a} vs {b}", i + 1);
                }
            }
        }
    }

    #[test]
    fn every_form_carries_power_p() {
        let other = ChannelParams::new(0.3, 5.0, 1.0, 1.0, 0.2).unwrap();
        for v in SchemeVariant::ALL {
            for p in [REF, other] {
                for f in input_linear_forms(v, &p, 300).unwrap() {
                    assert!(((f.variance(&p) - p.power) / p.power).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn classic_second_input_is_first_noise() {
        // ε_1 = η_1/λ and α_1 = σ_η²/λ², so X_2 = η_1/σ_η · √P
        let f = &input_linear_forms(SchemeVariant::Classic, &REF, 2).unwrap()[1];
        assert_eq!(f.s_coeff, 0.0);
        assert!((f.noise(1) - (REF.power / REF.sigma_eta2).sqrt()).abs() < 1e-15);
    }

    fn n1_closed_form(p: &ChannelParams) -> f64 {
        0.5 * (1.0 + p.power / p.sigma_e2 + p.power / (p.sigma_eta2 + p.sigma_e2_tilde)).ln()
    }

    #[test]
    fn single_use_leakage_matches_determinant_oracle() {
        let other = ChannelParams::new(4.0, 0.5, 2.0, 9.0, 3.0).unwrap();
        for p in [REF, other] {
            for v in SchemeVariant::ALL {
                let l = exact_leakage(v, &p, 1).unwrap().value();
                let want = n1_closed_form(&p);
                assert!(((l - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_noise_eavesdropper_learns_nothing() {
        let p = ChannelParams {
            sigma_e2: 1e12,
            sigma_e2_tilde: 1e12,
            ..REF
        };
        for v in SchemeVariant::ALL {
            for n in [1, 5, 40] {
                assert!(exact_leakage(v, &p, n).unwrap().value() < 1e-6);
            }
        }
    }

    #[test]
    fn profile_matches_direct_computation() {
        for v in SchemeVariant::ALL {
            let prof = leakage_profile(v, &REF, 60).unwrap();
            for n in [1, 2, 7, 30, 60] {
                let direct = exact_leakage(v, &REF, n).unwrap().value();
                assert!((prof.exact[n - 1] - direct).abs() < 1e-12, "{v} n={n}");
            }
            assert!(prof.condition >= 1.0 && prof.condition.is_finite());
        }
    }

    #[test]
    fn modified_leakage_below_f2_at_reference() {
        let prof = leakage_profile(SchemeVariant::Modified, &REF, 200).unwrap();
        assert!(prof.violations(1e-10).is_empty());
    }

    #[test]
    fn total_information_grows_and_leakage_falls_with_noise() {
        for v in SchemeVariant::ALL {
            let prof = leakage_profile(v, &REF, 100).unwrap();
            for n in 2..=100 {
                let a = prof.exact[n - 2] * (n - 1) as f64;
                let b = prof.exact[n - 1] * n as f64;
                assert!(b >= a - 1e-12, "{v} n={n}");
            }
            for n in [1, 10, 50] {
                let base = exact_leakage(v, &REF, n).unwrap().value();
                let e = exact_leakage(v, &ChannelParams { sigma_e2: 60.0, ..REF }, n).unwrap();
                let t = exact_leakage(v, &ChannelParams { sigma_e2_tilde: 80.0, ..REF }, n).unwrap();
                assert!(e.value() < base && t.value() < base);
            }
        }
    }

    #[test]
    fn f2_values() {
        let f1 = f2_bound(&REF, 1).unwrap().value();
        assert!((f1 - 70.0 / 2400.0).abs() < 1e-15);
        let pre = 31.0 * 70.0 / 1200.0;
        let k: f64 = 30.0 / 31.0;
        let f10 = f2_bound(&REF, 10).unwrap().value();
        assert!((f10 - pre * (1.0 - k.powi(10)) / 20.0).abs() < 1e-15);
        assert!(f2_bound(&REF, 1_000_000).unwrap().value() < 1e-5);
        assert!(f2_bound(&REF, 0).is_err());
        let mut prev = f64::INFINITY;
        for n in 1..5000 {
            let v = f2_bound(&REF, n).unwrap().value();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn n3_two_sided_condition() {
        let f = |n| f2_bound(&REF, n).unwrap().value();
        let n3 = n3_search(&REF, 0.01).unwrap();
        assert_eq!(n3, 85);
        assert!(f(n3 - 1) > 0.01 && f(n3) <= 0.01);
        assert_eq!(n3_search(&REF, f(1)).unwrap(), 1);
        assert_eq!(n3_search(&REF, 1.0).unwrap(), 1);
        let mut prev = 1;
        let mut delta = 0.05;
        while delta > 1e-6 {
            let n = n3_search(&REF, delta).unwrap();
            assert!(n >= prev);
            assert!(n == 1 || f(n - 1) > delta);
            assert!(f(n) <= delta);
            prev = n;
            delta /= 2.0;
        }
        assert!(n3_search(&REF, 0.0).is_err());
    }

    #[test]
    fn ntilde2_values() {
        let raw = 50.0 * ((31.0f64 / 30.0) * (41.0 / 40.0)).ln();
        assert_eq!(ntilde2_classic(&REF, 0.01).unwrap(), raw.ceil() as usize);
        assert_eq!(ntilde2_classic(&REF, 0.01).unwrap(), 3);
        let tiny = ChannelParams { power: 1e-12, ..REF };
        assert_eq!(ntilde2_classic(&tiny, 0.01).unwrap(), 1);
        let base = 0.5 * ((31.0f64 / 30.0) * (41.0 / 40.0)).ln();
        for delta in [1e-4, 1e-3, 0.01] {
            let a = ntilde2_classic(&REF, delta).unwrap();
            let b = ntilde2_classic(&REF, 2.0 * delta).unwrap();
            assert_eq!(b, (base / (2.0 * delta)).ceil() as usize);
            assert_eq!(a, (base / delta).ceil() as usize);
        }
    }
}
