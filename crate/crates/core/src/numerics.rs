//! Special functions and Gaussian linear algebra shared by every other module.
//!
//! Logarithms are natural throughout, so every information quantity is in nats.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Error, Result};

/// Dispersion of the Gaussian source under squared-error distortion.
pub const SOURCE_DISPERSION: f64 = 0.5;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(domain("Probability::new", format!("{value} is not in [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Information measured in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Nats(pub f64);

impl Nats {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Gaussian tail probability `Q(x) = P[G > x]` for a standard normal `G`.
pub fn q_function(x: f64) -> Result<Probability> {
    if x.is_nan() {
        return Err(domain("q_function", "NaN argument"));
    }
    Ok(Probability(q_raw(x)))
}

#[inline]
pub(crate) fn q_raw(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

#[inline]
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of [`q_function`] on the open interval `(0, 1)`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("q_inverse", format!("{p} is not in (0, 1)")));
    }
    Ok(q_inverse_raw(p))
}

pub(crate) fn q_inverse_raw(p: f64) -> f64 {
    // 1 - p is exact for p >= 1/2, so the upper half maps onto the lower tail
    // without losing the absolute accuracy of p.
    if p > 0.5 {
        return -q_inverse_raw(1.0 - p);
    }
    let mut x = -acklam_normal_quantile(p);
    for _ in 0..2 {
        let e = q_raw(x) - p;
        let u = -e / normal_pdf(x);
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Acklam's rational approximation of the standard normal quantile, relative
/// error about 1.15e-9 before refinement. Valid for `0 < p <= 1/2` here.
fn acklam_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

fn check_noise(op: &'static str, sigma_eta2: f64) -> Result<()> {
    if sigma_eta2 > 0.0 && sigma_eta2.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("noise variance {sigma_eta2} must be positive")))
    }
}

fn check_power(op: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("power {x} must be finite and nonnegative")))
    }
}

/// `C(x) = ½ ln(1 + x/σ_η²)`.
pub fn gaussian_capacity(x: f64, sigma_eta2: f64) -> Result<Nats> {
    check_power("gaussian_capacity", x)?;
    check_noise("gaussian_capacity", sigma_eta2)?;
    Ok(Nats(0.5 * (x / sigma_eta2).ln_1p()))
}

/// `R(d) = ½ ln(σ_s²/d)` on the open interval `0 < d < σ_s²`.
pub fn rate_distortion(d: f64, sigma_s2: f64) -> Result<Nats> {
    if !(d > 0.0 && d < sigma_s2) {
        return Err(domain(
            "rate_distortion",
            format!("distortion {d} must lie in (0, {sigma_s2})"),
        ));
    }
    Ok(Nats(0.5 * (sigma_s2 / d).ln()))
}

/// `V(x) = x(x + 2σ_η²) / (2(x + σ_η²)²)`, always in `[0, ½)`.
pub fn dispersion(x: f64, sigma_eta2: f64) -> Result<f64> {
    check_power("dispersion", x)?;
    check_noise("dispersion", sigma_eta2)?;
    let s = x + sigma_eta2;
    Ok(x * (x + 2.0 * sigma_eta2) / (2.0 * s * s))
}

/// Symmetric covariance matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
}

/// Log-determinant with a cheap conditioning diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub value: f64,
    /// `(max L_ii / min L_ii)²` from the Cholesky factor; a lower estimate of
    /// the 2-norm condition number.
    pub condition: f64,
}

impl CovarianceMatrix {
    /// Validates symmetry (1e-12 relative) and finiteness. Positive
    /// semidefiniteness is checked lazily by the factorization.
    pub fn from_rows(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(domain(
                "CovarianceMatrix::from_rows",
                format!("expected {dim}x{dim} entries, got {}", entries.len()),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(domain("CovarianceMatrix::from_rows", "non-finite entry"));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(domain(
                        "CovarianceMatrix::from_rows",
                        format!("asymmetric at ({i},{j}): {a} vs {b}"),
                    ));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub(crate) fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_lower_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Lower Cholesky factor, row-major; fails on a non positive-definite
    /// matrix.
    fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = self.entries.clone();
        for j in 0..n {
            let mut diag = l[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) {
                return Err(Error::Degenerate(format!(
                    "pivot {j} of {n} is {diag:e}; matrix is not positive definite"
                )));
            }
            let djj = diag.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                l[i * n + j] = 0.0;
            }
        }
        Ok(l)
    }

    pub fn log_det(&self) -> Result<LogDet> {
        let l = self.cholesky()?;
        let diag: Vec<f64> = (0..self.dim).map(|i| l[i * self.dim + i]).collect();
        Ok(LogDet {
            value: diag.iter().map(|d| 2.0 * d.ln()).sum(),
            condition: condition_from_diag(&diag),
        })
    }

    /// `ln det` of every leading principal submatrix: entry `k` is the
    /// log-determinant of the top-left `(k+1)×(k+1)` block. One factorization
    /// serves all prefixes because the Cholesky factor of a leading block is
    /// the leading block of the factor.
    pub fn log_det_prefixes(&self) -> Result<Vec<f64>> {
        let l = self.cholesky()?;
        let mut acc = 0.0;
        Ok((0..self.dim)
            .map(|i| {
                acc += 2.0 * l[i * self.dim + i].ln();
                acc
            })
            .collect())
    }
}

fn condition_from_diag(diag: &[f64]) -> f64 {
    let max = diag.iter().cloned().fold(f64::MIN, f64::max);
    let min = diag.iter().cloned().fold(f64::MAX, f64::min);
    (max / min).powi(2)
}

/// `I(A; B)` for a jointly Gaussian vector whose first `split` coordinates
/// form `A` and the remainder `B`.
pub fn gaussian_mutual_information(joint: &CovarianceMatrix, split: usize) -> Result<Nats> {
    let n = joint.dim();
    if split == 0 || split >= n {
        return Err(domain(
            "gaussian_mutual_information",
            format!("split {split} must be in 1..{n}"),
        ));
    }
    let a: Vec<usize> = (0..split).collect();
    let b: Vec<usize> = (split..n).collect();
    let ld_joint = joint.log_det()?.value;
    let ld_a = joint.submatrix(&a).log_det()?.value;
    let ld_b = joint.submatrix(&b).log_det()?.value;
    Ok(Nats((0.5 * (ld_a + ld_b - ld_joint)).max(0.0)))
}
