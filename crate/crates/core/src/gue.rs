//! The Gaussian unitary ensemble: sampling, the Hermite-function kernel,
//! the Laguerre form of the averaged partition function, the annealed
//! finite-d spectral form factor, its large-d asymptotics, and dip/plateau
//! time estimates.
//!
//! All special-function recurrences run in scaled (mantissa, exponent)
//! arithmetic so that nothing overflows even when the raw Laguerre values
//! span thousands of orders of magnitude at large `tau`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dephasing::DecoherenceTime;
use crate::ensemble::CharacteristicTimes;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorials, Scaled};
use crate::spectra::{hermitian_eigenvalues, ComplexBeta, Spectrum, SpectrumMeta};

/// Parameters of one GUE draw: matrix dimension, standard deviation of the
/// off-diagonal elements, seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GueParams {
    pub dim: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl GueParams {
    pub fn new(dim: usize, sigma: f64, seed: u64) -> Result<Self> {
        GueParams { dim, sigma, seed }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.dim < 1 {
            return Err(Error::InvalidParams("GUE dimension must be >= 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        Ok(self)
    }
}

/// Draw one GUE matrix: diagonal real N(0, sigma^2), off-diagonal real and
/// imaginary parts each N(0, sigma^2/2). Entries are keyed by (seed, index
/// pair), so the assembly order is irrelevant.
pub fn sample_matrix(params: &GueParams) -> DMatrix<Complex64> {
    let d = params.dim;
    let s = params.sigma;
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for i in 0..d {
        for j in i..d {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream((i * d + j) as u64);
            if i == j {
                let x: f64 = StandardNormal.sample(&mut rng);
                m[(i, i)] = Complex64::new(s * x, 0.0);
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let h = s / 2.0f64.sqrt();
                m[(i, j)] = Complex64::new(h * re, h * im);
                m[(j, i)] = m[(i, j)].conj();
            }
        }
    }
    m
}

/// Sample one GUE spectrum.
pub fn sample(params: &GueParams) -> Result<Spectrum> {
    let params = params.validated()?;
    let eigs = hermitian_eigenvalues(&sample_matrix(&params))?;
    Spectrum::from_eigenvalues(
        eigs,
        SpectrumMeta::new("gue", params.seed)
            .with_param("dim", params.dim)
            .with_param("sigma", format!("{:e}", params.sigma)),
    )
}

/// Normalized harmonic-oscillator functions phi_0..phi_{count-1} at x via
/// the three-term recurrence in scaled arithmetic (the seed value
/// e^{-x^2/2} underflows f64 near |x| ~ 40 while later phi_l are O(1)).
fn phi_sequence(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let ln_phi0 = -0.25 * std::f64::consts::PI.ln() - 0.5 * x * x;
    let mut prev = Scaled::ZERO;
    let mut curr = Scaled::from_ln(ln_phi0, false);
    out.push(curr.to_f64());
    for l in 0..count.saturating_sub(1) {
        let lf = l as f64;
        let a = x * (2.0 / (lf + 1.0)).sqrt();
        let b = (lf / (lf + 1.0)).sqrt();
        // phi_{l+1} = a phi_l - b phi_{l-1}
        let next = curr.mul_f64(a).sub(prev.mul_f64(b));
        prev = curr;
        curr = next;
        out.push(curr.to_f64());
    }
    out
}

/// Harmonic-oscillator function `phi_l(x) = e^{-x^2/2} H_l(x) / sqrt(sqrt(pi) 2^l l!)`.
pub fn hermite_phi(l: usize, x: f64) -> f64 {
    assert!(l <= 1_000_000, "l out of supported range");
    assert!(x.is_finite());
    phi_sequence(l + 1, x)[l]
}

/// Hermite kernel `K_d(x, y) = sum_{l<d} phi_l(x) phi_l(y)`.
pub fn kernel(d: usize, x: f64, y: f64) -> f64 {
    let px = phi_sequence(d, x);
    if x == y {
        return px.iter().map(|p| p * p).sum();
    }
    let py = phi_sequence(d, y);
    px.iter().zip(&py).map(|(a, b)| a * b).sum()
}

/// GUE-averaged eigenvalue density `<rho(E)> = K_d(E~, E~)/(sqrt(2) sigma)`
/// with `E~ = E/(sqrt(2) sigma)`; integrates to d.
pub fn kernel_density(params: &GueParams, energy: f64) -> f64 {
    let scale = 2.0f64.sqrt() * params.sigma;
    kernel(params.dim, energy / scale, energy / scale) / scale
}

/// Associated Laguerre polynomial `L_n^{(alpha)}(z)` by the three-term
/// recurrence in n. Plain arithmetic: exact for any degree reachable in
/// double precision; the form-factor internals use a scaled variant.
pub fn laguerre(n: usize, alpha: usize, z: Complex64) -> Complex64 {
    assert!(n <= 100_000, "n out of supported range");
    let af = alpha as f64;
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut curr = Complex64::new(1.0 + af, 0.0) - z;
    for k in 1..n {
        let kf = k as f64;
        let next =
            ((Complex64::new(2.0 * kf + af + 1.0, 0.0) - z) * curr - (kf + af) * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Scaled Laguerre value `mantissa * exp(exponent)`.
fn laguerre_scaled(n: usize, alpha: usize, z: Complex64) -> (Complex64, f64) {
    let af = alpha as f64;
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return (prev, 0.0);
    }
    let mut curr = Complex64::new(1.0 + af, 0.0) - z;
    let mut e = 0.0f64;
    for k in 1..n {
        let kf = k as f64;
        let next =
            ((Complex64::new(2.0 * kf + af + 1.0, 0.0) - z) * curr - (kf + af) * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
        let a = curr.norm();
        if a > 1e140 || (a > 0.0 && a < 1e-140) {
            prev /= a;
            curr /= a;
            e += a.ln();
        }
    }
    (curr, e)
}

/// ln of `L_n^{(alpha)}(x)` for x <= 0, where every value is positive.
fn laguerre_ln_neg_arg(n: usize, alpha: usize, x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    let (m, e) = laguerre_scaled(n, alpha, Complex64::new(x, 0.0));
    m.re.ln() + e
}

/// Table of `ln |L_p^{(alpha)}(z)|^2` for alpha in 0..d, p in 0..d-alpha.
fn laguerre_lnsq_table(d: usize, z: Complex64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|alpha| {
            let len = d - alpha;
            let af = alpha as f64;
            let mut row = Vec::with_capacity(len);
            row.push(0.0); // ln|L_0|^2 = 0
            if len == 1 {
                return row;
            }
            let mut prev = Complex64::new(1.0, 0.0);
            let mut curr = Complex64::new(1.0 + af, 0.0) - z;
            let mut e = 0.0f64;
            row.push(2.0 * (curr.norm().ln() + e));
            for k in 1..(len - 1) {
                let kf = k as f64;
                let next = ((Complex64::new(2.0 * kf + af + 1.0, 0.0) - z) * curr
                    - (kf + af) * prev)
                    / (kf + 1.0);
                prev = curr;
                curr = next;
                let a = curr.norm();
                if a > 1e140 || (a > 0.0 && a < 1e-140) {
                    prev /= a;
                    curr /= a;
                    e += a.ln();
                }
                row.push(2.0 * (curr.norm().ln() + e));
            }
            row
        })
        .collect()
}

/// GUE-averaged partition function
/// `<Z(x)> = e^{sigma^2 x^2 / 2} L_{d-1}^{(1)}(-sigma^2 x^2)`.
pub fn mean_partition(params: &GueParams, z: ComplexBeta) -> Complex64 {
    let x = z.as_complex();
    let arg = -params.sigma * params.sigma * x * x;
    let (m, e) = laguerre_scaled(params.dim - 1, 1, arg);
    // combine exponents before exponentiating: either factor alone can leave
    // f64 range while the product stays physical
    let expo = params.sigma * params.sigma * x * x / 2.0 + Complex64::new(e, 0.0);
    m * expo.exp()
}

/// Annealed finite-d spectral form factor
/// `<|Z(beta + i tau)|^2> / <Z(beta)>^2` for the GUE.
///
/// O(d^2) Laguerre evaluations per point; the factorial ratio and the gap
/// powers are combined in log space so nothing overflows out to arbitrarily
/// large `tau`. Exactly 1 at beta = tau = 0; at beta > 0 the annealed
/// quotient differs from 1 at tau = 0 by the ensemble variance of Z.
pub fn sff_finite(params: &GueParams, beta: f64, tau: f64) -> f64 {
    let d = params.dim;
    assert!(d <= 512, "finite-d form factor limited to d <= 512");
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    assert!(tau.is_finite(), "tau must be finite");
    let s2 = params.sigma * params.sigma;
    let bt = Complex64::new(beta, tau);
    let z = -s2 * bt * bt;

    let ln_den = laguerre_ln_neg_arg(d - 1, 1, -s2 * beta * beta);
    let ln_t1 = s2 * beta * beta + laguerre_ln_neg_arg(d - 1, 1, -4.0 * s2 * beta * beta);

    let (m1, e1) = laguerre_scaled(d - 1, 1, z);
    let ln_l1_sq = 2.0 * (m1.norm().ln() + e1);

    let w = s2 * bt.norm_sqr();
    let lnf = ln_factorials(d);
    let table = laguerre_lnsq_table(d, z);

    // diagonal k = l, then doubled strict upper triangle
    let mut diag = Scaled::ZERO;
    for &lnsq in &table[0] {
        diag = diag.add(Scaled::from_ln(lnsq, false));
    }
    let mut upper = Scaled::ZERO;
    if w > 0.0 {
        let ln_w = w.ln();
        for alpha in 1..d {
            let row = &table[alpha];
            for (p, &lnsq) in row.iter().enumerate() {
                let q = p + alpha;
                let ln_term = alpha as f64 * ln_w + (lnf[p] - lnf[q]) + lnsq;
                upper = upper.add(Scaled::from_ln(ln_term, false));
            }
        }
    }
    let corr = diag.add(upper.mul_f64(2.0));

    let bracket = Scaled::from_ln(ln_l1_sq, false).sub(corr);
    let term2 = bracket.mul_exp(-s2 * tau * tau);
    let numerator = Scaled::from_ln(ln_t1, false).add(term2);
    numerator.mul_exp(-2.0 * ln_den).to_f64()
}

/// Large-d asymptotic form factor assembled from the semicircle Bessel
/// transform, the oscillatory edge decay, and the piecewise-linear ramp;
/// `t` is the physical time (the form-factor argument is `tau = 2t`).
pub fn sff_asymptotic(params: &GueParams, beta: f64, t: f64) -> f64 {
    assert!(params.dim >= 10, "asymptotic form requires d >= 10");
    assert!(t > 0.0, "asymptotic form requires t > 0");
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    let d = params.dim as f64;
    let s = params.sigma;
    let sqd = d.sqrt();

    // <Z(b)> under the semicircle: sqrt(d) I_1(2 sigma sqrt(d) b)/(sigma b)
    // = 2 d i1_over_x(2 sigma sqrt(d) b), finite at b = 0.
    let term_plateau = 2.0 * d * i1_over_x(4.0 * s * sqd * beta); // <Z(2 beta)>
    let term_osc = sqd * (1.0 - (8.0 * s * sqd * t).sin())
        / (16.0 * std::f64::consts::PI * t.powi(3) * s.powi(3));
    let t_p = sqd / s;
    let term_ramp = if t <= t_p {
        -sqd * s * sinhc(sqd * std::f64::consts::PI * beta * s) * (t_p - t)
    } else {
        0.0
    };
    let den = 2.0 * d * i1_over_x(2.0 * s * sqd * beta);
    (term_plateau + term_osc + term_ramp) / (den * den)
}

/// Dip/plateau time estimates: `t_p = sqrt(d)/sigma` and
/// `t_d = (1/2) (sqrt(d) beta / (sigma^3 sinh(sqrt(d) pi beta sigma)))^{1/4}`,
/// the latter written through sinh(y)/y so the beta -> 0 limit
/// `1/(2 pi^{1/4} sigma)` is taken analytically.
pub fn characteristic_times(params: &GueParams, beta: f64) -> CharacteristicTimes {
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    let d = params.dim as f64;
    let s = params.sigma;
    let y = d.sqrt() * std::f64::consts::PI * beta * s;
    let t_dip = 0.5 * (std::f64::consts::PI * s.powi(4) * sinhc(y)).powf(-0.25);
    CharacteristicTimes {
        decoherence: DecoherenceTime::UnitaryLimit,
        t_dip_est: t_dip,
        t_plateau_est: d.sqrt() / s,
        plateau_value: annealed_plateau(params, beta),
        t_dip_measured: None,
        t_plateau_measured: None,
    }
}

/// Long-time limit of the annealed form factor,
/// `<Z(2 beta)> / <Z(beta)>^2` in Laguerre form (1/d at beta = 0).
pub fn annealed_plateau(params: &GueParams, beta: f64) -> f64 {
    let d = params.dim;
    let s2 = params.sigma * params.sigma;
    let ln_t1 = s2 * beta * beta + laguerre_ln_neg_arg(d - 1, 1, -4.0 * s2 * beta * beta);
    let ln_den = laguerre_ln_neg_arg(d - 1, 1, -s2 * beta * beta);
    (ln_t1 - 2.0 * ln_den).exp()
}

/// Modified Bessel function of the first kind, order 1. Power series for
/// |x| <= 12, asymptotic expansion beyond; relative error ~1e-10 over the
/// arguments arising here (O(beta sqrt(d) sigma)).
pub fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax <= 12.0 {
        let half = ax / 2.0;
        let mut term = half; // k = 0 term: (x/2) / (0! 1!)
        let mut sum = term;
        for k in 1..60 {
            let kf = k as f64;
            term *= half * half / (kf * (kf + 1.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        // I_1(x) ~ e^x/sqrt(2 pi x) * sum_k (-1)^k a_k / x^k,
        // a_k = prod_{j<=k} (4 - (2j-1)^2) / (k! 8^k); truncate at the
        // smallest term (the expansion is asymptotic).
        let mut sum = 1.0f64;
        let mut ak = 1.0f64;
        let mut prev_abs = f64::INFINITY;
        for k in 1..20u32 {
            let kf = f64::from(k);
            ak *= (4.0 - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * ak / ax.powi(k as i32);
            if term.abs() > prev_abs {
                break;
            }
            prev_abs = term.abs();
            sum += term;
        }
        ax.exp() / (2.0 * std::f64::consts::PI * ax).sqrt() * sum
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// `I_1(x)/x`, regular at 0 (limit 1/2).
pub fn i1_over_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let q = x * x / 4.0;
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..12 {
            let kf = k as f64;
            term *= q / (kf * (kf + 1.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        bessel_i1(x) / x
    }
}

/// `sinh(y)/y`, regular at 0.
pub fn sinhc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        1.0 + y * y / 6.0 + y.powi(4) / 120.0
    } else {
        y.sinh() / y
    }
}
