//! Observables of the energy-dephasing channel acting on a thermofield
//! double: fidelity (pair-sum and convolution forms), the exactly evolved
//! density matrix (small-d oracle), purity, Renyi-2 entropy, logarithmic
//! negativity, and the decoherence time.
//!
//! Every observable is a weighted sum over level pairs with Boltzmann
//! weights stabilized by the ground-state shift; off-diagonal pairs carry
//! `cos(2 t dE) e^{-gamma t dE^2}`-type kernels, the surviving diagonal is
//! the plateau weight `G(beta) = sum_n N_n^2 e^{-2 beta E_n}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;
use crate::spectra::{energy_variance, sff, Spectrum};

/// Inverse temperature and dephasing strength of the channel.
///
/// `gamma = 0` is the unitary limit (permitted; the Gaussian suppression
/// factor degenerates to 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingParams {
    pub beta: f64,
    pub gamma: f64,
}

impl DephasingParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        DephasingParams { beta, gamma }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        Ok(self)
    }
}

/// A time grid with per-time values and optional ensemble standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sem: Option<Vec<f64>>,
    pub label: String,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, sem: Option<Vec<f64>>, label: &str) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParams(format!(
                "series length mismatch: {} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(s) = &sem {
            if s.len() != times.len() {
                return Err(Error::InvalidParams("sem length mismatch".into()));
            }
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|t| *t <= 0.0) {
            return Err(Error::InvalidParams(
                "times must be strictly increasing and positive".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite series value".into()));
        }
        Ok(ObservableSeries {
            times,
            values,
            sem,
            label: label.to_string(),
        })
    }
}

/// Decoherence time of the channel: `1/(4 gamma Var_beta(E))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecoherenceTime {
    Finite(f64),
    /// Zero thermal energy variance: the state never dephases.
    Infinite,
    /// `gamma = 0`: no dephasing channel at all (unitary limit).
    UnitaryLimit,
}

impl DecoherenceTime {
    pub fn finite(&self) -> Option<f64> {
        match self {
            DecoherenceTime::Finite(t) => Some(*t),
            _ => None,
        }
    }
}

pub fn decoherence_time(spectrum: &Spectrum, params: &DephasingParams) -> DecoherenceTime {
    if params.gamma == 0.0 {
        return DecoherenceTime::UnitaryLimit;
    }
    let var = energy_variance(spectrum, params.beta);
    if var == 0.0 {
        return DecoherenceTime::Infinite;
    }
    DecoherenceTime::Finite(1.0 / (4.0 * params.gamma * var))
}

/// Boltzmann level weights `w_n = N_n e^{-b (E_n - E_min)}` at inverse
/// temperature `b`, with the diagonal plateau weight precomputed.
struct Weights {
    energies: Vec<f64>,
    w: Vec<f64>,
    total: f64,
    diag_sq: f64,
}

impl Weights {
    fn new(spectrum: &Spectrum, b: f64) -> Self {
        let e0 = spectrum.min_energy();
        let levels = spectrum.levels();
        let mut energies = Vec::with_capacity(levels.len());
        let mut w = Vec::with_capacity(levels.len());
        let mut total = 0.0f64;
        let mut diag_sq = 0.0f64;
        for l in levels {
            let m = f64::from(l.multiplicity);
            let wi = m * (-b * (l.energy - e0)).exp();
            energies.push(l.energy);
            w.push(wi);
            total += wi;
            diag_sq += wi * wi;
        }
        Weights {
            energies,
            w,
            total,
            diag_sq,
        }
    }

    /// `sum_{m<n} 2 w_m w_n kernel(E_n - E_m)`, sequential fixed order.
    fn pair_sum(&self, kernel: impl Fn(f64) -> f64) -> f64 {
        let n = self.w.len();
        let mut acc = 0.0f64;
        for m in 0..n {
            let wm = self.w[m];
            let em = self.energies[m];
            let mut row = 0.0f64;
            for k in (m + 1)..n {
                row += self.w[k] * kernel(self.energies[k] - em);
            }
            acc += 2.0 * wm * row;
        }
        acc
    }
}

/// Survival probability of the thermofield double under energy dephasing:
/// `(1/Z^2) sum_{m,n} N_m N_n e^{-beta(E_m+E_n)} cos(2t dE) e^{-gamma t dE^2}`.
///
/// Exactly 1 at t = 0; reduces to `sff(beta, 2t)` at gamma = 0; saturates
/// at `plateau_value(beta)` once `gamma t dE_min^2 >> 1`.
pub fn fidelity(spectrum: &Spectrum, params: &DephasingParams, t: f64) -> f64 {
    assert!(t >= 0.0 && t.is_finite(), "t must be finite and >= 0");
    if t == 0.0 {
        return 1.0;
    }
    let wt = Weights::new(spectrum, params.beta);
    let gamma_t = params.gamma * t;
    let two_t = 2.0 * t;
    let pairs = wt.pair_sum(|de| (two_t * de).cos() * (-gamma_t * de * de).exp());
    (wt.diag_sq + pairs) / (wt.total * wt.total)
}

/// Purity `P_t = (1/Z^2) sum e^{-beta(E_k+E_l) - 2 gamma t (E_k-E_l)^2}`;
/// monotone nonincreasing, `P_0 = 1`.
pub fn purity(spectrum: &Spectrum, params: &DephasingParams, t: f64) -> f64 {
    assert!(t >= 0.0 && t.is_finite(), "t must be finite and >= 0");
    if t == 0.0 {
        return 1.0;
    }
    let wt = Weights::new(spectrum, params.beta);
    let g2t = 2.0 * params.gamma * t;
    let pairs = wt.pair_sum(|de| (-g2t * de * de).exp());
    (wt.diag_sq + pairs) / (wt.total * wt.total)
}

/// Second Renyi entropy `-log2 P_t`; nondecreasing, 0 at t = 0.
pub fn renyi2(spectrum: &Spectrum, params: &DephasingParams, t: f64) -> f64 {
    -purity(spectrum, params, t).log2()
}

/// Logarithmic negativity
/// `log2[(1/Z) sum_{k,l} e^{-beta(E_k+E_l)/2 - gamma t (E_k-E_l)^2}]`;
/// monotone nonincreasing, `log2(Z(beta/2)^2/Z(beta))` at t = 0.
pub fn log_negativity(spectrum: &Spectrum, params: &DephasingParams, t: f64) -> f64 {
    assert!(t >= 0.0 && t.is_finite(), "t must be finite and >= 0");
    let half = Weights::new(spectrum, params.beta / 2.0);
    let z = Weights::new(spectrum, params.beta).total;
    let gamma_t = params.gamma * t;
    let pairs = half.pair_sum(|de| (-gamma_t * de * de).exp());
    ((half.diag_sq + pairs) / z).log2()
}

/// Exact evolved density matrix on the `|mm><nn|` support of the doubled
/// energy basis (small-d oracle; individual eigenstates, not merged levels).
///
/// Entries `rho_mn = e^{-beta(E_m+E_n)/2}/Z * e^{-2it(E_m-E_n) - gamma t (E_m-E_n)^2}`:
/// trace 1, Hermitian, positive semidefinite.
pub fn evolve_tfd(
    spectrum: &Spectrum,
    params: &DephasingParams,
    t: f64,
) -> Result<DMatrix<Complex64>> {
    assert!(t >= 0.0 && t.is_finite(), "t must be finite and >= 0");
    let d = spectrum.dimension();
    if d > 256 {
        return Err(Error::DimensionGuard(format!(
            "evolved density matrix oracle limited to D <= 256, got {d}"
        )));
    }
    let energies = spectrum.expanded_energies();
    let e0 = spectrum.min_energy();
    let z: f64 = energies.iter().map(|e| (-params.beta * (e - e0)).exp()).sum();
    let amps: Vec<f64> = energies
        .iter()
        .map(|e| ((-params.beta * (e - e0)).exp() / z).sqrt())
        .collect();
    let gamma_t = params.gamma * t;
    Ok(DMatrix::from_fn(d, d, |m, n| {
        let de = energies[m] - energies[n];
        let phase = Complex64::new(-gamma_t * de * de, -2.0 * t * de).exp();
        amps[m] * amps[n] * phase
    }))
}

/// Quadrature used by [`fidelity_by_convolution`]: Gauss-Legendre nodes on
/// the scaled kernel variable `u = (tau - 2t)/(2 sqrt(gamma t))`, truncated
/// at |u| <= 6 (kernel tail < 1e-15).
///
/// With `auto_scale` the node count grows with the fastest pair frequency
/// `2 sqrt(gamma t) * width` so the oscillatory integrand stays resolved.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub auto_scale: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 128,
            auto_scale: true,
        }
    }
}

impl QuadratureSpec {
    pub fn fixed(nodes: usize) -> Self {
        QuadratureSpec {
            nodes,
            auto_scale: false,
        }
    }
}

const KERNEL_HALF_WIDTH: f64 = 6.0;

/// Fidelity as a Gaussian coarse-graining of the spectral form factor:
/// `F_t = (1/(2 sqrt(pi gamma t))) \int dtau e^{-((tau-2t)/(2 sqrt(gamma t)))^2} g_beta(tau)`.
///
/// Rejects `gamma = 0` and `t = 0`, where the kernel degenerates to a delta
/// (use [`fidelity`] directly).
pub fn fidelity_by_convolution(
    spectrum: &Spectrum,
    params: &DephasingParams,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if params.gamma <= 0.0 || t <= 0.0 {
        return Err(Error::DegenerateKernel {
            gamma: params.gamma,
            t,
        });
    }
    let half_width = 2.0 * (params.gamma * t).sqrt();
    let n = if quad.auto_scale {
        // fastest oscillation in u: omega = half_width * spectral width;
        // Gauss-Legendre resolves it once the polynomial degree covers the
        // phase across [-6, 6], plus margin for 1e-8-level accuracy
        let omega = half_width * spectrum.width();
        quad.nodes.max((4.0 * omega) as usize + 48)
    } else {
        quad.nodes.max(2)
    };
    let (x, w) = gauss_legendre(n);
    let mut acc = 0.0f64;
    for (xi, wi) in x.iter().zip(&w) {
        let u = KERNEL_HALF_WIDTH * xi;
        let tau = 2.0 * t + half_width * u;
        acc += wi * KERNEL_HALF_WIDTH * (-u * u).exp() * sff(spectrum, params.beta, tau);
    }
    Ok(acc / std::f64::consts::PI.sqrt())
}

/// Series evaluation over a time grid, parallel over time points.
///
/// Builds the Boltzmann weights once and reuses them for every point; the
/// per-point pair sums run in a fixed order, so results are bit-identical
/// across thread counts.
pub fn fidelity_series(spectrum: &Spectrum, params: &DephasingParams, times: &[f64]) -> Vec<f64> {
    let wt = Weights::new(spectrum, params.beta);
    let gamma = params.gamma;
    times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return 1.0;
            }
            let gamma_t = gamma * t;
            let two_t = 2.0 * t;
            let pairs = wt.pair_sum(|de| (two_t * de).cos() * (-gamma_t * de * de).exp());
            (wt.diag_sq + pairs) / (wt.total * wt.total)
        })
        .collect()
}

pub fn purity_series(spectrum: &Spectrum, params: &DephasingParams, times: &[f64]) -> Vec<f64> {
    let wt = Weights::new(spectrum, params.beta);
    let gamma = params.gamma;
    times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return 1.0;
            }
            let g2t = 2.0 * gamma * t;
            let pairs = wt.pair_sum(|de| (-g2t * de * de).exp());
            (wt.diag_sq + pairs) / (wt.total * wt.total)
        })
        .collect()
}

pub fn renyi2_series(spectrum: &Spectrum, params: &DephasingParams, times: &[f64]) -> Vec<f64> {
    purity_series(spectrum, params, times)
        .into_iter()
        .map(|p| -p.log2())
        .collect()
}

pub fn negativity_series(spectrum: &Spectrum, params: &DephasingParams, times: &[f64]) -> Vec<f64> {
    let half = Weights::new(spectrum, params.beta / 2.0);
    let z = Weights::new(spectrum, params.beta).total;
    let gamma = params.gamma;
    times
        .par_iter()
        .map(|&t| {
            let gamma_t = gamma * t;
            let pairs = half.pair_sum(|de| (-gamma_t * de * de).exp());
            ((half.diag_sq + pairs) / z).log2()
        })
        .collect()
}
