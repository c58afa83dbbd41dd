//! Spectra: the `Spectrum` type shared by every model, the complex
//! partition function, the spectral form factor, plateau asymptotics and
//! the dense Hermitian eigensolve contract.
//!
//! A `Spectrum` keeps both the raw eigenvalue list (what the solver
//! produced, serialized verbatim) and the degeneracy-merged levels that
//! every observable consumes.

use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::mix64;

/// Relative tolerance for merging near-equal eigenvalues into one level.
///
/// Eigenvalues closer than `DEGENERACY_REL_TOL * (E_max - E_min)` are one
/// level; numerically split Kramers pairs must be recognized as degenerate
/// for the plateau weight `sum_n N_n^2`.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;

/// Hermiticity tolerance for the eigensolve contract (max |A - A^dag| entry).
pub const HERMITICITY_TOL: f64 = 1e-10;

/// One merged energy level with its degeneracy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: u32,
}

/// Provenance of a spectrum: which model, which size parameters, which seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumMeta {
    pub model: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
}

impl SpectrumMeta {
    pub fn new(model: &str, seed: u64) -> Self {
        SpectrumMeta {
            model: model.to_string(),
            params: Vec::new(),
            seed,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

/// Sorted eigenvalues with degeneracy multiplicities; immutable once built
/// and safe to share across threads.
#[derive(Clone, Debug)]
pub struct Spectrum {
    raw: Vec<f64>,
    levels: Vec<Level>,
    meta: SpectrumMeta,
}

impl Spectrum {
    /// Build a spectrum from raw (pre-merge) eigenvalues.
    ///
    /// Sorts ascending and merges eigenvalues closer than
    /// [`DEGENERACY_REL_TOL`] relative to the spectral width.
    pub fn from_eigenvalues(mut raw: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues".into()));
        }
        if raw.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite eigenvalue".into()));
        }
        raw.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let width = raw[raw.len() - 1] - raw[0];
        let tol = DEGENERACY_REL_TOL * width;
        let mut levels: Vec<Level> = Vec::new();
        let mut group_start = 0usize;
        for i in 1..=raw.len() {
            let split = i == raw.len() || raw[i] - raw[i - 1] > tol;
            if split {
                let group = &raw[group_start..i];
                let energy = group.iter().sum::<f64>() / group.len() as f64;
                levels.push(Level {
                    energy,
                    multiplicity: group.len() as u32,
                });
                group_start = i;
            }
        }
        Ok(Spectrum { raw, levels, meta })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Raw eigenvalues as produced by the solver, ascending.
    pub fn raw_eigenvalues(&self) -> &[f64] {
        &self.raw
    }

    pub fn meta(&self) -> &SpectrumMeta {
        &self.meta
    }

    /// Total Hilbert dimension `D = sum of multiplicities`.
    pub fn dimension(&self) -> usize {
        self.raw.len()
    }

    /// Spectral width `E_max - E_min` (0 for a single level).
    pub fn width(&self) -> f64 {
        self.raw[self.raw.len() - 1] - self.raw[0]
    }

    pub fn min_energy(&self) -> f64 {
        self.raw[0]
    }

    /// Smallest gap between distinct merged levels; `None` for one level.
    pub fn min_gap(&self) -> Option<f64> {
        self.levels
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// Level energies repeated by multiplicity (length = dimension).
    pub fn expanded_energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension());
        for l in &self.levels {
            for _ in 0..l.multiplicity {
                out.push(l.energy);
            }
        }
        out
    }

    /// Order-insensitive 64-bit digest of metadata and raw eigenvalue bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = mix64(self.meta.seed);
        for b in self.meta.model.as_bytes() {
            h = mix64(h ^ u64::from(*b));
        }
        for (k, v) in &self.meta.params {
            for b in k.as_bytes().iter().chain(v.as_bytes()) {
                h = mix64(h ^ u64::from(*b));
            }
        }
        for e in &self.raw {
            h = mix64(h ^ e.to_bits());
        }
        h
    }

    /// Write the versioned line-oriented record: `#` metadata header, then
    /// one raw eigenvalue per line at 17 significant digits.
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# tfd-spectrum v1")?;
        writeln!(w, "# model: {}", self.meta.model)?;
        writeln!(w, "# seed: {}", self.meta.seed)?;
        for (k, v) in &self.meta.params {
            writeln!(w, "# param: {k} = {v}")?;
        }
        writeln!(w, "# count: {}", self.raw.len())?;
        for e in &self.raw {
            writeln!(w, "{e:.16e}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty file".into()))??;
        if first.trim() != "# tfd-spectrum v1" {
            return Err(Error::Format(format!(
                "unsupported header {first:?}; expected \"# tfd-spectrum v1\""
            )));
        }
        let mut model = String::new();
        let mut seed: Option<u64> = None;
        let mut params = Vec::new();
        let mut count: Option<usize> = None;
        let mut raw = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("model:") {
                    model = v.trim().to_string();
                } else if let Some(v) = rest.strip_prefix("seed:") {
                    seed = Some(
                        v.trim()
                            .parse()
                            .map_err(|e| Error::Format(format!("bad seed: {e}")))?,
                    );
                } else if let Some(v) = rest.strip_prefix("param:") {
                    let (k, val) = v
                        .split_once('=')
                        .ok_or_else(|| Error::Format(format!("bad param line {rest:?}")))?;
                    params.push((k.trim().to_string(), val.trim().to_string()));
                } else if let Some(v) = rest.strip_prefix("count:") {
                    count = Some(
                        v.trim()
                            .parse()
                            .map_err(|e| Error::Format(format!("bad count: {e}")))?,
                    );
                }
                continue;
            }
            let e: f64 = line
                .parse()
                .map_err(|e| Error::Format(format!("bad eigenvalue line {line:?}: {e}")))?;
            raw.push(e);
        }
        if model.is_empty() {
            return Err(Error::Format("missing model tag".into()));
        }
        let seed = seed.ok_or_else(|| Error::Format("missing seed".into()))?;
        if let Some(c) = count {
            if c != raw.len() {
                return Err(Error::Format(format!(
                    "count mismatch: header says {c}, found {}",
                    raw.len()
                )));
            }
        }
        Spectrum::from_eigenvalues(
            raw,
            SpectrumMeta {
                model,
                params,
                seed,
            },
        )
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = io::BufWriter::new(std::fs::File::create(&tmp)?);
            self.write_to(&mut f)?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Spectrum::read_from(io::BufReader::new(f))
    }
}

/// Inverse temperature analytically continued along a time-like axis:
/// `z = re + i*im` with `re >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexBeta {
    re: f64,
    im: f64,
}

impl ComplexBeta {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) || re < 0.0 {
            return Err(Error::InvalidParams(format!(
                "complex inverse temperature needs finite re >= 0, got {re} + {im}i"
            )));
        }
        Ok(ComplexBeta { re, im })
    }

    pub fn real(beta: f64) -> Result<Self> {
        ComplexBeta::new(beta, 0.0)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Eigenvalues of a dense Hermitian matrix, ascending.
///
/// Contract: input Hermitian within [`HERMITICITY_TOL`] (worst entry of
/// `A - A^dag` reported otherwise); output satisfies the residual checks
/// `sum lambda = tr A` and `sum lambda^2 = tr A^2` at scale
/// `1e-8 * D * max|A|` (the squared check at the matching squared scale).
pub fn hermitian_eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let d = matrix.nrows();
    if d == 0 || matrix.ncols() != d {
        return Err(Error::InvalidParams(format!(
            "expected square nonempty matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let mut worst = (0usize, 0usize, 0.0f64);
    let mut max_abs = 0.0f64;
    for j in 0..d {
        for i in 0..=j {
            let dev = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
            if dev > worst.2 {
                worst = (i, j, dev);
            }
            max_abs = max_abs.max(matrix[(i, j)].norm()).max(matrix[(j, i)].norm());
        }
    }
    if worst.2 > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            row: worst.0,
            col: worst.1,
            deviation: worst.2,
            tolerance: HERMITICITY_TOL,
        });
    }
    // Symmetrize so the solver sees an exactly Hermitian matrix.
    let sym = (matrix + matrix.adjoint()).scale(0.5);
    let trace: f64 = (0..d).map(|i| sym[(i, i)].re).sum();
    let trace_sq: f64 = sym.iter().map(|z| z.norm_sqr()).sum();

    let eig = sym.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let sum: f64 = vals.iter().sum();
    let sum_sq: f64 = vals.iter().map(|v| v * v).sum();
    let tol1 = 1e-8 * d as f64 * max_abs.max(f64::MIN_POSITIVE);
    let tol2 = 1e-8 * d as f64 * (max_abs * max_abs).max(f64::MIN_POSITIVE);
    if (sum - trace).abs() > tol1 {
        return Err(Error::EigenResidual {
            what: "trace",
            residual: (sum - trace).abs(),
            tolerance: tol1,
        });
    }
    if (sum_sq - trace_sq).abs() > tol2 {
        return Err(Error::EigenResidual {
            what: "trace of square",
            residual: (sum_sq - trace_sq).abs(),
            tolerance: tol2,
        });
    }
    Ok(vals)
}

/// `ln Z(z) = ln sum_n N_n exp(-z E_n)`, principal branch.
///
/// Stabilized by factoring out `exp(-z E_min)` so nothing overflows for
/// `beta * |E|` up to 700.
pub fn log_partition(spectrum: &Spectrum, z: ComplexBeta) -> Complex64 {
    let zc = z.as_complex();
    let e0 = spectrum.min_energy();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in spectrum.levels() {
        acc += f64::from(l.multiplicity) * (-zc * (l.energy - e0)).exp();
    }
    let raw = acc.ln() - zc * e0;
    // The shift term moves Im off the principal branch; fold it back.
    let mut im = raw.im % std::f64::consts::TAU;
    if im > std::f64::consts::PI {
        im -= std::f64::consts::TAU;
    } else if im <= -std::f64::consts::PI {
        im += std::f64::consts::TAU;
    }
    Complex64::new(raw.re, im)
}

/// Spectral form factor `g_beta(tau) = |Z(beta + i tau)|^2 / Z(beta)^2`.
///
/// Equals 1 exactly at `tau = 0` and is even in `tau`.
pub fn sff(spectrum: &Spectrum, beta: f64, tau: f64) -> f64 {
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    assert!(tau.is_finite(), "tau must be finite");
    let num = log_partition(spectrum, ComplexBeta { re: beta, im: tau });
    let den = log_partition(spectrum, ComplexBeta { re: beta, im: 0.0 });
    (2.0 * (num.re - den.re)).exp()
}

/// Long-time plateau `G(beta)/Z(beta)^2` with `G = sum_n N_n^2 e^{-2 beta E_n}`;
/// reduces to `Z(2 beta)/Z(beta)^2` for a nondegenerate spectrum.
pub fn plateau_value(spectrum: &Spectrum, beta: f64) -> f64 {
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    let e0 = spectrum.min_energy();
    let mut g = 0.0f64;
    let mut z = 0.0f64;
    for l in spectrum.levels() {
        let m = f64::from(l.multiplicity);
        let b = (-beta * (l.energy - e0)).exp();
        g += m * m * b * b;
        z += m * b;
    }
    g / (z * z)
}

/// Thermal energy variance `<E^2> - <E>^2` under weights
/// `N_n e^{-beta E_n} / Z`, from exact weighted moments (two-pass).
pub fn energy_variance(spectrum: &Spectrum, beta: f64) -> f64 {
    assert!(beta >= 0.0 && beta.is_finite(), "beta must be finite and >= 0");
    let e0 = spectrum.min_energy();
    let mut z = 0.0f64;
    let mut first = 0.0f64;
    for l in spectrum.levels() {
        let w = f64::from(l.multiplicity) * (-beta * (l.energy - e0)).exp();
        z += w;
        first += w * l.energy;
    }
    let mean = first / z;
    let mut second = 0.0f64;
    for l in spectrum.levels() {
        let w = f64::from(l.multiplicity) * (-beta * (l.energy - e0)).exp();
        let de = l.energy - mean;
        second += w * de * de;
    }
    (second / z).max(0.0)
}
