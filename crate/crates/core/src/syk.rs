//! The SYK model: N Majorana fermions with Gaussian all-to-all quartic
//! couplings, realized on n = N/2 qubits through the Jordan-Wigner mapping.
//!
//! Majorana operators act on basis states by pure bit arithmetic (one bit
//! flip, a Z-string sign, possibly a factor +-i), so a quartic term maps a
//! basis state to exactly one basis state. The Hamiltonian is assembled
//! column by column without materializing any Pauli-string matrix, and it
//! commutes with fermion parity, which splits it into two blocks of half
//! the dimension.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{hermitian_eigenvalues, Spectrum, SpectrumMeta};

/// Normalization of the Majorana algebra.
///
/// `Half`: chi^2 = 1/2 ({chi_k, chi_l} = delta_kl). `Unit`: chi^2 = 1
/// ({chi_k, chi_l} = 2 delta_kl), under which the large-N Gaussian density
/// of states has variance N/4 and the dephasing estimate tau_D = 1/(gamma N)
/// applies. Spectra in the two conventions differ by an overall factor 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MajoranaNormalization {
    Half,
    Unit,
}

impl MajoranaNormalization {
    /// Scale of a single Majorana in the Pauli representation.
    fn majorana_scale(self) -> f64 {
        match self {
            MajoranaNormalization::Half => std::f64::consts::FRAC_1_SQRT_2,
            MajoranaNormalization::Unit => 1.0,
        }
    }

    /// Scale of one quartic term (fourth power of the single scale).
    fn term_scale(self) -> f64 {
        match self {
            MajoranaNormalization::Half => 0.25,
            MajoranaNormalization::Unit => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MajoranaNormalization::Half => "half",
            MajoranaNormalization::Unit => "unit",
        }
    }
}

/// Parameters of one SYK realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SykParams {
    pub n_majorana: usize,
    pub coupling_scale: f64,
    pub normalization: MajoranaNormalization,
    pub seed: u64,
}

impl SykParams {
    /// New parameter set with J = 1 and the half normalization.
    pub fn new(n_majorana: usize, seed: u64) -> Result<Self> {
        SykParams {
            n_majorana,
            coupling_scale: 1.0,
            normalization: MajoranaNormalization::Half,
            seed,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_majorana < 4 || self.n_majorana % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "n_majorana must be even and >= 4, got {}",
                self.n_majorana
            )));
        }
        if !(self.coupling_scale.is_finite() && self.coupling_scale > 0.0) {
            return Err(Error::InvalidParams(format!(
                "coupling_scale must be finite and > 0, got {}",
                self.coupling_scale
            )));
        }
        Ok(self)
    }

    /// Hilbert space dimension of a single copy, d = 2^(N/2).
    pub fn dim(&self) -> usize {
        1 << (self.n_majorana / 2)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majorana / 2
    }
}

/// Random-matrix symmetry class of the SYK Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    Goe,
    Gue,
    Gse,
}

/// Symmetry class by N mod 8: 0 -> GOE, 2 or 6 -> GUE, 4 -> GSE.
pub fn symmetry_class(n_majorana: usize) -> Result<SymmetryClass> {
    if n_majorana % 2 != 0 {
        return Err(Error::InvalidParams(format!(
            "n_majorana must be even, got {n_majorana}"
        )));
    }
    Ok(match n_majorana % 8 {
        0 => SymmetryClass::Goe,
        2 | 6 => SymmetryClass::Gue,
        4 => SymmetryClass::Gse,
        _ => unreachable!(),
    })
}

/// The quartic couplings J_klmn for ordered quadruples 1 <= k<l<m<n <= N,
/// stored in lexicographic order.
#[derive(Clone, Debug)]
pub struct CouplingTensor {
    n_majorana: usize,
    values: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographic rank of the 0-based quadruple a<b<c<d among C(n,4).
fn quadruple_rank(n: usize, q: [usize; 4]) -> usize {
    let [a, b, c, d] = q;
    let mut rank = 0;
    for x in 0..a {
        rank += binomial(n - 1 - x, 3);
    }
    for x in (a + 1)..b {
        rank += binomial(n - 1 - x, 2);
    }
    for x in (b + 1)..c {
        rank += n - 1 - x;
    }
    rank + (d - c - 1)
}

impl CouplingTensor {
    pub fn n_majorana(&self) -> usize {
        self.n_majorana
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coupling for the 1-based ordered quadruple k<l<m<n.
    pub fn get(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        assert!(
            1 <= k && k < l && l < m && m < n && n <= self.n_majorana,
            "quadruple must satisfy 1 <= k<l<m<n <= N"
        );
        self.values[quadruple_rank(self.n_majorana, [k - 1, l - 1, m - 1, n - 1])]
    }

    /// Iterate (1-based quadruple, value) in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        QuadrupleIter::new(self.n_majorana).map(move |(idx, q)| {
            (
                [q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1],
                self.values[idx],
            )
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

struct QuadrupleIter {
    n: usize,
    next: Option<[usize; 4]>,
    idx: usize,
}

impl QuadrupleIter {
    fn new(n: usize) -> Self {
        let next = if n >= 4 { Some([0, 1, 2, 3]) } else { None };
        QuadrupleIter { n, next, idx: 0 }
    }
}

impl Iterator for QuadrupleIter {
    type Item = (usize, [usize; 4]);

    fn next(&mut self) -> Option<Self::Item> {
        let q = self.next?;
        let idx = self.idx;
        self.idx += 1;
        // advance the combination
        let mut c = q;
        let n = self.n;
        let mut i = 3usize;
        loop {
            if c[i] < n - (4 - i) {
                c[i] += 1;
                for j in (i + 1)..4 {
                    c[j] = c[j - 1] + 1;
                }
                self.next = Some(c);
                break;
            }
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
        }
        Some((idx, q))
    }
}

/// Draw all couplings i.i.d. from N(0, 6 J^2 / N^3).
///
/// Each quadruple gets its own counter-based stream keyed by
/// (seed, lexicographic rank), so the sampling order and the parallel
/// schedule are irrelevant to the values drawn.
pub fn sample_couplings(params: &SykParams) -> CouplingTensor {
    let n = params.n_majorana;
    let count = binomial(n, 4);
    let sigma =
        (6.0 * params.coupling_scale * params.coupling_scale / (n as f64).powi(3)).sqrt();
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|rank| sigma * standard_normal_at(params.seed, rank as u64))
        .collect();
    CouplingTensor {
        n_majorana: n,
        values,
    }
}

/// One standard normal from the (seed, stream) counter-based generator.
fn standard_normal_at(seed: u64, stream: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    StandardNormal.sample(&mut rng)
}

/// Jordan-Wigner action of chi_k on a basis state: `chi_k |b> = phase |b'>`.
///
/// Qubit i = ceil(k/2) carries X (k odd) or Y (k even) with a Z-string on
/// qubits 1..i-1; the single-Majorana normalization scale is applied by the
/// caller.
#[inline]
fn majorana_basis_action(k: usize, basis: usize) -> (usize, Complex64) {
    let qubit = (k + 1) / 2; // 1-based
    let bit = qubit - 1;
    let lower_mask = (1usize << bit) - 1;
    let z_sign = if ((basis & lower_mask).count_ones()) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let flipped = basis ^ (1usize << bit);
    if k % 2 == 1 {
        (flipped, Complex64::new(z_sign, 0.0))
    } else {
        // Y|0> = i|1>, Y|1> = -i|0>
        let had_one = (basis >> bit) & 1 == 1;
        let phase = if had_one {
            Complex64::new(0.0, -z_sign)
        } else {
            Complex64::new(0.0, z_sign)
        };
        (flipped, phase)
    }
}

/// Apply chi_k to a state vector of length d = 2^(N/2).
///
/// Panics if `k` is out of range or the vector length is not a power of two
/// compatible with `k`.
pub fn majorana_apply(
    k: usize,
    normalization: MajoranaNormalization,
    state: &[Complex64],
) -> Vec<Complex64> {
    let d = state.len();
    assert!(d.is_power_of_two() && d >= 2, "state length must be 2^(N/2)");
    let n_qubits = d.trailing_zeros() as usize;
    assert!(
        k >= 1 && k <= 2 * n_qubits,
        "majorana index {k} out of range 1..={}",
        2 * n_qubits
    );
    let s = normalization.majorana_scale();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (b, amp) in state.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let (b2, phase) = majorana_basis_action(k, b);
        out[b2] += s * phase * amp;
    }
    out
}

/// Action of one quartic term chi_k chi_l chi_m chi_n on a basis state
/// (rightmost operator first). Unnormalized phases; scale applied by caller.
#[inline]
fn quadruple_basis_action(q: [usize; 4], basis: usize) -> (usize, Complex64) {
    let (b1, p1) = majorana_basis_action(q[3], basis);
    let (b2, p2) = majorana_basis_action(q[2], b1);
    let (b3, p3) = majorana_basis_action(q[1], b2);
    let (b4, p4) = majorana_basis_action(q[0], b3);
    (b4, p1 * p2 * p3 * p4)
}

/// Assemble the dense d x d Hamiltonian H = sum J_klmn chi_k chi_l chi_m chi_n.
///
/// Columns are filled independently in parallel; each quartic term sends a
/// basis state to exactly one basis state.
pub fn build_hamiltonian(params: &SykParams, couplings: &CouplingTensor) -> Result<DMatrix<Complex64>> {
    if params.n_majorana > 30 {
        return Err(Error::MemoryGuard(format!(
            "dense SYK Hamiltonian limited to N <= 30, got N = {}",
            params.n_majorana
        )));
    }
    if couplings.n_majorana != params.n_majorana {
        return Err(Error::InvalidParams(
            "coupling tensor does not match n_majorana".into(),
        ));
    }
    let d = params.dim();
    let scale = params.normalization.term_scale();
    let quads: Vec<(usize, [usize; 4])> = QuadrupleIter::new(params.n_majorana).collect();
    let mut h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    h.as_mut_slice()
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(col, column)| {
            for &(idx, q) in &quads {
                let j = couplings.values[idx];
                let (row, phase) = quadruple_basis_action([q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1], col);
                column[row] += j * scale * phase;
            }
        });
    Ok(h)
}

fn spectrum_meta(params: &SykParams) -> SpectrumMeta {
    SpectrumMeta::new("syk", params.seed)
        .with_param("n_majorana", params.n_majorana)
        .with_param("coupling_scale", format!("{:e}", params.coupling_scale))
        .with_param("normalization", params.normalization.label())
}

/// Sample couplings, build the Hamiltonian in parity blocks, diagonalize,
/// and return the degeneracy-merged spectrum.
///
/// H commutes with fermion parity (every quartic term flips four bits), so
/// the even- and odd-popcount sectors decouple into two d/2 blocks; this is
/// about 4x cheaper to diagonalize than the full matrix. The merged block
/// spectrum equals the unblocked one to solver accuracy
/// (see [`spectrum_unblocked`]).
pub fn spectrum(params: &SykParams) -> Result<Spectrum> {
    let params = params.validated()?;
    if params.n_majorana > 30 {
        return Err(Error::MemoryGuard(format!(
            "dense SYK Hamiltonian limited to N <= 30, got N = {}",
            params.n_majorana
        )));
    }
    let couplings = sample_couplings(&params);
    let d = params.dim();
    let scale = params.normalization.term_scale();
    let quads: Vec<(usize, [usize; 4])> = QuadrupleIter::new(params.n_majorana).collect();

    let mut eigs: Vec<f64> = Vec::with_capacity(d);
    for parity in 0..2u32 {
        let sector: Vec<usize> = (0..d)
            .filter(|b| b.count_ones() % 2 == parity)
            .collect();
        let mut index_of = vec![usize::MAX; d];
        for (i, &b) in sector.iter().enumerate() {
            index_of[b] = i;
        }
        let ds = sector.len();
        let mut block = DMatrix::from_element(ds, ds, Complex64::new(0.0, 0.0));
        block
            .as_mut_slice()
            .par_chunks_mut(ds)
            .enumerate()
            .for_each(|(col, column)| {
                let b = sector[col];
                for &(idx, q) in &quads {
                    let j = couplings.values[idx];
                    let (row_full, phase) =
                        quadruple_basis_action([q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1], b);
                    let row = index_of[row_full];
                    debug_assert_ne!(row, usize::MAX, "quartic term left the parity sector");
                    column[row] += j * scale * phase;
                }
            });
        eigs.extend(hermitian_eigenvalues(&block)?);
    }
    Spectrum::from_eigenvalues(eigs, spectrum_meta(&params))
}

/// Reference path: full dense Hamiltonian, no parity blocking.
pub fn spectrum_unblocked(params: &SykParams) -> Result<Spectrum> {
    let params = params.validated()?;
    let couplings = sample_couplings(&params);
    let h = build_hamiltonian(&params, &couplings)?;
    let eigs = hermitian_eigenvalues(&h)?;
    Spectrum::from_eigenvalues(eigs, spectrum_meta(&params))
}

/// Large-N Gaussian density-of-states approximation of the disorder-averaged
/// partition function: `<Z(z)> ~ d exp(N z^2 / 8)`.
///
/// The implied density of states is `sqrt(2/(pi N)) d exp(-2 E^2 / N)`
/// (unit normalization convention).
pub fn gaussian_dos_partition(n_majorana: usize, dim: f64, z: crate::spectra::ComplexBeta) -> Complex64 {
    let zc = z.as_complex();
    dim * (zc * zc * (n_majorana as f64) / 8.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_state(d: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..d)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn quadruple_rank_matches_iteration_order() {
        for n in [4usize, 6, 9, 12] {
            for (idx, q) in QuadrupleIter::new(n) {
                assert_eq!(quadruple_rank(n, q), idx);
            }
            assert_eq!(QuadrupleIter::new(n).count(), binomial(n, 4));
        }
    }

    #[test]
    fn majorana_squares_to_half() {
        let params = SykParams::new(8, 1).unwrap();
        let d = params.dim();
        let v = random_state(d, 2);
        for k in 1..=8 {
            let w = majorana_apply(k, params.normalization, &v);
            let w2 = majorana_apply(k, params.normalization, &w);
            let mut diff = 0.0f64;
            for (a, b) in w2.iter().zip(&v) {
                diff = diff.max((a - 0.5 * b).norm());
            }
            assert!(diff < 1e-14, "chi_{k}^2 != 1/2 (diff {diff})");
        }
    }

    #[test]
    fn majoranas_anticommute_and_are_hermitian() {
        let params = SykParams::new(10, 3).unwrap();
        let d = params.dim();
        for trial in 0..20 {
            let v = random_state(d, 100 + trial);
            for (k, l) in [(1usize, 2usize), (2, 7), (3, 10), (5, 6)] {
                let kl = majorana_apply(
                    k,
                    params.normalization,
                    &majorana_apply(l, params.normalization, &v),
                );
                let lk = majorana_apply(
                    l,
                    params.normalization,
                    &majorana_apply(k, params.normalization, &v),
                );
                let s: Vec<Complex64> = kl.iter().zip(&lk).map(|(a, b)| a + b).collect();
                assert!(norm(&s) < 1e-13 * norm(&v), "{{chi_{k}, chi_{l}}} != 0");
            }
        }
        // Hermiticity: <u, chi v> = <chi u, v>
        let u = random_state(d, 7);
        let v = random_state(d, 8);
        for k in [1usize, 4, 9] {
            let cv = majorana_apply(k, params.normalization, &v);
            let cu = majorana_apply(k, params.normalization, &u);
            let lhs: Complex64 = u.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum();
            let rhs: Complex64 = cu.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn majorana_index_out_of_range_panics() {
        let v = vec![Complex64::new(1.0, 0.0); 4];
        majorana_apply(5, MajoranaNormalization::Half, &v);
    }

    #[test]
    fn coupling_statistics_and_determinism() {
        // zero-mean law at N=26 over all C(26,4) quadruples
        let params = SykParams {
            n_majorana: 26,
            coupling_scale: 1.0,
            normalization: MajoranaNormalization::Half,
            seed: 11,
        };
        let c = sample_couplings(&params);
        let count = c.len() as f64;
        assert_eq!(c.len(), binomial(26, 4));
        let sigma = (6.0 / 26.0f64.powi(3)).sqrt();
        let mean = c.values().iter().sum::<f64>() / count;
        assert!(mean.abs() < 4.0 * sigma / count.sqrt(), "mean {mean}");

        // pooled variance at N=16 over enough seeds for 1e5 draws: 5%
        let mut pooled = 0.0f64;
        let mut n_draws = 0usize;
        let per_seed = binomial(16, 4);
        let seeds_needed = 100_000usize.div_ceil(per_seed);
        for seed in 0..seeds_needed as u64 {
            let p = SykParams {
                n_majorana: 16,
                coupling_scale: 1.0,
                normalization: MajoranaNormalization::Half,
                seed,
            };
            let c = sample_couplings(&p);
            pooled += c.values().iter().map(|j| j * j).sum::<f64>();
            n_draws += c.len();
        }
        let var = pooled / n_draws as f64;
        let expect = 6.0 / 16.0f64.powi(3);
        assert!(
            (var / expect - 1.0).abs() < 0.05,
            "pooled variance {var} vs {expect}"
        );

        // determinism per (seed, quadruple)
        let c2 = sample_couplings(&params);
        assert_eq!(c.values(), c2.values());
        assert_eq!(
            c.get(1, 2, 3, 4),
            standard_normal_at(11, 0) * (6.0f64 / 26.0f64.powi(3)).sqrt()
        );
    }

    #[test]
    fn n4_single_term_eigenvalues() {
        let params = SykParams::new(4, 5).unwrap();
        let c = sample_couplings(&params);
        let j = c.get(1, 2, 3, 4);
        let h = build_hamiltonian(&params, &c).unwrap();
        let mut eigs = hermitian_eigenvalues(&h).unwrap();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let a = j.abs() / 4.0;
        let expect = [-a, -a, a, a];
        for (e, x) in eigs.iter().zip(expect) {
            assert!((e - x).abs() < 1e-14, "eigs {eigs:?} expect +-{a}");
        }
    }

    #[test]
    fn trace_of_h_squared_identity() {
        for (norm, factor) in [
            (MajoranaNormalization::Half, 1.0 / 16.0),
            (MajoranaNormalization::Unit, 1.0),
        ] {
            let params = SykParams {
                n_majorana: 10,
                coupling_scale: 1.0,
                normalization: norm,
                seed: 17,
            };
            let c = sample_couplings(&params);
            let h = build_hamiltonian(&params, &c).unwrap();
            let d = params.dim() as f64;
            let tr_h2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            let sum_j2: f64 = c.values().iter().map(|j| j * j).sum();
            let expect = sum_j2 * factor;
            assert!(
                (tr_h2 / d - expect).abs() < 1e-10 * expect,
                "tr(H^2)/d = {} vs {expect}",
                tr_h2 / d
            );
            // tracelessness
            let tr: Complex64 = (0..params.dim()).map(|i| h[(i, i)]).sum();
            let max_j = c.values().iter().fold(0.0f64, |m, j| m.max(j.abs()));
            assert!(tr.norm() < 1e-10 * d * max_j);
        }
    }

    /// Oracle: explicit Pauli-string matrices via Kronecker products.
    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (ra, ca) = a.shape();
        let (rb, cb) = b.shape();
        DMatrix::from_fn(ra * rb, ca * cb, |i, j| {
            a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
        })
    }

    fn pauli(which: char) -> DMatrix<Complex64> {
        let z = |re: f64, im: f64| Complex64::new(re, im);
        match which {
            'i' => DMatrix::from_row_slice(2, 2, &[z(1., 0.), z(0., 0.), z(0., 0.), z(1., 0.)]),
            'x' => DMatrix::from_row_slice(2, 2, &[z(0., 0.), z(1., 0.), z(1., 0.), z(0., 0.)]),
            'y' => DMatrix::from_row_slice(2, 2, &[z(0., 0.), z(0., -1.), z(0., 1.), z(0., 0.)]),
            'z' => DMatrix::from_row_slice(2, 2, &[z(1., 0.), z(0., 0.), z(0., 0.), z(-1., 0.)]),
            _ => unreachable!(),
        }
    }

    /// chi_k as an explicit matrix, LSB qubit first in the Kronecker chain.
    fn majorana_matrix(k: usize, n_qubits: usize, s: f64) -> DMatrix<Complex64> {
        let qubit = (k + 1) / 2; // 1-based
        let mut m = DMatrix::from_element(1, 1, Complex64::new(s, 0.0));
        for q in 1..=n_qubits {
            let factor = if q < qubit {
                pauli('z')
            } else if q == qubit {
                if k % 2 == 1 {
                    pauli('x')
                } else {
                    pauli('y')
                }
            } else {
                pauli('i')
            };
            // qubit q toggles bit q-1, so it must advance the index in
            // strides of 2^(q-1): place later qubits on the left.
            m = kron(&factor, &m);
        }
        m
    }

    #[test]
    fn n8_matches_dense_operator_product_oracle() {
        let params = SykParams::new(8, 23).unwrap();
        let c = sample_couplings(&params);
        let h = build_hamiltonian(&params, &c).unwrap();

        let nq = params.n_qubits();
        let s = params.normalization.majorana_scale();
        let chi: Vec<DMatrix<Complex64>> =
            (1..=8).map(|k| majorana_matrix(k, nq, s)).collect();
        let d = params.dim();
        let mut oracle = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for ([k, l, m, n], j) in c.iter() {
            oracle += (&chi[k - 1] * &chi[l - 1] * &chi[m - 1] * &chi[n - 1]).scale(j);
        }
        let max_dev = (&h - &oracle)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        assert!(max_dev < 1e-10, "max deviation {max_dev}");

        let mut eigs = hermitian_eigenvalues(&h).unwrap();
        let mut oracle_eigs = hermitian_eigenvalues(&oracle).unwrap();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        oracle_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eigs.iter().zip(&oracle_eigs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_commutes_with_fermion_parity() {
        let params = SykParams::new(10, 31).unwrap();
        let c = sample_couplings(&params);
        let h = build_hamiltonian(&params, &c).unwrap();
        let d = params.dim();
        let v = random_state(d, 40);
        // P|b> = (-1)^popcount(b) |b>
        let pv: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(b, a)| if b.count_ones() % 2 == 0 { *a } else { -*a })
            .collect();
        let hv = {
            let mut out = vec![Complex64::new(0.0, 0.0); d];
            for col in 0..d {
                for row in 0..d {
                    out[row] += h[(row, col)] * v[col];
                }
            }
            out
        };
        let hpv = {
            let mut out = vec![Complex64::new(0.0, 0.0); d];
            for col in 0..d {
                for row in 0..d {
                    out[row] += h[(row, col)] * pv[col];
                }
            }
            out
        };
        let mut comm = 0.0f64;
        for b in 0..d {
            let phv = if b.count_ones() % 2 == 0 { hv[b] } else { -hv[b] };
            comm = comm.max((hpv[b] - phv).norm());
        }
        assert!(comm < 1e-12 * norm(&v), "[H, P] violation {comm}");
    }

    #[test]
    fn blocked_spectrum_matches_unblocked() {
        for n in [8usize, 10, 12] {
            let params = SykParams::new(n, 77).unwrap();
            let blocked = spectrum(&params).unwrap();
            let full = spectrum_unblocked(&params).unwrap();
            for (a, b) in blocked
                .raw_eigenvalues()
                .iter()
                .zip(full.raw_eigenvalues())
            {
                assert!((a - b).abs() < 1e-10, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn degeneracy_structure_by_n_mod_8() {
        // N mod 8 = 2 or 6 (GUE) and 4 (GSE): uniformly even multiplicities;
        // N mod 8 = 0 (GOE): generically nondegenerate.
        for seed in 0..20u64 {
            let s = spectrum(&SykParams::new(10, seed).unwrap()).unwrap();
            assert!(
                s.levels().iter().all(|l| l.multiplicity % 2 == 0),
                "N=10 seed {seed} has an odd multiplicity"
            );
            let s = spectrum(&SykParams::new(12, seed).unwrap()).unwrap();
            assert!(
                s.levels().iter().all(|l| l.multiplicity % 2 == 0),
                "N=12 seed {seed} has an odd multiplicity"
            );
            let s = spectrum(&SykParams::new(8, seed).unwrap()).unwrap();
            assert!(
                s.levels().iter().all(|l| l.multiplicity == 1),
                "N=8 seed {seed} unexpectedly degenerate"
            );
        }
    }

    #[test]
    fn named_sizes_have_expected_degeneracy() {
        // N=18 (mod 8 = 2): every level doubly degenerate; N=16 (mod 8 = 0):
        // multiplicity 1 throughout.
        let s18 = spectrum(&SykParams::new(18, 4).unwrap()).unwrap();
        assert!(s18.levels().iter().all(|l| l.multiplicity % 2 == 0));
        assert_eq!(s18.dimension(), 512);
        let s16 = spectrum(&SykParams::new(16, 4).unwrap()).unwrap();
        assert!(s16.levels().iter().all(|l| l.multiplicity == 1));
        assert_eq!(s16.dimension(), 256);
    }

    #[test]
    fn symmetry_class_by_n_mod_8() {
        assert_eq!(symmetry_class(26).unwrap(), SymmetryClass::Gue);
        assert_eq!(symmetry_class(16).unwrap(), SymmetryClass::Goe);
        assert_eq!(symmetry_class(20).unwrap(), SymmetryClass::Gse);
        assert_eq!(symmetry_class(6).unwrap(), SymmetryClass::Gue);
        assert!(symmetry_class(7).is_err());
    }

    #[test]
    fn empirical_variance_matches_moment_identity() {
        // tr(H^2)/d = C(N,4) * 6 J^2/N^3 * s^8 exactly in expectation; the
        // large-N Gaussian density of states (unit normalization) predicts
        // N/4, which the exact value approaches as (1-6/N+...).
        let n = 16usize;
        let mut acc = 0.0f64;
        let n_seeds = 50u64;
        for seed in 0..n_seeds {
            let params = SykParams {
                n_majorana: n,
                coupling_scale: 1.0,
                normalization: MajoranaNormalization::Unit,
                seed,
            };
            let s = spectrum(&params).unwrap();
            let var: f64 =
                s.raw_eigenvalues().iter().map(|e| e * e).sum::<f64>() / s.dimension() as f64;
            acc += var;
        }
        let got = acc / n_seeds as f64;
        let exact = binomial(n, 4) as f64 * 6.0 / (n as f64).powi(3);
        assert!(
            (got / exact - 1.0).abs() < 0.05,
            "empirical {got} vs exact moment {exact}"
        );
        let gaussian_dos = n as f64 / 4.0;
        let finite_n = 1.0 - 6.0 / n as f64 + 11.0 / (n as f64).powi(2) - 6.0 / (n as f64).powi(3);
        assert!((exact / gaussian_dos - finite_n).abs() < 1e-12);
    }

    #[test]
    fn spectra_are_deterministic() {
        let params = SykParams::new(10, 123).unwrap();
        let a = spectrum(&params).unwrap();
        let b = spectrum(&params).unwrap();
        assert_eq!(a.raw_eigenvalues(), b.raw_eigenvalues());
        let ta = sample_couplings(&params);
        let tb = sample_couplings(&params);
        assert_eq!(ta.values(), tb.values());
    }

    #[test]
    fn gaussian_dos_partition_values() {
        let z0 = crate::spectra::ComplexBeta::real(0.0).unwrap();
        let v = gaussian_dos_partition(26, 8192.0, z0);
        assert_eq!(v, Complex64::new(8192.0, 0.0));
        let z1 = crate::spectra::ComplexBeta::real(1.0).unwrap();
        let v = gaussian_dos_partition(26, 8192.0, z1);
        assert!((v.re - 8192.0 * (26.0f64 / 8.0).exp()).abs() < 1e-9 * v.re);
    }

    #[test]
    fn memory_guard_rejects_large_n() {
        let params = SykParams {
            n_majorana: 32,
            coupling_scale: 1.0,
            normalization: MajoranaNormalization::Half,
            seed: 0,
        };
        assert!(matches!(
            build_hamiltonian(&params, &sample_couplings(&SykParams::new(4, 0).unwrap())),
            Err(Error::MemoryGuard(_)) | Err(Error::InvalidParams(_))
        ));
    }
}
