//! Thermofield-double fidelity dynamics of chaotic spectra under energy
//! dephasing.
//!
//! The crate simulates how the survival probability of a thermofield double
//! state decays, dips, ramps and saturates for chaotic many-body spectra
//! (SYK, GUE), and how energy dephasing suppresses those features:
//!
//! - [`spectra`]: the `Spectrum` type, complex partition function, spectral
//!   form factor, plateau asymptotics and the Hermitian eigensolve contract;
//! - [`syk`]: the SYK Hamiltonian over N Majorana fermions by bit-level
//!   Jordan-Wigner action, coupling sampling and symmetry classification;
//! - [`gue`]: GUE sampling plus the analytic kernel/Laguerre apparatus for
//!   the ensemble-averaged form factor and its dip/plateau estimates;
//! - [`dephasing`]: observables of the energy-dephasing channel (fidelity,
//!   purity, Renyi-2, logarithmic negativity, decoherence time);
//! - [`ensemble`]: seeded disorder sweeps, curve averaging, dip/plateau
//!   detection and characteristic-time estimates.

pub mod dephasing;
pub mod ensemble;
pub mod error;
pub mod gue;
pub mod numeric;
pub mod spectra;
pub mod syk;

pub use dephasing::{DecoherenceTime, DephasingParams, ObservableSeries, QuadratureSpec};
pub use ensemble::{
    CharacteristicTimes, DetectorConfig, EnsembleCurve, EnsembleOutput, EnsembleSpec, GridKind,
    ModelSpec, Observable, TimeGrid,
};
pub use error::{Error, Result};
pub use gue::GueParams;
pub use spectra::{ComplexBeta, Level, Spectrum, SpectrumMeta};
pub use syk::{CouplingTensor, MajoranaNormalization, SykParams, SymmetryClass};
