//! Spectrum of three identical particles in a one-dimensional box with
//! harmonic pair interactions,
//!
//! ```text
//! H = -(∂²x + ∂²y + ∂²z) + λ[(x-y)² + (y-z)² + (z-x)²],   |x|,|y|,|z| < 1,
//! ```
//!
//! solved by Rayleigh-Ritz in a basis of products of box modes adapted to the
//! twelve-element group of permutations and inverted permutations (D3d).
//! Every irreducible representation gets its own block `H0 + λW`, so sweeps
//! over `λ` reuse one assembly per block.
//!
//! Module map:
//!
//! - [`boxbasis`]: product states, multiplets, parity patterns
//! - [`d3d`]: group elements, character table, symmetry-adapted combinations
//! - [`matelem`]: one-body integrals and per-irrep block assembly
//! - [`solver`]: dense symmetric eigensolves at fixed `λ`
//! - [`perturb`]: first-order degenerate perturbation theory
//! - [`sweep`]: `λ` sweeps, avoided crossings, large-`λ` limits
//! - [`oracle`]: brute-force full-basis spectra and adaptive quadrature
//!
//! With the default `parallel` feature, independent blocks and grid points
//! are solved on the rayon pool. [`Execution::Sequential`] forces the serial
//! path at run time; without the feature every path is serial.

pub mod boxbasis;
pub mod d3d;
mod exec;
pub mod matelem;
pub mod oracle;
pub mod perturb;
pub mod solver;
pub mod sweep;

pub use boxbasis::{enumerate_states, mode_energy, ModeTriple, Multiplet, ParitySignature};
pub use d3d::{GroupElement, Irrep, Salc, SymmetryClass};
pub use exec::Execution;
pub use matelem::{HamiltonianBlock, IntegralTable};
pub use solver::{BlockEigen, SpectrumSlice};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("energy-sum cutoff {0} outside [3, 1000000]")]
    InvalidCutoff(u32),
    #[error("quantum numbers must be positive, got {0:?}")]
    InvalidTriple([u32; 3]),
    #[error("coupling strength must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("row {row} out of range for {irrep}")]
    InvalidRow { irrep: Irrep, row: usize },
    #[error("symmetry-adapted bases disagree for {irrep} row {row} of multiplet {multiplet:?}: {detail}")]
    SalcMismatch {
        irrep: Irrep,
        row: usize,
        multiplet: [u32; 3],
        detail: String,
    },
    #[error("basis for {irrep} row {row} is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { irrep: Irrep, row: usize, deviation: f64 },
    #[error("eigensolver failed for {irrep} at lambda={lambda}: {detail}")]
    NoConvergence { irrep: Irrep, lambda: f64, detail: String },
    #[error("quadrature did not converge for <{m}|q^{power}|{n}> (error estimate {estimate:.3e})")]
    Quadrature { power: u32, m: u32, n: u32, estimate: f64 },
    #[error("full basis of {states} states exceeds the dense limit of {limit}")]
    BasisTooLarge { states: usize, limit: usize },
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),
    #[error("integral table covers modes up to {have}, need {need}")]
    TableTooSmall { have: u32, need: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}
