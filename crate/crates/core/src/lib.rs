//! Numerical laboratory for compact operators and their Volterra property.
//!
//! The crate builds finite truncations of three operator families and asks
//! whether their spectra stay away from zero under refinement:
//!
//! * perturbed sums A = C + T with C ≥ 0 of prescribed s-number decay
//!   ([`gallery`]),
//! * restrictions L_K⁻¹ = L_D⁻¹ + K of the Dirichlet Laplacian on the unit disk
//!   with finite-rank K into the harmonic functions ([`disk`]),
//! * the one-dimensional Volterra operator ∫₀^r ln(t/r) f(t) t dt
//!   ([`volterra::one_d_volterra_matrix`]).
//!
//! [`asymptotics`] fits decay laws to s-numbers, and [`volterra`] holds the
//! verdict engine and the divergence study of the harmonic criterion integrals.
//!
//! With the default `parallel` feature, sweeps and zero tables run on rayon.

pub mod asymptotics;
pub mod disk;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod volterra;

pub use error::{LabError, Result};
pub use linalg::{Construction, OperatorModel, SNumbers, C64};
