//! Dirichlet Laplacian on the unit disk and its well-defined restrictions
//! L_K⁻¹ = L_D⁻¹ + K, with K finite-rank into the harmonic functions.

pub mod basis;
pub mod bessel;

pub use basis::{
    assemble_restriction, basis_from_table, build_basis, build_basis_cached, harmonic_inner_products,
    inverse_dirichlet, schmidt_operator, DiskModeIndex, HarmonicModeIndex, SchmidtSpec, SchmidtTerm, TruncatedBasis,
    ZeroTable,
};
pub use bessel::{bessel_j, bessel_j_pair, bessel_zero, bessel_zeros};
