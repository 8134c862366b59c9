//! Fourier grid, spectral fields, Leray projection, the Bessel-potential
//! scale `J^s` and the norms entering the estimates.

mod fft;
mod field;
mod grid;
mod ops;
pub mod random;
pub mod snapshot;

pub use field::{PhysicalField, SpectralField};
pub use grid::Grid;
pub use ops::{
    apply_js, band_energy, grad_l2_norm, holder_seminorm, inner_product, leray_project, lp_norm,
    semigroup_multiplier, sobolev_norm, HolderNorm,
};
pub(crate) use field::{analyze_real, synthesize_real};
