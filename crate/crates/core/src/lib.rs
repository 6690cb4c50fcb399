//! Time-of-arrival distributions from time-dependent Born-rule densities.

pub mod backflow;
pub mod distribution;
pub mod error;
pub mod gaussian;
pub mod quadrature;
pub mod sampler;
pub mod specfun;
pub mod superposition;

pub use distribution::{
    format_float, grid_mass, log_grid, moments, normalize, normalize_with, sign_change_zeros, toa_from_cdf,
    toa_from_current, uniform_grid, CdfOptions, CurrentField, CurrentOptions, DensityField, GridSpec, Spacing,
    TailModel, ToaDistribution,
};
pub use error::{Error, Result};
