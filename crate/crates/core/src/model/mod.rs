//! Model parameters, Langevin coefficients and stationary densities.

mod density;
mod params;
mod quadrature;

pub use density::{stationary_pdf, yakovenko_pdf, StationaryDensity};
pub use params::{
    diffusion_b, drift_a, effective_from_micro, micro_from_effective, Branch, EffectiveParams,
    MicroParams,
};
pub use quadrature::{stationary_pdf_quadrature, QuadratureDensity};
