//! Income distributions from a threshold Fokker-Planck model.
//!
//! The crate evaluates the stationary density of Langevin income dynamics with
//! additive and multiplicative noise and a drift that changes slope at a
//! threshold income, builds empirical CCDFs from survey and rich-list data, fits
//! the model in three independent regression steps and cross-checks the
//! stationary law by simulating the dynamics.

pub mod distribution;
pub mod empirical;
pub mod error;
pub mod fit;
pub mod ingest;
pub mod kv;
pub mod model;
pub mod quad;
pub mod sim;

pub use error::{Error, ErrorClass, Result};
pub use model::{EffectiveParams, MicroParams};
