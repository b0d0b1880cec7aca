//! Score-function gradient estimators for variational inference.
//!
//! The crate implements Reinforce, Reinforce with control variates and the
//! leave-one-out estimator VarGrad, together with the losses they derive from,
//! closed-form Gaussian oracles for their variance, and an experiment harness.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod families;
pub mod gaussian_oracles;
pub mod harness;
pub mod losses;
pub mod optim;
pub mod rng;
pub mod stats;
pub mod targets;

pub use error::{Error, Result};
