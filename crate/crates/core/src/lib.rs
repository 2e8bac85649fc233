//! Heat currents of open many-body quantum systems under Redfield and GKSL
//! dynamics, the two universal scaling bounds on them, and the collective
//! scenarios (m-body coupling, superradiance, superabsorption, heat engine,
//! quantum battery) that probe those bounds.

pub mod error;
pub mod numcore;
pub mod operators;
pub mod spectral;
pub mod master;
pub mod thermo;
pub mod bounds;
pub mod scenarios;
pub mod scaling;

pub use error::{Error, Result};
