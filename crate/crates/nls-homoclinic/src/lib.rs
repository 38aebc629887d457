//! Homoclinic orbits of the perturbed focusing NLS equation on the circle.

pub mod cli;
pub mod config;
pub mod error;
pub mod evolution;
pub mod field;
pub mod integrable;
pub mod linearization;
pub mod manifest;
pub mod melnikov;
pub mod normal_form;
pub mod params;
pub mod plane;
pub mod verify;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use params::Params;
