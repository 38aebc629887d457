//! The unperturbed (ε = 0) integrable structure: Floquet theory, Darboux transforms
//! and gradients of the Floquet discriminant.

pub mod darboux;
pub mod gradient;
pub mod transfer;

pub use darboux::*;
pub use gradient::*;
pub use transfer::*;
