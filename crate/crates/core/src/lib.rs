//! Contour integrals `∮_{|z|=1} z^β/(z−α) dz` with a movable branch cut.

pub mod branch;
pub mod cli;
pub mod closed_form;
mod dd;
pub mod error;
pub mod hyp2f1;
pub mod numeric;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod verify;

pub use branch::{BranchAngle, ProblemInstance, Regime};
pub use error::{Error, Result};
