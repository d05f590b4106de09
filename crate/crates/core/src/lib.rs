//! Numerical potential theory for screened electrostatics on conductors.
//!
//! The model: a compact conductor `E` carries total charge `q`; the interplay
//! between the Coulomb field and a screening term `k^2` inside `E` is encoded
//! in the bilinear form
//!
//! ```text
//!     (f, g)_k = (1/4pi) \int grad f . grad g dv  -  k^2 \int_E f g dv
//! ```
//!
//! The crate computes k-potentials, capacities, Poincare-type constants,
//! equilibrium charge distributions (the minimizers of the energy over all
//! distributions with fixed total charge), force fields, and the electron-pair
//! ejection threshold, on 1D radial grids and 3D voxel grids.
//!
//! Units are Gaussian-style: the potential of a unit point charge at distance
//! `rho` is exactly `1/rho`. All lengths are dimensionless.

pub mod domain;
pub mod equilibrium;
pub mod error;
pub mod forces;
pub mod functional;
pub mod photoeffect;
pub mod radial;
pub mod report;
mod quad;
pub mod scenario;
mod tridiag;
pub mod verify;
pub mod voxel;

pub use error::{Error, Result};
