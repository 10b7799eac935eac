//! Deterministic simulator of multi-printhead electrohydrodynamic spray
//! deposition: image-charge tip fields, cone-jet emission, charged droplet
//! transport with evaporation and Coulomb fission, and substrate-frame film
//! accounting.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod deposition;
pub mod error;
pub mod field;
pub mod geometry;
pub mod ink;
pub mod layout;
pub mod rng;
pub mod spray;
pub mod transport;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use geometry::{ArrayLayout, LayoutPattern, PrintheadGeometry, ProcessConditions};
pub use ink::{InkProperties, InkRecipe, MeasuredProperties};
