//! Design toolkit for mode-entangled photon pairs from a three-waveguide
//! directional coupler in periodically poled lithium niobate.
//!
//! The crate is organised bottom-up:
//!
//! * [`material`] – Sellmeier dispersion, step-index contrast and its calibration
//! * [`modesolver`] – coupler (y) and depth (z) slab eigenproblems, a transfer-matrix
//!   oracle, and composed channel modes
//! * [`spdc`] – type-II process enumeration, phase matching, overlaps, biphoton states
//! * [`design`] – grating design, efficiency sweeps, crossings and tolerance studies
//! * [`config`] / [`cli`] – flat key-value run configuration and the command front end

pub mod cli;
pub mod config;
pub mod design;
mod error;
pub mod format;
pub mod material;
pub mod modesolver;
pub mod quad;
pub mod spdc;

pub use error::{Error, Result};
pub use material::{MaterialModel, Polarization, Sellmeier};
pub use modesolver::{ChannelMode, CouplerGeometry, SlabModeY, SlabModeZ};
