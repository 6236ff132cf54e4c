//! Spectral minimal partitions of thin cylinder strips, their double covers
//! and annulus-like domains.
//!
//! The crate is organized bottom-up:
//!
//! - [`catalog`]: exact strip spectra, thinness thresholds and the
//!   round-annulus radial oracle.
//! - [`discretization`]: grids, finite-volume operators, subdomain
//!   restriction, covering lifts and deck splitting.
//! - [`eigen`]: residual-certified lowest eigenpairs and groundstates.
//! - [`nodal`]: nodal domains, neighbour graphs, Courant-sharpness witnesses
//!   and homotopy classes of subdomains.
//! - [`partition`]: partition energies and the min–max partition search.
//! - [`verify`]: named verification scenarios and their reports.
//! - [`export`]: CSV, graymap and manifest writers.

pub mod catalog;
mod cholesky;
pub mod config;
pub mod discretization;
pub mod eigen;
mod error;
pub mod export;
pub mod nodal;
pub mod partition;
pub mod verify;

pub use error::{Error, Result};
