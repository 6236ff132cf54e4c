//! Finite-volume grids and symmetric negative-Laplacian operators on strips
//! and annuli, with subdomain restriction and double-cover tools.

mod cover;
mod domain;
mod grid;
mod operator;

pub use cover::{deck_permutation, deck_split, lift_to_cover, DeckBlocks};
pub use domain::{DomainKind, DomainSpec, Profile};
pub use grid::Grid;
pub use operator::{assemble, restrict_to_subdomain, SymmetricOperator};
