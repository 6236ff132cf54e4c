//! The guide in `book/`, compiled so every code block runs as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/strip-spectra.md")]
pub mod strip_spectra {}
#[doc = include_str!("../../../book/src/thresholds.md")]
pub mod thresholds {}
#[doc = include_str!("../../../book/src/discretization.md")]
pub mod discretization {}
#[doc = include_str!("../../../book/src/eigensolver.md")]
pub mod eigensolver {}
#[doc = include_str!("../../../book/src/nodal.md")]
pub mod nodal {}
#[doc = include_str!("../../../book/src/covers.md")]
pub mod covers {}
#[doc = include_str!("../../../book/src/partitions.md")]
pub mod partitions {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
