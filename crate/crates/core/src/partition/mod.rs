//! Spectral partitions: energies, the min–max search and structural checks.
//!
//! A partition is a label field with values `0..k`. The energy of part `i`
//! is the lowest eigenvalue of the Laplacian on that part, with Dirichlet
//! conditions on the interfaces and the ambient conditions on the outer
//! boundary. The partition energy `Λ` is the largest part energy.

mod search;
mod structure;

pub use search::{iterate, HistoryEntry, Init, PartitionState, SearchOptions};
pub use structure::{
    compare_with_theory, niceness_check, property_b_check, sector_cuts, symmetry_defect,
    CutReport, NicenessReport, TheoryComparison,
};

use rayon::prelude::*;

use crate::catalog::BcPair;
use crate::discretization::{assemble, restrict_to_subdomain, Grid, SymmetricOperator};
use crate::eigen::{lowest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::nodal::{connected_components, part_count};

/// Part energies and `Λ` for a label field.
#[derive(Clone, Debug)]
pub struct PartitionEnergy {
    pub energies: Vec<f64>,
    pub lambda: f64,
    /// Parts that were not connected; their energy is the lowest over
    /// their components.
    pub disconnected: Vec<u32>,
}

pub fn partition_energy(labels: &[u32], grid: &Grid, bc: BcPair) -> Result<PartitionEnergy> {
    let op = assemble(grid, bc);
    partition_energy_with(labels, grid, &op, &EigenOptions::default())
}

/// Same as [`partition_energy`] with a pre-assembled ambient operator.
pub fn partition_energy_with(
    labels: &[u32],
    grid: &Grid,
    op: &SymmetricOperator,
    opts: &EigenOptions,
) -> Result<PartitionEnergy> {
    if labels.len() != grid.ncells() {
        return Err(Error::InvalidPartition("label field does not match the grid".into()));
    }
    let k = part_count(labels)?;
    let (_, pieces) = connected_components(grid, |c| Some(labels[c]));
    let energies = (0..k as u32)
        .into_par_iter()
        .map(|part| {
            let mask: Vec<bool> = labels.iter().map(|&l| l == part).collect();
            let sub = restrict_to_subdomain(op, grid, &mask)?;
            Ok(lowest_eigenpairs(&sub, 1, opts)?[0].value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let disconnected = if pieces == k {
        Vec::new()
    } else {
        (0..k as u32)
            .filter(|&p| connected_components(grid, |c| (labels[c] == p).then_some(0)).1 > 1)
            .collect()
    };
    let lambda = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PartitionEnergy {
        energies,
        lambda,
        disconnected,
    })
}

/// `k` equal angular sectors, the first starting at angle zero.
pub fn equal_sectors(grid: &Grid, k: usize) -> Vec<u32> {
    (0..grid.ncells())
        .map(|c| (grid.coords(c).0 * k / grid.ntheta) as u32)
        .collect()
}

/// `k` equal transverse bands, bottom first.
pub fn equal_bands(grid: &Grid, k: usize) -> Vec<u32> {
    (0..grid.ncells())
        .map(|c| (grid.coords(c).1 * k / grid.nt) as u32)
        .collect()
}
