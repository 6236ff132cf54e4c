use serde::Serialize;

use super::PartitionState;
use crate::catalog::{predicted_l3, thin_threshold, L3Prediction, Rational, PI2};
use crate::discretization::{lift_to_cover, Grid};
use crate::error::{Error, Result};
use crate::nodal::{connected_components, is_bipartite, neighbor_graph, part_count, NeighborGraph};

/// `true` when every part is contractible, i.e. the label field lifted to
/// the double cover has exactly `2k` components.
pub fn property_b_check(labels: &[u32], grid: &Grid) -> Result<bool> {
    if grid.degree() != 1 {
        return Err(Error::invalid("property B is checked on a degree-1 grid"));
    }
    let k = part_count(labels)?;
    let cover = grid.with_degree(2)?;
    let lifted = lift_to_cover(grid, &cover, labels)?;
    let (_, count) = connected_components(&cover, |c| Some(lifted[c]));
    Ok(count == 2 * k)
}

#[derive(Clone, Debug, Serialize)]
pub struct NicenessReport {
    /// Per part: no one-cell-thick slit of another part cuts into it.
    pub nice: Vec<bool>,
    /// Slit cells found, as `(cell, enclosing part)`.
    pub slits: Vec<(usize, u32)>,
    /// Labels with the slits absorbed, where that leaves the donor part
    /// nonempty and not more fragmented.
    pub repaired: Vec<u32>,
}

impl NicenessReport {
    pub fn all_nice(&self) -> bool {
        self.nice.iter().all(|&n| n)
    }
}

/// Flags cells of one part that sit between two cells of another part
/// along a grid axis: a slit one cell thick.
pub fn niceness_check(labels: &[u32], grid: &Grid) -> Result<NicenessReport> {
    if labels.len() != grid.ncells() {
        return Err(Error::InvalidPartition("label field does not match the grid".into()));
    }
    let k = part_count(labels)?;
    let enclosing = |labels: &[u32], c: usize| -> Option<u32> {
        let (i, j) = grid.coords(c);
        let n = grid.ntheta;
        let left = labels[grid.index((i + n - 1) % n, j)];
        let right = labels[grid.index((i + 1) % n, j)];
        if left == right && left != labels[c] {
            return Some(left);
        }
        if j > 0 && j + 1 < grid.nt {
            let down = labels[grid.index(i, j - 1)];
            let up = labels[grid.index(i, j + 1)];
            if down == up && down != labels[c] {
                return Some(down);
            }
        }
        None
    };
    let slits: Vec<(usize, u32)> = (0..labels.len())
        .filter_map(|c| enclosing(labels, c).map(|p| (c, p)))
        .collect();
    let mut nice = vec![true; k];
    for &(_, p) in &slits {
        nice[p as usize] = false;
    }
    let mut repaired = labels.to_vec();
    for &(c, p) in &slits {
        if enclosing(&repaired, c) != Some(p) {
            continue;
        }
        let from = repaired[c];
        let pieces = |l: &[u32]| connected_components(grid, |x| (l[x] == from).then_some(0)).1;
        let before = pieces(&repaired);
        repaired[c] = p;
        let after = pieces(&repaired);
        if after == 0 || after > before {
            repaired[c] = from;
        }
    }
    Ok(NicenessReport {
        nice,
        slits,
        repaired,
    })
}

/// Angular cut positions of a sector-like partition against `k` equally
/// spaced cuts.
#[derive(Clone, Debug, Serialize)]
pub struct CutReport {
    /// Face indices `i` (between cells `i − 1` and `i`) where the label
    /// changes, per row.
    pub rows: Vec<Vec<usize>>,
    /// Every row has exactly `k` cuts.
    pub complete: bool,
    /// Best common rotation, in cells.
    pub rotation: f64,
    /// Largest distance of a cut to its ideal position, in cells.
    pub max_deviation: f64,
}

impl CutReport {
    pub fn within(&self, cells: f64) -> bool {
        self.complete && self.max_deviation <= cells
    }
}

pub fn sector_cuts(labels: &[u32], grid: &Grid, k: usize) -> CutReport {
    let n = grid.ntheta;
    let rows: Vec<Vec<usize>> = (0..grid.nt)
        .map(|j| {
            (0..n)
                .filter(|&i| labels[grid.index((i + n - 1) % n, j)] != labels[grid.index(i, j)])
                .collect()
        })
        .collect();
    let complete = rows.iter().all(|r| r.len() == k);
    if !complete || k == 0 {
        return CutReport {
            rows,
            complete: false,
            rotation: 0.0,
            max_deviation: f64::INFINITY,
        };
    }
    let spacing = n as f64 / k as f64;
    let circ = |a: f64| {
        let d = a.rem_euclid(n as f64);
        d.min(n as f64 - d)
    };
    let deviation = |r: f64| {
        let mut worst = 0.0f64;
        for row in &rows {
            for &cut in row {
                let rel = (cut as f64 - r).rem_euclid(spacing);
                worst = worst.max(circ(rel).min(circ(spacing - rel)).min(rel.min(spacing - rel)));
            }
        }
        worst
    };
    let steps = (2.0 * spacing).ceil() as usize;
    let (mut rotation, mut max_deviation) = (0.0, f64::INFINITY);
    for s in 0..steps {
        let r = 0.5 * s as f64;
        let d = deviation(r);
        if d < max_deviation {
            rotation = r;
            max_deviation = d;
        }
    }
    CutReport {
        rows,
        complete,
        rotation,
        max_deviation,
    }
}

/// Fraction of cells whose label differs from that of the cell mirrored
/// across the mid-line of the strip.
pub fn symmetry_defect(labels: &[u32], grid: &Grid) -> f64 {
    let differ = (0..grid.ncells())
        .filter(|&c| {
            let (i, j) = grid.coords(c);
            labels[c] != labels[grid.index(i, grid.nt - 1 - j)]
        })
        .count();
    differ as f64 / grid.ncells() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryComparison {
    pub k: usize,
    pub lambda: f64,
    pub lambda_over_pi2: f64,
    /// Exact minimal value or upper bound, over `π²`, when one is known.
    pub predicted_over_pi2: Option<f64>,
    pub predicted_is_exact: bool,
    /// `Λ / predicted − 1`.
    pub relative_error: Option<f64>,
    pub graph: NeighborGraph,
    pub bipartite: bool,
    pub property_b: bool,
    pub cuts: CutReport,
    pub symmetry_defect: f64,
}

/// Bundles the structural facts about a final state with what is known
/// about the minimal energy on the Neumann strip of width `b`.
pub fn compare_with_theory(state: &PartitionState, grid: &Grid, b: Rational) -> Result<TheoryComparison> {
    let k = state.k;
    let (predicted_over_pi2, exact) = if k == 3 {
        let p: L3Prediction = predicted_l3(b)?;
        (Some(crate::catalog::to_f64(p.value_over_pi2())), p.is_exact())
    } else {
        match thin_threshold(k as u32) {
            Ok(t) if t.admits(b) => (Some((k * k) as f64), true),
            _ => (None, false),
        }
    };
    let graph = neighbor_graph(&state.labels, grid)?;
    let bipartite = is_bipartite(&graph).0;
    let property_b = property_b_check(&state.labels, grid)?;
    let lambda_over_pi2 = state.lambda / PI2;
    Ok(TheoryComparison {
        k,
        lambda: state.lambda,
        lambda_over_pi2,
        predicted_over_pi2,
        predicted_is_exact: exact,
        relative_error: predicted_over_pi2.map(|p| lambda_over_pi2 / p - 1.0),
        graph,
        bipartite,
        property_b,
        cuts: sector_cuts(&state.labels, grid, k),
        symmetry_defect: symmetry_defect(&state.labels, grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::BcPair;
    use crate::discretization::DomainSpec;
    use crate::partition::{equal_bands, equal_sectors};

    fn grid() -> Grid {
        Grid::new(DomainSpec::strip(0.2, 1, BcPair::NN), 48, 12).unwrap()
    }

    #[test]
    fn property_b_examples() {
        let g = grid();
        assert!(property_b_check(&equal_sectors(&g, 3), &g).unwrap());
        assert!(!property_b_check(&equal_bands(&g, 3), &g).unwrap());
        // Two sectors in the lower half and one full band on top.
        let mixed: Vec<u32> = (0..g.ncells())
            .map(|c| {
                let (i, j) = g.coords(c);
                if j >= 6 { 2 } else { (i * 2 / g.ntheta) as u32 }
            })
            .collect();
        assert!(!property_b_check(&mixed, &g).unwrap());
    }

    #[test]
    fn slit_is_found_and_repaired() {
        let g = grid();
        let clean = equal_sectors(&g, 3);
        let report = niceness_check(&clean, &g).unwrap();
        assert!(report.all_nice() && report.slits.is_empty());

        let mut slit = clean.clone();
        for j in 3..9 {
            slit[g.index(7, j)] = 1;
        }
        let report = niceness_check(&slit, &g).unwrap();
        assert_eq!(report.nice, vec![false, true, true]);
        assert_eq!(report.slits.len(), 6);
        assert_eq!(report.repaired, clean);
    }

    #[test]
    fn cuts_of_rotated_sectors() {
        let g = grid();
        let shifted: Vec<u32> = (0..g.ncells())
            .map(|c| (((g.coords(c).0 + 5) % 48) / 16) as u32)
            .collect();
        let r = sector_cuts(&shifted, &g, 3);
        assert!(r.complete);
        assert_eq!(r.max_deviation, 0.0);
        // One row off by two cells is still within tolerance.
        let mut bent = shifted.clone();
        for i in [11, 12] {
            bent[g.index(i, 0)] = bent[g.index(10, 0)];
        }
        let r = sector_cuts(&bent, &g, 3);
        assert!(r.within(2.0) && !r.within(0.5));
        assert!(!sector_cuts(&equal_bands(&g, 3), &g, 3).complete);
    }

    #[test]
    fn symmetric_bands() {
        let g = grid();
        assert_eq!(symmetry_defect(&equal_sectors(&g, 3), &g), 0.0);
        assert!(symmetry_defect(&equal_bands(&g, 2), &g) > 0.9);
    }
}
