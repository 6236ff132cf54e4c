use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{equal_bands, equal_sectors};
use crate::catalog::BcPair;
use crate::discretization::{assemble, restrict_to_subdomain, Grid, SymmetricOperator};
use crate::eigen::{groundstate, EigenOptions};
use crate::error::{Error, Result};
use crate::nodal::connected_components;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "seed")]
pub enum Init {
    EqualSectors,
    EqualBands,
    RandomVoronoi(u64),
}

impl Init {
    /// Equal sectors, then `restarts` Voronoi starts with seeds derived
    /// from `seed`.
    pub fn standard(restarts: usize, seed: u64) -> Vec<Init> {
        let mut out = vec![Init::EqualSectors];
        out.extend((0..restarts as u64).map(|r| Init::RandomVoronoi(derive_seed(seed, r))));
        out
    }

    fn labels(self, grid: &Grid, k: usize) -> Vec<u32> {
        match self {
            Init::EqualSectors => equal_sectors(grid, k),
            Init::EqualBands => equal_bands(grid, k),
            Init::RandomVoronoi(seed) => voronoi(grid, k, seed),
        }
    }
}

fn derive_seed(seed: u64, r: u64) -> u64 {
    seed ^ (r + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Nearest-site labelling with the angular distance taken periodically.
fn voronoi(grid: &Grid, k: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = f64::from(grid.degree());
    let width = grid.domain.width();
    let sites: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(0.0..period), rng.random_range(0.0..width)))
        .collect();
    (0..grid.ncells())
        .map(|c| {
            let (i, j) = grid.coords(c);
            let (x, y) = (grid.theta(i), grid.y(j));
            let dist = |&(sx, sy): &(f64, f64)| {
                let dx = (x - sx).rem_euclid(period);
                let dx = dx.min(period - dx);
                dx * dx + (y - sy) * (y - sy)
            };
            let mut best = 0;
            for s in 1..k {
                if dist(&sites[s]) < dist(&sites[best]) {
                    best = s;
                }
            }
            best as u32
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_sweeps: usize,
    /// Stop after this many sweeps without improving the best `Λ` of a run.
    pub patience: usize,
    /// A boundary cell moves only when the neighbouring groundstate exceeds
    /// its own by this relative margin.
    pub margin: f64,
    pub eigen: EigenOptions,
    /// Fresh starts allowed per run when a part vanishes.
    pub max_reseeds: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_sweeps: 200,
            patience: 20,
            margin: 1e-3,
            eigen: EigenOptions::default().with_tol(1e-7),
            max_reseeds: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub sweep: usize,
    pub lambda: f64,
    /// Cells whose label changed after this sweep.
    pub moved: usize,
}

/// A labelled partition with its part energies.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionState {
    pub k: usize,
    pub labels: Vec<u32>,
    pub energies: Vec<f64>,
    pub lambda: f64,
    /// Sweep history of the run that produced this state.
    pub history: Vec<HistoryEntry>,
    /// Initializer of that run.
    pub init: Init,
    /// Zero-based position of that run in the initializer list.
    pub run: usize,
}

/// Keeps the largest component of every part and hands the rest to the
/// neighbouring part with the longest shared interface. Returns `false`
/// when a part has no cells left.
fn repair_connectivity(labels: &mut [u32], grid: &Grid, k: usize) -> bool {
    for _ in 0..16 {
        let (comp, ncomp) = connected_components(grid, |c| Some(labels[c]));
        let mut size = vec![0usize; ncomp];
        let mut owner = vec![0u32; ncomp];
        for c in 0..labels.len() {
            size[comp[c] as usize] += 1;
            owner[comp[c] as usize] = labels[c];
        }
        let mut keep = vec![usize::MAX; k];
        for id in 0..ncomp {
            let p = owner[id] as usize;
            if keep[p] == usize::MAX || size[id] > size[keep[p]] {
                keep[p] = id;
            }
        }
        if keep.iter().any(|&id| id == usize::MAX) {
            return false;
        }
        let orphan: Vec<bool> = (0..ncomp).map(|id| keep[owner[id] as usize] != id).collect();
        if !orphan.iter().any(|&o| o) {
            return true;
        }
        let mut votes = vec![vec![0usize; k]; ncomp];
        for c in 0..labels.len() {
            let id = comp[c] as usize;
            if !orphan[id] {
                continue;
            }
            for nb in grid.neighbors(c) {
                if comp[nb] as usize != id {
                    votes[id][labels[nb] as usize] += 1;
                }
            }
        }
        let target: Vec<Option<u32>> = (0..ncomp)
            .map(|id| {
                if !orphan[id] {
                    return None;
                }
                let mut best = None;
                for (p, &v) in votes[id].iter().enumerate() {
                    if v > 0 && best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((p as u32, v));
                    }
                }
                best.map(|(p, _)| p)
            })
            .collect();
        for c in 0..labels.len() {
            if let Some(p) = target[comp[c] as usize] {
                labels[c] = p;
            }
        }
    }
    let (_, ncomp) = connected_components(grid, |c| Some(labels[c]));
    ncomp == k
}

struct Solved {
    energies: Vec<f64>,
    /// Groundstates on the whole grid, zero outside their part, max one.
    fields: Vec<Vec<f64>>,
}

fn solve_parts(op: &SymmetricOperator, grid: &Grid, labels: &[u32], k: usize, opts: &EigenOptions) -> Result<Solved> {
    let parts = (0..k as u32)
        .into_par_iter()
        .map(|p| {
            let mask: Vec<bool> = labels.iter().map(|&l| l == p).collect();
            let sub = restrict_to_subdomain(op, grid, &mask)?;
            let gs = groundstate(&sub, opts)?;
            let mut field = sub.to_grid_field(&gs.vector);
            let max = field.iter().fold(0.0f64, |a, &x| a.max(x));
            field.iter_mut().for_each(|x| *x /= max);
            Ok((gs.value, field))
        })
        .collect::<Result<Vec<_>>>()?;
    let (energies, fields) = parts.into_iter().unzip();
    Ok(Solved { energies, fields })
}

/// One reassignment step.
///
/// For a cell `c` of part `i` facing a cell `c'` of part `j`, the slopes of
/// the two groundstates at the interface are compared through their values
/// one cell further in: `φ_j(c' + d)` against `φ_i(c − d)`, with `d` the
/// step from `c` to `c'`. Reading one cell deep keeps staircase corners of
/// slanted interfaces from dominating. `c` moves to the part with the
/// steepest groundstate when that beats its own by the margin; a cell with
/// no cell of its own part behind it counts as zero. Cells only ever move
/// into a part of strictly higher energy, so an interface drifts towards
/// the part with the lower energy and does not flip back and forth.
fn reassign(labels: &[u32], solved: &Solved, grid: &Grid, margin: f64) -> Vec<u32> {
    let fields = &solved.fields;
    let energies = &solved.energies;
    let n = grid.ntheta;
    let step = |c: usize, di: isize, dj: isize| -> Option<usize> {
        let (i, j) = grid.coords(c);
        let j2 = j as isize + dj;
        if j2 < 0 || j2 >= grid.nt as isize {
            return None;
        }
        let i2 = (i as isize + di).rem_euclid(n as isize) as usize;
        Some(grid.index(i2, j2 as usize))
    };
    let mut next = labels.to_vec();
    for c in 0..labels.len() {
        let own = labels[c];
        let mut best: Option<(u32, f64)> = None;
        for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
            let Some(nb) = step(c, di, dj) else { continue };
            let p = labels[nb];
            if p == own || energies[p as usize] <= energies[own as usize] * (1.0 + margin) {
                continue;
            }
            let theirs = match step(nb, di, dj) {
                Some(far) if labels[far] == p => fields[p as usize][far],
                _ => fields[p as usize][nb],
            };
            let mine = match step(c, -di, -dj) {
                Some(back) if labels[back] == own => fields[own as usize][back],
                Some(_) => 0.0,
                None => fields[own as usize][c],
            };
            if theirs > mine * (1.0 + margin) && best.is_none_or(|(bp, bv)| theirs > bv || (theirs == bv && p < bp)) {
                best = Some((p, theirs));
            }
        }
        if let Some((p, _)) = best {
            next[c] = p;
        }
    }
    next
}

/// Hands every cell with at least three face neighbours in one other part
/// to that part, sweeping cells in index order and updating in place, so
/// that an alternating comb along an interface is straightened rather
/// than inverted.
fn smooth_teeth(labels: &mut [u32], grid: &Grid) {
    for c in 0..labels.len() {
        let mut votes: [(u32, usize); 4] = [(u32::MAX, 0); 4];
        for nb in grid.neighbors(c) {
            let p = labels[nb];
            if p == labels[c] {
                continue;
            }
            if let Some(v) = votes.iter_mut().find(|v| v.0 == p || v.0 == u32::MAX) {
                v.0 = p;
                v.1 += 1;
            }
        }
        if let Some(&(p, _)) = votes.iter().find(|v| v.1 >= 3) {
            labels[c] = p;
        }
    }
}

struct RunOutcome {
    state: PartitionState,
}

fn run_once(
    op: &SymmetricOperator,
    grid: &Grid,
    k: usize,
    init: Init,
    run: usize,
    opts: &SearchOptions,
) -> Result<RunOutcome> {
    let mut start = init;
    for attempt in 0..=opts.max_reseeds {
        let mut labels = start.labels(grid, k);
        if !repair_connectivity(&mut labels, grid, k) {
            start = Init::RandomVoronoi(derive_seed(run as u64 ^ 0xa5a5, attempt as u64));
            continue;
        }
        let mut history = Vec::new();
        let mut best: Option<PartitionState> = None;
        let mut stale = 0;
        let mut vanished = false;
        for sweep in 0..opts.max_sweeps {
            let solved = solve_parts(op, grid, &labels, k, &opts.eigen)?;
            let lambda = solved.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let improved = best.as_ref().is_none_or(|b| lambda < b.lambda);
            if improved {
                best = Some(PartitionState {
                    k,
                    labels: labels.clone(),
                    energies: solved.energies.clone(),
                    lambda,
                    history: Vec::new(),
                    init,
                    run,
                });
                stale = 0;
            } else {
                stale += 1;
            }
            let mut next = reassign(&labels, &solved, grid, opts.margin);
            smooth_teeth(&mut next, grid);
            if !repair_connectivity(&mut next, grid, k) {
                history.push(HistoryEntry { sweep, lambda, moved: 0 });
                vanished = true;
                break;
            }
            let moved = next.iter().zip(&labels).filter(|(a, b)| a != b).count();
            history.push(HistoryEntry { sweep, lambda, moved });
            if moved == 0 || stale >= opts.patience {
                break;
            }
            labels = next;
        }
        if vanished && best.is_none() {
            start = Init::RandomVoronoi(derive_seed(run as u64 ^ 0xa5a5, attempt as u64));
            continue;
        }
        let mut state = best.expect("at least one sweep");
        state.history = history;
        return Ok(RunOutcome { state });
    }
    Err(Error::Structural(format!(
        "run {run} lost a part after {} fresh starts",
        opts.max_reseeds
    )))
}

/// Relative gap below which two values of `Λ` count as equal.
const LAMBDA_TIE: f64 = 1e-9;

/// Lower `Λ` wins; on a tie the lower sum of part energies does.
fn beats(a: &PartitionState, b: &PartitionState) -> bool {
    if a.lambda < b.lambda * (1.0 - LAMBDA_TIE) {
        return true;
    }
    if a.lambda > b.lambda * (1.0 + LAMBDA_TIE) {
        return false;
    }
    a.energies.iter().sum::<f64>() < b.energies.iter().sum::<f64>()
}

/// Min–max partition search over several starts.
///
/// Each run alternates groundstate solves on every part with a local
/// reassignment of interface cells and a connectivity repair, and keeps the
/// lowest-`Λ` state it visits. Runs execute in parallel; the result is the
/// lowest `Λ` over runs. Equal `Λ` is decided by the energy sum and then by
/// run order, so the result does not depend on scheduling.
pub fn iterate(
    grid: &Grid,
    bc: BcPair,
    k: usize,
    inits: &[Init],
    opts: &SearchOptions,
) -> Result<PartitionState> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if grid.ncells() < 16 * k {
        return Err(Error::invalid(format!(
            "grid has {} cells, need at least {} for {k} parts",
            grid.ncells(),
            16 * k
        )));
    }
    if inits.is_empty() {
        return Err(Error::invalid("no initial partitions given"));
    }
    let op = assemble(grid, bc);
    let outcomes = inits
        .par_iter()
        .enumerate()
        .map(|(run, &init)| run_once(&op, grid, k, init, run, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<PartitionState> = None;
    for o in outcomes {
        if best.as_ref().is_none_or(|b| beats(&o.state, b)) {
            best = Some(o.state);
        }
    }
    Ok(best.expect("at least one run"))
}
