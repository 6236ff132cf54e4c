//! Nodal domains, neighbour graphs, Courant-sharpness witnesses and the
//! homotopy class of subdomains.
//!
//! Connectivity is 4-adjacency on the cell grid with angular wrap, so two
//! cells meeting only at a corner are not connected.

use std::collections::VecDeque;
use std::ops::Range;

use serde::Serialize;

use crate::discretization::{lift_to_cover, Grid, SymmetricOperator};
use crate::eigen::{clusters, lowest_eigenpairs, EigenOptions, EigenPair};
use crate::error::{Error, Result};

pub const DEFAULT_DEAD_BAND: f64 = 1e-6;
/// Minimum number of shared faces for two parts to count as neighbours.
pub const ADJACENCY_THRESHOLD: usize = 2;
const UNSET: u32 = u32::MAX;

/// Connected components of the cells for which `class` returns `Some`,
/// joining face neighbours of equal class. Excluded cells get `u32::MAX`.
/// Components are numbered in order of their first cell.
pub fn connected_components(grid: &Grid, class: impl Fn(usize) -> Option<u32>) -> (Vec<u32>, usize) {
    let n = grid.ncells();
    let classes: Vec<Option<u32>> = (0..n).map(&class).collect();
    let mut labels = vec![UNSET; n];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        let Some(c) = classes[start] else { continue };
        if labels[start] != UNSET {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(cell) = queue.pop_front() {
            for nb in grid.neighbors(cell) {
                if labels[nb] == UNSET && classes[nb] == Some(c) {
                    labels[nb] = count;
                    queue.push_back(nb);
                }
            }
        }
        count += 1;
    }
    (labels, count as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Nodal domains of a grid function.
#[derive(Clone, Debug, Serialize)]
pub struct NodalResult {
    /// Component id per cell, `0..count`.
    pub labels: Vec<u32>,
    pub count: usize,
    pub signs: Vec<Sign>,
}

/// Splits `u` into maximal connected sets of constant sign.
///
/// Cells with `|u| ≤ dead_band · ‖u‖∞` are absorbed in waves: each such cell
/// joins the adjacent component it shares most faces with (ties to the lower
/// id). Components are then recomputed from the resulting signs, so
/// neighbouring components always carry opposite signs.
pub fn nodal_domains(u: &[f64], grid: &Grid, dead_band: f64) -> Result<NodalResult> {
    let n = grid.ncells();
    if u.len() != n {
        return Err(Error::invalid(format!(
            "field has {} values, grid has {n} cells",
            u.len()
        )));
    }
    if !(0.0..1.0).contains(&dead_band) {
        return Err(Error::invalid("dead band must lie in [0, 1)"));
    }
    let sup = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if !sup.is_finite() {
        return Err(Error::invalid("field contains non-finite values"));
    }
    let floor = dead_band * sup;
    let sign_of = |x: f64| {
        if x.abs() <= floor || x == 0.0 {
            None
        } else if x > 0.0 {
            Some(1u32)
        } else {
            Some(0u32)
        }
    };
    let signs0: Vec<Option<u32>> = u.iter().map(|&x| sign_of(x)).collect();
    if signs0.iter().all(Option::is_none) {
        return Err(Error::DegenerateInput("field vanishes inside the dead band".into()));
    }
    let (mut comp, count0) = connected_components(grid, |c| signs0[c]);
    let mut comp_sign = vec![0u32; count0];
    for c in 0..n {
        if let Some(s) = signs0[c] {
            comp_sign[comp[c] as usize] = s;
        }
    }

    let mut pending: Vec<usize> = (0..n).filter(|&c| comp[c] == UNSET).collect();
    while !pending.is_empty() {
        let mut assign = Vec::new();
        for &cell in &pending {
            let mut votes: Vec<(u32, usize)> = Vec::with_capacity(4);
            for nb in grid.neighbors(cell) {
                let l = comp[nb];
                if l == UNSET {
                    continue;
                }
                match votes.iter_mut().find(|(id, _)| *id == l) {
                    Some(v) => v.1 += 1,
                    None => votes.push((l, 1)),
                }
            }
            if let Some(&(id, _)) = votes
                .iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            {
                assign.push((cell, id));
            }
        }
        if assign.is_empty() {
            break;
        }
        for &(cell, id) in &assign {
            comp[cell] = id;
        }
        pending.retain(|&c| comp[c] == UNSET);
    }

    let cell_sign: Vec<u32> = comp.iter().map(|&l| comp_sign[l as usize]).collect();
    let (labels, count) = connected_components(grid, |c| Some(cell_sign[c]));
    let mut signs = vec![Sign::Positive; count];
    for c in 0..n {
        signs[labels[c] as usize] = if cell_sign[c] == 1 { Sign::Positive } else { Sign::Negative };
    }
    Ok(NodalResult { labels, count, signs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    /// Number of grid faces on the shared interface.
    pub faces: usize,
}

/// Neighbour graph of a labelled partition.
#[derive(Clone, Debug, Serialize)]
pub struct NeighborGraph {
    pub vertices: usize,
    /// Edges with `a < b`, sorted.
    pub edges: Vec<Edge>,
}

impl NeighborGraph {
    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().any(|e| e.a == a && e.b == b)
    }

    pub fn degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|e| e.a == v || e.b == v).count()
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            adj[e.a as usize].push(e.b);
            adj[e.b as usize].push(e.a);
        }
        adj
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.vertices * (self.vertices.saturating_sub(1)) / 2
    }

    /// `true` for a single cycle through all vertices (at least three).
    pub fn is_cycle(&self) -> bool {
        self.vertices >= 3
            && self.edges.len() == self.vertices
            && (0..self.vertices as u32).all(|v| self.degree(v) == 2)
            && self.is_connected()
    }

    /// `true` for a simple path through all vertices.
    pub fn is_path(&self) -> bool {
        let ends = (0..self.vertices as u32).filter(|&v| self.degree(v) == 1).count();
        self.vertices >= 2
            && self.edges.len() == self.vertices - 1
            && ends == 2
            && (0..self.vertices as u32).all(|v| self.degree(v) <= 2)
            && self.is_connected()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w as usize);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Number of parts in a label field, checking that every label is used.
pub fn part_count(labels: &[u32]) -> Result<usize> {
    let k = labels.iter().max().map_or(0, |&m| m as usize + 1);
    if k == 0 {
        return Err(Error::InvalidPartition("empty label field".into()));
    }
    let mut used = vec![false; k];
    labels.iter().for_each(|&l| used[l as usize] = true);
    if let Some(missing) = used.iter().position(|&u| !u) {
        return Err(Error::InvalidPartition(format!("label {missing} is not used")));
    }
    Ok(k)
}

/// Shared-face counts between every pair of labels, indexed `[a][b]`.
pub fn interface_counts(labels: &[u32], grid: &Grid, k: usize) -> Vec<Vec<usize>> {
    let mut faces = vec![vec![0usize; k]; k];
    for cell in 0..grid.ncells() {
        let (i, j) = grid.coords(cell);
        let right = grid.index((i + 1) % grid.ntheta, j);
        let mut others = vec![right];
        if j + 1 < grid.nt {
            others.push(grid.index(i, j + 1));
        }
        for o in others {
            let (a, b) = (labels[cell] as usize, labels[o] as usize);
            if a != b {
                faces[a][b] += 1;
                faces[b][a] += 1;
            }
        }
    }
    faces
}

pub fn neighbor_graph(labels: &[u32], grid: &Grid) -> Result<NeighborGraph> {
    neighbor_graph_with_threshold(labels, grid, ADJACENCY_THRESHOLD)
}

/// Parts `a` and `b` are joined when they share at least `threshold` faces.
pub fn neighbor_graph_with_threshold(
    labels: &[u32],
    grid: &Grid,
    threshold: usize,
) -> Result<NeighborGraph> {
    if labels.len() != grid.ncells() {
        return Err(Error::InvalidPartition("label field does not match the grid".into()));
    }
    let k = part_count(labels)?;
    let faces = interface_counts(labels, grid, k);
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if faces[a][b] >= threshold.max(1) {
                edges.push(Edge {
                    a: a as u32,
                    b: b as u32,
                    faces: faces[a][b],
                });
            }
        }
    }
    Ok(NeighborGraph { vertices: k, edges })
}

/// BFS two-colouring. Returns the colouring when the graph is bipartite.
pub fn is_bipartite(g: &NeighborGraph) -> (bool, Option<Vec<u8>>) {
    let adj = g.adjacency();
    let mut colour = vec![u8::MAX; g.vertices];
    for start in 0..g.vertices {
        if colour[start] != u8::MAX {
            continue;
        }
        colour[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                let w = w as usize;
                if colour[w] == u8::MAX {
                    colour[w] = 1 - colour[v];
                    queue.push_back(w);
                } else if colour[w] == colour[v] {
                    return (false, None);
                }
            }
        }
    }
    (true, Some(colour))
}

#[derive(Clone, Debug)]
pub struct CourantOptions {
    /// Relative gap below which eigenvalues form one cluster.
    pub cluster_tol: f64,
    /// Relative gaps in `(cluster_tol, ambiguity_tol]` next to the cluster
    /// are reported as ambiguous.
    pub ambiguity_tol: f64,
    pub angles: usize,
    pub dead_band: f64,
    pub eigen: EigenOptions,
}

impl Default for CourantOptions {
    fn default() -> Self {
        CourantOptions {
            cluster_tol: 1e-6,
            ambiguity_tol: 1e-4,
            angles: 24,
            dead_band: DEFAULT_DEAD_BAND,
            eigen: EigenOptions::default(),
        }
    }
}

/// A sampled eigenspace vector with `μ = k`.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Zero-based indices of the two basis vectors combined.
    pub basis: (usize, usize),
    /// Rotation angle `φ` of `cos φ · u_a + sin φ · u_b`.
    pub angle: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CourantReport {
    /// One-based index of the eigenvalue under test.
    pub k: usize,
    /// Computed eigenvalues, ascending.
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Zero-based index range of the cluster containing `λ_k`.
    pub cluster: Range<usize>,
    /// Nodal counts of every computed eigenvector.
    pub counts: Vec<usize>,
    /// Largest nodal count seen in the cluster, basis or sampled.
    pub max_sampled: usize,
    pub witness: Option<Witness>,
    /// The witness as a grid field.
    #[serde(skip)]
    pub witness_field: Option<Vec<f64>>,
    /// The cluster edge is too close to call.
    pub ambiguous: bool,
    /// `μ(u_j) ≤ j + multiplicity − 1` for all fully resolved clusters.
    pub courant_bound_holds: bool,
}

impl CourantReport {
    pub fn is_sharp_witness(&self) -> bool {
        self.witness.is_some()
    }

    pub fn multiplicity(&self) -> usize {
        self.cluster.len()
    }
}

/// Looks for an eigenfunction of `λ_k` with exactly `k` nodal domains.
///
/// Only the eigenspace basis and a fixed sweep of two-dimensional rotations
/// are inspected, so a missing witness is not a proof of non-sharpness.
pub fn courant_sharp_check(
    op: &SymmetricOperator,
    grid: &Grid,
    k: usize,
    opts: &CourantOptions,
) -> Result<CourantReport> {
    if op.shape() != (grid.ntheta, grid.nt) {
        return Err(Error::invalid("operator and grid shapes differ"));
    }
    if k == 0 || k > op.dim() {
        return Err(Error::invalid(format!("index k = {k} out of range")));
    }
    let mut m = (k + 3).min(op.dim());
    let (pairs, values, groups) = loop {
        let pairs = lowest_eigenpairs(op, m, &opts.eigen)?;
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let groups = clusters(&values, opts.cluster_tol);
        let last = groups.last().expect("at least one cluster");
        if last.contains(&(k - 1)) && m < op.dim() {
            m = (m + 4).min(op.dim());
            continue;
        }
        break (pairs, values, groups);
    };
    let cluster = groups
        .iter()
        .find(|g| g.contains(&(k - 1)))
        .cloned()
        .expect("k is within the computed range");

    let gap = |a: f64, b: f64| (b - a) / a.abs().max(b.abs()).max(1.0);
    let mut ambiguous = false;
    if cluster.start > 0 && gap(values[cluster.start - 1], values[cluster.start]) <= opts.ambiguity_tol {
        ambiguous = true;
    }
    if cluster.end < values.len() && gap(values[cluster.end - 1], values[cluster.end]) <= opts.ambiguity_tol {
        ambiguous = true;
    }

    let count_of = |v: &[f64]| -> Result<usize> {
        Ok(nodal_domains(&op.to_grid_field(v), grid, opts.dead_band)?.count)
    };
    let counts = pairs
        .iter()
        .map(|p| count_of(&p.vector))
        .collect::<Result<Vec<_>>>()?;

    let complete = groups.len() - usize::from(values.len() < op.dim());
    let mut courant_bound_holds = true;
    for g in &groups[..complete] {
        for j in g.clone() {
            if counts[j] > (j + 1) + g.len() - 1 {
                courant_bound_holds = false;
            }
        }
    }

    let mut witness = None;
    let mut witness_field = None;
    let mut max_sampled = 0;
    for j in cluster.clone() {
        max_sampled = max_sampled.max(counts[j]);
        if counts[j] == k && witness.is_none() {
            witness = Some(Witness {
                basis: (j, j),
                angle: 0.0,
                count: k,
            });
            witness_field = Some(op.to_grid_field(&pairs[j].vector));
        }
    }
    for a in cluster.clone() {
        for b in a + 1..cluster.end {
            for s in 1..opts.angles {
                let phi = std::f64::consts::PI * s as f64 / opts.angles as f64;
                let v = rotate(&pairs[a], &pairs[b], phi);
                let mu = count_of(&v)?;
                max_sampled = max_sampled.max(mu);
                if mu == k && witness.is_none() {
                    witness = Some(Witness {
                        basis: (a, b),
                        angle: phi,
                        count: mu,
                    });
                    witness_field = Some(op.to_grid_field(&v));
                }
            }
        }
    }

    Ok(CourantReport {
        k,
        values,
        residuals: pairs.iter().map(|p| p.residual).collect(),
        cluster,
        counts,
        max_sampled,
        witness,
        witness_field,
        ambiguous,
        courant_bound_holds,
    })
}

fn rotate(a: &EigenPair, b: &EigenPair, phi: f64) -> Vec<f64> {
    let (s, c) = phi.sin_cos();
    a.vector.iter().zip(&b.vector).map(|(x, y)| c * x + s * y).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HomotopyClass {
    Contractible,
    Noncontractible,
}

/// Number of connected components of a mask lifted to the double cover.
pub fn lifted_components(mask: &[bool], grid: &Grid) -> Result<usize> {
    let cover = grid.with_degree(2)?;
    let lifted = lift_to_cover(grid, &cover, mask)?;
    Ok(connected_components(&cover, |c| lifted[c].then_some(0)).1)
}

/// Classifies a connected subdomain of a degree-1 grid by lifting it to
/// the double cover: a contractible set lifts to two disjoint copies, a
/// set containing a loop around the cylinder lifts to one.
pub fn homotopy_class(mask: &[bool], grid: &Grid) -> Result<HomotopyClass> {
    if grid.degree() != 1 {
        return Err(Error::invalid("homotopy class needs a degree-1 grid"));
    }
    if mask.len() != grid.ncells() {
        return Err(Error::invalid("mask does not match the grid"));
    }
    let (_, pieces) = connected_components(grid, |c| mask[c].then_some(0));
    if pieces != 1 {
        return Err(Error::invalid(format!(
            "mask has {pieces} components; classify them separately"
        )));
    }
    match lifted_components(mask, grid)? {
        2 => Ok(HomotopyClass::Contractible),
        1 => Ok(HomotopyClass::Noncontractible),
        n => Err(Error::Structural(format!("lift of a connected set has {n} components"))),
    }
}
