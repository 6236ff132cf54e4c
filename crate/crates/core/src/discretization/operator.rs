use std::f64::consts::{PI, TAU};

use super::domain::DomainKind;
use super::grid::Grid;
use crate::catalog::{Bc, BcPair};
use crate::error::{Error, Result};

const NO_DOF: u32 = u32::MAX;

/// Sparse symmetric stiffness `K` with a diagonal mass `M` on a set of
/// active grid cells. The eigenproblem is `K u = λ M u`; solvers work with
/// the symmetrised matrix `A = M^{-1/2} K M^{-1/2}`.
///
/// On strips `M` is the identity and entries are in units of `1/length²`.
#[derive(Clone, Debug)]
pub struct SymmetricOperator {
    ntheta: usize,
    nt: usize,
    degree: u32,
    cells: Vec<usize>,
    dof_of_cell: Vec<u32>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    stiffness: Vec<f64>,
    scaled: Vec<f64>,
    mass: Vec<f64>,
    inv_sqrt_mass: Vec<f64>,
    neumann_kernel: bool,
}

struct Triplets {
    diag: Vec<f64>,
    upper: Vec<(usize, usize, f64)>,
}

impl Triplets {
    fn new(n: usize) -> Self {
        Triplets {
            diag: vec![0.0; n],
            upper: Vec::new(),
        }
    }

    fn face(&mut self, p: usize, q: usize, c: f64) {
        self.diag[p] += c;
        self.diag[q] += c;
        self.off(p, q, -c);
    }

    fn off(&mut self, p: usize, q: usize, v: f64) {
        if p == q {
            self.diag[p] += v;
        } else {
            self.upper.push((p.min(q), p.max(q), v));
        }
    }
}

impl SymmetricOperator {
    fn from_parts(
        grid_shape: (usize, usize, u32),
        cells: Vec<usize>,
        mass: Vec<f64>,
        mut trip: Triplets,
        neumann_kernel: bool,
    ) -> Self {
        let (ntheta, nt, degree) = grid_shape;
        let n = cells.len();
        // Stable sort keeps the summation order fixed; each unordered pair is
        // summed once and mirrored, so the matrix is bitwise symmetric.
        trip.upper.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.upper.len());
        for (r, c, v) in trip.upper {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, trip.diag[i])]).collect();
        for (r, c, v) in merged {
            if v != 0.0 {
                rows[r].push((c, v));
                rows[c].push((r, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut stiffness = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                cols.push(c);
                stiffness.push(v);
            }
            row_ptr.push(cols.len());
        }
        let inv_sqrt_mass: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let mut scaled = Vec::with_capacity(stiffness.len());
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[k];
                // The product of the two scale factors is commutative, which
                // keeps the scaled matrix exactly symmetric as well.
                let s = if i <= j {
                    inv_sqrt_mass[i] * inv_sqrt_mass[j]
                } else {
                    inv_sqrt_mass[j] * inv_sqrt_mass[i]
                };
                scaled.push(stiffness[k] * s);
            }
        }
        let mut dof_of_cell = vec![NO_DOF; ntheta * nt];
        for (d, &c) in cells.iter().enumerate() {
            dof_of_cell[c] = d as u32;
        }
        SymmetricOperator {
            ntheta,
            nt,
            degree,
            cells,
            dof_of_cell,
            row_ptr,
            cols,
            stiffness,
            scaled,
            mass,
            inv_sqrt_mass,
            neumann_kernel,
        }
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    /// Grid cell of each degree of freedom.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn dof(&self, cell: usize) -> Option<usize> {
        match self.dof_of_cell.get(cell) {
            Some(&d) if d != NO_DOF => Some(d as usize),
            _ => None,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ntheta, self.nt)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `true` when constants lie in the kernel (all-Neumann, unrestricted).
    pub fn has_constant_kernel(&self) -> bool {
        self.neumann_kernel
    }

    /// Nonzero stiffness entries `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.stiffness[k]))
        })
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.stiffness[k]))
    }

    pub(crate) fn scaled_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.scaled[k]))
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.stiffness[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// `y = K x`.
    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.stiffness[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// `y = M^{-1/2} K M^{-1/2} x`.
    pub fn apply_scaled(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.scaled[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub(crate) fn inv_sqrt_mass(&self) -> &[f64] {
        &self.inv_sqrt_mass
    }

    /// Upper bound on the spectral radius of the scaled matrix.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.scaled_row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Rayleigh quotient `uᵀKu / uᵀMu` of a grid function on the dofs.
    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        let mut ku = vec![0.0; self.dim()];
        self.apply_stiffness(u, &mut ku);
        let num: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        let den: f64 = u.iter().zip(&self.mass).map(|(a, m)| a * a * m).sum();
        num / den
    }

    /// Scatters a dof vector onto the full grid, zero outside the active set.
    pub fn to_grid_field(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ntheta * self.nt];
        for (d, &c) in self.cells.iter().enumerate() {
            out[c] = u[d];
        }
        out
    }

    pub fn from_grid_field(&self, field: &[f64]) -> Vec<f64> {
        self.cells.iter().map(|&c| field[c]).collect()
    }

    /// Ordering of the dofs that keeps the Cholesky envelope small: angular
    /// index interleaved (0, n−1, 1, n−2, …) so the periodic wrap stays
    /// local, then whichever axis order gives the smaller envelope.
    pub(crate) fn band_positions(&self) -> Vec<usize> {
        let n = self.ntheta;
        let interleave = |i: usize| if i < n / 2 { 2 * i } else { 2 * (n - 1 - i) + 1 };
        let key_theta_major = |c: usize| interleave(c % n) * self.nt + c / n;
        let key_t_major = |c: usize| (c / n) * n + interleave(c % n);
        let a = self.positions_by_key(key_theta_major);
        let b = self.positions_by_key(key_t_major);
        if self.envelope_size(&a) <= self.envelope_size(&b) {
            a
        } else {
            b
        }
    }

    fn positions_by_key(&self, key: impl Fn(usize) -> usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&d| key(self.cells[d]));
        let mut pos = vec![0; self.dim()];
        for (p, &d) in order.iter().enumerate() {
            pos[d] = p;
        }
        pos
    }

    fn envelope_size(&self, pos: &[usize]) -> usize {
        let mut first: Vec<usize> = (0..self.dim()).collect();
        for i in 0..self.dim() {
            for (j, _) in self.row(i) {
                let (pi, pj) = (pos[i], pos[j]);
                if pj < pi {
                    first[pi] = first[pi].min(pj);
                }
            }
        }
        first.iter().enumerate().map(|(p, &f)| p - f + 1).sum()
    }
}

/// Five-point finite-volume `−Δ` on the grid (with a symmetric nine-point
/// cross term on profiled annuli). Neumann faces carry no flux; Dirichlet
/// faces use the ghost value `−u`, placing the zero on the boundary face.
pub fn assemble(grid: &Grid, bc: BcPair) -> SymmetricOperator {
    let n = grid.ncells();
    let mut trip = Triplets::new(n);
    let (nth, nt) = (grid.ntheta, grid.nt);
    match &grid.domain.kind {
        DomainKind::CylinderStrip { .. } => {
            let cth = 1.0 / (grid.h_theta * grid.h_theta);
            let ct = 1.0 / (grid.h_t * grid.h_t);
            for j in 0..nt {
                for i in 0..nth {
                    let p = grid.index(i, j);
                    trip.face(p, grid.index((i + 1) % nth, j), cth);
                    if j + 1 < nt {
                        trip.face(p, grid.index(i, j + 1), ct);
                    }
                }
            }
            for i in 0..nth {
                if bc.bottom == Bc::Dirichlet {
                    trip.diag[grid.index(i, 0)] += 2.0 * ct;
                }
                if bc.top == Bc::Dirichlet {
                    trip.diag[grid.index(i, nt - 1)] += 2.0 * ct;
                }
            }
        }
        DomainKind::Annulus { b, h1, h2, .. } => {
            let (hs, ht) = (grid.h_theta, grid.h_t);
            let geom = |s: f64, t: f64| {
                let th = TAU * s;
                let (lo, hi) = (h1.value(th), h2.value(th));
                let (dlo, dhi) = (h1.derivative(th), h2.derivative(th));
                let w = hi - lo;
                let r = 1.0 + b * (lo + t * w);
                let r_theta = b * (dlo + t * (dhi - dlo));
                (r, w, r_theta)
            };
            // Angular faces: G_θθ / (4π² b hs²) with G_θθ = b w / r.
            let theta_face = |s: f64, t: f64| {
                let (r, w, _) = geom(s, t);
                w / (4.0 * PI * PI * r * hs * hs)
            };
            // Transverse faces: G_tt / (b ht²) with G_tt = (r² + r_θ²) / (r b w).
            let t_face = |s: f64, t: f64| {
                let (r, w, rth) = geom(s, t);
                (r * r + rth * rth) / (r * b * b * w * ht * ht)
            };
            for j in 0..nt {
                let t = (j as f64 + 0.5) * ht;
                for i in 0..nth {
                    let s = (i as f64 + 0.5) * hs;
                    let p = grid.index(i, j);
                    trip.face(p, grid.index((i + 1) % nth, j), theta_face(s + 0.5 * hs, t));
                    if j + 1 < nt {
                        trip.face(p, grid.index(i, j + 1), t_face(s, t + 0.5 * ht));
                    }
                }
            }
            for i in 0..nth {
                let s = (i as f64 + 0.5) * hs;
                if bc.bottom == Bc::Dirichlet {
                    trip.diag[grid.index(i, 0)] += 2.0 * t_face(s, 0.0);
                }
                if bc.top == Bc::Dirichlet {
                    trip.diag[grid.index(i, nt - 1)] += 2.0 * t_face(s, 1.0);
                }
            }
            let profiled = !(h1.is_constant() && h2.is_constant());
            if profiled {
                // Cross term 2 G_θt u_s u_t at interior corners, with corner
                // gradients from the four surrounding cells.
                for j in 0..nt - 1 {
                    let t = (j + 1) as f64 * ht;
                    for i in 0..nth {
                        let s = (i + 1) as f64 * hs;
                        let (r, _, rth) = geom(s, t);
                        let g = -(rth / b) / (TAU * r);
                        let ip = (i + 1) % nth;
                        let quad = [
                            grid.index(i, j),
                            grid.index(ip, j),
                            grid.index(i, j + 1),
                            grid.index(ip, j + 1),
                        ];
                        let a = [-1.0, 1.0, -1.0, 1.0].map(|x| x / (2.0 * hs));
                        let c = [-1.0, -1.0, 1.0, 1.0].map(|x| x / (2.0 * ht));
                        for p in 0..4 {
                            for q in p..4 {
                                let v = g * (a[p] * c[q] + c[p] * a[q]);
                                if p == q {
                                    trip.diag[quad[p]] += v;
                                } else {
                                    trip.off(quad[p], quad[q], v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    SymmetricOperator::from_parts(
        (nth, nt, grid.degree()),
        (0..n).collect(),
        grid.mass.clone(),
        trip,
        bc == BcPair::NN,
    )
}

/// Operator on the masked cells. Face couplings to cells outside the mask
/// become Dirichlet faces (ghost `−u`); corner couplings are dropped (zero
/// extension). Outer-boundary faces keep the ambient conditions.
pub fn restrict_to_subdomain(
    op: &SymmetricOperator,
    grid: &Grid,
    mask: &[bool],
) -> Result<SymmetricOperator> {
    if mask.len() != grid.ncells() {
        return Err(Error::invalid(format!(
            "mask has {} cells, grid has {}",
            mask.len(),
            grid.ncells()
        )));
    }
    let kept: Vec<usize> = (0..op.dim()).filter(|&d| mask[op.cells[d]]).collect();
    if kept.is_empty() {
        return Err(Error::invalid("empty subdomain mask"));
    }
    let mut new_index = vec![usize::MAX; op.dim()];
    for (k, &d) in kept.iter().enumerate() {
        new_index[d] = k;
    }
    let mut trip = Triplets::new(kept.len());
    let mut cut = false;
    for (k, &d) in kept.iter().enumerate() {
        for (e, v) in op.row(d) {
            if e == d {
                trip.diag[k] += v;
            } else if new_index[e] != usize::MAX {
                if new_index[e] > k {
                    trip.upper.push((k, new_index[e], v));
                }
            } else {
                cut = true;
                if grid.are_face_neighbors(op.cells[d], op.cells[e]) {
                    trip.diag[k] += v.abs();
                }
            }
        }
    }
    let cells: Vec<usize> = kept.iter().map(|&d| op.cells[d]).collect();
    let mass: Vec<f64> = kept.iter().map(|&d| op.mass[d]).collect();
    Ok(SymmetricOperator::from_parts(
        (op.ntheta, op.nt, op.degree),
        cells,
        mass,
        trip,
        op.neumann_kernel && !cut,
    ))
}

/// Builds an operator directly from parts; used by the deck splitting.
pub(crate) fn from_rows(
    shape: (usize, usize, u32),
    cells: Vec<usize>,
    mass: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    neumann_kernel: bool,
) -> SymmetricOperator {
    let mut trip = Triplets::new(cells.len());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row {
            if i == j {
                trip.diag[i] += v;
            } else if j > i {
                trip.upper.push((i, j, v));
            }
        }
    }
    SymmetricOperator::from_parts(shape, cells, mass, trip, neumann_kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{DomainSpec, Profile};

    fn strip(b: f64, degree: u32, bc: BcPair, nth: usize, nt: usize) -> (Grid, SymmetricOperator) {
        let g = Grid::new(DomainSpec::strip(b, degree, bc), nth, nt).unwrap();
        let op = assemble(&g, bc);
        (g, op)
    }

    fn assert_bitwise_symmetric(op: &SymmetricOperator) {
        for (i, j, v) in op.entries() {
            assert_eq!(v.to_bits(), op.entry(j, i).to_bits(), "({i},{j})");
        }
    }

    #[test]
    fn strip_operator_properties() {
        let (_, op) = strip(0.2, 1, BcPair::NN, 16, 4);
        assert_bitwise_symmetric(&op);
        for i in 0..op.dim() {
            let s: f64 = op.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-9 * op.entry(i, i));
        }
        for (i, j, v) in op.entries() {
            if i != j {
                assert!(v <= 0.0);
            } else {
                assert!(v > 0.0);
            }
        }
        assert!(op.has_constant_kernel());
    }

    #[test]
    fn dirichlet_faces_raise_diagonal() {
        let (g, nn) = strip(0.2, 1, BcPair::NN, 16, 4);
        let (_, nd) = strip(0.2, 1, BcPair::ND, 16, 4);
        let ct = 1.0 / (g.h_t * g.h_t);
        let top = g.index(3, 3);
        assert!((nd.entry(top, top) - nn.entry(top, top) - 2.0 * ct).abs() < 1e-9);
        assert!(!nd.has_constant_kernel());
    }

    #[test]
    fn profiled_annulus_is_symmetric_with_zero_row_sums() {
        let d = DomainSpec::annulus(
            0.1,
            Profile::fourier(vec![0.0, 0.2, 0.1]),
            Profile::fourier(vec![1.0, 0.0, 0.0, 0.1]),
            2,
            BcPair::NN,
        );
        let g = Grid::new(d, 32, 6).unwrap();
        let op = assemble(&g, BcPair::NN);
        assert_bitwise_symmetric(&op);
        for i in 0..op.dim() {
            let s: f64 = op.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-9 * op.entry(i, i), "row {i}: {s}");
        }
        // Nine-point stencil in the interior.
        let inner = g.index(5, 2);
        assert_eq!(op.row(inner).count(), 9);
    }

    #[test]
    fn full_mask_restriction_is_identity() {
        let (g, op) = strip(0.2, 1, BcPair::NN, 16, 4);
        let r = restrict_to_subdomain(&op, &g, &vec![true; g.ncells()]).unwrap();
        assert_eq!(r.dim(), op.dim());
        for (i, j, v) in op.entries() {
            assert_eq!(r.entry(i, j), v);
        }
        assert!(r.has_constant_kernel());
    }

    #[test]
    fn restriction_adds_interface_dirichlet() {
        let (g, op) = strip(0.2, 1, BcPair::NN, 16, 4);
        let mask: Vec<bool> = (0..g.ncells()).map(|c| g.coords(c).0 < 8).collect();
        let r = restrict_to_subdomain(&op, &g, &mask).unwrap();
        assert_eq!(r.dim(), 32);
        let cth = 1.0 / (g.h_theta * g.h_theta);
        let d = r.dof(g.index(7, 1)).unwrap();
        assert!((r.entry(d, d) - op.entry(g.index(7, 1), g.index(7, 1)) - cth).abs() < 1e-9);
        assert!(!r.has_constant_kernel());
        assert!(restrict_to_subdomain(&op, &g, &vec![false; g.ncells()]).is_err());
    }

    #[test]
    fn band_positions_are_a_permutation() {
        let (_, op) = strip(0.2, 1, BcPair::NN, 16, 4);
        let mut p = op.band_positions();
        p.sort();
        assert_eq!(p, (0..op.dim()).collect::<Vec<_>>());
    }
}
