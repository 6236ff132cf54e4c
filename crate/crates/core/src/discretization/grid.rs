use std::f64::consts::TAU;

use super::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};

/// Cell-centred grid on `[0, degree) × (0, 1)` (annulus, mapped) or
/// `[0, degree) × (0, b)` (strip). The angular direction is periodic.
///
/// Cells are numbered `j * ntheta + i` with `i` angular and `j` transverse.
#[derive(Clone, Debug)]
pub struct Grid {
    pub domain: DomainSpec,
    pub ntheta: usize,
    pub nt: usize,
    /// Angular spacing in units of the unit-circle perimeter.
    pub h_theta: f64,
    /// Transverse spacing: physical for strips, mapped for annuli.
    pub h_t: f64,
    /// Radius at each cell centre (all ones for strips).
    pub radius: Vec<f64>,
    /// Cell mass relative to the reference cell `h_theta * h_t`
    /// (times `2π b` on annuli).
    pub mass: Vec<f64>,
}

impl Grid {
    pub fn new(domain: DomainSpec, ntheta: usize, nt: usize) -> Result<Self> {
        domain.validate()?;
        let degree = domain.degree() as usize;
        if ntheta < 8 {
            return Err(Error::invalid(format!("ntheta must be at least 8, got {ntheta}")));
        }
        if nt < 2 {
            return Err(Error::invalid(format!("nt must be at least 2, got {nt}")));
        }
        if ntheta % (2 * degree) != 0 {
            return Err(Error::invalid(format!(
                "ntheta = {ntheta} must be divisible by 2 * degree = {}",
                2 * degree
            )));
        }
        let h_theta = degree as f64 / ntheta as f64;
        let ncells = ntheta * nt;
        match &domain.kind {
            DomainKind::CylinderStrip { b, .. } => Ok(Grid {
                h_t: b / nt as f64,
                radius: vec![1.0; ncells],
                mass: vec![1.0; ncells],
                domain,
                ntheta,
                nt,
                h_theta,
            }),
            DomainKind::Annulus { b, h1, h2, .. } => {
                // Profiles must be ordered at centres and at angular faces.
                for k in 0..2 * ntheta {
                    let theta = TAU * (k as f64 * 0.5 * h_theta);
                    let (lo, hi) = (h1.value(theta), h2.value(theta));
                    if lo >= hi {
                        return Err(Error::InvalidDomain(format!(
                            "profile violation h1 >= h2 at theta = {theta:.4} ({lo} >= {hi})"
                        )));
                    }
                    if 1.0 + b * lo <= 0.0 {
                        return Err(Error::InvalidDomain(format!(
                            "inner radius is not positive at theta = {theta:.4}"
                        )));
                    }
                }
                let h_t = 1.0 / nt as f64;
                let mut radius = Vec::with_capacity(ncells);
                let mut mass = Vec::with_capacity(ncells);
                for j in 0..nt {
                    let t = (j as f64 + 0.5) * h_t;
                    for i in 0..ntheta {
                        let theta = TAU * (i as f64 + 0.5) * h_theta;
                        let (lo, hi) = (h1.value(theta), h2.value(theta));
                        let r = 1.0 + b * (lo + t * (hi - lo));
                        radius.push(r);
                        mass.push(r * (hi - lo));
                    }
                }
                Ok(Grid {
                    domain,
                    ntheta,
                    nt,
                    h_theta,
                    h_t,
                    radius,
                    mass,
                })
            }
        }
    }

    pub fn ncells(&self) -> usize {
        self.ntheta * self.nt
    }

    pub fn degree(&self) -> u32 {
        self.domain.degree()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.ntheta + i
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.ntheta, cell / self.ntheta)
    }

    /// Angular coordinate of a cell centre, in `[0, degree)`.
    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_theta
    }

    /// Transverse coordinate of a cell centre: `y ∈ (0, b)` on strips,
    /// `t ∈ (0, 1)` on annuli.
    pub fn t(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h_t
    }

    /// Transverse coordinate scaled to physical width, `(0, b)` for both kinds.
    pub fn y(&self, j: usize) -> f64 {
        match self.domain.kind {
            DomainKind::CylinderStrip { .. } => self.t(j),
            DomainKind::Annulus { b, .. } => b * self.t(j),
        }
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.domain.kind, DomainKind::Annulus { .. })
    }

    /// Face neighbours of a cell, with angular wrap.
    pub fn neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(cell);
        let n = self.ntheta;
        let left = self.index((i + n - 1) % n, j);
        let right = self.index((i + 1) % n, j);
        let down = (j > 0).then(|| self.index(i, j - 1));
        let up = (j + 1 < self.nt).then(|| self.index(i, j + 1));
        [Some(left), Some(right), down, up].into_iter().flatten()
    }

    /// `true` when two distinct cells share a face.
    pub fn are_face_neighbors(&self, a: usize, b: usize) -> bool {
        let (ia, ja) = self.coords(a);
        let (ib, jb) = self.coords(b);
        if ja == jb {
            let d = (ia + self.ntheta - ib) % self.ntheta;
            d == 1 || d == self.ntheta - 1
        } else {
            ia == ib && ja.abs_diff(jb) == 1
        }
    }

    /// Evaluates `f(theta, y)` at every cell centre.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ncells());
        for j in 0..self.nt {
            for i in 0..self.ntheta {
                out.push(f(self.theta(i), self.y(j)));
            }
        }
        out
    }

    /// Same grid shape on a different domain degree; used for covers.
    pub fn with_degree(&self, degree: u32) -> Result<Grid> {
        let scale = degree as usize * self.ntheta / self.degree() as usize;
        Grid::new(self.domain.with_degree(degree), scale, self.nt)
    }

    pub fn with_bc(&self, bc: crate::catalog::BcPair) -> Grid {
        Grid {
            domain: self.domain.with_bc(bc),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::BcPair;
    use crate::discretization::Profile;

    #[test]
    fn strip_grid_shape() {
        let g = Grid::new(DomainSpec::strip(0.2, 1, BcPair::NN), 10, 4).unwrap();
        assert_eq!(g.ncells(), 40);
        assert!((g.h_theta - 0.1).abs() < 1e-15);
        assert!((g.h_t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn cover_grid_shape() {
        let g = Grid::new(DomainSpec::strip(0.2, 2, BcPair::NN), 20, 4).unwrap();
        assert_eq!(g.ncells(), 80);
        assert!((g.theta(19) - 1.95).abs() < 1e-12);
    }

    #[test]
    fn round_annulus_radii() {
        let g = Grid::new(DomainSpec::round_annulus(0.1, 1, BcPair::NN), 16, 4).unwrap();
        assert!(g.radius.iter().all(|&r| r > 1.0 && r < 1.1));
        assert!((g.radius[0] - 1.0125).abs() < 1e-12);
    }

    #[test]
    fn rejects_crossed_profiles() {
        let d = DomainSpec::annulus(
            0.1,
            Profile::fourier(vec![0.0, 0.8]),
            Profile::constant(0.5),
            1,
            BcPair::NN,
        );
        assert!(matches!(Grid::new(d, 16, 4), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn rejects_bad_sizes() {
        let d = DomainSpec::strip(0.2, 2, BcPair::NN);
        assert!(Grid::new(d.clone(), 6, 4).is_err());
        assert!(Grid::new(d.clone(), 18, 4).is_err());
        assert!(Grid::new(d, 20, 1).is_err());
    }

    #[test]
    fn wrap_adjacency() {
        let g = Grid::new(DomainSpec::strip(0.2, 1, BcPair::NN), 10, 4).unwrap();
        assert!(g.are_face_neighbors(g.index(9, 2), g.index(0, 2)));
        assert!(!g.are_face_neighbors(g.index(9, 2), g.index(0, 3)));
        assert_eq!(g.neighbors(g.index(0, 0)).count(), 3);
    }
}
