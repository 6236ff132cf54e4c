//! Lowest eigenpairs of a [`SymmetricOperator`].
//!
//! Block Krylov iteration on the shift-inverted operator
//! `(A + σI)^{-1}`, with Rayleigh–Ritz on `A` and thick restarts from the
//! current Ritz block. The block is wider than the number of requested pairs
//! so that double eigenvalues are resolved as whole clusters. Constants are
//! deflated explicitly on all-Neumann operators.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cholesky::EnvelopeCholesky;
use crate::discretization::SymmetricOperator;
use crate::error::{Error, Result};

const DENSE_LIMIT: usize = 128;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Residual tolerance, relative to `max(1, |λ|)`.
    pub tol: f64,
    pub seed: u64,
    pub max_outer: usize,
    /// Extra block vectors beyond the requested count (at least 2).
    pub guard: usize,
    pub krylov_depth: usize,
    /// Relative gap below which eigenvalues are reported as one cluster.
    pub cluster_gap: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            seed: 0x5eed_2011,
            max_outer: 400,
            guard: 4,
            krylov_depth: 3,
            cluster_gap: 1e-6,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// An eigenvalue with its eigenvector on the operator's dofs.
///
/// `vector` has unit norm in the mass-weighted inner product `Σ mᵢ uᵢ²`,
/// which is the cell-area weighted discrete L² norm. `residual` is
/// `‖Au − λu‖ / max(1, |λ|)` in the symmetrised coordinates.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `v` against `deflate` and `basis` (two passes) and
/// normalizes it. Returns `false` if `v` is numerically dependent.
fn orthonormalize(v: &mut [f64], deflate: &[Vec<f64>], basis: &[Vec<f64>]) -> bool {
    let start = norm(v);
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in deflate.iter().chain(basis) {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    let end = norm(v);
    if end <= 1e-10 * start {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= end);
    true
}

fn fix_sign(w: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in w.iter().enumerate() {
        if x.abs() > w[best].abs() * (1.0 + 1e-9) {
            best = i;
        }
    }
    if w[best] < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Groups ascending values into clusters whose consecutive members differ
/// by at most `rel_gap * max(1, |λ|)`.
pub fn clusters(values: &[f64], rel_gap: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let scale = values[i].abs().max(values[i - 1].abs()).max(1.0);
            values[i] - values[i - 1] > rel_gap * scale
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// The `m` lowest eigenpairs of `op`, ascending, each residual-certified.
pub fn lowest_eigenpairs(
    op: &SymmetricOperator,
    m: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= dimension {n}, got {m}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let scaled = if n <= DENSE_LIMIT {
        dense_eigenpairs(op, m)
    } else {
        krylov_eigenpairs(op, m, opts)?
    };
    let s = op.inv_sqrt_mass();
    Ok(scaled
        .into_iter()
        .map(|(value, mut w, residual)| {
            fix_sign(&mut w);
            let vector = w.iter().zip(s).map(|(x, si)| x * si).collect();
            EigenPair {
                value,
                vector,
                residual,
            }
        })
        .collect())
}

fn residual_of(op: &SymmetricOperator, value: f64, w: &[f64]) -> f64 {
    let mut aw = vec![0.0; w.len()];
    op.apply_scaled(w, &mut aw);
    axpy(-value, w, &mut aw);
    norm(&aw) / norm(w) / value.abs().max(1.0)
}

fn dense_eigenpairs(op: &SymmetricOperator, m: usize) -> Vec<(f64, Vec<f64>, f64)> {
    let n = op.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in op.scaled_row(i) {
            a[(i, j)] = v;
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    order
        .into_iter()
        .take(m)
        .map(|k| {
            let value = eig.eigenvalues[k];
            let w: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let r = residual_of(op, value, &w);
            (value, w, r)
        })
        .collect()
}

fn krylov_eigenpairs(
    op: &SymmetricOperator,
    m: usize,
    opts: &EigenOptions,
) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let n = op.dim();
    let mut results = Vec::with_capacity(m);
    let mut deflate: Vec<Vec<f64>> = Vec::new();
    if op.has_constant_kernel() {
        let mut z: Vec<f64> = op.mass().iter().map(|x| x.sqrt()).collect();
        let nz = norm(&z);
        z.iter_mut().for_each(|x| *x /= nz);
        let r = residual_of(op, 0.0, &z);
        results.push((0.0, z.clone(), r));
        deflate.push(z);
    }
    let wanted = m - results.len();
    if wanted == 0 {
        return Ok(results);
    }
    let free = n - deflate.len();
    let block = (wanted + opts.guard.max(2)).min(free);

    let shift = (1e-6 * op.gershgorin_bound()).max(1e-12);
    let chol = EnvelopeCholesky::factor(op, shift)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(block);
    while x.len() < block {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if orthonormalize(&mut v, &deflate, &x) {
            x.push(v);
        }
    }

    let mut best = vec![f64::INFINITY; wanted];
    for _outer in 0..opts.max_outer {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut current = x;
        for level in 0..=opts.krylov_depth {
            let mut added = Vec::new();
            for mut v in current {
                if basis.len() >= free {
                    break;
                }
                if orthonormalize(&mut v, &deflate, &basis) {
                    basis.push(v.clone());
                    added.push(v);
                }
            }
            if level == opts.krylov_depth || added.is_empty() || basis.len() >= free {
                break;
            }
            added.par_iter_mut().for_each(|v| chol.solve(v));
            current = added;
        }

        let q = basis.len();
        let w: Vec<Vec<f64>> = basis
            .par_iter()
            .map(|v| {
                let mut av = vec![0.0; n];
                op.apply_scaled(v, &mut av);
                av
            })
            .collect();
        let mut h = DMatrix::<f64>::zeros(q, q);
        for a in 0..q {
            for b in a..q {
                let v = 0.5 * (dot(&basis[a], &w[b]) + dot(&basis[b], &w[a]));
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let keep = block.min(q);
        let ritz: Vec<(f64, Vec<f64>, Vec<f64>)> = order[..keep]
            .par_iter()
            .map(|&k| {
                let mut xv = vec![0.0; n];
                let mut axv = vec![0.0; n];
                for a in 0..q {
                    let c = eig.eigenvectors[(a, k)];
                    axpy(c, &basis[a], &mut xv);
                    axpy(c, &w[a], &mut axv);
                }
                (eig.eigenvalues[k], xv, axv)
            })
            .collect();

        let mut converged = true;
        let mut residuals = Vec::with_capacity(wanted);
        for (theta, xv, axv) in ritz.iter().take(wanted) {
            let mut r = axv.clone();
            axpy(-theta, xv, &mut r);
            let res = norm(&r) / theta.abs().max(1.0);
            residuals.push(res);
            if res > opts.tol {
                converged = false;
            }
        }
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = b.min(*r);
        }
        if converged && ritz.len() >= wanted {
            for ((theta, xv, _), res) in ritz.into_iter().take(wanted).zip(residuals) {
                results.push((theta, xv, res));
            }
            return Ok(results);
        }
        x = ritz.into_iter().map(|(_, xv, _)| xv).collect();
    }
    Err(Error::NumericalFailure {
        message: format!("eigensolver did not reach tolerance {:e} in {} outer steps", opts.tol, opts.max_outer),
        residuals: best,
    })
}

/// Lowest eigenvalue of a subdomain operator with a nonnegative eigenvector.
#[derive(Clone, Debug)]
pub struct Groundstate {
    pub value: f64,
    /// Nonnegative, unit norm in the mass-weighted inner product.
    pub vector: Vec<f64>,
    pub residual: f64,
}

pub fn groundstate(op: &SymmetricOperator, opts: &EigenOptions) -> Result<Groundstate> {
    let pair = lowest_eigenpairs(op, 1, opts)?.remove(0);
    let mut v = pair.vector;
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let max = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let floor = 1e-8_f64.max(10.0 * opts.tol) * max;
    if v.iter().any(|&x| x < -floor) {
        return Err(Error::Structural(
            "groundstate changes sign; the mask is disconnected, split it into components".into(),
        ));
    }
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(Groundstate {
        value: pair.value,
        vector: v,
        residual: pair.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{BcPair, PI2};
    use crate::discretization::{assemble, restrict_to_subdomain, DomainSpec, Grid};

    fn strip_op(b: f64, degree: u32, bc: BcPair, nth: usize, nt: usize) -> (Grid, SymmetricOperator) {
        let g = Grid::new(DomainSpec::strip(b, degree, bc), nth, nt).unwrap();
        let op = assemble(&g, bc);
        (g, op)
    }

    /// Discrete oracle: the strip operator separates, so its eigenvalues are
    /// sums of 1D periodic and 1D transverse finite-difference eigenvalues,
    /// known in closed form.
    fn separable_oracle(g: &Grid, bc: BcPair, count: usize) -> Vec<f64> {
        let n = g.ntheta;
        let ang: Vec<f64> = (0..n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
                4.0 * s * s / (g.h_theta * g.h_theta)
            })
            .collect();
        // 1D transverse operator with the same face rules, solved densely.
        let nt = g.nt;
        let c = 1.0 / (g.h_t * g.h_t);
        let mut t = DMatrix::<f64>::zeros(nt, nt);
        for j in 0..nt - 1 {
            t[(j, j)] += c;
            t[(j + 1, j + 1)] += c;
            t[(j, j + 1)] -= c;
            t[(j + 1, j)] -= c;
        }
        if bc.bottom == crate::catalog::Bc::Dirichlet {
            t[(0, 0)] += 2.0 * c;
        }
        if bc.top == crate::catalog::Bc::Dirichlet {
            t[(nt - 1, nt - 1)] += 2.0 * c;
        }
        let tr = SymmetricEigen::new(t).eigenvalues;
        let mut all: Vec<f64> = ang
            .iter()
            .flat_map(|a| tr.iter().map(move |b| a + b))
            .collect();
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        all
    }

    #[test]
    fn krylov_matches_separable_oracle() {
        for (bc, deg) in [(BcPair::NN, 1), (BcPair::ND, 1), (BcPair::NN, 2), (BcPair::DD, 2)] {
            let (g, op) = strip_op(0.3, deg, bc, 64, 10);
            let pairs = lowest_eigenpairs(&op, 7, &EigenOptions::default()).unwrap();
            let oracle = separable_oracle(&g, bc, 7);
            for (p, o) in pairs.iter().zip(&oracle) {
                assert!((p.value - o).abs() <= 1e-7 * o.max(1.0), "{bc}: {} vs {o}", p.value);
                assert!(p.residual <= 1e-8);
            }
        }
    }

    #[test]
    fn dense_and_krylov_agree() {
        let (_, op) = strip_op(0.2, 1, BcPair::ND, 32, 8);
        let dense = dense_eigenpairs(&op, 5);
        let kry = krylov_eigenpairs(&op, 5, &EigenOptions::default()).unwrap();
        for (d, k) in dense.iter().zip(&kry) {
            assert!((d.0 - k.0).abs() < 1e-8 * d.0);
        }
    }

    #[test]
    fn neumann_kernel_is_constant() {
        let (_, op) = strip_op(0.2, 1, BcPair::NN, 64, 8);
        let pairs = lowest_eigenpairs(&op, 1, &EigenOptions::default()).unwrap();
        assert_eq!(pairs[0].value, 0.0);
        let v = &pairs[0].vector;
        assert!(v.iter().all(|&x| (x - v[0]).abs() < 1e-12));
        // Unit mass-weighted norm: the strip mass is one per reference cell.
        let nrm: f64 = v.iter().map(|x| x * x).sum();
        assert!((nrm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_and_consistent() {
        let (_, op) = strip_op(0.3, 2, BcPair::NN, 64, 8);
        let opts = EigenOptions::default();
        let pairs = lowest_eigenpairs(&op, 7, &opts).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                let ip: f64 = pairs[a].vector.iter().zip(&pairs[b].vector).zip(op.mass()).map(|((x, y), m)| x * y * m).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8, "({a},{b}) = {ip}");
            }
            let rq = op.rayleigh_quotient(&pairs[a].vector);
            assert!((rq - pairs[a].value).abs() <= 10.0 * opts.tol * pairs[a].value.max(1.0));
        }
        let c = clusters(&pairs.iter().map(|p| p.value).collect::<Vec<_>>(), 1e-6);
        assert_eq!(c, vec![0..1, 1..3, 3..5, 5..7]);
        // Growing the request keeps the leading values.
        let more = lowest_eigenpairs(&op, 9, &opts).unwrap();
        for (a, b) in pairs.iter().zip(&more) {
            assert!((a.value - b.value).abs() <= opts.tol * a.value.max(1.0));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (_, op) = strip_op(0.3, 1, BcPair::ND, 64, 8);
        let a = lowest_eigenpairs(&op, 3, &EigenOptions::default()).unwrap();
        let b = lowest_eigenpairs(&op, 3, &EigenOptions::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
            assert_eq!(x.vector, y.vector);
        }
    }

    #[test]
    fn third_of_strip_groundstate() {
        let (g, op) = strip_op(0.2, 1, BcPair::NN, 96, 8);
        let mask: Vec<bool> = (0..g.ncells()).map(|c| g.coords(c).0 < 32).collect();
        let sub = restrict_to_subdomain(&op, &g, &mask).unwrap();
        let gs = groundstate(&sub, &EigenOptions::default()).unwrap();
        assert!((gs.value / (9.0 * PI2) - 1.0).abs() < 0.015);
        assert!(gs.vector.iter().all(|&x| x >= 0.0));
        // Constant across the strip height.
        let f = sub.to_grid_field(&gs.vector);
        assert!((f[g.index(10, 0)] - f[g.index(10, 7)]).abs() < 1e-8);
    }

    #[test]
    fn disconnected_mask_takes_the_smaller_component() {
        let (g, op) = strip_op(0.2, 1, BcPair::NN, 96, 8);
        let mask: Vec<bool> = (0..g.ncells())
            .map(|c| {
                let i = g.coords(c).0;
                i < 32 || (48..72).contains(&i)
            })
            .collect();
        let sub = restrict_to_subdomain(&op, &g, &mask).unwrap();
        let low = lowest_eigenpairs(&sub, 1, &EigenOptions::default()).unwrap()[0].value;
        let only_wide: Vec<bool> = (0..g.ncells()).map(|c| g.coords(c).0 < 32).collect();
        let wide = lowest_eigenpairs(
            &restrict_to_subdomain(&op, &g, &only_wide).unwrap(),
            1,
            &EigenOptions::default(),
        )
        .unwrap()[0]
            .value;
        assert!((low - wide).abs() < 1e-8 * wide);
    }

    #[test]
    fn rejects_bad_requests() {
        let (_, op) = strip_op(0.2, 1, BcPair::NN, 8, 2);
        assert!(lowest_eigenpairs(&op, 0, &EigenOptions::default()).is_err());
        assert!(lowest_eigenpairs(&op, 17, &EigenOptions::default()).is_err());
        assert!(lowest_eigenpairs(&op, 1, &EigenOptions::default().with_tol(0.0)).is_err());
    }
}
