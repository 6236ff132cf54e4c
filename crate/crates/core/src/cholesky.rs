//! Envelope (skyline) Cholesky factorization for the shift-invert solves.

use crate::discretization::SymmetricOperator;
use crate::error::{Error, Result};

/// `L Lᵀ = P (A + σI) Pᵀ` for the scaled operator `A`, stored row by row
/// from each row's first nonzero column to the diagonal.
pub(crate) struct EnvelopeCholesky {
    pos: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub(crate) fn factor(op: &SymmetricOperator, shift: f64) -> Result<Self> {
        let n = op.dim();
        let pos = op.band_positions();
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for (j, _) in op.scaled_row(i) {
                let (pi, pj) = (pos[i], pos[j]);
                if pj < pi {
                    first[pi] = first[pi].min(pj);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for p in 0..n {
            offset.push(offset[p] + (p - first[p] + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for i in 0..n {
            let pi = pos[i];
            for (j, v) in op.scaled_row(i) {
                let pj = pos[j];
                if pj <= pi {
                    data[offset[pi] + (pj - first[pi])] += v;
                }
            }
            data[offset[pi] + (pi - first[pi])] += shift;
        }

        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            for j in fi..=i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                let (li, lj) = (&data[oi + (k0 - fi)..oi + (j - fi)], &data[oj + (k0 - fj)..oj + (j - fj)]);
                let dot: f64 = li.iter().zip(lj).map(|(a, b)| a * b).sum();
                let s = data[oi + (j - fi)] - dot;
                if j < i {
                    let djj = data[oj + (j - fj)];
                    data[oi + (j - fi)] = s / djj;
                } else {
                    if !(s > 0.0) {
                        return Err(Error::NumericalFailure {
                            message: format!("shifted operator is not positive definite at pivot {i}"),
                            residuals: vec![],
                        });
                    }
                    data[oi + (i - fi)] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky {
            pos,
            first,
            offset,
            data,
        })
    }

    /// Solves `(A + σI) x = b` in place.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        let mut y = vec![0.0; n];
        for (d, &p) in self.pos.iter().enumerate() {
            y[p] = b[d];
        }
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        for (d, &p) in self.pos.iter().enumerate() {
            b[d] = y[p];
        }
    }

    #[cfg(test)]
    pub(crate) fn envelope(&self) -> usize {
        self.data.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::BcPair;
    use crate::discretization::{assemble, DomainSpec, Grid};

    #[test]
    fn solves_shifted_system() {
        let g = Grid::new(DomainSpec::strip(0.3, 1, BcPair::ND), 16, 6).unwrap();
        let op = assemble(&g, BcPair::ND);
        let chol = EnvelopeCholesky::factor(&op, 0.5).unwrap();
        let x: Vec<f64> = (0..op.dim()).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let mut b = vec![0.0; op.dim()];
        op.apply_scaled(&x, &mut b);
        for (bi, xi) in b.iter_mut().zip(&x) {
            *bi += 0.5 * xi;
        }
        chol.solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-9, "{a} vs {e}");
        }
    }

    #[test]
    fn envelope_stays_narrow_with_wrap() {
        let g = Grid::new(DomainSpec::strip(0.3, 1, BcPair::NN), 64, 6).unwrap();
        let op = assemble(&g, BcPair::NN);
        let chol = EnvelopeCholesky::factor(&op, 1.0).unwrap();
        // Interleaving bounds every row's reach by about 2 * nt.
        assert!(chol.envelope() <= op.dim() * (2 * 6 + 2));
    }
}
