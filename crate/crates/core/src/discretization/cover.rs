use super::grid::Grid;
use super::operator::{from_rows, SymmetricOperator};
use crate::error::{Error, Result};

/// Pulls a per-cell field or mask on a degree-1 grid back to its double
/// cover: values repeat with period 1 in the angular direction.
pub fn lift_to_cover<T: Copy>(base: &Grid, cover: &Grid, values: &[T]) -> Result<Vec<T>> {
    if base.degree() != 1 || cover.degree() != 2 {
        return Err(Error::invalid("lift needs a degree-1 base and a degree-2 cover"));
    }
    if cover.nt != base.nt || cover.ntheta != 2 * base.ntheta {
        return Err(Error::invalid(format!(
            "cover grid {}x{} does not match base {}x{}",
            cover.ntheta, cover.nt, base.ntheta, base.nt
        )));
    }
    if values.len() != base.ncells() {
        return Err(Error::invalid("field length does not match the base grid"));
    }
    let mut out = Vec::with_capacity(cover.ncells());
    for j in 0..cover.nt {
        for i in 0..cover.ntheta {
            out.push(values[base.index(i % base.ntheta, j)]);
        }
    }
    Ok(out)
}

/// Cell permutation of the deck transformation `θ ↦ θ + 1` on a degree-2
/// grid.
pub fn deck_permutation(grid: &Grid) -> Result<Vec<usize>> {
    if grid.degree() != 2 {
        return Err(Error::invalid("deck transformation needs a degree-2 grid"));
    }
    let half = grid.ntheta / 2;
    Ok((0..grid.ncells())
        .map(|c| {
            let (i, j) = grid.coords(c);
            grid.index((i + half) % grid.ntheta, j)
        })
        .collect())
}

/// The two invariant blocks of a deck-commuting operator.
///
/// Both blocks live on the cells of the first sheet `θ ∈ [0, 1)`. A block
/// eigenvector `w` lifts to `(w, w)/√2` (symmetric) or `(w, −w)/√2`
/// (antisymmetric) on the cover.
#[derive(Clone, Debug)]
pub struct DeckBlocks {
    pub symmetric: SymmetricOperator,
    pub antisymmetric: SymmetricOperator,
}

pub fn deck_split(op: &SymmetricOperator) -> Result<DeckBlocks> {
    if op.degree() != 2 {
        return Err(Error::invalid("deck_split needs an operator on a degree-2 grid"));
    }
    let (ntheta, nt) = op.shape();
    let half = ntheta / 2;
    let deck = |c: usize| {
        let (i, j) = (c % ntheta, c / ntheta);
        j * ntheta + (i + half) % ntheta
    };
    // Block numbering: first-sheet cells in dof order, relabelled onto the
    // half-width grid.
    let sheet: Vec<usize> = (0..op.dim())
        .filter(|&d| op.cells()[d] % ntheta < half)
        .collect();
    let mut block_index = vec![usize::MAX; ntheta * nt];
    for (k, &d) in sheet.iter().enumerate() {
        let c = op.cells()[d];
        if op.dof(deck(c)).is_none() {
            return Err(Error::invalid("active set is not invariant under the deck map"));
        }
        block_index[c] = k;
        block_index[deck(c)] = k;
    }
    if 2 * sheet.len() != op.dim() {
        return Err(Error::invalid("active set is not invariant under the deck map"));
    }
    let mut sym_rows = Vec::with_capacity(sheet.len());
    let mut anti_rows = Vec::with_capacity(sheet.len());
    for &d in &sheet {
        let mut srow: Vec<(usize, f64)> = Vec::new();
        let mut arow: Vec<(usize, f64)> = Vec::new();
        for (e, v) in op.row(d) {
            let c = op.cells()[e];
            let k = block_index[c];
            let sign = if c % ntheta < half { 1.0 } else { -1.0 };
            srow.push((k, v));
            arow.push((k, sign * v));
        }
        sym_rows.push(merge_row(srow));
        anti_rows.push(merge_row(arow));
    }
    let cells: Vec<usize> = sheet
        .iter()
        .map(|&d| {
            let c = op.cells()[d];
            (c / ntheta) * half + c % ntheta
        })
        .collect();
    let mass: Vec<f64> = sheet.iter().map(|&d| op.mass()[d]).collect();
    let shape = (half, nt, 1);
    Ok(DeckBlocks {
        symmetric: from_rows(shape, cells.clone(), mass.clone(), sym_rows, op.has_constant_kernel()),
        antisymmetric: from_rows(shape, cells, mass, anti_rows, false),
    })
}

fn merge_row(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|&(k, _)| k);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (k, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += v,
            _ => out.push((k, v)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::BcPair;
    use crate::discretization::{assemble, DomainSpec};

    #[test]
    fn deck_is_an_involution_commuting_with_the_operator() {
        let g = Grid::new(DomainSpec::strip(0.3, 2, BcPair::NN), 16, 4).unwrap();
        let p = deck_permutation(&g).unwrap();
        for c in 0..g.ncells() {
            assert_eq!(p[p[c]], c);
        }
        let op = assemble(&g, BcPair::NN);
        for (i, j, v) in op.entries() {
            assert_eq!(op.entry(p[i], p[j]), v);
        }
    }

    #[test]
    fn lift_repeats_values() {
        let base = Grid::new(DomainSpec::strip(0.3, 1, BcPair::NN), 8, 2).unwrap();
        let cover = base.with_degree(2).unwrap();
        let field: Vec<usize> = (0..base.ncells()).collect();
        let lifted = lift_to_cover(&base, &cover, &field).unwrap();
        assert_eq!(lifted.len(), 32);
        assert_eq!(lifted[cover.index(9, 1)], base.index(1, 1));
        assert!(lift_to_cover(&base, &base, &field).is_err());
    }

    #[test]
    fn blocks_have_half_dimension() {
        let g = Grid::new(DomainSpec::strip(0.3, 2, BcPair::NN), 16, 4).unwrap();
        let blocks = deck_split(&assemble(&g, BcPair::NN)).unwrap();
        assert_eq!(blocks.symmetric.dim(), 32);
        assert_eq!(blocks.antisymmetric.dim(), 32);
        assert!(blocks.symmetric.has_constant_kernel());
        let g1 = Grid::new(DomainSpec::strip(0.3, 1, BcPair::NN), 8, 4).unwrap();
        let base = assemble(&g1, BcPair::NN);
        for (i, j, v) in base.entries() {
            assert_eq!(blocks.symmetric.entry(i, j), v);
        }
    }
}
