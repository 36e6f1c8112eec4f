use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

/// A sublattice of `Z^dim`, stored by its column Hermite normal form.
///
/// Basis vector `i` has its pivot (a positive entry) at row `pivots[i]`,
/// zeros above it, and the pivot rows are strictly increasing. Entries of
/// earlier basis vectors in a pivot row are reduced into `[0, pivot)`, which
/// makes the basis unique for the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    /// Lattice spanned by the columns of `generators`.
    pub fn from_generators(generators: &IntMatrix) -> Self {
        Self::from_vectors(generators.rows(), generators.columns())
    }

    pub fn from_vectors(dim: usize, mut cols: Vec<Vec<BigInt>>) -> Self {
        cols.retain(|c| c.iter().any(|x| !x.is_zero()));
        let mut basis: Vec<Vec<BigInt>> = Vec::new();
        let mut pivots = Vec::new();
        for row in 0..dim {
            // gcd-eliminate row `row` among the remaining columns
            loop {
                let live: Vec<usize> = (0..cols.len())
                    .filter(|&c| !cols[c][row].is_zero())
                    .collect();
                if live.len() <= 1 {
                    break;
                }
                let min = *live
                    .iter()
                    .min_by(|&&a, &&b| cols[a][row].abs().cmp(&cols[b][row].abs()))
                    .expect("nonempty");
                let p = cols[min][row].clone();
                for &c in &live {
                    if c == min {
                        continue;
                    }
                    let q = &cols[c][row] / &p;
                    let (pc, cc) = pair_mut(&mut cols, min, c);
                    for (x, y) in cc.iter_mut().zip(pc.iter()) {
                        *x -= &q * y;
                    }
                }
            }
            let Some(c) = (0..cols.len()).find(|&c| !cols[c][row].is_zero()) else {
                continue;
            };
            let mut v = cols.swap_remove(c);
            if v[row].is_negative() {
                v.iter_mut().for_each(|x| *x = -std::mem::take(x));
            }
            let p = v[row].clone();
            for b in basis.iter_mut() {
                let q = b[row].div_floor(&p);
                if !q.is_zero() {
                    for (x, y) in b.iter_mut().zip(v.iter()) {
                        *x -= &q * y;
                    }
                }
            }
            basis.push(v);
            pivots.push(row);
            cols.retain(|c| c.iter().any(|x| !x.is_zero()));
        }
        debug_assert!(cols.is_empty());
        Lattice { dim, basis, pivots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(self.dim, &self.basis)
    }

    /// Integer coordinates of `v` in the HNF basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.dim);
        let mut rest = v.to_vec();
        let mut coords = vec![BigInt::zero(); self.basis.len()];
        let mut next = 0;
        for row in 0..self.dim {
            if next < self.pivots.len() && self.pivots[next] == row {
                let b = &self.basis[next];
                let (q, r) = rest[row].div_rem(&b[row]);
                if !r.is_zero() {
                    return None;
                }
                for (x, y) in rest.iter_mut().zip(b.iter()) {
                    *x -= &q * y;
                }
                coords[next] = q;
                next += 1;
            } else if !rest[row].is_zero() {
                return None;
            }
        }
        Some(coords)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Index in `Z^dim` (`None` when the lattice is not of full rank).
    pub fn index(&self) -> Option<BigInt> {
        (self.rank() == self.dim).then(|| {
            self.basis
                .iter()
                .zip(&self.pivots)
                .map(|(b, &r)| b[r].clone())
                .product()
        })
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (l, r) = v.split_at_mut(b);
        (&l[a], &mut r[0])
    } else {
        let (l, r) = v.split_at_mut(a);
        (&r[0], &mut l[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hnf_is_canonical() {
        let a = Lattice::from_vectors(2, vec![v(&[2, 0]), v(&[0, 2])]);
        let b = Lattice::from_vectors(2, vec![v(&[2, 2]), v(&[0, 2]), v(&[4, 6])]);
        assert_eq!(a, b);
        assert_eq!(a.index(), Some(BigInt::from(4)));
    }

    #[test]
    fn membership() {
        let l = Lattice::from_vectors(3, vec![v(&[1, 1, 0]), v(&[0, 2, 2])]);
        assert!(l.contains(&v(&[1, 3, 2])));
        assert!(!l.contains(&v(&[0, 1, 1])));
        assert!(!l.contains(&v(&[0, 0, 1])));
        assert_eq!(l.coordinates(&v(&[2, 4, 2])), Some(v(&[2, 1])));
        assert_eq!(l.index(), None);
    }

    #[test]
    fn zero_lattice() {
        let l = Lattice::from_vectors(2, vec![v(&[0, 0])]);
        assert_eq!(l.rank(), 0);
        assert!(l.contains(&v(&[0, 0])));
        assert!(!l.contains(&v(&[1, 0])));
    }
}
