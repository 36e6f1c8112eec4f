//! Enumeration of subgroups of a finite abelian group through the sublattices
//! of its generator lattice that contain the relation lattice.
//!
//! For `G = Z^n / diag(m_0, ..., m_{n-1})` every subgroup is `L / diag(m)` for
//! a unique lattice `L` with `diag(m) ⊆ L ⊆ Z^n`. Each such `L` is visited once,
//! in lower-triangular Hermite normal form: column `j` has `d_j > 0` in row `j`,
//! zeros above, and entries in rows `i > j` reduced into `[0, d_i)`.

use std::ops::ControlFlow;

use num_bigint::BigInt;

use crate::abelian::{FgAbGroup, IntMatrix, Lattice, Presentation};

/// A visited sublattice, as HNF columns (column `j` is `columns[j]`).
pub(crate) struct Sublattice<'a> {
    pub moduli: &'a [u64],
    pub columns: &'a [Vec<i64>],
}

impl Sublattice<'_> {
    fn matrix(&self) -> IntMatrix {
        let n = self.moduli.len();
        let cols: Vec<Vec<BigInt>> = self
            .columns
            .iter()
            .map(|c| c.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        IntMatrix::from_columns(n, &cols)
    }

    /// Isomorphism class of `Z^n / L`.
    pub fn quotient(&self) -> FgAbGroup {
        let n = self.moduli.len();
        Presentation::new(n, self.matrix())
            .expect("square")
            .canonical_form()
    }

    /// Isomorphism class of `L / diag(m)`.
    pub fn subgroup(&self) -> FgAbGroup {
        let n = self.moduli.len();
        let lattice = Lattice::from_generators(&self.matrix());
        let coords: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut e = vec![BigInt::from(0); n];
                e[i] = BigInt::from(self.moduli[i]);
                lattice.coordinates(&e).expect("relation lattice inside L")
            })
            .collect();
        Presentation::new(
            lattice.rank(),
            IntMatrix::from_columns(lattice.rank(), &coords),
        )
        .expect("shape")
        .canonical_form()
    }
}

/// Visits every lattice `L ⊇ diag(moduli)` of index `index` in `Z^n`.
pub(crate) fn for_each_sublattice<F>(moduli: &[u64], index: u64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&Sublattice<'_>) -> ControlFlow<()>,
{
    let n = moduli.len();
    if n == 0 {
        if index == 1 {
            let s = Sublattice {
                moduli,
                columns: &[],
            };
            return visit(&s);
        }
        return ControlFlow::Continue(());
    }
    // prefix[j] = m_0 * ... * m_{j-1}
    let mut prefix = vec![1u128; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] * moduli[j] as u128;
    }
    let mut state = Search {
        moduli,
        prefix,
        columns: vec![vec![0i64; n]; n],
    };
    state.column(n - 1, index, &mut visit)
}

struct Search<'a> {
    moduli: &'a [u64],
    prefix: Vec<u128>,
    columns: Vec<Vec<i64>>,
}

impl Search<'_> {
    fn column<F>(&mut self, j: usize, remaining: u64, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Sublattice<'_>) -> ControlFlow<()>,
    {
        let m = self.moduli[j];
        for d in divisors_desc(m) {
            if !remaining.is_multiple_of(d) {
                continue;
            }
            let rest = remaining / d;
            if !self.prefix[j].is_multiple_of(rest as u128) {
                continue;
            }
            if j == 0 && rest != 1 {
                continue;
            }
            let scale = (m / d) as i64;
            self.columns[j].iter_mut().for_each(|x| *x = 0);
            self.columns[j][j] = d as i64;
            let acc = vec![0i64; self.moduli.len()];
            self.tail(j, j + 1, scale, acc, rest, visit)?;
        }
        self.columns[j].iter_mut().for_each(|x| *x = 0);
        ControlFlow::Continue(())
    }

    /// Chooses the entry of column `j` in row `i`. The tail `t` must satisfy
    /// `scale * t ∈ span(columns j+1..)`, so that `m_j e_j` lies in the lattice;
    /// `acc` carries the partial back-substitution of that membership test.
    fn tail<F>(
        &mut self,
        j: usize,
        i: usize,
        scale: i64,
        acc: Vec<i64>,
        rest: u64,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&Sublattice<'_>) -> ControlFlow<()>,
    {
        let n = self.moduli.len();
        if i == n {
            if j == 0 {
                let s = Sublattice {
                    moduli: self.moduli,
                    columns: &self.columns,
                };
                return visit(&s);
            }
            return self.column(j - 1, rest, visit);
        }
        let di = self.columns[i][i];
        let mi = self.moduli[i] as i64;
        for t in 0..di {
            let w = (scale * t + acc[i]).rem_euclid(mi);
            if w % di != 0 {
                continue;
            }
            let q = w / di;
            let mut next = acc.clone();
            for (r, x) in next.iter_mut().enumerate().take(n).skip(i + 1) {
                *x = (*x - q * self.columns[i][r]).rem_euclid(self.moduli[r] as i64);
            }
            self.columns[j][i] = t;
            self.tail(j, i + 1, scale, next, rest, visit)?;
        }
        self.columns[j][i] = 0;
        ControlFlow::Continue(())
    }
}

fn divisors_desc(m: u64) -> Vec<u64> {
    let mut ds: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
    ds.reverse();
    ds
}

/// Cyclic orders of the canonical presentation of a finite group.
pub(crate) fn moduli_of(g: &FgAbGroup) -> Vec<u64> {
    g.torsion()
        .iter()
        .map(|pp| pp.prime.pow(pp.exponent))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(moduli: &[u64], index: u64) -> usize {
        let mut n = 0;
        let _ = for_each_sublattice(moduli, index, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    #[test]
    fn subgroup_counts_of_small_groups() {
        // Z2^2 has one subgroup of each of order 1 and 4, three of order 2.
        assert_eq!(count(&[2, 2], 1), 1);
        assert_eq!(count(&[2, 2], 2), 3);
        assert_eq!(count(&[2, 2], 4), 1);
        // Z2^3: 7 subgroups of order 2 and of order 4.
        assert_eq!(count(&[2, 2, 2], 4), 7);
        assert_eq!(count(&[2, 2, 2], 2), 7);
        // Z4 + Z2: subgroups of order 2 are three, of order 4 are three.
        assert_eq!(count(&[2, 4], 4), 3);
        assert_eq!(count(&[2, 4], 2), 3);
        // cyclic groups have one subgroup per divisor
        assert_eq!(count(&[8], 2), 1);
        assert_eq!(count(&[8], 3), 0);
    }

    #[test]
    fn classes_of_visited_subgroups() {
        let mut seen = Vec::new();
        let _ = for_each_sublattice(&[2, 4], 2, |s| {
            seen.push((s.subgroup().to_string(), s.quotient().to_string()));
            ControlFlow::Continue(())
        });
        seen.sort();
        assert_eq!(
            seen,
            vec![
                ("Z2^2".to_string(), "Z2".to_string()),
                ("Z4".to_string(), "Z2".to_string()),
                ("Z4".to_string(), "Z2".to_string()),
            ]
        );
    }
}
