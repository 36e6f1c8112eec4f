use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::group::{factorize, is_prime, FgAbGroup, PrimePower};
use super::lattice::Lattice;
use super::matrix::{integer_kernel_basis, smith_normal_form, IntMatrix};
use super::AlgebraError;

/// `Z^generator_count` modulo the column span of `relations`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    generator_count: usize,
    relations: IntMatrix,
}

impl Presentation {
    pub fn new(generator_count: usize, relations: IntMatrix) -> Result<Self, AlgebraError> {
        if relations.rows() != generator_count {
            return Err(AlgebraError::Shape(format!(
                "relation matrix has {} rows for {} generators",
                relations.rows(),
                generator_count
            )));
        }
        Ok(Presentation {
            generator_count,
            relations,
        })
    }

    pub fn free(rank: usize) -> Self {
        Presentation {
            generator_count: rank,
            relations: IntMatrix::zeros(rank, 0),
        }
    }

    /// Direct sum of cyclic groups `Z/n_i` (`n_i = 0` gives a free generator).
    pub fn cyclic_sum(orders: &[u64]) -> Self {
        let n = orders.len();
        Presentation {
            generator_count: n,
            relations: IntMatrix::diagonal(n, n, orders),
        }
    }

    /// The canonical presentation of `g`: one generator per torsion factor in
    /// canonical order (prime, then exponent, ascending), followed by the free
    /// generators.
    pub fn of_group(g: &FgAbGroup) -> Self {
        let t = g.torsion().len();
        let n = t + g.free_rank();
        let orders: Vec<BigInt> = g
            .torsion()
            .iter()
            .map(|pp| BigInt::from(pp.value()))
            .collect();
        let relations = IntMatrix::diagonal(n, t, &orders);
        Presentation {
            generator_count: n,
            relations,
        }
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn relation_lattice(&self) -> Lattice {
        Lattice::from_generators(&self.relations)
    }

    pub fn canonical_form(&self) -> FgAbGroup {
        let snf = smith_normal_form(&self.relations);
        let factors = snf.invariant_factors();
        let free = self.generator_count - factors.len();
        let torsion = factors
            .into_iter()
            .map(|d| d.magnitude().clone())
            .filter(|d| !d.is_one());
        let t = FgAbGroup::from_torsion_orders(torsion);
        FgAbGroup::new(free, t.torsion().to_vec())
    }

    /// An isomorphism onto the canonical presentation of this group, as the
    /// matrix acting on generator coordinates.
    pub fn canonical_isomorphism(&self) -> (Presentation, IntMatrix) {
        let snf = smith_normal_form(&self.relations);
        let factors = snf.invariant_factors();
        // (sort key, source row)
        let mut rows: Vec<(Option<PrimePower>, usize)> = Vec::new();
        for (i, d) in factors.iter().enumerate() {
            for (prime, exponent) in factorize(d.magnitude()) {
                rows.push((Some(PrimePower { prime, exponent }), i));
            }
        }
        for i in factors.len()..self.generator_count {
            rows.push((None, i));
        }
        rows.sort_by(|a, b| match (&a.0, &b.0) {
            (Some(x), Some(y)) => x.cmp(y).then(a.1.cmp(&b.1)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.1.cmp(&b.1),
        });
        let source: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let iso = snf.u.select_rows(&source);
        (Presentation::of_group(&self.canonical_form()), iso)
    }

    pub fn direct_sum(&self, other: &Presentation) -> Presentation {
        Presentation {
            generator_count: self.generator_count + other.generator_count,
            relations: self.relations.block_diag(&other.relations),
        }
    }

    /// Whether `v` (generator coordinates) is zero in the group.
    pub fn is_zero_element(&self, v: &[BigInt]) -> bool {
        self.relation_lattice().contains(v)
    }

    /// Subgroup generated by the columns of `gens` (coordinates in this presentation).
    pub fn subgroup(&self, gens: &IntMatrix) -> Result<Subquotient, AlgebraError> {
        let inc = Homomorphism::new(Presentation::free(gens.cols()), self.clone(), gens.clone())?;
        Ok(inc.image())
    }

    /// Whether two generating sets span the same subgroup.
    pub fn same_subgroup(&self, a: &IntMatrix, b: &IntMatrix) -> bool {
        let la = Lattice::from_generators(&a.hstack(&self.relations));
        let lb = Lattice::from_generators(&b.hstack(&self.relations));
        la == lb
    }
}

/// A subquotient computed from a homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquotient {
    pub group: FgAbGroup,
    pub presentation: Presentation,
    /// Generators of `presentation` written in the ambient coordinates
    /// (domain for kernels, codomain for images and cokernels).
    pub generators: IntMatrix,
}

/// A well-defined homomorphism between presented groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    domain: Presentation,
    codomain: Presentation,
    matrix: IntMatrix,
}

impl Homomorphism {
    /// Rejects shape mismatches and ill-defined maps (relations not sent into relations).
    pub fn new(
        domain: Presentation,
        codomain: Presentation,
        matrix: IntMatrix,
    ) -> Result<Self, AlgebraError> {
        if matrix.rows() != codomain.generator_count || matrix.cols() != domain.generator_count {
            return Err(AlgebraError::Shape(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.generator_count,
                domain.generator_count
            )));
        }
        let target = codomain.relation_lattice();
        let images = matrix.mul(&domain.relations);
        for (j, col) in images.columns().iter().enumerate() {
            if !target.contains(col) {
                return Err(AlgebraError::IllDefined { relation: j });
            }
        }
        Ok(Homomorphism {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn zero(domain: Presentation, codomain: Presentation) -> Self {
        let matrix = IntMatrix::zeros(codomain.generator_count, domain.generator_count);
        Homomorphism {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn identity(p: Presentation) -> Self {
        let matrix = IntMatrix::identity(p.generator_count);
        Homomorphism {
            domain: p.clone(),
            codomain: p,
            matrix,
        }
    }

    pub fn domain(&self) -> &Presentation {
        &self.domain
    }

    pub fn codomain(&self) -> &Presentation {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Result<Homomorphism, AlgebraError> {
        if self.codomain != other.domain {
            return Err(AlgebraError::Shape(
                "composition of non-matching maps".into(),
            ));
        }
        Ok(Homomorphism {
            domain: self.domain.clone(),
            codomain: other.codomain.clone(),
            matrix: other.matrix.mul(&self.matrix),
        })
    }

    /// `{x in Z^m : F x in relations(codomain)}`.
    fn preimage_of_zero(&self) -> Lattice {
        let m = self.domain.generator_count;
        let stacked = self.matrix.hstack(&self.codomain.relations);
        let projected = integer_kernel_basis(&stacked)
            .into_iter()
            .map(|v| v[..m].to_vec())
            .collect();
        Lattice::from_vectors(m, projected)
    }

    pub fn kernel(&self) -> Subquotient {
        let lattice = self.preimage_of_zero();
        let basis = lattice.basis_matrix();
        let coords: Vec<Vec<BigInt>> = self
            .domain
            .relations
            .columns()
            .iter()
            .map(|r| {
                lattice
                    .coordinates(r)
                    .expect("domain relations lie in the kernel lattice")
            })
            .collect();
        let relations = IntMatrix::from_columns(lattice.rank(), &coords);
        let presentation = Presentation {
            generator_count: lattice.rank(),
            relations,
        };
        Subquotient {
            group: presentation.canonical_form(),
            presentation,
            generators: basis,
        }
    }

    pub fn image(&self) -> Subquotient {
        let lattice = self.preimage_of_zero();
        let presentation = Presentation {
            generator_count: self.domain.generator_count,
            relations: lattice.basis_matrix(),
        };
        Subquotient {
            group: presentation.canonical_form(),
            presentation,
            generators: self.matrix.clone(),
        }
    }

    pub fn cokernel(&self) -> Subquotient {
        let presentation = Presentation {
            generator_count: self.codomain.generator_count,
            relations: self.codomain.relations.hstack(&self.matrix),
        };
        Subquotient {
            group: presentation.canonical_form(),
            presentation,
            generators: IntMatrix::identity(self.codomain.generator_count),
        }
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().group.is_trivial()
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel().group.is_trivial()
    }
}

/// The map induced on `p`-primary parts of a homomorphism between finite groups.
///
/// Both sides are presented as `A / p^N A` with `N` at least the `p`-adic
/// valuation of either order, which is exactly the `p`-primary quotient.
pub fn localize_hom(f: &Homomorphism, p: u64) -> Result<Homomorphism, AlgebraError> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    let a = f.domain.canonical_form();
    let b = f.codomain.canonical_form();
    let (Some(oa), Some(ob)) = (a.order(), b.order()) else {
        return Err(AlgebraError::InfiniteLocalization);
    };
    let n = valuation(&oa, p).max(valuation(&ob, p));
    let scale = BigInt::from(BigUint::from(p).pow(n));
    let kill = |pres: &Presentation| {
        let k = pres.generator_count;
        let diag = vec![scale.clone(); k];
        Presentation {
            generator_count: k,
            relations: pres.relations.hstack(&IntMatrix::diagonal(k, k, &diag)),
        }
    };
    Homomorphism::new(kill(&f.domain), kill(&f.codomain), f.matrix.clone())
}

fn valuation(n: &BigUint, p: u64) -> u32 {
    if n.is_zero() {
        return 0;
    }
    factorize(n)
        .into_iter()
        .find(|&(q, _)| q == p)
        .map_or(0, |(_, e)| e)
}

/// Index of `p` in a small group's order, convenient for tests and callers.
pub fn p_valuation(n: u64, p: u64) -> u32 {
    valuation(&BigUint::from(n), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FgAbGroup {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(Presentation::cyclic_sum(&[6]).canonical_form(), g("Z2+Z3"));
        assert_eq!(Presentation::free(2).canonical_form(), g("Z^2"));
        assert_eq!(
            Presentation::cyclic_sum(&[2, 4]).canonical_form(),
            g("Z2+Z4")
        );
        assert_eq!(Presentation::cyclic_sum(&[1, 0]).canonical_form(), g("Z"));
    }

    #[test]
    fn doubling_on_z4() {
        let z4 = Presentation::cyclic_sum(&[4]);
        let f = Homomorphism::new(z4.clone(), z4, IntMatrix::from_rows(&[vec![2]])).unwrap();
        assert_eq!(f.kernel().group, g("Z2"));
        assert_eq!(f.image().group, g("Z2"));
        assert_eq!(f.cokernel().group, g("Z2"));
    }

    #[test]
    fn zero_map() {
        let a = Presentation::of_group(&g("Z2^2+Z3"));
        let b = Presentation::of_group(&g("Z3"));
        let f = Homomorphism::zero(a, b);
        assert_eq!(f.kernel().group, g("Z2^2+Z3"));
        assert_eq!(f.cokernel().group, g("Z3"));
        assert!(f.image().group.is_trivial());
    }

    #[test]
    fn surjection_killing_a_z2_and_z3() {
        // Z2 + Z2 + Z3 -> Z2, (a, b, c) -> a
        let a = Presentation::of_group(&g("Z2^2+Z3"));
        let b = Presentation::of_group(&g("Z2"));
        let f = Homomorphism::new(a, b, IntMatrix::from_rows(&[vec![1, 0, 0]])).unwrap();
        assert_eq!(f.kernel().group, g("Z2+Z3"));
        assert!(f.is_surjective());
    }

    #[test]
    fn ill_defined_rejected() {
        let z2 = Presentation::cyclic_sum(&[2]);
        let z3 = Presentation::cyclic_sum(&[3]);
        let err = Homomorphism::new(z2, z3, IntMatrix::from_rows(&[vec![1]])).unwrap_err();
        assert_eq!(err, AlgebraError::IllDefined { relation: 0 });
    }

    #[test]
    fn localize_triple_on_z6() {
        let z6 = Presentation::cyclic_sum(&[6]);
        let f = Homomorphism::new(z6.clone(), z6, IntMatrix::from_rows(&[vec![3]])).unwrap();
        let l = localize_hom(&f, 2).unwrap();
        assert_eq!(l.domain().canonical_form(), g("Z2"));
        assert!(l.is_injective() && l.is_surjective());
        let l3 = localize_hom(&f, 3).unwrap();
        assert_eq!(l3.kernel().group, g("Z3"));
        assert!(localize_hom(&f, 6).is_err());
    }

    #[test]
    fn canonical_isomorphism_is_iso() {
        let p = Presentation::new(2, IntMatrix::from_rows(&[vec![2, 0], vec![4, 6]])).unwrap();
        let (canon, m) = p.canonical_isomorphism();
        let iso = Homomorphism::new(p, canon, m).unwrap();
        assert!(iso.is_injective() && iso.is_surjective());
    }

    #[test]
    fn subgroup_equality() {
        let z4z2 = Presentation::of_group(&g("Z2+Z4"));
        // generators are (e_Z2, e_Z4)
        let a = IntMatrix::from_rows(&[vec![1], vec![2]]);
        let b = IntMatrix::from_rows(&[vec![1], vec![6]]);
        let c = IntMatrix::from_rows(&[vec![0], vec![2]]);
        assert!(z4z2.same_subgroup(&a, &b));
        assert!(!z4z2.same_subgroup(&a, &c));
        assert_eq!(z4z2.subgroup(&a).unwrap().group, g("Z2"));
    }
}
