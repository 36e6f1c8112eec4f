//! Exact integer linear algebra and finitely generated abelian groups.
//!
//! Groups are presented as `Z^n / span(relations)`; canonical forms come from
//! the Smith normal form and are stored as primary decompositions.

mod group;
mod lattice;
mod matrix;
mod presentation;

pub use group::{are_isomorphic, direct_sum, factorize, is_prime, localize, FgAbGroup, PrimePower};
pub use lattice::Lattice;
pub use matrix::{integer_kernel_basis, smith_normal_form, IntMatrix, SmithDecomposition};
pub use presentation::{localize_hom, p_valuation, Homomorphism, Presentation, Subquotient};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(
        "homomorphism is not well defined: relation {relation} of the domain is not sent to zero"
    )]
    IllDefined { relation: usize },
    #[error("localization of a homomorphism requires finite domain and codomain")]
    InfiniteLocalization,
    #[error("cannot parse group: {0}")]
    Parse(String),
}
