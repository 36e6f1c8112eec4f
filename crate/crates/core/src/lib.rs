//! Concordance structure sets of connected sums of projective spaces,
//! computed from exact sequences of finitely generated abelian groups.

pub mod abelian;
pub mod engine;
pub mod extension;
pub mod knowledge;
