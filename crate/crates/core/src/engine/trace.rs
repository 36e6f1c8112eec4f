use std::fmt;

/// Citation tags for derivation rules that are theorems about connected sums
/// rather than knowledge-base facts.
pub mod tags {
    /// `0 -> Θ_n / I_c(M) -> C(M) -> ker(ξ*) -> 0` from the cofiber sequence of the top cell.
    pub const COFIBER_SES: &str = "theorem:cofiber-short-exact-sequence";
    /// `ξ* = Σ h_i*` for the attaching map of a connected sum.
    pub const ATTACHING_SUM: &str = "theorem:attaching-map-of-connected-sum";
    /// `ker(Σ h*) ≅ ⊕_{k-1} S ⊕ ker h*` for `k` copies of one block.
    pub const KFOLD_SPLITTING: &str = "theorem:k-fold-kernel-splitting";
    /// `I_c(#M_i) = Σ I_c(M_i)`.
    pub const INERTIA_SUM: &str = "theorem:inertia-sum-formula";
    /// `C(M_1) -> C(M_1 # M_2)` is injective iff `I_c(M_1 # M_2) = I_c(M_1)`.
    pub const COLLAPSE_INJECTIVE: &str = "theorem:collapse-map-injectivity";
    /// `I_h = I_c` for simply connected manifolds with vanishing odd cohomology.
    pub const HOMOTOPY_INERTIA: &str = "theorem:homotopy-inertia-sum";
    /// `C(M # A) ≅ C(M)` for `(n-1)`-connected `2n`-manifolds `A`, `3 <= n <= 6`.
    pub const HIGHLY_CONNECTED: &str = "theorem:highly-connected-summand";
    /// Spheres are units for the connected sum and have trivial skeleton data.
    pub const SPHERE_UNIT: &str = "convention:sphere-summand";
    /// Middle groups enumerated by the sublattice oracle.
    pub const EXTENSIONS: &str = "algebra:extension-enumeration";

    pub const ALL: [&str; 9] = [
        COFIBER_SES,
        ATTACHING_SUM,
        KFOLD_SPLITTING,
        INERTIA_SUM,
        COLLAPSE_INJECTIVE,
        HOMOTOPY_INERTIA,
        HIGHLY_CONNECTED,
        SPHERE_UNIT,
        EXTENSIONS,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub cite: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.output)?;
        if !self.inputs.is_empty() {
            write!(f, " [from {}]", self.inputs.join("; "))?;
        }
        write!(f, " ({})", self.cite)
    }
}

/// The ordered rule applications behind an answer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivationTrace {
    steps: Vec<TraceStep>,
}

impl DerivationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rule: &str, inputs: Vec<String>, output: impl Into<String>, cite: &str) {
        self.steps.push(TraceStep {
            rule: rule.to_string(),
            inputs,
            output: output.into(),
            cite: cite.to_string(),
        });
    }

    pub fn extend(&mut self, other: DerivationTrace) {
        self.steps.extend(other.steps);
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
