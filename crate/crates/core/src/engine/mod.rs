//! Derivation rules for concordance structure sets and inertia groups of
//! connected sums, applied to the facts of a [`KnowledgeBase`].

mod expr;
mod kernel;
mod trace;

use std::collections::BTreeSet;

pub use expr::{ManifoldExpr, MIN_DIMENSION};
pub use kernel::{
    k_fold_sum, kernel_of_sum_splitting, surjections, KernelOutcome, SplittingIso,
    REPRESENTATIVE_BOUND,
};
pub use trace::{tags, DerivationTrace, TraceStep};

use crate::abelian::{AlgebraError, FgAbGroup, IntMatrix, Presentation};
use crate::extension::{
    apply_constraints, enumerate_extensions, CandidateSet, Constraint, ExtensionError, OracleConfig,
};
use crate::knowledge::{BlockId, FactKind, FactValue, KnowledgeBase, KnowledgeError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("empty expression")]
    EmptyExpression,
    #[error("multiplicity of {0} must be positive")]
    ZeroMultiplicity(BlockId),
    #[error("dimension mismatch: {}", format_dims(.blocks))]
    DimensionMismatch { blocks: Vec<(BlockId, u32)> },
    #[error("dimension {0} is below {MIN_DIMENSION}")]
    DimensionTooSmall(u32),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("hypothesis not satisfied for {block}: {condition}")]
    Hypothesis { block: BlockId, condition: String },
    #[error("representative-dependent attaching map for {block}: {message}")]
    Independence { block: BlockId, message: String },
    #[error("too large to enumerate: {0}")]
    TooLarge(String),
    #[error("resolution hint for {block}: {message}")]
    Template { block: BlockId, message: String },
    #[error("derivation routes disagree: {0}")]
    Inconsistent(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

fn format_dims(blocks: &[(BlockId, u32)]) -> String {
    let parts: Vec<String> = blocks
        .iter()
        .map(|(b, d)| format!("{b} (dim {d})"))
        .collect();
    parts.join(", ")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineConfig {
    pub oracle: OracleConfig,
}

/// A value together with the derivation that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation<T> {
    pub value: T,
    pub trace: DerivationTrace,
}

/// An inertia group as an explicit subgroup of `Θ_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InertiaGroup {
    pub group: FgAbGroup,
    /// Generators in the canonical presentation of `Θ_n`; `None` for the
    /// trivial subgroup of an unhoused `Θ_n`.
    generators: Option<(Presentation, IntMatrix)>,
}

impl InertiaGroup {
    fn trivial() -> Self {
        InertiaGroup {
            group: FgAbGroup::trivial(),
            generators: None,
        }
    }

    /// The subgroup generated by both.
    pub fn join(&self, other: &InertiaGroup) -> Result<InertiaGroup, AlgebraError> {
        match (&self.generators, &other.generators) {
            (Some((p, a)), Some((_, b))) => {
                let gens = a.hstack(b);
                Ok(InertiaGroup {
                    group: p.subgroup(&gens)?.group,
                    generators: Some((p.clone(), gens)),
                })
            }
            (Some(_), None) => Ok(self.clone()),
            _ => Ok(other.clone()),
        }
    }

    /// Literal equality of subgroups of `Θ_n`.
    pub fn same_subgroup(&self, other: &InertiaGroup) -> bool {
        match (&self.generators, &other.generators) {
            (Some((p, a)), Some((_, b))) => p.same_subgroup(a, b),
            _ => self.group.is_trivial() && other.group.is_trivial(),
        }
    }
}

/// `0 -> left -> C(M) -> right -> 0` with the possible middle groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SesDescription {
    /// `Θ_n / I_c(M)`.
    pub left: FgAbGroup,
    /// `ker(ξ*)`.
    pub right: FgAbGroup,
    pub middle: CandidateSet,
}

/// One sequence per possible `ker(ξ*)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SesOutcome {
    pub scenarios: Vec<SesDescription>,
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcordanceAnswer {
    /// Possible classes of `C(M)`, by order and then canonical form.
    pub candidates: Vec<FgAbGroup>,
    /// The exact sequences behind the candidates (empty when the answer is a stored fact).
    pub scenarios: Vec<SesDescription>,
    /// Facts whose absence leaves the answer open.
    pub missing: Vec<String>,
}

impl ConcordanceAnswer {
    pub fn resolved(&self) -> bool {
        self.candidates.len() == 1
    }

    pub fn unique(&self) -> Option<&FgAbGroup> {
        if self.resolved() {
            self.candidates.first()
        } else {
            None
        }
    }
}

pub struct Engine {
    kb: KnowledgeBase,
    config: EngineConfig,
}

/// Dimensions `2n`, `3 <= n <= 6`, where highly connected summands drop out.
pub const SIMPLIFICATION_DIMENSIONS: [u32; 4] = [6, 8, 10, 12];

impl Engine {
    pub fn new(kb: KnowledgeBase) -> Self {
        Self::with_config(kb, EngineConfig::default())
    }

    pub fn with_config(kb: KnowledgeBase, config: EngineConfig) -> Self {
        Engine { kb, config }
    }

    pub fn knowledge(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn normalize(&self, e: &ManifoldExpr, trace: &mut DerivationTrace) -> ManifoldExpr {
        let n = e.without_spheres();
        if &n != e {
            trace.push(
                "sphere_summands",
                vec![e.to_string()],
                format!("{e} = {n}"),
                tags::SPHERE_UNIT,
            );
        }
        n
    }

    pub fn inertia_group(&self, e: &ManifoldExpr) -> Result<Derivation<InertiaGroup>, EngineError> {
        let mut trace = DerivationTrace::new();
        let value = self.inertia_inner(e, &mut trace)?;
        Ok(Derivation { value, trace })
    }

    fn inertia_inner(
        &self,
        e: &ManifoldExpr,
        trace: &mut DerivationTrace,
    ) -> Result<InertiaGroup, EngineError> {
        let e = self.normalize(e, trace);
        let n = e.dimension();
        let mut parts: Vec<IntMatrix> = Vec::new();
        let mut inputs = Vec::new();
        for &(block, _) in e.summands() {
            if block.is_sphere() {
                trace.push(
                    "inertia_c",
                    vec![block.to_string()],
                    format!("I_c({block}) = 0"),
                    tags::SPHERE_UNIT,
                );
                continue;
            }
            let fact = self.kb.block_fact(FactKind::InertiaC, block)?;
            let FactValue::Inertia(spec) = &fact.value else {
                unreachable!("kind checked on load")
            };
            let gens = self.kb.inertia_subgroup(block, spec).map_err(|message| {
                KnowledgeError::Consistency {
                    key: fact.key,
                    message,
                }
            })?;
            trace.push(
                "inertia_c",
                vec![block.to_string()],
                format!("I_c({block}) = {}", fact.value),
                &fact.cite,
            );
            inputs.push(format!("I_c({block})"));
            parts.extend(gens);
        }
        let nonzero: Vec<&IntMatrix> = parts.iter().filter(|m| m.cols() > 0).collect();
        let value = if nonzero.is_empty() {
            match parts.first() {
                Some(m) => {
                    let theta = self.kb.theta_group(n)?;
                    InertiaGroup {
                        group: FgAbGroup::trivial(),
                        generators: Some((Presentation::of_group(theta), m.clone())),
                    }
                }
                None => InertiaGroup::trivial(),
            }
        } else {
            let theta = Presentation::of_group(self.kb.theta_group(n)?);
            let gens = nonzero[1..]
                .iter()
                .fold(nonzero[0].clone(), |acc, m| acc.hstack(m));
            let group = theta.subgroup(&gens)?.group;
            InertiaGroup {
                group,
                generators: Some((theta, gens)),
            }
        };
        trace.push(
            "inertia_sum",
            inputs,
            format!("I_c({e}) = {} (independent of multiplicities)", value.group),
            tags::INERTIA_SUM,
        );
        Ok(value)
    }

    pub fn homotopy_inertia_group(
        &self,
        e: &ManifoldExpr,
    ) -> Result<Derivation<InertiaGroup>, EngineError> {
        let mut trace = DerivationTrace::new();
        let e = self.normalize(e, &mut trace);
        for &(block, _) in e.summands() {
            if block.is_sphere() {
                if block.dimension() % 2 == 1 {
                    return Err(EngineError::Hypothesis {
                        block,
                        condition: "odd degree cohomology does not vanish".into(),
                    });
                }
                continue;
            }
            for (kind, what) in [
                (FactKind::SimplyConnected, "simply connected"),
                (
                    FactKind::OddCohomologyVanishes,
                    "odd degree cohomology vanishes",
                ),
            ] {
                match self.kb.flag(kind, block) {
                    Ok((true, cite)) => trace.push(
                        kind.name(),
                        vec![block.to_string()],
                        format!("{block}: {what}"),
                        cite,
                    ),
                    Ok((false, _)) => {
                        return Err(EngineError::Hypothesis {
                            block,
                            condition: format!("not {what}"),
                        })
                    }
                    Err(KnowledgeError::Insufficient { .. }) => {
                        return Err(EngineError::Hypothesis {
                            block,
                            condition: format!("no {kind} fact"),
                        })
                    }
                    Err(other) => return Err(other.into()),
                }
            }
        }
        let value = self.inertia_inner(&e, &mut trace)?;
        trace.push(
            "homotopy_inertia",
            vec![format!("I_c({e})")],
            format!("I_h({e}) = I_c({e}) = {}", value.group),
            tags::HOMOTOPY_INERTIA,
        );
        Ok(Derivation { value, trace })
    }

    pub fn kernel_of_attaching_sum(
        &self,
        e: &ManifoldExpr,
    ) -> Result<Derivation<KernelOutcome>, EngineError> {
        let mut trace = DerivationTrace::new();
        let value = kernel::kernel_of_attaching_sum(&self.kb, e, &mut trace)?;
        Ok(Derivation { value, trace })
    }

    pub fn structure_ses(&self, e: &ManifoldExpr) -> Result<Derivation<SesOutcome>, EngineError> {
        let mut trace = DerivationTrace::new();
        let value = self.ses_inner(e, &mut trace)?;
        Ok(Derivation { value, trace })
    }

    fn ses_inner(
        &self,
        e: &ManifoldExpr,
        trace: &mut DerivationTrace,
    ) -> Result<SesOutcome, EngineError> {
        let e = self.normalize(e, trace);
        let n = e.dimension();
        let theta = self.kb.theta(n)?;
        trace.push(
            "theta",
            vec![],
            format!("Theta_{n} = {}", theta.group()),
            &theta.cite,
        );
        let inertia = self.inertia_inner(&e, trace)?;
        let left = match &inertia.generators {
            _ if inertia.group.is_trivial() => {
                trace.push(
                    "degree_one_injective",
                    vec![format!("I_c({e}) = 0")],
                    format!("d*: Theta_{n} -> C({e}) is injective"),
                    tags::COFIBER_SES,
                );
                theta.group().clone()
            }
            Some((p, gens)) => {
                let q = Presentation::new(p.generator_count(), p.relations().hstack(gens))?;
                q.canonical_form()
            }
            None => unreachable!("nontrivial inertia has generators"),
        };
        let kernel = kernel::kernel_of_attaching_sum(&self.kb, &e, trace)?;
        let mut scenarios = Vec::new();
        for right in kernel.candidates() {
            let middle = enumerate_extensions(&left, &right, &self.config.oracle)?;
            trace.push(
                "short_exact_sequence",
                vec![format!("left {left}"), format!("right {right}")],
                format!("0 -> {left} -> C({e}) -> {right} -> 0"),
                tags::COFIBER_SES,
            );
            trace.push(
                "extension_candidates",
                vec![format!("0 -> {left} -> G -> {right} -> 0")],
                format!("G in {}", join(middle.candidates())),
                tags::EXTENSIONS,
            );
            scenarios.push(SesDescription {
                left: left.clone(),
                right,
                middle,
            });
        }
        Ok(SesOutcome {
            scenarios,
            missing: kernel.missing().to_vec(),
        })
    }

    pub fn concordance_set(
        &self,
        e: &ManifoldExpr,
    ) -> Result<Derivation<ConcordanceAnswer>, EngineError> {
        let mut trace = DerivationTrace::new();
        let value = self.concordance_inner(e, &mut trace)?;
        Ok(Derivation { value, trace })
    }

    fn concordance_inner(
        &self,
        e: &ManifoldExpr,
        trace: &mut DerivationTrace,
    ) -> Result<ConcordanceAnswer, EngineError> {
        let mut simplify_trace = DerivationTrace::new();
        let simplified = self.simplify_inner(e, &mut simplify_trace);
        if &simplified == e {
            return self.direct_concordance(e, trace);
        }
        trace.extend(simplify_trace);
        let via = self.concordance_inner(&simplified, trace)?;
        let mut direct_trace = DerivationTrace::new();
        match self.direct_concordance(e, &mut direct_trace) {
            Ok(direct) => {
                trace.extend(direct_trace);
                let keep: BTreeSet<&FgAbGroup> = direct.candidates.iter().collect();
                let both: Vec<FgAbGroup> = via
                    .candidates
                    .iter()
                    .filter(|g| keep.contains(g))
                    .cloned()
                    .collect();
                if both.is_empty() {
                    return Err(EngineError::Inconsistent(format!(
                        "C({e}) in {} directly but C({simplified}) in {}",
                        join(&direct.candidates),
                        join(&via.candidates)
                    )));
                }
                trace.push(
                    "combine_routes",
                    vec![e.to_string(), simplified.to_string()],
                    format!("C({e}) in {}", join(&both)),
                    tags::HIGHLY_CONNECTED,
                );
                let missing = if both.len() > 1 {
                    union(&direct.missing, &via.missing)
                } else {
                    vec![]
                };
                Ok(ConcordanceAnswer {
                    candidates: both,
                    scenarios: direct.scenarios,
                    missing,
                })
            }
            Err(EngineError::Knowledge(KnowledgeError::Insufficient { key })) => {
                trace.push(
                    "combine_routes",
                    vec![e.to_string(), simplified.to_string()],
                    format!("direct route lacks {key}; C({e}) = C({simplified})"),
                    tags::HIGHLY_CONNECTED,
                );
                Ok(via)
            }
            Err(other) => Err(other),
        }
    }

    fn direct_concordance(
        &self,
        e: &ManifoldExpr,
        trace: &mut DerivationTrace,
    ) -> Result<ConcordanceAnswer, EngineError> {
        let normal = e.without_spheres();
        let known = match normal.as_homogeneous() {
            Some((b, 1)) => self.kb.block_fact(FactKind::ConcordanceSet, b).ok(),
            _ => None,
        };
        let mut ses_trace = DerivationTrace::new();
        let ses = match self.ses_inner(e, &mut ses_trace) {
            Ok(ses) => ses,
            Err(EngineError::Knowledge(KnowledgeError::Insufficient { key }))
                if known.is_some() =>
            {
                let fact = known.expect("checked");
                trace.push(
                    "known_concordance_set",
                    vec![format!("exact sequence unavailable: no fact {key}")],
                    format!("C({normal}) = {}", fact.group()),
                    &fact.cite,
                );
                return Ok(ConcordanceAnswer {
                    candidates: vec![fact.group().clone()],
                    scenarios: vec![],
                    missing: vec![],
                });
            }
            Err(other) => return Err(other),
        };
        trace.extend(ses_trace);

        let mut constraints: Vec<(Constraint, String)> = Vec::new();
        if let Some((block, k)) = normal.as_homogeneous() {
            if let Some((hints, cite)) = self.kb.hints(block) {
                for h in hints {
                    let c = h
                        .instantiate(k)
                        .map_err(|message| EngineError::Template { block, message })?;
                    constraints.push((c, cite.to_string()));
                }
            }
        }
        if let Some(fact) = known {
            constraints.push((
                Constraint::SubgroupOf {
                    group: fact.group().clone(),
                    prime: None,
                },
                fact.cite.clone(),
            ));
        }

        let mut scenarios = Vec::new();
        let mut last_err = None;
        let count = ses.scenarios.len();
        for s in ses.scenarios {
            match self.constrain(&s.middle, &constraints, trace) {
                Ok(middle) => scenarios.push(SesDescription { middle, ..s }),
                Err(EngineError::Extension(err @ ExtensionError::Contradiction { .. }))
                    if count > 1 =>
                {
                    trace.push(
                        "scenario_eliminated",
                        vec![format!("right {}", s.right)],
                        format!("no middle group: {err}"),
                        tags::EXTENSIONS,
                    );
                    last_err = Some(err);
                }
                Err(other) => return Err(other),
            }
        }
        if scenarios.is_empty() {
            return Err(last_err.expect("some scenario was eliminated").into());
        }
        let all: BTreeSet<FgAbGroup> = scenarios
            .iter()
            .flat_map(|s| s.middle.candidates().iter().cloned())
            .collect();
        let mut candidates: Vec<FgAbGroup> = all.into_iter().collect();
        candidates.sort_by_key(|g| (g.order(), g.clone()));
        let mut missing = ses.missing;
        if candidates.len() > 1 && missing.is_empty() {
            missing.push(format!(
                "extension data for {normal}: no fact determines the middle group"
            ));
        }
        if candidates.len() == 1 {
            missing.clear();
            trace.push(
                "concordance_set",
                vec![],
                format!("C({normal}) = {}", candidates[0]),
                tags::EXTENSIONS,
            );
        } else {
            trace.push(
                "concordance_set",
                missing.clone(),
                format!(
                    "C({normal}) in {}: extension not determined",
                    join(&candidates)
                ),
                tags::EXTENSIONS,
            );
        }
        Ok(ConcordanceAnswer {
            candidates,
            scenarios,
            missing,
        })
    }

    fn constrain(
        &self,
        cs: &CandidateSet,
        constraints: &[(Constraint, String)],
        trace: &mut DerivationTrace,
    ) -> Result<CandidateSet, EngineError> {
        if constraints.is_empty() {
            return Ok(cs.clone());
        }
        let only: Vec<Constraint> = constraints.iter().map(|(c, _)| c.clone()).collect();
        let out = apply_constraints(cs, &only, &self.config.oracle)?;
        for (c, cite) in constraints {
            let single = apply_constraints(cs, std::slice::from_ref(c), &self.config.oracle);
            let shown = match single {
                Ok(s) => join(s.candidates()),
                Err(_) => "{}".to_string(),
            };
            trace.push(
                "constraint",
                vec![format!("G in {}", join(cs.candidates()))],
                format!("{c}: keeps {shown}"),
                cite,
            );
        }
        Ok(out)
    }

    pub fn collapse_map_injective(
        &self,
        m1: &ManifoldExpr,
        m2: &ManifoldExpr,
    ) -> Result<Derivation<bool>, EngineError> {
        let sum = m1.connected_sum(m2)?;
        let mut trace = DerivationTrace::new();
        let a = self.inertia_inner(m1, &mut trace)?;
        let b = self.inertia_inner(&sum, &mut trace)?;
        let value = a.same_subgroup(&b);
        trace.push(
            "collapse_map",
            vec![
                format!("I_c({m1}) = {}", a.group),
                format!("I_c({sum}) = {}", b.group),
            ],
            format!(
                "C({m1}) -> C({sum}) is {}",
                if value { "injective" } else { "not injective" }
            ),
            tags::COLLAPSE_INJECTIVE,
        );
        Ok(Derivation { value, trace })
    }

    pub fn simplify_summands(&self, e: &ManifoldExpr) -> Derivation<ManifoldExpr> {
        let mut trace = DerivationTrace::new();
        let value = self.simplify_inner(e, &mut trace);
        Derivation { value, trace }
    }

    fn simplify_inner(&self, e: &ManifoldExpr, trace: &mut DerivationTrace) -> ManifoldExpr {
        if !SIMPLIFICATION_DIMENSIONS.contains(&e.dimension()) {
            return e.clone();
        }
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        for &(block, k) in e.summands() {
            match self.kb.flag(FactKind::HighlyConnected, block) {
                Ok((true, cite)) => removed.push((block, k, cite)),
                _ => kept.push((block, k)),
            }
        }
        if removed.is_empty() || (kept.is_empty() && removed.len() == 1 && removed[0].1 == 1) {
            return e.clone();
        }
        if kept.is_empty() {
            let (block, _, _) = removed.remove(0);
            kept.push((block, 1));
        }
        let out = ManifoldExpr::new(kept).expect("subset of a valid expression");
        for (block, k, cite) in removed {
            trace.push(
                "highly_connected_summand",
                vec![format!("{k}*{block}")],
                format!(
                    "{block} is {}-connected of dimension {}",
                    e.dimension() / 2 - 1,
                    e.dimension()
                ),
                cite,
            );
        }
        trace.push(
            "remove_highly_connected",
            vec![e.to_string()],
            format!("C({e}) = C({out})"),
            tags::HIGHLY_CONNECTED,
        );
        out
    }
}

fn join(gs: &[FgAbGroup]) -> String {
    let v: Vec<String> = gs.iter().map(|g| g.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn union(a: &[String], b: &[String]) -> Vec<String> {
    let s: BTreeSet<&String> = a.iter().chain(b).collect();
    s.into_iter().cloned().collect()
}
