//! Citable topological input facts: groups of homotopy spheres, concordance
//! sets of building blocks, induced maps of attaching maps and inertia data.

mod block;
mod document;
mod value;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use block::{BlockError, BlockId, Family};
pub use document::{load, serialize};
pub use value::{FactValue, GroupTemplate, HintTemplate, InertiaSpec, Linear, MapSpec};

use crate::abelian::is_prime;
use crate::abelian::{FgAbGroup, Homomorphism, IntMatrix, Presentation};
use crate::extension::{kernels_with_quotient, subgroup_quotient_feasible, OracleConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactKind {
    Theta,
    ConcordanceSet,
    InertiaC,
    InertiaH,
    SkeletonSet,
    AttachingMap,
    HighlyConnected,
    OddCohomologyVanishes,
    SimplyConnected,
    ResolutionHint,
    ImageOverlap,
}

impl FactKind {
    pub const ALL: [FactKind; 11] = [
        FactKind::Theta,
        FactKind::ConcordanceSet,
        FactKind::InertiaC,
        FactKind::InertiaH,
        FactKind::SkeletonSet,
        FactKind::AttachingMap,
        FactKind::HighlyConnected,
        FactKind::OddCohomologyVanishes,
        FactKind::SimplyConnected,
        FactKind::ResolutionHint,
        FactKind::ImageOverlap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FactKind::Theta => "theta",
            FactKind::ConcordanceSet => "concordance_set",
            FactKind::InertiaC => "inertia_c",
            FactKind::InertiaH => "inertia_h",
            FactKind::SkeletonSet => "skeleton_set",
            FactKind::AttachingMap => "attaching_map",
            FactKind::HighlyConnected => "highly_connected",
            FactKind::OddCohomologyVanishes => "odd_cohomology_vanishes",
            FactKind::SimplyConnected => "simply_connected",
            FactKind::ResolutionHint => "resolution_hint",
            FactKind::ImageOverlap => "image_overlap",
        }
    }

    fn is_flag(self) -> bool {
        matches!(
            self,
            FactKind::HighlyConnected | FactKind::OddCohomologyVanishes | FactKind::SimplyConnected
        )
    }

    fn parse_value(self, s: &str) -> Result<FactValue, String> {
        match self {
            FactKind::Theta | FactKind::ConcordanceSet | FactKind::SkeletonSet => {
                value::parse_group(s).map(FactValue::Group)
            }
            FactKind::InertiaC | FactKind::InertiaH => {
                value::parse_inertia(s).map(FactValue::Inertia)
            }
            FactKind::AttachingMap => value::parse_map(s).map(FactValue::Map),
            FactKind::ResolutionHint => value::parse_hints(s).map(FactValue::Hints),
            FactKind::ImageOverlap => value::parse_overlap(s).map(FactValue::Overlap),
            _ => value::parse_flag(s).map(FactValue::Flag),
        }
    }

    fn accepts(self, v: &FactValue) -> bool {
        match v {
            FactValue::Group(_) => matches!(
                self,
                FactKind::Theta | FactKind::ConcordanceSet | FactKind::SkeletonSet
            ),
            FactValue::Inertia(_) => matches!(self, FactKind::InertiaC | FactKind::InertiaH),
            FactValue::Map(_) => self == FactKind::AttachingMap,
            FactValue::Hints(_) => self == FactKind::ResolutionHint,
            FactValue::Overlap(_) => self == FactKind::ImageOverlap,
            FactValue::Flag(_) => self.is_flag(),
        }
    }
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FactKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FactKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown fact kind `{s}`"))
    }
}

/// What a fact is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Dimension(u32),
    Block(BlockId),
    /// An unordered pair, stored sorted.
    Pair(BlockId, BlockId),
}

impl Subject {
    pub fn pair(a: BlockId, b: BlockId) -> Self {
        if a <= b {
            Subject::Pair(a, b)
        } else {
            Subject::Pair(b, a)
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Dimension(n) => write!(f, "{n}"),
            Subject::Block(b) => write!(f, "{b}"),
            Subject::Pair(a, b) => write!(f, "{a},{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactKey {
    pub kind: FactKind,
    pub subject: Subject,
}

impl FactKey {
    pub fn new(kind: FactKind, subject: Subject) -> Self {
        FactKey { kind, subject }
    }

    pub fn parse(kind: FactKind, key: &str) -> Result<Self, String> {
        let key = key.trim();
        let block = |s: &str| s.parse::<BlockId>().map_err(|e| e.to_string());
        let subject = match kind {
            FactKind::Theta => {
                let n: u32 = key
                    .parse()
                    .map_err(|_| format!("theta key must be a dimension, got `{key}`"))?;
                Subject::Dimension(n)
            }
            FactKind::ImageOverlap => {
                let (a, b) = key
                    .split_once(',')
                    .ok_or_else(|| format!("image_overlap key must be `A,B`, got `{key}`"))?;
                Subject::pair(block(a)?, block(b)?)
            }
            _ => Subject::Block(block(key)?),
        };
        Ok(FactKey { kind, subject })
    }
}

impl fmt::Display for FactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.subject)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KbFact {
    pub key: FactKey,
    pub value: FactValue,
    pub cite: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnowledgeError {
    #[error("malformed document: {0}")]
    Document(String),
    #[error("schema error in fact #{index}: {message}")]
    Schema { index: usize, message: String },
    #[error("duplicate fact {key}")]
    Duplicate { key: FactKey },
    #[error("inconsistent fact {key}: {message}")]
    Consistency { key: FactKey, message: String },
    #[error("insufficient knowledge: no fact {key}")]
    Insufficient { key: FactKey },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    version: String,
    facts: BTreeMap<FactKey, KbFact>,
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds and validates a knowledge base.
    pub fn from_facts(
        version: impl Into<String>,
        facts: Vec<KbFact>,
    ) -> Result<Self, KnowledgeError> {
        let mut map = BTreeMap::new();
        for (i, fact) in facts.into_iter().enumerate() {
            if fact.cite.trim().is_empty() {
                return Err(KnowledgeError::Schema {
                    index: i + 1,
                    message: format!("{}: empty citation", fact.key),
                });
            }
            if !fact.key.kind.accepts(&fact.value) {
                return Err(KnowledgeError::Schema {
                    index: i + 1,
                    message: format!(
                        "{}: value `{}` does not fit this kind",
                        fact.key, fact.value
                    ),
                });
            }
            if map.contains_key(&fact.key) {
                return Err(KnowledgeError::Duplicate { key: fact.key });
            }
            map.insert(fact.key, fact);
        }
        let kb = KnowledgeBase {
            version: version.into(),
            facts: map,
        };
        kb.validate()?;
        Ok(kb)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Facts in key order.
    pub fn facts(&self) -> impl Iterator<Item = &KbFact> {
        self.facts.values()
    }

    pub fn lookup(&self, kind: FactKind, subject: Subject) -> Result<&KbFact, KnowledgeError> {
        let key = FactKey::new(kind, subject);
        self.facts
            .get(&key)
            .ok_or(KnowledgeError::Insufficient { key })
    }

    fn get(&self, kind: FactKind, subject: Subject) -> Option<&KbFact> {
        self.facts.get(&FactKey::new(kind, subject))
    }

    pub fn theta(&self, n: u32) -> Result<&KbFact, KnowledgeError> {
        self.lookup(FactKind::Theta, Subject::Dimension(n))
    }

    pub fn theta_group(&self, n: u32) -> Result<&FgAbGroup, KnowledgeError> {
        self.theta(n).map(|f| f.group())
    }

    pub fn block_fact(&self, kind: FactKind, block: BlockId) -> Result<&KbFact, KnowledgeError> {
        self.lookup(kind, Subject::Block(block))
    }

    /// A boolean flag; missing flags are `Insufficient`.
    pub fn flag(&self, kind: FactKind, block: BlockId) -> Result<(bool, &str), KnowledgeError> {
        let f = self.block_fact(kind, block)?;
        match f.value {
            FactValue::Flag(b) => Ok((b, &f.cite)),
            _ => unreachable!("kind checked on construction"),
        }
    }

    /// Resolution hints for homogeneous sums of `block`, if any.
    pub fn hints(&self, block: BlockId) -> Option<(&[HintTemplate], &str)> {
        self.get(FactKind::ResolutionHint, Subject::Block(block))
            .map(|f| match &f.value {
                FactValue::Hints(hs) => (hs.as_slice(), f.cite.as_str()),
                _ => unreachable!("kind checked on construction"),
            })
    }

    fn validate(&self) -> Result<(), KnowledgeError> {
        let cfg = OracleConfig::default();
        for fact in self.facts.values() {
            let err = |message: String| KnowledgeError::Consistency {
                key: fact.key,
                message,
            };
            match (&fact.key.subject, &fact.value) {
                (Subject::Block(b), FactValue::Map(spec)) => {
                    self.validate_map(*b, spec, &cfg).map_err(err)?
                }
                (Subject::Block(b), FactValue::Inertia(spec)) => {
                    self.inertia_subgroup(*b, spec).map(|_| ()).map_err(err)?
                }
                (Subject::Block(b), FactValue::Group(g))
                    if fact.key.kind == FactKind::SkeletonSet =>
                {
                    if let Some(pred) = b.predecessor() {
                        if let Some(c) = self.get(FactKind::ConcordanceSet, Subject::Block(pred)) {
                            if c.group() != g {
                                return Err(err(format!(
                                    "skeleton set {} disagrees with concordance set {} of {pred}",
                                    g.to_compact(),
                                    c.group().to_compact()
                                )));
                            }
                        }
                    }
                }
                (_, FactValue::Hints(hs)) => {
                    for h in hs {
                        validate_hint(h).map_err(err)?;
                    }
                }
                (Subject::Pair(a, b), FactValue::Overlap(Some(d))) => {
                    for x in [a, b] {
                        if let Some(image) = self.image_class(*x) {
                            if !embeds(d, &image) {
                                return Err(err(format!(
                                    "overlap {} does not embed in the image {} of {x}",
                                    d.to_compact(),
                                    image.to_compact()
                                )));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn validate_map(
        &self,
        block: BlockId,
        spec: &MapSpec,
        cfg: &OracleConfig,
    ) -> Result<(), String> {
        let domain = self
            .get(FactKind::SkeletonSet, Subject::Block(block))
            .map(|f| f.group().clone())
            .ok_or_else(|| format!("no skeleton_set {block} to serve as domain"))?;
        let target_dim = block.dimension() - 1;
        let target = self
            .get(FactKind::Theta, Subject::Dimension(target_dim))
            .map(|f| f.group().clone());
        let need_target = || {
            target
                .clone()
                .ok_or_else(|| format!("theta {target_dim} is not housed"))
        };
        let check_image = |image: &FgAbGroup| -> Result<(), String> {
            match &target {
                Some(t) if !embeds(image, t) => Err(format!(
                    "image {} does not embed in theta {target_dim} = {}",
                    image.to_compact(),
                    t.to_compact()
                )),
                _ => Ok(()),
            }
        };
        match spec {
            MapSpec::Trivial => Ok(()),
            MapSpec::Matrix(m) => {
                let t = need_target()?;
                Homomorphism::new(
                    Presentation::of_group(&domain),
                    Presentation::of_group(&t),
                    m.clone(),
                )
                .map(|_| ())
                .map_err(|e| e.to_string())
            }
            MapSpec::Mono => check_image(&domain),
            MapSpec::Epi { kernel } => {
                let t = need_target()?;
                match kernel {
                    Some(k) => check_qualitative(&domain, &t, k, cfg),
                    None => match kernels_with_quotient(&domain, &t, cfg) {
                        Ok(ks) if ks.is_empty() => Err(format!(
                            "{} admits no surjection onto {}",
                            domain.to_compact(),
                            t.to_compact()
                        )),
                        Ok(_) => Ok(()),
                        Err(e) => Err(e.to_string()),
                    },
                }
            }
            MapSpec::ImageKernel { image, kernel } => {
                check_qualitative(&domain, image, kernel, cfg)?;
                check_image(image)
            }
        }
    }

    /// Isomorphism class of the image of the attaching map of `block`, when
    /// the knowledge base determines it.
    pub fn image_class(&self, block: BlockId) -> Option<FgAbGroup> {
        let f = self.get(FactKind::AttachingMap, Subject::Block(block))?;
        let FactValue::Map(spec) = &f.value else {
            return None;
        };
        let domain = || {
            self.get(FactKind::SkeletonSet, Subject::Block(block))
                .map(|f| f.group().clone())
        };
        let target = || {
            self.get(FactKind::Theta, Subject::Dimension(block.dimension() - 1))
                .map(|f| f.group().clone())
        };
        match spec {
            MapSpec::Trivial => Some(FgAbGroup::trivial()),
            MapSpec::Mono => domain(),
            MapSpec::Epi { .. } => target(),
            MapSpec::ImageKernel { image, .. } => Some(image.clone()),
            MapSpec::Matrix(m) => {
                let h = Homomorphism::new(
                    Presentation::of_group(&domain()?),
                    Presentation::of_group(&target()?),
                    m.clone(),
                )
                .ok()?;
                Some(h.image().group)
            }
        }
    }

    /// Generators of `I_c` (or `I_h`) of `block` inside the canonical
    /// presentation of `Θ_dim`; `Ok(None)` for the trivial subgroup when
    /// `Θ_dim` is not housed.
    pub fn inertia_subgroup(
        &self,
        block: BlockId,
        spec: &InertiaSpec,
    ) -> Result<Option<IntMatrix>, String> {
        let n = block.dimension();
        let theta = self
            .get(FactKind::Theta, Subject::Dimension(n))
            .map(|f| f.group().clone());
        match (spec, theta) {
            (InertiaSpec::Class(g), None) if g.is_trivial() => Ok(None),
            (_, None) => Err(format!("theta {n} is not housed")),
            (InertiaSpec::Class(g), Some(t)) => {
                let gens = Presentation::of_group(&t).generator_count();
                if g.is_trivial() {
                    Ok(Some(IntMatrix::zeros(gens, 0)))
                } else if g == &t {
                    Ok(Some(IntMatrix::identity(gens)))
                } else {
                    Err(format!(
                        "class {} is neither 0 nor theta {n} = {}; give explicit generators",
                        g.to_compact(),
                        t.to_compact()
                    ))
                }
            }
            (InertiaSpec::Generators(m), Some(t)) => {
                let p = Presentation::of_group(&t);
                if m.rows() != p.generator_count() {
                    return Err(format!(
                        "subgroup generators have {} rows, theta {n} has {} generators",
                        m.rows(),
                        p.generator_count()
                    ));
                }
                Ok(Some(m.clone()))
            }
        }
    }
}

impl KbFact {
    /// The group value; panics for facts of other kinds.
    pub fn group(&self) -> &FgAbGroup {
        match &self.value {
            FactValue::Group(g) => g,
            other => panic!("fact {} holds `{other}`, not a group", self.key),
        }
    }
}

fn check_qualitative(
    domain: &FgAbGroup,
    image: &FgAbGroup,
    kernel: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<(), String> {
    if !domain.is_finite() {
        return Ok(());
    }
    let (d, i, k) = (domain.order(), image.order(), kernel.order());
    let (Some(d), Some(i), Some(k)) = (d, i, k) else {
        return Err("image and kernel of a map on a finite group must be finite".into());
    };
    if &i * &k != d {
        return Err(format!(
            "|image| * |kernel| = {i} * {k} != {d} = |{}|",
            domain.to_compact()
        ));
    }
    match subgroup_quotient_feasible(domain, kernel, image, cfg) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!(
            "{} has no subgroup {} with quotient {}",
            domain.to_compact(),
            kernel.to_compact(),
            image.to_compact()
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn validate_hint(h: &HintTemplate) -> Result<(), String> {
    match h {
        HintTemplate::NoElementOfOrder(n) if *n < 2 => {
            Err(format!("no_element_of_order needs n >= 2, got {n}"))
        }
        HintTemplate::LocalSplit(p)
        | HintTemplate::QuotientOf { prime: Some(p), .. }
        | HintTemplate::SubgroupOf { prime: Some(p), .. }
            if !is_prime(*p) =>
        {
            Err(format!("{p} is not prime"))
        }
        _ => Ok(()),
    }
}

/// Whether `h` is isomorphic to a subgroup of `g` (Young diagram containment
/// at every prime, plus free rank).
pub fn embeds(h: &FgAbGroup, g: &FgAbGroup) -> bool {
    if h.free_rank() > g.free_rank() {
        return false;
    }
    if g.free_rank() > 0 {
        // torsion of h can be absorbed only by torsion of g
        return embeds(&h.torsion_subgroup(), &g.torsion_subgroup());
    }
    h.primes().into_iter().all(|p| {
        let (a, b) = (h.partition(p), g.partition(p));
        a.len() <= b.len() && a.iter().zip(&b).all(|(x, y)| x <= y)
    })
}

const DEFAULT_DOCUMENT: &str = include_str!("../../data/default_kb.toml");

/// The shipped knowledge base.
pub fn default_kb() -> KnowledgeBase {
    load(DEFAULT_DOCUMENT).expect("shipped knowledge base is valid")
}

/// The shipped knowledge-base document.
pub fn default_document() -> &'static str {
    DEFAULT_DOCUMENT
}
