//! Middle groups of short exact sequences `0 -> A -> G -> B -> 0` of finite
//! abelian groups, and the constraints used to narrow them down.

pub(crate) mod sublattice;

use std::fmt;
use std::ops::ControlFlow;

use num_traits::ToPrimitive;

use crate::abelian::{direct_sum, is_prime, localize, FgAbGroup, PrimePower};
use sublattice::{for_each_sublattice, moduli_of};

pub const DEFAULT_ORACLE_BOUND: u64 = 1024;

/// Limits for the brute-force sublattice oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest group order the oracle will enumerate.
    pub bound: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            bound: DEFAULT_ORACLE_BOUND,
        }
    }
}

impl OracleConfig {
    fn check(&self, g: &FgAbGroup) -> Result<u64, ExtensionError> {
        let order = g
            .order()
            .ok_or_else(|| ExtensionError::NotFinite(g.clone()))?;
        match order.to_u64() {
            Some(o) if o <= self.bound => Ok(o),
            _ => Err(ExtensionError::OracleBound {
                order: order.to_string(),
                bound: self.bound,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error("group {0} is not finite")]
    NotFinite(FgAbGroup),
    #[error("order mismatch: |{g}| != |{sub}| * |{quot}|")]
    OrderMismatch {
        g: FgAbGroup,
        sub: FgAbGroup,
        quot: FgAbGroup,
    },
    #[error("oracle bound exceeded: group of order {order} exceeds bound {bound}")]
    OracleBound { order: String, bound: u64 },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("contradictory constraints: no candidate survives {constraint}")]
    Contradiction { constraint: Constraint },
}

/// A condition on the middle group of an extension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// The sequence splits: `G ≅ A ⊕ B`.
    Splits,
    /// `G` has no element of order exactly `n` (`n >= 2`).
    NoElementOfOrder(u64),
    /// `G` (localized at `prime`, if given) is a quotient of `group` (localized likewise).
    QuotientOf {
        group: FgAbGroup,
        prime: Option<u64>,
    },
    /// `G` (localized at `prime`, if given) embeds in `group` (localized likewise).
    SubgroupOf {
        group: FgAbGroup,
        prime: Option<u64>,
    },
    /// `G_(p) ≅ A_(p) ⊕ B_(p)`.
    LocalSplit(u64),
}

impl Constraint {
    pub fn validate(&self) -> Result<(), ExtensionError> {
        let bad = |m: String| Err(ExtensionError::InvalidConstraint(m));
        match self {
            Constraint::NoElementOfOrder(n) if *n < 2 => {
                bad(format!("no_element_of_order needs n >= 2, got {n}"))
            }
            Constraint::LocalSplit(p) if !is_prime(*p) => {
                bad(format!("local_split at non-prime {p}"))
            }
            Constraint::QuotientOf { prime: Some(p), .. }
            | Constraint::SubgroupOf { prime: Some(p), .. }
                if !is_prime(*p) =>
            {
                bad(format!("localization at non-prime {p}"))
            }
            Constraint::QuotientOf { group, .. } | Constraint::SubgroupOf { group, .. }
                if !group.is_finite() =>
            {
                bad(format!("reference group {group} is not finite"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |p: &Option<u64>| p.map(|p| format!(" at p={p}")).unwrap_or_default();
        match self {
            Constraint::Splits => write!(f, "splits"),
            Constraint::NoElementOfOrder(n) => write!(f, "no element of order {n}"),
            Constraint::QuotientOf { group, prime } => {
                write!(f, "quotient of {group}{}", at(prime))
            }
            Constraint::SubgroupOf { group, prime } => {
                write!(f, "subgroup of {group}{}", at(prime))
            }
            Constraint::LocalSplit(p) => write!(f, "splits at p={p}"),
        }
    }
}

/// Possible middle groups of `0 -> sub -> G -> quot -> 0`, canonically sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    sub: FgAbGroup,
    quot: FgAbGroup,
    candidates: Vec<FgAbGroup>,
}

impl CandidateSet {
    fn new(sub: FgAbGroup, quot: FgAbGroup, mut candidates: Vec<FgAbGroup>) -> Self {
        candidates.sort();
        candidates.dedup();
        CandidateSet {
            sub,
            quot,
            candidates,
        }
    }

    pub fn sub(&self) -> &FgAbGroup {
        &self.sub
    }

    pub fn quot(&self) -> &FgAbGroup {
        &self.quot
    }

    pub fn candidates(&self) -> &[FgAbGroup] {
        &self.candidates
    }

    pub fn resolved(&self) -> bool {
        self.candidates.len() == 1
    }

    /// The unique candidate, when resolved.
    pub fn unique(&self) -> Option<&FgAbGroup> {
        if self.resolved() {
            self.candidates.first()
        } else {
            None
        }
    }

    pub fn contains(&self, g: &FgAbGroup) -> bool {
        self.candidates.binary_search(g).is_ok()
    }
}

/// A short exact sequence query with its constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionProblem {
    pub sub: FgAbGroup,
    pub quot: FgAbGroup,
    pub constraints: Vec<Constraint>,
}

impl ExtensionProblem {
    pub fn new(
        sub: FgAbGroup,
        quot: FgAbGroup,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ExtensionError> {
        for g in [&sub, &quot] {
            if !g.is_finite() {
                return Err(ExtensionError::NotFinite(g.clone()));
            }
        }
        Ok(ExtensionProblem {
            sub,
            quot,
            constraints,
        })
    }
}

/// Whether `g` has a subgroup isomorphic to `a` with quotient isomorphic to `b`.
///
/// Decided by enumerating the subgroups of each primary part of `g` (a
/// subgroup of a finite abelian group is the direct sum of its primary parts).
pub fn subgroup_quotient_feasible(
    g: &FgAbGroup,
    a: &FgAbGroup,
    b: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<bool, ExtensionError> {
    check_orders(g, a, b)?;
    cfg.check(g)?;
    for p in g.primes() {
        let (gp, ap, bp) = (g.primary_part(p), a.primary_part(p), b.primary_part(p));
        if !primary_feasible(&gp, &ap, &bp) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_orders(g: &FgAbGroup, a: &FgAbGroup, b: &FgAbGroup) -> Result<(), ExtensionError> {
    let orders = (g.order(), a.order(), b.order());
    let (Some(og), Some(oa), Some(ob)) = orders else {
        let inf = [g, a, b]
            .into_iter()
            .find(|x| !x.is_finite())
            .expect("some infinite");
        return Err(ExtensionError::NotFinite(inf.clone()));
    };
    if og != oa * ob {
        return Err(ExtensionError::OrderMismatch {
            g: g.clone(),
            sub: a.clone(),
            quot: b.clone(),
        });
    }
    Ok(())
}

/// Oracle on a single primary part; orders already checked.
fn primary_feasible(g: &FgAbGroup, a: &FgAbGroup, b: &FgAbGroup) -> bool {
    if a.is_trivial() {
        return g == b;
    }
    if b.is_trivial() {
        return g == a;
    }
    let moduli = moduli_of(g);
    let index = b.order_u64().expect("bounded");
    let found = for_each_sublattice(&moduli, index, |s| {
        if &s.quotient() == b && &s.subgroup() == a {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found.is_break()
}

/// Whether `q` is isomorphic to a quotient of `h` (both finite primary parts).
fn primary_is_quotient(h: &FgAbGroup, q: &FgAbGroup) -> bool {
    if !partition_contains(h, q) {
        return false;
    }
    let index = q.order_u64().expect("bounded");
    for_each_sublattice(&moduli_of(h), index, |s| {
        if &s.quotient() == q {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

/// Whether `s` is isomorphic to a subgroup of `h` (both finite primary parts).
fn primary_is_subgroup(h: &FgAbGroup, s: &FgAbGroup) -> bool {
    if !partition_contains(h, s) {
        return false;
    }
    let index = (h.order_u64().expect("bounded")) / s.order_u64().expect("bounded");
    for_each_sublattice(&moduli_of(h), index, |l| {
        if &l.subgroup() == s {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

/// Young-diagram containment of every primary part of `small` in `big`
/// (necessary for `small` to be a subgroup or quotient of `big`).
fn partition_contains(big: &FgAbGroup, small: &FgAbGroup) -> bool {
    small.primes().into_iter().all(|p| {
        let (lb, ls) = (big.partition(p), small.partition(p));
        ls.len() <= lb.len() && ls.iter().zip(&lb).all(|(s, b)| s <= b)
    })
}

/// All partitions of `n` with parts at most `max`, largest part first.
fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn group_of_partition(p: u64, parts: &[u32]) -> FgAbGroup {
    FgAbGroup::new(
        0,
        parts
            .iter()
            .map(|&e| PrimePower {
                prime: p,
                exponent: e,
            })
            .collect(),
    )
}

/// The possible middle groups at one prime.
fn primary_extensions(
    p: u64,
    a: &FgAbGroup,
    b: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<Vec<FgAbGroup>, ExtensionError> {
    if a.is_trivial() || b.is_trivial() {
        return Ok(vec![a.sum(b)]);
    }
    cfg.check(&a.sum(b))?;
    let (mu, nu) = (a.partition(p), b.partition(p));
    let total: u32 = mu.iter().chain(&nu).sum();
    let max_part = mu[0] + nu[0];
    let mut out = Vec::new();
    for lambda in partitions(total, max_part) {
        // cheap necessary conditions: containment of both diagrams, rank subadditivity
        let contains =
            |x: &[u32]| x.len() <= lambda.len() && x.iter().zip(&lambda).all(|(s, l)| s <= l);
        if !contains(&mu) || !contains(&nu) || lambda.len() > mu.len() + nu.len() {
            continue;
        }
        let g = group_of_partition(p, &lambda);
        if primary_feasible(&g, a, b) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Every abelian group `G` admitting `0 -> a -> G -> b -> 0`, canonically sorted.
pub fn enumerate_extensions(
    a: &FgAbGroup,
    b: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<CandidateSet, ExtensionError> {
    for g in [a, b] {
        if !g.is_finite() {
            return Err(ExtensionError::NotFinite(g.clone()));
        }
    }
    let mut primes = a.primes();
    primes.extend(b.primes());
    primes.sort_unstable();
    primes.dedup();

    let mut acc = vec![FgAbGroup::trivial()];
    for p in primes {
        let local = primary_extensions(p, &a.primary_part(p), &b.primary_part(p), cfg)?;
        acc = acc
            .iter()
            .flat_map(|g| local.iter().map(move |h| g.sum(h)))
            .collect();
    }
    Ok(CandidateSet::new(a.clone(), b.clone(), acc))
}

/// Isomorphism classes of the kernels `K` of surjections `g -> quot`,
/// canonically sorted (empty when `quot` is not a quotient of `g`).
pub fn kernels_with_quotient(
    g: &FgAbGroup,
    quot: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<Vec<FgAbGroup>, ExtensionError> {
    for x in [g, quot] {
        if !x.is_finite() {
            return Err(ExtensionError::NotFinite(x.clone()));
        }
    }
    let mut primes = g.primes();
    primes.extend(quot.primes());
    primes.sort_unstable();
    primes.dedup();
    let mut acc = vec![FgAbGroup::trivial()];
    for p in primes {
        let (gp, qp) = (g.primary_part(p), quot.primary_part(p));
        if !partition_contains(&gp, &qp) {
            return Ok(Vec::new());
        }
        cfg.check(&gp)?;
        let mut local = Vec::new();
        let index = qp.order_u64().expect("bounded");
        let _ = for_each_sublattice(&moduli_of(&gp), index, |s| {
            if s.quotient() == qp {
                local.push(s.subgroup());
            }
            ControlFlow::Continue(())
        });
        local.sort();
        local.dedup();
        acc = acc
            .iter()
            .flat_map(|k| local.iter().map(move |h| k.sum(h)))
            .collect();
    }
    acc.sort();
    acc.dedup();
    Ok(acc)
}

fn is_quotient(
    h: &FgAbGroup,
    g: &FgAbGroup,
    prime: Option<u64>,
    cfg: &OracleConfig,
) -> Result<bool, ExtensionError> {
    relate(h, g, prime, cfg, primary_is_quotient)
}

fn is_subgroup(
    h: &FgAbGroup,
    g: &FgAbGroup,
    prime: Option<u64>,
    cfg: &OracleConfig,
) -> Result<bool, ExtensionError> {
    relate(h, g, prime, cfg, primary_is_subgroup)
}

fn relate(
    h: &FgAbGroup,
    g: &FgAbGroup,
    prime: Option<u64>,
    cfg: &OracleConfig,
    test: fn(&FgAbGroup, &FgAbGroup) -> bool,
) -> Result<bool, ExtensionError> {
    let primes = match prime {
        Some(p) => vec![p],
        None => {
            let mut ps = g.primes();
            ps.extend(h.primes());
            ps.sort_unstable();
            ps.dedup();
            ps
        }
    };
    for p in primes {
        let (hp, gp) = (h.primary_part(p), g.primary_part(p));
        if gp.order() > hp.order() || !partition_contains(&hp, &gp) {
            return Ok(false);
        }
        cfg.check(&hp)?;
        if !test(&hp, &gp) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn keeps(
    c: &Constraint,
    g: &FgAbGroup,
    sub: &FgAbGroup,
    quot: &FgAbGroup,
    cfg: &OracleConfig,
) -> Result<bool, ExtensionError> {
    Ok(match c {
        Constraint::Splits => *g == sub.sum(quot),
        Constraint::NoElementOfOrder(n) => !g.has_element_of_order(*n),
        Constraint::QuotientOf { group, prime } => is_quotient(group, g, *prime, cfg)?,
        Constraint::SubgroupOf { group, prime } => is_subgroup(group, g, *prime, cfg)?,
        Constraint::LocalSplit(p) => {
            let local = |x: &FgAbGroup| localize(x, *p).expect("validated prime");
            local(g) == direct_sum([&local(sub), &local(quot)])
        }
    })
}

/// Filters candidates by each constraint.
///
/// Constraints are applied in their canonical order regardless of the order
/// given, so the result (and the constraint named by a contradiction error)
/// does not depend on the caller's ordering.
pub fn apply_constraints(
    cs: &CandidateSet,
    constraints: &[Constraint],
    cfg: &OracleConfig,
) -> Result<CandidateSet, ExtensionError> {
    let mut sorted: Vec<&Constraint> = constraints.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut current = cs.candidates.clone();
    for c in sorted {
        c.validate()?;
        let mut kept = Vec::with_capacity(current.len());
        for g in current {
            if keeps(c, &g, &cs.sub, &cs.quot, cfg)? {
                kept.push(g);
            }
        }
        if kept.is_empty() {
            return Err(ExtensionError::Contradiction {
                constraint: c.clone(),
            });
        }
        current = kept;
    }
    Ok(CandidateSet::new(cs.sub.clone(), cs.quot.clone(), current))
}

pub fn resolve(
    problem: &ExtensionProblem,
    cfg: &OracleConfig,
) -> Result<CandidateSet, ExtensionError> {
    let all = enumerate_extensions(&problem.sub, &problem.quot, cfg)?;
    apply_constraints(&all, &problem.constraints, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FgAbGroup {
        s.parse().unwrap()
    }

    fn names(cs: &CandidateSet) -> Vec<String> {
        cs.candidates().iter().map(|x| x.to_string()).collect()
    }

    const CFG: OracleConfig = OracleConfig {
        bound: DEFAULT_ORACLE_BOUND,
    };

    #[test]
    fn feasibility_examples() {
        assert!(subgroup_quotient_feasible(&g("Z4"), &g("Z2"), &g("Z2"), &CFG).unwrap());
        assert!(!subgroup_quotient_feasible(&g("Z2^2"), &g("Z4"), &g("0"), &CFG).unwrap());
        assert!(matches!(
            subgroup_quotient_feasible(&g("Z2^2"), &g("Z2"), &g("Z3"), &CFG),
            Err(ExtensionError::OrderMismatch { .. })
        ));
        assert!(!subgroup_quotient_feasible(&g("Z8"), &g("Z2^2"), &g("Z2"), &CFG).unwrap());
        let small = OracleConfig { bound: 4 };
        assert!(matches!(
            subgroup_quotient_feasible(&g("Z8"), &g("Z2"), &g("Z4"), &small),
            Err(ExtensionError::OracleBound { .. })
        ));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            names(&enumerate_extensions(&g("Z2"), &g("Z2"), &CFG).unwrap()),
            ["Z2^2", "Z4"]
        );
        assert_eq!(
            names(&enumerate_extensions(&g("Z2"), &g("Z2^3"), &CFG).unwrap()),
            ["Z2^4", "Z4 (+) Z2^2"]
        );
        let coprime = enumerate_extensions(&g("Z3"), &g("Z2"), &CFG).unwrap();
        assert!(coprime.resolved());
        assert_eq!(coprime.unique(), Some(&g("Z6")));
        assert!(matches!(
            enumerate_extensions(&g("Z"), &g("Z2"), &CFG),
            Err(ExtensionError::NotFinite(_))
        ));
    }

    #[test]
    fn constraint_examples() {
        let both = enumerate_extensions(&g("Z2"), &g("Z2"), &CFG).unwrap();
        let no4 = apply_constraints(&both, &[Constraint::NoElementOfOrder(4)], &CFG).unwrap();
        assert_eq!(names(&no4), ["Z2^2"]);
        let quot = Constraint::QuotientOf {
            group: g("Z2^3"),
            prime: None,
        };
        assert_eq!(
            names(&apply_constraints(&both, &[quot], &CFG).unwrap()),
            ["Z2^2"]
        );
        assert_eq!(apply_constraints(&both, &[], &CFG).unwrap(), both);
        let split = apply_constraints(&both, &[Constraint::Splits], &CFG).unwrap();
        assert_eq!(names(&split), ["Z2^2"]);
        let sub = Constraint::SubgroupOf {
            group: g("Z8"),
            prime: None,
        };
        assert_eq!(
            names(&apply_constraints(&both, &[sub], &CFG).unwrap()),
            ["Z4"]
        );
    }

    #[test]
    fn contradiction_names_constraint() {
        let both = enumerate_extensions(&g("Z2"), &g("Z2"), &CFG).unwrap();
        let cs = [
            Constraint::Splits,
            Constraint::SubgroupOf {
                group: g("Z8"),
                prime: None,
            },
        ];
        let err = apply_constraints(&both, &cs, &CFG).unwrap_err();
        assert!(matches!(err, ExtensionError::Contradiction { .. }));
        let mut rev = cs.clone();
        rev.reverse();
        assert_eq!(apply_constraints(&both, &rev, &CFG).unwrap_err(), err);
    }

    #[test]
    fn kernels_of_surjections() {
        let ks = kernels_with_quotient(&g("Z2^2+Z3"), &g("Z2"), &CFG).unwrap();
        assert_eq!(ks, vec![g("Z2+Z3")]);
        let ks = kernels_with_quotient(&g("Z4+Z2"), &g("Z2"), &CFG).unwrap();
        assert_eq!(names_of(&ks), ["Z2^2", "Z4"]);
        assert!(kernels_with_quotient(&g("Z2^2"), &g("Z4"), &CFG)
            .unwrap()
            .is_empty());
        assert_eq!(
            kernels_with_quotient(&g("Z3"), &g("0"), &CFG).unwrap(),
            vec![g("Z3")]
        );
    }

    fn names_of(gs: &[FgAbGroup]) -> Vec<String> {
        gs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn invalid_constraints_rejected() {
        let both = enumerate_extensions(&g("Z2"), &g("Z2"), &CFG).unwrap();
        assert!(apply_constraints(&both, &[Constraint::NoElementOfOrder(1)], &CFG).is_err());
        assert!(apply_constraints(&both, &[Constraint::LocalSplit(4)], &CFG).is_err());
    }

    #[test]
    fn resolve_examples() {
        let theta10 = g("Z2+Z3");
        let p = ExtensionProblem::new(theta10, g("Z2^2"), vec![Constraint::NoElementOfOrder(4)])
            .unwrap();
        let r = resolve(&p, &CFG).unwrap();
        assert!(r.resolved());
        assert_eq!(r.unique(), Some(&g("Z2^3+Z3")));

        let open = resolve(
            &ExtensionProblem::new(g("Z2"), g("Z2^2"), vec![]).unwrap(),
            &CFG,
        )
        .unwrap();
        assert!(!open.resolved());
        assert_eq!(names(&open), ["Z2^3", "Z4 (+) Z2"]);

        let b = g("Z2^2+Z9");
        let trivial = resolve(
            &ExtensionProblem::new(g("0"), b.clone(), vec![]).unwrap(),
            &CFG,
        )
        .unwrap();
        assert_eq!(trivial.unique(), Some(&b));
    }

    #[test]
    fn local_split_and_localized_quotient() {
        let cs = enumerate_extensions(&g("Z2+Z3"), &g("Z2+Z3"), &CFG).unwrap();
        assert_eq!(cs.candidates().len(), 4);
        let r = apply_constraints(&cs, &[Constraint::LocalSplit(2)], &CFG).unwrap();
        assert_eq!(names(&r), ["Z2^2 (+) Z3^2", "Z2^2 (+) Z9"]);
        let q = Constraint::QuotientOf {
            group: g("Z3^2"),
            prime: Some(3),
        };
        let r = apply_constraints(&cs, &[q], &CFG).unwrap();
        assert_eq!(names(&r), ["Z2^2 (+) Z3^2", "Z4 (+) Z3^2"]);
    }
}
