//! `ker(ξ*)` for the attaching map `ξ` of a connected sum, with `ξ* = Σ h_i*`.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;

use crate::abelian::{
    direct_sum, AlgebraError, FgAbGroup, Homomorphism, IntMatrix, Lattice, Presentation,
};
use crate::extension::sublattice::{for_each_sublattice, moduli_of};
use crate::knowledge::{
    BlockId, FactKind, FactValue, KnowledgeBase, KnowledgeError, MapSpec, Subject,
};

use super::trace::{tags, DerivationTrace};
use super::{EngineError, ManifoldExpr};

/// Largest skeleton group for which every representative map is enumerated.
pub const REPRESENTATIVE_BOUND: u64 = 64;

const COMBINATION_BOUND: usize = 100_000;

/// `ker(ξ*)`, or every class consistent with the available facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelOutcome {
    Determined(FgAbGroup),
    Ambiguous {
        candidates: Vec<FgAbGroup>,
        /// Facts whose absence causes the ambiguity.
        missing: Vec<String>,
    },
}

impl KernelOutcome {
    pub fn candidates(&self) -> Vec<FgAbGroup> {
        match self {
            KernelOutcome::Determined(g) => vec![g.clone()],
            KernelOutcome::Ambiguous { candidates, .. } => candidates.clone(),
        }
    }

    pub fn missing(&self) -> &[String] {
        match self {
            KernelOutcome::Determined(_) => &[],
            KernelOutcome::Ambiguous { missing, .. } => missing,
        }
    }

    fn from_classes(classes: BTreeSet<FgAbGroup>, missing: Vec<String>) -> Self {
        let mut candidates: Vec<FgAbGroup> = classes.into_iter().collect();
        if candidates.len() == 1 {
            KernelOutcome::Determined(candidates.pop().expect("one"))
        } else {
            KernelOutcome::Ambiguous {
                candidates,
                missing,
            }
        }
    }
}

/// The explicit isomorphism `S^{k-1} ⊕ ker h -> ker(Σ_k h)`,
/// `(x_1, ..., x_{k-1}, y) -> (x_1, ..., x_{k-1}, y - Σ x_i)`.
#[derive(Clone, Debug)]
pub struct SplittingIso {
    /// From `S^{k-1} ⊕ ker h` into `S^k`.
    pub map: Homomorphism,
    /// Class of `S^{k-1} ⊕ ker h`.
    pub kernel: FgAbGroup,
}

fn power(p: &Presentation, k: usize) -> Presentation {
    (1..k).fold(p.clone(), |acc, _| acc.direct_sum(p))
}

/// `Σ_k h: S^k -> T`, `(x_1, ..., x_k) -> Σ h(x_i)`.
pub fn k_fold_sum(h: &Homomorphism, k: usize) -> Homomorphism {
    assert!(k >= 1);
    let blocks: Vec<IntMatrix> = vec![h.matrix().clone(); k];
    let matrix = blocks[1..]
        .iter()
        .fold(blocks[0].clone(), |acc, m| acc.hstack(m));
    Homomorphism::new(power(h.domain(), k), h.codomain().clone(), matrix)
        .expect("sum of well-defined maps")
}

pub fn kernel_of_sum_splitting(h: &Homomorphism, k: usize) -> Result<SplittingIso, AlgebraError> {
    assert!(k >= 1);
    let s = h.domain();
    let n = s.generator_count();
    let ker = h.kernel();
    let m = ker.presentation.generator_count();
    let domain = if k == 1 {
        ker.presentation.clone()
    } else {
        power(s, k - 1).direct_sum(&ker.presentation)
    };
    let rows = k * n;
    let cols = (k - 1) * n + m;
    let mut matrix = IntMatrix::zeros(rows, cols);
    for copy in 0..k - 1 {
        for i in 0..n {
            matrix.set(copy * n + i, copy * n + i, BigInt::from(1));
            matrix.set((k - 1) * n + i, copy * n + i, BigInt::from(-1));
        }
    }
    for i in 0..n {
        for j in 0..m {
            matrix.set(
                (k - 1) * n + i,
                (k - 1) * n + j,
                ker.generators.get(i, j).clone(),
            );
        }
    }
    let map = Homomorphism::new(domain, power(s, k), matrix)?;
    let kernel = map.domain().canonical_form();
    Ok(SplittingIso { map, kernel })
}

/// Every surjection `domain -> image` between the canonical presentations.
pub fn surjections(
    domain: &FgAbGroup,
    image: &FgAbGroup,
) -> Result<Vec<Homomorphism>, EngineError> {
    let (Some(_), Some(_)) = (domain.order(), image.order()) else {
        return Err(EngineError::TooLarge(format!(
            "representative maps {} -> {} need finite groups",
            domain.to_compact(),
            image.to_compact()
        )));
    };
    let dm = moduli_of(domain);
    let im = moduli_of(image);
    // entry (i, j) may be any t in [0, e_i) with d_j * t = 0 mod e_i
    let choices: Vec<Vec<u64>> = im
        .iter()
        .flat_map(|&e| {
            dm.iter()
                .map(move |&d| (0..e).filter(|t| (d * t) % e == 0).collect::<Vec<_>>())
        })
        .collect();
    let total: usize = choices.iter().map(|c| c.len()).product();
    if total > COMBINATION_BOUND {
        return Err(EngineError::TooLarge(format!(
            "{total} candidate maps {} -> {}",
            domain.to_compact(),
            image.to_compact()
        )));
    }
    let (pd, pi) = (
        Presentation::of_group(domain),
        Presentation::of_group(image),
    );
    let mut out = Vec::new();
    let mut index = vec![0usize; choices.len()];
    loop {
        let entries: Vec<BigInt> = index
            .iter()
            .zip(&choices)
            .map(|(&i, c)| BigInt::from(c[i]))
            .collect();
        let matrix =
            IntMatrix::from_entries(im.len(), dm.len(), entries).expect("row-major entries");
        let h = Homomorphism::new(pd.clone(), pi.clone(), matrix).expect("entries respect orders");
        if h.is_surjective() {
            out.push(h);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == index.len() {
                return Ok(out);
            }
            index[pos] += 1;
            if index[pos] < choices[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Subgroups `D ⊆ ⊕ I_i` meeting every summand trivially, as the relation
/// lattices of `(⊕ I_i) / D` in the canonical presentation, with the class of `D`.
fn overlap_relations(images: &[FgAbGroup]) -> Vec<(IntMatrix, FgAbGroup)> {
    let moduli: Vec<u64> = images.iter().flat_map(moduli_of).collect();
    let n = moduli.len();
    let mut ranges = Vec::new();
    let mut start = 0;
    for g in images {
        let len = moduli_of(g).len();
        ranges.push(start..start + len);
        start += len;
    }
    let order: u64 = moduli.iter().product();
    let mut out = Vec::new();
    for index in (1..=order).filter(|d| order.is_multiple_of(*d)) {
        let _ = for_each_sublattice(&moduli, index, |s| {
            let cols: Vec<Vec<BigInt>> = s
                .columns
                .iter()
                .map(|c| c.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            let lattice = Lattice::from_vectors(n, cols.clone());
            let meets_trivially = ranges.iter().all(|r| {
                block_elements(&moduli, r.clone())
                    .all(|v| v.iter().all(|x| x == &BigInt::from(0)) || !lattice.contains(&v))
            });
            if meets_trivially {
                out.push((IntMatrix::from_columns(n, &cols), s.subgroup()));
            }
            ControlFlow::Continue(())
        });
    }
    out
}

/// All elements supported on coordinates `range`, reduced modulo `moduli`.
fn block_elements(
    moduli: &[u64],
    range: std::ops::Range<usize>,
) -> impl Iterator<Item = Vec<BigInt>> + '_ {
    let size: u64 = moduli[range.clone()].iter().product();
    (0..size).map(move |mut code| {
        let mut v = vec![BigInt::from(0); moduli.len()];
        for i in range.clone() {
            v[i] = BigInt::from(code % moduli[i]);
            code /= moduli[i];
        }
        v
    })
}

/// A nontrivial `h*` together with everything needed to realize it.
struct Family {
    block: BlockId,
    k: u64,
    skeleton: FgAbGroup,
    image: FgAbGroup,
    /// Representative surjections onto `image`, when enumerable.
    reps: Option<Vec<Homomorphism>>,
    /// Possible kernel classes of `h*`.
    kernels: BTreeSet<FgAbGroup>,
    explicit: Option<Homomorphism>,
}

pub(super) fn kernel_of_attaching_sum(
    kb: &KnowledgeBase,
    expr: &ManifoldExpr,
    trace: &mut DerivationTrace,
) -> Result<KernelOutcome, EngineError> {
    let e = expr.without_spheres();
    if let [(b, _)] = e.summands() {
        if b.is_sphere() {
            trace.push(
                "sphere_skeleton",
                vec![b.to_string()],
                "the skeleton of a sphere is a point: ker = 0",
                tags::SPHERE_UNIT,
            );
            return Ok(KernelOutcome::Determined(FgAbGroup::trivial()));
        }
    }
    let n = e.dimension();
    let mut base = FgAbGroup::trivial();
    let mut families = Vec::new();
    for &(block, k) in e.summands() {
        let sk = kb.block_fact(FactKind::SkeletonSet, block)?;
        let skeleton = sk.group().clone();
        trace.push(
            "skeleton_set",
            vec![block.to_string()],
            format!("[{block}^({}), Top/O] = {skeleton}", n - 1),
            &sk.cite,
        );
        let mf = kb.block_fact(FactKind::AttachingMap, block)?;
        let FactValue::Map(spec) = &mf.value else {
            unreachable!("kind checked on load")
        };
        trace.push(
            "attaching_map",
            vec![block.to_string()],
            format!("h*: {skeleton} -> Theta_{} is {}", n - 1, mf.value),
            &mf.cite,
        );
        if spec.is_trivial() || skeleton.is_trivial() {
            let part = skeleton.power(k as usize);
            trace.push(
                "trivial_attaching_map",
                vec![format!("{k}*{block}")],
                format!("contributes all of {part}"),
                tags::ATTACHING_SUM,
            );
            base = base.sum(&part);
        } else {
            families.push(realize(kb, block, k, skeleton, spec, n - 1, trace)?);
        }
    }

    if families.is_empty() {
        return Ok(KernelOutcome::Determined(base));
    }
    if families.len() >= 2 && families.iter().all(|f| f.explicit.is_some()) {
        return explicit_kernel(&families, base, n - 1, trace);
    }
    if families.len() == 1 {
        return single_family(&families[0], base, trace);
    }
    several_families(kb, &families, base, trace)
}

fn realize(
    kb: &KnowledgeBase,
    block: BlockId,
    k: u64,
    skeleton: FgAbGroup,
    spec: &MapSpec,
    target_dim: u32,
    trace: &mut DerivationTrace,
) -> Result<Family, EngineError> {
    let target = || kb.theta_group(target_dim).cloned();
    let mut explicit = None;
    let (image, stated) = match spec {
        MapSpec::Mono => (skeleton.clone(), Some(FgAbGroup::trivial())),
        MapSpec::Epi { kernel } => (target()?, kernel.clone()),
        MapSpec::ImageKernel { image, kernel } => (image.clone(), Some(kernel.clone())),
        MapSpec::Matrix(m) => {
            let h = Homomorphism::new(
                Presentation::of_group(&skeleton),
                Presentation::of_group(&target()?),
                m.clone(),
            )?;
            let pair = (h.image().group, Some(h.kernel().group));
            explicit = Some(h);
            pair
        }
        MapSpec::Trivial => unreachable!("trivial maps handled by caller"),
    };
    let small = skeleton
        .order_u64()
        .is_some_and(|o| o <= REPRESENTATIVE_BOUND);
    let mut kernels = BTreeSet::new();
    let reps = if small {
        let reps = surjections(&skeleton, &image)?;
        if reps.is_empty() {
            return Err(EngineError::Independence {
                block,
                message: format!("no surjection {skeleton} -> {image}"),
            });
        }
        kernels = reps.iter().map(|h| h.kernel().group).collect();
        match &stated {
            Some(kc) if kernels.len() > 1 || !kernels.contains(kc) => {
                let seen: Vec<String> = kernels.iter().map(|g| g.to_string()).collect();
                return Err(EngineError::Independence {
                    block,
                    message: format!(
                        "surjections {skeleton} -> {image} have kernels {{{}}}, stated kernel {kc}",
                        seen.join(", ")
                    ),
                });
            }
            _ => {}
        }
        let ks: Vec<String> = kernels.iter().map(|g| g.to_string()).collect();
        trace.push(
            "representative_independence",
            vec![block.to_string()],
            format!(
                "{} surjection(s) {skeleton} -> {image}, kernels {{{}}}",
                reps.len(),
                ks.join(", ")
            ),
            tags::ATTACHING_SUM,
        );
        Some(reps)
    } else {
        match &stated {
            Some(kc) => {
                kernels.insert(kc.clone());
                trace.push(
                    "representative_independence",
                    vec![block.to_string()],
                    format!(
                        "skeleton order exceeds {REPRESENTATIVE_BOUND}; using stated kernel {kc}"
                    ),
                    tags::ATTACHING_SUM,
                );
                None
            }
            None => return Err(EngineError::TooLarge(format!(
                "kernel of h* for {block} is not stated and {skeleton} is too large to enumerate"
            ))),
        }
    };
    if let Some(h) = &explicit {
        kernels = BTreeSet::from([h.kernel().group]);
    }
    Ok(Family {
        block,
        k,
        skeleton,
        image,
        reps,
        kernels,
        explicit,
    })
}

fn single_family(
    f: &Family,
    base: FgAbGroup,
    trace: &mut DerivationTrace,
) -> Result<KernelOutcome, EngineError> {
    let rest = f.skeleton.power(f.k as usize - 1);
    let mut classes = BTreeSet::new();
    for kc in &f.kernels {
        classes.insert(direct_sum([&base, &rest, kc]));
    }
    // cross-check the splitting against a direct kernel computation
    let rep = f
        .explicit
        .as_ref()
        .or_else(|| f.reps.as_ref().and_then(|r| r.first()));
    if let Some(h) = rep {
        let direct = k_fold_sum(h, f.k as usize).kernel().group;
        let split = kernel_of_sum_splitting(h, f.k as usize)?;
        let formula = rest.sum(&h.kernel().group);
        if direct != split.kernel || direct != formula {
            return Err(EngineError::Internal(format!(
                "splitting check failed for {}: direct {direct}, split {}, formula {formula}",
                f.block, split.kernel
            )));
        }
    }
    let kernels: Vec<String> = f.kernels.iter().map(|g| g.to_string()).collect();
    trace.push(
        "k_fold_splitting",
        vec![format!("{}*{}", f.k, f.block)],
        format!(
            "ker = (+)_{} {} (+) ker h* with ker h* in {{{}}}, giving {}",
            f.k - 1,
            f.skeleton,
            kernels.join(", "),
            join_classes(&classes)
        ),
        tags::KFOLD_SPLITTING,
    );
    let missing = if classes.len() > 1 {
        vec![format!("attaching_map {}: kernel class of h*", f.block)]
    } else {
        vec![]
    };
    Ok(KernelOutcome::from_classes(classes, missing))
}

fn explicit_kernel(
    families: &[Family],
    base: FgAbGroup,
    target_dim: u32,
    trace: &mut DerivationTrace,
) -> Result<KernelOutcome, EngineError> {
    let mut maps = families
        .iter()
        .map(|f| k_fold_sum(f.explicit.as_ref().expect("explicit"), f.k as usize));
    let first = maps.next().expect("nonempty");
    let (domain, matrix) = maps.fold(
        (first.domain().clone(), first.matrix().clone()),
        |(d, m), h| (d.direct_sum(h.domain()), m.hstack(h.matrix())),
    );
    let total = Homomorphism::new(domain, first.codomain().clone(), matrix)?;
    let k = total.kernel().group;
    let out = base.sum(&k);
    trace.push(
        "attaching_sum_kernel",
        families
            .iter()
            .map(|f| format!("{}*{}", f.k, f.block))
            .collect(),
        format!("explicit maps into Theta_{target_dim}: ker = {out}"),
        tags::ATTACHING_SUM,
    );
    Ok(KernelOutcome::Determined(out))
}

fn several_families(
    kb: &KnowledgeBase,
    families: &[Family],
    base: FgAbGroup,
    trace: &mut DerivationTrace,
) -> Result<KernelOutcome, EngineError> {
    let mut base = base;
    for f in families {
        base = base.sum(&f.skeleton.power(f.k as usize - 1));
    }
    trace.push(
        "k_fold_splitting",
        families
            .iter()
            .map(|f| format!("{}*{}", f.k, f.block))
            .collect(),
        format!("ker = {base} (+) ker(Σ h_i* on one copy of each skeleton)"),
        tags::KFOLD_SPLITTING,
    );

    let images: Vec<FgAbGroup> = families.iter().map(|f| f.image.clone()).collect();
    let mut missing = Vec::new();
    let mut known_overlap = None;
    if let [a, b] = families {
        let subject = Subject::pair(a.block, b.block);
        let key = format!("image_overlap {subject}");
        let theta = a.block.dimension() - 1;
        match kb.lookup(FactKind::ImageOverlap, subject) {
            Ok(fact) => {
                match &fact.value {
                    FactValue::Overlap(Some(d)) => {
                        trace.push(
                            "image_overlap",
                            vec![key],
                            format!("images meet in {d}"),
                            &fact.cite,
                        );
                        known_overlap = Some(d.clone());
                    }
                    _ => {
                        trace.push(
                            "image_overlap",
                            vec![key.clone()],
                            "relative position of the images is unknown",
                            &fact.cite,
                        );
                        missing.push(format!("{key}: intersection of the images in Theta_{theta} (recorded as unknown)"));
                    }
                }
            }
            Err(KnowledgeError::Insufficient { .. }) => missing.push(format!(
                "{key}: intersection of the images in Theta_{theta}"
            )),
            Err(e) => return Err(e.into()),
        }
    } else {
        let names: Vec<String> = families.iter().map(|f| f.block.to_string()).collect();
        missing.push(format!(
            "relative position of the images of h* for {}",
            names.join(", ")
        ));
    }

    for f in families {
        if f.reps.is_none() {
            return Err(EngineError::TooLarge(format!(
                "skeleton {} of {} exceeds {REPRESENTATIVE_BOUND}; cannot realize overlapping images",
                f.skeleton, f.block
            )));
        }
    }
    let overlaps: Vec<(IntMatrix, FgAbGroup)> = overlap_relations(&images)
        .into_iter()
        .filter(|(_, d)| known_overlap.as_ref().is_none_or(|o| o == d))
        .collect();
    let combos: usize = families
        .iter()
        .map(|f| f.reps.as_ref().map_or(1, Vec::len))
        .product::<usize>()
        * overlaps.len();
    if combos > COMBINATION_BOUND {
        return Err(EngineError::TooLarge(format!(
            "{combos} overlap configurations"
        )));
    }

    let domain = families
        .iter()
        .map(|f| Presentation::of_group(&f.skeleton))
        .reduce(|a, b| a.direct_sum(&b))
        .expect("nonempty");
    let gens = images.iter().map(|g| moduli_of(g).len()).sum::<usize>();
    let mut classes = BTreeSet::new();
    let rep_lists: Vec<&Vec<Homomorphism>> = families
        .iter()
        .map(|f| f.reps.as_ref().expect("checked"))
        .collect();
    let mut index = vec![0usize; rep_lists.len()];
    'outer: loop {
        let matrix = index
            .iter()
            .zip(&rep_lists)
            .map(|(&i, r)| r[i].matrix().clone())
            .reduce(|a, b| a.block_diag(&b))
            .expect("nonempty");
        for (relations, _) in &overlaps {
            let quotient = Presentation::new(gens, relations.clone())?;
            let psi = Homomorphism::new(domain.clone(), quotient, matrix.clone())?;
            classes.insert(base.sum(&psi.kernel().group));
        }
        let mut pos = 0;
        loop {
            if pos == index.len() {
                break 'outer;
            }
            index[pos] += 1;
            if index[pos] < rep_lists[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
    let outcome = KernelOutcome::from_classes(classes.clone(), missing.clone());
    let overlap_classes: BTreeSet<String> = overlaps.iter().map(|(_, d)| d.to_string()).collect();
    trace.push(
        "attaching_sum_kernel",
        families
            .iter()
            .map(|f| format!("{} onto {}", f.block, f.image))
            .collect(),
        format!(
            "over image overlaps {{{}}} and all representatives: ker in {}",
            overlap_classes.into_iter().collect::<Vec<_>>().join(", "),
            join_classes(&classes)
        ),
        tags::ATTACHING_SUM,
    );
    if let KernelOutcome::Ambiguous { missing, .. } = &outcome {
        trace.push(
            "kernel_ambiguous",
            missing.clone(),
            format!("ker(xi*) not determined: missing {}", missing.join("; ")),
            tags::ATTACHING_SUM,
        );
    }
    Ok(outcome)
}

fn join_classes(classes: &BTreeSet<FgAbGroup>) -> String {
    let v: Vec<String> = classes.iter().map(|g| g.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FgAbGroup {
        s.parse().unwrap()
    }

    #[test]
    fn surjection_counts() {
        assert_eq!(surjections(&g("Z2^2+Z3"), &g("Z2")).unwrap().len(), 3);
        assert_eq!(surjections(&g("Z2^2"), &g("Z2^2")).unwrap().len(), 6);
        assert_eq!(surjections(&g("Z4"), &g("Z2")).unwrap().len(), 1);
        assert!(surjections(&g("Z3"), &g("Z2")).unwrap().is_empty());
    }

    #[test]
    fn overlaps_of_two_lines() {
        let rels = overlap_relations(&[g("Z2"), g("Z2")]);
        let classes: Vec<String> = rels.iter().map(|(_, d)| d.to_string()).collect();
        assert_eq!(rels.len(), 2, "{classes:?}");
        assert!(classes.contains(&"0".to_string()) && classes.contains(&"Z2".to_string()));
    }

    #[test]
    fn splitting_of_hopf_type_map() {
        let h = surjections(&g("Z2^2+Z3"), &g("Z2")).unwrap().remove(0);
        let s = kernel_of_sum_splitting(&h, 3).unwrap();
        assert_eq!(s.kernel, g("Z2^5+Z3^3"));
        assert!(s.map.is_injective());
        assert_eq!(k_fold_sum(&h, 3).kernel().group, s.kernel);
    }
}
