use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::AlgebraError;

/// A cyclic factor `Z/p^e` with `p` prime and `e >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn new(prime: u64, exponent: u32) -> Result<Self, AlgebraError> {
        if !is_prime(prime) {
            return Err(AlgebraError::NotPrime(prime));
        }
        if exponent == 0 {
            return Err(AlgebraError::Parse(format!(
                "Z{prime}^0 is not a cyclic factor"
            )));
        }
        Ok(PrimePower { prime, exponent })
    }

    pub fn value(&self) -> BigUint {
        BigUint::from(self.prime).pow(self.exponent)
    }
}

/// Finitely generated abelian group in primary-decomposition canonical form.
///
/// Equality of values is isomorphism of groups: the torsion list is kept
/// sorted by `(prime, exponent)`. The derived ordering is the canonical
/// order used for sorting candidate sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgAbGroup {
    free_rank: usize,
    torsion: Vec<PrimePower>,
}

impl FgAbGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn new(free_rank: usize, mut torsion: Vec<PrimePower>) -> Self {
        torsion.sort();
        FgAbGroup { free_rank, torsion }
    }

    /// `Z/n`, split into its primary parts. `n = 0` gives `Z`, `n = 1` the trivial group.
    pub fn cyclic(n: u64) -> Self {
        if n == 0 {
            return Self::free(1);
        }
        Self::from_torsion_orders(std::iter::once(BigUint::from(n)))
    }

    /// `Z/p^e` repeated `count` times.
    pub fn prime_power_power(prime: u64, exponent: u32, count: usize) -> Self {
        let pp = PrimePower::new(prime, exponent).expect("prime power");
        Self::new(0, vec![pp; count])
    }

    /// Direct sum of cyclic groups of the given (positive) orders.
    pub fn from_torsion_orders<I: IntoIterator<Item = BigUint>>(orders: I) -> Self {
        let mut torsion = Vec::new();
        for n in orders {
            assert!(!n.is_zero(), "torsion order must be positive");
            for (prime, exponent) in factorize(&n) {
                torsion.push(PrimePower { prime, exponent });
            }
        }
        Self::new(0, torsion)
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[PrimePower] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Group order, or `None` for infinite groups.
    pub fn order(&self) -> Option<BigUint> {
        self.is_finite().then(|| self.torsion_order())
    }

    pub fn torsion_order(&self) -> BigUint {
        self.torsion.iter().map(PrimePower::value).product()
    }

    /// Order as `u64` for finite groups small enough to fit.
    pub fn order_u64(&self) -> Option<u64> {
        self.order().and_then(|o| o.to_u64())
    }

    /// Exponent of the torsion subgroup (1 when torsion-free).
    pub fn exponent(&self) -> BigUint {
        let mut best: BTreeMap<u64, u32> = BTreeMap::new();
        for pp in &self.torsion {
            let e = best.entry(pp.prime).or_default();
            *e = (*e).max(pp.exponent);
        }
        best.iter()
            .map(|(&p, &e)| BigUint::from(p).pow(e))
            .product()
    }

    /// Distinct primes dividing the torsion order, ascending.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.torsion.iter().map(|pp| pp.prime).collect();
        ps.dedup();
        ps
    }

    /// Exponents of the `p`-primary part, largest first (a partition).
    pub fn partition(&self, p: u64) -> Vec<u32> {
        let mut es: Vec<u32> = self
            .torsion
            .iter()
            .filter(|pp| pp.prime == p)
            .map(|pp| pp.exponent)
            .collect();
        es.sort_unstable_by(|a, b| b.cmp(a));
        es
    }

    /// The `p`-primary torsion subgroup (free part dropped).
    pub fn primary_part(&self, p: u64) -> FgAbGroup {
        FgAbGroup {
            free_rank: 0,
            torsion: self
                .torsion
                .iter()
                .copied()
                .filter(|pp| pp.prime == p)
                .collect(),
        }
    }

    pub fn torsion_subgroup(&self) -> FgAbGroup {
        FgAbGroup {
            free_rank: 0,
            torsion: self.torsion.clone(),
        }
    }

    /// Invariant factors `d_1, d_2, ...` with `d_{i+1} | d_i` (largest first).
    pub fn invariant_factors(&self) -> Vec<BigUint> {
        let mut factors: Vec<BigUint> = Vec::new();
        for p in self.primes() {
            for (i, e) in self.partition(p).into_iter().enumerate() {
                let v = BigUint::from(p).pow(e);
                if i < factors.len() {
                    factors[i] *= v;
                } else {
                    factors.push(v);
                }
            }
        }
        factors
    }

    /// Direct sum with another group.
    pub fn sum(&self, other: &FgAbGroup) -> FgAbGroup {
        let mut torsion = self.torsion.clone();
        torsion.extend_from_slice(&other.torsion);
        Self::new(self.free_rank + other.free_rank, torsion)
    }

    /// `k`-fold direct sum of `self`.
    pub fn power(&self, k: usize) -> FgAbGroup {
        direct_sum(std::iter::repeat_n(self, k))
    }

    /// Whether some element has order exactly `n` (`n = 1` is the identity).
    pub fn has_element_of_order(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        factorize(&BigUint::from(n)).into_iter().all(|(p, e)| {
            self.torsion
                .iter()
                .any(|pp| pp.prime == p && pp.exponent >= e)
        })
    }

    /// Compact syntax `Z^2+Z2^3+Z3`, read back by [`FromStr`].
    pub fn to_compact(&self) -> String {
        self.render("+")
    }

    fn render(&self, sep: &str) -> String {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        for p in self.primes() {
            let part = self.partition(p);
            let mut i = 0;
            while i < part.len() {
                let e = part[i];
                let run = part[i..].iter().take_while(|&&x| x == e).count();
                let base = BigUint::from(p).pow(e);
                if run == 1 {
                    parts.push(format!("Z{base}"));
                } else {
                    parts.push(format!("Z{base}^{run}"));
                }
                i += run;
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(sep)
        }
    }
}

impl fmt::Display for FgAbGroup {
    /// Human rendering, e.g. `Z2^4 (+) Z3` or `Z4 (+) Z2`; the trivial group is `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(" (+) "))
    }
}

impl FromStr for FgAbGroup {
    type Err = AlgebraError;

    /// Accepts `0`, `Z`, `Z^r`, `Zn`, `Zn^k` joined by `+` or `(+)`.
    /// Composite `n` is split into primary parts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(FgAbGroup::trivial());
        }
        let normalized = s.replace("(+)", "+");
        let mut g = FgAbGroup::trivial();
        for term in normalized.split('+') {
            let term = term.trim();
            if term.is_empty() || term == "0" {
                if term.is_empty() {
                    return Err(AlgebraError::Parse(format!("empty summand in '{s}'")));
                }
                continue;
            }
            let rest = term.strip_prefix('Z').ok_or_else(|| {
                AlgebraError::Parse(format!("summand '{term}' must start with Z"))
            })?;
            let (base, count) = match rest.split_once('^') {
                Some((b, c)) => {
                    let c: usize = c.trim().parse().map_err(|_| {
                        AlgebraError::Parse(format!("bad multiplicity in '{term}'"))
                    })?;
                    (b.trim(), c)
                }
                None => (rest.trim(), 1),
            };
            let summand = if base.is_empty() {
                FgAbGroup::free(1)
            } else {
                let n: BigUint = base
                    .parse()
                    .map_err(|_| AlgebraError::Parse(format!("bad order in '{term}'")))?;
                if n.is_zero() {
                    FgAbGroup::free(1)
                } else {
                    FgAbGroup::from_torsion_orders(std::iter::once(n))
                }
            };
            g = g.sum(&summand.power(count));
        }
        Ok(g)
    }
}

/// Direct sum of a family of groups (the empty sum is trivial).
pub fn direct_sum<'a, I: IntoIterator<Item = &'a FgAbGroup>>(groups: I) -> FgAbGroup {
    let mut free_rank = 0;
    let mut torsion = Vec::new();
    for g in groups {
        free_rank += g.free_rank;
        torsion.extend_from_slice(&g.torsion);
    }
    FgAbGroup::new(free_rank, torsion)
}

pub fn are_isomorphic(g: &FgAbGroup, h: &FgAbGroup) -> bool {
    g == h
}

/// Localization at `p`: free rank and `p`-primary torsion are kept.
pub fn localize(g: &FgAbGroup, p: u64) -> Result<FgAbGroup, AlgebraError> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    let mut local = g.primary_part(p);
    local.free_rank = g.free_rank;
    Ok(local)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization by trial division, ascending primes.
///
/// Panics if a prime factor does not fit in `u64`; elementary divisors in
/// this crate are desk-scale.
pub fn factorize(n: &BigUint) -> Vec<(u64, u32)> {
    let mut n = n.clone();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut d = 2u64;
    while BigUint::from(d) * BigUint::from(d) <= n {
        let bd = BigUint::from(d);
        let mut e = 0;
        while (&n % &bd).is_zero() {
            n /= &bd;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        let p = n.to_u64().expect("prime factor beyond u64 range");
        out.push((p, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FgAbGroup {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(g("Z6"), g("Z2+Z3"));
        assert_eq!(g("Z2^4 (+) Z3").to_string(), "Z2^4 (+) Z3");
        assert_eq!(g("Z2+Z4").to_string(), "Z4 (+) Z2");
        assert_eq!(g("0").to_string(), "0");
        assert_eq!(g("Z^2+Z12").to_compact(), "Z^2+Z4+Z3");
        assert!("Q2".parse::<FgAbGroup>().is_err());
        assert!("Z2+".parse::<FgAbGroup>().is_err());
    }

    #[test]
    fn direct_sum_examples() {
        assert!(direct_sum([]).is_trivial());
        assert_eq!(direct_sum([&g("Z2"), &g("Z2+Z3")]), g("Z2^2+Z3"));
        assert_eq!(g("Z2").power(4), g("Z2^4"));
    }

    #[test]
    fn isomorphism_is_canonical_equality() {
        assert!(are_isomorphic(&g("Z6"), &g("Z2+Z3")));
        assert!(!are_isomorphic(&g("Z4"), &g("Z2^2")));
    }

    #[test]
    fn invariant_factor_display_conversion() {
        let inv: Vec<u64> = g("Z2^2+Z3")
            .invariant_factors()
            .iter()
            .map(|x| x.to_u64().unwrap())
            .collect();
        assert_eq!(inv, vec![6, 2]);
    }

    #[test]
    fn element_orders() {
        assert!(!g("Z2^3").has_element_of_order(4));
        assert!(g("Z4+Z2").has_element_of_order(4));
        assert!(g("Z2^3+Z3").has_element_of_order(6));
        assert!(g("0").has_element_of_order(1));
        assert!(!g("Z").has_element_of_order(2));
    }

    #[test]
    fn localization() {
        assert_eq!(localize(&g("Z2^2+Z3"), 3).unwrap(), g("Z3"));
        assert_eq!(localize(&g("Z^1+Z2^3+Z3"), 3).unwrap(), g("Z+Z3"));
        assert_eq!(localize(&g("Z2"), 4), Err(AlgebraError::NotPrime(4)));
    }

    #[test]
    fn factorization() {
        assert_eq!(
            factorize(&BigUint::from(360u32)),
            vec![(2, 3), (3, 2), (5, 1)]
        );
        assert_eq!(factorize(&BigUint::from(1u32)), vec![]);
        assert!(is_prime(13) && !is_prime(1) && !is_prime(91));
    }
}
