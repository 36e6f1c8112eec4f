//! Value syntax of knowledge-base facts.

use std::fmt;

use num_bigint::BigInt;

use crate::abelian::{FgAbGroup, IntMatrix};
use crate::extension::Constraint;

/// An induced map `h*: SkeletonSet(block) -> Θ_{dim-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapSpec {
    /// Matrix against the canonical presentations of domain and target.
    Matrix(IntMatrix),
    Trivial,
    Mono,
    Epi {
        kernel: Option<FgAbGroup>,
    },
    ImageKernel {
        image: FgAbGroup,
        kernel: FgAbGroup,
    },
}

impl MapSpec {
    pub fn is_trivial(&self) -> bool {
        match self {
            MapSpec::Trivial => true,
            MapSpec::Matrix(m) => m.is_zero(),
            MapSpec::ImageKernel { image, .. } => image.is_trivial(),
            _ => false,
        }
    }
}

/// A concordance inertia group as a subgroup of `Θ_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InertiaSpec {
    /// Determined by its class: the trivial subgroup or all of `Θ_n`.
    Class(FgAbGroup),
    /// Generators (columns) in the canonical presentation of `Θ_n`.
    Generators(IntMatrix),
}

/// `coeff * k + constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Linear {
    pub coeff: i64,
    pub constant: i64,
}

impl Linear {
    pub fn constant(c: i64) -> Self {
        Linear {
            coeff: 0,
            constant: c,
        }
    }

    pub fn eval(&self, k: u64) -> i64 {
        self.coeff * k as i64 + self.constant
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Linear { coeff, constant } = *self;
        if coeff == 0 {
            return write!(f, "{constant}");
        }
        if coeff == 1 && constant == 0 {
            return write!(f, "k");
        }
        let lead = match coeff {
            1 => String::new(),
            -1 => "-".to_string(),
            c => c.to_string(),
        };
        match constant {
            0 => write!(f, "({lead}k)"),
            c if c > 0 => write!(f, "({lead}k+{c})"),
            c => write!(f, "({lead}k-{})", -c),
        }
    }
}

/// A group depending on a multiplicity `k`: `⊕ (Z_n)^{a k + b}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupTemplate {
    pub summands: Vec<(u64, Linear)>,
}

impl GroupTemplate {
    pub fn instantiate(&self, k: u64) -> Result<FgAbGroup, String> {
        let mut g = FgAbGroup::trivial();
        for &(n, count) in &self.summands {
            let c = count.eval(k);
            if c < 0 {
                return Err(format!(
                    "template {self} has negative multiplicity at k={k}"
                ));
            }
            g = g.sum(&FgAbGroup::cyclic(n).power(c as usize));
        }
        Ok(g)
    }
}

impl fmt::Display for GroupTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .summands
            .iter()
            .map(|(n, c)| {
                if *c == Linear::constant(1) {
                    format!("Z{n}")
                } else {
                    format!("Z{n}^{c}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// A constraint on the middle group of `#_k B` as a function of `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HintTemplate {
    Splits,
    NoElementOfOrder(u64),
    QuotientOf {
        group: GroupTemplate,
        prime: Option<u64>,
    },
    SubgroupOf {
        group: GroupTemplate,
        prime: Option<u64>,
    },
    LocalSplit(u64),
}

impl HintTemplate {
    pub fn instantiate(&self, k: u64) -> Result<Constraint, String> {
        Ok(match self {
            HintTemplate::Splits => Constraint::Splits,
            HintTemplate::NoElementOfOrder(n) => Constraint::NoElementOfOrder(*n),
            HintTemplate::LocalSplit(p) => Constraint::LocalSplit(*p),
            HintTemplate::QuotientOf { group, prime } => Constraint::QuotientOf {
                group: group.instantiate(k)?,
                prime: *prime,
            },
            HintTemplate::SubgroupOf { group, prime } => Constraint::SubgroupOf {
                group: group.instantiate(k)?,
                prime: *prime,
            },
        })
    }
}

impl fmt::Display for HintTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |p: &Option<u64>| p.map(|p| format!("@{p}")).unwrap_or_default();
        match self {
            HintTemplate::Splits => write!(f, "splits"),
            HintTemplate::NoElementOfOrder(n) => write!(f, "no_element_of_order({n})"),
            HintTemplate::LocalSplit(p) => write!(f, "local_split({p})"),
            HintTemplate::QuotientOf { group, prime } => {
                write!(f, "quotient_of({group}){}", at(prime))
            }
            HintTemplate::SubgroupOf { group, prime } => {
                write!(f, "subgroup_of({group}){}", at(prime))
            }
        }
    }
}

/// The value of a fact; which variant is allowed depends on the fact kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactValue {
    Group(FgAbGroup),
    Map(MapSpec),
    Inertia(InertiaSpec),
    Flag(bool),
    Hints(Vec<HintTemplate>),
    /// Class of the intersection of two images, `None` when not known.
    Overlap(Option<FgAbGroup>),
}

impl fmt::Display for FactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactValue::Group(g) => write!(f, "{}", g.to_compact()),
            FactValue::Map(m) => match m {
                MapSpec::Matrix(m) => write!(f, "matrix{m}"),
                MapSpec::Trivial => write!(f, "tag:trivial"),
                MapSpec::Mono => write!(f, "tag:mono"),
                MapSpec::Epi { kernel: None } => write!(f, "tag:epi"),
                MapSpec::Epi { kernel: Some(k) } => write!(f, "tag:epi,kernel={}", k.to_compact()),
                MapSpec::ImageKernel { image, kernel } => {
                    write!(
                        f,
                        "tag:image={},kernel={}",
                        image.to_compact(),
                        kernel.to_compact()
                    )
                }
            },
            FactValue::Inertia(InertiaSpec::Class(g)) => write!(f, "{}", g.to_compact()),
            FactValue::Inertia(InertiaSpec::Generators(m)) => write!(f, "subgroup{m}"),
            FactValue::Flag(b) => write!(f, "{b}"),
            FactValue::Hints(hs) => {
                let parts: Vec<String> = hs.iter().map(|h| h.to_string()).collect();
                write!(f, "{}", parts.join("; "))
            }
            FactValue::Overlap(None) => write!(f, "unknown"),
            FactValue::Overlap(Some(g)) => write!(f, "{}", g.to_compact()),
        }
    }
}

pub(crate) fn parse_group(s: &str) -> Result<FgAbGroup, String> {
    s.trim()
        .parse()
        .map_err(|e| format!("bad group `{}`: {e}", s.trim()))
}

pub(crate) fn parse_flag(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected `true` or `false`, got `{other}`")),
    }
}

pub(crate) fn parse_map(s: &str) -> Result<MapSpec, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("matrix") {
        let rows = parse_rows(rest)?;
        if rows.is_empty() {
            return Err("empty matrix; use tag:trivial for maps into the trivial group".into());
        }
        return Ok(MapSpec::Matrix(IntMatrix::from_rows(&rows)));
    }
    let Some(tag) = s.strip_prefix("tag:") else {
        return Err(format!("expected `matrix[[...]]` or `tag:...`, got `{s}`"));
    };
    let mut parts = tag.split(',').map(str::trim);
    let head = parts.next().unwrap_or_default();
    let mut fields = Vec::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in `{p}`"))?;
        fields.push((k.trim(), parse_group(v)?));
    }
    let field = |name: &str| {
        fields
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, g)| g.clone())
    };
    let allow = |names: &[&str]| -> Result<(), String> {
        match fields.iter().find(|(k, _)| !names.contains(k)) {
            Some((k, _)) => Err(format!(
                "unexpected field `{k}` for tag `{}`",
                head.split('=').next().unwrap_or(head)
            )),
            None => Ok(()),
        }
    };
    if let Some(image) = head.strip_prefix("image=") {
        allow(&["kernel"])?;
        let kernel = field("kernel").ok_or("tag image=... requires kernel=...")?;
        return Ok(MapSpec::ImageKernel {
            image: parse_group(image)?,
            kernel,
        });
    }
    match head {
        "trivial" => allow(&[]).map(|_| MapSpec::Trivial),
        "mono" => allow(&[]).map(|_| MapSpec::Mono),
        "epi" => allow(&["kernel"]).map(|_| MapSpec::Epi {
            kernel: field("kernel"),
        }),
        other => Err(format!("unknown map tag `{other}`")),
    }
}

pub(crate) fn parse_inertia(s: &str) -> Result<InertiaSpec, String> {
    let s = s.trim();
    match s.strip_prefix("subgroup") {
        Some(rest) => {
            let rows = parse_rows(rest)?;
            if rows.is_empty() {
                return Err("empty subgroup matrix; use `0`".into());
            }
            Ok(InertiaSpec::Generators(IntMatrix::from_rows(&rows)))
        }
        None => parse_group(s).map(InertiaSpec::Class),
    }
}

pub(crate) fn parse_overlap(s: &str) -> Result<Option<FgAbGroup>, String> {
    match s.trim() {
        "unknown" => Ok(None),
        other => parse_group(other).map(Some),
    }
}

pub(crate) fn parse_hints(s: &str) -> Result<Vec<HintTemplate>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|h| !h.is_empty())
        .map(parse_hint)
        .collect()
}

fn parse_hint(s: &str) -> Result<HintTemplate, String> {
    let (body, prime) = match s.rsplit_once('@') {
        Some((b, p)) => {
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad prime in `{s}`"))?;
            (b.trim(), Some(p))
        }
        None => (s, None),
    };
    if body == "splits" {
        return no_prime(prime, s).map(|_| HintTemplate::Splits);
    }
    let (name, arg) = body
        .strip_suffix(')')
        .and_then(|b| b.split_once('('))
        .ok_or_else(|| format!("malformed hint `{s}`"))?;
    let int = |a: &str| {
        a.trim()
            .parse::<u64>()
            .map_err(|_| format!("bad integer in `{s}`"))
    };
    match name.trim() {
        "no_element_of_order" => {
            no_prime(prime, s).and(int(arg).map(HintTemplate::NoElementOfOrder))
        }
        "local_split" => no_prime(prime, s).and(int(arg).map(HintTemplate::LocalSplit)),
        "quotient_of" => Ok(HintTemplate::QuotientOf {
            group: parse_template(arg)?,
            prime,
        }),
        "subgroup_of" => Ok(HintTemplate::SubgroupOf {
            group: parse_template(arg)?,
            prime,
        }),
        other => Err(format!("unknown hint `{other}`")),
    }
}

fn no_prime(prime: Option<u64>, s: &str) -> Result<(), String> {
    match prime {
        Some(_) => Err(format!("hint `{s}` takes no prime")),
        None => Ok(()),
    }
}

pub(crate) fn parse_template(s: &str) -> Result<GroupTemplate, String> {
    let s = s.trim();
    if s == "0" {
        return Ok(GroupTemplate { summands: vec![] });
    }
    // exponents such as (k+1) contain '+', so pieces inside parentheses are rejoined
    let mut joined: Vec<String> = Vec::new();
    let mut depth = 0i32;
    for part in s.split('+').map(str::trim) {
        if depth > 0 {
            let last = joined.last_mut().expect("open paren");
            last.push('+');
            last.push_str(part);
        } else {
            joined.push(part.to_string());
        }
        depth += part.matches('(').count() as i32 - part.matches(')').count() as i32;
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    let summands = joined
        .iter()
        .map(|p| parse_summand(p).map_err(|e| format!("bad template `{s}`: {e}")))
        .collect::<Result<_, _>>()?;
    Ok(GroupTemplate { summands })
}

fn parse_summand(s: &str) -> Result<(u64, Linear), String> {
    let body = s
        .strip_prefix('Z')
        .ok_or_else(|| format!("expected Zn, got `{s}`"))?;
    let (n, exp) = match body.split_once('^') {
        Some((n, e)) => (n, parse_linear(e)?),
        None => (body, Linear::constant(1)),
    };
    let n: u64 = n
        .trim()
        .parse()
        .map_err(|_| format!("bad cyclic order in `{s}`"))?;
    if n < 2 {
        return Err(format!("cyclic order must be at least 2 in `{s}`"));
    }
    Ok((n, exp))
}

fn parse_linear(s: &str) -> Result<Linear, String> {
    let t = s.trim();
    let t = t
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .unwrap_or(t)
        .replace(' ', "");
    let bad = || format!("bad exponent `{s}`");
    let Some(kpos) = t.find('k') else {
        return t.parse().map(Linear::constant).map_err(|_| bad());
    };
    let coeff = match &t[..kpos] {
        "" | "+" => 1,
        "-" => -1,
        c => c.parse().map_err(|_| bad())?,
    };
    let rest = &t[kpos + 1..];
    let constant = match rest {
        "" => 0,
        r if r.starts_with('+') => r[1..].parse().map_err(|_| bad())?,
        r if r.starts_with('-') => r.parse().map_err(|_| bad())?,
        _ => return Err(bad()),
    };
    Ok(Linear { coeff, constant })
}

/// `[[1,0],[0,1]]` as rows.
fn parse_rows(s: &str) -> Result<Vec<Vec<BigInt>>, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| format!("expected [[...]], got `{s}`"))?;
    if inner.is_empty() {
        return Ok(vec![]);
    }
    let inner = inner
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| format!("expected [[...]], got `{s}`"))?;
    let rows: Vec<Vec<BigInt>> = inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.parse::<BigInt>()
                        .map_err(|_| format!("bad matrix entry `{x}`"))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(format!("ragged matrix `{s}`"));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_round_trip() {
        for s in [
            "tag:trivial",
            "tag:mono",
            "tag:epi",
            "tag:epi,kernel=Z2",
            "tag:image=Z2,kernel=Z2+Z3",
            "matrix[[1,0,0]]",
        ] {
            let v = FactValue::Map(parse_map(s).unwrap());
            assert_eq!(v.to_string(), s);
        }
        assert!(parse_map("tag:epi,image=Z2").is_err());
        assert!(parse_map("tag:image=Z2").is_err());
        assert!(parse_map("tag:none").is_err());
        assert!(parse_map("matrix[[1],[2,3]]").is_err());
    }

    #[test]
    fn templates() {
        let t = parse_template("Z2^k+Z2+Z3").unwrap();
        assert_eq!(t.to_string(), "Z2^k+Z2+Z3");
        assert_eq!(t.instantiate(3).unwrap().to_compact(), "Z2^4+Z3");
        let t = parse_template("Z2^(2k)").unwrap();
        assert_eq!(t.instantiate(2).unwrap().to_compact(), "Z2^4");
        let t = parse_template("Z2^(k+1)+Z3^(k-1)").unwrap();
        assert_eq!(t.to_string(), "Z2^(k+1)+Z3^(k-1)");
        assert_eq!(t.instantiate(1).unwrap().to_compact(), "Z2^2");
        assert!(parse_template("Z3^(k-2)").unwrap().instantiate(1).is_err());
        assert_eq!(
            parse_template("0").unwrap().instantiate(4).unwrap(),
            FgAbGroup::trivial()
        );
        assert!(parse_template("Z1^k").is_err());
        assert!(parse_template("Z2^(k").is_err());
    }

    #[test]
    fn hints() {
        let hs = parse_hints("quotient_of(Z2^k+Z2+Z3)@2; no_element_of_order(4); splits").unwrap();
        assert_eq!(hs.len(), 3);
        assert_eq!(
            FactValue::Hints(hs).to_string(),
            "quotient_of(Z2^k+Z2+Z3)@2; no_element_of_order(4); splits"
        );
        assert!(parse_hints("splits@2").is_err());
        assert!(parse_hints("widen(Z2)").is_err());
    }

    #[test]
    fn inertia_and_overlap() {
        assert_eq!(
            parse_inertia("0").unwrap(),
            InertiaSpec::Class(FgAbGroup::trivial())
        );
        assert!(matches!(
            parse_inertia("subgroup[[1],[0]]").unwrap(),
            InertiaSpec::Generators(_)
        ));
        assert_eq!(parse_overlap("unknown").unwrap(), None);
        assert_eq!(parse_overlap("Z2").unwrap(), Some(FgAbGroup::cyclic(2)));
    }
}
