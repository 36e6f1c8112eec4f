use std::fmt;
use std::str::FromStr;

/// Families of building blocks for connected sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ComplexProjective,
    QuaternionicProjective,
    OctonionicProjective,
    Sphere,
    /// `S^n x S^n`, indexed by `n`.
    SphereProduct,
}

impl Family {
    fn prefix(self) -> &'static str {
        match self {
            Family::ComplexProjective => "CP",
            Family::QuaternionicProjective => "HP",
            Family::OctonionicProjective => "OP",
            Family::Sphere => "S",
            Family::SphereProduct => "SxS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("unknown block `{0}`")]
    Unknown(String),
    #[error("block index must be positive: `{0}`")]
    ZeroIndex(String),
    #[error("octonionic projective space OP{0} does not exist")]
    Octonionic(u32),
}

/// A building block: `CPn`, `HPn`, `OP2`, `Sn` or `SxSn`.
///
/// `OP1` is normalized to `S8` on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    family: Family,
    index: u32,
}

impl BlockId {
    pub fn new(family: Family, index: u32) -> Result<Self, BlockError> {
        if index == 0 {
            return Err(BlockError::ZeroIndex(format!("{}0", family.prefix())));
        }
        match (family, index) {
            (Family::OctonionicProjective, 1) => Ok(BlockId {
                family: Family::Sphere,
                index: 8,
            }),
            (Family::OctonionicProjective, 2) => Ok(BlockId { family, index }),
            (Family::OctonionicProjective, n) => Err(BlockError::Octonionic(n)),
            _ => Ok(BlockId { family, index }),
        }
    }

    pub fn cp(n: u32) -> Self {
        Self::new(Family::ComplexProjective, n).expect("valid CP index")
    }

    pub fn hp(n: u32) -> Self {
        Self::new(Family::QuaternionicProjective, n).expect("valid HP index")
    }

    pub fn op2() -> Self {
        BlockId {
            family: Family::OctonionicProjective,
            index: 2,
        }
    }

    pub fn sphere(n: u32) -> Self {
        Self::new(Family::Sphere, n).expect("valid sphere dimension")
    }

    pub fn sphere_product(n: u32) -> Self {
        Self::new(Family::SphereProduct, n).expect("valid sphere dimension")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Real dimension.
    pub fn dimension(&self) -> u32 {
        match self.family {
            Family::ComplexProjective => 2 * self.index,
            Family::QuaternionicProjective => 4 * self.index,
            Family::OctonionicProjective => 16,
            Family::Sphere => self.index,
            Family::SphereProduct => 2 * self.index,
        }
    }

    pub fn is_sphere(&self) -> bool {
        self.family == Family::Sphere
    }

    /// The block whose concordance set is the skeleton set of `self`, for
    /// projective spaces built from their predecessor by one top cell.
    pub fn predecessor(&self) -> Option<BlockId> {
        match self.family {
            Family::ComplexProjective if self.index > 1 => Some(Self::cp(self.index - 1)),
            Family::QuaternionicProjective if self.index > 1 => Some(Self::hp(self.index - 1)),
            Family::OctonionicProjective => Some(Self::sphere(8)),
            _ => None,
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.prefix(), self.index)
    }
}

impl FromStr for BlockId {
    type Err = BlockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        // longest prefix first so that `SxS` is not read as `S`
        let families = [
            Family::SphereProduct,
            Family::ComplexProjective,
            Family::QuaternionicProjective,
            Family::OctonionicProjective,
            Family::Sphere,
        ];
        for family in families {
            if let Some(rest) = t.strip_prefix(family.prefix()) {
                if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                    break;
                }
                let index: u32 = rest
                    .parse()
                    .map_err(|_| BlockError::Unknown(t.to_string()))?;
                return BlockId::new(family, index).map_err(|e| match e {
                    BlockError::ZeroIndex(_) => BlockError::ZeroIndex(t.to_string()),
                    other => other,
                });
            }
        }
        Err(BlockError::Unknown(t.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["CP5", "HP3", "OP2", "S8", "SxS6"] {
            assert_eq!(s.parse::<BlockId>().unwrap().to_string(), s);
        }
        assert_eq!("OP1".parse::<BlockId>().unwrap(), BlockId::sphere(8));
        assert!("OP3".parse::<BlockId>().is_err());
        assert!("CP0".parse::<BlockId>().is_err());
        assert!("XP2".parse::<BlockId>().is_err());
        assert!("CP".parse::<BlockId>().is_err());
        assert!("SxS".parse::<BlockId>().is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(BlockId::cp(5).dimension(), 10);
        assert_eq!(BlockId::hp(4).dimension(), 16);
        assert_eq!(BlockId::op2().dimension(), 16);
        assert_eq!(BlockId::sphere_product(6).dimension(), 12);
        assert_eq!(BlockId::sphere(7).dimension(), 7);
    }

    #[test]
    fn predecessors() {
        assert_eq!(BlockId::cp(5).predecessor(), Some(BlockId::cp(4)));
        assert_eq!(BlockId::hp(2).predecessor(), Some(BlockId::hp(1)));
        assert_eq!(BlockId::op2().predecessor(), Some(BlockId::sphere(8)));
        assert_eq!(BlockId::sphere(8).predecessor(), None);
    }
}
