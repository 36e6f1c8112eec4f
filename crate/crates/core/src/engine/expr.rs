use std::collections::BTreeMap;
use std::fmt;

use crate::knowledge::BlockId;

use super::EngineError;

/// A connected sum `#_{k_1} B_1 # ... # #_{k_r} B_r` of blocks of one dimension.
///
/// Summands are kept sorted by block with repeated blocks merged.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifoldExpr {
    summands: Vec<(BlockId, u64)>,
}

pub const MIN_DIMENSION: u32 = 5;

impl ManifoldExpr {
    pub fn new<I: IntoIterator<Item = (BlockId, u64)>>(summands: I) -> Result<Self, EngineError> {
        let mut merged: BTreeMap<BlockId, u64> = BTreeMap::new();
        for (block, k) in summands {
            if k == 0 {
                return Err(EngineError::ZeroMultiplicity(block));
            }
            *merged.entry(block).or_default() += k;
        }
        if merged.is_empty() {
            return Err(EngineError::EmptyExpression);
        }
        let dims: Vec<u32> = merged.keys().map(|b| b.dimension()).collect();
        if dims.iter().any(|&d| d != dims[0]) {
            return Err(EngineError::DimensionMismatch {
                blocks: merged.keys().map(|b| (*b, b.dimension())).collect(),
            });
        }
        if dims[0] < MIN_DIMENSION {
            return Err(EngineError::DimensionTooSmall(dims[0]));
        }
        Ok(ManifoldExpr {
            summands: merged.into_iter().collect(),
        })
    }

    /// `#_k block`.
    pub fn single(block: BlockId, k: u64) -> Result<Self, EngineError> {
        Self::new([(block, k)])
    }

    pub fn summands(&self) -> &[(BlockId, u64)] {
        &self.summands
    }

    pub fn dimension(&self) -> u32 {
        self.summands[0].0.dimension()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.summands.iter().map(|(_, k)| k).sum()
    }

    pub fn multiplicity(&self, block: BlockId) -> u64 {
        self.summands
            .iter()
            .find(|(b, _)| *b == block)
            .map_or(0, |(_, k)| *k)
    }

    /// The block and multiplicity of a sum of copies of one block.
    pub fn as_homogeneous(&self) -> Option<(BlockId, u64)> {
        match self.summands.as_slice() {
            [(b, k)] => Some((*b, *k)),
            _ => None,
        }
    }

    pub fn connected_sum(&self, other: &ManifoldExpr) -> Result<ManifoldExpr, EngineError> {
        Self::new(self.summands.iter().chain(&other.summands).copied())
    }

    /// Drops sphere summands, which do not change the manifold; a sum of
    /// spheres alone becomes a single sphere.
    pub fn without_spheres(&self) -> ManifoldExpr {
        let rest: Vec<(BlockId, u64)> = self
            .summands
            .iter()
            .copied()
            .filter(|(b, _)| !b.is_sphere())
            .collect();
        if rest.is_empty() {
            ManifoldExpr {
                summands: vec![(self.summands[0].0, 1)],
            }
        } else {
            ManifoldExpr { summands: rest }
        }
    }
}

impl fmt::Display for ManifoldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .summands
            .iter()
            .map(|(b, k)| {
                if *k == 1 {
                    b.to_string()
                } else {
                    format!("{k}*{b}")
                }
            })
            .collect();
        f.write_str(&parts.join(" # "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_validates() {
        let e = ManifoldExpr::new([
            (BlockId::hp(3), 2),
            (BlockId::cp(6), 1),
            (BlockId::cp(6), 1),
        ])
        .unwrap();
        assert_eq!(e.to_string(), "2*CP6 # 2*HP3");
        assert_eq!(e.dimension(), 12);
        assert_eq!(e.total_multiplicity(), 4);
        assert!(matches!(
            ManifoldExpr::new([(BlockId::cp(4), 1), (BlockId::hp(3), 1)]),
            Err(EngineError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ManifoldExpr::single(BlockId::cp(2), 1),
            Err(EngineError::DimensionTooSmall(4))
        ));
        assert!(matches!(
            ManifoldExpr::single(BlockId::cp(5), 0),
            Err(EngineError::ZeroMultiplicity(_))
        ));
        assert!(matches!(
            ManifoldExpr::new([]),
            Err(EngineError::EmptyExpression)
        ));
    }

    #[test]
    fn spheres_drop_out() {
        let e = ManifoldExpr::new([(BlockId::cp(4), 2), (BlockId::sphere(8), 3)]).unwrap();
        assert_eq!(e.without_spheres().to_string(), "2*CP4");
        let s = ManifoldExpr::single(BlockId::sphere(8), 3).unwrap();
        assert_eq!(s.without_spheres().to_string(), "S8");
    }
}
