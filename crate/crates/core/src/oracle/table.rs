//! Explicit lookup-table valuation over all subsets of a small ground set.
//! Primarily a test fixture for submodularity checking and brute-force work.

use crate::oracle::OracleError;
use crate::scalar::Real;
use crate::NodeId;

pub const TABLE_MAX_GROUND: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TableValuation<R: Real> {
    n: usize,
    /// values[mask] = v(S) where bit u of mask means u ∈ S.
    values: Vec<R>,
}

impl<R: Real> TableValuation<R> {
    /// Build from a table covering all 2^n subsets, indexed by bitmask.
    /// The entry for the empty set must be exactly zero.
    pub fn new(values: Vec<R>) -> Result<Self, OracleError> {
        let len = values.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(OracleError::TableNotComplete { len });
        }
        let n = len.trailing_zeros() as usize;
        if n > TABLE_MAX_GROUND {
            return Err(OracleError::TableTooLarge {
                n,
                max: TABLE_MAX_GROUND,
            });
        }
        if values[0] != R::zero() {
            return Err(OracleError::NotNormalized);
        }
        if let Some(mask) = values.iter().position(|v| *v < R::zero() || !v.is_finite()) {
            return Err(OracleError::NegativeTableEntry { mask });
        }
        Ok(Self { n, values })
    }

    /// Modular valuation from per-node weights (convenience for tests).
    pub fn modular(weights: &[R]) -> Result<Self, OracleError> {
        let n = weights.len();
        let values = (0..1usize << n)
            .map(|mask| {
                let mut acc = R::zero();
                for (u, &w) in weights.iter().enumerate() {
                    if mask >> u & 1 == 1 {
                        acc += w;
                    }
                }
                acc
            })
            .collect();
        Self::new(values)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub(crate) fn value(&self, set: &[NodeId]) -> R {
        let mut mask = 0usize;
        for &u in set {
            mask |= 1 << u;
        }
        self.values[mask]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_mask() {
        // v(∅)=0, v({0})=1, v({1})=2, v({0,1})=2.5
        let t = TableValuation::new(vec![0.0, 1.0, 2.0, 2.5]).unwrap();
        assert_eq!(t.value(&[]), 0.0);
        assert_eq!(t.value(&[0]), 1.0);
        assert_eq!(t.value(&[1]), 2.0);
        assert_eq!(t.value(&[0, 1]), 2.5);
    }

    #[test]
    fn incomplete_table_rejected() {
        assert!(matches!(
            TableValuation::new(vec![0.0, 1.0, 2.0]).unwrap_err(),
            OracleError::TableNotComplete { len: 3 }
        ));
    }

    #[test]
    fn unnormalized_table_rejected() {
        assert!(matches!(
            TableValuation::new(vec![0.5, 1.0]).unwrap_err(),
            OracleError::NotNormalized
        ));
    }

    #[test]
    fn modular_helper() {
        let t = TableValuation::modular(&[3.0, 1.0]).unwrap();
        assert_eq!(t.value(&[0, 1]), 4.0);
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(matches!(
            TableValuation::new(vec![0.0, -1.0]).unwrap_err(),
            OracleError::NegativeTableEntry { mask: 1 }
        ));
    }
}
