//! Diminishing-returns checks: sampled and exhaustive submodularity audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{OracleError, ValuationOracle};
use crate::scalar::Real;
use crate::NodeId;

/// Absolute tolerance for all submodularity comparisons.
pub const SUBMODULARITY_TOL: f64 = 1e-9;

/// One recorded violation of v(u|Y) ≤ v(u|X) for X ⊆ Y, u ∉ Y.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityViolation<R: Real> {
    pub small_base: Vec<NodeId>,
    pub large_base: Vec<NodeId>,
    pub element: NodeId,
    pub margin_small: R,
    pub margin_large: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityReport<R: Real> {
    pub checked: usize,
    pub violations: Vec<SubmodularityViolation<R>>,
}

impl<R: Real> SubmodularityReport<R> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_triple<R: Real>(
    oracle: &ValuationOracle<R>,
    small: &[NodeId],
    large: &[NodeId],
    u: NodeId,
    out: &mut Vec<SubmodularityViolation<R>>,
) -> Result<(), OracleError> {
    let margin_small = oracle.marginal(u, small, None)?;
    let margin_large = oracle.marginal(u, large, None)?;
    if margin_large > margin_small + R::of(SUBMODULARITY_TOL) {
        out.push(SubmodularityViolation {
            small_base: small.to_vec(),
            large_base: large.to_vec(),
            element: u,
            margin_small,
            margin_large,
        });
    }
    Ok(())
}

/// Draw `sample_count` random triples (X ⊆ Y ⊆ N, u ∉ Y) and record any with
/// v(u|Y) > v(u|X) + tolerance. Deterministic under a fixed seed.
pub fn check_submodular<R: Real>(
    oracle: &ValuationOracle<R>,
    sample_count: usize,
    seed: u64,
) -> Result<SubmodularityReport<R>, OracleError> {
    if sample_count == 0 {
        return Err(OracleError::EmptySample);
    }
    let n = oracle.ground_size();
    if n == 0 {
        return Ok(SubmodularityReport {
            checked: 0,
            violations: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..sample_count {
        let u = rng.random_range(0..n) as NodeId;
        let mut large: Vec<NodeId> = Vec::new();
        let mut small: Vec<NodeId> = Vec::new();
        for v in 0..n as NodeId {
            if v == u {
                continue;
            }
            if rng.random_bool(0.5) {
                large.push(v);
                if rng.random_bool(0.5) {
                    small.push(v);
                }
            }
        }
        check_triple(oracle, &small, &large, u, &mut violations)?;
    }
    Ok(SubmodularityReport {
        checked: sample_count,
        violations,
    })
}

/// Check every triple (X ⊆ Y ⊆ N, u ∉ Y). Exponential; refuses n > 12.
pub fn check_submodular_exhaustive<R: Real>(
    oracle: &ValuationOracle<R>,
) -> Result<SubmodularityReport<R>, OracleError> {
    let n = oracle.ground_size();
    if n > 12 {
        return Err(OracleError::GroundSetTooLarge { n, max: 12 });
    }
    let unpack =
        |mask: usize| -> Vec<NodeId> { (0..n as NodeId).filter(|&v| mask >> v & 1 == 1).collect() };
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for large_mask in 0..1usize << n {
        let large = unpack(large_mask);
        // enumerate submasks of large_mask
        let mut small_mask = large_mask;
        loop {
            let small = unpack(small_mask);
            for u in 0..n as NodeId {
                if large_mask >> u & 1 == 1 {
                    continue;
                }
                checked += 1;
                check_triple(oracle, &small, &large, u, &mut violations)?;
            }
            if small_mask == 0 {
                break;
            }
            small_mask = (small_mask - 1) & large_mask;
        }
    }
    Ok(SubmodularityReport {
        checked,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::table::TableValuation;
    use crate::oracle::ValuationOracle;

    fn three_cycle_oracle() -> ValuationOracle<f64> {
        ValuationOracle::coverage(
            crate::oracle::coverage::CoverageValuation::new(vec![vec![1], vec![2], vec![0]])
                .unwrap(),
        )
    }

    #[test]
    fn coverage_sample_has_no_violations() {
        let report = check_submodular(&three_cycle_oracle(), 100, 7).unwrap();
        assert_eq!(report.checked, 100);
        assert!(report.is_clean());
    }

    #[test]
    fn coverage_exhaustive_is_clean() {
        let report = check_submodular_exhaustive(&three_cycle_oracle()).unwrap();
        assert!(report.checked > 0);
        assert!(report.is_clean());
    }

    #[test]
    fn supermodular_table_is_flagged() {
        // v(∅)=0, v({0})=0, v({1})=0, v({0,1})=1: supermodular by construction.
        let table = TableValuation::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let oracle = ValuationOracle::table(table);
        let report = check_submodular_exhaustive(&oracle).unwrap();
        assert!(!report.is_clean());
    }

    #[test]
    fn zero_samples_rejected() {
        let err = check_submodular(&three_cycle_oracle(), 0, 1).unwrap_err();
        assert!(matches!(err, OracleError::EmptySample));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = check_submodular(&three_cycle_oracle(), 50, 11).unwrap();
        let b = check_submodular(&three_cycle_oracle(), 50, 11).unwrap();
        assert_eq!(a, b);
    }
}
