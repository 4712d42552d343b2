//! Coverage valuation v(S) = |∪_{u∈S} T(u)| over per-node neighbor sets.

use crate::oracle::OracleError;
use crate::NodeId;

/// Monotone submodular coverage function backed by out-neighbor sets.
///
/// Each node `u` has a target set `T(u)`; the value of `S` is the number of
/// distinct nodes covered by the union of the targets of its members. The
/// value is integer-valued and bounded by the ground-set size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageValuation {
    n: usize,
    adjacency: Vec<Vec<NodeId>>,
}

impl CoverageValuation {
    /// Build from explicit neighbor sets. Targets are sorted and deduplicated;
    /// self-loops are allowed.
    pub fn new(adjacency: Vec<Vec<NodeId>>) -> Result<Self, OracleError> {
        let n = adjacency.len();
        let mut adjacency = adjacency;
        for targets in &mut adjacency {
            for &t in targets.iter() {
                if t as usize >= n {
                    return Err(OracleError::NodeOutOfRange { node: t, n });
                }
            }
            targets.sort_unstable();
            targets.dedup();
        }
        Ok(Self { n, adjacency })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// The target set T(u), sorted.
    pub fn targets(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u as usize]
    }

    pub(crate) fn value(&self, set: &[NodeId]) -> usize {
        let words = self.n.div_ceil(64);
        let mut covered = vec![0u64; words];
        for &u in set {
            for &t in &self.adjacency[u as usize] {
                covered[(t / 64) as usize] |= 1u64 << (t % 64);
            }
        }
        covered.iter().map(|w| w.count_ones() as usize).sum()
    }
}
