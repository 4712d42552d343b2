//! Normalized submodular valuation functions behind a uniform query-counting
//! oracle interface.
//!
//! Every oracle satisfies v(∅) = 0 and returns a finite value for any subset
//! of its ground set. `evaluate` bumps the query counter by exactly one per
//! call; verification code that must not pollute mechanism query counts uses
//! `evaluate_uncounted`.

pub mod coverage;
pub mod io;
pub mod similarity;
pub mod submodularity;
pub mod table;

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::scalar::Real;
use crate::NodeId;

pub use coverage::CoverageValuation;
pub use io::{load_coverage_graph, load_vectors_bin, load_vectors_csv, write_vectors_bin};
pub use similarity::SimilarityDiversityValuation;
pub use submodularity::{
    check_submodular, check_submodular_exhaustive, SubmodularityReport, SubmodularityViolation,
    SUBMODULARITY_TOL,
};
pub use table::TableValuation;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("node id {node} out of range for ground set of size {n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("element {0} is already a member of the base set")]
    MarginalMember(NodeId),
    #[error("ground set must be non-empty")]
    EmptyGroundSet,
    #[error("vectors must have dimension at least 1")]
    ZeroDimension,
    #[error("vector {index} has dimension {got}, expected {expected}")]
    RaggedVectors {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("vector {index} has a negative or non-finite entry")]
    NegativeVectorEntry { index: usize },
    #[error("similarity matrix row {row} has length {len}, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("similarity matrix is not symmetric at ({u},{v})")]
    AsymmetricSimilarity { u: usize, v: usize },
    #[error("similarity entry ({u},{v}) is negative or non-finite")]
    NegativeSimilarity { u: usize, v: usize },
    #[error("table length {len} does not cover all subsets of a ground set")]
    TableNotComplete { len: usize },
    #[error("table entry for subset mask {mask} is negative or non-finite")]
    NegativeTableEntry { mask: usize },
    #[error("table ground set of size {n} exceeds the limit {max}")]
    TableTooLarge { n: usize, max: usize },
    #[error("valuation of the empty set must be zero")]
    NotNormalized,
    #[error("sample_count must be at least 1")]
    EmptySample,
    #[error("ground set of size {n} exceeds the limit {max} for exhaustive checks")]
    GroundSetTooLarge { n: usize, max: usize },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: expected two node tokens, found {found}")]
    EdgeTokenCount { line: usize, found: usize },
    #[error("line {line}: invalid node token {token:?}")]
    BadNodeToken { line: usize, token: String },
    #[error("line {line}: invalid real token {token:?}")]
    BadRealToken { line: usize, token: String },
    #[error("line {line}: vector has {got} entries, expected {expected}")]
    RaggedLine {
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error("binary vector payload has {got} bytes, expected {expected}")]
    BinaryTruncated { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(Box<OracleError>),
}

/// The concrete set function behind an oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationKind<R: Real> {
    Coverage(CoverageValuation),
    SimilarityDiversity(SimilarityDiversityValuation<R>),
    Table(TableValuation<R>),
}

/// A queryable set function v: 2^N → R with a monotone query counter.
///
/// The counter is atomic so one oracle may be shared across concurrently
/// running auction instances; benchmarks report per-run deltas.
#[derive(Debug)]
pub struct ValuationOracle<R: Real> {
    kind: ValuationKind<R>,
    queries: AtomicU64,
}

impl<R: Real> Clone for ValuationOracle<R> {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            queries: AtomicU64::new(self.queries.load(Ordering::Relaxed)),
        }
    }
}

impl<R: Real> PartialEq for ValuationOracle<R> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl<R: Real> ValuationOracle<R> {
    pub fn coverage(cv: CoverageValuation) -> Self {
        Self::from_kind(ValuationKind::Coverage(cv))
    }

    pub fn similarity_diversity(sd: SimilarityDiversityValuation<R>) -> Self {
        Self::from_kind(ValuationKind::SimilarityDiversity(sd))
    }

    pub fn table(t: TableValuation<R>) -> Self {
        Self::from_kind(ValuationKind::Table(t))
    }

    pub fn from_kind(kind: ValuationKind<R>) -> Self {
        Self {
            kind,
            queries: AtomicU64::new(0),
        }
    }

    /// Clone the set function with a zeroed query counter.
    pub fn fresh_clone(&self) -> Self {
        Self::from_kind(self.kind.clone())
    }

    pub fn kind(&self) -> &ValuationKind<R> {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        match &self.kind {
            ValuationKind::Coverage(cv) => cv.ground_size(),
            ValuationKind::SimilarityDiversity(sd) => sd.ground_size(),
            ValuationKind::Table(t) => t.ground_size(),
        }
    }

    /// Queries answered so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn check_members(&self, set: &[NodeId]) -> Result<(), OracleError> {
        let n = self.ground_size();
        for &u in set {
            if u as usize >= n {
                return Err(OracleError::NodeOutOfRange { node: u, n });
            }
        }
        Ok(())
    }

    fn raw_value(&self, set: &[NodeId]) -> R {
        match &self.kind {
            ValuationKind::Coverage(cv) => R::of_usize(cv.value(set)),
            ValuationKind::SimilarityDiversity(sd) => sd.value(set),
            ValuationKind::Table(t) => t.value(set),
        }
    }

    /// v(S); counts one query.
    pub fn evaluate(&self, set: &[NodeId]) -> Result<R, OracleError> {
        self.check_members(set)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.raw_value(set))
    }

    /// v(S) without touching the query counter. For verification oracles and
    /// harness bookkeeping that must not distort mechanism query counts.
    pub fn evaluate_uncounted(&self, set: &[NodeId]) -> Result<R, OracleError> {
        self.check_members(set)?;
        Ok(self.raw_value(set))
    }

    /// v(S ∪ {u}) − v(S) for u ∉ S. With `cached_base` = v(S) supplied this
    /// consumes exactly one new query, otherwise two.
    pub fn marginal(
        &self,
        u: NodeId,
        set: &[NodeId],
        cached_base: Option<R>,
    ) -> Result<R, OracleError> {
        if set.contains(&u) {
            return Err(OracleError::MarginalMember(u));
        }
        let base = match cached_base {
            Some(b) => b,
            None => self.evaluate(set)?,
        };
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(u);
        Ok(self.evaluate(&extended)? - base)
    }
}
