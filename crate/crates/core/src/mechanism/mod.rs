//! Budget-feasible descending-clock mechanisms: BFM-SWM for submodular
//! welfare maximization and BFM-VM for valuation maximization.
//!
//! Both mechanisms run a multi-round clock auction over geometrically growing
//! thresholds ρ_t, maintain ℓ disjoint candidate sets per round, and post only
//! non-increasing prices. Full per-round traces are recorded so every
//! economic invariant can be audited after the fact.

mod swm;
mod vm;

use std::str::FromStr;

use thiserror::Error;

use crate::market::{ClockMarket, MarketError, Response};
use crate::oracle::{OracleError, ValuationOracle};
use crate::scalar::Real;
use crate::NodeId;

pub use swm::bfm_swm;
pub use vm::bfm_vm;

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("invalid mechanism parameters: {0}")]
    InvalidParams(String),
    #[error("oracle ground set ({oracle}) does not match market size ({market})")]
    GroundSetMismatch { oracle: usize, market: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Which mechanism produced a result; drives which audits apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    Swm,
    Vm,
}

/// Auction parameters (ℓ, α, β, ε).
///
/// β regulates the value-to-payment ratio in BFM-SWM and is the zero sentinel
/// for BFM-VM, whose pricing rule has no β term. ε seeds the initial welfare
/// threshold in BFM-SWM and is unused by BFM-VM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismParams<R: Real> {
    pub ell: usize,
    pub alpha: R,
    pub beta: R,
    pub eps: R,
}

/// Named parameter sets achieving the mechanisms' approximation guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// ℓ=2, α=1+2√6/3, β=4: general (non-monotone) submodular welfare.
    SwmNonMonotone,
    /// ℓ=1, α=1+√6/2, β=3: monotone submodular welfare.
    SwmMonotone,
    /// ℓ=2, α=1+√3: submodular valuation maximization.
    Vm,
}

impl Preset {
    pub fn params<R: Real>(self) -> MechanismParams<R> {
        match self {
            Preset::SwmNonMonotone => MechanismParams {
                ell: 2,
                alpha: R::of(1.0 + 2.0 * 6.0f64.sqrt() / 3.0),
                beta: R::of(4.0),
                eps: R::of(0.1),
            },
            Preset::SwmMonotone => MechanismParams {
                ell: 1,
                alpha: R::of(1.0 + 6.0f64.sqrt() / 2.0),
                beta: R::of(3.0),
                eps: R::of(0.1),
            },
            Preset::Vm => MechanismParams {
                ell: 2,
                alpha: R::of(1.0 + 3.0f64.sqrt()),
                beta: R::zero(),
                eps: R::of(0.1),
            },
        }
    }

    pub fn mechanism_kind(self) -> MechanismKind {
        match self {
            Preset::SwmNonMonotone | Preset::SwmMonotone => MechanismKind::Swm,
            Preset::Vm => MechanismKind::Vm,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::SwmNonMonotone => "swm-nonmonotone",
            Preset::SwmMonotone => "swm-monotone",
            Preset::Vm => "vm",
        }
    }
}

impl FromStr for Preset {
    type Err = MechanismError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swm-nonmonotone" => Ok(Preset::SwmNonMonotone),
            "swm-monotone" => Ok(Preset::SwmMonotone),
            "vm" => Ok(Preset::Vm),
            other => Err(MechanismError::InvalidParams(format!(
                "unknown preset {other:?}"
            ))),
        }
    }
}

impl<R: Real> MechanismParams<R> {
    fn validate_common(&self) -> Result<(), MechanismError> {
        if self.ell != 1 && self.ell != 2 {
            return Err(MechanismError::InvalidParams(format!(
                "ell must be 1 or 2, got {}",
                self.ell
            )));
        }
        if !(self.alpha > R::one()) {
            return Err(MechanismError::InvalidParams(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn validate_swm(&self) -> Result<(), MechanismError> {
        self.validate_common()?;
        if !(self.beta > R::one()) {
            return Err(MechanismError::InvalidParams(format!(
                "beta must exceed 1 for welfare maximization, got {}",
                self.beta
            )));
        }
        if !(self.eps > R::zero()) {
            return Err(MechanismError::InvalidParams(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }

    pub fn validate_vm(&self) -> Result<(), MechanismError> {
        self.validate_common()?;
        if self.beta != R::zero() {
            return Err(MechanismError::InvalidParams(format!(
                "beta is the zero sentinel for valuation maximization, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// The inner-loop event that ended a round early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BreakEvent {
    pub node: NodeId,
    pub set_index: usize,
}

/// State of one auction round at its end.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<R: Real> {
    /// 1-based round index t.
    pub round: usize,
    /// ρ_t.
    pub threshold: R,
    /// Candidate sets S_{i,t} in insertion order, one per i ∈ [ℓ].
    pub sets: Vec<Vec<NodeId>>,
    /// Cached v(S_{i,t}).
    pub set_values: Vec<R>,
    /// p(S_{i,t}) at the members' accepted prices.
    pub set_payments: Vec<R>,
    pub break_event: Option<BreakEvent>,
}

/// Full per-round record of a run, sufficient for invariant auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionTrace<R: Real> {
    pub rounds: Vec<RoundRecord<R>>,
    /// Every node that was ever stored into the protected singleton u*.
    pub u_star_history: Vec<NodeId>,
    /// Prices offered to each node, in offer order (the budget screen first).
    pub price_history: Vec<Vec<R>>,
    /// Round in which a node left the active set (0 = budget screen), if ever.
    pub exits: Vec<Option<usize>>,
    /// Oracle queries consumed by this run.
    pub query_delta: u64,
}

impl<R: Real> AuctionTrace<R> {
    fn new(n: usize) -> Self {
        Self {
            rounds: Vec::new(),
            u_star_history: Vec::new(),
            price_history: vec![Vec::new(); n],
            exits: vec![None; n],
            query_delta: 0,
        }
    }

    /// ρ of the last recorded round.
    pub fn final_threshold(&self) -> Option<R> {
        self.rounds.last().map(|r| r.threshold)
    }
}

/// Outcome of a mechanism run: the winning set, its payments, and metrics.
/// Welfare (v(S*) − c(S*)) is not included here because the mechanism never
/// sees true costs; the harness computes it.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismResult<R: Real> {
    /// Winning set S* in insertion order.
    pub winners: Vec<NodeId>,
    /// Payment per winner, aligned with `winners`.
    pub payments: Vec<R>,
    pub total_payment: R,
    /// v(S*).
    pub valuation: R,
    /// Number of outer-loop rounds M (0 for a degenerate empty run).
    pub rounds: usize,
    /// Oracle queries consumed.
    pub queries: u64,
    /// True when the active set was empty at initialization of BFM-VM.
    pub degenerate: bool,
    pub trace: AuctionTrace<R>,
}

impl<R: Real> MechanismResult<R> {
    pub fn payment_of(&self, u: NodeId) -> Option<R> {
        self.winners
            .iter()
            .position(|&w| w == u)
            .map(|i| self.payments[i])
    }
}

/// Query-counting wrapper used inside mechanism runs. Mirrors the oracle's
/// own counter so results carry an exact per-run delta even when the oracle
/// is shared.
struct CountingOracle<'a, R: Real> {
    oracle: &'a ValuationOracle<R>,
    used: u64,
}

impl<'a, R: Real> CountingOracle<'a, R> {
    fn new(oracle: &'a ValuationOracle<R>) -> Self {
        Self { oracle, used: 0 }
    }

    fn eval(&mut self, set: &[NodeId]) -> Result<R, MechanismError> {
        self.used += 1;
        Ok(self.oracle.evaluate(set)?)
    }

    /// v(set ∪ {u}) in one query, without cloning the set.
    fn eval_with(&mut self, set: &mut Vec<NodeId>, u: NodeId) -> Result<R, MechanismError> {
        set.push(u);
        let value = self.eval(set);
        set.pop();
        value
    }
}

/// Offer the full budget to every seller in ascending id order; accepters
/// form the initial active set with p(u) = B.
fn initial_screening<R: Real, M: ClockMarket<R>>(
    market: &mut M,
    trace: &mut AuctionTrace<R>,
    price: &mut [R],
) -> Result<Vec<bool>, MechanismError> {
    let n = market.ground_size();
    let budget = market.budget();
    let mut active = vec![false; n];
    for u in 0..n {
        trace.price_history[u].push(budget);
        match market.offer(u as NodeId, budget)? {
            Response::Accept => {
                active[u] = true;
                price[u] = budget;
            }
            Response::Reject => trace.exits[u] = Some(0),
        }
    }
    Ok(active)
}

/// A finalist for the winning-set selection.
struct Candidate<R: Real> {
    members: Vec<NodeId>,
    value: R,
    payment: R,
}

/// First index maximizing the score, replacing only on strictly greater.
fn argmax_first<R: Real>(scores: impl IntoIterator<Item = R>) -> usize {
    let mut best = 0usize;
    let mut best_score = None;
    for (i, score) in scores.into_iter().enumerate() {
        match best_score {
            None => best_score = Some(score),
            Some(current) if score > current => {
                best = i;
                best_score = Some(score);
            }
            _ => {}
        }
    }
    best
}
