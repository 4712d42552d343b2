//! Simulated sellers with private costs behind a descending-clock interface.
//!
//! Mechanisms interact with sellers exclusively through [`ClockMarket::offer`]:
//! they observe accept/reject responses and never the private costs. The
//! agents enforce the clock contract (offers to one seller never increase);
//! a violation indicates a mechanism bug and is surfaced as an error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Accept,
    Reject,
}

/// Seller behavior. Truthful sellers accept exactly the prices covering their
/// cost; the scripted deviations exist for strategyproofness probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy<R: Real> {
    Truthful,
    AlwaysReject,
    /// Accept iff price ≥ τ (pretend the cost is τ).
    RejectBelow(R),
    /// Accept iff price ≥ cost − δ (tolerate selling slightly below cost).
    AcceptMargin(R),
}

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("agent {agent}: offer {offered} exceeds previous offer {last} (clock violation)")]
    ClockViolation {
        agent: NodeId,
        last: f64,
        offered: f64,
    },
    #[error("unknown agent id {0}")]
    UnknownAgent(NodeId),
    #[error("budget must be positive, got {0}")]
    InvalidBudget(f64),
    #[error("agent {agent} has negative cost {cost}")]
    NegativeCost { agent: NodeId, cost: f64 },
    #[error("offered price {0} is not finite")]
    BadPrice(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellerAgent<R: Real> {
    id: NodeId,
    private_cost: R,
    strategy: Strategy<R>,
    last_offer: Option<R>,
}

impl<R: Real> SellerAgent<R> {
    pub fn truthful(id: NodeId, cost: R) -> Self {
        Self::scripted(id, cost, Strategy::Truthful)
    }

    pub fn scripted(id: NodeId, cost: R, strategy: Strategy<R>) -> Self {
        Self {
            id,
            private_cost: cost,
            strategy,
            last_offer: None,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn last_offer(&self) -> Option<R> {
        self.last_offer
    }

    fn accepts(&self, price: R) -> bool {
        match self.strategy {
            Strategy::Truthful => price >= self.private_cost,
            Strategy::AlwaysReject => false,
            Strategy::RejectBelow(threshold) => price >= threshold,
            Strategy::AcceptMargin(delta) => price >= self.private_cost - delta,
        }
    }

    /// Present a price. Offers must be non-increasing over the auction.
    pub fn offer(&mut self, price: R) -> Result<Response, MarketError> {
        if !price.is_finite() {
            return Err(MarketError::BadPrice(price.to_f64().unwrap_or(f64::NAN)));
        }
        if let Some(last) = self.last_offer {
            if price > last {
                return Err(MarketError::ClockViolation {
                    agent: self.id,
                    last: last.to_f64().unwrap(),
                    offered: price.to_f64().unwrap(),
                });
            }
        }
        self.last_offer = Some(price);
        Ok(if self.accepts(price) {
            Response::Accept
        } else {
            Response::Reject
        })
    }
}

/// What a mechanism is allowed to see: the ground-set size, the budget, and
/// accept/reject responses to price offers. Private costs stay behind it.
pub trait ClockMarket<R: Real> {
    fn ground_size(&self) -> usize;
    fn budget(&self) -> R;
    fn offer(&mut self, agent: NodeId, price: R) -> Result<Response, MarketError>;
}

/// A set of sellers plus the buyer's budget. One `Market` value serves exactly
/// one auction run (agents remember their last offer); independent runs use
/// independent clones.
#[derive(Debug, Clone, PartialEq)]
pub struct Market<R: Real> {
    agents: Vec<SellerAgent<R>>,
    budget: R,
}

impl<R: Real> Market<R> {
    pub fn new(agents: Vec<SellerAgent<R>>, budget: R) -> Result<Self, MarketError> {
        if !(budget > R::zero()) || !budget.is_finite() {
            return Err(MarketError::InvalidBudget(
                budget.to_f64().unwrap_or(f64::NAN),
            ));
        }
        for (i, agent) in agents.iter().enumerate() {
            if agent.id as usize != i {
                return Err(MarketError::UnknownAgent(agent.id));
            }
            if agent.private_cost < R::zero() {
                return Err(MarketError::NegativeCost {
                    agent: agent.id,
                    cost: agent.private_cost.to_f64().unwrap(),
                });
            }
        }
        Ok(Self { agents, budget })
    }

    pub fn truthful(costs: &[R], budget: R) -> Result<Self, MarketError> {
        let agents = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| SellerAgent::truthful(i as NodeId, c))
            .collect();
        Self::new(agents, budget)
    }

    /// Replace one agent's strategy (used by truthfulness probes).
    pub fn set_strategy(&mut self, agent: NodeId, strategy: Strategy<R>) {
        self.agents[agent as usize].strategy = strategy;
    }

    /// Replace one agent's private cost, keeping its strategy.
    pub fn set_cost(&mut self, agent: NodeId, cost: R) {
        self.agents[agent as usize].private_cost = cost;
    }

    pub fn agent(&self, id: NodeId) -> &SellerAgent<R> {
        &self.agents[id as usize]
    }

    /// True cost of one seller. Verification and the harness use this for
    /// welfare and individual-rationality accounting; mechanisms never see it
    /// because they are generic over [`ClockMarket`].
    pub fn true_cost(&self, id: NodeId) -> R {
        self.agents[id as usize].private_cost
    }

    pub fn true_costs(&self) -> Vec<R> {
        self.agents.iter().map(|a| a.private_cost).collect()
    }

    pub fn total_cost(&self, set: &[NodeId]) -> R {
        let mut acc = R::zero();
        for &u in set {
            acc += self.true_cost(u);
        }
        acc
    }
}

impl<R: Real> ClockMarket<R> for Market<R> {
    fn ground_size(&self) -> usize {
        self.agents.len()
    }

    fn budget(&self) -> R {
        self.budget
    }

    fn offer(&mut self, agent: NodeId, price: R) -> Result<Response, MarketError> {
        let idx = agent as usize;
        if idx >= self.agents.len() {
            return Err(MarketError::UnknownAgent(agent));
        }
        self.agents[idx].offer(price)
    }
}

/// How seller costs are generated for an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum CostKind<R: Real> {
    /// I.i.d. draws in [lo, hi).
    Uniform {
        lo: R,
        hi: R,
    },
    /// cost_i = target_mean · aux_i / mean(aux); the output mean is exactly
    /// target_mean up to rounding.
    StdDevProportional {
        target_mean: R,
    },
    Explicit(Vec<R>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<R: Real> {
    pub kind: CostKind<R>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CostModelError {
    #[error("need at least one seller")]
    EmptyMarket,
    #[error("uniform bounds [{lo}, {hi}) are invalid")]
    BadUniformBounds { lo: f64, hi: f64 },
    #[error("stddev-proportional model needs aux scores of length {expected}, got {got}")]
    AuxLength { expected: usize, got: usize },
    #[error("aux score {index} is negative")]
    NegativeAux { index: usize },
    #[error("aux scores have non-positive mean")]
    ZeroAuxMean,
    #[error("explicit cost list has length {got}, expected {expected}")]
    ExplicitLength { expected: usize, got: usize },
    #[error("line {line}: bad costs row {token:?}")]
    BadCostRow { line: usize, token: String },
}

/// Generate n seller costs from a cost model. Deterministic under the model's
/// seed; the stddev-proportional kind consumes per-item aux scores.
pub fn gen_costs<R: Real>(
    model: &CostModel<R>,
    n: usize,
    aux: Option<&[R]>,
) -> Result<Vec<R>, CostModelError> {
    if n == 0 {
        return Err(CostModelError::EmptyMarket);
    }
    match &model.kind {
        CostKind::Uniform { lo, hi } => {
            let (lo, hi) = (lo.to_f64().unwrap(), hi.to_f64().unwrap());
            if !(lo < hi) || lo < 0.0 {
                return Err(CostModelError::BadUniformBounds { lo, hi });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            Ok((0..n).map(|_| R::of(rng.random_range(lo..hi))).collect())
        }
        CostKind::StdDevProportional { target_mean } => {
            let aux = aux.ok_or(CostModelError::AuxLength {
                expected: n,
                got: 0,
            })?;
            if aux.len() != n {
                return Err(CostModelError::AuxLength {
                    expected: n,
                    got: aux.len(),
                });
            }
            if let Some(index) = aux.iter().position(|a| *a < R::zero()) {
                return Err(CostModelError::NegativeAux { index });
            }
            let mut sum = R::zero();
            for &a in aux {
                sum += a;
            }
            let mean = sum / R::of_usize(n);
            if !(mean > R::zero()) {
                return Err(CostModelError::ZeroAuxMean);
            }
            Ok(aux.iter().map(|&a| *target_mean * a / mean).collect())
        }
        CostKind::Explicit(costs) => {
            if costs.len() != n {
                return Err(CostModelError::ExplicitLength {
                    expected: n,
                    got: costs.len(),
                });
            }
            Ok(costs.clone())
        }
    }
}

/// Parse a costs file: CSV with an `id,cost` header, one row per seller,
/// returned dense by id.
pub fn load_costs_csv<R: Real>(text: &str) -> Result<Vec<R>, CostModelError> {
    let mut rows: Vec<(usize, R)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.to_ascii_lowercase().starts_with("id,") {
            continue;
        }
        let bad = || CostModelError::BadCostRow {
            line: lineno + 1,
            token: line.to_string(),
        };
        let mut parts = line.split(',');
        let id: usize = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(bad)?;
        let cost: f64 = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        rows.push((id, R::of(cost)));
    }
    let n = rows.len();
    let mut costs = vec![None; n];
    for (id, cost) in rows {
        if id >= n || costs[id].is_some() {
            return Err(CostModelError::BadCostRow {
                line: 0,
                token: format!("id {id} out of range or duplicated"),
            });
        }
        costs[id] = Some(cost);
    }
    Ok(costs.into_iter().map(|c| c.unwrap()).collect())
}
