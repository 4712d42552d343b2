//! Brute-force optima and property auditors checking every guarantee-level
//! claim on desk-scale instances.

pub mod corpus;

use thiserror::Error;

use crate::market::{Market, MarketError, Strategy};
use crate::mechanism::{
    bfm_swm, bfm_vm, MechanismError, MechanismKind, MechanismParams, MechanismResult,
};
use crate::oracle::{OracleError, ValuationOracle};
use crate::scalar::Real;
use crate::NodeId;

/// Absolute tolerance for every verification comparison.
pub const CHECK_TOL: f64 = 1e-9;

/// Ground sets above this size are refused by the brute-force enumerator.
pub const BRUTE_FORCE_MAX: usize = 22;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("ground set of size {n} exceeds the brute-force limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("certificate objective {cert:?} does not match the guarantee objective {spec:?}")]
    ObjectiveMismatch { cert: Objective, spec: Objective },
    #[error("instance mismatch: {0}")]
    InstanceMismatch(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// max v(S) − c(S) subject to c(S) ≤ B.
    Welfare,
    /// max v(S) subject to c(S) ≤ B.
    Valuation,
}

/// Exhaustively computed optimum over all feasible subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumCertificate<R: Real> {
    pub objective: Objective,
    /// Optimal set, sorted ascending; lexicographically smallest among ties.
    pub opt_set: Vec<NodeId>,
    /// Objective value of the optimal set.
    pub opt_value: R,
    /// v(O).
    pub value: R,
    /// c(O).
    pub cost: R,
    pub enumerated: usize,
}

/// Enumerate all 2^n subsets with c(S) ≤ B and maximize the objective.
/// Uses the query-free evaluation path so mechanism query counts stay clean.
pub fn brute_force_opt<R: Real>(
    oracle: &ValuationOracle<R>,
    costs: &[R],
    budget: R,
    objective: Objective,
) -> Result<OptimumCertificate<R>, VerifyError> {
    let n = oracle.ground_size();
    if n > BRUTE_FORCE_MAX {
        return Err(VerifyError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    if costs.len() != n {
        return Err(VerifyError::InstanceMismatch(format!(
            "costs length {} != ground size {n}",
            costs.len()
        )));
    }

    let mut best_set: Vec<NodeId> = Vec::new();
    let mut best_obj = R::zero(); // the empty set is always feasible
    let mut best_value = R::zero();
    let mut best_cost = R::zero();
    let mut enumerated = 0usize;
    let mut members = Vec::with_capacity(n);

    for mask in 0..1u64 << n {
        members.clear();
        let mut cost = R::zero();
        for (u, &c) in costs.iter().enumerate() {
            if mask >> u & 1 == 1 {
                members.push(u as NodeId);
                cost += c;
            }
        }
        if cost > budget {
            continue;
        }
        enumerated += 1;
        let value = oracle.evaluate_uncounted(&members)?;
        let obj = match objective {
            Objective::Welfare => value - cost,
            Objective::Valuation => value,
        };
        let better = obj > best_obj || (obj == best_obj && members < best_set);
        if better {
            best_set = members.clone();
            best_obj = obj;
            best_value = value;
            best_cost = cost;
        }
    }

    Ok(OptimumCertificate {
        objective,
        opt_set: best_set,
        opt_value: best_obj,
        value: best_value,
        cost: best_cost,
        enumerated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One audited property with its pass margin (negative on failure) and a
/// human-readable witness for failures.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub margin: f64,
    pub witness: Option<String>,
}

impl Check {
    fn pass(name: &'static str, margin: f64) -> Self {
        Self {
            name,
            status: CheckStatus::Pass,
            margin,
            witness: None,
        }
    }

    fn fail(name: &'static str, margin: f64, witness: String) -> Self {
        Self {
            name,
            status: CheckStatus::Fail,
            margin,
            witness: Some(witness),
        }
    }

    fn skipped(name: &'static str) -> Self {
        Self {
            name,
            status: CheckStatus::Skipped,
            margin: 0.0,
            witness: None,
        }
    }

    fn bounded(name: &'static str, margin: f64, witness: impl FnOnce() -> String) -> Self {
        if margin >= -CHECK_TOL {
            Self::pass(name, margin)
        } else {
            Self::fail(name, margin, witness())
        }
    }
}

/// Per-run audit outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub checks: Vec<Check>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Dispatch to the mechanism matching `kind`.
pub fn run_mechanism<R: Real>(
    kind: MechanismKind,
    oracle: &ValuationOracle<R>,
    market: &mut Market<R>,
    params: &MechanismParams<R>,
) -> Result<MechanismResult<R>, MechanismError> {
    match kind {
        MechanismKind::Swm => bfm_swm(oracle, market, params),
        MechanismKind::Vm => bfm_vm(oracle, market, params),
    }
}

/// Audit one finished run against every economic property: budget
/// feasibility, individual rationality, surplus (SWM), the β-ratio and
/// per-set surplus cap over the trace (SWM), price monotonicity, threshold
/// growth, payment consistency, and the round bound when an optimum
/// certificate is supplied (SWM) or unconditionally (VM).
pub fn audit_run<R: Real>(
    result: &MechanismResult<R>,
    market: &Market<R>,
    oracle: &ValuationOracle<R>,
    params: &MechanismParams<R>,
    kind: MechanismKind,
    cert: Option<&OptimumCertificate<R>>,
) -> Result<PropertyReport, VerifyError> {
    let n = oracle.ground_size();
    use crate::market::ClockMarket;
    if market.ground_size() != n || result.trace.price_history.len() != n {
        return Err(VerifyError::InstanceMismatch(format!(
            "oracle n={n}, market n={}, trace n={}",
            market.ground_size(),
            result.trace.price_history.len()
        )));
    }
    let budget = market.budget().to_f64().unwrap();
    let f = |x: R| x.to_f64().unwrap();
    let mut checks = Vec::new();

    // (i) budget feasibility
    checks.push(Check::bounded(
        "budget",
        budget - f(result.total_payment),
        || format!("p(S*) = {} exceeds B = {budget}", f(result.total_payment)),
    ));

    // (ii) individual rationality: winners are paid at least their cost
    let ir_margin = result
        .winners
        .iter()
        .zip(&result.payments)
        .map(|(&u, &p)| f(p) - f(market.true_cost(u)))
        .fold(f64::INFINITY, f64::min);
    if result.winners.is_empty() {
        checks.push(Check::pass("individual-rationality", 0.0));
    } else {
        checks.push(Check::bounded("individual-rationality", ir_margin, || {
            format!("a winner is paid {ir_margin} below its cost")
        }));
    }

    // (iii) non-negative auctioneer surplus (welfare mechanism only)
    match kind {
        MechanismKind::Swm => checks.push(Check::bounded(
            "surplus",
            f(result.valuation) - f(result.total_payment),
            || {
                format!(
                    "v(S*) = {} < p(S*) = {}",
                    f(result.valuation),
                    f(result.total_payment)
                )
            },
        )),
        MechanismKind::Vm => checks.push(Check::skipped("surplus")),
    }

    // (iv) per-round candidate-set invariants (welfare mechanism only)
    match kind {
        MechanismKind::Swm => {
            let beta = f(params.beta);
            let mut ratio_margin = f64::INFINITY;
            let mut cap_margin = f64::INFINITY;
            let mut witness = String::new();
            for record in &result.trace.rounds {
                for i in 0..record.sets.len() {
                    let v = f(record.set_values[i]);
                    let p = f(record.set_payments[i]);
                    let rho = f(record.threshold);
                    if v - beta * p < ratio_margin {
                        ratio_margin = v - beta * p;
                        witness = format!(
                            "round {} set {i}: v = {v}, p = {p}, beta = {beta}",
                            record.round
                        );
                    }
                    cap_margin = cap_margin.min(rho - (v - p));
                }
            }
            if result.trace.rounds.is_empty() {
                checks.push(Check::pass("beta-ratio", 0.0));
                checks.push(Check::pass("surplus-cap", 0.0));
            } else {
                let w = witness.clone();
                checks.push(Check::bounded("beta-ratio", ratio_margin, move || w));
                checks.push(Check::bounded("surplus-cap", cap_margin, || {
                    "a candidate set's surplus exceeds its round threshold".to_string()
                }));
            }
        }
        MechanismKind::Vm => {
            checks.push(Check::skipped("beta-ratio"));
            checks.push(Check::skipped("surplus-cap"));
        }
    }

    // (v) clock discipline: offers strictly positive and non-increasing
    let mut clock_ok = true;
    let mut clock_witness = String::new();
    for (u, offers) in result.trace.price_history.iter().enumerate() {
        let mut last = f64::INFINITY;
        for &p in offers {
            let p = f(p);
            if p <= 0.0 || p > last {
                clock_ok = false;
                clock_witness = format!("node {u}: offer sequence violates the clock at {p}");
                break;
            }
            last = p;
        }
    }
    checks.push(if clock_ok {
        Check::pass("price-monotonicity", 0.0)
    } else {
        Check::fail("price-monotonicity", -1.0, clock_witness)
    });

    // threshold growth ρ_t = α·ρ_{t−1}, exact by construction
    let mut growth_ok = true;
    for pair in result.trace.rounds.windows(2) {
        if pair[1].threshold != params.alpha * pair[0].threshold {
            growth_ok = false;
        }
    }
    checks.push(if growth_ok {
        Check::pass("threshold-growth", 0.0)
    } else {
        Check::fail(
            "threshold-growth",
            -1.0,
            "recorded thresholds do not grow by alpha".to_string(),
        )
    });

    // payments are exactly the winners' last posted prices
    let mut pay_ok = result.winners.len() == result.payments.len();
    for (&u, &p) in result.winners.iter().zip(&result.payments) {
        if result.trace.price_history[u as usize].last() != Some(&p) {
            pay_ok = false;
        }
    }
    let mut total = R::zero();
    for &p in &result.payments {
        total += p;
    }
    if total != result.total_payment {
        pay_ok = false;
    }
    checks.push(if pay_ok {
        Check::pass("payment-consistency", 0.0)
    } else {
        Check::fail(
            "payment-consistency",
            -1.0,
            "payments do not match the winners' posted prices".to_string(),
        )
    });

    // (vi) round bounds
    let round_check = match kind {
        MechanismKind::Swm => match cert {
            None => Check::skipped("round-bound"),
            Some(cert) => {
                if cert.objective != Objective::Welfare {
                    return Err(VerifyError::ObjectiveMismatch {
                        cert: cert.objective,
                        spec: Objective::Welfare,
                    });
                }
                let opt = f(cert.opt_value);
                if opt <= 0.0 || result.rounds <= 1 {
                    // log undefined at OPT ≤ 0; a single round is the floor
                    Check::skipped("round-bound")
                } else {
                    let eps = f(params.eps);
                    let alpha = f(params.alpha);
                    let bound = 2.0 + ((2.0 * opt / eps).ln() / alpha.ln()).ceil();
                    Check::bounded("round-bound", bound - result.rounds as f64, || {
                        format!(
                            "M = {} exceeds 2 + ceil(log_a(2 OPT/eps)) = {bound}",
                            result.rounds
                        )
                    })
                }
            }
        },
        MechanismKind::Vm if n == 0 => Check::skipped("round-bound"),
        MechanismKind::Vm => {
            let alpha = f(params.alpha);
            let bound = 2.0 + ((2.0 * n as f64).ln() / alpha.ln()).ceil();
            Check::bounded("round-bound", bound - result.rounds as f64, || {
                format!(
                    "M = {} exceeds 2 + ceil(log_a(2n)) = {bound}",
                    result.rounds
                )
            })
        }
    };
    checks.push(round_check);

    Ok(PropertyReport { checks })
}

/// An approximation guarantee of the weak form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeSpec<R: Real> {
    /// Approximation ratio γ ∈ (0, 1].
    pub gamma: R,
    /// Additive slack subtracted from the bound (e.g. ε/4).
    pub additive_slack: R,
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeOutcome {
    pub pass: bool,
    /// Achieved objective minus the guaranteed bound.
    pub margin: f64,
}

/// Check one run against its proven bound:
/// welfare: v(S*) − c(S*) ≥ γ·v(O) − c(O) − slack;
/// valuation: v(S*) ≥ γ·v(O).
pub fn check_guarantee<R: Real>(
    result: &MechanismResult<R>,
    cert: &OptimumCertificate<R>,
    spec: &GuaranteeSpec<R>,
    true_costs: &[R],
) -> Result<GuaranteeOutcome, VerifyError> {
    if cert.objective != spec.objective {
        return Err(VerifyError::ObjectiveMismatch {
            cert: cert.objective,
            spec: spec.objective,
        });
    }
    if !(spec.gamma > R::zero() && spec.gamma <= R::one()) {
        return Err(VerifyError::InstanceMismatch(format!(
            "approximation ratio gamma must lie in (0, 1], got {}",
            spec.gamma
        )));
    }
    let f = |x: R| x.to_f64().unwrap();
    let (achieved, bound) = match spec.objective {
        Objective::Welfare => {
            let mut cost = R::zero();
            for &u in &result.winners {
                cost += true_costs[u as usize];
            }
            let achieved = f(result.valuation) - f(cost);
            let bound = f(spec.gamma) * f(cert.value) - f(cert.cost) - f(spec.additive_slack);
            (achieved, bound)
        }
        Objective::Valuation => (
            f(result.valuation),
            f(spec.gamma) * f(cert.opt_value) - f(spec.additive_slack),
        ),
    };
    let margin = achieved - bound;
    Ok(GuaranteeOutcome {
        pass: margin >= -CHECK_TOL,
        margin,
    })
}

/// One profitable deviation found by the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFinding<R: Real> {
    pub agent: NodeId,
    pub policy: Strategy<R>,
    pub truthful_utility: R,
    pub deviant_utility: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthfulnessReport<R: Real> {
    pub probes: usize,
    /// Largest utility gain any deviation achieved over truthful play
    /// (usually negative; zero when no probes ran).
    pub max_gain: R,
    pub violations: Vec<DeviationFinding<R>>,
}

impl<R: Real> TruthfulnessReport<R> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn realized_utility<R: Real>(result: &MechanismResult<R>, agent: NodeId, cost: R) -> R {
    match result.payment_of(agent) {
        Some(p) => p - cost,
        None => R::zero(),
    }
}

/// For each agent and each deviation policy, rerun the auction with that one
/// agent deviating (everyone else truthful) and compare the deviator's
/// realized utility against its truthful-run utility.
pub fn truthfulness_probe<R: Real>(
    oracle: &ValuationOracle<R>,
    costs: &[R],
    budget: R,
    params: &MechanismParams<R>,
    kind: MechanismKind,
    policies: &[Strategy<R>],
) -> Result<TruthfulnessReport<R>, VerifyError> {
    let n = oracle.ground_size();
    if n > 10 {
        return Err(VerifyError::TooLarge { n, max: 10 });
    }
    let mut truthful_market = Market::truthful(costs, budget)?;
    let truthful = run_mechanism(kind, oracle, &mut truthful_market, params)?;

    let tol = R::of(CHECK_TOL);
    let mut probes = 0usize;
    let mut max_gain: Option<R> = None;
    let mut violations = Vec::new();
    for agent in 0..n as NodeId {
        let truthful_utility = realized_utility(&truthful, agent, costs[agent as usize]);
        for &policy in policies {
            probes += 1;
            let mut market = Market::truthful(costs, budget)?;
            market.set_strategy(agent, policy);
            let deviant = run_mechanism(kind, oracle, &mut market, params)?;
            let deviant_utility = realized_utility(&deviant, agent, costs[agent as usize]);
            let gain = deviant_utility - truthful_utility;
            max_gain = Some(max_gain.map_or(gain, |g| g.max(gain)));
            if gain > tol {
                violations.push(DeviationFinding {
                    agent,
                    policy,
                    truthful_utility,
                    deviant_utility,
                });
            }
        }
    }
    Ok(TruthfulnessReport {
        probes,
        max_gain: max_gain.unwrap_or_else(R::zero),
        violations,
    })
}
