//! Regularized-greedy baselines (distorted, ROI, cost-scaled) with the
//! budget-truncation adaptation. These are allocation algorithms over public
//! costs, not mechanisms: welfare is computed from true costs, no payments.

use thiserror::Error;

use crate::oracle::{OracleError, ValuationOracle};
use crate::scalar::Real;
use crate::NodeId;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("step budget k must be at least 1")]
    ZeroSteps,
    #[error("costs length {got} does not match ground set size {expected}")]
    CostsLength { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One greedy selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep<R: Real> {
    pub node: NodeId,
    /// Marginal value v(u|S) at selection time.
    pub marginal: R,
    pub cost: R,
}

/// Ordered greedy selection with per-step marginals and costs.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySequence<R: Real> {
    pub steps: Vec<GreedyStep<R>>,
}

impl<R: Real> Default for GreedySequence<R> {
    fn default() -> Self {
        Self { steps: Vec::new() }
    }
}

impl<R: Real> GreedySequence<R> {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn check_costs<R: Real>(oracle: &ValuationOracle<R>, costs: &[R]) -> Result<(), BaselineError> {
    if costs.len() != oracle.ground_size() {
        return Err(BaselineError::CostsLength {
            expected: oracle.ground_size(),
            got: costs.len(),
        });
    }
    Ok(())
}

/// Distorted greedy: over steps i = 0..k−1, select
/// argmax_u (1 − 1/k)^{k−(i+1)} · v(u|S) − c(u) when that score is positive,
/// otherwise skip the step. Ties go to the lowest id. Defaults to k = n when
/// no cardinality budget is given.
pub fn distorted_greedy<R: Real>(
    oracle: &ValuationOracle<R>,
    costs: &[R],
    k: Option<usize>,
) -> Result<GreedySequence<R>, BaselineError> {
    check_costs(oracle, costs)?;
    let n = oracle.ground_size();
    let k = k.unwrap_or(n);
    if n == 0 {
        return Ok(GreedySequence::default());
    }
    if k == 0 {
        return Err(BaselineError::ZeroSteps);
    }

    let one_minus = R::one() - R::one() / R::of_usize(k);
    let mut selected = Vec::new();
    let mut in_set = vec![false; n];
    let mut base_value = R::zero();
    let mut steps = Vec::new();

    for i in 0..k {
        let factor = one_minus.powi((k - (i + 1)) as i32);
        let mut best: Option<(NodeId, R, R)> = None; // (node, score, marginal)
        for u in 0..n as NodeId {
            if in_set[u as usize] {
                continue;
            }
            let marginal = eval_union(oracle, &mut selected, u)? - base_value;
            let score = factor * marginal - costs[u as usize];
            match best {
                None => best = Some((u, score, marginal)),
                Some((_, s, _)) if score > s => best = Some((u, score, marginal)),
                _ => {}
            }
        }
        if let Some((u, score, marginal)) = best {
            if score > R::zero() {
                in_set[u as usize] = true;
                base_value += marginal;
                selected.push(u);
                steps.push(GreedyStep {
                    node: u,
                    marginal,
                    cost: costs[u as usize],
                });
            }
            // non-positive best score: skip this step, the factor changes next
        }
    }

    Ok(GreedySequence { steps })
}

/// ROI greedy: repeatedly add argmax_u v(u|S)/c(u) among u with
/// v(u|S) ≥ c(u); stop when no element qualifies. Zero-cost elements with
/// positive marginal rank first (infinite ratio); ties go to the lowest id.
pub fn roi_greedy<R: Real>(
    oracle: &ValuationOracle<R>,
    costs: &[R],
) -> Result<GreedySequence<R>, BaselineError> {
    check_costs(oracle, costs)?;
    let n = oracle.ground_size();
    let mut selected = Vec::new();
    let mut in_set = vec![false; n];
    let mut base_value = R::zero();
    let mut steps = Vec::new();

    loop {
        let mut best: Option<(NodeId, R, R)> = None; // (node, ratio, marginal)
        for u in 0..n as NodeId {
            if in_set[u as usize] {
                continue;
            }
            let marginal = eval_union(oracle, &mut selected, u)? - base_value;
            let cost = costs[u as usize];
            if marginal < cost {
                continue;
            }
            let ratio = if cost > R::zero() {
                marginal / cost
            } else if marginal > R::zero() {
                R::infinity()
            } else {
                R::zero()
            };
            match best {
                None => best = Some((u, ratio, marginal)),
                Some((_, r, _)) if ratio > r => best = Some((u, ratio, marginal)),
                _ => {}
            }
        }
        match best {
            None => break,
            Some((u, _, marginal)) => {
                in_set[u as usize] = true;
                base_value += marginal;
                selected.push(u);
                steps.push(GreedyStep {
                    node: u,
                    marginal,
                    cost: costs[u as usize],
                });
            }
        }
    }

    Ok(GreedySequence { steps })
}

/// Cost-scaled greedy: repeatedly add argmax_u v(u|S) − 2·c(u) while the
/// maximum is positive; ties go to the lowest id.
pub fn cost_scaled_greedy<R: Real>(
    oracle: &ValuationOracle<R>,
    costs: &[R],
) -> Result<GreedySequence<R>, BaselineError> {
    check_costs(oracle, costs)?;
    let n = oracle.ground_size();
    let two = R::of(2.0);
    let mut selected = Vec::new();
    let mut in_set = vec![false; n];
    let mut base_value = R::zero();
    let mut steps = Vec::new();

    loop {
        let mut best: Option<(NodeId, R, R)> = None; // (node, score, marginal)
        for u in 0..n as NodeId {
            if in_set[u as usize] {
                continue;
            }
            let marginal = eval_union(oracle, &mut selected, u)? - base_value;
            let score = marginal - two * costs[u as usize];
            match best {
                None => best = Some((u, score, marginal)),
                Some((_, s, _)) if score > s => best = Some((u, score, marginal)),
                _ => {}
            }
        }
        match best {
            Some((u, score, marginal)) if score > R::zero() => {
                in_set[u as usize] = true;
                base_value += marginal;
                selected.push(u);
                steps.push(GreedyStep {
                    node: u,
                    marginal,
                    cost: costs[u as usize],
                });
            }
            _ => break,
        }
    }

    Ok(GreedySequence { steps })
}

/// Longest prefix of the greedy selection whose total true cost fits the
/// budget.
pub fn budget_truncate<R: Real>(seq: &GreedySequence<R>, costs: &[R], budget: R) -> Vec<NodeId> {
    let mut total = R::zero();
    let mut prefix = Vec::new();
    for step in &seq.steps {
        let next = total + costs[step.node as usize];
        if next > budget {
            break;
        }
        total = next;
        prefix.push(step.node);
    }
    prefix
}

/// v(selected ∪ {u}) in one query, without cloning the selection.
fn eval_union<R: Real>(
    oracle: &ValuationOracle<R>,
    selected: &mut Vec<NodeId>,
    u: NodeId,
) -> Result<R, BaselineError> {
    selected.push(u);
    let value = oracle.evaluate(selected);
    selected.pop();
    Ok(value?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TableValuation;

    fn with(selected: &[NodeId], u: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(selected.len() + 1);
        out.extend_from_slice(selected);
        out.push(u);
        out
    }

    /// Modular v with v({0}) = 3, c(0) = 1; v({1}) = 1, c(1) = 2.
    fn modular_instance() -> (ValuationOracle<f64>, Vec<f64>) {
        let oracle = ValuationOracle::table(TableValuation::modular(&[3.0, 1.0]).unwrap());
        (oracle, vec![1.0, 2.0])
    }

    #[test]
    fn distorted_greedy_hand_example() {
        let (oracle, costs) = modular_instance();
        // k=2: step 0 factor 1/2 → scores 0.5, −1.5, pick node 0;
        //      step 1 factor 1 → remaining score 1−2 < 0, skip.
        let seq = distorted_greedy(&oracle, &costs, Some(2)).unwrap();
        assert_eq!(seq.nodes(), vec![0]);
    }

    #[test]
    fn distorted_greedy_all_costs_dominate() {
        let oracle = ValuationOracle::table(TableValuation::modular(&[0.5, 0.2]).unwrap());
        let seq = distorted_greedy(&oracle, &[2.0, 2.0], None).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn distorted_greedy_zero_costs_matches_plain_greedy() {
        // with zero costs the distortion factor cannot change the argmax,
        // so the order equals plain greedy; cross-check on a few tables
        let tables = [
            vec![0.0, 2.0, 1.0, 2.5, 3.0, 4.0, 3.5, 4.2],
            vec![0.0, 1.0, 1.0, 1.5, 2.0, 2.2, 2.8, 3.0],
        ];
        for values in tables {
            let oracle = ValuationOracle::table(TableValuation::new(values).unwrap());
            let n = oracle.ground_size();
            let costs = vec![0.0; n];
            let seq = distorted_greedy(&oracle, &costs, None).unwrap();

            // independent plain greedy
            let mut selected: Vec<NodeId> = Vec::new();
            let mut base = 0.0;
            loop {
                let mut best: Option<(NodeId, f64)> = None;
                for u in 0..n as NodeId {
                    if selected.contains(&u) {
                        continue;
                    }
                    let m = oracle.evaluate_uncounted(&with(&selected, u)).unwrap() - base;
                    match best {
                        None => best = Some((u, m)),
                        Some((_, bm)) if m > bm => best = Some((u, m)),
                        _ => {}
                    }
                }
                match best {
                    Some((u, m)) if m > 0.0 => {
                        base += m;
                        selected.push(u);
                    }
                    _ => break,
                }
            }
            assert_eq!(seq.nodes(), selected);
        }
    }

    #[test]
    fn roi_greedy_hand_example() {
        let (oracle, costs) = modular_instance();
        // ratio 3 qualifies; node 1 has marginal 1 < cost 2 and never enters
        let seq = roi_greedy(&oracle, &costs).unwrap();
        assert_eq!(seq.nodes(), vec![0]);
    }

    #[test]
    fn roi_greedy_boundary_ratio_one() {
        let oracle = ValuationOracle::table(TableValuation::modular(&[0.7]).unwrap());
        let seq = roi_greedy(&oracle, &[0.7]).unwrap();
        assert_eq!(seq.nodes(), vec![0]);
    }

    #[test]
    fn roi_greedy_zero_cost_first() {
        let oracle = ValuationOracle::table(TableValuation::modular(&[1.0, 5.0]).unwrap());
        // node 0 is free: infinite ratio beats 5/0.1
        let seq = roi_greedy(&oracle, &[0.0, 0.1]).unwrap();
        assert_eq!(seq.nodes(), vec![0, 1]);
    }

    #[test]
    fn roi_greedy_empty_ground_set() {
        let oracle = ValuationOracle::table(TableValuation::new(vec![0.0]).unwrap());
        let seq = roi_greedy(&oracle, &[]).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn cost_scaled_hand_example() {
        let (oracle, costs) = modular_instance();
        // 3 − 2 = 1 > 0 picks node 0; then 1 − 4 < 0 stops
        let seq = cost_scaled_greedy(&oracle, &costs).unwrap();
        assert_eq!(seq.nodes(), vec![0]);
    }

    #[test]
    fn cost_scaled_stops_when_nothing_positive() {
        let oracle = ValuationOracle::table(TableValuation::modular(&[1.0, 1.0]).unwrap());
        let seq = cost_scaled_greedy(&oracle, &[0.5, 0.6]).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn cost_scaled_zero_costs_is_pure_greedy() {
        let oracle = ValuationOracle::table(TableValuation::modular(&[2.0, 1.0, 0.0]).unwrap());
        let seq = cost_scaled_greedy(&oracle, &[0.0, 0.0, 0.0]).unwrap();
        // stops once marginals hit zero
        assert_eq!(seq.nodes(), vec![0, 1]);
    }

    #[test]
    fn truncate_prefix_arithmetic() {
        let seq = GreedySequence {
            steps: [0, 1, 2]
                .map(|node| GreedyStep {
                    node,
                    marginal: 1.0,
                    cost: 0.4,
                })
                .to_vec(),
        };
        let costs = vec![0.4, 0.4, 0.4];
        assert_eq!(budget_truncate(&seq, &costs, 1.0), vec![0, 1]);
        assert_eq!(budget_truncate(&seq, &costs, 0.3), Vec::<NodeId>::new());
        assert_eq!(budget_truncate(&seq, &costs, 5.0), vec![0, 1, 2]);
    }

    #[test]
    fn mismatched_costs_rejected() {
        let (oracle, _) = modular_instance();
        assert!(matches!(
            roi_greedy(&oracle, &[1.0]).unwrap_err(),
            BaselineError::CostsLength {
                expected: 2,
                got: 1
            }
        ));
    }
}
