//! BFM-VM: the deterministic budget-feasible clock mechanism for submodular
//! valuation maximization.

use crate::market::{ClockMarket, Response};
use crate::oracle::ValuationOracle;
use crate::scalar::Real;
use crate::NodeId;

use super::{
    argmax_first, initial_screening, AuctionTrace, BreakEvent, Candidate, CountingOracle,
    MechanismError, MechanismParams, MechanismResult, RoundRecord,
};

/// Run the valuation-maximization clock auction.
///
/// Differences from the welfare variant: the threshold starts at the best
/// singleton value max_{u∈R} v(u) (whose argmax seeds S_{1,1} at round 1),
/// there is no protected singleton, prices follow v(u|S_j)·B/ρ_t, the break
/// condition compares the set's raw value against ρ_t, and the winner is the
/// value-maximizing candidate of the last two rounds. Non-negative auctioneer
/// surplus is not guaranteed here.
pub fn bfm_vm<R: Real, M: ClockMarket<R>>(
    oracle: &ValuationOracle<R>,
    market: &mut M,
    params: &MechanismParams<R>,
) -> Result<MechanismResult<R>, MechanismError> {
    params.validate_vm()?;
    let n = market.ground_size();
    if oracle.ground_size() != n {
        return Err(MechanismError::GroundSetMismatch {
            oracle: oracle.ground_size(),
            market: n,
        });
    }
    let budget = market.budget();
    let ell = params.ell;

    let mut counting = CountingOracle::new(oracle);
    let mut trace = AuctionTrace::new(n);
    let mut price = vec![R::zero(); n];
    let mut active = initial_screening(market, &mut trace, &mut price)?;

    let members: Vec<NodeId> = (0..n as NodeId).filter(|&u| active[u as usize]).collect();
    if members.is_empty() {
        // No seller can be afforded at all: degenerate empty outcome.
        trace.query_delta = counting.used;
        return Ok(MechanismResult {
            winners: Vec::new(),
            payments: Vec::new(),
            total_payment: R::zero(),
            valuation: R::zero(),
            rounds: 0,
            queries: counting.used,
            degenerate: true,
            trace,
        });
    }

    // Round 1 consists of the best singleton only: ρ_1 = max v(u) and
    // S_{1,1} = {argmax v(u)}, ties to the lowest id.
    let mut best_u = members[0];
    let mut best_value = counting.eval(&[members[0]])?;
    for &u in &members[1..] {
        let value = counting.eval(&[u])?;
        if value > best_value {
            best_u = u;
            best_value = value;
        }
    }
    let mut rho = best_value;
    let mut prev: Vec<Vec<NodeId>> = vec![Vec::new(); ell];
    prev[0] = vec![best_u];
    let mut prev_values = vec![R::zero(); ell];
    prev_values[0] = best_value;
    let mut prev_payments = vec![R::zero(); ell];
    prev_payments[0] = price[best_u as usize];
    trace.rounds.push(RoundRecord {
        round: 1,
        threshold: rho,
        sets: prev.clone(),
        set_values: prev_values,
        set_payments: prev_payments,
        break_event: None,
    });

    let mut t = 1usize;
    loop {
        t += 1;
        rho = params.alpha * rho;
        let mut sets: Vec<Vec<NodeId>> = vec![Vec::new(); ell];
        let mut values = vec![R::zero(); ell];
        let mut payments = vec![R::zero(); ell];
        let mut break_event = None;

        let mut in_prev = vec![false; n];
        for set in &prev {
            for &u in set {
                in_prev[u as usize] = true;
            }
        }

        let snapshot: Vec<NodeId> = (0..n as NodeId)
            .filter(|&u| active[u as usize] && !in_prev[u as usize])
            .collect();

        for &u in &snapshot {
            let mut best = 0usize;
            let mut best_union = counting.eval_with(&mut sets[0], u)?;
            let mut best_marginal = best_union - values[0];
            for i in 1..ell {
                let union_value = counting.eval_with(&mut sets[i], u)?;
                let marginal = union_value - values[i];
                if marginal > best_marginal {
                    best = i;
                    best_union = union_value;
                    best_marginal = marginal;
                }
            }

            if !(best_marginal > R::zero()) {
                // Pricing a non-positive marginal would post a non-positive
                // offer; the seller exits as if it had rejected.
                active[u as usize] = false;
                trace.exits[u as usize] = Some(t);
                continue;
            }
            // ρ > 0 here: any positive marginal is bounded by ρ_1 via
            // submodularity, so ρ_1 > 0 whenever this branch is reached.
            let candidate_price = best_marginal / (rho / budget);
            let new_price = if candidate_price < price[u as usize] {
                candidate_price
            } else {
                price[u as usize]
            };
            price[u as usize] = new_price;
            trace.price_history[u as usize].push(new_price);
            match market.offer(u, new_price)? {
                Response::Reject => {
                    active[u as usize] = false;
                    trace.exits[u as usize] = Some(t);
                }
                Response::Accept => {
                    if best_union > rho {
                        // Value threshold exceeded: end the round. The seller
                        // keeps its accepted price and stays active.
                        break_event = Some(BreakEvent {
                            node: u,
                            set_index: best,
                        });
                        break;
                    }
                    sets[best].push(u);
                    values[best] = best_union;
                    payments[best] += new_price;
                }
            }
        }

        trace.rounds.push(RoundRecord {
            round: t,
            threshold: rho,
            sets: sets.clone(),
            set_values: values.clone(),
            set_payments: payments.clone(),
            break_event,
        });

        let mut in_cur = vec![false; n];
        for set in &sets {
            for &u in set {
                in_cur[u as usize] = true;
            }
        }
        let exhausted = (0..n).all(|u| !active[u] || in_prev[u] || in_cur[u]);
        if exhausted {
            break;
        }
        prev = sets;
    }

    let rounds = t;
    let mut candidates: Vec<Candidate<R>> = Vec::new();
    for record in [&trace.rounds[rounds - 1], &trace.rounds[rounds - 2]] {
        for i in 0..ell {
            candidates.push(Candidate {
                members: record.sets[i].clone(),
                value: record.set_values[i],
                payment: record.set_payments[i],
            });
        }
    }
    let chosen = argmax_first(candidates.iter().map(|c| c.value));
    let chosen = candidates.swap_remove(chosen);
    let winner_payments: Vec<R> = chosen.members.iter().map(|&u| price[u as usize]).collect();
    let mut total_payment = R::zero();
    for &p in &winner_payments {
        total_payment += p;
    }

    trace.query_delta = counting.used;
    Ok(MechanismResult {
        winners: chosen.members,
        payments: winner_payments,
        total_payment,
        valuation: chosen.value,
        rounds,
        queries: counting.used,
        degenerate: false,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Market;
    use crate::mechanism::Preset;
    use crate::oracle::{CoverageValuation, TableValuation};

    /// Two sellers with disjoint values: v({0}) = 2, v({1}) = 1, modular.
    fn disjoint_instance() -> (ValuationOracle<f64>, Market<f64>) {
        let oracle = ValuationOracle::table(TableValuation::modular(&[2.0, 1.0]).unwrap());
        let market = Market::truthful(&[0.1, 0.1], 1.0).unwrap();
        (oracle, market)
    }

    #[test]
    fn hand_trace_two_sellers() {
        let (oracle, mut market) = disjoint_instance();
        let params: MechanismParams<f64> = Preset::Vm.params();
        let result = bfm_vm(&oracle, &mut market, &params).unwrap();

        let alpha = 1.0 + 3.0f64.sqrt();
        // round 1: ρ_1 = 2, S_{1,1} = {0}
        assert_eq!(result.trace.rounds[0].threshold, 2.0);
        assert_eq!(result.trace.rounds[0].sets[0], vec![0]);
        // round 2: ρ_2 = 2α ≈ 5.4641; seller 1 priced min{1, 1·B/ρ_2} ≈ 0.18301
        let rho2 = alpha * 2.0;
        assert_eq!(result.trace.rounds[1].threshold, rho2);
        let expected_price = 1.0 / (rho2 / 1.0);
        assert!((expected_price - 0.18301).abs() < 1e-5);
        assert_eq!(result.trace.price_history[1], vec![1.0, expected_price]);
        assert_eq!(result.trace.rounds[1].sets[0], vec![1]);
        assert_eq!(result.trace.rounds[1].break_event, None);

        // M = 2; winner is round 1's singleton {0} with v = 2, paid the
        // budget it was never re-offered below.
        assert_eq!(result.rounds, 2);
        assert_eq!(result.winners, vec![0]);
        assert_eq!(result.payments, vec![1.0]);
        assert_eq!(result.valuation, 2.0);
        assert!(!result.degenerate);
    }

    #[test]
    fn unaffordable_seller_gives_degenerate_result() {
        let oracle = ValuationOracle::coverage(CoverageValuation::new(vec![vec![0]]).unwrap());
        let mut market = Market::truthful(&[2.0], 1.0).unwrap();
        let params: MechanismParams<f64> = Preset::Vm.params();
        let result = bfm_vm(&oracle, &mut market, &params).unwrap();
        assert!(result.degenerate);
        assert!(result.winners.is_empty());
        assert_eq!(result.rounds, 0);
        assert_eq!(result.valuation, 0.0);
    }

    /// Four unit-value sellers: round 2 breaks when the third addition would
    /// push the set value past ρ_2 = α; the breaking seller keeps its
    /// accepted price, stays active, and is collected in round 3.
    #[test]
    fn break_ends_round_without_storing_the_seller() {
        let oracle =
            ValuationOracle::table(TableValuation::modular(&[1.0, 1.0, 1.0, 1.0]).unwrap());
        let mut market = Market::truthful(&[0.01; 4], 1.0).unwrap();
        let params: MechanismParams<f64> = Preset::Vm.params();
        let result = bfm_vm(&oracle, &mut market, &params).unwrap();

        let alpha = params.alpha;
        let rho2 = alpha * 1.0;
        let rho3 = alpha * rho2;
        assert_eq!(result.trace.rounds[0].sets[0], vec![0]);
        // round 2 gathers sellers 1 and 2, then v({1,2,3}) = 3 > ρ_2 breaks
        assert_eq!(result.trace.rounds[1].sets[0], vec![1, 2]);
        assert_eq!(
            result.trace.rounds[1].break_event,
            Some(BreakEvent {
                node: 3,
                set_index: 0
            })
        );
        // round 3 re-collects the skipped sellers at lower prices
        assert_eq!(result.trace.rounds[2].sets[0], vec![0, 3]);
        assert_eq!(result.rounds, 3);
        // seller 3 was offered B, then B/ρ_2 at the break, then B/ρ_3
        assert_eq!(
            result.trace.price_history[3],
            vec![1.0, 1.0 / (rho2 / 1.0), 1.0 / (rho3 / 1.0)]
        );
        // first maximum wins the value tie between rounds 3 and 2
        assert_eq!(result.winners, vec![0, 3]);
        assert_eq!(result.valuation, 2.0);
        assert_eq!(
            result.payments,
            vec![1.0 / (rho3 / 1.0), 1.0 / (rho3 / 1.0)]
        );
    }

    #[test]
    fn deterministic_across_runs() {
        let (oracle, _) = disjoint_instance();
        let params: MechanismParams<f64> = Preset::Vm.params();
        let run = || {
            let mut market = Market::truthful(&[0.1, 0.1], 1.0).unwrap();
            bfm_vm(&oracle, &mut market, &params).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_swm_params() {
        let (oracle, mut market) = disjoint_instance();
        let params: MechanismParams<f64> = Preset::SwmMonotone.params();
        assert!(matches!(
            bfm_vm(&oracle, &mut market, &params).unwrap_err(),
            MechanismError::InvalidParams(_)
        ));
    }
}
