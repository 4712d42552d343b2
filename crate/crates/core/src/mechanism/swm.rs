//! BFM-SWM: the budget-feasible descending-clock mechanism for submodular
//! welfare maximization.

use crate::market::{ClockMarket, Response};
use crate::oracle::ValuationOracle;
use crate::scalar::Real;
use crate::NodeId;

use super::{
    argmax_first, initial_screening, AuctionTrace, BreakEvent, Candidate, CountingOracle,
    MechanismError, MechanismParams, MechanismResult, RoundRecord,
};

/// Run the welfare-maximization clock auction.
///
/// The auction screens every seller at the full budget, then repeatedly: grows
/// the threshold ρ_t by α, rebuilds ℓ empty candidate sets, and walks the
/// remaining active sellers in ascending id order, skipping members of the
/// previous round's sets and the protected singleton u*. Each seller is priced
/// at min of its standing price and v(u|S_j)/(β + ρ_t/B) against the candidate
/// set j it benefits most; rejection removes it permanently. An acceptance
/// that would push a set's surplus v − p above ρ_t instead stores the seller
/// into u* and ends the round. The winner is the surplus-maximizing candidate
/// among the last two rounds' sets and u*.
///
/// Candidate-set values are cached so the per-seller greedy step costs exactly
/// ℓ oracle queries and the break check costs none.
pub fn bfm_swm<R: Real, M: ClockMarket<R>>(
    oracle: &ValuationOracle<R>,
    market: &mut M,
    params: &MechanismParams<R>,
) -> Result<MechanismResult<R>, MechanismError> {
    params.validate_swm()?;
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

    let mut rho = params.eps / params.alpha;
    let mut u_star: Option<NodeId> = None;
    let mut prev: Vec<Vec<NodeId>> = vec![Vec::new(); ell];
    let mut t = 0usize;

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
            .filter(|&u| active[u as usize] && !in_prev[u as usize] && u_star != Some(u))
            .collect();

        for &u in &snapshot {
            // Greedy choice of the candidate set where u contributes most.
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

            let candidate_price = best_marginal / (params.beta + rho / budget);
            let new_price = if candidate_price < price[u as usize] {
                candidate_price
            } else {
                price[u as usize]
            };
            if !(new_price > R::zero()) {
                // A non-positive offer can only be declined in a procurement
                // auction; exit the seller without posting it so the price
                // clock stays strictly positive.
                active[u as usize] = false;
                trace.exits[u as usize] = Some(t);
                continue;
            }
            price[u as usize] = new_price;
            trace.price_history[u as usize].push(new_price);
            match market.offer(u, new_price)? {
                Response::Reject => {
                    active[u as usize] = false;
                    trace.exits[u as usize] = Some(t);
                }
                Response::Accept => {
                    let union_payment = payments[best] + new_price;
                    if best_union - union_payment > rho {
                        // The set's surplus would exceed ρ_t: protect u as the
                        // singleton candidate and end the round.
                        u_star = Some(u);
                        trace.u_star_history.push(u);
                        break_event = Some(BreakEvent {
                            node: u,
                            set_index: best,
                        });
                        break;
                    }
                    sets[best].push(u);
                    values[best] = best_union;
                    payments[best] = union_payment;
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
        let exhausted =
            (0..n).all(|u| !active[u] || in_prev[u] || in_cur[u] || u_star == Some(u as NodeId));
        if exhausted {
            break;
        }
        prev = sets;
    }

    let rounds = t;
    let mut candidates: Vec<Candidate<R>> = Vec::new();
    let last = &trace.rounds[rounds - 1];
    for i in 0..ell {
        candidates.push(Candidate {
            members: last.sets[i].clone(),
            value: last.set_values[i],
            payment: last.set_payments[i],
        });
    }
    if rounds >= 2 {
        let before = &trace.rounds[rounds - 2];
        for i in 0..ell {
            candidates.push(Candidate {
                members: before.sets[i].clone(),
                value: before.set_values[i],
                payment: before.set_payments[i],
            });
        }
    }
    if let Some(star) = u_star {
        let value = counting.eval(&[star])?;
        candidates.push(Candidate {
            members: vec![star],
            value,
            payment: price[star as usize],
        });
    }

    let chosen = argmax_first(candidates.iter().map(|c| c.value - c.payment));
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
