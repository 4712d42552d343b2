//! Budget-feasible descending-clock procurement mechanisms for submodular
//! objectives.
//!
//! The library provides:
//! - query-counting submodular valuation oracles (coverage over graph
//!   neighborhoods, similarity-diversity over feature vectors, explicit
//!   tables) in [`oracle`];
//! - a simulated seller market with private costs behind a clock-offer
//!   interface in [`market`];
//! - the two clock mechanisms, BFM-SWM for welfare maximization and BFM-VM
//!   for valuation maximization, with full audit traces in [`mechanism`];
//! - the regularized-greedy baselines with budget truncation in
//!   [`baselines`];
//! - brute-force optima, property audits, guarantee checks, and
//!   strategyproofness probes in [`verify`];
//! - instance generators and the sweep/summary experiment harness in
//!   [`harness`].
//!
//! Core math is generic over the scalar type via [`scalar::Real`] (f32 or
//! f64); the aliases below pin the default f64 instantiation that the
//! harness and CLI use.

// validation sites use `!(x > y)` so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod harness;
pub mod market;
pub mod mechanism;
pub mod oracle;
pub mod scalar;
pub mod verify;

pub use scalar::Real;

/// Dense node identifier within a ground set 0..n−1.
pub type NodeId = u32;

/// Default scalar for valuations, costs, prices, and thresholds.
pub type Value = f64;

/// Query-counting valuation oracle at the default scalar.
pub type Oracle = oracle::ValuationOracle<Value>;

/// Seller market at the default scalar.
pub type Market = market::Market<Value>;

/// Mechanism parameters at the default scalar.
pub type MechanismParams = mechanism::MechanismParams<Value>;

/// Mechanism result at the default scalar.
pub type MechanismResult = mechanism::MechanismResult<Value>;

/// Auction trace at the default scalar.
pub type AuctionTrace = mechanism::AuctionTrace<Value>;
