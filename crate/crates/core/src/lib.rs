//! An executable laboratory for the hashed time-locked contract family.
//!
//! The crate models an abstract blockchain in which contracts are token/predicate
//! pairs, blocks hold one transaction each, and miners are drawn proportionally
//! to their power. On top of that ledger it provides:
//!
//! * [`contracts`] — predicate trees over the three primitives (signature,
//!   preimage, timeout), constructors for the deposit/collateral contract pair
//!   and the plain hashed time-locked contract, and the relaxed predicate.
//! * [`scriptvm`] — a stack-machine interpreter for the Bitcoin-script
//!   renditions of the same contracts, differentially tested against the
//!   predicate trees.
//! * [`protocol`] — the two-party setup/initiation/redeeming state machine and
//!   an ideal-functionality reference model, with a bounded equivalence checker.
//! * [`games`] — extensive-form games induced by the contracts, solved exactly
//!   by backward induction, plus Monte Carlo simulation with myopic and
//!   non-myopic miner policies.
//! * [`attack`] — closed-form bribery economics: attack thresholds, defense
//!   fees, and resistance-ratio tables.

pub mod attack;
pub mod contracts;
pub mod games;
pub mod ledger;
pub mod protocol;
pub mod rational;
pub mod scriptvm;

pub use contracts::{PredicateAst, RedeemPath, RedeemWitness};
pub use ledger::{
    Chain, Contract, ContractId, Digest, Hasher, MinerPopulation, PartyId, Preimage, TokenAmount,
    Transaction, TxId,
};
pub use rational::Ratio;
