//! Synthesis of stationary policies for general multichain MDPs under
//! steady-state and transient specifications, with independent analytic
//! verification (limiting-matrix computation) and empirical corroboration
//! (Monte Carlo simulation).
//!
//! The pipeline: model an MDP ([`mdp`]), classify its terminal components
//! ([`classify`]), build and solve the synthesis linear program for the
//! chosen policy class ([`lp`]), then verify the extracted policy exactly
//! ([`chain`]) and empirically ([`sim`]). Benchmark models live in [`env`].

pub mod chain;
pub mod classify;
pub mod env;
pub mod error;
pub mod graph;
pub mod lp;
pub mod mdp;
pub mod sim;

pub use chain::{verify_policy, VerificationReport};
pub use classify::{classify_chain, classify_mdp, policy_class, PolicyClassFlags, StateClassification};
pub use error::{Error, Result};
pub use lp::{synthesize, SimplexSolver, SynthMode, SynthesisConfig, SynthesisOutcome};
pub use mdp::{MarkovChain, Mdp, StationaryPolicy};
