//! Approval-voting payment mechanisms for crowdsourced multiple-choice
//! labelling, with exact expected-payment calculators, an exhaustive strategy
//! oracle, property verifiers and a worker population simulator.

pub mod cli;
pub mod error;
pub mod expectation;
pub mod mechanisms;
pub mod model;
pub mod sim;
pub mod strategy;
pub mod verify;

pub use error::{Error, Result};
pub use mechanisms::{Mechanism, Payment, PaymentRule};
pub use model::{BeliefProfile, Domain, Evaluation, MechanismConfig, OptionSet, SelectionPlan, ThresholdConfig, UtilitySpec};
