//! Asymptotic errors of kernel and random-feature estimators trained on
//! rules-and-facts data, with a Monte Carlo oracle to check them.
//!
//! Solvers are generic over the scalar type; the aliases below fix it to `f64`.

pub mod bayes;
pub mod channel;
pub mod kernels;
pub mod montecarlo;
pub mod numerics;
pub mod state_eqs;

pub use channel::{Label, Loss};
pub use kernels::{Activation, FamilyKind, KernelFamily};

pub type BoSolution = bayes::BoSolution<f64>;
pub type BayesSolver = bayes::BayesSolver<f64>;
pub type KernelGeometry = kernels::KernelGeometry<f64>;
pub type OrderParams = state_eqs::OrderParams<f64>;
pub type Conjugates = state_eqs::Conjugates<f64>;
pub type Errors = state_eqs::Errors<f64>;
pub type LambdaChoice = state_eqs::LambdaChoice<f64>;
pub type ErmSpec = state_eqs::ErmSpec<f64>;
pub type RfSpec = state_eqs::RfSpec<f64>;
pub type KernelSolution = state_eqs::KernelSolution<f64>;
pub type RfSolution = state_eqs::RfSolution<f64>;
pub type LambdaOpt = state_eqs::LambdaOpt<f64>;
pub type AngleSearch = state_eqs::AngleSearch<f64>;
pub type StateEqSolver = state_eqs::StateEqSolver<f64>;
