//! Multi-fidelity best-arm identification: transport costs, the optimal
//! allocation oracle, the MF-GRAD sampling rule and an experiment harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod algorithms;
pub mod divergences;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod table;
pub mod transport;

pub use algorithms::{threshold, AlgoState, LearningRate, MfGradConfig, RewardSource, ThresholdMode};
pub use divergences::{kl, kl_minus, kl_plus, variance, RewardFamily};
pub use error::{Error, Result};
pub use harness::{run_batch, run_trial, Algo, ExperimentSpec, RunRecord, Summary};
pub use model::{
    cost_to_pull, preset, pull_to_cost, BanditInstance, FidelitySchedule, Normalization, ValidationReport, Violation,
    WeightVector,
};
pub use oracle::{lower_bound_cost, solve_oracle, zero_weight_mask, OracleSolution};
pub use scalar::Scalar;
pub use table::Table;
pub use transport::{big_f, glr_matrix, pair_matrix, solve_eta, solve_psi, subgradient_f, transport_pair, Regime};

pub type Instance = BanditInstance<f64>;
pub type Schedule = FidelitySchedule<f64>;
pub type Family = RewardFamily<f64>;
pub type Weights = WeightVector<f64>;
