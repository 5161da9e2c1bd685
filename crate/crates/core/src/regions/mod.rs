//! Achievable rate-distortion pairs under strictly-causal, causal,
//! non-causal and absent channel side information.

pub mod constructions;
pub mod estimation;
pub mod evaluate;
pub mod strategy;
pub mod sweep;

pub use constructions::Construction;
pub use estimation::{optimal_estimation_povm, ConditionalFamily, EstimationPovm};
pub use evaluate::{
    conditional_estimator, evaluate_strategy, evaluate_strategy_causal, evaluate_strategy_nc,
    evaluate_strategy_none, evaluate_strategy_sc, evaluate_with_optimal_estimator, sc_information,
    RatePoint, RateTerms, ScInformation,
};
pub use strategy::{trivial_z, CsiMode, InputStates, Strategy};
pub use sweep::{
    cardinality_bounds, sweep_region, FrontierPoint, OptimizerConfig, RegionFrontier, THREADS_ENV,
};
