//! Desk-scale Monte-Carlo runs of the achievability schemes: typical sets,
//! covering and binning searches, block-Markov transmission, and
//! square-root-measurement decoding.

pub mod codebook;
pub mod gentle;
pub mod sim;
pub mod srm;
pub mod typical;

pub use codebook::{covering_encode, CodeRates, CodeSizes, Codebook, CoverOutcome};
pub use gentle::{gentle_measurement_check, GentleOutcome};
pub use sim::{
    simulate_binning_nc, simulate_block_markov_sc, simulate_covering, CoveringReport, SimConfig,
    SimReport,
};
pub use srm::{sqrt_measurement_decoder, srm_povm, srm_probabilities, ProductState};
pub use typical::{typical_set_test, TypicalityConfig, TypicalityKind};
