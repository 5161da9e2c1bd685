//! Dense complex linear algebra for finite-dimensional quantum states,
//! channels and measurements, plus entropy functionals in bits.

pub mod channel;
pub mod cq;
pub mod eigen;
pub mod entropy;
pub mod matrix;
pub mod povm;
pub mod state;

pub use channel::{apply_channel, KrausChannel};
pub use cq::{Axis, ClassicalQuantumState, Part};
pub use eigen::{eigh, eigvalsh, pinv_sqrt, psd_sqrt, HermitianEigen};
pub use entropy::{
    binary_entropy, conditional_quantum_mutual_information, entropy_of_matrix, partial_trace,
    partial_trace_matrix, quantum_mutual_information, shannon_entropy, von_neumann_entropy,
};
pub use matrix::{pauli, CMatrix, C64};
pub use povm::Povm;
pub use state::{DensityOperator, Ket};

/// Hermiticity, trace, PSD and Kraus-completeness tolerance.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// POVM completeness tolerance.
pub const POVM_TOL: f64 = 1e-8;
/// Eigenvalues below this count as zero in entropy sums.
pub const EIGEN_CLIP: f64 = 1e-12;
