//! Small dense semidefinite programming layer: the interior-point core, the
//! Hermitian-block problem container, and the five coarse-graining programs.

pub mod embed;
pub mod problem;
pub mod programs;
pub mod solver;

pub use embed::{complex_to_real, decode_embedded, RealMatrix};
pub use problem::{
    BlockId, MatrixTerm, ScalarId, SdpCertificate, SdpError, SdpProblem, SdpResiduals,
    SdpSolution, SdpStatus,
};
pub use solver::{ConeCertificate, ConeProblem, ConeSettings, ConeSolution, ConeStatus};
