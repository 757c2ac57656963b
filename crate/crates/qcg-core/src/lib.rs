//! Quantum coarse-graining toolkit.
//!
//! Implements the conditional-states view of coarse-grained quantum
//! dynamics: channels as Choi/Jamiolkowski operators, quantum Bayes
//! inversion and the Petz recovery channel, a catalog of four two-qubit
//! benchmark scenarios with analytic emergent dynamics, and a small dense
//! semidefinite-program solver with the five optimization programs used to
//! probe when a state-independent emergent description exists.

pub mod bayes;
pub mod bloch;
pub mod channels;
pub mod linalg;
pub mod scenarios;
pub mod sdp;

pub use bayes::{
    bayes_invert, classical_emergent, commutation_residual, hybrid_measurement_emergent,
    hybrid_preparation_emergent, measure_prepare_state, mp_emergent, petz_emergent, petz_map,
    star_product, BayesError, Direction, Generator, PetzRecovery, StochasticMatrix,
};
pub use bloch::{bloch_to_rho, qubit_bloch, qubit_from_bloch, rho_to_bloch, LabSpace};
pub use channels::{
    adjoint_channel, apply_via_choi, apply_via_jam, choi_to_kraus, compose_via_choi, is_cptp,
    kraus_to_choi, kraus_to_jam, ChannelError, ConditionalState, CptpReport, KrausChannel,
    StateForm,
};
pub use linalg::{
    matrix_sqrt_psd, partial_trace, partial_transpose, pinv_psd, swap_factors, tensor_product,
    trace_norm, BipartiteDims, ComplexMatrix, HermitianEigen, LinalgError, Subsystem, C64,
};
pub use scenarios::{
    analytic_emergent, bns_channel, cg_bloch_bns, condition_residual, decompose_ra_rb,
    ptrace_channel, random_channel, random_density, random_unitary, scenario_lab_map,
    swap_channel, werner_state, z_channel, AnalyticVerdict, Scenario, ScenarioError,
};
