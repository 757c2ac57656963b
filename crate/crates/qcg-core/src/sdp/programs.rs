//! The five coarse-graining optimization programs.
//!
//! All of them express the commutativity requirement
//! `Gamma . Lambda_CG = Lambda_CG . U` as a linear equality between Choi
//! operators on the joint input/output space, combined with CPTP constraints
//! on the unknowns:
//!
//! * [`diamond_norm`]: worst-case distinguishability of two channels.
//! * [`closest_state_independent`]: the nearest (in diamond norm) exact
//!   emergent channel to a given Petz candidate, when one exists at all.
//! * [`feasibility_emergent`]: plain existence of an exact emergent channel.
//! * [`cg_robustness`]: how much of a given noise can be mixed into a
//!   compatible unitary before compatibility is lost.
//! * [`compatibilize`]: whether mixing an arbitrary channel into an
//!   incompatible unitary can restore compatibility at a given weight, with
//!   [`gamma_threshold`] locating the boundary weight by bisection.

use thiserror::Error;

use super::problem::{
    BlockId, MatrixTerm, ScalarId, SdpCertificate, SdpProblem, SdpResiduals, SdpSolution,
    SdpStatus,
};
use crate::channels::{
    compose_via_choi, is_cptp, kraus_to_choi, ChannelError, ConditionalState, KrausChannel,
    StateForm,
};
use crate::linalg::{partial_trace, BipartiteDims, ComplexMatrix, Subsystem};
use crate::scenarios::Scenario;

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("solver did not reach a conclusive status: {status:?} (primal {:.2e}, dual {:.2e}, gap {:.2e})", residuals.primal, residuals.dual, residuals.gap)]
    Solver { status: SdpStatus, residuals: SdpResiduals },
    #[error("the base unitary is not compatible with the coarse-graining, robustness is undefined")]
    BaseIncompatible,
    #[error("mixing weight must lie in [0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("gamma_threshold needs a feasible problem at gamma = 0")]
    InfeasibleAtZero,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Sdp(#[from] super::problem::SdpError),
}

/// Feasibility-style outcome: either a value or an infeasibility certificate.
#[derive(Debug)]
pub enum Feasibility<T> {
    Feasible(T),
    Infeasible(SdpCertificate),
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

fn conclusive<T>(
    sol: SdpSolution,
    on_optimal: impl FnOnce(&SdpSolution) -> T,
) -> Result<Feasibility<T>, ProgramError> {
    match sol.status {
        SdpStatus::Optimal => Ok(Feasibility::Feasible(on_optimal(&sol))),
        SdpStatus::Infeasible => Ok(Feasibility::Infeasible(
            sol.certificate.expect("infeasible solutions carry a certificate"),
        )),
        status => Err(ProgramError::Solver { status, residuals: sol.residuals }),
    }
}

/// Choi data of one scenario at a fixed time.
struct ScenarioData {
    /// Choi state of the microscopic unitary, on `A (x) B`.
    rho_ba: ConditionalState,
    /// Choi state of the coarse-graining, on `A (x) C` (same map on `B (x) D`).
    lambda: ConditionalState,
    /// Fixed right-hand side of the commutativity equality, on `A (x) D`.
    rhs_commut: ComplexMatrix,
}

fn scenario_data(sc: &Scenario, t: f64) -> ScenarioData {
    let rho_ba = kraus_to_choi(&sc.unitary(t));
    let lambda = kraus_to_choi(&sc.cg());
    let rhs_commut = compose_via_choi(&lambda, &rho_ba)
        .expect("catalog dimensions always compose")
        .matrix()
        .clone();
    ScenarioData { rho_ba, lambda, rhs_commut }
}

/// `theta |-> Choi(Theta . Lambda_CG)`, linear in the candidate emergent
/// channel's Choi matrix.
fn emergent_side_op(
    lambda: &ConditionalState,
    emergent_dims: BipartiteDims,
) -> impl Fn(&ComplexMatrix) -> ComplexMatrix {
    let lambda = lambda.clone();
    move |h: &ComplexMatrix| {
        let cs = ConditionalState::new(emergent_dims, StateForm::Choi, h.clone())
            .expect("basis matrices have the block side");
        compose_via_choi(&cs, &lambda)
            .expect("dimensions fixed by the program")
            .matrix()
            .clone()
    }
}

/// `sigma |-> scale * Choi(Lambda_CG . Sigma)`, linear in the microscopic
/// channel's Choi matrix.
fn micro_side_op(
    lambda: &ConditionalState,
    micro_dims: BipartiteDims,
    scale: f64,
) -> impl Fn(&ComplexMatrix) -> ComplexMatrix {
    let lambda = lambda.clone();
    move |h: &ComplexMatrix| {
        let cs = ConditionalState::new(micro_dims, StateForm::Choi, h.clone())
            .expect("basis matrices have the block side");
        compose_via_choi(&lambda, &cs)
            .expect("dimensions fixed by the program")
            .matrix()
            .scale_re(scale)
    }
}

fn trace_out_conditioned(dims: BipartiteDims) -> impl Fn(&ComplexMatrix) -> ComplexMatrix {
    move |h: &ComplexMatrix| partial_trace(h, dims, Subsystem::A).expect("side checked")
}

/// Install `eps I >= Tr_out(Z + X)` via a PSD slack block and return the
/// `eps` handle. `Z`, `X` live on `dims`, the slack on the conditioning
/// factor.
fn add_diamond_ball(
    p: &mut SdpProblem,
    z: BlockId,
    x: BlockId,
    dims: BipartiteDims,
) -> Result<ScalarId, ProgramError> {
    let eps = p.add_scalar("eps");
    let slack = p.add_psd_block("diamond_slack", dims.dim_a);
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(z, Box::new(trace_out_conditioned(dims))),
            MatrixTerm::Block(x, Box::new(trace_out_conditioned(dims))),
            MatrixTerm::Block(slack, Box::new(|h: &ComplexMatrix| h.clone())),
            MatrixTerm::Scalar(eps, ComplexMatrix::identity(dims.dim_a).scale_re(-1.0)),
        ],
        ComplexMatrix::zeros(dims.dim_a, dims.dim_a),
    )?;
    Ok(eps)
}

/// Diamond norm of a Hermiticity-preserving map given as a Choi-form
/// difference: minimize `eps` with `rho = Z - X`, `Z, X >= 0`,
/// `eps I >= Tr_out(Z + X)`.
pub fn diamond_norm(delta_choi: &ConditionalState) -> Result<f64, ProgramError> {
    let dims = delta_choi.dims();
    let n = dims.total();
    let mut p = SdpProblem::new();
    let z = p.add_psd_block("Z", n);
    let x = p.add_psd_block("X", n);
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(z, Box::new(|h: &ComplexMatrix| h.clone())),
            MatrixTerm::Block(x, Box::new(|h: &ComplexMatrix| h.scale_re(-1.0))),
        ],
        delta_choi.choi_matrix(),
    )?;
    let eps = add_diamond_ball(&mut p, z, x, dims)?;
    p.minimize_scalar(eps, 1.0);
    let sol = p.solve_default();
    match sol.status {
        SdpStatus::Optimal => Ok(sol.scalar(eps)),
        status => Err(ProgramError::Solver { status, residuals: sol.residuals }),
    }
}

/// Diamond distance between two channels given as Kraus families.
pub fn diamond_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64, ProgramError> {
    let ca = kraus_to_choi(a);
    let cb = kraus_to_choi(b);
    let delta =
        ConditionalState::new(ca.dims(), StateForm::Choi, ca.matrix().sub(cb.matrix()))?;
    diamond_norm(&delta)
}

/// Closest state-independent emergent channel to a Petz candidate: minimize
/// `eps` such that the commutativity equality holds exactly, the unknown is
/// CPTP, and its diamond distance to the candidate is at most `eps`.
/// Infeasible exactly when no state-independent emergent channel exists.
pub fn closest_state_independent(
    petz: &KrausChannel,
    sc: &Scenario,
    t: f64,
) -> Result<Feasibility<(f64, ConditionalState)>, ProgramError> {
    let data = scenario_data(sc, t);
    let emergent_dims = BipartiteDims::new(sc.cg().dim_out(), sc.cg().dim_out());
    let petz_choi = kraus_to_choi(petz);
    let n = emergent_dims.total();

    let mut p = SdpProblem::new();
    let rho_dc = p.add_psd_block("rho_DC", n);
    let z = p.add_psd_block("Z", n);
    let x = p.add_psd_block("X", n);
    // commutativity
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(
            rho_dc,
            Box::new(emergent_side_op(&data.lambda, emergent_dims)),
        )],
        data.rhs_commut.clone(),
    )?;
    // diamond ball around the Petz candidate: petz - rho = Z - X
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(rho_dc, Box::new(|h: &ComplexMatrix| h.clone())),
            MatrixTerm::Block(z, Box::new(|h: &ComplexMatrix| h.clone())),
            MatrixTerm::Block(x, Box::new(|h: &ComplexMatrix| h.scale_re(-1.0))),
        ],
        petz_choi.choi_matrix(),
    )?;
    // trace preservation of the unknown
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(rho_dc, Box::new(trace_out_conditioned(emergent_dims)))],
        ComplexMatrix::identity(emergent_dims.dim_a),
    )?;
    let eps = add_diamond_ball(&mut p, z, x, emergent_dims)?;
    p.minimize_scalar(eps, 1.0);

    let sol = p.solve_default();
    conclusive(sol, |sol| {
        let channel =
            ConditionalState::new(emergent_dims, StateForm::Choi, sol.block(rho_dc).clone())
                .expect("block side matches dims");
        (sol.scalar(eps), channel)
    })
}

/// Existence of an exact, state-independent emergent channel: find a CPTP
/// Choi state satisfying the commutativity equality.
pub fn feasibility_emergent(
    sc: &Scenario,
    t: f64,
) -> Result<Feasibility<ConditionalState>, ProgramError> {
    let data = scenario_data(sc, t);
    let emergent_dims = BipartiteDims::new(sc.cg().dim_out(), sc.cg().dim_out());
    let mut p = SdpProblem::new();
    let rho_dc = p.add_psd_block("rho_DC", emergent_dims.total());
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(
            rho_dc,
            Box::new(emergent_side_op(&data.lambda, emergent_dims)),
        )],
        data.rhs_commut.clone(),
    )?;
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(rho_dc, Box::new(trace_out_conditioned(emergent_dims)))],
        ComplexMatrix::identity(emergent_dims.dim_a),
    )?;
    let sol = p.solve_default();
    conclusive(sol, |sol| {
        ConditionalState::new(emergent_dims, StateForm::Choi, sol.block(rho_dc).clone())
            .expect("block side matches dims")
    })
}

/// CG-compatibility robustness `r_c = 1 - min gamma` of a compatible
/// unitary against a fixed noise channel: one minus the smallest surviving
/// weight of the unitary in a mixture that still admits an emergent channel.
pub fn cg_robustness(sc: &Scenario, noise: &KrausChannel, t: f64) -> Result<f64, ProgramError> {
    let unitary = sc.unitary(t);
    if noise.dim_in() != unitary.dim_in() || noise.dim_out() != unitary.dim_out() {
        return Err(ProgramError::Channel(ChannelError::DimensionMismatch(format!(
            "noise is {}->{}, scenario unitary is {}->{}",
            noise.dim_in(),
            noise.dim_out(),
            unitary.dim_in(),
            unitary.dim_out()
        ))));
    }
    match feasibility_emergent(sc, t)? {
        Feasibility::Feasible(_) => {}
        Feasibility::Infeasible(_) => return Err(ProgramError::BaseIncompatible),
    }
    let data = scenario_data(sc, t);
    let micro_dims = data.rho_ba.dims();
    let rho = data.rho_ba.matrix().clone();
    let phi = kraus_to_choi(noise).matrix().clone();
    let emergent_dims = BipartiteDims::new(sc.cg().dim_out(), sc.cg().dim_out());

    let mut p = SdpProblem::new();
    let sigma = p.add_psd_block("sigma_BA", micro_dims.total());
    let omega = p.add_psd_block("omega_DC", emergent_dims.total());
    let gamma = p.add_scalar("gamma");
    let gamma_slack = p.add_scalar("one_minus_gamma");
    // sigma = gamma rho + (1 - gamma) phi
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(sigma, Box::new(|h: &ComplexMatrix| h.clone())),
            MatrixTerm::Scalar(gamma, phi.sub(&rho)),
        ],
        phi.clone(),
    )?;
    // commutativity for the mixture
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(omega, Box::new(emergent_side_op(&data.lambda, emergent_dims))),
            MatrixTerm::Block(sigma, Box::new(micro_side_op(&data.lambda, micro_dims, -1.0))),
        ],
        ComplexMatrix::zeros(data.rhs_commut.rows(), data.rhs_commut.cols()),
    )?;
    // CPTP of the emergent side
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(omega, Box::new(trace_out_conditioned(emergent_dims)))],
        ComplexMatrix::identity(emergent_dims.dim_a),
    )?;
    // gamma stays in [0, 1]
    p.add_scalar_constraint(vec![], vec![(gamma, 1.0), (gamma_slack, 1.0)], 1.0)?;
    p.minimize_scalar(gamma, 1.0);

    let sol = p.solve_default();
    match sol.status {
        SdpStatus::Optimal => Ok((1.0 - sol.scalar(gamma)).clamp(0.0, 1.0)),
        status => Err(ProgramError::Solver { status, residuals: sol.residuals }),
    }
}

/// Try to render an incompatible unitary compatible by mixing in an
/// arbitrary channel at weight `1 - gamma`: find CPTP `Psi` and an emergent
/// `Theta` so that `gamma U + (1-gamma) Psi` commutes with the
/// coarse-graining. Both are returned as Choi states.
pub fn compatibilize(
    sc: &Scenario,
    t: f64,
    gamma: f64,
) -> Result<Feasibility<(ConditionalState, ConditionalState)>, ProgramError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ProgramError::GammaOutOfRange(gamma));
    }
    let data = scenario_data(sc, t);
    let micro_dims = data.rho_ba.dims();
    let emergent_dims = BipartiteDims::new(sc.cg().dim_out(), sc.cg().dim_out());

    let mut p = SdpProblem::new();
    let psi = p.add_psd_block("psi_BA", micro_dims.total());
    let theta = p.add_psd_block("theta_DC", emergent_dims.total());
    // Choi(Theta . Lambda) - (1-gamma) Choi(Lambda . Psi) = gamma Choi(Lambda . U)
    p.add_matrix_constraint(
        vec![
            MatrixTerm::Block(theta, Box::new(emergent_side_op(&data.lambda, emergent_dims))),
            MatrixTerm::Block(
                psi,
                Box::new(micro_side_op(&data.lambda, micro_dims, -(1.0 - gamma))),
            ),
        ],
        data.rhs_commut.scale_re(gamma),
    )?;
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(psi, Box::new(trace_out_conditioned(micro_dims)))],
        ComplexMatrix::identity(micro_dims.dim_a),
    )?;
    p.add_matrix_constraint(
        vec![MatrixTerm::Block(theta, Box::new(trace_out_conditioned(emergent_dims)))],
        ComplexMatrix::identity(emergent_dims.dim_a),
    )?;

    let sol = p.solve_default();
    let out = conclusive(sol, |sol| {
        let psi_cs = ConditionalState::new(micro_dims, StateForm::Choi, sol.block(psi).clone())
            .expect("block side matches dims");
        let theta_cs =
            ConditionalState::new(emergent_dims, StateForm::Choi, sol.block(theta).clone())
                .expect("block side matches dims");
        (psi_cs, theta_cs)
    })?;
    if let Feasibility::Feasible((psi_cs, theta_cs)) = &out {
        // solver-grade approximations must still pass a loose CPTP audit
        for cs in [psi_cs, theta_cs] {
            let report = is_cptp(cs, 1e-7);
            if !report.ok {
                return Err(ProgramError::Solver {
                    status: SdpStatus::NumericalFailure,
                    residuals: SdpResiduals {
                        primal: report.tp_residual,
                        dual: 0.0,
                        gap: report.min_eigenvalue.abs(),
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Largest mixing weight (within `tol`) at which [`compatibilize`] stays
/// feasible, located by bisection from the always-feasible `gamma = 0`.
pub fn gamma_threshold(sc: &Scenario, t: f64, tol: f64) -> Result<f64, ProgramError> {
    if !compatibilize(sc, t, 0.0)?.is_feasible() {
        return Err(ProgramError::InfeasibleAtZero);
    }
    if compatibilize(sc, t, 1.0)?.is_feasible() {
        return Ok(1.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if compatibilize(sc, t, mid)?.is_feasible() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
