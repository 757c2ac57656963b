//! Bayesian machinery over conditional states: the star product, quantum
//! Bayes inversion, the Petz recovery channel, and the constructive emergent
//! dynamics for the classical, measure-and-prepare and hybrid diagrams.
//!
//! The inversion weight `rho_A rho_B^{-1}` is realized as the tensor product
//! `rho_A (x) pinv(rho_B)` acting on the respective factors; the classical
//! reduction test pins this reading down against the scalar Bayes rule.

use thiserror::Error;

use crate::channels::{
    apply_via_jam, ChannelError, ConditionalState, KrausChannel, StateForm,
};
use crate::linalg::{
    matrix_sqrt_psd, pinv_sqrt_psd, psd_rank, swap_factors, tensor_product, BipartiteDims, C64,
    ComplexMatrix, LinalgError,
};

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("marginal state has no support on some outcome")]
    ZeroMarginal,
    #[error("generator maps to a zero-rank marginal, cannot recover")]
    DegenerateGenerator,
    #[error("POVM does not sum to identity: residual {residual:.3e}")]
    PovmIncomplete { residual: f64 },
    #[error("preparation {index} is not a density operator: {detail}")]
    InvalidPrep { index: usize, detail: String },
    #[error("generator is not a density operator: {detail}")]
    InvalidGenerator { detail: String },
    #[error("weight matrix is not positive semidefinite")]
    NotPsd,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("stochastic matrix column {column} sums to {sum}, expected 1")]
    NotStochastic { column: usize, sum: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// A prior state used to build Bayes inversions and Petz recoveries.
#[derive(Debug, Clone)]
pub struct Generator {
    rho: ComplexMatrix,
    label: String,
}

impl Generator {
    pub fn new(rho: ComplexMatrix, label: impl Into<String>) -> Result<Self, BayesError> {
        if !rho.is_square() {
            return Err(BayesError::InvalidGenerator {
                detail: format!("matrix is {}x{}", rho.rows(), rho.cols()),
            });
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(BayesError::InvalidGenerator { detail: format!("trace is {tr}") });
        }
        let min = rho.eigh()?.min();
        if min < -1e-10 {
            return Err(BayesError::InvalidGenerator {
                detail: format!("min eigenvalue is {min:.3e}"),
            });
        }
        Ok(Self { rho, label: label.into() })
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Column-stochastic matrix: `p[(y, x)] = P(Y=y | X=x)`, columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    outputs: usize,
    inputs: usize,
    p: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(outputs: usize, inputs: usize, p: Vec<f64>) -> Result<Self, BayesError> {
        assert_eq!(p.len(), outputs * inputs);
        for x in 0..inputs {
            let sum: f64 = (0..outputs).map(|y| p[y * inputs + x]).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(BayesError::NotStochastic { column: x, sum });
            }
        }
        Ok(Self { outputs, inputs, p })
    }

    pub fn identity(n: usize) -> Self {
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0;
        }
        Self { outputs: n, inputs: n, p }
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.p[y * self.inputs + x]
    }

    /// Matrix product `self . inner`, composing conditional distributions.
    pub fn compose(&self, inner: &StochasticMatrix) -> Result<StochasticMatrix, BayesError> {
        if self.inputs != inner.outputs {
            return Err(BayesError::DimensionMismatch(format!(
                "cannot chain {}x{} after {}x{}",
                self.outputs, self.inputs, inner.outputs, inner.inputs
            )));
        }
        let mut p = vec![0.0; self.outputs * inner.inputs];
        for y in 0..self.outputs {
            for x in 0..inner.inputs {
                let mut acc = 0.0;
                for m in 0..self.inputs {
                    acc += self.get(y, m) * inner.get(m, x);
                }
                p[y * inner.inputs + x] = acc;
            }
        }
        StochasticMatrix::new(self.outputs, inner.inputs, p)
    }

    pub fn apply(&self, dist: &[f64]) -> Vec<f64> {
        assert_eq!(dist.len(), self.inputs);
        (0..self.outputs)
            .map(|y| (0..self.inputs).map(|x| self.get(y, x) * dist[x]).sum())
            .collect()
    }

    /// Embed as a diagonal conditional state on `X (x) Y` (Jamiolkowski and
    /// Choi coincide for diagonal operators).
    pub fn to_conditional_state(&self) -> ConditionalState {
        let dims = BipartiteDims::new(self.inputs, self.outputs);
        let mut m = ComplexMatrix::zeros(dims.total(), dims.total());
        for x in 0..self.inputs {
            for y in 0..self.outputs {
                let idx = x * self.outputs + y;
                m[(idx, idx)] = C64::new(self.get(y, x), 0.0);
            }
        }
        ConditionalState::new(dims, StateForm::Jamiolkowski, m).expect("dims match by construction")
    }
}

/// The star product `M_AB * N_A = (N_A^{1/2} (x) I_B) M_AB (N_A^{1/2} (x) I_B)`.
pub fn star_product(
    m_ab: &ComplexMatrix,
    n_a: &ComplexMatrix,
    dims: BipartiteDims,
) -> Result<ComplexMatrix, BayesError> {
    if m_ab.rows() != dims.total() || !m_ab.is_square() {
        return Err(BayesError::DimensionMismatch(format!(
            "star product operand is {}x{}, expected {}x{}",
            m_ab.rows(),
            m_ab.cols(),
            dims.total(),
            dims.total()
        )));
    }
    if n_a.rows() != dims.dim_a || n_a.cols() != dims.dim_a {
        return Err(BayesError::DimensionMismatch(format!(
            "weight is {}x{}, conditioning factor is {}-dimensional",
            n_a.rows(),
            n_a.cols(),
            dims.dim_a
        )));
    }
    let root = matrix_sqrt_psd(n_a).map_err(|e| match e {
        LinalgError::NotPsd { .. } => BayesError::NotPsd,
        other => BayesError::Linalg(other),
    })?;
    let sandwich = tensor_product(&root, &ComplexMatrix::identity(dims.dim_b));
    Ok(sandwich.matmul(m_ab).matmul(&sandwich))
}

/// Quantum Bayes inversion: from a conditional state of `B` given `A` and a
/// prior on `A`, produce the conditional state of `A` given `B`.
///
/// Works on the causal form; the output is tagged Jamiolkowski with the new
/// conditioning factor (`B`) first. The result is NOT guaranteed CPTP-valid
/// in the fully quantum case, which is exactly why the Petz channel exists.
pub fn bayes_invert(
    cs_ba: &ConditionalState,
    rho_a: &ComplexMatrix,
) -> Result<ConditionalState, BayesError> {
    let dims = cs_ba.dims();
    if rho_a.rows() != dims.dim_a || rho_a.cols() != dims.dim_a {
        return Err(BayesError::DimensionMismatch(format!(
            "prior is {}x{}, conditioning factor is {}-dimensional",
            rho_a.rows(),
            rho_a.cols(),
            dims.dim_a
        )));
    }
    let rho_b = apply_via_jam(&cs_ba.to_jamiolkowski(), rho_a)?;
    let root_a = matrix_sqrt_psd(rho_a).map_err(|e| match e {
        LinalgError::NotPsd { .. } => BayesError::NotPsd,
        other => BayesError::Linalg(other),
    })?;
    let inv_root_b = pinv_sqrt_psd(&rho_b, 1e-12).map_err(|e| match e {
        LinalgError::ZeroMatrix => BayesError::ZeroMarginal,
        other => BayesError::Linalg(other),
    })?;
    let sandwich = tensor_product(&root_a, &inv_root_b);
    let inverted = sandwich.matmul(&cs_ba.jamiolkowski_matrix()).matmul(&sandwich);
    // reorder to put the new conditioning factor (B) first
    let swapped = swap_factors(&inverted, dims)?;
    Ok(ConditionalState::new(
        BipartiteDims::new(dims.dim_b, dims.dim_a),
        StateForm::Jamiolkowski,
        swapped,
    )?)
}

/// Petz recovery of a coarse-graining: Kraus family
/// `{rho_A^{1/2} K_i^dag rho_C^{-1/2}}` with support-restricted inverses.
#[derive(Debug, Clone)]
pub struct PetzRecovery {
    pub channel: KrausChannel,
    /// Rank of the propagated marginal `rho_C` at the requested tolerance.
    pub support_dim: usize,
    /// True when `rho_C` is full rank; only then is the recovery trace
    /// preserving on the whole output space.
    pub trace_preserving: bool,
}

/// Build the Petz recovery channel of `cg` with prior `rho_a`.
pub fn petz_map(
    cg: &KrausChannel,
    rho_a: &ComplexMatrix,
    rank_tol: f64,
) -> Result<PetzRecovery, BayesError> {
    if rho_a.rows() != cg.dim_in() {
        return Err(BayesError::DimensionMismatch(format!(
            "prior is {}x{}, channel input is {}-dimensional",
            rho_a.rows(),
            rho_a.cols(),
            cg.dim_in()
        )));
    }
    let rho_c = cg.apply(rho_a)?;
    let support_dim = psd_rank(&rho_c, rank_tol)?;
    if support_dim == 0 {
        return Err(BayesError::DegenerateGenerator);
    }
    let root_a = matrix_sqrt_psd(rho_a).map_err(|e| match e {
        LinalgError::NotPsd { .. } => BayesError::NotPsd,
        other => BayesError::Linalg(other),
    })?;
    let inv_root_c = pinv_sqrt_psd(&rho_c, rank_tol)?;
    let ops = cg
        .ops()
        .iter()
        .map(|k| root_a.matmul(&k.dagger()).matmul(&inv_root_c))
        .collect();
    let channel = KrausChannel::cp_map(ops)?;
    Ok(PetzRecovery { channel, support_dim, trace_preserving: support_dim == cg.dim_out() })
}

/// The Petz-based emergent dynamics `Gamma = cg . u . R_{A|C}`.
///
/// Commutes the coarse-graining diagram pointwise at the generator; away
/// from it the commutation residual is whatever it is, which is the entire
/// subject of the benchmark harness.
pub fn petz_emergent(
    u: &KrausChannel,
    cg: &KrausChannel,
    gen: &Generator,
) -> Result<KrausChannel, BayesError> {
    if u.dim_in() != u.dim_out() || u.dim_in() != cg.dim_in() {
        return Err(BayesError::DimensionMismatch(format!(
            "microscopic dynamics is {}->{} but coarse-graining input is {}",
            u.dim_in(),
            u.dim_out(),
            cg.dim_in()
        )));
    }
    let recovery = petz_map(cg, gen.rho(), 1e-12)?;
    Ok(cg.compose(u)?.compose(&recovery.channel)?)
}

/// Fully classical emergent dynamics
/// `P(Y|X) = sum_{r,s} P(Y|S=s) P(S=s|R=r) P(R=r|X)` with the leftmost arm
/// inverted by the scalar Bayes rule on `prior_r`.
pub fn classical_emergent(
    p_s_given_r: &StochasticMatrix,
    p_x_given_r: &StochasticMatrix,
    p_y_given_s: &StochasticMatrix,
    prior_r: &[f64],
) -> Result<StochasticMatrix, BayesError> {
    let nr = prior_r.len();
    if p_x_given_r.inputs() != nr || p_s_given_r.inputs() != nr {
        return Err(BayesError::DimensionMismatch(
            "conditional matrices do not share the R index".into(),
        ));
    }
    let nx = p_x_given_r.outputs();
    // P(x) = sum_r P(x|r) P(r)
    let px = p_x_given_r.apply(prior_r);
    // P(r|x) by Bayes
    let mut p_r_given_x = vec![0.0; nr * nx];
    for x in 0..nx {
        if px[x] <= 0.0 {
            return Err(BayesError::ZeroMarginal);
        }
        for r in 0..nr {
            p_r_given_x[r * nx + x] = p_x_given_r.get(x, r) * prior_r[r] / px[x];
        }
    }
    let p_r_given_x = StochasticMatrix::new(nr, nx, p_r_given_x)?;
    p_y_given_s.compose(p_s_given_r)?.compose(&p_r_given_x)
}

fn validate_povm(povm: &[ComplexMatrix], dim: usize) -> Result<(), BayesError> {
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (index, e) in povm.iter().enumerate() {
        if e.rows() != dim || e.cols() != dim {
            return Err(BayesError::DimensionMismatch(format!(
                "POVM element {index} is {}x{}, expected {dim}x{dim}",
                e.rows(),
                e.cols()
            )));
        }
        let min = e.eigh()?.min();
        if min < -1e-10 {
            return Err(BayesError::InvalidPrep {
                index,
                detail: format!("POVM element has eigenvalue {min:.3e}"),
            });
        }
        sum = sum.add(e);
    }
    let residual = sum.sub(&ComplexMatrix::identity(dim)).frobenius_norm();
    if residual > 1e-10 {
        return Err(BayesError::PovmIncomplete { residual });
    }
    Ok(())
}

fn validate_preps(preps: &[ComplexMatrix], dim: usize) -> Result<(), BayesError> {
    for (index, p) in preps.iter().enumerate() {
        if p.rows() != dim || p.cols() != dim {
            return Err(BayesError::InvalidPrep {
                index,
                detail: format!("is {}x{}, expected {dim}x{dim}", p.rows(), p.cols()),
            });
        }
        if (p.trace() - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(BayesError::InvalidPrep {
                index,
                detail: format!("trace is {}", p.trace()),
            });
        }
        let min = p.eigh()?.min();
        if min < -1e-10 {
            return Err(BayesError::InvalidPrep {
                index,
                detail: format!("min eigenvalue is {min:.3e}"),
            });
        }
    }
    Ok(())
}

/// Measure-and-prepare conditional state `sum_x E_x^A (x) rho_C^x` (the
/// conditioning factor first). Valid in both causal and acausal form.
pub fn measure_prepare_state(
    povm: &[ComplexMatrix],
    preps: &[ComplexMatrix],
) -> Result<ConditionalState, BayesError> {
    if povm.is_empty() || povm.len() != preps.len() {
        return Err(BayesError::DimensionMismatch(format!(
            "{} POVM elements vs {} preparations",
            povm.len(),
            preps.len()
        )));
    }
    let dim_a = povm[0].rows();
    let dim_c = preps[0].rows();
    validate_povm(povm, dim_a)?;
    validate_preps(preps, dim_c)?;
    let dims = BipartiteDims::new(dim_a, dim_c);
    let mut m = ComplexMatrix::zeros(dims.total(), dims.total());
    for (e, p) in povm.iter().zip(preps) {
        m = m.add(&tensor_product(e, p));
    }
    Ok(ConditionalState::new(dims, StateForm::Jamiolkowski, m)?)
}

/// Bayes-inverted measure-and-prepare arm: given the arm `(povm, preps)`
/// from `A` to `C` and a prior on `A`, return the recovered arm from `C` to
/// `A`, again in measure-and-prepare form.
fn invert_mp_arm(
    povm: &[ComplexMatrix],
    preps: &[ComplexMatrix],
    rho_a: &ComplexMatrix,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>), BayesError> {
    let root_a = matrix_sqrt_psd(rho_a).map_err(|_| BayesError::NotPsd)?;
    // rho_C = sum_x Tr(E_x rho_A) rho_C^x
    let dim_c = preps[0].rows();
    let mut rho_c = ComplexMatrix::zeros(dim_c, dim_c);
    let mut weights = Vec::with_capacity(povm.len());
    for (e, p) in povm.iter().zip(preps) {
        let w = e.matmul(rho_a).trace().re;
        weights.push(w);
        rho_c = rho_c.add(&p.scale_re(w));
    }
    let inv_root_c = pinv_sqrt_psd(&rho_c, 1e-12).map_err(|e| match e {
        LinalgError::ZeroMatrix => BayesError::ZeroMarginal,
        other => BayesError::Linalg(other),
    })?;
    let mut new_povm = Vec::new();
    let mut new_preps = Vec::new();
    for ((e, p), &w) in povm.iter().zip(preps).zip(&weights) {
        if w <= 1e-14 {
            continue;
        }
        new_povm.push(inv_root_c.matmul(p).matmul(&inv_root_c).scale_re(w));
        new_preps.push(root_a.matmul(e).matmul(&root_a).scale_re(1.0 / w));
    }
    if new_povm.is_empty() {
        return Err(BayesError::ZeroMarginal);
    }
    Ok((new_povm, new_preps))
}

/// Channel of a measure-and-prepare family, `rho -> sum_x Tr(E_x rho) rho_x`.
fn mp_channel(povm: &[ComplexMatrix], preps: &[ComplexMatrix]) -> Result<KrausChannel, BayesError> {
    // Kraus form via the eigendecompositions: for each outcome,
    // K_{x,l,m} = sqrt(lam_l mu_m) |u_l><v_m|.
    let mut ops = Vec::new();
    let dim_a = povm[0].rows();
    let dim_c = preps[0].rows();
    for (e, p) in povm.iter().zip(preps) {
        let eig_e = e.eigh()?;
        let eig_p = p.eigh()?;
        for (m_idx, &mu) in eig_e.values.iter().enumerate() {
            if mu <= 1e-14 {
                continue;
            }
            for (l_idx, &lam) in eig_p.values.iter().enumerate() {
                if lam <= 1e-14 {
                    continue;
                }
                let scale = (lam * mu).sqrt();
                let mut k = ComplexMatrix::zeros(dim_c, dim_a);
                for r in 0..dim_c {
                    for c in 0..dim_a {
                        k[(r, c)] = eig_p.vectors[(r, l_idx)]
                            * eig_e.vectors[(c, m_idx)].conj()
                            * scale;
                    }
                }
                ops.push(k);
            }
        }
    }
    Ok(KrausChannel::cp_map(ops)?)
}

/// Measure-and-prepare emergent dynamics
/// `Gamma = E^MP_{D|B} . U_{B|A} . E^MP_{A|C}`, with the left arm inverted
/// through the Bayes rule at the generator.
pub fn mp_emergent(
    mp_ca: (&[ComplexMatrix], &[ComplexMatrix]),
    mp_db: (&[ComplexMatrix], &[ComplexMatrix]),
    u: &KrausChannel,
    gen: &Generator,
) -> Result<KrausChannel, BayesError> {
    // validation happens in measure_prepare_state
    let _ = measure_prepare_state(mp_ca.0, mp_ca.1)?;
    let _ = measure_prepare_state(mp_db.0, mp_db.1)?;
    let (inv_povm, inv_preps) = invert_mp_arm(mp_ca.0, mp_ca.1, gen.rho())?;
    let left = mp_channel(&inv_povm, &inv_preps)?;
    let right = mp_channel(mp_db.0, mp_db.1)?;
    Ok(right.compose(u)?.compose(&left)?)
}

/// Direction of a hybrid emergent construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Hybrid measurement diagram: joint measurements on the two quantum
/// regions, one arm Bayes-inverted into a preparation. Returns the classical
/// channel between the measurement outcomes.
///
/// For `RightToLeft` the caller supplies the reversed unitary channel as `u`
/// and the generator is the prior on its input region.
pub fn hybrid_measurement_emergent(
    povm_in: &[ComplexMatrix],
    povm_out: &[ComplexMatrix],
    u: &KrausChannel,
    gen: &Generator,
    direction: Direction,
) -> Result<StochasticMatrix, BayesError> {
    // In LR mode povm_in measures region A (inverted into a preparation) and
    // povm_out measures region B. In RL mode the roles are mirrored; the
    // caller renames accordingly, so the computation is the same.
    let (inverted, read) = match direction {
        Direction::LeftToRight => (povm_in, povm_out),
        Direction::RightToLeft => (povm_out, povm_in),
    };
    let dim_in = u.dim_in();
    let dim_out = u.dim_out();
    validate_povm(inverted, dim_in)?;
    validate_povm(read, dim_out)?;
    let rho = gen.rho();
    if rho.rows() != dim_in {
        return Err(BayesError::DimensionMismatch(format!(
            "generator is {}-dimensional, unitary input is {}-dimensional",
            rho.rows(),
            dim_in
        )));
    }
    let root = matrix_sqrt_psd(rho).map_err(|_| BayesError::NotPsd)?;
    let mut p = vec![0.0; read.len() * inverted.len()];
    for (x, e_in) in inverted.iter().enumerate() {
        let w = e_in.matmul(rho).trace().re;
        if w <= 1e-12 {
            return Err(BayesError::ZeroMarginal);
        }
        let prep = root.matmul(e_in).matmul(&root).scale_re(1.0 / w);
        let evolved = u.apply(&prep)?;
        for (y, e_out) in read.iter().enumerate() {
            p[y * inverted.len() + x] = e_out.matmul(&evolved).trace().re.max(0.0);
        }
    }
    StochasticMatrix::new(read.len(), inverted.len(), p)
}

/// Hybrid preparation diagram: ensemble preparations over two classical
/// regions joined by a classical channel, one arm Bayes-inverted into a
/// measurement. Returns the quantum channel between the prepared regions.
pub fn hybrid_preparation_emergent(
    preps_in: &[ComplexMatrix],
    preps_out: &[ComplexMatrix],
    u_classical: &StochasticMatrix,
    prior_in: &[f64],
    direction: Direction,
) -> Result<KrausChannel, BayesError> {
    let (prior, classical, inverted, prepared) = match direction {
        Direction::LeftToRight => {
            (prior_in.to_vec(), u_classical.clone(), preps_in, preps_out)
        }
        Direction::RightToLeft => {
            // invert the classical channel: P(x|y) = P(y|x) P(x) / P(y)
            let nx = u_classical.inputs();
            let ny = u_classical.outputs();
            if prior_in.len() != nx {
                return Err(BayesError::DimensionMismatch(
                    "prior length does not match the classical channel input".into(),
                ));
            }
            let py = u_classical.apply(prior_in);
            let mut inv = vec![0.0; nx * ny];
            for y in 0..ny {
                if py[y] <= 0.0 {
                    return Err(BayesError::ZeroMarginal);
                }
                for x in 0..nx {
                    inv[x * ny + y] = u_classical.get(y, x) * prior_in[x] / py[y];
                }
            }
            (py, StochasticMatrix::new(nx, ny, inv)?, preps_out, preps_in)
        }
    };
    let dim_in = inverted[0].rows();
    validate_preps(inverted, dim_in)?;
    let dim_out = prepared[0].rows();
    validate_preps(prepared, dim_out)?;
    if prior.len() != inverted.len() || classical.inputs() != inverted.len() {
        return Err(BayesError::DimensionMismatch(
            "preparation list, prior and classical channel sizes disagree".into(),
        ));
    }
    // invert the input preparation arm into a POVM
    let mut rho_in = ComplexMatrix::zeros(dim_in, dim_in);
    for (p, &w) in inverted.iter().zip(&prior) {
        rho_in = rho_in.add(&p.scale_re(w));
    }
    let inv_root = pinv_sqrt_psd(&rho_in, 1e-12).map_err(|e| match e {
        LinalgError::ZeroMatrix => BayesError::ZeroMarginal,
        other => BayesError::Linalg(other),
    })?;
    let povm: Vec<ComplexMatrix> = inverted
        .iter()
        .zip(&prior)
        .map(|(p, &w)| inv_root.matmul(p).matmul(&inv_root).scale_re(w))
        .collect();
    // effective preparations sigma_x = sum_y P(y|x) rho_y
    let mut eff_preps = Vec::with_capacity(povm.len());
    for x in 0..povm.len() {
        let mut sigma = ComplexMatrix::zeros(dim_out, dim_out);
        for (y, p) in prepared.iter().enumerate() {
            let w = classical.get(y, x);
            if w != 0.0 {
                sigma = sigma.add(&p.scale_re(w));
            }
        }
        eff_preps.push(sigma);
    }
    mp_channel(&povm, &eff_preps)
}

/// Trace-norm commutation residual
/// `| Gamma(Lambda(rho)) - Lambda(U(rho)) |_1` of a candidate emergent
/// channel at one state.
pub fn commutation_residual(
    emergent: &KrausChannel,
    cg: &KrausChannel,
    u: &KrausChannel,
    rho: &ComplexMatrix,
) -> Result<f64, BayesError> {
    let lhs = emergent.apply(&cg.apply(rho)?)?;
    let rhs = cg.apply(&u.apply(rho)?)?;
    Ok(crate::linalg::trace_norm(&lhs.sub(&rhs)))
}
