//! Quantum channels as Kraus families and as conditional states.
//!
//! A channel `E: L(H_A) -> L(H_B)` is carried either by a list of Kraus
//! operators or by its conditional-state image on `H_A (x) H_B`, with the
//! conditioning factor always first. The acausal (Choi) form is
//! `(id (x) E) |Phi+><Phi+|` with the unnormalized maximally entangled state,
//! so a CPTP map is exactly a PSD operator whose partial trace over the
//! conditioned factor is the identity. The causal (Jamiolkowski) form is the
//! partial transpose of the Choi form on the conditioning factor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    partial_trace, partial_transpose, BipartiteDims, C64, ComplexMatrix, LinalgError, Subsystem,
};

/// Default tolerance for CPTP verification.
pub const CPTP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("Kraus list is empty")]
    EmptyKraus,
    #[error("Kraus operator {index} is {rows}x{cols}, expected {dim_out}x{dim_in}")]
    KrausShape { index: usize, rows: usize, cols: usize, dim_out: usize, dim_in: usize },
    #[error("channel is not trace preserving: |sum K^dag K - I| = {residual:.3e}")]
    NotTracePreserving { residual: f64 },
    #[error("conditional state is not CPTP: min eigenvalue {min_eigenvalue:.3e}, partial-trace residual {tp_residual:.3e}")]
    NotCptp { min_eigenvalue: f64, tp_residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A completely positive map as a list of Kraus operators, each
/// `dim_out x dim_in`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Build a channel, validating shapes and trace preservation at 1e-9.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let ch = Self::cp_map(ops)?;
        let residual = ch.tp_residual();
        if residual > CPTP_TOL {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Build a completely positive map without the trace-preservation check.
    /// Used for adjoints and support-restricted recoveries.
    pub fn cp_map(ops: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let first = ops.first().ok_or(ChannelError::EmptyKraus)?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for (index, op) in ops.iter().enumerate() {
            if op.rows() != dim_out || op.cols() != dim_in {
                return Err(ChannelError::KrausShape {
                    index,
                    rows: op.rows(),
                    cols: op.cols(),
                    dim_out,
                    dim_in,
                });
            }
        }
        Ok(Self { dim_in, dim_out, ops })
    }

    /// Unitary conjugation channel `rho -> U rho U^dag`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self, ChannelError> {
        Self::new(vec![u])
    }

    /// The identity channel on a `dim`-dimensional system.
    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, ops: vec![ComplexMatrix::identity(dim)] }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `|sum K^dag K - I|_F`.
    pub fn tp_residual(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.ops {
            acc = acc.add(&k.dagger().matmul(k));
        }
        acc.sub(&ComplexMatrix::identity(self.dim_in)).frobenius_norm()
    }

    /// Apply the Kraus sum `sum_i K_i rho K_i^dag`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(ChannelError::DimensionMismatch(format!(
                "channel input is {}-dimensional, state is {}x{}",
                self.dim_in,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.ops {
            out = out.add(&k.matmul(rho).matmul(&k.dagger()));
        }
        Ok(out)
    }

    /// Sequential composition `self . inner` (inner acts first).
    pub fn compose(&self, inner: &KrausChannel) -> Result<KrausChannel, ChannelError> {
        if self.dim_in != inner.dim_out {
            return Err(ChannelError::DimensionMismatch(format!(
                "cannot compose: outer input {} != inner output {}",
                self.dim_in, inner.dim_out
            )));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * inner.ops.len());
        for a in &self.ops {
            for b in &inner.ops {
                ops.push(a.matmul(b));
            }
        }
        KrausChannel::cp_map(ops)
    }

    /// The adjoint map `X -> sum K_i^dag X K_i`. Unital when the channel is
    /// trace preserving, but generally not trace preserving itself.
    pub fn adjoint(&self) -> KrausChannel {
        KrausChannel {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            ops: self.ops.iter().map(|k| k.dagger()).collect(),
        }
    }
}

/// Form tag of a conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateForm {
    /// Acausal form: PSD for CPTP maps.
    Choi,
    /// Causal form: partial transpose of the Choi form on the conditioning
    /// factor; carries belief propagation.
    Jamiolkowski,
}

/// An operator on a labeled bipartite space, tagged with its isomorphism
/// form. The conditioning factor is the first tensor factor.
#[derive(Debug, Clone)]
pub struct ConditionalState {
    dims: BipartiteDims,
    form: StateForm,
    matrix: ComplexMatrix,
}

impl ConditionalState {
    pub fn new(
        dims: BipartiteDims,
        form: StateForm,
        matrix: ComplexMatrix,
    ) -> Result<Self, ChannelError> {
        if !matrix.is_square() || matrix.rows() != dims.total() {
            return Err(ChannelError::DimensionMismatch(format!(
                "conditional state on {}x{} space needs a {}x{} matrix, got {}x{}",
                dims.dim_a,
                dims.dim_b,
                dims.total(),
                dims.total(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dims, form, matrix })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn form(&self) -> StateForm {
        self.form
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The Choi-form matrix, converting on demand.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        match self.form {
            StateForm::Choi => self.matrix.clone(),
            StateForm::Jamiolkowski => {
                partial_transpose(&self.matrix, self.dims, Subsystem::A)
                    .expect("dims validated at construction")
            }
        }
    }

    /// The Jamiolkowski-form matrix, converting on demand.
    pub fn jamiolkowski_matrix(&self) -> ComplexMatrix {
        match self.form {
            StateForm::Jamiolkowski => self.matrix.clone(),
            StateForm::Choi => partial_transpose(&self.matrix, self.dims, Subsystem::A)
                .expect("dims validated at construction"),
        }
    }

    pub fn to_choi(&self) -> ConditionalState {
        ConditionalState {
            dims: self.dims,
            form: StateForm::Choi,
            matrix: self.choi_matrix(),
        }
    }

    pub fn to_jamiolkowski(&self) -> ConditionalState {
        ConditionalState {
            dims: self.dims,
            form: StateForm::Jamiolkowski,
            matrix: self.jamiolkowski_matrix(),
        }
    }
}

/// Diagnostics from a CPTP check: always returned so inexact (solver) outputs
/// can be graded.
#[derive(Debug, Clone, Copy)]
pub struct CptpReport {
    pub ok: bool,
    pub min_eigenvalue: f64,
    pub tp_residual: f64,
}

/// Choi image of a Kraus channel: `(id (x) E)|Phi+><Phi+|` with the
/// unnormalized maximally entangled state.
pub fn kraus_to_choi(ch: &KrausChannel) -> ConditionalState {
    let (din, dout) = (ch.dim_in(), ch.dim_out());
    let total = din * dout;
    let mut choi = ComplexMatrix::zeros(total, total);
    // |v_K> = sum_i |i> (x) K|i> has components v[i*dout + b] = K[b, i].
    for k in ch.ops() {
        let mut v = vec![C64::new(0.0, 0.0); total];
        for i in 0..din {
            for b in 0..dout {
                v[i * dout + b] = k[(b, i)];
            }
        }
        for r in 0..total {
            if v[r].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..total {
                choi[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    ConditionalState {
        dims: BipartiteDims::new(din, dout),
        form: StateForm::Choi,
        matrix: choi,
    }
}

/// Jamiolkowski image of a Kraus channel.
pub fn kraus_to_jam(ch: &KrausChannel) -> ConditionalState {
    kraus_to_choi(ch).to_jamiolkowski()
}

/// Channel action through the Choi form: `Tr_A[rho_{B|A} (sigma^T (x) I_B)]`.
pub fn apply_via_choi(
    cs: &ConditionalState,
    sigma: &ComplexMatrix,
) -> Result<ComplexMatrix, ChannelError> {
    let dims = cs.dims();
    if sigma.rows() != dims.dim_a || sigma.cols() != dims.dim_a {
        return Err(ChannelError::DimensionMismatch(format!(
            "input state is {}x{}, conditioning factor is {}-dimensional",
            sigma.rows(),
            sigma.cols(),
            dims.dim_a
        )));
    }
    let choi = cs.choi_matrix();
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = ComplexMatrix::zeros(db, db);
    for b in 0..db {
        for b2 in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..da {
                for a2 in 0..da {
                    // (sigma^T (x) I)[ (a2,b2), ... ] contributes sigma[a, a2]
                    acc += choi[(a * db + b, a2 * db + b2)] * sigma[(a, a2)];
                }
            }
            out[(b, b2)] = acc;
        }
    }
    Ok(out)
}

/// Belief propagation through the causal form:
/// `Tr_A[varrho_{B|A} (rho_A (x) I_B)]`.
pub fn apply_via_jam(
    cs: &ConditionalState,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix, ChannelError> {
    let dims = cs.dims();
    if rho.rows() != dims.dim_a || rho.cols() != dims.dim_a {
        return Err(ChannelError::DimensionMismatch(format!(
            "input state is {}x{}, conditioning factor is {}-dimensional",
            rho.rows(),
            rho.cols(),
            dims.dim_a
        )));
    }
    let jam = cs.jamiolkowski_matrix();
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = ComplexMatrix::zeros(db, db);
    for b in 0..db {
        for b2 in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..da {
                for a2 in 0..da {
                    acc += jam[(a * db + b, a2 * db + b2)] * rho[(a2, a)];
                }
            }
            out[(b, b2)] = acc;
        }
    }
    Ok(out)
}

/// Kraus family from a CPTP-valid Choi state, by eigendecomposition.
/// Eigenvalues below 1e-10 are dropped.
pub fn choi_to_kraus(cs: &ConditionalState) -> Result<KrausChannel, ChannelError> {
    choi_to_kraus_with_tol(cs, CPTP_TOL)
}

/// Same as [`choi_to_kraus`] with an explicit CPTP tolerance, for grading
/// inexact solver outputs.
pub fn choi_to_kraus_with_tol(
    cs: &ConditionalState,
    tol: f64,
) -> Result<KrausChannel, ChannelError> {
    let report = is_cptp(cs, tol);
    if !report.ok {
        return Err(ChannelError::NotCptp {
            min_eigenvalue: report.min_eigenvalue,
            tp_residual: report.tp_residual,
        });
    }
    let dims = cs.dims();
    let (din, dout) = (dims.dim_a, dims.dim_b);
    let eig = cs.choi_matrix().eigh()?;
    let mut ops = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-10 {
            continue;
        }
        let w = lam.sqrt();
        let mut k = ComplexMatrix::zeros(dout, din);
        for i in 0..din {
            for b in 0..dout {
                k[(b, i)] = eig.vectors[(i * dout + b, idx)] * w;
            }
        }
        ops.push(k);
    }
    if ops.is_empty() {
        return Err(ChannelError::EmptyKraus);
    }
    KrausChannel::cp_map(ops)
}

/// CPTP check on the Choi form: positivity and `Tr_B rho = I_A`, both at
/// `tol`. Jamiolkowski inputs are converted first.
pub fn is_cptp(cs: &ConditionalState, tol: f64) -> CptpReport {
    let choi = cs.choi_matrix();
    let dims = cs.dims();
    let min_eigenvalue = choi
        .eigh()
        .map(|e| e.min())
        .unwrap_or(f64::NEG_INFINITY);
    let marginal = partial_trace(&choi, dims, Subsystem::A).expect("dims validated");
    let tp_residual = marginal
        .sub(&ComplexMatrix::identity(dims.dim_a))
        .frobenius_norm();
    CptpReport { ok: min_eigenvalue >= -tol && tp_residual <= tol, min_eigenvalue, tp_residual }
}

/// Choi-form composition rule:
/// `rho_{C|A} = Tr_B[(I_A (x) rho_{C|B})(rho_{B|A}^{T_B} (x) I_C)]`.
pub fn compose_via_choi(
    cs_cb: &ConditionalState,
    cs_ba: &ConditionalState,
) -> Result<ConditionalState, ChannelError> {
    let (dims_cb, dims_ba) = (cs_cb.dims(), cs_ba.dims());
    if dims_cb.dim_a != dims_ba.dim_b {
        return Err(ChannelError::DimensionMismatch(format!(
            "inner dimension mismatch: outer conditions on {}, inner outputs {}",
            dims_cb.dim_a, dims_ba.dim_b
        )));
    }
    let rho_cb = cs_cb.choi_matrix();
    let rho_ba = cs_ba.choi_matrix();
    let (da, db, dc) = (dims_ba.dim_a, dims_ba.dim_b, dims_cb.dim_b);
    let mut out = ComplexMatrix::zeros(da * dc, da * dc);
    for a in 0..da {
        for c in 0..dc {
            for a2 in 0..da {
                for c2 in 0..dc {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..db {
                        for b2 in 0..db {
                            acc += rho_cb[(b * dc + c, b2 * dc + c2)]
                                * rho_ba[(a * db + b, a2 * db + b2)];
                        }
                    }
                    out[(a * dc + c, a2 * dc + c2)] = acc;
                }
            }
        }
    }
    ConditionalState::new(BipartiteDims::new(da, dc), StateForm::Choi, out)
}

/// Adjoint of a Kraus channel, `X -> sum K_i^dag X K_i`.
pub fn adjoint_channel(ch: &KrausChannel) -> KrausChannel {
    ch.adjoint()
}

// --- JSON wire format -----------------------------------------------------
//
// Matrices travel as separate row-major real/imaginary arrays so the
// documents stay valid JSON and round-trip doubles bit for bit.

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    real_part: Vec<f64>,
    imag_part: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixWire {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixWire {
            rows: m.rows(),
            cols: m.cols(),
            real_part: m.data().iter().map(|z| z.re).collect(),
            imag_part: m.data().iter().map(|z| z.im).collect(),
        }
    }
}

impl MatrixWire {
    fn into_matrix(self) -> Result<ComplexMatrix, String> {
        if self.real_part.len() != self.rows * self.cols
            || self.imag_part.len() != self.rows * self.cols
        {
            return Err(format!(
                "matrix payload length mismatch: {}x{} with {} real / {} imaginary entries",
                self.rows,
                self.cols,
                self.real_part.len(),
                self.imag_part.len()
            ));
        }
        let data: Vec<C64> = self
            .real_part
            .iter()
            .zip(&self.imag_part)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        Ok(ComplexMatrix::from_slice(self.rows, self.cols, &data))
    }
}

#[derive(Serialize, Deserialize)]
struct ConditionalStateWire {
    dims: BipartiteDims,
    form: StateForm,
    real_part: Vec<f64>,
    imag_part: Vec<f64>,
}

impl Serialize for ConditionalState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ConditionalStateWire {
            dims: self.dims,
            form: self.form,
            real_part: self.matrix.data().iter().map(|z| z.re).collect(),
            imag_part: self.matrix.data().iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConditionalState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = ConditionalStateWire::deserialize(deserializer)?;
        let n = wire.dims.total();
        let m = MatrixWire {
            rows: n,
            cols: n,
            real_part: wire.real_part,
            imag_part: wire.imag_part,
        }
        .into_matrix()
        .map_err(serde::de::Error::custom)?;
        ConditionalState::new(wire.dims, wire.form, m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct KrausChannelWire {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<MatrixWire>,
}

impl Serialize for KrausChannel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        KrausChannelWire {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.ops.iter().map(MatrixWire::from).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KrausChannel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = KrausChannelWire::deserialize(deserializer)?;
        let ops = wire
            .kraus
            .into_iter()
            .map(MatrixWire::into_matrix)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        let ch = KrausChannel::cp_map(ops).map_err(serde::de::Error::custom)?;
        if ch.dim_in != wire.dim_in || ch.dim_out != wire.dim_out {
            return Err(serde::de::Error::custom(format!(
                "declared dims {}->{} do not match operators {}->{}",
                wire.dim_in, wire.dim_out, ch.dim_in, ch.dim_out
            )));
        }
        Ok(ch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{random_channel, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn choi_id() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    #[test]
    fn choi_of_identity_is_corner_matrix() {
        let cs = kraus_to_choi(&KrausChannel::identity(2));
        assert!(cs.matrix().max_abs_diff(&choi_id()) < 1e-15);
    }

    #[test]
    fn choi_of_depolarizing_is_half_identity() {
        // rho -> I/2 as a measure-and-reprepare family {|i><j|/sqrt(2)}
        let mut ops = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                ops.push(ComplexMatrix::matrix_unit(2, i, j).scale_re(1.0 / 2f64.sqrt()));
            }
        }
        let ch = KrausChannel::new(ops).unwrap();
        let cs = kraus_to_choi(&ch);
        assert!(cs
            .matrix()
            .max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.5))
            < 1e-14);
    }

    #[test]
    fn choi_of_bitflip_has_antidiagonal_blocks() {
        let sx = crate::bloch::sigma_x();
        let cs = kraus_to_choi(&KrausChannel::unitary(sx).unwrap());
        // (id (x) X.X)(Phi+) flips the conditioned index: entries at
        // ((i, 1-i), (j, 1-j)).
        for i in 0..2usize {
            for j in 0..2usize {
                let r = 2 * i + (1 - i);
                let c = 2 * j + (1 - j);
                assert!((cs.matrix()[(r, c)] - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        assert!((cs.matrix().trace() - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_via_choi_matches_kraus_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..20 {
            let ch = random_channel(3, 2, 3, &mut rng);
            let rho = random_density(3, &mut rng);
            let cs = kraus_to_choi(&ch);
            let via_choi = apply_via_choi(&cs, &rho).unwrap();
            let via_kraus = ch.apply(&rho).unwrap();
            assert!(via_choi.max_abs_diff(&via_kraus) < 1e-11);
        }
    }

    #[test]
    fn apply_via_jam_agrees_with_choi_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let ch = random_channel(2, 4, 2, &mut rng);
            let rho = random_density(2, &mut rng);
            let cs = kraus_to_choi(&ch);
            let jam = cs.to_jamiolkowski();
            let a = apply_via_choi(&cs, &rho).unwrap();
            let b = apply_via_jam(&jam, &rho).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-11);
        }
        // identity case
        let id = kraus_to_jam(&KrausChannel::identity(2));
        let rho = random_density(2, &mut rng);
        assert!(apply_via_jam(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-13);
    }

    #[test]
    fn classical_diagonal_belief_propagation() {
        // P(Y|X) = [[0.9, 0.2], [0.1, 0.8]] embedded diagonally, prior diag.
        let p = [[0.9, 0.2], [0.1, 0.8]];
        let mut jam = ComplexMatrix::zeros(4, 4);
        for x in 0..2 {
            for y in 0..2 {
                jam[(x * 2 + y, x * 2 + y)] = C64::new(p[y][x], 0.0);
            }
        }
        let cs = ConditionalState::new(BipartiteDims::new(2, 2), StateForm::Jamiolkowski, jam)
            .unwrap();
        let prior = ComplexMatrix::from_real(2, 2, &[0.3, 0.0, 0.0, 0.7]);
        let out = apply_via_jam(&cs, &prior).unwrap();
        for y in 0..2 {
            let want: f64 = (0..2).map(|x| p[y][x] * if x == 0 { 0.3 } else { 0.7 }).sum();
            assert!((out[(y, y)] - C64::new(want, 0.0)).norm() < 1e-14);
            assert!(out[(y, 1 - y)].norm() < 1e-14);
        }
    }

    #[test]
    fn choi_to_kraus_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // identity recovers a single operator proportional to I
        let id_cs = kraus_to_choi(&KrausChannel::identity(2));
        let rec = choi_to_kraus(&id_cs).unwrap();
        assert_eq!(rec.ops().len(), 1);
        let k = &rec.ops()[0];
        let phase = k[(0, 0)] / k[(0, 0)].norm();
        assert!(k.scale(phase.conj().into()).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);

        // random channels round-trip at the Choi level
        for _ in 0..10 {
            let ch = random_channel(4, 2, 4, &mut rng);
            let cs = kraus_to_choi(&ch);
            let rec = choi_to_kraus(&cs).unwrap();
            let back = kraus_to_choi(&rec);
            assert!(back.matrix().max_abs_diff(cs.matrix()) < 1e-10);
        }

        // the blurred-and-saturated detector ships with four Kraus
        // operators, but they are linearly dependent (K2 - K3 = K4), so the
        // minimal family recovered from the rank-3 Choi state has three
        let bns = crate::scenarios::bns_channel();
        let cs = kraus_to_choi(&bns);
        let rec = choi_to_kraus(&cs).unwrap();
        assert_eq!(rec.ops().len(), 3);
        assert!(kraus_to_choi(&rec).matrix().max_abs_diff(cs.matrix()) < 1e-10);

        // rank-1 Choi of a unitary gives a single Kraus op
        let u = crate::scenarios::random_unitary(3, &mut rng);
        let cs = kraus_to_choi(&KrausChannel::unitary(u.clone()).unwrap());
        let rec = choi_to_kraus(&cs).unwrap();
        assert_eq!(rec.ops().len(), 1);
        let k = &rec.ops()[0];
        // proportional to U up to global phase
        let phase = k[(0, 0)] / u[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(k.max_abs_diff(&u.scale(phase)) < 1e-10);
    }

    #[test]
    fn is_cptp_detects_broken_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let ch = random_channel(2, 2, 2, &mut rng);
        let cs = kraus_to_choi(&ch);
        assert!(is_cptp(&cs, CPTP_TOL).ok);

        // subtract a rank-1 projector outside the range of the Choi state
        let broken = kraus_to_choi(&KrausChannel::identity(2))
            .matrix()
            .sub(&ComplexMatrix::basis_projector(4, 1).scale_re(0.1));
        let cs_bad =
            ConditionalState::new(BipartiteDims::new(2, 2), StateForm::Choi, broken).unwrap();
        let report = is_cptp(&cs_bad, CPTP_TOL);
        assert!(!report.ok);
        assert!((report.min_eigenvalue + 0.1).abs() < 1e-12);

        // Jamiolkowski of the identity, converted internally
        let jam_id = kraus_to_jam(&KrausChannel::identity(2));
        assert!(is_cptp(&jam_id, CPTP_TOL).ok);
    }

    #[test]
    fn compose_matches_kraus_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let id = KrausChannel::identity(2);
        let composed = compose_via_choi(&kraus_to_choi(&id), &kraus_to_choi(&id)).unwrap();
        assert!(composed.matrix().max_abs_diff(&choi_id()) < 1e-14);

        for _ in 0..20 {
            let inner = random_channel(3, 2, 2, &mut rng);
            let outer = random_channel(2, 4, 3, &mut rng);
            let via_choi =
                compose_via_choi(&kraus_to_choi(&outer), &kraus_to_choi(&inner)).unwrap();
            let via_kraus = kraus_to_choi(&outer.compose(&inner).unwrap());
            assert!(via_choi.matrix().max_abs_diff(via_kraus.matrix()) < 1e-10);
        }
    }

    #[test]
    fn adjoint_duality_and_unitality() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let u = crate::scenarios::random_unitary(3, &mut rng);
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        let adj = adjoint_channel(&ch);
        let rho = random_density(3, &mut rng);
        let want = u.dagger().matmul(&rho).matmul(&u);
        assert!(adj.apply(&rho).unwrap().max_abs_diff(&want) < 1e-12);

        for _ in 0..10 {
            let ch = random_channel(3, 2, 3, &mut rng);
            let adj = ch.adjoint();
            // unital: adjoint of the identity is the identity
            let unit = adj.apply(&ComplexMatrix::identity(2)).unwrap();
            assert!(unit.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
            // duality pairing on random Hermitian X, Y
            let x = random_density(3, &mut rng);
            let y = random_density(2, &mut rng);
            let lhs = adj.apply(&y).unwrap().matmul(&x).trace();
            let rhs = y.matmul(&ch.apply(&x).unwrap()).trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn wire_format_round_trips_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let ch = random_channel(4, 2, 3, &mut rng);
        let json = serde_json::to_string(&ch).unwrap();
        let back: KrausChannel = serde_json::from_str(&json).unwrap();
        assert_eq!(ch.dim_in(), back.dim_in());
        assert_eq!(ch.ops().len(), back.ops().len());
        for (a, b) in ch.ops().iter().zip(back.ops()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }

        let cs = kraus_to_choi(&ch);
        let json = serde_json::to_string(&cs).unwrap();
        let back: ConditionalState = serde_json::from_str(&json).unwrap();
        assert_eq!(cs.form(), back.form());
        assert_eq!(cs.dims(), back.dims());
        for (x, y) in cs.matrix().data().iter().zip(back.matrix().data()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
