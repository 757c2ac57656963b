//! Standard-form semidefinite programs over Hermitian blocks with linear
//! equality constraints, solved through the real symmetric embedding.
//!
//! Variables are complex Hermitian PSD blocks and real scalars. Constraints
//! map variables through arbitrary (real-linear, Hermiticity-preserving)
//! operators to a fixed Hermitian matrix or a fixed real scalar. Everything
//! is scalarized onto the embedded svec coordinates; the embedding symmetry
//! is maintained implicitly by the data (all coefficients are themselves
//! embeddings) and removed on exit by the decode projection.

use thiserror::Error;

use super::embed::{
    decode_embedded, decode_map, hvec, hvec_basis, hvec_dim, smat, svec_dim,
};
use super::solver::{
    ConeCertificate, ConeProblem, ConeResiduals, ConeSettings, ConeSolution, ConeStatus,
};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("unknown variable reference")]
    UnknownVariable,
    #[error("constraint target must be Hermitian within 1e-12 (deviation {0:.3e})")]
    TargetNotHermitian(f64),
    #[error("operator output is {got}x{got}, constraint target is {want}x{want}")]
    OperatorShape { got: usize, want: usize },
    #[error("coefficient for scalar variable must be Hermitian of the target side")]
    BadScalarCoefficient,
}

/// Handle to a Hermitian PSD block variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockId(usize);

/// Handle to a nonnegative scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarId(usize);

struct BlockVar {
    name: String,
    side: usize,
}

struct ScalarVar {
    name: String,
}

/// One additive term of a matrix equality constraint.
pub enum MatrixTerm {
    /// `op(X)` for a Hermitian block variable `X`; the operator must be
    /// real-linear and Hermiticity-preserving.
    Block(BlockId, Box<dyn Fn(&ComplexMatrix) -> ComplexMatrix>),
    /// `s * C` for a scalar variable `s` and a fixed Hermitian coefficient.
    Scalar(ScalarId, ComplexMatrix),
}

struct MatrixConstraint {
    terms: Vec<MatrixTerm>,
    rhs: ComplexMatrix,
}

struct ScalarConstraint {
    /// `(X, G)` contributing `Re<G, X>`.
    block_terms: Vec<(BlockId, ComplexMatrix)>,
    scalar_terms: Vec<(ScalarId, f64)>,
    rhs: f64,
}

enum Constraint {
    Matrix(MatrixConstraint),
    Scalar(ScalarConstraint),
}

/// Solver status of an [`SdpSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

/// Residual summary reported with every solution.
pub type SdpResiduals = ConeResiduals;

/// Infeasibility diagnostics carried by [`SdpSolution`].
pub type SdpCertificate = ConeCertificate;

/// Output of [`SdpProblem::solve`].
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective_value: f64,
    block_values: Vec<ComplexMatrix>,
    scalar_values: Vec<f64>,
    pub residuals: SdpResiduals,
    pub certificate: Option<SdpCertificate>,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn block(&self, id: BlockId) -> &ComplexMatrix {
        &self.block_values[id.0]
    }

    pub fn scalar(&self, id: ScalarId) -> f64 {
        self.scalar_values[id.0]
    }

    /// JSON dump for offline inspection: status, iterates summary and
    /// residuals, plus per-variable assignments keyed by the names declared
    /// in the problem.
    pub fn describe(&self, problem: &SdpProblem) -> serde_json::Value {
        let blocks: Vec<serde_json::Value> = problem
            .blocks
            .iter()
            .zip(&self.block_values)
            .map(|(var, value)| {
                serde_json::json!({
                    "name": var.name,
                    "side": var.side,
                    "real_part": value.data().iter().map(|z| z.re).collect::<Vec<_>>(),
                    "imag_part": value.data().iter().map(|z| z.im).collect::<Vec<_>>(),
                })
            })
            .collect();
        let scalars: Vec<serde_json::Value> = problem
            .scalars
            .iter()
            .zip(&self.scalar_values)
            .map(|(var, value)| serde_json::json!({ "name": var.name, "value": value }))
            .collect();
        serde_json::json!({
            "status": format!("{:?}", self.status),
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "residuals": {
                "primal": self.residuals.primal,
                "dual": self.residuals.dual,
                "gap": self.residuals.gap,
            },
            "blocks": blocks,
            "scalars": scalars,
        })
    }
}

/// A semidefinite program under construction.
#[derive(Default)]
pub struct SdpProblem {
    blocks: Vec<BlockVar>,
    scalars: Vec<ScalarVar>,
    constraints: Vec<Constraint>,
    objective_blocks: Vec<(BlockId, ComplexMatrix)>,
    objective_scalars: Vec<(ScalarId, f64)>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a Hermitian PSD matrix variable of the given side.
    pub fn add_psd_block(&mut self, name: impl Into<String>, side: usize) -> BlockId {
        assert!(side > 0);
        self.blocks.push(BlockVar { name: name.into(), side });
        BlockId(self.blocks.len() - 1)
    }

    /// Declare a nonnegative real scalar variable.
    pub fn add_scalar(&mut self, name: impl Into<String>) -> ScalarId {
        self.scalars.push(ScalarVar { name: name.into() });
        ScalarId(self.scalars.len() - 1)
    }

    pub fn block_side(&self, id: BlockId) -> usize {
        self.blocks[id.0].side
    }

    pub fn block_name(&self, id: BlockId) -> &str {
        &self.blocks[id.0].name
    }

    pub fn scalar_name(&self, id: ScalarId) -> &str {
        &self.scalars[id.0].name
    }

    /// Add `coeff * s` to the minimization objective.
    pub fn minimize_scalar(&mut self, id: ScalarId, coeff: f64) {
        self.objective_scalars.push((id, coeff));
    }

    /// Add `Re<C, X>` to the minimization objective.
    pub fn minimize_block(&mut self, id: BlockId, coeff: ComplexMatrix) {
        self.objective_blocks.push((id, coeff));
    }

    /// Equality between a sum of operator images of variables and a fixed
    /// Hermitian target.
    pub fn add_matrix_constraint(
        &mut self,
        terms: Vec<MatrixTerm>,
        rhs: ComplexMatrix,
    ) -> Result<(), SdpError> {
        let dev = rhs.hermiticity_deviation();
        if dev > 1e-12 * rhs.max_abs().max(1.0) {
            return Err(SdpError::TargetNotHermitian(dev));
        }
        for term in &terms {
            match term {
                MatrixTerm::Block(id, _) if id.0 >= self.blocks.len() => {
                    return Err(SdpError::UnknownVariable)
                }
                MatrixTerm::Scalar(id, coeff) => {
                    if id.0 >= self.scalars.len() {
                        return Err(SdpError::UnknownVariable);
                    }
                    if coeff.rows() != rhs.rows() || !coeff.is_hermitian(1e-12) {
                        return Err(SdpError::BadScalarCoefficient);
                    }
                }
                _ => {}
            }
        }
        self.constraints.push(Constraint::Matrix(MatrixConstraint { terms, rhs }));
        Ok(())
    }

    /// Scalar equality `sum Re<G_k, X_k> + sum a_j s_j = rhs`.
    pub fn add_scalar_constraint(
        &mut self,
        block_terms: Vec<(BlockId, ComplexMatrix)>,
        scalar_terms: Vec<(ScalarId, f64)>,
        rhs: f64,
    ) -> Result<(), SdpError> {
        for (id, _) in &block_terms {
            if id.0 >= self.blocks.len() {
                return Err(SdpError::UnknownVariable);
            }
        }
        for (id, _) in &scalar_terms {
            if id.0 >= self.scalars.len() {
                return Err(SdpError::UnknownVariable);
            }
        }
        self.constraints
            .push(Constraint::Scalar(ScalarConstraint { block_terms, scalar_terms, rhs }));
        Ok(())
    }

    /// Dump a human-readable summary of the problem for offline inspection.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "blocks": self.blocks.iter().map(|b| serde_json::json!({
                "name": b.name, "side": b.side,
            })).collect::<Vec<_>>(),
            "scalars": self.scalars.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
            "constraints": self.constraints.len(),
        })
    }

    fn layout(&self) -> (Vec<usize>, Vec<usize>, usize) {
        // embedded block sides: 2n per Hermitian block, then 1 per scalar
        let mut sides = Vec::new();
        let mut offsets = Vec::new();
        let mut acc = 0usize;
        for b in &self.blocks {
            sides.push(2 * b.side);
            offsets.push(acc);
            acc += svec_dim(2 * b.side);
        }
        for _ in &self.scalars {
            sides.push(1);
            offsets.push(acc);
            acc += 1;
        }
        (sides, offsets, acc)
    }

    /// Scalarize onto the embedded cone coordinates.
    fn assemble(&self) -> ConeProblem {
        let (sides, offsets, total) = self.layout();
        let scalar_base = self.blocks.len();
        // cached decode maps per distinct block side
        let mut decoders: std::collections::HashMap<usize, Vec<Vec<f64>>> =
            std::collections::HashMap::new();
        for b in &self.blocks {
            decoders
                .entry(b.side)
                .or_insert_with(|| decode_map(b.side));
        }

        // hvec-space coefficient rows -> svec row segment via the decoder
        let seg_from_hvec = |side: usize, coeffs: &[f64]| -> Vec<f64> {
            let dec = &decoders[&side];
            dec.iter()
                .map(|col| col.iter().zip(coeffs).map(|(a, b)| a * b).sum())
                .collect()
        };

        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut b_vec: Vec<f64> = Vec::new();

        for constraint in &self.constraints {
            match constraint {
                Constraint::Matrix(mc) => {
                    let p = mc.rhs.rows();
                    let hd = hvec_dim(p);
                    // per-term operator matrices in hvec coordinates
                    let mut term_mats: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
                    let mut scalar_cols: Vec<(usize, Vec<f64>)> = Vec::new();
                    for term in &mc.terms {
                        match term {
                            MatrixTerm::Block(id, op) => {
                                let n = self.blocks[id.0].side;
                                let mut cols = Vec::with_capacity(hvec_dim(n));
                                for alpha in 0..hvec_dim(n) {
                                    let basis = hvec_basis(n, alpha);
                                    let img = op(&basis);
                                    assert_eq!(
                                        img.rows(),
                                        p,
                                        "operator output side does not match the target"
                                    );
                                    cols.push(hvec(&img.hermitize()));
                                }
                                term_mats.push((id.0, cols));
                            }
                            MatrixTerm::Scalar(id, coeff) => {
                                scalar_cols.push((id.0, hvec(coeff)));
                            }
                        }
                    }
                    let rhs_h = hvec(&mc.rhs);
                    for beta in 0..hd {
                        let mut row = vec![0.0; total];
                        for (blk_idx, cols) in &term_mats {
                            let n = self.blocks[*blk_idx].side;
                            // hvec-space row of this operator
                            let op_row: Vec<f64> =
                                cols.iter().map(|col| col[beta]).collect();
                            let seg = seg_from_hvec(n, &op_row);
                            let off = offsets[*blk_idx];
                            for (k, v) in seg.iter().enumerate() {
                                row[off + k] += v;
                            }
                        }
                        for (scl_idx, coeff_h) in &scalar_cols {
                            row[offsets[scalar_base + scl_idx]] += coeff_h[beta];
                        }
                        rows.push(row);
                        b_vec.push(rhs_h[beta]);
                    }
                }
                Constraint::Scalar(sc) => {
                    let mut row = vec![0.0; total];
                    for (id, g) in &sc.block_terms {
                        let n = self.blocks[id.0].side;
                        let seg = seg_from_hvec(n, &hvec(g));
                        let off = offsets[id.0];
                        for (k, v) in seg.iter().enumerate() {
                            row[off + k] += v;
                        }
                    }
                    for (id, a) in &sc.scalar_terms {
                        row[offsets[scalar_base + id.0]] += a;
                    }
                    rows.push(row);
                    b_vec.push(sc.rhs);
                }
            }
        }

        // objective
        let mut c = vec![0.0; total];
        for (id, coeff) in &self.objective_blocks {
            let n = self.blocks[id.0].side;
            let seg = seg_from_hvec(n, &hvec(coeff));
            let off = offsets[id.0];
            for (k, v) in seg.iter().enumerate() {
                c[off + k] += v;
            }
        }
        for (id, a) in &self.objective_scalars {
            c[offsets[scalar_base + id.0]] += a;
        }

        ConeProblem { block_sides: sides, c, rows, b: b_vec }
    }

    /// Solve with the given tolerances.
    pub fn solve(&self, feas_tol: f64, gap_tol: f64, max_iter: usize) -> SdpSolution {
        let cone = self.assemble();
        let sol = cone.solve(&ConeSettings { feas_tol, gap_tol, max_iter });
        self.decode_solution(&cone, sol)
    }

    /// Solve with the default tolerances (1e-8, 1e-8, 200 iterations).
    pub fn solve_default(&self) -> SdpSolution {
        self.solve(1e-8, 1e-8, 200)
    }

    fn decode_solution(&self, cone: &ConeProblem, sol: ConeSolution) -> SdpSolution {
        let (_, offsets, _) = self.layout();
        let scalar_base = self.blocks.len();
        let mut block_values = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let side = 2 * b.side;
            let seg = &sol.x[offsets[k]..offsets[k] + svec_dim(side)];
            block_values.push(decode_embedded(&smat(side, seg)));
        }
        let scalar_values: Vec<f64> = (0..self.scalars.len())
            .map(|j| sol.x[offsets[scalar_base + j]])
            .collect();
        let status = match sol.status {
            ConeStatus::Optimal => SdpStatus::Optimal,
            ConeStatus::Infeasible => SdpStatus::Infeasible,
            ConeStatus::MaxIterations => SdpStatus::MaxIterations,
            ConeStatus::NumericalFailure => SdpStatus::NumericalFailure,
        };
        let _ = cone;
        SdpSolution {
            status,
            objective_value: sol.objective,
            block_values,
            scalar_values,
            residuals: sol.residuals,
            certificate: sol.certificate,
            iterations: sol.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, BipartiteDims, C64, Subsystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn max_eigenvalue_of_complex_hermitian() {
        // min eps s.t. eps I - H = S >= 0 for H with genuinely complex entries
        let h = ComplexMatrix::from_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 2.0),
                C64::new(0.0, -2.0),
                C64::new(-1.0, 0.0),
            ],
        );
        // eigenvalues +- sqrt(1 + 4)
        let mut p = SdpProblem::new();
        let slack = p.add_psd_block("slack", 2);
        let eps = p.add_scalar("eps");
        p.minimize_scalar(eps, 1.0);
        p.add_matrix_constraint(
            vec![
                MatrixTerm::Block(slack, Box::new(|x: &ComplexMatrix| x.clone())),
                MatrixTerm::Scalar(eps, ComplexMatrix::identity(2).scale_re(-1.0)),
            ],
            h.scale_re(-1.0),
        )
        .unwrap();
        let sol = p.solve_default();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let want = 5f64.sqrt();
        assert!((sol.objective_value - want).abs() < 1e-6, "{}", sol.objective_value);
        assert!((sol.scalar(eps) - want).abs() < 1e-6);
    }

    #[test]
    fn closest_maximally_mixed_marginal() {
        // min <C, X> over density matrices X on a 2x2 system with both
        // marginals maximally mixed; C = -|Phi+><Phi+| picks the Bell state
        let mut bell = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = C64::new(0.5, 0.0);
        }
        let mut p = SdpProblem::new();
        let x = p.add_psd_block("X", 4);
        p.minimize_block(x, bell.scale_re(-1.0));
        let dims = BipartiteDims::new(2, 2);
        p.add_matrix_constraint(
            vec![MatrixTerm::Block(
                x,
                Box::new(move |v: &ComplexMatrix| {
                    partial_trace(v, dims, Subsystem::A).unwrap()
                }),
            )],
            ComplexMatrix::identity(2).scale_re(0.5),
        )
        .unwrap();
        p.add_matrix_constraint(
            vec![MatrixTerm::Block(
                x,
                Box::new(move |v: &ComplexMatrix| {
                    partial_trace(v, dims, Subsystem::B).unwrap()
                }),
            )],
            ComplexMatrix::identity(2).scale_re(0.5),
        )
        .unwrap();
        let sol = p.solve_default();
        assert_eq!(sol.status, SdpStatus::Optimal);
        // optimum is the Bell state itself with value -1
        assert!((sol.objective_value + 1.0).abs() < 1e-6, "{}", sol.objective_value);
        assert!(sol.block(x).max_abs_diff(&bell) < 1e-5);
    }

    #[test]
    fn infeasible_partial_trace_target() {
        // X >= 0 with Tr_B X = diag(1, -1): impossible since the marginal of
        // a PSD matrix is PSD
        let mut p = SdpProblem::new();
        let x = p.add_psd_block("X", 4);
        let dims = BipartiteDims::new(2, 2);
        p.add_matrix_constraint(
            vec![MatrixTerm::Block(
                x,
                Box::new(move |v: &ComplexMatrix| {
                    partial_trace(v, dims, Subsystem::A).unwrap()
                }),
            )],
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        )
        .unwrap();
        let sol = p.solve_default();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!(sol.certificate.is_some());
    }

    #[test]
    fn scalar_constraint_and_mixture() {
        // X = gamma A + (1-gamma) B with A, B fixed PSD, plus gamma bounds;
        // minimizing <A - B, X>... simpler: minimize gamma subject to
        // X - gamma (A - B) = B, gamma + u = 1. gamma free in [0,1], X PSD
        // automatically. minimum is gamma = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a_m = crate::scenarios::random_density(2, &mut rng);
        let b_m = crate::scenarios::random_density(2, &mut rng);
        let mut p = SdpProblem::new();
        let x = p.add_psd_block("X", 2);
        let gamma = p.add_scalar("gamma");
        let slack = p.add_scalar("one_minus_gamma");
        p.minimize_scalar(gamma, 1.0);
        p.add_matrix_constraint(
            vec![
                MatrixTerm::Block(x, Box::new(|v: &ComplexMatrix| v.clone())),
                MatrixTerm::Scalar(gamma, b_m.sub(&a_m)),
            ],
            b_m.clone(),
        )
        .unwrap();
        p.add_scalar_constraint(vec![], vec![(gamma, 1.0), (slack, 1.0)], 1.0)
            .unwrap();
        let sol = p.solve_default();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.objective_value.abs() < 1e-6);
        assert!(sol.block(x).max_abs_diff(&b_m) < 1e-5);

        // offline inspection dump carries names, dims and residuals
        let dump = sol.describe(&p);
        assert_eq!(dump["blocks"][0]["name"], "X");
        assert_eq!(dump["blocks"][0]["side"], 2);
        assert_eq!(dump["scalars"][0]["name"], "gamma");
        assert!(dump["residuals"]["primal"].as_f64().unwrap() <= 1e-8);
    }
}
