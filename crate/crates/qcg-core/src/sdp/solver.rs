//! Dense primal-dual interior-point core over products of real symmetric
//! PSD blocks.
//!
//! Solves `min c.x  s.t.  A x = b, x in K` through the homogeneous
//! self-dual embedding, with Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector step. Infeasibility is reported when the embedding's
//! tau/kappa indicator collapses and the iterate carries an improving-ray
//! certificate; linearly inconsistent equality systems are caught earlier by
//! the rank-revealing row reduction.

use super::embed::{smat, svec, svec_dim, RealMatrix};

/// Tolerances and iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct ConeSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
}

impl Default for ConeSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-8, gap_tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

/// Why an infeasibility verdict was reached.
#[derive(Debug, Clone)]
pub enum ConeCertificate {
    /// The equality system alone is inconsistent: no `x` solves `A x = b`
    /// regardless of the cone. Carries the worst row violation at the
    /// least-squares point.
    LinearInconsistency { residual: f64 },
    /// The equalities pin every coordinate, but the pinned point leaves the
    /// cone by `min_eigenvalue`.
    PinnedNotPsd { min_eigenvalue: f64 },
    /// Improving-ray certificate from the self-dual embedding:
    /// `b.y > 0` with `A^T y + s ~ 0`, `s in K`.
    ImprovingRay { b_dot_y: f64, ray_residual: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConeResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub status: ConeStatus,
    /// Primal solution in svec coordinates (already divided by tau).
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub objective: f64,
    pub residuals: ConeResiduals,
    pub certificate: Option<ConeCertificate>,
    pub iterations: usize,
}

/// Standard-form conic problem over symmetric PSD blocks.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    /// Side lengths of the PSD blocks (1 for scalar variables).
    pub block_sides: Vec<usize>,
    /// Objective in svec coordinates.
    pub c: Vec<f64>,
    /// Constraint rows in svec coordinates, dense `m x n`.
    pub rows: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl ConeProblem {
    pub fn total_dim(&self) -> usize {
        self.block_sides.iter().map(|&n| svec_dim(n)).sum()
    }

    fn block_offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.block_sides.len());
        let mut acc = 0;
        for &n in &self.block_sides {
            offs.push(acc);
            acc += svec_dim(n);
        }
        offs
    }

    pub fn solve(&self, settings: &ConeSettings) -> ConeSolution {
        let n_total = self.total_dim();
        assert_eq!(self.c.len(), n_total);
        for row in &self.rows {
            assert_eq!(row.len(), n_total);
        }
        assert_eq!(self.rows.len(), self.b.len());

        let reduced = reduce_rows(&self.rows, &self.b, 1e-10);
        match reduced {
            RowReduction::Inconsistent { residual } => ConeSolution {
                status: ConeStatus::Infeasible,
                x: vec![0.0; n_total],
                y: vec![0.0; self.b.len()],
                s: vec![0.0; n_total],
                objective: f64::NAN,
                residuals: ConeResiduals::default(),
                certificate: Some(ConeCertificate::LinearInconsistency { residual }),
                iterations: 0,
            },
            RowReduction::Reduced { kept, min_norm_x } => {
                // Fully determined pure-feasibility systems are answered
                // directly: the equalities pin the point, only the cone
                // membership is in question.
                let rank = kept.len();
                let pure_feasibility = self.c.iter().all(|&v| v == 0.0);
                if rank == n_total && pure_feasibility {
                    return self.answer_pinned(min_norm_x, settings);
                }
                let a: Vec<Vec<f64>> = kept.iter().map(|&i| self.rows[i].clone()).collect();
                let b: Vec<f64> = kept.iter().map(|&i| self.b[i]).collect();
                let mut sol = hsde_solve(self, &a, &b, settings);
                // scatter the reduced dual back onto the original rows
                let mut y_full = vec![0.0; self.b.len()];
                for (slot, &i) in kept.iter().enumerate() {
                    y_full[i] = sol.y[slot];
                }
                sol.y = y_full;
                sol
            }
        }
    }

    fn answer_pinned(&self, x: Vec<f64>, settings: &ConeSettings) -> ConeSolution {
        let offsets = self.block_offsets();
        let mut min_eig = f64::INFINITY;
        for (k, &side) in self.block_sides.iter().enumerate() {
            let seg = &x[offsets[k]..offsets[k] + svec_dim(side)];
            let block = smat(side, seg);
            if let Ok((vals, _)) = block.eigh() {
                min_eig = min_eig.min(vals[0]);
            } else {
                min_eig = f64::NEG_INFINITY;
            }
        }
        let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let primal = self.primal_residual(&x);
        if min_eig >= -settings.feas_tol * scale {
            ConeSolution {
                status: ConeStatus::Optimal,
                objective: dot(&self.c, &x),
                x,
                y: vec![0.0; self.b.len()],
                s: vec![0.0; self.total_dim()],
                residuals: ConeResiduals { primal, dual: 0.0, gap: 0.0 },
                certificate: None,
                iterations: 0,
            }
        } else {
            ConeSolution {
                status: ConeStatus::Infeasible,
                x,
                y: vec![0.0; self.b.len()],
                s: vec![0.0; self.total_dim()],
                objective: f64::NAN,
                residuals: ConeResiduals { primal, dual: 0.0, gap: 0.0 },
                certificate: Some(ConeCertificate::PinnedNotPsd { min_eigenvalue: min_eig }),
                iterations: 0,
            }
        }
    }

    fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, &bi) in self.rows.iter().zip(&self.b) {
            worst = worst.max((dot(row, x) - bi).abs());
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

enum RowReduction {
    Inconsistent { residual: f64 },
    Reduced { kept: Vec<usize>, min_norm_x: Vec<f64> },
}

/// Greedy rank-revealing selection of independent rows (modified
/// Gram-Schmidt with re-orthogonalization and largest-residual pivoting),
/// followed by a consistency check of the dropped rows at the min-norm
/// solution of the kept system.
fn reduce_rows(rows: &[Vec<f64>], b: &[f64], rank_tol: f64) -> RowReduction {
    let m = rows.len();
    if m == 0 {
        return RowReduction::Reduced { kept: vec![], min_norm_x: vec![] };
    }
    let n = rows[0].len();
    // work on unit-normalized rows
    let mut work: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut norms = vec![0.0; m];
    for (i, row) in rows.iter().enumerate() {
        let norm = dot(row, row).sqrt();
        norms[i] = norm;
        if norm > 0.0 {
            work.push(row.iter().map(|v| v / norm).collect());
        } else {
            work.push(row.clone());
        }
    }
    // zero rows must have zero rhs
    for i in 0..m {
        if norms[i] <= rank_tol && b[i].abs() > rank_tol.max(1e-12) {
            return RowReduction::Inconsistent { residual: b[i].abs() };
        }
    }

    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut residual_sq: Vec<f64> = work
        .iter()
        .enumerate()
        .map(|(i, _)| if norms[i] > rank_tol { 1.0 } else { 0.0 })
        .collect();
    loop {
        // pivot on the largest remaining residual
        let (pivot, &max_res) = match residual_sq
            .iter()
            .enumerate()
            .filter(|(i, _)| !kept.contains(i))
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        {
            Some(p) => p,
            None => break,
        };
        if max_res.sqrt() <= rank_tol {
            break;
        }
        // orthogonalize the pivot row against the basis, twice
        let mut v = work[pivot].clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let vnorm = dot(&v, &v).sqrt();
        if vnorm <= rank_tol {
            residual_sq[pivot] = 0.0;
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }
        kept.push(pivot);
        // update residual estimates of the remaining rows
        for i in 0..m {
            if kept.contains(&i) || residual_sq[i] == 0.0 {
                continue;
            }
            let proj = dot(&v, &work[i]);
            residual_sq[i] = (residual_sq[i] - proj * proj).max(0.0);
        }
        basis.push(v);
        if kept.len() == n.min(m) {
            break;
        }
    }
    kept.sort_unstable();

    // min-norm solution of the kept system via the Gram matrix
    let r = kept.len();
    let mut x = vec![0.0; n];
    if r > 0 {
        let mut gram = RealMatrix::zeros(r);
        for (i, &ki) in kept.iter().enumerate() {
            for (j, &kj) in kept.iter().enumerate() {
                gram.set(i, j, dot(&rows[ki], &rows[kj]));
            }
        }
        let rhs: Vec<f64> = kept.iter().map(|&i| b[i]).collect();
        let chol = match regularized_cholesky(&mut gram) {
            Some(l) => l,
            None => return RowReduction::Inconsistent { residual: f64::INFINITY },
        };
        let w = chol.solve_lower_transpose(&chol.solve_lower(&rhs));
        for (j, &ki) in kept.iter().enumerate() {
            for (xi, ai) in x.iter_mut().zip(&rows[ki]) {
                *xi += w[j] * ai;
            }
        }
    }
    // consistency of the dropped rows
    let mut worst = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let res = (dot(row, &x) - b[i]).abs() / norms[i].max(1.0);
        worst = worst.max(res);
    }
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if worst > 1e-7 * scale {
        return RowReduction::Inconsistent { residual: worst };
    }
    RowReduction::Reduced { kept, min_norm_x: x }
}

fn regularized_cholesky(m: &mut RealMatrix) -> Option<RealMatrix> {
    let n = m.n;
    let max_diag = (0..n).map(|i| m.get(i, i)).fold(0.0f64, f64::max).max(1e-300);
    let mut ridge = 1e-13 * max_diag;
    for _ in 0..6 {
        let mut attempt = m.clone();
        for i in 0..n {
            attempt.set(i, i, attempt.get(i, i) + ridge);
        }
        if let Some(l) = attempt.cholesky() {
            return Some(l);
        }
        ridge *= 100.0;
    }
    None
}

/// Per-block Nesterov-Todd scaling data.
struct NtScaling {
    r: RealMatrix,
    r_inv: RealMatrix,
    /// Diagonal scaled point (ascending is not required, positivity is).
    lambda: Vec<f64>,
}

fn nt_scaling(x: &RealMatrix, s: &RealMatrix) -> Option<NtScaling> {
    let lx = x.cholesky()?;
    let _ls = s.cholesky()?;
    // T = L_x^T S L_x, spectral factor gives the scaling point
    let t = lx.transpose().matmul(&s.matmul(&lx));
    let (vals, vecs) = t.eigh().ok()?;
    if vals.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = x.n;
    // R = L_x V Sigma^{-1/2}, R^{-1} = Sigma^{1/2} V^T L_x^{-1}
    let mut r = RealMatrix::zeros(n);
    let lx_v = lx.matmul(&vecs);
    for i in 0..n {
        for j in 0..n {
            r.set(i, j, lx_v.get(i, j) / vals[j].sqrt().sqrt());
        }
    }
    // L_x^{-1} by forward substitution on unit vectors
    let mut lx_inv = RealMatrix::zeros(n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let sol = lx.solve_lower(&e);
        for row in 0..n {
            lx_inv.set(row, col, sol[row]);
        }
    }
    let mut r_inv = vecs.transpose().matmul(&lx_inv);
    for i in 0..n {
        let w = vals[i].sqrt().sqrt();
        for j in 0..n {
            r_inv.set(i, j, r_inv.get(i, j) * w);
        }
    }
    let lambda = vals.iter().map(|v| v.sqrt()).collect();
    Some(NtScaling { r, r_inv, lambda })
}

/// Largest step `alpha` with `X + alpha D` staying PSD, given `X = L L^T`.
fn max_step(l: &RealMatrix, d: &RealMatrix) -> f64 {
    let n = l.n;
    // T = L^{-1} D L^{-T}
    let mut t = RealMatrix::zeros(n);
    for col in 0..n {
        let dcol: Vec<f64> = (0..n).map(|r| d.get(r, col)).collect();
        let sol = l.solve_lower(&dcol);
        for row in 0..n {
            t.set(row, col, sol[row]);
        }
    }
    // now solve from the right: T <- T L^{-T} via solving on rows
    let mut t2 = RealMatrix::zeros(n);
    for row in 0..n {
        let trow: Vec<f64> = (0..n).map(|c| t.get(row, c)).collect();
        let sol = l.solve_lower(&trow);
        for col in 0..n {
            t2.set(row, col, sol[col]);
        }
    }
    t2.symmetrize();
    match t2.eigh() {
        Ok((vals, _)) => {
            let min = vals[0];
            if min >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / min
            }
        }
        Err(_) => 0.0,
    }
}

struct Blocks<'a> {
    sides: &'a [usize],
    offsets: Vec<usize>,
}

impl<'a> Blocks<'a> {
    fn new(sides: &'a [usize]) -> Self {
        let mut offsets = Vec::with_capacity(sides.len());
        let mut acc = 0;
        for &n in sides {
            offsets.push(acc);
            acc += svec_dim(n);
        }
        Self { sides, offsets }
    }

    fn seg<'b>(&self, v: &'b [f64], k: usize) -> &'b [f64] {
        &v[self.offsets[k]..self.offsets[k] + svec_dim(self.sides[k])]
    }

    fn mats(&self, v: &[f64]) -> Vec<RealMatrix> {
        (0..self.sides.len())
            .map(|k| smat(self.sides[k], self.seg(v, k)))
            .collect()
    }

    fn scatter(&self, mats: &[RealMatrix]) -> Vec<f64> {
        let mut out = Vec::new();
        for m in mats {
            out.extend(svec(m));
        }
        out
    }
}

#[allow(clippy::too_many_lines)]
fn hsde_solve(
    prob: &ConeProblem,
    a: &[Vec<f64>],
    b: &[f64],
    settings: &ConeSettings,
) -> ConeSolution {
    let blocks = Blocks::new(&prob.block_sides);
    let n = prob.total_dim();
    let m = a.len();
    let nu: f64 = prob.block_sides.iter().map(|&k| k as f64).sum();
    let c = &prob.c;

    // identity start
    let mut x = blocks.scatter(&prob.block_sides.iter().map(|&k| RealMatrix::identity(k)).collect::<Vec<_>>());
    let mut s = x.clone();
    let mut y = vec![0.0; m];
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let norm_b = dot(b, b).sqrt();
    let norm_c = dot(c, c).sqrt();

    let a_dot_x = |v: &[f64]| -> Vec<f64> { a.iter().map(|row| dot(row, v)).collect() };
    let at_dot_y = |w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (row, &wi) in a.iter().zip(w) {
            if wi != 0.0 {
                for (o, &ri) in out.iter_mut().zip(row) {
                    *o += wi * ri;
                }
            }
        }
        out
    };

    let mut best = ConeSolution {
        status: ConeStatus::MaxIterations,
        x: x.clone(),
        y: y.clone(),
        s: s.clone(),
        objective: f64::NAN,
        residuals: ConeResiduals::default(),
        certificate: None,
        iterations: 0,
    };

    for iter in 0..settings.max_iter {
        // residuals of the homogeneous system
        let ax = a_dot_x(&x);
        let aty = at_dot_y(&y);
        let r_p: Vec<f64> = ax.iter().zip(b).map(|(axi, bi)| axi - bi * tau).collect();
        let r_d: Vec<f64> = (0..n).map(|i| -aty[i] + c[i] * tau - s[i]).collect();
        let cx = dot(c, &x);
        let by = dot(b, &y);
        let r_g = by - cx - kappa;
        let gap = dot(&x, &s) + tau * kappa;
        let mu = gap / (nu + 1.0);

        // scaled convergence metrics
        let xs: Vec<f64> = x.iter().map(|v| v / tau).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / tau).collect();
        let ss: Vec<f64> = s.iter().map(|v| v / tau).collect();
        let pres = {
            let axs = a_dot_x(&xs);
            let mut acc = 0.0;
            for (axi, bi) in axs.iter().zip(b) {
                acc += (axi - bi) * (axi - bi);
            }
            acc.sqrt() / (1.0 + norm_b)
        };
        let dres = {
            let atys = at_dot_y(&ys);
            let mut acc = 0.0;
            for i in 0..n {
                let v = atys[i] + ss[i] - c[i];
                acc += v * v;
            }
            acc.sqrt() / (1.0 + norm_c)
        };
        let pobj = cx / tau;
        let dobj = by / tau;
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let compgap = dot(&xs, &ss) / (1.0 + pobj.abs() + dobj.abs());

        best.residuals = ConeResiduals { primal: pres, dual: dres, gap: relgap.max(compgap) };
        best.objective = pobj;
        best.iterations = iter;

        if pres <= settings.feas_tol && dres <= settings.feas_tol
            && (relgap <= settings.gap_tol || compgap <= settings.gap_tol)
        {
            return ConeSolution {
                status: ConeStatus::Optimal,
                x: xs,
                y: ys,
                s: ss,
                objective: pobj,
                residuals: ConeResiduals { primal: pres, dual: dres, gap: relgap },
                certificate: None,
                iterations: iter,
            };
        }

        // infeasibility: tau collapses against kappa and the dual iterate is
        // an improving ray
        if tau <= 1e-8 * kappa.max(1.0) {
            if by > 0.0 {
                let mut ray = 0.0f64;
                let atyv = at_dot_y(&y);
                for i in 0..n {
                    ray = ray.max((atyv[i] + s[i]).abs());
                }
                let ray_residual = ray / by;
                if ray_residual <= 1e-6 {
                    return ConeSolution {
                        status: ConeStatus::Infeasible,
                        x,
                        y: y.clone(),
                        s,
                        objective: f64::NAN,
                        residuals: best.residuals,
                        certificate: Some(ConeCertificate::ImprovingRay {
                            b_dot_y: by,
                            ray_residual,
                        }),
                        iterations: iter,
                    };
                }
            }
            // dual-infeasible / numerically degenerate embeddings land here
            best.status = ConeStatus::NumericalFailure;
            return best;
        }

        // NT scalings
        let x_mats = blocks.mats(&x);
        let s_mats = blocks.mats(&s);
        let mut scalings = Vec::with_capacity(x_mats.len());
        let mut x_chols = Vec::with_capacity(x_mats.len());
        for (xm, sm) in x_mats.iter().zip(&s_mats) {
            match (nt_scaling(xm, sm), xm.cholesky()) {
                (Some(sc), Some(lx)) => {
                    scalings.push(sc);
                    x_chols.push(lx);
                }
                _ => {
                    best.status = ConeStatus::NumericalFailure;
                    return best;
                }
            }
        }

        // scaled rows and objective: per block, svec(R^T A_ik R)
        let sa: Vec<Vec<f64>> = a
            .iter()
            .map(|row| {
                let mut out = Vec::with_capacity(n);
                for (k, sc) in scalings.iter().enumerate() {
                    let blk = smat(blocks.sides[k], blocks.seg(row, k));
                    let scaled = sc.r.transpose().matmul(&blk.matmul(&sc.r));
                    out.extend(svec(&scaled));
                }
                out
            })
            .collect();
        // H v = svec(R (R^T V R) R^T) per block, using the scaled rows:
        // A H A^T = SA SA^T
        let mut schur = RealMatrix::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&sa[i], &sa[j]);
                schur.set(i, j, v);
                schur.set(j, i, v);
            }
        }
        let schur_chol = match regularized_cholesky(&mut schur) {
            Some(l) => l,
            None => {
                best.status = ConeStatus::NumericalFailure;
                return best;
            }
        };
        let solve_schur =
            |rhs: &[f64]| schur_chol.solve_lower_transpose(&schur_chol.solve_lower(rhs));

        // apply H to a vector in original coordinates
        let apply_h = |v: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(n);
            for (k, sc) in scalings.iter().enumerate() {
                let blk = smat(blocks.sides[k], blocks.seg(v, k));
                let inner = sc.r.transpose().matmul(&blk.matmul(&sc.r));
                let outer = sc.r.matmul(&inner.matmul(&sc.r.transpose()));
                out.extend(svec(&outer));
            }
            out
        };

        // the tau-column solve is shared by predictor and corrector
        let h_c = apply_h(c);
        let rhs2: Vec<f64> = {
            let ahc = a_dot_x(&h_c);
            ahc.iter().zip(b).map(|(v, bi)| v + bi).collect()
        };
        let y2 = solve_schur(&rhs2);
        let x2 = {
            let aty2 = at_dot_y(&y2);
            let h_aty2 = apply_h(&aty2);
            (0..n).map(|i| h_aty2[i] - h_c[i]).collect::<Vec<f64>>()
        };

        // one Newton solve for a given complementarity target
        let newton = |u_c: &[f64], u_tk: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64) {
            // rhs1 = -r_p - A(u_c - H r_d)
            let h_rd = apply_h(&r_d);
            let tmp: Vec<f64> = (0..n).map(|i| u_c[i] - h_rd[i]).collect();
            let a_tmp = a_dot_x(&tmp);
            let rhs1: Vec<f64> = (0..m).map(|i| -r_p[i] - a_tmp[i]).collect();
            let y1 = solve_schur(&rhs1);
            let x1 = {
                let aty1 = at_dot_y(&y1);
                let h_aty1 = apply_h(&aty1);
                (0..n).map(|i| tmp[i] + h_aty1[i]).collect::<Vec<f64>>()
            };
            // dtau from the gap equation
            let denom = -dot(c, &x2) + dot(b, &y2) + kappa / tau;
            let numer = -r_g + dot(c, &x1) - dot(b, &y1) + u_tk / tau;
            let dtau = if denom.abs() > 1e-300 { numer / denom } else { 0.0 };
            let dx: Vec<f64> = (0..n).map(|i| x1[i] + dtau * x2[i]).collect();
            let dy: Vec<f64> = (0..m).map(|i| y1[i] + dtau * y2[i]).collect();
            let dat = at_dot_y(&dy);
            let ds: Vec<f64> = (0..n).map(|i| -dat[i] + c[i] * dtau + r_d[i]).collect();
            let dkappa = (u_tk - kappa * dtau) / tau;
            (dx, dy, ds, dtau, dkappa)
        };

        let boundary_step = |dx: &[f64], ds: &[f64], dtau: f64, dkappa: f64| -> f64 {
            let mut alpha = f64::INFINITY;
            for (k, lx) in x_chols.iter().enumerate() {
                let d = smat(blocks.sides[k], blocks.seg(dx, k));
                alpha = alpha.min(max_step(lx, &d));
            }
            for (k, (sm, _)) in s_mats.iter().zip(&scalings).enumerate() {
                if let Some(ls) = sm.cholesky() {
                    let d = smat(blocks.sides[k], blocks.seg(ds, k));
                    alpha = alpha.min(max_step(&ls, &d));
                } else {
                    alpha = 0.0;
                }
            }
            if dtau < 0.0 {
                alpha = alpha.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                alpha = alpha.min(-kappa / dkappa);
            }
            alpha
        };

        // predictor: drive the complementarity to zero
        let u_c_aff: Vec<f64> = x.iter().map(|v| -v).collect();
        let (dx_a, _dy_a, ds_a, dtau_a, dkappa_a) = newton(&u_c_aff, -tau * kappa);
        let alpha_aff = boundary_step(&dx_a, &ds_a, dtau_a, dkappa_a).min(1.0);

        // Mehrotra centering weight
        let gap_aff = {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x[i] + alpha_aff * dx_a[i]) * (s[i] + alpha_aff * ds_a[i]);
            }
            acc + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a)
        };
        let sigma = ((gap_aff / gap).max(0.0)).powi(3).clamp(1e-8, 1.0 - 1e-8);

        // corrector target in the scaled space
        let mut u_c = Vec::with_capacity(n);
        for (k, sc) in scalings.iter().enumerate() {
            let side = blocks.sides[k];
            let dxm = smat(side, blocks.seg(&dx_a, k));
            let dsm = smat(side, blocks.seg(&ds_a, k));
            let dlx = sc.r_inv.matmul(&dxm.matmul(&sc.r_inv.transpose()));
            let dls = sc.r.transpose().matmul(&dsm.matmul(&sc.r));
            // G = sigma mu I - lambda^2 - (dlx o dls)
            let mut g = RealMatrix::zeros(side);
            for i in 0..side {
                for j in 0..side {
                    let mut cross = 0.0;
                    for l in 0..side {
                        cross +=
                            dlx.get(i, l) * dls.get(l, j) + dls.get(i, l) * dlx.get(l, j);
                    }
                    let mut v = -0.5 * cross;
                    if i == j {
                        v += sigma * mu - sc.lambda[i] * sc.lambda[i];
                    }
                    g.set(i, j, v);
                }
            }
            // solve lambda o U = G elementwise in the scaled basis
            let mut gt = RealMatrix::zeros(side);
            for i in 0..side {
                for j in 0..side {
                    gt.set(i, j, 2.0 * g.get(i, j) / (sc.lambda[i] + sc.lambda[j]));
                }
            }
            let back = sc.r.matmul(&gt.matmul(&sc.r.transpose()));
            u_c.extend(svec(&back));
        }
        let u_tk = sigma * mu - tau * kappa - dtau_a * dkappa_a;

        let (dx, dy, ds, dtau, dkappa) = newton(&u_c, u_tk);
        let alpha = (0.99 * boundary_step(&dx, &ds, dtau, dkappa)).min(1.0);
        if !alpha.is_finite() || alpha <= 1e-10 {
            best.status = ConeStatus::NumericalFailure;
            return best;
        }

        for i in 0..n {
            x[i] += alpha * dx[i];
            s[i] += alpha * ds[i];
        }
        for i in 0..m {
            y[i] += alpha * dy[i];
        }
        tau += alpha * dtau;
        kappa += alpha * dkappa;
    }

    best
}
