//! Two-qubit Bloch representation: the lab-space triple `{r, s, T}`.
//!
//! A two-qubit operator decomposes over the Pauli basis as
//! `rho = (I(x)I + sum_i r_i s_i(x)I + sum_j s_j I(x)s_j + sum_ij T_ij s_i(x)s_j)/4`.
//! The triple of the two local Bloch vectors and the 3x3 correlation matrix
//! fully describes a unit-trace Hermitian operator; positivity is a separate
//! question and must be checked when a density operator is required.

use crate::linalg::{tensor_product, C64, ComplexMatrix, LinalgError};

/// Pauli X.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
}

/// Pauli Y.
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
}

/// Pauli Z.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// The three Pauli matrices, indexed 0..3 as x, y, z.
pub fn paulis() -> [ComplexMatrix; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Lab-space triple of a two-qubit operator: local Bloch vectors `r`, `s`
/// and correlation matrix `t`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LabSpace {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl LabSpace {
    pub fn zero() -> Self {
        Self { r: [0.0; 3], s: [0.0; 3], t: [[0.0; 3]; 3] }
    }
}

/// Assemble the 4x4 operator for a lab-space triple. Always Hermitian with
/// unit trace; not necessarily positive.
pub fn bloch_to_rho(lab: &LabSpace) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let sig = paulis();
    let mut rho = tensor_product(&id, &id);
    for i in 0..3 {
        if lab.r[i] != 0.0 {
            rho = rho.add(&tensor_product(&sig[i], &id).scale_re(lab.r[i]));
        }
        if lab.s[i] != 0.0 {
            rho = rho.add(&tensor_product(&id, &sig[i]).scale_re(lab.s[i]));
        }
        for j in 0..3 {
            if lab.t[i][j] != 0.0 {
                rho = rho.add(&tensor_product(&sig[i], &sig[j]).scale_re(lab.t[i][j]));
            }
        }
    }
    rho.scale_re(0.25)
}

/// Extract the lab-space triple: `r_i = Tr(rho s_i(x)I)` and so on.
pub fn rho_to_bloch(rho: &ComplexMatrix) -> Result<LabSpace, LinalgError> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected a 4x4 two-qubit operator, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let id = ComplexMatrix::identity(2);
    let sig = paulis();
    let mut lab = LabSpace::zero();
    for i in 0..3 {
        lab.r[i] = rho.matmul(&tensor_product(&sig[i], &id)).trace().re;
        lab.s[i] = rho.matmul(&tensor_product(&id, &sig[i])).trace().re;
        for j in 0..3 {
            lab.t[i][j] = rho.matmul(&tensor_product(&sig[i], &sig[j])).trace().re;
        }
    }
    Ok(lab)
}

/// Bloch vector of a single-qubit operator: `v_i = Tr(rho s_i)`.
pub fn qubit_bloch(rho: &ComplexMatrix) -> Result<[f64; 3], LinalgError> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected a 2x2 operator, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let sig = paulis();
    let mut v = [0.0; 3];
    for i in 0..3 {
        v[i] = rho.matmul(&sig[i]).trace().re;
    }
    Ok(v)
}

/// `(I + v.sigma)/2` for a single-qubit Bloch vector.
pub fn qubit_from_bloch(v: &[f64; 3]) -> ComplexMatrix {
    let mut rho = ComplexMatrix::identity(2);
    let sig = paulis();
    for i in 0..3 {
        if v[i] != 0.0 {
            rho = rho.add(&sig[i].scale_re(v[i]));
        }
    }
    rho.scale_re(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn maximally_mixed_is_zero_triple() {
        let rho = bloch_to_rho(&LabSpace::zero());
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25)) < 1e-15);
        let lab = rho_to_bloch(&ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
        assert_eq!(lab, LabSpace::zero());
    }

    #[test]
    fn bell_state_correlation_matrix() {
        // normalized |Phi+><Phi+| has T = diag(1, -1, 1), r = s = 0
        let mut lab = LabSpace::zero();
        lab.t = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let rho = bloch_to_rho(&lab);
        let mut bell = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = C64::new(0.5, 0.0);
        }
        assert!(rho.max_abs_diff(&bell) < 1e-15);
        let back = rho_to_bloch(&bell).unwrap();
        assert!((back.t[0][0] - 1.0).abs() < 1e-14);
        assert!((back.t[1][1] + 1.0).abs() < 1e-14);
        assert!((back.t[2][2] - 1.0).abs() < 1e-14);
        for i in 0..3 {
            assert!(back.r[i].abs() < 1e-14 && back.s[i].abs() < 1e-14);
        }
    }

    #[test]
    fn ground_state_triple() {
        let lab = LabSpace {
            r: [0.0, 0.0, 1.0],
            s: [0.0, 0.0, 1.0],
            t: [[0.0; 3], [0.0; 3], [0.0, 0.0, 1.0]],
        };
        let rho = bloch_to_rho(&lab);
        let want = ComplexMatrix::basis_projector(4, 0); // |00><00|
        assert!(rho.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn round_trip_on_random_unit_trace_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let mut lab = LabSpace::zero();
            for i in 0..3 {
                lab.r[i] = rng.gen_range(-1.0..1.0);
                lab.s[i] = rng.gen_range(-1.0..1.0);
                for j in 0..3 {
                    lab.t[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
            let rho = bloch_to_rho(&lab);
            assert!(rho.is_hermitian(1e-14));
            assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
            let back = rho_to_bloch(&rho).unwrap();
            let rho2 = bloch_to_rho(&back);
            assert!(rho.max_abs_diff(&rho2) < 1e-12);
            for i in 0..3 {
                assert!((back.r[i] - lab.r[i]).abs() < 1e-13);
                assert!((back.s[i] - lab.s[i]).abs() < 1e-13);
                for j in 0..3 {
                    assert!((back.t[i][j] - lab.t[i][j]).abs() < 1e-13);
                }
            }
        }
    }
}
