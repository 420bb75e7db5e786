//! First-order predictors built from the aligned perturbation `Ê`.

use num_complex::Complex64;

use crate::alignment::{AlignedPerturbation, AlignmentMode, BlockStructure, MMatrix};
use crate::error::{PerturbError, Result};
use crate::matrix::{operator_norm, DenseMatrix, HermitianMatrix};

#[derive(Debug, Clone)]
pub struct FirstOrderPrediction {
    pub xi_hat: Vec<f64>,
    pub u_ap: DenseMatrix,
    pub blocks: BlockStructure,
}

impl FirstOrderPrediction {
    pub fn new(ap: &AlignedPerturbation, m: &MMatrix) -> Result<Self> {
        Ok(FirstOrderPrediction {
            xi_hat: first_order_eigenvalues(ap)?,
            u_ap: u_approx(ap, m)?,
            blocks: ap.blocks.clone(),
        })
    }

    /// `‖U_ap* U_ap − I‖`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.u_ap)
    }
}

pub fn orthonormality_defect(u: &DenseMatrix) -> f64 {
    operator_norm(&(&(&u.adjoint() * u) - &DenseMatrix::identity(u.cols())))
}

/// `α_j + Ê(j,j)`. Requires a block-wise diagonal alignment so that the
/// in-block ordering matches the non-increasing ordering of `A + E`.
pub fn first_order_eigenvalues(ap: &AlignedPerturbation) -> Result<Vec<f64>> {
    ap.require_mode(AlignmentMode::BlockwiseDiagonal)?;
    Ok(ap
        .alpha()
        .iter()
        .zip(&ap.e_hat_diag)
        .map(|(a, e)| a + e)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GershgorinDisc {
    pub center: f64,
    pub radius: f64,
}

impl GershgorinDisc {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.center).abs() <= self.radius + slack
    }
}

/// Discs of `Λ_α + Ê`: center `α_j + Ê(j,j)`, radius the off-diagonal
/// row sum of `|Ê|`.
pub fn gershgorin_intervals(ap: &AlignedPerturbation) -> Vec<GershgorinDisc> {
    let n = ap.n();
    (0..n)
        .map(|j| GershgorinDisc {
            center: ap.alpha()[j] + ap.e_hat_diag[j],
            radius: (0..n)
                .filter(|&i| i != j)
                .map(|i| ap.e_hat[(j, i)].norm())
                .sum(),
        })
        .collect()
}

fn check_m(ap: &AlignedPerturbation, m: &MMatrix) -> Result<()> {
    if m.n() != ap.n() {
        return Err(PerturbError::dims(
            format!("{}x{} M matrix", ap.n(), ap.n()),
            format!("{}x{}", m.n(), m.n()),
        ));
    }
    Ok(())
}

/// `U_ap = U_A (I − M∘Ê)`.
pub fn u_approx(ap: &AlignedPerturbation, m: &MMatrix) -> Result<DenseMatrix> {
    check_m(ap, m)?;
    let correction = &DenseMatrix::identity(ap.n()) - &m.hadamard(ap.e_hat.as_dense());
    ap.base.u.matmul(&correction)
}

/// `‖(A + E) − U_ap (Λ_α + Ê^d) U_ap*‖`.
pub fn approx_decomposition_residual(ap: &AlignedPerturbation, m: &MMatrix) -> Result<f64> {
    let u_ap = u_approx(ap, m)?;
    let n = ap.n();
    let diag: Vec<f64> = ap
        .alpha()
        .iter()
        .zip(&ap.e_hat_diag)
        .map(|(a, e)| a + e)
        .collect();
    let scaled = DenseMatrix::from_fn(n, n, |i, j| u_ap[(i, j)] * Complex64::new(diag[j], 0.0));
    let approx = HermitianMatrix::symmetrized(&scaled * &u_ap.adjoint());
    Ok(ap.perturbed_matrix().sub(&approx).operator_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{align, blockwise_diagonalize, m_matrix};
    use crate::jacobi::eigh_default;

    fn two_by_two(eps: f64) -> AlignedPerturbation {
        let a = HermitianMatrix::from_real_diag(&[3.0, 1.0]);
        let e = HermitianMatrix::from_real_rows(&[&[0.0, eps], &[eps, 0.0]]);
        blockwise_diagonalize(&align(&a, &e).unwrap()).unwrap()
    }

    #[test]
    fn zero_perturbation_predicts_alpha() {
        let a = HermitianMatrix::from_real_rows(&[&[2.0, 0.3], &[0.3, -1.0]]);
        let ap = blockwise_diagonalize(&align(&a, &HermitianMatrix::zeros(2)).unwrap()).unwrap();
        assert_eq!(first_order_eigenvalues(&ap).unwrap(), ap.alpha().to_vec());
        let m = m_matrix(&ap.base, &ap.blocks);
        assert_eq!(u_approx(&ap, &m).unwrap(), ap.base.u);
        assert!(approx_decomposition_residual(&ap, &m).unwrap() < 1e-14);
    }

    #[test]
    fn raw_mode_is_rejected() {
        let a = HermitianMatrix::from_real_diag(&[3.0, 1.0]);
        let ap = align(&a, &HermitianMatrix::zeros(2)).unwrap();
        assert!(matches!(first_order_eigenvalues(&ap), Err(PerturbError::Mode { .. })));
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let ap = two_by_two(0.1);
        let pred = first_order_eigenvalues(&ap).unwrap();
        assert_eq!(pred, vec![3.0, 1.0]);
        let truth = eigh_default(&ap.perturbed_matrix()).unwrap().lambda;
        let err = (truth[0] - pred[0]).abs();
        assert!((err - 4.98756e-3).abs() < 1e-7, "{err}");
        assert!(err <= 0.01 / 2.0);
    }

    #[test]
    fn two_by_two_discs() {
        let discs = gershgorin_intervals(&two_by_two(0.1));
        assert_eq!(discs[0], GershgorinDisc { center: 3.0, radius: 0.1 });
        assert_eq!(discs[1], GershgorinDisc { center: 1.0, radius: 0.1 });
    }

    #[test]
    fn diagonal_perturbation_has_zero_radii() {
        let a = HermitianMatrix::from_real_diag(&[3.0, 1.0, 0.0]);
        let e = HermitianMatrix::from_real_diag(&[0.1, -0.2, 0.3]);
        let ap = align(&a, &e).unwrap();
        let discs = gershgorin_intervals(&ap);
        let truth = eigh_default(&ap.perturbed_matrix()).unwrap().lambda;
        for (d, x) in discs.iter().zip(&truth) {
            assert_eq!(d.radius, 0.0);
            assert!((d.center - x).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_u_approx() {
        let ap = two_by_two(0.1);
        let m = m_matrix(&ap.base, &ap.blocks);
        let u = u_approx(&ap, &m).unwrap();
        let want = DenseMatrix::from_real_rows(&[&[1.0, -0.05], &[0.05, 1.0]]);
        assert!(u.max_abs_diff(&want) < 1e-16);
        // Exact eigenvector (cos θ, sin θ) with tan 2θ = 0.1.
        let theta = 0.5 * 0.1f64.atan();
        let oracle = eigh_default(&ap.perturbed_matrix()).unwrap().u;
        assert!((oracle[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((oracle[(1, 0)].re - theta.sin()).abs() < 1e-14);
        // sin θ = 0.049814, so the rounded (0.99876, 0.04984) holds to 1e-4 only.
        assert!((oracle[(0, 0)].re - 0.99876).abs() < 1e-4 && (oracle[(1, 0)].re - 0.04984).abs() < 1e-4);
        // Columns agree to second order in ‖E‖.
        let col_err = ((u[(0, 0)].re - theta.cos()).powi(2) + (u[(1, 0)].re - theta.sin()).powi(2)).sqrt();
        assert!(col_err < 0.01, "{col_err}");
        let r = approx_decomposition_residual(&ap, &m).unwrap();
        assert!(r <= 0.01, "{r}");
    }

    #[test]
    fn u_approx_dimension_mismatch() {
        let ap = two_by_two(0.1);
        let m = MMatrix::from_labels(&[1.0, 2.0, 3.0], &[0, 1, 2]);
        assert!(u_approx(&ap, &m).is_err());
    }
}
