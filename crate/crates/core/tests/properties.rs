use hermpert::alignment::{align, blockwise_diagonalize, conjugate_to_eigenbasis, group_eigenvalues};
use hermpert::first_order::first_order_eigenvalues;
use hermpert::harness::ensemble::{random_hermitian, random_unitary, trial_rng};
use hermpert::harness::{generate_instance, EnsembleConfig, Predictor};
use hermpert::jacobi::eigh_default;
use hermpert::schur::{schur_data, schur_data_variant, SchurVariant};
use hermpert::{operator_norm, Complex64, DenseMatrix, HermitianMatrix};
use proptest::prelude::*;

fn hermitian(seed: u64, n: usize) -> HermitianMatrix {
    random_hermitian(&mut trial_rng(seed, 0), n)
}

fn instance(seed: u64, spec: &[usize]) -> (HermitianMatrix, HermitianMatrix) {
    let cfg = EnsembleConfig::new(seed, spec.to_vec(), 1, Predictor::FirstOrder);
    let inst = generate_instance(&cfg, 0);
    (inst.a, inst.f)
}

fn spec_strategy() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..4, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn oracle_invariants(seed in any::<u64>(), n in 1usize..=12) {
        let h = hermitian(seed, n);
        let d = eigh_default(&h).unwrap();
        let nf = n as f64;
        prop_assert!(d.lambda.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(d.unitarity_defect() <= 1e-12 * nf);
        prop_assert!(hermpert::residual(&h, &d).unwrap() <= 1e-12 * nf * h.operator_norm().max(1.0));
        for j in 0..n {
            let col = d.u.column(j);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = col.iter().find(|z| z.norm() == big).unwrap();
            prop_assert!(lead.im == 0.0 && lead.re >= 0.0);
        }
        // Identical input, identical output.
        prop_assert_eq!(eigh_default(&h).unwrap(), d);
    }
}

proptest! {
    #[test]
    fn two_by_two_closed_form(a in -10.0..10.0f64, d in -10.0..10.0f64, re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let b = Complex64::new(re, im);
        let m = DenseMatrix::new(2, 2, vec![Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0)]).unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let lambda = eigh_default(&h).unwrap().lambda;
        let scale = h.operator_norm().max(1.0);
        prop_assert!((lambda[0] - (mid + rad)).abs() <= 1e-12 * scale);
        prop_assert!((lambda[1] - (mid - rad)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn similarity_invariance(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = trial_rng(seed, 1);
        let h = random_hermitian(&mut rng, n);
        let q = random_unitary(&mut rng, n);
        let rotated = h.congruence(&q).unwrap();
        let a = eigh_default(&h).unwrap().lambda;
        let b = eigh_default(&rotated).unwrap().lambda;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn weyl_bound(seed in any::<u64>(), n in 1usize..=8, t in 1e-4..1.0f64) {
        let mut rng = trial_rng(seed, 2);
        let a = random_hermitian(&mut rng, n);
        let e = random_hermitian(&mut rng, n).scale(t);
        let alpha = eigh_default(&a).unwrap().lambda;
        let xi = eigh_default(&a.add(&e)).unwrap().lambda;
        let shift = alpha.iter().zip(&xi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(shift <= e.operator_norm() * (1.0 + 1e-10));
    }

    #[test]
    fn operator_norm_homogeneity_and_triangle(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, s in -3.0..3.0f64) {
        let mut rng = trial_rng(seed, 3);
        let big = random_hermitian(&mut rng, rows.max(cols)).into_dense();
        let other = random_hermitian(&mut rng, rows.max(cols)).into_dense();
        let idx_r: Vec<usize> = (0..rows).collect();
        let idx_c: Vec<usize> = (0..cols).collect();
        let x = big.submatrix(&idx_r, &idx_c);
        let y = other.submatrix(&idx_r, &idx_c);
        let nx = operator_norm(&x);
        prop_assert!((operator_norm(&x.scale(s)) - s.abs() * nx).abs() <= 1e-12 * nx.max(1.0));
        prop_assert!(operator_norm(&(&x + &y)) <= nx + operator_norm(&y) + 1e-12);
        prop_assert!(nx <= x.frobenius_norm() * (1.0 + 1e-12));
        prop_assert!(nx + 1e-12 >= x.max_abs());
    }

    #[test]
    fn first_order_map_is_linear(seed in any::<u64>(), spec in spec_strategy(), s in -2.0..2.0f64) {
        let (a, f) = instance(seed, &spec);
        let g = hermitian(seed ^ 0xA5A5, a.n());
        let base = eigh_default(&a).unwrap();
        let shift = |e: &HermitianMatrix| conjugate_to_eigenbasis(&base, e).unwrap().e_hat_diag;
        let combined = shift(&f.scale(s).add(&g));
        let parts: Vec<f64> = shift(&f).iter().zip(shift(&g)).map(|(x, y)| s * x + y).collect();
        for (x, y) in combined.iter().zip(&parts) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + s.abs()) * a.n() as f64);
        }
    }

    #[test]
    fn blockwise_diagonalization(seed in any::<u64>(), spec in spec_strategy(), t in 1e-3..0.3f64) {
        let (a, f) = instance(seed, &spec);
        let e = f.scale(t);
        let raw = align(&a, &e).unwrap();
        let ap = blockwise_diagonalize(&raw).unwrap();
        let scale = 1e-12 * a.n() as f64;
        // Norm and spectrum of Ê are preserved.
        prop_assert!((ap.e_hat.operator_norm() - raw.e_hat.operator_norm()).abs() <= scale);
        let before = eigh_default(&raw.e_hat).unwrap().lambda;
        let after = eigh_default(&ap.e_hat).unwrap().lambda;
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= scale);
        }
        // In-block off-diagonals vanish, diagonals are non-increasing.
        for g in &ap.blocks.groups {
            for i in g.clone() {
                for j in g.clone() {
                    if i != j {
                        prop_assert!(ap.e_hat[(i, j)].norm() <= scale * t);
                    }
                }
            }
            let d: Vec<f64> = g.clone().map(|i| ap.e_hat_diag[i]).collect();
            prop_assert!(d.windows(2).all(|w| w[0] >= w[1]));
        }
        // Same perturbed matrix in either representation.
        prop_assert!(ap.perturbed_matrix().sub(&raw.perturbed_matrix()).operator_norm() <= scale * a.operator_norm().max(1.0));
        // Idempotent up to rounding.
        let again = blockwise_diagonalize(&ap).unwrap();
        for (x, y) in again.e_hat_diag.iter().zip(&ap.e_hat_diag) {
            prop_assert!((x - y).abs() <= scale);
        }
        prop_assert_eq!(first_order_eigenvalues(&ap).unwrap().len(), a.n());
    }

    #[test]
    fn grouping_separates_blocks(values in proptest::collection::vec(-5.0..5.0f64, 1..10), tol in 1e-9..1e-1f64) {
        let mut lambda = values;
        lambda.sort_by(|a, b| b.total_cmp(a));
        let blocks = group_eigenvalues(&lambda, tol);
        let scale = lambda.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert_eq!(blocks.n(), lambda.len());
        for w in blocks.groups.windows(2) {
            prop_assert!(lambda[w[0].end - 1] - lambda[w[1].start] > tol * scale);
        }
        for g in &blocks.groups {
            for i in g.start + 1..g.end {
                prop_assert!(lambda[i - 1] - lambda[i] <= tol * scale);
            }
        }
    }

    #[test]
    fn schur_complement_invariants(seed in any::<u64>(), spec in spec_strategy(), t in 1e-3..0.2f64) {
        prop_assume!(spec.len() > 1);
        let (a, f) = instance(seed, &spec);
        let ap = align(&a, &f.scale(t)).unwrap();
        let e_norm = ap.e_norm;
        for b in 0..ap.blocks.len() {
            let full = schur_data(&ap, b).unwrap();
            let simple = schur_data_variant(&ap, b, SchurVariant::Simplified).unwrap();
            // B + C K⁻¹ C* = Ê11.
            let k = full.shifted_complement();
            let back = full.b.as_dense() + &(&full.c * &k.solve(&full.c.adjoint()).unwrap());
            prop_assert!(back.max_abs_diff(full.e11.as_dense()) <= 1e-12);
            // ‖B − B̃‖ ≤ ‖C‖²‖D‖ / (g (g − ‖D‖)) ≤ ‖E‖³ / (g (g − ‖E‖)).
            let g = full.lambda_tau.iter().map(|x| (x - full.rho).abs()).fold(f64::INFINITY, f64::min);
            let diff = full.b.sub(&simple.b).operator_norm();
            prop_assert!(diff <= e_norm.powi(3) / (g * (g - e_norm)) * (1.0 + 1e-9) + 1e-14);
            prop_assert!(full.b.operator_norm() <= e_norm + e_norm * e_norm / (g - e_norm) + 1e-12);
        }
    }
}
