use inertial_attitude::analysis::{enumerate_equilibria, linearize_stable, linearize_unstable, Stability};
use inertial_attitude::linalg::{eigenvalues_dense, symmetric_eigen3, SquareMatrix};
use inertial_attitude::presets;
use inertial_attitude::so3::Mat3;
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use proptest::prelude::*;

fn to_nalgebra(a: &SquareMatrix) -> DMatrix<f64> {
    let rows = a.rows();
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| rows[i][j])
}

/// Largest distance from an eigenvalue of ours to the nearest unused one of
/// nalgebra's, relative to the spectral radius.
fn spectrum_mismatch(a: &SquareMatrix) -> f64 {
    let ours = eigenvalues_dense(a).unwrap();
    let mut theirs: Vec<Complex64> = to_nalgebra(a)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    assert_eq!(ours.len(), theirs.len());
    let scale = theirs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for z in ours {
        let (k, d) = theirs
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        theirs.swap_remove(k);
        worst = worst.max(d / scale);
    }
    worst
}

#[test]
fn closed_loop_spectra_match_nalgebra() {
    let model = presets::benchmark_model().unwrap();
    assert!(spectrum_mismatch(&linearize_stable(&model).unwrap().matrix) < 1e-9);
    for eq in enumerate_equilibria(model.w_rho()).unwrap() {
        if eq.classification == Stability::HyperbolicUnstable {
            assert!(spectrum_mismatch(&linearize_unstable(&eq, &model).unwrap().matrix) < 1e-9, "{}", eq.label);
        }
    }
}

proptest! {
    #[test]
    fn dense_eigenvalues_match_nalgebra(n in 2usize..13, entries in prop::collection::vec(-5.0f64..5.0, 144)) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| entries[i * 12..i * 12 + n].to_vec()).collect();
        let a = SquareMatrix::from_rows(&rows).unwrap();
        prop_assert!(spectrum_mismatch(&a) < 1e-8);
    }

    #[test]
    fn symmetric_eigen_matches_nalgebra(e in prop::array::uniform6(-10.0f64..10.0)) {
        let m = Mat3 { m: [[e[0], e[3], e[4]], [e[3], e[1], e[5]], [e[4], e[5], e[2]]] };
        let ours = symmetric_eigen3(&m);
        let n = Matrix3::new(e[0], e[3], e[4], e[3], e[1], e[5], e[4], e[5], e[2]);
        let mut theirs: Vec<f64> = n.symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
        prop_assert!(ours.residual(&m) < 1e-10);
    }
}
