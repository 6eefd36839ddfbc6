mod common;

use contourlet_pose::features::{fit_projection, lda_fit, ncsev, pca_fit, scatter_matrices, to_matrix, PcaTarget};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use common::{covariance, jacobi_eigen, normal, rng};

fn gaussian_rows(n: usize, d: usize, r: &mut impl Rng) -> Vec<Vec<f64>> {
    // anisotropic so eigenvalues are well separated
    (0..n).map(|_| (0..d).map(|j| normal(r) * (1.0 + 1.7 * j as f64)).collect()).collect()
}

fn signed_like(reference: &[f64], v: &[f64]) -> Vec<f64> {
    let dot: f64 = reference.iter().zip(v).map(|(a, b)| a * b).sum();
    v.iter().map(|x| x * dot.signum()).collect()
}

#[test]
fn gram_pca_matches_dense_covariance_jacobi() {
    let mut r = rng(11);
    for _ in 0..20 {
        let n = r.random_range(3..=12);
        let d = r.random_range(1..=8);
        let rows = gaussian_rows(n, d, &mut r);
        let (values, vectors) = jacobi_eigen(&covariance(&rows));
        let keep = (n - 1).min(d);
        let pca = pca_fit(&to_matrix(&rows).unwrap(), PcaTarget::Count(keep)).unwrap();
        for j in 0..keep {
            assert!((pca.eigenvalues[j] - values[j]).abs() < 1e-8 * values[0].max(1.0), "eigenvalue {j}");
            let ours: Vec<f64> = pca.basis.column(j).iter().copied().collect();
            let theirs: Vec<f64> = (0..d).map(|i| vectors[i][j]).collect();
            let theirs = signed_like(&ours, &theirs);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-8, "eigenvector {j}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn pca_worked_case_ten_by_five() {
    let mut r = rng(5);
    let rows = gaussian_rows(10, 5, &mut r);
    let pca = pca_fit(&to_matrix(&rows).unwrap(), PcaTarget::Count(3)).unwrap();
    let (values, _) = jacobi_eigen(&covariance(&rows));
    assert_eq!(pca.basis.shape(), (5, 3));
    for j in 0..3 {
        assert!((pca.eigenvalues[j] - values[j]).abs() < 1e-9 * values[0]);
    }
    let gram = pca.basis.transpose() * &pca.basis;
    assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-10);
    // projected data have diagonal covariance equal to the eigenvalues
    let x = to_matrix(&rows).unwrap();
    let mut z = x * &pca.basis;
    for j in 0..3 {
        let m = z.column(j).mean();
        z.column_mut(j).add_scalar_mut(-m);
    }
    let cov = z.transpose() * &z / 9.0;
    for a in 0..3 {
        for b in 0..3 {
            let want = if a == b { pca.eigenvalues[a] } else { 0.0 };
            assert!((cov[(a, b)] - want).abs() < 1e-9 * values[0]);
        }
    }
}

fn three_class_2d(per_class: usize, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let means = [(0.0, 0.0), (3.0, 1.0), (1.0, 4.0)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &(mx, my)) in means.iter().enumerate() {
        for _ in 0..per_class {
            let e = normal(&mut r);
            let f = normal(&mut r);
            // correlated within-class noise
            rows.push(vec![mx + 0.8 * e + 0.3 * f, my + 0.2 * e + 0.5 * f]);
            labels.push(c);
        }
    }
    (to_matrix(&rows).unwrap(), labels)
}

#[test]
fn two_dimensional_lda_matches_closed_form_generalized_eigen() {
    let (z, labels) = three_class_2d(15, 3);
    let (sw, sb) = scatter_matrices(&z, &labels, 3);
    // det(Sb - λ Sw) = 0 as a quadratic in λ
    let a = sw[(0, 0)] * sw[(1, 1)] - sw[(0, 1)] * sw[(1, 0)];
    let b = -(sb[(0, 0)] * sw[(1, 1)] + sw[(0, 0)] * sb[(1, 1)] - sb[(0, 1)] * sw[(1, 0)] - sw[(0, 1)] * sb[(1, 0)]);
    let c = sb[(0, 0)] * sb[(1, 1)] - sb[(0, 1)] * sb[(1, 0)];
    let disc = (b * b - 4.0 * a * c).sqrt();
    let roots = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)];

    let lda = lda_fit(&z, &labels, 2).unwrap();
    for j in 0..2 {
        assert!((lda.eigenvalues[j] - roots[j]).abs() < 1e-9 * roots[0], "{:?} vs {roots:?}", lda.eigenvalues);
        // w spans the null space of Sb - λ Sw
        let m = &sb - &sw * roots[j];
        let w = lda.basis.column(j);
        let residual = (&m * w).norm() / m.norm();
        assert!(residual < 1e-9, "direction {j} residual {residual}");
    }
}

fn fisher_ratio(sw: &DMatrix<f64>, sb: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    (w.transpose() * sb * w)[(0, 0)] / (w.transpose() * sw * w)[(0, 0)]
}

#[test]
fn leading_direction_beats_random_directions() {
    let mut r = rng(99);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..4 {
        let centre: Vec<f64> = (0..5).map(|_| r.random_range(-3.0..3.0)).collect();
        for _ in 0..12 {
            rows.push(centre.iter().map(|m| m + normal(&mut r)).collect());
            labels.push(c);
        }
    }
    let z = to_matrix(&rows).unwrap();
    let (sw, sb) = scatter_matrices(&z, &labels, 4);
    let lda = lda_fit(&z, &labels, 1).unwrap();
    let best = fisher_ratio(&sw, &sb, &lda.basis.column(0).into_owned());
    assert!((best - lda.eigenvalues[0]).abs() < 1e-9 * best);
    for _ in 0..100 {
        let w = DVector::from_fn(5, |_, _| normal(&mut r));
        assert!(fisher_ratio(&sw, &sb, &w) <= best * (1.0 + 1e-12));
    }
}

#[test]
fn projection_of_training_mean_is_zero_and_affine() {
    let (z, labels) = three_class_2d(8, 21);
    let model = fit_projection(&z, &labels, 1.0, 2).unwrap();
    let mean: Vec<f64> = model.mean.iter().copied().collect();
    assert!(model.project(&mean).unwrap().iter().all(|v| v.abs() < 1e-12));
    let x = vec![2.0, -1.5];
    let a = 0.3;
    let mixed: Vec<f64> = x.iter().zip(&mean).map(|(xi, mi)| a * xi + (1.0 - a) * mi).collect();
    let lhs = model.project(&mixed).unwrap();
    let rhs = model.project(&x).unwrap();
    for (l, r) in lhs.iter().zip(&rhs) {
        assert!((l - a * r).abs() < 1e-12);
    }
}

#[test]
fn ncsev_matches_direct_cumulative_sum() {
    let mut r = rng(1);
    for _ in 0..100 {
        let m = r.random_range(1..40);
        let mut v: Vec<f64> = (0..m).map(|_| r.random_range(0.0..10.0)).collect();
        v[0] += 0.1;
        let total: f64 = v.iter().sum();
        let mut acc = 0.0;
        let direct: Vec<f64> = v
            .iter()
            .map(|x| {
                acc += x;
                acc / total
            })
            .collect();
        let curve = ncsev(&v).unwrap();
        for (a, b) in curve.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        assert!((curve[m - 1] - 1.0).abs() < 1e-12);
    }
}
