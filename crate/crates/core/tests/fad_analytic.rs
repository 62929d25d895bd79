use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sseval_core::embed::{EmbeddingBackendId, EmbeddingSet};
use sseval_core::fad::{fad, fad_bias_curve, frechet_distance, trace_sqrt_product};
use sseval_core::{GaussianStats, Matrix};

fn random_psd(rng: &mut impl Rng, d: usize, ridge: f64) -> Matrix {
    let b: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = Matrix::from_row_major(d, d, b);
    let mut c = b.matmul(&b.transpose());
    for i in 0..d {
        c[(i, i)] += ridge;
    }
    c
}

fn stats(mean: Vec<f64>, cov: Matrix) -> GaussianStats {
    GaussianStats::new(mean, cov, 100).unwrap()
}

fn permute(s: &GaussianStats, p: &[usize]) -> GaussianStats {
    let d = s.dim();
    let mean = p.iter().map(|&i| s.mean()[i]).collect();
    let mut cov = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            cov[(i, j)] = s.cov()[(p[i], p[j])];
        }
    }
    stats(mean, cov)
}

// Σ over dimensions of (μa − μb)² + (σa − σb)².
fn diagonal_oracle(ma: &[f64], va: &[f64], mb: &[f64], vb: &[f64]) -> f64 {
    (0..ma.len())
        .map(|i| (ma[i] - mb[i]).powi(2) + (va[i].sqrt() - vb[i].sqrt()).powi(2))
        .sum()
}

// Σ √λ over the eigenvalues of the non-symmetric product, computed by nalgebra.
fn product_eigen_oracle(a: &Matrix, b: &Matrix) -> f64 {
    let d = a.rows();
    let na = DMatrix::from_row_slice(d, d, a.as_slice());
    let nb = DMatrix::from_row_slice(d, d, b.as_slice());
    (na * nb).complex_eigenvalues().iter().map(|z| z.re.max(0.0).sqrt()).sum()
}

#[test]
fn identity_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 1..=8 {
        let s = stats((0..d).map(|i| i as f64).collect(), random_psd(&mut rng, d, 0.1));
        assert!(frechet_distance(&s, &s).unwrap().abs() < 1e-8);
    }
}

#[test]
fn one_dimensional_closed_form() {
    for &(m1, s1, m2, s2) in &[(0.0, 1.0, 0.0, 1.0), (0.0, 1.0, 1.0, 1.0), (0.0, 1.0, 0.0, 2.0), (1.5, 0.3, -2.0, 4.0), (3.0, 2.0, 3.0, 0.5)] {
        let a = stats(vec![m1], Matrix::from_diagonal(&[s1 * s1]));
        let b = stats(vec![m2], Matrix::from_diagonal(&[s2 * s2]));
        let want: f64 = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
        assert!((frechet_distance(&a, &b).unwrap() - want).abs() < 1e-8, "{m1} {s1} {m2} {s2}");
    }
}

#[test]
fn diagonal_closed_form_up_to_eight_dims() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let gen = |rng: &mut ChaCha8Rng| -> (Vec<f64>, Vec<f64>) {
            (
                (0..d).map(|_| rng.random_range(-3.0..3.0)).collect(),
                (0..d).map(|_| rng.random_range(0.01..5.0)).collect(),
            )
        };
        let (ma, va) = gen(&mut rng);
        let (mb, vb) = gen(&mut rng);
        let got = frechet_distance(
            &stats(ma.clone(), Matrix::from_diagonal(&va)),
            &stats(mb.clone(), Matrix::from_diagonal(&vb)),
        )
        .unwrap();
        assert!((got - diagonal_oracle(&ma, &va, &mb, &vb)).abs() < 1e-8);
    }
}

#[test]
fn trace_sqrt_matches_direct_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let a = random_psd(&mut rng, 4, 0.5);
        let b = random_psd(&mut rng, 4, 0.5);
        let got = trace_sqrt_product(&a, &b).unwrap();
        let want = product_eigen_oracle(&a, &b);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn rank_deficient_covariances_are_accepted() {
    let v = [1.0, -2.0, 0.5];
    let mut c = Matrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = v[i] * v[j];
        }
    }
    let a = stats(vec![0.0; 3], c.clone());
    let b = stats(vec![0.0; 3], Matrix::zeros(3, 3));
    let got = frechet_distance(&a, &b).unwrap();
    assert!((got - c.trace()).abs() < 1e-10);
}

fn gaussian_set(rng: &mut ChaCha8Rng, n: usize, means: &[f64], stds: &[f64]) -> EmbeddingSet {
    let id = EmbeddingBackendId::new("synthetic", means.len(), None).unwrap();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let rows = (0..n)
        .map(|_| {
            means
                .iter()
                .zip(stds)
                .map(|(&m, &s)| (m + s * normal.sample(rng)) as f32)
                .collect()
        })
        .collect();
    EmbeddingSet::from_rows(id, rows, (0..n).map(|i| format!("c{i}")).collect()).unwrap()
}

#[test]
fn sampled_fad_near_true_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ma: Vec<f64> = vec![0.0; 8];
    let mb: Vec<f64> = (0..8).map(|i| 0.25 * i as f64).collect();
    let sa: Vec<f64> = vec![1.0; 8];
    let sb: Vec<f64> = (0..8).map(|i| 0.5 + 0.25 * i as f64).collect();
    let a = gaussian_set(&mut rng, 2000, &ma, &sa);
    let b = gaussian_set(&mut rng, 2000, &mb, &sb);
    let va: Vec<f64> = sa.iter().map(|s| s * s).collect();
    let vb: Vec<f64> = sb.iter().map(|s| s * s).collect();
    let truth = diagonal_oracle(&ma, &va, &mb, &vb);
    let got = fad::<f64>(&a, &b).unwrap().value;
    assert!((got - truth).abs() / truth < 0.2, "{got} vs {truth}");
}

#[test]
fn bias_curve_decreases_for_same_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = vec![0.0; 8];
    let s = vec![1.0; 8];
    let eval = gaussian_set(&mut rng, 1000, &m, &s);
    let reference = gaussian_set(&mut rng, 2000, &m, &s);
    let curve = fad_bias_curve::<f64>(&eval, &reference, &[10, 50, 250], 10, 7).unwrap();
    assert!(curve[0].mean > curve[1].mean && curve[1].mean > curve[2].mean, "{curve:?}");
}

#[test]
fn bias_curve_at_full_size_equals_fad() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = gaussian_set(&mut rng, 60, &[0.0; 4], &[1.0; 4]);
    let b = gaussian_set(&mut rng, 80, &[0.5; 4], &[2.0; 4]);
    let curve = fad_bias_curve::<f64>(&a, &b, &[60], 3, 0).unwrap();
    let full = fad::<f64>(&a, &b).unwrap().value;
    for v in &curve[0].values {
        assert!((v - full).abs() < 1e-9 * full.max(1.0));
    }
    assert!(curve[0].std.abs() < 1e-9);
}

#[test]
fn bias_curve_is_seed_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = gaussian_set(&mut rng, 100, &[0.0; 3], &[1.0; 3]);
    let b = gaussian_set(&mut rng, 100, &[0.0; 3], &[1.0; 3]);
    let x = fad_bias_curve::<f64>(&a, &b, &[10, 40], 5, 42).unwrap();
    let y = fad_bias_curve::<f64>(&a, &b, &[10, 40], 5, 42).unwrap();
    assert_eq!(x, y);
}

fn psd_strategy() -> impl Strategy<Value = (GaussianStats, GaussianStats, Vec<usize>)> {
    (1usize..=8, any::<u64>()).prop_map(|(d, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mean = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        let a = stats(mean(&mut rng), random_psd(&mut rng, d, 0.01));
        let b = stats(mean(&mut rng), random_psd(&mut rng, d, 0.01));
        let mut p: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        (a, b, p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetric((a, b, _) in psd_strategy()) {
        let ab = frechet_distance(&a, &b).unwrap();
        let ba = frechet_distance(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-8 * ab.max(1.0));
    }

    #[test]
    fn permutation_invariant((a, b, p) in psd_strategy()) {
        let base = frechet_distance(&a, &b).unwrap();
        let permuted = frechet_distance(&permute(&a, &p), &permute(&b, &p)).unwrap();
        prop_assert!((base - permuted).abs() < 1e-8 * base.max(1.0));
    }
}
