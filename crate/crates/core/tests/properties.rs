use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasisynth::design::build_single_target;
use quasisynth::hexf;
use quasisynth::library::{pai_library, phase_shift_pulse, propagate_pulse, word_ptm, PulseSequence};
use quasisynth::pauli::Axis;
use quasisynth::ptm::{rotation_gate, rotation_unitary, unitary_from_ptm_1q, PauliTransferMatrix};
use quasisynth::sampler::QuasiprobabilityScheme;
use quasisynth::solver::{exact_solution, kkt_check_matrix, lars_path, solve_path, PathOptions, Termination};

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let (a, b): (f64, f64) = (rng.random(), rng.random());
    (-2.0 * (1.0 - a).ln()).sqrt() * (std::f64::consts::TAU * b).cos()
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| gaussian(&mut rng))
}

/// Haar-ish unitary from QR of a complex Gaussian matrix.
fn random_unitary(dim: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)));
    g.qr().q()
}

fn objective(r: &DMatrix<f64>, u: &DVector<f64>, g: &DVector<f64>, lambda: f64) -> f64 {
    0.5 * (r * g - u).norm_squared() + lambda * g.iter().map(|x| x.abs()).sum::<f64>()
}

/// Proximal gradient on the lasso objective, run long enough to converge.
fn ista(r: &DMatrix<f64>, u: &DVector<f64>, lambda: f64, iters: usize) -> DVector<f64> {
    let step = 1.0 / r.clone().svd(false, false).singular_values.max().powi(2);
    let mut g = DVector::zeros(r.ncols());
    for _ in 0..iters {
        let z = &g - (r.tr_mul(&(r * &g - u))) * step;
        g = z.map(|v| v.signum() * (v.abs() - step * lambda).max(0.0));
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ptm_of_product_is_product_of_ptms(n in 1usize..=2, a in any::<u64>(), b in any::<u64>()) {
        let d = 1 << n;
        let (u, v) = (random_unitary(d, a), random_unitary(d, b));
        let lhs = PauliTransferMatrix::from_unitary(&(&u * &v)).unwrap();
        let rhs = PauliTransferMatrix::from_unitary(&u).unwrap().compose(&PauliTransferMatrix::from_unitary(&v).unwrap()).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn global_phase_is_invisible(n in 1usize..=2, seed in any::<u64>(), phi in -10.0f64..10.0) {
        let u = random_unitary(1 << n, seed);
        let p = PauliTransferMatrix::from_unitary(&u).unwrap();
        let q = PauliTransferMatrix::from_unitary(&(u * Complex64::from_polar(1.0, phi))).unwrap();
        prop_assert!((p.matrix() - q.matrix()).abs().max() < 1e-12);
        prop_assert!(p.invariant_violation() < 1e-12);
    }

    #[test]
    fn rotations_add(a in -7.0f64..7.0, b in -7.0f64..7.0, k in 0usize..3) {
        let axis = [Axis::X, Axis::Y, Axis::Z][k];
        let prod = rotation_gate(axis, a).compose(&rotation_gate(axis, b)).unwrap();
        prop_assert!((prod.matrix() - rotation_gate(axis, a + b).matrix()).abs().max() < 1e-12);
        let direct = PauliTransferMatrix::from_unitary(&rotation_unitary(axis, a)).unwrap();
        prop_assert!((direct.matrix() - rotation_gate(axis, a).matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn single_qubit_unitary_is_recovered(seed in any::<u64>()) {
        let p = PauliTransferMatrix::from_unitary(&random_unitary(2, seed)).unwrap();
        let u = unitary_from_ptm_1q(&p).unwrap();
        let back = PauliTransferMatrix::from_unitary(&DMatrix::from_fn(2, 2, |i, j| u[(i, j)])).unwrap();
        prop_assert!((back.matrix() - p.matrix()).abs().max() < 1e-10);
        prop_assert!((u.determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn phase_shift_conjugates_by_z(
        amps in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 1..12),
        phi in -4.0f64..4.0,
        d in -2.0f64..2.0,
    ) {
        let amps = amps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let p = PulseSequence::new(amps, 0.1, 6.0).unwrap();
        let shifted = propagate_pulse(&phase_shift_pulse(&p, phi), d);
        let conj = rotation_gate(Axis::Z, phi)
            .compose(&propagate_pulse(&p, d))
            .and_then(|m| m.compose(&rotation_gate(Axis::Z, -phi)))
            .unwrap();
        prop_assert!((shifted.matrix() - conj.matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn hex_floats_round_trip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(hexf::decode(&hexf::encode(v)).unwrap().to_bits(), bits);
    }

    #[test]
    fn path_is_certified_and_monotone(rows in 4usize..12, cols in 2usize..30, seed in any::<u64>()) {
        let r = gaussian_matrix(rows, cols, seed);
        let u = gaussian_matrix(rows, 1, seed ^ 1).column(0).into_owned();
        let path = lars_path(&r, &u, &PathOptions::default()).unwrap();
        for w in path.breakpoints.windows(2) {
            prop_assert!(w[1].lambda < w[0].lambda);
            prop_assert!(w[1].residual <= w[0].residual + 1e-12 * path.target_norm);
        }
        for b in &path.breakpoints {
            let rep = kkt_check_matrix(&r, &u, &b.gamma, b.lambda);
            prop_assert!(rep.passed, "{:?}", rep);
        }
    }

    #[test]
    fn path_matches_proximal_gradient(seed in any::<u64>(), pick in 0.0f64..1.0) {
        let r = gaussian_matrix(8, 14, seed);
        let u = gaussian_matrix(8, 1, seed ^ 2).column(0).into_owned();
        let path = lars_path(&r, &u, &PathOptions::default()).unwrap();
        let bps: Vec<_> = path.breakpoints.iter().filter(|b| b.lambda > 1e-3).collect();
        let b = bps[((bps.len() - 1) as f64 * pick) as usize];
        let g_path = DVector::from_column_slice(&b.gamma);
        let g_ista = ista(&r, &u, b.lambda, 20_000);
        let (fp, fi) = (objective(&r, &u, &g_path, b.lambda), objective(&r, &u, &g_ista, b.lambda));
        prop_assert!(fp <= fi + 1e-9 * (1.0 + fi.abs()), "path {} ista {}", fp, fi);
    }

    #[test]
    fn column_permutation_permutes_solution(seed in any::<u64>(), shuffle in any::<u64>()) {
        let (rows, cols) = (6, 12);
        let r = gaussian_matrix(rows, cols, seed);
        let u = gaussian_matrix(rows, 1, seed ^ 3).column(0).into_owned();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        for i in (1..cols).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let rp = DMatrix::from_fn(rows, cols, |i, j| r[(i, perm[j])]);
        let a = lars_path(&r, &u, &PathOptions::default()).unwrap();
        let b = lars_path(&rp, &u, &PathOptions::default()).unwrap();
        prop_assert_eq!(a.termination, Termination::ExactReached);
        prop_assert_eq!(b.termination, Termination::ExactReached);
        let (ga, gb) = (&a.last().gamma, &b.last().gamma);
        for j in 0..cols {
            prop_assert!((gb[j] - ga[perm[j]]).abs() < 1e-8, "{} vs {}", gb[j], ga[perm[j]]);
        }
    }

    #[test]
    fn exact_end_has_minimal_l1(seed in any::<u64>(), dup in 0usize..3) {
        // Degenerate designs: some columns repeat up to sign, as in group-structured libraries.
        let (rows, base) = (6, 10);
        let g = gaussian_matrix(rows, base, seed);
        let mut r = DMatrix::zeros(rows, base + dup * 3);
        r.columns_mut(0, base).copy_from(&g);
        for k in 0..dup * 3 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            r.set_column(base + k, &(g.column(k % base) * sign));
        }
        let u = gaussian_matrix(rows, 1, seed ^ 5).column(0).into_owned();
        let path = lars_path(&r, &u, &PathOptions::default()).unwrap();
        prop_assert_eq!(path.termination, Termination::ExactReached);
        let l1 = path.last().l1_norm;
        // Oracle: every square column subset gives an exact solution whose l1 bounds the minimum.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        for _ in 0..50 {
            let mut cols: Vec<usize> = (0..r.ncols()).collect();
            for i in (1..cols.len()).rev() {
                cols.swap(i, rng.random_range(0..=i));
            }
            let sub = r.select_columns(&cols[..rows]);
            if let Some(x) = sub.clone().lu().solve(&u) {
                if (&sub * &x - &u).norm() < 1e-9 {
                    prop_assert!(l1 <= x.iter().map(|v| v.abs()).sum::<f64>() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn floor_of_path_is_least_squares(seed in any::<u64>()) {
        let r = gaussian_matrix(16, 5, seed);
        let u = gaussian_matrix(16, 1, seed ^ 4).column(0).into_owned();
        let path = lars_path(&r, &u, &PathOptions::default()).unwrap();
        let ols = r.clone().svd(true, true).solve(&u, 1e-14).unwrap();
        for (a, b) in path.last().gamma.iter().zip(ols.iter()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn scheme_reproduces_coefficients(gamma in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        prop_assume!(gamma.iter().any(|g| g.abs() > 1e-9));
        let labels = (0..gamma.len()).map(|i| format!("g{i}")).collect();
        let s = QuasiprobabilityScheme::new(gamma.clone(), labels).unwrap();
        let l1: f64 = gamma.iter().map(|g| g.abs()).sum();
        prop_assert!((s.norm() - l1).abs() <= 1e-12 * l1);
        prop_assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (l, g) in gamma.iter().enumerate() {
            prop_assert!(s.probabilities()[l] >= 0.0);
            prop_assert!((s.probabilities()[l] * s.weight(l) - g).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_rotations_sum_to_one(bits in 3u32..7, theta in -6.5f64..6.5, k in 0usize..3) {
        let axis = [Axis::X, Axis::Y, Axis::Z][k];
        let lib = pai_library(bits, axis).unwrap();
        let p = build_single_target(&lib, &rotation_gate(axis, theta)).unwrap();
        let path = solve_path(&p, 0.0, 10_000).unwrap();
        let s = exact_solution(&p, &path).unwrap();
        prop_assert!((s.sum() - 1.0).abs() < 1e-8, "sum {}", s.sum());
        prop_assert!(s.l1_norm >= 1.0 - 1e-12);
    }
}

#[test]
fn clifford_words_are_unitary_channels() {
    for w in ["H", "S", "T", "HTHT", "SHSTH"] {
        assert!(word_ptm(w).unwrap().invariant_violation() < 1e-12, "{w}");
    }
}
