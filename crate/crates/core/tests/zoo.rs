//! Properties of the classical operators: Hausdorff matrices, Cesàro,
//! Hilbert, shifts and signed permutations.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2lab::normest::opnorm_sweep;
use z2lab::seqspace::lp_norm;
use z2lab::zoo::{
    cesaro, hausdorff_matrix, hilbert_matrix, moment_euler, moment_gamma, moment_gen_cesaro, moment_holder,
    random_signed_permutation, shift, signed_permutation, HausdorffSpec, MomentSequence, PrecisionMode, ShiftDirection,
};
use z2lab::{LinearMap, PExponent, SeqVec, Z2Error};

fn families() -> Vec<MomentSequence> {
    vec![
        moment_holder(1.0).unwrap(),
        moment_holder(2.0).unwrap(),
        moment_euler(0.5).unwrap(),
        moment_euler(0.3).unwrap(),
        moment_gamma(2.0, 1.0).unwrap(),
        moment_gamma(1.5, 2.0).unwrap(),
        moment_gen_cesaro(1.0, 1.0).unwrap(),
        moment_gen_cesaro(2.0, 0.5).unwrap(),
    ]
}

fn p(v: f64) -> PExponent {
    PExponent::new(v).unwrap()
}

#[test]
fn hausdorff_rows_are_supported_on_the_lower_triangle() {
    for m in families() {
        let a = hausdorff_matrix(&HausdorffSpec::new(m.clone(), 14)).unwrap();
        for i in 0..14 {
            for j in 0..14 {
                let e = a.entry(i, j);
                if j > i {
                    assert_eq!(e, 0.0, "{} ({i},{j})", m.name());
                } else {
                    assert!(e > 0.0, "{} ({i},{j}) = {e}", m.name());
                }
            }
        }
    }
}

#[test]
fn hausdorff_row_sums_equal_the_first_moment() {
    // Σ_k C(n,k) Δ^{n−k} μ_k = μ_0 for every row n.
    for m in families() {
        for closed in [true, false] {
            let spec = HausdorffSpec { use_closed_form: closed, precision: PrecisionMode::Extended, ..HausdorffSpec::new(m.clone(), 12) };
            let a = hausdorff_matrix(&spec).unwrap();
            for i in 0..12 {
                let s: f64 = (0..12).map(|j| a.entry(i, j)).sum();
                assert!((s - m.mu(0)).abs() <= 1e-9, "{} row {i}: {s}", m.name());
            }
        }
    }
}

#[test]
fn cesaro_is_the_hausdorff_matrix_of_reciprocal_moments() {
    let m = MomentSequence::custom("reciprocal", |k| 1.0 / (k + 1) as f64);
    let spec = HausdorffSpec { use_closed_form: false, precision: PrecisionMode::Extended, ..HausdorffSpec::new(m, 10) };
    // Custom moments only have double accuracy; a table of 10 rows keeps enough digits.
    let h = hausdorff_matrix(&spec).unwrap();
    assert!(h.max_abs_diff(&cesaro(10)) <= 1e-9);
}

#[test]
fn truncation_norms_are_nondecreasing_and_below_the_closed_forms() {
    for m in families() {
        for q in [4.0 / 3.0, 2.0, 4.0] {
            // Without closed-form coefficients the difference table loses
            // too many digits beyond a few dozen rows.
            let sizes: &[usize] =
                if m.closed_form_coeff(1, 0).is_some() { &[8, 16, 32, 64, 128] } else { &[4, 8, 16, 24] };
            let est = opnorm_sweep(
                |n| hausdorff_matrix(&HausdorffSpec::new(m.clone(), n)).unwrap(),
                sizes,
                p(q),
                1e-12,
                500,
            );
            let v: Vec<f64> = est.iter().map(|e| e.value).collect();
            assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{} p={q}: {v:?}", m.name());
            if let Some(bound) = m.lp_norm_formula(p(q)) {
                assert!(v.iter().all(|x| *x <= bound + 1e-6), "{} p={q}: {v:?} vs {bound}", m.name());
            }
        }
    }
}

#[test]
fn hilbert_matrix_is_symmetric_with_poles_rejected() {
    let h = hilbert_matrix(20, 1.5).unwrap();
    assert!(h.is_symmetric());
    assert_eq!(h.entry(0, 0), 1.0 / 1.5);
    assert!(matches!(hilbert_matrix(5, -3.0), Err(Z2Error::PoleIndex { row, col }) if row + col == 3));
    assert!(hilbert_matrix(3, -7.0).is_ok());
}

#[test]
fn shift_products() {
    let n = 9;
    let r = shift(n, ShiftDirection::Right);
    let l = shift(n, ShiftDirection::Left);
    assert_eq!(r.transpose().to_dense(), l.to_dense());
    let lr = l.compose(&r).to_dense();
    let rl = r.compose(&l).to_dense();
    for k in 0..n {
        assert_eq!(lr[(k, k)], if k == n - 1 { 0.0 } else { 1.0 });
        assert_eq!(rl[(k, k)], if k == 0 { 0.0 } else { 1.0 });
    }
}

proptest! {
    #[test]
    fn signed_permutations_are_lp_isometries(
        x in prop::collection::vec(-10.0f64..10.0, 1..40),
        q in 1.0f64..10.0,
        seed in 0u64..10_000,
    ) {
        let n = x.len();
        let a = random_signed_permutation(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let x = SeqVec::new(x).unwrap();
        let y = a.apply_seq(&x);
        for e in [p(q), p(f64::INFINITY)] {
            prop_assert!((lp_norm(&y, e) - lp_norm(&x, e)).abs() <= 1e-12 * (1.0 + lp_norm(&x, e)));
        }
    }

    #[test]
    fn signed_permutation_validation(n in 2usize..10) {
        let perm: Vec<usize> = (0..n).rev().collect();
        let signs = vec![-1.0; n];
        let a = signed_permutation(&perm, &signs).unwrap();
        prop_assert_eq!(a.compose(&a).to_dense(), LinearMap::identity(n).to_dense());
        let mut bad = perm.clone();
        bad[0] = bad[1];
        prop_assert!(signed_permutation(&bad, &signs).is_err());
        prop_assert!(signed_permutation(&perm, &vec![0.5; n]).is_err());
    }
}
