//! Properties of `Z2`: the quasinorm, the alternating form, the isometry
//! `D`, the exact sequence maps and their liftings.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use z2lab::seqspace::kp_map;
use z2lab::z2core::{
    d_map, inclusion_i, inclusion_j, is_isotropic, lift_lp, lift_lq, omega_form, pairing, quotient_p, quotient_q,
    z2_quasinorm,
};
use z2lab::{SeqVec, Z2Vec};

fn z2(w: Vec<f64>, x: Vec<f64>) -> Z2Vec {
    Z2Vec::new(SeqVec::new(w).unwrap(), SeqVec::new(x).unwrap()).unwrap()
}

fn z2_vec(n: usize) -> impl Strategy<Value = Z2Vec> {
    (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n)).prop_map(|(w, x)| z2(w, x))
}

fn z2_pair(max_len: usize) -> impl Strategy<Value = (Z2Vec, Z2Vec)> {
    (1..max_len).prop_flat_map(|n| (z2_vec(n), z2_vec(n)))
}

fn size(z: &Z2Vec) -> f64 {
    z.omega.norm2() + z.x.norm2()
}

proptest! {
    #[test]
    fn omega_form_is_exactly_antisymmetric((z, w) in z2_pair(40)) {
        prop_assert_eq!(omega_form(&z, &w), -omega_form(&w, &z));
        prop_assert_eq!(omega_form(&z, &z), 0.0);
    }

    #[test]
    fn d_map_pairs_as_the_form((z, w) in z2_pair(40)) {
        let diff = (pairing(&d_map(&z), &w) - omega_form(&z, &w)).abs();
        prop_assert!(diff <= 1e-12 * (1.0 + size(&z) * size(&w)));
    }

    #[test]
    fn quasinorm_vanishes_only_at_zero(z in (1usize..40).prop_flat_map(z2_vec)) {
        let q = z2_quasinorm(&z);
        prop_assert!(q >= 0.0);
        prop_assert_eq!(q == 0.0, z.is_zero());
    }

    #[test]
    fn quasinorm_is_homogeneous(z in (1usize..40).prop_flat_map(z2_vec), c in -50.0f64..50.0) {
        let lhs = z2_quasinorm(&z.scale(c));
        prop_assert!((lhs - c.abs() * z2_quasinorm(&z)).abs() <= 1e-9 * (1.0 + c.abs()) * (1.0 + size(&z)));
    }

    #[test]
    fn exact_sequence_identities(y in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let y = SeqVec::new(y).unwrap();
        prop_assert!(quotient_p(&inclusion_i(&y)).is_zero());
        prop_assert!(quotient_q(&inclusion_j(&y)).is_zero());
        prop_assert_eq!(quotient_p(&lift_lp(&y)), y.clone());
        // The lifting for p has quasinorm exactly ‖y‖₂.
        prop_assert!((z2_quasinorm(&lift_lp(&y)) - y.norm2()).abs() <= 1e-12 * (1.0 + y.norm2()));
    }
}

#[test]
fn lift_for_q_is_a_section_up_to_solver_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [8, 64, 512] {
        for _ in 0..10 {
            let x = SeqVec::new((0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap();
            let omega = kp_map(&x);
            let tol = 1e-8 * omega.norm2().max(1.0);
            if let Ok(z) = lift_lq(&omega, tol) {
                assert!((&quotient_q(&z) - &omega).norm2() == 0.0);
                assert!((&kp_map(&z.x) - &omega).norm2() <= tol);
            }
        }
    }
}

/// Largest observed `‖z+w‖ / (‖z‖ + ‖w‖)` over random pairs built around
/// liftings, where the quasinorm is far from a norm.
fn quasi_triangle_constant(n: usize, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |n: usize| SeqVec::new((0..n).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>()).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (a, b) = (gauss(n), gauss(n));
        let z = lift_lp(&a);
        let w = &lift_lp(&b) - &inclusion_i(&gauss(n).scale(0.1));
        let k = z2_quasinorm(&(&z + &w)) / (z2_quasinorm(&z) + z2_quasinorm(&w));
        worst = worst.max(k);
    }
    worst
}

#[test]
fn quasi_triangle_constant_is_stable_across_dimensions() {
    let k: Vec<f64> = [64, 256, 1024].iter().map(|&n| quasi_triangle_constant(n, 300, 9)).collect();
    let (lo, hi) = k.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi.is_finite() && hi / lo < 1.25, "{k:?}");
}

#[test]
fn isotropic_subspaces() {
    let n = 16;
    let i_basis: Vec<Z2Vec> = (0..n).map(|k| inclusion_i(&SeqVec::basis(n, k))).collect();
    let j_basis: Vec<Z2Vec> = (0..n).map(|k| inclusion_j(&SeqVec::basis(n, k))).collect();
    let diag: Vec<Z2Vec> = (0..n).map(|k| Z2Vec::new(SeqVec::basis(n, k), SeqVec::basis(n, k)).unwrap()).collect();
    for basis in [&i_basis, &j_basis, &diag] {
        assert!(is_isotropic(basis, 1e-12).isotropic);
    }
    let mut mixed = i_basis.clone();
    mixed.push(j_basis[3].clone());
    let r = is_isotropic(&mixed, 1e-12);
    assert!(!r.isotropic);
    assert_eq!(r.max_abs_form, 1.0);
}
