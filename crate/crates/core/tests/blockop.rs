//! Properties of the block-operator calculus: the `Ω`-adjoint, composition,
//! rank-one and nuclear operators, triangular splits and `T_U`.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2lab::blockop::{
    apply, block_operator_tu, compose, deinterleave, interleave, involution_plus, nuclear_sum, rank_one, split_lower,
    split_upper,
};
use z2lab::z2core::{is_isotropic, omega_form, pairing, z2_quasinorm};
use z2lab::zoo::{normalized_blocks, random_blocks};
use z2lab::{BlockOperator, LinearMap, SeqVec, Z2Functional, Z2Vec};

fn dense(n: usize, e: Vec<f64>) -> LinearMap {
    LinearMap::dense(DMatrix::from_row_slice(n, n, &e)).unwrap()
}

fn block_op(n: usize) -> impl Strategy<Value = BlockOperator> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n * n), 4)
        .prop_map(move |b| {
            let mut it = b.into_iter();
            let mut next = || dense(n, it.next().unwrap());
            BlockOperator::new(next(), next(), next(), next()).unwrap()
        })
}

fn seq(n: usize) -> impl Strategy<Value = SeqVec> {
    prop::collection::vec(-5.0f64..5.0, n).prop_map(|v| SeqVec::new(v).unwrap())
}

fn z2_vec(n: usize) -> impl Strategy<Value = Z2Vec> {
    (seq(n), seq(n)).prop_map(|(w, x)| Z2Vec::new(w, x).unwrap())
}

fn functional(n: usize) -> impl Strategy<Value = Z2Functional> {
    (seq(n), seq(n)).prop_map(|(p, q)| Z2Functional::new(p, q).unwrap())
}

fn scale(z: &Z2Vec) -> f64 {
    1.0 + z.omega.norm2() + z.x.norm2()
}

proptest! {
    #[test]
    fn plus_is_the_omega_adjoint(
        (t, y, z) in (1usize..8).prop_flat_map(|n| (block_op(n), z2_vec(n), z2_vec(n)))
    ) {
        let lhs = omega_form(&apply(&involution_plus(&t), &y), &z);
        let rhs = omega_form(&y, &apply(&t, &z));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale(&y) * scale(&z), "{lhs} vs {rhs}");
    }

    #[test]
    fn involution_algebra((s, t) in (1usize..8).prop_flat_map(|n| (block_op(n), block_op(n)))) {
        prop_assert_eq!(involution_plus(&involution_plus(&t)), t.clone());
        let lhs = involution_plus(&compose(&s, &t));
        let rhs = compose(&involution_plus(&t), &involution_plus(&s));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * 100.0);
    }

    #[test]
    fn composition_matches_application(
        (s, t, z) in (1usize..8).prop_flat_map(|n| (block_op(n), block_op(n), z2_vec(n)))
    ) {
        let a = apply(&compose(&s, &t), &z);
        let b = apply(&s, &apply(&t, &z));
        prop_assert!((&a - &b).omega.norm2() + (&a - &b).x.norm2() <= 1e-10 * 100.0 * scale(&z));
    }

    #[test]
    fn rank_one_applies_through_the_pairing(
        (f, v, z) in (1usize..10).prop_flat_map(|n| (functional(n), z2_vec(n), z2_vec(n)))
    ) {
        let out = apply(&rank_one(&f, &v), &z);
        let expect = v.scale(pairing(&f, &z));
        let d = &out - &expect;
        prop_assert!(d.omega.norm2() + d.x.norm2() <= 1e-10 * scale(&v) * scale(&z) * (1.0 + pairing(&f, &z).abs()));
    }

    #[test]
    fn nuclear_sum_is_the_sum_of_its_terms(
        (terms, z) in (1usize..8).prop_flat_map(|n| (prop::collection::vec((functional(n), z2_vec(n)), 1..4), z2_vec(n)))
    ) {
        let out = apply(&nuclear_sum(&terms).unwrap(), &z);
        let mut expect = Z2Vec::zeros(z.dim());
        for (f, v) in &terms {
            expect = &expect + &v.scale(pairing(f, &z));
        }
        let d = &out - &expect;
        prop_assert!(d.omega.norm2() + d.x.norm2() <= 1e-9 * scale(&expect) * scale(&z));
    }

    #[test]
    fn splits_reassemble_exactly(t in (1usize..8).prop_flat_map(block_op)) {
        let (u, l) = split_upper(&t);
        prop_assert_eq!(u.add(&l), t.clone());
        let (lo, up) = split_lower(&t);
        prop_assert_eq!(lo.add(&up), t);
    }

    #[test]
    fn interleaving_round_trips(z in (1usize..20).prop_flat_map(z2_vec)) {
        prop_assert_eq!(deinterleave(&interleave(&z)).unwrap(), z);
    }

    #[test]
    fn tu_preserves_the_quasinorm(z in z2_vec(24), k in 1usize..6, seed in 0u64..1000) {
        let blocks = random_blocks(24, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let t = block_operator_tu(&blocks).unwrap();
        // T_U only sees the first m = ⌊n/k⌋ coordinates of z.
        let m = blocks.len();
        let mut omega = z.omega.entries().to_vec();
        let mut x = z.x.entries().to_vec();
        for i in m..24 {
            omega[i] = 0.0;
            x[i] = 0.0;
        }
        let zm = Z2Vec::new(SeqVec::new(omega).unwrap(), SeqVec::new(x).unwrap()).unwrap();
        let before = z2_quasinorm(&zm);
        let after = z2_quasinorm(&apply(&t, &zm));
        prop_assert!((after - before).abs() <= 1e-12 * (1.0 + before));
    }
}

#[test]
fn ip_identities_and_range() {
    let n = 12;
    let ip = BlockOperator::ip(n);
    assert_eq!(involution_plus(&ip), ip.neg());
    assert_eq!(compose(&ip, &ip), BlockOperator::zero(n));
    let range: Vec<Z2Vec> = (0..n)
        .flat_map(|k| [Z2Vec::new(SeqVec::basis(n, k), SeqVec::zeros(n)).unwrap(), Z2Vec::new(SeqVec::zeros(n), SeqVec::basis(n, k)).unwrap()])
        .map(|z| apply(&ip, &z))
        .filter(|z| !z.is_zero())
        .collect();
    assert_eq!(range.len(), n);
    assert!(is_isotropic(&range, 1e-12).isotropic);
}

#[test]
fn tu_of_normalized_blocks_is_upper_triangular_with_equal_diagonal() {
    let t = block_operator_tu(&normalized_blocks(32, 4).unwrap()).unwrap();
    assert_eq!(t.delta, LinearMap::zero(32));
    assert_eq!(t.alpha, t.gamma);
}
