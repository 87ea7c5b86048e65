//! The truncated Kalton-Peck space `Z2`.
//!
//! Elements are pairs `(ω, x)`. The primary quasinorm is
//! `‖ω − KPx‖₂ + ‖x‖₂`; the alternative one comes from the presentation of
//! `Z2` as a twisted sum of `ℓf` and `ℓf*`. Functionals are stored as a pair
//! `(φ, ψ)` with `φ` pairing against `x` and `ψ` against `ω`.

use std::ops::{Add, Sub};

use serde::Serialize;

use crate::error::Result;
use crate::seqspace::{kp_inverse, kp_map, lf_quasinorm, lf_star_quasinorm_ub, SeqVec};

/// An element `(ω, x)` of truncated `Z2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Z2Vec {
    pub omega: SeqVec,
    pub x: SeqVec,
}

impl Z2Vec {
    pub fn new(omega: SeqVec, x: SeqVec) -> Result<Self> {
        x.check_dim(omega.dim())?;
        Ok(Z2Vec { omega, x })
    }

    pub fn zeros(n: usize) -> Self {
        Z2Vec { omega: SeqVec::zeros(n), x: SeqVec::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn scale(&self, c: f64) -> Z2Vec {
        Z2Vec { omega: self.omega.scale(c), x: self.x.scale(c) }
    }

    pub fn is_zero(&self) -> bool {
        self.omega.is_zero() && self.x.is_zero()
    }
}

impl Add for &Z2Vec {
    type Output = Z2Vec;
    fn add(self, rhs: &Z2Vec) -> Z2Vec {
        Z2Vec { omega: &self.omega + &rhs.omega, x: &self.x + &rhs.x }
    }
}

impl Sub for &Z2Vec {
    type Output = Z2Vec;
    fn sub(self, rhs: &Z2Vec) -> Z2Vec {
        Z2Vec { omega: &self.omega - &rhs.omega, x: &self.x - &rhs.x }
    }
}

/// A functional on `Z2`: `φ` pairs with `x`, `ψ` pairs with `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Z2Functional {
    pub phi: SeqVec,
    pub psi: SeqVec,
}

impl Z2Functional {
    pub fn new(phi: SeqVec, psi: SeqVec) -> Result<Self> {
        psi.check_dim(phi.dim())?;
        Ok(Z2Functional { phi, psi })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.phi.is_zero() && self.psi.is_zero()
    }
}

/// `‖ω − KPx‖₂ + ‖x‖₂`
pub fn z2_quasinorm(z: &Z2Vec) -> f64 {
    (&z.omega - &kp_map(&z.x)).norm2() + z.x.norm2()
}

/// Estimate of the quasinorm of the `(j, q)` presentation,
/// `‖x − KP⁻¹ω‖_{ℓf} + ‖ω‖_{ℓf*}`, using the numerical section of `KP` and
/// the upper estimate of the `ℓf*` quasinorm. Diagnostic only.
pub fn z2_quasinorm_jq(z: &Z2Vec, budget: usize) -> Result<f64> {
    let scale = z.omega.norm2().max(1.0);
    let section = kp_inverse(&z.omega, 1e-10 * scale, 200)?;
    Ok(lf_quasinorm(&(&z.x - &section)) + lf_star_quasinorm_ub(&z.omega, budget))
}

/// Duality pairing `⟨φ, x⟩ + ⟨ω, ψ⟩`.
pub fn pairing(f: &Z2Functional, z: &Z2Vec) -> f64 {
    f.phi.dot(&z.x) + z.omega.dot(&f.psi)
}

/// The alternating form `Ω((ω₁,x₁),(ω₂,x₂)) = ⟨ω₁,x₂⟩ − ⟨ω₂,x₁⟩`.
pub fn omega_form(z1: &Z2Vec, z2: &Z2Vec) -> f64 {
    z1.omega.dot(&z2.x) - z2.omega.dot(&z1.x)
}

/// The isometry `D: Z2 → Z2*`, stored so that `pairing(D z, w) = Ω(z, w)`.
pub fn d_map(z: &Z2Vec) -> Z2Functional {
    Z2Functional { phi: z.omega.clone(), psi: -&z.x }
}

/// `i y = (y, 0)`
pub fn inclusion_i(y: &SeqVec) -> Z2Vec {
    Z2Vec { omega: y.clone(), x: SeqVec::zeros(y.dim()) }
}

/// `p(ω, x) = x`
pub fn quotient_p(z: &Z2Vec) -> SeqVec {
    z.x.clone()
}

/// `j x = (0, x)`
pub fn inclusion_j(x: &SeqVec) -> Z2Vec {
    Z2Vec { omega: SeqVec::zeros(x.dim()), x: x.clone() }
}

/// `q(ω, x) = ω`
pub fn quotient_q(z: &Z2Vec) -> SeqVec {
    z.omega.clone()
}

/// Lifting for `p`: `y ↦ (KPy, y)`.
pub fn lift_lp(y: &SeqVec) -> Z2Vec {
    Z2Vec { omega: kp_map(y), x: y.clone() }
}

/// Lifting for `q`: `ω ↦ (ω, KP⁻¹ω)` with the numerical section.
pub fn lift_lq(omega: &SeqVec, tol: f64) -> Result<Z2Vec> {
    let x = kp_inverse(omega, tol, 200)?;
    Ok(Z2Vec { omega: omega.clone(), x })
}

/// Outcome of an isotropy test with the worst pair found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotropyReport {
    pub isotropic: bool,
    pub max_abs_form: f64,
    pub witness: (usize, usize),
}

/// Checks `|Ω(b_i, b_j)| ≤ tol` over all pairs of the given vectors.
pub fn is_isotropic(basis: &[Z2Vec], tol: f64) -> IsotropyReport {
    assert!(!basis.is_empty(), "isotropy test needs at least one vector");
    let mut worst = (0.0f64, (0usize, 0usize));
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let v = omega_form(&basis[i], &basis[j]).abs();
            if v > worst.0 {
                worst = (v, (i, j));
            }
        }
    }
    IsotropyReport { isotropic: worst.0 <= tol, max_abs_form: worst.0, witness: worst.1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, k: usize) -> SeqVec {
        SeqVec::basis(n, k)
    }

    #[test]
    fn quasinorm_examples() {
        let y = SeqVec::new(vec![3.0, 0.0, 4.0]).unwrap();
        assert!((z2_quasinorm(&inclusion_i(&y)) - 5.0).abs() < 1e-15);
        let x = SeqVec::new(vec![0.2, -0.7, 0.1, 0.5]).unwrap();
        assert!((z2_quasinorm(&lift_lp(&x)) - x.norm2()).abs() < 1e-15);
        for n in [4usize, 64, 1000] {
            let q = z2_quasinorm(&inclusion_j(&SeqVec::spread(n, n)));
            assert!((q - ((n as f64).ln() + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pairing_examples() {
        let n = 3;
        let f = Z2Functional::new(e(n, 0), SeqVec::zeros(n)).unwrap();
        assert_eq!(pairing(&f, &inclusion_j(&e(n, 0))), 1.0);
        assert_eq!(pairing(&f, &inclusion_i(&e(n, 0))), 0.0);
        let g = Z2Functional::new(SeqVec::zeros(n), e(n, 0)).unwrap();
        assert_eq!(pairing(&g, &inclusion_i(&e(n, 0))), 1.0);
    }

    #[test]
    fn omega_form_examples() {
        let n = 4;
        let z = Z2Vec::new(SeqVec::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap(), SeqVec::spread(n, 3))
            .unwrap();
        assert_eq!(omega_form(&z, &z), 0.0);
        assert_eq!(omega_form(&inclusion_i(&e(n, 0)), &inclusion_j(&e(n, 0))), 1.0);
        let a = inclusion_j(&SeqVec::spread(n, 2));
        let b = inclusion_j(&SeqVec::spread(n, 4));
        assert_eq!(omega_form(&a, &b), 0.0);
    }

    #[test]
    fn d_map_examples() {
        let n = 3;
        let d = d_map(&inclusion_i(&e(n, 0)));
        assert_eq!(pairing(&d, &inclusion_j(&e(n, 0))), 1.0);
        assert!(d_map(&Z2Vec::zeros(n)).is_zero());
    }

    #[test]
    fn exactness_identities() {
        let y = SeqVec::new(vec![0.5, -1.5, 2.0]).unwrap();
        assert!(quotient_p(&inclusion_i(&y)).is_zero());
        assert!(quotient_q(&inclusion_j(&y)).is_zero());
        assert_eq!(quotient_p(&lift_lp(&y)), y);
        assert_eq!(lift_lp(&e(4, 0)), inclusion_j(&e(4, 0)));
    }

    #[test]
    fn lift_lq_round_trip() {
        let v = SeqVec::spread(16, 12);
        let omega = kp_map(&v);
        let z = lift_lq(&omega, 1e-10).unwrap();
        assert_eq!(quotient_q(&z), omega);
        assert!((&z.x - &v).norm2() < 1e-8);
    }

    #[test]
    fn jq_quasinorm_on_j_image() {
        let x = SeqVec::new(vec![0.3, -0.2, 0.9, 0.0, 0.1]).unwrap();
        let v = z2_quasinorm_jq(&inclusion_j(&x), 10).unwrap();
        assert!((v - lf_quasinorm(&x)).abs() < 1e-14);
    }

    #[test]
    fn isotropy_examples() {
        let n = 5;
        let ibasis: Vec<_> = (0..n).map(|k| inclusion_i(&e(n, k))).collect();
        assert!(is_isotropic(&ibasis, 1e-12).isotropic);
        let diag: Vec<_> = (0..n).map(|k| Z2Vec::new(e(n, k), e(n, k)).unwrap()).collect();
        assert!(is_isotropic(&diag, 1e-12).isotropic);
        let mixed = vec![inclusion_i(&e(n, 0)), inclusion_j(&e(n, 0))];
        let r = is_isotropic(&mixed, 1e-12);
        assert!(!r.isotropic);
        assert_eq!(r.max_abs_form, 1.0);
        assert_eq!(r.witness, (0, 1));
    }
}
