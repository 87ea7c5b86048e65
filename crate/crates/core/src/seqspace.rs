//! Finite sections of the sequence spaces `ℓ2`, `ℓp`, `ℓf` and `ℓf*`.
//!
//! Vectors are plain real sequences of a fixed length. The Kalton-Peck map
//! `KP` and the two quasinorms built from it live here, together with a
//! numerical section of `KP` (there is no closed form for its inverse).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, Z2Error};

/// A finite real sequence; the truncation of an element of a sequence space.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqVec(DVector<f64>);

impl SeqVec {
    /// Builds a sequence, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(entries))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Z2Error::InvalidSequence("dimension must be at least 1".into()));
        }
        if let Some(k) = v.iter().position(|e| !e.is_finite()) {
            return Err(Z2Error::InvalidSequence(format!("entry {k} is not finite")));
        }
        Ok(SeqVec(v))
    }

    /// Wraps a vector produced by library arithmetic on valid inputs.
    pub(crate) fn from_raw(v: DVector<f64>) -> Self {
        debug_assert!(!v.is_empty());
        SeqVec(v)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "sequence dimension must be at least 1");
        SeqVec(DVector::zeros(n))
    }

    /// The canonical basis vector `e_k` (0-indexed).
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k < n, "basis index {k} out of range for dimension {n}");
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        SeqVec(v)
    }

    /// The unit spread vector `k^{-1/2}(1,…,1,0,…)` with `k` leading ones.
    pub fn spread(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "spread length {k} out of range for dimension {n}");
        let c = 1.0 / (k as f64).sqrt();
        SeqVec(DVector::from_fn(n, |i, _| if i < k { c } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &SeqVec) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot product of sequences of different length");
        self.0.dot(&other.0)
    }

    pub fn scale(&self, c: f64) -> SeqVec {
        SeqVec(&self.0 * c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0.0)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Z2Error::DimensionMismatch { expected: n, got: self.dim() })
        }
    }
}

impl Add for &SeqVec {
    type Output = SeqVec;
    fn add(self, rhs: &SeqVec) -> SeqVec {
        assert_eq!(self.dim(), rhs.dim(), "sum of sequences of different length");
        SeqVec(&self.0 + &rhs.0)
    }
}

impl Sub for &SeqVec {
    type Output = SeqVec;
    fn sub(self, rhs: &SeqVec) -> SeqVec {
        assert_eq!(self.dim(), rhs.dim(), "difference of sequences of different length");
        SeqVec(&self.0 - &rhs.0)
    }
}

impl Neg for &SeqVec {
    type Output = SeqVec;
    fn neg(self) -> SeqVec {
        SeqVec(-&self.0)
    }
}

/// An exponent `p ∈ [1, ∞]` indexing the `ℓp` scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(f64);

impl PExponent {
    pub const ONE: PExponent = PExponent(1.0);
    pub const TWO: PExponent = PExponent(2.0);
    pub const INFINITY: PExponent = PExponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Z2Error::ParameterOutOfRange(format!("p = {p} must lie in [1, inf]")));
        }
        Ok(PExponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// The Hölder conjugate `p* = p/(p-1)`.
    pub fn conjugate(self) -> PExponent {
        if self.0 == 1.0 {
            PExponent::INFINITY
        } else if self.0.is_infinite() {
            PExponent::ONE
        } else {
            PExponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom)?,
        };
        PExponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `ℓp` norm of a slice; `max |v_i|` for `p = ∞`.
pub(crate) fn lp_norm_slice(v: &[f64], p: PExponent) -> f64 {
    let m = v.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    let p = p.value();
    if p == 1.0 {
        return v.iter().map(|e| e.abs()).sum();
    }
    if p == 2.0 {
        return m * v.iter().map(|e| (e / m) * (e / m)).sum::<f64>().sqrt();
    }
    m * v.iter().map(|e| (e.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(Σ|v_i|^p)^{1/p}`, or `max |v_i|` when `p = ∞`.
pub fn lp_norm(v: &SeqVec, p: PExponent) -> f64 {
    lp_norm_slice(v.entries(), p)
}

pub(crate) fn kp_into(x: &DVector<f64>) -> DVector<f64> {
    let t = x.norm();
    if t == 0.0 {
        return DVector::zeros(x.len());
    }
    x.map(|xk| if xk == 0.0 { 0.0 } else { 2.0 * xk * (xk.abs() / t).ln() })
}

/// The Kalton-Peck map `(KPx)_k = 2 x_k log(|x_k| / ‖x‖₂)`, with `0 ↦ 0`
/// coordinatewise.
pub fn kp_map(x: &SeqVec) -> SeqVec {
    SeqVec(kp_into(&x.0))
}

/// Solves `y log y = r` on the branch `y ∈ [0, 1/e]`, for `r ∈ [-1/e, 0]`.
///
/// The left side is strictly decreasing on the branch, so a safeguarded
/// Newton iteration inside the bracket always converges.
pub(crate) fn solve_small_branch(r: f64) -> f64 {
    let cap = (-1.0f64).exp();
    if r >= 0.0 {
        return 0.0;
    }
    if r <= -cap {
        return cap;
    }
    let f = |y: f64| if y == 0.0 { -r } else { y * y.ln() - r };
    let (mut lo, mut hi) = (0.0f64, cap);
    // y log y ≈ r near 0 gives y ≈ r / log|r|; a good start for small |r|.
    let mut y = (r / (-r).ln()).clamp(f64::MIN_POSITIVE, cap);
    if !(y > lo && y < hi) {
        y = 0.5 * hi;
    }
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return y;
        }
        if fy > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let slope = y.ln() + 1.0;
        let mut next = y - fy / slope;
        if !(next > lo && next < hi) || slope == 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= f64::MIN_POSITIVE {
            return next;
        }
        y = next;
    }
    y
}

/// Solves `y log y = r` on the branch `y ∈ [1/e, 1]`, for `r ∈ [-1/e, 0]`.
///
/// The left side is strictly increasing there; safeguarded Newton as in
/// [`solve_small_branch`].
pub(crate) fn solve_large_branch(r: f64) -> f64 {
    let cap = (-1.0f64).exp();
    if r >= 0.0 {
        return 1.0;
    }
    if r <= -cap {
        return cap;
    }
    let f = |y: f64| y * y.ln() - r;
    let (mut lo, mut hi) = (cap, 1.0f64);
    // Near 1, y log y ≈ y − 1.
    let mut y = (1.0 + r).clamp(cap, 1.0);
    if !(y > lo && y < hi) {
        y = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return y;
        }
        if fy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let slope = y.ln() + 1.0;
        let mut next = y - fy / slope;
        if !(next > lo && next < hi) || slope == 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * next.abs() {
            return next;
        }
        y = next;
    }
    y
}

/// Coordinatewise solution of `2 x_k log(|x_k|/t) = ω_k`, scaled by `1/t`,
/// i.e. the profile `y` with `x = t·y`. Every coordinate uses the small
/// branch `|y_k| ≤ 1/e` except `large`, which uses the branch `|y_k| ≥ 1/e`.
fn branch_profile(omega: &[f64], t: f64, large: Option<usize>) -> Vec<f64> {
    omega
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let r = -w.abs() / (2.0 * t);
            if large == Some(k) {
                -w.signum() * solve_large_branch(r)
            } else if w == 0.0 {
                0.0
            } else {
                -w.signum() * solve_small_branch(r)
            }
        })
        .collect()
}

/// Number of scan points per large-branch candidate in [`kp_inverse`].
const LARGE_BRANCH_SCAN: usize = 48;

/// Numerical section of `KP`: finds `x` with `‖KP(x) − ω‖₂ ≤ tol`.
///
/// Writing `x = t·y`, each coordinate equation reduces to `y_k log|y_k| =
/// ω_k/(2t)` and the fixed point `t = ‖x(t)‖₂` becomes `‖y(t)‖₂ = 1`.
///
/// First every coordinate is taken on the monotone branch `|y_k| ≤ 1/e`;
/// then `‖y(t)‖₂` decreases in `t`, so the fixed point is bracketed and
/// bisected (at most `max_iter` halvings). Preimages with one coordinate
/// above `1/e` (common for unit vectors with a dominant entry) are found in a
/// second pass: for each candidate coordinate `k`, its value `y_k ∈ [1/e, 1)`
/// parametrizes `t`, and sign changes of `‖y‖₂ − 1` on a scan of that
/// interval are bisected. Targets with no preimage of either kind are
/// reported as [`Z2Error::NoConvergence`] with the best residual seen.
pub fn kp_inverse(omega: &SeqVec, tol: f64, max_iter: usize) -> Result<SeqVec> {
    let n = omega.dim();
    let w = omega.entries();
    let wmax = w.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    if wmax == 0.0 {
        return Ok(SeqVec::zeros(n));
    }
    let norm_of = |y: &[f64]| y.iter().map(|e| e * e).sum::<f64>().sqrt();
    let build = |t: f64, large: Option<usize>| -> SeqVec {
        let y = branch_profile(w, t, large);
        SeqVec(DVector::from_iterator(n, y.into_iter().map(|e| e * t)))
    };
    let residual_of = |x: &SeqVec| (&kp_map(x) - omega).norm2();
    let mut best: Option<(f64, SeqVec)> = None;
    let mut offer = |x: SeqVec| {
        let r = residual_of(&x);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, x));
        }
        r <= tol
    };

    // Smallest t for which every coordinate has a solution at all.
    let t_min = wmax * std::f64::consts::E / 2.0;
    let h = |t: f64| norm_of(&branch_profile(w, t, None)) - 1.0;
    if h(t_min) >= 0.0 {
        let mut lo = t_min;
        let mut hi = 2.0 * t_min;
        let mut guard = 0;
        while h(hi) >= 0.0 && guard < 2000 {
            lo = hi;
            hi *= 2.0;
            guard += 1;
        }
        for _ in 0..max_iter.max(1) {
            let mid = 0.5 * (lo + hi);
            if h(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        for t in [lo, hi, 0.5 * (lo + hi)] {
            if offer(build(t, None)) {
                return Ok(best.expect("candidate offered").1);
            }
        }
    } else {
        offer(build(t_min, None));
    }

    // One coordinate on the large branch, tried in order of decreasing |ω_k|.
    let mut order: Vec<usize> = (0..n).filter(|&k| w[k] != 0.0).collect();
    order.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()).then(a.cmp(&b)));
    for k in order {
        let wk = w[k].abs();
        let t_of = |u: f64| wk / (2.0 * u * (-u.ln()));
        // The smallest admissible y_k makes t equal to t_min.
        let u0 = solve_large_branch(-wk / (2.0 * t_min));
        let g = |u: f64| norm_of(&branch_profile(w, t_of(u), Some(k))) - 1.0;
        let gap0 = 1.0 - u0;
        if gap0 <= 0.0 {
            continue;
        }
        let ratio = (1e-12f64).powf(1.0 / LARGE_BRANCH_SCAN as f64);
        let mut prev = (u0, g(u0));
        for i in 1..=LARGE_BRANCH_SCAN {
            let u = 1.0 - gap0 * ratio.powi(i as i32);
            let gu = g(u);
            if (prev.1 >= 0.0) != (gu >= 0.0) {
                let (mut lo, mut hi) = (prev.0, u);
                let lo_sign = prev.1 >= 0.0;
                for _ in 0..max_iter.max(1) {
                    let mid = 0.5 * (lo + hi);
                    if (g(mid) >= 0.0) == lo_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 2.0 * f64::EPSILON {
                        break;
                    }
                }
                for u in [lo, hi] {
                    if offer(build(t_of(u), Some(k))) {
                        return Ok(best.expect("candidate offered").1);
                    }
                }
            }
            prev = (u, gu);
        }
    }
    let (residual, _) = best.expect("at least one candidate");
    Err(Z2Error::NoConvergence { residual })
}

/// The `ℓf` quasinorm `‖KPx‖₂ + ‖x‖₂`.
pub fn lf_quasinorm(x: &SeqVec) -> f64 {
    kp_map(x).norm2() + x.norm2()
}

fn lf_star_objective(omega: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (omega - kp_into(x)).norm() + x.norm()
}

/// Gradient of `x ↦ ‖ω − KPx‖₂ + ‖x‖₂` where it exists; zero coordinates of
/// `x` are held fixed.
fn lf_star_gradient(omega: &DVector<f64>, x: &DVector<f64>) -> Option<DVector<f64>> {
    let t = x.norm();
    if t == 0.0 {
        return None;
    }
    let r = omega - kp_into(x);
    let rn = r.norm();
    let xr = x.dot(&r);
    let mut g = x / t;
    if rn > 0.0 {
        // J_KP is symmetric: diag(2 log(|x_k|/t) + 2) − 2 x xᵀ / t².
        for k in 0..x.len() {
            if x[k] == 0.0 {
                g[k] = 0.0;
                continue;
            }
            let jr = (2.0 * (x[k].abs() / t).ln() + 2.0) * r[k] - 2.0 * x[k] * xr / (t * t);
            g[k] -= jr / rn;
        }
    }
    Some(g)
}

/// Deterministic backtracking descent; returns the best objective seen.
fn descend(omega: &DVector<f64>, start: DVector<f64>, iterations: usize) -> f64 {
    let mut x = start;
    let mut fx = lf_star_objective(omega, &x);
    let mut best = fx;
    let mut step = 0.25 * x.norm().max(omega.norm() * 1e-3);
    for _ in 0..iterations {
        let Some(g) = lf_star_gradient(omega, &x) else { break };
        let gn = g.norm();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let dir = g / gn;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &x - &dir * step;
            let fc = lf_star_objective(omega, &cand);
            if fc < fx {
                x = cand;
                fx = fc;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        best = best.min(fx);
        if !accepted {
            break;
        }
    }
    best
}

/// Upper estimate of the `ℓf*` quasinorm `inf_x ‖ω − KPx‖₂ + ‖x‖₂`.
///
/// Candidates: `x = 0`, the numerical section `kp_inverse(ω)` when it
/// converges, the best point of a line search along the section (or along
/// `−ω`), and `budget` descent steps from the last two. The result never
/// exceeds `‖ω‖₂` and is nonincreasing in `budget`.
pub fn lf_star_quasinorm_ub(omega: &SeqVec, budget: usize) -> f64 {
    let w = omega.as_dvector();
    let mut best = w.norm();
    if best == 0.0 {
        return 0.0;
    }
    let section = kp_inverse(omega, 1e-9 * best.max(1.0), 200).ok();
    let direction = match &section {
        Some(x) if !x.is_zero() => x.as_dvector().clone(),
        _ => -w / best,
    };
    let dn = direction.norm();
    let mut line_best = (f64::INFINITY, DVector::zeros(w.len()));
    for k in -12..=4 {
        let s = 2f64.powi(k) * best / dn;
        let cand = &direction * s;
        let f = lf_star_objective(w, &cand);
        if f < line_best.0 {
            line_best = (f, cand);
        }
    }
    best = best.min(line_best.0);
    best = best.min(descend(w, line_best.1, budget));
    if let Some(x) = section {
        let x = x.into_dvector();
        best = best.min(lf_star_objective(w, &x));
        best = best.min(descend(w, x, budget));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SeqVec {
        SeqVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm(&sv(&[1.0, 0.0, 0.0]), PExponent::TWO), 1.0);
        assert!((lp_norm(&sv(&[3.0, 4.0]), PExponent::TWO) - 5.0).abs() < 1e-15);
        assert_eq!(lp_norm(&sv(&[1.0, 1.0, 1.0, 1.0]), PExponent::ONE), 4.0);
        assert_eq!(lp_norm(&sv(&[1.0, -7.0, 2.0]), PExponent::INFINITY), 7.0);
        assert_eq!(lp_norm(&SeqVec::zeros(5), PExponent::new(3.0).unwrap()), 0.0);
        let p3 = lp_norm(&sv(&[1.0, 2.0]), PExponent::new(3.0).unwrap());
        assert!((p3 - 9f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_sequences() {
        assert!(SeqVec::new(vec![]).is_err());
        assert!(SeqVec::new(vec![1.0, f64::NAN]).is_err());
        assert!(SeqVec::new(vec![f64::INFINITY]).is_err());
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(PExponent::TWO.conjugate(), PExponent::TWO);
        assert_eq!(PExponent::ONE.conjugate(), PExponent::INFINITY);
        assert!((PExponent::new(4.0).unwrap().conjugate().value() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kp_of_basis_vector_vanishes() {
        assert!(kp_map(&SeqVec::basis(4, 0)).is_zero());
        assert!(kp_map(&SeqVec::zeros(4)).is_zero());
    }

    #[test]
    fn kp_of_spread() {
        let s = sv(&[0.5; 4]);
        let k = kp_map(&s);
        for &e in k.entries() {
            assert!((e + 2f64.ln()).abs() < 1e-15);
        }
        let k2 = kp_map(&s.scale(2.0));
        for (a, b) in k2.entries().iter().zip(k.entries()) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn kp_zero_coordinates_stay_zero() {
        let k = kp_map(&sv(&[0.0, 3.0, 0.0, -4.0]));
        assert_eq!(k.entries()[0], 0.0);
        assert_eq!(k.entries()[2], 0.0);
        assert!((k.entries()[1] - 6.0 * (0.6f64).ln()).abs() < 1e-14);
        assert!((k.entries()[3] + 8.0 * (0.8f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn small_branch_solver() {
        for &r in &[-1e-300, -1e-12, -1e-3, -0.1, -0.3, -0.36, -(-1.0f64).exp()] {
            let y = solve_small_branch(r);
            assert!(y >= 0.0 && y <= (-1.0f64).exp() + 1e-16);
            assert!((y * y.ln() - r).abs() <= 1e-13 * r.abs().max(1e-300), "r={r} y={y}");
        }
        assert_eq!(solve_small_branch(0.0), 0.0);
    }

    #[test]
    fn large_branch_solver() {
        for &r in &[-1e-12, -1e-3, -0.1, -0.3, -0.36] {
            let y = solve_large_branch(r);
            assert!(y >= (-1.0f64).exp() && y <= 1.0);
            assert!((y * y.ln() - r).abs() <= 1e-13, "r={r} y={y}");
        }
        assert_eq!(solve_large_branch(0.0), 1.0);
    }

    #[test]
    fn kp_inverse_recovers_a_dominant_coordinate() {
        let v = SeqVec::new(vec![0.8, -0.3, 0.3, 0.2, -0.1, 0.25]).unwrap();
        let omega = kp_map(&v);
        let x = kp_inverse(&omega, 1e-10, 200).unwrap();
        assert!((&kp_map(&x) - &omega).norm2() <= 1e-10);
    }

    #[test]
    fn kp_inverse_of_zero() {
        let x = kp_inverse(&SeqVec::zeros(7), 1e-12, 100).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn kp_inverse_round_trip_spread() {
        let s = SeqVec::spread(8, 8);
        let omega = kp_map(&s);
        let x = kp_inverse(&omega, 1e-10, 200).unwrap();
        assert!((&x - &s).norm2() < 1e-9);
    }

    #[test]
    fn kp_inverse_unreachable_target() {
        // A single spike cannot be a KP image.
        let err = kp_inverse(&SeqVec::basis(16, 3), 1e-8, 200).unwrap_err();
        assert!(matches!(err, Z2Error::NoConvergence { .. }));
    }

    #[test]
    fn lf_quasinorm_examples() {
        assert!((lf_quasinorm(&SeqVec::basis(5, 2)) - 1.0).abs() < 1e-15);
        assert_eq!(lf_quasinorm(&SeqVec::zeros(5)), 0.0);
        for n in [2usize, 16, 100] {
            let v = lf_quasinorm(&SeqVec::spread(n, n));
            assert!((v - (1.0 + (n as f64).ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn lf_star_examples() {
        assert_eq!(lf_star_quasinorm_ub(&SeqVec::zeros(4), 10), 0.0);
        let v = SeqVec::spread(32, 32).scale(1e-3);
        assert!(lf_star_quasinorm_ub(&kp_map(&v), 10) <= v.norm2() + 1e-15);
    }

    #[test]
    fn lf_star_of_basis_vector_against_grid() {
        let e1 = SeqVec::basis(6, 0);
        let ub = lf_star_quasinorm_ub(&e1, 20);
        // brute force along span(e1): KP(s e1) = 0, objective 1 + |s|
        let grid = (0..=2000)
            .map(|i| -1.0 + i as f64 / 1000.0)
            .map(|s| {
                let x = SeqVec::basis(6, 0).scale(s);
                (&e1 - &kp_map(&x)).norm2() + x.norm2()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(ub <= grid + 1e-15);
        assert!(ub <= 1.0);
    }

    #[test]
    fn lf_star_monotone_in_budget() {
        let omega = sv(&[0.3, -1.2, 0.5, 0.0, 2.0, -0.1, 0.7, 0.2]);
        let mut prev = f64::INFINITY;
        for budget in [0, 1, 2, 5, 10, 40] {
            let v = lf_star_quasinorm_ub(&omega, budget);
            assert!(v <= prev);
            assert!(v <= omega.norm2());
            prev = v;
        }
    }
}
