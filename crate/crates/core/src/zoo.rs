//! Classical operators on sequence spaces: Cesàro, Hilbert matrices, the
//! Hausdorff family, shifts, signed permutations and diagonal operators on
//! `Z2`.
//!
//! Hausdorff matrices are 0-indexed, `a_{nk} = C(n,k) Δ^{n-k} μ_k` for
//! `k ≤ n`, with `Δμ_k = μ_k − μ_{k+1}`. The Cesàro matrix is built directly
//! from its averaging formula.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::blockop::BlockOperator;
use crate::dd::{DoubleDouble, DD_EPSILON};
use crate::error::{Result, Z2Error};
use crate::linmap::LinearMap;
use crate::seqspace::{PExponent, SeqVec};

/// Averaging matrix: row `i` (0-indexed) has `1/(i+1)` in columns `0..=i`.
pub fn cesaro(n: usize) -> LinearMap {
    assert!(n >= 1, "dimension must be at least 1");
    LinearMap::Dense(DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 / (i + 1) as f64 } else { 0.0 }))
}

/// `1/(i + j + λ)` for `i, j = 0..n-1`.
pub fn hilbert_matrix(n: usize, lambda: f64) -> Result<LinearMap> {
    assert!(n >= 1, "dimension must be at least 1");
    if !lambda.is_finite() {
        return Err(Z2Error::ParameterOutOfRange(format!("lambda = {lambda}")));
    }
    for s in 0..2 * n - 1 {
        if s as f64 + lambda == 0.0 {
            let row = s.min(n - 1);
            return Err(Z2Error::PoleIndex { row, col: s - row });
        }
    }
    Ok(LinearMap::Dense(DMatrix::from_fn(n, n, |i, j| 1.0 / ((i + j) as f64 + lambda))))
}

/// Right shift `e_k ↦ e_{k+1}` (the last basis vector is truncated away) or
/// its transpose, the left shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    Right,
    Left,
}

pub fn shift(n: usize, direction: ShiftDirection) -> LinearMap {
    assert!(n >= 1, "dimension must be at least 1");
    let m = DMatrix::from_fn(n, n, |i, j| match direction {
        ShiftDirection::Right => (i == j + 1) as u8 as f64,
        ShiftDirection::Left => (j == i + 1) as u8 as f64,
    });
    LinearMap::Dense(m)
}

/// `(αx)_i = ε_i x_{σ(i)}` for a permutation `σ` of `0..n` and signs `ε`.
pub fn signed_permutation(perm: &[usize], signs: &[f64]) -> Result<LinearMap> {
    let n = perm.len();
    if n == 0 {
        return Err(Z2Error::InvalidSequence("empty permutation".into()));
    }
    if signs.len() != n {
        return Err(Z2Error::DimensionMismatch { expected: n, got: signs.len() });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Z2Error::ParameterOutOfRange(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    if let Some(s) = signs.iter().find(|s| **s != 1.0 && **s != -1.0) {
        return Err(Z2Error::ParameterOutOfRange(format!("sign {s} is not ±1")));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, perm[i])] = signs[i];
    }
    Ok(LinearMap::Dense(m))
}

pub fn random_signed_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LinearMap {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    signed_permutation(&perm, &signs).expect("shuffled identity is a permutation")
}

/// `D_σ = (D_a 0; 0 D_b)` with `a = (σ_1, σ_3, …)` and `b = (σ_2, σ_4, …)`
/// in 1-indexed terms, i.e. `σ` is read in the interleaved basis.
pub fn diagonal_z2(sigma: &SeqVec) -> Result<BlockOperator> {
    if sigma.dim() % 2 != 0 {
        return Err(Z2Error::InvalidSequence("diagonal symbol must have even length".into()));
    }
    let n = sigma.dim() / 2;
    let s = sigma.entries();
    let a = DVector::from_fn(n, |k, _| s[2 * k]);
    let b = DVector::from_fn(n, |k, _| s[2 * k + 1]);
    BlockOperator::new(
        LinearMap::Diagonal(a),
        LinearMap::zero(n),
        LinearMap::zero(n),
        LinearMap::Diagonal(b),
    )
}

/// The weights `z_k = 1/(√k·ln²(k+1))`, `k = 1..=n`, of the rank-one
/// counterexample `α₀ = e₁*⊗z`. The sequence lies in `ℓf` but in no `ℓp`
/// with `p < 2`.
pub fn alpha0_weights(n: usize) -> SeqVec {
    let z: Vec<f64> = (1..=n)
        .map(|k| {
            let l = ((k + 1) as f64).ln();
            1.0 / ((k as f64).sqrt() * l * l)
        })
        .collect();
    SeqVec::new(z).expect("weights are finite")
}

/// `α₀ = e₁*⊗z`: `x ↦ x_1·z` with `z` from [`alpha0_weights`].
pub fn alpha0(n: usize) -> LinearMap {
    let z = alpha0_weights(n);
    let mut m = DMatrix::zeros(n, n);
    m.set_column(0, z.as_dvector());
    LinearMap::Dense(m)
}

/// Consecutive normalized spreads over blocks of `k` coordinates; a final
/// partial block is left out.
pub fn normalized_blocks(n: usize, k: usize) -> Result<Vec<SeqVec>> {
    if k == 0 || k > n {
        return Err(Z2Error::ParameterOutOfRange(format!("block length {k} for dimension {n}")));
    }
    let w = 1.0 / (k as f64).sqrt();
    Ok((0..n / k)
        .map(|b| {
            let mut v = vec![0.0; n];
            v[b * k..(b + 1) * k].iter_mut().for_each(|e| *e = w);
            SeqVec::new(v).expect("finite")
        })
        .collect())
}

/// Disjoint normalized blocks of `k` coordinates at shuffled positions with
/// Gaussian entries.
pub fn random_blocks<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<SeqVec>> {
    if k == 0 || k > n {
        return Err(Z2Error::ParameterOutOfRange(format!("block length {k} for dimension {n}")));
    }
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    Ok(positions
        .chunks_exact(k)
        .map(|chunk| {
            let mut v = DVector::zeros(n);
            for &i in chunk {
                // redraw exact zeros so every block keeps its full support
                let mut g = 0.0;
                while g == 0.0 {
                    g = rng.sample::<f64, _>(rand_distr::StandardNormal);
                }
                v[i] = g;
            }
            let nv = v.norm();
            SeqVec::from_dvector(v / nv).expect("finite")
        })
        .collect())
}

type MomentFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum MomentRule {
    GenCesaro { a: f64, alpha: f64 },
    Holder { alpha: f64 },
    Euler { a: f64 },
    Gamma { a: f64, alpha: f64 },
    Constant(f64),
    Custom(MomentFn),
}

/// A moment sequence `μ_0, μ_1, …` defining a Hausdorff matrix.
#[derive(Clone)]
pub struct MomentSequence {
    name: String,
    rule: MomentRule,
}

impl std::fmt::Debug for MomentSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MomentSequence").field("name", &self.name).finish()
    }
}

fn positive_integer(x: f64) -> Option<u32> {
    (x >= 1.0 && x <= 64.0 && x.fract() == 0.0).then_some(x as u32)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `C(n, k)` as a float; exact while the value is below `2^53`.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// Generalized Cesàro moments `Γ(a+α)Γ(n+a) / (Γ(a)Γ(n+a+α))`.
pub fn moment_gen_cesaro(a: f64, alpha: f64) -> Result<MomentSequence> {
    if !(alpha > 0.0 && a > 0.0) {
        return Err(Z2Error::ParameterOutOfRange(format!("gen. Cesàro needs a > 0, alpha > 0 (a={a}, alpha={alpha})")));
    }
    Ok(MomentSequence { name: format!("gen-cesaro(a={a}, alpha={alpha})"), rule: MomentRule::GenCesaro { a, alpha } })
}

/// Hölder moments `(n+1)^{-α}`.
pub fn moment_holder(alpha: f64) -> Result<MomentSequence> {
    if !(alpha > 0.0) {
        return Err(Z2Error::ParameterOutOfRange(format!("Hölder needs alpha > 0 (alpha={alpha})")));
    }
    Ok(MomentSequence { name: format!("holder(alpha={alpha})"), rule: MomentRule::Holder { alpha } })
}

/// Euler moments `a^n`, `0 < a < 1`.
pub fn moment_euler(a: f64) -> Result<MomentSequence> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Z2Error::ParameterOutOfRange(format!("Euler needs 0 < a < 1 (a={a})")));
    }
    Ok(MomentSequence { name: format!("euler(a={a})"), rule: MomentRule::Euler { a } })
}

/// Gamma moments `(a/(n+a))^α`.
pub fn moment_gamma(a: f64, alpha: f64) -> Result<MomentSequence> {
    if !(alpha > 0.0 && a > 0.0) {
        return Err(Z2Error::ParameterOutOfRange(format!("Gamma needs a > 0, alpha > 0 (a={a}, alpha={alpha})")));
    }
    Ok(MomentSequence { name: format!("gamma(a={a}, alpha={alpha})"), rule: MomentRule::Gamma { a, alpha } })
}

impl MomentSequence {
    pub fn constant(c: f64) -> Self {
        MomentSequence { name: format!("constant({c})"), rule: MomentRule::Constant(c) }
    }

    pub fn custom(name: impl Into<String>, mu: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        MomentSequence { name: name.into(), rule: MomentRule::Custom(Arc::new(mu)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mu(&self, k: usize) -> f64 {
        let kf = k as f64;
        match &self.rule {
            MomentRule::GenCesaro { a, alpha } => {
                (ln_gamma(a + alpha) + ln_gamma(kf + a) - ln_gamma(*a) - ln_gamma(kf + a + alpha)).exp()
            }
            MomentRule::Holder { alpha } => (kf + 1.0).powf(-alpha),
            MomentRule::Euler { a } => a.powi(k as i32),
            MomentRule::Gamma { a, alpha } => (a / (kf + a)).powf(*alpha),
            MomentRule::Constant(c) => *c,
            MomentRule::Custom(f) => f(k),
        }
    }

    /// `μ_k` in double-double when the rule can be evaluated that
    /// accurately; `None` means only `f64` accuracy is available.
    fn mu_extended(&self, k: usize) -> Option<DoubleDouble> {
        let one = DoubleDouble::ONE;
        let d = DoubleDouble::from_f64;
        let kf = k as f64;
        match &self.rule {
            MomentRule::Holder { alpha } => {
                positive_integer(*alpha).map(|m| (one / d(kf + 1.0)).powi(m))
            }
            MomentRule::Euler { a } => Some(d(*a).powi(k as u32)),
            MomentRule::Gamma { a, alpha } => {
                positive_integer(*alpha).map(|m| (d(*a) / (d(kf) + d(*a))).powi(m))
            }
            MomentRule::GenCesaro { a, alpha } => positive_integer(*alpha).map(|m| {
                (0..m).fold(one, |acc, i| acc * (d(*a) + d(i as f64)) / (d(kf) + d(*a) + d(i as f64)))
            }),
            MomentRule::Constant(c) => Some(d(*c)),
            MomentRule::Custom(_) => None,
        }
    }

    /// Closed-form Hausdorff coefficient `a_{nk}`, when one is known.
    pub fn closed_form_coeff(&self, n: usize, k: usize) -> Option<f64> {
        if k > n {
            return Some(0.0);
        }
        let (nf, kf) = (n as f64, k as f64);
        match &self.rule {
            MomentRule::Euler { a } => {
                let lb = ln_binomial(n, k);
                let mut ln = lb + kf * a.ln();
                if n > k {
                    ln += (nf - kf) * (1.0 - a).ln();
                }
                Some(ln.exp())
            }
            MomentRule::GenCesaro { a, alpha } => {
                // Δ^j μ_k = Γ(a+α)/(Γ(a)Γ(α)) · B(k+a, j+α)
                let ln = ln_binomial(n, k) + ln_gamma(a + alpha) - ln_gamma(*a) - ln_gamma(*alpha)
                    + ln_gamma(kf + a)
                    + ln_gamma(nf - kf + alpha)
                    - ln_gamma(nf + a + alpha);
                Some(ln.exp())
            }
            MomentRule::Holder { alpha } if *alpha == 1.0 => Some(1.0 / (nf + 1.0)),
            MomentRule::Gamma { a, alpha } if *alpha == 1.0 => {
                // Δ^j μ_k = a · B(k+a, j+1)
                let ln = ln_binomial(n, k) + a.ln() + ln_gamma(kf + a) + ln_gamma(nf - kf + 1.0)
                    - ln_gamma(nf + a + 1.0);
                Some(ln.exp())
            }
            MomentRule::Constant(c) => Some(if n == k { *c } else { 0.0 }),
            _ => None,
        }
    }

    /// Norm of the infinite Hausdorff operator on `ℓp`, `1 < p < ∞`, from
    /// the classical closed forms (`None` outside their range of validity).
    pub fn lp_norm_formula(&self, p: PExponent) -> Option<f64> {
        let p = p.value();
        if !(p > 1.0 && p.is_finite()) {
            return None;
        }
        let ip = 1.0 / p;
        match &self.rule {
            // As classically printed; a Γ(a) factor only matters for a ≠ 1.
            MomentRule::GenCesaro { a, alpha } if *a > ip => {
                Some(gamma(a + alpha) * gamma(a - ip) / gamma(a + alpha - ip))
            }
            MomentRule::Holder { alpha } => Some((p / (p - 1.0)).powf(*alpha)),
            MomentRule::Euler { a } => Some((1.0 + (1.0 - a) / a).powf(ip)),
            MomentRule::Gamma { a, alpha } if *a > ip => Some((a / (a - ip)).powf(*alpha)),
            MomentRule::Constant(c) => Some(c.abs()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    Double,
    Extended,
    /// Double precision up to `threshold`, extended above it. Below the
    /// threshold a table that loses too many digits in double precision is
    /// recomputed in extended precision.
    Auto { threshold: usize },
}

#[derive(Debug, Clone)]
pub struct HausdorffSpec {
    pub moment: MomentSequence,
    pub n: usize,
    pub precision: PrecisionMode,
    /// Use the closed-form coefficients when the moment rule has them.
    pub use_closed_form: bool,
    /// Minimum number of significant digits every table entry must keep.
    pub min_digits: f64,
}

impl HausdorffSpec {
    pub fn new(moment: MomentSequence, n: usize) -> Self {
        HausdorffSpec {
            moment,
            n,
            precision: PrecisionMode::Auto { threshold: 16 },
            use_closed_form: true,
            min_digits: 6.0,
        }
    }
}

trait Scalar: Copy + std::ops::Sub<Output = Self> {
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for DoubleDouble {
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
}

/// Fills `a_{nk}` from the full difference table and returns the largest
/// number of digits lost by any nonzero entry. The loss of `Δ^j μ_k` is
/// `log10(Σ_i C(j,i)|μ_{k+i}| / |Δ^j μ_k|)`.
fn difference_table<T: Scalar>(mu: &[T], n: usize) -> (DMatrix<f64>, f64) {
    let mut level: Vec<T> = mu.to_vec();
    let mut mass: Vec<f64> = mu.iter().map(|m| m.to_f64().abs()).collect();
    let mut out = DMatrix::zeros(n, n);
    let mut worst = 0.0f64;
    // level j holds Δ^j μ_k for k = 0..n-j
    for j in 0..n {
        for k in 0..n - j {
            let row = j + k;
            let d = level[k].to_f64();
            if d != 0.0 {
                worst = worst.max((mass[k] / d.abs()).log10());
            }
            out[(row, k)] = binomial(row, k) * d;
        }
        let next: Vec<T> = (0..n - j - 1).map(|k| level[k] - level[k + 1]).collect();
        let next_mass: Vec<f64> = (0..n - j - 1).map(|k| mass[k] + mass[k + 1]).collect();
        level = next;
        mass = next_mass;
    }
    (out, worst)
}

/// Lower triangular Hausdorff matrix of dimension `spec.n`.
pub fn hausdorff_matrix(spec: &HausdorffSpec) -> Result<LinearMap> {
    let n = spec.n;
    if n == 0 {
        return Err(Z2Error::ParameterOutOfRange("dimension must be at least 1".into()));
    }
    if spec.use_closed_form && spec.moment.closed_form_coeff(0, 0).is_some() {
        let m = DMatrix::from_fn(n, n, |i, k| spec.moment.closed_form_coeff(i, k).unwrap());
        return LinearMap::dense(m);
    }
    let table = |extended: bool| -> Result<LinearMap> {
        let (m, lost, available) = if extended {
            let exact: Option<Vec<DoubleDouble>> = (0..n).map(|k| spec.moment.mu_extended(k)).collect();
            let (mu, input_digits) = match exact {
                Some(mu) => (mu, -DD_EPSILON.log10()),
                None => ((0..n).map(|k| DoubleDouble::from_f64(spec.moment.mu(k))).collect(), -f64::EPSILON.log10()),
            };
            let (m, lost) = difference_table(&mu, n);
            (m, lost, input_digits)
        } else {
            let mu: Vec<f64> = (0..n).map(|k| spec.moment.mu(k)).collect();
            let (m, lost) = difference_table(&mu, n);
            (m, lost, -f64::EPSILON.log10())
        };
        if available - lost < spec.min_digits {
            return Err(Z2Error::PrecisionLoss { n, digits_lost: lost });
        }
        LinearMap::dense(m)
    };
    match spec.precision {
        PrecisionMode::Double => table(false),
        PrecisionMode::Extended => table(true),
        PrecisionMode::Auto { threshold } if n > threshold => table(true),
        PrecisionMode::Auto { .. } => match table(false) {
            Err(Z2Error::PrecisionLoss { .. }) => table(true),
            other => other,
        },
    }
}
