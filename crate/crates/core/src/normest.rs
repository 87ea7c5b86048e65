//! Operator-norm estimation on truncated `ℓp` and on truncated `Z2`, and
//! classification of how estimates grow with the truncation size.
//!
//! All estimates are lower bounds certified by a witness vector.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::blockop::BlockOperator;
use crate::linmap::LinearMap;
use crate::seqspace::{kp_into, lp_norm_slice, PExponent, SeqVec};
use crate::z2core::Z2Vec;

/// Seed of the random-sign starts of [`opnorm_p`]; fixed so that results do
/// not depend on any caller state.
const START_SEED: u64 = 0x0b0e_5eed;

/// Largest dimension for which the `p = 2` estimate is cross-checked by a
/// dense SVD.
pub const SVD_ORACLE_MAX_DIM: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    /// `‖A w‖_p / ‖w‖_p` for the returned witness `w`.
    pub value: f64,
    pub witness: Vec<f64>,
    /// False when the best start hit the iteration cap before settling.
    pub converged: bool,
    pub iterations: usize,
    /// Largest singular value from a dense SVD (`p = 2`, small `n` only).
    pub svd_oracle: Option<f64>,
}

/// Unit vector `d` in `ℓq` with `⟨d, y⟩ = ‖y‖_p`, for `1 < p < ∞`.
fn dual_vector(y: &DVector<f64>, p: f64) -> DVector<f64> {
    let ny = lp_norm_slice(y.as_slice(), PExponent::new(p).expect("exponent in range"));
    if ny == 0.0 {
        return DVector::zeros(y.len());
    }
    y.map(|v| v.signum() * (v.abs() / ny).powf(p - 1.0) * (v != 0.0) as u8 as f64)
}

fn ratio(a: &LinearMap, x: &DVector<f64>, p: PExponent) -> f64 {
    let nx = lp_norm_slice(x.as_slice(), p);
    if nx == 0.0 {
        return 0.0;
    }
    lp_norm_slice(a.apply(x).as_slice(), p) / nx
}

/// Exact `‖A‖_1` (largest column sum) with its basis witness.
fn norm_one(a: &LinearMap) -> (f64, DVector<f64>) {
    let n = a.dim();
    let (mut best, mut arg) = (-1.0, 0);
    for k in 0..n {
        let s = a.column(k).iter().map(|v| v.abs()).sum::<f64>();
        if s > best {
            best = s;
            arg = k;
        }
    }
    let mut w = DVector::zeros(n);
    w[arg] = 1.0;
    (best, w)
}

/// Exact `‖A‖_∞` (largest row sum) with its sign-vector witness.
fn norm_inf(a: &LinearMap) -> (f64, DVector<f64>) {
    let t = a.transpose();
    let n = a.dim();
    let (mut best, mut arg) = (-1.0, 0);
    for i in 0..n {
        let s = t.column(i).iter().map(|v| v.abs()).sum::<f64>();
        if s > best {
            best = s;
            arg = i;
        }
    }
    let row = t.column(arg);
    let w = row.map(|v| if v < 0.0 { -1.0 } else { 1.0 });
    (best, w)
}

/// One run of the nonlinear power method from `x0`; returns the final
/// iterate, the number of iterations and whether it settled.
fn power_run(a: &LinearMap, p: f64, x0: DVector<f64>, tol: f64, max_iter: usize) -> (DVector<f64>, usize, bool) {
    let pe = PExponent::new(p).expect("exponent in range");
    let q = p / (p - 1.0);
    let n0 = lp_norm_slice(x0.as_slice(), pe);
    if n0 == 0.0 {
        return (x0, 0, true);
    }
    let mut x = x0 / n0;
    let mut est = 0.0f64;
    for it in 1..=max_iter {
        let y = a.apply(&x);
        let new_est = lp_norm_slice(y.as_slice(), pe);
        if new_est == 0.0 {
            return (x, it, true);
        }
        let z = a.apply_transpose(&dual_vector(&y, p));
        let next = dual_vector(&z, q);
        if (new_est - est).abs() <= tol * new_est {
            return (x, it, true);
        }
        est = new_est;
        if next.iter().all(|v| *v == 0.0) {
            return (x, it, true);
        }
        x = next;
    }
    (x, max_iter, false)
}

/// Lower-bound estimate of `‖A‖_{p→p}`.
///
/// `p = 1` and `p = ∞` are computed exactly from column and row sums. For
/// `1 < p < ∞` the nonlinear power method `x ← dual_q(Aᵀ dual_p(Ax))` runs
/// from several starts (ones, three random sign vectors, an approximate top
/// right singular vector and the column of largest `ℓp` norm) and the best
/// witness is kept.
pub fn opnorm_p(a: &LinearMap, p: PExponent, tol: f64, max_iter: usize) -> NormEstimate {
    opnorm_p_with_starts(a, p, tol, max_iter, &[])
}

/// As [`opnorm_p`], with additional caller-supplied starting vectors (for
/// example the witness found at a smaller truncation, zero-padded).
pub fn opnorm_p_with_starts(
    a: &LinearMap,
    p: PExponent,
    tol: f64,
    max_iter: usize,
    extra_starts: &[DVector<f64>],
) -> NormEstimate {
    let n = a.dim();
    let svd_oracle = (p.value() == 2.0 && n <= SVD_ORACLE_MAX_DIM)
        .then(|| a.to_dense().singular_values().max());
    if p.value() == 1.0 || p.is_infinite() {
        let (value, w) = if p.is_infinite() { norm_inf(a) } else { norm_one(a) };
        return NormEstimate { value, witness: w.as_slice().to_vec(), converged: true, iterations: 0, svd_oracle };
    }
    let pv = p.value();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut starts: Vec<DVector<f64>> = vec![DVector::from_element(n, 1.0)];
    for _ in 0..3 {
        starts.push(DVector::from_fn(n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 }));
    }
    // a few plain power steps on AᵀA approximate the top right singular vector
    let mut v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    for _ in 0..8 {
        let w = a.apply_transpose(&a.apply(&v));
        let nw = w.norm();
        if nw == 0.0 {
            break;
        }
        v = w / nw;
    }
    starts.push(v);
    let mut best_col = (0.0, 0);
    for k in 0..n {
        let c = lp_norm_slice(a.column(k).as_slice(), p);
        if c > best_col.0 {
            best_col = (c, k);
        }
    }
    let mut e = DVector::zeros(n);
    e[best_col.1] = 1.0;
    starts.push(e);
    starts.extend(extra_starts.iter().filter(|s| s.len() == n).cloned());

    let mut best = NormEstimate { value: -1.0, witness: vec![], converged: true, iterations: 0, svd_oracle };
    for s in starts {
        let (x, iters, converged) = power_run(a, pv, s, tol, max_iter);
        let r = ratio(a, &x, p);
        if r > best.value {
            best.value = r;
            best.witness = x.as_slice().to_vec();
            best.converged = converged;
            best.iterations = iters;
        }
    }
    best
}

/// Norm estimates of a family of matrices over increasing sizes, each size
/// warm-started from the previous witness padded with zeros.
pub fn opnorm_sweep(
    build: impl Fn(usize) -> LinearMap,
    sizes: &[usize],
    p: PExponent,
    tol: f64,
    max_iter: usize,
) -> Vec<NormEstimate> {
    let mut out: Vec<NormEstimate> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let extra: Vec<DVector<f64>> = out
            .last()
            .filter(|prev| prev.witness.len() <= n)
            .map(|prev| {
                let mut w = DVector::zeros(n);
                w.rows_mut(0, prev.witness.len()).copy_from_slice(&prev.witness);
                vec![w]
            })
            .unwrap_or_default();
        out.push(opnorm_p_with_starts(&build(n), p, tol, max_iter, &extra));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Z2NormEstimate {
    pub value: f64,
    pub witness: Z2Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Z2Witness {
    pub omega: Vec<f64>,
    pub x: Vec<f64>,
}

impl Z2Witness {
    pub fn to_z2vec(&self) -> Z2Vec {
        Z2Vec::new(
            SeqVec::new(self.omega.clone()).expect("witness entries are finite"),
            SeqVec::new(self.x.clone()).expect("witness entries are finite"),
        )
        .expect("witness parts share a dimension")
    }
}

fn quasinorm_raw(omega: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (omega - kp_into(x)).norm() + x.norm()
}

struct Candidate {
    omega: DVector<f64>,
    x: DVector<f64>,
    out_omega: DVector<f64>,
    out_x: DVector<f64>,
    ratio: f64,
}

impl Candidate {
    fn new(t: &BlockOperator, omega: DVector<f64>, x: DVector<f64>) -> Option<Self> {
        let q = quasinorm_raw(&omega, &x);
        if q == 0.0 {
            return None;
        }
        let (out_omega, out_x) = t.apply_raw(&omega, &x);
        let ratio = quasinorm_raw(&out_omega, &out_x) / q;
        Some(Candidate { omega, x, out_omega, out_x, ratio })
    }

    /// Randomized coordinate ascent in the interleaved basis: each step
    /// perturbs one coordinate by one of a few relative step sizes, updates
    /// `Tz` through the matching column and keeps improvements.
    fn ascend(&mut self, t: &BlockOperator, steps: usize, rng: &mut ChaCha8Rng) {
        let n = self.omega.len();
        const FACTORS: [f64; 4] = [0.5, -0.5, 0.1, -0.1];
        for _ in 0..steps {
            let k = rng.random_range(0..2 * n);
            let j = k / 2;
            let (col_omega, col_x) = t.column(k);
            let scale = {
                let cur = if k % 2 == 0 { self.omega[j] } else { self.x[j] };
                let rms = ((self.omega.norm_squared() + self.x.norm_squared()) / (2 * n) as f64).sqrt();
                cur.abs().max(rms)
            };
            let mut best: Option<(f64, f64)> = None;
            for f in FACTORS {
                let h = f * scale;
                let (mut omega, mut x) = (self.omega.clone(), self.x.clone());
                if k % 2 == 0 {
                    omega[j] += h;
                } else {
                    x[j] += h;
                }
                let q = quasinorm_raw(&omega, &x);
                if q == 0.0 {
                    continue;
                }
                let out_omega = &self.out_omega + &col_omega * h;
                let out_x = &self.out_x + &col_x * h;
                let r = quasinorm_raw(&out_omega, &out_x) / q;
                if r > best.map_or(self.ratio, |b| b.0) {
                    best = Some((r, h));
                }
            }
            if let Some((r, h)) = best {
                if k % 2 == 0 {
                    self.omega[j] += h;
                } else {
                    self.x[j] += h;
                }
                self.out_omega += &col_omega * h;
                self.out_x += &col_x * h;
                self.ratio = r;
            }
        }
        // Recompute from scratch so the reported ratio carries no drift from
        // the incremental updates.
        let (o, x) = t.apply_raw(&self.omega, &self.x);
        self.ratio = quasinorm_raw(&o, &x) / quasinorm_raw(&self.omega, &self.x);
        self.out_omega = o;
        self.out_x = x;
    }
}

/// Lower-bound estimate of the `Z2` quasinorm modulus of `T`,
/// `sup ‖Tz‖/‖z‖`, from `samples` random candidates plus structured ones
/// (`i(y)`, `j(x)` and `L_p(spread_k)` for `k` a power of two or `n`), each
/// refined by `ascent_steps` coordinate-ascent steps. Deterministic in
/// `seed`.
pub fn z2_opnorm_est(t: &BlockOperator, samples: usize, ascent_steps: usize, seed: u64) -> Z2NormEstimate {
    let n = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    let zeros = || DVector::<f64>::zeros(n);
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|k| *k <= n).collect();
    if *ks.last().unwrap() != n {
        ks.push(n);
    }
    for &k in &ks {
        let s = SeqVec::spread(n, k).into_dvector();
        starts.push((kp_into(&s), s.clone()));
        starts.push((s.clone(), zeros()));
        starts.push((zeros(), s));
    }
    for i in 0..samples {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        if i % 2 == 0 {
            let h = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            starts.push((g, h));
        } else {
            starts.push((kp_into(&g), g));
        }
    }
    let mut best: Option<Candidate> = None;
    for (omega, x) in starts {
        let Some(mut c) = Candidate::new(t, omega, x) else { continue };
        c.ascend(t, ascent_steps, &mut rng);
        if best.as_ref().is_none_or(|b| c.ratio > b.ratio) {
            best = Some(c);
        }
    }
    let b = best.expect("spread candidates are nonzero");
    Z2NormEstimate {
        value: b.ratio,
        witness: Z2Witness { omega: b.omega.as_slice().to_vec(), x: b.x.as_slice().to_vec() },
    }
}

/// Growth classes for a sequence of estimates over truncation sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    LogGrowth,
    LogSqGrowth,
    PowerGrowth,
    Inconclusive,
}

impl GrowthClass {
    /// True for the three unbounded model classes.
    pub fn is_growth(self) -> bool {
        matches!(self, GrowthClass::LogGrowth | GrowthClass::LogSqGrowth | GrowthClass::PowerGrowth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `a`
    Constant,
    /// `a + b·ln n`
    Log,
    /// `a + b·ln² n`
    LogSq,
    /// `a·n^b`, fitted in log-log coordinates
    Power,
    /// `a + b/ln n`, a trend converging to a finite limit
    Saturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: GrowthModel,
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual divided by the mean value.
    pub rel_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTrend {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub fit: GrowthClass,
    /// Least-squares slope per octave divided by the mean value.
    pub relative_growth_per_octave: f64,
    pub fits: Vec<ModelFit>,
}

/// Relative growth per octave below which a trend counts as bounded.
pub const BOUNDED_GROWTH_PER_OCTAVE: f64 = 0.05;
/// The best model must beat the runner-up residual by this factor.
pub const MODEL_MARGIN: f64 = 0.7;
/// Values below this are treated as exact zeros.
pub const NEGLIGIBLE: f64 = 1e-9;

fn least_squares(t: &[f64], y: &[f64]) -> (f64, f64) {
    let m = t.len() as f64;
    let tm = t.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let stt: f64 = t.iter().map(|v| (v - tm) * (v - tm)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let b = if stt == 0.0 { 0.0 } else { sty / stt };
    (ym - b * tm, b)
}

fn rel_rms(pred: impl Iterator<Item = f64>, y: &[f64]) -> f64 {
    let m = y.len() as f64;
    let mean = y.iter().sum::<f64>() / m;
    let ss: f64 = pred.zip(y).map(|(p, v)| (p - v) * (p - v)).sum();
    (ss / m).sqrt() / mean
}

/// Classifies the growth of `values` over `sizes`.
///
/// A trend is bounded when every value is negligible, or when the relative
/// least-squares growth per octave is at most
/// [`BOUNDED_GROWTH_PER_OCTAVE`]. Otherwise the models `a + b ln n`,
/// `a + b ln² n`, `a n^b` and the convergent `a + b/ln n` are fitted and the
/// one with the smallest relative residual wins if it beats the runner-up
/// by [`MODEL_MARGIN`] (a convergent winner means bounded); otherwise, and
/// whenever fewer than four sizes spanning two octaves are given, the trend
/// is inconclusive.
///
/// # Panics
/// If the lengths differ, sizes are not strictly increasing, or a value is
/// negative or NaN.
pub fn growth_trend(sizes: &[usize], values: &[f64]) -> NormTrend {
    assert_eq!(sizes.len(), values.len(), "one value per size");
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "sizes must be strictly increasing");
    assert!(values.iter().all(|v| *v >= 0.0), "values must be nonnegative");
    let mut trend = NormTrend {
        sizes: sizes.to_vec(),
        values: values.to_vec(),
        fit: GrowthClass::Inconclusive,
        relative_growth_per_octave: 0.0,
        fits: vec![],
    };
    if sizes.len() < 4 || (sizes[sizes.len() - 1] as f64) < 4.0 * sizes[0] as f64 {
        return trend;
    }
    if values.iter().any(|v| v.is_infinite()) {
        trend.relative_growth_per_octave = f64::INFINITY;
        trend.fit = if values.last().unwrap().is_infinite() { GrowthClass::PowerGrowth } else { GrowthClass::Inconclusive };
        return trend;
    }
    let ln: Vec<f64> = sizes.iter().map(|n| (*n as f64).ln()).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (_, slope) = least_squares(&ln, values);
    trend.relative_growth_per_octave = if mean > 0.0 { slope * std::f64::consts::LN_2 / mean } else { 0.0 };
    trend.fits.push(ModelFit {
        model: GrowthModel::Constant,
        a: mean,
        b: 0.0,
        rel_residual: if mean > 0.0 { rel_rms(values.iter().map(|_| mean), values) } else { 0.0 },
    });
    if values.iter().all(|v| *v <= NEGLIGIBLE) {
        trend.fit = GrowthClass::Bounded;
        return trend;
    }
    let (a, b) = least_squares(&ln, values);
    trend.fits.push(ModelFit {
        model: GrowthModel::Log,
        a,
        b,
        rel_residual: rel_rms(ln.iter().map(|l| a + b * l), values),
    });
    let ln2: Vec<f64> = ln.iter().map(|l| l * l).collect();
    let (a, b) = least_squares(&ln2, values);
    trend.fits.push(ModelFit {
        model: GrowthModel::LogSq,
        a,
        b,
        rel_residual: rel_rms(ln2.iter().map(|l| a + b * l), values),
    });
    if values.iter().all(|v| *v > 0.0) {
        let lv: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let (a, b) = least_squares(&ln, &lv);
        trend.fits.push(ModelFit {
            model: GrowthModel::Power,
            a: a.exp(),
            b,
            rel_residual: rel_rms(ln.iter().map(|l| (a + b * l).exp()), values),
        });
    }
    let inv: Vec<f64> = ln.iter().map(|l| 1.0 / l).collect();
    let (a, b) = least_squares(&inv, values);
    trend.fits.push(ModelFit {
        model: GrowthModel::Saturating,
        a,
        b,
        rel_residual: rel_rms(inv.iter().map(|l| a + b * l), values),
    });
    if trend.relative_growth_per_octave <= BOUNDED_GROWTH_PER_OCTAVE {
        trend.fit = GrowthClass::Bounded;
        return trend;
    }
    let mut growth: Vec<&ModelFit> = trend.fits.iter().filter(|f| f.model != GrowthModel::Constant).collect();
    growth.sort_by(|x, y| x.rel_residual.total_cmp(&y.rel_residual));
    let decisive = growth.len() < 2 || growth[0].rel_residual <= MODEL_MARGIN * growth[1].rel_residual;
    if decisive {
        trend.fit = match growth[0].model {
            GrowthModel::Log => GrowthClass::LogGrowth,
            GrowthModel::LogSq => GrowthClass::LogSqGrowth,
            GrowthModel::Power => GrowthClass::PowerGrowth,
            GrowthModel::Saturating => GrowthClass::Bounded,
            GrowthModel::Constant => unreachable!("constant model filtered out"),
        };
    }
    trend
}
