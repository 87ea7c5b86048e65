//! Boundedness conditions for block-operator families, evaluated as growth
//! trends across truncation sizes.
//!
//! Conditions that involve `KP` are nonlinear, so their "norms" are suprema
//! of ratios over a probe set rather than matrix norms. Conditions that
//! involve `KP⁻¹` use the parametric family `ω = KP(v)` with the section
//! `KP⁻¹ω := v`. Parametric probes are restricted to vectors with
//! `max|v_k| ≤ ‖v‖₂/e`, the range of the small-branch section, so that `v`
//! is the section value of its own image.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::blockop::BlockOperator;
use crate::error::Result;
use crate::normest::{growth_trend, opnorm_p, GrowthClass, NormTrend};
use crate::seqspace::{kp_into, kp_inverse, lf_star_quasinorm_ub, PExponent, SeqVec};

/// A rule `n ↦ T_n` producing finite sections of an operator on `Z2`.
#[derive(Clone)]
pub struct OperatorFamily {
    label: String,
    builder: Arc<dyn Fn(usize) -> Result<BlockOperator> + Send + Sync>,
}

impl std::fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily").field("label", &self.label).finish()
    }
}

impl OperatorFamily {
    pub fn new(label: impl Into<String>, builder: impl Fn(usize) -> Result<BlockOperator> + Send + Sync + 'static) -> Self {
        OperatorFamily { label: label.into(), builder: Arc::new(builder) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn build(&self, n: usize) -> Result<BlockOperator> {
        (self.builder)(n)
    }
}

/// Probe budgets shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckConfig {
    /// Number of random probes per size, on top of basis and spread probes.
    pub probes: usize,
    /// Descent budget of each `ℓf*` quasinorm estimate.
    pub lf_star_budget: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { probes: 8, lf_star_budget: 30, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// `δ: ℓ₂ → ℓ₂`
    D,
    /// `γ: ℓf → ℓ₂`
    G1,
    /// `β − KP∘γ: ℓf → ℓ₂`
    G2,
    /// `δ + γ∘KP⁻¹: ℓf* → ℓ₂`
    DGKinv,
    /// `γ + δ∘KP: ℓ₂ → ℓ₂`
    GDK,
    /// `α + β∘KP⁻¹ − KP(δ + γ∘KP⁻¹): ℓf* → ℓ₂`
    Star,
    /// `α: ℓ₂ → ℓf*`
    A,
    /// `α − KP∘δ: ℓ₂ → ℓ₂`
    C0,
    /// `α∘KP + β: ℓ₂ → ℓf*`
    C1,
    /// `α + β∘KP⁻¹: ℓf* → ℓf*`
    C2,
    /// `α∘KP + β − KP(δ∘KP + γ): ℓ₂ → ℓ₂`
    C3,
    /// `γ − KP⁻¹∘β: ℓf → ℓf`
    C4,
    /// `δ: ℓf* → ℓ₂`
    DStar,
    /// `γ: ℓ₂ → ℓ₂`
    GammaL2,
    /// `x ↦ ‖(αx, δx)‖_{Z2}/‖x‖₂`, the lifting of `δ` through `Z2`
    LiftResidual,
}

impl Condition {
    pub const NECESSARY: [Condition; 5] = [Condition::D, Condition::G1, Condition::G2, Condition::DGKinv, Condition::GDK];
    pub const MANDATORY: [Condition; 6] =
        [Condition::D, Condition::G1, Condition::G2, Condition::DGKinv, Condition::GDK, Condition::Star];
    pub const ADDITIONAL: [Condition; 6] =
        [Condition::A, Condition::C0, Condition::C1, Condition::C2, Condition::C3, Condition::C4];
    pub const EXTRA: [Condition; 3] = [Condition::DStar, Condition::GammaL2, Condition::LiftResidual];

    pub fn key(self) -> &'static str {
        match self {
            Condition::D => "d",
            Condition::G1 => "g1",
            Condition::G2 => "g2",
            Condition::DGKinv => "d_gKinv",
            Condition::GDK => "g_dK",
            Condition::Star => "star",
            Condition::A => "a",
            Condition::C0 => "c0",
            Condition::C1 => "c1",
            Condition::C2 => "c2",
            Condition::C3 => "c3",
            Condition::C4 => "c4",
            Condition::DStar => "d_star",
            Condition::GammaL2 => "gamma_l2",
            Condition::LiftResidual => "lift_residual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionTrend {
    pub trend: NormTrend,
    /// Label of the probe attaining the supremum at each evaluated size.
    pub witnesses: Vec<String>,
    /// Sizes with no admissible probe (for example every inverse failed).
    pub gaps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithBounded,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub family: String,
    pub sizes: Vec<usize>,
    pub conditions: BTreeMap<String, ConditionTrend>,
    pub verdict: Verdict,
}

impl ConditionReport {
    pub fn get(&self, c: Condition) -> Option<&ConditionTrend> {
        self.conditions.get(c.key())
    }

    fn merge(&mut self, other: ConditionReport) {
        self.conditions.extend(other.conditions);
        self.verdict = boundedness_verdict(self);
    }
}

struct Probe {
    label: String,
    v: DVector<f64>,
}

/// `ℓ₂`/`ℓf` probes: first and last basis vectors, spreads over `2^j` and
/// `n` leading coordinates, and `budget` random unit vectors. Random probe
/// `i` depends only on `(seed, n, i)`, so larger budgets give supersets.
fn plain_probes(n: usize, cfg: &CheckConfig) -> Vec<Probe> {
    let mut out = vec![Probe { label: "e_0".into(), v: SeqVec::basis(n, 0).into_dvector() }];
    if n > 1 {
        out.push(Probe { label: format!("e_{}", n - 1), v: SeqVec::basis(n, n - 1).into_dvector() });
    }
    for k in spread_sizes(n, 2) {
        out.push(Probe { label: format!("spread_{k}"), v: SeqVec::spread(n, k).into_dvector() });
    }
    for i in 0..cfg.probes {
        let mut rng = probe_rng(cfg.seed, n, i, 0);
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let g = &g / g.norm();
        out.push(Probe { label: format!("random_{i}"), v: g });
    }
    out
}

/// Parametric probes `v` satisfying the small-branch condition: spreads
/// over at least 8 coordinates and random vectors with magnitudes in
/// `[1/2, 1]` and random signs.
fn parametric_probes(n: usize, cfg: &CheckConfig) -> Vec<Probe> {
    let mut out: Vec<Probe> = spread_sizes(n, 8)
        .into_iter()
        .map(|k| Probe { label: format!("spread_{k}"), v: SeqVec::spread(n, k).into_dvector() })
        .collect();
    for i in 0..cfg.probes {
        let mut rng = probe_rng(cfg.seed, n, i, 1);
        let v = DVector::from_fn(n, |_, _| {
            let m: f64 = rng.random_range(0.5..=1.0);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        });
        let v = &v / v.norm();
        out.push(Probe { label: format!("random_{i}"), v });
    }
    let cap = (-1.0f64).exp();
    out.retain(|p| p.v.amax() <= cap * p.v.norm());
    out
}

fn spread_sizes(n: usize, min: usize) -> Vec<usize> {
    let mut ks: Vec<usize> =
        std::iter::successors(Some(min), |k| Some(k * 2)).take_while(|k| *k <= n).collect();
    if n >= min && ks.last() != Some(&n) {
        ks.push(n);
    }
    ks
}

fn probe_rng(seed: u64, n: usize, i: usize, kind: u64) -> ChaCha8Rng {
    let mixed = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((n as u64) << 32)
        .wrapping_add((i as u64) << 2)
        .wrapping_add(kind);
    ChaCha8Rng::seed_from_u64(mixed)
}

fn lf(x: &DVector<f64>) -> f64 {
    kp_into(x).norm() + x.norm()
}

fn lf_star(w: &DVector<f64>, budget: usize) -> f64 {
    lf_star_quasinorm_ub(&SeqVec::from_raw(w.clone()), budget)
}

/// Running supremum of probe ratios for one condition at one size.
#[derive(Default)]
struct Sup {
    best: Option<(f64, String)>,
}

impl Sup {
    fn offer(&mut self, num: f64, den: f64, label: &str) {
        if den <= 0.0 || !den.is_finite() || !num.is_finite() {
            return;
        }
        let r = num / den;
        if self.best.as_ref().is_none_or(|(b, _)| r > *b) {
            self.best = Some((r, label.to_string()));
        }
    }
}

type PerSize = BTreeMap<Condition, Sup>;

fn evaluate_size(t: &BlockOperator, which: &[Condition], cfg: &CheckConfig) -> PerSize {
    let n = t.dim();
    let wants = |c: Condition| which.contains(&c);
    let mut sups: PerSize = which.iter().map(|c| (*c, Sup::default())).collect();
    let two = PExponent::TWO;
    let b = cfg.lf_star_budget;
    let (alpha, beta, delta, gamma) = (&t.alpha, &t.beta, &t.delta, &t.gamma);

    if wants(Condition::D) {
        let e = opnorm_p(delta, two, 1e-10, 500);
        sups.get_mut(&Condition::D).unwrap().offer(e.value, 1.0, "power_method");
    }
    if wants(Condition::GammaL2) {
        let e = opnorm_p(gamma, two, 1e-10, 500);
        sups.get_mut(&Condition::GammaL2).unwrap().offer(e.value, 1.0, "power_method");
    }

    let plain_needed = [
        Condition::G1,
        Condition::G2,
        Condition::GDK,
        Condition::A,
        Condition::C0,
        Condition::C1,
        Condition::C3,
        Condition::C4,
        Condition::LiftResidual,
    ];
    if plain_needed.iter().any(|c| wants(*c)) {
        for probe in plain_probes(n, cfg) {
            let x = &probe.v;
            let l = &probe.label;
            let nx = x.norm();
            let lfx = lf(x);
            let kx = kp_into(x);
            let gx = gamma.apply(x);
            let bx = beta.apply(x);
            let mut offer = |c: Condition, num: f64, den: f64| {
                if let Some(s) = sups.get_mut(&c) {
                    s.offer(num, den, l);
                }
            };
            if wants(Condition::G1) {
                offer(Condition::G1, gx.norm(), lfx);
            }
            if wants(Condition::G2) {
                offer(Condition::G2, (&bx - kp_into(&gx)).norm(), lfx);
            }
            if wants(Condition::GDK) {
                offer(Condition::GDK, (&gx + delta.apply(&kx)).norm(), nx);
            }
            let ax = alpha.apply(x);
            let dx = delta.apply(x);
            if wants(Condition::A) {
                offer(Condition::A, lf_star(&ax, b), nx);
            }
            if wants(Condition::C0) {
                offer(Condition::C0, (&ax - kp_into(&dx)).norm(), nx);
            }
            if wants(Condition::LiftResidual) {
                offer(Condition::LiftResidual, (&ax - kp_into(&dx)).norm() + dx.norm(), nx);
            }
            if wants(Condition::C1) || wants(Condition::C3) {
                let top = alpha.apply(&kx) + &bx;
                if wants(Condition::C1) {
                    offer(Condition::C1, lf_star(&top, b), nx);
                }
                if wants(Condition::C3) {
                    let bottom = delta.apply(&kx) + &gx;
                    offer(Condition::C3, (&top - kp_into(&bottom)).norm(), nx);
                }
            }
            if wants(Condition::C4) {
                let target = SeqVec::from_raw(bx.clone());
                let tol = 1e-9 * bx.norm().max(1.0);
                if let Ok(section) = kp_inverse(&target, tol, 200) {
                    offer(Condition::C4, lf(&(&gx - section.as_dvector())), lfx);
                }
            }
        }
    }

    let parametric_needed = [Condition::DGKinv, Condition::Star, Condition::C2, Condition::DStar];
    if parametric_needed.iter().any(|c| wants(*c)) {
        for probe in parametric_probes(n, cfg) {
            let v = &probe.v;
            let l = &probe.label;
            let omega = kp_into(v);
            let den = lf_star(&omega, b);
            let bottom = delta.apply(&omega) + gamma.apply(v);
            let top = alpha.apply(&omega) + beta.apply(v);
            let mut offer = |c: Condition, num: f64| {
                if let Some(s) = sups.get_mut(&c) {
                    s.offer(num, den, l);
                }
            };
            if wants(Condition::DGKinv) {
                offer(Condition::DGKinv, bottom.norm());
            }
            if wants(Condition::Star) {
                offer(Condition::Star, (&top - kp_into(&bottom)).norm());
            }
            if wants(Condition::C2) {
                offer(Condition::C2, lf_star(&top, b));
            }
            if wants(Condition::DStar) {
                offer(Condition::DStar, delta.apply(&omega).norm());
            }
        }
    }
    sups
}

fn run(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig, which: &[Condition]) -> Result<ConditionReport> {
    let mut values: BTreeMap<Condition, Vec<(usize, f64, String)>> = BTreeMap::new();
    let mut gaps: BTreeMap<Condition, Vec<usize>> = BTreeMap::new();
    for &n in sizes {
        let t = family.build(n)?;
        for (c, sup) in evaluate_size(&t, which, cfg) {
            match sup.best {
                Some((v, l)) => values.entry(c).or_default().push((n, v, l)),
                None => gaps.entry(c).or_default().push(n),
            }
        }
    }
    let mut conditions = BTreeMap::new();
    for &c in which {
        let pts = values.remove(&c).unwrap_or_default();
        let s: Vec<usize> = pts.iter().map(|p| p.0).collect();
        let v: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let trend = ConditionTrend {
            trend: growth_trend(&s, &v),
            witnesses: pts.into_iter().map(|p| p.2).collect(),
            gaps: gaps.remove(&c).unwrap_or_default(),
        };
        conditions.insert(c.key().to_string(), trend);
    }
    let mut report =
        ConditionReport { family: family.label.clone(), sizes: sizes.to_vec(), conditions, verdict: Verdict::Inconclusive };
    report.verdict = boundedness_verdict(&report);
    Ok(report)
}

/// The four necessary conditions `(d)`, `(g)` (as `g1`, `g2`), `(d+gK⁻¹)`
/// and `(g+dK)` across `sizes`.
pub fn check_necessary(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig) -> Result<ConditionReport> {
    run(family, sizes, cfg, &Condition::NECESSARY)
}

/// Condition `(★)` across `sizes`.
pub fn check_star(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig) -> Result<ConditionTrend> {
    let mut r = run(family, sizes, cfg, &[Condition::Star])?;
    Ok(r.conditions.remove(Condition::Star.key()).expect("star requested"))
}

/// Conditions `(a)` and `(c₀)`–`(c₄)` across `sizes`.
pub fn check_additional(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig) -> Result<ConditionReport> {
    run(family, sizes, cfg, &Condition::ADDITIONAL)
}

/// Diagnostic checks outside the verdict: `δ: ℓf* → ℓ₂`, `γ: ℓ₂ → ℓ₂` and the lifting
/// residual of `δ`.
pub fn check_extras(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig) -> Result<ConditionReport> {
    run(family, sizes, cfg, &Condition::EXTRA)
}

/// Every condition, with the aggregated verdict.
pub fn check_all(family: &OperatorFamily, sizes: &[usize], cfg: &CheckConfig) -> Result<ConditionReport> {
    let mut report = run(family, sizes, cfg, &Condition::MANDATORY)?;
    report.merge(check_additional(family, sizes, cfg)?);
    report.merge(check_extras(family, sizes, cfg)?);
    Ok(report)
}

/// `Inconsistent` if a mandatory trend is a growth class,
/// `ConsistentWithBounded` if all are bounded, `Inconclusive` otherwise
/// (including when a mandatory condition is missing).
pub fn boundedness_verdict(report: &ConditionReport) -> Verdict {
    let classes: Vec<Option<GrowthClass>> =
        Condition::MANDATORY.iter().map(|c| report.get(*c).map(|t| t.trend.fit)).collect();
    if classes.iter().flatten().any(|c| c.is_growth()) {
        Verdict::Inconsistent
    } else if classes.iter().all(|c| *c == Some(GrowthClass::Bounded)) {
        Verdict::ConsistentWithBounded
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::scalar_matrix;

    const SIZES: [usize; 4] = [16, 32, 64, 128];

    fn scalar(a: f64, b: f64, d: f64, g: f64) -> OperatorFamily {
        OperatorFamily::new(format!("scalar:{a},{b},{d},{g}"), move |n| Ok(scalar_matrix(a, b, d, g, n)))
    }

    #[test]
    fn identity_family_is_bounded() {
        let r = check_all(&scalar(1.0, 0.0, 0.0, 1.0), &SIZES, &CheckConfig::default()).unwrap();
        for (k, c) in &r.conditions {
            assert_eq!(c.trend.fit, GrowthClass::Bounded, "{k}: {:?}", c.trend.values);
        }
        assert_eq!(r.verdict, Verdict::ConsistentWithBounded);
        let g1 = r.get(Condition::G1).unwrap();
        assert!(g1.trend.values.iter().all(|v| (*v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pure_delta_is_inconsistent() {
        let r = check_necessary(&scalar(0.0, 0.0, 1.0, 0.0), &SIZES, &CheckConfig::default()).unwrap();
        assert_eq!(r.get(Condition::GDK).unwrap().trend.fit, GrowthClass::LogGrowth);
        assert_eq!(r.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn parametric_probes_stay_on_small_branch() {
        let cfg = CheckConfig { probes: 20, ..CheckConfig::default() };
        for n in [8, 16, 100] {
            for p in parametric_probes(n, &cfg) {
                assert!(p.v.amax() <= (-1.0f64).exp() * p.v.norm());
            }
        }
        assert!(parametric_probes(4, &cfg).is_empty());
    }

    #[test]
    fn larger_budget_never_lowers_values() {
        let f = scalar(1.0, 0.5, 0.0, 2.0);
        let small = check_all(&f, &SIZES, &CheckConfig { probes: 2, ..CheckConfig::default() }).unwrap();
        let large = check_all(&f, &SIZES, &CheckConfig { probes: 6, ..CheckConfig::default() }).unwrap();
        for (k, c) in &small.conditions {
            let l = &large.conditions[k];
            for (a, b) in c.trend.values.iter().zip(&l.trend.values) {
                assert!(b >= a, "{k}");
            }
        }
    }

    #[test]
    fn verdict_with_missing_condition_is_inconclusive() {
        let mut r = check_necessary(&scalar(1.0, 0.0, 0.0, 1.0), &SIZES, &CheckConfig::default()).unwrap();
        assert_eq!(boundedness_verdict(&r), Verdict::Inconclusive);
        r.merge(run(&scalar(1.0, 0.0, 0.0, 1.0), &SIZES, &CheckConfig::default(), &[Condition::Star]).unwrap());
        assert_eq!(r.verdict, Verdict::ConsistentWithBounded);
    }
}
