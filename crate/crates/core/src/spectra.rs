//! Eigenvalues of finite sections and resolvent-norm grids on `ℓp`.
//!
//! Finite sections of the Cesàro operator have spectrum `{1/k}`, while the
//! operator on `ℓp` has the disk `|λ − p*/2| ≤ p*/2` as spectrum. The disk
//! is observed through growth of `‖(λI − C_n)⁻¹‖_p` with `n`: it stays
//! bounded outside the disk and grows inside.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Result, Z2Error};
use crate::linmap::LinearMap;
use crate::normest::{growth_trend, opnorm_p, GrowthClass, NormTrend};
use crate::seqspace::PExponent;
use crate::zoo::cesaro;

/// Default dimension cap of [`eigenvalues`].
pub const EIGEN_CAP: usize = 2048;
/// Largest dimension for which resolvents are formed explicitly.
pub const RESOLVENT_CAP: usize = 1024;
/// Shifts whose condition number `‖M‖₁‖M⁻¹‖₁` exceeds this are treated as
/// exact eigenvalues.
pub const SINGULAR_CONDITION: f64 = 1e13;

fn sort_desc(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// All eigenvalues with multiplicity, sorted by decreasing real part.
///
/// Triangular input yields its diagonal exactly; bit-symmetric input uses
/// the symmetric solver (real output); anything else goes through a real
/// Schur decomposition. Inputs above [`EIGEN_CAP`] are rejected.
pub fn eigenvalues(a: &LinearMap) -> Result<Vec<Complex64>> {
    eigenvalues_capped(a, EIGEN_CAP)
}

pub fn eigenvalues_capped(a: &LinearMap, cap: usize) -> Result<Vec<Complex64>> {
    let n = a.dim();
    if n > cap {
        return Err(Z2Error::TooLarge { n, cap });
    }
    let m = a.to_dense();
    let mut out: Vec<Complex64> = if is_triangular(&m) {
        m.diagonal().iter().map(|d| Complex64::new(*d, 0.0)).collect()
    } else if a.is_symmetric() {
        SymmetricEigen::new(m).eigenvalues.iter().map(|e| Complex64::new(*e, 0.0)).collect()
    } else {
        let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 100 * n.max(10)).ok_or(Z2Error::EigenNoConvergence(n))?;
        schur.complex_eigenvalues().iter().map(|c: &Complex<f64>| Complex64::new(c.re, c.im)).collect()
    };
    sort_desc(&mut out);
    Ok(out)
}

fn is_triangular(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == 0.0));
    let upper = (0..n).all(|i| (0..i).all(|j| m[(i, j)] == 0.0));
    lower || upper
}

fn serialize_values<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        if v.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(v)?;
        }
    }
    seq.end()
}

/// Resolvent-norm estimates `‖(λI − A)⁻¹‖_p` over a grid of shifts;
/// exact eigenvalues are marked with `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralGrid {
    pub p: PExponent,
    pub n: usize,
    pub grid: Vec<Complex64>,
    #[serde(serialize_with = "serialize_values")]
    pub values: Vec<f64>,
}

impl SpectralGrid {
    /// One row `λ_re,λ_im,value` per grid point, `inf` for singular shifts.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda_re,lambda_im,value\n");
        for (l, v) in self.grid.iter().zip(&self.values) {
            let v = if v.is_infinite() { "inf".to_string() } else { format!("{v}") };
            s.push_str(&format!("{},{},{}\n", l.re, l.im, v));
        }
        s
    }
}

fn singular(lambda: Complex64) -> Z2Error {
    Z2Error::SingularShift(format!("{} + {}i", lambda.re, lambda.im))
}

fn one_norm_c(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value of a complex matrix by power iteration on
/// `RᴴR`; a lower bound.
fn complex_two_norm(r: &DMatrix<Complex64>) -> f64 {
    let n = r.nrows();
    let rh = r.adjoint();
    let mut best = 0.0f64;
    for start in 0..2 {
        let mut x = DVector::from_fn(n, |i, _| {
            if start == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(((i * 7919) % 13) as f64 - 6.0, ((i * 104729) % 11) as f64 - 5.0)
            }
        });
        let nx = x.norm();
        if nx == 0.0 {
            continue;
        }
        x /= Complex64::new(nx, 0.0);
        let mut est = 0.0;
        for _ in 0..5000 {
            let y = r * &x;
            let e = y.norm();
            best = best.max(e);
            let z = &rh * y;
            let nz = z.norm();
            if nz == 0.0 || (e - est).abs() <= 1e-12 * e {
                break;
            }
            est = e;
            x = z / Complex64::new(nz, 0.0);
        }
    }
    best
}

/// `‖(λI − A)⁻¹‖_p` for one shift. Complex shifts need `p = 2`.
pub fn resolvent_norm(a: &LinearMap, lambda: Complex64, p: PExponent) -> Result<f64> {
    let n = a.dim();
    if n > RESOLVENT_CAP {
        return Err(Z2Error::TooLarge { n, cap: RESOLVENT_CAP });
    }
    let m = a.to_dense();
    if is_triangular(&m) && m.diagonal().iter().any(|d| Complex64::new(*d, 0.0) == lambda) {
        return Err(singular(lambda));
    }
    if lambda.im == 0.0 {
        let shifted = DMatrix::from_diagonal_element(n, n, lambda.re) - &m;
        let inv = shifted.clone().try_inverse().ok_or_else(|| singular(lambda))?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(singular(lambda));
        }
        let cond = column_sum_norm(&shifted) * column_sum_norm(&inv);
        if cond > SINGULAR_CONDITION {
            return Err(singular(lambda));
        }
        Ok(opnorm_p(&LinearMap::Dense(inv), p, 1e-10, 2000).value)
    } else {
        if p.value() != 2.0 {
            return Err(Z2Error::ParameterOutOfRange(format!(
                "complex shifts are supported for p = 2 only (p = {p})"
            )));
        }
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            d - Complex64::new(m[(i, j)], 0.0)
        });
        let inv = shifted.clone().try_inverse().ok_or_else(|| singular(lambda))?;
        if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(singular(lambda));
        }
        if one_norm_c(&shifted) * one_norm_c(&inv) > SINGULAR_CONDITION {
            return Err(singular(lambda));
        }
        Ok(complex_two_norm(&inv))
    }
}

fn column_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Resolvent norms of `A` at every grid point; singular shifts are marked
/// `+∞`, other failures propagate.
pub fn resolvent_grid(a: &LinearMap, p: PExponent, grid: &[Complex64]) -> Result<SpectralGrid> {
    if grid.is_empty() {
        return Err(Z2Error::InvalidSequence("empty grid".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &l in grid {
        match resolvent_norm(a, l, p) {
            Ok(v) => values.push(v),
            Err(Z2Error::SingularShift(_)) => values.push(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(SpectralGrid { p, n: a.dim(), grid: grid.to_vec(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Growth,
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskPoint {
    pub lambda: Complex64,
    pub inside: bool,
    pub trend: NormTrend,
    /// Sizes at which the shift is an exact eigenvalue of the section.
    pub singular_sizes: Vec<usize>,
    pub class: PointClass,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskCheckReport {
    pub p: PExponent,
    pub center: f64,
    pub radius: f64,
    pub sizes: Vec<usize>,
    pub points: Vec<DiskPoint>,
    pub pass: bool,
}

/// Center and radius `p*/2` of the `ℓp` spectrum of the Cesàro operator.
pub fn cesaro_disk(p: PExponent) -> (f64, f64) {
    let r = p.conjugate().value() / 2.0;
    (r, r)
}

/// Sample points at radius ratios `0.5` (inside) and `1.5` (outside) about
/// the disk center: the two real points for each ratio, plus the two
/// imaginary-direction points when `p = 2`.
pub fn default_disk_points(p: PExponent) -> (Vec<Complex64>, Vec<Complex64>) {
    let (c, r) = cesaro_disk(p);
    let ring = |ratio: f64| {
        let mut pts = vec![Complex64::new(c + ratio * r, 0.0), Complex64::new(c - ratio * r, 0.0)];
        if p.value() == 2.0 {
            pts.push(Complex64::new(c, ratio * r));
            pts.push(Complex64::new(c, -ratio * r));
        }
        pts
    };
    (ring(0.5), ring(1.5))
}

/// Classifies each shift by the growth of the Cesàro resolvent norms over
/// `sizes`: interior points must grow, exterior points stay bounded. A shift
/// that is an exact eigenvalue of some section counts as growth.
pub fn cesaro_disk_check(
    p: PExponent,
    sizes: &[usize],
    inside_pts: &[Complex64],
    outside_pts: &[Complex64],
) -> Result<DiskCheckReport> {
    let (center, radius) = cesaro_disk(p);
    let sections: Vec<LinearMap> = sizes.iter().map(|&n| cesaro(n)).collect();
    let mut points = Vec::new();
    for (&lambda, inside) in inside_pts.iter().map(|l| (l, true)).chain(outside_pts.iter().map(|l| (l, false))) {
        let mut vals = Vec::with_capacity(sizes.len());
        let mut singular_sizes = Vec::new();
        for (a, &n) in sections.iter().zip(sizes) {
            match resolvent_norm(a, lambda, p) {
                Ok(v) => vals.push(v),
                Err(Z2Error::SingularShift(_)) => {
                    vals.push(f64::INFINITY);
                    singular_sizes.push(n);
                }
                Err(e) => return Err(e),
            }
        }
        let trend = growth_trend(sizes, &vals);
        let class = if !singular_sizes.is_empty() || trend.fit.is_growth() {
            PointClass::Growth
        } else if trend.fit == GrowthClass::Bounded {
            PointClass::Bounded
        } else {
            PointClass::Inconclusive
        };
        let pass = if inside { class == PointClass::Growth } else { class == PointClass::Bounded };
        points.push(DiskPoint { lambda, inside, trend, singular_sizes, class, pass });
    }
    let pass = points.iter().all(|pt| pt.pass);
    Ok(DiskCheckReport { p, center, radius, sizes: sizes.to_vec(), points, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::hilbert_matrix;

    #[test]
    fn cesaro_eigenvalues_are_reciprocals() {
        let e = eigenvalues(&cesaro(5)).unwrap();
        for (k, l) in e.iter().enumerate() {
            assert_eq!(l.im, 0.0);
            assert!((l.re - 1.0 / (k + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn hilbert_eigenvalues() {
        let e = eigenvalues(&hilbert_matrix(1, 1.0).unwrap()).unwrap();
        assert_eq!(e, vec![Complex64::new(1.0, 0.0)]);
        let e = eigenvalues(&hilbert_matrix(10, 1.0).unwrap()).unwrap();
        assert!(e.iter().all(|l| l.im == 0.0 && l.re > 0.0 && l.re < std::f64::consts::PI));
        // At n = 100 the smallest eigenvalues lie below double resolution, so
        // positivity holds only up to the solver's backward error.
        let e = eigenvalues(&hilbert_matrix(100, 1.0).unwrap()).unwrap();
        let floor = 100.0 * f64::EPSILON * e[0].re;
        assert!(e.iter().all(|l| l.im == 0.0 && l.re > -floor && l.re < std::f64::consts::PI));
    }

    #[test]
    fn nonsymmetric_eigenvalues() {
        // rotation by 90 degrees scaled by 2
        let a = LinearMap::from_rows(&[vec![0.0, -2.0], vec![2.0, 0.0]]).unwrap();
        let e = eigenvalues(&a).unwrap();
        assert!((e[0] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!(matches!(eigenvalues_capped(&a, 1), Err(Z2Error::TooLarge { .. })));
    }

    #[test]
    fn resolvent_of_diagonal() {
        let a = LinearMap::Dense(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        let two = PExponent::TWO;
        assert!((resolvent_norm(&a, Complex64::new(3.0, 0.0), two).unwrap() - 1.0).abs() < 1e-10);
        let v = resolvent_norm(&a, Complex64::new(1.0, 1.0), two).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        assert!(matches!(resolvent_norm(&a, Complex64::new(2.0, 0.0), two), Err(Z2Error::SingularShift(_))));
        assert!(resolvent_norm(&a, Complex64::new(1.0, 1.0), PExponent::new(3.0).unwrap()).is_err());
    }

    #[test]
    fn grid_marks_singular_points_and_writes_csv() {
        let g = resolvent_grid(&cesaro(4), PExponent::TWO, &[Complex64::new(0.5, 0.0), Complex64::new(3.0, 0.0)]).unwrap();
        assert!(g.values[0].is_infinite());
        assert!(g.values[1].is_finite());
        let csv = g.to_csv();
        assert!(csv.starts_with("lambda_re,lambda_im,value\n0.5,0,inf\n3,0,"));
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains("\"inf\""));
    }

    #[test]
    fn disk_geometry() {
        assert_eq!(cesaro_disk(PExponent::TWO), (1.0, 1.0));
        let (c, _) = cesaro_disk(PExponent::new(4.0).unwrap());
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
        let (inside, outside) = default_disk_points(PExponent::TWO);
        assert_eq!(inside.len(), 4);
        assert!(outside.contains(&Complex64::new(2.5, 0.0)));
    }
}
