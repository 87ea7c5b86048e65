//! Square real linear maps used as blocks of operators on `Z2`.
//!
//! Every map behaves as an `n×n` matrix. Zero, scalar and diagonal maps keep
//! a compact form so that block operators at `n = 4096` stay cheap; products
//! and sums fall back to dense storage only when needed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, Z2Error};
use crate::seqspace::SeqVec;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Zero(usize),
    /// `c·I`
    Scaled { n: usize, c: f64 },
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl LinearMap {
    pub fn identity(n: usize) -> Self {
        LinearMap::Scaled { n, c: 1.0 }
    }

    pub fn zero(n: usize) -> Self {
        LinearMap::Zero(n)
    }

    pub fn scaled(n: usize, c: f64) -> Self {
        if c == 0.0 {
            LinearMap::Zero(n)
        } else {
            LinearMap::Scaled { n, c }
        }
    }

    pub fn diagonal(d: &SeqVec) -> Self {
        LinearMap::Diagonal(d.as_dvector().clone())
    }

    pub fn dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Z2Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Z2Error::InvalidSequence("empty matrix".into()));
        }
        if m.iter().any(|e| !e.is_finite()) {
            return Err(Z2Error::InvalidSequence("matrix has non-finite entries".into()));
        }
        Ok(LinearMap::Dense(m))
    }

    /// Dense map from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Z2Error::DimensionMismatch { expected: n, got: r.len() });
        }
        Self::dense(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        match self {
            LinearMap::Zero(n) | LinearMap::Scaled { n, .. } => *n,
            LinearMap::Diagonal(d) => d.len(),
            LinearMap::Dense(m) => m.nrows(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            LinearMap::Zero(_) => 0.0,
            LinearMap::Scaled { c, .. } => {
                if i == j {
                    *c
                } else {
                    0.0
                }
            }
            LinearMap::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            LinearMap::Dense(m) => m[(i, j)],
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim(), "linear map applied to vector of wrong length");
        match self {
            LinearMap::Zero(n) => DVector::zeros(*n),
            LinearMap::Scaled { c, .. } => x * *c,
            LinearMap::Diagonal(d) => d.component_mul(x),
            LinearMap::Dense(m) => m * x,
        }
    }

    pub fn apply_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            LinearMap::Dense(m) => {
                assert_eq!(x.len(), m.nrows(), "linear map applied to vector of wrong length");
                m.tr_mul(x)
            }
            _ => self.apply(x),
        }
    }

    pub fn apply_seq(&self, x: &SeqVec) -> SeqVec {
        SeqVec::from_raw(self.apply(x.as_dvector()))
    }

    /// The `k`-th column, i.e. the image of `e_k`.
    pub fn column(&self, k: usize) -> DVector<f64> {
        let n = self.dim();
        match self {
            LinearMap::Dense(m) => m.column(k).into_owned(),
            _ => {
                let mut v = DVector::zeros(n);
                v[k] = self.entry(k, k);
                v
            }
        }
    }

    pub fn transpose(&self) -> LinearMap {
        match self {
            LinearMap::Dense(m) => LinearMap::Dense(m.transpose()),
            other => other.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> LinearMap {
        match self {
            LinearMap::Zero(n) => LinearMap::Zero(*n),
            LinearMap::Scaled { n, c } => LinearMap::Scaled { n: *n, c: c * s },
            LinearMap::Diagonal(d) => LinearMap::Diagonal(d * s),
            LinearMap::Dense(m) => LinearMap::Dense(m * s),
        }
    }

    /// Negation, exact in floating point.
    pub fn neg(&self) -> LinearMap {
        match self {
            LinearMap::Zero(n) => LinearMap::Zero(*n),
            LinearMap::Scaled { n, c } => LinearMap::Scaled { n: *n, c: -c },
            LinearMap::Diagonal(d) => LinearMap::Diagonal(-d),
            LinearMap::Dense(m) => LinearMap::Dense(-m),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        match self {
            LinearMap::Zero(_) => DMatrix::zeros(n, n),
            LinearMap::Scaled { c, .. } => DMatrix::identity(n, n) * *c,
            LinearMap::Diagonal(d) => DMatrix::from_diagonal(d),
            LinearMap::Dense(m) => m.clone(),
        }
    }

    fn diag_vector(&self) -> Option<DVector<f64>> {
        let n = self.dim();
        match self {
            LinearMap::Zero(_) => Some(DVector::zeros(n)),
            LinearMap::Scaled { c, .. } => Some(DVector::from_element(n, *c)),
            LinearMap::Diagonal(d) => Some(d.clone()),
            LinearMap::Dense(_) => None,
        }
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.dim(), other.dim(), "sum of maps of different dimension");
        match (self, other) {
            (LinearMap::Zero(_), b) => b.clone(),
            (a, LinearMap::Zero(_)) => a.clone(),
            (LinearMap::Scaled { n, c }, LinearMap::Scaled { c: d, .. }) => {
                LinearMap::Scaled { n: *n, c: c + d }
            }
            (LinearMap::Dense(a), LinearMap::Dense(b)) => LinearMap::Dense(a + b),
            (LinearMap::Dense(a), b) | (b, LinearMap::Dense(a)) => {
                let mut m = a.clone();
                let d = b.diag_vector().expect("non-dense map has a diagonal form");
                for i in 0..m.nrows() {
                    m[(i, i)] += d[i];
                }
                LinearMap::Dense(m)
            }
            (a, b) => {
                let (da, db) = (a.diag_vector().unwrap(), b.diag_vector().unwrap());
                LinearMap::Diagonal(da + db)
            }
        }
    }

    pub fn sub(&self, other: &LinearMap) -> LinearMap {
        self.add(&other.neg())
    }

    /// Matrix product `self · other`, i.e. the map `x ↦ self(other(x))`.
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.dim(), other.dim(), "composition of maps of different dimension");
        let n = self.dim();
        match (self, other) {
            (LinearMap::Zero(_), _) | (_, LinearMap::Zero(_)) => LinearMap::Zero(n),
            (LinearMap::Scaled { c, .. }, b) => b.scale(*c),
            (a, LinearMap::Scaled { c, .. }) => a.scale(*c),
            (LinearMap::Diagonal(a), LinearMap::Diagonal(b)) => {
                LinearMap::Diagonal(a.component_mul(b))
            }
            (LinearMap::Diagonal(d), LinearMap::Dense(m)) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                LinearMap::Dense(out)
            }
            (LinearMap::Dense(m), LinearMap::Diagonal(d)) => {
                let mut out = m.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col *= d[j];
                }
                LinearMap::Dense(out)
            }
            (LinearMap::Dense(a), LinearMap::Dense(b)) => LinearMap::Dense(a * b),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            LinearMap::Zero(_) => 0.0,
            LinearMap::Scaled { n, c } => c.abs() * (*n as f64).sqrt(),
            LinearMap::Diagonal(d) => d.norm(),
            LinearMap::Dense(m) => m.norm(),
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        match self {
            LinearMap::Zero(_) => 0.0,
            LinearMap::Scaled { c, .. } => c.abs(),
            LinearMap::Diagonal(d) => d.amax(),
            LinearMap::Dense(m) => m.amax(),
        }
    }

    /// Largest entrywise difference, without materializing compact forms
    /// unless one side is dense.
    pub fn max_abs_diff(&self, other: &LinearMap) -> f64 {
        assert_eq!(self.dim(), other.dim(), "comparison of maps of different dimension");
        match (self, other) {
            (LinearMap::Dense(a), LinearMap::Dense(b)) => (a - b).amax(),
            (LinearMap::Dense(_), _) | (_, LinearMap::Dense(_)) => self.sub(other).max_abs_entry(),
            (a, b) => (a.diag_vector().unwrap() - b.diag_vector().unwrap()).amax(),
        }
    }

    /// Bit-exact symmetry (tolerance 0).
    pub fn is_symmetric(&self) -> bool {
        match self {
            LinearMap::Dense(m) => {
                let n = m.nrows();
                (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
            }
            _ => true,
        }
    }

    pub fn is_lower_triangular(&self) -> bool {
        match self {
            LinearMap::Dense(m) => {
                let n = m.nrows();
                (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == 0.0))
            }
            _ => true,
        }
    }
}
