//! Unit-ball constants and the triangular change-of-basis between the two
//! natural coordinate systems for parallel-set geometry in dimension `d`:
//! curvature masses of the parallel set on one side, reach-truncated
//! boundary masses (basic function values) on the other.
//!
//! Everything here is dense and small (`d <= 8` in practice), so the code
//! favours exactness and auditability over asymptotics:
//!
//! * Gamma is only ever needed at half-integers and is evaluated by the
//!   exact recurrence `gamma(x + 1) = x * gamma(x)` seeded with
//!   `gamma(1/2) = sqrt(pi)` and `gamma(1) = 1`.
//! * The inverse of the conversion matrix is computed twice, by cofactor
//!   expansion and by forward substitution, and the two routes must agree
//!   to [`INVERSION_CONSISTENCY_TOL`]; disagreement is reported as an
//!   internal consistency error rather than papered over.

use crate::error::{Error, Result};

/// Mutual-agreement tolerance for the two inverse-matrix routes, and the
/// residual bound used by the `C * B = I` identity tests.
pub const INVERSION_CONSISTENCY_TOL: f64 = 1e-12;

/// Dense row-major matrix; entries `m[i][j]`. All matrices in this module
/// are `d x d`, lower triangular with unit diagonal.
pub type Matrix = Vec<Vec<f64>>;

/// Gamma function at the half-integer `n/2` (`n >= 1`), by the exact
/// recurrence from the seeds `gamma(1/2) = sqrt(pi)`, `gamma(1) = 1`.
fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1, "gamma_half needs a positive half-integer argument");
    let mut value = if n % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        // gamma((k + 2)/2) = (k/2) * gamma(k/2)
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Binomial coefficient as a float (arguments stay tiny, every value is an
/// exactly representable integer).
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for j in 0..k {
        num *= (n - j) as f64;
        den *= (j + 1) as f64;
    }
    num / den
}

/// Volume `kappa_k` of the `k`-dimensional unit ball and surface content
/// `omega_k = k * kappa_k` of the unit `(k-1)`-sphere, for `k = 0..=d`.
///
/// Errors with [`Error::Domain`] for `d < 1`. The returned vectors are
/// indexed by `k`; `omega[0] = 0` by the defining formula.
pub fn unit_ball_constants(d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if d < 1 {
        return Err(Error::Domain(
            "unit_ball_constants requires dimension d >= 1".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let sqrt_pi = pi.sqrt();
    let mut kappa = Vec::with_capacity(d + 1);
    for k in 0..=d {
        // pi^(k/2), with the half power split out exactly.
        let pi_pow = pi.powi((k / 2) as i32) * if k % 2 == 1 { sqrt_pi } else { 1.0 };
        kappa.push(pi_pow / gamma_half(k as u32 + 2));
    }
    let omega = (0..=d).map(|k| k as f64 * kappa[k]).collect();
    Ok((kappa, omega))
}

/// Conversion matrix `C` in dimension `d >= 2`:
/// `c[i][j] = binom(d - j, d - i) * kappa_{d-j} / kappa_{d-i}` for
/// `j <= i <= d - 1`, zero above the diagonal.
///
/// Row `i` expresses the `i`-th curvature mass of an `eps`-parallel set as
/// the combination `sum_j c[i][j] * eps^(i-j) * beta_j(eps)` of basic
/// function values.
pub fn steiner_matrix(d: usize) -> Result<Matrix> {
    if d < 2 {
        return Err(Error::Domain("steiner_matrix requires dimension d >= 2".into()));
    }
    let (kappa, _) = unit_ball_constants(d)?;
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            c[i][j] = if i == j {
                1.0
            } else {
                binomial(d - j, d - i) * kappa[d - j] / kappa[d - i]
            };
        }
    }
    Ok(c)
}

/// Determinant by Gaussian elimination with partial pivoting. Only used on
/// the small minors of `C` inside the cofactor inversion route.
#[allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
fn determinant(m: &Matrix) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut a = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot_row][col] == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    det
}

/// Minor of `m` with row `row` and column `col` deleted.
#[allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    let n = m.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == row {
            continue;
        }
        let mut r = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == col {
                continue;
            }
            r.push(m[i][j]);
        }
        out.push(r);
    }
    out
}

/// Inverse `B = C^{-1}` of the conversion matrix in dimension `d >= 2`,
/// computed by two independent routes:
///
/// 1. cofactors: `b[i][j] = (-1)^(i+j) * det(C with row j and column i
///    deleted)` (the determinant of `C` itself is 1);
/// 2. forward substitution on the unit lower-triangular system.
///
/// The routes must agree entrywise within [`INVERSION_CONSISTENCY_TOL`]
/// relative to the entry magnitude (inverse entries grow combinatorially
/// with `d`, so an absolute comparison would be tighter than f64
/// determinant arithmetic can honor); otherwise an
/// [`Error::InternalConsistency`] is returned. Row `i` of `B` recovers
/// `beta_i(eps) = sum_j b[i][j] * eps^(i-j) * mu_j(A_eps)`.
#[allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
pub fn inverse_matrix(d: usize) -> Result<Matrix> {
    if d < 2 {
        return Err(Error::Domain("inverse_matrix requires dimension d >= 2".into()));
    }
    let c = steiner_matrix(d)?;

    // Route 1: cofactor expansion.
    let mut cof = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[i][j] = sign * determinant(&minor(&c, j, i));
        }
    }

    // Route 2: forward substitution for the unit lower-triangular inverse.
    let mut tri = vec![vec![0.0; d]; d];
    for i in 0..d {
        tri[i][i] = 1.0;
        for j in (0..i).rev() {
            let mut acc = 0.0;
            for k in j..i {
                acc += c[i][k] * tri[k][j];
            }
            tri[i][j] = -acc;
        }
    }

    let mut max_dev = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let scale = 1.0 + cof[i][j].abs().max(tri[i][j].abs());
            max_dev = max_dev.max((cof[i][j] - tri[i][j]).abs() / scale);
        }
    }
    if max_dev > INVERSION_CONSISTENCY_TOL {
        return Err(Error::InternalConsistency(format!(
            "cofactor and triangular inversions of the d={d} conversion matrix \
             disagree by {max_dev:.3e} relative (tolerance {INVERSION_CONSISTENCY_TOL:.1e})"
        )));
    }
    Ok(tri)
}

/// Bundle of all conversion data for one ambient dimension.
#[derive(Debug, Clone)]
pub struct SteinerCoefficients {
    dim: usize,
    kappa: Vec<f64>,
    omega: Vec<f64>,
    c: Matrix,
    b: Matrix,
}

impl SteinerCoefficients {
    /// Build the constants and both conversion matrices for dimension
    /// `d >= 2` (`d = 1` carries the trivial `1 x 1` matrices).
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain(
                "SteinerCoefficients requires dimension d >= 1".into(),
            ));
        }
        let (kappa, omega) = unit_ball_constants(d)?;
        let (c, b) = if d == 1 {
            (vec![vec![1.0]], vec![vec![1.0]])
        } else {
            (steiner_matrix(d)?, inverse_matrix(d)?)
        };
        Ok(SteinerCoefficients { dim: d, kappa, omega, c, b })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unit-ball volume `kappa_k`, `0 <= k <= d`.
    pub fn kappa(&self, k: usize) -> f64 {
        self.kappa[k]
    }

    /// Unit-sphere content `omega_k = k * kappa_k`, `1 <= k <= d`.
    pub fn omega(&self, k: usize) -> f64 {
        assert!(
            (1..=self.dim).contains(&k),
            "omega_k is exposed for 1 <= k <= d"
        );
        self.omega[k]
    }

    /// Conversion entry `c[i][j]` (zero above the diagonal).
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    /// Inverse entry `b[i][j]` (zero above the diagonal).
    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i][j]
    }

    /// Borrow the full conversion matrix.
    pub fn c_matrix(&self) -> &Matrix {
        &self.c
    }

    /// Borrow the full inverse matrix.
    pub fn b_matrix(&self) -> &Matrix {
        &self.b
    }
}
