//! Truncated harmonic-oscillator algebra.
//!
//! All operators live on the lowest `N` Fock levels. The ladder relations are
//! exact on the interior; the corner level `N - 1` carries the truncation
//! artifact (e.g. `[a, a^dagger]` has `1 - N` there instead of `1`).
//! [`InteriorProjector`] cuts the top `k` levels away so that the interior
//! relations can be asserted literally.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::linalg;
use crate::{Error, Result, C64};

/// Default distance kept from `theta = pi/2`, where `sqrt(4 cos(theta))` degenerates.
pub const DEFAULT_ANGLE_GUARD: f64 = 1e-3;

/// Smallest truncation with a nontrivial ladder.
pub const MIN_TRUNCATION: usize = 2;

/// Dense complex square operator on an `N`-level Fock truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    m: DMatrix<C64>,
}

impl TruncatedOperator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() < MIN_TRUNCATION {
            return Err(Error::TruncationTooSmall { got: m.nrows(), min: MIN_TRUNCATION });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m })
    }

    /// Internal constructor for results of closed operations on valid operators.
    pub(crate) fn from_matrix(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() >= MIN_TRUNCATION);
        Self { m }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { m: &self.m * s }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.m)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.m)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs(&(&self.m - self.m.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        same_dim(self, rhs)?;
        Ok(Self { m: &self.m * &rhs.m })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        same_dim(self, rhs)?;
        Ok(Self { m: &self.m + &rhs.m })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        same_dim(self, rhs)?;
        Ok(Self { m: &self.m - &rhs.m })
    }

    /// `self + s * I`.
    pub fn shift(&self, s: C64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += s;
        }
        Self { m }
    }
}

fn same_dim(x: &TruncatedOperator, y: &TruncatedOperator) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    Ok(())
}

// Operator arithmetic panics on a dimension mismatch, like nalgebra itself;
// use the `try_*` methods when shapes are not known to agree.
impl<'a> Mul<&'a TruncatedOperator> for &'a TruncatedOperator {
    type Output = TruncatedOperator;
    fn mul(self, rhs: &'a TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator { m: &self.m * &rhs.m }
    }
}

impl<'a> Add<&'a TruncatedOperator> for &'a TruncatedOperator {
    type Output = TruncatedOperator;
    fn add(self, rhs: &'a TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator { m: &self.m + &rhs.m }
    }
}

impl<'a> Sub<&'a TruncatedOperator> for &'a TruncatedOperator {
    type Output = TruncatedOperator;
    fn sub(self, rhs: &'a TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator { m: &self.m - &rhs.m }
    }
}

/// Diagonal projector keeping Fock levels `0..dim - margin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorProjector {
    dim: usize,
    margin: usize,
}

impl InteriorProjector {
    pub fn new(dim: usize, margin: usize) -> Result<Self> {
        if margin >= dim {
            return Err(Error::MarginTooLarge { margin, dim });
        }
        Ok(Self { dim, margin })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Number of retained levels.
    pub fn levels(&self) -> usize {
        self.dim - self.margin
    }

    pub fn keeps(&self, level: usize) -> bool {
        level < self.levels()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j && self.keeps(i) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `Pi X Pi`.
    pub fn apply(&self, x: &TruncatedOperator) -> Result<TruncatedOperator> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        let keep = self.levels();
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i < keep && j < keep {
                x.m[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(TruncatedOperator::from_matrix(m))
    }

    /// `max |Pi (X - c I) Pi|`, the interior deviation of `X` from `c * I`.
    pub fn deviation_from_identity(&self, x: &TruncatedOperator, c: C64) -> Result<f64> {
        let shifted = x.shift(-c);
        Ok(self.apply(&shifted)?.max_abs())
    }
}

/// Annihilation and creation operators `(a, a^dagger)` with `a[m-1, m] = sqrt(m)`.
pub fn make_ladder(n: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    if n < MIN_TRUNCATION {
        return Err(Error::TruncationTooSmall { got: n, min: MIN_TRUNCATION });
    }
    let mut a = DMatrix::zeros(n, n);
    for m in 1..n {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    let a = TruncatedOperator::new(a)?;
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Noncommutative coordinates `(Q, P)` with `[Q, P] = 2 pi i z^2` on the interior.
///
/// `Q = sqrt(pi z^2) (a + a^dagger)`, `P = -i sqrt(pi z^2) (a - a^dagger)`.
pub fn make_qp(n: usize, z2: f64) -> Result<(TruncatedOperator, TruncatedOperator)> {
    if !(z2.is_finite() && z2 > 0.0) {
        return Err(Error::NonPositiveFlux(z2));
    }
    let (a, a_dag) = make_ladder(n)?;
    let s = (PI * z2).sqrt();
    let q = (&a + &a_dag).scale_re(s);
    let p = (&a - &a_dag).scale(C64::new(0.0, -s));
    Ok((q, p))
}

/// Rejects angles outside `[0, pi/2 - guard]`.
pub fn check_angle(theta: f64, guard: f64) -> Result<()> {
    let max = FRAC_PI_2 - guard;
    if !(theta.is_finite() && (0.0..=max).contains(&theta)) || guard.is_nan() || guard <= 0.0 {
        return Err(Error::AngleOutOfRange { theta, max });
    }
    Ok(())
}

/// Coefficients `(c_minus, c_plus)` of `A = c_minus a^dagger + c_plus a`.
///
/// `c_minus = (1 - cos) / sqrt(4 cos)`, `c_plus = (1 + cos) / sqrt(4 cos)`,
/// so that `c_plus^2 - c_minus^2 = 1`.
pub fn bogoliubov_coefficients(theta: f64, guard: f64) -> Result<(f64, f64)> {
    check_angle(theta, guard)?;
    let c = theta.cos();
    let d = (4.0 * c).sqrt();
    Ok(((1.0 - c) / d, (1.0 + c) / d))
}

/// Bogoliubov mode `A` for the default angle guard.
pub fn bogoliubov(n: usize, theta: f64) -> Result<TruncatedOperator> {
    bogoliubov_with_guard(n, theta, DEFAULT_ANGLE_GUARD)
}

pub fn bogoliubov_with_guard(n: usize, theta: f64, guard: f64) -> Result<TruncatedOperator> {
    let (cm, cp) = bogoliubov_coefficients(theta, guard)?;
    let (a, a_dag) = make_ladder(n)?;
    Ok(&a_dag.scale_re(cm) + &a.scale_re(cp))
}

/// `X Y - Y X`.
pub fn commutator(x: &TruncatedOperator, y: &TruncatedOperator) -> Result<TruncatedOperator> {
    x.try_mul(y)?.try_sub(&y.try_mul(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn smallest_ladder() {
        let (a, a_dag) = make_ladder(2).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(a.matrix(), &expect);
        assert_eq!(a_dag.matrix(), &expect.adjoint());
    }

    #[test]
    fn ladder_rejects_n_below_two() {
        assert_eq!(
            make_ladder(1).unwrap_err(),
            Error::TruncationTooSmall { got: 1, min: 2 }
        );
        assert!(make_ladder(0).is_err());
    }

    #[test]
    fn ladder_commutator_n3() {
        let (a, a_dag) = make_ladder(3).unwrap();
        let k = commutator(&a, &a_dag).unwrap();
        let expect = [1.0, 1.0, -2.0];
        for (i, &diag) in expect.iter().enumerate() {
            for j in 0..3 {
                let want = if i == j { diag } else { 0.0 };
                assert!((k.matrix()[(i, j)] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ladder_lowers_level_four_with_amplitude_two() {
        let (a, _) = make_ladder(8).unwrap();
        let mut e4 = nalgebra::DVector::zeros(8);
        e4[4] = c(1.0, 0.0);
        let out = a.matrix() * e4;
        for (i, z) in out.iter().enumerate() {
            let want = if i == 3 { 2.0 } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn qp_hermitian_and_canonical() {
        for n in [3, 8, 17] {
            let (q, p) = make_qp(n, 1.0).unwrap();
            assert_eq!(q.hermiticity_residual(), 0.0);
            assert_eq!(p.hermiticity_residual(), 0.0);
            let k = commutator(&q, &p).unwrap();
            let proj = InteriorProjector::new(n, 1).unwrap();
            let dev = proj.deviation_from_identity(&k, c(0.0, 2.0 * PI)).unwrap();
            assert!(dev <= 1e-12, "n={n} dev={dev}");
        }
    }

    #[test]
    fn qp_corner_n2() {
        let (q, p) = make_qp(2, 1.0).unwrap();
        let k = commutator(&q, &p).unwrap();
        assert!((k.matrix()[(0, 0)] - c(0.0, 2.0 * PI)).norm() < 1e-14);
        assert!((k.matrix()[(1, 1)] - c(0.0, -2.0 * PI)).norm() < 1e-14);
        assert!(k.matrix()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn qp_linear_in_flux() {
        let (q, p) = make_qp(10, 0.25).unwrap();
        let k = commutator(&q, &p).unwrap();
        let proj = InteriorProjector::new(10, 1).unwrap();
        assert!(proj.deviation_from_identity(&k, c(0.0, 0.5 * PI)).unwrap() <= 1e-12);
    }

    #[test]
    fn qp_rejects_bad_flux() {
        assert_eq!(make_qp(4, 0.0).unwrap_err(), Error::NonPositiveFlux(0.0));
        assert!(make_qp(4, -1.0).is_err());
        assert!(make_qp(4, f64::NAN).is_err());
    }

    #[test]
    fn bogoliubov_identity_case() {
        let (a, _) = make_ladder(6).unwrap();
        let big_a = bogoliubov(6, 0.0).unwrap();
        assert!((&big_a - &a).max_abs() < 1e-15);
    }

    #[test]
    fn bogoliubov_coefficients_at_pi_over_3() {
        let (cm, cp) = bogoliubov_coefficients(FRAC_PI_3, DEFAULT_ANGLE_GUARD).unwrap();
        assert!((cm - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((cp - 1.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((cm - 0.35355).abs() < 1e-5 && (cp - 1.06066).abs() < 1e-5);
        assert!((cp * cp - cm * cm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bogoliubov_canonical_on_interior() {
        let big_a = bogoliubov(20, FRAC_PI_3).unwrap();
        let k = commutator(&big_a, &big_a.adjoint()).unwrap();
        let proj = InteriorProjector::new(20, 2).unwrap();
        assert!(proj.deviation_from_identity(&k, c(1.0, 0.0)).unwrap() <= 1e-12);
    }

    #[test]
    fn bogoliubov_angle_guard() {
        assert!(bogoliubov(4, FRAC_PI_2).is_err());
        assert!(bogoliubov(4, -0.1).is_err());
        assert!(bogoliubov(4, FRAC_PI_2 - 2e-3).is_ok());
        assert!(bogoliubov_with_guard(4, FRAC_PI_2 - 2e-3, 1e-2).is_err());
    }

    #[test]
    fn commutator_self_is_zero() {
        let (q, _) = make_qp(5, 1.3).unwrap();
        assert_eq!(commutator(&q, &q).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let (a3, _) = make_ladder(3).unwrap();
        let (a4, _) = make_ladder(4).unwrap();
        assert_eq!(
            commutator(&a3, &a4).unwrap_err(),
            Error::DimensionMismatch { left: 3, right: 4 }
        );
    }

    #[test]
    fn projector_margin_guard() {
        assert!(InteriorProjector::new(4, 4).is_err());
        let p = InteriorProjector::new(4, 1).unwrap();
        assert_eq!(p.levels(), 3);
        assert!(p.keeps(2) && !p.keeps(3));
    }

    #[test]
    fn operator_invariants() {
        assert!(TruncatedOperator::new(DMatrix::zeros(1, 1)).is_err());
        assert!(TruncatedOperator::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(f64::INFINITY, 0.0);
        assert_eq!(TruncatedOperator::new(m).unwrap_err(), Error::NonFinite);
    }
}
