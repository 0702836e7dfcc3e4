//! Quadratic mass operator of the off-diagonal fluctuations.
//!
//! The operator is assembled two independent ways:
//!
//! * in the `T` basis from the relative coordinates `Q`, `P`
//!   ([`build_mass_operator_qp`]);
//! * in the rotated `T~ = U T` basis from the Bogoliubov mode `A`
//!   ([`build_mass_operator_fock`]).
//!
//! Conjugating the first by `U (x) I` reproduces the second on the interior.
//! The numeric eigensystem of either is reconciled with the closed-form tower
//! in [`numeric`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use crate::background::BraneBackground;
use crate::oscillator::{bogoliubov, InteriorProjector, TruncatedOperator};
use crate::{linalg, Params, Result, C64};

pub mod numeric;

pub use numeric::{
    analyse, compare_scaled, compare_with_analytic, numeric_spectrum, numeric_spectrum_with,
    transverse_numeric_check, NumericEigen, NumericSpectrum, ScaledComparison, SpectrumAnalysis,
    SpectrumMatch, SpectrumSettings, TransverseCheck, TrustWindow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    /// `(T1, T2, T3) (x) Fock` ordering.
    T,
    /// `(T~1, T~2, T~3) (x) Fock` ordering.
    TTilde,
}

/// `3N x 3N` Hermitian mass operator, block-ordered by field component.
#[derive(Debug, Clone)]
pub struct MassOperator {
    pub basis: Basis,
    pub params: Params,
    /// Fock levels per field component.
    pub n: usize,
    pub matrix: DMatrix<C64>,
    /// `4 pi z^2 R cos(theta)`.
    pub scale: f64,
}

impl MassOperator {
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn block(&self, row: usize, col: usize) -> DMatrix<C64> {
        let n = self.n;
        self.matrix.view((row * n, col * n), (n, n)).into_owned()
    }
}

/// Basis rotation `T~ = U T`.
pub fn rotation_u() -> Matrix3<C64> {
    let h = FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    Matrix3::new(
        C64::new(h, 0.0),
        C64::new(0.0, -h),
        z,
        C64::new(-h, 0.0),
        C64::new(0.0, -h),
        z,
        z,
        z,
        C64::new(1.0, 0.0),
    )
}

/// `(U (x) I) M (U (x) I)^dagger` for a matrix made of `3 x 3` blocks of size `n`.
pub fn rotate_blocks(u: &Matrix3<C64>, m: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = DMatrix::<C64>::zeros(n, n);
            for c in 0..3 {
                for d in 0..3 {
                    let w = u[(a, c)] * u[(b, d)].conj();
                    if w.norm() == 0.0 {
                        continue;
                    }
                    acc += m.view((c * n, d * n), (n, n)) * w;
                }
            }
            out.view_mut((a * n, b * n), (n, n)).copy_from(&acc);
        }
    }
    out
}

fn assemble(blocks: [[Option<DMatrix<C64>>; 3]; 3], n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    for (r, row) in blocks.iter().enumerate() {
        for (c, b) in row.iter().enumerate() {
            if let Some(b) = b {
                out.view_mut((r * n, c * n), (n, n)).copy_from(b);
            }
        }
    }
    out
}

/// Mass operator in the `T` basis from the relative coordinates.
///
/// With `c = cos(theta)` and `h = 2 pi z^2` (`[Q, P] = i h`):
///
/// ```text
/// 2R [ c^2 P^2          -c (PQ - i h)   0              ]
///    [ -c (QP + i h)    Q^2             0              ]
///    [ 0                0               c^2 P^2 + Q^2  ]
/// ```
///
/// The overall 2 counts both off-diagonal blocks of `A_i` in the trace. At
/// `theta = 0` this is the membrane/anti-membrane operator. The off-diagonal
/// entries carry a single power of `cos(theta)`; that is what makes the
/// operator unitarily equivalent to the rotated one at every angle.
pub fn build_mass_operator_qp(bg: &BraneBackground) -> Result<MassOperator> {
    let params = bg.params();
    let n = bg.n();
    let c = params.theta.cos();
    let h = 2.0 * PI * params.z2;
    let two_r = 2.0 * params.r;
    let p = bg.p_rel().matrix();
    let q = bg.q_rel().matrix();
    let ih = DMatrix::<C64>::identity(n, n) * C64::new(0.0, h);

    let p2 = p * p;
    let q2 = q * q;
    let m11 = &p2 * C64::new(two_r * c * c, 0.0);
    let m12 = (p * q - &ih) * C64::new(-two_r * c, 0.0);
    let m21 = (q * p + &ih) * C64::new(-two_r * c, 0.0);
    let m22 = &q2 * C64::new(two_r, 0.0);
    let m33 = (&p2 * C64::new(c * c, 0.0) + &q2) * C64::new(two_r, 0.0);

    let matrix = assemble(
        [[Some(m11), Some(m12), None], [Some(m21), Some(m22), None], [None, None, Some(m33)]],
        n,
    );
    Ok(MassOperator { basis: Basis::T, params, n, matrix, scale: params.mass_scale() })
}

/// Mass operator in the rotated basis from the Bogoliubov mode:
///
/// ```text
/// 4 pi z^2 R cos(theta) [ A^dag A - 1   A^dag A^dag   0             ]
///                       [ A A           A^dag A + 2   0             ]
///                       [ 0             0             2 A^dag A + 1 ]
/// ```
pub fn build_mass_operator_fock(bg: &BraneBackground) -> Result<MassOperator> {
    let params = bg.params();
    let n = bg.n();
    let scale = params.mass_scale();
    let a = bogoliubov(n, params.theta)?;
    let a_dag = a.adjoint();
    let number = &a_dag * &a;
    let k = C64::new(scale, 0.0);
    let one = C64::new(1.0, 0.0);

    let m11 = number.shift(-one).scale(k).into_matrix();
    let m12 = (&a_dag * &a_dag).scale(k).into_matrix();
    let m21 = (&a * &a).scale(k).into_matrix();
    let m22 = number.shift(one * 2.0).scale(k).into_matrix();
    let m33 = number.scale_re(2.0).shift(one).scale(k).into_matrix();

    let matrix = assemble(
        [[Some(m11), Some(m12), None], [Some(m21), Some(m22), None], [None, None, Some(m33)]],
        n,
    );
    Ok(MassOperator { basis: Basis::TTilde, params, n, matrix, scale })
}

/// `max |(U (x) Pi) M_qp (U (x) Pi)^dagger - Pi M_fock Pi| / scale`.
pub fn route_residual(qp: &MassOperator, fock: &MassOperator, margin: usize) -> Result<f64> {
    let n = qp.n;
    if fock.n != n {
        return Err(crate::Error::DimensionMismatch { left: n, right: fock.n });
    }
    let proj = InteriorProjector::new(n, margin)?;
    let rotated = rotate_blocks(&rotation_u(), &qp.matrix, n);
    let mut worst: f64 = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            for i in 0..proj.levels() {
                for j in 0..proj.levels() {
                    let (ri, cj) = (r * n + i, c * n + j);
                    worst = worst.max((rotated[(ri, cj)] - fock.matrix[(ri, cj)]).norm());
                }
            }
        }
    }
    Ok(worst / qp.scale.abs())
}

/// Per-level reduced matrix in units of `4 pi R z^2 cos(theta)` acting on the
/// coefficients of `(alpha L_n, beta L_{n-2}, gamma L_{n-1})`.
///
/// Rows and columns of basis functions with negative index are dropped, so
/// `n = 0` gives a `1 x 1` matrix (alpha only) and `n = 1` a `2 x 2` one
/// (alpha, gamma).
pub fn reduced_block_units(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    match n {
        0 => DMatrix::from_element(1, 1, -1.0),
        1 => DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        _ => {
            let off = (nf * (nf - 1.0)).sqrt();
            DMatrix::from_row_slice(
                3,
                3,
                &[nf - 1.0, off, 0.0, off, nf, 0.0, 0.0, 0.0, 2.0 * nf - 1.0],
            )
        }
    }
}

/// [`reduced_block_units`] in energy^2.
pub fn reduced_block(n: usize, params: &Params) -> DMatrix<f64> {
    reduced_block_units(n) * params.mass_scale()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    OffdiagTachyon,
    OffdiagZero,
    OffdiagMassive,
    Transverse,
    Fermion,
}

impl Sector {
    pub fn label(self) -> &'static str {
        match self {
            Sector::OffdiagTachyon => "offdiag-tachyon",
            Sector::OffdiagZero => "offdiag-zero",
            Sector::OffdiagMassive => "offdiag-massive",
            Sector::Transverse => "transverse",
            Sector::Fermion => "fermion",
        }
    }
}

/// One spectral line.
///
/// `eigenvalue_units` is in units of `4 pi z^2 R cos(theta)`, `eigenvalue_raw`
/// in energy^2, and `eigenvalue_bare = eigenvalue_units * cos(theta)`, the
/// value in units of `4 pi z^2 R` (how the transverse and fermion lines are
/// conventionally quoted).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRecord {
    pub sector: Sector,
    pub n: usize,
    pub eigenvalue_units: f64,
    pub eigenvalue_raw: f64,
    pub eigenvalue_bare: f64,
    pub multiplicity: usize,
    /// `(alpha, beta, gamma)` eigenvectors of the reduced block, when defined.
    pub coefficients: Vec<[f64; 3]>,
    /// Confirmed by trusted numeric eigenvalues with full multiplicity.
    pub trusted: bool,
}

impl ModeRecord {
    fn new(sector: Sector, n: usize, units: f64, multiplicity: usize, params: &Params) -> Self {
        Self {
            sector,
            n,
            eigenvalue_units: units,
            eigenvalue_raw: units * params.mass_scale(),
            eigenvalue_bare: units * params.theta.cos(),
            multiplicity,
            coefficients: Vec::new(),
            trusted: false,
        }
    }

    fn with_coefficients(mut self, v: Vec<[f64; 3]>) -> Self {
        self.coefficients = v;
        self
    }
}

/// Closed-form off-diagonal tower for `n = 0..=n_max`.
pub fn analytic_spectrum(n_max: usize, params: &Params) -> Vec<ModeRecord> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        let nf = n as f64;
        match n {
            0 => out.push(
                ModeRecord::new(Sector::OffdiagTachyon, 0, -1.0, 1, params)
                    .with_coefficients(vec![[1.0, 0.0, 0.0]]),
            ),
            1 => {
                out.push(
                    ModeRecord::new(Sector::OffdiagZero, 1, 0.0, 1, params)
                        .with_coefficients(vec![[1.0, 0.0, 0.0]]),
                );
                out.push(
                    ModeRecord::new(Sector::OffdiagMassive, 1, 1.0, 1, params)
                        .with_coefficients(vec![[0.0, 0.0, 1.0]]),
                );
            }
            _ => {
                out.push(
                    ModeRecord::new(Sector::OffdiagZero, n, 0.0, 1, params)
                        .with_coefficients(vec![[-nf.sqrt(), (nf - 1.0).sqrt(), 0.0]]),
                );
                out.push(
                    ModeRecord::new(Sector::OffdiagMassive, n, 2.0 * nf - 1.0, 2, params)
                        .with_coefficients(vec![
                            [0.0, 0.0, nf.sqrt()],
                            [(nf * (nf - 1.0)).sqrt(), nf, 0.0],
                        ]),
                );
            }
        }
    }
    out
}

/// The six transverse bosons: `(2n + 1)` in units, multiplicity 6.
pub fn transverse_spectrum(n_max: usize, params: &Params) -> Vec<ModeRecord> {
    (0..=n_max)
        .map(|n| ModeRecord::new(Sector::Transverse, n, 2.0 * n as f64 + 1.0, 6, params))
        .collect()
}

/// Fermion table: `(2n + 2)` and `2n` in units, four states each. No operator
/// is built for this sector.
pub fn fermion_spectrum(n_max: usize, params: &Params) -> Vec<ModeRecord> {
    (0..=n_max)
        .flat_map(|n| {
            let nf = n as f64;
            [
                ModeRecord::new(Sector::Fermion, n, 2.0 * nf + 2.0, 4, params),
                ModeRecord::new(Sector::Fermion, n, 2.0 * nf, 4, params),
            ]
        })
        .collect()
}

/// `cos(theta) (2 A^dagger A + 1)`, the transverse operator in units of `4 pi z^2 R`.
pub fn transverse_operator(n: usize, theta: f64) -> Result<TruncatedOperator> {
    let a = bogoliubov(n, theta)?;
    let number = &a.adjoint() * &a;
    Ok(number.scale_re(2.0).shift(C64::new(1.0, 0.0)).scale_re(theta.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::build_background;
    use crate::linalg::hermitian_eigen;
    use std::f64::consts::{FRAC_PI_3, SQRT_2};

    fn bg(theta: f64, n: usize) -> BraneBackground {
        build_background(Params::new(theta, 1.0, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn rotation_is_unitary() {
        let u = rotation_u();
        let d = u * u.adjoint() - Matrix3::identity();
        assert!(d.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rotation_columns() {
        let u = rotation_u();
        let t = u * nalgebra::Vector3::new(C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.));
        assert!((t[0] - C64::new(1.0 / SQRT_2, 0.0)).norm() < 1e-15);
        assert!((t[1] - C64::new(-1.0 / SQRT_2, 0.0)).norm() < 1e-15);
        assert_eq!(t[2], C64::new(0.0, 0.0));
        let t = u * nalgebra::Vector3::new(C64::new(0., 0.), C64::new(0., 0.), C64::new(1., 0.));
        assert_eq!(t, nalgebra::Vector3::new(C64::new(0., 0.), C64::new(0., 0.), C64::new(1., 0.)));
    }

    #[test]
    fn operators_are_hermitian() {
        for theta in [0.0, 0.5, FRAC_PI_3, 1.2] {
            let b = bg(theta, 12);
            for m in [build_mass_operator_qp(&b).unwrap(), build_mass_operator_fock(&b).unwrap()] {
                assert!(m.hermiticity_residual() <= 1e-12 * m.scale, "{theta} {:?}", m.basis);
            }
        }
    }

    #[test]
    fn qp_at_zero_angle_has_membrane_antimembrane_blocks() {
        let b = bg(0.0, 8);
        let m = build_mass_operator_qp(&b).unwrap();
        let p = b.p_rel().matrix();
        let q = b.q_rel().matrix();
        let ih = DMatrix::<C64>::identity(8, 8) * C64::new(0.0, 2.0 * PI);
        let want12 = -(p * q - ih) * C64::new(2.0, 0.0);
        assert!(linalg::max_abs(&(m.block(0, 1) - want12)) < 1e-12);
        assert!(linalg::max_abs(&(m.block(0, 0) - p * p * C64::new(2.0, 0.0))) < 1e-12);
        assert!(linalg::max_abs(&(m.block(1, 1) - q * q * C64::new(2.0, 0.0))) < 1e-12);
    }

    #[test]
    fn fock_at_zero_angle_is_number_operator() {
        let m = build_mass_operator_fock(&bg(0.0, 10)).unwrap();
        let b = m.block(0, 0) / C64::new(m.scale, 0.0);
        for i in 0..9 {
            assert!((b[(i, i)] - C64::new(i as f64 - 1.0, 0.0)).norm() < 1e-14);
        }
        assert!((m.scale - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn scale_at_pi_over_3() {
        let m = build_mass_operator_fock(&bg(FRAC_PI_3, 6)).unwrap();
        assert!((m.scale - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn routes_agree_on_interior() {
        for theta in [0.0, 0.3, FRAC_PI_3, 1.1, 1.5] {
            let b = bg(theta, 14);
            let qp = build_mass_operator_qp(&b).unwrap();
            let fock = build_mass_operator_fock(&b).unwrap();
            let r = route_residual(&qp, &fock, 2).unwrap();
            assert!(r <= 1e-10, "theta={theta} residual={r}");
        }
    }

    #[test]
    fn qp_lowest_interior_eigenvalue_is_tachyon() {
        // closed form -4 pi z^2 R cos(pi/3) = -2 pi
        let m = build_mass_operator_qp(&bg(FRAC_PI_3, 16)).unwrap();
        let (w, _) = hermitian_eigen(&m.matrix).unwrap();
        assert!((w[0] + 2.0 * PI).abs() <= 1e-6, "{}", w[0]);
    }

    #[test]
    fn reduced_block_small_levels() {
        assert_eq!(reduced_block_units(0), DMatrix::from_element(1, 1, -1.0));
        let (w, _) = hermitian_eigen(&reduced_block_units(1).map(|x| C64::new(x, 0.0))).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
        let m2 = reduced_block_units(2);
        assert!((m2[(0, 1)] - SQRT_2).abs() < 1e-15);
        let (w, _) = hermitian_eigen(&m2.map(|x| C64::new(x, 0.0))).unwrap();
        assert!(w[0].abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14 && (w[2] - 3.0).abs() < 1e-14);
        let p = Params::new(FRAC_PI_3, 1.0, 1.0).unwrap();
        assert!((reduced_block(0, &p)[(0, 0)] + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn analytic_levels() {
        let p = Params::new(FRAC_PI_3, 1.0, 1.0).unwrap();
        let s = analytic_spectrum(3, &p);
        assert_eq!(s[0].sector, Sector::OffdiagTachyon);
        assert_eq!(s[0].eigenvalue_units, -1.0);
        assert!((s[0].eigenvalue_raw + 2.0 * PI).abs() < 1e-14);
        let n3: Vec<_> = s.iter().filter(|r| r.n == 3).collect();
        assert_eq!(n3.len(), 2);
        assert_eq!((n3[0].eigenvalue_units, n3[0].multiplicity), (0.0, 1));
        assert_eq!((n3[1].eigenvalue_units, n3[1].multiplicity), (5.0, 2));
        let n1: Vec<_> = s.iter().filter(|r| r.n == 1).map(|r| r.eigenvalue_units).collect();
        assert_eq!(n1, vec![0.0, 1.0]);
    }

    #[test]
    fn analytic_eigenvectors_solve_reduced_block() {
        let p = Params::new(0.4, 1.0, 1.0).unwrap();
        for rec in analytic_spectrum(12, &p).iter().filter(|r| r.n >= 2) {
            let m = reduced_block_units(rec.n);
            for v in &rec.coefficients {
                let v = nalgebra::Vector3::from_row_slice(v);
                let mv = &m * v;
                let res = (mv - v * rec.eigenvalue_units).amax();
                assert!(res <= 1e-12, "n={} res={res}", rec.n);
            }
        }
    }

    #[test]
    fn transverse_and_fermion_tables() {
        let p0 = Params::new(0.0, 1.0, 1.0).unwrap();
        let p3 = Params::new(FRAC_PI_3, 1.0, 1.0).unwrap();
        let t = transverse_spectrum(2, &p0);
        assert_eq!(t[0].eigenvalue_bare, 1.0);
        assert_eq!(t[0].multiplicity, 6);
        assert!((transverse_spectrum(2, &p3)[2].eigenvalue_bare - 2.5).abs() < 1e-15);

        let f = fermion_spectrum(1, &p3);
        assert!((f[2].eigenvalue_bare - 2.0).abs() < 1e-15 && f[2].multiplicity == 4);
        assert!((f[3].eigenvalue_bare - 1.0).abs() < 1e-15 && f[3].multiplicity == 4);
        let f0 = fermion_spectrum(0, &p0);
        assert_eq!(f0.len(), 2);
        assert_eq!(f0[0].eigenvalue_bare, 2.0);
        assert_eq!((f0[1].eigenvalue_bare, f0[1].multiplicity), (0.0, 4));
    }
}
