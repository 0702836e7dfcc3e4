//! Tachyon potential, its minimum, and the recombined brane geometry.
//!
//! The tachyon rolls in `V(t) = -4 pi z^2 R cos(theta) t^2 + R t^4` to
//! `t_min = sqrt(2 pi z^2 cos(theta))`. Substituting the condensate into the
//! off-diagonal entries of `X1`, `X2` (with `P1 = P2 = x0`) gives two `2 x 2`
//! Hermitian blocks whose eigenvalues trace out the recombined branes.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::Serialize;

use crate::{sweep, Error, Params, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TachyonPotential {
    /// `-4 pi z^2 R cos(theta)`, energy^2.
    pub quad: f64,
    /// `R`.
    pub quart: f64,
    pub tmin: f64,
    pub vmin: f64,
}

impl TachyonPotential {
    pub fn new(params: &Params) -> Self {
        let (tmin, vmin) = analytic_minimum(params);
        Self {
            quad: -4.0 * PI * params.z2 * params.r * params.theta.cos(),
            quart: params.r,
            tmin,
            vmin,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.quad * t2 + self.quart * t2 * t2
    }

    pub fn derivative(&self, t: f64) -> f64 {
        2.0 * self.quad * t + 4.0 * self.quart * t * t * t
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        2.0 * self.quad + 12.0 * self.quart * t * t
    }

    /// `|V'(t_min)|` relative to the size of either term of `V'`.
    pub fn stationarity_residual(&self) -> f64 {
        let d = self.derivative(self.tmin).abs();
        let scale = (2.0 * self.quad * self.tmin).abs();
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

pub fn potential_value(t: f64, params: &Params) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeAmplitude(t));
    }
    Ok(TachyonPotential::new(params).value(t))
}

/// `(t_min, v_min) = (sqrt(2 pi z^2 cos), -R (2 pi z^2 cos)^2)`.
pub fn analytic_minimum(params: &Params) -> (f64, f64) {
    let w = 2.0 * PI * params.z2 * params.theta.cos();
    (w.sqrt(), -params.r * w * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericMinimum {
    pub tmin: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Golden-section search on `[0, 4 sqrt(2 pi z^2)]` down to width `tol`,
/// followed by one Newton step on the exact derivative.
pub fn numeric_minimum(params: &Params, tol: f64) -> Result<NumericMinimum> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(format!("minimiser tolerance must be positive, got {tol}")));
    }
    let pot = TachyonPotential::new(params);
    let (lo, hi) = (0.0, 4.0 * (2.0 * PI * params.z2).sqrt());
    if hi <= lo {
        return Err(Error::Bracket { lo, hi });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (pot.value(c), pot.value(d));
    let mut iterations = 0;
    while b - a > tol && iterations < 500 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = pot.value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = pot.value(d);
        }
        iterations += 1;
    }
    let mut t = 0.5 * (a + b);
    let edge = tol.max(1e-12 * hi);
    if t - lo <= edge || hi - t <= edge {
        return Err(Error::Bracket { lo, hi });
    }

    let curvature = pot.second_derivative(t);
    if curvature > 0.0 {
        let polished = t - pot.derivative(t) / curvature;
        if (lo..=hi).contains(&polished) && pot.derivative(polished).abs() <= pot.derivative(t).abs() {
            t = polished;
        }
    }
    Ok(NumericMinimum { tmin: t, bracket: (lo, hi), iterations })
}

/// Offset of the condensate in each of `T1`, `T2`: `sqrt(pi z^2 cos(theta))`.
pub fn condensate_offset(params: &Params) -> f64 {
    (PI * params.z2 * params.theta.cos()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedBlocks {
    pub x0: f64,
    /// `[[x0 sin, t], [t, x0 sin]]`.
    pub m1: Matrix2<C64>,
    /// `[[x0 cos, i t], [-i t, -x0 cos]]`.
    pub m2: Matrix2<C64>,
}

pub fn condensed_blocks(x0: f64, params: &Params) -> CondensedBlocks {
    let (s, c) = params.theta.sin_cos();
    let t = std::f64::consts::FRAC_1_SQRT_2 * (2.0 * PI * params.z2 * c).sqrt();
    let re = |x: f64| C64::new(x, 0.0);
    CondensedBlocks {
        x0,
        m1: Matrix2::new(re(x0 * s), re(t), re(t), re(x0 * s)),
        m2: Matrix2::new(re(x0 * c), C64::new(0.0, t), C64::new(0.0, -t), re(-x0 * c)),
    }
}

/// Which sign of the `-/+` pair: `Minus` is `x_d = x0 sin - g`, `y_d = -sqrt(...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Minus => Branch::Plus,
            Branch::Plus => Branch::Minus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPair {
    pub x_minus: f64,
    pub x_plus: f64,
    pub y_minus: f64,
    pub y_plus: f64,
}

impl BranchPair {
    pub fn get(&self, b: Branch) -> (f64, f64) {
        match b {
            Branch::Minus => (self.x_minus, self.y_minus),
            Branch::Plus => (self.x_plus, self.y_plus),
        }
    }

    fn max_diff(&self, o: &Self) -> f64 {
        [
            self.x_minus - o.x_minus,
            self.x_plus - o.x_plus,
            self.y_minus - o.y_minus,
            self.y_plus - o.y_plus,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recombined {
    pub x0: f64,
    pub closed: BranchPair,
    pub numeric: BranchPair,
    /// `max |numeric - closed|` over the four eigenvalues.
    pub agreement: f64,
}

/// `x_d = x0 sin -/+ g`, `y_d = -/+ sqrt(x0^2 cos^2 + g^2)` with `g^2 = pi z^2 cos`.
pub fn closed_form_eigenvalues(x0: f64, params: &Params) -> BranchPair {
    let (s, c) = params.theta.sin_cos();
    let g = condensate_offset(params);
    let y = (x0 * x0 * c * c + g * g).sqrt();
    BranchPair { x_minus: x0 * s - g, x_plus: x0 * s + g, y_minus: -y, y_plus: y }
}

struct Eigen2 {
    values: [f64; 2],
    vectors: [[C64; 2]; 2],
}

fn eigen2(m: &Matrix2<C64>) -> Eigen2 {
    let e = SymmetricEigen::new(*m);
    let (i, j) = if e.eigenvalues[0] <= e.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let col = |k: usize| [e.eigenvectors[(0, k)], e.eigenvectors[(1, k)]];
    Eigen2 { values: [e.eigenvalues[i], e.eigenvalues[j]], vectors: [col(i), col(j)] }
}

pub fn recombined_eigenvalues(x0: f64, params: &Params) -> Recombined {
    let blocks = condensed_blocks(x0, params);
    let ex = eigen2(&blocks.m1);
    let ey = eigen2(&blocks.m2);
    let numeric = BranchPair {
        x_minus: ex.values[0],
        x_plus: ex.values[1],
        y_minus: ey.values[0],
        y_plus: ey.values[1],
    };
    let closed = closed_form_eigenvalues(x0, params);
    Recombined { x0, closed, numeric, agreement: numeric.max_diff(&closed) }
}

/// `|(x_d - b g)^2 - tan^2(theta) (y_d^2 - g^2)|` for branch sign `b`.
///
/// The shift on the left removes the branch's own offset, so a matched pair
/// gives zero (both sides equal `x0^2 sin^2`); feeding a point with the other
/// branch's sign leaves a residual of `4 g |x0 sin|` or more.
pub fn hyperbola_residual(x_d: f64, y_d: f64, params: &Params, branch: Branch) -> f64 {
    let (s, c) = params.theta.sin_cos();
    let g = condensate_offset(params);
    let lhs = (x_d - branch.sign() * g).powi(2);
    let rhs = (s * s) / (c * c) * (y_d * y_d - g * g);
    (lhs - rhs).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x0: f64,
    pub branch: Branch,
    pub x_d: f64,
    pub y_d: f64,
    pub hyperbola_residual: f64,
    /// Largest difference between the eigensolve and the closed forms at this point.
    pub closed_form_error: f64,
}

/// Original brane `x_d = x0 sin`, `y_d = sign * x0 cos`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptotePoint {
    pub x0: f64,
    pub sign: Branch,
    pub x_d: f64,
    pub y_d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecombinationCurve {
    pub params: Params,
    pub points: Vec<CurvePoint>,
    pub asymptotes: Vec<AsymptotePoint>,
}

impl RecombinationCurve {
    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| p.branch == b)
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.hyperbola_residual).fold(0.0, f64::max)
    }

    /// `max residual / max(1, x0^2)`.
    pub fn max_scaled_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.hyperbola_residual / p.x0.powi(2).max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn max_closed_form_error(&self) -> f64 {
        self.points.iter().map(|p| p.closed_form_error).fold(0.0, f64::max)
    }

    /// `min |x_d^b(x0) + x_d^b(-x0)|` over branches and grid points whose mirror
    /// `-x0` is also on the grid. Zero means the curve is symmetric under
    /// `x_d -> -x_d` combined with `x0 -> -x0`.
    pub fn asymmetry_gap(&self) -> Option<f64> {
        let mut gap: Option<f64> = None;
        for p in &self.points {
            let tol = 1e-12 * p.x0.abs().max(1.0);
            let mirror = self
                .points
                .iter()
                .find(|q| q.branch == p.branch && (q.x0 + p.x0).abs() <= tol);
            if let Some(q) = mirror {
                let g = (p.x_d + q.x_d).abs();
                gap = Some(gap.map_or(g, |m| m.min(g)));
            }
        }
        gap
    }

    /// Largest distance (in `x_d`, `y_d`) between a branch point and the
    /// original brane with the same `x0` and `y_d` sign.
    pub fn max_asymptote_distance(&self) -> f64 {
        let (s, c) = self.params.theta.sin_cos();
        self.points
            .iter()
            .map(|p| {
                let sign = p.y_d.signum();
                let dx = p.x_d - p.x0 * s;
                let dy = p.y_d - sign * (p.x0 * c).abs();
                dx.abs().max(dy.abs())
            })
            .fold(0.0, f64::max)
    }
}

fn overlap(a: &[C64; 2], b: &[C64; 2]) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm()
}

/// Samples both branches on a uniform `x0` grid.
///
/// Branches are followed by eigenvector continuity along the grid: the branch
/// that starts on the lower eigenvalue of each block at `x0_min` keeps the
/// eigenvector with the largest overlap at every next point. `x_d` and `y_d`
/// branches are paired minus-with-minus.
pub fn sample_curve(x0_min: f64, x0_max: f64, n_points: usize, params: &Params) -> Result<RecombinationCurve> {
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
    }
    if !(x0_min.is_finite() && x0_max.is_finite() && x0_min < x0_max) {
        return Err(Error::InvalidGrid(format!("x0 range [{x0_min}, {x0_max}] is empty")));
    }
    let step = (x0_max - x0_min) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| if i + 1 == n_points { x0_max } else { x0_min + step * i as f64 })
        .collect();

    let solved: Vec<(Eigen2, Eigen2)> = sweep::map(&grid, |&x0| {
        let b = condensed_blocks(x0, params);
        (eigen2(&b.m1), eigen2(&b.m2))
    });

    let s = params.theta.sin_cos();
    let mut points = Vec::with_capacity(2 * n_points);
    let mut asymptotes = Vec::with_capacity(2 * n_points);
    // index of the minus-branch eigenpair in each block at the previous point
    let mut prev: Option<([C64; 2], [C64; 2])> = None;
    for (x0, (ex, ey)) in grid.iter().copied().zip(&solved) {
        let pick = |e: &Eigen2, prev_vec: Option<&[C64; 2]>| match prev_vec {
            None => 0,
            Some(v) => {
                if overlap(v, &e.vectors[0]) >= overlap(v, &e.vectors[1]) {
                    0
                } else {
                    1
                }
            }
        };
        let ix = pick(ex, prev.as_ref().map(|p| &p.0));
        let iy = pick(ey, prev.as_ref().map(|p| &p.1));
        prev = Some((ex.vectors[ix], ey.vectors[iy]));

        let closed = closed_form_eigenvalues(x0, params);
        for branch in [Branch::Minus, Branch::Plus] {
            let (kx, ky) = match branch {
                Branch::Minus => (ix, iy),
                Branch::Plus => (1 - ix, 1 - iy),
            };
            let (x_d, y_d) = (ex.values[kx], ey.values[ky]);
            let (cx, cy) = closed.get(branch);
            points.push(CurvePoint {
                x0,
                branch,
                x_d,
                y_d,
                hyperbola_residual: hyperbola_residual(x_d, y_d, params, branch),
                closed_form_error: (x_d - cx).abs().max((y_d - cy).abs()),
            });
        }
        for sign in [Branch::Minus, Branch::Plus] {
            asymptotes.push(AsymptotePoint { x0, sign, x_d: x0 * s.0, y_d: sign.sign() * x0 * s.1 });
        }
    }
    Ok(RecombinationCurve { params: *params, points, asymptotes })
}
