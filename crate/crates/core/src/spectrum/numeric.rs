//! Numeric eigensystem of the mass operator, trust flags, and reconciliation
//! with the closed-form tower.
//!
//! An eigenpair is trusted when its eigenvector keeps at most
//! `TrustWindow::weight` of its squared norm on the top `margin` Fock levels of
//! every field block. Degenerate eigenvalues come back from the solver in an
//! arbitrary basis of their eigenspace, so within a cluster the weights are the
//! eigenvalues of the top-level weight matrix restricted to that subspace.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{
    analytic_spectrum, build_mass_operator_fock, build_mass_operator_qp, fermion_spectrum,
    route_residual, transverse_operator, transverse_spectrum, MassOperator, ModeRecord,
};
use crate::background::build_background;
use crate::linalg::hermitian_eigen;
use crate::{Params, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustWindow {
    /// Maximum squared-norm fraction allowed on the excluded top levels.
    pub weight: f64,
    /// Eigenvalues closer than `cluster * scale` are treated as one cluster.
    pub cluster: f64,
}

impl Default for TrustWindow {
    fn default() -> Self {
        Self { weight: 1e-6, cluster: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericEigen {
    pub value_raw: f64,
    pub value_units: f64,
    pub top_weight: f64,
    pub trusted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericSpectrum {
    pub params: Params,
    pub n: usize,
    pub margin: usize,
    pub scale: f64,
    pub window: TrustWindow,
    pub eigen: Vec<NumericEigen>,
}

impl NumericSpectrum {
    pub fn trusted(&self) -> impl Iterator<Item = &NumericEigen> {
        self.eigen.iter().filter(|e| e.trusted)
    }

    pub fn trusted_units(&self) -> Vec<f64> {
        self.trusted().map(|e| e.value_units).collect()
    }

    pub fn trusted_raw(&self) -> Vec<f64> {
        self.trusted().map(|e| e.value_raw).collect()
    }
}

/// Eigendecomposition of a matrix built from `blocks` field blocks of `n`
/// Fock levels each, with trust weights on the top `margin` levels of each block.
fn eigen_with_trust(
    matrix: &DMatrix<C64>,
    n: usize,
    blocks: usize,
    margin: usize,
    window: TrustWindow,
    scale: f64,
) -> Result<Vec<NumericEigen>> {
    let (values, vectors) = hermitian_eigen(matrix)?;
    let top: Vec<usize> = (0..blocks)
        .flat_map(|b| (n.saturating_sub(margin)..n).map(move |l| b * n + l))
        .collect();
    let tol = window.cluster * scale.abs();

    let mut out = Vec::with_capacity(values.len());
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let m = end - start;
        // W_ab = sum_{top rows} conj(v_ra) v_rb over the cluster columns
        let w = DMatrix::from_fn(m, m, |a, b| {
            top.iter()
                .map(|&r| vectors[(r, start + a)].conj() * vectors[(r, start + b)])
                .sum::<C64>()
        });
        let weights = if m == 1 {
            vec![w[(0, 0)].re]
        } else {
            hermitian_eigen(&w)?.0
        };
        for (k, &value) in values[start..end].iter().enumerate() {
            let top_weight = weights[k].max(0.0);
            out.push(NumericEigen {
                value_raw: value,
                value_units: value / scale,
                top_weight,
                trusted: top_weight <= window.weight,
            });
        }
        start = end;
    }
    Ok(out)
}

pub fn numeric_spectrum(m: &MassOperator, margin: usize) -> Result<NumericSpectrum> {
    numeric_spectrum_with(m, margin, TrustWindow::default())
}

pub fn numeric_spectrum_with(
    m: &MassOperator,
    margin: usize,
    window: TrustWindow,
) -> Result<NumericSpectrum> {
    crate::oscillator::InteriorProjector::new(m.n, margin)?;
    let eigen = eigen_with_trust(&m.matrix, m.n, 3, margin, window, m.scale)?;
    Ok(NumericSpectrum { params: m.params, n: m.n, margin, scale: m.scale, window, eigen })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCount {
    pub value_units: f64,
    pub predicted: usize,
    pub trusted: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumMatch {
    pub levels: Vec<LevelCount>,
    /// Trusted eigenvalues (units) with no closed-form partner within tolerance.
    pub unmatched: Vec<f64>,
    /// Levels (units) whose trusted count exceeds the predicted multiplicity.
    pub over_counted: Vec<f64>,
    pub trusted_negative: Vec<f64>,
    pub max_error_units: f64,
    /// Largest `n` such that every level up to `n` is trusted with full multiplicity.
    pub horizon: Option<usize>,
    pub passed: bool,
}

impl SpectrumMatch {
    pub fn count(&self, value_units: f64) -> usize {
        self.levels
            .iter()
            .find(|l| l.value_units == value_units)
            .map_or(0, |l| l.trusted)
    }
}

/// Multiset comparison of the trusted eigenvalues against the closed-form
/// tower, `tol_units` in units of `4 pi z^2 R cos(theta)`.
pub fn compare_with_analytic(ns: &NumericSpectrum, tol_units: f64) -> SpectrumMatch {
    // every level reachable inside the truncation
    let mut predicted: BTreeMap<i64, usize> = BTreeMap::new();
    for rec in analytic_spectrum(ns.n, &ns.params) {
        *predicted.entry(rec.eigenvalue_units as i64).or_default() += rec.multiplicity;
    }
    let mut found: BTreeMap<i64, usize> = predicted.keys().map(|&k| (k, 0)).collect();

    let mut unmatched = Vec::new();
    let mut max_error_units: f64 = 0.0;
    for x in ns.trusted_units() {
        let nearest = predicted
            .keys()
            .copied()
            .min_by(|&a, &b| (x - a as f64).abs().total_cmp(&(x - b as f64).abs()))
            .expect("tower is never empty");
        let err = (x - nearest as f64).abs();
        if err <= tol_units {
            *found.get_mut(&nearest).unwrap() += 1;
            max_error_units = max_error_units.max(err);
        } else {
            unmatched.push(x);
        }
    }

    let levels: Vec<LevelCount> = predicted
        .iter()
        .map(|(&v, &p)| LevelCount { value_units: v as f64, predicted: p, trusted: found[&v] })
        .collect();
    let over_counted: Vec<f64> = levels
        .iter()
        .filter(|l| l.trusted > l.predicted)
        .map(|l| l.value_units)
        .collect();
    let trusted_negative: Vec<f64> = ns.trusted_units().into_iter().filter(|&x| x < -tol_units).collect();

    let count = |v: i64| found.get(&v).copied().unwrap_or(0);
    let horizon = if count(-1) == 1 {
        let mut h = 0;
        for n in 1..=ns.n {
            let want = if n == 1 { 1 } else { 2 };
            if count(2 * n as i64 - 1) == want && count(0) >= n {
                h = n;
            } else {
                break;
            }
        }
        Some(h)
    } else {
        None
    };

    let passed = unmatched.is_empty()
        && over_counted.is_empty()
        && trusted_negative.len() == 1
        && count(-1) == 1;
    SpectrumMatch {
        levels,
        unmatched,
        over_counted,
        trusted_negative,
        max_error_units,
        horizon,
        passed,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledComparison {
    pub cos_theta: f64,
    pub compared: usize,
    pub unmatched: usize,
    /// `max |l_theta - cos * l_0| / max(|cos * l_0|, scale_theta)`.
    pub max_rel_error: f64,
}

/// Checks that every trusted eigenvalue at `theta` is `cos(theta)` times a
/// distinct trusted eigenvalue at `theta = 0` (same `z^2`, `R`, `N`).
pub fn compare_scaled(at_theta: &NumericSpectrum, at_zero: &NumericSpectrum) -> ScaledComparison {
    let cos = at_theta.params.theta.cos();
    let mut targets: Vec<(f64, bool)> = at_zero.trusted_raw().into_iter().map(|x| (x * cos, false)).collect();
    let floor = at_theta.scale.abs();
    let mut unmatched = 0;
    let mut max_rel_error: f64 = 0.0;
    let values = at_theta.trusted_raw();
    for &x in &values {
        let best = targets
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.1)
            .min_by(|a, b| (x - a.1 .0).abs().total_cmp(&(x - b.1 .0).abs()))
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                let t = targets[i].0;
                targets[i].1 = true;
                max_rel_error = max_rel_error.max((x - t).abs() / t.abs().max(floor));
            }
            None => unmatched += 1,
        }
    }
    ScaledComparison { cos_theta: cos, compared: values.len(), unmatched, max_rel_error }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseLine {
    pub n: usize,
    /// Numeric eigenvalue of `cos(theta)(2 A^dagger A + 1)`.
    pub numeric_bare: f64,
    pub analytic_bare: f64,
    pub top_weight: f64,
    pub trusted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransverseCheck {
    pub lines: Vec<TransverseLine>,
    /// Over trusted lines, in units of `4 pi z^2 R`.
    pub max_error: f64,
    pub passed: bool,
}

/// Diagonalises `cos(theta)(2 A^dagger A + 1)` on `n` levels and compares the
/// trusted eigenvalues with `(2n + 1) cos(theta)` at tolerance `tol` (same units).
pub fn transverse_numeric_check(
    n: usize,
    theta: f64,
    margin: usize,
    window: TrustWindow,
    tol: f64,
) -> Result<TransverseCheck> {
    crate::oscillator::InteriorProjector::new(n, margin)?;
    let op = transverse_operator(n, theta)?;
    let cos = theta.cos();
    let eigen = eigen_with_trust(op.matrix(), n, 1, margin, window, cos)?;
    let lines: Vec<TransverseLine> = eigen
        .iter()
        .map(|e| {
            let level = ((e.value_raw / cos - 1.0) / 2.0).round().max(0.0) as usize;
            TransverseLine {
                n: level,
                numeric_bare: e.value_raw,
                analytic_bare: (2.0 * level as f64 + 1.0) * cos,
                top_weight: e.top_weight,
                trusted: e.trusted,
            }
        })
        .collect();
    let max_error = lines
        .iter()
        .filter(|l| l.trusted)
        .map(|l| (l.numeric_bare - l.analytic_bare).abs())
        .fold(0.0, f64::max);
    let any = lines.iter().any(|l| l.trusted);
    Ok(TransverseCheck { lines, max_error, passed: any && max_error <= tol })
}

/// Settings for a full spectrum analysis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumSettings {
    pub n: usize,
    pub margin: usize,
    pub n_max: usize,
    pub window: TrustWindow,
    /// Eigenvalue agreement in units of the mass scale.
    pub eigen_tol: f64,
    /// Route equivalence, relative to the mass scale.
    pub route_tol: f64,
    pub route_margin: usize,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            n: 24,
            margin: 4,
            n_max: 8,
            window: TrustWindow::default(),
            eigen_tol: 1e-6,
            route_tol: 1e-10,
            route_margin: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumAnalysis {
    pub params: Params,
    pub settings: SpectrumSettings,
    pub route_residual: f64,
    pub qp: NumericSpectrum,
    pub fock: NumericSpectrum,
    pub qp_match: SpectrumMatch,
    pub fock_match: SpectrumMatch,
    pub transverse: TransverseCheck,
    pub records: Vec<ModeRecord>,
    pub passed: bool,
}

/// Builds both operators, diagonalises them and reconciles everything with
/// the closed forms.
pub fn analyse(params: Params, settings: SpectrumSettings) -> Result<SpectrumAnalysis> {
    let bg = build_background(params, settings.n)?;
    let qp_op = build_mass_operator_qp(&bg)?;
    let fock_op = build_mass_operator_fock(&bg)?;
    let route = route_residual(&qp_op, &fock_op, settings.route_margin)?;

    let qp = numeric_spectrum_with(&qp_op, settings.margin, settings.window)?;
    let fock = numeric_spectrum_with(&fock_op, settings.margin, settings.window)?;
    let qp_match = compare_with_analytic(&qp, settings.eigen_tol);
    let fock_match = compare_with_analytic(&fock, settings.eigen_tol);
    let transverse = transverse_numeric_check(
        settings.n,
        params.theta,
        settings.margin,
        settings.window,
        settings.eigen_tol * params.theta.cos(),
    )?;

    let horizon = match (qp_match.horizon, fock_match.horizon) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    let mut records = analytic_spectrum(settings.n_max, &params);
    for r in &mut records {
        r.trusted = horizon.is_some_and(|h| r.n <= h);
    }
    let mut transverse_records = transverse_spectrum(settings.n_max, &params);
    for r in &mut transverse_records {
        r.trusted = transverse.lines.iter().any(|l| {
            l.trusted && l.n == r.n && (l.numeric_bare - l.analytic_bare).abs() <= settings.eigen_tol
        });
    }
    records.extend(transverse_records);
    records.extend(fermion_spectrum(settings.n_max, &params));

    let passed = qp_match.passed
        && fock_match.passed
        && route <= settings.route_tol
        && transverse.passed;
    Ok(SpectrumAnalysis {
        params,
        settings,
        route_residual: route,
        qp,
        fock,
        qp_match,
        fock_match,
        transverse,
        records,
        passed,
    })
}
