//! Command-line front end.
//!
//! Every subcommand renders a report to a string (so it can be compared byte
//! for byte) plus a one-line status for the error stream. Exit codes: 0 when
//! every check in the report holds, 1 when a verification fails, 2 on invalid
//! input.

mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{OutputFormat, RunConfig, CONFIG_ENV, TOLERANCES};

use crate::condensation::{numeric_minimum, sample_curve, TachyonPotential};
use crate::identities::{identity_suite, IdentityReport, Verdict};
use crate::report::{fmt6, structured, Table};
use crate::spectrum::{analyse, ModeRecord};
use crate::{Error, Params, Result};

#[derive(Debug, Parser)]
#[command(name = "ncbrane", version, about = "Spectrum and tachyon condensation of intersecting noncommutative membranes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Off-diagonal, transverse and fermion mass spectra.
    Spectrum,
    /// Block-trace identity suite on seeded random inputs.
    Identities,
    /// Tachyon potential and its minimum.
    Condense,
    /// Recombined brane curve and asymptotes.
    Curve,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Intersection angle (radians).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Flux density z^2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub z2: Option<f64>,
    /// Tension scale R.
    #[arg(long = "R", global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Fock truncation.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Top Fock levels excluded from trusted eigenvectors.
    #[arg(long, global = true)]
    pub margin: Option<usize>,
    /// Highest level in the closed-form tables.
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    /// Block dimension of the identity suite.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long = "x0-min", global = true, allow_negative_numbers = true)]
    pub x0_min: Option<f64>,
    #[arg(long = "x0-max", global = true, allow_negative_numbers = true)]
    pub x0_max: Option<f64>,
    /// Grid points of the curve.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Tolerance override, `name=value` (repeatable).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

impl Overrides {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        take!(theta, z2, r, n, seed, format, margin, n_max, dim, x0_min, x0_max, points);
        for t in &self.tol {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("--tol expects NAME=VALUE, got {t:?}")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse tolerance {t:?}")))?;
            cfg.set_tolerance(k.trim(), v)?;
        }
        Ok(cfg)
    }
}

/// A rendered report and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub status: String,
}

fn render<T: Serialize>(cfg: &RunConfig, params: &Params, table: &Table, doc: &T) -> String {
    match cfg.format {
        OutputFormat::Delimited => table.render(params),
        OutputFormat::Structured => structured(doc),
    }
}

const UNITS: &str = "units: z2 length^2, R energy; eigenvalue_raw is the mass^2 in energy^2; \
eigenvalue_units = eigenvalue_raw / (4 pi z2 R cos(theta)); eigenvalue_bare = eigenvalue_units * cos(theta)";

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    params: Params,
    units: &'static str,
    truncation: usize,
    margin: usize,
    records: &'a [ModeRecord],
    route_residual: f64,
    qp_horizon: Option<usize>,
    fock_horizon: Option<usize>,
    qp_max_error_units: f64,
    fock_max_error_units: f64,
    trusted_negative_units: &'a [f64],
    transverse_max_error: f64,
    passed: bool,
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "none".into(), |h| h.to_string())
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.validate()?;
    let a = analyse(params, cfg.spectrum_settings())?;

    let mut t = Table::new(&[
        "sector",
        "n",
        "eigenvalue_units",
        "eigenvalue_raw",
        "eigenvalue_bare",
        "multiplicity",
        "trusted",
    ]);
    t.comment(UNITS);
    t.comment(format!("N={} margin={}", cfg.n, cfg.margin));
    for r in &a.records {
        t.row(vec![
            r.sector.label().into(),
            r.n.to_string(),
            fmt6(r.eigenvalue_units),
            fmt6(r.eigenvalue_raw),
            fmt6(r.eigenvalue_bare),
            r.multiplicity.to_string(),
            r.trusted.to_string(),
        ]);
    }
    t.summary("route_residual", fmt6(a.route_residual));
    t.summary("qp_horizon", opt(a.qp_match.horizon));
    t.summary("fock_horizon", opt(a.fock_match.horizon));
    t.summary("qp_max_error_units", fmt6(a.qp_match.max_error_units));
    t.summary("fock_max_error_units", fmt6(a.fock_match.max_error_units));
    let neg: Vec<String> = a.fock_match.trusted_negative.iter().map(|&x| fmt6(x)).collect();
    t.summary("trusted_negative_units", neg.join(" "));
    t.summary("transverse_max_error", fmt6(a.transverse.max_error));
    t.summary("passed", a.passed.to_string());

    let doc = SpectrumDoc {
        params,
        units: UNITS,
        truncation: cfg.n,
        margin: cfg.margin,
        records: &a.records,
        route_residual: a.route_residual,
        qp_horizon: a.qp_match.horizon,
        fock_horizon: a.fock_match.horizon,
        qp_max_error_units: a.qp_match.max_error_units,
        fock_max_error_units: a.fock_match.max_error_units,
        trusted_negative_units: &a.fock_match.trusted_negative,
        transverse_max_error: a.transverse.max_error,
        passed: a.passed,
    };
    let status = format!(
        "spectrum: {} (horizon {}, route residual {})",
        if a.passed { "pass" } else { "FAIL" },
        opt(a.fock_match.horizon.min(a.qp_match.horizon)),
        fmt6(a.route_residual)
    );
    Ok(Outcome { body: render(cfg, &params, &t, &doc), passed: a.passed, status })
}

#[derive(Serialize)]
struct IdentitiesDoc<'a> {
    params: Params,
    seed: u64,
    dimension: usize,
    identities: &'a [IdentityReport],
    passed: bool,
}

pub fn cmd_identities(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.validate()?;
    let reports = identity_suite(params, cfg.seed, cfg.dim, cfg.tol("identity"))?;
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let recorded = reports.iter().filter(|r| r.verdict == Verdict::Recorded).count();

    let mut t = Table::new(&["name", "seed", "dimension", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "verdict"]);
    t.comment(format!("seed={} dim={}", cfg.seed, cfg.dim));
    for r in &reports {
        t.row(vec![
            r.name.into(),
            r.seed.map_or_else(String::new, |s| s.to_string()),
            r.dimension.to_string(),
            fmt6(r.lhs.re),
            fmt6(r.lhs.im),
            fmt6(r.rhs.re),
            fmt6(r.rhs.im),
            fmt6(r.residual),
            r.verdict.label().into(),
        ]);
    }
    t.summary("failed", failed.to_string());
    t.summary("recorded", recorded.to_string());
    t.summary("passed", (failed == 0).to_string());

    let doc = IdentitiesDoc { params, seed: cfg.seed, dimension: cfg.dim, identities: &reports, passed: failed == 0 };
    let status = format!("identities: {} exact failures, {} recorded findings", failed, recorded);
    Ok(Outcome { body: render(cfg, &params, &t, &doc), passed: failed == 0, status })
}

#[derive(Serialize)]
struct CondenseDoc {
    params: Params,
    quad: f64,
    quart: f64,
    tmin_analytic: f64,
    tmin_numeric: f64,
    tmin_difference: f64,
    vmin: f64,
    stationarity_residual: f64,
    tolerance: f64,
    passed: bool,
}

pub fn cmd_condense(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.validate()?;
    let tol = cfg.tol("minimum");
    let pot = TachyonPotential::new(&params);
    let m = numeric_minimum(&params, tol)?;
    let diff = (m.tmin - pot.tmin).abs();
    let passed = diff <= tol;
    let doc = CondenseDoc {
        params,
        quad: pot.quad,
        quart: pot.quart,
        tmin_analytic: pot.tmin,
        tmin_numeric: m.tmin,
        tmin_difference: diff,
        vmin: pot.vmin,
        stationarity_residual: pot.stationarity_residual(),
        tolerance: tol,
        passed,
    };

    let mut t = Table::new(&["quantity", "value"]);
    t.comment("units: t is the condensate amplitude; V in energy^2 * length^2 per unit R");
    for (k, v) in [
        ("quad", doc.quad),
        ("quart", doc.quart),
        ("tmin_analytic", doc.tmin_analytic),
        ("tmin_numeric", doc.tmin_numeric),
        ("tmin_difference", doc.tmin_difference),
        ("vmin", doc.vmin),
        ("stationarity_residual", doc.stationarity_residual),
    ] {
        t.row(vec![k.into(), fmt6(v)]);
    }
    t.summary("passed", passed.to_string());
    let status = format!("condense: tmin {} (numeric differs by {})", fmt6(pot.tmin), fmt6(diff));
    Ok(Outcome { body: render(cfg, &params, &t, &doc), passed, status })
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.validate()?;
    let curve = sample_curve(cfg.x0_min, cfg.x0_max, cfg.points, &params)?;
    let max = curve.max_scaled_residual();
    let passed = max <= cfg.tol("hyperbola");

    let mut t = Table::new(&["kind", "x0", "branch", "x_d", "y_d", "residual"]);
    t.comment("branch rows carry the hyperbola residual; asymptote rows are the original branes");
    for p in &curve.points {
        t.row(vec![
            "branch".into(),
            fmt6(p.x0),
            p.branch.label().into(),
            fmt6(p.x_d),
            fmt6(p.y_d),
            fmt6(p.hyperbola_residual),
        ]);
    }
    for a in &curve.asymptotes {
        t.row(vec![
            "asymptote".into(),
            fmt6(a.x0),
            a.sign.label().into(),
            fmt6(a.x_d),
            fmt6(a.y_d),
            String::new(),
        ]);
    }
    t.summary("max_scaled_residual", fmt6(max));
    t.summary("max_closed_form_error", fmt6(curve.max_closed_form_error()));
    t.summary("asymmetry_gap", curve.asymmetry_gap().map_or_else(|| "none".into(), fmt6));
    t.summary("passed", passed.to_string());

    let status = format!("curve: max hyperbola residual {}", fmt6(max));
    Ok(Outcome { body: render(cfg, &params, &t, &curve), passed, status })
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Identities => cmd_identities(cfg),
        Command::Condense => cmd_condense(cfg),
        Command::Curve => cmd_curve(cfg),
    }
}

/// Parses `args` (program name first), runs, writes, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = cli.overrides.resolve().and_then(|cfg| execute(cli.command, &cfg));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &cli.overrides.out {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(outcome.body.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 2;
    }
    eprintln!("{}", outcome.status);
    if outcome.passed {
        0
    } else {
        1
    }
}
