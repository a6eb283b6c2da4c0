//! Subcommand implementations. Each returns an [`Outcome`]; only
//! `camouflage-verify` ties its exit status to certification.

use std::fs;
use std::path::{Path, PathBuf};

use phaseflow_core::camouflage::{stationarity_certificate, StationarityCertificate};
use phaseflow_core::flow;
use phaseflow_core::grid::try_sweep;
use phaseflow_core::spectral::{zero_mode_residual, ZeroModeReport};
use phaseflow_core::{CamouflageParams, GaussianEnsemble, SeparableHamiltonian};
use serde_json::{json, Map, Value};

use crate::config::{CamouflageSpec, Format, RunConfig, Source};
use crate::error::{io_err, CliError, Result};
use crate::format::{g17, Table};

/// Fraction of non-converged nodes above which `flow-field` fails.
pub const MAX_NONCONVERGED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NotCertified,
    NonConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::NotCertified | Status::NonConverged => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub report: Value,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(dir, name, &text)
}

fn write_table(cfg: &RunConfig, stem: &str, table: &Table) -> Result<PathBuf> {
    match cfg.output.format {
        Format::Csv => write(&cfg.output.dir, &format!("{stem}.csv"), &table.to_csv()),
        Format::Json => write_json(&cfg.output.dir, &format!("{stem}.json"), &table.to_json()),
    }
}

fn base_report(cfg: &RunConfig, command: &str) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("effective_config".into(), serde_json::to_value(cfg)?);
    Ok(m)
}

fn insert_params(m: &mut Map<String, Value>, p: &CamouflageParams) {
    for (k, v) in [
        ("zeta", p.zeta),
        ("gamma1", p.gamma1),
        ("gamma2", p.gamma2),
        ("nu1", p.nu1),
        ("nu2", p.nu2),
        ("mu1", p.mu1),
        ("mu2", p.mu2),
        ("lambda1", p.lambda1),
        ("lambda2", p.lambda2),
    ] {
        m.insert(k.into(), json!(v));
    }
}

fn require_camouflage(cfg: &RunConfig, command: &str) -> Result<CamouflageSpec> {
    cfg.camouflage()
        .ok_or_else(|| CliError::Config(format!("{command} needs a [camouflage] section")))
}

struct FlowNode {
    jx: f64,
    jk: f64,
    div: f64,
    liouvillianity: Option<f64>,
    terms_used: usize,
    converged: bool,
}

/// Writes the current, divergence and Liouvillianity fields plus a summary.
pub fn flow_field(cfg: &RunConfig) -> Result<Outcome> {
    let mut report = base_report(cfg, "flow-field")?;
    let (h, w): (SeparableHamiltonian, GaussianEnsemble) = match &cfg.source {
        Source::Hamiltonian { .. } => (
            cfg.hamiltonian().expect("validated"),
            cfg.ensemble.expect("defaulted").build()?,
        ),
        Source::Camouflage(cam) => {
            let p = cam.resolve(&cfg.grid)?;
            insert_params(&mut report, &p);
            (p.build_hamiltonian(), p.ensemble())
        }
        Source::Scan { .. } => {
            return Err(CliError::Config(
                "flow-field needs a [hamiltonian] or [camouflage] section".into(),
            ))
        }
    };
    let grid = cfg.grid.build()?;
    let policy = cfg.truncation;
    let nodes = try_sweep(&grid, |x, k| {
        let (jx, dx) = flow::current_x_series(&w, &h, x, k, &policy)?;
        let (jk, dk) = flow::current_k_series(&w, &h, x, k, &policy)?;
        let (div, dd) = flow::stationarity_quantifier(&w, &h, x, k, &policy)?;
        let liou = flow::liouvillianity_quantifier(&w, &h, x, k, &policy)?;
        let mut converged = dx.converged && dk.converged && dd.converged;
        let mut terms_used = dx.terms_used.max(dk.terms_used).max(dd.terms_used);
        if let Some((_, dl)) = liou {
            converged &= dl.converged;
            terms_used = terms_used.max(dl.terms_used);
        }
        Ok(FlowNode {
            jx,
            jk,
            div,
            liouvillianity: liou.map(|(v, _)| v),
            terms_used,
            converged,
        })
    })?;

    let mut table = Table::new(vec![
        "x",
        "k",
        "Jx",
        "Jk",
        "divJ",
        "divW_mask",
        "liouvillianity",
    ]);
    let (mut max_div, mut arg_div) = (0.0f64, (f64::NAN, f64::NAN));
    let mut max_liou = 0.0f64;
    let (mut masked, mut nonconverged) = (0usize, 0usize);
    let (mut tmin, mut tmax, mut tsum) = (usize::MAX, 0usize, 0usize);
    for (idx, n) in nodes.iter().enumerate() {
        let (x, k) = grid.node(idx);
        if n.div.abs() > max_div {
            max_div = n.div.abs();
            arg_div = (x, k);
        }
        match n.liouvillianity {
            Some(v) => max_liou = max_liou.max(v.abs()),
            None => masked += 1,
        }
        nonconverged += usize::from(!n.converged);
        tmin = tmin.min(n.terms_used);
        tmax = tmax.max(n.terms_used);
        tsum += n.terms_used;
        table.push(vec![
            g17(x),
            g17(k),
            g17(n.jx),
            g17(n.jk),
            g17(n.div),
            if n.liouvillianity.is_some() { "0" } else { "1" }.to_string(),
            g17(n.liouvillianity.unwrap_or(f64::NAN)),
        ]);
    }
    let fraction = nonconverged as f64 / nodes.len() as f64;
    let field_file = write_table(cfg, "flow_field", &table)?;
    let status = if fraction > MAX_NONCONVERGED_FRACTION {
        Status::NonConverged
    } else {
        Status::Success
    };
    report.insert("grid_points".into(), json!(nodes.len()));
    report.insert("max_abs_div_j".into(), json!(max_div));
    report.insert("argmax_div_j_x".into(), json!(arg_div.0));
    report.insert("argmax_div_j_k".into(), json!(arg_div.1));
    report.insert("max_abs_liouvillianity".into(), json!(max_liou));
    report.insert("masked_points".into(), json!(masked));
    report.insert("nonconverged_points".into(), json!(nonconverged));
    report.insert("nonconverged_fraction".into(), json!(fraction));
    report.insert("terms_used_min".into(), json!(tmin));
    report.insert("terms_used_max".into(), json!(tmax));
    report.insert(
        "terms_used_mean".into(),
        json!(tsum as f64 / nodes.len() as f64),
    );
    report.insert("field_file".into(), json!(field_file));
    report.insert("converged".into(), json!(status == Status::Success));
    let report = Value::Object(report);
    let summary = write_json(&cfg.output.dir, "flow_field_summary.json", &report)?;
    Ok(Outcome {
        status,
        files: vec![field_file, summary],
        report,
    })
}

/// Certificate and zero-mode numbers for one parameter set.
pub struct Verification {
    pub params: CamouflageParams,
    pub certificate: StationarityCertificate,
    pub zero_mode: ZeroModeReport,
    pub zero_mode_pass: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.certificate.certified && self.zero_mode_pass
    }
}

pub fn verify(params: &CamouflageParams, cfg: &RunConfig) -> Result<Verification> {
    let grid = cfg.grid.build()?;
    let certificate =
        stationarity_certificate(params, &grid, &cfg.truncation, cfg.certificate.tolerance)?;
    let zero_mode = zero_mode_residual(params, &cfg.spectral.axis()?, &cfg.spectral.options())?;
    let zero_mode_pass = zero_mode.residual <= cfg.certificate.zero_mode_tolerance;
    Ok(Verification {
        params: *params,
        certificate,
        zero_mode,
        zero_mode_pass,
    })
}

fn insert_verification(m: &mut Map<String, Value>, v: &Verification) {
    let c = &v.certificate;
    insert_params(m, &v.params);
    m.insert("tolerance".into(), json!(c.tolerance));
    for (name, path) in [
        ("closed_form", c.closed_form),
        ("generating", c.generating),
        ("series", c.series),
        ("classical", c.classical),
    ] {
        m.insert(format!("max_abs_div_{name}"), json!(path.max_abs));
        m.insert(format!("argmax_{name}_x"), json!(path.x));
        m.insert(format!("argmax_{name}_k"), json!(path.k));
    }
    m.insert(
        "max_pairwise_disagreement".into(),
        json!(c.max_pairwise_disagreement),
    );
    m.insert(
        "series_nonconverged_points".into(),
        json!(c.series_nonconverged_points),
    );
    m.insert("terms_used_min".into(), json!(c.series_terms_used_min));
    m.insert("terms_used_max".into(), json!(c.series_terms_used_max));
    m.insert("terms_used_mean".into(), json!(c.series_terms_used_mean));
    m.insert("quantum_stationary".into(), json!(c.quantum_stationary));
    m.insert("classical_stationary".into(), json!(c.classical_stationary));
    m.insert("certified".into(), json!(c.certified));
    m.insert("zero_mode_residual".into(), json!(v.zero_mode.residual));
    m.insert("zero_mode_pass".into(), json!(v.zero_mode_pass));
    m.insert("warnings".into(), json!(v.zero_mode.warnings));
    m.insert("passed".into(), json!(v.passed()));
}

/// Stationarity certificate plus zero-mode residual; exit 0 only if both pass.
pub fn camouflage_verify(cfg: &RunConfig) -> Result<Outcome> {
    let cam = require_camouflage(cfg, "camouflage-verify")?;
    let params = cam.resolve(&cfg.grid)?;
    let v = verify(&params, cfg)?;
    let mut report = base_report(cfg, "camouflage-verify")?;
    insert_verification(&mut report, &v);
    report.insert(
        "zero_mode_tolerance".into(),
        json!(cfg.certificate.zero_mode_tolerance),
    );
    let report = Value::Object(report);
    let path = write_json(&cfg.output.dir, "camouflage_verify.json", &report)?;
    Ok(Outcome {
        status: if v.passed() {
            Status::Success
        } else {
            Status::NotCertified
        },
        files: vec![path],
        report,
    })
}

/// Zero-mode residual only.
pub fn zero_mode(cfg: &RunConfig) -> Result<Outcome> {
    let cam = require_camouflage(cfg, "zero-mode")?;
    let params = cam.resolve(&cfg.grid)?;
    let r = zero_mode_residual(&params, &cfg.spectral.axis()?, &cfg.spectral.options())?;
    let mut report = base_report(cfg, "zero-mode")?;
    insert_params(&mut report, &params);
    report.insert("zero_mode_residual".into(), json!(r.residual));
    report.insert("kinetic_norm".into(), json!(r.kinetic_norm));
    report.insert("potential_norm".into(), json!(r.potential_norm));
    report.insert(
        "zero_mode_tolerance".into(),
        json!(cfg.certificate.zero_mode_tolerance),
    );
    report.insert(
        "zero_mode_pass".into(),
        json!(r.residual <= cfg.certificate.zero_mode_tolerance),
    );
    report.insert("warnings".into(), json!(r.warnings));
    let report = Value::Object(report);
    let path = write_json(&cfg.output.dir, "zero_mode.json", &report)?;
    Ok(Outcome {
        status: Status::Success,
        files: vec![path],
        report,
    })
}

const SCAN_COLUMNS: [&str; 16] = [
    "zeta",
    "gamma",
    "status",
    "max_abs_div_closed_form",
    "max_abs_div_generating",
    "max_abs_div_series",
    "max_abs_div_classical",
    "max_pairwise_disagreement",
    "series_nonconverged_points",
    "terms_used_min",
    "terms_used_max",
    "terms_used_mean",
    "certified",
    "zero_mode_residual",
    "zero_mode_pass",
    "message",
];

/// One row per `(ζ, γ)` of the simplified family; refused or failed rows
/// are recorded in place and the scan continues.
pub fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let Source::Scan { zeta, gamma } = &cfg.source else {
        return Err(CliError::Config("scan needs a [scan] section".into()));
    };
    let mut table = Table::new(SCAN_COLUMNS.to_vec());
    let (mut certified, mut refused, mut failed) = (0usize, 0usize, 0usize);
    for &z in zeta {
        for &g in gamma {
            let mut row = vec![g17(z), g17(g)];
            let blank = |row: &mut Vec<String>, status: &str, msg: String| {
                row.push(status.into());
                row.extend(std::iter::repeat_n(String::new(), SCAN_COLUMNS.len() - 4));
                row.push(msg);
            };
            match CamouflageSpec::simplified(z, g).resolve(&cfg.grid) {
                Err(e) => {
                    refused += 1;
                    blank(&mut row, "refused", e.to_string());
                }
                Ok(p) => match verify(&p, cfg) {
                    Err(e) => {
                        failed += 1;
                        blank(&mut row, "error", e.to_string());
                    }
                    Ok(v) => {
                        let c = &v.certificate;
                        certified += usize::from(v.passed());
                        row.extend([
                            "ok".to_string(),
                            g17(c.closed_form.max_abs),
                            g17(c.generating.max_abs),
                            g17(c.series.max_abs),
                            g17(c.classical.max_abs),
                            g17(c.max_pairwise_disagreement),
                            c.series_nonconverged_points.to_string(),
                            c.series_terms_used_min.to_string(),
                            c.series_terms_used_max.to_string(),
                            g17(c.series_terms_used_mean),
                            c.certified.to_string(),
                            g17(v.zero_mode.residual),
                            v.zero_mode_pass.to_string(),
                            v.zero_mode.warnings.join("; "),
                        ]);
                    }
                },
            }
            table.push(row);
        }
    }
    let rows_file = write_table(cfg, "scan", &table)?;
    let mut report = base_report(cfg, "scan")?;
    report.insert("rows".into(), json!(table.len()));
    report.insert("rows_passed".into(), json!(certified));
    report.insert("rows_refused".into(), json!(refused));
    report.insert("rows_failed".into(), json!(failed));
    report.insert("rows_file".into(), json!(rows_file));
    let report = Value::Object(report);
    let summary = write_json(&cfg.output.dir, "scan_summary.json", &report)?;
    Ok(Outcome {
        status: Status::Success,
        files: vec![rows_file, summary],
        report,
    })
}
