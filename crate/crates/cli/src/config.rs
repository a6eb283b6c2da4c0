//! TOML run configuration.
//!
//! ```toml
//! [camouflage]            # or [hamiltonian] / [scan]; exactly one source
//! zeta = 0.0
//! gamma = 1.0             # simplified family; or gamma1, gamma2, nu1, nu2
//! # lambda2_override = -1.55
//!
//! [grid]                  # phase-space grid, defaults shown
//! nx = 256
//! nk = 256
//! x_max = 8.0
//! k_max = 8.0
//! ```
//!
//! Every key is optional except the source. Unknown keys are collected and
//! rejected together.

use std::path::PathBuf;

use phaseflow_core::camouflage::{CamouflageParams, DEFAULT_TOLERANCE, MAX_ABS_ZETA};
use phaseflow_core::flow::TruncationPolicy;
use phaseflow_core::spectral::SpectralOptions;
use phaseflow_core::{
    Axis, GaussianEnsemble, LambdaOverride, PhaseSpaceGrid, SeparableHamiltonian, Term,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAX_SCAN_POINTS: usize = 10_000;
pub const DEFAULT_ZERO_MODE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Default, Deserialize)]
struct RawConfig {
    hamiltonian: Option<RawHamiltonian>,
    camouflage: Option<RawCamouflage>,
    ensemble: Option<RawEnsemble>,
    grid: Option<RawGrid>,
    truncation: Option<RawTruncation>,
    spectral: Option<RawSpectral>,
    certificate: Option<RawCertificate>,
    scan: Option<RawScan>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
struct RawHamiltonian {
    #[serde(default)]
    kinetic: Vec<Term>,
    #[serde(default)]
    potential: Vec<Term>,
}

#[derive(Debug, Default, Deserialize)]
struct RawCamouflage {
    zeta: Option<f64>,
    gamma: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    nu1: Option<f64>,
    nu2: Option<f64>,
    lambda1_override: Option<f64>,
    lambda2_override: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawEnsemble {
    alpha: Option<f64>,
    zeta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawGrid {
    nx: Option<usize>,
    nk: Option<usize>,
    x_max: Option<f64>,
    k_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawTruncation {
    eta_max: Option<usize>,
    term_rel_tol: Option<f64>,
    term_abs_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawSpectral {
    n: Option<usize>,
    x_max: Option<f64>,
    filter: Option<bool>,
    padding: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
struct RawCertificate {
    tolerance: Option<f64>,
    zero_mode_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawScan {
    zeta: Vec<f64>,
    gamma: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawOutput {
    dir: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<GridSpec>,
    pub eta_max: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Hamiltonian {
        kinetic: Vec<Term>,
        potential: Vec<Term>,
    },
    Camouflage(CamouflageSpec),
    Scan {
        zeta: Vec<f64>,
        gamma: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CamouflageSpec {
    pub zeta: f64,
    /// Set for the simplified family; otherwise the four explicit values.
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub lambda1_override: Option<f64>,
    pub lambda2_override: Option<f64>,
}

impl CamouflageSpec {
    pub fn simplified(zeta: f64, gamma: f64) -> Self {
        Self {
            zeta,
            gamma: Some(gamma),
            gamma1: None,
            gamma2: None,
            nu1: None,
            nu2: None,
            lambda1_override: None,
            lambda2_override: None,
        }
    }

    /// Solves the constraints and checks the grid can resolve the result.
    /// The `|ζ|` bound applies unless the caller supplied the grid.
    pub fn resolve(&self, grid: &GridSpec) -> Result<CamouflageParams> {
        let bound = if grid.user_supplied {
            f64::INFINITY
        } else {
            MAX_ABS_ZETA
        };
        if self.zeta.abs() > bound {
            return Err(CliError::Config(format!(
                "|zeta| = {} exceeds the bound {MAX_ABS_ZETA}; supply a finer [grid] or --grid \
                 to lift it",
                self.zeta.abs()
            )));
        }
        let params = match self.gamma {
            Some(gamma) => CamouflageParams::simplified_with_bound(self.zeta, gamma, bound)?,
            None => CamouflageParams::solve(
                self.zeta,
                self.gamma1.unwrap_or(1.0),
                self.gamma2.unwrap_or(1.0),
                self.nu1.unwrap_or(1.0),
                self.nu2.unwrap_or(1.0),
                bound,
            )?,
        };
        params
            .check_grid_resolution(&grid.build()?)
            .map_err(|e| CliError::Config(format!("zeta = {}: {e}", self.zeta)))?;
        Ok(params.with_override(LambdaOverride {
            lambda1: self.lambda1_override,
            lambda2: self.lambda2_override,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleSpec {
    Alpha(f64),
    Zeta(f64),
}

impl EnsembleSpec {
    pub fn build(&self) -> Result<GaussianEnsemble> {
        Ok(match *self {
            EnsembleSpec::Alpha(a) => GaussianEnsemble::isotropic(a)?,
            EnsembleSpec::Zeta(z) => GaussianEnsemble::squeezed(z)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub nk: usize,
    pub x_max: f64,
    pub k_max: f64,
    /// Whether the grid came from the file or `--grid` rather than defaults.
    pub user_supplied: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 256,
            nk: 256,
            x_max: 8.0,
            k_max: 8.0,
            user_supplied: false,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<PhaseSpaceGrid> {
        Ok(PhaseSpaceGrid::symmetric(
            self.x_max, self.k_max, self.nx, self.nk,
        )?)
    }

    /// Parses `nx,nk,xmax,kmax`.
    pub fn parse_flag(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<_> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected nx,nk,xmax,kmax, got `{s}`"));
        }
        let count = |p: &str| p.parse::<usize>().map_err(|e| format!("`{p}`: {e}"));
        let real = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        Ok(Self {
            nx: count(parts[0])?,
            nk: count(parts[1])?,
            x_max: real(parts[2])?,
            k_max: real(parts[3])?,
            user_supplied: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSpec {
    pub n: usize,
    pub x_max: f64,
    pub filter: bool,
    pub padding: usize,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        let opts = SpectralOptions::default();
        Self {
            n: 2048,
            x_max: 12.0,
            filter: opts.filter,
            padding: opts.padding,
        }
    }
}

impl SpectralSpec {
    pub fn axis(&self) -> Result<Axis> {
        Ok(Axis::symmetric(self.x_max, self.n)?)
    }

    pub fn options(&self) -> SpectralOptions {
        SpectralOptions {
            filter: self.filter,
            padding: self.padding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateSpec {
    pub tolerance: f64,
    pub zero_mode_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
}

/// Fully resolved configuration; serialized into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: Source,
    pub ensemble: Option<EnsembleSpec>,
    pub grid: GridSpec,
    pub truncation: TruncationPolicy,
    pub spectral: SpectralSpec,
    pub certificate: CertificateSpec,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &Overrides::default())
    }

    pub fn parse_with(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut unknown = Vec::new();
        let de = toml::Deserializer::parse(text)?;
        let raw: RawConfig = serde_ignored::deserialize(de, |path| {
            // `?` segments mark Option layers, not user keys
            let key: Vec<_> = path
                .to_string()
                .split('.')
                .filter(|s| *s != "?")
                .map(String::from)
                .collect();
            unknown.push(key.join("."));
        })?;
        if !unknown.is_empty() {
            return Err(CliError::UnknownKeys(unknown));
        }
        Self::resolve(raw, overrides)
    }

    fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<Self> {
        let sources = [
            raw.hamiltonian.is_some(),
            raw.camouflage.is_some(),
            raw.scan.is_some(),
        ];
        let source_count = sources.iter().filter(|&&s| s).count();
        if source_count != 1 {
            return Err(CliError::Config(format!(
                "exactly one of [hamiltonian], [camouflage], [scan] is required, found {source_count}"
            )));
        }

        let mut grid = match raw.grid {
            Some(g) => {
                let d = GridSpec::default();
                GridSpec {
                    nx: g.nx.unwrap_or(d.nx),
                    nk: g.nk.unwrap_or(d.nk),
                    x_max: g.x_max.unwrap_or(d.x_max),
                    k_max: g.k_max.unwrap_or(d.k_max),
                    user_supplied: true,
                }
            }
            None => GridSpec::default(),
        };
        if let Some(g) = overrides.grid {
            grid = g;
        }
        grid.build()?;

        let mut truncation = TruncationPolicy::default();
        if let Some(t) = raw.truncation {
            truncation.eta_max = t.eta_max.unwrap_or(truncation.eta_max);
            truncation.term_rel_tol = t.term_rel_tol.unwrap_or(truncation.term_rel_tol);
            truncation.term_abs_tol = t.term_abs_tol.unwrap_or(truncation.term_abs_tol);
        }
        if let Some(eta) = overrides.eta_max {
            truncation.eta_max = eta;
        }
        truncation.validate()?;

        let mut spectral = SpectralSpec::default();
        if let Some(s) = raw.spectral {
            spectral.n = s.n.unwrap_or(spectral.n);
            spectral.x_max = s.x_max.unwrap_or(spectral.x_max);
            spectral.filter = s.filter.unwrap_or(spectral.filter);
            spectral.padding = s.padding.unwrap_or(spectral.padding);
        }
        spectral.axis()?;
        if spectral.padding == 0 {
            return Err(CliError::Config(
                "spectral.padding must be at least 1".into(),
            ));
        }

        let raw_cert = raw.certificate.unwrap_or_default();
        let certificate = CertificateSpec {
            tolerance: positive(
                "certificate.tolerance",
                raw_cert.tolerance.unwrap_or(DEFAULT_TOLERANCE),
            )?,
            zero_mode_tolerance: positive(
                "certificate.zero_mode_tolerance",
                raw_cert
                    .zero_mode_tolerance
                    .unwrap_or(DEFAULT_ZERO_MODE_TOLERANCE),
            )?,
        };

        let raw_out = raw.output.unwrap_or_default();
        let output = OutputSpec {
            dir: overrides
                .out
                .clone()
                .or(raw_out.dir)
                .unwrap_or_else(|| PathBuf::from("phaseflow-out")),
            format: overrides.format.or(raw_out.format).unwrap_or_default(),
        };

        let ensemble =
            match (&raw.ensemble, raw.hamiltonian.is_some()) {
                (Some(_), false) => return Err(CliError::Config(
                    "[ensemble] only applies to [hamiltonian]; camouflage runs use the matched \
                     squeezed ensemble"
                        .into(),
                )),
                (
                    Some(RawEnsemble {
                        alpha: Some(_),
                        zeta: Some(_),
                    }),
                    true,
                ) => {
                    return Err(CliError::Config(
                        "[ensemble] takes either alpha or zeta, not both".into(),
                    ))
                }
                (Some(RawEnsemble { zeta: Some(z), .. }), true) => Some(EnsembleSpec::Zeta(*z)),
                (Some(RawEnsemble { alpha: Some(a), .. }), true) => Some(EnsembleSpec::Alpha(*a)),
                (_, true) => Some(EnsembleSpec::Alpha(1.0)),
                (None, false) => None,
            };
        if let Some(e) = ensemble {
            e.build()?;
        }

        let source = if let Some(h) = raw.hamiltonian {
            SeparableHamiltonian::new(h.kinetic.clone(), h.potential.clone())?;
            Source::Hamiltonian {
                kinetic: h.kinetic,
                potential: h.potential,
            }
        } else if let Some(c) = raw.camouflage {
            let cam = camouflage_spec(c)?;
            cam.resolve(&grid)?;
            Source::Camouflage(cam)
        } else {
            let s = raw.scan.expect("one source present");
            if s.zeta.is_empty() || s.gamma.is_empty() {
                return Err(CliError::Config(
                    "[scan] needs non-empty zeta and gamma lists".into(),
                ));
            }
            let combos = s.zeta.len() * s.gamma.len();
            if combos > MAX_SCAN_POINTS {
                return Err(CliError::Config(format!(
                    "[scan] has {combos} combinations; the limit is {MAX_SCAN_POINTS}"
                )));
            }
            for v in s.zeta.iter().chain(&s.gamma) {
                finite("scan value", *v)?;
            }
            Source::Scan {
                zeta: s.zeta,
                gamma: s.gamma,
            }
        };

        Ok(Self {
            source,
            ensemble,
            grid,
            truncation,
            spectral,
            certificate,
            output,
        })
    }

    pub fn hamiltonian(&self) -> Option<SeparableHamiltonian> {
        match &self.source {
            Source::Hamiltonian { kinetic, potential } => {
                SeparableHamiltonian::new(kinetic.clone(), potential.clone()).ok()
            }
            _ => None,
        }
    }

    pub fn camouflage(&self) -> Option<CamouflageSpec> {
        match self.source {
            Source::Camouflage(cam) => Some(cam),
            _ => None,
        }
    }
}

fn camouflage_spec(c: RawCamouflage) -> Result<CamouflageSpec> {
    let zeta = c
        .zeta
        .ok_or_else(|| CliError::Config("[camouflage] requires zeta".into()))?;
    let explicit = [c.gamma1, c.gamma2, c.nu1, c.nu2];
    if c.gamma.is_some() && explicit.iter().any(Option::is_some) {
        return Err(CliError::Config(
            "[camouflage] takes gamma (simplified family) or gamma1/gamma2/nu1/nu2, not both"
                .into(),
        ));
    }
    if c.gamma.is_none() && explicit.iter().all(Option::is_none) {
        return Err(CliError::Config(
            "[camouflage] requires gamma or the explicit gamma1, gamma2, nu1, nu2".into(),
        ));
    }
    for (name, v) in [
        ("zeta", Some(zeta)),
        ("gamma", c.gamma),
        ("lambda1_override", c.lambda1_override),
        ("lambda2_override", c.lambda2_override),
    ] {
        if let Some(v) = v {
            finite(name, v)?;
        }
    }
    Ok(CamouflageSpec {
        zeta,
        gamma: c.gamma,
        gamma1: c.gamma1,
        gamma2: c.gamma2,
        nu1: c.nu1,
        nu2: c.nu2,
        lambda1_override: c.lambda1_override,
        lambda2_override: c.lambda2_override,
    })
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}
