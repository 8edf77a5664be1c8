//! Command-line front end: `verify`, `evolve`, `spectrum` and `export-rep`.
//!
//! Every parameter can come from a flag or from the JSON file given with
//! `--config`; flags win, and unset values fall back to the defaults shown
//! in `--help`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::evolution::{
    self, expectation, group_velocity_operator, mass_spectrum, propagate, read_snapshot,
    snapshot_bytes, time_series_csv, Branch, EvolutionError, GridWaveFunction, MassGrid,
    MassOptions, MomentumGrid, PacketSpec, Space,
};
use crate::operator_algebra::{
    build_covariant_class1_with, build_covariant_class3_with, build_qm, casimir_w,
    verify_algebra, verify_casimir, verify_invariance_condition, verify_p_squared, Denominator,
    DiffOperator, GeneratorError, GeneratorSet, Picture, RepClass, Sign, TestFieldBattery,
    VerificationReport,
};
use crate::spin_reps::{tilde_continue, LittleGroupRep, RepLabel, SpinError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_FAIL,
        }
    }
}

fn config_err(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("--{flag}: {msg}"))
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        match e {
            GeneratorError::Spin(_)
            | GeneratorError::InvalidParameter(_)
            | GeneratorError::WrongKind { .. }
            | GeneratorError::Representation(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::Io(_) | EvolutionError::Operator(_) | EvolutionError::Singular { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "p1n", version, about = "Generators, evolution and mass spectra for P(1,n)")]
pub struct Cli {
    /// RNG seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pass/fail tolerance on residuals [default: 1e-9]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads, 0 uses every core [default: 0]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for output files [default: .]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// JSON file with default parameters; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check commutation relations, P², the invariance condition and W
    Verify(VerifyArgs),
    /// Evolve a packet and write snapshots and expectation series
    Evolve(EvolveArgs),
    /// Extract the mass distribution of an n = 4 snapshot
    Spectrum(SpectrumArgs),
    /// Dump little-group spin matrices as JSON
    ExportRep(ExportRepArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// Number of spatial dimensions [default: 4]
    #[arg(long)]
    pub n: Option<usize>,
    /// Representation class: I, II or III [default: I]
    #[arg(long)]
    pub class: Option<String>,
    /// covariant, heisenberg or schrodinger [default: covariant]
    #[arg(long)]
    pub picture: Option<String>,
    /// Little-group rep label: trivial, vector, s or s,t [default: trivial]
    #[arg(long)]
    pub rep: Option<String>,
    /// Class I mass κ [default: 1]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Class III parameter η [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Energy branch +1 or -1 [default: +1]
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Sample points [default: 20]
    #[arg(long)]
    pub points: Option<usize>,
    /// Test fields per point [default: 3]
    #[arg(long)]
    pub fields: Option<usize>,
    /// Time x0 for the Schrödinger picture [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Skip the Casimir W check [default: false]
    #[arg(long)]
    #[serde(skip)]
    pub skip_casimir: bool,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveArgs {
    /// Number of spatial dimensions [default: 3]
    #[arg(long)]
    pub n: Option<usize>,
    /// Representation class: I, II or III [default: I]
    #[arg(long)]
    pub class: Option<String>,
    /// Little-group rep label [default: trivial]
    #[arg(long)]
    pub rep: Option<String>,
    /// Class I mass κ [default: 1]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Class III parameter η [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Energy branch +1 or -1 [default: +1]
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Grid points per axis, a power of two [default: 32]
    #[arg(long)]
    pub count: Option<usize>,
    /// Momentum box half-width [default: 4]
    #[arg(long)]
    pub extent: Option<f64>,
    /// Packet centre, comma separated [default: 0,…,0 (class III: η+1 on the last axis)]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
    /// Packet momentum widths, one value or one per axis [default: 0.4]
    #[arg(long, value_delimiter = ',')]
    pub width: Option<Vec<f64>>,
    /// Packet position offset, comma separated [default: 0,…,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offset: Option<Vec<f64>>,
    /// Component weights, comma separated [default: 1,…,1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// Output times, comma separated [default: 0,0.5,1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    /// Start from this snapshot instead of a packet
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    /// Snapshot of an n = 4 class I state
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lowest m² sample [default: κ²]
    #[arg(long)]
    pub m2_min: Option<f64>,
    /// Highest m² sample [default: κ² + 10]
    #[arg(long)]
    pub m2_max: Option<f64>,
    /// Number of m² samples; without it the box's p4 modes are used
    #[arg(long)]
    pub m2_count: Option<usize>,
    /// positive or symmetric p4 branch [default: positive]
    #[arg(long)]
    pub branch: Option<String>,
    /// Peak threshold relative to the maximum [default: 0.01]
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportRepArgs {
    /// Number of dimensions [default: 4]
    #[arg(long)]
    pub n: Option<usize>,
    /// Rep label [default: trivial]
    #[arg(long)]
    pub rep: Option<String>,
    /// compact, or lorentz for the tilde continuation [default: compact]
    #[arg(long)]
    pub signature: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    tol: Option<f64>,
    threads: Option<usize>,
    out_dir: Option<PathBuf>,
    verify: VerifyArgs,
    evolve: EvolveArgs,
    spectrum: SpectrumArgs,
    export_rep: ExportRepArgs,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Common {
    pub seed: u64,
    pub tol: f64,
    pub threads: usize,
    pub out_dir: PathBuf,
}

impl Default for Common {
    fn default() -> Self {
        Self {
            seed: 1,
            tol: 1e-9,
            threads: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub class: RepClass,
    pub picture: Picture,
    pub rep: String,
    pub kappa: f64,
    pub eta: f64,
    pub eps: Sign,
    pub points: usize,
    pub fields: usize,
    pub x0: f64,
    pub casimir: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 4,
            class: RepClass::I,
            picture: Picture::Covariant,
            rep: "trivial".into(),
            kappa: 1.0,
            eta: 1.0,
            eps: Sign::Plus,
            points: 20,
            fields: 3,
            x0: 0.5,
            casimir: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub n: usize,
    pub class: RepClass,
    pub rep: String,
    pub kappa: f64,
    pub eta: f64,
    pub eps: Sign,
    pub count: usize,
    pub extent: f64,
    pub center: Option<Vec<f64>>,
    pub width: Vec<f64>,
    pub offset: Vec<f64>,
    pub weights: Option<Vec<f64>>,
    pub times: Vec<f64>,
    pub input: Option<PathBuf>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            n: 3,
            class: RepClass::I,
            rep: "trivial".into(),
            kappa: 1.0,
            eta: 1.0,
            eps: Sign::Plus,
            count: 32,
            extent: 4.0,
            center: None,
            width: vec![0.4],
            offset: Vec::new(),
            weights: None,
            times: vec![0.0, 0.5, 1.0],
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumConfig {
    pub input: PathBuf,
    pub m2_min: Option<f64>,
    pub m2_max: Option<f64>,
    pub m2_count: Option<usize>,
    pub branch: Branch,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportRepConfig {
    pub n: usize,
    pub rep: String,
    pub lorentz: bool,
}

fn parse_with<T: std::str::FromStr>(flag: &str, s: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| config_err(flag, e))
}

fn parse_class(s: &str) -> Result<RepClass, CliError> {
    parse_with("class", s)
}

fn parse_label(s: &str) -> Result<RepLabel, CliError> {
    s.parse::<RepLabel>()
        .map_err(|e: SpinError| config_err("rep", format!("{s:?}: {e}")))
}

fn require_positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(flag, format!("{v} must be positive")))
    }
}

impl VerifyConfig {
    fn resolve(a: &VerifyArgs, f: &VerifyArgs) -> Result<Self, CliError> {
        let d = Self::default();
        let cfg = Self {
            n: a.n.or(f.n).unwrap_or(d.n),
            class: match a.class.as_ref().or(f.class.as_ref()) {
                Some(s) => parse_class(s)?,
                None => d.class,
            },
            picture: match a.picture.as_ref().or(f.picture.as_ref()) {
                Some(s) => parse_with("picture", s)?,
                None => d.picture,
            },
            rep: a.rep.clone().or(f.rep.clone()).unwrap_or(d.rep),
            kappa: require_positive("kappa", a.kappa.or(f.kappa).unwrap_or(d.kappa))?,
            eta: require_positive("eta", a.eta.or(f.eta).unwrap_or(d.eta))?,
            eps: match a.eps.as_ref().or(f.eps.as_ref()) {
                Some(s) => parse_with("eps", s)?,
                None => d.eps,
            },
            points: a.points.or(f.points).unwrap_or(d.points),
            fields: a.fields.or(f.fields).unwrap_or(d.fields),
            x0: a.x0.or(f.x0).unwrap_or(d.x0),
            casimir: !a.skip_casimir,
        };
        parse_label(&cfg.rep)?;
        if !(2..=6).contains(&cfg.n) {
            return Err(config_err("n", format!("{} is outside 2..=6", cfg.n)));
        }
        if cfg.points == 0 || cfg.fields == 0 {
            return Err(config_err("points", "points and fields must be positive"));
        }
        if !cfg.x0.is_finite() {
            return Err(config_err("x0", "must be finite"));
        }
        Ok(cfg)
    }

    /// The generator set this configuration describes.
    pub fn generator_set(&self) -> Result<GeneratorSet, CliError> {
        let label = parse_label(&self.rep)?;
        let rep = label
            .build(self.n)
            .map_err(|e| config_err("rep", format!("{:?}: {e}", self.rep)))?;
        let x0 = match self.picture {
            Picture::Covariant => None,
            Picture::Heisenberg => Some(None),
            Picture::Schrodinger => Some(Some(self.x0)),
        };
        let gs = match (self.class, x0) {
            (RepClass::I, None) => {
                build_covariant_class1_with(self.n, &rep, self.eps, Denominator::Analytic)?
            }
            (RepClass::IILimit, None) => {
                return Err(config_err(
                    "picture",
                    "class II is available in the heisenberg and schrodinger pictures",
                ))
            }
            (RepClass::III, None) => build_covariant_class3_with(
                self.n,
                &tilde_continue(&rep).map_err(|e| config_err("rep", e))?,
                self.eps,
                Denominator::Analytic,
            )?,
            (RepClass::I, Some(t)) => build_qm(RepClass::I, self.n, &rep, self.kappa, self.eps, t)?,
            (RepClass::IILimit, Some(t)) => {
                build_qm(RepClass::IILimit, self.n, &rep, 0.0, self.eps, t)?
            }
            (RepClass::III, Some(t)) => build_qm(
                RepClass::III,
                self.n,
                &tilde_continue(&rep).map_err(|e| config_err("rep", e))?,
                self.eta,
                self.eps,
                t,
            )?,
        };
        Ok(gs)
    }
}

/// Result of `verify`: the JSON document and the overall verdict.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub reports: Vec<VerificationReport>,
    pub json: String,
    pub pass: bool,
}

/// Runs every check for the configured generator set.
pub fn cmd_verify(cfg: &VerifyConfig, common: &Common) -> Result<VerifyOutcome, CliError> {
    let gs = cfg.generator_set()?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let points = gs.sample_points(&mut rng, cfg.points);
    let battery = TestFieldBattery::new(common.seed, cfg.fields);
    let mut reports = vec![verify_algebra(&gs, &points, &battery, common.tol)?];
    reports.push(verify_p_squared(&gs, &points, common.tol)?);
    if gs.picture() == Picture::Schrodinger {
        reports.push(verify_invariance_condition(&gs, &points, &battery, common.tol)?);
    }
    if cfg.casimir {
        let w = casimir_w(&gs);
        let few = &points[..points.len().min(5)];
        let cb = TestFieldBattery::new(common.seed, 1);
        reports.push(verify_casimir(&gs, &w, few, &cb, common.tol)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let mut worst: Vec<_> = reports.iter().flat_map(|r| r.entries.iter()).collect();
    worst.sort_by(|a, b| b.residual.total_cmp(&a.residual));
    worst.truncate(5);
    let doc = json!({
        "command": "verify",
        "seed": common.seed,
        "tol": common.tol,
        "config": cfg,
        "pass": pass,
        "worst": worst,
        "reports": reports,
    });
    let json = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    Ok(VerifyOutcome {
        reports,
        json,
        pass,
    })
}

impl EvolveConfig {
    fn resolve(a: &EvolveArgs, f: &EvolveArgs) -> Result<Self, CliError> {
        let d = Self::default();
        let pick = |x: &Option<Vec<f64>>, y: &Option<Vec<f64>>| x.clone().or(y.clone());
        let cfg = Self {
            n: a.n.or(f.n).unwrap_or(d.n),
            class: match a.class.as_ref().or(f.class.as_ref()) {
                Some(s) => parse_class(s)?,
                None => d.class,
            },
            rep: a.rep.clone().or(f.rep.clone()).unwrap_or(d.rep),
            kappa: a.kappa.or(f.kappa).unwrap_or(d.kappa),
            eta: require_positive("eta", a.eta.or(f.eta).unwrap_or(d.eta))?,
            eps: match a.eps.as_ref().or(f.eps.as_ref()) {
                Some(s) => parse_with("eps", s)?,
                None => d.eps,
            },
            count: a.count.or(f.count).unwrap_or(d.count),
            extent: require_positive("extent", a.extent.or(f.extent).unwrap_or(d.extent))?,
            center: pick(&a.center, &f.center),
            width: pick(&a.width, &f.width).unwrap_or(d.width),
            offset: pick(&a.offset, &f.offset).unwrap_or(d.offset),
            weights: pick(&a.weights, &f.weights),
            times: pick(&a.times, &f.times).unwrap_or(d.times),
            input: a.input.clone().or(f.input.clone()),
        };
        parse_label(&cfg.rep)?;
        if cfg.class == RepClass::I {
            require_positive("kappa", cfg.kappa)?;
        } else if !(cfg.kappa.is_finite() && cfg.kappa >= 0.0) {
            return Err(config_err("kappa", "must be >= 0"));
        }
        if !(2..=4).contains(&cfg.n) && cfg.input.is_none() {
            return Err(config_err("n", format!("{} is outside 2..=4", cfg.n)));
        }
        if cfg.times.is_empty() || cfg.times.iter().any(|t| !t.is_finite()) {
            return Err(config_err("times", "need at least one finite time"));
        }
        Ok(cfg)
    }

    fn mass_for(&self, class: RepClass) -> f64 {
        match class {
            RepClass::I => self.kappa,
            RepClass::IILimit => 0.0,
            RepClass::III => self.eta,
        }
    }

    /// Initial state: the input snapshot, or the configured packet.
    pub fn initial_state(&self) -> Result<GridWaveFunction, CliError> {
        if let Some(path) = &self.input {
            return load_snapshot(path);
        }
        let label = parse_label(&self.rep)?;
        let rep = label
            .build(self.n)
            .map_err(|e| config_err("rep", format!("{:?}: {e}", self.rep)))?;
        let grid = MomentumGrid::cube(self.n, self.extent, self.count)
            .map_err(|e| config_err("count", e))?;
        let broadcast = |flag: &str, v: &[f64], fill: f64| -> Result<Vec<f64>, CliError> {
            match v.len() {
                0 => Ok(vec![fill; self.n]),
                1 => Ok(vec![v[0]; self.n]),
                l if l == self.n => Ok(v.to_vec()),
                l => Err(config_err(flag, format!("{l} values for n = {}", self.n))),
            }
        };
        let center = match &self.center {
            Some(c) => broadcast("center", c, 0.0)?,
            None => {
                let mut c = vec![0.0; self.n];
                if self.class == RepClass::III {
                    c[self.n - 1] = self.eta + 1.0;
                }
                c
            }
        };
        let weights: Vec<C64> = match &self.weights {
            Some(w) if w.len() == rep.dim() => w.iter().map(|&x| C64::new(x, 0.0)).collect(),
            Some(w) => {
                return Err(config_err(
                    "weights",
                    format!("{} weights for a {}-component rep", w.len(), rep.dim()),
                ))
            }
            None => vec![C64::new(1.0, 0.0); rep.dim()],
        };
        let spec = PacketSpec {
            center,
            width: broadcast("width", &self.width, 0.4)?,
            offset: broadcast("offset", &self.offset, 0.0)?,
            weights,
        };
        let class = self.class;
        Ok(GridWaveFunction::gaussian(
            grid,
            rep,
            class,
            self.mass_for(class),
            self.eps,
            &spec,
        )?)
    }
}

fn load_snapshot(path: &Path) -> Result<GridWaveFunction, CliError> {
    let bytes =
        fs::read(path).map_err(|e| config_err("input", format!("{}: {e}", path.display())))?;
    if bytes.is_empty() {
        return Err(config_err("input", format!("{} is empty", path.display())));
    }
    read_snapshot(bytes.as_slice())
        .map_err(|e| config_err("input", format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

/// Summary of an `evolve` run.
#[derive(Debug, Clone, Serialize)]
pub struct EvolveOutcome {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub max_norm_deviation: f64,
    pub files: Vec<PathBuf>,
}

/// Propagates the initial state to every requested time; writes one
/// snapshot per time and `t,re,im` series for the norm, energy, `⟨x_k⟩`
/// and the group velocity.
pub fn cmd_evolve(cfg: &EvolveConfig, common: &Common) -> Result<EvolveOutcome, CliError> {
    let initial = cfg.initial_state()?;
    let momentum = match initial.space() {
        Space::Momentum => initial.clone(),
        Space::Position => initial.fourier_to_momentum()?,
    };
    let n = momentum.grid().n();
    let md = momentum.rep().dim();
    let class = momentum.class();
    let (mass, eps) = (momentum.mass(), momentum.eps());
    let x_ops: Vec<DiffOperator> = (0..n)
        .map(|k| DiffOperator::derivative(n, md, k).scale(C64::new(0.0, 1.0)))
        .collect();
    let v_ops: Vec<DiffOperator> = (0..n)
        .map(|k| group_velocity_operator(n, md, k, class, mass, eps))
        .collect();
    let e_op = DiffOperator::multiplication(
        evolution::energy_field(n, class, mass, eps),
        None,
        md,
    );
    let mut series: Vec<(String, Vec<(f64, C64)>)> = vec![
        ("norm".into(), Vec::new()),
        ("energy".into(), Vec::new()),
    ];
    for k in 1..=n {
        series.push((format!("x{k}"), Vec::new()));
        series.push((format!("v{k}"), Vec::new()));
    }
    let mut files = Vec::new();
    let mut norms = Vec::new();
    for (i, &t) in cfg.times.iter().enumerate() {
        let state = propagate(&momentum, t)?;
        let out = if t == 0.0 {
            initial.clone()
        } else if initial.space() == Space::Position {
            state.fourier_to_position()?
        } else {
            state.clone()
        };
        files.push(write_file(
            &common.out_dir,
            &format!("snapshot_{i:03}.p1n"),
            &snapshot_bytes(&out),
        )?);
        let nrm = state.norm_sq();
        norms.push(nrm);
        series[0].1.push((t, C64::new(nrm, 0.0)));
        series[1].1.push((t, expectation(&e_op, &state)?));
        for k in 0..n {
            series[2 + 2 * k].1.push((t, expectation(&x_ops[k], &state)?));
            series[3 + 2 * k].1.push((t, expectation(&v_ops[k], &state)?));
        }
    }
    for (name, rows) in &series {
        files.push(write_file(
            &common.out_dir,
            &format!("{name}.csv"),
            time_series_csv(rows).as_bytes(),
        )?);
    }
    let max_norm_deviation = norms
        .iter()
        .map(|x| (x - norms[0]).abs())
        .fold(0.0, f64::max);
    let outcome = EvolveOutcome {
        times: cfg.times.clone(),
        norms,
        max_norm_deviation,
        files,
    };
    let summary = json!({
        "command": "evolve",
        "seed": common.seed,
        "config": cfg,
        "times": outcome.times,
        "norms": outcome.norms,
        "max_norm_deviation": outcome.max_norm_deviation,
    });
    write_file(
        &common.out_dir,
        "evolve_summary.json",
        (serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n").as_bytes(),
    )?;
    Ok(outcome)
}

impl SpectrumConfig {
    fn resolve(a: &SpectrumArgs, f: &SpectrumArgs) -> Result<Self, CliError> {
        let input = a
            .input
            .clone()
            .or(f.input.clone())
            .ok_or_else(|| config_err("input", "a snapshot file is required"))?;
        let cfg = Self {
            input,
            m2_min: a.m2_min.or(f.m2_min),
            m2_max: a.m2_max.or(f.m2_max),
            m2_count: a.m2_count.or(f.m2_count),
            branch: match a.branch.as_ref().or(f.branch.as_ref()) {
                Some(s) => parse_with("branch", s)?,
                None => Branch::Positive,
            },
            threshold: a.threshold.or(f.threshold).unwrap_or(0.01),
        };
        if cfg.m2_count == Some(0) || cfg.m2_count == Some(1) {
            return Err(config_err("m2-count", "need at least two samples"));
        }
        if !(cfg.threshold >= 0.0 && cfg.threshold < 1.0) {
            return Err(config_err("threshold", "must lie in [0, 1)"));
        }
        Ok(cfg)
    }
}

/// Writes `mass_spectrum.csv` and `spectrum_summary.json`.
pub fn cmd_spectrum(
    cfg: &SpectrumConfig,
    common: &Common,
) -> Result<evolution::MassDistribution, CliError> {
    let state = load_snapshot(&cfg.input)?;
    let state = match state.space() {
        Space::Position => state,
        Space::Momentum => state.fourier_to_position()?,
    };
    let k2 = state.mass() * state.mass();
    let samples = match cfg.m2_count {
        Some(count) => {
            let lo = cfg.m2_min.unwrap_or(k2);
            let hi = cfg.m2_max.unwrap_or(k2 + 10.0);
            if !(hi > lo) {
                return Err(config_err("m2-max", "must exceed --m2-min"));
            }
            MassGrid::uniform(lo, hi, count)
        }
        None => MassGrid::Modes,
    };
    let opts = MassOptions {
        branch: cfg.branch,
        peak_threshold: cfg.threshold,
    };
    let dist = mass_spectrum(&state, &samples, &opts)?;
    write_file(&common.out_dir, "mass_spectrum.csv", dist.to_csv().as_bytes())?;
    let summary = json!({
        "command": "spectrum",
        "config": cfg,
        "kappa": dist.kappa,
        "mean_m2": dist.mean_m2,
        "lifetime": dist.lifetime,
        "weighted_mean_m2": dist.weighted_mean_m2(),
        "integrated": dist.integrated_total(),
        "peaks": dist.peaks,
    });
    write_file(
        &common.out_dir,
        "spectrum_summary.json",
        (serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n").as_bytes(),
    )?;
    Ok(dist)
}

impl ExportRepConfig {
    fn resolve(a: &ExportRepArgs, f: &ExportRepArgs) -> Result<Self, CliError> {
        let sig = a
            .signature
            .clone()
            .or(f.signature.clone())
            .unwrap_or_else(|| "compact".into());
        let lorentz = match sig.to_ascii_lowercase().as_str() {
            "compact" => false,
            "lorentz" | "tilde" => true,
            other => return Err(config_err("signature", format!("unknown signature {other:?}"))),
        };
        let cfg = Self {
            n: a.n.or(f.n).unwrap_or(4),
            rep: a.rep.clone().or(f.rep.clone()).unwrap_or_else(|| "trivial".into()),
            lorentz,
        };
        parse_label(&cfg.rep)?;
        Ok(cfg)
    }

    pub fn build(&self) -> Result<LittleGroupRep, CliError> {
        let rep = parse_label(&self.rep)?
            .build(self.n)
            .map_err(|e| config_err("rep", format!("{:?}: {e}", self.rep)))?;
        if self.lorentz {
            tilde_continue(&rep).map_err(|e| config_err("rep", e))
        } else {
            Ok(rep)
        }
    }
}

/// Writes `rep.json` and returns its text.
pub fn cmd_export_rep(cfg: &ExportRepConfig, common: &Common) -> Result<String, CliError> {
    let rep = cfg.build()?;
    let text = serde_json::to_string_pretty(&rep.to_json()).expect("rep serializes") + "\n";
    write_file(&common.out_dir, "rep.json", text.as_bytes())?;
    Ok(text)
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| config_err("config", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| config_err("config", format!("{}: {e}", p.display())))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    let d = Common::default();
    let common = Common {
        seed: cli.seed.or(file.seed).unwrap_or(d.seed),
        tol: cli.tol.or(file.tol).unwrap_or(d.tol),
        threads: cli.threads.or(file.threads).unwrap_or(d.threads),
        out_dir: cli.out_dir.clone().or(file.out_dir.clone()).unwrap_or(d.out_dir),
    };
    if !(common.tol.is_finite() && common.tol >= 0.0) {
        return Err(config_err("tol", "must be a non-negative number"));
    }
    if common.threads > 0 {
        // a second in-process call keeps the pool from the first
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
    match &cli.command {
        Command::Verify(a) => {
            let cfg = VerifyConfig::resolve(a, &file.verify)?;
            let out = cmd_verify(&cfg, &common)?;
            for r in &out.reports {
                print!("{r}");
            }
            write_file(&common.out_dir, "verify_report.json", out.json.as_bytes())?;
            println!("overall: {}", if out.pass { "PASS" } else { "FAIL" });
            Ok(if out.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Evolve(a) => {
            let cfg = EvolveConfig::resolve(a, &file.evolve)?;
            let out = cmd_evolve(&cfg, &common)?;
            println!("{:>12} {:>22}", "t", "norm");
            for (t, nrm) in out.times.iter().zip(&out.norms) {
                println!("{t:>12} {nrm:>22.16}");
            }
            println!("max norm deviation: {:.3e}", out.max_norm_deviation);
            Ok(EXIT_PASS)
        }
        Command::Spectrum(a) => {
            let cfg = SpectrumConfig::resolve(a, &file.spectrum)?;
            let dist = cmd_spectrum(&cfg, &common)?;
            println!("mean m^2 = {}", dist.mean_m2);
            println!("lifetime = {}", dist.lifetime);
            for p in &dist.peaks {
                match p.half_width {
                    Some(w) => println!("peak at m^2 = {} (half width {w})", p.m2),
                    None => println!("peak at m^2 = {}", p.m2),
                }
            }
            Ok(EXIT_PASS)
        }
        Command::ExportRep(a) => {
            let cfg = ExportRepConfig::resolve(a, &file.export_rep)?;
            print!("{}", cmd_export_rep(&cfg, &common)?);
            Ok(EXIT_PASS)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
