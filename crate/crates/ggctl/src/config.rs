//! Run configuration: a versioned JSON document, fully resolved (defaults
//! filled in) and validated before any computation starts.

use ggkdv::critical::AlphaForm;
use ggkdv::evolution::{BoundaryData, ControlConfig};
use ggkdv::hum::Multiplier;
use ggkdv::model::{validate_params, SpaceTimeGrid, StatePair, SystemParams};
use ggkdv::sampling::{bump_state, smooth_boundary, smooth_state};
use ggkdv::{Boundary, Grid, State, Validated};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Scenario selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Forward evolution (linear or nonlinear).
    Simulate,
    /// Backward adjoint evolution and boundary traces.
    Adjoint,
    /// Linear exact control by HUM.
    Hum,
    /// Exact control of the nonlinear system by the fixed-point loop.
    NonlinearControl,
    /// Enumeration of critical lengths.
    CriticalList,
    /// Criticality test of one length with its oracles.
    CriticalCheck,
    /// Observability constant against the domain length.
    ObsScan,
    /// Smallest Gramian eigenvalue against the domain length.
    GramianScan,
}

impl Scenario {
    /// Name used on the command line and in summaries.
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Adjoint => "adjoint",
            Scenario::Hum => "hum",
            Scenario::NonlinearControl => "nonlinear-control",
            Scenario::CriticalList => "critical-list",
            Scenario::CriticalCheck => "critical-check",
            Scenario::ObsScan => "obs-scan",
            Scenario::GramianScan => "gramian-scan",
        }
    }
}

/// Coefficients; every field defaults to the reference set
/// `a = 0.5, a1 = a2 = 1, b = c = r = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { a: 0.5, a1: 1.0, a2: 1.0, b: 1.0, c: 1.0, r: 1.0 }
    }
}

impl ParamsConfig {
    /// As library parameters.
    pub fn to_params(self) -> SystemParams<f64> {
        SystemParams { a: self.a, a1: self.a1, a2: self.a2, b: self.b, c: self.c, r: self.r }
    }
}

/// Space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub horizon: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { length: std::f64::consts::PI, horizon: 1.0, nx: 100, nt: 1000 }
    }
}

/// A state on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum StateSpec {
    /// Identically zero.
    #[default]
    Zero,
    /// `(ε sin(πx/L), ε x(L − x)/L²)`.
    Sine { eps: f64 },
    /// Seeded random cosine series with `modes` terms, scaled by `scale`.
    Random { modes: usize, scale: f64 },
    /// Seeded pair of Gaussian bumps away from the ends, scaled by `scale`.
    Bump { scale: f64 },
    /// Explicit nodal values (`nx + 1` each).
    Values { u: Vec<f64>, v: Vec<f64> },
}

impl StateSpec {
    fn build(&self, grid: &Grid, rng: &mut ChaCha8Rng, what: &str) -> CliResult<State> {
        let n = grid.nodes();
        let l = grid.length;
        Ok(match self {
            StateSpec::Zero => StatePair::zeros(n),
            StateSpec::Sine { eps } => {
                let e = *eps;
                StatePair::from_fn(grid, |x| e * (std::f64::consts::PI * x / l).sin(), |x| e * x * (l - x) / (l * l))
            }
            StateSpec::Random { modes, scale } => {
                if *modes == 0 {
                    return Err(CliError::Config(format!("{what}: random state needs modes ≥ 1")));
                }
                smooth_state(grid, rng, *modes).scaled(*scale)
            }
            StateSpec::Bump { scale } => bump_state(grid, rng).scaled(*scale),
            StateSpec::Values { u, v } => {
                if u.len() != n || v.len() != n {
                    return Err(CliError::Config(format!(
                        "{what}: explicit values need {n} entries per component, got {} and {}",
                        u.len(),
                        v.len()
                    )));
                }
                StatePair { u: u.clone(), v: v.clone() }
            }
        })
    }

    fn finite(&self) -> bool {
        match self {
            StateSpec::Zero => true,
            StateSpec::Sine { eps } => eps.is_finite(),
            StateSpec::Random { scale, .. } | StateSpec::Bump { scale } => scale.is_finite(),
            StateSpec::Values { u, v } => u.iter().chain(v).all(|x| x.is_finite()),
        }
    }
}

/// Boundary inputs on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum BoundarySpec {
    /// Homogeneous inputs.
    #[default]
    Zero,
    /// Seeded smooth inputs on the active channels of the configuration, scaled by `scale`.
    Random { scale: f64 },
    /// Explicit series (`nt + 1` samples each); omitted channels are zero.
    Values {
        #[serde(default)]
        h0: Option<Vec<f64>>,
        #[serde(default)]
        h1: Option<Vec<f64>>,
        #[serde(default)]
        h2: Option<Vec<f64>>,
        #[serde(default)]
        g0: Option<Vec<f64>>,
        #[serde(default)]
        g1: Option<Vec<f64>>,
        #[serde(default)]
        g2: Option<Vec<f64>>,
    },
}

impl BoundarySpec {
    fn build(&self, grid: &Grid, cfg: ControlConfig, rng: &mut ChaCha8Rng) -> CliResult<Boundary> {
        let nt = grid.nt;
        Ok(match self {
            BoundarySpec::Zero => BoundaryData::zeros(nt),
            BoundarySpec::Random { scale } => {
                let bd: Boundary = smooth_boundary(grid, cfg, rng);
                BoundaryData::zeros(nt).axpy(*scale, &bd)
            }
            BoundarySpec::Values { h0, h1, h2, g0, g1, g2 } => {
                let pick = |s: &Option<Vec<f64>>, name: &str| -> CliResult<Vec<f64>> {
                    match s {
                        None => Ok(vec![0.0; nt + 1]),
                        Some(v) if v.len() == nt + 1 && v.iter().all(|x| x.is_finite()) => Ok(v.clone()),
                        Some(v) => Err(CliError::Config(format!(
                            "boundary channel {name} needs {} finite samples, got {}",
                            nt + 1,
                            v.len()
                        ))),
                    }
                };
                BoundaryData {
                    h0: pick(h0, "h0")?,
                    h1: pick(h1, "h1")?,
                    h2: pick(h2, "h2")?,
                    g0: pick(g0, "g0")?,
                    g1: pick(g1, "g1")?,
                    g2: pick(g2, "g2")?,
                }
            }
        })
    }
}

/// Options of `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Include the nonlinear terms.
    pub nonlinear: bool,
    /// Keep the self-interaction terms `uu_x` and `vv_x` (nonlinear runs only).
    pub self_terms: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { nonlinear: false, self_terms: true }
    }
}

/// Options of the HUM solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumConfig {
    pub tol: f64,
    pub maxit: usize,
    pub multiplier: MultiplierName,
    /// Treat an unmet CG tolerance as a solver error (exit 2).
    pub require_convergence: bool,
}

impl Default for HumConfig {
    fn default() -> Self {
        Self { tol: 1e-8, maxit: 200, multiplier: MultiplierName::Bessel, require_convergence: false }
    }
}

/// Multiplier on the second-derivative channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierName {
    Bessel,
    Homogeneous,
}

impl MultiplierName {
    /// Library value.
    pub fn multiplier(self) -> Multiplier {
        match self {
            MultiplierName::Bessel => Multiplier::Bessel,
            MultiplierName::Homogeneous => Multiplier::Homogeneous,
        }
    }
}

/// Options of `nonlinear-control`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearConfig {
    /// Smallness bound on `‖init‖_𝒳 + ‖target‖_𝒳`.
    pub delta: f64,
    /// Relative final-error tolerance.
    pub tol: f64,
    pub maxit_outer: usize,
    pub self_terms: bool,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        Self { delta: 1e-2, tol: 5e-2, maxit_outer: 20, self_terms: true }
    }
}

/// Options of the one-control certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    /// Hidden-regularity constant; estimated from `samples` draws when absent.
    pub c_t: Option<f64>,
    pub samples: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self { c_t: None, samples: 8 }
    }
}

/// Form of `α` defining the second family of critical lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaFormName {
    Stated,
    RootSpacing,
}

impl AlphaFormName {
    /// Library value.
    pub fn form(self) -> AlphaForm {
        match self {
            AlphaFormName::Stated => AlphaForm::Stated,
            AlphaFormName::RootSpacing => AlphaForm::RootSpacing,
        }
    }
}

/// Options of the critical-length scenarios and of the critical-length gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalConfig {
    pub lmax: f64,
    /// Length tested by `critical-check` (defaults to the grid length).
    pub length: Option<f64>,
    pub rel_tol: f64,
    pub alpha_form: AlphaFormName,
    /// Tolerance of the root-sharing test.
    pub root_tol: f64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self { lmax: 20.0, length: None, rel_tol: 1e-6, alpha_form: AlphaFormName::Stated, root_tol: 1e-6 }
    }
}

/// Evenly spaced values `from, …, to` (`count ≥ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Range {
    /// The sample points.
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.from];
        }
        (0..self.count).map(|k| self.from + (self.to - self.from) * k as f64 / (self.count - 1) as f64).collect()
    }
}

/// Options of the scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Domain lengths of `obs-scan` and `gramian-scan`.
    pub lengths: Range,
    /// Imaginary parts of the spectral parameters `λ = iθ` of the kernel scan.
    pub lambda_imag: Range,
    pub kernel_nx: usize,
    pub lanczos_steps: usize,
    /// Random final data per length in `obs-scan`.
    pub samples: usize,
    /// Cosine modes per component of the modal observability Gramian.
    pub modal_modes: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lengths: Range { from: 4.0, to: 7.0, count: 7 },
            lambda_imag: Range { from: -2.0, to: 2.0, count: 41 },
            kernel_nx: 96,
            lanczos_steps: 40,
            samples: 8,
            modal_modes: 12,
        }
    }
}

/// Artifact options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Emit SVG plots next to the CSV files.
    pub plots: bool,
    /// Number of evenly spaced time levels written for trajectories.
    pub snapshots: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { plots: true, snapshots: 11 }
    }
}

/// The configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must equal [`SCHEMA_VERSION`].
    pub schema_version: u32,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_config_id")]
    pub config_id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial: StateSpec,
    #[serde(default)]
    pub target: StateSpec,
    /// Final datum of the adjoint system (`adjoint` scenario).
    #[serde(default)]
    pub final_data: StateSpec,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub hum: HumConfig,
    #[serde(default)]
    pub nonlinear: NonlinearConfig,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub critical: CriticalConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_config_id() -> String {
    "C3".into()
}

/// Everything a scenario needs, built from a validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub params: Validated,
    pub grid: Grid,
    pub cfg: ControlConfig,
    pub init: State,
    pub target: State,
    pub final_data: State,
    pub boundary: Boundary,
}

/// Parses a configuration document.
pub fn parse(text: &str) -> CliResult<RunConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(CliError::Config(format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})"))),
        None => return Err(CliError::Config("missing integer field schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("schema violation: {e}")))
}

/// Checks ranges and builds the library objects; random states and inputs
/// are drawn from one generator seeded with `seed`, in the fixed order
/// initial → target → final data → boundary.
pub fn resolve(mut raw: RunConfig, seed: u64) -> CliResult<Resolved> {
    raw.seed = seed;
    let params = validate_params(&raw.params.to_params()).map_err(|e| CliError::Config(e.to_string()))?;
    let g = raw.grid;
    let grid = SpaceTimeGrid::new(g.length, g.horizon, g.nx, g.nt).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = ControlConfig::parse(&raw.config_id)
        .ok_or_else(|| CliError::Config(format!("config_id must be one of C1..C6, got {:?}", raw.config_id)))?;
    for (name, spec) in [("initial", &raw.initial), ("target", &raw.target), ("final_data", &raw.final_data)] {
        if !spec.finite() {
            return Err(CliError::Config(format!("{name}: values must be finite")));
        }
    }
    let h = &raw.hum;
    if !(h.tol > 0.0 && h.tol.is_finite()) || h.maxit == 0 {
        return Err(CliError::Config("hum: tol must be positive and maxit ≥ 1".into()));
    }
    let n = &raw.nonlinear;
    if !(n.delta > 0.0) || !(n.tol > 0.0) || n.maxit_outer == 0 {
        return Err(CliError::Config("nonlinear: delta and tol must be positive, maxit_outer ≥ 1".into()));
    }
    if let Some(c) = raw.certificate.c_t {
        if !(c > 0.0 && c.is_finite()) {
            return Err(CliError::Config("certificate: c_t must be positive".into()));
        }
    }
    let c = &raw.critical;
    if !(c.lmax > 0.0) || !(c.rel_tol > 0.0) || !(c.root_tol > 0.0) || c.length.is_some_and(|l| !(l > 0.0)) {
        return Err(CliError::Config("critical: lmax, rel_tol, root_tol and length must be positive".into()));
    }
    let s = &raw.scan;
    if s.lengths.count == 0 || s.lengths.values().iter().any(|l| !(*l > 0.0)) {
        return Err(CliError::Config("scan.lengths must be positive with count ≥ 1".into()));
    }
    if s.lambda_imag.count == 0 || s.kernel_nx < ggkdv::critical::MIN_KERNEL_NX || s.lanczos_steps < 2 {
        return Err(CliError::Config(format!(
            "scan: lambda_imag.count ≥ 1, kernel_nx ≥ {}, lanczos_steps ≥ 2 required",
            ggkdv::critical::MIN_KERNEL_NX
        )));
    }
    if s.samples == 0 || s.modal_modes == 0 || 2 * s.modal_modes > grid.nodes() {
        return Err(CliError::Config("scan: samples ≥ 1 and 1 ≤ modal_modes ≤ (nx+1)/2 required".into()));
    }
    if raw.output.snapshots < 2 {
        return Err(CliError::Config("output.snapshots must be at least 2".into()));
    }
    let mut rng = ggkdv::sampling::rng(seed);
    let init = raw.initial.build(&grid, &mut rng, "initial")?;
    let target = raw.target.build(&grid, &mut rng, "target")?;
    let final_data = raw.final_data.build(&grid, &mut rng, "final_data")?;
    let boundary = raw.boundary.build(&grid, cfg, &mut rng)?;
    Ok(Resolved { raw, params, grid, cfg, init, target, final_data, boundary })
}
