//! Run configuration: the TOML file model, flag overrides, and resolution
//! into concrete simulation objects.
//!
//! Precedence is fixed: built-in defaults, then the file named by
//! `--config`, then individual flags. `--dump-config` prints the merged
//! result, and that output reparses to an identical run.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use lmsz_spin::params::{CouplingParams, ScenarioKind};
use lmsz_spin::propagate::PropagationConfig;
use lmsz_spin::qubit::{decompose_qubit_blocks, EffectiveBlock};
use lmsz_spin::sweep::{CrossingMode, SweepProtocol, SystemKind};

use crate::args::CommonArgs;
use crate::error::{config_err, Result};

/// Default adiabaticity margin sizing the sweep window.
pub const DEFAULT_WINDOW_FACTOR: f64 = 50.0;
/// Default seed for the sampled self-test suites.
pub const DEFAULT_SEED: u64 = 0x1f2e_3d4c;
/// Default probability tolerance for interaction classification.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;

/// Which pair of spins is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    /// Two spin-1/2 particles (4-dim pair basis).
    Qubits,
    /// Two spin-1 particles (9-dim pair basis).
    Qutrits,
}

impl SystemArg {
    pub fn kind(self) -> SystemKind {
        match self {
            SystemArg::Qubits => SystemKind::QubitPair,
            SystemArg::Qutrits => SystemKind::QutritPair,
        }
    }

    /// Basis labels of this system, in output order.
    pub fn labels(self) -> Vec<String> {
        match self {
            SystemArg::Qubits => lmsz_spin::operators::qubit_pair_labels(),
            SystemArg::Qutrits => lmsz_spin::operators::qutrit_pair_labels(),
        }
    }

    /// Initial basis state used when none is configured.
    pub fn default_initial(self) -> &'static str {
        match self {
            SystemArg::Qubits => "--",
            SystemArg::Qutrits => "-10",
        }
    }

    /// Name of the entanglement column in CSV output.
    pub fn entanglement_column(self) -> &'static str {
        match self {
            SystemArg::Qubits => "concurrence",
            SystemArg::Qutrits => "negativity",
        }
    }
}

/// Whether the sweep traverses the crossing fully or stops on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Full,
    Half,
}

impl ModeArg {
    pub fn crossing(self) -> CrossingMode {
        match self {
            ModeArg::Full => CrossingMode::Full,
            ModeArg::Half => CrossingMode::Half,
        }
    }
}

/// Scannable quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisArg {
    Alpha,
    Lambda,
    GammaX,
    GammaY,
    GammaZ,
    GammaXy,
    GammaYx,
}

impl AxisArg {
    /// CSV column name for the scanned value.
    pub fn column(self) -> &'static str {
        match self {
            AxisArg::Alpha => "alpha",
            AxisArg::Lambda => "lambda",
            AxisArg::GammaX => "gamma_x",
            AxisArg::GammaY => "gamma_y",
            AxisArg::GammaZ => "gamma_z",
            AxisArg::GammaXy => "gamma_xy",
            AxisArg::GammaYx => "gamma_yx",
        }
    }

    /// Replaces the scanned coupling component, if this axis is one.
    pub fn apply_to(self, p: &CouplingParams, v: f64) -> CouplingParams {
        let mut q = *p;
        match self {
            AxisArg::Alpha | AxisArg::Lambda => {}
            AxisArg::GammaX => q.gamma_x = v,
            AxisArg::GammaY => q.gamma_y = v,
            AxisArg::GammaZ => q.gamma_z = v,
            AxisArg::GammaXy => q.gamma_xy = v,
            AxisArg::GammaYx => q.gamma_yx = v,
        }
        q
    }
}

/// Raw coupling components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Couplings {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xy: f64,
    pub yx: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Couplings {
            x: 0.0,
            y: 0.0,
            z: 0.0,
            xy: 0.0,
            yx: 0.0,
        }
    }
}

/// Named scenario with its two strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub gamma: f64,
    #[serde(default)]
    pub cross: f64,
}

/// Scan axis with range and point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub axis: AxisArg,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

/// Observed probability pair for classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedConfig {
    pub p_plus: f64,
    pub p_minus: f64,
}

/// The merged, effective run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Dimensionless sweep exponent; converted to a slope through the
    /// coupled block magnitude when `alpha` is not given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub window_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub mode: ModeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub couplings: Couplings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<ObservedConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemArg::Qubits,
            alpha: None,
            lambda: None,
            window_factor: DEFAULT_WINDOW_FACTOR,
            tolerance: None,
            mode: ModeArg::Full,
            initial: None,
            seed: DEFAULT_SEED,
            out: None,
            couplings: Couplings::default(),
            scenario: None,
            scan: None,
            observed: None,
        }
    }
}

/// Turns letter-coded labels into canonical basis labels (`p` for `+`,
/// `m` for `-`), so states can be named without leading hyphens.
pub fn canonical_label(raw: &str) -> String {
    raw.replace('p', "+").replace('m', "-")
}

/// Parses the scenario name into its kind.
pub fn parse_scenario_kind(name: &str) -> Result<ScenarioKind> {
    ScenarioKind::all()
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| {
            let known: Vec<&str> = ScenarioKind::all().iter().map(|k| k.name()).collect();
            config_err(format!(
                "unknown scenario '{name}'; expected one of: {}",
                known.join(", ")
            ))
        })
}

fn parse_gammas(s: &str) -> Result<Couplings> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(config_err(format!(
            "--gammas expects five comma-separated values x,y,z,xy,yx, got '{s}'"
        )));
    }
    let mut v = [0.0f64; 5];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .parse()
            .map_err(|e| config_err(format!("bad coupling value '{p}' in --gammas: {e}")))?;
    }
    Ok(Couplings {
        x: v[0],
        y: v[1],
        z: v[2],
        xy: v[3],
        yx: v[4],
    })
}

fn parse_scenario_flag(s: &str, existing: Option<&ScenarioConfig>) -> Result<ScenarioConfig> {
    let parts: Vec<&str> = s.split(':').collect();
    let name = parts[0].to_string();
    parse_scenario_kind(&name)?;
    match parts.len() {
        1 => match existing {
            Some(sc) => Ok(ScenarioConfig {
                name,
                gamma: sc.gamma,
                cross: sc.cross,
            }),
            None => Err(config_err(format!(
                "scenario '{name}' needs strengths: pass NAME:GAMMA[:CROSS] or a [scenario] config section"
            ))),
        },
        2 | 3 => {
            let gamma: f64 = parts[1]
                .parse()
                .map_err(|e| config_err(format!("bad scenario strength '{}': {e}", parts[1])))?;
            let cross: f64 = if parts.len() == 3 {
                parts[2]
                    .parse()
                    .map_err(|e| config_err(format!("bad scenario strength '{}': {e}", parts[2])))?
            } else {
                0.0
            };
            Ok(ScenarioConfig { name, gamma, cross })
        }
        _ => Err(config_err(format!(
            "--scenario expects NAME or NAME:GAMMA[:CROSS], got '{s}'"
        ))),
    }
}

fn parse_scan_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(config_err(format!(
            "--scan-range expects LO:HI:N, got '{s}'"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| config_err(format!("bad scan bound '{}': {e}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| config_err(format!("bad scan bound '{}': {e}", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|e| config_err(format!("bad scan point count '{}': {e}", parts[2])))?;
    Ok((lo, hi, n))
}

/// Loads the config file (when given) and applies flag overrides.
pub fn merged(args: &CommonArgs) -> Result<RunConfig> {
    let mut rc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                config_err(format!("cannot read config file {}: {e}", path.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };

    if let Some(s) = args.system {
        rc.system = s;
    }
    if let Some(a) = args.alpha {
        rc.alpha = Some(a);
    }
    if let Some(l) = args.lambda {
        rc.lambda = Some(l);
        if args.alpha.is_none() {
            // a lambda flag replaces a slope that came from the file
            rc.alpha = None;
        }
    }
    if let Some(w) = args.window_factor {
        rc.window_factor = w;
    }
    if let Some(t) = args.tol {
        rc.tolerance = Some(t);
    }
    if let Some(m) = args.mode {
        rc.mode = m;
    }
    if let Some(i) = &args.initial {
        rc.initial = Some(i.clone());
    }
    if let Some(s) = args.seed {
        rc.seed = s;
    }
    if let Some(o) = &args.out {
        rc.out = Some(o.clone());
    }
    if let Some(g) = &args.gammas {
        rc.couplings = parse_gammas(g)?;
        rc.scenario = None;
    }
    if let Some(s) = &args.scenario {
        rc.scenario = Some(parse_scenario_flag(s, rc.scenario.as_ref())?);
    }
    if args.scan_axis.is_some() || args.scan_range.is_some() {
        let axis = args
            .scan_axis
            .or(rc.scan.map(|sc| sc.axis))
            .ok_or_else(|| config_err("--scan-range needs a --scan-axis"))?;
        let (lo, hi, points) = match &args.scan_range {
            Some(r) => parse_scan_range(r)?,
            None => match rc.scan {
                Some(sc) => (sc.lo, sc.hi, sc.points),
                None => return Err(config_err("--scan-axis needs a --scan-range LO:HI:N")),
            },
        };
        rc.scan = Some(ScanConfig {
            axis,
            lo,
            hi,
            points,
        });
    }
    rc.validate()?;
    Ok(rc)
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(config_err(format!(
                    "alpha must be positive and finite, got {a}"
                )));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(config_err(format!(
                    "lambda must be positive and finite, got {l}"
                )));
            }
        }
        if !(self.window_factor > 0.0) || !self.window_factor.is_finite() {
            return Err(config_err(format!(
                "window factor must be positive and finite, got {}",
                self.window_factor
            )));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) || !t.is_finite() {
                return Err(config_err(format!(
                    "tolerance must be positive and finite, got {t}"
                )));
            }
        }
        if let Some(sc) = &self.scan {
            if !sc.lo.is_finite() || !sc.hi.is_finite() {
                return Err(config_err("scan bounds must be finite"));
            }
            if sc.points == 0 {
                return Err(config_err("scan needs at least one point"));
            }
            if sc.points == 1 && sc.lo != sc.hi {
                return Err(config_err(
                    "a single-point scan needs lo == hi in its range",
                ));
            }
            if sc.points > 1 && !(sc.hi > sc.lo) {
                return Err(config_err(format!(
                    "scan range must satisfy lo < hi, got {}:{}",
                    sc.lo, sc.hi
                )));
            }
        }
        if let Some(ob) = &self.observed {
            for p in [ob.p_plus, ob.p_minus] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(config_err(format!(
                        "observed probabilities must lie in [0, 1], got {p}"
                    )));
                }
            }
        }
        if let Some(sc) = &self.scenario {
            parse_scenario_kind(&sc.name)?;
        }
        Ok(())
    }

    /// Serializes the effective configuration back to TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| config_err(format!("cannot serialize configuration: {e}")))
    }

    /// Concrete couplings: the scenario realization when one is named,
    /// otherwise the raw components.
    pub fn params(&self) -> Result<CouplingParams> {
        let p = match &self.scenario {
            Some(sc) => {
                let kind = parse_scenario_kind(&sc.name)?;
                let realized = match self.system {
                    SystemArg::Qubits => kind.qubit_params(sc.gamma, sc.cross),
                    SystemArg::Qutrits => kind.qutrit_params(sc.gamma, sc.cross),
                };
                realized.map_err(|e| config_err(e.to_string()))?
            }
            None => {
                let c = self.couplings;
                CouplingParams::new(c.x, c.y, c.z, c.xy, c.yx)
            }
        };
        if self.system == SystemArg::Qutrits && p.gamma_z != 0.0 {
            return Err(config_err(
                "the qutrit pair model supports no longitudinal coupling; set gamma z to 0",
            ));
        }
        Ok(p)
    }

    /// Canonical initial-state label.
    pub fn initial_label(&self) -> Result<String> {
        let raw = self
            .initial
            .clone()
            .unwrap_or_else(|| self.system.default_initial().to_string());
        let label = canonical_label(&raw);
        if !self.system.labels().iter().any(|l| *l == label) {
            return Err(config_err(format!(
                "initial state '{raw}' is not a basis label of the {} system",
                match self.system {
                    SystemArg::Qubits => "qubit",
                    SystemArg::Qutrits => "qutrit",
                }
            )));
        }
        Ok(label)
    }

    /// The two-level block of the qubit pair containing `label`.
    pub fn block_of_label(p: &CouplingParams, label: &str) -> Result<EffectiveBlock> {
        decompose_qubit_blocks(p, 0.0, 0.0)
            .into_iter()
            .find(|b| b.basis.iter().any(|s| *s == label))
            .ok_or_else(|| config_err(format!("label '{label}' is not a qubit pair state")))
    }

    /// Reference transverse magnitude used to convert `lambda` to a slope:
    /// the initial state's block for qubits, the larger fictitious-qubit
    /// coupling for qutrits.
    pub fn lambda_reference(&self, p: &CouplingParams) -> Result<f64> {
        let m = match self.system {
            SystemArg::Qubits => Self::block_of_label(p, &self.initial_label()?)?.m(),
            SystemArg::Qutrits => p.m_plus().max(p.m_minus()),
        };
        if m == 0.0 {
            return Err(config_err(
                "lambda needs a nonzero transverse coupling to define a slope",
            ));
        }
        Ok(m)
    }

    /// Converts a `lambda` value to a sweep slope for this system.
    ///
    /// The qubit exponent convention is `lambda = 2 pi m^2 / alpha`; the
    /// qutrit scans use the plot convention `lambda = m^2 / alpha`.
    pub fn alpha_from_lambda(&self, p: &CouplingParams, lambda: f64) -> Result<f64> {
        let m = self.lambda_reference(p)?;
        let alpha = match self.system {
            SystemArg::Qubits => 2.0 * std::f64::consts::PI * m * m / lambda,
            SystemArg::Qutrits => m * m / lambda,
        };
        Ok(alpha)
    }

    /// The sweep slope, from `alpha` directly or converted from `lambda`.
    pub fn resolve_alpha(&self, p: &CouplingParams) -> Result<f64> {
        match (self.alpha, self.lambda) {
            (Some(_), Some(_)) => Err(config_err(
                "alpha and lambda both set; choose one way to fix the sweep slope",
            )),
            (Some(a), None) => Ok(a),
            (None, Some(l)) => self.alpha_from_lambda(p, l),
            (None, None) => Err(config_err("a sweep slope is required: set alpha or lambda")),
        }
    }

    /// Sweep protocol with the configured window margin.
    pub fn sweep(&self, p: &CouplingParams, alpha: f64) -> Result<SweepProtocol> {
        let m_max = p.m_plus().max(p.m_minus());
        SweepProtocol::with_window_factor(
            alpha,
            self.mode.crossing(),
            self.window_factor,
            m_max,
            self.system.kind(),
        )
        .map_err(|e| config_err(e.to_string()))
    }

    /// Propagation settings with the optional accuracy override.
    pub fn prop_config(&self) -> PropagationConfig {
        let mut cfg = PropagationConfig::default();
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        cfg
    }

    /// The scan section, required for the scan command.
    pub fn scan_section(&self) -> Result<&ScanConfig> {
        self.scan.as_ref().ok_or_else(|| {
            config_err("scan needs --scan-axis and --scan-range (or a [scan] config section)")
        })
    }

    /// Grid of scanned values (single-point ranges are allowed).
    pub fn scan_grid(&self) -> Result<Vec<f64>> {
        let sc = self.scan_section()?;
        if sc.points == 1 {
            return Ok(vec![sc.lo]);
        }
        lmsz_spin::scan::linear_grid(sc.lo, sc.hi, sc.points).map_err(|e| config_err(e.to_string()))
    }
}
