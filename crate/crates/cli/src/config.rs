//! Layered run configuration: built-in defaults, then a named preset, then
//! a flat `key = value` config file, then command-line flags — later layers
//! win. Presets live in a data file shipped with the binary (embedded copy
//! used unless `--presets-file` points elsewhere).

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use bistab::model::{derive_dimensionless, drive_for_amplitude, intracavity_roots, Drive, PhysicalParams};

pub const EMBEDDED_PRESETS: &str = include_str!("../presets.txt");

/// CLI-level failure split by exit code: 2 for configuration problems,
/// 3 for numerical/runtime failures (module errors surfaced verbatim).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<bistab::Error> for CliError {
    fn from(e: bistab::Error) -> Self {
        use bistab::Error::*;
        match &e {
            InvalidParameter(_) | OscillatoryRegimeRequired { .. } | DimensionGuard { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Jacobian approximation requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Reduced,
    Full,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Reduced => "reduced",
            Mode::Full => "full",
        }
    }
}

/// One layer of settings; every field optional so layers merge cleanly.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub g_mhz: Option<f64>,
    pub kappa_mhz: Option<f64>,
    pub gamma_mhz: Option<f64>,
    pub natoms: Option<u32>,
    pub xi: Option<f64>,
    pub c: Option<f64>,
    pub x: Option<f64>,
    pub drive_y: Option<f64>,
    pub y_max: Option<f64>,
    pub y_steps: Option<usize>,
    pub pair: Option<String>,
    pub tau_max: Option<f64>,
    pub tau_steps: Option<usize>,
    pub detuning_max: Option<f64>,
    pub detuning_steps: Option<usize>,
    pub mode: Option<Mode>,
    pub components: Option<bool>,
    pub numeric_only: Option<bool>,
    pub fock_cutoff: Option<usize>,
    pub fit_frequency: Option<bool>,
    pub format_json: Option<bool>,
}

macro_rules! take_over {
    ($self:ident, $over:ident, $($field:ident),+ $(,)?) => {
        $(if $over.$field.is_some() { $self.$field = $over.$field.clone(); })+
    };
}

impl Settings {
    /// Overlays `over` on top of `self`; set fields of `over` win.
    pub fn merge(&mut self, over: &Settings) {
        take_over!(
            self, over, g_mhz, kappa_mhz, gamma_mhz, natoms, xi, c, x, drive_y, y_max, y_steps,
            pair, tau_max, tau_steps, detuning_max, detuning_steps, mode, components,
            numeric_only, fock_cutoff, fit_frequency, format_json,
        );
    }

    /// Assigns one `key = value` entry (config-file and preset syntax).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("bad value `{value}` for key `{key}` ({what})"));
        let f = || value.parse::<f64>().map_err(|_| bad("expected a number"));
        let u = || value.parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
        let b = || match value {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(bad("expected true/false")),
        };
        match key {
            "g_mhz" => self.g_mhz = Some(f()?),
            "kappa_mhz" => self.kappa_mhz = Some(f()?),
            "gamma_mhz" => self.gamma_mhz = Some(f()?),
            "natoms" => {
                self.natoms = Some(value.parse::<u32>().map_err(|_| bad("expected a count"))?)
            }
            "xi" => self.xi = Some(f()?),
            "c" => self.c = Some(f()?),
            "x" => self.x = Some(f()?),
            "drive_y" => self.drive_y = Some(f()?),
            "y_max" => self.y_max = Some(f()?),
            "y_steps" => self.y_steps = Some(u()?),
            "pair" => self.pair = Some(value.to_string()),
            "tau_max" => self.tau_max = Some(f()?),
            "tau_steps" => self.tau_steps = Some(u()?),
            "detuning_max" => self.detuning_max = Some(f()?),
            "detuning_steps" => self.detuning_steps = Some(u()?),
            "mode" => {
                self.mode = Some(match value {
                    "reduced" => Mode::Reduced,
                    "full" => Mode::Full,
                    _ => return Err(bad("expected reduced|full")),
                })
            }
            "components" => self.components = Some(b()?),
            "numeric_only" => self.numeric_only = Some(b()?),
            "fock_cutoff" => self.fock_cutoff = Some(u()?),
            "fit_frequency" => self.fit_frequency = Some(b()?),
            "format" => {
                self.format_json = Some(match value {
                    "json" => true,
                    "csv" => false,
                    _ => return Err(bad("expected csv|json")),
                })
            }
            _ => return Err(CliError::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` block ('#' comments, blank lines allowed).
    pub fn from_flat(text: &str, source: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{source}:{}: expected `key = value`", lineno + 1))
            })?;
            s.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("{source}:{}: {e}", lineno + 1)))?;
        }
        Ok(s)
    }
}

/// Parses the preset data file: `[name]` sections of `key = value` lines.
pub fn parse_presets(text: &str, source: &str) -> Result<BTreeMap<String, Settings>, CliError> {
    let mut out = BTreeMap::new();
    let mut current: Option<(String, Settings)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            if let Some((n, s)) = current.take() {
                out.insert(n, s);
            }
            current = Some((name.trim().to_string(), Settings::default()));
            continue;
        }
        let (name, s) = current.as_mut().ok_or_else(|| {
            CliError::Config(format!("{source}:{}: key outside a [preset] section", lineno + 1))
        })?;
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{source}:{}: expected `key = value`", lineno + 1))
        })?;
        s.set(k.trim(), v.trim())
            .map_err(|e| CliError::Config(format!("{source} [{name}]:{}: {e}", lineno + 1)))?;
    }
    if let Some((n, s)) = current {
        out.insert(n, s);
    }
    Ok(out)
}

pub fn load_preset(name: &str, presets_file: Option<&Path>) -> Result<Settings, CliError> {
    let (text, source) = match presets_file {
        Some(p) => (
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        None => (EMBEDDED_PRESETS.to_string(), "<built-in presets>".to_string()),
    };
    let table = parse_presets(&text, &source)?;
    table.get(name).cloned().ok_or_else(|| {
        let known: Vec<&str> = table.keys().map(|s| s.as_str()).collect();
        CliError::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

/// Fully resolved operating point: dimensionless parameters plus, when the
/// raw rates were given, the physical parameter set behind them.
#[derive(Debug, Clone)]
pub struct Scene {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub xi: f64,
    pub c: f64,
    pub n_atoms: Option<f64>,
    pub physical: Option<PhysicalParams>,
    pub mode: Mode,
}

impl Scene {
    pub fn require_x(&self) -> Result<f64, CliError> {
        self.x
            .ok_or_else(|| CliError::Config("an operating point is required: give --X or --drive-Y".into()))
    }

    pub fn require_natoms(&self) -> Result<f64, CliError> {
        self.n_atoms
            .ok_or_else(|| CliError::Config("--natoms is required for this subcommand".into()))
    }
}

pub fn resolve(s: &Settings) -> Result<Scene, CliError> {
    let rates = [s.g_mhz, s.kappa_mhz, s.gamma_mhz];
    let physical = if rates.iter().any(Option::is_some) {
        let [Some(g), Some(kappa), Some(gamma)] = rates else {
            return Err(CliError::Config(
                "--g, --kappa and --gamma must be given together (all in MHz)".into(),
            ));
        };
        let natoms = s.natoms.ok_or_else(|| {
            CliError::Config("--natoms is required when raw rates are given".into())
        })?;
        Some(PhysicalParams {
            g: TAU * g * 1e6,
            kappa: TAU * kappa * 1e6,
            gamma: TAU * gamma * 1e6,
            n_atoms: natoms,
            omega0: 0.0,
            drive: Drive::ScaledY(s.drive_y.unwrap_or(0.0)),
            phi0: std::f64::consts::FRAC_PI_2,
        })
    } else {
        None
    };

    // Explicit dimensionless values win over derived ones.
    let derived = physical.as_ref().map(derive_dimensionless).transpose()?;
    let xi = s.xi.or(derived.map(|d| d.xi)).ok_or_else(|| {
        CliError::Config("no decay ratio: give --xi or the raw rates (--g --kappa --gamma)".into())
    })?;
    let c = s.c.or(derived.map(|d| d.c)).ok_or_else(|| {
        CliError::Config("no cooperativity: give --c or the raw rates (--g --kappa --gamma)".into())
    })?;
    if !(xi > 0.0 && c > 0.0) {
        return Err(CliError::Config(format!("need xi > 0 and C > 0, got xi = {xi}, C = {c}")));
    }

    // X pins Y through the state equation; a bare Y picks the smallest
    // (lower-branch) root as the operating amplitude.
    let (x, y) = match (s.x, s.drive_y) {
        (Some(x), _) => (Some(x), Some(drive_for_amplitude(x, c)?)),
        (None, Some(y)) => {
            let roots = intracavity_roots(y, c)?;
            (roots.first().map(|r| r.x), Some(y))
        }
        (None, None) => (None, None),
    };

    Ok(Scene {
        x,
        y,
        xi,
        c,
        n_atoms: s.natoms.map(f64::from),
        physical,
        mode: s.mode.unwrap_or_default(),
    })
}
