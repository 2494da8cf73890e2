//! `bistab` — command-line front end for the linearized fluctuation engine.
//!
//! Configuration is layered (defaults < preset < config file < flags) and
//! every run is deterministic: the same resolved configuration produces
//! byte-identical output files.

mod commands;
mod config;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{load_preset, resolve, CliError, Mode, Settings};

#[derive(Parser)]
#[command(
    name = "bistab",
    version,
    about = "Linearized quantum fluctuations in absorptive optical bistability"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mean-field steady states: roots, branches, atomic means, rates.
    Steady(RunArgs),
    /// Steady-state covariance matrix of the fluctuation variables.
    Covariance(RunArgs),
    /// Two-time correlation trace with its closed-form counterpart.
    Correlate(RunArgs),
    /// Transmission and squeezing spectra over a detuning grid.
    Spectrum(RunArgs),
    /// Write the CSV data bundle behind one of the reference figures.
    Figure {
        /// Figure number.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        n: u8,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Exact master-equation cross-check; emits a JSON report.
    Oracle(RunArgs),
    /// Fast end-to-end numerical check battery.
    Selftest,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Named parameter preset (e.g. raizen, fig3, fig4, mielke, fig1).
    #[arg(long)]
    preset: Option<String>,

    /// Preset data file replacing the built-in table.
    #[arg(long, value_name = "PATH")]
    presets_file: Option<PathBuf>,

    /// Atom-cavity coupling g/2π in MHz.
    #[arg(long)]
    g: Option<f64>,

    /// Cavity field decay κ/2π in MHz.
    #[arg(long)]
    kappa: Option<f64>,

    /// Spontaneous-emission rate γ/2π in MHz.
    #[arg(long)]
    gamma: Option<f64>,

    /// Number of atoms N.
    #[arg(long)]
    natoms: Option<u32>,

    /// Decay ratio ξ = 2κ/γ (alternative to raw rates).
    #[arg(long)]
    xi: Option<f64>,

    /// Cooperativity C (alternative to raw rates).
    #[arg(long)]
    c: Option<f64>,

    /// Scaled drive Y.
    #[arg(long = "drive-Y", value_name = "Y")]
    drive_y: Option<f64>,

    /// Scaled intracavity amplitude X (pins Y through the state equation).
    #[arg(long = "X", value_name = "X")]
    x: Option<f64>,

    /// Upper end of a drive sweep [0, y-max] (steady only).
    #[arg(long)]
    y_max: Option<f64>,

    /// Number of sweep intervals for --y-max.
    #[arg(long)]
    y_steps: Option<usize>,

    /// Covariance entry, e.g. nu*z, z*z, nu*z*, z*nu*, nu*nu*, nu*mu.
    #[arg(long)]
    pair: Option<String>,

    /// Upper end of the scaled-time grid τ̄ ∈ [0, tau-max].
    #[arg(long)]
    tau_max: Option<f64>,

    /// Number of grid intervals for --tau-max.
    #[arg(long)]
    tau_steps: Option<usize>,

    /// Half-width of the symmetric detuning grid.
    #[arg(long)]
    detuning_max: Option<f64>,

    /// Number of grid intervals for --detuning-max.
    #[arg(long)]
    detuning_steps: Option<usize>,

    /// Weak-excitation (reduced) Jacobian — the default.
    #[arg(long, conflicts_with = "full")]
    reduced: bool,

    /// Exact linearization about the operating point.
    #[arg(long)]
    full: bool,

    /// Also emit the closed-form component columns (correlate).
    #[arg(long)]
    components: bool,

    /// Allow pairs without a closed form: engine trace only (correlate).
    #[arg(long)]
    numeric_only: bool,

    /// Photon-space truncation for the oracle (default 12).
    #[arg(long)]
    fock_cutoff: Option<usize>,

    /// Fit the vacuum Rabi frequency from a two-time run (oracle).
    #[arg(long)]
    fit_frequency: bool,

    /// Output path (stdout when omitted); a directory for `figure`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl RunArgs {
    fn to_settings(&self) -> Settings {
        Settings {
            g_mhz: self.g,
            kappa_mhz: self.kappa,
            gamma_mhz: self.gamma,
            natoms: self.natoms,
            xi: self.xi,
            c: self.c,
            x: self.x,
            drive_y: self.drive_y,
            y_max: self.y_max,
            y_steps: self.y_steps,
            pair: self.pair.clone(),
            tau_max: self.tau_max,
            tau_steps: self.tau_steps,
            detuning_max: self.detuning_max,
            detuning_steps: self.detuning_steps,
            mode: if self.full {
                Some(Mode::Full)
            } else if self.reduced {
                Some(Mode::Reduced)
            } else {
                None
            },
            components: self.components.then_some(true),
            numeric_only: self.numeric_only.then_some(true),
            fock_cutoff: self.fock_cutoff,
            fit_frequency: self.fit_frequency.then_some(true),
            format_json: self.format.map(|f| f == FormatArg::Json),
        }
    }

    /// defaults < preset < config file < flags.
    fn layered(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(name) = &self.preset {
            s.merge(&load_preset(name, self.presets_file.as_deref())?);
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            s.merge(&Settings::from_flat(&text, &path.display().to_string())?);
        }
        s.merge(&self.to_settings());
        // X and Y both pin the operating point; a flag for one displaces a
        // lower layer's value for the other.
        if self.drive_y.is_some() && self.x.is_none() {
            s.x = None;
        }
        if self.x.is_some() && self.drive_y.is_none() {
            s.drive_y = None;
        }
        Ok(s)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Steady(args) => {
            let s = args.layered()?;
            let t = commands::steady(&resolve(&s)?, &s)?;
            t.emit(args.out.as_deref(), s.format_json.unwrap_or(false))
        }
        Cmd::Covariance(args) => {
            let s = args.layered()?;
            let t = commands::covariance(&resolve(&s)?)?;
            t.emit(args.out.as_deref(), s.format_json.unwrap_or(false))
        }
        Cmd::Correlate(args) => {
            let s = args.layered()?;
            let t = commands::correlate(&resolve(&s)?, &s)?;
            t.emit(args.out.as_deref(), s.format_json.unwrap_or(false))
        }
        Cmd::Spectrum(args) => {
            let s = args.layered()?;
            let t = commands::spectrum(&resolve(&s)?, &s)?;
            t.emit(args.out.as_deref(), s.format_json.unwrap_or(false))
        }
        Cmd::Figure { n, args } => {
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            for path in commands::figure(n, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Cmd::Oracle(args) => {
            let s = args.layered()?;
            let report = commands::oracle(&s)?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Numeric(format!("report serialization failed: {e}")))?;
            match &args.out {
                Some(path) => std::fs::write(path, text + "\n")
                    .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display()))),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
        Cmd::Selftest => commands::selftest(),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
