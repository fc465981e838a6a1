//! Flags, config files and the resolved [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use collapse_kit::nonlinearity::{ModelKind, NonlinearityModel};
use collapse_kit::profile::InitialProfile;
use collapse_kit::validation::ReferenceConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "collapse-kit", version, about = "Self-focusing and collapse of light beams in nonlinear media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transverse profiles (x, I, v), one CSV per z.
    Profile(Opts),
    /// On-axis intensity against z.
    Onaxis(Opts),
    /// Collapse distance(s).
    Zsf(Opts),
    /// Collapse classification of the radially symmetric beam.
    Classify(Opts),
    /// Classification over a parameter grid.
    Sweep(Opts),
    /// Certification battery.
    Validate(Opts),
}

impl Command {
    pub fn split(self) -> (CommandKind, Opts) {
        match self {
            Self::Profile(o) => (CommandKind::Profile, o),
            Self::Onaxis(o) => (CommandKind::Onaxis, o),
            Self::Zsf(o) => (CommandKind::Zsf, o),
            Self::Classify(o) => (CommandKind::Classify, o),
            Self::Sweep(o) => (CommandKind::Sweep, o),
            Self::Validate(o) => (CommandKind::Validate, o),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Profile,
    Onaxis,
    Zsf,
    Classify,
    Sweep,
    Validate,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        write!(f, "{}", s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact1d,
    Approx1d,
    Approx2d,
    Reference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelName {
    Saturated,
    Kerr,
    KerrMpi,
    Tabulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProfileName {
    Gaussian,
    SaturatedBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Battery {
    Hodograph,
    Energy,
    Eikonal,
    Classify,
    Reference,
}

/// Everything settable from the command line. Every field is optional so
/// that a config file can fill the gaps.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Opts {
    /// TOML file with the same keys as the long flags (dashes as
    /// underscores); flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Saturation parameter of the exponential model.
    #[arg(long)]
    pub b: Option<f64>,
    /// Multiphoton ionization strength.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Photon order of the ionization term.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<u32>,
    /// Two-column `I varphi` table for the tabulated model.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileName>,
    /// Two-column `x I` table for a tabulated initial profile.
    #[arg(long)]
    pub profile_table: Option<PathBuf>,
    /// Comma-separated propagation distances.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    /// `name=start:stop:n`, repeatable; names are alpha, beta, b, gamma, K.
    #[arg(long = "sweep")]
    pub sweep: Option<Vec<String>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Skip the brute-force fold-onset scan in classification reports.
    #[arg(long)]
    #[serde(default)]
    pub no_oracle: bool,
    /// Largest z examined by the fold-onset scan.
    #[arg(long)]
    pub oracle_z_max: Option<f64>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub battery: Option<Vec<Battery>>,
    /// Radial cells of the reference integrator.
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub dz: Option<f64>,
}

macro_rules! take_missing {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Opts {
    /// Fills unset fields from `other`.
    pub fn or(mut self, other: Opts) -> Opts {
        take_missing!(
            self, other, solver, model, alpha, beta, b, gamma, k, table, profile, profile_table, z, x_min, x_max, nx,
            sweep, output, format, oracle_z_max, battery, n_r, r_max, dz
        );
        self.no_oracle |= other.no_oracle;
        self
    }

    pub fn from_file(path: &Path) -> Result<Opts, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Merges the config file (if any) under the flags.
    pub fn merged(self) -> Result<Opts, CliError> {
        match &self.config {
            Some(p) => {
                let file = Opts::from_file(p)?;
                Ok(self.or(file))
            }
            None => Ok(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl SweepRange {
    pub const NAMES: [&'static str; 5] = ["alpha", "beta", "b", "gamma", "K"];

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("sweep range `{s}` is not name=start:stop:n"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let name = name.trim().to_string();
        if !Self::NAMES.contains(&name.as_str()) {
            return Err(CliError::Usage(format!("cannot sweep `{name}`; expected one of {:?}", Self::NAMES)));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Self { name, start, stop, n })
    }

    pub fn values(&self) -> Vec<f64> {
        let v = collapse_kit::profile::linspace(self.start, self.stop, self.n);
        if self.name == "K" {
            v.into_iter().map(f64::round).collect()
        } else {
            v
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Validated configuration for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub solver: Solver,
    pub model: NonlinearityModel,
    pub profile: InitialProfile,
    pub z_list: Vec<f64>,
    pub x_grid: XGrid,
    pub sweep: Vec<SweepRange>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub oracle: bool,
    pub oracle_z_max: f64,
    pub battery: Vec<Battery>,
    pub reference: ReferenceConfig,
    /// Always true: no run depends on a seed or on thread scheduling.
    pub deterministic: bool,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn model_from(o: &Opts, name: ModelName) -> Result<NonlinearityModel, CliError> {
    let alpha = o.alpha.ok_or_else(|| CliError::Usage("--alpha is required".into()))?;
    let beta = o.beta.unwrap_or(0.0);
    let m = match name {
        ModelName::Saturated => {
            let b = o.b.ok_or_else(|| CliError::Usage("--b is required for the saturated model".into()))?;
            NonlinearityModel::saturated(alpha, beta, b)
        }
        ModelName::Kerr => NonlinearityModel::kerr(alpha, beta),
        ModelName::KerrMpi => {
            let k = o.k.ok_or_else(|| CliError::Usage("--K is required for the kerr_mpi model".into()))?;
            NonlinearityModel::kerr_mpi(alpha, beta, o.gamma.unwrap_or(0.0), k)
        }
        ModelName::Tabulated => {
            let path = o
                .table
                .as_ref()
                .ok_or_else(|| CliError::Usage("--table is required for the tabulated model".into()))?;
            NonlinearityModel::tabulated_from_file(alpha, beta, path)
        }
    };
    m.map_err(|e| CliError::Usage(e.to_string()))
}

fn sweeps_touch(o: &Opts, names: &[&str]) -> bool {
    o.sweep.iter().flatten().any(|s| names.iter().any(|n| s.trim_start().starts_with(&format!("{n}="))))
}

impl RunConfig {
    pub fn from_opts(command: CommandKind, o: Opts) -> Result<Self, CliError> {
        let sweep = o.sweep.iter().flatten().map(|s| SweepRange::parse(s)).collect::<Result<Vec<_>, _>>()?;

        let model_name = match o.model {
            Some(m) => m,
            None if o.table.is_some() => ModelName::Tabulated,
            None if o.k.is_some() || o.gamma.is_some() || sweeps_touch(&o, &["gamma", "K"]) => ModelName::KerrMpi,
            None if o.b.is_some() || sweeps_touch(&o, &["b"]) => ModelName::Saturated,
            None if o.solver == Some(Solver::Exact1d) => ModelName::Saturated,
            None => ModelName::Kerr,
        };
        // Swept parameters still need a base value for the model to validate.
        let mut base = o.clone();
        for s in &sweep {
            let v = s.values()[0];
            match s.name.as_str() {
                "alpha" => base.alpha = base.alpha.or(Some(v)),
                "beta" => base.beta = base.beta.or(Some(v)),
                "b" => base.b = base.b.or(Some(v)),
                "gamma" => base.gamma = base.gamma.or(Some(v)),
                _ => base.k = base.k.or(Some(v as u32)),
            }
        }
        let validate_defaults = command == CommandKind::Validate && base.alpha.is_none();
        let model = if validate_defaults {
            NonlinearityModel::saturated(3.0, 0.0, 1.0).expect("valid defaults")
        } else {
            model_from(&base, model_name)?
        };

        let profile = match (&o.profile_table, o.profile) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                let (x, i) = NonlinearityModel::parse_table(&text).map_err(|e| CliError::Usage(e.to_string()))?;
                InitialProfile::tabulated(x, i).map_err(|e| CliError::Usage(e.to_string()))?
            }
            (None, Some(ProfileName::Gaussian)) => InitialProfile::Gaussian,
            (None, Some(ProfileName::SaturatedBoundary)) => match model.kind {
                ModelKind::SaturatedExp { b } => InitialProfile::SaturatedBoundary { b },
                _ => return usage("the saturated_boundary profile needs the saturated model"),
            },
            (None, None) => match model.kind {
                ModelKind::SaturatedExp { b } => InitialProfile::SaturatedBoundary { b },
                _ => InitialProfile::Gaussian,
            },
        };

        let solver = match (o.solver, command) {
            (Some(s), _) => s,
            (None, CommandKind::Classify | CommandKind::Sweep) => Solver::Approx2d,
            (None, _) if matches!(model.kind, ModelKind::SaturatedExp { .. }) => Solver::Exact1d,
            (None, _) => Solver::Approx2d,
        };
        let saturated = matches!(model.kind, ModelKind::SaturatedExp { .. });
        match (command, solver) {
            (CommandKind::Classify | CommandKind::Sweep, s) if s != Solver::Approx2d => {
                return usage(format!("{command} works with the approx2d solver only"))
            }
            (CommandKind::Zsf, Solver::Reference) => return usage("zsf has no reference solver"),
            (CommandKind::Validate, _) => {}
            (_, Solver::Exact1d) if !saturated => return usage("exact1d requires the saturated model"),
            (_, Solver::Exact1d) if !matches!(profile, InitialProfile::SaturatedBoundary { .. }) => {
                return usage("exact1d requires the saturated_boundary profile")
            }
            (CommandKind::Zsf, Solver::Approx1d) if !saturated => {
                return usage("zsf with approx1d requires the saturated model")
            }
            (_, Solver::Reference) if model.beta <= 0.0 => return usage("the reference solver needs --beta > 0"),
            _ => {}
        }
        if command == CommandKind::Sweep && sweep.is_empty() {
            return usage("sweep needs at least one --sweep range");
        }

        let z_list = o.z.clone().unwrap_or_default();
        if z_list.iter().any(|&z| !(z >= 0.0 && z.is_finite())) {
            return usage("z values must be nonnegative");
        }
        if matches!(command, CommandKind::Profile | CommandKind::Onaxis) && z_list.is_empty() {
            return usage(format!("{command} needs --z"));
        }
        let x_grid = XGrid {
            min: o.x_min.unwrap_or(-3.0),
            max: o.x_max.unwrap_or(3.0),
            n: o.nx.unwrap_or(601),
        };
        if x_grid.n == 0 || !(x_grid.max >= x_grid.min) {
            return usage("x grid must be non-empty with x_max >= x_min");
        }
        let format = o.format.unwrap_or(match command {
            CommandKind::Profile | CommandKind::Onaxis | CommandKind::Sweep => Format::Csv,
            _ => Format::Json,
        });
        if command == CommandKind::Profile && format == Format::Csv && z_list.len() > 1 && o.output.is_none() {
            return usage("profile with several z values writes one file per z; give --output");
        }
        let mut reference = ReferenceConfig::default();
        if let Some(n) = o.n_r {
            reference.n_r = n;
        }
        if let Some(r) = o.r_max {
            reference.r_max = r;
        }
        if let Some(dz) = o.dz {
            reference.dz = dz;
        }
        let mut battery = o.battery.clone().unwrap_or_else(|| {
            vec![
                Battery::Hodograph,
                Battery::Energy,
                Battery::Eikonal,
                Battery::Classify,
                Battery::Reference,
            ]
        });
        battery.sort();
        battery.dedup();
        Ok(Self {
            command,
            solver,
            model,
            profile,
            z_list,
            x_grid,
            sweep,
            output: o.output.clone(),
            format,
            oracle: !o.no_oracle,
            oracle_z_max: o.oracle_z_max.unwrap_or(100.0),
            battery,
            reference,
            deterministic: true,
        })
    }
}
