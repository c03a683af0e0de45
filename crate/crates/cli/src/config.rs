//! Resolved run configuration: defaults, overlaid by a JSON file, overlaid by flags.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use powernarrow::pulse::ShapeFamily;
use powernarrow::units::FrequencyUnit;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    Lorentzian,
    Sech,
    Gaussian,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum UnitName {
    /// Ordinary frequency ν = Ω/2π in MHz.
    Mhz,
    /// Angular frequency in 10⁶ rad/s.
    AngularMhz,
}

impl From<UnitName> for FrequencyUnit {
    fn from(u: UnitName) -> Self {
        match u {
            UnitName::Mhz => FrequencyUnit::Mhz,
            UnitName::AngularMhz => FrequencyUnit::AngularMhz,
        }
    }
}

/// Everything a run depends on. Serialized into every output's metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub shape: ShapeName,
    /// Lorentzian power.
    pub n: f64,
    /// Pulse width T in ns.
    pub width_ns: f64,
    /// Truncation fraction ε_cut.
    pub cut: f64,
    /// Unit of every frequency flag and output column.
    pub unit: UnitName,
    pub delta_min_mhz: f64,
    pub delta_max_mhz: f64,
    pub delta_steps: usize,
    pub rabi_min_mhz: f64,
    /// Upper end of the Rabi grid; `None` reaches pulse area 9.5π.
    pub rabi_max_mhz: Option<f64>,
    pub rabi_steps: usize,
    /// Pulse areas in units of π.
    pub areas: Vec<f64>,
    /// Fixed detuning of `slice`.
    pub detuning_mhz: f64,
    /// Lorentzian powers for `fwhm-table`.
    pub ns: Vec<f64>,
    /// Widths in ns for `fwhm-table`, one per power or a single shared value.
    pub widths_ns: Vec<f64>,
    /// Truncation fractions for `cutoff-study`.
    pub cuts: Vec<f64>,
    /// Zero-order hold on the 2/9 ns hardware grid.
    pub hardware: bool,
    /// Binomial shot noise with this many shots per point.
    pub shots: Option<u32>,
    pub seed: u64,
    /// 0 uses the available parallelism.
    pub workers: usize,
    pub tolerance: f64,
    pub max_cells: usize,
    /// Amplitude that maps to 1.0 in exported samples; `None` uses the peak.
    pub scale_mhz: Option<f64>,
    pub granularity: usize,
    pub max_samples: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            shape: ShapeName::Lorentzian,
            n: 1.0,
            width_ns: 21.33,
            cut: 0.005,
            unit: UnitName::Mhz,
            delta_min_mhz: -35.0,
            delta_max_mhz: 35.0,
            delta_steps: 141,
            rabi_min_mhz: 0.0,
            rabi_max_mhz: None,
            rabi_steps: 100,
            areas: vec![1.0, 3.0, 5.0, 7.0, 9.0],
            detuning_mhz: 12.5,
            ns: vec![2.0, 1.5, 1.0, 0.75, 2.0 / 3.0, 0.6],
            widths_ns: vec![24.89, 24.89, 24.89, 10.67, 10.67, 5.33],
            cuts: vec![0.5, 0.03, 0.005],
            hardware: false,
            shots: None,
            seed: 0,
            workers: 0,
            tolerance: 1e-8,
            max_cells: 4_000_000,
            scale_mhz: None,
            granularity: 16,
            max_samples: 100_000,
            format: Format::Csv,
            out: None,
            svg: None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags leave the file or default value.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with RunConfig fields; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit
    #[arg(long, global = true)]
    pub print_config: bool,
    /// Envelope family
    #[arg(long, global = true)]
    pub shape: Option<ShapeName>,
    /// Lorentzian power n (> 1/2)
    #[arg(long, global = true)]
    pub n: Option<f64>,
    /// Pulse width T in ns
    #[arg(long = "T", global = true)]
    pub width_ns: Option<f64>,
    /// Truncation fraction ε_cut in (0, 1)
    #[arg(long, global = true)]
    pub cut: Option<f64>,
    /// Unit of all frequency flags and outputs: mhz (ordinary, Ω/2π) or angular-mhz (10⁶ rad/s)
    #[arg(long, global = true)]
    pub unit: Option<UnitName>,
    /// Lowest detuning Δ/2π in MHz
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_min: Option<f64>,
    /// Highest detuning Δ/2π in MHz
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_max: Option<f64>,
    /// Detuning grid points
    #[arg(long, global = true)]
    pub delta_steps: Option<usize>,
    /// Lowest peak Rabi frequency Ω₀/2π in MHz
    #[arg(long, global = true)]
    pub rabi_min: Option<f64>,
    /// Highest peak Rabi frequency Ω₀/2π in MHz (default: area 9.5π)
    #[arg(long, global = true)]
    pub rabi_max: Option<f64>,
    /// Rabi grid points
    #[arg(long, global = true)]
    pub rabi_steps: Option<usize>,
    /// Pulse areas in units of π, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub areas: Option<Vec<f64>>,
    /// Fixed detuning Δ/2π in MHz for `slice`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    /// Lorentzian powers for `fwhm-table`, comma separated
    #[arg(long = "ns", global = true, value_delimiter = ',')]
    pub ns: Option<Vec<f64>>,
    /// Widths T in ns for `fwhm-table`, one per power or one shared
    #[arg(long = "widths", global = true, value_delimiter = ',')]
    pub widths_ns: Option<Vec<f64>>,
    /// Truncation fractions for `cutoff-study`, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub cuts: Option<Vec<f64>>,
    /// Simulate the 2/9 ns zero-order-hold hardware waveform
    #[arg(long, global = true)]
    pub hardware: bool,
    /// Add binomial shot noise with this many shots per point
    #[arg(long, global = true)]
    pub shots: Option<u32>,
    /// Shot-noise seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = available parallelism)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Convergence tolerance on P
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Largest number of propagations per sweep
    #[arg(long, global = true)]
    pub max_cells: Option<usize>,
    /// Amplitude Ω/2π in MHz mapped to 1.0 by `export-samples`
    #[arg(long = "scale", global = true)]
    pub scale_mhz: Option<f64>,
    /// Sample-count granularity of `export-samples`
    #[arg(long, global = true)]
    pub granularity: Option<usize>,
    /// Largest sample count `export-samples` may write
    #[arg(long, global = true)]
    pub max_samples: Option<usize>,
    /// Output format
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Output file (stdout when absent)
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Also render an SVG plot to this file
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults, then `flags.config` if given, then explicit flags.
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.command = command.to_string();
        macro_rules! overlay {
            ($($field:ident <- $flag:ident),* $(,)?) => {
                $(if let Some(v) = flags.$flag.clone() { cfg.$field = v; })*
            };
        }
        overlay!(
            shape <- shape, n <- n, width_ns <- width_ns, cut <- cut, unit <- unit,
            delta_min_mhz <- delta_min, delta_max_mhz <- delta_max, delta_steps <- delta_steps,
            rabi_min_mhz <- rabi_min, rabi_steps <- rabi_steps, areas <- areas,
            detuning_mhz <- detuning, ns <- ns, widths_ns <- widths_ns, cuts <- cuts,
            seed <- seed, workers <- workers, tolerance <- tolerance, max_cells <- max_cells,
            granularity <- granularity, max_samples <- max_samples, format <- format,
        );
        if flags.rabi_max.is_some() {
            cfg.rabi_max_mhz = flags.rabi_max;
        }
        if flags.shots.is_some() {
            cfg.shots = flags.shots;
        }
        if flags.scale_mhz.is_some() {
            cfg.scale_mhz = flags.scale_mhz;
        }
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        if flags.svg.is_some() {
            cfg.svg = flags.svg.clone();
        }
        cfg.hardware |= flags.hardware;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.width_ns.is_finite() && self.width_ns > 0.0) {
            return bad(format!("--T must be > 0, got {}", self.width_ns));
        }
        if !(self.cut > 0.0 && self.cut < 1.0) {
            return bad(format!("--cut must lie in (0, 1), got {}", self.cut));
        }
        if !(self.delta_min_mhz.is_finite() && self.delta_max_mhz.is_finite() && self.delta_min_mhz < self.delta_max_mhz) {
            return bad(format!(
                "detuning range must satisfy min < max, got [{}, {}]",
                self.delta_min_mhz, self.delta_max_mhz
            ));
        }
        if self.delta_steps < 3 || self.rabi_steps < 1 {
            return bad("need at least 3 detuning points and 1 Rabi point".into());
        }
        if !(self.rabi_min_mhz >= 0.0) || self.rabi_max_mhz.is_some_and(|m| !(m >= self.rabi_min_mhz)) {
            return bad("Rabi range must satisfy 0 ≤ min ≤ max".into());
        }
        if self.areas.is_empty() || self.areas.iter().any(|a| !(*a > 0.0)) {
            return bad("--areas must be a non-empty list of positive numbers".into());
        }
        if self.cuts.is_empty() || self.cuts.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
            return bad("--cuts must be a non-empty list in (0, 1)".into());
        }
        if self.ns.is_empty() || !(self.widths_ns.len() == 1 || self.widths_ns.len() == self.ns.len()) {
            return bad("--widths must give one width or one per power in --ns".into());
        }
        if self.widths_ns.iter().any(|w| !(*w > 0.0)) {
            return bad("--widths must be positive".into());
        }
        if self.shots == Some(0) {
            return bad("--shots must be ≥ 1".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("--tolerance must be > 0".into());
        }
        if self.scale_mhz.is_some_and(|s| !(s > 0.0)) {
            return bad("--scale must be > 0".into());
        }
        if self.granularity == 0 {
            return bad("--granularity must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn frequency_unit(&self) -> FrequencyUnit {
        self.unit.into()
    }

    pub fn to_rad(&self, value: f64) -> f64 {
        self.frequency_unit().to_rad_per_ns(value)
    }

    pub fn from_rad(&self, omega: f64) -> f64 {
        self.frequency_unit().from_rad_per_ns(omega)
    }

    pub fn shape_family(&self) -> Result<ShapeFamily, CliError> {
        shape_family(self.shape, self.n)
    }
}

pub fn shape_family(shape: ShapeName, n: f64) -> Result<ShapeFamily, CliError> {
    Ok(match shape {
        ShapeName::Lorentzian => ShapeFamily::lorentzian(n).map_err(|e| CliError::Usage(e.to_string()))?,
        ShapeName::Sech => ShapeFamily::Sech,
        ShapeName::Gaussian => ShapeFamily::Gaussian,
        ShapeName::Rectangular => ShapeFamily::Rectangular,
    })
}
