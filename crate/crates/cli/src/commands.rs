//! One function per subcommand. Each builds its grids from the resolved
//! config, runs the study and hands a table plus a JSON payload to `output`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use powernarrow::adiabatic::predicted_exponent;
use powernarrow::dynamics::{PropagateOptions, ShotNoise};
use powernarrow::pulse::{SampleMode, SampleOptions, HARDWARE_DT};
use powernarrow::spectro::{self, linspace, PulseTemplate, SweepOptions};
use powernarrow::{Error, PulseSpec};

use crate::config::{shape_family, RunConfig};
use crate::output::{emit, sha256_hex, write_file, Table};
use crate::plot;
use crate::CliError;

pub fn sweep_options(config: &RunConfig) -> SweepOptions {
    SweepOptions {
        propagation: PropagateOptions {
            hardware_mode: config.hardware,
            tolerance: config.tolerance,
            shot_noise: config.shots.map(|shots| ShotNoise {
                shots,
                seed: config.seed,
            }),
            ..Default::default()
        },
        workers: config.workers,
        max_cells: config.max_cells,
    }
}

pub fn template(config: &RunConfig) -> Result<PulseTemplate, CliError> {
    Ok(PulseTemplate::new(config.shape_family()?, config.width_ns, config.cut)?)
}

pub fn detuning_grid(config: &RunConfig) -> Vec<f64> {
    linspace(config.to_rad(config.delta_min_mhz), config.to_rad(config.delta_max_mhz), config.delta_steps)
}

pub fn rabi_grid(config: &RunConfig, template: &PulseTemplate) -> Result<Vec<f64>, CliError> {
    let top = match config.rabi_max_mhz {
        Some(m) => config.to_rad(m),
        None => template.amplitude_for_area(9.5 * PI)?,
    };
    Ok(linspace(config.to_rad(config.rabi_min_mhz), top, config.rabi_steps))
}

fn half_span(grid: &[f64]) -> f64 {
    grid.iter().fold(0.0f64, |m, d| m.max(d.abs()))
}

fn axis(config: &RunConfig, symbol: &str) -> String {
    match config.unit {
        crate::config::UnitName::Mhz => format!("{symbol}/2π (MHz)"),
        crate::config::UnitName::AngularMhz => format!("{symbol} (10⁶ rad/s)"),
    }
}

fn write_svg(path: &Path, svg: &str) -> Result<(), CliError> {
    write_file(path, svg)
}

/// `<stem>_<tag>.<ext>` next to `path`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

fn width_or_none(config: &RunConfig, r: Result<spectro::FwhmResult, Error>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(w) => Ok(Some(config.from_rad(w.fwhm))),
        Err(Error::Inconclusive(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileData {
    pub area_over_pi: f64,
    pub omega0_mhz: f64,
    pub fwhm_mhz: Option<f64>,
    pub delta_mhz: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn profile(config: &RunConfig) -> Result<(), CliError> {
    let template = template(config)?;
    let grid = detuning_grid(config);
    let options = sweep_options(config);
    let mut table = Table::new(&["area_over_pi", "omega0_MHz", "delta_MHz", "p"]);
    let mut data = Vec::new();
    for &area in &config.areas {
        let rabi = template.amplitude_for_area(area * PI)?;
        let spec = template.with_peak_rabi(rabi)?;
        let profile = spectro::spectral_profile(&spec, &grid, &options)?;
        let delta_mhz: Vec<f64> = grid.iter().map(|&d| config.from_rad(d)).collect();
        for (d, p) in delta_mhz.iter().zip(&profile.probabilities) {
            table.push_values(&[area, config.from_rad(rabi), *d, *p]);
        }
        data.push(ProfileData {
            area_over_pi: area,
            omega0_mhz: config.from_rad(rabi),
            fwhm_mhz: width_or_none(config, spectro::fwhm(&profile))?,
            delta_mhz,
            p: profile.probabilities,
        });
    }
    if let Some(path) = &config.svg {
        let series: Vec<_> = data
            .iter()
            .map(|d| (format!("{}π", d.area_over_pi), d.delta_mhz.clone(), d.p.clone()))
            .collect();
        write_svg(path, &plot::lines(&series, &axis(config, "Δ"), "P"))?;
    }
    let summary = json!({
        "fwhm_mhz": data.iter().map(|d| json!({"area_over_pi": d.area_over_pi, "fwhm_mhz": d.fwhm_mhz})).collect::<Vec<_>>()
    });
    emit(config, &table, &data, summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeData {
    pub omega0_mhz: Vec<f64>,
    pub delta_mhz: Vec<f64>,
    /// Rows follow `omega0_mhz`, columns follow `delta_mhz`.
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakData {
    pub area_over_pi: f64,
    pub omega0_mhz: f64,
    pub fwhm_mhz: f64,
}

fn peaks_in_range(
    config: &RunConfig,
    template: &PulseTemplate,
    top: f64,
    span: f64,
    options: &SweepOptions,
) -> Result<Vec<PeakData>, CliError> {
    let mut areas = Vec::new();
    for &a in &config.areas {
        if template.amplitude_for_area(a * PI)? <= top * (1.0 + 1e-12) {
            areas.push(a);
        }
    }
    let peaks = spectro::peak_widths(template, &areas, span, config.delta_steps.max(81), options)?;
    Ok(peaks
        .iter()
        .map(|p| PeakData {
            area_over_pi: p.area_over_pi,
            omega0_mhz: config.from_rad(p.peak_rabi),
            fwhm_mhz: config.from_rad(p.width.fwhm),
        })
        .collect())
}

pub fn landscape(config: &RunConfig) -> Result<(), CliError> {
    let template = template(config)?;
    let rabis = rabi_grid(config, &template)?;
    let grid = detuning_grid(config);
    let options = sweep_options(config);
    let land = spectro::excitation_landscape(&template, &rabis, &grid, &options)?;
    let data = LandscapeData {
        omega0_mhz: rabis.iter().map(|&r| config.from_rad(r)).collect(),
        delta_mhz: grid.iter().map(|&d| config.from_rad(d)).collect(),
        p: land.probabilities,
    };
    let mut table = Table::new(&["omega0_MHz", "delta_MHz", "p"]);
    for (r, row) in data.omega0_mhz.iter().zip(&data.p) {
        for (d, p) in data.delta_mhz.iter().zip(row) {
            table.push_values(&[*r, *d, *p]);
        }
    }
    let top = rabis.iter().fold(0.0f64, |m, &r| m.max(r));
    let peaks = peaks_in_range(config, &template, top, half_span(&grid), &options)?;
    if let Some(path) = &config.svg {
        write_svg(path, &plot::heatmap(&data.delta_mhz, &data.omega0_mhz, &data.p, &axis(config, "Δ"), &axis(config, "Ω₀")))?;
    }
    emit(config, &table, &data, json!({ "peaks": peaks }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceData {
    pub detuning_mhz: f64,
    pub omega0_mhz: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn slice(config: &RunConfig) -> Result<(), CliError> {
    let template = template(config)?;
    let rabis = rabi_grid(config, &template)?;
    let p = spectro::rabi_slice(&template, config.to_rad(config.detuning_mhz), &rabis, &sweep_options(config))?;
    let data = SliceData {
        detuning_mhz: config.detuning_mhz,
        omega0_mhz: rabis.iter().map(|&r| config.from_rad(r)).collect(),
        p,
    };
    let mut table = Table::new(&["omega0_MHz", "p"]);
    for (r, p) in data.omega0_mhz.iter().zip(&data.p) {
        table.push_values(&[*r, *p]);
    }
    if let Some(path) = &config.svg {
        let series = [(format!("Δ = {}", config.detuning_mhz), data.omega0_mhz.clone(), data.p.clone())];
        write_svg(path, &plot::lines(&series, &axis(config, "Ω₀"), "P"))?;
    }
    emit(config, &table, &data, serde_json::Value::Null)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: f64,
    pub t_ns: f64,
    pub peaks: Vec<PeakData>,
    /// Width at area π over width at area 7π, when both were requested.
    pub ratio_pi_over_7pi: Option<f64>,
}

pub fn fwhm_table(config: &RunConfig) -> Result<(), CliError> {
    let widths: Vec<f64> = if config.widths_ns.len() == 1 {
        vec![config.widths_ns[0]; config.ns.len()]
    } else {
        config.widths_ns.clone()
    };
    let templates = config
        .ns
        .iter()
        .zip(&widths)
        .map(|(&n, &t)| Ok(PulseTemplate::new(shape_family(crate::config::ShapeName::Lorentzian, n)?, t, config.cut)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let grid = detuning_grid(config);
    let rows = spectro::width_table(&templates, &config.areas, half_span(&grid), config.delta_steps.max(81), &sweep_options(config))?;
    let position = |a: f64| config.areas.iter().position(|&x| x == a);
    let mut table = Table::new(&["n", "T_ns", "area_over_pi", "omega0_MHz", "fwhm_MHz", "ratio_pi_over_7pi"]);
    let mut data = Vec::new();
    for (row, (&n, &t)) in rows.iter().zip(config.ns.iter().zip(&widths)) {
        let ratio = match (position(1.0), position(7.0)) {
            (Some(i), Some(j)) => Some(row.peaks[i].width.fwhm / row.peaks[j].width.fwhm),
            _ => None,
        };
        let peaks: Vec<PeakData> = row
            .peaks
            .iter()
            .map(|p| PeakData {
                area_over_pi: p.area_over_pi,
                omega0_mhz: config.from_rad(p.peak_rabi),
                fwhm_mhz: config.from_rad(p.width.fwhm),
            })
            .collect();
        for p in &peaks {
            table.push(vec![Some(n), Some(t), Some(p.area_over_pi), Some(p.omega0_mhz), Some(p.fwhm_mhz), ratio]);
        }
        data.push(TableRow {
            n,
            t_ns: t,
            peaks,
            ratio_pi_over_7pi: ratio,
        });
    }
    emit(config, &table, &data, serde_json::Value::Null)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingData {
    pub peaks: Vec<PeakData>,
    pub exponent: f64,
    pub r_squared: f64,
    pub predicted_exponent: Option<f64>,
}

pub fn scaling(config: &RunConfig) -> Result<(), CliError> {
    let template = template(config)?;
    // The π peak sits on the Fourier-limited plateau and is left out of the fit.
    let areas: Vec<f64> = config.areas.iter().copied().filter(|&a| a > 1.0).collect();
    let grid = detuning_grid(config);
    let (peaks, fit) = spectro::scaling_study(&template, &areas, half_span(&grid), config.delta_steps.max(81), &sweep_options(config))?;
    let predicted = match template.shape.power() {
        Some(n) => Some(predicted_exponent(n)?),
        None => None,
    };
    let data = ScalingData {
        peaks: peaks
            .iter()
            .map(|p| PeakData {
                area_over_pi: p.area_over_pi,
                omega0_mhz: config.from_rad(p.peak_rabi),
                fwhm_mhz: config.from_rad(p.width.fwhm),
            })
            .collect(),
        exponent: fit.exponent,
        r_squared: fit.r_squared,
        predicted_exponent: predicted,
    };
    let mut table = Table::new(&["area_over_pi", "omega0_MHz", "fwhm_MHz"]);
    for p in &data.peaks {
        table.push_values(&[p.area_over_pi, p.omega0_mhz, p.fwhm_mhz]);
    }
    eprintln!(
        "fitted exponent {:.4} (r² = {:.4}){}",
        fit.exponent,
        fit.r_squared,
        predicted.map(|p| format!(", predicted {p:.4}")).unwrap_or_default()
    );
    let summary = json!({ "exponent": fit.exponent, "r_squared": fit.r_squared, "predicted_exponent": predicted });
    emit(config, &table, &data, summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffData {
    pub eps_cut: f64,
    pub peaks: Vec<PeakData>,
}

pub fn cutoff_study(config: &RunConfig) -> Result<(), CliError> {
    let shape = config.shape_family()?;
    let grid = detuning_grid(config);
    let options = sweep_options(config);
    let mut table = Table::new(&["eps_cut", "area_over_pi", "omega0_MHz", "fwhm_MHz"]);
    let mut data = Vec::new();
    for &eps in &config.cuts {
        let template = PulseTemplate::new(shape, config.width_ns, eps)?;
        // Landscapes are only needed for the heatmaps.
        let rabis = if config.svg.is_some() { rabi_grid(config, &template)? } else { Vec::new() };
        let level = spectro::cutoff_study(shape, config.width_ns, &[eps], &rabis, &grid, &config.areas, &options)?.remove(0);
        if let (Some(path), Some(land)) = (&config.svg, &level.landscape) {
            let x: Vec<f64> = grid.iter().map(|&d| config.from_rad(d)).collect();
            let y: Vec<f64> = rabis.iter().map(|&r| config.from_rad(r)).collect();
            let svg = plot::heatmap(&x, &y, &land.probabilities, &axis(config, "Δ"), &axis(config, "Ω₀"));
            write_svg(&tagged(path, &format!("cut{eps}")), &svg)?;
        }
        let peaks: Vec<PeakData> = level
            .peaks
            .iter()
            .map(|p| PeakData {
                area_over_pi: p.area_over_pi,
                omega0_mhz: config.from_rad(p.peak_rabi),
                fwhm_mhz: config.from_rad(p.width.fwhm),
            })
            .collect();
        for p in &peaks {
            table.push_values(&[eps, p.area_over_pi, p.omega0_mhz, p.fwhm_mhz]);
        }
        data.push(CutoffData { eps_cut: eps, peaks });
    }
    emit(config, &table, &data, serde_json::Value::Null)
}

/// Exported hardware waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub dt_ns: f64,
    /// Held amplitude per interval, divided by `metadata.scale_MHz`.
    pub samples: Vec<f64>,
    pub metadata: SampleMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub shape: String,
    pub n: Option<f64>,
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
    pub cut: f64,
    pub area_rad: f64,
    pub held_area_rad: f64,
    pub duration_ns: f64,
    pub start_time_ns: f64,
    #[serde(rename = "scale_MHz")]
    pub scale_mhz: f64,
    #[serde(rename = "omega0_MHz")]
    pub omega0_mhz: f64,
    pub config: RunConfig,
    /// SHA-256 of the JSON-serialized `samples` array.
    pub content_hash: String,
}

impl SampleFile {
    /// Rebuilds the pulse in rad/ns for re-simulation.
    pub fn to_sampled(&self) -> powernarrow::SampledPulse {
        let unit = self.metadata.config.frequency_unit();
        let scale = unit.to_rad_per_ns(self.metadata.scale_mhz);
        powernarrow::SampledPulse {
            dt: self.dt_ns,
            samples: self.samples.iter().map(|s| s * scale).collect(),
            start_time: self.metadata.start_time_ns,
            mode: SampleMode::Hold,
        }
    }
}

pub fn sample_file(config: &RunConfig) -> Result<SampleFile, CliError> {
    let template = template(config)?;
    let area = config.areas[0] * PI;
    let rabi = template.amplitude_for_area(area)?;
    let spec: PulseSpec = template.with_peak_rabi(rabi)?;
    let estimate = (spec.duration() / HARDWARE_DT).ceil() as usize;
    let limit = |requested: usize| {
        CliError::Compute(Error::ResourceLimit {
            what: "waveform samples",
            requested,
            limit: config.max_samples,
        })
    };
    if estimate > config.max_samples + config.granularity {
        return Err(limit(estimate));
    }
    let sampled = spec.sample(
        HARDWARE_DT,
        SampleOptions {
            mode: SampleMode::Hold,
            granularity: config.granularity,
        },
    )?;
    if sampled.samples.len() > config.max_samples {
        return Err(limit(sampled.samples.len()));
    }
    let scale = config.scale_mhz.map(|s| config.to_rad(s)).unwrap_or(rabi);
    let samples: Vec<f64> = sampled.samples.iter().map(|s| s / scale).collect();
    if samples.iter().any(|&s| s > 1.0 + 1e-12) {
        return Err(CliError::Usage(format!(
            "--scale {} is below the peak amplitude {}",
            config.from_rad(scale),
            config.from_rad(rabi)
        )));
    }
    let content_hash = sha256_hex(&serde_json::to_vec(&samples).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(SampleFile {
        dt_ns: HARDWARE_DT,
        metadata: SampleMetadata {
            shape: template.shape.name().to_string(),
            n: template.shape.power(),
            t_ns: config.width_ns,
            cut: config.cut,
            area_rad: spec.area(),
            held_area_rad: sampled.area(),
            duration_ns: sampled.duration(),
            start_time_ns: sampled.start_time,
            scale_mhz: config.from_rad(scale),
            omega0_mhz: config.from_rad(rabi),
            config: config.clone(),
            content_hash,
        },
        samples,
    })
}

pub fn export_samples(config: &RunConfig) -> Result<(), CliError> {
    let file = sample_file(config)?;
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    match &config.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
