//! Sweep engine and line-shape measurements.
//!
//! Sweeps are parallel maps over independent propagations that share one
//! [`Propagator`] per pulse template. Results come back in input order and
//! each cell is computed by the same arithmetic regardless of which worker
//! picks it up, so outputs are bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PropagateOptions, Propagator};
use crate::error::{invalid, Error, Result};
use crate::pulse::{amplitude_for_area, PulseSpec, ShapeFamily};
use crate::units::mhz_to_rad_per_ns;

/// Envelope, width and truncation, with the peak Rabi frequency left open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTemplate {
    pub shape: ShapeFamily,
    pub width: f64,
    pub cutoff_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

impl PulseTemplate {
    pub fn new(shape: ShapeFamily, width: f64, cutoff_fraction: f64) -> Result<Self> {
        PulseSpec::new(shape, width, 0.0, cutoff_fraction)?;
        Ok(PulseTemplate {
            shape,
            width,
            cutoff_fraction,
            duration: None,
        })
    }

    pub fn with_peak_rabi(&self, peak_rabi: f64) -> Result<PulseSpec> {
        let spec = PulseSpec::new(self.shape, self.width, peak_rabi, self.cutoff_fraction)?;
        match self.duration {
            Some(d) => spec.with_duration(d),
            None => Ok(spec),
        }
    }

    /// Peak Rabi frequency giving pulse area `area`.
    pub fn amplitude_for_area(&self, area: f64) -> Result<f64> {
        match self.duration {
            None => amplitude_for_area(self.shape, self.width, self.cutoff_fraction, area),
            Some(_) => {
                let unit = self.with_peak_rabi(1.0)?;
                Ok(area / unit.envelope_integral())
            }
        }
    }
}

impl From<&PulseSpec> for PulseTemplate {
    fn from(spec: &PulseSpec) -> Self {
        PulseTemplate {
            shape: spec.shape(),
            width: spec.width(),
            cutoff_fraction: spec.cutoff_fraction(),
            duration: spec.duration_override(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub propagation: PropagateOptions,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    /// Largest number of propagations a single sweep may request.
    pub max_cells: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            propagation: PropagateOptions::default(),
            workers: 0,
            max_cells: 4_000_000,
        }
    }
}

impl SweepOptions {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn check_budget(&self, cells: usize) -> Result<()> {
        if cells > self.max_cells {
            Err(Error::ResourceLimit {
                what: "sweep cells",
                requested: cells,
                limit: self.max_cells,
            })
        } else {
            Ok(())
        }
    }
}

/// Order-preserving parallel map over `0..n`.
fn par_map<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let wrap = |i: usize| {
        f(i).map_err(|e| Error::AtGridPoint {
            index: i,
            source: Box::new(e),
        })
    };
    if workers == 1 || n <= 1 {
        return (0..n).map(wrap).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(wrap).collect())
}

fn check_grid(name: &str, grid: &[f64], strictly_increasing: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{name} grid has non-finite values")));
    }
    if strictly_increasing && grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Symmetric grid `±35 MHz` in 141 steps, in rad/ns.
pub fn default_detuning_grid() -> Vec<f64> {
    let edge = mhz_to_rad_per_ns(35.0);
    linspace(-edge, edge, 141)
}

/// Post-pulse excitation against detuning for one pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub detunings: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub spec: PulseSpec,
    pub area: f64,
}

/// Excitation over a rectangular `(Ω₀, Δ)` grid, rows indexed by `Ω₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub detunings: Vec<f64>,
    pub rabi_amplitudes: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub template: PulseTemplate,
}

impl Landscape {
    pub fn row(&self, rabi_index: usize) -> &[f64] {
        &self.probabilities[rabi_index]
    }

    pub fn column(&self, detuning_index: usize) -> Vec<f64> {
        self.probabilities.iter().map(|row| row[detuning_index]).collect()
    }
}

/// Central-lobe width at half of the profile's own maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwhmResult {
    pub peak_detuning: f64,
    pub peak_probability: f64,
    pub left_cross: f64,
    pub right_cross: f64,
    pub fwhm: f64,
}

/// Least-squares line through `(ln Ω₀, ln width)`; `exponent` is minus the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn spectral_profile(spec: &PulseSpec, detunings: &[f64], options: &SweepOptions) -> Result<SpectralProfile> {
    check_grid("detuning", detunings, true)?;
    options.check_budget(detunings.len())?;
    let propagator = Propagator::new(spec, options.propagation)?;
    let probabilities = par_map(options.workers, detunings.len(), |i| {
        Ok(propagator.run_cell(spec.peak_rabi(), detunings[i], i as u64)?.p_excite)
    })?;
    Ok(SpectralProfile {
        detunings: detunings.to_vec(),
        probabilities,
        spec: *spec,
        area: spec.area(),
    })
}

pub fn excitation_landscape(
    template: &PulseTemplate,
    rabi_amplitudes: &[f64],
    detunings: &[f64],
    options: &SweepOptions,
) -> Result<Landscape> {
    check_grid("Rabi", rabi_amplitudes, false)?;
    check_grid("detuning", detunings, false)?;
    if rabi_amplitudes.iter().any(|&r| r < 0.0) {
        return Err(invalid("Rabi amplitudes must be ≥ 0"));
    }
    let cols = detunings.len();
    let cells = rabi_amplitudes.len().saturating_mul(cols);
    options.check_budget(cells)?;
    let propagator = Propagator::new(&template.with_peak_rabi(0.0)?, options.propagation)?;
    let flat = par_map(options.workers, cells, |i| {
        let (r, d) = (i / cols, i % cols);
        Ok(propagator.run_cell(rabi_amplitudes[r], detunings[d], i as u64)?.p_excite)
    })?;
    Ok(Landscape {
        detunings: detunings.to_vec(),
        rabi_amplitudes: rabi_amplitudes.to_vec(),
        probabilities: flat.chunks(cols).map(<[f64]>::to_vec).collect(),
        template: *template,
    })
}

/// Excitation against `Ω₀` at fixed detuning.
pub fn rabi_slice(
    template: &PulseTemplate,
    detuning: f64,
    rabi_amplitudes: &[f64],
    options: &SweepOptions,
) -> Result<Vec<f64>> {
    let landscape = excitation_landscape(template, rabi_amplitudes, &[detuning], options)?;
    Ok(landscape.probabilities.into_iter().map(|row| row[0]).collect())
}

/// Full width at half maximum of the lobe around the global maximum.
pub fn fwhm(profile: &SpectralProfile) -> Result<FwhmResult> {
    fwhm_of(&profile.detunings, &profile.probabilities)
}

/// [`fwhm`] on bare arrays.
pub fn fwhm_of(detunings: &[f64], probabilities: &[f64]) -> Result<FwhmResult> {
    if detunings.len() != probabilities.len() {
        return Err(invalid("detuning and probability arrays differ in length"));
    }
    if detunings.len() < 3 {
        return Err(Error::Inconclusive("profile has fewer than three points".into()));
    }
    let peak = probabilities
        .iter()
        .enumerate()
        .fold(0, |b, (i, &p)| if p > probabilities[b] { i } else { b });
    let top = probabilities[peak];
    if !(top > 0.0) {
        return Err(Error::Inconclusive("profile has no positive maximum".into()));
    }
    let last = probabilities.len() - 1;
    if peak == 0 || peak == last {
        return Err(Error::Inconclusive("maximum sits on the grid boundary".into()));
    }
    let half = 0.5 * top;
    let crossing = |inside: usize, outside: usize| {
        let (p_in, p_out) = (probabilities[inside], probabilities[outside]);
        let (d_in, d_out) = (detunings[inside], detunings[outside]);
        d_in + (p_in - half) / (p_in - p_out) * (d_out - d_in)
    };
    let mut j = peak;
    while probabilities[j] >= half {
        if j == 0 {
            return Err(Error::Inconclusive("no half-maximum crossing below the peak".into()));
        }
        j -= 1;
    }
    let left_cross = crossing(j + 1, j);
    let mut j = peak;
    while probabilities[j] >= half {
        if j == last {
            return Err(Error::Inconclusive("no half-maximum crossing above the peak".into()));
        }
        j += 1;
    }
    let right_cross = crossing(j - 1, j);
    Ok(FwhmResult {
        peak_detuning: detunings[peak],
        peak_probability: top,
        left_cross,
        right_cross,
        fwhm: right_cross - left_cross,
    })
}

/// Distance between the outermost half-maximum crossings, sidelobes included.
///
/// For power-broadened profiles this tracks the envelope rather than the
/// central lobe: a rectangular pulse gives about `2Ω₀` at large area.
pub fn half_max_extent(detunings: &[f64], probabilities: &[f64]) -> Result<FwhmResult> {
    let central = fwhm_of(detunings, probabilities)?;
    let half = 0.5 * central.peak_probability;
    let first = probabilities.iter().position(|&p| p >= half).expect("peak is above half");
    let last = probabilities.iter().rposition(|&p| p >= half).expect("peak is above half");
    if first == 0 || last == probabilities.len() - 1 {
        return Err(Error::Inconclusive("half-maximum extent reaches the grid boundary".into()));
    }
    let cross = |inside: usize, outside: usize| {
        let (p_in, p_out) = (probabilities[inside], probabilities[outside]);
        detunings[inside] + (p_in - half) / (p_in - p_out) * (detunings[outside] - detunings[inside])
    };
    let (left_cross, right_cross) = (cross(first, first - 1), cross(last, last + 1));
    Ok(FwhmResult {
        left_cross,
        right_cross,
        fwhm: right_cross - left_cross,
        ..central
    })
}

/// Profile and width on a symmetric grid that is widened or narrowed until
/// the central lobe is resolved by a reasonable share of the grid.
pub fn resolved_fwhm(
    spec: &PulseSpec,
    initial_half_span: f64,
    points: usize,
    options: &SweepOptions,
) -> Result<(SpectralProfile, FwhmResult)> {
    if !(initial_half_span.is_finite() && initial_half_span > 0.0) {
        return Err(invalid("initial half-span must be > 0"));
    }
    let points = points.max(21) | 1;
    let mut span = initial_half_span;
    let mut narrowed = false;
    for _ in 0..60 {
        let profile = spectral_profile(spec, &linspace(-span, span, points), options)?;
        match fwhm(&profile) {
            Ok(width) => {
                if width.fwhm < 0.25 * span && !narrowed {
                    span = (width.fwhm.max(width.left_cross.abs()).max(width.right_cross.abs())).max(1e-300);
                    narrowed = true;
                    continue;
                }
                return Ok((profile, width));
            }
            Err(Error::Inconclusive(_)) if span < 1e6 * initial_half_span => {
                span *= 2.0;
                narrowed = false;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Inconclusive("line width did not settle".into()))
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(invalid(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid("scaling points must be positive and finite"));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("all Rabi amplitudes are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let residual: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (1.0 - residual / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent: -slope,
        intercept,
        r_squared,
        points_used: points.len(),
    })
}

/// Width of the profile taken exactly at pulse area `area_over_pi · π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakWidth {
    pub area_over_pi: f64,
    pub peak_rabi: f64,
    pub width: FwhmResult,
}

/// Widths of the profiles through the resonant peaks at the given areas.
pub fn peak_widths(
    template: &PulseTemplate,
    areas_over_pi: &[f64],
    initial_half_span: f64,
    points: usize,
    options: &SweepOptions,
) -> Result<Vec<PeakWidth>> {
    areas_over_pi
        .iter()
        .map(|&a| {
            let peak_rabi = template.amplitude_for_area(a * std::f64::consts::PI)?;
            let spec = template.with_peak_rabi(peak_rabi)?;
            let (_, width) = resolved_fwhm(&spec, initial_half_span, points, options)?;
            Ok(PeakWidth {
                area_over_pi: a,
                peak_rabi,
                width,
            })
        })
        .collect()
}

/// One truncation level of a cut-off study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffLevel {
    pub cutoff_fraction: f64,
    pub landscape: Option<Landscape>,
    pub peaks: Vec<PeakWidth>,
}

/// Landscape and per-peak widths for each truncation level.
///
/// Peaks are listed for the odd areas `π, 3π, …` whose amplitude lies within
/// the Rabi grid. Pass an empty Rabi grid to skip the landscapes and only
/// measure widths at the listed `areas_over_pi`.
pub fn cutoff_study(
    shape: ShapeFamily,
    width: f64,
    cutoff_fractions: &[f64],
    rabi_amplitudes: &[f64],
    detunings: &[f64],
    areas_over_pi: &[f64],
    options: &SweepOptions,
) -> Result<Vec<CutoffLevel>> {
    if cutoff_fractions.is_empty() {
        return Err(invalid("no cut-off fractions given"));
    }
    check_grid("detuning", detunings, true)?;
    let half_span = detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let points = detunings.len().max(81);
    cutoff_fractions
        .iter()
        .map(|&eps| {
            let template = PulseTemplate::new(shape, width, eps)?;
            let landscape = if rabi_amplitudes.is_empty() {
                None
            } else {
                Some(excitation_landscape(&template, rabi_amplitudes, detunings, options)?)
            };
            let top = rabi_amplitudes.iter().fold(f64::INFINITY, |m, &r| if m.is_infinite() { r } else { m.max(r) });
            let mut areas = Vec::new();
            for &a in areas_over_pi {
                if top.is_infinite() || template.amplitude_for_area(a * std::f64::consts::PI)? <= top * (1.0 + 1e-12) {
                    areas.push(a);
                }
            }
            let peaks = peak_widths(&template, &areas, half_span, points, options)?;
            Ok(CutoffLevel {
                cutoff_fraction: eps,
                landscape,
                peaks,
            })
        })
        .collect()
}

/// Far-wing envelope of the excitation added by truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationEnvelope {
    /// Log-log slope of the envelope against detuning.
    pub slope: f64,
    /// Envelope prefactor: `envelope(Δ) = amplitude · Δ^slope`.
    pub amplitude: f64,
    pub crests: usize,
    pub max_excess: f64,
}

impl TruncationEnvelope {
    pub fn at(&self, detuning: f64) -> f64 {
        self.amplitude * detuning.abs().powf(self.slope)
    }
}

/// Fits the crests of `P(Δ) - P_ref(Δ)` over `window`, where `P_ref` is the
/// same pulse cut at `reference_cutoff`.
pub fn truncation_residual_slope(
    spec: &PulseSpec,
    reference_cutoff: f64,
    window: (f64, f64),
    options: &SweepOptions,
) -> Result<TruncationEnvelope> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid("window must satisfy 0 < low < high"));
    }
    if !(reference_cutoff > 0.0 && reference_cutoff <= spec.cutoff_fraction()) {
        return Err(invalid("reference cut-off must lie in (0, cut-off of the pulse]"));
    }
    let reference = PulseSpec::new(spec.shape(), spec.width(), spec.peak_rabi(), reference_cutoff)?;
    // Crest spacing is about π / t_c; sample each period twenty times.
    let period = std::f64::consts::PI / spec.half_span();
    let points = ((20.0 * (hi - lo) / period).ceil() as usize).clamp(400, options.max_cells / 2);
    let grid = linspace(lo, hi, points);
    let truncated = spectral_profile(spec, &grid, options)?;
    let ideal = spectral_profile(&reference, &grid, options)?;
    let excess: Vec<f64> = truncated
        .probabilities
        .iter()
        .zip(&ideal.probabilities)
        .map(|(a, b)| a - b)
        .collect();
    let max_excess = excess.iter().fold(0.0f64, |m, &e| m.max(e));
    if max_excess < 1e-6 {
        return Err(Error::Inconclusive(format!(
            "truncation excess {max_excess:e} is below 1e-6"
        )));
    }
    let crests: Vec<(f64, f64)> = (1..points - 1)
        .filter(|&i| excess[i] > 0.0 && excess[i] >= excess[i - 1] && excess[i] > excess[i + 1])
        .map(|i| (grid[i], excess[i]))
        .collect();
    if crests.len() < 3 {
        return Err(Error::Inconclusive(format!(
            "only {} oscillation crests in the window",
            crests.len()
        )));
    }
    // Envelope ∝ Δ^slope, so fit_scaling's exponent is -slope.
    let fit = fit_scaling(&crests)?;
    Ok(TruncationEnvelope {
        slope: -fit.exponent,
        amplitude: fit.intercept.exp(),
        crests: crests.len(),
        max_excess,
    })
}

/// One row of a width table: widths at several areas for one envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub template: PulseTemplate,
    pub peaks: Vec<PeakWidth>,
}

impl WidthRow {
    /// First-area width over last-area width.
    pub fn narrowing_ratio(&self) -> Option<f64> {
        let first = self.peaks.first()?.width.fwhm;
        let last = self.peaks.last()?.width.fwhm;
        Some(first / last)
    }
}

/// Widths at `areas_over_pi` for each template.
pub fn width_table(
    templates: &[PulseTemplate],
    areas_over_pi: &[f64],
    initial_half_span: f64,
    points: usize,
    options: &SweepOptions,
) -> Result<Vec<WidthRow>> {
    templates
        .iter()
        .map(|t| {
            Ok(WidthRow {
                template: *t,
                peaks: peak_widths(t, areas_over_pi, initial_half_span, points, options)?,
            })
        })
        .collect()
}

/// Widths at the given areas and the power law through them.
pub fn scaling_study(
    template: &PulseTemplate,
    areas_over_pi: &[f64],
    initial_half_span: f64,
    points: usize,
    options: &SweepOptions,
) -> Result<(Vec<PeakWidth>, ScalingFit)> {
    let peaks = peak_widths(template, areas_over_pi, initial_half_span, points, options)?;
    let fit = fit_scaling(&peaks.iter().map(|p| (p.peak_rabi, p.width.fwhm)).collect::<Vec<_>>())?;
    Ok((peaks, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rabi_rect_oracle, rosen_zener_oracle};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn serial() -> SweepOptions {
        SweepOptions::default().with_workers(1)
    }

    #[test]
    fn triangle_width() {
        let d = linspace(-3.0, 3.0, 61);
        let p: Vec<f64> = d.iter().map(|x| (1.0 - x.abs() / 2.0).max(0.0)).collect();
        let w = fwhm_of(&d, &p).unwrap();
        assert_relative_eq!(w.fwhm, 2.0, max_relative = 1e-12);
        assert!(w.left_cross < w.peak_detuning && w.peak_detuning < w.right_cross);
    }

    #[test]
    fn width_errors() {
        let d = linspace(-1.0, 1.0, 11);
        let edge: Vec<f64> = d.iter().map(|x| x + 1.0).collect();
        assert!(matches!(fwhm_of(&d, &edge), Err(Error::Inconclusive(_))));
        let flat = vec![0.0; 11];
        assert!(matches!(fwhm_of(&d, &flat), Err(Error::Inconclusive(_))));
        let wide: Vec<f64> = d.iter().map(|x| 1.0 - 0.1 * x * x).collect();
        assert!(matches!(fwhm_of(&d, &wide), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn sidelobes_are_ignored() {
        let d = linspace(-6.0, 6.0, 1201);
        let p: Vec<f64> = d
            .iter()
            .map(|&x| if x.abs() < 1.0 { 1.0 - x.abs() } else { 0.8 * (-(x.abs() - 3.0).powi(2)).exp() })
            .collect();
        assert_relative_eq!(fwhm_of(&d, &p).unwrap().fwhm, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn rectangular_extent_grows_linearly() {
        let mut points = Vec::new();
        for k in (5..=50).step_by(5) {
            let rabi = (2 * k + 1) as f64 * PI / 2.0;
            let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, rabi, 1.0).unwrap();
            let edge = 1.3 * rabi + 10.0;
            let grid = linspace(-edge, edge, (2.0 * edge / 0.05) as usize | 1);
            let p = spectral_profile(&spec, &grid, &serial()).unwrap();
            points.push((rabi, half_max_extent(&p.detunings, &p.probabilities).unwrap().fwhm));
        }
        let fit = fit_scaling(&points).unwrap();
        assert!((fit.exponent + 1.0).abs() < 0.05, "{}", fit.exponent);
        // The central lobe alone only grows as √Ω₀.
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, 101.0 * PI / 2.0, 1.0).unwrap();
        let grid = linspace(-20.0, 20.0, 4001);
        let central = fwhm(&spectral_profile(&spec, &grid, &serial()).unwrap()).unwrap();
        assert_relative_eq!(central.fwhm, 2.0 * (PI * spec.peak_rabi() / 2.0).sqrt(), max_relative = 0.01);
    }

    #[test]
    fn zero_drive_profile() {
        let spec = PulseSpec::new(ShapeFamily::Gaussian, 2.0, 0.0, 1e-3).unwrap();
        let p = spectral_profile(&spec, &linspace(-1.0, 1.0, 11), &serial()).unwrap();
        assert!(p.probabilities.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rectangular_profile_is_rabi_lineshape() {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 2.0, PI / 4.0, 1.0).unwrap();
        let grid = linspace(-3.0, 3.0, 61);
        let p = spectral_profile(&spec, &grid, &serial()).unwrap();
        for (d, v) in grid.iter().zip(&p.probabilities) {
            assert!((v - rabi_rect_oracle(PI / 4.0, *d, 4.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn sech_profile_width() {
        let width = 1.5;
        let spec = PulseSpec::new(ShapeFamily::Sech, width, 1.0 / width, 1e-6).unwrap();
        let grid = linspace(-3.0 / width, 3.0 / width, 121);
        let p = spectral_profile(&spec, &grid, &serial()).unwrap();
        for (d, v) in grid.iter().zip(&p.probabilities) {
            assert!((v - rosen_zener_oracle(1.0 / width, width, *d)).abs() < 1e-4);
        }
        // Closed form: sech²(πΔT/2) = 1/2 at Δ = (2/(πT)) arccosh √2.
        let exact = 4.0 / (PI * width) * 2f64.sqrt().acosh();
        // Linear interpolation between grid points costs a few 1e-4.
        let (_, w) = resolved_fwhm(&spec, 3.0 / width, 201, &serial()).unwrap();
        assert_relative_eq!(w.fwhm, exact, max_relative = 1e-3);
        assert_relative_eq!(exact * width, 1.122_199_7, max_relative = 1e-7);
    }

    #[test]
    fn resonant_column_peaks_at_odd_areas() {
        let template = PulseTemplate::new(ShapeFamily::lorentzian(1.0).unwrap(), 1.0, 0.05).unwrap();
        let unit = template.amplitude_for_area(PI).unwrap();
        let rabis = linspace(0.0, 9.5 * unit, 96);
        let column = rabi_slice(&template, 0.0, &rabis, &serial()).unwrap();
        for k in 0..5 {
            let target = (2 * k + 1) as f64 * unit;
            let lo = rabis.iter().position(|&r| r > target - unit).unwrap();
            let hi = rabis.iter().rposition(|&r| r < target + unit).unwrap();
            let best = (lo..=hi).max_by(|&a, &b| column[a].total_cmp(&column[b])).unwrap();
            assert!((rabis[best] - target).abs() <= rabis[1] - rabis[0] + 1e-12);
        }
        // Area theorem on resonance.
        for (r, p) in rabis.iter().zip(&column) {
            let area = template.with_peak_rabi(*r).unwrap().area();
            assert!((p - (area / 2.0).sin().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn landscape_symmetric_and_worker_independent() {
        let template = PulseTemplate::new(ShapeFamily::lorentzian(0.75).unwrap(), 1.0, 0.02).unwrap();
        let rabis = linspace(0.1, 3.0, 7);
        let dets = linspace(-2.0, 2.0, 9);
        let a = excitation_landscape(&template, &rabis, &dets, &serial()).unwrap();
        let b = excitation_landscape(&template, &rabis, &dets, &SweepOptions::default().with_workers(4)).unwrap();
        assert_eq!(a, b);
        for row in &a.probabilities {
            for j in 0..dets.len() {
                assert!((row[j] - row[dets.len() - 1 - j]).abs() < 1e-10);
                assert!((0.0..=1.0).contains(&row[j]));
            }
        }
        assert_eq!(a.column(4).len(), rabis.len());
    }

    #[test]
    fn sweep_budget() {
        let template = PulseTemplate::new(ShapeFamily::Gaussian, 1.0, 0.01).unwrap();
        let options = SweepOptions {
            max_cells: 10,
            ..serial()
        };
        let r = excitation_landscape(&template, &[1.0; 4], &[0.0, 1.0, 2.0], &options);
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn bad_grid_reports_index() {
        let spec = PulseSpec::new(ShapeFamily::Gaussian, 1.0, 1.0, 0.01).unwrap();
        let options = SweepOptions {
            propagation: PropagateOptions {
                max_steps: 16,
                ..Default::default()
            },
            ..serial()
        };
        assert!(spectral_profile(&spec, &[0.0, 1.0], &options).is_err());
        assert!(spectral_profile(&spec, &[1.0, 0.0], &serial()).is_err());
        assert!(spectral_profile(&spec, &[], &serial()).is_err());
    }

    #[test]
    fn scaling_fits() {
        let inverse: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 9.0].iter().map(|&x| (x, 3.0 / x)).collect();
        let fit = fit_scaling(&inverse).unwrap();
        assert_relative_eq!(fit.exponent, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), max_relative = 1e-12);
        let linear: Vec<(f64, f64)> = [1.0, 2.0, 5.0].iter().map(|&x| (x, 0.5 * x)).collect();
        assert_relative_eq!(fit_scaling(&linear).unwrap().exponent, -1.0, max_relative = 1e-12);
        assert!(fit_scaling(&inverse[..2]).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn subsampled_width_is_stable() {
        let spec = PulseSpec::new(ShapeFamily::lorentzian(1.0).unwrap(), 1.0, 3.0, 0.01).unwrap();
        let grid = linspace(-2.0, 2.0, 201);
        let p = spectral_profile(&spec, &grid, &serial()).unwrap();
        let full = fwhm(&p).unwrap();
        let d2: Vec<f64> = p.detunings.iter().step_by(2).copied().collect();
        let p2: Vec<f64> = p.probabilities.iter().step_by(2).copied().collect();
        let half = fwhm_of(&d2, &p2).unwrap();
        assert!((full.fwhm - half.fwhm).abs() <= 2.0 * (d2[1] - d2[0]));
    }

    #[test]
    fn truncation_self_reference_is_inconclusive() {
        let spec = PulseSpec::new(ShapeFamily::lorentzian(1.0).unwrap(), 1.0, 8.0, 0.02).unwrap();
        let c = spec.edge_rabi();
        let r = truncation_residual_slope(&spec, 0.02, (10.0 * c, 100.0 * c), &serial());
        assert!(matches!(r, Err(Error::Inconclusive(_))));
    }
}
