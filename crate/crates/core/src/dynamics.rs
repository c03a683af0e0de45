//! Two-level Schrödinger propagation at fixed detuning.
//!
//! In the rotating frame the Hamiltonian is
//!
//! ```text
//! H(t) = ½ [ -Δ    Ω(t) ]
//!          [ Ω(t)   Δ   ]      (ħ = 1, real coupling)
//! ```
//!
//! and the system starts in the ground state at the leading pulse edge.
//! Every step multiplies the state by the exact exponential of a constant
//! 2×2 generator, so evolution is unitary by construction. Two generators are
//! available: the held midpoint value of the Hamiltonian ([`Integrator::Hold`],
//! second order, and exact for piecewise-constant waveforms) and the
//! fourth-order Magnus generator built from two Gauss–Legendre nodes per step
//! ([`Integrator::Magnus4`]). Both are exact for a rectangular pulse.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::pulse::{PulseSpec, SampleOptions, SampledPulse, HARDWARE_DT};

/// Shots averaged per point on the hardware.
pub const HARDWARE_SHOTS: u32 = 1024;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Probability amplitudes of the ground (`c0`) and excited (`c1`) states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelState {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl TwoLevelState {
    pub fn ground() -> Self {
        TwoLevelState {
            c0: Complex64::new(1.0, 0.0),
            c1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.c1.norm_sqr()
    }

    /// Applies `exp(-i g·σ / 2)`, with `g` the rotation vector.
    #[inline]
    fn rotate(&mut self, gx: f64, gy: f64, gz: f64) {
        let angle = (gx * gx + gy * gy + gz * gz).sqrt();
        let (s, c) = (0.5 * angle).sin_cos();
        let k = if angle > 0.0 { s / angle } else { 0.5 };
        // U = c·I - i k (g·σ)
        let u00 = Complex64::new(c, -k * gz);
        let u11 = Complex64::new(c, k * gz);
        let u01 = Complex64::new(-k * gy, -k * gx);
        let u10 = Complex64::new(k * gy, -k * gx);
        let (a, b) = (self.c0, self.c1);
        self.c0 = u00 * a + u01 * b;
        self.c1 = u10 * a + u11 * b;
    }
}

/// Result of one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    /// Post-pulse excited-state population `|c1|²`.
    pub p_excite: f64,
    pub final_state: TwoLevelState,
    pub step_count: usize,
    /// `|p(dt) - p(dt/2)|` from the last refinement; zero in hardware mode,
    /// where the held waveform is propagated exactly.
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order Magnus generator from two Gauss–Legendre nodes.
    #[default]
    Magnus4,
    /// Midpoint value held over the step (zero-order hold).
    Hold,
}

/// Replace each probability by the mean of `shots` Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotNoise {
    pub shots: u32,
    pub seed: u64,
}

impl Default for ShotNoise {
    fn default() -> Self {
        ShotNoise {
            shots: HARDWARE_SHOTS,
            seed: 0,
        }
    }
}

impl ShotNoise {
    /// Empirical frequency for grid cell `index`. The stream depends only on
    /// `(seed, index)`, not on evaluation order.
    pub fn sample(&self, p: f64, index: u64) -> f64 {
        let seed = self.seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Binomial::new(u64::from(self.shots), p.clamp(0.0, 1.0)).expect("p within [0, 1]");
        dist.sample(&mut rng) as f64 / f64::from(self.shots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Initial step; `None` picks `min(2/9 ns, T/200)`.
    pub dt: Option<f64>,
    /// Zero-order hold on the 2/9 ns grid, no refinement.
    pub hardware_mode: bool,
    pub integrator: Integrator,
    /// Refinement stops once `|p(dt) - p(dt/2)|` falls below this.
    pub tolerance: f64,
    /// Largest step count a single pass may use.
    pub max_steps: usize,
    pub shot_noise: Option<ShotNoise>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            dt: None,
            hardware_mode: false,
            integrator: Integrator::Magnus4,
            tolerance: 1e-8,
            max_steps: 1 << 25,
            shot_noise: None,
        }
    }
}

impl PropagateOptions {
    pub fn hardware() -> Self {
        PropagateOptions {
            hardware_mode: true,
            ..Default::default()
        }
    }
}

/// Envelope values at the quadrature nodes of a uniform step grid.
#[derive(Debug)]
enum StepTable {
    Magnus { h: f64, early: Vec<f64>, late: Vec<f64> },
    Hold { h: f64, values: Vec<f64> },
}

impl StepTable {
    fn build(spec: &PulseSpec, integrator: Integrator, steps: usize) -> Self {
        let half = spec.half_span();
        let h = 2.0 * half / steps as f64;
        let shape = spec.shape();
        let width = spec.width();
        let f = |t: f64| shape.eval(width, t);
        match integrator {
            Integrator::Hold => StepTable::Hold {
                h,
                values: (0..steps).map(|k| f(-half + (k as f64 + 0.5) * h)).collect(),
            },
            Integrator::Magnus4 => {
                let offset = SQRT3 / 6.0 * h;
                let mid = |k: usize| -half + (k as f64 + 0.5) * h;
                StepTable::Magnus {
                    h,
                    early: (0..steps).map(|k| f(mid(k) - offset)).collect(),
                    late: (0..steps).map(|k| f(mid(k) + offset)).collect(),
                }
            }
        }
    }

    fn from_samples(samples: &SampledPulse) -> Self {
        StepTable::Hold {
            h: samples.dt,
            values: samples.held_values(),
        }
    }

    fn steps(&self) -> usize {
        match self {
            StepTable::Magnus { early, .. } => early.len(),
            StepTable::Hold { values, .. } => values.len(),
        }
    }

    fn evolve(&self, peak_rabi: f64, detuning: f64) -> TwoLevelState {
        let mut state = TwoLevelState::ground();
        match self {
            StepTable::Hold { h, values } => {
                let gz = -detuning * h;
                for &f in values {
                    state.rotate(peak_rabi * f * h, 0.0, gz);
                }
            }
            StepTable::Magnus { h, early, late } => {
                let gz = -detuning * h;
                let cy = SQRT3 / 12.0 * h * h * detuning * peak_rabi;
                let cx = 0.5 * h * peak_rabi;
                for (&fa, &fb) in early.iter().zip(late) {
                    state.rotate(cx * (fa + fb), cy * (fb - fa), gz);
                }
            }
        }
        state
    }
}

/// Reusable propagator for a fixed envelope, truncation and step schedule.
///
/// Envelope values at the integration nodes are computed once per refinement
/// level and shared between all `(Ω₀, Δ)` evaluations, which is what makes
/// grid sweeps cheap. The type is `Sync`; sweeps call [`Propagator::run`]
/// from many threads.
#[derive(Debug)]
pub struct Propagator {
    template: PulseSpec,
    options: PropagateOptions,
    base_steps: usize,
    levels: Vec<OnceLock<StepTable>>,
    hardware: Option<StepTable>,
}

impl Propagator {
    /// The peak Rabi frequency of `template` is ignored; pass it to `run`.
    pub fn new(template: &PulseSpec, options: PropagateOptions) -> Result<Self> {
        if !(options.tolerance > 0.0) {
            return Err(invalid("tolerance must be > 0"));
        }
        let duration = template.duration();
        if options.hardware_mode {
            let unit = template.with_peak_rabi(1.0)?;
            let samples = unit.sample(HARDWARE_DT, SampleOptions::default())?;
            if samples.interval_count() > options.max_steps {
                return Err(Error::ResourceLimit {
                    what: "hardware samples",
                    requested: samples.interval_count(),
                    limit: options.max_steps,
                });
            }
            return Ok(Propagator {
                template: *template,
                options,
                base_steps: samples.interval_count(),
                levels: Vec::new(),
                hardware: Some(StepTable::from_samples(&samples)),
            });
        }
        let dt = match options.dt {
            Some(dt) if dt.is_finite() && dt > 0.0 => dt,
            Some(dt) => return Err(invalid(format!("dt must be finite and > 0, got {dt}"))),
            None => default_dt(template),
        };
        let base_steps = ((duration / dt - 1e-9).ceil() as usize).max(1);
        if 2 * base_steps > options.max_steps {
            return Err(Error::ResourceLimit {
                what: "propagation steps",
                requested: 2 * base_steps,
                limit: options.max_steps,
            });
        }
        let mut depth = 1;
        while (base_steps << depth) <= options.max_steps && depth < 40 {
            depth += 1;
        }
        Ok(Propagator {
            template: *template,
            options,
            base_steps,
            levels: (0..depth).map(|_| OnceLock::new()).collect(),
            hardware: None,
        })
    }

    pub fn template(&self) -> &PulseSpec {
        &self.template
    }

    fn level(&self, k: usize) -> &StepTable {
        self.levels[k].get_or_init(|| {
            StepTable::build(&self.template, self.options.integrator, self.base_steps << k)
        })
    }

    /// Propagates with peak Rabi frequency `peak_rabi` at detuning `detuning`.
    pub fn run(&self, peak_rabi: f64, detuning: f64) -> Result<PropagationResult> {
        self.run_cell(peak_rabi, detuning, 0)
    }

    /// As [`Propagator::run`]; `cell` selects the shot-noise stream.
    pub fn run_cell(&self, peak_rabi: f64, detuning: f64, cell: u64) -> Result<PropagationResult> {
        ensure_finite("detuning", detuning)?;
        if !(peak_rabi.is_finite() && peak_rabi >= 0.0) {
            return Err(invalid(format!("peak Rabi frequency must be finite and ≥ 0, got {peak_rabi}")));
        }
        let mut result = match &self.hardware {
            Some(table) => {
                let state = table.evolve(peak_rabi, detuning);
                PropagationResult {
                    p_excite: state.excited_population().clamp(0.0, 1.0),
                    final_state: state,
                    step_count: table.steps(),
                    est_error: 0.0,
                }
            }
            None => self.refine(peak_rabi, detuning)?,
        };
        if let Some(noise) = self.options.shot_noise {
            result.p_excite = noise.sample(result.p_excite, cell);
        }
        Ok(result)
    }

    fn refine(&self, peak_rabi: f64, detuning: f64) -> Result<PropagationResult> {
        let mut coarse = self.level(0).evolve(peak_rabi, detuning).excited_population();
        let mut steps = self.base_steps;
        for k in 1..self.levels.len() {
            let table = self.level(k);
            let state = table.evolve(peak_rabi, detuning);
            let fine = state.excited_population();
            steps += table.steps();
            let est_error = (fine - coarse).abs();
            if est_error < self.options.tolerance {
                return Ok(PropagationResult {
                    p_excite: fine.clamp(0.0, 1.0),
                    final_state: state,
                    step_count: steps,
                    est_error,
                });
            }
            coarse = fine;
        }
        Err(Error::ResourceLimit {
            what: "propagation steps",
            requested: self.base_steps << self.levels.len(),
            limit: self.options.max_steps,
        })
    }
}

/// `min(2/9 ns, T/200)`, capped so the grid has at least 16 steps.
pub fn default_dt(spec: &PulseSpec) -> f64 {
    HARDWARE_DT.min(spec.width() / 200.0).min(spec.duration() / 16.0)
}

/// Post-pulse excitation for `spec` at detuning `detuning` (rad/ns).
pub fn propagate(spec: &PulseSpec, detuning: f64, options: &PropagateOptions) -> Result<PropagationResult> {
    Propagator::new(spec, *options)?.run(spec.peak_rabi(), detuning)
}

/// Exact propagation of a sampled waveform held constant over each interval.
pub fn propagate_sampled(samples: &SampledPulse, detuning: f64) -> Result<PropagationResult> {
    ensure_finite("detuning", detuning)?;
    if samples.samples.iter().any(|v| !v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let table = StepTable::from_samples(samples);
    let state = table.evolve(1.0, detuning);
    Ok(PropagationResult {
        p_excite: state.excited_population().clamp(0.0, 1.0),
        final_state: state,
        step_count: table.steps(),
        est_error: 0.0,
    })
}

/// `|p(dt) - p(dt/2)|` for a single pass at each step size.
pub fn convergence_probe(spec: &PulseSpec, detuning: f64, dt: f64, integrator: Integrator) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be finite and > 0, got {dt}")));
    }
    let steps = ((spec.duration() / dt - 1e-9).ceil() as usize).max(1);
    let p = |n: usize| {
        StepTable::build(spec, integrator, n)
            .evolve(spec.peak_rabi(), detuning)
            .excited_population()
    };
    Ok((p(steps) - p(2 * steps)).abs())
}

/// State at every step boundary, for looking at transient excitation.
pub fn trajectory(spec: &PulseSpec, detuning: f64, dt: f64) -> Result<Vec<(f64, TwoLevelState)>> {
    ensure_finite("detuning", detuning)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be finite and > 0, got {dt}")));
    }
    let half = spec.half_span();
    let steps = ((2.0 * half / dt - 1e-9).ceil() as usize).max(1);
    let h = 2.0 * half / steps as f64;
    let offset = SQRT3 / 6.0 * h;
    let mut state = TwoLevelState::ground();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((-half, state));
    for k in 0..steps {
        let mid = -half + (k as f64 + 0.5) * h;
        let (a, b) = (spec.rabi(mid - offset), spec.rabi(mid + offset));
        state.rotate(0.5 * h * (a + b), SQRT3 / 12.0 * h * h * detuning * (b - a), -detuning * h);
        out.push((-half + (k + 1) as f64 * h, state));
    }
    Ok(out)
}

/// Flat pulse of constant `Ω₀` lasting `duration`:
/// `Ω₀²/(Ω₀²+Δ²) · sin²(√(Ω₀²+Δ²) · duration / 2)`.
pub fn rabi_rect_oracle(peak_rabi: f64, detuning: f64, duration: f64) -> f64 {
    let gen2 = peak_rabi * peak_rabi + detuning * detuning;
    if gen2 == 0.0 {
        return 0.0;
    }
    let s = (0.5 * gen2.sqrt() * duration).sin();
    peak_rabi * peak_rabi / gen2 * s * s
}

/// Untruncated `Ω₀ sech(t/T)` pulse:
/// `sin²(π Ω₀ T / 2) · sech²(π Δ T / 2)`.
pub fn rosen_zener_oracle(peak_rabi: f64, width: f64, detuning: f64) -> f64 {
    let s = (0.5 * PI * peak_rabi * width).sin();
    let sech = 1.0 / (0.5 * PI * detuning * width).cosh();
    s * s * sech * sech
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::ShapeFamily;
    use approx::assert_relative_eq;

    fn lor(n: f64) -> ShapeFamily {
        ShapeFamily::lorentzian(n).unwrap()
    }

    #[test]
    fn oracles() {
        assert_relative_eq!(rabi_rect_oracle(PI, 0.0, 1.0), 1.0);
        assert_relative_eq!(rabi_rect_oracle(1.0, 1.0, PI / 2f64.sqrt()), 0.5, max_relative = 1e-15);
        assert_eq!(rabi_rect_oracle(0.0, 5.0, 7.0), 0.0);
        assert_eq!(rabi_rect_oracle(0.0, 0.0, 7.0), 0.0);

        assert_relative_eq!(rosen_zener_oracle(1.0, 1.0, 0.0), 1.0);
        let s = 1.0 / (PI / 2.0).cosh();
        assert_relative_eq!(rosen_zener_oracle(1.0, 1.0, 1.0), s * s, max_relative = 1e-15);
        assert_relative_eq!(rosen_zener_oracle(1.0, 1.0, 1.0), 0.158_831_593_180_063_4, max_relative = 1e-12);
        assert!(rosen_zener_oracle(2.0, 1.0, 0.3) < 1e-30);
        assert!(rosen_zener_oracle(4.0, 0.5, -2.0) < 1e-30);
    }

    #[test]
    fn resonant_pi_pulse() {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, PI / 2.0, 1.0).unwrap();
        let r = propagate(&spec, 0.0, &PropagateOptions::default()).unwrap();
        assert!((r.p_excite - 1.0).abs() < 1e-10);
        assert!(r.est_error < 1e-12);
    }

    #[test]
    fn off_resonant_rectangle_reaches_half() {
        // √2 Ω₀ τ = π with Δ = Ω₀ gives half the population.
        let omega = 0.8;
        let duration = PI / (2f64.sqrt() * omega);
        let spec = PulseSpec::new(ShapeFamily::Rectangular, duration / 2.0, omega, 1.0).unwrap();
        let r = propagate(&spec, omega, &PropagateOptions::default()).unwrap();
        assert!((r.p_excite - 0.5).abs() < 1e-10, "{}", r.p_excite);
    }

    #[test]
    fn sech_matches_rosen_zener() {
        let spec = PulseSpec::new(ShapeFamily::Sech, 1.0, 1.0, 1e-6).unwrap();
        let r = propagate(&spec, 1.0, &PropagateOptions::default()).unwrap();
        assert!((r.p_excite - 0.158_83).abs() < 1e-4, "{}", r.p_excite);
        assert!((r.p_excite - rosen_zener_oracle(1.0, 1.0, 1.0)).abs() < 1e-4);
    }

    #[test]
    fn rectangle_probe_is_round_off() {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 3.0, 0.7, 1.0).unwrap();
        for dt in [0.5, 0.1, 0.013] {
            for integrator in [Integrator::Hold, Integrator::Magnus4] {
                assert!(convergence_probe(&spec, 0.4, dt, integrator).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn hold_is_second_order_and_magnus_fourth() {
        let spec = PulseSpec::new(ShapeFamily::Gaussian, 1.0, 2.5, 1e-6).unwrap();
        let hold = |dt| convergence_probe(&spec, 0.9, dt, Integrator::Hold).unwrap();
        let ratio = hold(0.1) / hold(0.05);
        assert!((ratio - 4.0).abs() < 0.4, "hold ratio {ratio}");
        let magnus = |dt| convergence_probe(&spec, 0.9, dt, Integrator::Magnus4).unwrap();
        let ratio = magnus(0.2) / magnus(0.1);
        assert!((ratio - 16.0).abs() < 1.6, "magnus ratio {ratio}");
    }

    #[test]
    fn lorentzian_probe_vanishes() {
        let spec = PulseSpec::new(lor(1.0), 1.0, 3.0, 0.01).unwrap();
        let mut last = f64::INFINITY;
        for dt in [0.4, 0.2, 0.1, 0.05, 0.025] {
            let e = convergence_probe(&spec, 0.7, dt, Integrator::Magnus4).unwrap();
            assert!(e < last, "{e} !< {last} at dt = {dt}");
            last = e;
        }
        assert!(last < 1e-8, "{last}");
    }

    #[test]
    fn hardware_mode_uses_fixed_grid() {
        let spec = PulseSpec::new(lor(1.0), 21.33, 0.1, 0.005).unwrap();
        let r = propagate(&spec, 0.01, &PropagateOptions::hardware()).unwrap();
        assert_eq!(r.step_count, (spec.duration() / HARDWARE_DT).ceil() as usize);
        let smooth = propagate(&spec, 0.01, &PropagateOptions::default()).unwrap();
        assert!((r.p_excite - smooth.p_excite).abs() < 1e-3);
    }

    #[test]
    fn step_cap_is_reported() {
        let spec = PulseSpec::new(lor(1.0), 1.0, 1.0, 1e-4).unwrap();
        let options = PropagateOptions {
            max_steps: 100,
            ..Default::default()
        };
        assert!(matches!(
            propagate(&spec, 0.3, &options),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn shot_noise_is_seeded() {
        let spec = PulseSpec::new(lor(1.0), 1.0, 1.0, 0.01).unwrap();
        let options = PropagateOptions {
            shot_noise: Some(ShotNoise { shots: 1024, seed: 7 }),
            ..Default::default()
        };
        let a = propagate(&spec, 0.2, &options).unwrap().p_excite;
        let b = propagate(&spec, 0.2, &options).unwrap().p_excite;
        assert_eq!(a, b);
        assert_eq!((a * 1024.0).fract(), 0.0);
        let exact = propagate(&spec, 0.2, &PropagateOptions::default()).unwrap().p_excite;
        // Five binomial standard deviations.
        assert!((a - exact).abs() < 5.0 * (exact * (1.0 - exact) / 1024.0).sqrt() + 1e-9);
    }

    #[test]
    fn trajectory_ends_at_propagated_state() {
        let spec = PulseSpec::new(lor(1.0), 1.0, 2.0, 0.01).unwrap();
        let path = trajectory(&spec, 0.5, 0.01).unwrap();
        let end = path.last().unwrap().1.excited_population();
        let r = propagate(&spec, 0.5, &PropagateOptions::default()).unwrap();
        assert!((end - r.p_excite).abs() < 1e-7);
        assert!((path[0].0 + spec.half_span()).abs() < 1e-12);
        let peak = path.iter().map(|(_, s)| s.excited_population()).fold(0.0, f64::max);
        assert!(peak >= end);
    }

    #[test]
    fn sampled_round_trip() {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, PI / 2.0, 1.0).unwrap();
        let samples = spec.sample(0.25, SampleOptions::default()).unwrap();
        let r = propagate_sampled(&samples, 0.0).unwrap();
        assert!((r.p_excite - 1.0).abs() < 1e-12);
    }
}
