//! `verify`: oracle comparisons and module invariants, one line per check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use powernarrow::adiabatic::{border_detuning, diagnostics, eigensplitting, mixing_angle_rate, truncation_artifact};
use powernarrow::dynamics::{propagate, rabi_rect_oracle, rosen_zener_oracle, PropagateOptions, Propagator};
use powernarrow::pulse::{SampleOptions, HARDWARE_DT};
use powernarrow::spectro::{
    excitation_landscape, fit_scaling, fwhm, fwhm_of, half_max_extent, linspace, resolved_fwhm, scaling_study,
    spectral_profile, truncation_residual_slope, PulseTemplate, SweepOptions,
};
use powernarrow::units::{mhz_to_rad_per_ns, rad_per_ns_to_mhz};
use powernarrow::{Error, PulseSpec, ShapeFamily};

use crate::config::RunConfig;
use crate::output::{table_from_csv, table_to_csv, Table};
use crate::CliError;

type Check = (&'static str, fn() -> Result<(bool, String), Error>);

fn lor(n: f64) -> ShapeFamily {
    ShapeFamily::lorentzian(n).expect("valid power")
}

fn serial() -> SweepOptions {
    SweepOptions::default().with_workers(1)
}

fn shapes() -> [ShapeFamily; 6] {
    [lor(2.0), lor(1.0), lor(0.75), lor(0.6), ShapeFamily::Sech, ShapeFamily::Gaussian]
}

fn unit_boundary() -> Result<(bool, String), Error> {
    let w = mhz_to_rad_per_ns(35.0);
    let fwd = (w - 0.219_911_485_751_285_5).abs();
    let back = (rad_per_ns_to_mhz(0.219_911_485_751_285_5) - 35.0).abs();
    Ok((fwd <= 1e-12 && back <= 1e-12, format!("35 MHz -> {w:.16} rad/ns, errors {fwd:.1e} / {back:.1e}")))
}

fn shape_invariants() -> Result<(bool, String), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_even = 0.0f64;
    let mut worst_cut = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut monotone = true;
    for shape in shapes() {
        for _ in 0..100 {
            let t = rng.random_range(0.0..6.0);
            worst_even = worst_even.max((shape.value(1.0, t)? - shape.value(1.0, -t)?).abs());
            let h = 1e-6;
            let fd = (shape.value(1.0, t + h)? - shape.value(1.0, t - h)?) / (2.0 * h);
            let an = shape.derivative(1.0, t)?;
            if an.abs() > 1e-6 {
                worst_fd = worst_fd.max((fd - an).abs() / an.abs());
            }
        }
        for eps in [0.5, 0.03, 0.005, 1e-4] {
            let tc = shape.cutoff_time(1.0, eps)?;
            worst_cut = worst_cut.max((shape.value(1.0, tc)? / eps - 1.0).abs());
        }
        if shape.power().is_some() {
            let ts = linspace(0.0, 50.0, 2001);
            let vals: Vec<f64> = ts.iter().map(|&t| shape.value(1.0, t)).collect::<Result<_, _>>()?;
            monotone &= vals.windows(2).all(|w| w[1] < w[0]);
        }
    }
    let mut area_monotone = true;
    for shape in shapes() {
        let areas: Vec<f64> = [0.5, 0.1, 0.01, 1e-3, 1e-4]
            .iter()
            .map(|&e| PulseSpec::new(shape, 1.0, 1.0, e).map(|s| s.area()))
            .collect::<Result<_, _>>()?;
        area_monotone &= areas.windows(2).all(|w| w[1] >= w[0]);
    }
    Ok((
        worst_even == 0.0 && worst_cut <= 1e-10 && worst_fd <= 1e-5 && monotone && area_monotone,
        format!(
            "evenness {worst_even:.1e}, cut {worst_cut:.1e}, derivative {worst_fd:.1e}, monotone tails {monotone}, area monotone {area_monotone}"
        ),
    ))
}

fn hardware_samples() -> Result<(bool, String), Error> {
    let spec = PulseSpec::new(lor(1.0), 21.33, 1.0, 0.005)?;
    let samples = spec.sample(HARDWARE_DT, SampleOptions::hardware())?;
    let n = samples.samples.len();
    Ok((
        n.abs_diff(2704) <= 1 && (samples.duration() - 600.89).abs() < 0.01,
        format!("{n} samples over {:.2} ns (2704 ± 1, 600.89 ns)", samples.duration()),
    ))
}

fn rectangular_oracle() -> Result<(bool, String), Error> {
    let mut worst = 0.0f64;
    for omega in linspace(0.0, 9.0 * PI / 10.0, 20) {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 5.0, omega, 1.0)?;
        let prop = Propagator::new(&spec, PropagateOptions::default())?;
        for delta in linspace(-1.0, 1.0, 20) {
            worst = worst.max((prop.run(omega, delta)?.p_excite - rabi_rect_oracle(omega, delta, 10.0)).abs());
        }
    }
    Ok((worst <= 1e-10, format!("20×20 grid, max deviation {worst:.1e} (≤ 1e-10)")))
}

fn sech_oracle() -> Result<(bool, String), Error> {
    let template = PulseTemplate::new(ShapeFamily::Sech, 1.0, 1e-6)?;
    let grid = linspace(-3.0, 3.0, 61);
    let mut worst = 0.0f64;
    for area in [1.0, 3.0, 7.0] {
        let omega = template.amplitude_for_area(area * PI)?;
        let p = spectral_profile(&template.with_peak_rabi(omega)?, &grid, &serial())?;
        for (d, v) in grid.iter().zip(&p.probabilities) {
            worst = worst.max((v - rosen_zener_oracle(omega, 1.0, *d)).abs());
        }
    }
    Ok((worst <= 1e-4, format!("areas π, 3π, 7π, max deviation {worst:.1e} (≤ 1e-4)")))
}

fn unitarity_symmetry_area() -> Result<(bool, String), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut norm, mut asym, mut theorem) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200 {
        let shape = shapes()[i % 6];
        let eps = 10f64.powf(rng.random_range(-3.0..-0.5));
        let spec = PulseSpec::new(shape, rng.random_range(0.5..2.0), rng.random_range(0.0..8.0), eps)?;
        let delta = rng.random_range(-4.0..4.0);
        let opts = PropagateOptions::default();
        let (a, b) = (propagate(&spec, delta, &opts)?, propagate(&spec, -delta, &opts)?);
        norm = norm.max((a.final_state.norm_sqr() - 1.0).abs());
        asym = asym.max((a.p_excite - b.p_excite).abs());
        let res = propagate(&spec, 0.0, &opts)?.p_excite;
        theorem = theorem.max((res - (spec.area() / 2.0).sin().powi(2)).abs());
    }
    Ok((
        norm <= 1e-10 && asym <= 1e-10 && theorem <= 1e-8,
        format!("200 draws: norm {norm:.1e}, symmetry {asym:.1e} (≤ 1e-10), area theorem {theorem:.1e} (≤ 1e-8)"),
    ))
}

fn adiabatic_invariants() -> Result<(bool, String), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    for _ in 0..200 {
        let (o, d) = (rng.random_range(-10.0..10.0f64), rng.random_range(-10.0..10.0f64));
        let e = eigensplitting(o, d);
        ok &= e >= o.abs().max(d.abs()) && e <= o.abs() + d.abs() + 1e-15;
        let spec = PulseSpec::new(lor(1.0), 1.0, o.abs(), 1e-3)?;
        let t = rng.random_range(0.0..5.0);
        let d = d.abs().max(0.01);
        let (plus, minus) = (mixing_angle_rate(&spec, d, t)?, mixing_angle_rate(&spec, d, -t)?);
        ok &= plus == -minus && plus.abs() <= spec.rabi_derivative(t)?.abs() / (2.0 * d) * (1.0 + 1e-12);
    }
    let far: Vec<(f64, f64)> = [1e4, 1e5, 1e6].iter().map(|&d| Ok((d, truncation_artifact(0.1, d, 0.0)?))).collect::<Result<_, Error>>()?;
    let slope = -fit_scaling(&far)?.exponent;
    ok &= (slope + 2.0).abs() < 1e-6;
    let borders: Vec<f64> = linspace(10.0, 100.0, 6)
        .iter()
        .map(|&r| border_detuning(&PulseSpec::new(lor(1.0), 1.0, r, 1e-6)?))
        .collect::<Result<_, _>>()?;
    let decreasing = borders.windows(2).all(|w| w[1] < w[0]);
    let d = diagnostics(&PulseSpec::new(lor(0.75), 1.0, 20.0, 1e-9)?)?;
    let residual = (d.epsilon_at_tm - 2.0 * d.theta_dot_max).abs() / d.epsilon_at_tm;
    Ok((
        ok && decreasing && residual < 1e-6,
        format!("splitting and ϑ̇ bounds, artifact slope {slope:.8}, Δ_b·T at Ω₀T = 10..100 {borders:.4?}, border residual {residual:.1e}"),
    ))
}

fn determinism() -> Result<(bool, String), Error> {
    let template = PulseTemplate::new(lor(0.75), 1.0, 0.01)?;
    let rabis = linspace(0.5, 6.0, 12);
    let grid = linspace(-3.0, 3.0, 25);
    let a = excitation_landscape(&template, &rabis, &grid, &serial())?;
    let b = excitation_landscape(&template, &rabis, &grid, &SweepOptions::default().with_workers(4))?;
    Ok((a == b, "12×25 landscape, 1 vs 4 workers bit-identical".into()))
}

fn subsampling() -> Result<(bool, String), Error> {
    let spec = PulseSpec::new(lor(1.0), 1.0, 5.0, 0.01)?;
    let p = spectral_profile(&spec, &linspace(-2.0, 2.0, 161), &serial())?;
    let full = fwhm(&p)?.fwhm;
    let d: Vec<f64> = p.detunings.iter().step_by(2).copied().collect();
    let v: Vec<f64> = p.probabilities.iter().step_by(2).copied().collect();
    let half = fwhm_of(&d, &v)?.fwhm;
    let step = d[1] - d[0];
    Ok(((full - half).abs() <= 2.0 * step, format!("width {full:.5} vs {half:.5} on half the grid (≤ 2 steps = {:.3})", 2.0 * step)))
}

fn sech_constant_width() -> Result<(bool, String), Error> {
    let template = PulseTemplate::new(ShapeFamily::Sech, 1.0, 1e-6)?;
    let widths: Vec<f64> = [1.0, 3.0, 5.0, 7.0]
        .iter()
        .map(|a| Ok(resolved_fwhm(&template.with_peak_rabi(template.amplitude_for_area(a * PI)?)?, 3.0, 201, &serial())?.1.fwhm))
        .collect::<Result<_, Error>>()?;
    let spread = widths.iter().cloned().fold(0.0, f64::max) / widths.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    Ok((spread < 0.01, format!("widths·T {widths:.4?}, spread {:.3}% (< 1%)", 100.0 * spread)))
}

fn rectangular_broadening() -> Result<(bool, String), Error> {
    let mut points = Vec::new();
    for k in (5..=50).step_by(5) {
        let rabi = (2 * k + 1) as f64 * PI / 2.0;
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, rabi, 1.0)?;
        let edge = 1.3 * rabi + 10.0;
        let p = spectral_profile(&spec, &linspace(-edge, edge, (2.0 * edge / 0.05) as usize | 1), &serial())?;
        points.push((rabi, half_max_extent(&p.detunings, &p.probabilities)?.fwhm));
    }
    let nu = fit_scaling(&points)?.exponent;
    Ok(((nu + 1.0).abs() <= 0.05, format!("half-maximum extent over Ω₀T = 5.5π..50.5π, ν̂ = {nu:.3} (-1 ± 0.05)")))
}

fn lorentzian_scaling() -> Result<(bool, String), Error> {
    let template = PulseTemplate::new(lor(1.0), 1.0, 1e-4)?;
    let (peaks, fit) = scaling_study(&template, &[3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0], 4.0, 101, &SweepOptions::default())?;
    let ratio = peaks.iter().map(|p| p.peak_rabi * 1e-4 / p.width.fwhm).fold(0.0, f64::max);
    Ok((
        (fit.exponent - 1.0).abs() <= 0.25 && ratio < 0.2,
        format!("n = 1, ε = 1e-4, areas 3π..15π: ν̂ = {:.3} (1 ± 25%), max Ω_c/FWHM {ratio:.3}", fit.exponent),
    ))
}

fn truncation_tail() -> Result<(bool, String), Error> {
    let spec = PulseSpec::new(lor(1.0), 1.0, 8.0, 0.02)?;
    let c = spec.edge_rabi();
    let env = truncation_residual_slope(&spec, 1e-6, (10.0 * c, 100.0 * c), &SweepOptions::default())?;
    let self_ref = matches!(
        truncation_residual_slope(&spec, 0.02, (10.0 * c, 100.0 * c), &serial()),
        Err(Error::Inconclusive(_))
    );
    Ok((
        (env.slope + 2.0).abs() <= 0.2 && self_ref,
        format!("excess envelope slope {:.3} (-2 ± 0.2), self-reference inconclusive {self_ref}", env.slope),
    ))
}

fn csv_round_trip() -> Result<(bool, String), Error> {
    let mut t = Table::new(&["omega0_MHz", "delta_MHz", "p"]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        t.push_values(&[rng.random_range(0.0..50.0), rng.random_range(-35.0..35.0), rng.random_range(0.0..1.0)]);
    }
    let ok = table_to_csv(&t).and_then(|s| table_from_csv(&s)).map(|back| back == t.rounded()).unwrap_or(false);
    Ok((ok, "100-row landscape table survives write and read at 9 significant digits".into()))
}

const CHECKS: [Check; 15] = [
    ("unit boundary", unit_boundary),
    ("envelope invariants", shape_invariants),
    ("hardware sample count", hardware_samples),
    ("rectangular oracle", rectangular_oracle),
    ("Rosen-Zener oracle", sech_oracle),
    ("unitarity, symmetry, area theorem", unitarity_symmetry_area),
    ("adiabatic invariants", adiabatic_invariants),
    ("worker determinism", determinism),
    ("width subsampling", subsampling),
    ("sech width constant", sech_constant_width),
    ("rectangular power broadening", rectangular_broadening),
    ("Lorentzian scaling", lorentzian_scaling),
    ("truncation tail", truncation_tail),
    ("CSV round trip", csv_round_trip),
    ("JSON round trip", json_round_trip),
];

fn json_round_trip() -> Result<(bool, String), Error> {
    let spec = PulseSpec::new(lor(0.75), 10.67, 0.3, 0.005)?;
    let text = serde_json::to_string(&spec).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let back: PulseSpec = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((back == spec, "pulse spec survives JSON".into()))
}

pub fn run(_config: &RunConfig) -> Result<(), CliError> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        Err(CliError::Failed(failed))
    } else {
        println!("all {} checks passed", CHECKS.len());
        Ok(())
    }
}
