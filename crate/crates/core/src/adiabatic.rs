//! Adiabatic-evolution diagnostics.
//!
//! Away from resonance the post-pulse excitation is suppressed wherever the
//! eigenvalue splitting `ε(t) = √(Ω² + Δ²)` dominates the nonadiabatic
//! coupling `ϑ̇(t)`, with mixing angle `ϑ = ½ arctan(Ω/Δ)`. The detuning at
//! which the two balance at the worst time `t_m` sets the scale of the line
//! width; for envelopes with `|t|^(-λ)` tails that scale falls with the drive
//! as `Ω₀^(-1/(λ-1))`.
//!
//! Only exponents and unscaled border detunings are exposed here. The
//! proportionality between border detuning and measured width is not known
//! in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::pulse::PulseSpec;

/// Where and how strongly adiabaticity is violated at the border detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticDiagnostics {
    /// Peak nonadiabaticity time, within `[0, t_c]`.
    pub t_m: f64,
    pub theta_dot_max: f64,
    pub epsilon_at_tm: f64,
    pub border_detuning: f64,
}

/// `√(Ω² + Δ²)`.
pub fn eigensplitting(rabi: f64, detuning: f64) -> f64 {
    rabi.hypot(detuning)
}

/// `ϑ̇(t) = Ω̇ Δ / (2 (Ω² + Δ²))`.
pub fn mixing_angle_rate(spec: &PulseSpec, detuning: f64, t: f64) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    ensure_finite("t", t)?;
    if detuning == 0.0 {
        return Err(Error::Singular("mixing angle is undefined on resonance".into()));
    }
    if t.abs() > spec.half_span() {
        return Err(invalid(format!("t = {t} lies outside the pulse support")));
    }
    let rabi = spec.rabi(t);
    let rate = spec.rabi_derivative(t)?;
    Ok(rate * detuning / (2.0 * (rabi * rabi + detuning * detuning)))
}

fn abs_rate(spec: &PulseSpec, detuning: f64, t: f64) -> f64 {
    let rabi = spec.peak_rabi() * spec.shape().eval(spec.width(), t);
    let rate = spec.peak_rabi() * spec.shape().eval_derivative(spec.width(), t);
    (rate * detuning / (2.0 * (rabi * rabi + detuning * detuning))).abs()
}

fn scan_grid(width: f64, half: f64) -> Vec<f64> {
    const LINEAR: usize = 2000;
    const GEOMETRIC: usize = 1000;
    let knee = half.min(10.0 * width);
    let mut grid: Vec<f64> = (0..=LINEAR).map(|i| knee * i as f64 / LINEAR as f64).collect();
    if half > knee {
        let ratio = (half / knee).ln();
        grid.extend((1..=GEOMETRIC).map(|i| knee * (ratio * i as f64 / GEOMETRIC as f64).exp()));
        *grid.last_mut().expect("non-empty") = half;
    }
    grid
}

/// Time in `[0, t_c]` where `|ϑ̇|` peaks; `t_c` if the edge wins.
pub fn nonadiabatic_peak_time(spec: &PulseSpec, detuning: f64) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    if detuning == 0.0 {
        return Err(Error::Singular("mixing angle is undefined on resonance".into()));
    }
    if !(spec.peak_rabi() > 0.0) {
        return Err(invalid("peak Rabi frequency must be > 0"));
    }
    // Surfaces UnsupportedShape for the rectangle.
    spec.rabi_derivative(0.0)?;
    Ok(peak_time(spec, detuning))
}

fn peak_time(spec: &PulseSpec, detuning: f64) -> f64 {
    let half = spec.half_span();
    let grid = scan_grid(spec.width(), half);
    let values: Vec<f64> = grid.iter().map(|&t| abs_rate(spec, detuning, t)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    if best == grid.len() - 1 {
        return half;
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[best + 1];
    golden_max(|t| abs_rate(spec, detuning, t), lo, hi, 1e-7 * spec.width())
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Relative residual `(ε - 2|ϑ̇|)/ε` at `t_m(Δ)`: positive where the
/// evolution is adiabatic. Also returns `|Ω̇(t_m)|`.
fn border_residual(spec: &PulseSpec, detuning: f64) -> (f64, f64) {
    let t_m = peak_time(spec, detuning);
    let rabi = spec.peak_rabi() * spec.shape().eval(spec.width(), t_m);
    let rate = (spec.peak_rabi() * spec.shape().eval_derivative(spec.width(), t_m)).abs();
    let split2 = rabi * rabi + detuning * detuning;
    let lhs = split2.sqrt();
    let rhs = detuning * rate / split2;
    ((lhs - rhs) / lhs, rate)
}

/// Border detuning `Δ_b > 0` where `ε(t_m) = 2|ϑ̇(t_m)|`.
///
/// The detuning axis `[1e-6, 1e3]/T` is scanned from the top for the first
/// loss of adiabaticity, then the crossing is bisected in `log Δ`. Returns 0
/// when the condition holds across the whole axis.
pub fn border_detuning(spec: &PulseSpec) -> Result<f64> {
    if !(spec.peak_rabi() > 0.0) {
        return Err(invalid("peak Rabi frequency must be > 0"));
    }
    spec.rabi_derivative(0.0)?;
    const POINTS: usize = 361;
    let lo = (1e-6 / spec.width()).ln();
    let hi = (1e3 / spec.width()).ln();
    let at = |i: usize| (hi - (hi - lo) * i as f64 / (POINTS - 1) as f64).exp();

    let (top, _) = border_residual(spec, at(0));
    if top < 0.0 {
        let (bottom, _) = border_residual(spec, at(POINTS - 1));
        return Err(Error::NoRoot {
            lo_residual: bottom,
            hi_residual: top,
        });
    }
    let mut saw_coupling = false;
    for i in 1..POINTS {
        let (r, rate) = border_residual(spec, at(i));
        saw_coupling |= rate > 0.0;
        if r < 0.0 {
            let (mut above, mut below) = (at(i - 1).ln(), at(i).ln());
            while (above - below).abs() > 1e-9 {
                let mid = 0.5 * (above + below);
                if border_residual(spec, mid.exp()).0 < 0.0 {
                    below = mid;
                } else {
                    above = mid;
                }
            }
            return Ok((0.5 * (above + below)).exp());
        }
    }
    if !saw_coupling {
        let (bottom, _) = border_residual(spec, at(POINTS - 1));
        return Err(Error::NoRoot {
            lo_residual: bottom,
            hi_residual: top,
        });
    }
    Ok(0.0)
}

/// Border detuning together with the quantities that define it.
pub fn diagnostics(spec: &PulseSpec) -> Result<AdiabaticDiagnostics> {
    let border = border_detuning(spec)?;
    if border == 0.0 {
        return Ok(AdiabaticDiagnostics {
            t_m: 0.0,
            theta_dot_max: 0.0,
            epsilon_at_tm: spec.peak_rabi(),
            border_detuning: 0.0,
        });
    }
    let t_m = peak_time(spec, border);
    Ok(AdiabaticDiagnostics {
        t_m,
        theta_dot_max: abs_rate(spec, border, t_m),
        epsilon_at_tm: eigensplitting(spec.rabi(t_m), border),
        border_detuning: border,
    })
}

/// Power-law exponent `ν = 1/(2n - 1)` of the width of `[1+(t/T)²]^(-n)`.
pub fn predicted_exponent(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 0.5) {
        return Err(invalid(format!("Lorentzian power must be > 1/2, got {n}")));
    }
    Ok(1.0 / (2.0 * n - 1.0))
}

/// Excitation added by cutting the wings at `Ω_c`, oscillations neglected:
/// `Ω_c² / (Ω_c² + Δ²) · (1 - p_ideal)`.
pub fn truncation_artifact(edge_rabi: f64, detuning: f64, p_ideal: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_ideal) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p_ideal}")));
    }
    let c2 = edge_rabi * edge_rabi;
    let total = c2 + detuning * detuning;
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(c2 / total * (1.0 - p_ideal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::ShapeFamily;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lor(n: f64, width: f64, rabi: f64, eps: f64) -> PulseSpec {
        PulseSpec::new(ShapeFamily::lorentzian(n).unwrap(), width, rabi, eps).unwrap()
    }

    /// Brute-force argmax of |ϑ̇| on a dense uniform grid.
    fn brute_peak(spec: &PulseSpec, detuning: f64, points: usize) -> f64 {
        let half = spec.half_span();
        (0..=points)
            .map(|i| half * i as f64 / points as f64)
            .map(|t| (t, mixing_angle_rate(spec, detuning, t).unwrap().abs()))
            .fold((0.0, -1.0), |b, c| if c.1 > b.1 { c } else { b })
            .0
    }

    #[test]
    fn splitting() {
        assert_eq!(eigensplitting(3.0, 4.0), 5.0);
        assert_eq!(eigensplitting(0.0, -2.5), 2.5);
        assert_eq!(eigensplitting(1.5, 0.0), 1.5);
    }

    #[test]
    fn mixing_rate_values() {
        let spec = lor(1.0, 1.0, 1.0, 0.01);
        assert_eq!(mixing_angle_rate(&spec, 1.0, 0.0).unwrap(), 0.0);
        let zero = lor(1.0, 1.0, 0.0, 0.01);
        assert_eq!(mixing_angle_rate(&zero, 1.0, 1.0).unwrap(), 0.0);
        let v = mixing_angle_rate(&spec, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, -0.2, max_relative = 1e-14);
        // Finite difference of ½ arctan(Ω/Δ).
        let theta = |t: f64| 0.5 * (spec.rabi(t) / 1.0).atan();
        let h = 1e-6;
        assert_relative_eq!(v, (theta(1.0 + h) - theta(1.0 - h)) / (2.0 * h), max_relative = 1e-7);
        assert!(matches!(mixing_angle_rate(&spec, 0.0, 1.0), Err(Error::Singular(_))));
        assert!(mixing_angle_rate(&spec, 1.0, 100.0).is_err());
    }

    #[test]
    fn peak_time_gaussian_far_detuned() {
        let spec = PulseSpec::new(ShapeFamily::Gaussian, 2.0, 1e-3, 1e-6).unwrap();
        let t = nonadiabatic_peak_time(&spec, 50.0).unwrap();
        assert!((t - brute_peak(&spec, 50.0, 200_000)).abs() < 1e-3);
        assert!((t - 2.0).abs() < 1e-5, "{t}");
    }

    #[test]
    fn peak_time_lorentzian_weak() {
        let spec = lor(1.0, 3.0, 1e-3, 1e-4);
        let t = nonadiabatic_peak_time(&spec, 10.0).unwrap();
        assert!((t - 3.0 / 3f64.sqrt()).abs() < 1e-5, "{t}");
        let brute = brute_peak(&spec, 10.0, 2_000_000);
        assert!((t - brute).abs() < 2e-3);
    }

    #[test]
    fn peak_time_clamps_to_edge() {
        // Cut at 90% of the peak: t_c < T/√3, so the edge wins.
        let spec = lor(1.0, 1.0, 1e-3, 0.9);
        assert_eq!(nonadiabatic_peak_time(&spec, 5.0).unwrap(), spec.half_span());
    }

    #[test]
    fn border_residual_vanishes() {
        for &rabi in &[5.0, 20.0] {
            let spec = lor(1.0, 1.0, rabi, 1e-5);
            let border = border_detuning(&spec).unwrap();
            assert!(border > 0.0);
            let (r, _) = border_residual(&spec, border);
            assert!(r.abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn border_halves_when_drive_doubles() {
        let b1 = border_detuning(&lor(1.0, 1.0, 20.0, 1e-6)).unwrap();
        let b2 = border_detuning(&lor(1.0, 1.0, 40.0, 1e-6)).unwrap();
        let ratio = b1 / b2;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn border_scales_inverse_square_for_three_quarters() {
        let rabis = [20.0, 40.0, 80.0, 160.0, 200.0];
        let pts: Vec<(f64, f64)> = rabis
            .iter()
            .map(|&r| (r, border_detuning(&lor(0.75, 1.0, r, 1e-9)).unwrap()))
            .collect();
        let slope = (pts[4].1 / pts[0].1).ln() / (pts[4].0 / pts[0].0).ln();
        assert!((slope + 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn border_grows_as_sqrt_for_weak_drive() {
        // Weak drive: t_m sits at the |Ω̇| maximum and Δ_b² ≈ Ω₀ max|f'|.
        let width = 1.0;
        let max_slope = 2.0 * (1.0 / 3f64.sqrt()) / (4.0f64 / 3.0).powi(2);
        for &rabi in &[1e-4, 1e-3] {
            let b = border_detuning(&lor(1.0, width, rabi, 1e-3)).unwrap();
            assert_relative_eq!(b, (rabi * max_slope).sqrt(), max_relative = 0.02);
        }
    }

    #[test]
    fn rectangle_is_unsupported() {
        let spec = PulseSpec::new(ShapeFamily::Rectangular, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(border_detuning(&spec), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn diagnostics_are_consistent() {
        let spec = lor(1.0, 1.0, 10.0, 1e-5);
        let d = diagnostics(&spec).unwrap();
        assert!(d.t_m > 0.0 && d.t_m <= spec.half_span());
        assert_relative_eq!(d.epsilon_at_tm, 2.0 * d.theta_dot_max, max_relative = 1e-6);
    }

    #[test]
    fn exponents() {
        assert_relative_eq!(predicted_exponent(2.0).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(predicted_exponent(1.5).unwrap(), 0.5);
        assert_relative_eq!(predicted_exponent(1.0).unwrap(), 1.0);
        assert_relative_eq!(predicted_exponent(0.75).unwrap(), 2.0);
        assert_relative_eq!(predicted_exponent(2.0 / 3.0).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(predicted_exponent(0.6).unwrap(), 5.0, max_relative = 1e-14);
        assert!(predicted_exponent(0.5).is_err());
    }

    #[test]
    fn artifact_values() {
        assert_eq!(truncation_artifact(0.3, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(truncation_artifact(0.4, 0.4, 0.0).unwrap(), 0.5);
        assert!(truncation_artifact(0.4, 0.4, 1.5).is_err());
        // Ω_c²/Δ² law: log-log slope −2 far from the line.
        let a = truncation_artifact(1e-3, 1.0, 0.0).unwrap();
        let b = truncation_artifact(1e-3, 10.0, 0.0).unwrap();
        assert!(((b / a).log10() + 2.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn splitting_bounds(o in -10.0f64..10.0, d in -10.0f64..10.0) {
            let e = eigensplitting(o, d);
            prop_assert!(e >= o.abs().max(d.abs()));
            prop_assert!(e <= o.abs() + d.abs() + 1e-15);
        }

        #[test]
        fn rate_is_odd_and_bounded(rabi in 0.01f64..20.0, d in 0.01f64..5.0, x in 0.0f64..5.0) {
            let spec = lor(1.3, 1.0, rabi, 1e-3);
            let t = x.min(spec.half_span());
            let plus = mixing_angle_rate(&spec, d, t).unwrap();
            let minus = mixing_angle_rate(&spec, d, -t).unwrap();
            prop_assert_eq!(plus, -minus);
            let bound = spec.rabi_derivative(t).unwrap().abs() / (2.0 * d);
            prop_assert!(plus.abs() <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn artifact_decreases_off_resonance(c in 1e-3f64..1.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, p in 0.0f64..1.0) {
            let (near, far) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(truncation_artifact(c, far, p).unwrap() <= truncation_artifact(c, near, p).unwrap());
        }
    }
}
