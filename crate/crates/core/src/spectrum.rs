//! Homodyne noise spectrum of the light leaving the ring.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::dynamics::{locate_events, phase_phi, simulate, IntegratorOptions, SqueezeEvents, Trajectory};
use crate::error::{SimError, SpectrumError};
use crate::params::{derive_run, ring_pump_photons, DimensionlessRun, Knobs, PhysicalConfig};
use crate::pump::PumpEnvelope;

/// Above this `|Omega T_R|` the single-mode spectrum is flagged as unreliable.
pub const VALIDITY_LIMIT: f64 = PI / 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumValue {
    pub value: f64,
    /// `|Omega T_R|` is not small compared to pi.
    pub outside_validity: bool,
}

/// Noise spectrum at dimensionless sideband frequency `omega` (radians per
/// round trip) for local-oscillator phase `beta`, using the ring state at the
/// squeezing maximum. Vacuum noise is 1.
pub fn s_of_omega(run: &DimensionlessRun, events: &SqueezeEvents, omega: f64, beta: f64) -> SpectrumValue {
    let half = 0.5 * run.gamma_sl;
    let lorentz = half * half / (half * half + omega * omega);
    let (r, n) = (events.r_at_t_m, events.n_th_at_t_m);
    let phi = phase_phi(run, events.t_m);
    let width = n + 0.5;
    let braces = width * (2.0 * r).cosh() - 0.5 - width * (2.0 * r).sinh() * (phi - 2.0 * beta).cos();
    SpectrumValue {
        value: 1.0 + run.escape_s * lorentz * 2.0 * braces,
        outside_validity: omega.abs() > VALIDITY_LIMIT,
    }
}

/// Local-oscillator phase that picks out the squeezed quadrature.
pub fn squeezing_phase(run: &DimensionlessRun, events: &SqueezeEvents) -> f64 {
    0.5 * phase_phi(run, events.t_m)
}

/// Zero-frequency noise floor: `1 + (1 - f_s)(dx2_min - 1)`.
pub fn min_noise_floor(f_s: f64, dx2_min: f64) -> Result<f64, SpectrumError> {
    if !(0.0..1.0).contains(&f_s) {
        return Err(SpectrumError::Domain { what: "f_s", value: f_s });
    }
    if !(dx2_min >= 0.0 && dx2_min <= 1.0) {
        return Err(SpectrumError::Domain { what: "dx2_min", value: dx2_min });
    }
    Ok(1.0 + (1.0 - f_s) * (dx2_min - 1.0))
}

/// Conservative zero-frequency antisqueezing estimate. The extra factor
/// accounts for antisqueezed light that keeps building between the squeezing
/// and antisqueezing maxima.
pub fn max_noise_ceiling(f_s: f64, gamma_sl: f64, t_m: f64, t_a: f64, dy2_max: f64) -> Result<f64, SpectrumError> {
    if !(0.0..1.0).contains(&f_s) {
        return Err(SpectrumError::Domain { what: "f_s", value: f_s });
    }
    if !(t_a >= t_m) {
        return Err(SpectrumError::Domain { what: "t_A - t_m", value: t_a - t_m });
    }
    if !(dy2_max >= 1.0) {
        return Err(SpectrumError::Domain { what: "dy2_max", value: dy2_max });
    }
    Ok(1.0 + (1.0 - f_s) * (1.0 + 0.5 * gamma_sl * (t_a - t_m)) * (dy2_max - 1.0))
}

pub fn to_db(s_linear: f64) -> Result<f64, SpectrumError> {
    if !(s_linear > 0.0) || !s_linear.is_finite() {
        return Err(SpectrumError::Domain { what: "linear noise level", value: s_linear });
    }
    Ok(10.0 * s_linear.log10())
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub omega: f64,
    pub squeezed: f64,
    pub antisqueezed: f64,
    pub outside_validity: bool,
}

/// Spectrum at the squeezing phase and the orthogonal one.
pub fn sample_spectrum(run: &DimensionlessRun, events: &SqueezeEvents, omegas: &[f64]) -> Vec<SpectrumSample> {
    let beta = squeezing_phase(run, events);
    omegas
        .iter()
        .map(|&omega| {
            let sq = s_of_omega(run, events, omega, beta);
            let anti = s_of_omega(run, events, omega, beta + FRAC_PI_2);
            SpectrumSample { omega, squeezed: sq.value, antisqueezed: anti.value, outside_validity: sq.outside_validity }
        })
        .collect()
}

/// Headline numbers for one knob setting. `squeezing_db` is positive when
/// the noise is below vacuum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezeSummary {
    pub knobs: Knobs,
    /// `None` when the pump is off and nothing happens.
    pub events: Option<SqueezeEvents>,
    pub s_min0: f64,
    pub s_max0: f64,
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub n_generated_total: f64,
    pub peak_g: f64,
    pub t_peak_g: f64,
    /// Intracavity pump photons at the envelope maximum.
    pub peak_pump_photons: f64,
}

impl SqueezeSummary {
    fn vacuum(knobs: Knobs) -> Self {
        Self {
            knobs,
            events: None,
            s_min0: 1.0,
            s_max0: 1.0,
            squeezing_db: 0.0,
            antisqueezing_db: 0.0,
            n_generated_total: 0.0,
            peak_g: 0.0,
            t_peak_g: 0.0,
            peak_pump_photons: 0.0,
        }
    }
}

/// Reduces a trajectory to its summary.
pub fn summarize(cfg: &PhysicalConfig, traj: &Trajectory) -> Result<SqueezeSummary, SimError> {
    let run = &traj.run;
    if run.g0() == 0.0 {
        return Ok(SqueezeSummary::vacuum(run.knobs));
    }
    let events = locate_events(traj)?;
    let s_min0 = min_noise_floor(run.f_s(), events.dx2_min)?;
    let s_max0 = max_noise_ceiling(run.f_s(), run.gamma_sl, events.t_m, events.t_a, events.dy2_max)?;
    let (t_peak_g, peak_g) = PumpEnvelope::new(run).peak();
    Ok(SqueezeSummary {
        knobs: run.knobs,
        events: Some(events),
        s_min0,
        s_max0,
        squeezing_db: -to_db(s_min0)?,
        antisqueezing_db: to_db(s_max0)?,
        n_generated_total: traj.n_generated_total,
        peak_g,
        t_peak_g,
        peak_pump_photons: ring_pump_photons(cfg, run, peak_g),
    })
}

/// Full pipeline for one knob setting.
pub fn evaluate(
    cfg: &PhysicalConfig,
    knobs: Knobs,
    opts: &IntegratorOptions,
) -> Result<(Trajectory, SqueezeSummary), SimError> {
    let run = derive_run(cfg, knobs)?;
    let traj = simulate(&run, opts)?;
    let summary = summarize(cfg, &traj)?;
    Ok((traj, summary))
}

/// Summary only; what sweeps call.
pub fn evaluate_summary(cfg: &PhysicalConfig, knobs: Knobs, opts: &IntegratorOptions) -> Result<SqueezeSummary, SimError> {
    evaluate(cfg, knobs, opts).map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(r: f64, n: f64, t_m: f64) -> SqueezeEvents {
        SqueezeEvents { t_m, dx2_min: (2.0 * n + 1.0) * (-2.0 * r).exp(), t_a: t_m, dy2_max: 1.0, r_at_t_m: r, n_th_at_t_m: n }
    }

    fn run(f_s: f64) -> DimensionlessRun {
        derive_run(&PhysicalConfig::default(), Knobs::new(1.0, 3.0, f_s, 0.03)).unwrap()
    }

    #[test]
    fn vacuum_spectrum_is_flat() {
        let r = run(0.045);
        let ev = state(0.0, 0.0, 1.3);
        for omega in [0.0, 0.01, -0.2, 3.0] {
            for beta in [0.0, 0.7, 2.0] {
                assert_eq!(s_of_omega(&r, &ev, omega, beta).value, 1.0);
            }
        }
    }

    #[test]
    fn lorentzian_rolloff() {
        let r = run(0.045);
        let ev = state(1.2, 0.1, 2.0);
        let s = s_of_omega(&r, &ev, 1e6, 0.3);
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(s.outside_validity);
        assert!(!s_of_omega(&r, &ev, 0.01, 0.3).outside_validity);
    }

    #[test]
    fn squeezing_phase_gives_noise_floor() {
        for (f_s, rr, n, t_m) in [(0.03, 1.1, 0.05, 3.56), (0.045, 0.6, 0.2, 11.0), (0.3, 2.0, 0.01, -0.7)] {
            let r = run(f_s);
            let ev = state(rr, n, t_m);
            let beta = squeezing_phase(&r, &ev);
            let s = s_of_omega(&r, &ev, 0.0, beta).value;
            let floor = min_noise_floor(f_s, ev.dx2_min).unwrap();
            assert!((s - floor).abs() < 1e-9 * floor.max(1.0), "{s} vs {floor}");
            let anti = s_of_omega(&r, &ev, 0.0, beta + FRAC_PI_2).value;
            let dy2 = (2.0 * n + 1.0) * (2.0 * rr).exp();
            assert!((anti - (1.0 + (1.0 - f_s) * (dy2 - 1.0))).abs() < 1e-9 * anti);
        }
    }

    #[test]
    fn noise_floor_limits() {
        assert!((min_noise_floor(0.5, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((-to_db(0.5).unwrap() - 3.0103).abs() < 1e-4);
        assert_eq!(min_noise_floor(0.0, 0.37).unwrap(), 0.37);
        assert_eq!(min_noise_floor(0.2, 1.0).unwrap(), 1.0);
        assert!(min_noise_floor(1.0, 0.5).is_err());
        assert!(min_noise_floor(0.1, 1.5).is_err());
    }

    #[test]
    fn ceiling_cases() {
        assert_eq!(max_noise_ceiling(0.03, 0.04, 1.0, 9.0, 1.0).unwrap(), 1.0);
        let same_time = max_noise_ceiling(0.03, 0.04, 2.0, 2.0, 50.0).unwrap();
        assert!((same_time - (1.0 + 0.97 * 49.0)).abs() < 1e-12);
        assert!(matches!(max_noise_ceiling(0.03, 0.04, 5.0, 4.0, 50.0), Err(SpectrumError::Domain { .. })));
    }

    #[test]
    fn db_conversions() {
        assert!((to_db(0.1).unwrap() + 10.0).abs() < 1e-12);
        assert_eq!(to_db(1.0).unwrap(), 0.0);
        assert!((to_db(10f64.powf(2.19)).unwrap() - 21.9).abs() < 1e-12);
        assert!((from_db(21.9) - 154.88).abs() < 0.01);
        assert!(to_db(0.0).is_err());
        assert!(to_db(-1.0).is_err());
    }

    #[test]
    fn no_pump_summary_is_exact_vacuum() {
        let (_, s) = evaluate(&PhysicalConfig::default(), Knobs::new(0.0, 2.0, 0.05, 0.02), &IntegratorOptions::default())
            .unwrap();
        assert_eq!(s.squeezing_db, 0.0);
        assert_eq!(s.antisqueezing_db, 0.0);
        assert!(s.events.is_none());
    }
}
