//! Squeezed-thermal-state evolution of the signal mode.
//!
//! The state is carried as squeeze magnitude `r` and thermal occupation
//! `n_th`; the phase is slaved to the pump so only these two evolve. The
//! quadrature variances are integrated a second time from their own linear
//! equations so the two routes can be checked against each other.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{EventError, IntegrationError};
use crate::ode::{integrate as integrate_ode, Solution, StepControl};
use crate::params::DimensionlessRun;
use crate::pump::{Drive, PumpEnvelope};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Overrides the default start `-max(5 tau, 3 tau + 10)`.
    pub t_start: Option<f64>,
    /// Overrides the end time found by the coarse pre-pass.
    pub t_end: Option<f64>,
    /// Spacing of the stored samples; defaults to `min(tau, 1)/20`.
    pub output_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, t_start: None, t_end: None, output_step: None, max_steps: 5_000_000 }
    }
}

/// Sampled evolution of the signal mode.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub run: DimensionlessRun,
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub r: Vec<f64>,
    pub n_th: Vec<f64>,
    /// `(2 n_th + 1) e^{-2r}`
    pub dx2: Vec<f64>,
    /// `(2 n_th + 1) e^{2r}`
    pub dy2: Vec<f64>,
    /// Squeezed variance from its own linear equation.
    pub dx2_ode: Vec<f64>,
    /// Antisqueezed variance from its own linear equation.
    pub dy2_ode: Vec<f64>,
    /// Intracavity signal photons `<a^dag a>`.
    pub n_sig: Vec<f64>,
    /// Photons in the ring at the end plus all photons that leaked out.
    pub n_generated_total: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeEvents {
    /// Time of minimum `dx2`.
    pub t_m: f64,
    pub dx2_min: f64,
    /// Time of maximum `dy2`.
    pub t_a: f64,
    pub dy2_max: f64,
    /// `r` and `n_th` interpolated to `t_m`.
    pub r_at_t_m: f64,
    pub n_th_at_t_m: f64,
}

/// Default start time, early enough that the pump is negligible.
pub fn default_start(tau_p: f64) -> f64 {
    -(5.0 * tau_p).max(3.0 * tau_p + 10.0)
}

/// Largest integrator step; resolves the pulse rise.
fn max_step(tau_p: f64) -> f64 {
    tau_p.min(2.0) / 8.0
}

const STATE: usize = 5;

fn rhs(gamma: f64, g: f64, y: &[f64; STATE]) -> [f64; STATE] {
    let [r, n, x, yy, _] = *y;
    let (sh, ch) = (r.sinh(), r.cosh());
    let two_n1 = 2.0 * n + 1.0;
    [
        gamma * (0.5 * g - sh * ch / two_n1),
        gamma * (sh * sh - n),
        gamma * (1.0 - (1.0 + g) * x),
        gamma * (1.0 - (1.0 - g) * yy),
        gamma * ((n + 0.5) * (2.0 * r).cosh() - 0.5),
    ]
}

fn solve(
    run: &DimensionlessRun,
    drive: &dyn Drive,
    t0: f64,
    t_end: f64,
    ctl: &StepControl,
) -> Result<Solution<STATE>, IntegrationError> {
    let gamma = run.gamma_sl;
    integrate_ode(
        |t, y| rhs(gamma, drive.g(t), y),
        t0,
        [0.0, 0.0, 1.0, 1.0, 0.0],
        t_end,
        &drive.breakpoints(),
        ctl,
    )
}

/// Coarse run used only to place the end of the main window past the
/// antisqueezing maximum.
fn estimate_t_a(run: &DimensionlessRun, drive: &dyn Drive, t0: f64, ctl: &StepControl) -> Result<f64, IntegrationError> {
    let tau = run.tau_p();
    let decay = run.pump_amplitude_decay().max(1e-6);
    let mut t_end = 6.0 * tau + (3.0 / decay).min(1e4) + 10.0 / run.gamma_sl;
    let coarse = StepControl { rtol: 1e-7, atol: 1e-9, ..*ctl };
    let samples = 4000;
    for _ in 0..12 {
        let sol = solve(run, drive, t0, t_end, &coarse)?;
        let h = (t_end - t0) / samples as f64;
        let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
        for i in 0..=samples {
            let [r, n, ..] = sol.eval(t0 + h * i as f64);
            let dy2 = (2.0 * n + 1.0) * (2.0 * r).exp();
            if dy2 > best {
                best = dy2;
                best_i = i;
            }
        }
        if best - 1.0 < 1e-12 {
            return Ok(0.0);
        }
        if best_i < samples * 4 / 5 {
            return Ok(t0 + h * best_i as f64);
        }
        t_end = t0 + 2.0 * (t_end - t0);
    }
    Ok(t_end)
}

/// Integrates the signal-mode equations under the analytic pump.
pub fn simulate(run: &DimensionlessRun, opts: &IntegratorOptions) -> Result<Trajectory, IntegrationError> {
    integrate(run, &PumpEnvelope::new(run), opts)
}

/// Integrates the signal-mode equations from the vacuum under `drive`.
pub fn integrate(run: &DimensionlessRun, drive: &dyn Drive, opts: &IntegratorOptions) -> Result<Trajectory, IntegrationError> {
    let tau = run.tau_p();
    let t0 = opts.t_start.unwrap_or_else(|| default_start(tau));
    if t0 > -5.0 * tau {
        return Err(IntegrationError::Window(format!(
            "start {t0} must be at or before -5 tau_p = {}",
            -5.0 * tau
        )));
    }
    let ctl = StepControl { rtol: opts.rel_tol, atol: opts.abs_tol, h_max: max_step(tau), max_steps: opts.max_steps };
    let t_end = match opts.t_end {
        Some(t) => t,
        None => estimate_t_a(run, drive, t0, &ctl)? + 8.0 / run.gamma_sl,
    };
    let sol = solve(run, drive, t0, t_end, &ctl)?;

    let dt = opts.output_step.unwrap_or(tau.min(1.0) / 20.0);
    if !(dt > 0.0) {
        return Err(IntegrationError::Window(format!("output step must be positive, got {dt}")));
    }
    let n_out = ((t_end - t0) / dt).floor() as usize;
    let mut times: Vec<f64> = (0..=n_out).map(|i| t0 + dt * i as f64).collect();
    if t_end - times[n_out] > 1e-9 * dt {
        times.push(t_end);
    }

    let mut traj = Trajectory {
        run: *run,
        t: Vec::with_capacity(times.len()),
        g: Vec::with_capacity(times.len()),
        r: Vec::with_capacity(times.len()),
        n_th: Vec::with_capacity(times.len()),
        dx2: Vec::with_capacity(times.len()),
        dy2: Vec::with_capacity(times.len()),
        dx2_ode: Vec::with_capacity(times.len()),
        dy2_ode: Vec::with_capacity(times.len()),
        n_sig: Vec::with_capacity(times.len()),
        n_generated_total: 0.0,
        accepted_steps: sol.accepted_steps(),
        rejected_steps: sol.rejected_steps,
    };
    for &t in &times {
        let [r, n, x, y, _] = sol.eval(t);
        let width = 2.0 * n + 1.0;
        traj.t.push(t);
        traj.g.push(drive.g(t));
        traj.r.push(r);
        traj.n_th.push(n);
        traj.dx2.push(width * (-2.0 * r).exp());
        traj.dy2.push(width * (2.0 * r).exp());
        traj.dx2_ode.push(x);
        traj.dy2_ode.push(y);
        traj.n_sig.push(signal_photons(r, n));
    }
    let [r, n, _, _, leaked] = sol.eval(t_end);
    traj.n_generated_total = signal_photons(r, n) + leaked;
    Ok(traj)
}

/// `<a^dag a> = (n_th + 1/2) cosh 2r - 1/2`.
pub fn signal_photons(r: f64, n_th: f64) -> f64 {
    (n_th + 0.5) * (2.0 * r).cosh() - 0.5
}

/// Squeezing-ellipse phase locked to the pump.
pub fn phase_phi(run: &DimensionlessRun, t: f64) -> f64 {
    -2.0 * run.omega_s * t + run.knobs.theta + FRAC_PI_2
}

/// Pair amplitude `<a a> = -(n_th + 1/2) e^{i phi} sinh 2r` in the lab frame.
pub fn pair_amplitude(run: &DimensionlessRun, t: f64, r: f64, n_th: f64) -> Complex64 {
    -(n_th + 0.5) * (2.0 * r).sinh() * Complex64::from_polar(1.0, phase_phi(run, t))
}

/// Vertex of the parabola through three samples, or the middle sample when
/// they are collinear.
fn parabola_vertex(t: [f64; 3], v: [f64; 3]) -> (f64, f64) {
    let (d0, d1) = (t[1] - t[0], t[2] - t[1]);
    let s0 = (v[1] - v[0]) / d0;
    let s1 = (v[2] - v[1]) / d1;
    let curvature = (s1 - s0) / (t[2] - t[0]);
    if curvature == 0.0 {
        return (t[1], v[1]);
    }
    // derivative at the midpoint of the first interval plus curvature slope
    let tv = 0.5 * (t[0] + t[1]) - s0 / (2.0 * curvature);
    let vv = v[1] + (s0 + curvature * (t[1] - t[0])) * (tv - t[1]) + curvature * (tv - t[1]).powi(2);
    (tv, vv)
}

fn interp(t: &[f64], v: &[f64], at: f64) -> f64 {
    let i = t.partition_point(|&x| x < at).clamp(1, t.len() - 1);
    let w = (at - t[i - 1]) / (t[i] - t[i - 1]);
    v[i - 1] + w * (v[i] - v[i - 1])
}

/// Finds the squeezing minimum and antisqueezing maximum on sampled series.
pub fn locate_events_in(t: &[f64], dx2: &[f64], dy2: &[f64]) -> Result<(f64, f64, f64, f64), EventError> {
    let n = t.len();
    if n < 3 || dx2.len() != n || dy2.len() != n {
        return Err(EventError::TooShort);
    }
    let argmin = (0..n).fold(0, |best, i| if dx2[i] < dx2[best] { i } else { best });
    if argmin == 0 || argmin == n - 1 {
        return Err(EventError::AtBoundary { which: "squeezing", t: t[argmin] });
    }
    let argmax = (0..n).fold(0, |best, i| if dy2[i] > dy2[best] { i } else { best });
    if argmax == 0 || argmax == n - 1 {
        return Err(EventError::AtBoundary { which: "antisqueezing", t: t[argmax] });
    }
    let tail = n - (n / 10).max(2);
    if dy2[tail..].windows(2).any(|w| w[1] > w[0]) {
        return Err(EventError::StillRising);
    }
    let (t_m, dx2_min) = parabola_vertex(
        [t[argmin - 1], t[argmin], t[argmin + 1]],
        [dx2[argmin - 1], dx2[argmin], dx2[argmin + 1]],
    );
    let (t_a, dy2_max) = parabola_vertex(
        [t[argmax - 1], t[argmax], t[argmax + 1]],
        [dy2[argmax - 1], dy2[argmax], dy2[argmax + 1]],
    );
    Ok((t_m, dx2_min.min(dx2[argmin]), t_a, dy2_max.max(dy2[argmax])))
}

pub fn locate_events(traj: &Trajectory) -> Result<SqueezeEvents, EventError> {
    let (t_m, dx2_min, t_a, dy2_max) = locate_events_in(&traj.t, &traj.dx2, &traj.dy2)?;
    Ok(SqueezeEvents {
        t_m,
        dx2_min,
        t_a,
        dy2_max,
        r_at_t_m: interp(&traj.t, &traj.r, t_m),
        n_th_at_t_m: interp(&traj.t, &traj.n_th, t_m),
    })
}
