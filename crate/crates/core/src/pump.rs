//! In-ring pump envelope `g(t)`.
//!
//! The working model is the closed-form convolution of the Gaussian input
//! pulse with the ring's exponential response. [`g_exact_oracle`] evaluates
//! the full round-trip-comb response in the frequency domain and serves as the
//! reference the closed form is checked against.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::OracleError;
use crate::params::DimensionlessRun;
use crate::special::erfcx;

/// A parametric gain profile `g(t)` driving the signal mode.
pub trait Drive: Sync {
    fn g(&self, t: f64) -> f64;

    /// Times where `g` is discontinuous; the integrator stops on them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Analytic in-ring pump gain for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpEnvelope {
    prefactor: f64,
    /// `1 - sigma_p l_p`
    decay: f64,
    tau: f64,
    /// `y(0) = (1 - sigma_p l_p) tau / sqrt(8 ln2)`
    y0: f64,
    /// `sqrt(8 ln2) / (2 tau)`, so that `y(t) = y0 - slope t`
    slope: f64,
}

impl PumpEnvelope {
    pub fn new(run: &DimensionlessRun) -> Self {
        let tau = run.tau_p();
        let decay = run.pump_amplitude_decay();
        let k = (8.0 * LN_2).sqrt();
        let coupling = (1.0 - run.sigma_p * run.sigma_p).max(0.0) * run.loss_p * run.loss_p;
        let prefactor = run.g0() * (PI * tau * coupling).sqrt() / (run.gamma_sl * k);
        Self { prefactor, decay, tau, y0: decay * tau / k, slope: k / (2.0 * tau) }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Argument of the complementary error function.
    pub fn y(&self, t: f64) -> f64 {
        self.y0 - self.slope * t
    }

    /// `P erfcx(y) exp(-2 ln2 t^2/tau^2)`.
    ///
    /// For `y < 0` the product `exp(y^2 - 2 ln2 t^2/tau^2)` is formed from its
    /// exponent `y0 (y0 - 2 slope t)`, which stays finite in the pulse tail.
    pub fn g_of_t(&self, t: f64) -> f64 {
        if self.prefactor == 0.0 {
            return 0.0;
        }
        let y = self.y(t);
        let gauss = (-self.slope * self.slope * t * t).exp();
        let shape = if y >= 0.0 {
            erfcx(y) * gauss
        } else {
            2.0 * (self.y0 * (self.y0 - 2.0 * self.slope * t)).exp() - erfcx(-y) * gauss
        };
        self.prefactor * shape.max(0.0)
    }

    /// Time and value of the envelope maximum.
    pub fn peak(&self) -> (f64, f64) {
        let tail = if self.decay > 0.0 { 3.0 / self.decay } else { 10.0 * self.tau };
        let (lo, hi) = (-2.0 * self.tau, 4.0 * self.tau + tail.min(1e4));
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut best = (lo, self.g_of_t(lo));
        for i in 1..=n {
            let t = lo + h * i as f64;
            let v = self.g_of_t(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        // golden-section polish inside the bracketing cell pair
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        for _ in 0..80 {
            if self.g_of_t(c) > self.g_of_t(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - phi * (b - a);
            d = a + phi * (b - a);
        }
        let t = 0.5 * (a + b);
        (t, self.g_of_t(t))
    }

    /// First time after the peak at which `g` falls below `level`.
    pub fn falls_below_after_peak(&self, level: f64) -> Option<f64> {
        let (t_peak, g_peak) = self.peak();
        if g_peak < level {
            return None;
        }
        let mut step = self.tau.min(1.0);
        let mut lo = t_peak;
        let mut hi = t_peak + step;
        while self.g_of_t(hi) >= level {
            lo = hi;
            step *= 1.5;
            hi += step;
            if hi - t_peak > 1e7 {
                return None;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.g_of_t(mid) >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

impl Drive for PumpEnvelope {
    fn g(&self, t: f64) -> f64 {
        self.g_of_t(t)
    }
}

/// A time-independent gain; used to probe fixed points of the dynamics.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDrive(pub f64);

impl Drive for ConstantDrive {
    fn g(&self, _t: f64) -> f64 {
        self.0
    }
}

/// Wraps a drive and switches it off for `t > cutoff`.
#[derive(Debug, Clone, Copy)]
pub struct CutoffDrive<D> {
    pub inner: D,
    pub cutoff: f64,
}

impl<D: Drive> Drive for CutoffDrive<D> {
    fn g(&self, t: f64) -> f64 {
        if t > self.cutoff {
            0.0
        } else {
            self.inner.g(t)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.inner.breakpoints();
        out.push(self.cutoff);
        out
    }
}

/// How the comb-resolved oracle field is presented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleView {
    /// Modulus of the full inverse transform; pulses recirculate once per
    /// round trip, so for short pulses this is a comb.
    Raw,
    /// Averaged over one round trip and advanced by half a round trip, which
    /// is the envelope the single ring mode responds to and the quantity the
    /// continuum closed form approximates.
    RoundTripAveraged,
}

/// Finest grid spacing accepted by the oracle, in round trips.
pub const ORACLE_MAX_SPACING: f64 = 0.125;
const ORACLE_MAX_POINTS: usize = 1 << 24;

/// Exact in-ring gain from the spectral ring response
/// `sqrt(1 - sigma^2) l e^{i w}/(1 - sigma l e^{i w})` applied to the Gaussian
/// input, inverse transformed onto `grid` (uniform, spacing <= 1/8).
pub fn g_exact_oracle(
    run: &DimensionlessRun,
    grid: &[f64],
    view: OracleView,
) -> Result<Vec<f64>, OracleError> {
    let n_grid = grid.len();
    if n_grid < 2 {
        return Err(OracleError::BadGrid);
    }
    let dt = (grid[n_grid - 1] - grid[0]) / (n_grid - 1) as f64;
    if !(dt > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(OracleError::BadGrid);
    }
    if dt > ORACLE_MAX_SPACING * (1.0 + 1e-12) {
        return Err(OracleError::Aliasing { spacing: dt, max: ORACLE_MAX_SPACING });
    }
    let tau = run.tau_p();
    let need_start = -6.0 * tau;
    let need_end = 6.0 * tau + 10.0 / run.gamma_pl;
    if grid[0] > need_start + 1e-12 || grid[n_grid - 1] < need_end - 1e-12 {
        return Err(OracleError::WindowTooShort {
            start: grid[0],
            end: grid[n_grid - 1],
            need_start,
            need_end,
        });
    }

    // Padding so the recirculating tail decays below 1e-15 before wrapping.
    let amplitude_decay = run.gamma_pl / 2.0;
    let pad = 35.0 / amplitude_decay + 6.0 * tau;
    let needed = ((grid[n_grid - 1] - grid[0] + pad) / dt).ceil() as usize + 1;
    let n = needed.next_power_of_two();
    if n > ORACLE_MAX_POINTS {
        return Err(OracleError::TooLarge { points: n, limit: ORACLE_MAX_POINTS });
    }

    let t0 = grid[0];
    let c = 2.0 * LN_2 / (tau * tau);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = t0 + dt * k as f64;
            Complex64::new((-c * t * t).exp(), 0.0)
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let rho = run.sigma_loss_p;
    for (j, x) in buf.iter_mut().enumerate() {
        let freq = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        let w = 2.0 * PI * freq / (n as f64 * dt);
        // delay by one round trip is e^{-i w} with the forward-FFT sign
        let delay = Complex64::from_polar(1.0, -w);
        let mut h = delay / (Complex64::new(1.0, 0.0) - rho * delay);
        if view == OracleView::RoundTripAveraged {
            let half = 0.5 * w;
            let sinc = if half.abs() < 1e-12 { 1.0 } else { half.sin() / half };
            h *= Complex64::from_polar(sinc, half);
        }
        *x *= h;
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let coupling = (1.0 - run.sigma_p * run.sigma_p).max(0.0).sqrt() * run.loss_p;
    let norm = run.g0() * coupling / (run.gamma_sl * tau.sqrt()) / n as f64;
    Ok(buf[..n_grid].iter().map(|z| z.norm() * norm).collect())
}

/// Uniform grid covering the oracle's required window.
pub fn oracle_grid(run: &DimensionlessRun, spacing: f64) -> Vec<f64> {
    let tau = run.tau_p();
    let start = -6.0 * tau - 1.0;
    let end = 6.0 * tau + 10.0 / run.gamma_pl + 1.0;
    let n = ((end - start) / spacing).ceil() as usize + 1;
    (0..n).map(|k| start + spacing * k as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PumpComparison {
    pub finesse: f64,
    /// `max |g_analytic - g_oracle| / max g_oracle` against the round-trip
    /// averaged oracle.
    pub max_rel_deviation: f64,
    /// Oracle peak over analytic peak, round-trip averaged oracle.
    pub peak_ratio: f64,
    /// Oracle peak over analytic peak, raw comb.
    pub peak_ratio_raw: f64,
    pub grid: Vec<f64>,
    pub analytic: Vec<f64>,
    pub oracle_raw: Vec<f64>,
    pub oracle_averaged: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub enum PumpValidation {
    Compared(PumpComparison),
    /// Pump is effectively uncoupled from the channel; in-ring fields vanish.
    Degenerate { coupling: f64 },
}

/// Compares the analytic envelope with the exact oracle for one run.
pub fn compare_with_oracle(run: &DimensionlessRun, spacing: f64) -> Result<PumpValidation, OracleError> {
    let coupling = (1.0 - run.sigma_p * run.sigma_p).max(0.0).sqrt();
    if coupling < 1e-6 {
        return Ok(PumpValidation::Degenerate { coupling });
    }
    let grid = oracle_grid(run, spacing);
    let oracle_raw = g_exact_oracle(run, &grid, OracleView::Raw)?;
    let oracle_averaged = g_exact_oracle(run, &grid, OracleView::RoundTripAveraged)?;
    let env = PumpEnvelope::new(run);
    let analytic: Vec<f64> = grid.iter().map(|&t| env.g_of_t(t)).collect();

    let max_of = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
    let peak_avg = max_of(&oracle_averaged);
    let peak_raw = max_of(&oracle_raw);
    let peak_analytic = max_of(&analytic);
    let max_dev = analytic
        .iter()
        .zip(&oracle_averaged)
        .map(|(a, o)| (a - o).abs())
        .fold(0.0_f64, f64::max);

    Ok(PumpValidation::Compared(PumpComparison {
        finesse: run.pump_finesse(),
        max_rel_deviation: max_dev / peak_avg,
        peak_ratio: peak_avg / peak_analytic,
        peak_ratio_raw: peak_raw / peak_analytic,
        grid,
        analytic,
        oracle_raw,
        oracle_averaged,
    }))
}
