//! Adaptive Dormand–Prince 5(4) integrator with continuous output.

use crate::error::IntegrationError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step allowed; keeps narrow drive features from being stepped over.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    coef: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coef;
        std::array::from_fn(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
    }
}

/// Accepted steps of one integration, each carrying its interpolant.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    segments: Vec<Segment<N>>,
    t_start: f64,
    y_start: [f64; N],
    pub rejected_steps: usize,
}

impl<const N: usize> Solution<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(self.t_start, |s| s.t0 + s.h)
    }

    pub fn accepted_steps(&self) -> usize {
        self.segments.len()
    }

    /// Step boundaries, starting with the initial time.
    pub fn step_times(&self) -> Vec<f64> {
        std::iter::once(self.t_start).chain(self.segments.iter().map(|s| s.t0 + s.h)).collect()
    }

    /// State at `t`, clamped to the integrated interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.segments.is_empty() || t <= self.t_start {
            return self.y_start;
        }
        let idx = self.segments.partition_point(|s| s.t0 + s.h < t);
        match self.segments.get(idx) {
            Some(seg) => seg.eval(t),
            None => {
                let last = self.segments.last().unwrap();
                last.eval(last.t0 + last.h)
            }
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, restarting at every
/// breakpoint strictly inside the interval.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    breakpoints: &[f64],
    ctl: &StepControl,
) -> Result<Solution<N>, IntegrationError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(IntegrationError::Window(format!("need finite t0 < t_end, got [{t0}, {t_end}]")));
    }
    if !all_finite(&y0) {
        return Err(IntegrationError::NonFinite { t: t0 });
    }
    let mut stops: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > t0 && b < t_end).collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();
    stops.push(t_end);

    let mut sol = Solution { segments: Vec::new(), t_start: t0, y_start: y0, rejected_steps: 0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = initial_step(&f, t0, &y0, ctl).min(ctl.h_max).min(t_end - t0);
    let mut steps = 0usize;

    for (leg, &stop) in stops.iter().enumerate() {
        // after a breakpoint the drive takes its right-hand value
        let mut k1 = if leg == 0 { f(t, &y) } else { f(t.next_up(), &y) };
        if !all_finite(&k1) {
            return Err(IntegrationError::NonFinite { t });
        }
        let mut last_was_nonfinite = false;
        while t < stop {
            if steps >= ctl.max_steps {
                return Err(IntegrationError::MaxStepsExceeded { t, steps });
            }
            let remaining = stop - t;
            let mut hs = h.min(ctl.h_max);
            let lands = hs >= remaining * (1.0 - 1e-12);
            if lands {
                hs = remaining;
            }
            if hs < 1e-14 * t.abs().max(1.0) && !lands {
                return Err(if last_was_nonfinite {
                    IntegrationError::NonFinite { t }
                } else {
                    IntegrationError::StepSizeUnderflow { t, h: hs }
                });
            }
            steps += 1;

            let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + hs, &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t1 = if lands { stop } else { t + hs };
            let k7 = f(t1, &y1);

            let mut err = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = ctl.atol + ctl.rtol * y[i].abs().max(y1[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if !err.is_finite() || !all_finite(&y1) || !all_finite(&k7) {
                last_was_nonfinite = true;
                sol.rejected_steps += 1;
                h = hs * 0.2;
                continue;
            }
            last_was_nonfinite = false;

            if err <= 1.0 {
                let diff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - diff[i]);
                let c3: [f64; N] = std::array::from_fn(|i| diff[i] - hs * k7[i] - bspl[i]);
                let c4: [f64; N] = std::array::from_fn(|i| {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                });
                sol.segments.push(Segment { t0: t, h: t1 - t, coef: [y, diff, bspl, c3, c4] });
                t = t1;
                y = y1;
                k1 = k7;
            } else {
                sol.rejected_steps += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let factor = if err > 1.0 { factor.min(1.0) } else { factor };
            // keep the proposed step when the landing step was artificially short
            h = if lands && err <= 1.0 { h.max(hs * factor) } else { hs * factor };
        }
    }
    Ok(sol)
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], ctl: &StepControl) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let f0 = f(t0, y0);
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = ctl.atol + ctl.rtol * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.max(1e-10)
}
