//! Parameter grids and the constrained antisqueezing minimization.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::IntegratorOptions;
use crate::error::SweepError;
use crate::params::{Knobs, PhysicalConfig};
use crate::spectrum::{evaluate_summary, SqueezeSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnobName {
    G0,
    TauP,
    FS,
    FP,
}

impl KnobName {
    pub fn as_str(self) -> &'static str {
        match self {
            KnobName::G0 => "g0",
            KnobName::TauP => "tau_p",
            KnobName::FS => "f_s",
            KnobName::FP => "f_p",
        }
    }

    pub fn get(self, k: &Knobs) -> f64 {
        match self {
            KnobName::G0 => k.g0,
            KnobName::TauP => k.tau_p,
            KnobName::FS => k.f_s,
            KnobName::FP => k.f_p,
        }
    }

    pub fn set(self, k: &mut Knobs, v: f64) {
        match self {
            KnobName::G0 => k.g0 = v,
            KnobName::TauP => k.tau_p = v,
            KnobName::FS => k.f_s = v,
            KnobName::FP => k.f_p = v,
        }
    }

    fn admits(self, v: f64) -> bool {
        match self {
            KnobName::G0 => v >= 0.0 && v.is_finite(),
            KnobName::TauP => v > 0.0 && v.is_finite(),
            KnobName::FS | KnobName::FP => v > 0.0 && v < 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub knob: KnobName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + span * i as f64 / (self.count - 1) as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Values of the knobs that are not swept; the axis knobs are overwritten.
    pub fixed: Knobs,
    #[serde(default)]
    pub target_squeezing_db: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axis1.knob == self.axis2.knob {
            return Err(SweepError::Invalid(format!("both axes sweep {}", self.axis1.knob.as_str())));
        }
        for axis in [&self.axis1, &self.axis2] {
            let name = axis.knob.as_str();
            if axis.count < 2 {
                return Err(SweepError::Invalid(format!("axis {name} needs at least 2 points")));
            }
            if !(axis.min <= axis.max) {
                return Err(SweepError::Invalid(format!("axis {name} has min > max")));
            }
            if !axis.knob.admits(axis.min) || !axis.knob.admits(axis.max) {
                return Err(SweepError::Invalid(format!("axis {name} range [{}, {}] leaves its domain", axis.min, axis.max)));
            }
            if self.target_squeezing_db.is_some() {
                let floor = match axis.knob {
                    KnobName::TauP => 1.0,
                    KnobName::FP => 0.01,
                    _ => f64::NEG_INFINITY,
                };
                if axis.min < floor {
                    return Err(SweepError::Invalid(format!("constrained sweep requires {name} >= {floor}")));
                }
            }
        }
        for knob in [KnobName::G0, KnobName::TauP, KnobName::FS, KnobName::FP] {
            if knob != self.axis1.knob && knob != self.axis2.knob && !knob.admits(knob.get(&self.fixed)) {
                return Err(SweepError::Invalid(format!("fixed {} = {} leaves its domain", knob.as_str(), knob.get(&self.fixed))));
            }
        }
        Ok(())
    }

    pub fn knobs_at(&self, i: usize, j: usize, v1: &[f64], v2: &[f64]) -> Knobs {
        let mut k = self.fixed;
        self.axis1.knob.set(&mut k, v1[i]);
        self.axis2.knob.set(&mut k, v2[j]);
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Ok(SqueezeSummary),
    Failed { knobs: Knobs, error: String },
}

impl Cell {
    pub fn summary(&self) -> Option<&SqueezeSummary> {
        match self {
            Cell::Ok(s) => Some(s),
            Cell::Failed { .. } => None,
        }
    }
}

/// Integrator settings that enter the results, recorded with every grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorRecord {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub output_step: Option<f64>,
}

impl From<&IntegratorOptions> for IntegratorRecord {
    fn from(o: &IntegratorOptions) -> Self {
        Self { rel_tol: o.rel_tol, abs_tol: o.abs_tol, t_start: o.t_start, t_end: o.t_end, output_step: o.output_step }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub axis1_values: Vec<f64>,
    pub axis2_values: Vec<f64>,
    /// Row-major: `cells[i * axis2.count + j]` is `(axis1[i], axis2[j])`.
    pub cells: Vec<Cell>,
    pub config_hash: String,
    pub integrator: IntegratorRecord,
}

impl SweepGrid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.axis2_values.len() + j]
    }

    /// Matrix of one summary field, NaN where the cell failed.
    pub fn matrix(&self, field: impl Fn(&SqueezeSummary) -> f64) -> Vec<Vec<f64>> {
        let n2 = self.axis2_values.len();
        self.cells
            .chunks(n2)
            .map(|row| row.iter().map(|c| c.summary().map_or(f64::NAN, &field)).collect())
            .collect()
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, Cell::Failed { .. })).count()
    }
}

/// SHA-256 over the JSON encoding of everything that determines a result.
pub fn config_hash<T: Serialize + ?Sized>(parts: &T) -> String {
    let bytes = serde_json::to_vec(parts).expect("plain data always serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn run_sweep(spec: &SweepSpec, cfg: &PhysicalConfig, opts: &IntegratorOptions) -> Result<SweepGrid, SweepError> {
    spec.validate()?;
    cfg.validate()?;
    let v1 = spec.axis1.values();
    let v2 = spec.axis2.values();
    let n2 = v2.len();
    let cells: Vec<Cell> = (0..v1.len() * n2)
        .into_par_iter()
        .map(|idx| {
            let knobs = spec.knobs_at(idx / n2, idx % n2, &v1, &v2);
            match evaluate_summary(cfg, knobs, opts) {
                Ok(s) => Cell::Ok(s),
                Err(e) => {
                    log::warn!("sweep cell {knobs:?} failed: {e}");
                    Cell::Failed { knobs, error: e.to_string() }
                }
            }
        })
        .collect();
    let integrator = IntegratorRecord::from(opts);
    Ok(SweepGrid {
        spec: *spec,
        axis1_values: v1,
        axis2_values: v2,
        cells,
        config_hash: config_hash(&(cfg, spec, &integrator)),
        integrator,
    })
}

/// Search box for the constrained optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBounds {
    pub g0: (f64, f64),
    pub tau_p: (f64, f64),
    pub f_s: (f64, f64),
    pub f_p: (f64, f64),
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self { g0: (0.1, 3.0), tau_p: (1.0, 16.0), f_s: (0.01, 0.5), f_p: (0.01, 0.1) }
    }
}

/// Lattice spacing of the search in each knob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub g0: f64,
    pub tau_p: f64,
    pub f_s: f64,
    pub f_p: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { g0: 0.01, tau_p: 0.05, f_s: 0.005, f_p: 0.0025 }
    }
}

impl Resolution {
    pub fn halved(&self) -> Self {
        Self { g0: self.g0 / 2.0, tau_p: self.tau_p / 2.0, f_s: self.f_s / 2.0, f_p: self.f_p / 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub target_db: f64,
    #[serde(default)]
    pub bounds: SearchBounds,
    #[serde(default)]
    pub resolution: Resolution,
    /// Points per knob on the coarse starting grid.
    #[serde(default = "default_coarse_points")]
    pub coarse_points: usize,
}

fn default_coarse_points() -> usize {
    6
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { target_db: 10.0, bounds: SearchBounds::default(), resolution: Resolution::default(), coarse_points: 6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    /// False when no knob set in the box reaches the target; the knobs then
    /// give the best squeezing found.
    pub feasible: bool,
    pub target_db: f64,
    pub knobs: Knobs,
    pub summary: SqueezeSummary,
    pub evaluations: usize,
}

/// Lattice point `(tau index, f_s index, f_p index)`.
type Site = (i64, i64, i64);

#[derive(Debug, Clone)]
struct SiteResult {
    /// Smallest lattice `g0` reaching the target, with its summary.
    feasible: Option<(f64, SqueezeSummary)>,
    /// Summary at the largest `g0`, used when nothing is feasible.
    strongest: Option<SqueezeSummary>,
    evaluations: usize,
}

struct Lattice {
    settings: OptimizerSettings,
    base_theta: f64,
    sizes: (i64, i64, i64),
}

fn axis_size(range: (f64, f64), step: f64) -> i64 {
    ((range.1 - range.0) / step + 1e-9).floor() as i64 + 1
}

impl Lattice {
    fn new(settings: OptimizerSettings, base_theta: f64) -> Self {
        let b = settings.bounds;
        let r = settings.resolution;
        Self {
            settings,
            base_theta,
            sizes: (axis_size(b.tau_p, r.tau_p), axis_size(b.f_s, r.f_s), axis_size(b.f_p, r.f_p)),
        }
    }

    fn contains(&self, s: Site) -> bool {
        s.0 >= 0 && s.1 >= 0 && s.2 >= 0 && s.0 < self.sizes.0 && s.1 < self.sizes.1 && s.2 < self.sizes.2
    }

    fn knobs(&self, s: Site, g0: f64) -> Knobs {
        let b = self.settings.bounds;
        let r = self.settings.resolution;
        Knobs {
            g0,
            tau_p: b.tau_p.0 + r.tau_p * s.0 as f64,
            f_s: b.f_s.0 + r.f_s * s.1 as f64,
            f_p: b.f_p.0 + r.f_p * s.2 as f64,
            theta: self.base_theta,
        }
    }

    /// Bisects for the pump strength at which squeezing first reaches the
    /// target, assuming squeezing grows with pump strength. The threshold is
    /// resolved well below the lattice spacing so the ranking stays smooth.
    fn evaluate(&self, cfg: &PhysicalConfig, opts: &IntegratorOptions, s: Site) -> SiteResult {
        let target = self.settings.target_db;
        let (g_lo, g_hi) = self.settings.bounds.g0;
        let mut evaluations = 0;
        let mut eval = |g0: f64| {
            evaluations += 1;
            evaluate_summary(cfg, self.knobs(s, g0), opts).ok()
        };
        let reaches = |x: &Option<SqueezeSummary>| x.as_ref().is_some_and(|x| x.squeezing_db >= target);
        let strongest = eval(g_hi);
        if !reaches(&strongest) {
            return SiteResult { feasible: None, strongest, evaluations };
        }
        let low = eval(g_lo);
        if reaches(&low) {
            return SiteResult { feasible: Some((g_lo, low.unwrap())), strongest, evaluations };
        }
        let (mut lo, mut hi, mut best) = (g_lo, g_hi, strongest.clone().unwrap());
        let resolve = self.settings.resolution.g0 / 64.0;
        while hi - lo > resolve {
            let mid = 0.5 * (lo + hi);
            let m = eval(mid);
            if reaches(&m) {
                hi = mid;
                best = m.unwrap();
            } else {
                lo = mid;
            }
        }
        SiteResult { feasible: Some((hi, best)), strongest, evaluations }
    }

    /// Rounds a threshold pump strength up onto the lattice and returns the
    /// summary there, stepping further up if rounding lands short.
    fn on_lattice(&self, cfg: &PhysicalConfig, opts: &IntegratorOptions, s: Site, g0: f64) -> Option<SqueezeSummary> {
        let (g_lo, g_hi) = self.settings.bounds.g0;
        let step = self.settings.resolution.g0;
        let mut k = ((g0 - g_lo) / step - 1e-9).ceil().max(0.0) as i64;
        loop {
            let g = (g_lo + step * k as f64).min(g_hi);
            let summary = evaluate_summary(cfg, self.knobs(s, g), opts).ok()?;
            if summary.squeezing_db >= self.settings.target_db || g >= g_hi {
                return Some(summary);
            }
            k += 1;
        }
    }
}

/// Ordering key: lower antisqueezing first, then weaker pump, then shorter
/// pulse; infeasible sites rank by how much squeezing they reach.
fn rank(r: &SiteResult) -> (u8, f64, f64, f64) {
    match &r.feasible {
        Some((g0, s)) => (0, s.antisqueezing_db, *g0, s.knobs.tau_p),
        None => (1, -r.strongest.as_ref().map_or(f64::NEG_INFINITY, |s| s.squeezing_db), 0.0, 0.0),
    }
}

fn better(a: &SiteResult, b: &SiteResult) -> bool {
    rank(a).partial_cmp(&rank(b)) == Some(std::cmp::Ordering::Less)
}

/// Minimizes antisqueezing subject to reaching `target_db` of squeezing.
///
/// A coarse lattice grid seeds a compass search over `(tau_p, f_s, f_p)`
/// whose step halves down to one lattice unit; at each site the pump
/// strength is the smallest lattice value meeting the target.
pub fn constrained_optimum(
    cfg: &PhysicalConfig,
    settings: &OptimizerSettings,
    base_theta: f64,
    opts: &IntegratorOptions,
) -> Result<Optimum, SweepError> {
    cfg.validate()?;
    let b = settings.bounds;
    for (name, (lo, hi)) in [("g0", b.g0), ("tau_p", b.tau_p), ("f_s", b.f_s), ("f_p", b.f_p)] {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(SweepError::Invalid(format!("bounds for {name} must satisfy lo <= hi")));
        }
    }
    if b.tau_p.0 <= 0.0 || b.f_s.0 <= 0.0 || b.f_s.1 >= 1.0 || b.f_p.0 <= 0.0 || b.f_p.1 >= 1.0 || b.g0.0 < 0.0 {
        return Err(SweepError::Invalid("bounds leave the knob domains".into()));
    }
    let res = settings.resolution;
    if !(res.g0 > 0.0 && res.tau_p > 0.0 && res.f_s > 0.0 && res.f_p > 0.0) {
        return Err(SweepError::Invalid("resolutions must be positive".into()));
    }
    let lattice = Lattice::new(*settings, base_theta);
    let mut cache: HashMap<Site, SiteResult> = HashMap::new();
    let evaluate_sites = |sites: Vec<Site>, cache: &mut HashMap<Site, SiteResult>| {
        let mut todo: Vec<Site> = sites.into_iter().filter(|s| lattice.contains(*s) && !cache.contains_key(s)).collect();
        todo.sort();
        todo.dedup();
        let results: Vec<(Site, SiteResult)> =
            todo.into_par_iter().map(|s| (s, lattice.evaluate(cfg, opts, s))).collect();
        cache.extend(results);
    };

    let spread = |size: i64| -> Vec<i64> {
        let n = settings.coarse_points.max(1) as i64;
        let mut v: Vec<i64> = (0..n).map(|i| if n == 1 { 0 } else { i * (size - 1) / (n - 1) }).collect();
        v.dedup();
        v
    };
    let mut coarse = Vec::new();
    for &a in &spread(lattice.sizes.0) {
        for &c in &spread(lattice.sizes.1) {
            for &d in &spread(lattice.sizes.2) {
                coarse.push((a, c, d));
            }
        }
    }
    evaluate_sites(coarse.clone(), &mut cache);
    let mut best = *coarse
        .iter()
        .reduce(|x, y| if better(&cache[y], &cache[x]) { y } else { x })
        .expect("coarse grid is never empty");

    let max_size = lattice.sizes.0.max(lattice.sizes.1).max(lattice.sizes.2);
    let mut step = 1i64;
    while step * 2 < max_size / (settings.coarse_points.max(2) as i64 - 1).max(1) {
        step *= 2;
    }
    loop {
        let neighbours: Vec<Site> = [
            (step, 0, 0),
            (-step, 0, 0),
            (0, step, 0),
            (0, -step, 0),
            (0, 0, step),
            (0, 0, -step),
        ]
        .iter()
        .map(|d| (best.0 + d.0, best.1 + d.1, best.2 + d.2))
        .filter(|s| lattice.contains(*s))
        .collect();
        evaluate_sites(neighbours.clone(), &mut cache);
        let candidate = neighbours
            .iter()
            .copied()
            .reduce(|x, y| if better(&cache[&y], &cache[&x]) { y } else { x });
        match candidate {
            Some(c) if better(&cache[&c], &cache[&best]) => best = c,
            _ if step > 1 => step /= 2,
            _ => break,
        }
    }

    let evaluations = cache.values().map(|r| r.evaluations).sum();
    let chosen = &cache[&best];
    let (feasible, summary) = match &chosen.feasible {
        Some((g0, s)) => (true, lattice.on_lattice(cfg, opts, best, *g0).unwrap_or_else(|| s.clone())),
        None => match &chosen.strongest {
            Some(s) => (false, s.clone()),
            None => return Err(SweepError::Invalid("every evaluation in the search box failed".into())),
        },
    };
    Ok(Optimum { feasible, target_db: settings.target_db, knobs: summary.knobs, summary, evaluations })
}

/// Smallest lattice `g0` (spacing `step`) in `[lo, hi]` reaching `target_db`,
/// with the other knobs held at `base`.
pub fn min_g0_for_target(
    cfg: &PhysicalConfig,
    base: Knobs,
    target_db: f64,
    (lo, hi): (f64, f64),
    step: f64,
    opts: &IntegratorOptions,
) -> Option<SqueezeSummary> {
    let settings = OptimizerSettings {
        target_db,
        bounds: SearchBounds { g0: (lo, hi), tau_p: (base.tau_p, base.tau_p), f_s: (base.f_s, base.f_s), f_p: (base.f_p, base.f_p) },
        resolution: Resolution { g0: step, ..Resolution::default() },
        coarse_points: 1,
    };
    let lattice = Lattice::new(settings, base.theta);
    let (g0, _) = lattice.evaluate(cfg, opts, (0, 0, 0)).feasible?;
    lattice.on_lattice(cfg, opts, (0, 0, 0), g0)
}
