//! End-to-end checks that cross module boundaries: pump model against its
//! oracle, dynamics under modified drives, sweeps and the optimizer.

use ringsqz::dynamics::{integrate, locate_events, simulate, IntegratorOptions};
use ringsqz::export::write_contour_csv;
use ringsqz::figures::{figure, Figure};
use ringsqz::params::f_p_for_finesse;
use ringsqz::pump::{compare_with_oracle, CutoffDrive, PumpValidation};
use ringsqz::spectrum::{evaluate, s_of_omega, squeezing_phase};
use ringsqz::sweep::{constrained_optimum, run_sweep, Axis, KnobName, OptimizerSettings, SearchBounds, SweepGrid, SweepSpec};
use ringsqz::{derive_run, Knobs, PhysicalConfig, PumpEnvelope};

fn family_knobs(id: &str) -> Vec<Knobs> {
    match figure(id, 2).unwrap() {
        Figure::Family { vary, values, base } => values
            .iter()
            .map(|&v| {
                let mut k = base;
                vary.set(&mut k, v);
                k
            })
            .collect(),
        Figure::Contour { .. } => unreachable!("{id} is a family"),
    }
}

#[test]
fn oracle_deviation_shrinks_as_pump_finesse_grows() {
    let cfg = PhysicalConfig::default();
    for tau in [2.0, 5.0] {
        let mut previous = f64::INFINITY;
        for finesse in [20.0, 50.0, 100.0, 300.0] {
            let knobs = Knobs::new(1.0, tau, 0.05, f_p_for_finesse(&cfg, finesse));
            let run = derive_run(&cfg, knobs).unwrap();
            assert!((run.pump_finesse() - finesse).abs() < 1e-9 * finesse);
            let PumpValidation::Compared(cmp) = compare_with_oracle(&run, 0.0625).unwrap() else {
                panic!("coupled pump reported as degenerate");
            };
            assert!(cmp.max_rel_deviation < 0.1, "tau {tau} finesse {finesse}: {}", cmp.max_rel_deviation);
            assert!(cmp.max_rel_deviation < previous, "tau {tau} finesse {finesse}");
            previous = cmp.max_rel_deviation;
        }
    }
}

#[test]
fn switching_pump_off_at_best_squeezing_only_raises_dx2() {
    let cfg = PhysicalConfig::default();
    for knobs in family_knobs("fig2").into_iter().step_by(2) {
        let run = derive_run(&cfg, knobs).unwrap();
        let base = simulate(&run, &IntegratorOptions::default()).unwrap();
        let t_m = locate_events(&base).unwrap().t_m;
        let opts = IntegratorOptions {
            t_start: Some(base.t[0]),
            t_end: Some(*base.t.last().unwrap()),
            ..IntegratorOptions::default()
        };
        let cut = integrate(&run, &CutoffDrive { inner: PumpEnvelope::new(&run), cutoff: t_m }, &opts).unwrap();
        assert_eq!(cut.t, base.t);
        let mut after = 0;
        for k in 0..base.t.len() {
            if base.t[k] > t_m {
                after += 1;
                assert!(cut.dx2[k] >= base.dx2[k] - 1e-9, "tau {} t {}: {} < {}", knobs.tau_p, base.t[k], cut.dx2[k], base.dx2[k]);
            } else {
                assert!((cut.dx2[k] - base.dx2[k]).abs() < 1e-9);
            }
        }
        assert!(after > 100);
    }
}

#[test]
fn headline_numbers_converge_with_tolerance() {
    let cfg = PhysicalConfig::default();
    for knobs in [Knobs::new(1.7, 1.0, 0.03, 0.01), Knobs::new(0.7, 9.0, 0.05, 0.03)] {
        let loose = IntegratorOptions { rel_tol: 1e-8, abs_tol: 1e-10, ..IntegratorOptions::default() };
        let tight = IntegratorOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..IntegratorOptions::default() };
        let (_, a) = evaluate(&cfg, knobs, &loose).unwrap();
        let (_, b) = evaluate(&cfg, knobs, &tight).unwrap();
        let (ea, eb) = (a.events.unwrap(), b.events.unwrap());
        assert!((ea.dx2_min - eb.dx2_min).abs() < 1e-6, "{} vs {}", ea.dx2_min, eb.dx2_min);
        assert!((a.squeezing_db - b.squeezing_db).abs() < 1e-4);
        assert!((a.antisqueezing_db - b.antisqueezing_db).abs() < 1e-4);
    }
}

#[test]
fn antisqueezing_peaks_after_squeezing() {
    let cfg = PhysicalConfig::default();
    for knobs in family_knobs("fig2").into_iter().chain(family_knobs("fig3")) {
        let (_, s) = evaluate(&cfg, knobs, &IntegratorOptions::default()).unwrap();
        let ev = s.events.unwrap();
        assert!(ev.t_a > ev.t_m, "{knobs:?}: t_A {} t_m {}", ev.t_a, ev.t_m);
    }
}

#[test]
fn zero_frequency_spectrum_at_squeezing_phase_is_the_floor() {
    let cfg = PhysicalConfig::default();
    for knobs in [Knobs::new(1.7, 1.0, 0.03, 0.01), Knobs::new(1.0, 5.0, 0.045, 0.03), Knobs::new(0.7, 3.0, 0.2, 0.05)] {
        let (traj, s) = evaluate(&cfg, knobs, &IntegratorOptions::default()).unwrap();
        let ev = s.events.unwrap();
        let beta = squeezing_phase(&traj.run, &ev);
        let at_zero = s_of_omega(&traj.run, &ev, 0.0, beta).value;
        // the floor uses the refined dx2 minimum, the spectrum rebuilds it from
        // (r, n) interpolated between output samples
        assert!((at_zero - s.s_min0).abs() < 1e-4 * s.s_min0, "{knobs:?}: {at_zero} vs {}", s.s_min0);
        for omega in [0.01, 0.05, 0.2] {
            let v = s_of_omega(&traj.run, &ev, omega, beta).value;
            assert!(v > at_zero && v < 1.0);
        }
    }
}

fn small_fig4_spec() -> SweepSpec {
    let Some(Figure::Contour { mut spec, .. }) = figure("fig4", 5) else { panic!() };
    spec.axis2.max = 6.0;
    spec
}

fn contour_bytes(grid: &SweepGrid) -> Vec<u8> {
    let mut out = Vec::new();
    let m = grid.matrix(|s| s.squeezing_db);
    write_contour_csv(&mut out, grid, &m, &[("config_hash", grid.config_hash.clone())]).unwrap();
    out
}

#[test]
fn sweeps_are_reproducible_to_the_byte() {
    let cfg = PhysicalConfig::default();
    let spec = small_fig4_spec();
    let a = run_sweep(&spec, &cfg, &IntegratorOptions::default()).unwrap();
    let b = run_sweep(&spec, &cfg, &IntegratorOptions::default()).unwrap();
    assert_eq!(a.failed_cells(), 0);
    assert_eq!(a.config_hash, b.config_hash);
    assert_eq!(contour_bytes(&a), contour_bytes(&b));

    let mut other = spec;
    other.fixed.g0 = 0.8;
    let c = run_sweep(&other, &cfg, &IntegratorOptions::default()).unwrap();
    assert_ne!(a.config_hash, c.config_hash);
}

#[test]
fn sweep_cells_match_single_evaluations() {
    let cfg = PhysicalConfig::default();
    let spec = small_fig4_spec();
    let grid = run_sweep(&spec, &cfg, &IntegratorOptions::default()).unwrap();
    for (i, j) in [(0, 0), (2, 3), (4, 4)] {
        let knobs = spec.knobs_at(i, j, &grid.axis1_values, &grid.axis2_values);
        let (_, single) = evaluate(&cfg, knobs, &IntegratorOptions::default()).unwrap();
        assert_eq!(grid.cell(i, j).summary().unwrap(), &single);
    }
}

fn grid_of(id: &str) -> SweepGrid {
    let Some(Figure::Contour { spec, .. }) = figure(id, 11) else { panic!() };
    run_sweep(&spec, &PhysicalConfig::default(), &IntegratorOptions::default()).unwrap()
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn antisqueezing_depends_mostly_on_pulse_width() {
    let grid = grid_of("fig5");
    let m = grid.matrix(|s| s.antisqueezing_db);
    let (n1, n2) = (m.len(), m[0].len());
    let across_fs: Vec<f64> = (0..n2).map(|j| spread((0..n1).map(|i| m[i][j]))).collect();
    let across_tau: Vec<f64> = (0..n1).map(|i| spread((0..n2).map(|j| m[i][j]))).collect();
    let (fs, tau) = (median(across_fs), median(across_tau));
    assert!(2.0 * fs < tau, "f_s spread {fs} dB, tau spread {tau} dB");
}

#[test]
fn shorter_pulses_and_stronger_coupling_trade_squeezing_for_quiet() {
    let sq = grid_of("fig6");
    let s_min = sq.matrix(|s| s.s_min0);
    let s_max = sq.matrix(|s| s.s_max0);
    let (f_p, tau) = (&sq.axis1_values, &sq.axis2_values);
    // the ceiling falls everywhere as either knob is lowered
    for i in 0..f_p.len() {
        for j in 0..tau.len() {
            if i > 0 {
                assert!(s_max[i][j] > s_max[i - 1][j]);
            }
            if j > 0 {
                assert!(s_max[i][j] > s_max[i][j - 1]);
            }
        }
    }
    // the floor rises with it in the short-pulse, over-coupled corner
    let corner_i: Vec<usize> = (0..f_p.len()).filter(|&i| f_p[i] <= 0.03 + 1e-12).collect();
    let corner_j: Vec<usize> = (0..tau.len()).filter(|&j| tau[j] <= 7.0 + 1e-12).collect();
    for &i in &corner_i {
        for &j in &corner_j {
            if i > 0 {
                assert!(s_min[i][j] < s_min[i - 1][j], "f_p {} tau {}", f_p[i], tau[j]);
            }
            if j > 0 {
                assert!(s_min[i][j] < s_min[i][j - 1], "f_p {} tau {}", f_p[i], tau[j]);
            }
        }
    }
    // in dB the ceiling moves further than the floor across that corner
    let (i_hi, j_hi) = (*corner_i.last().unwrap(), *corner_j.last().unwrap());
    let db = |x: f64| 10.0 * x.log10();
    let ceiling_drop = db(s_max[i_hi][j_hi]) - db(s_max[0][0]);
    let floor_rise = db(s_min[0][0]) - db(s_min[i_hi][j_hi]);
    assert!(ceiling_drop > floor_rise, "{ceiling_drop} vs {floor_rise}");
}

#[test]
fn optimum_is_stable_under_lattice_refinement() {
    let cfg = PhysicalConfig::default();
    let bounds = SearchBounds { g0: (0.5, 3.0), tau_p: (1.0, 4.0), f_s: (0.01, 0.1), f_p: (0.01, 0.04) };
    let coarse = OptimizerSettings { bounds, ..OptimizerSettings::default() };
    let fine = OptimizerSettings { resolution: coarse.resolution.halved(), ..coarse };
    let opts = IntegratorOptions::default();
    let a = constrained_optimum(&cfg, &coarse, 0.0, &opts).unwrap();
    let b = constrained_optimum(&cfg, &fine, 0.0, &opts).unwrap();
    assert!(a.feasible && b.feasible);
    let res = coarse.resolution;
    for (knob, step) in [(KnobName::G0, res.g0), (KnobName::TauP, res.tau_p), (KnobName::FS, res.f_s), (KnobName::FP, res.f_p)] {
        let (x, y) = (knob.get(&a.knobs), knob.get(&b.knobs));
        assert!((x - y).abs() <= step + 1e-9, "{}: {x} vs {y}", knob.as_str());
    }
    assert!(a.summary.squeezing_db >= 10.0 && b.summary.squeezing_db >= 10.0);
    assert!((a.summary.antisqueezing_db - b.summary.antisqueezing_db).abs() < 0.25);
}

#[test]
fn axis_values_hit_both_ends() {
    let axis = Axis { knob: KnobName::TauP, min: 1.0, max: 16.0, count: 41 };
    let v = axis.values();
    assert_eq!((v[0], v[40]), (1.0, 16.0));
    assert!((v[1] - 1.375).abs() < 1e-12);
}
