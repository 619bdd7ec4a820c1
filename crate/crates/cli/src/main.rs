mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use ringsqz::error::SimError;
use ringsqz::export::{self, SummaryDocument, SIGN_CONVENTION};
use ringsqz::figures::{self, Figure, Headline, FIGURE_IDS};
use ringsqz::pump::{compare_with_oracle, PumpValidation};
use ringsqz::spectrum::{evaluate, sample_spectrum, SpectrumSample, SqueezeSummary};
use ringsqz::sweep::{config_hash, constrained_optimum, run_sweep, SweepGrid};
use ringsqz::derive_run;

use config::{Format, RunConfig};
use output::Outputs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Param(p) => CliError::Config(p.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

/// Pulsed squeezed-light generation in a lossy microring.
#[derive(Debug, Parser)]
#[command(name = "ringsqz", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and the optimizer.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Which file kinds to write; overrides `output.formats`.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one knob setting and write trajectory, spectrum and summary.
    Run,
    /// Recompute the data behind a figure panel.
    Replicate {
        /// One of fig2 .. fig9.
        figure: String,
        /// Points per contour axis.
        #[arg(long, default_value_t = figures::DEFAULT_GRID)]
        grid: usize,
    },
    /// Two-knob grid from the `[sweep]` section.
    Sweep,
    /// Minimum antisqueezing at the target squeezing.
    Optimize,
    /// Compare the analytic pump envelope with the exact ring response.
    ValidatePump {
        /// Oracle grid spacing in round trips (at most 0.125).
        #[arg(long, default_value_t = 0.0625)]
        spacing: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let needs_file = matches!(cli.command, Command::Run | Command::Sweep | Command::ValidatePump { .. });
    let cfg = match (&cli.config, needs_file) {
        (Some(path), _) => config::load(path)?,
        (None, true) => return Err(CliError::Config("--config is required for this command".into())),
        (None, false) => RunConfig::reference(),
    };
    let mut formats = cfg.output.formats.clone();
    if let Some(f) = cli.format {
        formats = match f {
            FormatArg::Csv => vec![Format::Csv],
            FormatArg::Json => vec![Format::Json],
            FormatArg::Both => vec![Format::Csv, Format::Json],
        };
    }
    let dir = cli.out_dir.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let hash = config_hash(&(&cfg.physical, &cfg.knobs, &cfg.integrator, &cfg.sweep, &cfg.optimize));
    let out = Outputs::new(dir, formats, hash)?;

    match cli.command {
        Command::Run => cmd_run(&cfg, &out),
        Command::Replicate { figure, grid } => cmd_replicate(&cfg, &out, &figure, grid),
        Command::Sweep => {
            let spec = cfg.sweep_spec()?;
            let grid = run_sweep(&spec, &cfg.physical(), &cfg.integrator.options())
                .map_err(|e| CliError::Config(e.to_string()))?;
            write_grid(&out, "sweep", None, &grid, Headline::Squeezing)
        }
        Command::Optimize => cmd_optimize(&cfg, &out),
        Command::ValidatePump { spacing } => cmd_validate_pump(&cfg, &out, spacing),
    }
}

fn print_summary(s: &SqueezeSummary) {
    println!("# {SIGN_CONVENTION}");
    println!("{:<20} {:>12}", "quantity", "value");
    println!("{:<20} {:>12.4}", "squeezing_db", s.squeezing_db);
    println!("{:<20} {:>12.4}", "antisqueezing_db", s.antisqueezing_db);
    if let Some(ev) = &s.events {
        println!("{:<20} {:>12.4}", "t_m", ev.t_m);
        println!("{:<20} {:>12.4}", "t_A", ev.t_a);
        println!("{:<20} {:>12.6}", "dx2_min", ev.dx2_min);
        println!("{:<20} {:>12.4}", "dy2_max", ev.dy2_max);
    }
    println!("{:<20} {:>12.4}", "photons_generated", s.n_generated_total);
    println!("{:<20} {:>12.4e}", "peak_pump_photons", s.peak_pump_photons);
}

fn cmd_run(cfg: &RunConfig, out: &Outputs) -> Result<(), CliError> {
    let physical = cfg.physical();
    let (traj, summary) = evaluate(&physical, cfg.knobs()?, &cfg.integrator.options())?;
    let span = 5.0 * traj.run.gamma_sl;
    let omegas: Vec<f64> = (0..=200).map(|i| span * i as f64 / 200.0).collect();
    let samples = match &summary.events {
        Some(ev) => sample_spectrum(&traj.run, ev, &omegas),
        None => omegas
            .iter()
            .map(|&omega| SpectrumSample { omega, squeezed: 1.0, antisqueezed: 1.0, outside_validity: false })
            .collect(),
    };
    if samples.iter().any(|s| s.outside_validity) {
        log::warn!("part of the sampled spectrum lies outside the single-mode validity range");
    }
    out.csv("trajectory.csv", &[], |w, meta| export::write_trajectory_csv(w, &traj, meta))?;
    out.csv("spectrum.csv", &[], |w, meta| export::write_spectrum_csv(w, &samples, meta))?;
    out.json("summary.json", &SummaryDocument { config_hash: out.hash(), sign_convention: SIGN_CONVENTION, summary: &summary })?;
    print_summary(&summary);
    Ok(())
}

fn cmd_replicate(cfg: &RunConfig, out: &Outputs, id: &str, grid: usize) -> Result<(), CliError> {
    let fig = figures::figure(id, grid)
        .ok_or_else(|| CliError::Config(format!("unknown figure {id:?}; valid ids: {}", FIGURE_IDS.join(", "))))?;
    let physical = cfg.physical();
    let opts = cfg.integrator.options();
    match fig {
        Figure::Family { vary, values, base } => {
            let mut summaries = Vec::new();
            for v in values {
                let mut knobs = base;
                vary.set(&mut knobs, v);
                let (traj, summary) = evaluate(&physical, knobs, &opts)?;
                let name = format!("{id}_{}_{v}.csv", vary.as_str());
                let label = [("curve", format!("{}={v}", vary.as_str()))];
                out.csv(&name, &label, |w, meta| export::write_trajectory_csv(w, &traj, meta))?;
                println!(
                    "{}={v:<6} max r={:.4} min dx2={:.5} max dy2={:.4e} squeezing_db={:.3} antisqueezing_db={:.3}",
                    vary.as_str(),
                    traj.r.iter().copied().fold(0.0, f64::max),
                    summary.events.map_or(1.0, |e| e.dx2_min),
                    summary.events.map_or(1.0, |e| e.dy2_max),
                    summary.squeezing_db,
                    summary.antisqueezing_db
                );
                summaries.push(summary);
            }
            #[derive(serde::Serialize)]
            struct Family<'a> {
                figure: &'a str,
                config_hash: &'a str,
                sign_convention: &'static str,
                varied: &'static str,
                curves: &'a [SqueezeSummary],
            }
            out.json(
                &format!("{id}_summary.json"),
                &Family { figure: id, config_hash: out.hash(), sign_convention: SIGN_CONVENTION, varied: vary.as_str(), curves: &summaries },
            )
        }
        Figure::Contour { spec, headline } => {
            let grid = run_sweep(&spec, &physical, &opts).map_err(|e| CliError::Config(e.to_string()))?;
            write_grid(out, id, Some(id), &grid, headline)
        }
    }
}

fn write_grid(out: &Outputs, stem: &str, figure: Option<&str>, grid: &SweepGrid, headline: Headline) -> Result<(), CliError> {
    let sq = grid.matrix(|s| s.squeezing_db);
    let anti = grid.matrix(|s| s.antisqueezing_db);
    let files = vec![format!("{stem}_squeezing_db.csv"), format!("{stem}_antisqueezing_db.csv")];
    for (name, m, q) in [(&files[0], &sq, "squeezing_db"), (&files[1], &anti, "antisqueezing_db")] {
        out.csv(name, &[("quantity", q.to_string())], |w, meta| export::write_contour_csv(w, grid, m, meta))?;
    }
    out.json(&format!("{stem}.json"), &export::contour_sidecar(grid, figure, files))?;

    let (label, matrix, pick_max) = match headline {
        Headline::Squeezing => ("best squeezing_db", &sq, true),
        Headline::Antisqueezing => ("lowest antisqueezing_db", &anti, false),
    };
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let improves = best.is_none_or(|(b, _, _)| if pick_max { v > b } else { v < b });
            if v.is_finite() && improves {
                best = Some((v, i, j));
            }
        }
    }
    if let Some((v, i, j)) = best {
        println!(
            "{label} = {v:.3} at {}={:.4}, {}={:.4}",
            grid.spec.axis1.knob.as_str(),
            grid.axis1_values[i],
            grid.spec.axis2.knob.as_str(),
            grid.axis2_values[j]
        );
    }
    if grid.failed_cells() > 0 {
        println!("{} of {} cells failed; see the sidecar for details", grid.failed_cells(), grid.cells.len());
    }
    Ok(())
}

fn cmd_optimize(cfg: &RunConfig, out: &Outputs) -> Result<(), CliError> {
    let settings = cfg.optimizer();
    let theta = cfg.knobs.map_or(0.0, |k| k.theta);
    let opt = constrained_optimum(&cfg.physical(), &settings, theta, &cfg.integrator.options())
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[derive(serde::Serialize)]
    struct Report<'a> {
        config_hash: &'a str,
        sign_convention: &'static str,
        optimum: &'a ringsqz::sweep::Optimum,
    }
    out.json("optimum.json", &Report { config_hash: out.hash(), sign_convention: SIGN_CONVENTION, optimum: &opt })?;
    let k = opt.knobs;
    println!("g0={:.2} tau_p={:.2} f_s={:.4} f_p={:.4}", k.g0, k.tau_p, k.f_s, k.f_p);
    print_summary(&opt.summary);
    println!("{:<20} {:>12}", "evaluations", opt.evaluations);
    if !opt.feasible {
        return Err(CliError::Infeasible(format!(
            "target {} dB not reached; best squeezing {:.3} dB at the knobs above",
            settings.target_db, opt.summary.squeezing_db
        )));
    }
    Ok(())
}

fn cmd_validate_pump(cfg: &RunConfig, out: &Outputs, spacing: f64) -> Result<(), CliError> {
    let run = derive_run(&cfg.physical(), cfg.knobs()?).map_err(|e| CliError::Config(e.to_string()))?;
    let validation = compare_with_oracle(&run, spacing).map_err(|e| CliError::Numerical(e.to_string()))?;
    match validation {
        PumpValidation::Degenerate { coupling } => {
            println!("pump is uncoupled from the channel (sqrt(1 - sigma^2) = {coupling:.3e}); fields vanish, comparison skipped");
        }
        PumpValidation::Compared(cmp) => {
            out.csv("pump_comparison.csv", &[], |w, meta| export::write_pump_csv(w, &cmp, meta))?;
            println!("pump finesse            {:.3}", cmp.finesse);
            println!("max relative deviation  {:.4}", cmp.max_rel_deviation);
            println!("peak ratio exact/analytic (round-trip averaged) {:.4}", cmp.peak_ratio);
            println!("peak ratio exact/analytic (raw comb)            {:.4}", cmp.peak_ratio_raw);
            if cmp.finesse >= 20.0 {
                let verdict = if cmp.max_rel_deviation < 0.10 { "PASS" } else { "FAIL" };
                println!("{verdict}: deviation {:.2}% against the 10% bound for finesse >= 20", 100.0 * cmp.max_rel_deviation);
            } else {
                println!("INFO: finesse below 20, outside the regime of the analytic envelope; no bound applied");
            }
        }
    }
    Ok(())
}
