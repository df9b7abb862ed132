//! The `dsocs` command line: `simulate`, `converge` and `diagnose`.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, Seed, SystemKind, KNOWN_KEYS};

use crate::diagnostics::{convergence_study, energy_series, lyapunov_series, DiagnosticsReport, SeriesSummary};
use crate::discrete::Trajectory;
use crate::error::{Error, Result};
use crate::io::{format_real, parse_param_override, write_trajectory, Config, TrajectoryColumns};
use crate::numerics::Vector;
use crate::reference::{particle_exact, pendulum_accel, rk4_flow_sampled, ContinuousTrajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Environment variable overriding the solver tolerance.
pub const TOLERANCE_ENV: &str = "DSOCS_TOL";

/// Reference steps per step of the finest discrete run.
const REFERENCE_REFINEMENT: usize = 100;

#[derive(Parser, Debug)]
#[command(name = "dsocs", version, about = "Variational integrators for discrete second order constrained systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(RunArgs),
    /// Measure the error against a reference for several step sizes.
    Converge(RunArgs),
    /// Check the structural properties of a computed trajectory.
    Diagnose(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// particle, pendulum, free, harmonic, nonholonomic-test or holonomic-test
    #[arg(long)]
    system: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// Comma separated step sizes for `converge`.
    #[arg(long)]
    h_list: Option<String>,
    /// Initial configuration, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    seed_q: Option<String>,
    /// Initial velocity, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    seed_qdot: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `key = value` file; flags and `--param` override its entries.
    #[arg(long)]
    config: Option<String>,
    /// nearest-previous, lyapunov-decrease or newton-only
    #[arg(long)]
    selection: Option<String>,
    /// Override one configuration key, e.g. `pendulum.rho=2`.
    #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    /// Use Newton on the full step equation for the pendulum.
    #[arg(long)]
    generic_stepper: bool,
}

impl RunArgs {
    /// Config file, then `--param`, then explicit flags, then the
    /// tolerance environment variable.
    fn merged(&self, tolerance_env: Option<String>) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        for p in &self.params {
            let (k, v) = parse_param_override(p)?;
            cfg.set(&k, &v)?;
        }
        let flags = [
            ("system", &self.system),
            ("h", &self.h),
            ("steps", &self.steps),
            ("t_end", &self.t_end),
            ("h_list", &self.h_list),
            ("seed.q", &self.seed_q),
            ("seed.qdot", &self.seed_qdot),
            ("out", &self.out),
            ("selection", &self.selection),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.generic_stepper {
            cfg.set("generic_stepper", "true")?;
        }
        if let Some(tol) = tolerance_env {
            cfg.set("solver.tolerance", &tol)?;
        }
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (args, command): (&RunArgs, fn(&RunConfig) -> i32) = match &cli.command {
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Converge(a) => (a, cmd_converge),
        Command::Diagnose(a) => (a, cmd_diagnose),
    };
    let rc = args
        .merged(std::env::var(TOLERANCE_ENV).ok())
        .and_then(|cfg| RunConfig::from_config(&cfg));
    match rc {
        Ok(rc) => command(&rc),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn open_output(rc: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &rc.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Summaries go to stdout unless the data itself does.
fn summary_sink(rc: &RunConfig) -> Box<dyn Write> {
    if rc.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

fn preamble(rc: &RunConfig, command: &str) -> Vec<String> {
    let mut lines = vec![
        format!("dsocs {command}"),
        format!("system = {}", rc.system.name()),
        format!("h = {}", rc.h),
        format!("selection = {}", rc.stepper.selection),
        format!("solver.tolerance = {:e}", rc.stepper.solve.tolerance),
    ];
    match &rc.seed {
        Seed::Continuous { q, qdot } => {
            lines.push(format!("seed.q = {}", join(q)));
            lines.push(format!("seed.qdot = {}", join(qdot)));
        }
        Seed::Pair(p) => {
            lines.push(format!("seed.q0 = {}", join(&p.q_prev)));
            lines.push(format!("seed.q1 = {}", join(&p.q_curr)));
        }
    }
    if rc.system == SystemKind::Pendulum && rc.generic_stepper {
        lines.push("generic_stepper = true".into());
    }
    lines
}

fn join(v: &Vector) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs the configured flow; a failed step yields the partial trajectory
/// and the failure message.
fn integrate(rc: &RunConfig) -> Result<(crate::discrete::DiscreteSystem, Trajectory, Option<String>)> {
    let sys = rc.build(rc.h)?;
    let seed = rc.seed_pair(rc.h)?;
    match sys.flow(&seed, rc.steps, &rc.stepper) {
        Ok(traj) => Ok((sys, traj, None)),
        Err(Error::Flow { index, source, partial }) => {
            let note = format!("truncated: step {index} failed: {source}");
            Ok((sys, *partial, Some(note)))
        }
        Err(e) => Err(e),
    }
}

fn columns(rc: &RunConfig, sys: &crate::discrete::DiscreteSystem, traj: &Trajectory) -> TrajectoryColumns {
    let n = traj.len();
    let mut ld: Vec<Option<f64>> = energy_series(sys, traj).into_iter().map(Some).collect();
    ld.resize(n, None);
    let mut cols = TrajectoryColumns::new(sys.coordinate_names()).with_extra("Ld", ld);
    if rc.system == SystemKind::Pendulum {
        let mut v = vec![None];
        v.extend(lyapunov_series(&rc.pendulum, traj).into_iter().map(Some));
        v.resize(n, None);
        cols = cols.with_extra("V", v);
    }
    cols
}

pub fn cmd_simulate(rc: &RunConfig) -> i32 {
    let (sys, traj, failure) = match integrate(rc) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cols = columns(rc, &sys, &traj);
    let trailer: Vec<String> = failure.iter().cloned().collect();
    let written = open_output(rc).and_then(|mut out| {
        write_trajectory(&mut out, &traj, &cols, &preamble(rc, "simulate"), &trailer)?;
        out.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_SOLVER;
    }

    let mut sink = summary_sink(rc);
    let _ = writeln!(sink, "steps completed: {} of {}", traj.records.len(), rc.steps);
    if let Some(last) = traj.points.last() {
        let _ = writeln!(sink, "final state: t = {} q = ({})", traj.time(traj.len() - 1), join(last));
    }
    if let Some(s) = SeriesSummary::of(&energy_series(&sys, &traj)) {
        let _ = writeln!(sink, "Ld: {s}");
    }
    if rc.system == SystemKind::Pendulum {
        if let Some(s) = SeriesSummary::of(&lyapunov_series(&rc.pendulum, &traj)) {
            let _ = writeln!(sink, "V: {s}");
        }
    }
    match failure {
        Some(note) => {
            eprintln!("error: {note}");
            EXIT_SOLVER
        }
        None => EXIT_OK,
    }
}

/// Continuous solution the discrete runs are compared against.
fn reference(rc: &RunConfig) -> Result<ContinuousTrajectory> {
    let Seed::Continuous { q, qdot } = &rc.seed else {
        return Err(config::config_error("converge needs continuous initial data (seed.q, seed.qdot)".into()));
    };
    let t_end = rc.t_end;
    match rc.system {
        SystemKind::Particle => {
            let default = q.iter().all(|x| *x == 0.0) && qdot.iter().all(|x| *x == 1.0);
            if (rc.particle.curvature)(0.0, 0.0) != 1.0 || !default {
                return Err(config::config_error(
                    "the particle reference is the closed-form circle for unit curvature from the default seed".into(),
                ));
            }
            Ok(ContinuousTrajectory::analytic(particle_exact, t_end))
        }
        SystemKind::Pendulum => {
            let h_min = rc.h_list.iter().copied().fold(f64::INFINITY, f64::min);
            let p = rc.pendulum;
            rk4_flow_sampled(
                move |q, v| pendulum_accel(&p, q, v),
                q,
                qdot,
                h_min / REFERENCE_REFINEMENT as f64,
                t_end,
                REFERENCE_REFINEMENT,
            )
        }
        SystemKind::Free => {
            let (q, qdot) = (q.clone(), qdot.clone());
            Ok(ContinuousTrajectory::analytic(move |t| &q + &qdot * t, t_end))
        }
        SystemKind::Harmonic => {
            let (q, qdot) = (q.clone(), qdot.clone());
            Ok(ContinuousTrajectory::analytic(move |t| &q * t.cos() + &qdot * t.sin(), t_end))
        }
        other => Err(config::config_error(format!("no continuous reference for `{}`", other.name()))),
    }
}

pub fn cmd_converge(rc: &RunConfig) -> i32 {
    let reference = match reference(rc) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if matches!(e, Error::Config { .. }) { EXIT_CONFIG } else { EXIT_SOLVER };
        }
    };
    let study = convergence_study(
        |h| rc.build(h),
        &reference,
        |h| rc.seed_pair(h).expect("continuous seeds are valid for every step"),
        &rc.h_list,
        rc.t_end,
        rc.coordinate,
        &rc.stepper,
    );

    let written = open_output(rc).and_then(|mut out| {
        for line in preamble(rc, "converge") {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# t_end = {}", rc.t_end)?;
        writeln!(out, "# coordinate = {}", rc.coordinate)?;
        writeln!(out, "h,error")?;
        for (h, e) in &study.pairs {
            writeln!(out, "{},{}", format_real(*h), format_real(*e))?;
        }
        for (h, e) in &study.failures {
            writeln!(out, "# failed: h = {h}: {e}")?;
        }
        match study.slope {
            Some(s) => writeln!(out, "# slope = {s}")?,
            None => writeln!(out, "# slope unavailable")?,
        }
        out.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_SOLVER;
    }

    let mut sink = summary_sink(rc);
    match study.slope {
        Some(s) => {
            let _ = writeln!(sink, "slope: {s:.4}");
        }
        None => {
            let _ = writeln!(sink, "slope: unavailable");
        }
    }
    for (h, e) in &study.failures {
        eprintln!("error: h = {h}: {e}");
    }
    if study.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

pub fn cmd_diagnose(rc: &RunConfig) -> i32 {
    let (sys, traj, failure) = match integrate(rc) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pendulum = (rc.system == SystemKind::Pendulum).then_some(&rc.pendulum);
    let report = match DiagnosticsReport::collect(&sys, &traj, &rc.stepper, rc.samples, pendulum) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_SOLVER;
        }
    };
    let written = open_output(rc).and_then(|mut out| {
        for line in preamble(rc, "diagnose") {
            writeln!(out, "# {line}")?;
        }
        if let Some(note) = &failure {
            writeln!(out, "# {note}")?;
        }
        write!(out, "{report}")?;
        out.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_SOLVER;
    }
    let hard = report.hard_failures();
    for f in &hard {
        eprintln!("invariant violated: {f}");
    }
    if let Some(note) = failure {
        eprintln!("error: {note}");
        return EXIT_SOLVER;
    }
    if hard.is_empty() {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}
