//! Subcommands. Each one writes its CSV files and a `manifest.json` into
//! the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::warn;
use rayon::prelude::*;

use richards_core::lsolver::lscheme_solve;
use richards_core::timestepper::step;
use richards_core::verify::{
    check_bounds, eps_convergence_study, lscheme_rate, mms_linear_sanity, reference_solver, seminorm_summability,
    tau_convergence_study,
};
use richards_core::{run, Constitutive, ConvergenceTable, LschemeConfig};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{Manifest, OutDir, Table, Value};

/// Tolerance of the bounds report.
pub const BOUNDS_TOL: f64 = 1e-8;

/// Errors below this are treated as converged when forming L-scheme ratios.
pub const RATE_FLOOR: f64 = 1e-11;

#[derive(Debug, Parser)]
#[command(name = "richards-dd", version, about = "Semi-implicit L-scheme solver for the doubly degenerate Richards equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file.
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the time loop.
    Run(Common),
    /// L-scheme error sequences at one time step for several L = factor·L_θ.
    SweepLscheme {
        #[command(flatten)]
        common: Common,
        /// Time step to linearize (default: the last one).
        #[arg(long)]
        step: Option<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.55, 0.75, 1.0, 2.0, 4.0])]
        factors: Vec<f64>,
    },
    /// Self-convergence in τ along T/N, T/2N, ...
    SweepTau {
        #[command(flatten)]
        common: Common,
        /// Number of step sizes.
        #[arg(long, default_value_t = 5)]
        taus: usize,
    },
    /// Distance of ε-regularized runs to the degenerate run.
    SweepEps {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3, 1e-4])]
        eps: Vec<f64>,
        /// Step size; repeat for several (default: T/N).
        #[arg(long)]
        tau: Vec<f64>,
    },
    /// Backward-Euler order on a manufactured linear solution.
    Mms {
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 400)]
        cells: usize,
        #[arg(long, default_value_t = 1.0)]
        final_time: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 40, 80, 160])]
        steps: Vec<usize>,
    },
    /// Check the structural hypotheses of the constitutive model.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Probe count (default: [output] certify_probes).
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Sample θ, θ', K and the convection coefficients.
    PlotConstitutive {
        #[command(flatten)]
        common: Common,
        /// Sample count (default: [output] plot_samples).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        eta_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eta_max: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::SweepLscheme { .. } => "sweep-lscheme",
            Command::SweepTau { .. } => "sweep-tau",
            Command::SweepEps { .. } => "sweep-eps",
            Command::Mms { .. } => "mms",
            Command::Certify { .. } => "certify",
            Command::PlotConstitutive { .. } => "plot-constitutive",
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Sizes the global rayon pool from `RICHARDS_DD_THREADS`.
pub fn init_threads() {
    let Ok(v) = std::env::var("RICHARDS_DD_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("RICHARDS_DD_THREADS ignored: {e}");
            }
        }
        _ => warn!("RICHARDS_DD_THREADS = '{v}' is not a positive integer; ignored"),
    }
}

struct Session {
    manifest: Manifest,
    out: OutDir,
    clock: Instant,
}

impl Session {
    fn open(cmd: &Command, args: Vec<String>, out: &Path) -> Result<Self> {
        Ok(Self { manifest: Manifest::new(cmd.name(), args), out: OutDir::create(out)?, clock: Instant::now() })
    }

    fn load(&mut self, path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.manifest.set_config(path, &text);
        let t = Instant::now();
        let cfg = Config::parse(&text)?;
        self.manifest.time("parse", t.elapsed().as_secs_f64());
        Ok(cfg)
    }

    fn lap(&mut self, phase: &str, since: Instant) {
        self.manifest.time(phase, since.elapsed().as_secs_f64());
    }

    fn finish(mut self, code: i32) -> Result<i32> {
        self.manifest.time("total", self.clock.elapsed().as_secs_f64());
        self.manifest.exit_code = code;
        let dir = self.out.path().to_path_buf();
        self.manifest.outputs = self.out.into_outputs();
        self.manifest.write(&dir)?;
        Ok(code)
    }
}

pub fn execute(cmd: &Command, args: Vec<String>) -> Result<i32> {
    match cmd {
        Command::Run(c) => cmd_run(cmd, c, args),
        Command::SweepLscheme { common, step, factors } => cmd_sweep_lscheme(cmd, common, *step, factors, args),
        Command::SweepTau { common, taus } => cmd_sweep_tau(cmd, common, *taus, args),
        Command::SweepEps { common, eps, tau } => cmd_sweep_eps(cmd, common, eps, tau, args),
        Command::Mms { out, cells, final_time, steps } => cmd_mms(cmd, out, *cells, *final_time, steps, args),
        Command::Certify { common, probes } => cmd_certify(cmd, common, *probes, args),
        Command::PlotConstitutive { common, samples, eta_min, eta_max } => {
            cmd_plot(cmd, common, *samples, *eta_min, *eta_max, args)
        }
    }
}

fn cmd_run(cmd: &Command, c: &Common, args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let scenario = cfg.scenario()?;
    let t = Instant::now();
    let traj = run(&scenario)?;
    ses.lap("solve", t);

    let mut summary = Table::new(&["step", "t", "min_u", "max_u", "theta_mass", "balance_residual", "lscheme_iters"]);
    for d in &traj.diagnostics {
        summary.push(vec![
            d.step.into(),
            d.t.into(),
            d.min_u.into(),
            d.max_u.into(),
            d.theta_mass.into(),
            d.balance_residual.into(),
            d.lscheme_iters.into(),
        ]);
    }
    ses.out.csv("trajectory_summary.csv", &summary)?;

    let mut iters = Table::new(&["step", "iter", "increment_norm", "weighted_seminorm", "cg_iters"]);
    for (n, h) in traj.histories.iter().enumerate() {
        for i in 0..h.iterations() {
            iters.push(vec![
                (n + 1).into(),
                (i + 1).into(),
                h.increments[i].into(),
                h.seminorms[i].into(),
                h.cg_iters[i].into(),
            ]);
        }
    }
    ses.out.csv("iterations.csv", &iters)?;

    let upper = scenario.model.upper_bound().unwrap_or(f64::INFINITY);
    let lower = if upper.is_finite() { 0.0 } else { f64::NEG_INFINITY };
    let report = check_bounds(&traj, lower, upper, BOUNDS_TOL);
    let mut bounds = Table::new(&["step", "t", "min_u", "max_u", "lower", "upper", "violation"]);
    for (n, &(lo, hi)) in report.per_step.iter().enumerate() {
        let viol = (lower - lo).max(hi - upper).max(0.0);
        bounds.push(vec![n.into(), traj.times[n].into(), lo.into(), hi.into(), lower.into(), upper.into(), viol.into()]);
    }
    ses.out.csv("bounds_report.csv", &bounds)?;

    let every = cfg.output.fields_every;
    if every > 0 {
        let model = &*scenario.model;
        for (n, u) in traj.states.iter().enumerate() {
            if n % every != 0 && n != traj.steps() {
                continue;
            }
            let mut f = Table::new(&["node", "x", "z", "u", "theta"]);
            for (i, (p, &v)) in scenario.mesh.nodes().iter().zip(u).enumerate() {
                f.push(vec![i.into(), p[0].into(), p[1].into(), v.into(), model.theta(v).into()]);
            }
            ses.out.csv(&format!("fields_{n}.csv"), &f)?;
        }
    }

    let failed = traj.diagnostics.iter().filter(|d| !d.converged).count();
    println!(
        "{} steps, {} L-scheme iterations, u in [{:.6e}, {:.6e}], bounds {}",
        traj.steps(),
        traj.diagnostics.iter().map(|d| d.lscheme_iters).sum::<usize>(),
        report.global_min,
        report.global_max,
        if report.passed { "ok" } else { "VIOLATED" },
    );
    if failed > 0 {
        eprintln!("{failed} step(s) did not converge");
    }
    ses.finish(if failed > 0 { 1 } else { 0 })
}

fn cmd_sweep_lscheme(cmd: &Command, c: &Common, k: Option<usize>, factors: &[f64], args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let s = cfg.scenario()?;
    let k = k.unwrap_or(s.steps);
    if k == 0 || k > s.steps {
        return Err(CliError::Usage(format!("--step must lie in 1..={}", s.steps)));
    }
    if factors.is_empty() {
        return Err(CliError::Usage("--factors must not be empty".into()));
    }
    let model = &*s.model;
    let l_theta = model.lipschitz_theta();
    let t = Instant::now();
    let mut u = s.initial_state();
    for n in 1..k {
        u = step(&s, &u, n)?.u;
    }
    let frozen = s.freeze(&u, k)?;
    let reference = lscheme_solve(model, &frozen, &u, &reference_solver(&s).solver)?;
    ses.lap("reference", t);
    if !reference.history.converged {
        ses.finish(1)?;
        return Err(CliError::NotConverged(format!("reference solve at step {k}")));
    }

    let t = Instant::now();
    let runs: Vec<_> = factors
        .par_iter()
        .map(|&f| {
            let lcfg = LschemeConfig { l: f * l_theta, record_iterates: true, ..s.solver.clone() };
            let out = lscheme_solve(model, &frozen, &u, &lcfg)?;
            let rate = lscheme_rate(&out.history, &reference.u, &frozen.mass, RATE_FLOOR)?;
            let sum = seminorm_summability(&out.history, &reference.u, &frozen.mass, &frozen.stiffness, frozen.tau, lcfg.l)?;
            Ok::<_, richards_core::Error>((f, lcfg.l, out.history, rate, sum))
        })
        .collect::<std::result::Result<_, _>>()?;
    ses.lap("sweep", t);

    let mut rates = Table::new(&["factor", "L", "iter", "error", "increment_norm"]);
    let mut summary = Table::new(&[
        "factor",
        "L",
        "iterations",
        "converged",
        "non_increasing",
        "max_ratio",
        "geometric_mean_ratio",
        "summability_lhs",
        "summability_rhs",
    ]);
    for (f, l, h, rate, (lhs, rhs)) in &runs {
        for (i, e) in rate.errors.iter().enumerate() {
            let inc = if i == 0 { f64::NAN } else { h.increments[i - 1] };
            rates.push(vec![(*f).into(), (*l).into(), i.into(), (*e).into(), inc.into()]);
        }
        summary.push(vec![
            (*f).into(),
            (*l).into(),
            h.iterations().into(),
            h.converged.into(),
            rate.non_increasing(1e-12).into(),
            rate.max_ratio.into(),
            rate.geometric_mean_ratio.into(),
            (*lhs).into(),
            (*rhs).into(),
        ]);
        println!(
            "L = {l:<6} iterations {:>4} ratio {:.4} summability {:.3e} <= {:.3e}",
            h.iterations(),
            rate.geometric_mean_ratio,
            lhs,
            rhs
        );
    }
    ses.out.csv("lscheme_rates.csv", &rates)?;
    ses.out.csv("lscheme_summary.csv", &summary)?;
    ses.finish(0)
}

fn convergence_rows(table: &mut Table, lead: &[Value], study: &ConvergenceTable) {
    for k in 0..study.values.len() {
        let mut row = lead.to_vec();
        row.push(study.values[k].into());
        row.push(study.distances[k].into());
        row.push(study.orders[k].map_or(Value::Text(String::new()), Value::Float));
        table.push(row);
    }
}

fn cmd_sweep_tau(cmd: &Command, c: &Common, count: usize, args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let s = cfg.scenario()?;
    if count == 0 {
        return Err(CliError::Usage("--taus must be at least 1".into()));
    }
    let taus: Vec<f64> = (0..count).map(|k| s.final_time / (s.steps << k) as f64).collect();
    let t = Instant::now();
    let study = tau_convergence_study(&s, &taus)?;
    ses.lap("study", t);
    let mut table = Table::new(&["steps", "tau", "distance", "order"]);
    for k in 0..count {
        let order = study.orders[k].map_or(Value::Text(String::new()), Value::Float);
        table.push(vec![(s.steps << k).into(), taus[k].into(), study.distances[k].into(), order]);
    }
    ses.out.csv("tau_study.csv", &table)?;
    report_study(&study);
    ses.finish(0)
}

fn cmd_sweep_eps(cmd: &Command, c: &Common, eps: &[f64], taus: &[f64], args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let s = cfg.scenario()?;
    let taus = if taus.is_empty() { vec![s.tau()] } else { taus.to_vec() };
    let t = Instant::now();
    let mut table = Table::new(&["tau", "eps", "distance", "order"]);
    for &tau in &taus {
        let study = eps_convergence_study(&s, eps, tau)?;
        convergence_rows(&mut table, &[tau.into()], &study);
        println!("tau = {tau}");
        report_study(&study);
    }
    ses.lap("study", t);
    ses.out.csv("eps_study.csv", &table)?;
    ses.finish(0)
}

fn cmd_mms(cmd: &Command, out: &Path, cells: usize, final_time: f64, steps: &[usize], args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, out)?;
    if steps.is_empty() || steps.contains(&0) {
        return Err(CliError::Usage("--steps must list positive step counts".into()));
    }
    let t = Instant::now();
    let study = mms_linear_sanity(cells, final_time, steps)?;
    ses.lap("study", t);
    let mut table = Table::new(&["steps", "tau", "error", "order"]);
    for (k, &n) in steps.iter().enumerate() {
        let order = study.orders[k].map_or(Value::Text(String::new()), Value::Float);
        table.push(vec![n.into(), study.values[k].into(), study.distances[k].into(), order]);
    }
    ses.out.csv("mms_study.csv", &table)?;
    report_study(&study);
    ses.finish(0)
}

fn report_study(study: &ConvergenceTable) {
    for k in 0..study.values.len() {
        match study.orders[k] {
            Some(o) => println!("{} = {:.6e}  d = {:.6e}  order {o:.3}", study.parameter, study.values[k], study.distances[k]),
            None => println!("{} = {:.6e}  d = {:.6e}", study.parameter, study.values[k], study.distances[k]),
        }
    }
    if let Some(p) = study.fitted_order() {
        println!("fitted order {p:.3}");
    }
}

fn cmd_certify(cmd: &Command, c: &Common, probes: Option<usize>, args: Vec<String>) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let t = Instant::now();
    let model = cfg.soil_model()?;
    let report = model.certify(probes.unwrap_or(cfg.output.certify_probes));
    ses.lap("certify", t);
    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    for (name, value, threshold, pass) in report.rows() {
        println!("{:<5} {name:<28} {value:.3e} (limit {threshold:.1e})", if pass { "PASS" } else { "FAIL" });
        table.push(vec![name.into(), value.into(), threshold.into(), pass.into()]);
    }
    println!("u* = {:.15}", model.u_star());
    ses.out.csv("certification.csv", &table)?;
    ses.finish(if report.passed() { 0 } else { 1 })
}

fn cmd_plot(
    cmd: &Command,
    c: &Common,
    samples: Option<usize>,
    eta_min: Option<f64>,
    eta_max: Option<f64>,
    args: Vec<String>,
) -> Result<i32> {
    let mut ses = Session::open(cmd, args, &c.out)?;
    let cfg = ses.load(&c.config)?;
    let model = cfg.soil_model()?;
    let us = model.u_star();
    let (a, b) = (eta_min.unwrap_or(-0.5 * us), eta_max.unwrap_or(2.5 * us));
    let n = samples.unwrap_or(cfg.output.plot_samples);
    if n < 2 || !(b > a) {
        return Err(CliError::Usage("need at least 2 samples on a non-empty eta range".into()));
    }
    let mut table = Table::new(&["eta", "theta", "theta_prime", "K", "Kbar_z", "Kbar1_z"]);
    for i in 0..n {
        let eta = a + (b - a) * i as f64 / (n - 1) as f64;
        table.push(vec![
            eta.into(),
            model.theta(eta).into(),
            model.theta_prime(eta).into(),
            model.conductivity(eta).into(),
            model.convection_z(eta).into(),
            model.kbar1_z(eta).into(),
        ]);
    }
    ses.out.csv("constitutive.csv", &table)?;
    ses.finish(0)
}
