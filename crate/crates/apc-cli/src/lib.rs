//! Command-line front end for `apc-lab`: one experiment per invocation,
//! configured by a sectioned TOML file.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use apc_lab::dynamics::{propagate_adiabatic, propagate_static, FreeProjectors, Trajectory};
use apc_lab::experiments::{
    adiabatic_gapless_check, epsilon_scaling_sweep, mollifier_decay_check, pair_creation_sweep, Fingerprint, Lab, PairSweepOptions, SweepReport,
};
use apc_lab::gef::resonance_scan;
use apc_lab::spectral::{bound_state_curve, derivative_of_bound_state_scan, resolvent_norm_scan};
use apc_lab::{Exec, LabError};
use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::{read_config, write_config, ConfigError, RunConfig};
use output::{fits_table, fmt_f64, fmt_opt, write_atomic, write_csv, write_json, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "apc", version, about = "Overcritical Dirac well experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Run configuration (TOML).
    config: PathBuf,
    /// `section.key=value` overrides applied after the file.
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical coupling of the configured well -> mu_c.json
    Calibrate(Common),
    /// Gap eigenvalue against coupling -> curve.csv
    Spectrum(Common),
    /// Generalized eigenfunction sup-norms and resonance fits -> gef_scan.csv
    GefScan(Common),
    /// One adiabatic or frozen-coupling run -> trajectory.csv
    Evolve(Common),
    /// Decay half-time against epsilon -> sweep_epsilon.{csv,json}
    SweepEpsilon(Common),
    /// Pair creation probabilities against epsilon -> pair_sweep.{csv,json}
    PairSweep(Common),
    /// Gapless adiabatic following up to the crossing -> check_adiabatic.{csv,json}
    CheckAdiabatic(Common),
    /// Bound-state derivative and resolvent growth near threshold -> resolvent_scan.{csv,json}
    ResolventScan(Common),
    /// Mollifier complement norm against kappa -> mollifier_check.{csv,json}
    MollifierCheck(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Calibrate(c)
            | Command::Spectrum(c)
            | Command::GefScan(c)
            | Command::Evolve(c)
            | Command::SweepEpsilon(c)
            | Command::PairSweep(c)
            | Command::CheckAdiabatic(c)
            | Command::ResolventScan(c)
            | Command::MollifierCheck(c) => c,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Lab { context: String, source: LabError },
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => EXIT_USAGE,
            CliError::Lab { source, .. } => match source {
                LabError::Invalid(_) | LabError::BoxTooSmall { .. } | LabError::WindowBeforeThreshold { .. } | LabError::TooFewPoints { .. } => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            },
            CliError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

fn lab<T>(context: &str, r: apc_lab::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Lab { context: context.to_string(), source })
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source })
}

/// Caps the rayon pool at `APC_THREADS` workers when set.
fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("APC_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Validation(format!("APC_THREADS must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Validation("APC_THREADS must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    lab: Lab,
    dir: PathBuf,
}

impl Ctx {
    fn fingerprint(&self) -> Fingerprint {
        Fingerprint { h: self.lab.h, dt: self.cfg.dynamics.dt, seed: self.cfg.seed, channel: self.lab.channel.kappa() as i32, mu_c: self.lab.mu_c }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv(&self, name: &str, t: &Table) -> Result<(), CliError> {
        let p = self.path(name);
        io(&p, write_csv(t, &p))
    }

    fn json<T: serde::Serialize>(&self, name: &str, v: &T) -> Result<(), CliError> {
        let p = self.path(name);
        io(&p, write_json(v, &p))
    }

    fn report(&self, kind: &str, parameters: serde_json::Value) -> SweepReport {
        SweepReport::new(kind, parameters, self.fingerprint())
    }
}

fn run(cmd: &Command) -> Result<(), CliError> {
    init_threads()?;
    let common = cmd.common();
    let cfg = read_config(&common.config, &common.overrides)?;
    let raw = lab("potential", cfg.raw_potential())?;
    let dir = PathBuf::from(&cfg.output.dir);
    let resolved = dir.join("resolved_config.toml");
    io(&resolved, write_atomic(&resolved, write_config(&cfg).as_bytes()))?;
    let lab = lab("calibration", Lab::calibrate(cfg.grid.h, cfg.potential.channel, raw, Exec::default()))?;
    log::info!("calibrated: mu_c = {:.10}", lab.mu_c);
    let ctx = Ctx { cfg, lab, dir };
    match cmd {
        Command::Calibrate(_) => calibrate(&ctx),
        Command::Spectrum(_) => spectrum(&ctx),
        Command::GefScan(_) => gef_scan(&ctx),
        Command::Evolve(_) => evolve(&ctx),
        Command::SweepEpsilon(_) => sweep_epsilon(&ctx),
        Command::PairSweep(_) => pair_sweep(&ctx),
        Command::CheckAdiabatic(_) => check_adiabatic(&ctx),
        Command::ResolventScan(_) => resolvent(&ctx),
        Command::MollifierCheck(_) => mollifier(&ctx),
    }
}

fn calibrate(ctx: &Ctx) -> Result<(), CliError> {
    let grid = lab("calibration box", ctx.lab.grid(40.0))?;
    let edge = lab("edge state", ctx.lab.critical_state(&grid))?;
    ctx.json(
        "mu_c.json",
        &json!({
            "schema_version": ctx.cfg.schema_version,
            "mu_c": ctx.lab.mu_c,
            "potential": ctx.lab.potential,
            "edge_energy": edge.energy,
            "edge_residual": edge.residual,
            "fingerprint": ctx.fingerprint(),
        }),
    )
}

fn spectrum(ctx: &Ctx) -> Result<(), CliError> {
    let s = &ctx.cfg.spectrum;
    let grid = lab("spectrum box", ctx.lab.grid(s.box_length))?;
    let op = lab("operator", ctx.lab.operator(&grid, 0.0))?;
    let curve = lab("bound state curve", bound_state_curve(&op, s.mu_lo, s.mu_hi, s.steps, ctx.lab.exec))?;
    let mut t = Table::new(&["mu", "E", "dE_dmu"]);
    for r in &curve.rows {
        t.push(vec![fmt_f64(r.mu), fmt_f64(r.energy), fmt_f64(r.slope)]);
    }
    ctx.csv("curve.csv", &t)?;
    ctx.json(
        "curve.json",
        &json!({
            "schema_version": ctx.cfg.schema_version,
            "mu_b": curve.mu_b,
            "strictly_increasing": curve.strictly_increasing(),
            "slope_band": curve.slope_band(),
            "fingerprint": ctx.fingerprint(),
        }),
    )
}

fn gef_scan(ctx: &Ctx) -> Result<(), CliError> {
    let g = &ctx.cfg.gef;
    let k: Vec<f64> = (0..g.k_count).map(|j| g.k_min * (g.k_max / g.k_min).powf(j as f64 / (g.k_count - 1) as f64)).collect();
    let mut t = Table::new(&["mu", "k", "supnorm", "nu_fit", "c_fit", "kstar"]);
    let mut report = ctx.report("gef-scan", json!({ "gef": g, "potential": ctx.cfg.potential }));
    for &mu in &g.mu_list {
        let prof = lab(&format!("gef scan at mu = {mu}"), resonance_scan(ctx.lab.h, ctx.lab.channel, &ctx.lab.potential, mu, &k, ctx.lab.exec))?;
        let fit = prof.fit();
        if let Err(e) = &fit {
            log::warn!("mu = {mu}: {e}");
        }
        let fit = fit.ok();
        for (kk, s) in prof.k.iter().zip(&prof.supnorm) {
            t.push(vec![fmt_f64(mu), fmt_f64(*kk), fmt_f64(*s), fmt_opt(fit.map(|f| f.nu)), fmt_opt(fit.map(|f| f.c)), fmt_f64(prof.kstar)]);
        }
        report.rows.push(json!({ "mu": mu, "kstar": prof.kstar, "peak": prof.peak, "fit": prof.best_fit, "fit_accepted": fit.is_some() }));
    }
    ctx.csv("gef_scan.csv", &t)?;
    ctx.json("gef_scan.json", &report)
}

fn trajectory_csv(traj: &Trajectory, footer: serde_json::Value) -> Result<Vec<u8>, std::io::Error> {
    let mut t = Table::new(&["t", "s", "norm", "region_mass", "crit_overlap"]);
    for s in &traj.samples {
        t.push(vec![fmt_f64(s.t), fmt_f64(s.s), fmt_f64(s.norm), fmt_f64(s.region_mass), fmt_f64(s.crit_overlap)]);
    }
    let mut bytes = t.to_csv()?;
    bytes.extend_from_slice(format!("# {footer}\n").as_bytes());
    Ok(bytes)
}

fn evolve(ctx: &Ctx) -> Result<(), CliError> {
    let c = &ctx.cfg;
    let length = c.grid.length.unwrap_or_else(|| c.evolve_length());
    let grid = lab("evolution box", ctx.lab.grid(length))?;
    let phi = lab("edge state", ctx.lab.critical_state(&grid))?;
    let pcfg = c.propagation(c.dynamics.epsilon);
    let traj = match c.evolve.mode {
        config::EvolveMode::Adiabatic => {
            let profile = lab("profile", c.switching_profile())?;
            let (_, hi) = profile.support();
            let start = lab("start state", ctx.lab.state_at(&grid, profile.eval(c.dynamics.s0)))?;
            lab(
                &format!("adiabatic run at epsilon = {}", c.dynamics.epsilon),
                propagate_adiabatic(&start.vector, &grid, &ctx.lab.potential, &profile, c.dynamics.s0, hi, &pcfg, Some(&phi.vector)),
            )?
        }
        config::EvolveMode::Static => {
            let op = lab("operator", ctx.lab.operator(&grid, c.evolve.mu))?;
            lab(&format!("static run at mu = {}", c.evolve.mu), propagate_static(&phi.vector, &op, c.evolve.time, &pcfg, Some(&phi.vector)))?
        }
    };
    let proj = lab("free projectors", FreeProjectors::with_tolerance(&grid, ctx.lab.channel, c.dynamics.projector_tol))?;
    let (p_plus, p_minus) = lab("energy split", proj.energy_split(&traj.final_state))?;
    let footer = json!({
        "p_plus": p_plus,
        "p_minus": p_minus,
        "absorbed_norm": traj.absorbed_norm,
        "box_length": grid.length(),
        "fingerprint": ctx.fingerprint(),
    });
    let p = ctx.path("trajectory.csv");
    let bytes = io(&p, trajectory_csv(&traj, footer))?;
    io(&p, write_atomic(&p, &bytes))
}

fn sweep_epsilon(ctx: &Ctx) -> Result<(), CliError> {
    let c = &ctx.cfg;
    let profile = lab("profile", c.switching_profile())?;
    let sw = lab("epsilon sweep", epsilon_scaling_sweep(&ctx.lab, &profile, &c.dynamics.epsilon_list, &c.propagation(c.dynamics.epsilon)))?;
    let mut t = Table::new(&["epsilon", "t_half", "error"]);
    for ((e, th), err) in sw.epsilon.iter().zip(&sw.t_half).zip(&sw.errors) {
        t.push(vec![fmt_f64(*e), fmt_opt(*th), err.clone().unwrap_or_default()]);
    }
    ctx.csv("sweep_epsilon.csv", &t)?;
    let mut fits = vec![("t_half", &sw.fit)];
    if let Some(f) = &sw.fit_without_largest {
        fits.push(("t_half_without_largest", f));
    }
    ctx.csv("sweep_epsilon_fits.csv", &fits_table(fits.iter().copied()))?;
    let mut report = ctx.report("sweep-epsilon", json!({ "profile": c.profile, "dynamics": c.dynamics }));
    report.rows = sw.epsilon.iter().zip(&sw.t_half).zip(&sw.errors).map(|((e, th), err)| json!({ "epsilon": e, "t_half": th, "error": err })).collect();
    for (name, f) in fits {
        report.fits.insert(name.to_string(), f.clone());
    }
    ctx.json("sweep_epsilon.json", &report)
}

fn pair_sweep(ctx: &Ctx) -> Result<(), CliError> {
    let c = &ctx.cfg;
    let profile = lab("profile", c.switching_profile())?;
    let opts = PairSweepOptions { s0: c.dynamics.s0, sigma: c.dynamics.sigma, projector_tol: c.dynamics.projector_tol, backward_check: c.dynamics.backward_check };
    let rows = lab("pair sweep", pair_creation_sweep(&ctx.lab, &profile, &c.dynamics.epsilon_list, &opts, &c.propagation(c.dynamics.epsilon)))?;
    let mut t = Table::new(&[
        "epsilon",
        "p_plus",
        "p_minus",
        "crit_overlap",
        "sigma_mass",
        "max_mass_after_sigma",
        "no_return",
        "absorbed_norm",
        "p_minus_before",
        "box_length",
        "error",
    ]);
    for r in &rows {
        t.push(vec![
            fmt_f64(r.epsilon),
            fmt_f64(r.p_plus),
            fmt_f64(r.p_minus),
            fmt_f64(r.crit_overlap),
            fmt_f64(r.sigma_mass),
            fmt_f64(r.max_mass_after_sigma),
            r.no_return.to_string(),
            fmt_f64(r.absorbed_norm),
            fmt_opt(r.p_minus_before),
            fmt_f64(r.box_length),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    ctx.csv("pair_sweep.csv", &t)?;
    let mut report = ctx.report("pair-sweep", json!({ "profile": c.profile, "dynamics": c.dynamics }));
    report.push_rows(&rows).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.json("pair_sweep.json", &report)?;
    failed_runs(rows.iter().map(|r| (r.epsilon, r.error.as_deref())))
}

fn check_adiabatic(ctx: &Ctx) -> Result<(), CliError> {
    let c = &ctx.cfg;
    let profile = lab("profile", c.switching_profile())?;
    let rows = lab("gapless check", adiabatic_gapless_check(&ctx.lab, &profile, &c.dynamics.epsilon_list, c.dynamics.s0, &c.propagation(c.dynamics.epsilon)))?;
    let mut t = Table::new(&["epsilon", "overlap", "error"]);
    for r in &rows {
        t.push(vec![fmt_f64(r.epsilon), fmt_f64(r.overlap), r.error.clone().unwrap_or_default()]);
    }
    ctx.csv("check_adiabatic.csv", &t)?;
    let mut report = ctx.report("check-adiabatic", json!({ "profile": c.profile, "dynamics": c.dynamics }));
    report.push_rows(&rows).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.json("check_adiabatic.json", &report)?;
    failed_runs(rows.iter().map(|r| (r.epsilon, r.error.as_deref())))
}

/// Sweeps keep going past a failed point; the first failure still sets the
/// exit code.
fn failed_runs<'a>(rows: impl Iterator<Item = (f64, Option<&'a str>)>) -> Result<(), CliError> {
    for (eps, err) in rows {
        if let Some(e) = err {
            return Err(CliError::Lab { context: format!("run at epsilon = {eps}"), source: LabError::SolveFailure(e.to_string()) });
        }
    }
    Ok(())
}

fn resolvent(ctx: &Ctx) -> Result<(), CliError> {
    let r = &ctx.cfg.resolvent;
    let grid = lab("resolvent box", ctx.lab.grid(r.box_length))?;
    let op = lab("operator", ctx.lab.operator(&grid, 1.0))?;
    let deriv = lab("bound state derivative scan", derivative_of_bound_state_scan(&op, &r.mu_list, r.delta_mu, ctx.lab.exec))?;
    let res = lab(
        "resolvent scan",
        resolvent_norm_scan(&op, &r.mu_list, r.probes, ctx.cfg.dynamics.region_radius, ctx.cfg.seed, ctx.lab.exec),
    )?;
    let mut t = Table::new(&["mu", "one_minus_mu", "derivative_quotient", "overlap", "energy", "resolvent_norm"]);
    for (j, &mu) in r.mu_list.iter().enumerate() {
        t.push(vec![fmt_f64(mu), fmt_f64(1.0 - mu), fmt_f64(deriv.quotient[j]), fmt_f64(deriv.overlap[j]), fmt_f64(res.energy[j]), fmt_f64(res.norm[j])]);
    }
    ctx.csv("resolvent_scan.csv", &t)?;
    ctx.csv("resolvent_scan_fits.csv", &fits_table([("derivative", &deriv.fit), ("resolvent", &res.fit)]))?;
    let mut report = ctx.report("resolvent-scan", json!({ "resolvent": r, "region_radius": ctx.cfg.dynamics.region_radius }));
    report.rows = vec![json!({ "derivative": deriv, "resolvent": res })];
    report.fits.insert("derivative".into(), deriv.fit.clone());
    report.fits.insert("resolvent".into(), res.fit.clone());
    ctx.json("resolvent_scan.json", &report)
}

fn mollifier(ctx: &Ctx) -> Result<(), CliError> {
    let m = &ctx.cfg.mollifier;
    let check = lab(
        &format!("mollifier check at mu = {}", m.mu),
        mollifier_decay_check(&ctx.lab, m.mu, &m.kappa_list, m.nodes, m.kappa_cut, m.truncate_radius),
    )?;
    let mut t = Table::new(&["kappa", "complement_norm", "flagged"]);
    for ((k, v), f) in check.kappa.iter().zip(&check.value).zip(&check.flagged) {
        t.push(vec![fmt_f64(*k), fmt_f64(*v), f.to_string()]);
    }
    ctx.csv("mollifier_check.csv", &t)?;
    let mut report = ctx.report("mollifier-check", json!({ "mollifier": m }));
    report.rows = vec![json!({ "mu": check.mu, "monotone": check.monotone })];
    report.fits.insert("complement_norm".into(), check.fit.clone());
    ctx.json("mollifier_check.json", &report)
}
