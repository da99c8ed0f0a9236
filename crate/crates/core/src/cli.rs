//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 non-convergence, 3 property failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::checks::{self, CheckOutcome};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{
    bbm_check, emit_report, report_file_name, run_eps_sweep, run_s_sweep, Format, Report, SweepReport,
};
use crate::operator::DiscreteOperator;
use crate::solver::{solve_penalized, solve_vi, PenaltyFn, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

pub const CHECK_NAMES: [&str; 6] = [
    "coercivity",
    "pineq",
    "bbm",
    "lewy-stampacchia",
    "theta-sandwich",
    "all",
];

#[derive(Debug, Parser)]
#[command(name = "fracobs", version, about = "Fractional p-obstacle problems on 1D grids")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized suites (overrides the config seed)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the obstacle problem, and the penalized problem when penalty.eps is set
    Solve,
    /// Penalization sweep over penalty.eps_list
    SweepEps,
    /// Sweep over study.s_list against the solution at study.sigma
    SweepS,
    /// Run a property suite: coercivity, pineq, bbm, lewy-stampacchia, theta-sandwich or all
    Check { which: String },
    /// Seminorm quadrature table as s approaches 1
    BbmCheck,
}

struct Ctx<'a> {
    cfg: RunConfig,
    dir: PathBuf,
    seed: u64,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn say(&mut self, msg: impl AsRef<str>) {
        // a closed stdout is not worth failing a run over
        let _ = writeln!(self.out, "{}", msg.as_ref());
    }

    fn write(&mut self, report: Report<'_>, format: Format, name: String) -> Result<PathBuf> {
        let path = self.dir.join(name);
        emit_report(report, format, &path)?;
        self.say(format!("wrote {}", path.display()));
        Ok(path)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg.and_then(|c| c.validate_common().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut ctx = Ctx {
        dir: cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone()),
        seed: cli.seed.unwrap_or_else(|| cfg.seed()),
        cfg,
        out,
    };
    let result = match &cli.command {
        Command::Solve => cmd_solve(&mut ctx),
        Command::SweepEps => cmd_sweep_eps(&mut ctx),
        Command::SweepS => cmd_sweep_s(&mut ctx),
        Command::Check { which } => cmd_check(&mut ctx, which),
        Command::BbmCheck => cmd_bbm(&mut ctx),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            ctx.say(format!("error: {e}"));
            EXIT_CONFIG
        }
    }
}

fn summarize(r: &SolveReport) -> String {
    format!(
        "{} s = {} p = {}{}: residual {:.3e}, {} newton steps, {} sweeps, free boundary {:?}{}",
        r.problem_id,
        r.params.s,
        r.params.p,
        r.eps.map(|e| format!(" eps = {e}")).unwrap_or_default(),
        r.residual,
        r.newton_steps,
        r.sweeps,
        r.free_boundary,
        if r.converged { "" } else { " (NOT CONVERGED)" }
    )
}

fn cmd_solve(ctx: &mut Ctx<'_>) -> Result<i32> {
    let problem = ctx.cfg.problem()?;
    let params = ctx.cfg.params()?;
    let opts = ctx.cfg.solver_options()?;
    let eps = ctx.cfg.eps()?;
    let theta = ctx.cfg.theta_variant()?;
    let catalog = ctx.cfg.catalog()?.as_str();

    let op = DiscreteOperator::new(*problem.grid(), params)?;
    let sol = solve_vi(&op, &problem, &opts)?;
    ctx.say(summarize(&sol));
    ctx.write(
        Report::Solve(&sol),
        Format::Json,
        report_file_name(catalog, "solve", params.p, params.s, Format::Json),
    )?;
    let mut converged = sol.converged;
    if let Some(eps) = eps {
        let pen = PenaltyFn::new(eps, theta)?;
        let ps = solve_penalized(&op, &problem, &pen, &opts)?;
        ctx.say(summarize(&ps));
        ctx.write(
            Report::Solve(&ps),
            Format::Json,
            report_file_name(catalog, "penalized", params.p, params.s, Format::Json),
        )?;
        converged &= ps.converged;
    }
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn finish_sweep(ctx: &mut Ctx<'_>, report: &SweepReport, catalog: &str, p: f64, sigma: f64) -> Result<i32> {
    for f in ctx.cfg.formats()? {
        ctx.write(
            Report::Sweep(report),
            f,
            report_file_name(catalog, report.kind.file_tag(), p, sigma, f),
        )?;
    }
    for (metric, fit) in &report.rate_fits {
        ctx.say(format!(
            "  rate {metric:<12} slope {:.4}  R^2 {:.4}",
            fit.slope, fit.r_squared
        ));
    }
    if report.all_converged() {
        Ok(EXIT_OK)
    } else {
        ctx.say(format!("non-converged rows: {:?}", report.flagged));
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_sweep_eps(ctx: &mut Ctx<'_>) -> Result<i32> {
    let eps_list = ctx.cfg.eps_list()?;
    let problem = ctx.cfg.problem()?;
    let params = ctx.cfg.params()?;
    let opts = ctx.cfg.sweep_options()?;
    let report = run_eps_sweep(&problem, params, &eps_list, &opts)?;
    ctx.say(format!(
        "{} eps sweep, s = {}, p = {}: {} rows",
        problem.id,
        params.s,
        params.p,
        report.rows.len()
    ));
    finish_sweep(ctx, &report, &problem.id, params.p, params.s)
}

fn cmd_sweep_s(ctx: &mut Ctx<'_>) -> Result<i32> {
    let s_list = ctx.cfg.s_list()?;
    let sigma = ctx.cfg.sigma()?;
    let r = ctx.cfg.order_r()?;
    let p = ctx.cfg.p()?;
    let problem = ctx.cfg.problem()?;
    let opts = ctx.cfg.sweep_options()?;
    let report = run_s_sweep(&problem, p, &s_list, sigma, r, &opts)?;
    ctx.say(format!(
        "{} s sweep, p = {p}, sigma = {sigma}, r = {r}: {} rows",
        problem.id,
        report.rows.len()
    ));
    finish_sweep(ctx, &report, &problem.id, p, sigma)
}

fn run_check(ctx: &mut Ctx<'_>, which: &str) -> Result<CheckOutcome> {
    let cfg = &ctx.cfg;
    match which {
        "pineq" => Ok(checks::check_pineq(ctx.seed, cfg.check.pineq_pairs, &cfg.check.pineq_p)),
        "coercivity" => {
            let grid = crate::grid::Grid::new(cfg.domain.a, cfg.domain.b, cfg.check.coercivity_n_cells)
                .map_err(|e| Error::config("check.coercivity_n_cells", e.to_string()))?;
            checks::check_coercivity(
                grid,
                ctx.seed,
                cfg.check.coercivity_pairs,
                &cfg.check.coercivity_s,
                &cfg.check.coercivity_p,
            )
        }
        "bbm" => checks::check_bbm(cfg.bbm_function()?, cfg.bbm.p, &cfg.bbm.s_list, cfg.bbm.rel_tol),
        "lewy-stampacchia" => checks::check_lewy_stampacchia(&cfg.problem()?, cfg.params()?, &cfg.solver_options()?),
        "theta-sandwich" => {
            let problem = cfg.problem()?;
            let op = DiscreteOperator::new(*problem.grid(), cfg.params()?)?;
            let sol = solve_vi(&op, &problem, &cfg.solver_options()?)?;
            checks::theta_sandwich(&sol, &problem)
        }
        other => Err(Error::config(
            "check",
            format!("unknown check `{other}`, expected one of {}", CHECK_NAMES.join(", ")),
        )),
    }
}

fn cmd_check(ctx: &mut Ctx<'_>, which: &str) -> Result<i32> {
    let names: Vec<&str> = if which == "all" {
        CHECK_NAMES[..5].to_vec()
    } else {
        vec![which]
    };
    if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(n)) {
        return Err(Error::config(
            "check",
            format!("unknown check `{bad}`, expected one of {}", CHECK_NAMES.join(", ")),
        ));
    }
    let mut passed = true;
    for name in names {
        let outcome = run_check(ctx, name)?;
        passed &= outcome.passed;
        ctx.say(outcome.to_string().trim_end());
    }
    Ok(if passed { EXIT_OK } else { EXIT_PROPERTY })
}

fn cmd_bbm(ctx: &mut Ctx<'_>) -> Result<i32> {
    let func = ctx.cfg.bbm_function()?;
    let b = ctx.cfg.bbm.clone();
    let table = bbm_check(func, b.p, &b.s_list, b.rel_tol)?;
    ctx.say(format!(
        "{func}, p = {}: gradient norm^p = {:.10}",
        b.p,
        table.rows.first().map_or(f64::NAN, |r| r.gradient_norm_p)
    ));
    for r in &table.rows {
        ctx.say(format!(
            "  s = {:<8} seminorm^p = {:.10}  gap = {:.3e}",
            r.s, r.seminorm_p, r.rel_gap
        ));
    }
    ctx.say(format!("final relative gap {:.3e}", table.final_gap));
    for f in ctx.cfg.formats()? {
        ctx.write(
            Report::Bbm(&table),
            f,
            report_file_name(&func.to_string(), "bbm", b.p, 1.0, f),
        )?;
    }
    Ok(if table.rows.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

/// Convenience for tests: runs with a config file and output directory.
pub fn run_with(config: &Path, out_dir: &Path, rest: &[&str], out: &mut dyn Write) -> i32 {
    let mut args: Vec<OsString> = vec![
        "fracobs".into(),
        "--config".into(),
        config.into(),
        "--out".into(),
        out_dir.into(),
    ];
    args.extend(rest.iter().map(OsString::from));
    run(args, out)
}
