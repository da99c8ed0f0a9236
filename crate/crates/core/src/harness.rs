//! Parameter sweeps in `eps` and `s`, their comparison metrics, and report
//! output.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_rate, RateFit};
use crate::free_boundary::{
    coincidence_set, free_boundary, hausdorff_distance, hausdorff_points, holder_seminorm, lebesgue_distance,
    lewy_stampacchia_residual, recover_quasi_characteristic, QuasiCharacteristic,
};
use crate::grid::{FractionalParams, GridFunction, ProblemSpec};
use crate::operator::{
    gradient_norm, seminorm_quadrature, seminorm_weights, weighted_seminorm, DiscreteOperator, KernelWeights,
    QuadratureFn,
};
use crate::solver::{
    gap_function, penalty_coefficient, solve_penalized, solve_vi, PenaltyFn, SolveReport, SolverOptions, ThetaVariant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    EpsSweep,
    SSweep,
}

impl SweepKind {
    pub fn file_tag(&self) -> &'static str {
        match self {
            SweepKind::EpsSweep => "eps",
            SweepKind::SSweep => "s",
        }
    }
}

/// Where the set metrics of a sweep are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowPolicy {
    /// Restrict `d_L` and `d_H_fb` to the problem window when it carries a
    /// nondegeneracy bound (`lambda > 0`), use the whole domain otherwise.
    #[default]
    Auto,
    Full,
}

impl FromStr for WindowPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(WindowPolicy::Auto),
            "full" => Ok(WindowPolicy::Full),
            _ => Err(Error::config("study.window_policy", format!("unknown policy `{s}`"))),
        }
    }
}

/// Extra values of a row that are not part of the CSV table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RowExtras {
    /// `d_L` and `d_H_fb` over the whole domain.
    pub d_l_full: f64,
    pub d_h_fb_full: f64,
    /// `d_L` with both thresholds scaled by 1/10 and by 10.
    pub d_l_tol_lo: f64,
    pub d_l_tol_hi: f64,
    pub residual: f64,
    pub min_u: f64,
    /// Derived penalization bound (eps sweeps, `p >= 2`).
    pub bound: Option<f64>,
    /// `C_p eps^{1/p}` with `C_p = 2^{-2/p} (C_theta ||zeta||_1)^{1/p}` (eps sweeps,
    /// `p >= 2`); reported only.
    pub cp_bound: Option<f64>,
    pub free_boundary: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub param: f64,
    pub sup_diff: f64,
    pub lp_diff: f64,
    pub wr_diff: f64,
    #[serde(rename = "d_L")]
    pub d_l: f64,
    #[serde(rename = "d_H_coin")]
    pub d_h_coin: f64,
    #[serde(rename = "d_H_fb")]
    pub d_h_fb: f64,
    pub theta_gap_1: f64,
    pub theta_gap_2: f64,
    pub ls_residual: f64,
    pub holder_beta: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub extras: RowExtras,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "param",
    "sup_diff",
    "lp_diff",
    "wr_diff",
    "d_L",
    "d_H_coin",
    "d_H_fb",
    "theta_gap_1",
    "theta_gap_2",
    "ls_residual",
    "holder_beta",
    "sweeps",
];

impl MetricRow {
    /// Metric values by CSV column name (without `param` and `sweeps`).
    pub fn metrics(&self) -> [(&'static str, f64); 10] {
        [
            ("sup_diff", self.sup_diff),
            ("lp_diff", self.lp_diff),
            ("wr_diff", self.wr_diff),
            ("d_L", self.d_l),
            ("d_H_coin", self.d_h_coin),
            ("d_H_fb", self.d_h_fb),
            ("theta_gap_1", self.theta_gap_1),
            ("theta_gap_2", self.theta_gap_2),
            ("ls_residual", self.ls_residual),
            ("holder_beta", self.holder_beta),
        ]
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub problem: String,
    pub fixed: BTreeMap<String, f64>,
    pub rows: Vec<MetricRow>,
    /// Log-log fits of each metric against `eps` (eps sweeps) or `|s - sigma|`
    /// (s sweeps), over converged rows; degenerate fits are omitted.
    pub rate_fits: BTreeMap<String, RateFit>,
    /// Parameters of rows whose solve did not converge.
    pub flagged: Vec<f64>,
}

impl SweepReport {
    pub fn all_converged(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.metric(name)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub theta: ThetaVariant,
    pub warm_start: bool,
    pub window_policy: WindowPolicy,
    pub holder_beta: f64,
    /// Defaults to the middle 90% of the domain.
    pub holder_window: Option<(f64, f64)>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solver: SolverOptions::default(),
            theta: ThetaVariant::Ramp,
            warm_start: true,
            window_policy: WindowPolicy::Auto,
            holder_beta: 0.1,
            holder_window: None,
        }
    }
}

/// How differences are measured in a sweep.
enum DiffNorm {
    Fractional(Box<KernelWeights>),
    Gradient,
}

impl DiffNorm {
    fn new(grid: &crate::grid::Grid, order: f64, p: f64) -> Result<Self> {
        if order >= 1.0 {
            Ok(DiffNorm::Gradient)
        } else if order == 0.0 {
            Err(Error::Domain("difference order must be positive".into()))
        } else {
            Ok(DiffNorm::Fractional(Box::new(seminorm_weights(grid, order, p)?)))
        }
    }

    fn eval(&self, v: &GridFunction, p: f64) -> Result<f64> {
        match self {
            DiffNorm::Fractional(w) => Ok(weighted_seminorm(w, v)?.value),
            DiffNorm::Gradient => Ok(gradient_norm(v.grid(), p, v)?.value),
        }
    }
}

fn lp_norm(v: &GridFunction, p: f64) -> f64 {
    let h = v.grid().h();
    (h * v.interior_values().iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Fixed test functions for the weak-* gaps, mapped from `(-1, 1)`.
fn test_functions(problem: &ProblemSpec, x: f64) -> (f64, f64) {
    let g = problem.grid();
    let xi = (2.0 * x - g.a() - g.b()) / (g.b() - g.a());
    ((0.5 * PI * xi).cos(), 1.0 - xi * xi)
}

struct Reference {
    report: SolveReport,
    theta: QuasiCharacteristic,
}

struct Comparator<'a> {
    problem: &'a ProblemSpec,
    p: f64,
    window: Option<(f64, f64)>,
    norm: DiffNorm,
    reference: Reference,
    holder_beta: f64,
    holder_window: (f64, f64),
}

const TOL_F: f64 = 1e-12;

impl<'a> Comparator<'a> {
    fn new(problem: &'a ProblemSpec, p: f64, order: f64, reference: SolveReport, opts: &SweepOptions) -> Result<Self> {
        let grid = *problem.grid();
        let window = match opts.window_policy {
            WindowPolicy::Auto if problem.lambda > 0.0 => Some(problem.omega),
            _ => None,
        };
        let theta = recover_quasi_characteristic(&reference, problem, TOL_F)?;
        let w = 0.05 * (grid.b() - grid.a());
        Ok(Comparator {
            problem,
            p,
            window,
            norm: DiffNorm::new(&grid, order, p)?,
            reference: Reference {
                report: reference,
                theta,
            },
            holder_beta: opts.holder_beta,
            holder_window: opts.holder_window.unwrap_or((grid.a() + w, grid.b() - w)),
        })
    }

    fn in_window(&self, x: f64) -> bool {
        self.window.is_none_or(|(l, r)| x >= l && x <= r)
    }

    fn row(&self, param: f64, sol: &SolveReport, op: &DiscreteOperator) -> Result<MetricRow> {
        let problem = self.problem;
        let grid = *problem.grid();
        let reference = &self.reference.report;
        let diff = sol.u.sub(&reference.u)?;
        let gap = gap_function(&sol.u, &problem.psi)?;
        let gap_ref = gap_function(&reference.u, &problem.psi)?;

        let coin = coincidence_set(&gap, sol.tol_u);
        let coin_ref = coincidence_set(&gap_ref, reference.tol_u);
        let fb = free_boundary(&coin).points;
        let fb_ref = free_boundary(&coin_ref).points;
        let fb_w: Vec<f64> = fb.iter().copied().filter(|&x| self.in_window(x)).collect();
        let fb_ref_w: Vec<f64> = fb_ref.iter().copied().filter(|&x| self.in_window(x)).collect();
        let d_l = lebesgue_distance(&coin.chi, &coin_ref.chi, self.window)?;
        let d_l_at = |scale: f64| -> Result<f64> {
            let a = coincidence_set(&gap, sol.tol_u * scale);
            let b = coincidence_set(&gap_ref, reference.tol_u * scale);
            lebesgue_distance(&a.chi, &b.chi, self.window)
        };

        let theta = recover_quasi_characteristic(sol, problem, TOL_F)?;
        let (mut g1, mut g2) = (0.0, 0.0);
        for i in grid.interior() {
            let x = grid.node(i);
            if self.in_window(x) && theta.valid_mask[i] && self.reference.theta.valid_mask[i] {
                let d = theta.theta.values()[i] - self.reference.theta.theta.values()[i];
                let (phi1, phi2) = test_functions(problem, x);
                g1 += d * phi1;
                g2 += d * phi2;
            }
        }
        let h = grid.h();

        Ok(MetricRow {
            param,
            sup_diff: diff.max_abs(),
            lp_diff: lp_norm(&diff, self.p),
            wr_diff: self.norm.eval(&diff, self.p)?,
            d_l,
            d_h_coin: hausdorff_distance(&coin.intervals, &coin_ref.intervals),
            d_h_fb: hausdorff_points(&fb_w, &fb_ref_w),
            theta_gap_1: (h * g1).abs(),
            theta_gap_2: (h * g2).abs(),
            ls_residual: lewy_stampacchia_residual(op, sol, problem)?,
            holder_beta: holder_seminorm(&sol.u, self.holder_beta, self.holder_window)?,
            sweeps: sol.total_iterations(),
            converged: sol.converged,
            extras: RowExtras {
                d_l_full: lebesgue_distance(&coin.chi, &coin_ref.chi, None)?,
                d_h_fb_full: hausdorff_points(&fb, &fb_ref),
                d_l_tol_lo: d_l_at(0.1)?,
                d_l_tol_hi: d_l_at(10.0)?,
                residual: sol.residual,
                min_u: sol.u.values().iter().copied().fold(f64::INFINITY, f64::min),
                bound: None,
                cp_bound: None,
                free_boundary: fb,
            },
        })
    }
}

fn fits(rows: &[MetricRow], x_of: impl Fn(f64) -> f64) -> BTreeMap<String, RateFit> {
    let mut out = BTreeMap::new();
    for (k, &name) in CSV_COLUMNS[1..11].iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.converged)
            .map(|r| (x_of(r.param), r.metrics()[k].1))
            .collect();
        if let Ok(f) = fit_rate(&pts) {
            out.insert(name.to_string(), f);
        }
    }
    out
}

fn check_strictly_monotone(list: &[f64], increasing: bool, key: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    let ok = list
        .windows(2)
        .all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] });
    if !ok {
        let dir = if increasing { "increasing" } else { "decreasing" };
        return Err(Error::config(key, format!("list must be strictly {dir}")));
    }
    Ok(())
}

/// `||g||_{L^1}` as `h sum |g_i|` over interior nodes.
fn l1(v: &GridFunction) -> f64 {
    v.grid().h() * v.interior_values().iter().map(|x| x.abs()).sum::<f64>()
}

/// Penalization sweep: compares `u_eps` against the obstacle solution at the
/// same `(s, p)` for every `eps`.
pub fn run_eps_sweep(
    problem: &ProblemSpec,
    params: FractionalParams,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport> {
    check_strictly_monotone(eps_list, false, "penalty.eps_list")?;
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::config("penalty.eps_list", "eps values must be positive"));
    }
    let grid = *problem.grid();
    let op = DiscreteOperator::new(grid, params)?;
    let cold = SolverOptions {
        initial: None,
        ..opts.solver.clone()
    };
    let reference = solve_vi(&op, problem, &cold)?;
    let p = params.p;
    let cmp = Comparator::new(problem, p, params.s, reference, opts)?;
    let zeta = penalty_coefficient(&op, problem)?;
    let zeta_l1 = l1(&zeta);
    let tol = opts.solver.tol;
    let c_theta = opts.theta.c_theta();

    let mut rows = Vec::new();
    let mut prev: Option<GridFunction> = None;
    for &eps in eps_list {
        let pen = PenaltyFn::new(eps, opts.theta)?;
        let so = SolverOptions {
            initial: if opts.warm_start { prev.clone() } else { None },
            ..cold.clone()
        };
        let sol = solve_penalized(&op, problem, &pen, &so)?;
        let mut row = cmp.row(eps, &sol, &op)?;
        if p >= 2.0 {
            row.extras.bound =
                Some(2f64.powf((p - 1.0) / p) * (c_theta * zeta_l1 * eps).powf(1.0 / p) + 4.0 * tol.powf(1.0 / p));
            row.extras.cp_bound = Some(2f64.powf(-2.0 / p) * (c_theta * zeta_l1).powf(1.0 / p) * eps.powf(1.0 / p));
        }
        prev = Some(sol.u.clone());
        rows.push(row);
    }
    let flagged = rows.iter().filter(|r| !r.converged).map(|r| r.param).collect();
    let mut fixed = BTreeMap::new();
    fixed.insert("s".into(), params.s);
    fixed.insert("p".into(), p);
    fixed.insert("n_cells".into(), grid.n_cells() as f64);
    fixed.insert("tol".into(), tol);
    fixed.insert("c_theta".into(), c_theta);
    Ok(SweepReport {
        kind: SweepKind::EpsSweep,
        problem: problem.id.clone(),
        fixed,
        rate_fits: fits(&rows, |e| e),
        rows,
        flagged,
    })
}

/// Sweep in `s` toward `sigma`, comparing against the solution at `sigma`
/// (the local operator when `sigma = 1`). Differences are measured in the
/// order-`r` seminorm.
pub fn run_s_sweep(
    problem: &ProblemSpec,
    p: f64,
    s_list: &[f64],
    sigma: f64,
    r: f64,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    check_strictly_monotone(s_list, true, "study.s_list")?;
    if s_list.iter().any(|&s| !(s > 0.0 && s <= 0.95)) {
        return Err(Error::config("study.s_list", "s values must lie in (0, 0.95]"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::config(
            "study.sigma",
            format!("sigma must lie in (0, 1], got {sigma}"),
        ));
    }
    if !(r > 0.0 && r < sigma) {
        return Err(Error::config("study.r", format!("need 0 < r < sigma, got r = {r}")));
    }
    let grid = *problem.grid();
    let cold = SolverOptions {
        initial: None,
        ..opts.solver.clone()
    };
    let ref_op = DiscreteOperator::new(grid, FractionalParams::new(sigma, p)?)?;
    let reference = solve_vi(&ref_op, problem, &cold)?;
    let cmp = Comparator::new(problem, p, r, reference, opts)?;

    let mut rows = Vec::new();
    let mut prev: Option<GridFunction> = None;
    for &s in s_list {
        let op = DiscreteOperator::new(grid, FractionalParams::new(s, p)?)?;
        let so = SolverOptions {
            initial: if opts.warm_start { prev.clone() } else { None },
            ..cold.clone()
        };
        let sol = solve_vi(&op, problem, &so)?;
        rows.push(cmp.row(s, &sol, &op)?);
        prev = Some(sol.u.clone());
    }
    let flagged = rows.iter().filter(|r| !r.converged).map(|r| r.param).collect();
    let mut fixed = BTreeMap::new();
    fixed.insert("p".into(), p);
    fixed.insert("sigma".into(), sigma);
    fixed.insert("r".into(), r);
    fixed.insert("n_cells".into(), grid.n_cells() as f64);
    fixed.insert("tol".into(), opts.solver.tol);
    fixed.insert("reference_residual".into(), cmp.reference.report.residual);
    Ok(SweepReport {
        kind: SweepKind::SSweep,
        problem: problem.id.clone(),
        fixed,
        rate_fits: fits(&rows, |s| (sigma - s).abs()),
        rows,
        flagged,
    })
}

/// Default difference order: `0.5` for `sigma = 1`, `sigma - 0.2` otherwise.
pub fn default_order(sigma: f64) -> f64 {
    if sigma >= 1.0 {
        0.5
    } else {
        (sigma - 0.2).max(0.5 * sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbmRow {
    pub s: f64,
    pub seminorm_p: f64,
    pub gradient_norm_p: f64,
    pub rel_gap: f64,
    pub quad_rel_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbmTable {
    pub function: QuadratureFn,
    pub p: f64,
    pub rows: Vec<BbmRow>,
    pub final_gap: f64,
}

impl BbmTable {
    /// Whether `|quad - grad|` is nonincreasing down the table.
    pub fn gap_is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].rel_gap <= w[0].rel_gap)
    }
}

/// Continuum seminorms against the gradient norm as `s` increases.
pub fn bbm_check(func: QuadratureFn, p: f64, s_list: &[f64], rel_tol: f64) -> Result<BbmTable> {
    check_strictly_monotone(s_list, true, "bbm.s_list")?;
    let grad = func.gradient_norm_p(p);
    let rows = s_list
        .iter()
        .map(|&s| {
            let q = seminorm_quadrature(func, s, p, rel_tol)?;
            Ok(BbmRow {
                s,
                seminorm_p: q.value_p,
                gradient_norm_p: grad,
                rel_gap: (q.value_p - grad).abs() / grad,
                quad_rel_error: q.rel_error,
                converged: q.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let final_gap = rows.last().map(|r| r.rel_gap).unwrap_or(f64::NAN);
    Ok(BbmTable {
        function: func,
        p,
        rows,
        final_gap,
    })
}

// ---------------------------------------------------------------------------
// output

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config("output.format", format!("unknown format `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Anything [`emit_report`] can write.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Sweep(&'a SweepReport),
    Solve(&'a SolveReport),
    Bbm(&'a BbmTable),
}

/// Writes every float with 17 significant digits; non-finite values become
/// `null`.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Domain(format!("JSON serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct ParamsView {
    s: f64,
    p: f64,
}

#[derive(Serialize)]
struct SolveView<'a> {
    problem: &'a str,
    params: ParamsView,
    eps: Option<f64>,
    residual: f64,
    sweeps: usize,
    newton_steps: usize,
    active_set_iterations: usize,
    converged: bool,
    tol: f64,
    tol_u: f64,
    coincidence_intervals: &'a [(f64, f64)],
    free_boundary: &'a [f64],
    x: Vec<f64>,
    u: &'a [f64],
    operator: &'a [f64],
}

fn solve_view(r: &SolveReport) -> SolveView<'_> {
    SolveView {
        problem: &r.problem_id,
        params: ParamsView {
            s: r.params.s,
            p: r.params.p,
        },
        eps: r.eps,
        residual: r.residual,
        sweeps: r.sweeps,
        newton_steps: r.newton_steps,
        active_set_iterations: r.active_set_iterations,
        converged: r.converged,
        tol: r.tol,
        tol_u: r.tol_u,
        coincidence_intervals: &r.coincidence_intervals,
        free_boundary: &r.free_boundary,
        x: r.u.grid().nodes(),
        u: r.u.values(),
        operator: r.operator_values.values(),
    }
}

impl Report<'_> {
    pub fn to_csv(&self) -> String {
        match self {
            Report::Sweep(s) => {
                let mut out = CSV_COLUMNS.join(",");
                out.push('\n');
                for r in &s.rows {
                    let mut cells: Vec<String> = vec![num(r.param)];
                    cells.extend(r.metrics().iter().map(|(_, v)| num(*v)));
                    cells.push(r.sweeps.to_string());
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Report::Solve(r) => {
                let mut out = String::from("index,x,u,operator\n");
                let g = r.u.grid();
                for i in 0..g.n_nodes() {
                    out.push_str(&format!(
                        "{i},{},{},{}\n",
                        num(g.node(i)),
                        num(r.u.values()[i]),
                        num(r.operator_values.values()[i])
                    ));
                }
                out
            }
            Report::Bbm(t) => {
                let mut out = String::from("s,seminorm_p,gradient_norm_p,rel_gap,quad_rel_error,converged\n");
                for r in &t.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        num(r.s),
                        num(r.seminorm_p),
                        num(r.gradient_norm_p),
                        num(r.rel_gap),
                        num(r.quad_rel_error),
                        r.converged
                    ));
                }
                out
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            Report::Sweep(s) => to_json_string(s),
            Report::Solve(r) => to_json_string(&solve_view(r)),
            Report::Bbm(t) => to_json_string(t),
        }
    }
}

pub fn emit_report(report: Report<'_>, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `{catalog}_{kind}_{p}_{sigma}.{ext}`.
pub fn report_file_name(catalog: &str, kind: &str, p: f64, sigma: f64, format: Format) -> String {
    format!("{catalog}_{kind}_{p}_{sigma}.{format}")
}
