//! Seeded property suites behind `fracobs check`.

use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::free_boundary::{lewy_stampacchia_residual, recover_quasi_characteristic};
use crate::grid::{FractionalParams, Grid, GridFunction, ProblemSpec};
use crate::harness::bbm_check;
use crate::operator::{gagliardo_seminorm, phi, DiscreteOperator, QuadratureFn};
use crate::solver::{gap_function, solve_vi, SolveReport, SolverOptions};

/// Only the first few failures of a suite are kept.
const MAX_DUMP: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Counterexample dumps, capped.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed: true,
            cases: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        if self.failures.len() < MAX_DUMP {
            self.failures.push(msg);
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        writeln!(f, "{}: {verdict} ({} cases)", self.name, self.cases)?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        for c in &self.failures {
            writeln!(f, "  counterexample: {c}")?;
        }
        Ok(())
    }
}

/// Lower bound for `(phi(a) - phi(b)) (a - b)`.
pub fn pineq_lower_bound(a: f64, b: f64, p: f64) -> f64 {
    if p >= 2.0 {
        2f64.powf(2.0 - p) * (a - b).abs().powf(p)
    } else {
        (p - 1.0) * (a - b).powi(2) / (a.abs() + b.abs()).powf(2.0 - p)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    sign * 10f64.powf(rng.random_range(-3.0..3.0))
}

/// The scalar monotonicity inequality on random pairs, plus the equality
/// pairs `a = -b`.
pub fn check_pineq(seed: u64, n_pairs: usize, p_list: &[f64]) -> CheckOutcome {
    let mut out = CheckOutcome::new("pineq");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &p in p_list {
        let mut equal = 0;
        let mut antipodal = 0;
        let mut pairs: Vec<(f64, f64)> = (0..n_pairs)
            .map(|_| (log_uniform(&mut rng), log_uniform(&mut rng)))
            .collect();
        pairs.extend([(1.0, -1.0), (0.25, -0.25), (-3.0, 3.0)]);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            out.cases += 1;
            let lhs = (phi(a, p) - phi(b, p)) * (a - b);
            let rhs = pineq_lower_bound(a, b, p);
            let slack = 1e-12 * lhs.abs().max(rhs.abs());
            if lhs < rhs - slack {
                out.fail(format!("p = {p}, a = {a:e}, b = {b:e}: lhs {lhs:e} < rhs {rhs:e}"));
            }
            let is_equal = (lhs - rhs).abs() <= slack;
            if is_equal {
                equal += 1;
                if a == -b {
                    antipodal += 1;
                }
            }
            if p == 2.0 && !is_equal {
                out.fail(format!(
                    "p = 2, a = {a:e}, b = {b:e}: expected equality, lhs {lhs:e}, rhs {rhs:e}"
                ));
            }
            if p >= 2.0 && k >= n_pairs && !is_equal {
                out.fail(format!(
                    "p = {p}, a = {a:e} = -b: expected equality, lhs {lhs:e}, rhs {rhs:e}"
                ));
            }
        }
        out.notes.push(format!(
            "p = {p}: {equal} equality cases, {antipodal} of them at a = -b"
        ));
    }
    out
}

fn noise(grid: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    let kind = rng.random_range(0..3);
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    let vals: Vec<f64> = match kind {
        // white noise
        0 => grid.interior().map(|_| scale * rng.random_range(-1.0..1.0)).collect(),
        // a few smooth modes
        1 => {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            grid.interior()
                .map(|i| {
                    let xi = (grid.node(i) - grid.a()) / (grid.b() - grid.a());
                    scale
                        * c.iter()
                            .enumerate()
                            .map(|(k, ck)| ck * ((k + 1) as f64 * std::f64::consts::PI * xi).sin())
                            .sum::<f64>()
                })
                .collect()
        }
        // sparse spikes
        _ => grid
            .interior()
            .map(|_| {
                if rng.random_bool(0.1) {
                    scale * rng.random_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect(),
    };
    GridFunction::from_interior(grid, &vals).expect("interior length")
}

fn dot(grid: &Grid, a: &GridFunction, b: &GridFunction) -> f64 {
    grid.h() * grid.interior().map(|i| a.values()[i] * b.values()[i]).sum::<f64>()
}

/// Strong coercivity (for `p >= 2`) and strict T-monotonicity of the discrete
/// operator on random pairs.
pub fn check_coercivity(grid: Grid, seed: u64, n_pairs: usize, s_list: &[f64], p_list: &[f64]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("coercivity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &s in s_list {
        for &p in p_list {
            let op = DiscreteOperator::new(grid, FractionalParams::new(s, p)?)?;
            let mut worst = f64::INFINITY;
            for _ in 0..n_pairs {
                let u = noise(grid, &mut rng);
                let v = noise(grid, &mut rng);
                let w = u.sub(&v)?;
                let dau = op.apply(&u)?.sub(&op.apply(&v)?)?;
                out.cases += 1;
                if p >= 2.0 && w.max_abs() > 0.0 {
                    let lhs = dot(&grid, &dau, &w);
                    let rhs = 2f64.powf(1.0 - p) * gagliardo_seminorm(&grid, s, p, &w)?.value.powf(p);
                    worst = worst.min(lhs / rhs);
                    if lhs < rhs * (1.0 - 1e-10) {
                        out.fail(format!("s = {s}, p = {p}: <Au - Av, u - v> = {lhs:e} < {rhs:e}"));
                    }
                }
                let wp = w.map(|x| x.max(0.0));
                if wp.max_abs() > 0.0 {
                    let t = dot(&grid, &dau, &wp);
                    if !(t > 0.0) {
                        out.fail(format!("s = {s}, p = {p}: <Au - Av, (u - v)+> = {t:e} is not positive"));
                    }
                }
            }
            if p >= 2.0 {
                out.notes.push(format!(
                    "s = {s}, p = {p}: smallest ratio to the coercivity bound {worst:.6}"
                ));
            }
        }
    }
    Ok(out)
}

/// Seminorm quadrature against the gradient norm: final gap within 2% and
/// shrinking down the table.
pub fn check_bbm(func: QuadratureFn, p: f64, s_list: &[f64], rel_tol: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("bbm");
    let table = bbm_check(func, p, s_list, rel_tol)?;
    out.notes.push(format!(
        "{func}, p = {p}, gradient norm^p = {:.10}",
        table.rows.first().map_or(f64::NAN, |r| r.gradient_norm_p)
    ));
    for r in &table.rows {
        out.cases += 1;
        out.notes.push(format!(
            "s = {:<8} seminorm^p = {:.10}  gap = {:.3e}  quad err = {:.1e}",
            r.s, r.seminorm_p, r.rel_gap, r.quad_rel_error
        ));
        if !r.converged {
            out.fail(format!("s = {}: quadrature did not reach rel_tol {rel_tol:e}", r.s));
        }
    }
    if !(table.final_gap <= 0.02) {
        out.fail(format!("final relative gap {:.4e} exceeds 2%", table.final_gap));
    }
    if !table.gap_is_monotone() {
        out.fail("gap does not shrink monotonically".into());
    }
    Ok(out)
}

/// Solves `problem` and checks the two-sided operator bound to `10 tol`.
pub fn check_lewy_stampacchia(
    problem: &ProblemSpec,
    params: FractionalParams,
    opts: &SolverOptions,
) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("lewy-stampacchia");
    let op = DiscreteOperator::new(*problem.grid(), params)?;
    let sol = solve_vi(&op, problem, opts)?;
    let res = lewy_stampacchia_residual(&op, &sol, problem)?;
    out.cases = 1;
    out.notes.push(format!(
        "{} s = {} p = {}: residual {res:.3e}, solver residual {:.3e}",
        problem.id, params.s, params.p, sol.residual
    ));
    if !sol.converged {
        out.fail(format!("solve did not converge (residual {:e})", sol.residual));
    }
    if !(res <= 10.0 * opts.tol) {
        out.fail(format!("residual {res:e} exceeds 10 tol = {:e}", 10.0 * opts.tol));
    }
    Ok(out)
}

/// Threshold on `f^-` below which the quasi-characteristic function is not
/// recovered.
pub const THETA_TOL_F: f64 = 1e-12;

/// The sandwich `chi_{u > tol_u} <= theta <= 1` on valid nodes, with slack
/// `10^3 tol`.
pub fn theta_sandwich(report: &SolveReport, problem: &ProblemSpec) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("theta-sandwich");
    let q = recover_quasi_characteristic(report, problem, THETA_TOL_F)?;
    let gap = gap_function(&report.u, &problem.psi)?;
    let slack = 1e3 * report.tol;
    let grid = problem.grid();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in grid.interior().filter(|&i| q.valid_mask[i]) {
        out.cases += 1;
        let t = q.theta.values()[i];
        lo = lo.min(t);
        hi = hi.max(t);
        let x = grid.node(i);
        if !(t >= -slack && t <= 1.0 + slack) {
            out.fail(format!("{} x = {x}: theta = {t:e} outside [0, 1]", problem.id));
        }
        if gap.values()[i] > report.tol_u && !(t >= 1.0 - slack) {
            out.fail(format!("{} x = {x}: theta = {t:e} < 1 where u > tol_u", problem.id));
        }
    }
    out.notes.push(format!(
        "{} s = {} p = {}: theta in [{lo:.3e}, {hi:.6}] on {} valid nodes",
        problem.id, report.params.s, report.params.p, out.cases
    ));
    if !report.converged {
        out.fail(format!("solve did not converge (residual {:e})", report.residual));
    }
    Ok(out)
}

/// Folds several outcomes of one suite into one.
pub fn merge(name: &str, parts: impl IntoIterator<Item = CheckOutcome>) -> CheckOutcome {
    let mut out = CheckOutcome::new(name);
    for p in parts {
        out.passed &= p.passed;
        out.cases += p.cases;
        out.notes.extend(p.notes);
        for f in p.failures {
            if out.failures.len() < MAX_DUMP {
                out.failures.push(f);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn pineq_passes_and_reports_equalities() {
        let out = check_pineq(42, 500, &[1.5, 2.0, 3.0, 4.0]);
        assert!(out.passed, "{out}");
        assert!(out.notes[1].starts_with("p = 2: 503 equality cases"), "{:?}", out.notes);
        assert!(out.notes[2].contains("3 of them at a = -b"), "{:?}", out.notes);
    }

    #[test]
    fn coercivity_small() {
        let g = build_grid(-1.0, 1.0, 16).unwrap();
        let out = check_coercivity(g, 7, 20, &[0.4], &[1.5, 2.0, 3.0]).unwrap();
        assert!(out.passed, "{out}");
        assert_eq!(out.cases, 60);
    }

    #[test]
    fn same_seed_same_outcome() {
        let g = build_grid(-1.0, 1.0, 16).unwrap();
        let a = check_coercivity(g, 3, 5, &[0.5], &[3.0]).unwrap();
        let b = check_coercivity(g, 3, 5, &[0.5], &[3.0]).unwrap();
        assert_eq!(a, b);
    }
}
