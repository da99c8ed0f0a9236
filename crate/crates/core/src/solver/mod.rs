//! Obstacle, penalized and semilinear solvers.
//!
//! The default method minimizes the convex discrete energy with a primal-dual
//! active set loop around damped Newton steps, started from a coarse-to-fine
//! sequence of grids, and finishes with nodal Gauss-Seidel sweeps. The plain
//! projected Gauss-Seidel iteration is available as
//! [`SolverMethod::GaussSeidel`]; both converge to the same unique minimizer.

mod engine;
mod penalty;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use penalty::{PenaltyFn, ThetaVariant};

use crate::error::{Error, Result};
use crate::free_boundary::{coincidence_set, default_tol_u, free_boundary};
use crate::grid::{pos_neg_split, FractionalParams, GridFunction, ProblemSpec};
use crate::operator::DiscreteOperator;
use engine::{Counters, Reaction, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    #[default]
    Newton,
    GaussSeidel,
}

impl FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "newton" => Ok(SolverMethod::Newton),
            "gauss-seidel" => Ok(SolverMethod::GaussSeidel),
            _ => Err(Error::config("solver.method", format!("unknown method `{s}`"))),
        }
    }
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::Newton => "newton",
            SolverMethod::GaussSeidel => "gauss-seidel",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub method: SolverMethod,
    /// Starting iterate; a cold start is used when absent.
    pub initial: Option<GridFunction>,
    /// Coincidence threshold; [`default_tol_u`] when absent.
    pub tol_u: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_sweeps: 100_000,
            method: SolverMethod::Newton,
            initial: None,
            tol_u: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config(
                "solver.tol",
                format!("tol must be positive, got {}", self.tol),
            ));
        }
        if let Some(t) = self.tol_u {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config(
                    "problem.tol_u",
                    format!("tol_u must be positive, got {t}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: GridFunction,
    /// `A u` at the returned iterate (zero at the Dirichlet nodes).
    pub operator_values: GridFunction,
    pub residual: f64,
    /// Nodal Gauss-Seidel sweeps.
    pub sweeps: usize,
    pub newton_steps: usize,
    pub active_set_iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub params: FractionalParams,
    pub problem_id: String,
    pub eps: Option<f64>,
    pub tol: f64,
    /// Threshold used for the coincidence set below.
    pub tol_u: f64,
    pub coincidence_intervals: Vec<(f64, f64)>,
    pub free_boundary: Vec<f64>,
}

impl SolveReport {
    pub fn total_iterations(&self) -> usize {
        self.sweeps + self.newton_steps
    }
}

fn interior_of(g: &GridFunction) -> Vec<f64> {
    g.interior_values().to_vec()
}

fn run(
    sys: &System,
    opts: &SolverOptions,
    psi: Option<&GridFunction>,
    problem_id: &str,
    eps: Option<f64>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let grid = *sys.op.grid();
    if let Some(init) = &opts.initial {
        grid.check_same(init.grid(), "initial iterate")?;
    }
    let initial = opts.initial.as_ref().map(interior_of);
    let mut counters = Counters::default();
    let (u, residual) = match opts.method {
        SolverMethod::Newton => sys.solve_newton(initial, opts.tol, opts.max_sweeps, &mut counters)?,
        SolverMethod::GaussSeidel => sys.solve_gauss_seidel(initial, opts.tol, opts.max_sweeps, &mut counters),
    };
    finish(sys, u, residual, counters, opts, psi, problem_id, eps, start)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    sys: &System,
    u: Vec<f64>,
    residual: f64,
    counters: Counters,
    opts: &SolverOptions,
    psi: Option<&GridFunction>,
    problem_id: &str,
    eps: Option<f64>,
    start: Instant,
) -> Result<SolveReport> {
    let grid = *sys.op.grid();
    let mut au = vec![0.0; u.len()];
    sys.op.apply_into(&u, &mut au);
    let u = GridFunction::from_interior(grid, &u)?;
    let operator_values = GridFunction::from_interior(grid, &au)?;
    let gap = match psi {
        Some(psi) => gap_function(&u, psi)?,
        None => u.clone(),
    };
    let p = sys.op.p();
    let tol = opts.tol;
    let tol_u = opts.tol_u.unwrap_or_else(|| default_tol_u(tol, p, gap.max_abs()));
    let coin = coincidence_set(&gap, tol_u);
    let fb = free_boundary(&coin);
    Ok(SolveReport {
        u,
        operator_values,
        residual,
        sweeps: counters.sweeps,
        newton_steps: counters.newton_steps,
        active_set_iterations: counters.active_set_iterations,
        converged: residual <= tol,
        wall_time: start.elapsed(),
        params: *sys.op.params(),
        problem_id: problem_id.to_string(),
        eps,
        tol,
        tol_u,
        coincidence_intervals: coin.intervals,
        free_boundary: fb.points,
    })
}

/// `u - psi` on interior nodes, zero at the Dirichlet nodes.
pub fn gap_function(u: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    let mut g = u.sub(psi)?;
    g.zero_boundary();
    Ok(g)
}

/// `psi` with its Dirichlet values replaced by zero, as a solution-space
/// element.
pub fn obstacle_extension(psi: &GridFunction) -> GridFunction {
    let mut p = psi.clone();
    p.zero_boundary();
    p
}

/// Solves the discrete obstacle problem: minimize the energy minus `h sum f u`
/// over `u >= psi`.
pub fn solve_vi(op: &DiscreteOperator, problem: &ProblemSpec, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    op.grid().check_same(problem.grid(), "solve_vi")?;
    let psi = problem.psi.interior_values().to_vec();
    let f = problem.f.interior_values();
    let sys = System {
        op: op.clone(),
        rhs: f.to_vec(),
        reaction: Reaction::None,
        lower: Some(psi.clone()),
    };
    if f.iter().all(|&v| v <= 0.0) && psi.iter().all(|&v| v <= 0.0) && opts.initial.is_none() {
        // u = 0 satisfies u >= psi and A0 - f = -f >= 0 with zero contact gap
        // wherever psi = 0, and zero residual wherever psi < 0.
        let u = vec![0.0; sys.m()];
        let residual = sys.residual_norm(&u);
        if residual == 0.0 {
            return finish(
                &sys,
                u,
                0.0,
                Counters::default(),
                opts,
                Some(&problem.psi),
                &problem.id,
                None,
                Instant::now(),
            );
        }
    }
    run(&sys, opts, Some(&problem.psi), &problem.id, None)
}

/// Coefficient `zeta = (A psi~ - f)^+` of the penalty for a general obstacle;
/// equals `f^-` when `psi = 0`.
pub fn penalty_coefficient(op: &DiscreteOperator, problem: &ProblemSpec) -> Result<GridFunction> {
    let apsi = op.apply(&obstacle_extension(&problem.psi))?;
    let mut z = apsi.zip_map(&problem.f, |a, f| (a - f).max(0.0))?;
    z.zero_boundary();
    Ok(z)
}

/// Solves `A u + zeta theta_eps(u - psi) = f + zeta`, the bounded
/// penalization of the obstacle problem.
pub fn solve_penalized(
    op: &DiscreteOperator,
    problem: &ProblemSpec,
    pen: &PenaltyFn,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    op.grid().check_same(problem.grid(), "solve_penalized")?;
    let zeta = if problem.has_obstacle() {
        penalty_coefficient(op, problem)?
    } else {
        pos_neg_split(&problem.f).1
    };
    let zeta_i = zeta.interior_values().to_vec();
    let rhs: Vec<f64> = problem
        .f
        .interior_values()
        .iter()
        .zip(&zeta_i)
        .map(|(f, z)| f + z)
        .collect();
    let sys = System {
        op: op.clone(),
        rhs,
        reaction: Reaction::Penalty {
            coef: zeta_i,
            shift: problem.psi.interior_values().to_vec(),
            pen: *pen,
        },
        lower: None,
    };
    run(&sys, opts, Some(&problem.psi), &problem.id, Some(pen.eps))
}

/// Monotone nonlinearity `G(z)` of the semilinear problem `A u = g + G(u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SemilinearTerm {
    None,
    /// `G(z) = -c z`, `c >= 0`.
    LinearDecay {
        c: f64,
    },
    /// `G(z) = -f^- theta_eps(z)`.
    Penalty {
        f_minus: GridFunction,
        pen: PenaltyFn,
    },
}

impl SemilinearTerm {
    /// Builds a term from its catalog name.
    pub fn from_id(id: &str, c: f64, f_minus: Option<GridFunction>, pen: Option<PenaltyFn>) -> Result<Self> {
        let term = match id.trim().to_ascii_lowercase().as_str() {
            "none" => SemilinearTerm::None,
            "linear-decay" => SemilinearTerm::LinearDecay { c },
            "penalty" => SemilinearTerm::Penalty {
                f_minus: f_minus.ok_or_else(|| Error::config("semilinear.f_minus", "penalty term needs f_minus"))?,
                pen: pen.ok_or_else(|| Error::config("penalty.eps", "penalty term needs eps"))?,
            },
            _ => return Err(Error::config("semilinear.g_id", format!("unknown term `{id}`"))),
        };
        term.validate()?;
        Ok(term)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SemilinearTerm::LinearDecay { c } if !(*c >= 0.0 && c.is_finite()) => Err(Error::config(
                "semilinear.c",
                format!("linear decay needs c >= 0 for monotonicity, got {c}"),
            )),
            SemilinearTerm::Penalty { f_minus, .. } if f_minus.values().iter().any(|&v| !(v >= 0.0)) => Err(
                Error::config("semilinear.f_minus", "penalty coefficient must be nonnegative"),
            ),
            _ => Ok(()),
        }
    }
}

/// Solves `A u = g + G(u)` with `G` nonincreasing.
pub fn solve_semilinear(
    op: &DiscreteOperator,
    g: &GridFunction,
    term: &SemilinearTerm,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    term.validate()?;
    op.grid().check_same(g.grid(), "solve_semilinear")?;
    let m = op.grid().n_interior();
    let (reaction, eps) = match term {
        SemilinearTerm::None => (Reaction::None, None),
        SemilinearTerm::LinearDecay { c } => (Reaction::Linear { c: *c }, None),
        SemilinearTerm::Penalty { f_minus, pen } => {
            op.grid().check_same(f_minus.grid(), "semilinear penalty")?;
            (
                Reaction::Penalty {
                    coef: f_minus.interior_values().to_vec(),
                    shift: vec![0.0; m],
                    pen: *pen,
                },
                Some(pen.eps),
            )
        }
    };
    let sys = System {
        op: op.clone(),
        rhs: g.interior_values().to_vec(),
        reaction,
        lower: None,
    };
    run(&sys, opts, None, "semilinear", eps)
}

/// `max_i |min(u_i - psi_i, (A u)_i - f_i)|` over interior nodes.
pub fn complementarity_residual(op: &DiscreteOperator, u: &GridFunction, problem: &ProblemSpec) -> Result<f64> {
    op.grid().check_same(u.grid(), "complementarity_residual")?;
    op.grid().check_same(problem.grid(), "complementarity_residual")?;
    let sys = System {
        op: op.clone(),
        rhs: problem.f.interior_values().to_vec(),
        reaction: Reaction::None,
        lower: Some(problem.psi.interior_values().to_vec()),
    };
    Ok(sys.residual_norm(u.interior_values()))
}
