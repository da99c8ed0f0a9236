//! Coincidence sets, free boundaries, quasi-characteristic functions and the
//! set distances used to compare them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_rate;
use crate::grid::{pos_neg_split, GridFunction, ProblemSpec};
use crate::operator::DiscreteOperator;
use crate::solver::{obstacle_extension, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceSet {
    pub tol_u: f64,
    /// Interior grid node indices with `u_i <= tol_u`.
    pub indices: Vec<usize>,
    /// Maximal runs of `indices` as `[x_first - h/2, x_last + h/2]`.
    pub intervals: Vec<(f64, f64)>,
    pub chi: GridFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundary {
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiCharacteristic {
    pub theta: GridFunction,
    /// Per node; true where `f^- > tol_f`. Dirichlet nodes are never valid.
    pub valid_mask: Vec<bool>,
}

/// Default coincidence threshold: the solver residual perturbs `u` near the
/// free boundary on the scale `tol^{1/(p-1)}`.
pub fn default_tol_u(solver_tol: f64, p: f64, u_max: f64) -> f64 {
    let rel = (10.0 * solver_tol.powf(1.0 / (p - 1.0))).max(1e-6);
    (rel * u_max).max(1e-10)
}

pub fn coincidence_set(u: &GridFunction, tol_u: f64) -> CoincidenceSet {
    let grid = *u.grid();
    let h = grid.h();
    let mut chi = GridFunction::zeros(grid);
    let mut indices = Vec::new();
    for i in grid.interior() {
        if u.values()[i] <= tol_u {
            indices.push(i);
            chi.values_mut()[i] = 1.0;
        }
    }
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut run_start: Option<usize> = None;
    for (k, &i) in indices.iter().enumerate() {
        let start = *run_start.get_or_insert(i);
        let ends = k + 1 == indices.len() || indices[k + 1] != i + 1;
        if ends {
            intervals.push((grid.node(start) - 0.5 * h, grid.node(i) + 0.5 * h));
            run_start = None;
        }
    }
    CoincidenceSet {
        tol_u,
        indices,
        intervals,
        chi,
    }
}

/// Midpoints of interior edges across which `chi` changes.
pub fn free_boundary(coin: &CoincidenceSet) -> FreeBoundary {
    let grid = *coin.chi.grid();
    let chi = coin.chi.values();
    let points = (1..grid.n_cells() - 1)
        .filter(|&i| chi[i] != chi[i + 1])
        .map(|i| 0.5 * (grid.node(i) + grid.node(i + 1)))
        .collect();
    FreeBoundary { points }
}

/// `theta_i = (f^+_i - (A u)_i) / f^-_i` where `f^-_i > tol_f`, else `1` on
/// the positivity set and `0` elsewhere (those nodes are marked invalid).
/// Values are not clamped.
pub fn recover_quasi_characteristic(
    report: &SolveReport,
    problem: &ProblemSpec,
    tol_f: f64,
) -> Result<QuasiCharacteristic> {
    report
        .u
        .grid()
        .check_same(problem.grid(), "recover_quasi_characteristic")?;
    let grid = *report.u.grid();
    let (fp, fm) = pos_neg_split(&problem.f);
    let mut theta = GridFunction::zeros(grid);
    let mut valid_mask = vec![false; grid.n_nodes()];
    let gap = crate::solver::gap_function(&report.u, &problem.psi)?;
    for i in grid.interior() {
        let fmi = fm.values()[i];
        if fmi > tol_f {
            theta.values_mut()[i] = (fp.values()[i] - report.operator_values.values()[i]) / fmi;
            valid_mask[i] = true;
        } else if gap.values()[i] > report.tol_u {
            theta.values_mut()[i] = 1.0;
        }
    }
    Ok(QuasiCharacteristic { theta, valid_mask })
}

fn normalize(set: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = set.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

fn dist_to_set(x: f64, set: &[(f64, f64)]) -> f64 {
    set.iter()
        .map(|&(a, b)| (a - x).max(x - b).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

fn directed(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut best = 0.0f64;
    for &(lo, hi) in a {
        best = best.max(dist_to_set(lo, b)).max(dist_to_set(hi, b));
        for gap in b.windows(2) {
            let mid = 0.5 * (gap[0].1 + gap[1].0);
            if mid > lo && mid < hi {
                best = best.max(dist_to_set(mid, b));
            }
        }
    }
    best
}

/// Hausdorff distance between finite unions of closed intervals (points are
/// degenerate intervals). One empty set gives `+inf`, two give `0`.
pub fn hausdorff_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => {
            let a = normalize(a);
            let b = normalize(b);
            directed(&a, &b).max(directed(&b, &a))
        }
    }
}

/// Hausdorff distance between finite point sets.
pub fn hausdorff_points(a: &[f64], b: &[f64]) -> f64 {
    let a: Vec<(f64, f64)> = a.iter().map(|&x| (x, x)).collect();
    let b: Vec<(f64, f64)> = b.iter().map(|&x| (x, x)).collect();
    hausdorff_distance(&a, &b)
}

/// `h * #{interior i : chiA_i != chiB_i}`, optionally only over nodes in a
/// closed window.
pub fn lebesgue_distance(chi_a: &GridFunction, chi_b: &GridFunction, window: Option<(f64, f64)>) -> Result<f64> {
    chi_a.grid().check_same(chi_b.grid(), "lebesgue_distance")?;
    let grid = *chi_a.grid();
    let count = grid
        .interior()
        .filter(|&i| {
            let x = grid.node(i);
            window.is_none_or(|(l, r)| x >= l && x <= r)
        })
        .filter(|&i| chi_a.values()[i] != chi_b.values()[i])
        .count();
    Ok(grid.h() * count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub z: f64,
    pub r: f64,
    pub sup_ball: f64,
    /// `c1_hat * r^{p/(p-1)}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c1_hat: f64,
    /// Log-log slope of `sup_ball` against `r`, pooled over all centres.
    pub exponent: Option<f64>,
    pub samples: Vec<GrowthSample>,
}

/// Nondegeneracy diagnostic: how fast `u` detaches from zero next to the
/// free boundary.
pub fn growth_check(u: &GridFunction, coin: &CoincidenceSet, r_list: &[f64], p: f64) -> Result<GrowthReport> {
    coin.chi.grid().check_same(u.grid(), "growth_check")?;
    let grid = *u.grid();
    let chi = coin.chi.values();
    let vals = u.values();
    let empty = GrowthReport {
        c1_hat: 0.0,
        exponent: None,
        samples: Vec::new(),
    };
    let positive: Vec<usize> = grid
        .interior()
        .filter(|&i| chi[i] == 0.0 && vals[i] > coin.tol_u)
        .collect();
    if positive.is_empty() || coin.indices.is_empty() {
        return Ok(empty);
    }
    let q = p / (p - 1.0);
    let centres: Vec<usize> = positive
        .iter()
        .copied()
        .filter(|&i| chi[i - 1] == 1.0 || chi[i + 1] == 1.0)
        .collect();
    let mut samples = Vec::new();
    for &c in &centres {
        let z = grid.node(c);
        for &r in r_list {
            if z - r <= grid.a() || z + r >= grid.b() {
                continue;
            }
            let sup_ball = grid
                .interior()
                .filter(|&j| (grid.node(j) - z).abs() <= r && vals[j] > coin.tol_u)
                .map(|j| vals[j])
                .fold(0.0, f64::max);
            samples.push(GrowthSample {
                z,
                r,
                sup_ball,
                bound: 0.0,
            });
        }
    }
    if samples.is_empty() {
        return Ok(empty);
    }
    let c1_hat = samples
        .iter()
        .map(|s| s.sup_ball / s.r.powf(q))
        .fold(f64::INFINITY, f64::min);
    for s in &mut samples {
        s.bound = c1_hat * s.r.powf(q);
    }
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.r, s.sup_ball)).collect();
    let exponent = fit_rate(&pairs).ok().map(|f| f.slope);
    Ok(GrowthReport {
        c1_hat,
        exponent,
        samples,
    })
}

/// `max |u_i - u_j| / |x_i - x_j|^beta` over distinct nodes in the window.
pub fn holder_seminorm(u: &GridFunction, beta: f64, window: (f64, f64)) -> Result<f64> {
    let grid = *u.grid();
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("Hoelder exponent {beta} outside (0, 1]")));
    }
    if !(window.0 < window.1 && window.0 >= grid.a() && window.1 <= grid.b()) {
        return Err(Error::Domain(format!("window {window:?} is not inside the domain")));
    }
    let idx: Vec<usize> = (0..grid.n_nodes())
        .filter(|&i| {
            let x = grid.node(i);
            x >= window.0 && x <= window.1
        })
        .collect();
    let v = u.values();
    let mut best = 0.0f64;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            let q = (v[i] - v[j]).abs() / (grid.node(j) - grid.node(i)).powf(beta);
            best = best.max(q);
        }
    }
    Ok(best)
}

/// Largest violation of `f <= A u <= max(f, A psi~)` over interior nodes.
pub fn lewy_stampacchia_residual(op: &DiscreteOperator, report: &SolveReport, problem: &ProblemSpec) -> Result<f64> {
    op.grid().check_same(problem.grid(), "lewy_stampacchia_residual")?;
    op.grid().check_same(report.u.grid(), "lewy_stampacchia_residual")?;
    let apsi = if problem.has_obstacle() {
        op.apply(&obstacle_extension(&problem.psi))?
    } else {
        GridFunction::zeros(*op.grid())
    };
    let au = report.operator_values.values();
    let f = problem.f.values();
    Ok(op
        .grid()
        .interior()
        .map(|i| {
            let upper = f[i].max(apsi.values()[i]);
            (f[i] - au[i]).max(au[i] - upper).max(0.0)
        })
        .fold(0.0, f64::max))
}
