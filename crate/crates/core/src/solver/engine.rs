//! Minimization of `E(u)/h + sum_i Q_i(u_i) - sum_i b_i u_i`, optionally
//! subject to `u >= lb`, on interior-node vectors.

use crate::error::Result;
use crate::grid::Grid;
use crate::operator::DiscreteOperator;

use super::penalty::PenaltyFn;

/// Nondecreasing nodal reaction `q_i(t)` added to the operator.
#[derive(Debug, Clone)]
pub(crate) enum Reaction {
    None,
    Linear {
        c: f64,
    },
    Penalty {
        coef: Vec<f64>,
        shift: Vec<f64>,
        pen: PenaltyFn,
    },
}

impl Reaction {
    #[inline]
    fn q(&self, i: usize, t: f64) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Linear { c } => c * t,
            Reaction::Penalty { coef, shift, pen } => coef[i] * pen.value(t - shift[i]),
        }
    }

    #[inline]
    fn dq(&self, i: usize, t: f64) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Linear { c } => *c,
            Reaction::Penalty { coef, shift, pen } => coef[i] * pen.derivative(t - shift[i]),
        }
    }

    #[inline]
    fn primitive(&self, i: usize, t: f64) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Linear { c } => 0.5 * c * t * t,
            Reaction::Penalty { coef, shift, pen } => {
                coef[i] * (pen.primitive(t - shift[i]) - pen.primitive(-shift[i]))
            }
        }
    }

    fn restrict(&self, ratio: usize, m_coarse: usize) -> Reaction {
        match self {
            Reaction::Penalty { coef, shift, pen } => Reaction::Penalty {
                coef: restrict_interior(coef, ratio, m_coarse),
                shift: restrict_interior(shift, ratio, m_coarse),
                pen: *pen,
            },
            other => other.clone(),
        }
    }
}

pub(crate) fn restrict_interior(v: &[f64], ratio: usize, m_coarse: usize) -> Vec<f64> {
    (0..m_coarse).map(|k| v[(k + 1) * ratio - 1]).collect()
}

/// Linear interpolation of an interior vector (zero Dirichlet values) onto
/// a grid `ratio` times finer.
pub(crate) fn prolong_interior(v: &[f64], ratio: usize) -> Vec<f64> {
    let n_coarse = v.len() + 1;
    let at = |k: usize| if k == 0 || k == n_coarse { 0.0 } else { v[k - 1] };
    (1..n_coarse * ratio)
        .map(|i| {
            let c = i / ratio;
            let r = i % ratio;
            if r == 0 {
                at(c)
            } else {
                let t = r as f64 / ratio as f64;
                (1.0 - t) * at(c) + t * at(c + 1)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Counters {
    pub newton_steps: usize,
    pub active_set_iterations: usize,
    pub sweeps: usize,
}

pub(crate) struct System {
    pub op: DiscreteOperator,
    pub rhs: Vec<f64>,
    pub reaction: Reaction,
    pub lower: Option<Vec<f64>>,
}

const MAX_INNER: usize = 200;
const MAX_OUTER: usize = 200;

impl System {
    pub fn m(&self) -> usize {
        self.rhs.len()
    }

    /// `A u + q(u) - b`.
    pub fn residual_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; u.len()];
        self.op.apply_into(u, &mut r);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri += self.reaction.q(i, u[i]) - self.rhs[i];
        }
        r
    }

    pub fn objective(&self, u: &[f64]) -> f64 {
        let mut acc = self.op.scaled_energy(u);
        for (i, &ui) in u.iter().enumerate() {
            acc += self.reaction.primitive(i, ui) - self.rhs[i] * ui;
        }
        acc
    }

    /// Complementarity residual for constrained systems, equation residual
    /// otherwise.
    pub fn residual_norm(&self, u: &[f64]) -> f64 {
        let r = self.residual_vec(u);
        match &self.lower {
            Some(lb) => r
                .iter()
                .zip(u.iter().zip(lb))
                .map(|(&g, (&x, &l))| (x - l).min(g).abs())
                .fold(0.0, f64::max),
            None => r.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    fn project(&self, u: &mut [f64]) {
        if let Some(lb) = &self.lower {
            for (x, &l) in u.iter_mut().zip(lb) {
                *x = x.max(l);
            }
        }
    }

    fn coarsen(&self, coarse: Grid) -> Result<System> {
        let ratio = self.op.grid().n_cells() / coarse.n_cells();
        let mc = coarse.n_interior();
        Ok(System {
            op: DiscreteOperator::new(coarse, *self.op.params())?,
            rhs: restrict_interior(&self.rhs, ratio, mc),
            reaction: self.reaction.restrict(ratio, mc),
            lower: self.lower.as_ref().map(|l| restrict_interior(l, ratio, mc)),
        })
    }

    /// Damped Newton on the free rows; the other rows stay fixed. Returns
    /// false if the line search stalled before reaching `gtol`.
    fn newton(&self, u: &mut [f64], free: &[usize], gtol: f64, counters: &mut Counters) -> Result<bool> {
        if free.is_empty() {
            return Ok(true);
        }
        let mut r = self.residual_vec(u);
        let mut gmax = free.iter().fold(0.0f64, |a, &i| a.max(r[i].abs()));
        let mut e0 = self.objective(u);
        for _ in 0..MAX_INNER {
            if gmax <= gtol {
                return Ok(true);
            }
            let extra: Vec<f64> = free.iter().map(|&i| self.reaction.dq(i, u[i])).collect();
            let mat = self.op.newton_matrix(u, free, &extra);
            let neg_g: Vec<f64> = free.iter().map(|&i| -r[i]).collect();
            let d = mat.solve(&neg_g)?;
            let slope: f64 = -neg_g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            counters.newton_steps += 1;
            if !(slope < 0.0) {
                return Ok(false);
            }
            let mut alpha = 1.0;
            let mut trial = u.to_vec();
            let accepted = loop {
                for (k, &i) in free.iter().enumerate() {
                    trial[i] = u[i] + alpha * d[k];
                }
                let e = self.objective(&trial);
                if e <= e0 + 1e-4 * alpha * slope {
                    let rn = self.residual_vec(&trial);
                    break Some((e, rn));
                }
                if (e - e0).abs() <= 1e-13 * e0.abs().max(f64::MIN_POSITIVE) {
                    // the energy can no longer resolve the decrease; fall back
                    // on the gradient norm
                    let rn = self.residual_vec(&trial);
                    let gn = free.iter().fold(0.0f64, |a, &i| a.max(rn[i].abs()));
                    if gn < gmax {
                        break Some((e, rn));
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-10 {
                    break None;
                }
            };
            match accepted {
                Some((e, rn)) => {
                    u.copy_from_slice(&trial);
                    e0 = e;
                    r = rn;
                    gmax = free.iter().fold(0.0f64, |a, &i| a.max(r[i].abs()));
                }
                None => return Ok(false),
            }
        }
        Ok(gmax <= gtol)
    }

    /// Primal-dual active set iteration with Newton inner solves. `active`
    /// is the initial guess for the contact set.
    fn active_set(&self, u: &mut [f64], mut active: Vec<bool>, tol: f64, counters: &mut Counters) -> Result<()> {
        let lb = self.lower.as_ref().expect("active set needs a lower bound").clone();
        let m = self.m();
        for _ in 0..MAX_OUTER {
            counters.active_set_iterations += 1;
            for i in 0..m {
                if active[i] {
                    u[i] = lb[i];
                }
            }
            let free: Vec<usize> = (0..m).filter(|&i| !active[i]).collect();
            self.newton(u, &free, 0.1 * tol, counters)?;
            let r = self.residual_vec(u);
            let next: Vec<bool> = (0..m)
                .map(|i| if active[i] { r[i] > 0.0 } else { u[i] < lb[i] })
                .collect();
            let mut projected = u.to_vec();
            self.project(&mut projected);
            let done = self.residual_norm(&projected) <= tol;
            if done || next == active {
                u.copy_from_slice(&projected);
                return Ok(());
            }
            active = next;
        }
        self.project(u);
        Ok(())
    }

    /// One ascending Gauss-Seidel sweep of exact nodal solves, each
    /// projected onto the bound.
    pub fn sweep(&self, u: &mut [f64], tol: f64) {
        let m = self.m();
        let rf = 1.0 + self.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..m {
            let f = |t: f64| {
                let (a, da) = self.op.nodal(u, i, t);
                (a + self.reaction.q(i, t) - self.rhs[i], da + self.reaction.dq(i, t))
            };
            let lb = self.lower.as_ref().map(|l| l[i]);
            let t = nodal_root(f, u, i, lb, rf, tol);
            u[i] = match lb {
                Some(l) => t.max(l),
                None => t,
            };
        }
    }

    fn initial_active(&self, u: &[f64], from_gradient: bool) -> Vec<bool> {
        let lb = self.lower.as_ref().expect("bounded system");
        if from_gradient {
            let r = self.residual_vec(u);
            (0..self.m()).map(|i| r[i] - (u[i] - lb[i]) > 0.0).collect()
        } else {
            (0..self.m()).map(|i| u[i] <= lb[i]).collect()
        }
    }

    /// Newton-type solve on one level from `u`.
    fn solve_level(&self, u: &mut [f64], cold: bool, tol: f64, counters: &mut Counters) -> Result<()> {
        if self.lower.is_some() {
            self.project(u);
            let active = self.initial_active(u, cold);
            self.active_set(u, active, tol, counters)
        } else {
            let free: Vec<usize> = (0..self.m()).collect();
            self.newton(u, &free, 0.1 * tol, counters).map(|_| ())
        }
    }

    /// Nested Newton solve with a Gauss-Seidel finish.
    pub fn solve_newton(
        &self,
        initial: Option<Vec<f64>>,
        tol: f64,
        max_sweeps: usize,
        counters: &mut Counters,
    ) -> Result<(Vec<f64>, f64)> {
        let mut u = match initial {
            Some(u0) => {
                let mut u = u0;
                self.solve_level(&mut u, false, tol, counters)?;
                u
            }
            None => {
                let mut grids = vec![*self.op.grid()];
                while let Some(c) = grids.last().unwrap().coarsen() {
                    if c.n_cells() < MIN_LEVEL_CELLS {
                        break;
                    }
                    grids.push(c);
                }
                let mut u: Option<Vec<f64>> = None;
                for (depth, g) in grids.iter().enumerate().rev() {
                    let level = if depth == 0 { None } else { Some(self.coarsen(*g)?) };
                    let sys = level.as_ref().unwrap_or(self);
                    let cold = u.is_none();
                    let mut v = match u {
                        None => {
                            let mut z = vec![0.0; sys.m()];
                            sys.project(&mut z);
                            z
                        }
                        Some(prev) => prolong_interior(&prev, 2),
                    };
                    sys.solve_level(&mut v, cold, tol, counters)?;
                    u = Some(v);
                }
                u.unwrap()
            }
        };
        let mut res = self.residual_norm(&u);
        let polish_cap = max_sweeps.min(MAX_POLISH);
        while res > tol && counters.sweeps < polish_cap {
            self.sweep(&mut u, tol);
            counters.sweeps += 1;
            res = self.residual_norm(&u);
        }
        Ok((u, res))
    }

    /// Plain projected nonlinear Gauss-Seidel.
    pub fn solve_gauss_seidel(
        &self,
        initial: Option<Vec<f64>>,
        tol: f64,
        max_sweeps: usize,
        counters: &mut Counters,
    ) -> (Vec<f64>, f64) {
        let mut u = initial.unwrap_or_else(|| vec![0.0; self.m()]);
        self.project(&mut u);
        let mut res = self.residual_norm(&u);
        while res > tol && counters.sweeps < max_sweeps {
            self.sweep(&mut u, tol);
            counters.sweeps += 1;
            res = self.residual_norm(&u);
        }
        (u, res)
    }
}

const MIN_LEVEL_CELLS: usize = 32;
const MAX_POLISH: usize = 50;

/// Root of the increasing nodal function `f`, safeguarded Newton inside a
/// bracket. With a lower bound `lb` and `f(lb) >= 0` the bound is returned
/// directly since the projection would land there anyway.
fn nodal_root(f: impl Fn(f64) -> (f64, f64), u: &[f64], i: usize, lb: Option<f64>, rf: f64, tol: f64) -> f64 {
    let ftol = 1e-2 * tol;
    let (umin, umax) = u.iter().fold((0.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let (mut lo, mut hi) = (umin - rf, umax + rf);
    if let Some(l) = lb {
        let (v, _) = f(l);
        if v >= 0.0 {
            return l;
        }
        lo = l;
    }
    let mut width = hi - lo;
    while f(lo).0 > 0.0 {
        width *= 2.0;
        lo = hi - width;
    }
    while f(hi).0 < 0.0 {
        width *= 2.0;
        hi = lo + width;
    }
    let mut t = u[i].clamp(lo, hi);
    let mut last_step = hi - lo;
    for _ in 0..300 {
        let (v, d) = f(t);
        if v.abs() <= ftol {
            return t;
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
            return t;
        }
        let newton = t - v / d;
        let next = if d.is_finite() && d > 0.0 && newton > lo && newton < hi && (newton - t).abs() < 0.5 * last_step {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_step = (next - t).abs();
        if next == t {
            return t;
        }
        t = next;
    }
    t
}
