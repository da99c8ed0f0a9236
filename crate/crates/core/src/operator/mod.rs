//! Discrete fractional and local p-Laplacians, their energies and seminorms.
//!
//! Internally every routine works on interior-node slices of length
//! `n_cells - 1`; position `k` of such a slice is grid node `k + 1`.

mod quadrature;

pub use quadrature::{seminorm_quadrature, QuadratureFn, QuadratureValue};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FractionalParams, Grid, GridFunction};
use crate::linalg::NewtonMatrix;
use crate::special::zeta;

/// `|t|^{p-2} t`.
#[inline]
pub fn phi(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// Derivative of [`phi`]; `+inf` at `t = 0` when `p < 2`.
#[inline]
pub fn phi_prime(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if t == 0.0 {
        if p < 2.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        (p - 1.0) * t.abs().powf(p - 2.0)
    }
}

#[inline]
fn abs_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

/// Interaction weights of the nonlocal discretization on one grid.
///
/// Pair weights use the midpoint rule with the singular diagonal cell left
/// out. Dropping that cell loses a fixed fraction of the near-diagonal mass,
/// which is restored by scaling the nearest-neighbour weight with
/// `1 - zeta(1 + sp - p)`. The factor comes from the Euler-Maclaurin expansion
/// of `sum_{d >= 1} d^{p-1-sp}` and keeps every weight nonnegative, so the
/// discrete energy stays a positive combination of `|t|^p` terms.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    grid: Grid,
    params: FractionalParams,
    /// `kernel[d] = (d h)^{-(1+sp)}`, `kernel[0] = 0`.
    kernel: Vec<f64>,
    /// `h * kernel[d]` with the nearest-neighbour correction applied.
    pair: Vec<f64>,
    tails: Vec<f64>,
    nn_factor: f64,
    scale: f64,
}

pub fn assemble_weights(grid: Grid, params: FractionalParams) -> Result<KernelWeights> {
    let s = params.s;
    let p = params.p;
    if s >= 1.0 {
        return Err(Error::Assembly("s = 1 has no kernel; use the local p-Laplacian".into()));
    }
    let sp = s * p;
    let m = grid.n_interior();
    let h = grid.h();
    let nn_factor = 1.0 - zeta(1.0 + sp - p);
    if !(nn_factor.is_finite() && nn_factor > 0.0) {
        return Err(Error::Assembly(format!(
            "nearest-neighbour correction {nn_factor} is not positive for s = {s}, p = {p}"
        )));
    }
    let mut kernel = vec![0.0; m];
    let mut pair = vec![0.0; m];
    for d in 1..m {
        kernel[d] = (d as f64 * h).powf(-(1.0 + sp));
        pair[d] = h * kernel[d];
    }
    if m > 1 {
        pair[1] *= nn_factor;
    }
    let n = grid.n_cells();
    let tails = (1..n)
        .map(|i| {
            let left = (i as f64 - 0.5) * h;
            let right = ((n - i) as f64 - 0.5) * h;
            (left.powf(-sp) + right.powf(-sp)) / sp
        })
        .collect();
    Ok(KernelWeights {
        grid,
        params,
        kernel,
        pair,
        tails,
        nn_factor,
        scale: 2.0 * (1.0 - s) * params.c_1p,
    })
}

impl KernelWeights {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &FractionalParams {
        &self.params
    }

    /// Pure kernel value `|x_i - x_j|^{-(1+sp)}` between grid nodes `i` and
    /// `j` (both interior); zero on the diagonal.
    pub fn k(&self, i: usize, j: usize) -> f64 {
        self.check_interior(i);
        self.check_interior(j);
        self.kernel[i.abs_diff(j)]
    }

    /// Exterior tail integral at interior grid node `i`.
    pub fn tail(&self, i: usize) -> f64 {
        self.check_interior(i);
        self.tails[i - 1]
    }

    /// Tail integrals of all interior nodes, ordered by node index.
    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    /// Dense row-major copy of the kernel matrix over interior nodes.
    pub fn k_matrix(&self) -> Vec<f64> {
        let m = self.grid.n_interior();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.kernel[i.abs_diff(j)];
            }
        }
        out
    }

    /// Multiplier applied to the nearest-neighbour pair weight.
    pub fn nn_correction(&self) -> f64 {
        self.nn_factor
    }

    /// Prefactor `2 (1 - s) C_{1,p}` of the discrete operator.
    pub fn operator_scale(&self) -> f64 {
        self.scale
    }

    fn check_interior(&self, i: usize) {
        assert!(i >= 1 && i < self.grid.n_cells(), "node {i} is not interior");
    }
}

/// The native `s = 1` discretization: the three-point p-Laplacian.
#[derive(Debug, Clone)]
pub struct LocalPLaplacian {
    grid: Grid,
    params: FractionalParams,
}

impl LocalPLaplacian {
    pub fn new(grid: Grid, p: f64) -> Result<Self> {
        Ok(LocalPLaplacian {
            grid,
            params: FractionalParams::new(1.0, p)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// A discrete operator `A` with `A u = (1/h) grad E(u)`.
#[derive(Debug, Clone)]
pub enum DiscreteOperator {
    Nonlocal(KernelWeights),
    Local(LocalPLaplacian),
}

impl From<KernelWeights> for DiscreteOperator {
    fn from(w: KernelWeights) -> Self {
        DiscreteOperator::Nonlocal(w)
    }
}

impl From<LocalPLaplacian> for DiscreteOperator {
    fn from(l: LocalPLaplacian) -> Self {
        DiscreteOperator::Local(l)
    }
}

impl DiscreteOperator {
    /// Nonlocal assembly for `s < 1`, the local operator for `s = 1`.
    pub fn new(grid: Grid, params: FractionalParams) -> Result<Self> {
        if params.is_local() {
            Ok(LocalPLaplacian::new(grid, params.p)?.into())
        } else {
            Ok(assemble_weights(grid, params)?.into())
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            DiscreteOperator::Nonlocal(w) => &w.grid,
            DiscreteOperator::Local(l) => &l.grid,
        }
    }

    pub fn params(&self) -> &FractionalParams {
        match self {
            DiscreteOperator::Nonlocal(w) => &w.params,
            DiscreteOperator::Local(l) => &l.params,
        }
    }

    pub fn p(&self) -> f64 {
        self.params().p
    }

    pub fn is_local(&self) -> bool {
        matches!(self, DiscreteOperator::Local(_))
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid().check_same(u.grid(), "apply_operator")?;
        let mut out = vec![0.0; self.grid().n_interior()];
        self.apply_into(u.interior_values(), &mut out);
        GridFunction::from_interior(*self.grid(), &out)
    }

    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        self.grid().check_same(u.grid(), "energy")?;
        Ok(self.grid().h() * self.scaled_energy(u.interior_values()))
    }

    /// `(A u)` on interior nodes.
    pub(crate) fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let m = u.len();
        debug_assert_eq!(m, self.grid().n_interior());
        let p = self.p();
        match self {
            DiscreteOperator::Nonlocal(w) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = w.tails[i] * phi(u[i], p);
                }
                if p == 2.0 {
                    for i in 0..m {
                        let ui = u[i];
                        let row = &w.pair[1..m - i];
                        let mut acc = 0.0;
                        for (k, (&wk, &uj)) in row.iter().zip(&u[i + 1..]).enumerate() {
                            let t = wk * (ui - uj);
                            acc += t;
                            out[i + 1 + k] -= t;
                        }
                        out[i] += acc;
                    }
                } else {
                    for i in 0..m {
                        let ui = u[i];
                        let mut acc = 0.0;
                        for j in i + 1..m {
                            let t = w.pair[j - i] * phi(ui - u[j], p);
                            acc += t;
                            out[j] -= t;
                        }
                        out[i] += acc;
                    }
                }
                for o in out.iter_mut() {
                    *o *= w.scale;
                }
            }
            DiscreteOperator::Local(l) => {
                let h = l.grid.h();
                let mut left = phi(u[0] / h, p);
                for i in 0..m {
                    let next = if i + 1 < m { u[i + 1] } else { 0.0 };
                    let right = phi((next - u[i]) / h, p);
                    out[i] = (left - right) / h;
                    left = right;
                }
            }
        }
    }

    /// `E(u) / h`, whose gradient is `A u`.
    pub(crate) fn scaled_energy(&self, u: &[f64]) -> f64 {
        let m = u.len();
        let p = self.p();
        match self {
            DiscreteOperator::Nonlocal(w) => {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += w.tails[i] * abs_pow(u[i], p);
                    let ui = u[i];
                    let mut row = 0.0;
                    for j in i + 1..m {
                        row += w.pair[j - i] * abs_pow(ui - u[j], p);
                    }
                    acc += row;
                }
                w.scale / p * acc
            }
            DiscreteOperator::Local(l) => {
                let h = l.grid.h();
                let mut acc = abs_pow(u[0] / h, p);
                for i in 0..m {
                    let next = if i + 1 < m { u[i + 1] } else { 0.0 };
                    acc += abs_pow((next - u[i]) / h, p);
                }
                acc / p
            }
        }
    }

    /// `(A u)_i` and its derivative with `u_i` replaced by `t`.
    pub(crate) fn nodal(&self, u: &[f64], i: usize, t: f64) -> (f64, f64) {
        let m = u.len();
        let p = self.p();
        match self {
            DiscreteOperator::Nonlocal(w) => {
                let mut val = w.tails[i] * phi(t, p);
                let mut der = w.tails[i] * phi_prime(t, p);
                if p == 2.0 {
                    for j in 0..m {
                        if j != i {
                            let wk = w.pair[i.abs_diff(j)];
                            val += wk * (t - u[j]);
                            der += wk;
                        }
                    }
                } else {
                    for j in 0..m {
                        if j != i {
                            let wk = w.pair[i.abs_diff(j)];
                            let d = t - u[j];
                            val += wk * phi(d, p);
                            der += wk * phi_prime(d, p);
                        }
                    }
                }
                (w.scale * val, w.scale * der)
            }
            DiscreteOperator::Local(l) => {
                let h = l.grid.h();
                let prev = if i > 0 { u[i - 1] } else { 0.0 };
                let next = if i + 1 < m { u[i + 1] } else { 0.0 };
                let dl = (t - prev) / h;
                let dr = (next - t) / h;
                (
                    (phi(dl, p) - phi(dr, p)) / h,
                    (phi_prime(dl, p) + phi_prime(dr, p)) / (h * h),
                )
            }
        }
    }

    /// A symmetric positive definite model of the Hessian of `E / h` on the
    /// `free` rows and columns, plus `diag_extra` on the diagonal.
    pub(crate) fn newton_matrix(&self, u: &[f64], free: &[usize], diag_extra: &[f64]) -> NewtonMatrix {
        let m = u.len();
        let p = self.p();
        let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let weight = NewtonWeight::new(p, umax);
        let mut pos = vec![usize::MAX; m];
        for (k, &i) in free.iter().enumerate() {
            pos[i] = k;
        }
        match self {
            DiscreteOperator::Nonlocal(w) => {
                let nf = free.len();
                let mut mat = faer::Mat::<f64>::zeros(nf, nf);
                let mut diag: Vec<f64> = (0..m).map(|i| w.tails[i] * weight.eval(u[i])).collect();
                for i in 0..m {
                    let ui = u[i];
                    let pi = pos[i];
                    for j in i + 1..m {
                        let c = w.pair[j - i] * weight.eval(ui - u[j]);
                        diag[i] += c;
                        diag[j] += c;
                        let pj = pos[j];
                        if pi != usize::MAX && pj != usize::MAX {
                            mat[(pi, pj)] = -w.scale * c;
                            mat[(pj, pi)] = -w.scale * c;
                        }
                    }
                }
                for (k, &i) in free.iter().enumerate() {
                    mat[(k, k)] = w.scale * diag[i] + diag_extra[k];
                }
                NewtonMatrix::dense(mat)
            }
            DiscreteOperator::Local(l) => {
                let h2 = l.grid.h() * l.grid.h();
                let h = l.grid.h();
                // edge e joins interior positions e-1 and e (positions -1 and
                // m are the Dirichlet nodes)
                let mut edge = Vec::with_capacity(m + 1);
                for e in 0..=m {
                    let lo = if e > 0 { u[e - 1] } else { 0.0 };
                    let hi = if e < m { u[e] } else { 0.0 };
                    edge.push(weight.eval((hi - lo) / h) / h2);
                }
                let diag = free
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| edge[i] + edge[i + 1] + diag_extra[k])
                    .collect();
                let lower = free
                    .windows(2)
                    .map(|win| if win[1] == win[0] + 1 { -edge[win[1]] } else { 0.0 })
                    .collect();
                NewtonMatrix::tridiagonal(diag, lower)
            }
        }
    }
}

/// Pair weights of the Newton model. For `p >= 2` this is the exact second
/// derivative (regularized at 0); for `p < 2` differences that are tiny
/// relative to the solution get the lagged-diffusivity weight `|d|^{p-2}`,
/// which keeps the iteration from oscillating on nearly coincident pairs.
struct NewtonWeight {
    p: f64,
    delta2: f64,
    small: f64,
}

impl NewtonWeight {
    fn new(p: f64, umax: f64) -> Self {
        let scale = if umax > 0.0 { umax } else { 1.0 };
        let delta = if p > 2.0 { 1e-8 * scale } else { 1e-14 * scale };
        NewtonWeight {
            p,
            delta2: delta * delta,
            small: 1e-6 * scale,
        }
    }

    #[inline]
    fn eval(&self, d: f64) -> f64 {
        let p = self.p;
        if p == 2.0 {
            1.0
        } else if p > 2.0 {
            (p - 1.0) * (d * d + self.delta2).powf(0.5 * (p - 2.0))
        } else if d.abs() < self.small {
            (d * d + self.delta2).powf(0.5 * (p - 2.0))
        } else {
            (p - 1.0) * d.abs().powf(p - 2.0)
        }
    }
}

pub fn apply_operator(w: &KernelWeights, u: &GridFunction) -> Result<GridFunction> {
    w.grid.check_same(u.grid(), "apply_operator")?;
    let op = DiscreteOperator::Nonlocal(w.clone());
    op.apply(u)
}

pub fn energy(w: &KernelWeights, u: &GridFunction) -> Result<f64> {
    w.grid.check_same(u.grid(), "energy")?;
    let op = DiscreteOperator::Nonlocal(w.clone());
    op.energy(u)
}

pub fn local_p_laplacian(grid: &Grid, p: f64, u: &GridFunction) -> Result<GridFunction> {
    grid.check_same(u.grid(), "local_p_laplacian")?;
    DiscreteOperator::Local(LocalPLaplacian::new(*grid, p)?).apply(u)
}

pub fn local_energy(grid: &Grid, p: f64, u: &GridFunction) -> Result<f64> {
    grid.check_same(u.grid(), "local_energy")?;
    DiscreteOperator::Local(LocalPLaplacian::new(*grid, p)?).energy(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub order_r: f64,
    pub p: f64,
    pub value: f64,
}

/// Discrete `[v]_{r,p}`; `order_r = 0` is the discrete `L^p` norm.
pub fn gagliardo_seminorm(grid: &Grid, order_r: f64, p: f64, v: &GridFunction) -> Result<SeminormValue> {
    if order_r == 0.0 {
        grid.check_same(v.grid(), "gagliardo_seminorm")?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::config("frac.p", format!("p must lie in (1, inf), got {p}")));
        }
        let sum: f64 = v.interior_values().iter().map(|&x| abs_pow(x, p)).sum();
        return Ok(SeminormValue {
            order_r,
            p,
            value: (grid.h() * sum).powf(1.0 / p),
        });
    }
    let w = seminorm_weights(grid, order_r, p)?;
    weighted_seminorm(&w, v)
}

/// Weights for repeated seminorm evaluations at one order.
pub fn seminorm_weights(grid: &Grid, order_r: f64, p: f64) -> Result<KernelWeights> {
    if !(0.0..1.0).contains(&order_r) {
        return Err(Error::Domain(format!(
            "seminorm order {order_r} outside [0, 1); use the gradient norm at order 1"
        )));
    }
    assemble_weights(*grid, FractionalParams::new(order_r, p)?)
}

/// `[v]_{r,p}` with precomputed weights of order `r`.
pub fn weighted_seminorm(w: &KernelWeights, v: &GridFunction) -> Result<SeminormValue> {
    let e = energy(w, v)?;
    Ok(SeminormValue {
        order_r: w.params.s,
        p: w.params.p,
        value: (w.params.p * e).max(0.0).powf(1.0 / w.params.p),
    })
}

/// Discrete `(sum_e h |D v|^p)^{1/p}` over all cells, the order-one norm.
pub fn gradient_norm(grid: &Grid, p: f64, v: &GridFunction) -> Result<SeminormValue> {
    let e = local_energy(grid, p, v)?;
    Ok(SeminormValue {
        order_r: 1.0,
        p,
        value: (p * e).max(0.0).powf(1.0 / p),
    })
}
