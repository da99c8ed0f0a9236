//! Uniform 1D grids, nodal grid functions and the benchmark problem catalog.
//!
//! A [`GridFunction`] stores one value per node `x_0 = a, ..., x_n = b`. When it
//! represents an element of the solution space, the two Dirichlet nodes carry
//! `0` and the function is understood to vanish identically outside `(a, b)`;
//! the extension is never stored.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n_cells: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::config("domain", format!("need a < b, got a = {a}, b = {b}")));
        }
        if n_cells < 4 {
            return Err(Error::config(
                "grid.n_cells",
                format!("need at least 4 cells, got {n_cells}"),
            ));
        }
        Ok(Grid {
            a,
            b,
            n_cells,
            h: (b - a) / n_cells as f64,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Number of interior (unknown) nodes.
    pub fn n_interior(&self) -> usize {
        self.n_cells - 1
    }

    /// Interior node indices, `1..n_cells`.
    pub fn interior(&self) -> Range<usize> {
        1..self.n_cells
    }

    /// Node coordinate. Computed as a convex combination of the endpoints so
    /// that grids symmetric about 0 are symmetric in floating point too.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        if i == 0 {
            self.a
        } else if i == self.n_cells {
            self.b
        } else {
            let n = self.n_cells as f64;
            let t = i as f64;
            (self.a * (n - t) + self.b * t) / n
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    /// The grid with every other node removed, if `n_cells` is even.
    pub fn coarsen(&self) -> Option<Grid> {
        (self.n_cells.is_multiple_of(2) && self.n_cells / 2 >= 4)
            .then(|| Grid::new(self.a, self.b, self.n_cells / 2).expect("valid coarse grid"))
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: grid ({}, {}, {}) does not match ({}, {}, {})",
                self.a, self.b, self.n_cells, other.a, other.b, other.n_cells
            )))
        }
    }
}

pub fn build_grid(a: f64, b: f64, n_cells: usize) -> Result<Grid> {
    Grid::new(a, b, n_cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    /// Samples `f` at every node, boundary nodes included.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid,
            values: (0..grid.n_nodes()).map(|i| f(grid.node(i))).collect(),
        }
    }

    /// Samples `f` at interior nodes and sets the Dirichlet nodes to zero.
    pub fn from_interior_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let mut g = Self::from_fn(grid, f);
        g.zero_boundary();
        g
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::Shape(format!(
                "expected {} nodal values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Builds a solution-space element from interior values.
    pub fn from_interior(grid: Grid, interior: &[f64]) -> Result<Self> {
        if interior.len() != grid.n_interior() {
            return Err(Error::Shape(format!(
                "expected {} interior values, got {}",
                grid.n_interior(),
                interior.len()
            )));
        }
        let mut values = Vec::with_capacity(grid.n_nodes());
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.values[1..self.grid.n_cells()]
    }

    pub fn zero_boundary(&mut self) {
        let n = self.grid.n_cells();
        self.values[0] = 0.0;
        self.values[n] = 0.0;
    }

    pub fn is_solution_space(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.n_cells()] == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid, "zip_map")?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Injection onto a grid whose nodes are a subset of this one's.
    pub fn restrict_to(&self, coarse: &Grid) -> Result<Self> {
        let ratio = self.grid.n_cells() / coarse.n_cells();
        if ratio == 0
            || ratio * coarse.n_cells() != self.grid.n_cells()
            || coarse.a() != self.grid.a()
            || coarse.b() != self.grid.b()
        {
            return Err(Error::Shape("restriction target is not a coarsening".into()));
        }
        Ok(GridFunction {
            grid: *coarse,
            values: (0..coarse.n_nodes()).map(|i| self.values[i * ratio]).collect(),
        })
    }

    /// Piecewise-linear interpolation onto a finer grid over the same interval.
    pub fn prolong_to(&self, fine: &Grid) -> Result<Self> {
        let ratio = fine.n_cells() / self.grid.n_cells();
        if ratio == 0 || ratio * self.grid.n_cells() != fine.n_cells() {
            return Err(Error::Shape("prolongation target is not a refinement".into()));
        }
        let values = (0..fine.n_nodes())
            .map(|i| {
                let c = i / ratio;
                let r = i % ratio;
                if r == 0 {
                    self.values[c]
                } else {
                    let t = r as f64 / ratio as f64;
                    (1.0 - t) * self.values[c] + t * self.values[c + 1]
                }
            })
            .collect();
        Ok(GridFunction { grid: *fine, values })
    }

    /// Rows `(index, x, value)` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{:.16e},{:.16e}\n", self.grid.node(i), v));
        }
        out
    }
}

/// Fractional order `s` and integrability `p`, with the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    pub s: f64,
    pub p: f64,
    /// `(1 - s) C_{1,p} / 2`.
    pub kappa_s: f64,
    /// `C_{1,p} = p / 2`: the unit sphere in one dimension is `{-1, 1}`.
    pub c_1p: f64,
    /// Fractional Sobolev exponent; `+inf` when `sp >= 1`.
    pub p_star: f64,
    /// Conjugate of `p_star`.
    pub p_natural: f64,
}

impl FractionalParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::config("frac.s", format!("s must lie in (0, 1], got {s}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::config("frac.p", format!("p must lie in (1, inf), got {p}")));
        }
        let c_1p = p / 2.0;
        let kappa_s = if s == 1.0 { 0.0 } else { (1.0 - s) * c_1p / 2.0 };
        let p_star = if s * p < 1.0 {
            1.0 / (1.0 / p - s)
        } else {
            f64::INFINITY
        };
        let p_natural = if p_star.is_finite() {
            p_star / (p_star - 1.0)
        } else {
            1.0
        };
        Ok(FractionalParams {
            s,
            p,
            kappa_s,
            c_1p,
            p_star,
            p_natural,
        })
    }

    pub fn is_local(&self) -> bool {
        self.s == 1.0
    }
}

pub fn make_params(s: f64, p: f64) -> Result<FractionalParams> {
    FractionalParams::new(s, p)
}

/// Jordan decomposition `f = f_plus - f_minus` with both parts nonnegative.
pub fn pos_neg_split(f: &GridFunction) -> (GridFunction, GridFunction) {
    (f.map(|v| v.max(0.0)), f.map(|v| (-v).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CatalogId {
    #[serde(rename = "CAT-A")]
    CatA,
    #[serde(rename = "CAT-B")]
    CatB,
    #[serde(rename = "CAT-C")]
    CatC,
    #[serde(rename = "CAT-D")]
    CatD,
}

impl CatalogId {
    pub const ALL: [CatalogId; 4] = [CatalogId::CatA, CatalogId::CatB, CatalogId::CatC, CatalogId::CatD];

    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogId::CatA => "CAT-A",
            CatalogId::CatB => "CAT-B",
            CatalogId::CatC => "CAT-C",
            CatalogId::CatD => "CAT-D",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config("problem.catalog", format!("unknown catalog id `{s}`")))
    }
}

fn cat_b_forcing(x: f64) -> f64 {
    8.0 * (0.25 - x * x)
}

fn cat_c_forcing(x: f64) -> f64 {
    let bump = |c: f64| (-120.0 * (x - c) * (x - c)).exp();
    9.5 * (bump(-0.5) + bump(0.5)) - 2.0 * (1.0 - x * x)
}

/// Forcing, obstacle and nondegeneracy window of one obstacle problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: String,
    pub f: GridFunction,
    pub psi: GridFunction,
    /// Closed window `[omega.0, omega.1]` strictly inside `(a, b)`.
    pub omega: (f64, f64),
    /// Claimed bound `f <= -lambda` on the window; `0` when no claim is made.
    pub lambda: f64,
}

impl ProblemSpec {
    pub fn from_catalog(id: CatalogId, grid: Grid) -> Result<Self> {
        let zero = GridFunction::zeros(grid);
        let (f, psi, omega, lambda) = match id {
            CatalogId::CatA => {
                let w = 0.25 * (grid.b() - grid.a());
                (
                    GridFunction::from_fn(grid, |_| -1.0),
                    zero,
                    (grid.a() + w, grid.b() - w),
                    1.0,
                )
            }
            CatalogId::CatB => (
                GridFunction::from_fn(grid, cat_b_forcing),
                zero,
                (0.65, 0.95),
                -cat_b_forcing(0.65),
            ),
            CatalogId::CatC => (GridFunction::from_fn(grid, cat_c_forcing), zero, (-0.15, 0.15), 1.5),
            CatalogId::CatD => (
                GridFunction::from_fn(grid, |_| -1.0),
                GridFunction::from_fn(grid, |x| 0.1 - x * x),
                (0.5, 0.9),
                1.0,
            ),
        };
        Self::new(id.as_str(), f, psi, omega, lambda)
    }

    /// A problem from nodal-value tables. Checks admissibility of the obstacle
    /// and the claimed nondegeneracy bound.
    pub fn new(
        id: impl Into<String>,
        f: GridFunction,
        psi: GridFunction,
        omega: (f64, f64),
        lambda: f64,
    ) -> Result<Self> {
        let grid = *f.grid();
        grid.check_same(psi.grid(), "obstacle")?;
        let n = grid.n_cells();
        if psi.values()[0] > 0.0 || psi.values()[n] > 0.0 {
            return Err(Error::config(
                "problem.psi",
                "obstacle must be <= 0 at the Dirichlet nodes",
            ));
        }
        if !(omega.0 < omega.1 && omega.0 > grid.a() && omega.1 < grid.b()) {
            return Err(Error::config(
                "problem.omega",
                format!("window {omega:?} must lie strictly inside the domain"),
            ));
        }
        if lambda < 0.0 {
            return Err(Error::config("problem.lambda", "lambda must be nonnegative"));
        }
        if lambda > 0.0 {
            for i in grid.interior() {
                let x = grid.node(i);
                if x >= omega.0 && x <= omega.1 && f.values()[i] > -lambda {
                    return Err(Error::config(
                        "problem.lambda",
                        format!("f({x}) = {} violates f <= -{lambda} on the window", f.values()[i]),
                    ));
                }
            }
        }
        Ok(ProblemSpec {
            id: id.into(),
            f,
            psi,
            omega,
            lambda,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn has_obstacle(&self) -> bool {
        self.psi.values().iter().any(|&v| v != 0.0)
    }

    pub fn in_window(&self, x: f64) -> bool {
        x >= self.omega.0 && x <= self.omega.1
    }
}

pub fn catalog_problem(id: &str, grid: Grid) -> Result<ProblemSpec> {
    ProblemSpec::from_catalog(id.parse()?, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_and_spacing() {
        let g = build_grid(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.h(), 0.5);
        let g = build_grid(0.0, 2.0, 8).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.n_nodes(), 9);
        assert_eq!(g.node(8), 2.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(build_grid(1.0, -1.0, 8), Err(Error::Config { .. })));
        assert!(matches!(build_grid(0.0, 1.0, 3), Err(Error::Config { .. })));
    }

    #[test]
    fn symmetric_grid_is_symmetric_in_floating_point() {
        let g = build_grid(-1.0, 1.0, 1000).unwrap();
        for i in 0..=1000 {
            assert_eq!(g.node(i), -g.node(1000 - i));
        }
    }

    #[test]
    fn params_constants() {
        let q = make_params(0.5, 2.0).unwrap();
        assert_eq!(q.c_1p, 1.0);
        assert_eq!(q.kappa_s, 0.25);
        assert_eq!(make_params(1.0, 3.0).unwrap().kappa_s, 0.0);
        assert!((make_params(0.9, 1.5).unwrap().kappa_s - 0.0375).abs() < 1e-15);
        assert!(make_params(1.5, 2.0).is_err());
        assert!(make_params(0.0, 2.0).is_err());
        assert!(make_params(0.5, 1.0).is_err());
    }

    #[test]
    fn sobolev_exponents() {
        let q = make_params(0.25, 2.0).unwrap();
        assert!((q.p_star - 4.0).abs() < 1e-12);
        assert!(q.p_star > q.p);
        assert!((q.p_natural - 4.0 / 3.0).abs() < 1e-12);
        assert!(make_params(0.6, 2.0).unwrap().p_star.is_infinite());
    }

    #[test]
    fn split_examples() {
        let g = build_grid(0.0, 1.0, 4).unwrap();
        let f = GridFunction::from_values(g, vec![0.0, 2.0, -3.0, 0.0, 0.0]).unwrap();
        let (fp, fm) = pos_neg_split(&f);
        assert_eq!(fp.values(), &[0.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(fm.values(), &[0.0, 0.0, 3.0, 0.0, 0.0]);

        let (fp, fm) = pos_neg_split(&GridFunction::zeros(g));
        assert_eq!(fp.max_abs() + fm.max_abs(), 0.0);

        let f = GridFunction::from_interior_fn(g, |_| -1.0);
        let (fp, fm) = pos_neg_split(&f);
        assert_eq!(fp.max_abs(), 0.0);
        assert_eq!(fm.interior_values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn catalog_values() {
        let g = build_grid(-1.0, 1.0, 20).unwrap();
        let b = catalog_problem("CAT-B", g).unwrap();
        assert_eq!(b.f.values()[10], 2.0);
        assert!((cat_b_forcing(0.8) + 3.12).abs() < 1e-12);
        assert!((b.lambda - 1.38).abs() < 1e-12);
        let c = catalog_problem("cat-c", g).unwrap();
        assert!((c.f.values()[10] + 2.0).abs() < 1e-2);
        assert!((cat_c_forcing(0.5) - 8.0).abs() < 1e-2);
        assert!((cat_c_forcing(-0.5) - 8.0).abs() < 1e-2);
        let d = catalog_problem("CAT-D", g).unwrap();
        assert!(d.has_obstacle());
        assert!(catalog_problem("CAT-Z", g).is_err());
    }

    #[test]
    fn window_bound_holds_on_every_resolution() {
        for n in [8, 13, 64, 100, 257, 1024, 2048] {
            let g = build_grid(-1.0, 1.0, n).unwrap();
            for id in [CatalogId::CatB, CatalogId::CatC] {
                // construction validates f <= -lambda on the window
                ProblemSpec::from_catalog(id, g).unwrap();
            }
        }
    }

    #[test]
    fn restrict_and_prolong() {
        let fine = build_grid(-1.0, 1.0, 16).unwrap();
        let coarse = fine.coarsen().unwrap();
        let u = GridFunction::from_interior_fn(fine, |x| 1.0 - x * x);
        let uc = u.restrict_to(&coarse).unwrap();
        assert_eq!(uc.values()[4], u.values()[8]);
        let up = uc.prolong_to(&fine).unwrap();
        assert_eq!(up.values()[8], u.values()[8]);
        assert!(up.is_solution_space());
    }
}
