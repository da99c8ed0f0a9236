//! TOML run configuration. Unknown keys are rejected; every omitted key has
//! the default listed in the README.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{CatalogId, FractionalParams, Grid, ProblemSpec};
use crate::harness::{default_order, Format, SweepOptions, WindowPolicy};
use crate::operator::QuadratureFn;
use crate::solver::{SolverMethod, SolverOptions, ThetaVariant};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub a: f64,
    pub b: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection { a: -1.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_cells: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_cells: 1024 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracSection {
    pub s: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub catalog: Option<String>,
    pub tol_u: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_sweeps: usize,
    pub theta_variant: String,
    pub warm_start: bool,
    pub method: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-8,
            max_sweeps: 100_000,
            theta_variant: "ramp".into(),
            warm_start: true,
            method: "newton".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub s_list: Option<Vec<f64>>,
    pub sigma: f64,
    pub r: Option<f64>,
    pub window_policy: String,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            s_list: None,
            sigma: 1.0,
            r: None,
            window_policy: "auto".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// `csv`, `json` or `both`. Solve reports are always JSON.
    pub format: String,
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            format: "both".into(),
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BbmSection {
    pub function: String,
    pub p: f64,
    pub s_list: Vec<f64>,
    pub rel_tol: f64,
}

impl Default for BbmSection {
    fn default() -> Self {
        BbmSection {
            function: "bump".into(),
            p: 2.0,
            s_list: vec![0.9, 0.99, 0.999],
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    pub pineq_pairs: usize,
    pub pineq_p: Vec<f64>,
    pub coercivity_pairs: usize,
    pub coercivity_s: Vec<f64>,
    pub coercivity_p: Vec<f64>,
    pub coercivity_n_cells: usize,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            pineq_pairs: 10_000,
            pineq_p: vec![1.5, 2.0, 3.0, 4.0],
            coercivity_pairs: 1000,
            coercivity_s: vec![0.3, 0.7],
            coercivity_p: vec![2.0, 3.0],
            coercivity_n_cells: 64,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub frac: FracSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub penalty: PenaltySection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub bbm: BbmSection,
    #[serde(default)]
    pub check: CheckSection,
}

/// Which report formats a sweep writes.
pub fn output_formats(spec: &str) -> Result<Vec<Format>> {
    match spec.trim().to_ascii_lowercase().as_str() {
        "both" => Ok(vec![Format::Csv, Format::Json]),
        other => Ok(vec![other.parse().map_err(|_| {
            Error::config("output.format", format!("unknown format `{spec}`"))
        })?]),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn rekey(e: Error, key: &str) -> Error {
    match e {
        Error::Config { msg, .. } => Error::config(key, msg),
        other => other,
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.a, self.domain.b, self.grid.n_cells)
    }

    pub fn catalog(&self) -> Result<CatalogId> {
        let name = self
            .problem
            .catalog
            .as_deref()
            .ok_or_else(|| Error::config("problem.catalog", "missing catalog id"))?;
        name.parse().map_err(|e| rekey(e, "problem.catalog"))
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        ProblemSpec::from_catalog(self.catalog()?, self.grid()?)
    }

    pub fn p(&self) -> Result<f64> {
        let p = self.frac.p.ok_or_else(|| Error::config("frac.p", "missing p"))?;
        FractionalParams::new(0.5, p)?;
        Ok(p)
    }

    pub fn params(&self) -> Result<FractionalParams> {
        let s = self.frac.s.ok_or_else(|| Error::config("frac.s", "missing s"))?;
        FractionalParams::new(s, self.p()?)
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let method: SolverMethod = self.solver.method.parse().map_err(|e| rekey(e, "solver.method"))?;
        let tol_u = self.problem.tol_u.map(|t| positive("problem.tol_u", t)).transpose()?;
        if self.solver.max_sweeps == 0 {
            return Err(Error::config("solver.max_sweeps", "must be at least 1"));
        }
        Ok(SolverOptions {
            tol: positive("solver.tol", self.solver.tol)?,
            max_sweeps: self.solver.max_sweeps,
            method,
            initial: None,
            tol_u,
        })
    }

    pub fn theta_variant(&self) -> Result<ThetaVariant> {
        self.solver
            .theta_variant
            .parse()
            .map_err(|e| rekey(e, "solver.theta_variant"))
    }

    pub fn sweep_options(&self) -> Result<SweepOptions> {
        Ok(SweepOptions {
            solver: self.solver_options()?,
            theta: self.theta_variant()?,
            warm_start: self.solver.warm_start,
            window_policy: self.study.window_policy.parse::<WindowPolicy>()?,
            ..SweepOptions::default()
        })
    }

    pub fn eps(&self) -> Result<Option<f64>> {
        self.penalty.eps.map(|e| positive("penalty.eps", e)).transpose()
    }

    pub fn eps_list(&self) -> Result<Vec<f64>> {
        let list = self
            .penalty
            .eps_list
            .clone()
            .ok_or_else(|| Error::config("penalty.eps_list", "missing eps_list"))?;
        for &e in &list {
            positive("penalty.eps_list", e)?;
        }
        Ok(list)
    }

    pub fn s_list(&self) -> Result<Vec<f64>> {
        self.study
            .s_list
            .clone()
            .ok_or_else(|| Error::config("study.s_list", "missing s_list"))
    }

    pub fn sigma(&self) -> Result<f64> {
        let sigma = self.study.sigma;
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::config(
                "study.sigma",
                format!("sigma must lie in (0, 1], got {sigma}"),
            ));
        }
        Ok(sigma)
    }

    pub fn order_r(&self) -> Result<f64> {
        let sigma = self.sigma()?;
        let r = self.study.r.unwrap_or_else(|| default_order(sigma));
        if !(r > 0.0 && r < sigma) {
            return Err(Error::config("study.r", format!("need 0 < r < sigma, got r = {r}")));
        }
        Ok(r)
    }

    pub fn formats(&self) -> Result<Vec<Format>> {
        output_formats(&self.output.format)
    }

    pub fn bbm_function(&self) -> Result<QuadratureFn> {
        self.bbm.function.parse().map_err(|e| rekey(e, "bbm.function"))
    }

    /// Validates everything shared by all commands.
    pub fn validate_common(&self) -> Result<()> {
        self.grid()?;
        self.solver_options()?;
        self.theta_variant()?;
        self.study.window_policy.parse::<WindowPolicy>()?;
        self.formats()?;
        if let Some(s) = self.frac.s {
            FractionalParams::new(s, self.frac.p.unwrap_or(2.0))?;
        }
        if let Some(p) = self.frac.p {
            FractionalParams::new(0.5, p)?;
        }
        if self.problem.catalog.is_some() {
            self.problem()?;
        }
        self.eps()?;
        if self.penalty.eps_list.is_some() {
            self.eps_list()?;
        }
        Ok(())
    }
}
