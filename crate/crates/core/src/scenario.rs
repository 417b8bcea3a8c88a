//! Scenario files: a model, a grid, boundary data, an initial state and a
//! list of checks, read from TOML.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::engine::{AxisBoundary, BoundarySpec, CanonicalState, Engine, FaceTag, Grid};
use crate::error::{Error, Result};
use crate::model::registry::Registry;
use crate::model::{Model, StatePoint};
use crate::scalar::Dual;
use crate::tensor::Vec3;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: Vec<usize>,
    pub extents: Vec<f64>,
    /// One entry per axis: `periodic`, `natural`, `dirichlet` or
    /// `<low>-<high>`. Absent: all periodic.
    #[serde(default)]
    pub faces: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DirichletData {
    /// Keep the values of the initial state.
    #[default]
    Initial,
    /// Reference placement and the base order parameter.
    Reference,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BoundaryConfig {
    /// Constant gradient g of the placement potential Ū(x) = g·x.
    pub surface_force: Option<[f64; 3]>,
    /// Constant h of the order potential U(ν) = h·ν.
    pub micro_field: Option<Vec<f64>>,
    #[serde(default)]
    pub dirichlet: DirichletData,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    Smooth,
    Rest,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct InitialConfig {
    #[serde(default)]
    pub kind: InitialKind,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_amplitude")]
    pub momentum: f64,
    /// Base order parameter, projected onto the manifold.
    pub nu: Option<Vec<f64>>,
    #[serde(default = "default_nu_amplitude")]
    pub nu_amplitude: f64,
    #[serde(default = "default_amplitude")]
    pub mu_amplitude: f64,
}

fn default_amplitude() -> f64 {
    0.01
}

fn default_nu_amplitude() -> f64 {
    0.05
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Smooth,
            amplitude: default_amplitude(),
            momentum: default_amplitude(),
            nu: None,
            nu_amplitude: default_nu_amplitude(),
            mu_amplitude: default_amplitude(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    /// Refinement levels `[dt, nodes]` for convergence checks.
    #[serde(default)]
    pub ladder: Vec<(f64, usize)>,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_sample_every() -> usize {
    10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CheckConfig {
    pub kind: String,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub expect_violation: bool,
    pub samples: Option<usize>,
    pub direction: Option<[f64; 3]>,
    pub pivot: Option<[f64; 3]>,
    /// Shared initial momentum of a characteristic family.
    pub momentum: Option<[f64; 3]>,
    /// Base point of a characteristic family.
    pub start: Option<[f64; 3]>,
    pub window: Option<f64>,
    pub isolation: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema {
            path: origin.to_string(),
            message: e.message().to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
            _ => Error::Io {
                path: path.display().to_string(),
                source: e,
            },
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// A validated scenario with its model instantiated.
#[derive(Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: Arc<dyn Model>,
    pub base_nu: Vec<f64>,
}

impl Scenario {
    pub fn load(path: &Path, registry: &Registry) -> Result<Self> {
        Self::new(ScenarioConfig::read(path)?, registry)
    }

    pub fn new(config: ScenarioConfig, registry: &Registry) -> Result<Self> {
        let model = registry.build(&config.model.id, &config.model.params)?;
        let n = model.ambient_dim();
        let raw = match &config.initial.nu {
            Some(v) if v.len() != n => {
                return Err(Error::Config(format!(
                    "initial.nu has {} components, model `{}` has ambient dimension {n}",
                    v.len(),
                    config.model.id
                )))
            }
            Some(v) => v.clone(),
            None => (0..n).map(|a| if a + 1 == n { 1.0 } else { 0.0 }).collect(),
        };
        let base_nu = model.project(&raw);
        if let Some(h) = &config.boundary.micro_field {
            if h.len() != n {
                return Err(Error::Config(format!(
                    "boundary.micro-field has {} components, expected {n}",
                    h.len()
                )));
            }
        }
        if let Some(g) = &config.grid {
            if g.nodes.len() != g.extents.len() || !(g.faces.is_empty() || g.faces.len() == g.nodes.len()) {
                return Err(Error::Config("grid.nodes, grid.extents and grid.faces must have one entry per axis".into()));
            }
        }
        if let Some(i) = &config.integrator {
            if !(i.dt.is_finite() && i.dt != 0.0) {
                return Err(Error::Config("integrator.dt must be finite and non-zero".into()));
            }
            if i.sample_every == 0 {
                return Err(Error::Config("integrator.sample-every must be positive".into()));
            }
        }
        let scn = Self { config, model, base_nu };
        if scn.config.grid.is_some() {
            scn.grid()?;
            for &(_, nodes) in scn.ladder() {
                scn.grid_with(nodes)?;
            }
        }
        Ok(scn)
    }

    pub fn name(&self) -> String {
        self.config.name.clone().unwrap_or_else(|| self.config.model.id.clone())
    }

    fn grid_config(&self) -> Result<&GridConfig> {
        self.config
            .grid
            .as_ref()
            .ok_or_else(|| Error::Config("scenario has no [grid] section".into()))
    }

    fn axes(&self) -> Result<Vec<AxisBoundary>> {
        let g = self.grid_config()?;
        if g.faces.is_empty() {
            return Ok(vec![AxisBoundary::Periodic; g.nodes.len()]);
        }
        g.faces.iter().map(|f| f.parse()).collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = self.grid_config()?;
        Grid::new(&g.extents, &g.nodes, &self.axes()?)
    }

    /// The configured grid with every axis resampled to `nodes`.
    pub fn grid_with(&self, nodes: usize) -> Result<Grid> {
        let g = self.grid_config()?;
        Grid::new(&g.extents, &vec![nodes; g.nodes.len()], &self.axes()?)
    }

    pub fn ladder(&self) -> &[(f64, usize)] {
        self.config.integrator.as_ref().map(|i| i.ladder.as_slice()).unwrap_or(&[])
    }

    pub fn boundary(&self) -> BoundarySpec {
        let b = &self.config.boundary;
        let mut spec = BoundarySpec::default();
        if let Some(g) = b.surface_force {
            spec.ubar = Some(Arc::new(move |x: &[Dual<f64>]| {
                (0..3).fold(Dual::constant(0.0), |acc, k| acc + Dual::constant(g[k]) * x[k])
            }));
        }
        if let Some(h) = b.micro_field.clone() {
            spec.u = Some(Arc::new(move |nu: &[Dual<f64>]| {
                h.iter().zip(nu).fold(Dual::constant(0.0), |acc, (&c, &v)| acc + Dual::constant(c) * v)
            }));
        }
        if b.dirichlet == DirichletData::Reference {
            let nu = self.base_nu.clone();
            spec.xbar = Some(Arc::new(|x: &Vec3<f64>| *x));
            spec.nubar = Some(Arc::new(move |_: &Vec3<f64>| nu.clone()));
        }
        spec
    }

    pub fn engine(&self, grid: Grid) -> Engine {
        Engine::new(self.model.clone(), grid, self.boundary())
    }

    /// Initial state on `grid`. The random coefficients depend only on the
    /// seed, so the same smooth fields are sampled at every resolution.
    ///
    /// Along bounded axes the modes have zero normal derivative on Natural
    /// faces and vanish on Dirichlet faces, and a displacement component
    /// along a bounded axis varies only along that axis, so that tractions
    /// of gradient-type energies vanish on Natural faces and Dirichlet nodes
    /// start at rest. Data incompatible with the faces would launch a
    /// non-smooth boundary layer.
    pub fn initial_state(&self, grid: &Grid) -> Result<CanonicalState> {
        let init = &self.config.initial;
        let mut s = CanonicalState::rest(grid, &self.base_nu);
        if init.kind == InitialKind::Rest {
            return Ok(s);
        }
        let n = self.base_nu.len();
        let fields = 6 + 2 * n;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let coef: Vec<[[f64; 2]; 3]> = (0..fields)
            .map(|_| [0; 3].map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
            .collect();
        let phase: Vec<[f64; 3]> = (0..fields)
            .map(|_| [0; 3].map(|_| rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let dim = grid.dim();
        let mode = |k: usize, j: usize, m: usize, x: f64| -> f64 {
            let l = grid.extents()[k];
            let r = (j + 1) as f64;
            let q = (2 * j + 1) as f64;
            match grid.axes()[k] {
                AxisBoundary::Periodic => (2.0 * PI * r * x / l + phase[m][k]).sin(),
                AxisBoundary::Bounded { low, high } => match (low, high) {
                    (FaceTag::Natural, FaceTag::Natural) => (PI * r * x / l).cos(),
                    (FaceTag::Dirichlet, FaceTag::Dirichlet) => (PI * r * x / l).sin(),
                    (FaceTag::Natural, FaceTag::Dirichlet) => (0.5 * PI * q * x / l).cos(),
                    (FaceTag::Dirichlet, FaceTag::Natural) => (0.5 * PI * q * x / l).sin(),
                },
            }
        };
        let field = |x: &Vec3<f64>, m: usize, axes: &[usize]| -> f64 {
            let sum: f64 = axes
                .iter()
                .map(|&k| coef[m][k][0] * mode(k, 0, m, x[k]) + 0.5 * coef[m][k][1] * mode(k, 1, m, x[k]))
                .sum();
            sum / axes.len().max(1) as f64
        };
        let all: Vec<usize> = (0..dim).collect();
        let model = self.model.as_ref();
        for i in 0..grid.len() {
            let xr = grid.reference(i);
            let rho = rho_at(model, &xr, &self.base_nu)?;
            for c in 0..3 {
                let own = [c];
                let axes: &[usize] = if c < dim && !matches!(grid.axes()[c], AxisBoundary::Periodic) {
                    &own
                } else {
                    &all
                };
                s.x[i][c] += init.amplitude * field(&xr, c, axes);
                s.p[i][c] = rho * init.momentum * field(&xr, 3 + c, &all);
            }
            let nu: Vec<f64> = (0..n)
                .map(|a| self.base_nu[a] + init.nu_amplitude * field(&xr, 6 + a, &all))
                .collect();
            s.nu[i] = model.project(&nu);
            let mu: Vec<f64> = (0..n).map(|a| rho * init.mu_amplitude * field(&xr, 6 + n + a, &all)).collect();
            s.mu[i] = crate::model::manifold::apply(&model.tangent_projector(&s.nu[i]), &mu);
        }
        Ok(s)
    }
}

fn rho_at(model: &dyn Model, x_ref: &Vec3<f64>, nu: &[f64]) -> Result<f64> {
    let sp = StatePoint {
        x_ref: *x_ref,
        x: *x_ref,
        ..StatePoint::rest(nu.to_vec())
    };
    Ok(model.derived_fields(&sp)?.rho0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 3
[model]
id = "M1"
[grid]
nodes = [8]
extents = [6.283185307179586]
[integrator]
dt = 0.01
steps = 4
ladder = [[0.02, 8], [0.01, 16]]
[[checks]]
kind = "energy"
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ScenarioConfig::parse(BASIC, "basic").unwrap();
        let scn = Scenario::new(cfg, &Registry::with_defaults()).unwrap();
        assert_eq!(scn.ladder(), &[(0.02, 8), (0.01, 16)]);
        let g = scn.grid().unwrap();
        let a = scn.initial_state(&g).unwrap();
        let b = scn.initial_state(&g).unwrap();
        assert_eq!(a.max_difference(&b), 0.0);
        assert!(a.x[0][0] != 0.0);
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        let text = BASIC.replace("steps = 4", "steps = 4\nstep = 2");
        assert!(matches!(ScenarioConfig::parse(&text, "t"), Err(Error::Schema { .. })));
    }

    #[test]
    fn too_few_nodes_is_a_grid_error() {
        let text = BASIC.replace("nodes = [8]", "nodes = [2]");
        let cfg = ScenarioConfig::parse(&text, "t").unwrap();
        assert!(matches!(Scenario::new(cfg, &Registry::with_defaults()), Err(Error::Grid(_))));
    }

    #[test]
    fn unknown_model_is_reported() {
        let text = BASIC.replace("\"M1\"", "\"M9\"");
        let cfg = ScenarioConfig::parse(&text, "t").unwrap();
        assert!(matches!(Scenario::new(cfg, &Registry::with_defaults()), Err(Error::UnknownModel(_))));
    }
}
