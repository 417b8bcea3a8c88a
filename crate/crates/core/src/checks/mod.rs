//! Numerical certificates run by scenario files.

mod brackets;
mod conservation;
mod hamilton_jacobi;
mod pointwise;

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Model, StatePoint};
use crate::report::{num, Table};
use crate::scenario::{CheckConfig, Scenario};
use crate::tensor::{identity, Vec3};

pub const KINDS: &[&str] = &[
    "ad-check",
    "formulation",
    "energy",
    "noether:translation",
    "noether:material-translation",
    "noether:rotation",
    "rotation-identity",
    "material-rotation-identity",
    "pseudomomentum",
    "bracket-audit",
    "jacobi",
    "hj-verify",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<={t:e}"),
            Bound::AtLeast(t) => write!(f, ">={t:e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub check: String,
    pub metric: String,
    pub value: f64,
    pub bound: Bound,
}

impl Metric {
    pub fn new(check: &str, metric: &str, value: f64, bound: Bound) -> Self {
        Self {
            check: check.to_string(),
            metric: metric.to_string(),
            value,
            bound,
        }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        self.bound.admits(self.value)
    }

    pub fn row(&self) -> Vec<String> {
        vec![
            self.check.clone(),
            self.metric.clone(),
            num(self.value),
            self.bound.to_string(),
            if self.passed() { "PASS" } else { "FAIL" }.to_string(),
        ]
    }
}

/// Metrics plus named CSV detail tables (`name` becomes part of a file
/// name).
#[derive(Clone, Debug, Default)]
pub struct CheckOutcome {
    pub metrics: Vec<Metric>,
    pub tables: Vec<(String, String)>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(Metric::passed)
    }

    fn metric(&mut self, check: &str, metric: &str, value: f64, bound: Bound) {
        self.metrics.push(Metric::new(check, metric, value, bound));
    }

    fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t.to_csv()));
    }
}

fn missing(cfg: &CheckConfig, reason: impl Into<String>) -> Error {
    Error::Prerequisite {
        check: cfg.kind.clone(),
        reason: reason.into(),
    }
}

/// Rejects a check whose inputs are absent or whose model lacks the
/// structure it relies on, before anything is integrated.
pub fn validate(scn: &Scenario, cfg: &CheckConfig) -> Result<()> {
    let model = scn.model.as_ref();
    let kind = cfg.kind.as_str();
    if !KINDS.contains(&kind) {
        return Err(Error::Config(format!(
            "unknown check kind `{kind}` (known: {})",
            KINDS.join(", ")
        )));
    }
    let grid = scn.config.grid.as_ref();
    let needs_grid = !matches!(kind, "ad-check" | "rotation-identity" | "material-rotation-identity" | "hj-verify");
    if needs_grid && grid.is_none() {
        return Err(missing(cfg, "needs a [grid] section"));
    }
    let needs_ladder = matches!(
        kind,
        "energy" | "noether:translation" | "noether:material-translation" | "noether:rotation" | "pseudomomentum" | "hj-verify"
    );
    if needs_ladder && scn.ladder().len() < 2 {
        return Err(missing(cfg, "needs an [integrator] ladder with at least two levels"));
    }
    if matches!(kind, "energy" | "bracket-audit") && scn.config.integrator.is_none() {
        return Err(missing(cfg, "needs an [integrator] section"));
    }
    let rotational = matches!(kind, "noether:rotation" | "rotation-identity");
    if rotational && model.group_dim() != 3 {
        return Err(missing(
            cfg,
            format!("model `{}` has no SO(3) action on its order parameter", model.name()),
        ));
    }
    if kind == "noether:rotation" {
        let dim = scn.grid()?.dim();
        let q = cfg.direction.unwrap_or([0.0, 0.0, 1.0]);
        let planar = dim == 2 && q[0] == 0.0 && q[1] == 0.0;
        if !(dim == 3 || planar) {
            return Err(missing(
                cfg,
                "rotations are symmetries only on 3D grids, or on 2D grids about the out-of-plane axis [0, 0, 1]",
            ));
        }
        if scn.grid()?.is_periodic() {
            return Err(missing(cfg, "rotations are not symmetries of a periodic grid"));
        }
    }
    if kind == "jacobi" && !model.is_flat() {
        return Err(missing(
            cfg,
            format!("the Jacobi check needs a flat order-parameter manifold, `{}` is on {}", model.name(), model.manifold_name()),
        ));
    }
    if kind == "pseudomomentum" && !scn.grid()?.is_periodic() {
        return Err(missing(cfg, "needs a fully periodic grid"));
    }
    if kind == "hj-verify" && !matches!(scn.config.model.id.as_str(), "M3-point" | "free-point") {
        return Err(missing(
            cfg,
            "the reference action is known in closed form only for the `M3-point` and `free-point` models",
        ));
    }
    Ok(())
}

pub fn run_check(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    validate(scn, cfg)?;
    match cfg.kind.as_str() {
        "ad-check" => pointwise::ad_check(scn, cfg),
        "formulation" => pointwise::formulation(scn, cfg),
        "rotation-identity" => pointwise::rotation_identity(scn, cfg, false),
        "material-rotation-identity" => pointwise::rotation_identity(scn, cfg, true),
        "energy" => conservation::energy(scn, cfg),
        "noether:translation" | "noether:material-translation" | "noether:rotation" => {
            conservation::noether(scn, cfg)
        }
        "pseudomomentum" => conservation::pseudomomentum(scn, cfg),
        "bracket-audit" => brackets::audit(scn, cfg),
        "jacobi" => brackets::jacobi(scn, cfg),
        "hj-verify" => hamilton_jacobi::verify(scn, cfg),
        other => Err(Error::Config(format!("unknown check kind `{other}`"))),
    }
}

fn uniform<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn uniform3<R: Rng>(rng: &mut R, scale: f64) -> Vec3<f64> {
    [0; 3].map(|_| rng.gen_range(-scale..scale))
}

/// A random admissible pointwise state: F near the identity, ν on the
/// manifold, rates and gradients tangent to it.
pub(crate) fn random_state_point(model: &dyn Model, rng: &mut ChaCha8Rng) -> StatePoint {
    let n = model.ambient_dim();
    let mut f = identity();
    for row in f.iter_mut() {
        for v in row.iter_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
    }
    let raw = uniform(rng, n, 1.0);
    let nu = if n == 0 { Vec::new() } else { model.project(&raw) };
    let proj = model.tangent_projector(&nu);
    let tangent = |v: Vec<f64>| crate::model::manifold::apply(&proj, &v);
    let nudot = tangent(uniform(rng, n, 0.5));
    let cols: Vec<Vec<f64>> = (0..3).map(|_| tangent(uniform(rng, n, 0.5))).collect();
    let gradnu = (0..n).map(|a| [cols[0][a], cols[1][a], cols[2][a]]).collect();
    StatePoint {
        x_ref: [0; 3].map(|_| rng.gen_range(0.0..6.0)),
        x: uniform3(rng, 2.0),
        xdot: uniform3(rng, 1.0),
        f,
        nu,
        nudot,
        gradnu,
    }
}

fn slope_table(h: &[f64], dt: &[f64], err: &[f64]) -> Table {
    let mut t = Table::new(&["h", "dt", "residual"]);
    for k in 0..h.len() {
        t.push(vec![num(h[k]), num(dt[k]), num(err[k])]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_reject_nan() {
        assert!(!Bound::AtMost(1.0).admits(f64::NAN));
        assert!(!Bound::AtLeast(1.0).admits(f64::NAN));
        assert!(Bound::AtLeast(1.0).admits(1.0));
        assert_eq!(Bound::AtMost(1e-6).to_string(), "<=1e-6");
    }
}
