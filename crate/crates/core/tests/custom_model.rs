//! A law defined outside the crate goes through the registry, the scenario
//! runner and the generic checks like the built-in fixtures.

use std::sync::Arc;

use multifield::checks::run_check;
use multifield::model::registry::Registry;
use multifield::model::{Constitutive, Euclidean, MaterialModel, NoAction};
use multifield::scalar::lit;
use multifield::scenario::{Scenario, ScenarioConfig};
use multifield::tensor::{identity, norm_sq, sub33, Mat3, Vec3};
use multifield::Scalar;

/// Scalar phase field: e = ½a|F − I|² + ½|∇φ|² + ¼φ⁴.
struct PhaseField {
    a: f64,
    manifold: Euclidean,
}

impl Constitutive for PhaseField {
    type Manifold = Euclidean;
    type Action = NoAction;

    fn name(&self) -> &str {
        "phase-field"
    }
    fn manifold(&self) -> &Euclidean {
        &self.manifold
    }
    fn action(&self) -> Option<&NoAction> {
        None
    }
    fn rho0<S: Scalar>(&self, _x_ref: &Vec3<S>) -> S {
        S::one()
    }
    fn coenergy<S: Scalar>(&self, _nu: &[S], nudot: &[S]) -> S {
        lit::<S>(0.5) * norm_sq(nudot)
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, f: &Mat3<S>, nu: &[S], gradnu: &[Vec3<S>]) -> S {
        let strain = sub33(f, &identity());
        let mut e = S::zero();
        for row in &strain {
            e += lit::<S>(0.5 * self.a) * norm_sq(row);
        }
        e + lit::<S>(0.5) * norm_sq(&gradnu[0]) + lit::<S>(0.25) * nu[0] * nu[0] * nu[0] * nu[0]
    }
    fn potential<S: Scalar>(&self, _x: &Vec3<S>, _nu: &[S]) -> S {
        S::zero()
    }
}

fn registry() -> Registry {
    let mut r = Registry::empty();
    r.add("phase-field", "scalar order parameter with quartic well", |p| {
        let law = PhaseField {
            a: p.get("a").copied().unwrap_or(1.0),
            manifold: Euclidean::new(1),
        };
        Ok(Arc::new(MaterialModel::new(law)?))
    });
    r
}

const CONFIG: &str = r#"
name = "phase-field"
seed = 5
[model]
id = "phase-field"
params = { a = 2.0 }
[grid]
nodes = [16]
extents = [6.283185307179586]
[integrator]
dt = 1e-3
steps = 200
ladder = [[0.04908738521234052, 32], [0.02454369260617026, 64]]
[[checks]]
kind = "ad-check"
[[checks]]
kind = "formulation"
[[checks]]
kind = "energy"
[[checks]]
kind = "jacobi"
"#;

#[test]
fn custom_law_passes_the_generic_checks() {
    let registry = registry();
    assert_eq!(registry.list().unwrap()[0].manifold, "R1");
    let scn = Scenario::new(ScenarioConfig::parse(CONFIG, "inline").unwrap(), &registry).unwrap();
    for cfg in &scn.config.checks {
        let out = run_check(&scn, cfg).unwrap();
        for m in &out.metrics {
            assert!(m.passed(), "{} {} = {:e} ({})", m.check, m.metric, m.value, m.bound);
        }
    }
}

#[test]
fn default_registry_does_not_know_it() {
    let Err(err) = Scenario::new(ScenarioConfig::parse(CONFIG, "inline").unwrap(), &Registry::with_defaults()) else {
        panic!("phase-field should be unknown");
    };
    assert!(matches!(err, multifield::Error::UnknownModel(_)), "{err}");
}
