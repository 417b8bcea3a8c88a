//! Named model factories.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::fixtures::*;
use super::{MaterialModel, Model};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;
pub type Factory = Box<dyn Fn(&Params) -> Result<Arc<dyn Model>> + Send + Sync>;

/// One row of [`Registry::list`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelInfo {
    pub id: String,
    pub manifold: String,
    pub action: Option<String>,
    pub summary: String,
}

struct Entry {
    factory: Factory,
    summary: String,
}

#[derive(Default)]
pub struct Registry {
    entries: BTreeMap<String, Entry>,
}

fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn wrap<C: super::Constitutive>(law: C) -> Result<Arc<dyn Model>> {
    Ok(Arc::new(MaterialModel::new(law)?))
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry pre-populated with the built-in fixtures.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.add("M1", "R3 order parameter, quadratic energy; params rho0, k, rho_amp, rho_period", |p| {
            let amp = param(p, "rho_amp", 0.0);
            let mut law = QuadraticMedium::new(param(p, "rho0", 1.0), param(p, "k", 0.0));
            if amp != 0.0 {
                law.rho_amp = amp;
                law.rho_period = param(p, "rho_period", 1.0);
            }
            wrap(law)
        });
        r.add("M2-director", "director on S2 with SO(3) action; params frank, stiffness, coupling", |p| {
            wrap(Director::new(
                param(p, "frank", 1.0),
                param(p, "stiffness", 0.0),
                param(p, "coupling", 0.0),
            ))
        });
        r.add("M3-point", "0D point in a spring potential; params rho0, k, x0, y0, z0, w0", |p| {
            let anchor = [param(p, "x0", 0.0), param(p, "y0", 0.0), param(p, "z0", 0.0)];
            let law = PointMass::new(param(p, "rho0", 1.0), param(p, "k", 1.0), anchor).with_offset(param(p, "w0", 0.0));
            wrap(law)
        });
        r.add("free-point", "structureless body with e = w = 0; params rho0", |p| {
            wrap(PointMass::free(param(p, "rho0", 1.0)))
        });
        r.add("quartic", "R3 order parameter with quartic co-energy", |_| wrap(QuarticCoenergy::default()));
        r.add("simple-objective", "simple body, e = |F^T F - I|^2 / 4", |_| {
            wrap(SimpleBody::new(SimpleEnergy::Objective))
        });
        r.add("shear-penalty", "simple body, e = F12^2 (not frame indifferent)", |_| {
            wrap(SimpleBody::new(SimpleEnergy::ShearPenalty))
        });
        r.add("anisotropic-fiber", "simple body, e = |F m|^2 (referentially anisotropic)", |_| {
            wrap(SimpleBody::new(SimpleEnergy::Fiber))
        });
        r.add("isotropic-micro", "R3 order parameter, isotropic invariants", |_| {
            wrap(IsotropicMicro::default())
        });
        r
    }

    /// Registers (or replaces) a factory under `id`.
    pub fn add<F>(&mut self, id: &str, summary: &str, factory: F)
    where
        F: Fn(&Params) -> Result<Arc<dyn Model>> + Send + Sync + 'static,
    {
        self.entries.insert(
            id.to_string(),
            Entry {
                factory: Box::new(factory),
                summary: summary.to_string(),
            },
        );
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn build(&self, id: &str, params: &Params) -> Result<Arc<dyn Model>> {
        let entry = self.entries.get(id).ok_or_else(|| Error::UnknownModel(id.to_string()))?;
        (entry.factory)(params)
    }

    /// Ids, manifold names and attached actions, built with default params.
    pub fn list(&self) -> Result<Vec<ModelInfo>> {
        self.entries
            .iter()
            .map(|(id, e)| {
                let m = (e.factory)(&Params::new())?;
                Ok(ModelInfo {
                    id: id.clone(),
                    manifold: m.manifold_name().to_string(),
                    action: m.action_name().map(str::to_string),
                    summary: e.summary.clone(),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_listed_with_manifolds() {
        let r = Registry::with_defaults();
        let list = r.list().unwrap();
        let m2 = list.iter().find(|i| i.id == "M2-director").unwrap();
        assert_eq!(m2.manifold, "S2");
        assert_eq!(m2.action.as_deref(), Some("SO(3)"));
        let m1 = list.iter().find(|i| i.id == "M1").unwrap();
        assert_eq!(m1.manifold, "R3");
        assert!(m1.action.is_none());
    }

    #[test]
    fn empty_registry_lists_nothing_and_rejects_lookups() {
        let r = Registry::empty();
        assert!(r.list().unwrap().is_empty());
        assert!(matches!(r.build("M1", &Params::new()), Err(Error::UnknownModel(_))));
    }
}
