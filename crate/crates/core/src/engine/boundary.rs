//! Prescribed boundary data.

use std::fmt;
use std::sync::Arc;

use super::grid::Grid;
use super::state::CanonicalState;
use crate::error::{Error, Result};
use crate::model::{Model, CONSTRAINT_TOL};
use crate::scalar::{gradient, Dual};
use crate::tensor::{norm_sq, Vec3};

/// Surface potential per unit mass, evaluated on dual numbers so its
/// gradient is exact.
pub type SurfacePotential = Arc<dyn Fn(&[Dual<f64>]) -> Dual<f64> + Send + Sync>;
pub type Placement = Arc<dyn Fn(&Vec3<f64>) -> Vec3<f64> + Send + Sync>;
pub type OrderField = Arc<dyn Fn(&Vec3<f64>) -> Vec<f64> + Send + Sync>;

/// `xbar`/`nubar` act on Dirichlet nodes (absent: keep the initial values);
/// `ubar`/`u` are the surface potentials Ū(x) and U(ν) on Natural faces
/// (absent: traction free).
#[derive(Clone, Default)]
pub struct BoundarySpec {
    pub xbar: Option<Placement>,
    pub nubar: Option<OrderField>,
    pub ubar: Option<SurfacePotential>,
    pub u: Option<SurfacePotential>,
}

impl fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySpec")
            .field("xbar", &self.xbar.is_some())
            .field("nubar", &self.nubar.is_some())
            .field("ubar", &self.ubar.is_some())
            .field("u", &self.u.is_some())
            .finish()
    }
}

fn value_and_gradient(pot: &Option<SurfacePotential>, y: &[f64]) -> (f64, Vec<f64>) {
    match pot {
        Some(u) => gradient(y, |z| u(z)),
        None => (0.0, vec![0.0; y.len()]),
    }
}

impl BoundarySpec {
    /// Ū(x) and ∂ₓŪ.
    pub fn placement_potential(&self, x: &Vec3<f64>) -> (f64, Vec3<f64>) {
        let (v, g) = value_and_gradient(&self.ubar, x);
        (v, [g[0], g[1], g[2]])
    }

    /// U(ν) and ∂_νU.
    pub fn order_potential(&self, nu: &[f64]) -> (f64, Vec<f64>) {
        value_and_gradient(&self.u, nu)
    }

    /// Writes prescribed values into Dirichlet nodes and zeroes their momenta.
    pub fn apply_dirichlet(&self, model: &dyn Model, grid: &Grid, state: &mut CanonicalState) -> Result<()> {
        for i in (0..grid.len()).filter(|&i| grid.is_dirichlet(i)) {
            let x_ref = grid.reference(i);
            if let Some(xb) = &self.xbar {
                state.x[i] = xb(&x_ref);
            }
            if let Some(nb) = &self.nubar {
                let nu = nb(&x_ref);
                let r = norm_sq(&model.constraint(&nu)).sqrt();
                if r > CONSTRAINT_TOL {
                    return Err(Error::ConstraintViolation {
                        residual: r,
                        tolerance: CONSTRAINT_TOL,
                    });
                }
                state.nu[i] = nu;
            }
            state.p[i] = [0.0; 3];
            state.mu[i].iter_mut().for_each(|m| *m = 0.0);
        }
        Ok(())
    }
}
