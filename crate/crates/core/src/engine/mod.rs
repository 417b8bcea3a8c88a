//! Hamiltonian dynamics of a discretized body.
//!
//! Fields live on the nodes of a structured [`Grid`]. `F` and `∇ν` are always
//! recomputed from the nodal placement and order parameter, so compatibility
//! holds by construction. Time stepping is Störmer–Verlet followed by
//! projection of ν onto the manifold and of μ onto its tangent space.

mod boundary;
mod grid;
mod state;

use std::sync::Arc;

use rayon::prelude::*;

pub use boundary::{BoundarySpec, OrderField, Placement, SurfacePotential};
pub use grid::{AxisBoundary, FaceTag, Grid, Side};
pub use state::{CanonicalState, FieldState, Snapshot};

use crate::error::{Error, Result};
use crate::model::manifold::apply;
use crate::model::{CanonicalPoint, DerivedPoint, HamiltonianPartials, Model, StatePoint};
use crate::tensor::*;

/// Time derivatives of every canonical field.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub xdot: Vec<Vec3<f64>>,
    pub pdot: Vec<Vec3<f64>>,
    pub nudot: Vec<Vec<f64>>,
    pub mudot: Vec<Vec<f64>>,
}

impl Rates {
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.xdot.len() {
            for k in 0..3 {
                m = m.max((self.xdot[i][k] - other.xdot[i][k]).abs());
                m = m.max((self.pdot[i][k] - other.pdot[i][k]).abs());
            }
            for a in 0..self.nudot[i].len() {
                m = m.max((self.nudot[i][a] - other.nudot[i][a]).abs());
                m = m.max((self.mudot[i][a] - other.mudot[i][a]).abs());
            }
        }
        m
    }
}

/// Nodal values on a subset of nodes.
pub type NodeValues<T> = Vec<(usize, T)>;

pub fn max_abs_values(v: &NodeValues<f64>) -> f64 {
    v.iter().fold(0.0, |m, (_, r)| m.max(r.abs()))
}

fn at_node(node: usize) -> impl Fn(Error) -> Error {
    move |e| Error::NodeInversion {
        node,
        source: Box::new(e),
    }
}

/// A model on a grid with boundary data.
#[derive(Clone)]
pub struct Engine {
    model: Arc<dyn Model>,
    grid: Grid,
    bc: BoundarySpec,
}

impl Engine {
    pub fn new(model: Arc<dyn Model>, grid: Grid, bc: BoundarySpec) -> Self {
        Self { model, grid, bc }
    }

    pub fn model(&self) -> &dyn Model {
        self.model.as_ref()
    }
    pub fn model_arc(&self) -> Arc<dyn Model> {
        self.model.clone()
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn boundary(&self) -> &BoundarySpec {
        &self.bc
    }

    /// `F` and the tangent-projected `∇ν` at every node.
    pub fn kinematics(&self, x: &[Vec3<f64>], nu: &[Vec<f64>]) -> (Vec<Mat3<f64>>, Vec<Vec<Vec3<f64>>>) {
        let g = &self.grid;
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                let f = g.deformation_gradient(x, i);
                let raw = g.gradient_components(nu, i);
                let proj = self.model.tangent_projector(&nu[i]);
                let gn = (0..raw.len())
                    .map(|a| [0, 1, 2].map(|k| (0..raw.len()).map(|b| proj[a][b] * raw[b][k]).sum()))
                    .collect();
                (f, gn)
            })
            .unzip()
    }

    pub fn canonical_points(&self, s: &CanonicalState) -> Vec<CanonicalPoint> {
        let (f, gn) = self.kinematics(&s.x, &s.nu);
        (0..self.grid.len())
            .map(|i| CanonicalPoint {
                x_ref: self.grid.reference(i),
                x: s.x[i],
                p: s.p[i],
                f: f[i],
                nu: s.nu[i].clone(),
                mu: s.mu[i].clone(),
                gradnu: gn[i].clone(),
            })
            .collect()
    }

    /// Kinematic state points with rates recovered from the momenta.
    pub fn state_points(&self, s: &CanonicalState) -> Result<Vec<StatePoint>> {
        let cps = self.canonical_points(s);
        cps.into_par_iter()
            .enumerate()
            .map(|(i, cp)| {
                let (xdot, nudot) = self
                    .model
                    .velocity_from_momenta(&cp.x_ref, &cp.nu, &cp.p, &cp.mu)
                    .map_err(at_node(i))?;
                Ok(StatePoint {
                    x_ref: cp.x_ref,
                    x: cp.x,
                    xdot,
                    f: cp.f,
                    nu: cp.nu,
                    nudot,
                    gradnu: cp.gradnu,
                })
            })
            .collect()
    }

    pub fn derived(&self, s: &CanonicalState) -> Result<(Vec<StatePoint>, Vec<DerivedPoint>)> {
        let sps = self.state_points(s)?;
        let ds = sps
            .par_iter()
            .enumerate()
            .map(|(i, sp)| self.model.derived_fields(sp).map_err(at_node(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok((sps, ds))
    }

    pub fn partials(&self, s: &CanonicalState) -> Result<Vec<HamiltonianPartials>> {
        self.canonical_points(s)
            .par_iter()
            .enumerate()
            .map(|(i, cp)| self.model.hamiltonian_partials(cp).map_err(at_node(i)))
            .collect()
    }

    /// Traction `t = ρ₀∂ₓŪ` at node `i`.
    pub(crate) fn traction(&self, s: &CanonicalState, i: usize) -> Vec3<f64> {
        let rho = self.model.rho0(&self.grid.reference(i));
        scale3(&self.bc.placement_potential(&s.x[i]).1, rho)
    }

    /// Microtraction `𝔱 = ρ₀ P_T ∂_νU` at node `i`.
    pub(crate) fn micro_traction(&self, s: &CanonicalState, i: usize) -> Vec<f64> {
        let rho = self.model.rho0(&self.grid.reference(i));
        let g = self.bc.order_potential(&s.nu[i]).1;
        let t = apply(&self.model.tangent_projector(&s.nu[i]), &g);
        t.iter().map(|v| rho * v).collect()
    }

    /// Pointwise source plus Div of the stress-like fields. On Natural faces
    /// the mismatch `T n − t` is fed back weakly with weight 1/w, so the
    /// result is minus the full discrete variational derivative (bulk part
    /// plus boundary trace). Dirichlet nodes get zero.
    fn balance(
        &self,
        s: &CanonicalState,
        stress: &[Mat3<f64>],
        micro: &[Vec<Vec3<f64>>],
        force: impl Fn(usize) -> Vec3<f64> + Sync,
        micro_force: impl Fn(usize) -> Vec<f64> + Sync,
    ) -> (Vec<Vec3<f64>>, Vec<Vec<f64>>) {
        let g = &self.grid;
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                let n = s.nu[i].len();
                if g.is_dirichlet(i) {
                    return ([0.0; 3], vec![0.0; n]);
                }
                let mut pdot = add3(&force(i), &g.divergence(stress, i));
                let src = micro_force(i);
                let div = g.divergence_rows(micro, i);
                let mut raw: Vec<f64> = (0..n).map(|a| src[a] + div[a]).collect();
                let faces = g.natural_faces(i);
                if !faces.is_empty() {
                    let t = self.traction(s, i);
                    let tm = self.micro_traction(s, i);
                    for (k, sign, inv_w) in faces {
                        for r in 0..3 {
                            pdot[r] -= inv_w * (sign * stress[i][r][k] - t[r]);
                        }
                        for a in 0..n {
                            raw[a] -= inv_w * (sign * micro[i][a][k] - tm[a]);
                        }
                    }
                }
                let mudot = apply(&self.model.tangent_projector(&s.nu[i]), &raw);
                (pdot, mudot)
            })
            .unzip()
    }

    /// ẋ = ∂_pℋ, ν̇ = ∂_μℋ, ṗ = −∂ₓℋ + Div ∂_Fℋ, μ̇ = P_T(−∂_νℋ + Div ∂_{∇ν}ℋ).
    pub fn hamilton_rhs(&self, s: &CanonicalState) -> Result<Rates> {
        let hp = self.partials(s)?;
        let stress: Vec<Mat3<f64>> = hp.iter().map(|h| h.d_f).collect();
        let micro: Vec<Vec<Vec3<f64>>> = hp.iter().map(|h| h.d_gradnu.clone()).collect();
        let (pdot, mudot) = self.balance(
            s,
            &stress,
            &micro,
            |i| scale3(&hp[i].d_x, -1.0),
            |i| hp[i].d_nu.iter().map(|v| -v).collect(),
        );
        let mut xdot: Vec<Vec3<f64>> = hp.iter().map(|h| h.d_p).collect();
        let mut nudot: Vec<Vec<f64>> = hp.iter().map(|h| h.d_mu.clone()).collect();
        self.zero_dirichlet(&mut xdot, &mut nudot);
        Ok(Rates {
            xdot,
            pdot,
            nudot,
            mudot,
        })
    }

    /// Same rates assembled from the Lagrange equations:
    /// ṗ = ρ₀b + Div P, μ̇ = P_T(∂_ν𝓛 + Div 𝒮).
    pub fn lagrange_rates(&self, s: &CanonicalState) -> Result<Rates> {
        let (sps, ds) = self.derived(s)?;
        let stress: Vec<Mat3<f64>> = ds.iter().map(|d| d.piola).collect();
        let micro: Vec<Vec<Vec3<f64>>> = ds.iter().map(|d| d.microstress.clone()).collect();
        let (pdot, mudot) = self.balance(
            s,
            &stress,
            &micro,
            |i| scale3(&ds[i].body_force, ds[i].rho0),
            |i| ds[i].d_nu.clone(),
        );
        let mut xdot: Vec<Vec3<f64>> = sps.iter().map(|p| p.xdot).collect();
        let mut nudot: Vec<Vec<f64>> = sps.iter().map(|p| p.nudot.clone()).collect();
        self.zero_dirichlet(&mut xdot, &mut nudot);
        Ok(Rates {
            xdot,
            pdot,
            nudot,
            mudot,
        })
    }

    fn zero_dirichlet(&self, xdot: &mut [Vec3<f64>], nudot: &mut [Vec<f64>]) {
        for i in (0..self.grid.len()).filter(|&i| self.grid.is_dirichlet(i)) {
            xdot[i] = [0.0; 3];
            nudot[i].iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Applies Dirichlet data and projects ν and μ.
    pub fn prepare(&self, s: &mut CanonicalState) -> Result<()> {
        for i in 0..s.len() {
            s.nu[i] = self.model.project(&s.nu[i]);
            s.mu[i] = apply(&self.model.tangent_projector(&s.nu[i]), &s.mu[i]);
        }
        self.bc.apply_dirichlet(self.model.as_ref(), &self.grid, s)
    }

    fn kick(&self, s: &mut CanonicalState, h: f64) -> Result<()> {
        let r = self.hamilton_rhs(s)?;
        for i in 0..s.len() {
            s.p[i] = add3(&s.p[i], &scale3(&r.pdot[i], h));
            let mu: Vec<f64> = s.mu[i].iter().zip(&r.mudot[i]).map(|(m, d)| m + h * d).collect();
            s.mu[i] = apply(&self.model.tangent_projector(&s.nu[i]), &mu);
        }
        Ok(())
    }

    fn drift(&self, s: &mut CanonicalState, dt: f64) -> Result<()> {
        let g = &self.grid;
        let vel = (0..s.len())
            .into_par_iter()
            .map(|i| {
                self.model
                    .velocity_from_momenta(&g.reference(i), &s.nu[i], &s.p[i], &s.mu[i])
                    .map_err(at_node(i))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, (xdot, nudot)) in vel.into_iter().enumerate() {
            if g.is_dirichlet(i) {
                continue;
            }
            s.x[i] = add3(&s.x[i], &scale3(&xdot, dt));
            let moved: Vec<f64> = s.nu[i].iter().zip(&nudot).map(|(v, d)| v + dt * d).collect();
            s.nu[i] = self.model.project(&moved);
            s.mu[i] = apply(&self.model.tangent_projector(&s.nu[i]), &s.mu[i]);
        }
        Ok(())
    }

    /// One Störmer–Verlet step (half kick, drift, half kick). Negative `dt`
    /// runs backwards.
    pub fn step(&self, s: &CanonicalState, dt: f64) -> Result<CanonicalState> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be finite and nonzero, got {dt}")));
        }
        let mut next = s.clone();
        self.kick(&mut next, 0.5 * dt)?;
        self.drift(&mut next, dt)?;
        self.kick(&mut next, 0.5 * dt)?;
        next.time = s.time + dt;
        Ok(next)
    }

    /// Trajectory of `steps + 1` states starting at `s`.
    pub fn run(&self, s: &CanonicalState, dt: f64, steps: usize) -> Result<Vec<CanonicalState>> {
        let mut traj = Vec::with_capacity(steps + 1);
        traj.push(s.clone());
        for _ in 0..steps {
            let next = self.step(traj.last().expect("nonempty"), dt)?;
            traj.push(next);
        }
        Ok(traj)
    }

    /// Surface energy ∫ρ₀(Ū + U) over Natural faces.
    fn surface_energy(&self, s: &CanonicalState) -> f64 {
        if self.bc.ubar.is_none() && self.bc.u.is_none() {
            return 0.0;
        }
        let g = &self.grid;
        let mut total = 0.0;
        for i in 0..g.len() {
            for (k, _, tag) in g.faces(i) {
                if tag == FaceTag::Natural {
                    let rho = self.model.rho0(&g.reference(i));
                    let e = self.bc.placement_potential(&s.x[i]).0 + self.bc.order_potential(&s.nu[i]).0;
                    total += g.face_weight(i, k) * rho * e;
                }
            }
        }
        total
    }

    /// Discrete total Hamiltonian Σ wᵢℋᵢ − ∫ρ₀(Ū + U).
    pub fn total_energy(&self, s: &CanonicalState) -> Result<f64> {
        let cps = self.canonical_points(s);
        let dens = cps
            .par_iter()
            .enumerate()
            .map(|(i, cp)| self.model.hamiltonian_density(cp).map_err(at_node(i)))
            .collect::<Result<Vec<_>>>()?;
        let bulk: f64 = dens.iter().enumerate().map(|(i, h)| self.grid.weight(i) * h).sum();
        Ok(bulk - self.surface_energy(s))
    }

    /// `𝔥̇ − Div(Pᵀẋ + 𝒮ᵀν̇)` at interior nodes of the middle state of
    /// three consecutive, equally spaced states.
    pub fn energy_balance_residual(&self, traj: &[CanonicalState]) -> Result<NodeValues<f64>> {
        if traj.len() < 3 {
            return Err(Error::Config("energy balance needs three consecutive states".into()));
        }
        let mid = traj.len() / 2;
        let dt2 = traj[mid + 1].time - traj[mid - 1].time;
        let (_, before) = self.derived(&traj[mid - 1])?;
        let (sps, ds) = self.derived(&traj[mid])?;
        let (_, after) = self.derived(&traj[mid + 1])?;
        let flux: Vec<Vec3<f64>> = sps
            .iter()
            .zip(&ds)
            .map(|(sp, d)| {
                let mut j = matvec_t(&d.piola, &sp.xdot);
                for (a, row) in d.microstress.iter().enumerate() {
                    j = add3(&j, &scale3(row, sp.nudot[a]));
                }
                j
            })
            .collect();
        Ok(self
            .grid
            .interior_nodes()
            .into_iter()
            .map(|i| {
                let hdot = (after[i].energy - before[i].energy) / dt2;
                (i, hdot - self.grid.divergence_vector(&flux, i))
            })
            .collect())
    }
}
