//! Material models: the constitutive quadruple (ρ₀, χ, e, w) on an
//! order-parameter manifold, and every pointwise field derived from it.
//!
//! User constitutive maps implement [`Constitutive`] once, generically over
//! [`Scalar`]; [`MaterialModel`] differentiates them with dual numbers and
//! exposes the results through the object-safe [`Model`] trait that the grid
//! engine, the Nöther checks and the bracket calculus consume.

pub mod action;
pub mod fixtures;
mod identities;
mod legendre;
pub mod manifold;
pub mod registry;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::noether::SymmetrySpec;
use crate::scalar::{gradient, lit, Dual, Scalar};
use crate::tensor::*;

pub use action::{GroupAction, NoAction, So3Rotation};
pub use legendre::Inversion;
pub use manifold::{Euclidean, Manifold, Sphere};

/// Tolerance on the manifold constraint for accepted inputs.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Constitutive description of a body with substructure.
///
/// `rho0` is mass per reference volume; `coenergy`, `elastic_energy` and
/// `potential` are per unit mass, so the Lagrangian density is
/// `ρ₀(½|ẋ|² + χ − e − w)`.
pub trait Constitutive: Send + Sync + 'static {
    type Manifold: Manifold;
    type Action: GroupAction;

    fn name(&self) -> &str;
    fn manifold(&self) -> &Self::Manifold;
    fn action(&self) -> Option<&Self::Action>;

    fn rho0<S: Scalar>(&self, x_ref: &Vec3<S>) -> S;
    fn coenergy<S: Scalar>(&self, nu: &[S], nudot: &[S]) -> S;
    fn elastic_energy<S: Scalar>(
        &self,
        x_ref: &Vec3<S>,
        f: &Mat3<S>,
        nu: &[S],
        gradnu: &[Vec3<S>],
    ) -> S;
    fn potential<S: Scalar>(&self, x: &Vec3<S>, nu: &[S]) -> S;

    /// No explicit dependence on the reference position.
    fn is_homogeneous(&self) -> bool {
        true
    }
}

/// Pointwise kinematic entries of the Lagrangian.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePoint {
    pub x_ref: Vec3<f64>,
    pub x: Vec3<f64>,
    pub xdot: Vec3<f64>,
    pub f: Mat3<f64>,
    pub nu: Vec<f64>,
    pub nudot: Vec<f64>,
    pub gradnu: Vec<Vec3<f64>>,
}

impl StatePoint {
    /// Reference configuration at rest with the given order parameter.
    pub fn rest(nu: Vec<f64>) -> Self {
        let n = nu.len();
        Self {
            x_ref: [0.0; 3],
            x: [0.0; 3],
            xdot: [0.0; 3],
            f: identity(),
            nu,
            nudot: vec![0.0; n],
            gradnu: vec![[0.0; 3]; n],
        }
    }
}

/// Pointwise entries of the Hamiltonian density.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPoint {
    pub x_ref: Vec3<f64>,
    pub x: Vec3<f64>,
    pub p: Vec3<f64>,
    pub f: Mat3<f64>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub gradnu: Vec<Vec3<f64>>,
}

impl CanonicalPoint {
    pub fn rest(nu: Vec<f64>) -> Self {
        let n = nu.len();
        Self {
            x_ref: [0.0; 3],
            x: [0.0; 3],
            p: [0.0; 3],
            f: identity(),
            nu,
            mu: vec![0.0; n],
            gradnu: vec![[0.0; 3]; n],
        }
    }
}

/// Every field derived pointwise from the Lagrangian.
#[derive(Clone, Debug)]
pub struct DerivedPoint {
    pub lagrangian: f64,
    /// Piola–Kirchhoff stress `P = −∂_F𝓛`.
    pub piola: Mat3<f64>,
    /// Referential microstress `𝒮 = −∂_{∇ν}𝓛`, one row per ambient coordinate.
    pub microstress: Vec<Vec3<f64>>,
    /// Self-force `z = −ρ₀∂_ν e`.
    pub self_force: Vec<f64>,
    /// `b = −∂ₓw`
    pub body_force: Vec3<f64>,
    /// `β = −∂_ν w`
    pub micro_force: Vec<f64>,
    pub momentum: Vec3<f64>,
    /// Tangent-projected `∂_ν̇𝓛`.
    pub micro_momentum: Vec<f64>,
    /// Total energy density 𝔥.
    pub energy: f64,
    /// Substructural kinetic energy per unit mass κ.
    pub kappa: f64,
    pub eshelby: Mat3<f64>,
    /// `∂_ν𝓛` (includes the ρ₀∂_νχ contribution).
    pub d_nu: Vec<f64>,
    /// Explicit reference-position derivative `∂_X𝓛`.
    pub d_x_ref: Vec3<f64>,
    pub rho0: f64,
    /// `ρ₀∂_νχ`
    pub kinetic_nu: Vec<f64>,
    pub elastic_energy: f64,
    pub coenergy: f64,
    pub potential: f64,
}

/// Partial derivatives of the Hamiltonian density at a canonical point.
#[derive(Clone, Debug)]
pub struct HamiltonianPartials {
    pub value: f64,
    pub d_x: Vec3<f64>,
    pub d_p: Vec3<f64>,
    pub d_f: Mat3<f64>,
    pub d_nu: Vec<f64>,
    pub d_mu: Vec<f64>,
    pub d_gradnu: Vec<Vec3<f64>>,
}

/// Generic container for the seven arguments of 𝓛 (rates) or ℋ (momenta).
#[derive(Clone, Debug)]
pub(crate) struct Entries<S> {
    pub x_ref: Vec3<S>,
    pub x: Vec3<S>,
    pub rate: Vec3<S>,
    pub f: Mat3<S>,
    pub nu: Vec<S>,
    pub nu_rate: Vec<S>,
    pub gradnu: Vec<Vec3<S>>,
}

/// Offsets of each argument block in the flat coordinate vector.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub n: usize,
}

impl Layout {
    pub const X_REF: usize = 0;
    pub const X: usize = 3;
    pub const RATE: usize = 6;
    pub const F: usize = 9;
    pub fn nu(&self) -> usize {
        18
    }
    pub fn nu_rate(&self) -> usize {
        18 + self.n
    }
    pub fn gradnu(&self) -> usize {
        18 + 2 * self.n
    }
    pub fn len(&self) -> usize {
        18 + 5 * self.n
    }

    pub fn flatten(&self, e: &Entries<f64>) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&e.x_ref);
        v.extend_from_slice(&e.x);
        v.extend_from_slice(&e.rate);
        v.extend_from_slice(&flatten33(&e.f));
        v.extend_from_slice(&e.nu);
        v.extend_from_slice(&e.nu_rate);
        for row in &e.gradnu {
            v.extend_from_slice(row);
        }
        v
    }

    pub fn unflatten<S: Scalar>(&self, v: &[S]) -> Entries<S> {
        let n = self.n;
        let v3 = |o: usize| [v[o], v[o + 1], v[o + 2]];
        let f = [v3(Self::F), v3(Self::F + 3), v3(Self::F + 6)];
        Entries {
            x_ref: v3(Self::X_REF),
            x: v3(Self::X),
            rate: v3(Self::RATE),
            f,
            nu: v[self.nu()..self.nu() + n].to_vec(),
            nu_rate: v[self.nu_rate()..self.nu_rate() + n].to_vec(),
            gradnu: (0..n).map(|a| v3(self.gradnu() + 3 * a)).collect(),
        }
    }

    /// Human-readable name of flat coordinate `k` for diagnostics.
    pub fn label(&self, k: usize, rate: &str, nu_rate: &str) -> String {
        let n = self.n;
        match k {
            0..=2 => format!("X[{k}]"),
            3..=5 => format!("x[{}]", k - 3),
            6..=8 => format!("{rate}[{}]", k - 6),
            9..=17 => format!("F[{}][{}]", (k - 9) / 3, (k - 9) % 3),
            _ if k < 18 + n => format!("nu[{}]", k - 18),
            _ if k < 18 + 2 * n => format!("{nu_rate}[{}]", k - 18 - n),
            _ => {
                let r = k - 18 - 2 * n;
                format!("gradnu[{}][{}]", r / 3, r % 3)
            }
        }
    }
}

impl From<&StatePoint> for Entries<f64> {
    fn from(sp: &StatePoint) -> Self {
        Entries {
            x_ref: sp.x_ref,
            x: sp.x,
            rate: sp.xdot,
            f: sp.f,
            nu: sp.nu.clone(),
            nu_rate: sp.nudot.clone(),
            gradnu: sp.gradnu.clone(),
        }
    }
}

impl From<&CanonicalPoint> for Entries<f64> {
    fn from(cp: &CanonicalPoint) -> Self {
        Entries {
            x_ref: cp.x_ref,
            x: cp.x,
            rate: cp.p,
            f: cp.f,
            nu: cp.nu.clone(),
            nu_rate: cp.mu.clone(),
            gradnu: cp.gradnu.clone(),
        }
    }
}

/// Object-safe evaluation surface of a registered material model.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;
    fn manifold_name(&self) -> &str;
    fn ambient_dim(&self) -> usize;
    fn is_flat(&self) -> bool;
    fn is_homogeneous(&self) -> bool;
    fn action_name(&self) -> Option<&str>;
    fn group_dim(&self) -> usize;

    fn constraint(&self, y: &[f64]) -> Vec<f64>;
    fn project(&self, y: &[f64]) -> Vec<f64>;
    fn tangent_projector(&self, nu: &[f64]) -> Vec<Vec<f64>>;
    fn generator(&self, nu: &[f64], q: &[f64]) -> Option<Vec<f64>>;
    fn a_operator(&self, nu: &[f64]) -> Option<Vec<Vec<f64>>>;

    fn rho0(&self, x_ref: &Vec3<f64>) -> f64;
    fn coenergy(&self, nu: &[f64], nudot: &[f64]) -> f64;
    fn elastic_energy(&self, x_ref: &Vec3<f64>, f: &Mat3<f64>, nu: &[f64], gradnu: &[Vec3<f64>]) -> f64;
    fn potential(&self, x: &Vec3<f64>, nu: &[f64]) -> f64;

    fn lagrangian_density(&self, sp: &StatePoint) -> Result<f64>;
    fn derived_fields(&self, sp: &StatePoint) -> Result<DerivedPoint>;
    /// κ(ν, ν̇) per unit mass, the partial Legendre transform of χ.
    fn kinetic_energy(&self, nu: &[f64], nudot: &[f64]) -> f64;
    fn velocity_from_momenta(
        &self,
        x_ref: &Vec3<f64>,
        nu: &[f64],
        p: &Vec3<f64>,
        mu: &[f64],
    ) -> Result<(Vec3<f64>, Vec<f64>)>;
    fn hamiltonian_density(&self, cp: &CanonicalPoint) -> Result<f64>;
    fn hamiltonian_partials(&self, cp: &CanonicalPoint) -> Result<HamiltonianPartials>;
    fn eshelby_tensor(&self, sp: &StatePoint) -> Result<Mat3<f64>>;

    fn invariance_defect(&self, sym: &SymmetrySpec, sp: &StatePoint) -> Result<f64>;
    fn spatial_rotation_identity(&self, sp: &StatePoint) -> Result<Vec3<f64>>;
    fn material_rotation_identity(&self, sp: &StatePoint) -> Result<Vec3<f64>>;
}

/// A validated constitutive law together with its derivative machinery.
#[derive(Debug)]
pub struct MaterialModel<C> {
    law: C,
}

impl<C: Constitutive> MaterialModel<C> {
    /// Registers a law after sampling its admissibility: ρ₀ > 0, χ(ν, 0) = 0
    /// and a positive-definite tangent Hessian of χ in ν̇.
    pub fn new(law: C) -> Result<Self> {
        let model = Self { law };
        model.check_admissible()?;
        Ok(model)
    }

    pub fn law(&self) -> &C {
        &self.law
    }

    fn check_admissible(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let m = self.law.manifold();
        let n = m.ambient_dim();
        for _ in 0..16 {
            let x_ref: Vec3<f64> = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
            let rho = self.law.rho0(&x_ref);
            if !(rho > 0.0) {
                return Err(Error::Registration(format!(
                    "{}: rho0 = {rho} is not positive at {x_ref:?}",
                    self.law.name()
                )));
            }
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nu = m.project(&raw);
            let chi0 = self.law.coenergy(&nu, &vec![0.0; n]);
            if chi0.abs() > 1e-12 {
                return Err(Error::Registration(format!(
                    "{}: coenergy at rest is {chi0}, expected 0",
                    self.law.name()
                )));
            }
            let raw_rate: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let proj = m.tangent_projector(&nu);
            let rate = manifold::apply(&proj, &raw_rate);
            let jac = self.legendre_jacobian(&nu, &rate, rho);
            if !is_positive_definite(&jac) {
                return Err(Error::Registration(format!(
                    "{}: co-energy Hessian is not positive definite on the tangent space",
                    self.law.name()
                )));
            }
        }
        Ok(())
    }

    fn check_constraint(&self, nu: &[f64]) -> Result<()> {
        let residual = self.law.manifold().constraint(nu);
        let r = norm_sq(&residual).sqrt();
        if r > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                residual: r,
                tolerance: CONSTRAINT_TOL,
            });
        }
        Ok(())
    }

    pub(crate) fn lagrangian<S: Scalar>(&self, e: &Entries<S>) -> S {
        let rho = self.law.rho0(&e.x_ref);
        let kinetic = lit::<S>(0.5) * norm_sq(&e.rate);
        let chi = self.law.coenergy(&e.nu, &e.nu_rate);
        let elastic = self.law.elastic_energy(&e.x_ref, &e.f, &e.nu, &e.gradnu);
        let pot = self.law.potential(&e.x, &e.nu);
        rho * (kinetic + chi - elastic - pot)
    }

    /// ℋ = p·ẋ + μ·ν̇ − 𝓛 with the rates recovered from the momenta.
    pub(crate) fn hamiltonian<S: Scalar>(&self, e: &Entries<S>, inv: &Inversion) -> S {
        let rho = self.law.rho0(&e.x_ref);
        let xdot = scale3(&e.rate, S::one() / rho);
        let nudot = self.refine_rates(&e.x_ref, &e.nu, &e.nu_rate, inv);
        let rates = Entries {
            rate: xdot,
            nu_rate: nudot.clone(),
            ..e.clone()
        };
        dot(&e.rate, &xdot) + dot(&e.nu_rate, &nudot) - self.lagrangian(&rates)
    }

    fn layout(&self) -> Layout {
        Layout {
            n: self.law.manifold().ambient_dim(),
        }
    }

    fn lagrangian_gradient(&self, sp: &StatePoint) -> Result<(f64, Vec<f64>)> {
        let layout = self.layout();
        let flat = layout.flatten(&Entries::from(sp));
        let (value, grad) = gradient(&flat, |z| self.lagrangian(&layout.unflatten(z)));
        if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                entry: format!("dL/d{}", layout.label(k, "xdot", "nudot")),
            });
        }
        Ok((value, grad))
    }

    fn derive(&self, sp: &StatePoint) -> Result<DerivedPoint> {
        self.check_constraint(&sp.nu)?;
        let layout = self.layout();
        let n = layout.n;
        let (lag, g) = self.lagrangian_gradient(sp)?;
        let rho = self.law.rho0(&sp.x_ref);
        let m = self.law.manifold();
        let proj = m.tangent_projector(&sp.nu);

        let mut piola = zero33();
        for i in 0..3 {
            for j in 0..3 {
                piola[i][j] = -g[Layout::F + 3 * i + j];
            }
        }
        let microstress: Vec<Vec3<f64>> = (0..n)
            .map(|a| {
                let o = layout.gradnu() + 3 * a;
                [-g[o], -g[o + 1], -g[o + 2]]
            })
            .collect();
        let momentum = [g[Layout::RATE], g[Layout::RATE + 1], g[Layout::RATE + 2]];
        let raw_mu = &g[layout.nu_rate()..layout.nu_rate() + n];
        let micro_momentum = manifold::apply(&proj, raw_mu);
        let d_nu = g[layout.nu()..layout.nu() + n].to_vec();
        let d_x_ref = [g[0], g[1], g[2]];

        let (elastic, de_dnu) = gradient(&sp.nu, |nu| {
            let x_ref = lift3(&sp.x_ref);
            let f = lift33(&sp.f);
            let gn: Vec<Vec3<Dual<f64>>> = sp.gradnu.iter().map(lift3).collect();
            self.law.elastic_energy(&x_ref, &f, nu, &gn)
        });
        let self_force: Vec<f64> = de_dnu.iter().map(|d| -rho * d).collect();
        let (pot, dw_dx) = gradient(&sp.x, |x| {
            self.law.potential(&[x[0], x[1], x[2]], &lift_vec(&sp.nu))
        });
        let body_force = [-dw_dx[0], -dw_dx[1], -dw_dx[2]];
        let (_, dw_dnu) = gradient(&sp.nu, |nu| self.law.potential(&lift3(&sp.x), nu));
        let micro_force: Vec<f64> = dw_dnu.iter().map(|d| -d).collect();
        let (chi, dchi_dnu) = gradient(&sp.nu, |nu| self.law.coenergy(nu, &lift_vec(&sp.nudot)));
        let kinetic_nu: Vec<f64> = dchi_dnu.iter().map(|d| rho * d).collect();
        let kappa = self.kinetic_energy_of(&sp.nu, &sp.nudot);

        let energy = dot(&momentum, &sp.xdot) + dot(&micro_momentum, &sp.nudot) - lag;
        let eshelby = eshelby_from(rho * elastic, &sp.f, &piola, &sp.gradnu, &microstress);

        Ok(DerivedPoint {
            lagrangian: lag,
            piola,
            microstress,
            self_force,
            body_force,
            micro_force,
            momentum,
            micro_momentum,
            energy,
            kappa,
            eshelby,
            d_nu,
            d_x_ref,
            rho0: rho,
            kinetic_nu,
            elastic_energy: elastic,
            coenergy: chi,
            potential: pot,
        })
    }

    fn kinetic_energy_of(&self, nu: &[f64], nudot: &[f64]) -> f64 {
        let (chi, dchi) = gradient(nudot, |v| self.law.coenergy(&lift_vec(nu), v));
        dot(nudot, &dchi) - chi
    }

    fn partials(&self, cp: &CanonicalPoint) -> Result<HamiltonianPartials> {
        self.check_constraint(&cp.nu)?;
        let layout = self.layout();
        let n = layout.n;
        let inv = self.invert(&cp.x_ref, &cp.nu, &cp.mu)?;
        let flat = layout.flatten(&Entries::from(cp));
        let (value, g) = gradient(&flat, |z| self.hamiltonian(&layout.unflatten(z), &inv));
        if let Some(k) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                entry: format!("dH/d{}", layout.label(k, "p", "mu")),
            });
        }
        let mut d_f = zero33();
        for i in 0..3 {
            for j in 0..3 {
                d_f[i][j] = g[Layout::F + 3 * i + j];
            }
        }
        Ok(HamiltonianPartials {
            value,
            d_x: [g[3], g[4], g[5]],
            d_p: [g[6], g[7], g[8]],
            d_f,
            d_nu: g[layout.nu()..layout.nu() + n].to_vec(),
            d_mu: g[layout.nu_rate()..layout.nu_rate() + n].to_vec(),
            d_gradnu: (0..n)
                .map(|a| {
                    let o = layout.gradnu() + 3 * a;
                    [g[o], g[o + 1], g[o + 2]]
                })
                .collect(),
        })
    }
}

/// ℙ = ρ₀e I − FᵀP − ∇νᵀ𝒮, with `(∇νᵀ𝒮)_ij = Σ_α ∇ν_αi 𝒮_αj`.
pub fn eshelby_from(
    energy_density: f64,
    f: &Mat3<f64>,
    piola: &Mat3<f64>,
    gradnu: &[Vec3<f64>],
    microstress: &[Vec3<f64>],
) -> Mat3<f64> {
    let ft_p = matmul(&transpose(f), piola);
    let micro = rows_t_mul(gradnu, microstress);
    let mut out = scale33(&identity(), energy_density);
    out = sub33(&out, &ft_p);
    sub33(&out, &micro)
}

fn is_positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.5 * (a[i][j] + a[j][i]);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 1e-12 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

impl<C: Constitutive> Model for MaterialModel<C> {
    fn name(&self) -> &str {
        self.law.name()
    }
    fn manifold_name(&self) -> &str {
        self.law.manifold().name()
    }
    fn ambient_dim(&self) -> usize {
        self.law.manifold().ambient_dim()
    }
    fn is_flat(&self) -> bool {
        self.law.manifold().is_flat()
    }
    fn is_homogeneous(&self) -> bool {
        self.law.is_homogeneous()
    }
    fn action_name(&self) -> Option<&str> {
        self.law.action().map(|a| a.name())
    }
    fn group_dim(&self) -> usize {
        self.law.action().map_or(0, |a| a.group_dim())
    }
    fn constraint(&self, y: &[f64]) -> Vec<f64> {
        self.law.manifold().constraint(y)
    }
    fn project(&self, y: &[f64]) -> Vec<f64> {
        self.law.manifold().project(y)
    }
    fn tangent_projector(&self, nu: &[f64]) -> Vec<Vec<f64>> {
        self.law.manifold().tangent_projector(nu)
    }
    fn generator(&self, nu: &[f64], q: &[f64]) -> Option<Vec<f64>> {
        self.law.action().map(|a| a.generator(nu, q))
    }
    fn a_operator(&self, nu: &[f64]) -> Option<Vec<Vec<f64>>> {
        self.law.action().map(|a| a.a_operator(nu))
    }
    fn rho0(&self, x_ref: &Vec3<f64>) -> f64 {
        self.law.rho0(x_ref)
    }
    fn coenergy(&self, nu: &[f64], nudot: &[f64]) -> f64 {
        self.law.coenergy(nu, nudot)
    }
    fn elastic_energy(&self, x_ref: &Vec3<f64>, f: &Mat3<f64>, nu: &[f64], gradnu: &[Vec3<f64>]) -> f64 {
        self.law.elastic_energy(x_ref, f, nu, gradnu)
    }
    fn potential(&self, x: &Vec3<f64>, nu: &[f64]) -> f64 {
        self.law.potential(x, nu)
    }
    fn lagrangian_density(&self, sp: &StatePoint) -> Result<f64> {
        self.check_constraint(&sp.nu)?;
        Ok(self.lagrangian(&Entries::from(sp)))
    }
    fn derived_fields(&self, sp: &StatePoint) -> Result<DerivedPoint> {
        self.derive(sp)
    }
    fn kinetic_energy(&self, nu: &[f64], nudot: &[f64]) -> f64 {
        self.kinetic_energy_of(nu, nudot)
    }
    fn velocity_from_momenta(
        &self,
        x_ref: &Vec3<f64>,
        nu: &[f64],
        p: &Vec3<f64>,
        mu: &[f64],
    ) -> Result<(Vec3<f64>, Vec<f64>)> {
        let rho = self.law.rho0(x_ref);
        let inv = self.invert(x_ref, nu, mu)?;
        Ok((scale3(p, 1.0 / rho), inv.rates.clone()))
    }
    fn hamiltonian_density(&self, cp: &CanonicalPoint) -> Result<f64> {
        self.check_constraint(&cp.nu)?;
        let inv = self.invert(&cp.x_ref, &cp.nu, &cp.mu)?;
        Ok(self.hamiltonian(&Entries::from(cp), &inv))
    }
    fn hamiltonian_partials(&self, cp: &CanonicalPoint) -> Result<HamiltonianPartials> {
        self.partials(cp)
    }
    fn eshelby_tensor(&self, sp: &StatePoint) -> Result<Mat3<f64>> {
        Ok(self.derive(sp)?.eshelby)
    }
    fn invariance_defect(&self, sym: &SymmetrySpec, sp: &StatePoint) -> Result<f64> {
        self.check_constraint(&sp.nu)?;
        self.invariance_defect_of(sym, sp)
    }
    fn spatial_rotation_identity(&self, sp: &StatePoint) -> Result<Vec3<f64>> {
        self.check_constraint(&sp.nu)?;
        self.spatial_rotation_residual(sp)
    }
    fn material_rotation_identity(&self, sp: &StatePoint) -> Result<Vec3<f64>> {
        self.check_constraint(&sp.nu)?;
        self.material_rotation_residual(sp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    fn sample_point() -> StatePoint {
        StatePoint {
            x_ref: [0.3, 1.1, -0.4],
            x: [0.5, 1.0, -0.2],
            xdot: [0.2, -0.1, 0.4],
            f: [[1.1, 0.2, 0.0], [-0.1, 0.95, 0.05], [0.0, 0.1, 1.02]],
            nu: vec![0.2, -0.3, 0.1],
            nudot: vec![0.05, 0.1, -0.2],
            gradnu: vec![[0.1, 0.0, 0.2], [0.0, -0.1, 0.3], [0.4, 0.2, 0.0]],
        }
    }

    #[test]
    fn m1_derived_fields_match_closed_form() {
        let (rho, k) = (1.3, 0.7);
        let m = MaterialModel::new(fixtures::QuadraticMedium::new(rho, k)).unwrap();
        let sp = sample_point();
        let d = m.derived_fields(&sp).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let strain = sp.f[i][j] - if i == j { 1.0 } else { 0.0 };
                assert!(close(d.piola[i][j], rho * strain));
                assert!(close(d.microstress[i][j], rho * sp.gradnu[i][j]));
            }
            assert!(close(d.self_force[i], -rho * sp.nu[i]));
            assert!(close(d.body_force[i], -k * sp.x[i]));
            assert!(close(d.momentum[i], rho * sp.xdot[i]));
            assert!(close(d.micro_momentum[i], rho * sp.nudot[i]));
        }
        let strain = sub33(&sp.f, &identity());
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let e = 0.5 * (strain.iter().map(|r| sq(r)).sum::<f64>() + sq(&sp.nu) + sp.gradnu.iter().map(|r| sq(r)).sum::<f64>());
        let w = 0.5 * k * norm_sq(&sp.x);
        let kin = 0.5 * (norm_sq(&sp.xdot) + norm_sq(&sp.nudot));
        assert!(close(d.lagrangian, rho * (kin - e - w)));
        assert!(close(d.energy, rho * (kin + e + w)));
    }

    #[test]
    fn m1_legendre_map_is_division_by_density() {
        let m = MaterialModel::new(fixtures::QuadraticMedium::new(2.0, 0.0)).unwrap();
        let (v, nd) = m.velocity_from_momenta(&[0.0; 3], &[0.2, 0.0, 0.1], &[1.0, -2.0, 0.5], &[0.4, 0.0, -0.6]).unwrap();
        assert_eq!(v, [0.5, -1.0, 0.25]);
        assert!(nd.iter().zip([0.2, 0.0, -0.3]).all(|(a, b)| close(*a, b)));
    }

    #[test]
    fn hamiltonian_equals_energy_at_matching_momenta() {
        let m = MaterialModel::new(fixtures::Director::new(1.0, 0.5, 0.3)).unwrap();
        let mut sp = sample_point();
        sp.nu = m.project(&sp.nu);
        let proj = m.tangent_projector(&sp.nu);
        sp.nudot = manifold::apply(&proj, &sp.nudot);
        for a in 0..3 {
            let col = manifold::apply(&proj, &[sp.gradnu[0][a], sp.gradnu[1][a], sp.gradnu[2][a]]);
            for (r, c) in col.iter().enumerate() {
                sp.gradnu[r][a] = *c;
            }
        }
        let d = m.derived_fields(&sp).unwrap();
        let cp = CanonicalPoint {
            x_ref: sp.x_ref,
            x: sp.x,
            p: d.momentum,
            f: sp.f,
            nu: sp.nu.clone(),
            mu: d.micro_momentum.clone(),
            gradnu: sp.gradnu.clone(),
        };
        assert!(close(m.hamiltonian_density(&cp).unwrap(), d.energy));
        let (v, nd) = m.velocity_from_momenta(&cp.x_ref, &cp.nu, &cp.p, &cp.mu).unwrap();
        assert!(v.iter().zip(&sp.xdot).all(|(a, b)| close(*a, *b)));
        assert!(nd.iter().zip(&sp.nudot).all(|(a, b)| close(*a, *b)));
    }

    #[test]
    fn off_manifold_state_is_rejected() {
        let m = MaterialModel::new(fixtures::Director::default()).unwrap();
        let mut sp = sample_point();
        sp.nu = vec![1.0, 1.0, 0.0];
        assert!(m.derived_fields(&sp).is_err());
    }
}
