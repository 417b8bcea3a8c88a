//! Built-in constitutive laws.
//!
//! `M1`, `M2-director` and `M3-point` anchor most checks; the remaining laws
//! exist to exercise one identity each (objectivity, referential isotropy,
//! and deliberately broken variants of both).

use std::f64::consts::PI;

use super::action::{NoAction, So3Rotation};
use super::manifold::{Euclidean, Sphere};
use super::Constitutive;
use crate::scalar::{lit, Scalar};
use crate::tensor::*;

fn half<S: Scalar>() -> S {
    lit(0.5)
}

fn right_cauchy_green<S: Scalar>(f: &Mat3<S>) -> Mat3<S> {
    matmul(&transpose(f), f)
}

fn frob_sq<S: Scalar>(m: &Mat3<S>) -> S {
    ddot(m, m)
}

fn grad_sq<S: Scalar>(g: &[Vec3<S>]) -> S {
    g.iter().fold(S::zero(), |acc, row| acc + norm_sq(row))
}

/// M1: ℝ³ order parameter, quadratic in everything.
///
/// ρ₀ = rho0·(1 + amp·sin(2πX₁/period)), χ = ½|ν̇|²,
/// e = ½|F − I|² + ½|ν|² + ½|∇ν|², w = ½k|x|².
#[derive(Clone, Debug)]
pub struct QuadraticMedium {
    pub rho0: f64,
    pub spring: f64,
    pub rho_amp: f64,
    pub rho_period: f64,
    manifold: Euclidean,
}

impl QuadraticMedium {
    pub fn new(rho0: f64, spring: f64) -> Self {
        Self {
            rho0,
            spring,
            rho_amp: 0.0,
            rho_period: 1.0,
            manifold: Euclidean::new(3),
        }
    }

    /// Explicitly inhomogeneous variant with periodic density modulation.
    pub fn inhomogeneous(rho0: f64, amp: f64, period: f64) -> Self {
        Self {
            rho_amp: amp,
            rho_period: period,
            ..Self::new(rho0, 0.0)
        }
    }
}

impl Default for QuadraticMedium {
    fn default() -> Self {
        Self::new(1.0, 0.0)
    }
}

impl Constitutive for QuadraticMedium {
    type Manifold = Euclidean;
    type Action = NoAction;

    fn name(&self) -> &str {
        if self.rho_amp != 0.0 {
            "M1-inhomogeneous"
        } else {
            "M1"
        }
    }
    fn manifold(&self) -> &Euclidean {
        &self.manifold
    }
    fn action(&self) -> Option<&NoAction> {
        None
    }
    fn rho0<S: Scalar>(&self, x_ref: &Vec3<S>) -> S {
        if self.rho_amp == 0.0 {
            return lit(self.rho0);
        }
        let phase = x_ref[0] * lit(2.0 * PI / self.rho_period);
        lit::<S>(self.rho0) * (S::one() + lit::<S>(self.rho_amp) * phase.sin())
    }
    fn coenergy<S: Scalar>(&self, _nu: &[S], nudot: &[S]) -> S {
        half::<S>() * norm_sq(nudot)
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, f: &Mat3<S>, nu: &[S], gradnu: &[Vec3<S>]) -> S {
        let strain = sub33(f, &identity());
        half::<S>() * (frob_sq(&strain) + norm_sq(nu) + grad_sq(gradnu))
    }
    fn potential<S: Scalar>(&self, x: &Vec3<S>, _nu: &[S]) -> S {
        half::<S>() * lit(self.spring) * norm_sq(x)
    }
    fn is_homogeneous(&self) -> bool {
        self.rho_amp == 0.0
    }
}

/// M2: director medium on S² with the SO(3) rotation action.
///
/// χ = ½|ν̇|², e = ½frank|∇ν|² + ¼stiffness|FᵀF − I|² + ½coupling|Fᵀν|².
/// Every term is invariant under x ↦ Qx, ν ↦ Qν.
#[derive(Clone, Debug)]
pub struct Director {
    pub frank: f64,
    pub stiffness: f64,
    pub coupling: f64,
    manifold: Sphere,
    action: So3Rotation,
}

impl Director {
    pub fn new(frank: f64, stiffness: f64, coupling: f64) -> Self {
        Self {
            frank,
            stiffness,
            coupling,
            manifold: Sphere::new(3),
            action: So3Rotation,
        }
    }
}

impl Default for Director {
    fn default() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }
}

impl Constitutive for Director {
    type Manifold = Sphere;
    type Action = So3Rotation;

    fn name(&self) -> &str {
        "M2-director"
    }
    fn manifold(&self) -> &Sphere {
        &self.manifold
    }
    fn action(&self) -> Option<&So3Rotation> {
        Some(&self.action)
    }
    fn rho0<S: Scalar>(&self, _x_ref: &Vec3<S>) -> S {
        S::one()
    }
    fn coenergy<S: Scalar>(&self, _nu: &[S], nudot: &[S]) -> S {
        half::<S>() * norm_sq(nudot)
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, f: &Mat3<S>, nu: &[S], gradnu: &[Vec3<S>]) -> S {
        let mut e = half::<S>() * lit(self.frank) * grad_sq(gradnu);
        if self.stiffness != 0.0 {
            let strain = sub33(&right_cauchy_green(f), &identity());
            e += lit::<S>(0.25 * self.stiffness) * frob_sq(&strain);
        }
        if self.coupling != 0.0 {
            let ft_nu = matvec_t(f, &[nu[0], nu[1], nu[2]]);
            e += half::<S>() * lit(self.coupling) * norm_sq(&ft_nu);
        }
        e
    }
    fn potential<S: Scalar>(&self, _x: &Vec3<S>, _nu: &[S]) -> S {
        S::zero()
    }
}

/// M3: structureless point with w = w0 + ½k|x − x₀|² (e = 0).
#[derive(Clone, Debug)]
pub struct PointMass {
    pub rho0: f64,
    pub spring: f64,
    pub anchor: Vec3<f64>,
    pub offset: f64,
    manifold: Euclidean,
}

impl PointMass {
    pub fn new(rho0: f64, spring: f64, anchor: Vec3<f64>) -> Self {
        Self {
            rho0,
            spring,
            anchor,
            offset: 0.0,
            manifold: Euclidean::new(0),
        }
    }

    pub fn free(rho0: f64) -> Self {
        Self::new(rho0, 0.0, [0.0; 3])
    }

    pub fn with_offset(mut self, w0: f64) -> Self {
        self.offset = w0;
        self
    }
}

impl Default for PointMass {
    fn default() -> Self {
        Self::new(1.0, 1.0, [0.0; 3])
    }
}

impl Constitutive for PointMass {
    type Manifold = Euclidean;
    type Action = NoAction;

    fn name(&self) -> &str {
        "M3-point"
    }
    fn manifold(&self) -> &Euclidean {
        &self.manifold
    }
    fn action(&self) -> Option<&NoAction> {
        None
    }
    fn rho0<S: Scalar>(&self, _x_ref: &Vec3<S>) -> S {
        lit(self.rho0)
    }
    fn coenergy<S: Scalar>(&self, _nu: &[S], _nudot: &[S]) -> S {
        S::zero()
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, _f: &Mat3<S>, _nu: &[S], _gradnu: &[Vec3<S>]) -> S {
        S::zero()
    }
    fn potential<S: Scalar>(&self, x: &Vec3<S>, _nu: &[S]) -> S {
        let d = sub3(x, &lift3(&self.anchor));
        lit::<S>(self.offset) + half::<S>() * lit(self.spring) * norm_sq(&d)
    }
}

/// Non-quadratic co-energy χ = ¼|ν̇|⁴ on ℝ³, e = ½|ν|² + ½|∇ν|².
#[derive(Clone, Debug)]
pub struct QuarticCoenergy {
    manifold: Euclidean,
}

impl Default for QuarticCoenergy {
    fn default() -> Self {
        Self {
            manifold: Euclidean::new(3),
        }
    }
}

impl Constitutive for QuarticCoenergy {
    type Manifold = Euclidean;
    type Action = NoAction;

    fn name(&self) -> &str {
        "quartic"
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
        let s = norm_sq(nudot);
        lit::<S>(0.25) * s * s
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, _f: &Mat3<S>, nu: &[S], gradnu: &[Vec3<S>]) -> S {
        half::<S>() * (norm_sq(nu) + grad_sq(gradnu))
    }
    fn potential<S: Scalar>(&self, _x: &Vec3<S>, _nu: &[S]) -> S {
        S::zero()
    }
}

/// Which single-term elastic energy a [`SimpleBody`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleEnergy {
    /// ¼|FᵀF − I|², frame-indifferent.
    Objective,
    /// F₁₂², violates frame indifference.
    ShearPenalty,
    /// |F m|² for a fixed unit m, referentially anisotropic.
    Fiber,
}

/// Body without substructure (empty order parameter) with SO(3) attached
/// trivially, so rotation identities are defined.
#[derive(Clone, Debug)]
pub struct SimpleBody {
    pub energy: SimpleEnergy,
    pub fiber: Vec3<f64>,
    manifold: Euclidean,
    action: So3Rotation,
}

impl SimpleBody {
    pub fn new(energy: SimpleEnergy) -> Self {
        let s = 1.0 / 3.0_f64.sqrt();
        Self {
            energy,
            fiber: [s, s, s],
            manifold: Euclidean::new(0),
            action: So3Rotation,
        }
    }
}

impl Constitutive for SimpleBody {
    type Manifold = Euclidean;
    type Action = So3Rotation;

    fn name(&self) -> &str {
        match self.energy {
            SimpleEnergy::Objective => "simple-objective",
            SimpleEnergy::ShearPenalty => "shear-penalty",
            SimpleEnergy::Fiber => "anisotropic-fiber",
        }
    }
    fn manifold(&self) -> &Euclidean {
        &self.manifold
    }
    fn action(&self) -> Option<&So3Rotation> {
        Some(&self.action)
    }
    fn rho0<S: Scalar>(&self, _x_ref: &Vec3<S>) -> S {
        S::one()
    }
    fn coenergy<S: Scalar>(&self, _nu: &[S], _nudot: &[S]) -> S {
        S::zero()
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, f: &Mat3<S>, _nu: &[S], _gradnu: &[Vec3<S>]) -> S {
        match self.energy {
            SimpleEnergy::Objective => {
                let strain = sub33(&right_cauchy_green(f), &identity());
                lit::<S>(0.25) * frob_sq(&strain)
            }
            SimpleEnergy::ShearPenalty => f[0][1] * f[0][1],
            SimpleEnergy::Fiber => {
                let fm = matvec(f, &lift3(&self.fiber));
                norm_sq(&fm)
            }
        }
    }
    fn potential<S: Scalar>(&self, _x: &Vec3<S>, _nu: &[S]) -> S {
        S::zero()
    }
}

/// Referentially isotropic medium with an ℝ³ order parameter:
/// e = ½|F|² + ⅛(tr C)² + ¼ tr(C²)·0.1 + ½|ν|² + ½|∇ν|² + ¼|∇ν|⁴.
#[derive(Clone, Debug)]
pub struct IsotropicMicro {
    manifold: Euclidean,
}

impl Default for IsotropicMicro {
    fn default() -> Self {
        Self {
            manifold: Euclidean::new(3),
        }
    }
}

impl Constitutive for IsotropicMicro {
    type Manifold = Euclidean;
    type Action = NoAction;

    fn name(&self) -> &str {
        "isotropic-micro"
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
        half::<S>() * norm_sq(nudot)
    }
    fn elastic_energy<S: Scalar>(&self, _x_ref: &Vec3<S>, f: &Mat3<S>, nu: &[S], gradnu: &[Vec3<S>]) -> S {
        let c = right_cauchy_green(f);
        let tr = trace(&c);
        let tr2 = trace(&matmul(&c, &c));
        let g = grad_sq(gradnu);
        half::<S>() * frob_sq(f)
            + lit::<S>(0.125) * tr * tr
            + lit::<S>(0.025) * tr2
            + half::<S>() * norm_sq(nu)
            + half::<S>() * g
            + lit::<S>(0.25) * g * g
    }
    fn potential<S: Scalar>(&self, _x: &Vec3<S>, _nu: &[S]) -> S {
        S::zero()
    }
}
