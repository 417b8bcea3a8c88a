//! Inversion of the momentum map μ = ρ₀ P_T ∂_ν̇χ(ν, ν̇) on the tangent space.
//!
//! The real-valued solve is a damped Newton iteration started at μ/ρ₀. For
//! dual-valued arguments the converged real solution is lifted and corrected
//! with the frozen real Jacobian; since that Jacobian is exact at the
//! solution, the derivative parts converge in a single step.

use super::manifold::{apply, Manifold};
use super::{Constitutive, MaterialModel};
use crate::error::{Error, Result};
use crate::scalar::{lit, Dual, Scalar};
use crate::tensor::{dot, lift_vec, solve_dense, Vec3};

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 50;
const REFINE_STEPS: usize = 2;

/// Converged real rates and the inverse Legendre Jacobian at them.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub rates: Vec<f64>,
    pub(crate) jac_inv: Vec<Vec<f64>>,
}

impl<C: Constitutive> MaterialModel<C> {
    /// Gradient of χ in ν̇, generic in the scalar type.
    fn coenergy_rate_gradient<S: Scalar>(&self, nu: &[S], rate: &[S]) -> Vec<S> {
        let nu_l: Vec<Dual<S>> = nu.iter().map(|&v| Dual::constant(v)).collect();
        (0..rate.len())
            .map(|k| {
                let r: Vec<Dual<S>> = rate
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if i == k { Dual::variable(v) } else { Dual::constant(v) })
                    .collect();
                self.law().coenergy(&nu_l, &r).eps
            })
            .collect()
    }

    /// Hessian of χ in ν̇ by nested duals.
    fn coenergy_rate_hessian(&self, nu: &[f64], rate: &[f64]) -> Vec<Vec<f64>> {
        let n = rate.len();
        let nu_l: Vec<Dual<Dual<f64>>> = nu.iter().map(|&v| lit(v)).collect();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let r: Vec<Dual<Dual<f64>>> = (0..n)
                    .map(|k| {
                        let inner = Dual::new(rate[k], if k == i { 1.0 } else { 0.0 });
                        let outer = Dual::new(if k == j { 1.0 } else { 0.0 }, 0.0);
                        Dual::new(inner, outer)
                    })
                    .collect();
                let v = self.law().coenergy(&nu_l, &r).eps.eps;
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        h
    }

    /// `J = ρ₀ P H + (I − P)`, the Jacobian of the inversion residual.
    pub(crate) fn legendre_jacobian(&self, nu: &[f64], rate: &[f64], rho: f64) -> Vec<Vec<f64>> {
        let n = nu.len();
        let proj = self.law().manifold().tangent_projector(nu);
        let h = self.coenergy_rate_hessian(nu, rate);
        let mut j = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let ph: f64 = (0..n).map(|k| proj[a][k] * h[k][b]).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                j[a][b] = rho * ph + id - proj[a][b];
            }
        }
        j
    }

    fn inversion_residual<S: Scalar>(&self, nu: &[S], mu: &[S], rate: &[S], rho: S, proj: &[Vec<S>]) -> Vec<S> {
        let g = self.coenergy_rate_gradient(nu, rate);
        let diff: Vec<S> = g.iter().zip(mu).map(|(&gk, &m)| rho * gk - m).collect();
        let pd = apply(proj, &diff);
        let prate = apply(proj, rate);
        (0..rate.len())
            .map(|k| pd[k] + rate[k] - prate[k])
            .collect()
    }

    /// Real-valued inversion of the substructural momentum map.
    pub(crate) fn invert(&self, x_ref: &Vec3<f64>, nu: &[f64], mu: &[f64]) -> Result<Inversion> {
        let n = nu.len();
        if n == 0 {
            return Ok(Inversion {
                rates: Vec::new(),
                jac_inv: Vec::new(),
            });
        }
        let rho = self.law().rho0(x_ref);
        let proj = self.law().manifold().tangent_projector(nu);
        let mu_t = apply(&proj, mu);
        let scale = dot(&mu_t, &mu_t).sqrt().max(1.0);
        let mut rate: Vec<f64> = mu_t.iter().map(|m| m / rho).collect();
        let mut r = self.inversion_residual(nu, &mu_t, &rate, rho, &proj);
        let mut rnorm = dot(&r, &r).sqrt();
        let mut iter = 0;
        while rnorm > TOL * scale {
            if iter == MAX_ITER {
                return Err(Error::LegendreInversion {
                    iterations: MAX_ITER,
                    residual: rnorm,
                });
            }
            iter += 1;
            let jac = self.legendre_jacobian(nu, &rate, rho);
            let step = solve_dense(&jac, &r).ok_or(Error::LegendreInversion {
                iterations: iter,
                residual: rnorm,
            })?;
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = rate.iter().zip(&step).map(|(v, s)| v - alpha * s).collect();
                let tr = self.inversion_residual(nu, &mu_t, &trial, rho, &proj);
                let tn = dot(&tr, &tr).sqrt();
                if tn < (1.0 - 1e-4 * alpha) * rnorm || alpha < 1e-6 {
                    rate = trial;
                    r = tr;
                    rnorm = tn;
                    break;
                }
                alpha *= 0.5;
            }
        }
        let jac = self.legendre_jacobian(nu, &rate, rho);
        let mut jac_inv = vec![vec![0.0; n]; n];
        for col in 0..n {
            let e: Vec<f64> = (0..n).map(|k| if k == col { 1.0 } else { 0.0 }).collect();
            let c = solve_dense(&jac, &e).ok_or(Error::LegendreInversion {
                iterations: iter,
                residual: rnorm,
            })?;
            for row in 0..n {
                jac_inv[row][col] = c[row];
            }
        }
        Ok(Inversion { rates: rate, jac_inv })
    }

    /// Rates at (possibly dual-valued) arguments, seeded by a real inversion
    /// computed at their primal values.
    pub(crate) fn refine_rates<S: Scalar>(&self, x_ref: &Vec3<S>, nu: &[S], mu: &[S], inv: &Inversion) -> Vec<S> {
        let n = nu.len();
        if n == 0 {
            return Vec::new();
        }
        let rho = self.law().rho0(x_ref);
        let proj = self.law().manifold().tangent_projector(nu);
        let mu_t = apply(&proj, mu);
        let mut rate: Vec<S> = lift_vec(&inv.rates);
        for _ in 0..REFINE_STEPS {
            let r = self.inversion_residual(nu, &mu_t, &rate, rho, &proj);
            for a in 0..n {
                let mut corr = S::zero();
                for b in 0..n {
                    corr += lit::<S>(inv.jac_inv[a][b]) * r[b];
                }
                rate[a] -= corr;
            }
        }
        rate
    }
}
