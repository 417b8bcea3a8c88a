//! Pointwise consequences of invariance: the directional derivative of 𝓛
//! along a symmetry family, and the two rotational identities.

use super::{Constitutive, Entries, GroupAction, MaterialModel, StatePoint};
use crate::error::{Error, Result};
use crate::noether::SymmetrySpec;
use crate::scalar::Dual;
use crate::tensor::*;

type D = Dual<f64>;

impl<C: Constitutive> MaterialModel<C> {
    /// Derivative at s = 0 of 𝓛 along the composed one-parameter families:
    /// X ↦ X + s w, x ↦ x + s v, ν ↦ ν + s ξ_M(ν), with the induced first
    /// order changes of ẋ, F, ν̇ and ∇ν.
    pub(crate) fn invariance_defect_of(&self, sym: &SymmetrySpec, sp: &StatePoint) -> Result<f64> {
        let n = sp.nu.len();
        let gv = sym.v.linear;
        let gw = sym.w.linear;
        let w = sym.w.eval(&sp.x_ref);
        let v = sym.v.eval(&sp.x);

        let (xi, dxi_rate, dxi_grad) = match &sym.algebra_dir {
            Some(q) => {
                let action = self
                    .law()
                    .action()
                    .ok_or_else(|| Error::Symmetry("algebra direction given but the model has no group action".into()))?;
                let xi = action.generator(&sp.nu, q);
                let q_l: Vec<D> = lift_vec(q);
                let directional = |dir: &[f64]| -> Vec<f64> {
                    let nu_d: Vec<D> = sp.nu.iter().zip(dir).map(|(&a, &b)| Dual::new(a, b)).collect();
                    action.generator(&nu_d, &q_l).iter().map(|d| d.eps).collect()
                };
                let dr = directional(&sp.nudot);
                let dg: Vec<Vec<f64>> = (0..3)
                    .map(|k| {
                        let col: Vec<f64> = sp.gradnu.iter().map(|row| row[k]).collect();
                        directional(&col)
                    })
                    .collect();
                (xi, dr, dg)
            }
            None => (vec![0.0; n], vec![0.0; n], vec![vec![0.0; n]; 3]),
        };

        let pair = |re: f64, eps: f64| Dual::new(re, eps);
        let x_ref: Vec3<D> = [0, 1, 2].map(|i| pair(sp.x_ref[i], w[i]));
        let x: Vec3<D> = [0, 1, 2].map(|i| pair(sp.x[i], v[i]));
        let gv_xdot = matvec(&gv, &sp.xdot);
        let rate: Vec3<D> = [0, 1, 2].map(|i| pair(sp.xdot[i], gv_xdot[i]));
        let df = sub33(&matmul(&gv, &sp.f), &matmul(&sp.f, &gw));
        let mut f = zero33::<D>();
        for i in 0..3 {
            for j in 0..3 {
                f[i][j] = pair(sp.f[i][j], df[i][j]);
            }
        }
        let nu: Vec<D> = (0..n).map(|a| pair(sp.nu[a], xi[a])).collect();
        let nu_rate: Vec<D> = (0..n).map(|a| pair(sp.nudot[a], dxi_rate[a])).collect();
        let gradnu: Vec<Vec3<D>> = (0..n)
            .map(|a| {
                [0, 1, 2].map(|k| {
                    let mut eps = dxi_grad[k][a];
                    for l in 0..3 {
                        eps -= sp.gradnu[a][l] * gw[l][k];
                    }
                    pair(sp.gradnu[a][k], eps)
                })
            })
            .collect();
        let e = Entries {
            x_ref,
            x,
            rate,
            f,
            nu,
            nu_rate,
            gradnu,
        };
        Ok(self.lagrangian(&e).eps)
    }

    /// axial(skw(∂_F𝓛 Fᵀ)) + ½(𝒜ᵀ∂_ν𝓛 + Σ_K (∂𝒜[∂_Kν])ᵀ ∂_{∇ν}𝓛 e_K).
    ///
    /// Vanishes when 𝓛 is invariant under simultaneous spatial rotation of x
    /// and of ν by the attached SO(3) action.
    pub(crate) fn spatial_rotation_residual(&self, sp: &StatePoint) -> Result<Vec3<f64>> {
        let action = self
            .law()
            .action()
            .ok_or_else(|| Error::Config(format!("model `{}` has no group action", self.law().name())))?;
        if action.group_dim() != 3 {
            return Err(Error::Config("rotation identity needs a 3-dimensional algebra".into()));
        }
        let d = self.derive(sp)?;
        let n = sp.nu.len();
        let dl_df = scale33(&d.piola, -1.0);
        let lhs = axial(&matmul(&dl_df, &transpose(&sp.f)));

        let a = action.a_operator(&sp.nu);
        let mut rhs = [0.0; 3];
        for (alpha, row) in a.iter().enumerate() {
            for k in 0..3 {
                rhs[k] += row[k] * d.d_nu[alpha];
            }
        }
        for col in 0..3 {
            let nu_d: Vec<D> = (0..n).map(|al| Dual::new(sp.nu[al], sp.gradnu[al][col])).collect();
            let da = action.a_operator(&nu_d);
            for (alpha, row) in da.iter().enumerate() {
                // ∂_{∇ν}𝓛 = −𝒮
                let flux = -d.microstress[alpha][col];
                for k in 0..3 {
                    rhs[k] += row[k].eps * flux;
                }
            }
        }
        Ok([0, 1, 2].map(|k| lhs[k] + 0.5 * rhs[k]))
    }

    /// axial(skw(Fᵀ∂_F𝓛 + ∇νᵀ∂_{∇ν}𝓛)); zero for referentially isotropic,
    /// homogeneous materials.
    pub(crate) fn material_rotation_residual(&self, sp: &StatePoint) -> Result<Vec3<f64>> {
        let d = self.derive(sp)?;
        let ft_p = matmul(&transpose(&sp.f), &d.piola);
        let micro = rows_t_mul(&sp.gradnu, &d.microstress);
        let total = scale33(&add33(&ft_p, &micro), -1.0);
        Ok(axial(&total))
    }
}
