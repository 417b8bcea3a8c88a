//! Lie group actions on order-parameter manifolds.

use crate::scalar::Scalar;

pub trait GroupAction: Send + Sync + 'static {
    fn name(&self) -> &str;
    fn group_dim(&self) -> usize;
    /// Infinitesimal generator ξ_M(ν) along the algebra vector `q`.
    fn generator<S: Scalar>(&self, nu: &[S], q: &[S]) -> Vec<S>;

    /// Matrix 𝒜(ν) (ambient × group) with ξ_M(ν) = 𝒜 q.
    fn a_operator<S: Scalar>(&self, nu: &[S]) -> Vec<Vec<S>> {
        let g = self.group_dim();
        let mut cols = Vec::with_capacity(g);
        for k in 0..g {
            let q: Vec<S> = (0..g)
                .map(|i| if i == k { S::one() } else { S::zero() })
                .collect();
            cols.push(self.generator(nu, &q));
        }
        (0..nu.len())
            .map(|a| (0..g).map(|k| cols[k][a]).collect())
            .collect()
    }
}

/// SO(3) acting on ambient 3-vectors by rotation, ξ_M(ν) = q × ν.
///
/// Also accepts the empty order parameter (simple bodies), on which the
/// action is trivial.
#[derive(Clone, Debug, Default)]
pub struct So3Rotation;

impl GroupAction for So3Rotation {
    fn name(&self) -> &str {
        "SO(3)"
    }
    fn group_dim(&self) -> usize {
        3
    }
    fn generator<S: Scalar>(&self, nu: &[S], q: &[S]) -> Vec<S> {
        match nu.len() {
            0 => Vec::new(),
            3 => vec![
                q[1] * nu[2] - q[2] * nu[1],
                q[2] * nu[0] - q[0] * nu[2],
                q[0] * nu[1] - q[1] * nu[0],
            ],
            n => panic!("SO(3) rotation acts on 3-vectors, got ambient dimension {n}"),
        }
    }
}

/// Placeholder for models without an attached action.
#[derive(Clone, Debug, Default)]
pub struct NoAction;

impl GroupAction for NoAction {
    fn name(&self) -> &str {
        "none"
    }
    fn group_dim(&self) -> usize {
        0
    }
    fn generator<S: Scalar>(&self, nu: &[S], _q: &[S]) -> Vec<S> {
        vec![S::zero(); nu.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::manifold::{apply, Manifold, Sphere};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_is_tangent_linear_and_matches_a() {
        let s = Sphere::new(3);
        let act = So3Rotation;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nu = s.project(&raw);
            let q1: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q2: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xi = act.generator(&nu, &q1);
            let pt = apply(&s.tangent_projector(&nu), &xi);
            for k in 0..3 {
                assert!((pt[k] - xi[k]).abs() <= 1e-10);
            }
            let sum: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
            let lhs = act.generator(&nu, &sum);
            let x2 = act.generator(&nu, &q2);
            let a = act.a_operator(&nu);
            let aq = apply(&a, &q1);
            for k in 0..3 {
                assert!((lhs[k] - (2.0 * xi[k] - 3.0 * x2[k])).abs() <= 1e-12);
                assert!((aq[k] - xi[k]).abs() <= 1e-12);
            }
        }
    }
}
