//! Order-parameter manifolds embedded in a flat ambient space.
//!
//! The embedding fixes both the metric and the connection: covariant
//! gradients are ambient gradients followed by the tangent projector.

use crate::scalar::Scalar;
use crate::tensor::dot;

pub trait Manifold: Send + Sync + 'static {
    fn name(&self) -> &str;
    fn ambient_dim(&self) -> usize;
    fn intrinsic_dim(&self) -> usize;
    /// Residual vector of length `ambient_dim − intrinsic_dim`; zero on ℳ.
    fn constraint<S: Scalar>(&self, y: &[S]) -> Vec<S>;
    /// Nearest point of ℳ.
    fn project<S: Scalar>(&self, y: &[S]) -> Vec<S>;
    /// Symmetric idempotent projector onto the tangent space at `nu`.
    fn tangent_projector<S: Scalar>(&self, nu: &[S]) -> Vec<Vec<S>>;
    /// True when ℳ is the whole ambient space (projection is the identity).
    fn is_flat(&self) -> bool;
}

/// Applies a projector matrix to a vector.
pub fn apply<S: Scalar>(proj: &[Vec<S>], v: &[S]) -> Vec<S> {
    proj.iter().map(|row| dot(row, v)).collect()
}

/// Ambient space ℝⁿ itself.
#[derive(Clone, Debug)]
pub struct Euclidean {
    dim: usize,
    name: String,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            name: format!("R{dim}"),
        }
    }
}

impl Manifold for Euclidean {
    fn name(&self) -> &str {
        &self.name
    }
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn intrinsic_dim(&self) -> usize {
        self.dim
    }
    fn constraint<S: Scalar>(&self, _y: &[S]) -> Vec<S> {
        Vec::new()
    }
    fn project<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        y.to_vec()
    }
    fn tangent_projector<S: Scalar>(&self, _nu: &[S]) -> Vec<Vec<S>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| if i == j { S::one() } else { S::zero() })
                    .collect()
            })
            .collect()
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// Unit sphere `Sⁿ⁻¹ ⊂ ℝⁿ` (directors for n = 3).
#[derive(Clone, Debug)]
pub struct Sphere {
    ambient: usize,
    name: String,
}

impl Sphere {
    pub fn new(ambient: usize) -> Self {
        assert!(ambient >= 2, "sphere needs ambient dimension ≥ 2");
        Self {
            ambient,
            name: format!("S{}", ambient - 1),
        }
    }
}

impl Manifold for Sphere {
    fn name(&self) -> &str {
        &self.name
    }
    fn ambient_dim(&self) -> usize {
        self.ambient
    }
    fn intrinsic_dim(&self) -> usize {
        self.ambient - 1
    }
    fn constraint<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        vec![dot(y, y) - S::one()]
    }
    fn project<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        let n = dot(y, y).sqrt();
        y.iter().map(|&v| v / n).collect()
    }
    fn tangent_projector<S: Scalar>(&self, nu: &[S]) -> Vec<Vec<S>> {
        // I − ν⊗ν/|ν|², exact idempotent even slightly off the sphere
        let inv = S::one() / dot(nu, nu);
        (0..self.ambient)
            .map(|i| {
                (0..self.ambient)
                    .map(|j| {
                        let d = if i == j { S::one() } else { S::zero() };
                        d - nu[i] * nu[j] * inv
                    })
                    .collect()
            })
            .collect()
    }
    fn is_flat(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn sphere_projection_properties() {
        let s = Sphere::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = s.project(&y);
            let pp = s.project(&p);
            for k in 0..3 {
                assert!((p[k] - pp[k]).abs() <= 1e-12);
            }
            assert!(s.constraint(&p)[0].abs() <= 1e-10);
            let t = s.tangent_projector(&p);
            let tt = matmul(&t, &t);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((t[i][j] - t[j][i]).abs() <= 1e-12);
                    assert!((tt[i][j] - t[i][j]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn euclidean_is_identity() {
        let e = Euclidean::new(3);
        let y = [0.2, -0.4, 0.9];
        assert_eq!(e.project(&y), y.to_vec());
        assert!(e.constraint(&y).is_empty());
        assert_eq!(apply(&e.tangent_projector(&y), &y), y.to_vec());
    }
}
