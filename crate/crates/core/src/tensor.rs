//! Small fixed-size vectors and matrices over any [`Scalar`].
//!
//! Matrices are row-major: `m[i][j]` is row `i`, column `j`. For a placement
//! gradient `F[a][J] = ∂x_a/∂X_J`; the divergence of a two-point tensor
//! contracts its second index.

use crate::scalar::Scalar;

pub type Vec3<S> = [S; 3];
pub type Mat3<S> = [[S; 3]; 3];

pub fn zero3<S: Scalar>() -> Vec3<S> {
    [S::zero(); 3]
}

pub fn zero33<S: Scalar>() -> Mat3<S> {
    [[S::zero(); 3]; 3]
}

pub fn identity<S: Scalar>() -> Mat3<S> {
    let mut m = zero33();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn lift3<S: Scalar>(v: &Vec3<f64>) -> Vec3<S> {
    [S::from_f64(v[0]), S::from_f64(v[1]), S::from_f64(v[2])]
}

pub fn lift33<S: Scalar>(m: &Mat3<f64>) -> Mat3<S> {
    [lift3(&m[0]), lift3(&m[1]), lift3(&m[2])]
}

pub fn lift_vec<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|&x| S::from_f64(x)).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

pub fn cross<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add3<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3<S: Scalar>(a: &Vec3<S>, s: S) -> Vec3<S> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn matvec<S: Scalar>(m: &Mat3<S>, v: &Vec3<S>) -> Vec3<S> {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// `mᵀ v`
pub fn matvec_t<S: Scalar>(m: &Mat3<S>, v: &Vec3<S>) -> Vec3<S> {
    let mut out = zero3();
    for (i, row) in m.iter().enumerate() {
        for j in 0..3 {
            out[j] += row[j] * v[i];
        }
    }
    out
}

pub fn matmul<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = zero33();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = S::zero();
            for k in 0..3 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn transpose<S: Scalar>(m: &Mat3<S>) -> Mat3<S> {
    let mut out = zero33();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn add33<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn sub33<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn scale33<S: Scalar>(a: &Mat3<S>, s: S) -> Mat3<S> {
    let mut out = *a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

/// Frobenius product `a : b`.
pub fn ddot<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> S {
    let mut acc = S::zero();
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i][j] * b[i][j];
        }
    }
    acc
}

pub fn trace<S: Scalar>(m: &Mat3<S>) -> S {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det<S: Scalar>(m: &Mat3<S>) -> S {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Matrix of `u ↦ a × u`.
pub fn cross_matrix<S: Scalar>(a: &Vec3<S>) -> Mat3<S> {
    let z = S::zero();
    [[z, -a[2], a[1]], [a[2], z, -a[0]], [-a[1], a[0], z]]
}

/// Axial vector `a` of the skew part of `m`, so that `skw(m) u = a × u`.
pub fn axial<S: Scalar>(m: &Mat3<S>) -> Vec3<S> {
    let half = S::from_f64(0.5);
    [
        (m[2][1] - m[1][2]) * half,
        (m[0][2] - m[2][0]) * half,
        (m[1][0] - m[0][1]) * half,
    ]
}

/// `aᵀ b` for ambient-row matrices (`a[α][i]`, `b[α][j]`), summed over α.
pub fn rows_t_mul<S: Scalar>(a: &[Vec3<S>], b: &[Vec3<S>]) -> Mat3<S> {
    let mut out = zero33();
    for (ra, rb) in a.iter().zip(b) {
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += ra[i] * rb[j];
            }
        }
    }
    out
}

pub fn flatten33(m: &Mat3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[i][j];
        }
    }
    out
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..n {
                    m[row][k] -= factor * m[col][k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axial_inverts_cross_matrix() {
        let a = [0.3, -1.2, 2.5];
        let ax = axial(&cross_matrix(&a));
        for k in 0..3 {
            assert!((ax[k] - a[k]).abs() < 1e-15);
        }
        let u = [1.0, 2.0, -0.5];
        let lhs = matvec(&cross_matrix(&a), &u);
        let rhs = cross(&a, &u);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dense_solve() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let x = solve_dense(&a, &[3.0, 5.0, 5.0]).unwrap();
        for (k, v) in x.iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-14, "x[{k}] = {v}");
        }
        assert!(solve_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn determinant_of_rotation_is_one() {
        let t: f64 = 0.4;
        let r = [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        assert!((det(&r) - 1.0).abs() < 1e-15);
    }
}
