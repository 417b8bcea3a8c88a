//! Structured rectangular grids and finite-difference stencils.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::tensor::*;

/// Boundary role of a non-periodic face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceTag {
    /// Placement and order parameter prescribed.
    Dirichlet,
    /// Traction and microtraction prescribed through surface potentials.
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisBoundary {
    Periodic,
    Bounded { low: FaceTag, high: FaceTag },
}

impl AxisBoundary {
    pub fn bounded(tag: FaceTag) -> Self {
        AxisBoundary::Bounded { low: tag, high: tag }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// Position of a node along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AxisPos {
    Interior,
    Face(Side),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    nodes: [usize; 3],
    extents: [f64; 3],
    axes: [AxisBoundary; 3],
}

impl Grid {
    pub fn new(extents: &[f64], nodes: &[usize], axes: &[AxisBoundary]) -> Result<Self> {
        let dim = nodes.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if extents.len() != dim || axes.len() != dim {
            return Err(Error::Grid(format!(
                "extents ({}) and boundaries ({}) must match the {dim} node counts",
                extents.len(),
                axes.len()
            )));
        }
        let mut g = Grid {
            dim,
            nodes: [1; 3],
            extents: [1.0; 3],
            axes: [AxisBoundary::Periodic; 3],
        };
        for k in 0..dim {
            if nodes[k] < 3 {
                return Err(Error::Grid(format!("axis {k} has {} nodes, at least 3 required", nodes[k])));
            }
            if !(extents[k] > 0.0 && extents[k].is_finite()) {
                return Err(Error::Grid(format!("axis {k} extent {} must be positive", extents[k])));
            }
            g.nodes[k] = nodes[k];
            g.extents[k] = extents[k];
            g.axes[k] = axes[k];
        }
        Ok(g)
    }

    /// Fully periodic grid.
    pub fn periodic(extents: &[f64], nodes: &[usize]) -> Result<Self> {
        Self::new(extents, nodes, &vec![AxisBoundary::Periodic; nodes.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.dim]
    }
    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }
    pub fn axes(&self) -> &[AxisBoundary] {
        &self.axes[..self.dim]
    }
    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn is_periodic(&self) -> bool {
        self.axes().iter().all(|a| *a == AxisBoundary::Periodic)
    }

    /// Node spacing: L/n on periodic axes, L/(n − 1) on bounded ones.
    pub fn spacing(&self, k: usize) -> f64 {
        match self.axes[k] {
            AxisBoundary::Periodic => self.extents[k] / self.nodes[k] as f64,
            AxisBoundary::Bounded { .. } => self.extents[k] / (self.nodes[k] - 1) as f64,
        }
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.nodes[0] * (ijk[1] + self.nodes[1] * ijk[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.nodes[0];
        let r = idx / self.nodes[0];
        [i, r % self.nodes[1], r / self.nodes[1]]
    }

    /// Reference position X of a node; inactive coordinates are 0.
    pub fn reference(&self, idx: usize) -> Vec3<f64> {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = c[k] as f64 * self.spacing(k);
        }
        x
    }

    fn axis_pos(&self, idx: usize, k: usize) -> AxisPos {
        if k >= self.dim {
            return AxisPos::Interior;
        }
        match self.axes[k] {
            AxisBoundary::Periodic => AxisPos::Interior,
            AxisBoundary::Bounded { .. } => {
                let c = self.coords(idx)[k];
                if c == 0 {
                    AxisPos::Face(Side::Low)
                } else if c == self.nodes[k] - 1 {
                    AxisPos::Face(Side::High)
                } else {
                    AxisPos::Interior
                }
            }
        }
    }

    /// Boundary faces a node lies on, as (axis, side, tag).
    pub fn faces(&self, idx: usize) -> Vec<(usize, Side, FaceTag)> {
        let mut out = Vec::new();
        for k in 0..self.dim {
            if let (AxisPos::Face(side), AxisBoundary::Bounded { low, high }) = (self.axis_pos(idx, k), self.axes[k]) {
                out.push((k, side, if side == Side::Low { low } else { high }));
            }
        }
        out
    }

    pub fn is_dirichlet(&self, idx: usize) -> bool {
        self.faces(idx).iter().any(|f| f.2 == FaceTag::Dirichlet)
    }

    /// Nodes off every non-periodic face.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.faces(i).is_empty()).collect()
    }

    fn axis_weight(&self, idx: usize, k: usize) -> f64 {
        let h = self.spacing(k);
        match self.axis_pos(idx, k) {
            AxisPos::Interior => h,
            AxisPos::Face(_) => 0.5 * h,
        }
    }

    /// Trapezoid quadrature weight (h^dim on periodic grids).
    pub fn weight(&self, idx: usize) -> f64 {
        (0..self.dim).map(|k| self.axis_weight(idx, k)).product()
    }

    /// Quadrature weight of a node on the face normal to axis `k`.
    pub fn face_weight(&self, idx: usize, k: usize) -> f64 {
        (0..self.dim).filter(|&j| j != k).map(|j| self.axis_weight(idx, j)).product()
    }

    pub fn neighbor(&self, idx: usize, k: usize, offset: isize) -> Option<usize> {
        let mut c = self.coords(idx);
        let n = self.nodes[k] as isize;
        let mut j = c[k] as isize + offset;
        match self.axes[k] {
            AxisBoundary::Periodic => j = j.rem_euclid(n),
            AxisBoundary::Bounded { .. } if j < 0 || j >= n => return None,
            _ => {}
        }
        c[k] = j as usize;
        Some(self.index(c))
    }

    fn at(&self, idx: usize, k: usize, offset: isize) -> usize {
        self.neighbor(idx, k, offset).expect("stencil stays inside the grid")
    }

    /// ∂/∂X_k of a nodal scalar field at `idx`: central in the interior and on
    /// periodic axes, second-order one-sided on bounded faces, zero on
    /// inactive axes.
    pub fn derivative<S: Scalar>(&self, f: impl Fn(usize) -> S, idx: usize, k: usize) -> S {
        if k >= self.dim {
            return S::zero();
        }
        let inv = lit::<S>(0.5 / self.spacing(k));
        match self.axis_pos(idx, k) {
            AxisPos::Interior => (f(self.at(idx, k, 1)) - f(self.at(idx, k, -1))) * inv,
            AxisPos::Face(Side::Low) => {
                let (f0, f1, f2) = (f(idx), f(self.at(idx, k, 1)), f(self.at(idx, k, 2)));
                (lit::<S>(-3.0) * f0 + lit::<S>(4.0) * f1 - f2) * inv
            }
            AxisPos::Face(Side::High) => {
                let (f0, f1, f2) = (f(idx), f(self.at(idx, k, -1)), f(self.at(idx, k, -2)));
                (lit::<S>(3.0) * f0 - lit::<S>(4.0) * f1 + f2) * inv
            }
        }
    }

    pub fn gradient_scalar<S: Scalar>(&self, f: &[S], idx: usize) -> Vec3<S> {
        [0, 1, 2].map(|k| self.derivative(|j| f[j], idx, k))
    }

    /// Rows are components, columns reference directions.
    pub fn gradient_vector<S: Scalar>(&self, f: &[Vec3<S>], idx: usize) -> Mat3<S> {
        [0, 1, 2].map(|i| [0, 1, 2].map(|k| self.derivative(|j| f[j][i], idx, k)))
    }

    pub fn gradient_components<S: Scalar>(&self, f: &[Vec<S>], idx: usize) -> Vec<Vec3<S>> {
        let n = f.first().map_or(0, Vec::len);
        (0..n)
            .map(|a| [0, 1, 2].map(|k| self.derivative(|j| f[j][a], idx, k)))
            .collect()
    }

    /// `F = I + ∇(x − X)`, which stays well defined when x wraps periodically.
    pub fn deformation_gradient(&self, x: &[Vec3<f64>], idx: usize) -> Mat3<f64> {
        let disp = |j: usize| sub3(&x[j], &self.reference(j));
        let mut f = identity();
        for i in 0..3 {
            for k in 0..3 {
                f[i][k] += self.derivative(|j| disp(j)[i], idx, k);
            }
        }
        f
    }

    /// Div of a vector field.
    pub fn divergence_vector(&self, t: &[Vec3<f64>], idx: usize) -> f64 {
        (0..self.dim).map(|k| self.derivative(|j| t[j][k], idx, k)).sum()
    }

    /// Row-wise Div of a tensor field (rows i, columns K).
    pub fn divergence(&self, t: &[Mat3<f64>], idx: usize) -> Vec3<f64> {
        [0, 1, 2].map(|i| (0..self.dim).map(|k| self.derivative(|j| t[j][i][k], idx, k)).sum())
    }

    pub fn divergence_rows(&self, t: &[Vec<Vec3<f64>>], idx: usize) -> Vec<f64> {
        let n = t.first().map_or(0, Vec::len);
        (0..n)
            .map(|a| (0..self.dim).map(|k| self.derivative(|j| t[j][a][k], idx, k)).sum())
            .collect()
    }

    /// Natural faces through node `idx` as (axis, outward normal sign, 1/w),
    /// where 1/w = face weight over node weight.
    pub(crate) fn natural_faces(&self, idx: usize) -> Vec<(usize, f64, f64)> {
        self.faces(idx)
            .into_iter()
            .filter(|f| f.2 == FaceTag::Natural)
            .map(|(k, side, _)| {
                let sign = if side == Side::Low { -1.0 } else { 1.0 };
                (k, sign, 1.0 / self.axis_weight(idx, k))
            })
            .collect()
    }
}

fn tag_name(t: FaceTag) -> &'static str {
    match t {
        FaceTag::Dirichlet => "dirichlet",
        FaceTag::Natural => "natural",
    }
}

impl FromStr for FaceTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(FaceTag::Dirichlet),
            "natural" => Ok(FaceTag::Natural),
            other => Err(Error::Grid(format!("unknown face tag `{other}`"))),
        }
    }
}

impl fmt::Display for AxisBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisBoundary::Periodic => write!(f, "periodic"),
            AxisBoundary::Bounded { low, high } => write!(f, "{}-{}", tag_name(*low), tag_name(*high)),
        }
    }
}

impl FromStr for AxisBoundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "periodic" {
            return Ok(AxisBoundary::Periodic);
        }
        match s.split_once('-') {
            Some((lo, hi)) => Ok(AxisBoundary::Bounded {
                low: lo.parse()?,
                high: hi.parse()?,
            }),
            None => Ok(AxisBoundary::bounded(s.parse()?)),
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Grid {
    /// `nodes=.. extents=.. faces=..`, the form used in snapshot headers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes={} extents={} faces={}",
            join(self.nodes()),
            join(self.extents()),
            join(self.axes())
        )
    }
}

impl Grid {
    /// Parses the `key=value` tokens written by `Display`.
    pub fn from_tokens<'a>(tokens: impl Iterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let (mut nodes, mut extents, mut faces) = (None, None, None);
        for (k, v) in tokens {
            let list = || v.split(',');
            match k {
                "nodes" => {
                    nodes = Some(
                        list()
                            .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("nodes: {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "extents" => {
                    extents = Some(
                        list()
                            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("extents: {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "faces" => faces = Some(list().map(str::parse).collect::<Result<Vec<AxisBoundary>>>()?),
                _ => {}
            }
        }
        match (nodes, extents, faces) {
            (Some(n), Some(e), Some(f)) => Grid::new(&e, &n, &f),
            _ => Err(Error::Parse("grid description needs nodes=, extents= and faces=".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural(n: usize) -> Grid {
        Grid::new(&[2.0, 1.5], &[n, n + 3], &[AxisBoundary::bounded(FaceTag::Natural); 2]).unwrap()
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = natural(7);
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.reference(i);
                1.0 + 2.0 * x[0] - 0.5 * x[1] + x[0] * x[0] + 0.3 * x[0] * x[1]
            })
            .collect();
        for i in 0..g.len() {
            let x = g.reference(i);
            let d = g.gradient_scalar(&f, i);
            assert!((d[0] - (2.0 + 2.0 * x[0] + 0.3 * x[1])).abs() < 1e-12);
            assert!((d[1] - (-0.5 + 0.3 * x[0])).abs() < 1e-12);
            assert_eq!(d[2], 0.0);
        }
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let err = |n: usize| {
            let g = Grid::new(&[2.0], &[n], &[AxisBoundary::bounded(FaceTag::Dirichlet)]).unwrap();
            let f: Vec<f64> = (0..n).map(|i| g.reference(i)[0].sin()).collect();
            (0..n)
                .map(|i| (g.gradient_scalar(&f, i)[0] - g.reference(i)[0].cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(21) / err(41)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn weights_integrate_volume_and_faces() {
        let g = natural(9);
        let vol: f64 = (0..g.len()).map(|i| g.weight(i)).sum();
        assert!((vol - 3.0).abs() < 1e-12);
        let low_x: f64 = (0..g.len())
            .filter(|&i| g.coords(i)[0] == 0)
            .map(|i| g.face_weight(i, 0))
            .sum();
        assert!((low_x - 1.5).abs() < 1e-12);
        let p = Grid::periodic(&[1.0], &[10]).unwrap();
        assert!((0..10).all(|i| (p.weight(i) - 0.1).abs() < 1e-15));
    }

    #[test]
    fn periodic_neighbors_wrap() {
        let g = Grid::periodic(&[1.0, 1.0], &[4, 5]).unwrap();
        let i = g.index([0, 4, 0]);
        assert_eq!(g.neighbor(i, 0, -1), Some(g.index([3, 4, 0])));
        assert_eq!(g.neighbor(i, 1, 1), Some(g.index([0, 0, 0])));
        assert_eq!(natural(5).neighbor(0, 0, -1), None);
    }

    #[test]
    fn too_few_nodes_is_rejected() {
        assert!(matches!(Grid::periodic(&[1.0], &[2]), Err(Error::Grid(_))));
    }

    #[test]
    fn display_round_trips() {
        let g = Grid::new(
            &[1.0, 2.5],
            &[5, 6],
            &[
                AxisBoundary::Periodic,
                AxisBoundary::Bounded {
                    low: FaceTag::Natural,
                    high: FaceTag::Dirichlet,
                },
            ],
        )
        .unwrap();
        let text = g.to_string();
        let back = Grid::from_tokens(text.split_whitespace().filter_map(|t| t.split_once('='))).unwrap();
        assert_eq!(back, g);
    }
}
