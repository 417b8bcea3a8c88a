//! Functionals of the canonical fields, their variational derivatives and
//! the Poisson bracket with boundary terms.
//!
//! Admissible variations vanish on Dirichlet nodes. On Natural faces a
//! functional may carry boundary traces of δ/δx and δ/δν, which pair with
//! the bulk δ/δp and δ/δμ of the other argument.

use std::sync::Arc;

use rand::Rng;

use crate::engine::{CanonicalState, Engine};
use crate::error::{Error, Result};
use crate::model::manifold::apply;
use crate::scalar::{gradient, Dual};
use crate::tensor::*;

/// Pointwise arguments of a plain functional density.
#[derive(Clone, Debug)]
pub struct FieldArgs<S> {
    pub x_ref: Vec3<S>,
    pub x: Vec3<S>,
    pub p: Vec3<S>,
    pub nu: Vec<S>,
    pub mu: Vec<S>,
}

pub type DensityFn = Arc<dyn Fn(&FieldArgs<Dual<f64>>) -> Dual<f64> + Send + Sync>;

/// Density `½zᵀAz + b·z + c` in `z = (x, p, ν, μ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticDensity {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalClass {
    Linear,
    Quadratic,
    General,
}

#[derive(Clone)]
pub enum FunctionalSpec {
    Quadratic(QuadraticDensity),
    /// Arbitrary bulk density with an optional density on Natural faces.
    General {
        bulk: DensityFn,
        boundary: Option<DensityFn>,
    },
    /// The total Hamiltonian of the engine.
    Hamiltonian,
    Sum(Vec<(f64, FunctionalSpec)>),
}

/// Trace of δ/δx and δ/δν on one Natural face through a node.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub node: usize,
    pub axis: usize,
    /// Face quadrature weight.
    pub weight: f64,
    pub dx: Vec3<f64>,
    pub dnu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalDerivative {
    pub dx: Vec<Vec3<f64>>,
    pub dp: Vec<Vec3<f64>>,
    pub dnu: Vec<Vec<f64>>,
    pub dmu: Vec<Vec<f64>>,
    pub traces: Vec<BoundaryTrace>,
}

fn z_of(s: &CanonicalState, i: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(6 + 2 * s.nu[i].len());
    z.extend_from_slice(&s.x[i]);
    z.extend_from_slice(&s.p[i]);
    z.extend_from_slice(&s.nu[i]);
    z.extend_from_slice(&s.mu[i]);
    z
}

fn args_of<S: Copy>(x_ref: Vec3<S>, z: &[S]) -> FieldArgs<S> {
    let n = (z.len() - 6) / 2;
    FieldArgs {
        x_ref,
        x: [z[0], z[1], z[2]],
        p: [z[3], z[4], z[5]],
        nu: z[6..6 + n].to_vec(),
        mu: z[6 + n..].to_vec(),
    }
}

impl QuadraticDensity {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Self {
        let n = b.len();
        let sym = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
            .collect();
        Self { a: sym, b, c }
    }

    pub fn linear(b: Vec<f64>, c: f64) -> Self {
        let n = b.len();
        Self {
            a: vec![vec![0.0; n]; n],
            b,
            c,
        }
    }

    /// Entries uniform in [−1, 1]; `linear` zeroes the quadratic part.
    pub fn random<R: Rng>(rng: &mut R, ambient: usize, linear: bool) -> Self {
        let d = 6 + 2 * ambient;
        let b = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = rng.gen_range(-1.0..1.0);
        if linear {
            return Self::linear(b, c);
        }
        let a = (0..d)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        Self::new(a, b, c)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn is_linear(&self) -> bool {
        self.a.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        let az = apply(&self.a, z);
        0.5 * dot(z, &az) + dot(&self.b, z) + self.c
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        apply(&self.a, z).iter().zip(&self.b).map(|(u, v)| u + v).collect()
    }

    /// Canonical symplectic matrix on `(x, p, ν, μ)`.
    fn symplectic(d: usize) -> Vec<Vec<f64>> {
        let n = (d - 6) / 2;
        let mut j = vec![vec![0.0; d]; d];
        for i in 0..3 {
            j[i][3 + i] = 1.0;
            j[3 + i][i] = -1.0;
        }
        for a in 0..n {
            j[6 + a][6 + n + a] = 1.0;
            j[6 + n + a][6 + a] = -1.0;
        }
        j
    }

    /// Density of the pointwise bracket `∇fᵀ J ∇g`, again quadratic:
    /// `A' = AJB − BJA`, `b' = AJb_g − BJb_f`, `c' = b_fᵀJb_g`.
    pub fn bracket(&self, other: &Self) -> Self {
        let d = self.dim();
        let j = Self::symplectic(d);
        let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..d)
                .map(|r| (0..d).map(|c| (0..d).map(|k| x[r][k] * y[k][c]).sum()).collect())
                .collect()
        };
        let ajb = mul(&mul(&self.a, &j), &other.a);
        let bja = mul(&mul(&other.a, &j), &self.a);
        let a = (0..d).map(|r| (0..d).map(|c| ajb[r][c] - bja[r][c]).collect()).collect();
        let aj_bg = apply(&mul(&self.a, &j), &other.b);
        let bj_bf = apply(&mul(&other.a, &j), &self.b);
        let b = (0..d).map(|k| aj_bg[k] - bj_bf[k]).collect();
        let c = dot(&self.b, &apply(&j, &other.b));
        Self { a, b, c }
    }

    fn scaled_add(&self, k: f64, other: &Self) -> Self {
        let d = self.dim();
        Self {
            a: (0..d)
                .map(|r| (0..d).map(|c| self.a[r][c] + k * other.a[r][c]).collect())
                .collect(),
            b: (0..d).map(|r| self.b[r] + k * other.b[r]).collect(),
            c: self.c + k * other.c,
        }
    }
}

impl VariationalDerivative {
    fn zeros(s: &CanonicalState) -> Self {
        Self {
            dx: vec![[0.0; 3]; s.len()],
            dp: vec![[0.0; 3]; s.len()],
            dnu: s.nu.iter().map(|v| vec![0.0; v.len()]).collect(),
            dmu: s.nu.iter().map(|v| vec![0.0; v.len()]).collect(),
            traces: Vec::new(),
        }
    }

    fn add_scaled(&mut self, k: f64, o: &Self) {
        for i in 0..self.dx.len() {
            self.dx[i] = add3(&self.dx[i], &scale3(&o.dx[i], k));
            self.dp[i] = add3(&self.dp[i], &scale3(&o.dp[i], k));
            for a in 0..self.dnu[i].len() {
                self.dnu[i][a] += k * o.dnu[i][a];
                self.dmu[i][a] += k * o.dmu[i][a];
            }
        }
        self.traces.extend(o.traces.iter().map(|t| BoundaryTrace {
            dx: scale3(&t.dx, k),
            dnu: t.dnu.iter().map(|v| k * v).collect(),
            ..t.clone()
        }));
    }
}

fn check_dim(q: &QuadraticDensity, s: &CanonicalState) -> Result<()> {
    let d = 6 + 2 * s.nu.first().map_or(0, Vec::len);
    if q.dim() != d {
        return Err(Error::Config(format!(
            "quadratic density has dimension {}, state needs {d}",
            q.dim()
        )));
    }
    Ok(())
}

impl FunctionalSpec {
    pub fn class(&self) -> FunctionalClass {
        match self {
            FunctionalSpec::Quadratic(q) if q.is_linear() => FunctionalClass::Linear,
            FunctionalSpec::Quadratic(_) => FunctionalClass::Quadratic,
            FunctionalSpec::Sum(terms) => {
                let classes: Vec<_> = terms.iter().map(|(_, f)| f.class()).collect();
                if classes.iter().all(|c| *c == FunctionalClass::Linear) {
                    FunctionalClass::Linear
                } else if classes.iter().all(|c| *c != FunctionalClass::General) {
                    FunctionalClass::Quadratic
                } else {
                    FunctionalClass::General
                }
            }
            _ => FunctionalClass::General,
        }
    }

    /// Collapses members of the closed Linear/Quadratic class to one density.
    pub fn as_quadratic(&self) -> Option<QuadraticDensity> {
        match self {
            FunctionalSpec::Quadratic(q) => Some(q.clone()),
            FunctionalSpec::Sum(terms) => {
                let mut acc: Option<QuadraticDensity> = None;
                for (k, f) in terms {
                    let q = f.as_quadratic()?;
                    acc = Some(match acc {
                        None => QuadraticDensity::linear(vec![0.0; q.dim()], 0.0).scaled_add(*k, &q),
                        Some(a) => a.scaled_add(*k, &q),
                    });
                }
                acc
            }
            _ => None,
        }
    }

    pub fn evaluate(&self, engine: &Engine, s: &CanonicalState) -> Result<f64> {
        let g = engine.grid();
        match self {
            FunctionalSpec::Quadratic(q) => {
                check_dim(q, s)?;
                Ok((0..s.len()).map(|i| g.weight(i) * q.value(&z_of(s, i))).sum())
            }
            FunctionalSpec::General { bulk, boundary } => {
                let f = |d: &DensityFn, i: usize| {
                    let z: Vec<Dual<f64>> = z_of(s, i).into_iter().map(Dual::constant).collect();
                    d(&args_of(lift3(&g.reference(i)), &z)).re
                };
                let mut total: f64 = (0..s.len()).map(|i| g.weight(i) * f(bulk, i)).sum();
                if let Some(bd) = boundary {
                    for i in 0..s.len() {
                        for (k, _, _) in g.natural_faces(i) {
                            total += g.face_weight(i, k) * f(bd, i);
                        }
                    }
                }
                Ok(total)
            }
            FunctionalSpec::Hamiltonian => engine.total_energy(s),
            FunctionalSpec::Sum(terms) => terms
                .iter()
                .map(|(k, f)| Ok(k * f.evaluate(engine, s)?))
                .sum(),
        }
    }

    pub fn variational_derivative(&self, engine: &Engine, s: &CanonicalState) -> Result<VariationalDerivative> {
        let mut vd = match self {
            FunctionalSpec::Quadratic(q) => {
                check_dim(q, s)?;
                pointwise(engine, s, |_, z| q.gradient(z), None)
            }
            FunctionalSpec::General { bulk, boundary } => {
                let grad = |d: &DensityFn, x_ref: Vec3<f64>, z: &[f64]| gradient(z, |zz| d(&args_of(lift3(&x_ref), zz))).1;
                let bd = boundary.as_ref().map(|b| move |x_ref: Vec3<f64>, z: &[f64]| grad(b, x_ref, z));
                pointwise(engine, s, |x_ref, z| grad(bulk, x_ref, z), bd.as_ref().map(|f| f as &dyn Fn(Vec3<f64>, &[f64]) -> Vec<f64>))
            }
            FunctionalSpec::Hamiltonian => hamiltonian_derivative(engine, s)?,
            FunctionalSpec::Sum(terms) => {
                let mut acc = VariationalDerivative::zeros(s);
                for (k, f) in terms {
                    acc.add_scaled(*k, &f.variational_derivative(engine, s)?);
                }
                acc
            }
        };
        zero_dirichlet(engine, &mut vd);
        Ok(vd)
    }
}

fn zero_dirichlet(engine: &Engine, vd: &mut VariationalDerivative) {
    let g = engine.grid();
    for i in (0..g.len()).filter(|&i| g.is_dirichlet(i)) {
        vd.dx[i] = [0.0; 3];
        vd.dp[i] = [0.0; 3];
        vd.dnu[i].iter_mut().for_each(|v| *v = 0.0);
        vd.dmu[i].iter_mut().for_each(|v| *v = 0.0);
    }
    vd.traces.retain(|t| !g.is_dirichlet(t.node));
}

type PointGrad<'a> = &'a dyn Fn(Vec3<f64>, &[f64]) -> Vec<f64>;

fn pointwise(
    engine: &Engine,
    s: &CanonicalState,
    bulk: impl Fn(Vec3<f64>, &[f64]) -> Vec<f64>,
    boundary: Option<PointGrad<'_>>,
) -> VariationalDerivative {
    let g = engine.grid();
    let mut vd = VariationalDerivative::zeros(s);
    for i in 0..s.len() {
        let n = s.nu[i].len();
        let x_ref = g.reference(i);
        let z = z_of(s, i);
        let d = bulk(x_ref, &z);
        let proj = engine.model().tangent_projector(&s.nu[i]);
        vd.dx[i] = [d[0], d[1], d[2]];
        vd.dp[i] = [d[3], d[4], d[5]];
        vd.dnu[i] = apply(&proj, &d[6..6 + n]);
        vd.dmu[i] = apply(&proj, &d[6 + n..]);
        if let Some(bf) = boundary {
            for (k, _, _) in g.natural_faces(i) {
                let db = bf(x_ref, &z);
                vd.traces.push(BoundaryTrace {
                    node: i,
                    axis: k,
                    weight: g.face_weight(i, k),
                    dx: [db[0], db[1], db[2]],
                    dnu: apply(&proj, &db[6..6 + n]),
                });
            }
        }
    }
    vd
}

/// Bulk `δH/δx = ∂ₓℋ − Div ∂_Fℋ`, `δH/δν = P_T(∂_νℋ − Div ∂_{∇ν}ℋ)`; traces
/// `∂_Fℋ n − ρ₀∂ₓŪ` and `P_T(∂_{∇ν}ℋ n − ρ₀∂_νU)` on Natural faces.
fn hamiltonian_derivative(engine: &Engine, s: &CanonicalState) -> Result<VariationalDerivative> {
    let g = engine.grid();
    let hp = engine.partials(s)?;
    let stress: Vec<Mat3<f64>> = hp.iter().map(|h| h.d_f).collect();
    let micro: Vec<Vec<Vec3<f64>>> = hp.iter().map(|h| h.d_gradnu.clone()).collect();
    let mut vd = VariationalDerivative::zeros(s);
    for i in 0..s.len() {
        let n = s.nu[i].len();
        let proj = engine.model().tangent_projector(&s.nu[i]);
        vd.dx[i] = sub3(&hp[i].d_x, &g.divergence(&stress, i));
        vd.dp[i] = hp[i].d_p;
        let div = g.divergence_rows(&micro, i);
        let raw: Vec<f64> = (0..n).map(|a| hp[i].d_nu[a] - div[a]).collect();
        vd.dnu[i] = apply(&proj, &raw);
        vd.dmu[i] = hp[i].d_mu.clone();
        let faces = g.natural_faces(i);
        if faces.is_empty() {
            continue;
        }
        let t = engine.traction(s, i);
        let tm = engine.micro_traction(s, i);
        for (k, sign, _) in faces {
            let dx = [0, 1, 2].map(|r| sign * stress[i][r][k] - t[r]);
            let raw: Vec<f64> = (0..n).map(|a| sign * micro[i][a][k] - tm[a]).collect();
            vd.traces.push(BoundaryTrace {
                node: i,
                axis: k,
                weight: g.face_weight(i, k),
                dx,
                dnu: apply(&proj, &raw),
            });
        }
    }
    Ok(vd)
}

/// Σ w (δF/δx·δG/δp + δF/δν·δG/δμ) plus the boundary pairing of F's traces
/// with G's momentum derivatives.
fn pairing(engine: &Engine, f: &VariationalDerivative, g: &VariationalDerivative) -> f64 {
    let grid = engine.grid();
    let bulk: f64 = (0..f.dx.len())
        .map(|i| grid.weight(i) * (dot(&f.dx[i], &g.dp[i]) + dot(&f.dnu[i], &g.dmu[i])))
        .sum();
    let boundary: f64 = f
        .traces
        .iter()
        .map(|t| t.weight * (dot(&t.dx, &g.dp[t.node]) + dot(&t.dnu, &g.dmu[t.node])))
        .sum();
    bulk + boundary
}

pub fn bracket_of(engine: &Engine, f: &VariationalDerivative, g: &VariationalDerivative) -> f64 {
    pairing(engine, f, g) - pairing(engine, g, f)
}

/// `{F, G}` at a state.
pub fn bracket(f: &FunctionalSpec, g: &FunctionalSpec, engine: &Engine, s: &CanonicalState) -> Result<f64> {
    let df = f.variational_derivative(engine, s)?;
    let dg = g.variational_derivative(engine, s)?;
    Ok(bracket_of(engine, &df, &dg))
}

/// Ḟ by central differences and `{F, H}` at the middle of three states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCheck {
    pub rate: f64,
    pub bracket: f64,
}

impl RateCheck {
    pub fn defect(&self) -> f64 {
        (self.rate - self.bracket).abs()
    }
}

pub fn bracket_rate_check(f: &FunctionalSpec, engine: &Engine, traj: &[CanonicalState]) -> Result<RateCheck> {
    if traj.len() < 3 {
        return Err(Error::Config("rate check needs three consecutive states".into()));
    }
    let mid = traj.len() / 2;
    let dt2 = traj[mid + 1].time - traj[mid - 1].time;
    let rate = (f.evaluate(engine, &traj[mid + 1])? - f.evaluate(engine, &traj[mid - 1])?) / dt2;
    let br = bracket(f, &FunctionalSpec::Hamiltonian, engine, &traj[mid])?;
    Ok(RateCheck { rate, bracket: br })
}

fn closed_class(f: &FunctionalSpec) -> Result<QuadraticDensity> {
    f.as_quadratic().ok_or_else(|| {
        Error::UnsupportedFunctional("Jacobi check needs Linear or Quadratic functionals".into())
    })
}

/// `|{{F,G},K} + {{G,K},F} + {{K,F},G}|` with inner brackets re-expressed
/// in closed form.
pub fn jacobi_residual(
    f: &FunctionalSpec,
    g: &FunctionalSpec,
    k: &FunctionalSpec,
    engine: &Engine,
    s: &CanonicalState,
) -> Result<f64> {
    if !engine.model().is_flat() {
        return Err(Error::UnsupportedFunctional(format!(
            "Jacobi check needs a flat order-parameter manifold, model `{}` is on {}",
            engine.model().name(),
            engine.model().manifold_name()
        )));
    }
    let (qf, qg, qk) = (closed_class(f)?, closed_class(g)?, closed_class(k)?);
    let outer = |a: &QuadraticDensity, b: &QuadraticDensity, c: &FunctionalSpec| {
        bracket(&FunctionalSpec::Quadratic(a.bracket(b)), c, engine, s)
    };
    Ok((outer(&qf, &qg, k)? + outer(&qg, &qk, f)? + outer(&qk, &qf, g)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{BoundarySpec, Grid};
    use crate::model::fixtures::QuadraticMedium;
    use crate::model::MaterialModel;

    fn setup() -> (Engine, CanonicalState) {
        let model = Arc::new(MaterialModel::new(QuadraticMedium::new(1.0, 0.0)).unwrap());
        let grid = Grid::periodic(&[2.0], &[8]).unwrap();
        let engine = Engine::new(model, grid.clone(), BoundarySpec::default());
        let mut s = CanonicalState::rest(&grid, &[0.1, 0.0, 0.2]);
        for i in 0..s.len() {
            s.p[i] = [0.1 * i as f64, 0.0, -0.05];
            s.x[i][0] += 0.01 * (i as f64).sin();
        }
        (engine, s)
    }

    fn linear(entries: &[(usize, f64)]) -> FunctionalSpec {
        let mut b = vec![0.0; 12];
        for &(k, v) in entries {
            b[k] = v;
        }
        FunctionalSpec::Quadratic(QuadraticDensity::linear(b, 0.0))
    }

    #[test]
    fn canonical_pairs_bracket_to_the_volume() {
        let (engine, s) = setup();
        // ∫x₀ and ∫p₀ over a domain of length 2
        let x0 = linear(&[(0, 1.0)]);
        let p0 = linear(&[(3, 1.0)]);
        let p1 = linear(&[(4, 1.0)]);
        assert!((bracket(&x0, &p0, &engine, &s).unwrap() - 2.0).abs() < 1e-12);
        assert!((bracket(&p0, &x0, &engine, &s).unwrap() + 2.0).abs() < 1e-12);
        assert!(bracket(&x0, &p1, &engine, &s).unwrap().abs() < 1e-14);
        let nu0 = linear(&[(6, 1.0)]);
        let mu0 = linear(&[(9, 1.0)]);
        assert!((bracket(&nu0, &mu0, &engine, &s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_density_bracket_matches_the_grid_bracket() {
        use rand::SeedableRng;
        let (engine, s) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = QuadraticDensity::random(&mut rng, 3, false);
        let g = QuadraticDensity::random(&mut rng, 3, false);
        let direct = bracket(&FunctionalSpec::Quadratic(f.clone()), &FunctionalSpec::Quadratic(g.clone()), &engine, &s).unwrap();
        let closed = FunctionalSpec::Quadratic(f.bracket(&g)).evaluate(&engine, &s).unwrap();
        assert!((direct - closed).abs() < 1e-10 * (1.0 + direct.abs()), "{direct} vs {closed}");
    }

    #[test]
    fn jacobi_holds_for_quadratic_triples() {
        use rand::SeedableRng;
        let (engine, s) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut q = || FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, 3, false));
        let (a, b, c) = (q(), q(), q());
        assert!(jacobi_residual(&a, &b, &c, &engine, &s).unwrap() < 1e-10);
    }

    #[test]
    fn general_functionals_are_outside_the_jacobi_check() {
        let (engine, s) = setup();
        let g = FunctionalSpec::General {
            bulk: Arc::new(|a: &FieldArgs<Dual<f64>>| a.x[0] * a.x[0] * a.x[0]),
            boundary: None,
        };
        let l = linear(&[(0, 1.0)]);
        assert!(matches!(
            jacobi_residual(&g, &l, &l, &engine, &s),
            Err(Error::UnsupportedFunctional(_))
        ));
    }
}
