//! Algebraic properties of the field bracket and its specializations.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Bound, CheckOutcome};
use crate::engine::{AxisBoundary, CanonicalState, Engine, FaceTag};
use crate::error::Result;
use crate::poisson::{bracket, bracket_rate_check, jacobi_residual, FieldArgs, FunctionalSpec, QuadraticDensity};
use crate::report::{num, Table};
use crate::scalar::Dual;
use crate::scenario::{CheckConfig, Scenario};
use crate::tensor::{cross, dot, matvec, sub3, Vec3};

type D = Dual<f64>;

fn lit3(v: &Vec3<f64>) -> Vec3<D> {
    v.map(Dual::constant)
}

fn dual_cross(a: &Vec3<D>, b: &[D]) -> Vec3<D> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dual_dot(a: &[D], b: &[D]) -> D {
    a.iter().zip(b).fold(Dual::constant(0.0), |acc, (&u, &v)| acc + u * v)
}

/// `∫ μ·(q × ν)`.
fn micro_rotation(q: Vec3<f64>) -> FunctionalSpec {
    FunctionalSpec::General {
        bulk: Arc::new(move |a: &FieldArgs<D>| dual_dot(&a.mu, &dual_cross(&lit3(&q), &a.nu))),
        boundary: None,
    }
}

/// `∫ p·(q × (x − x₀)) + μ·(q × ν)`.
fn angular_momentum(q: Vec3<f64>, x0: Vec3<f64>) -> FunctionalSpec {
    FunctionalSpec::General {
        bulk: Arc::new(move |a: &FieldArgs<D>| {
            let r: Vec3<D> = [0, 1, 2].map(|k| a.x[k] - Dual::constant(x0[k]));
            dual_dot(&a.p, &dual_cross(&lit3(&q), &r)) + dual_dot(&a.mu, &dual_cross(&lit3(&q), &a.nu))
        }),
        boundary: None,
    }
}

fn momentum_along(v: Vec3<f64>, n: usize) -> FunctionalSpec {
    let mut b = vec![0.0; 6 + 2 * n];
    b[3..6].copy_from_slice(&v);
    FunctionalSpec::Quadratic(QuadraticDensity::linear(b, 0.0))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn cross_list(q: &Vec3<f64>, v: &[f64]) -> Vec<f64> {
    cross(q, &[v[0], v[1], v[2]]).to_vec()
}

/// The grid admits rigid rotations about `q` and nothing external acts on
/// the faces.
fn rotation_ready(scn: &Scenario, engine: &Engine, q: &Vec3<f64>) -> bool {
    let g = engine.grid();
    let shape = g.dim() == 3 || (g.dim() == 2 && q[0] == 0.0 && q[1] == 0.0);
    let free = g.axes().iter().all(|a| {
        matches!(
            a,
            AxisBoundary::Bounded {
                low: FaceTag::Natural,
                high: FaceTag::Natural
            }
        )
    });
    let unloaded = scn.config.boundary.surface_force.is_none() && scn.config.boundary.micro_field.is_none();
    shape && free && unloaded && scn.model.group_dim() == 3 && scn.model.ambient_dim() == 3
}

pub(super) fn audit(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let grid = scn.grid()?;
    let engine = scn.engine(grid.clone());
    let mut s = scn.initial_state(&grid)?;
    engine.prepare(&mut s)?;
    let n = scn.model.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(scn.config.seed);
    let tol = cfg.tolerance.unwrap_or(1e-8);
    let mut out = CheckOutcome::default();
    let mut table = Table::new(&["quantity", "value"]);
    let mut note = |name: &str, v: f64| table.push(vec![name.to_string(), num(v)]);

    let f = FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, n, false));
    let g = FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, n, false));
    let k = FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, n, true));
    let h = FunctionalSpec::Hamiltonian;

    let mut anti = 0.0f64;
    for (a, b) in [(&f, &g), (&f, &h), (&g, &k), (&f, &f), (&h, &h)] {
        anti = anti.max((bracket(a, b, &engine, &s)? + bracket(b, a, &engine, &s)?).abs());
    }
    note("antisymmetry", anti);
    out.metric(&cfg.kind, "antisymmetry", anti, Bound::AtMost(0.0));

    let (ca, cb) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let combo = FunctionalSpec::Sum(vec![(ca, f.clone()), (cb, g.clone())]);
    let mut bilin = 0.0f64;
    for other in [&k, &h] {
        let lhs = bracket(&combo, other, &engine, &s)?;
        let rhs = ca * bracket(&f, other, &engine, &s)? + cb * bracket(&g, other, &engine, &s)?;
        bilin = bilin.max(relative(lhs, rhs));
    }
    note("bilinearity", bilin);
    out.metric(&cfg.kind, "bilinearity", bilin, Bound::AtMost(1e-12));

    let dt = scn.config.integrator.as_ref().expect("validated").dt;
    let traj = engine.run(&s, dt, 2)?;
    let energy = h.evaluate(&engine, &traj[1])?;
    let hdot = bracket_rate_check(&h, &engine, &traj)?;
    let hdot_rel = hdot.rate.abs() / energy.abs().max(f64::MIN_POSITIVE);
    note("energy-rate", hdot.rate);
    note("energy-bracket", hdot.bracket);
    note("relative-energy-rate", hdot_rel);
    // Face closures are consistent but not exactly skew, so bounded grids
    // conserve H only up to truncation error.
    if grid.is_periodic() {
        out.metric(&cfg.kind, "relative-energy-rate", hdot_rel, Bound::AtMost(1e-6));
    }

    let rates = engine.hamilton_rhs(&s)?;
    let w = |i: usize| grid.weight(i);
    let v = cfg.direction.unwrap_or([0.3, -0.2, 0.7]);
    let br8 = bracket(&momentum_along(v, n), &h, &engine, &s)?;
    let asm8: f64 = (0..s.len()).map(|i| w(i) * dot(&rates.pdot[i], &v)).sum();
    note("linear-momentum-bracket", br8);
    note("linear-momentum-assembly", asm8);
    out.metric(&cfg.kind, "linear-momentum-vs-assembly", relative(br8, asm8), Bound::AtMost(tol));

    if scn.model.group_dim() == 3 && n == 3 {
        let q = cfg.direction.unwrap_or([0.0, 0.0, 1.0]);
        let br9 = bracket(&micro_rotation(q), &h, &engine, &s)?;
        let asm9: f64 = (0..s.len())
            .map(|i| {
                let xi = cross_list(&q, &s.nu[i]);
                let dxi = cross_list(&q, &rates.nudot[i]);
                w(i) * (dot(&rates.mudot[i], &xi) + dot(&s.mu[i], &dxi))
            })
            .sum();
        note("micro-rotation-bracket", br9);
        note("micro-rotation-assembly", asm9);
        out.metric(&cfg.kind, "micro-rotation-vs-assembly", relative(br9, asm9), Bound::AtMost(tol));

        let mut x0 = [0.0; 3];
        for (a, e) in grid.extents().iter().enumerate() {
            x0[a] = 0.5 * e;
        }
        let am = angular_momentum(q, x0);
        let br10 = bracket(&am, &h, &engine, &s)?;
        let asm10: f64 = (0..s.len())
            .map(|i| {
                let r = sub3(&s.x[i], &x0);
                w(i) * (dot(&rates.pdot[i], &cross(&q, &r))
                    + dot(&s.p[i], &cross(&q, &rates.xdot[i]))
                    + dot(&rates.mudot[i], &cross_list(&q, &s.nu[i]))
                    + dot(&s.mu[i], &cross_list(&q, &rates.nudot[i])))
            })
            .sum();
        note("angular-momentum-bracket", br10);
        note("angular-momentum-assembly", asm10);
        out.metric(&cfg.kind, "angular-momentum-vs-assembly", relative(br10, asm10), Bound::AtMost(tol));

        if rotation_ready(scn, &engine, &q) {
            let u = uniform_state(scn, &engine, &mut rng);
            let torque = bracket(&am, &h, &engine, &u)?.abs();
            note("angular-momentum-rate-uniform", torque);
            out.metric(&cfg.kind, "angular-momentum-rate-uniform", torque, Bound::AtMost(tol));
        }
    }
    out.table("values", table);
    Ok(out)
}

/// Homogeneously deformed, uniformly oriented body at rest.
fn uniform_state(scn: &Scenario, engine: &Engine, rng: &mut ChaCha8Rng) -> CanonicalState {
    let grid = engine.grid();
    let mut a = crate::tensor::identity();
    for i in 0..grid.dim() {
        for j in 0..grid.dim() {
            a[i][j] += rng.gen_range(-0.1..0.1);
        }
    }
    let raw: Vec<f64> = scn.base_nu.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
    let nu = scn.model.project(&raw);
    let mut s = CanonicalState::rest(grid, &nu);
    for i in 0..grid.len() {
        s.x[i] = matvec(&a, &grid.reference(i));
    }
    s
}

pub(super) fn jacobi(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let grid = scn.grid()?;
    let engine = scn.engine(grid.clone());
    let mut s = scn.initial_state(&grid)?;
    engine.prepare(&mut s)?;
    let n = scn.model.ambient_dim();
    let samples = cfg.samples.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(scn.config.seed);
    let mut table = Table::new(&["triple", "classes", "residual"]);
    let mut worst = 0.0f64;
    for t in 0..samples {
        let mut pick = || {
            let linear = rng.gen_bool(0.3);
            (linear, FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, n, linear)))
        };
        let (a, b, c) = (pick(), pick(), pick());
        let r = jacobi_residual(&a.1, &b.1, &c.1, &engine, &s)?;
        worst = worst.max(r);
        let classes: String = [a.0, b.0, c.0].iter().map(|&l| if l { 'L' } else { 'Q' }).collect();
        table.push(vec![t.to_string(), classes, num(r)]);
    }
    let mut out = CheckOutcome::default();
    out.metric(&cfg.kind, "triples", samples as f64, Bound::AtLeast(100.0));
    out.metric(&cfg.kind, "max-residual", worst, Bound::AtMost(cfg.tolerance.unwrap_or(1e-8)));
    out.table("residuals", table);
    Ok(out)
}
