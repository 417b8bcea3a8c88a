//! Hamilton–Jacobi checks on the homogeneous (0-dimensional) reduction.
//!
//! `F` and `∇ν` are frozen, so each material point is a finite-dimensional
//! Hamiltonian system in `(x, p, ν, μ)`. A star-shaped family of
//! characteristics sharing the same initial momenta carries the action,
//! which tabulates the generating function `S(t, x, ν)`.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::manifold::apply;
use crate::model::{CanonicalPoint, HamiltonianPartials, Model};
use crate::tensor::*;

/// Model with frozen `F` and `∇ν` at a fixed reference point.
#[derive(Clone)]
pub struct PointModel {
    pub base: Arc<dyn Model>,
    pub x_ref: Vec3<f64>,
    pub f: Mat3<f64>,
    pub gradnu: Vec<Vec3<f64>>,
}

impl PointModel {
    pub fn new(base: Arc<dyn Model>, f: Mat3<f64>, gradnu: Vec<Vec3<f64>>) -> Result<Self> {
        if gradnu.len() != base.ambient_dim() {
            return Err(Error::Config(format!(
                "frozen gradient has {} rows, model ambient dimension is {}",
                gradnu.len(),
                base.ambient_dim()
            )));
        }
        Ok(Self {
            base,
            x_ref: [0.0; 3],
            f,
            gradnu,
        })
    }

    /// Undeformed reduction, `F = I`, `∇ν = 0`.
    pub fn at_rest(base: Arc<dyn Model>) -> Self {
        let n = base.ambient_dim();
        Self {
            base,
            x_ref: [0.0; 3],
            f: identity(),
            gradnu: vec![[0.0; 3]; n],
        }
    }

    fn point(&self, x: &Vec3<f64>, p: &Vec3<f64>, nu: &[f64], mu: &[f64]) -> CanonicalPoint {
        CanonicalPoint {
            x_ref: self.x_ref,
            x: *x,
            p: *p,
            f: self.f,
            nu: nu.to_vec(),
            mu: mu.to_vec(),
            gradnu: self.gradnu.clone(),
        }
    }

    pub fn hamiltonian(&self, x: &Vec3<f64>, p: &Vec3<f64>, nu: &[f64], mu: &[f64]) -> Result<f64> {
        self.base.hamiltonian_density(&self.point(x, p, nu, mu))
    }

    pub fn partials(&self, x: &Vec3<f64>, p: &Vec3<f64>, nu: &[f64], mu: &[f64]) -> Result<HamiltonianPartials> {
        self.base.hamiltonian_partials(&self.point(x, p, nu, mu))
    }

    /// `𝓛 = p·ẋ + μ·ν̇ − ℋ` at the rates recovered from the momenta.
    pub fn lagrangian(&self, x: &Vec3<f64>, p: &Vec3<f64>, nu: &[f64], mu: &[f64]) -> Result<f64> {
        let (xdot, nudot) = self.base.velocity_from_momenta(&self.x_ref, nu, p, mu)?;
        Ok(dot(p, &xdot) + dot(mu, &nudot) - self.hamiltonian(x, p, nu, mu)?)
    }
}

/// One characteristic with its accumulated action.
#[derive(Clone, Debug)]
pub struct Characteristic {
    pub label_p: Vec3<f64>,
    pub label_mu: Vec<f64>,
    pub x: Vec<Vec3<f64>>,
    pub p: Vec<Vec3<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub action: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub times: Vec<f64>,
    pub characteristics: Vec<Characteristic>,
}

/// Verlet step of the reduced system with trapezoid action accumulation.
fn verlet(pm: &PointModel, c: &mut Characteristic, dt: f64) -> Result<()> {
    let m = pm.base.as_ref();
    let last = c.x.len() - 1;
    let (mut x, mut p, mut nu, mut mu) = (c.x[last], c.p[last], c.nu[last].clone(), c.mu[last].clone());
    let lag0 = pm.lagrangian(&x, &p, &nu, &mu)?;
    let kick = |x: &Vec3<f64>, p: &mut Vec3<f64>, nu: &[f64], mu: &mut Vec<f64>, h: f64| -> Result<()> {
        let hp = pm.partials(x, p, nu, mu)?;
        *p = sub3(p, &scale3(&hp.d_x, h));
        let moved: Vec<f64> = mu.iter().zip(&hp.d_nu).map(|(a, b)| a - h * b).collect();
        *mu = apply(&m.tangent_projector(nu), &moved);
        Ok(())
    };
    kick(&x, &mut p, &nu, &mut mu, 0.5 * dt)?;
    let (xdot, nudot) = m.velocity_from_momenta(&pm.x_ref, &nu, &p, &mu)?;
    x = add3(&x, &scale3(&xdot, dt));
    let moved: Vec<f64> = nu.iter().zip(&nudot).map(|(a, b)| a + dt * b).collect();
    nu = m.project(&moved);
    mu = apply(&m.tangent_projector(&nu), &mu);
    kick(&x, &mut p, &nu, &mut mu, 0.5 * dt)?;
    let lag1 = pm.lagrangian(&x, &p, &nu, &mu)?;
    let s = c.action[last] + 0.5 * dt * (lag0 + lag1);
    c.x.push(x);
    c.p.push(p);
    c.nu.push(nu);
    c.mu.push(mu);
    c.action.push(s);
    Ok(())
}

/// Integrates every initial `(x, ν)` with the shared momenta `(p*, μ*)`
/// over `[0, t_end]`.
pub fn integrate_characteristics(
    pm: &PointModel,
    initial: &[(Vec3<f64>, Vec<f64>)],
    p_star: Vec3<f64>,
    mu_star: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Bundle> {
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::Config(format!("need dt > 0 and T > 0, got dt={dt}, T={t_end}")));
    }
    let steps = (t_end / dt).round() as usize;
    let chars = initial
        .par_iter()
        .map(|(x0, nu0)| {
            let nu = pm.base.project(nu0);
            let mu = apply(&pm.base.tangent_projector(&nu), mu_star);
            let mut c = Characteristic {
                label_p: p_star,
                label_mu: mu_star.to_vec(),
                x: vec![*x0],
                p: vec![p_star],
                nu: vec![nu],
                mu: vec![mu],
                action: vec![0.0],
            };
            for _ in 0..steps {
                verlet(pm, &mut c, dt)?;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Bundle {
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        characteristics: chars,
    })
}

/// Symmetric star around `(x0, ν0)`: the centre plus ±`spacing` along each
/// active coordinate of x (first `dims` axes) and of ν.
pub fn star_family(x0: Vec3<f64>, nu0: &[f64], dims: usize, spacing: f64) -> Vec<(Vec3<f64>, Vec<f64>)> {
    let mut out = vec![(x0, nu0.to_vec())];
    for k in 0..dims {
        for s in [-1.0, 1.0] {
            let mut x = x0;
            x[k] += s * spacing;
            out.push((x, nu0.to_vec()));
        }
    }
    for a in 0..nu0.len() {
        for s in [-1.0, 1.0] {
            let mut nu = nu0.to_vec();
            nu[a] += s * spacing;
            out.push((x0, nu));
        }
    }
    out
}

/// One table row.
#[derive(Clone, Debug, PartialEq)]
pub struct TableEntry {
    pub x: Vec3<f64>,
    pub nu: Vec<f64>,
    pub p: Vec3<f64>,
    pub mu: Vec<f64>,
    pub s: f64,
}

/// `S` sampled along characteristics, `entries[t][c]`.
#[derive(Clone, Debug)]
pub struct GeneratingTable {
    pub times: Vec<f64>,
    pub labels: Vec<(Vec3<f64>, Vec<f64>)>,
    pub base_x: Vec3<f64>,
    pub base_nu: Vec<f64>,
    pub base_value: f64,
    pub entries: Vec<Vec<TableEntry>>,
}

fn distance(a: &TableEntry, b: &TableEntry) -> f64 {
    (norm_sq(&sub3(&a.x, &b.x)) + a.nu.iter().zip(&b.nu).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()).sqrt()
}

/// Tabulates `S = S₀ + action` with `S₀ = p*·(x − x₀) + μ*·(ν − ν₀)` (the
/// first characteristic is the base point). Fails when two
/// characteristics come closer than `caustic_tol`.
pub fn build_generating_function(bundle: &Bundle, caustic_tol: f64) -> Result<GeneratingTable> {
    let chars = &bundle.characteristics;
    let base = chars.first().ok_or_else(|| Error::Config("empty characteristic bundle".into()))?;
    if bundle.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("time grid must be strictly increasing".into()));
    }
    let (bx, bnu) = (base.x[0], base.nu[0].clone());
    let s0: Vec<f64> = chars
        .iter()
        .map(|c| {
            let dnu: Vec<f64> = c.nu[0].iter().zip(&bnu).map(|(a, b)| a - b).collect();
            dot(&c.label_p, &sub3(&c.x[0], &bx)) + dot(&c.label_mu, &dnu)
        })
        .collect();
    let mut entries = Vec::with_capacity(bundle.times.len());
    for (k, &t) in bundle.times.iter().enumerate() {
        let row: Vec<TableEntry> = chars
            .iter()
            .zip(&s0)
            .map(|(c, s)| TableEntry {
                x: c.x[k],
                nu: c.nu[k].clone(),
                p: c.p[k],
                mu: c.mu[k].clone(),
                s: s + c.action[k],
            })
            .collect();
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                if distance(&row[a], &row[b]) < caustic_tol {
                    return Err(Error::Caustic { a, b, t });
                }
            }
        }
        entries.push(row);
    }
    Ok(GeneratingTable {
        times: bundle.times.clone(),
        labels: chars.iter().map(|c| (c.label_p, c.label_mu.clone())).collect(),
        base_x: bx,
        base_nu: bnu,
        base_value: 0.0,
        entries,
    })
}

impl GeneratingTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,characteristic,x0,x1,x2,nu,p_star,mu_star,S\n");
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        for (k, t) in self.times.iter().enumerate() {
            for (c, e) in self.entries[k].iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{t:?},{c},{:?},{:?},{:?},{},{},{},{:?}",
                    e.x[0],
                    e.x[1],
                    e.x[2],
                    join(&e.nu),
                    join(&self.labels[c].0),
                    join(&self.labels[c].1),
                    e.s
                );
            }
        }
        out
    }

    /// Least-squares gradient of S in (x, ν) across the family at time
    /// index `k`, centred on the first characteristic.
    fn spatial_gradient(&self, k: usize) -> Result<Vec<f64>> {
        let row = &self.entries[k];
        let c = &row[0];
        let n = c.nu.len();
        let d = 3 + n;
        let mut ata = vec![vec![0.0; d]; d];
        let mut atb = vec![0.0; d];
        for e in &row[1..] {
            let mut y: Vec<f64> = sub3(&e.x, &c.x).to_vec();
            y.extend(e.nu.iter().zip(&c.nu).map(|(a, b)| a - b));
            for i in 0..d {
                atb[i] += y[i] * (e.s - c.s);
                for j in 0..d {
                    ata[i][j] += y[i] * y[j];
                }
            }
        }
        // Coordinates the family never moves along (inactive axes) carry no
        // information; pin them to zero.
        for i in 0..d {
            if ata[i][i] == 0.0 {
                ata[i][i] = 1.0;
            }
        }
        solve_dense(&ata, &atb).ok_or_else(|| Error::Config("characteristic family is degenerate".into()))
    }
}

/// Residuals of the Hamilton–Jacobi equation and of `∂ₓS = p`, `∂_νS = μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HjResidual {
    pub hamilton_jacobi: f64,
    pub momentum_defect: f64,
}

/// Evaluated on the base characteristic at interior times:
/// `∂ₜS = dS/dt − ∂ₓS·ẋ − ∂_νS·ν̇` with the total derivatives by central
/// differences along it, then `|∂ₜS + ℋ(x, ∂ₓS, ν, ∂_νS)|`.
pub fn hj_residual(table: &GeneratingTable, pm: &PointModel) -> Result<HjResidual> {
    let nt = table.times.len();
    if nt < 3 {
        return Err(Error::Config("table needs at least three time samples".into()));
    }
    let mut hj: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for k in 1..nt - 1 {
        let (prev, cur, next) = (&table.entries[k - 1][0], &table.entries[k][0], &table.entries[k + 1][0]);
        let dt2 = table.times[k + 1] - table.times[k - 1];
        let g = table.spatial_gradient(k)?;
        let n = cur.nu.len();
        let gx = [g[0], g[1], g[2]];
        let gnu = &g[3..3 + n];
        let xdot = scale3(&sub3(&next.x, &prev.x), 1.0 / dt2);
        let nudot: Vec<f64> = next.nu.iter().zip(&prev.nu).map(|(a, b)| (a - b) / dt2).collect();
        let total = (next.s - prev.s) / dt2;
        let partial_t = total - dot(&gx, &xdot) - dot(gnu, &nudot);
        let mu_hat = apply(&pm.base.tangent_projector(&cur.nu), gnu);
        let h = pm.hamiltonian(&cur.x, &gx, &cur.nu, &mu_hat)?;
        hj = hj.max((partial_t + h).abs());
        let dp = norm_sq(&sub3(&gx, &cur.p)).sqrt();
        let dmu = mu_hat.iter().zip(&cur.mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        defect = defect.max(dp + dmu);
    }
    Ok(HjResidual {
        hamilton_jacobi: hj,
        momentum_defect: defect,
    })
}

/// Mean interval between upward crossings of `centre` by coordinate `axis`
/// of the base characteristic.
pub fn measured_period(bundle: &Bundle, axis: usize, centre: f64) -> Option<f64> {
    let c = &bundle.characteristics[0];
    let mut ups = Vec::new();
    for k in 1..c.x.len() {
        let (a, b) = (c.x[k - 1][axis] - centre, c.x[k][axis] - centre);
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            ups.push(bundle.times[k - 1] + frac * (bundle.times[k] - bundle.times[k - 1]));
        }
    }
    (ups.len() >= 2).then(|| (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::PointMass;
    use crate::model::MaterialModel;

    fn point(law: PointMass) -> PointModel {
        PointModel::at_rest(Arc::new(MaterialModel::new(law).unwrap()))
    }

    #[test]
    fn free_characteristics_are_straight_lines() {
        let pm = point(PointMass::free(2.0));
        let p = [1.0, -0.5, 0.25];
        let b = integrate_characteristics(&pm, &[([0.0; 3], vec![])], p, &[], 1.0, 0.1).unwrap();
        let c = &b.characteristics[0];
        let end = c.x.last().unwrap();
        assert!((0..3).all(|k| (end[k] - p[k] / 2.0).abs() < 1e-12));
        // S = |p|²T/(2ρ₀)
        let s = c.action.last().unwrap();
        assert!((s - norm_sq(&p) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn star_family_has_two_points_per_direction() {
        let f = star_family([1.0, 0.0, 0.0], &[0.0, 1.0], 2, 0.1);
        assert_eq!(f.len(), 1 + 2 * 2 + 2 * 2);
        assert_eq!(f[1].0, [0.9, 0.0, 0.0]);
    }

    #[test]
    fn spring_period_is_recovered() {
        let pm = point(PointMass::new(1.0, 4.0, [0.0; 3]));
        let b = integrate_characteristics(&pm, &[([1.0, 0.0, 0.0], vec![])], [0.0; 3], &[], 10.0, 1e-3).unwrap();
        let t = measured_period(&b, 0, 0.0).unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-5, "{t}");
    }

    #[test]
    fn focusing_family_is_a_caustic() {
        let pm = point(PointMass::new(1.0, 4.0, [0.0; 3]));
        let fam = star_family([0.2, 0.0, 0.0], &[], 1, 0.02);
        let b = integrate_characteristics(&pm, &fam, [1.0, 0.0, 0.0], &[], 1.0, 1e-3).unwrap();
        assert!(build_generating_function(&b, 1e-4).is_err());
        let short = integrate_characteristics(&pm, &fam, [1.0, 0.0, 0.0], &[], 0.5, 1e-3).unwrap();
        let table = build_generating_function(&short, 1e-5).unwrap();
        let r = hj_residual(&table, &pm).unwrap();
        assert!(r.hamilton_jacobi < 1e-4 && r.momentum_defect < 1e-4, "{r:?}");
    }
}
