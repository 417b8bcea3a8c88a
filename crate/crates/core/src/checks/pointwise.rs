//! Checks evaluated state by state, without integrating anything.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{random_state_point, Bound, CheckOutcome};
use crate::error::Result;
use crate::model::manifold::apply;
use crate::model::{CanonicalPoint, Model, StatePoint};
use crate::report::{num, Table};
use crate::scenario::{CheckConfig, Scenario};
use crate::tensor::norm_sq;

const FD_STEP: f64 = 1e-5;

fn central(h: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

/// Max deviation scaled by max(1, |reference|∞).
fn scaled_error(ad: &[f64], fd: &[f64]) -> f64 {
    let scale = fd.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    ad.iter().zip(fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// Central-difference derivatives of the pointwise model functions.
struct Oracle<'a> {
    model: &'a dyn Model,
    sp: &'a StatePoint,
}

impl Oracle<'_> {
    fn lagrangian(&self, edit: impl Fn(&mut StatePoint, f64)) -> Result<f64> {
        central(FD_STEP, |h| {
            let mut s = self.sp.clone();
            edit(&mut s, h);
            self.model.lagrangian_density(&s)
        })
    }

    fn piola(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                out.push(-self.lagrangian(|s, h| s.f[i][j] += h)?);
            }
        }
        Ok(out)
    }

    fn microstress(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for a in 0..self.sp.nu.len() {
            for k in 0..3 {
                out.push(-self.lagrangian(|s, h| s.gradnu[a][k] += h)?);
            }
        }
        Ok(out)
    }

    fn momentum(&self) -> Result<Vec<f64>> {
        (0..3).map(|k| self.lagrangian(|s, h| s.xdot[k] += h)).collect()
    }

    fn micro_momentum(&self) -> Result<Vec<f64>> {
        let raw = (0..self.sp.nu.len())
            .map(|a| self.lagrangian(|s, h| s.nudot[a] += h))
            .collect::<Result<Vec<_>>>()?;
        Ok(apply(&self.model.tangent_projector(&self.sp.nu), &raw))
    }

    fn self_force(&self, rho: f64) -> Result<Vec<f64>> {
        let sp = self.sp;
        (0..sp.nu.len())
            .map(|a| {
                central(FD_STEP, |h| {
                    let mut nu = sp.nu.clone();
                    nu[a] += h;
                    Ok(self.model.elastic_energy(&sp.x_ref, &sp.f, &nu, &sp.gradnu))
                })
                .map(|d| -rho * d)
            })
            .collect()
    }

    fn body_force(&self) -> Result<Vec<f64>> {
        let sp = self.sp;
        (0..3)
            .map(|k| {
                central(FD_STEP, |h| {
                    let mut x = sp.x;
                    x[k] += h;
                    Ok(self.model.potential(&x, &sp.nu))
                })
                .map(|d| -d)
            })
            .collect()
    }

    fn micro_force(&self) -> Result<Vec<f64>> {
        let sp = self.sp;
        (0..sp.nu.len())
            .map(|a| {
                central(FD_STEP, |h| {
                    let mut nu = sp.nu.clone();
                    nu[a] += h;
                    Ok(self.model.potential(&sp.x, &nu))
                })
                .map(|d| -d)
            })
            .collect()
    }
}

const BLOCKS: [&str; 7] = ["piola", "microstress", "self-force", "momentum", "micro-momentum", "body-force", "micro-force"];

pub(super) fn ad_check(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let model = scn.model.as_ref();
    let samples = cfg.samples.unwrap_or(100);
    let tol = cfg.tolerance.unwrap_or(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(scn.config.seed);
    let mut worst = [0.0f64; 7];
    let mut table = Table::new(&["sample", "quantity", "relative_error"]);
    for k in 0..samples {
        let sp = random_state_point(model, &mut rng);
        let d = model.derived_fields(&sp)?;
        let o = Oracle { model, sp: &sp };
        let flat_p: Vec<f64> = d.piola.iter().flatten().copied().collect();
        let flat_s: Vec<f64> = d.microstress.iter().flatten().copied().collect();
        let pairs = [
            (flat_p, o.piola()?),
            (flat_s, o.microstress()?),
            (d.self_force.clone(), o.self_force(d.rho0)?),
            (d.momentum.to_vec(), o.momentum()?),
            (d.micro_momentum.clone(), o.micro_momentum()?),
            (d.body_force.to_vec(), o.body_force()?),
            (d.micro_force.clone(), o.micro_force()?),
        ];
        for (b, (ad, fd)) in pairs.iter().enumerate() {
            let e = scaled_error(ad, fd);
            worst[b] = worst[b].max(e);
            table.push(vec![k.to_string(), BLOCKS[b].to_string(), num(e)]);
        }
    }
    let mut out = CheckOutcome::default();
    out.metric(&cfg.kind, "samples", samples as f64, Bound::AtLeast(100.0));
    for (b, name) in BLOCKS.iter().enumerate() {
        out.metric(&cfg.kind, name, worst[b], Bound::AtMost(tol));
    }
    out.table("errors", table);
    Ok(out)
}

pub(super) fn formulation(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let model = scn.model.as_ref();
    let tol = cfg.tolerance.unwrap_or(1e-10);
    let samples = cfg.samples.unwrap_or(5);
    let grid = scn.grid()?;
    let mut table = Table::new(&["state", "rate_difference", "rate_scale"]);
    let mut worst_rates = 0.0f64;
    for k in 0..samples {
        let mut variant = scn.clone();
        variant.config.seed = scn.config.seed.wrapping_add(k as u64);
        let engine = variant.engine(grid.clone());
        let mut s = variant.initial_state(&grid)?;
        engine.prepare(&mut s)?;
        let hr = engine.hamilton_rhs(&s)?;
        let lr = engine.lagrange_rates(&s)?;
        let scale = [&hr.xdot, &hr.pdot]
            .iter()
            .flat_map(|v| v.iter().flatten())
            .chain(hr.nudot.iter().chain(&hr.mudot).flatten())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let diff = hr.max_difference(&lr) / scale;
        worst_rates = worst_rates.max(diff);
        table.push(vec![k.to_string(), num(diff), num(scale)]);
    }

    // Legendre round trip: (ẋ, ν̇) → (p, μ) → (ẋ, ν̇), and 𝔥 = ℋ.
    let mut rng = ChaCha8Rng::seed_from_u64(scn.config.seed);
    let (mut worst_inv, mut worst_energy) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let sp = random_state_point(model, &mut rng);
        let d = model.derived_fields(&sp)?;
        let (xdot, nudot) = model.velocity_from_momenta(&sp.x_ref, &sp.nu, &d.momentum, &d.micro_momentum)?;
        let e1 = (norm_sq(&crate::tensor::sub3(&xdot, &sp.xdot))
            + nudot.iter().zip(&sp.nudot).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sqrt();
        worst_inv = worst_inv.max(e1);
        let cp = CanonicalPoint {
            x_ref: sp.x_ref,
            x: sp.x,
            p: d.momentum,
            f: sp.f,
            nu: sp.nu.clone(),
            mu: d.micro_momentum.clone(),
            gradnu: sp.gradnu.clone(),
        };
        let h = model.hamiltonian_density(&cp)?;
        worst_energy = worst_energy.max((h - d.energy).abs() / d.energy.abs().max(1.0));
    }
    let mut out = CheckOutcome::default();
    out.metric(&cfg.kind, "hamilton-vs-lagrange-rates", worst_rates, Bound::AtMost(tol));
    out.metric(&cfg.kind, "legendre-round-trip", worst_inv, Bound::AtMost(tol));
    out.metric(&cfg.kind, "energy-density-vs-hamiltonian", worst_energy, Bound::AtMost(tol));
    out.table("rates", table);
    Ok(out)
}

pub(super) fn rotation_identity(scn: &Scenario, cfg: &CheckConfig, material: bool) -> Result<CheckOutcome> {
    let model = scn.model.as_ref();
    let samples = cfg.samples.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(scn.config.seed);
    let mut table = Table::new(&["sample", "r1", "r2", "r3", "norm"]);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let sp = random_state_point(model, &mut rng);
        let r = if material {
            model.material_rotation_identity(&sp)?
        } else {
            model.spatial_rotation_identity(&sp)?
        };
        let n = norm_sq(&r).sqrt();
        worst = worst.max(n);
        table.push(vec![k.to_string(), num(r[0]), num(r[1]), num(r[2]), num(n)]);
    }
    let bound = if cfg.expect_violation {
        Bound::AtLeast(cfg.tolerance.unwrap_or(1e-3))
    } else {
        Bound::AtMost(cfg.tolerance.unwrap_or(1e-10))
    };
    let mut out = CheckOutcome::default();
    out.metric(&cfg.kind, "samples", samples as f64, Bound::AtLeast(100.0));
    out.metric(&cfg.kind, "max-residual", worst, bound);
    out.table("residuals", table);
    Ok(out)
}
