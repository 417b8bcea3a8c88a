//! Generating functions built from characteristic families of a point
//! body, compared with the closed-form action of a harmonic spring.

use std::f64::consts::PI;

use super::{Bound, CheckOutcome};
use crate::error::Result;
use crate::hjac::{build_generating_function, hj_residual, integrate_characteristics, measured_period, star_family, PointModel};
use crate::report::{convergence_order, num, Table};
use crate::scenario::{CheckConfig, Scenario};
use crate::tensor::{dot, scale3, sub3, Vec3};

/// Point mass of density ρ₀ in w = w₀ + ½k|x − c|².
struct Spring {
    rho0: f64,
    k: f64,
    anchor: Vec3<f64>,
    w0: f64,
}

impl Spring {
    fn of(scn: &Scenario) -> Self {
        let p = &scn.config.model.params;
        let get = |key: &str, d: f64| p.get(key).copied().unwrap_or(d);
        let free = scn.config.model.id == "free-point";
        Self {
            rho0: get("rho0", 1.0),
            k: if free { 0.0 } else { get("k", 1.0) },
            anchor: if free { [0.0; 3] } else { [get("x0", 0.0), get("y0", 0.0), get("z0", 0.0)] },
            w0: if free { 0.0 } else { get("w0", 0.0) },
        }
    }

    /// ∫₀ᵀ 𝓛 dt along the trajectory from x(0) = x0 with momentum p.
    fn action(&self, x0: &Vec3<f64>, p: &Vec3<f64>, t: f64) -> f64 {
        let a = sub3(x0, &self.anchor);
        let v = scale3(p, 1.0 / self.rho0);
        let omega = self.k.sqrt();
        let motion = if omega == 0.0 {
            0.5 * dot(&v, &v) * t
        } else {
            (dot(&v, &v) - omega * omega * dot(&a, &a)) * (2.0 * omega * t).sin() / (4.0 * omega)
                + 0.5 * dot(&a, &v) * ((2.0 * omega * t).cos() - 1.0)
        };
        self.rho0 * (motion - self.w0 * t)
    }
}

pub(super) fn verify(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let spring = Spring::of(scn);
    let pm = PointModel::at_rest(scn.model.clone());
    let p = cfg.momentum.unwrap_or([1.0, 0.5, 0.0]);
    let x0 = cfg.start.unwrap_or([0.2, 0.0, 0.0]);
    let t_end = cfg.window.unwrap_or(1.0);
    let exact = spring.action(&x0, &p, t_end);

    let mut table = Table::new(&["dt", "spacing", "hj_residual", "momentum_defect", "action_error"]);
    let (mut dts, mut hj, mut defect, mut action) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut finest = None;
    for &(dt, _) in scn.ladder() {
        let spacing = 20.0 * dt;
        let family = star_family(x0, &scn.base_nu, 3, spacing);
        let bundle = integrate_characteristics(&pm, &family, p, &vec![0.0; scn.base_nu.len()], t_end, dt)?;
        let gen = build_generating_function(&bundle, 1e-3 * spacing)?;
        let r = hj_residual(&gen, &pm)?;
        let s_end = *bundle.characteristics[0].action.last().expect("non-empty");
        let err = (s_end - exact).abs();
        table.push(vec![num(dt), num(spacing), num(r.hamilton_jacobi), num(r.momentum_defect), num(err)]);
        dts.push(dt);
        hj.push(r.hamilton_jacobi);
        defect.push(r.momentum_defect);
        action.push(err);
        finest = Some(gen);
    }

    let mut out = CheckOutcome::default();
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    match cfg.tolerance {
        Some(tol) => {
            out.metric(&cfg.kind, "hj-residual", max(&hj), Bound::AtMost(tol));
            out.metric(&cfg.kind, "momentum-defect", max(&defect), Bound::AtMost(tol));
            out.metric(&cfg.kind, "action-error", max(&action), Bound::AtMost(tol));
        }
        None => {
            let order = |e: &[f64]| convergence_order(&dts, e).unwrap_or(f64::NAN);
            out.metric(&cfg.kind, "hj-residual-order", order(&hj), Bound::AtLeast(1.0));
            out.metric(&cfg.kind, "action-order", order(&action), Bound::AtLeast(1.9));
        }
    }
    if spring.k > 0.0 {
        let dt = dts.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        let period = 2.0 * PI / spring.k.sqrt();
        let start = [spring.anchor[0] + 1.0, spring.anchor[1], spring.anchor[2]];
        let bundle = integrate_characteristics(&pm, &[(start, scn.base_nu.clone())], [0.0; 3], &vec![0.0; scn.base_nu.len()], 3.5 * period, dt)?;
        let measured = measured_period(&bundle, 0, spring.anchor[0]).unwrap_or(f64::NAN);
        out.metric(&cfg.kind, "period-relative-error", (measured - period).abs() / period, Bound::AtMost(1e-4));
    }
    out.table("convergence", table);
    if let Some(gen) = finest {
        out.tables.push(("generating-function".to_string(), gen.to_csv()));
    }
    Ok(out)
}
