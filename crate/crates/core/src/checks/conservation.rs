//! Balance laws measured along integrated trajectories.

use super::{slope_table, Bound, CheckOutcome};
use crate::engine::{max_abs_values, CanonicalState, Engine, Grid};
use crate::error::Result;
use crate::noether::{integrated_magnitude, invariance_defects, noether_residual, pseudomomentum_residual, SymmetrySpec};
use crate::report::{convergence_order, num, Table};
use crate::scenario::{CheckConfig, Scenario};
use crate::tensor::norm_sq;

struct Level {
    grid: Grid,
    engine: Engine,
    dt: f64,
    traj: Vec<CanonicalState>,
}

/// Three consecutive states at every ladder level.
fn ladder(scn: &Scenario) -> Result<Vec<Level>> {
    scn.ladder()
        .iter()
        .map(|&(dt, nodes)| {
            let grid = scn.grid_with(nodes)?;
            let engine = scn.engine(grid.clone());
            let mut s = scn.initial_state(&grid)?;
            engine.prepare(&mut s)?;
            let traj = engine.run(&s, dt, 2)?;
            Ok(Level { grid, engine, dt, traj })
        })
        .collect()
}

fn spacings(levels: &[Level]) -> (Vec<f64>, Vec<f64>) {
    (
        levels.iter().map(|l| l.grid.spacing(0)).collect(),
        levels.iter().map(|l| l.dt.abs()).collect(),
    )
}

fn order_metric(out: &mut CheckOutcome, check: &str, h: &[f64], err: &[f64]) {
    let order = convergence_order(h, err).unwrap_or(f64::NAN);
    out.metric(check, "convergence-order", order, Bound::AtLeast(1.0));
}

pub(super) fn energy(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let levels = ladder(scn)?;
    let err = levels
        .iter()
        .map(|l| Ok(max_abs_values(&l.engine.energy_balance_residual(&l.traj)?)))
        .collect::<Result<Vec<_>>>()?;
    let (h, dt) = spacings(&levels);
    order_metric(&mut out, &cfg.kind, &h, &err);
    out.table("convergence", slope_table(&h, &dt, &err));

    let integ = scn.config.integrator.as_ref().expect("validated");
    let grid = scn.grid()?;
    let engine = scn.engine(grid.clone());
    let mut s = scn.initial_state(&grid)?;
    engine.prepare(&mut s)?;
    let h0 = engine.total_energy(&s)?;
    let mut history = Table::new(&["step", "time", "energy", "relative_drift"]);
    let mut drift = 0.0f64;
    for k in 0..=integ.steps {
        if k % integ.sample_every == 0 || k == integ.steps {
            let e = engine.total_energy(&s)?;
            let d = (e - h0).abs() / h0.abs().max(f64::MIN_POSITIVE);
            drift = drift.max(d);
            history.push(vec![k.to_string(), num(s.time), num(e), num(d)]);
        }
        if k < integ.steps {
            s = engine.step(&s, integ.dt)?;
        }
    }
    out.metric(&cfg.kind, "relative-drift", drift, Bound::AtMost(cfg.tolerance.unwrap_or(1e-6)));
    out.table("history", history);
    Ok(out)
}

fn symmetry(scn: &Scenario, cfg: &CheckConfig) -> Result<SymmetrySpec> {
    let grid = scn.grid()?;
    let mut centre = [0.0; 3];
    for k in 0..grid.dim() {
        centre[k] = 0.5 * grid.extents()[k];
    }
    Ok(match cfg.kind.as_str() {
        "noether:translation" => SymmetrySpec::spatial_translation(cfg.direction.unwrap_or([1.0, 0.0, 0.0])),
        "noether:material-translation" => SymmetrySpec::material_translation(cfg.direction.unwrap_or([1.0, 0.0, 0.0])),
        _ => SymmetrySpec::spatial_rotation(cfg.direction.unwrap_or([0.0, 0.0, 1.0]), cfg.pivot.unwrap_or(centre), true),
    })
}

/// Noether balance `Q̇ + Div 𝔉` under refinement. For a broken symmetry
/// the balance carries the invariance defect as a source, and the check
/// measures how closely the residual tracks it instead.
pub(super) fn noether(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let sym = symmetry(scn, cfg)?;
    let mut out = CheckOutcome::default();
    let levels = ladder(scn)?;
    let mut table = Table::new(&["h", "dt", "residual_l1", "defect_l1", "max_defect", "tracking_error"]);
    let (mut err, mut max_defect, mut tracking) = (Vec::new(), 0.0f64, f64::NAN);
    for l in &levels {
        let r = noether_residual(&l.engine, &sym, &l.traj)?;
        let d = invariance_defects(&l.engine, &sym, &l.traj[1])?;
        let d_nodes: Vec<(usize, f64)> = r.iter().map(|&(i, _)| (i, d[i])).collect();
        let mismatch: Vec<(usize, f64)> = r.iter().map(|&(i, v)| (i, v - d[i])).collect();
        let r_l1 = integrated_magnitude(&l.grid, &r);
        let d_l1 = integrated_magnitude(&l.grid, &d_nodes);
        tracking = integrated_magnitude(&l.grid, &mismatch) / d_l1;
        let md = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        max_defect = max_defect.max(md);
        err.push(r_l1);
        table.push(vec![
            num(l.grid.spacing(0)),
            num(l.dt),
            num(r_l1),
            num(d_l1),
            num(md),
            num(tracking),
        ]);
    }
    let (h, _) = spacings(&levels);
    if cfg.expect_violation {
        out.metric(&cfg.kind, "max-invariance-defect", max_defect, Bound::AtLeast(cfg.tolerance.unwrap_or(1e-3)));
        out.metric(&cfg.kind, "defect-tracking-error", tracking, Bound::AtMost(cfg.isolation.unwrap_or(0.1)));
    } else {
        out.metric(&cfg.kind, "max-invariance-defect", max_defect, Bound::AtMost(cfg.tolerance.unwrap_or(1e-10)));
        order_metric(&mut out, &cfg.kind, &h, &err);
    }
    out.table("convergence", table);
    Ok(out)
}

pub(super) fn pseudomomentum(scn: &Scenario, cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let levels = ladder(scn)?;
    let mut table = Table::new(&["h", "dt", "residual_l1", "explicit_l1", "isolation"]);
    let (mut err, mut isolation) = (Vec::new(), f64::NAN);
    for l in &levels {
        let r = pseudomomentum_residual(&l.engine, &l.traj)?;
        let total: Vec<(usize, f64)> = r.iter().map(|v| (v.node, norm_sq(&v.total()).sqrt())).collect();
        let explicit: Vec<(usize, f64)> = r.iter().map(|v| (v.node, norm_sq(&v.explicit).sqrt())).collect();
        let r_l1 = integrated_magnitude(&l.grid, &total);
        let e_l1 = integrated_magnitude(&l.grid, &explicit);
        isolation = r_l1 / e_l1;
        err.push(r_l1);
        table.push(vec![num(l.grid.spacing(0)), num(l.dt), num(r_l1), num(e_l1), num(isolation)]);
    }
    let (h, _) = spacings(&levels);
    order_metric(&mut out, &cfg.kind, &h, &err);
    if !scn.model.is_homogeneous() {
        out.metric(&cfg.kind, "explicit-term-isolation", isolation, Bound::AtMost(cfg.isolation.unwrap_or(0.1)));
    }
    out.table("convergence", table);
    Ok(out)
}
