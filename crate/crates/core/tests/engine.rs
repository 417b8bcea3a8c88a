use std::f64::consts::PI;
use std::sync::Arc;

use multifield::engine::*;
use multifield::model::fixtures::QuadraticMedium;
use multifield::model::MaterialModel;
use multifield::noether::*;
use multifield::report::convergence_order;
use multifield::tensor::norm_sq;
use multifield::Model;

fn m1() -> Arc<dyn Model> {
    Arc::new(MaterialModel::new(QuadraticMedium::default()).unwrap())
}

fn wave(grid: &Grid) -> CanonicalState {
    let mut s = CanonicalState::rest(grid, &[0.0; 3]);
    let l = grid.extents()[0];
    for i in 0..grid.len() {
        let x = grid.reference(i);
        let ph = 2.0 * PI * x[0] / l;
        s.x[i][0] += 0.01 * ph.sin();
        s.x[i][1] += 0.02 * ph.cos();
        s.nu[i] = vec![0.1 * ph.cos(), 0.05 * ph.sin(), 0.0];
        s.p[i] = [0.0, 0.01 * ph.sin(), 0.0];
        s.mu[i] = vec![0.0, 0.0, 0.03 * ph.cos()];
    }
    s
}

#[test]
fn periodic_energy_is_conserved_and_verlet_is_reversible() {
    let grid = Grid::periodic(&[2.0 * PI], &[32]).unwrap();
    let e = Engine::new(m1(), grid.clone(), BoundarySpec::default());
    let s = wave(&grid);
    let h0 = e.total_energy(&s).unwrap();
    let traj = e.run(&s, 1e-3, 1000).unwrap();
    let drift = traj
        .iter()
        .step_by(50)
        .map(|st| (e.total_energy(st).unwrap() - h0).abs() / h0)
        .fold(0.0, f64::max);
    assert!(drift <= 1e-6, "drift {drift:e}");

    let back = e.step(&e.step(&s, 1e-3).unwrap(), -1e-3).unwrap();
    assert!(back.max_difference(&s) < 1e-14);
}

#[test]
fn lagrangian_and_hamiltonian_rates_agree() {
    let grid = Grid::periodic(&[2.0 * PI], &[24]).unwrap();
    let e = Engine::new(m1(), grid.clone(), BoundarySpec::default());
    let s = wave(&grid);
    let diff = e.lagrange_rates(&s).unwrap().max_difference(&e.hamilton_rhs(&s).unwrap());
    assert!(diff < 1e-12, "{diff:e}");
}

#[test]
fn local_balances_converge() {
    for inhomogeneous in [false, true] {
        let model: Arc<dyn Model> = if inhomogeneous {
            Arc::new(MaterialModel::new(QuadraticMedium::inhomogeneous(1.0, 0.3, 2.0 * PI)).unwrap())
        } else {
            m1()
        };
        let (mut hs, mut energy, mut pseudo, mut noether) = (vec![], vec![], vec![], vec![]);
        for n in [16usize, 32, 64] {
            let grid = Grid::periodic(&[2.0 * PI], &[n]).unwrap();
            let e = Engine::new(model.clone(), grid.clone(), BoundarySpec::default());
            let h = grid.spacing(0);
            let traj = e.run(&wave(&grid), 0.25 * h, 2).unwrap();
            hs.push(h);
            energy.push(max_abs_values(&e.energy_balance_residual(&traj).unwrap()));
            let pm = pseudomomentum_residual(&e, &traj).unwrap();
            pseudo.push(pm.iter().map(|r| norm_sq(&r.total()).sqrt()).fold(0.0, f64::max));
            let sym = SymmetrySpec::spatial_translation([1.0, 0.5, 0.0]);
            noether.push(max_abs_values(&noether_residual(&e, &sym, &traj).unwrap()));
        }
        for (name, err) in [("energy", &energy), ("pseudomomentum", &pseudo), ("noether", &noether)] {
            let order = convergence_order(&hs, err).unwrap();
            assert!(order >= 1.8, "{name} order {order} (inhomogeneous {inhomogeneous})");
        }
    }
}

#[test]
fn traction_free_bar_stays_bounded() {
    let ax = AxisBoundary::bounded(FaceTag::Natural);
    let mut dev = vec![];
    for n in [16usize, 32] {
        let grid = Grid::new(&[2.0 * PI], &[n], &[ax]).unwrap();
        let e = Engine::new(m1(), grid.clone(), BoundarySpec::default());
        let s = wave(&grid);
        let h0 = e.total_energy(&s).unwrap();
        let dt = 0.2 * grid.spacing(0);
        let traj = e.run(&s, dt, (20.0 / dt) as usize).unwrap();
        dev.push(
            traj.iter()
                .map(|st| (e.total_energy(st).unwrap() - h0).abs() / h0)
                .fold(0.0, f64::max),
        );
    }
    assert!(dev[0] < 0.1 && dev[1] < dev[0] / 3.0, "{dev:?}");
}

#[test]
fn too_few_nodes_is_rejected() {
    let err = Grid::periodic(&[1.0], &[2]).unwrap_err();
    assert!(matches!(err, multifield::Error::Grid(_)));
}
