use std::f64::consts::PI;
use std::sync::Arc;

use multifield::engine::*;
use multifield::model::fixtures::QuadraticMedium;
use multifield::model::MaterialModel;
use multifield::poisson::*;
use multifield::tensor::dot;
use multifield::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bar() -> (Engine, CanonicalState) {
    let model: Arc<dyn Model> = Arc::new(MaterialModel::new(QuadraticMedium::default()).unwrap());
    let grid = Grid::new(&[2.0 * PI], &[16], &[AxisBoundary::bounded(FaceTag::Natural)]).unwrap();
    let e = Engine::new(model, grid.clone(), BoundarySpec::default());
    let mut s = CanonicalState::rest(&grid, &[0.0; 3]);
    for i in 0..grid.len() {
        let c = grid.reference(i)[0].cos();
        s.x[i][1] += 0.02 * c;
        s.nu[i] = vec![0.1 * c, 0.0, 0.0];
        s.p[i] = [0.0, 0.01 * c, 0.0];
    }
    (e, s)
}

#[test]
fn momentum_bracket_matches_the_assembled_force() {
    let (e, s) = bar();
    let v = [0.3, -0.2, 0.7];
    let mut b = vec![0.0; 12];
    b[3..6].copy_from_slice(&v);
    let f = FunctionalSpec::Quadratic(QuadraticDensity::linear(b, 0.0));
    let br = bracket(&f, &FunctionalSpec::Hamiltonian, &e, &s).unwrap();
    let r = e.hamilton_rhs(&s).unwrap();
    let asm: f64 = (0..s.len()).map(|i| e.grid().weight(i) * dot(&r.pdot[i], &v)).sum();
    assert!((br - asm).abs() <= 1e-12 * asm.abs().max(1.0), "{br:e} vs {asm:e}");
}

#[test]
fn hamiltonian_commutes_with_itself() {
    let (e, s) = bar();
    let h = FunctionalSpec::Hamiltonian;
    assert_eq!(bracket(&h, &h, &e, &s).unwrap(), 0.0);
}

#[test]
fn bracket_predicts_rates_along_the_flow() {
    let (e, s) = bar();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, 3, false));
    let defects: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| bracket_rate_check(&q, &e, &e.run(&s, dt, 2).unwrap()).unwrap().defect())
        .collect();
    let order = multifield::report::convergence_order(&[1e-2, 5e-3, 2.5e-3], &defects).unwrap();
    assert!(order >= 1.8, "{defects:?}");
}

#[test]
fn jacobi_identity_on_a_bounded_bar() {
    let (e, s) = bar();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let mut q = || FunctionalSpec::Quadratic(QuadraticDensity::random(&mut rng, 3, false));
        let (a, b, c) = (q(), q(), q());
        assert!(jacobi_residual(&a, &b, &c, &e, &s).unwrap() < 1e-10);
    }
}
