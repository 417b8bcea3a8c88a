use multifield::model::fixtures::{Director, IsotropicMicro};
use multifield::model::{manifold, MaterialModel};
use multifield::poisson::QuadraticDensity;
use multifield::{Model, StatePoint};
use proptest::prelude::*;

fn state(f: [f64; 9], nu: [f64; 3], rate: [f64; 3], grad: [f64; 9], model: &dyn Model) -> StatePoint {
    let mut sp = StatePoint::rest(model.project(&nu));
    for k in 0..9 {
        sp.f[k / 3][k % 3] += f[k];
    }
    let proj = model.tangent_projector(&sp.nu);
    sp.nudot = manifold::apply(&proj, &rate);
    for a in 0..3 {
        let col = manifold::apply(&proj, &[grad[a], grad[3 + a], grad[6 + a]]);
        for r in 0..3 {
            sp.gradnu[r][a] = col[r];
        }
    }
    sp.xdot = [rate[1], -rate[0], 0.5];
    sp
}

fn small() -> impl Strategy<Value = [f64; 9]> {
    prop::array::uniform9(-0.3..0.3f64)
}

fn unit() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn director_is_frame_indifferent(f in small(), nu in unit(), rate in unit(), grad in small()) {
        let m = MaterialModel::new(Director::new(1.0, 0.5, 0.3)).unwrap();
        let sp = state(f, nu, rate, grad, &m);
        let r = m.spatial_rotation_identity(&sp).unwrap();
        prop_assert!(r.iter().all(|v| v.abs() < 1e-10), "{r:?}");
    }

    #[test]
    fn isotropic_body_has_no_material_torque(f in small(), nu in unit(), rate in unit(), grad in small()) {
        let m = MaterialModel::new(IsotropicMicro::default()).unwrap();
        let sp = state(f, nu, rate, grad, &m);
        let r = m.material_rotation_identity(&sp).unwrap();
        prop_assert!(r.iter().all(|v| v.abs() < 1e-10), "{r:?}");
    }

    #[test]
    fn legendre_transform_round_trips(f in small(), nu in unit(), rate in unit(), grad in small()) {
        let m = MaterialModel::new(Director::new(1.0, 0.5, 0.3)).unwrap();
        let sp = state(f, nu, rate, grad, &m);
        let d = m.derived_fields(&sp).unwrap();
        let (v, w) = m.velocity_from_momenta(&sp.x_ref, &sp.nu, &d.momentum, &d.micro_momentum).unwrap();
        prop_assert!(v.iter().zip(&sp.xdot).all(|(a, b)| (a - b).abs() < 1e-10));
        prop_assert!(w.iter().zip(&sp.nudot).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn density_bracket_is_antisymmetric(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = QuadraticDensity::random(&mut rng, 2, false);
        let g = QuadraticDensity::random(&mut rng, 2, true);
        let (fg, gf) = (f.bracket(&g), g.bracket(&f));
        prop_assert!((fg.c + gf.c).abs() < 1e-12);
        prop_assert!(fg.b.iter().zip(&gf.b).all(|(a, b)| (a + b).abs() < 1e-12));
        prop_assert!(fg.a.iter().flatten().zip(gf.a.iter().flatten()).all(|(a, b)| (a + b).abs() < 1e-12));
    }
}
