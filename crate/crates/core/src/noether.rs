//! Symmetry families and their Nöther currents.

use crate::engine::{CanonicalState, Engine, Grid, NodeValues};
use crate::error::{Error, Result};
use crate::model::{DerivedPoint, Model, StatePoint};
use crate::tensor::*;

/// Affine vector field `y ↦ linear·(y − pivot) + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineField {
    pub linear: Mat3<f64>,
    pub offset: Vec3<f64>,
    pub pivot: Vec3<f64>,
}

impl AffineField {
    pub fn zero() -> Self {
        Self {
            linear: zero33(),
            offset: [0.0; 3],
            pivot: [0.0; 3],
        }
    }

    pub fn translation(c: Vec3<f64>) -> Self {
        Self {
            offset: c,
            ..Self::zero()
        }
    }

    /// Infinitesimal rotation `ω × (y − pivot)`.
    pub fn rotation(omega: Vec3<f64>, pivot: Vec3<f64>) -> Self {
        Self {
            linear: cross_matrix(&omega),
            offset: [0.0; 3],
            pivot,
        }
    }

    pub fn eval(&self, y: &Vec3<f64>) -> Vec3<f64> {
        add3(&matvec(&self.linear, &sub3(y, &self.pivot)), &self.offset)
    }
}

/// A one-parameter family acting on reference points (`w`), on spatial
/// points (`v`) and, through the attached group action, on the order
/// parameter (`algebra_dir`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrySpec {
    pub w: AffineField,
    pub v: AffineField,
    pub algebra_dir: Option<Vec<f64>>,
}

impl SymmetrySpec {
    /// Rejects non-isochoric reference fields (tr ≠ 0).
    pub fn new(w: AffineField, v: AffineField, algebra_dir: Option<Vec<f64>>) -> Result<Self> {
        let tr = trace(&w.linear);
        if tr.abs() > 1e-10 {
            return Err(Error::Symmetry(format!(
                "reference field must be divergence free, trace is {tr:e}"
            )));
        }
        Ok(Self { w, v, algebra_dir })
    }

    pub fn spatial_translation(c: Vec3<f64>) -> Self {
        Self {
            w: AffineField::zero(),
            v: AffineField::translation(c),
            algebra_dir: None,
        }
    }

    pub fn material_translation(c: Vec3<f64>) -> Self {
        Self {
            w: AffineField::translation(c),
            v: AffineField::zero(),
            algebra_dir: None,
        }
    }

    /// Spatial rotation of x together with ν through the group action.
    pub fn spatial_rotation(omega: Vec3<f64>, pivot: Vec3<f64>, with_action: bool) -> Self {
        Self {
            w: AffineField::zero(),
            v: AffineField::rotation(omega, pivot),
            algebra_dir: with_action.then(|| omega.to_vec()),
        }
    }

    pub fn material_rotation(omega: Vec3<f64>, pivot: Vec3<f64>) -> Self {
        Self {
            w: AffineField::rotation(omega, pivot),
            v: AffineField::zero(),
            algebra_dir: None,
        }
    }
}

/// Nöther density and flux at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct NoetherCurrent {
    pub density: f64,
    pub flux: Vec3<f64>,
}

/// Vertical variations `δx = v − F w` and `δν = ξ − ∇ν w`.
fn vertical(model: &dyn Model, sym: &SymmetrySpec, sp: &StatePoint) -> Result<(Vec3<f64>, Vec<f64>)> {
    let w = sym.w.eval(&sp.x_ref);
    let dx = sub3(&sym.v.eval(&sp.x), &matvec(&sp.f, &w));
    let n = sp.nu.len();
    let xi = match &sym.algebra_dir {
        Some(q) => model
            .generator(&sp.nu, q)
            .ok_or_else(|| Error::Symmetry(format!("model `{}` has no group action", model.name())))?,
        None => vec![0.0; n],
    };
    let dnu = (0..n).map(|a| xi[a] - dot(&sp.gradnu[a], &w)).collect();
    Ok((dx, dnu))
}

/// `Q = p·δx + μ·δν`, `𝔉 = 𝓛w − Pᵀδx − 𝒮ᵀδν`.
pub fn current_from(
    model: &dyn Model,
    sym: &SymmetrySpec,
    sp: &StatePoint,
    d: &DerivedPoint,
) -> Result<NoetherCurrent> {
    let (dx, dnu) = vertical(model, sym, sp)?;
    let w = sym.w.eval(&sp.x_ref);
    let mut flux = scale3(&w, d.lagrangian);
    flux = sub3(&flux, &matvec_t(&d.piola, &dx));
    for (a, row) in d.microstress.iter().enumerate() {
        flux = sub3(&flux, &scale3(row, dnu[a]));
    }
    Ok(NoetherCurrent {
        density: dot(&d.momentum, &dx) + dot(&d.micro_momentum, &dnu),
        flux,
    })
}

pub fn noether_current(model: &dyn Model, sym: &SymmetrySpec, sp: &StatePoint) -> Result<NoetherCurrent> {
    let d = model.derived_fields(sp)?;
    current_from(model, sym, sp, &d)
}

/// Nöther currents at every node of a grid state.
pub fn noether_currents(engine: &Engine, sym: &SymmetrySpec, s: &CanonicalState) -> Result<Vec<NoetherCurrent>> {
    let (sps, ds) = engine.derived(s)?;
    sps.iter()
        .zip(&ds)
        .map(|(sp, d)| current_from(engine.model(), sym, sp, d))
        .collect()
}

fn middle(traj: &[CanonicalState]) -> Result<(usize, f64)> {
    if traj.len() < 3 {
        return Err(Error::Config("residuals need three consecutive states".into()));
    }
    let mid = traj.len() / 2;
    Ok((mid, traj[mid + 1].time - traj[mid - 1].time))
}

/// `Q̇ + Div 𝔉` at interior nodes of the middle state.
pub fn noether_residual(engine: &Engine, sym: &SymmetrySpec, traj: &[CanonicalState]) -> Result<NodeValues<f64>> {
    let (mid, dt2) = middle(traj)?;
    let before = noether_currents(engine, sym, &traj[mid - 1])?;
    let now = noether_currents(engine, sym, &traj[mid])?;
    let after = noether_currents(engine, sym, &traj[mid + 1])?;
    let flux: Vec<Vec3<f64>> = now.iter().map(|c| c.flux).collect();
    let grid = engine.grid();
    Ok(grid
        .interior_nodes()
        .into_iter()
        .map(|i| (i, (after[i].density - before[i].density) / dt2 + grid.divergence_vector(&flux, i)))
        .collect())
}

/// Pointwise invariance defect at every node of a state.
pub fn invariance_defects(engine: &Engine, sym: &SymmetrySpec, s: &CanonicalState) -> Result<Vec<f64>> {
    engine
        .state_points(s)?
        .iter()
        .map(|sp| engine.model().invariance_defect(sym, sp))
        .collect()
}

/// ∫|r| over the nodes carrying a residual.
pub fn integrated_magnitude(grid: &Grid, r: &NodeValues<f64>) -> f64 {
    r.iter().map(|(i, v)| grid.weight(*i) * v.abs()).sum()
}

/// Pseudomomentum balance split into its transport part
/// `d/dt(Fᵀp + ∇νᵀμ) + Div(ℙ − (½ρ₀|ẋ|² + ρ₀χ − ρ₀w)I)` and the explicit
/// inhomogeneity force `∂_X𝓛`; their sum vanishes on solutions.
#[derive(Clone, Debug)]
pub struct PseudomomentumResidual {
    pub node: usize,
    pub transport: Vec3<f64>,
    pub explicit: Vec3<f64>,
}

impl PseudomomentumResidual {
    pub fn total(&self) -> Vec3<f64> {
        add3(&self.transport, &self.explicit)
    }
}

fn pseudomomentum(engine: &Engine, s: &CanonicalState) -> Vec<Vec3<f64>> {
    let (f, gn) = engine.kinematics(&s.x, &s.nu);
    (0..s.len())
        .map(|i| {
            let mut g = matvec_t(&f[i], &s.p[i]);
            for (a, row) in gn[i].iter().enumerate() {
                g = add3(&g, &scale3(row, s.mu[i][a]));
            }
            g
        })
        .collect()
}

pub fn pseudomomentum_residual(engine: &Engine, traj: &[CanonicalState]) -> Result<Vec<PseudomomentumResidual>> {
    let (mid, dt2) = middle(traj)?;
    let before = pseudomomentum(engine, &traj[mid - 1]);
    let after = pseudomomentum(engine, &traj[mid + 1]);
    let (sps, ds) = engine.derived(&traj[mid])?;
    let flux: Vec<Mat3<f64>> = sps
        .iter()
        .zip(&ds)
        .map(|(sp, d)| {
            let lagr_part = 0.5 * d.rho0 * norm_sq(&sp.xdot) + d.rho0 * (d.coenergy - d.potential);
            sub33(&d.eshelby, &scale33(&identity(), lagr_part))
        })
        .collect();
    let grid = engine.grid();
    Ok(grid
        .interior_nodes()
        .into_iter()
        .map(|i| {
            let rate = scale3(&sub3(&after[i], &before[i]), 1.0 / dt2);
            PseudomomentumResidual {
                node: i,
                transport: add3(&rate, &grid.divergence(&flux, i)),
                explicit: ds[i].d_x_ref,
            }
        })
        .collect())
}

pub fn spatial_rotation_identity(model: &dyn Model, sp: &StatePoint) -> Result<Vec3<f64>> {
    model.spatial_rotation_identity(sp)
}

pub fn material_rotation_identity(model: &dyn Model, sp: &StatePoint) -> Result<Vec3<f64>> {
    model.material_rotation_identity(sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::QuadraticMedium;
    use crate::model::MaterialModel;

    fn point() -> StatePoint {
        StatePoint {
            x_ref: [0.4, 0.1, 0.0],
            x: [0.5, 0.0, 0.2],
            xdot: [0.3, -0.2, 0.1],
            f: [[1.05, 0.1, 0.0], [0.0, 0.98, 0.02], [0.03, 0.0, 1.0]],
            nu: vec![0.1, 0.2, -0.1],
            nudot: vec![0.0, 0.3, 0.1],
            gradnu: vec![[0.2, 0.0, 0.1], [0.0, 0.1, 0.0], [-0.1, 0.0, 0.3]],
        }
    }

    fn close3(a: &Vec3<f64>, b: &Vec3<f64>) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn spatial_translation_current_is_momentum_and_stress() {
        let m = MaterialModel::new(QuadraticMedium::new(1.5, 0.0)).unwrap();
        let sp = point();
        let c = [0.3, -1.0, 0.5];
        let d = m.derived_fields(&sp).unwrap();
        let j = current_from(&m, &SymmetrySpec::spatial_translation(c), &sp, &d).unwrap();
        assert!((j.density - dot(&d.momentum, &c)).abs() < 1e-12);
        assert!(close3(&j.flux, &scale3(&matvec_t(&d.piola, &c), -1.0)));
    }

    #[test]
    fn material_translation_current_is_pseudomomentum_and_eshelby() {
        let m = MaterialModel::new(QuadraticMedium::new(1.5, 0.0)).unwrap();
        let sp = point();
        let c = [0.0, 1.0, 0.0];
        let d = m.derived_fields(&sp).unwrap();
        let j = current_from(&m, &SymmetrySpec::material_translation(c), &sp, &d).unwrap();
        let fc = matvec(&sp.f, &c);
        let gc: Vec<f64> = sp.gradnu.iter().map(|r| dot(r, &c)).collect();
        let q = -dot(&d.momentum, &fc) - d.micro_momentum.iter().zip(&gc).map(|(a, b)| a * b).sum::<f64>();
        assert!((j.density - q).abs() < 1e-12);
        let mut flux = add3(&scale3(&c, d.lagrangian), &matvec_t(&d.piola, &fc));
        for (row, g) in d.microstress.iter().zip(&gc) {
            flux = add3(&flux, &scale3(row, *g));
        }
        assert!(close3(&j.flux, &flux));
    }

    #[test]
    fn invariance_defect_detects_a_spring() {
        let sym = SymmetrySpec::spatial_translation([1.0, 0.0, 0.0]);
        let free = MaterialModel::new(QuadraticMedium::new(1.0, 0.0)).unwrap();
        let held = MaterialModel::new(QuadraticMedium::new(1.0, 2.0)).unwrap();
        assert!(free.invariance_defect(&sym, &point()).unwrap().abs() < 1e-14);
        // d/dε 𝓛(x + εc) = −ρ₀k x·c
        let defect = held.invariance_defect(&sym, &point()).unwrap();
        assert!((defect + 2.0 * 0.5).abs() < 1e-12, "{defect}");
    }
}
