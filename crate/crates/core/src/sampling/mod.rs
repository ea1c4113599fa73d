//! Antipodal grasp sampling on meshes.
//!
//! Each surface sample `i` draws from its own ChaCha substream of the seed,
//! so the output depends only on `(mesh, config)` and not on scheduling.

mod gripper;

pub use gripper::{box_triangle_overlap, collision_check, GripperModel, OrientedBox};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geom::{TriangleMesh, UnitVec3, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub mu: f64,
    pub n_surface_samples: usize,
    pub w_max: f64,
    /// Dihedral angles attached to each accepted pair.
    pub phi_grid: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            mu: 0.4,
            n_surface_samples: 2000,
            w_max: 0.08,
            phi_grid: 8,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.w_max > 0.0) {
            return Err(Error::Config(format!(
                "sampler needs mu > 0 and w_max > 0 (got mu={}, w_max={})",
                self.mu, self.w_max
            )));
        }
        Ok(())
    }
}

/// Two-contact grasp in the mesh frame. `v1`, `v2` are outward normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntipodalGrasp {
    pub p1: Vec3,
    pub p2: Vec3,
    pub v1: UnitVec3,
    pub v2: UnitVec3,
    pub w: f64,
    pub phi_samples: Vec<f64>,
    pub quality: f64,
}

impl AntipodalGrasp {
    /// Unit direction from `p1` to `p2`.
    pub fn axis(&self) -> Option<UnitVec3> {
        UnitVec3::normalize(self.p2 - self.p1)
    }
}

/// Angle between two vectors, robust near 0 and pi.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Two-contact friction-cone test: the contact line must lie inside both
/// inward cones of half-angle `atan(mu)`. The cone is closed.
pub fn force_closure(p1: &Vec3, v1: &UnitVec3, p2: &Vec3, v2: &UnitVec3, mu: f64, tol: &Tolerances) -> Result<bool> {
    let line = p2 - p1;
    let len = line.norm();
    if !(len >= tol.min_contact_separation) {
        return Err(Error::DegenerateContactPair(len));
    }
    let half = mu.atan() + tol.cone_boundary;
    Ok(angle_between(&line, &-v1.into_inner()) <= half && angle_between(&-line, &-v2.into_inner()) <= half)
}

/// `n` cell-centered dihedral angles over the feasible range for a grasp
/// axis `n_x` relative to a z-up platform; empty for near-vertical axes.
pub fn phi_grid(n_x: &UnitVec3, n: usize, tol: &Tolerances) -> Vec<f64> {
    let s = n_x.x.hypot(n_x.y);
    if s < tol.degenerate_axis || n == 0 {
        return Vec::new();
    }
    let lo = s.min(1.0).acos();
    let step = (std::f64::consts::PI - 2.0 * lo) / n as f64;
    (0..n).map(|k| lo + (k as f64 + 0.5) * step).collect()
}

fn sample_one(
    mesh: &TriangleMesh,
    faces: &WeightedIndex<f64>,
    cfg: &SamplerConfig,
    tol: &Tolerances,
    index: u64,
) -> Option<AntipodalGrasp> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let face = faces.sample(&mut rng);
    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
    let sr = r1.sqrt();
    let bary = [1.0 - sr, sr * (1.0 - r2), sr * r2];
    let p1 = mesh.point_at(face, bary);
    let v1 = mesh.normal_at(face, bary);
    let origin = p1 - v1.into_inner() * tol.ray_epsilon;
    let hit = mesh.raycast(&origin, &-v1, 0.0)?;
    let p2 = hit.point;
    let v2 = mesh.normal_at(hit.face, hit.barycentric);
    let w = (p2 - p1).norm();
    if w > cfg.w_max || !force_closure(&p1, &v1, &p2, &v2, cfg.mu, tol).ok()? {
        return None;
    }
    let axis = UnitVec3::normalize(p2 - p1)?;
    Some(AntipodalGrasp {
        p1,
        p2,
        v1,
        v2,
        w,
        phi_samples: phi_grid(&axis, cfg.phi_grid, tol),
        quality: angle_between(&(p2 - p1), &-v1.into_inner()).cos(),
    })
}

/// Samples antipodal grasps; results are ordered by surface-sample index.
pub fn sample_grasps(mesh: &TriangleMesh, cfg: &SamplerConfig, tol: &Tolerances) -> Result<Vec<AntipodalGrasp>> {
    cfg.validate()?;
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !mesh.is_closed() {
        log::warn!("sampling an open mesh; some rays may escape");
    }
    let faces = WeightedIndex::new(mesh.areas().iter().copied()).map_err(|_| Error::EmptyMesh)?;
    Ok((0..cfg.n_surface_samples as u64)
        .into_par_iter()
        .filter_map(|i| sample_one(mesh, &faces, cfg, tol, i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn u(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::normalize(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn sphere_contacts_close() {
        let tol = Tolerances::default();
        let ok = force_closure(
            &Vec3::new(1.0, 0.0, 0.0),
            &u(1.0, 0.0, 0.0),
            &Vec3::new(-1.0, 0.0, 0.0),
            &u(-1.0, 0.0, 0.0),
            1e-3,
            &tol,
        );
        assert!(ok.unwrap());
    }

    #[test]
    fn line_at_45_degrees_fails_mu_half() {
        // inward normals -(1,1,0)/sqrt2 and (1,1,0)/sqrt2; line along -x
        let tol = Tolerances::default();
        let ok = force_closure(&Vec3::zeros(), &u(1.0, 1.0, 0.0), &Vec3::new(-1.0, 0.0, 0.0), &u(-1.0, -1.0, 0.0), 0.5, &tol);
        assert!(!ok.unwrap());
        let ok = force_closure(&Vec3::zeros(), &u(1.0, 1.0, 0.0), &Vec3::new(-1.0, 0.0, 0.0), &u(-1.0, -1.0, 0.0), 1.01, &tol);
        assert!(ok.unwrap());
    }

    #[test]
    fn cone_boundary_is_closed() {
        let tol = Tolerances::default();
        let mu: f64 = 0.3;
        let a = mu.atan();
        let v1 = u(a.cos(), a.sin(), 0.0);
        let ok = force_closure(&Vec3::zeros(), &v1, &Vec3::new(-1.0, 0.0, 0.0), &u(-1.0, 0.0, 0.0), mu, &tol);
        assert!(ok.unwrap());
    }

    #[test]
    fn coincident_contacts_error() {
        let tol = Tolerances::default();
        let p = Vec3::new(0.1, 0.2, 0.3);
        assert!(matches!(
            force_closure(&p, &u(1.0, 0.0, 0.0), &p, &u(-1.0, 0.0, 0.0), 0.4, &tol),
            Err(Error::DegenerateContactPair(_))
        ));
    }

    #[test]
    fn phi_grid_feasible() {
        let tol = Tolerances::default();
        let n_x = u(1.0, 0.0, 1.0);
        let grid = phi_grid(&n_x, 4, &tol);
        assert_eq!(grid.len(), 4);
        for phi in grid {
            assert!(crate::pose::solve_ny(&n_x, phi, &tol).is_ok());
            assert!(phi > PI / 4.0 && phi < 3.0 * PI / 4.0);
        }
        assert!(phi_grid(&UnitVec3::z_axis(), 4, &tol).is_empty());
    }

    #[test]
    fn sphere_grasps_are_diametral() {
        let mesh = TriangleMesh::icosphere(1.0, 4);
        let cfg = SamplerConfig { mu: 0.3, w_max: 3.0, n_surface_samples: 300, ..Default::default() };
        let tol = Tolerances::default();
        let grasps = sample_grasps(&mesh, &cfg, &tol).unwrap();
        assert!(grasps.len() > 250);
        for g in &grasps {
            assert!((g.w - 2.0).abs() < 0.02);
            let d = g.p1.cross(&g.axis().unwrap()).norm();
            assert!(d < 0.02);
            assert!(force_closure(&g.p1, &g.v1, &g.p2, &g.v2, cfg.mu, &tol).unwrap());
            assert!(g.quality > 0.0 && g.quality <= 1.0);
        }
        let narrow = SamplerConfig { w_max: 0.5, ..cfg };
        assert!(sample_grasps(&mesh, &narrow, &tol).unwrap().is_empty());
    }

    #[test]
    fn cube_grasps_join_opposite_faces() {
        let mesh = TriangleMesh::cuboid(Vec3::repeat(0.5));
        let cfg = SamplerConfig { mu: 0.05, w_max: 3.0, n_surface_samples: 300, ..Default::default() };
        let grasps = sample_grasps(&mesh, &cfg, &Tolerances::default()).unwrap();
        assert!(!grasps.is_empty());
        for g in &grasps {
            assert!((g.w - 1.0).abs() < 1e-6);
            assert!((g.v1.into_inner() + g.v2.into_inner()).norm() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mesh = TriangleMesh::icosphere(0.03, 2);
        let cfg = SamplerConfig { n_surface_samples: 200, seed: 7, ..Default::default() };
        let tol = Tolerances::default();
        let a = sample_grasps(&mesh, &cfg, &tol).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_grasps(&mesh, &cfg, &tol).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let other = SamplerConfig { seed: 8, ..cfg };
        assert_ne!(a, sample_grasps(&mesh, &other, &tol).unwrap());
    }

    #[test]
    fn empty_mesh_rejected() {
        let mesh = TriangleMesh::new(Vec::new(), Vec::new()).unwrap();
        assert!(matches!(
            sample_grasps(&mesh, &SamplerConfig::default(), &Tolerances::default()),
            Err(Error::EmptyMesh)
        ));
    }
}
