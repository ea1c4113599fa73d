//! Analytic-shape oracles run by `graspgeom selfcheck`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Result;
use crate::geom::{DepthMap, PinholeCamera, Pixel, TriangleMesh, UnitVec3, Vec3};
use crate::pose::{dihedral_residual, solve_ny};
use crate::sampling::{angle_between, force_closure, sample_grasps, SamplerConfig};
use crate::training::normals_from_depth;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub residual: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "{verdict} {:<16} residual {:.3e} (bound {:.3e})", c.name, c.residual, c.bound)?;
            if let Some(e) = &c.error {
                write!(f, " error: {e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn run(name: &'static str, bound: f64, body: impl FnOnce() -> Result<f64>) -> Check {
    match body() {
        Ok(residual) => Check { name, passed: residual <= bound, residual, bound, error: None },
        Err(e) => Check { name, passed: false, residual: f64::NAN, bound, error: Some(e.to_string()) },
    }
}

/// Depth of a plane `n . X = offset` seen by `cam`; 0 where the ray misses.
pub fn plane_depth(cam: &PinholeCamera, n: &Vec3, offset: f64) -> DepthMap {
    depth_from_rays(cam, |ray| {
        let t = offset / n.dot(ray);
        (t.is_finite() && t > 0.0).then_some(t)
    })
}

/// Depth of a sphere seen by `cam`; 0 off the silhouette.
pub fn sphere_depth(cam: &PinholeCamera, center: &Vec3, radius: f64) -> DepthMap {
    depth_from_rays(cam, |ray| {
        // |t ray - c|^2 = r^2 with ray = (x, y, 1), so t is the depth
        let a = ray.norm_squared();
        let b = ray.dot(center);
        let disc = b * b - a * (center.norm_squared() - radius * radius);
        (disc >= 0.0).then(|| (b - disc.sqrt()) / a).filter(|t| *t > 0.0)
    })
}

fn depth_from_rays(cam: &PinholeCamera, hit: impl Fn(&Vec3) -> Option<f64>) -> DepthMap {
    let mut data = Vec::with_capacity(cam.width * cam.height);
    for v in 0..cam.height {
        for u in 0..cam.width {
            let ray = cam.backproject(Pixel::new(u as f64, v as f64), 1.0).expect("positive depth");
            data.push(hit(&ray).unwrap_or(0.0));
        }
    }
    DepthMap::new(cam.width, cam.height, data).expect("finite depths")
}

/// Largest angle (radians) between estimated and analytic sphere normals,
/// skipping pixels within `band` pixels of the silhouette.
pub fn sphere_normal_error(cam: &PinholeCamera, center: &Vec3, radius: f64, band: usize) -> Result<f64> {
    let depth = sphere_depth(cam, center, radius);
    let normals = normals_from_depth(&depth, cam)?;
    let mut worst: f64 = 0.0;
    let (w, h) = (cam.width, cam.height);
    for v in band..h.saturating_sub(band) {
        'px: for u in band..w.saturating_sub(band) {
            for dv in v - band..=v + band {
                for du in u - band..=u + band {
                    if depth.get(du, dv).is_none() {
                        continue 'px;
                    }
                }
            }
            let p = depth.point(u, v, cam).expect("valid");
            let Some(n) = normals.get(u, v) else {
                return Err(crate::error::Error::DegenerateWindow);
            };
            worst = worst.max(angle_between(&n, &(p - center)));
        }
    }
    Ok(worst)
}

/// Largest angle (radians) between estimated and analytic plane normals.
pub fn plane_normal_error(cam: &PinholeCamera, n: &UnitVec3, offset: f64) -> Result<f64> {
    let normals = normals_from_depth(&plane_depth(cam, n, offset), cam)?;
    let facing = if offset > 0.0 { -n.into_inner() } else { n.into_inner() };
    Ok(normals.data().iter().flatten().map(|m| angle_between(m, &facing)).fold(0.0, f64::max))
}

fn sphere_check(tol: &Tolerances) -> Vec<Check> {
    let mesh = TriangleMesh::icosphere(1.0, 4);
    let cfg = SamplerConfig { mu: 0.3, w_max: 3.0, n_surface_samples: 500, ..Default::default() };
    let grasps = sample_grasps(&mesh, &cfg, tol).and_then(|g| nonempty(g.len()).map(|_| g));
    let (width, center) = match &grasps {
        Ok(g) => (
            Ok(g.iter().map(|g| (g.w - 2.0).abs() / 2.0).fold(0.0, f64::max)),
            Ok(g.iter()
                .map(|g| g.axis().map_or(f64::INFINITY, |a| g.p1.cross(&a).norm()))
                .fold(0.0, f64::max)),
        ),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };
    let check = |name, bound, r: std::result::Result<f64, String>| match r {
        Ok(residual) => Check { name, passed: residual <= bound, residual, bound, error: None },
        Err(e) => Check { name, passed: false, residual: f64::NAN, bound, error: Some(e) },
    };
    vec![
        check("sphere-width", tol.sphere_width_rel, width),
        check("sphere-center", tol.sphere_center_offset, center),
    ]
}

fn nonempty(n: usize) -> Result<()> {
    if n == 0 {
        return Err(crate::error::Error::EmptyMesh);
    }
    Ok(())
}

fn cube_check(tol: &Tolerances) -> Check {
    run("cube-width", tol.cube_width, || {
        let mesh = TriangleMesh::cuboid(Vec3::repeat(0.5));
        let cfg = SamplerConfig { mu: 0.05, w_max: 3.0, n_surface_samples: 500, ..Default::default() };
        let grasps = sample_grasps(&mesh, &cfg, tol)?;
        nonempty(grasps.len())?;
        let mut worst: f64 = 0.0;
        for g in &grasps {
            // opposing faces: antiparallel flat normals
            let opposed = (g.v1.into_inner() + g.v2.into_inner()).norm();
            worst = worst.max((g.w - 1.0).abs()).max(opposed);
            if !force_closure(&g.p1, &g.v1, &g.p2, &g.v2, cfg.mu, tol)? {
                worst = f64::INFINITY;
            }
        }
        Ok(worst)
    })
}

fn normal_checks(tol: &Tolerances) -> Vec<Check> {
    let cam = PinholeCamera::new(200.0, 200.0, 64.0, 48.0, 128, 96).expect("valid camera");
    let tilted = UnitVec3::normalize(Vec3::new(0.0, 1.0, 1.0)).expect("nonzero");
    vec![
        run("plane-fronto", tol.plane_normal, || plane_normal_error(&cam, &UnitVec3::z_axis(), 1.0)),
        run("plane-45deg", tol.plane_normal, || plane_normal_error(&cam, &tilted, 0.7)),
        run("sphere-normals", tol.sphere_normal_deg.to_radians(), || {
            sphere_normal_error(&cam, &Vec3::new(0.0, 0.0, 1.0), 0.2, 3)
        }),
    ]
}

fn pose_check(tol: &Tolerances) -> Check {
    run("pose-residual", tol.pose_residual, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < 1000 {
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let Some(n_x) = UnitVec3::normalize(v) else { continue };
            let s = n_x.x.hypot(n_x.y);
            if s < 1e-3 {
                continue;
            }
            let lo = s.min(1.0).acos();
            let phi = rng.random_range(lo..=std::f64::consts::PI - lo);
            let sol = solve_ny(&n_x, phi, tol)?;
            for n_y in [sol.plus, sol.minus] {
                worst = worst.max(dihedral_residual(&n_x, &n_y, phi));
            }
            done += 1;
        }
        Ok(worst)
    })
}

pub fn run_selfcheck(tol: &Tolerances) -> Report {
    let mut checks = sphere_check(tol);
    checks.push(cube_check(tol));
    checks.extend(normal_checks(tol));
    checks.push(pose_check(tol));
    Report { checks }
}
