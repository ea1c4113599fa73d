//! Conversions between the monocular representation and the two
//! point-cloud grasp parameterizations it extends:
//!
//! - contact-point form `{P1, n_x, n_z, w}` (visible contact, grasp and
//!   approach axes, width), camera frame;
//! - two-contact form `{P1, P2, phi}`, camera frame.
//!
//! Every conversion that crosses into the base frame takes the extrinsic
//! explicitly. The dihedral angle is always derived from the right-handed
//! `n_y = n_z x n_x` in the base frame.

use serde::{Deserialize, Serialize};

use crate::config::{Tolerances, PLATFORM_NORMAL};
use crate::error::{Error, Result};
use crate::geom::{Frame, PinholeCamera, RigidTransform, UnitVec3, Vec3};
use crate::pose::{contact_points, recover_pose, GraspMono, GraspSE3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspContactNet {
    pub p1: Vec3,
    #[serde(rename = "nx")]
    pub n_x: UnitVec3,
    #[serde(rename = "nz")]
    pub n_z: UnitVec3,
    pub w: f64,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspL2G {
    pub p1: Vec3,
    pub p2: Vec3,
    pub phi: f64,
    pub frame: Frame,
}

fn expect_frame(found: &Frame, expected: &Frame) -> Result<()> {
    if found != expected {
        return Err(Error::FrameMismatch {
            expected: expected.clone(),
            found: found.clone(),
        });
    }
    Ok(())
}

pub fn l2g_to_mono(g: &GraspL2G, cam: &PinholeCamera, tol: &Tolerances) -> Result<GraspMono> {
    expect_frame(&g.frame, &Frame::camera())?;
    let delta = g.p2 - g.p1;
    let w = delta.norm();
    if !(w >= tol.min_contact_separation) {
        return Err(Error::DegenerateContactPair(w));
    }
    let p = cam.project(&g.p1)?;
    GraspMono::new(p, g.p1.z, w, g.phi, UnitVec3::normalize(delta).expect("nonzero"), tol)
}

pub fn mono_to_l2g(g: &GraspMono, cam: &PinholeCamera, tol: &Tolerances) -> Result<GraspL2G> {
    g.validate(tol)?;
    let pair = contact_points(g, cam)?;
    Ok(GraspL2G {
        p1: pair.p1,
        p2: pair.p2,
        phi: g.phi,
        frame: pair.frame,
    })
}

pub fn mono_to_contactnet(
    g: &GraspMono,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspContactNet> {
    let pose = recover_pose(g, cam, base_from_cam, tol)?;
    let cam_from_base = base_from_cam.inverse();
    let pair = contact_points(g, cam)?;
    Ok(GraspContactNet {
        p1: pair.p1,
        n_x: g.n_x,
        n_z: cam_from_base.transform_unit(&pose.n_z()),
        w: g.w,
        frame: pair.frame,
    })
}

pub fn contactnet_to_mono(
    g: &GraspContactNet,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspMono> {
    expect_frame(&g.frame, &Frame::camera())?;
    base_from_cam.expect_from(&g.frame)?;
    let dot = g.n_x.dot(&g.n_z);
    if dot.abs() > tol.orthogonality {
        return Err(Error::NonOrthogonalFrame(dot));
    }
    let n = Vec3::from(PLATFORM_NORMAL);
    let n_z = base_from_cam.transform_unit(&g.n_z);
    if n_z.dot(&n) > tol.platform {
        return Err(Error::ApproachAwayFromPlatform(n_z.dot(&n)));
    }
    let n_y = UnitVec3::normalize(g.n_z.cross(&g.n_x)).ok_or(Error::NonOrthogonalFrame(dot))?;
    let n_y = base_from_cam.transform_unit(&n_y);
    let phi = n_y.dot(&n).clamp(-1.0, 1.0).acos();
    let p = cam.project(&g.p1)?;
    GraspMono::new(p, g.p1.z, g.w, phi, g.n_x, tol)
}

pub fn l2g_to_contactnet(
    g: &GraspL2G,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspContactNet> {
    mono_to_contactnet(&l2g_to_mono(g, cam, tol)?, cam, base_from_cam, tol)
}

pub fn contactnet_to_l2g(
    g: &GraspContactNet,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspL2G> {
    mono_to_l2g(&contactnet_to_mono(g, cam, base_from_cam, tol)?, cam, tol)
}

/// Monocular parameters of a base-frame pose with opening `w`: inverse of
/// [`recover_pose`] on poses that obey the platform rule.
pub fn mono_from_pose(
    pose: &GraspSE3,
    w: f64,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspMono> {
    expect_frame(pose.frame(), base_from_cam.to_frame())?;
    let cam_from_base = base_from_cam.inverse();
    let (p1_base, _) = pose.contacts(w);
    let p1 = cam_from_base.transform_point(&p1_base);
    let phi = pose.n_y().dot(&Vec3::from(PLATFORM_NORMAL)).clamp(-1.0, 1.0).acos();
    let n_x = cam_from_base.transform_unit(&pose.n_x());
    GraspMono::new(cam.project(&p1)?, p1.z, w, phi, n_x, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pixel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cam() -> PinholeCamera {
        PinholeCamera::new(1000.0, 1000.0, 640.0, 480.0, 1280, 960).unwrap()
    }

    fn identity() -> RigidTransform {
        RigidTransform::identity(Frame::camera(), Frame::base())
    }

    fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::normalize(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn l2g_axis_aligned_example() {
        let g = GraspL2G {
            p1: Vec3::new(0.0, 0.0, 0.5),
            p2: Vec3::new(0.0, 0.0, 0.42),
            phi: FRAC_PI_2,
            frame: Frame::camera(),
        };
        let m = l2g_to_mono(&g, &cam(), &Tolerances::default()).unwrap();
        assert_eq!(m.p, Pixel::new(640.0, 480.0));
        assert_eq!(m.d, 0.5);
        assert!((m.w - 0.08).abs() < 1e-15);
        assert_relative_eq!(*m.n_x, Vec3::new(0.0, 0.0, -1.0), epsilon = 1e-15);
        let back = mono_to_l2g(&m, &cam(), &Tolerances::default()).unwrap();
        assert_relative_eq!(back.p2, g.p2, epsilon = 1e-15);
    }

    #[test]
    fn coincident_contacts_rejected() {
        let g = GraspL2G {
            p1: Vec3::new(0.0, 0.0, 0.5),
            p2: Vec3::new(0.0, 0.0, 0.5),
            phi: 1.0,
            frame: Frame::camera(),
        };
        assert!(matches!(l2g_to_mono(&g, &cam(), &Tolerances::default()), Err(Error::DegenerateContactPair(_))));
    }

    #[test]
    fn contactnet_identity_example() {
        let g = GraspContactNet {
            p1: Vec3::new(0.1, 0.0, 0.5),
            n_x: UnitVec3::x_axis(),
            n_z: unit(0.0, 0.0, -1.0),
            w: 0.05,
            frame: Frame::camera(),
        };
        let m = contactnet_to_mono(&g, &cam(), &identity(), &Tolerances::default()).unwrap();
        // n_y = n_z x n_x = (0, -1, 0), so phi = pi/2
        assert_relative_eq!(m.phi, FRAC_PI_2, epsilon = 1e-15);
        let back = mono_to_contactnet(&m, &cam(), &identity(), &Tolerances::default()).unwrap();
        assert_relative_eq!(*back.n_z, *g.n_z, epsilon = 1e-12);
        assert!(back.n_x.dot(&back.n_z).abs() < 1e-12);
    }

    #[test]
    fn skewed_contactnet_rejected() {
        let n_z = unit(0.1, (1.0f64 - 0.01).sqrt(), 0.0);
        let g = GraspContactNet {
            p1: Vec3::new(0.1, 0.0, 0.5),
            n_x: UnitVec3::x_axis(),
            n_z,
            w: 0.05,
            frame: Frame::camera(),
        };
        assert!((g.n_x.dot(&g.n_z) - 0.1).abs() < 1e-12);
        assert!(matches!(
            contactnet_to_mono(&g, &cam(), &identity(), &Tolerances::default()),
            Err(Error::NonOrthogonalFrame(_))
        ));
    }

    #[test]
    fn upward_approach_rejected() {
        let g = GraspContactNet {
            p1: Vec3::new(0.1, 0.0, 0.5),
            n_x: UnitVec3::x_axis(),
            n_z: UnitVec3::z_axis(),
            w: 0.05,
            frame: Frame::camera(),
        };
        assert!(matches!(
            contactnet_to_mono(&g, &cam(), &identity(), &Tolerances::default()),
            Err(Error::ApproachAwayFromPlatform(_))
        ));
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> UnitVec3 {
        loop {
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm() > 0.1 && v.norm() <= 1.0 {
                return UnitVec3::normalize(v).unwrap();
            }
        }
    }

    fn random_case(rng: &mut ChaCha8Rng) -> (RigidTransform, GraspMono) {
        let t = RigidTransform::from_axis_angle(
            &random_unit(rng),
            rng.random_range(-PI..PI),
            Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.5),
            Frame::camera(),
            Frame::base(),
        );
        loop {
            let n_x = random_unit(rng);
            let nb = t.transform_unit(&n_x);
            let s = nb.x.hypot(nb.y);
            if s < 1e-3 {
                continue;
            }
            let lo = s.min(1.0).acos();
            let g = GraspMono {
                p: Pixel::new(rng.random_range(0.0..1280.0), rng.random_range(0.0..960.0)),
                d: rng.random_range(0.2..2.0),
                w: rng.random_range(0.005..0.08),
                phi: rng.random_range(lo..=PI - lo),
                n_x,
            };
            return (t, g);
        }
    }

    fn close_mono(a: &GraspMono, b: &GraspMono) -> bool {
        (a.p.u - b.p.u).abs() < 1e-9
            && (a.p.v - b.p.v).abs() < 1e-9
            && (a.d - b.d).abs() < 1e-9
            && (a.w - b.w).abs() < 1e-9
            && (a.phi - b.phi).abs() < 1e-9
            && (*a.n_x - *b.n_x).norm() < 1e-9
    }

    #[test]
    fn mono_round_trips() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let (t, g) = random_case(&mut rng);
            let via_l2g = l2g_to_mono(&mono_to_l2g(&g, &cam(), &tol).unwrap(), &cam(), &tol).unwrap();
            assert!(close_mono(&g, &via_l2g), "{g:?} {via_l2g:?}");
            let via_cn = contactnet_to_mono(&mono_to_contactnet(&g, &cam(), &t, &tol).unwrap(), &cam(), &t, &tol).unwrap();
            assert!(close_mono(&g, &via_cn), "{g:?} {via_cn:?}");
            let pose = recover_pose(&g, &cam(), &t, &tol).unwrap();
            let via_pose = mono_from_pose(&pose, g.w, &cam(), &t, &tol).unwrap();
            assert!(close_mono(&g, &via_pose), "{g:?} {via_pose:?}");
            // width copied verbatim by the contact-point form
            assert_eq!(mono_to_contactnet(&g, &cam(), &t, &tol).unwrap().w, g.w);
        }
    }

    #[test]
    fn contactnet_axes_orthogonal() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let (t, g) = random_case(&mut rng);
            let cn = mono_to_contactnet(&g, &cam(), &t, &tol).unwrap();
            assert!(cn.n_x.dot(&cn.n_z).abs() < 1e-9);
        }
    }

    #[test]
    fn json_forms() {
        let g = GraspL2G {
            p1: Vec3::new(0.0, 0.0, 0.5),
            p2: Vec3::new(0.0, 0.0, 0.42),
            phi: 1.0,
            frame: Frame::camera(),
        };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"p1":[0.0,0.0,0.5],"p2":[0.0,0.0,0.42],"phi":1.0,"frame":"camera"}"#);
        assert_eq!(serde_json::from_str::<GraspL2G>(&s).unwrap(), g);
    }
}
