//! Closed-form 6-DoF grasp recovery from the five-parameter monocular
//! representation `{n_x, p, d, w, phi}`.
//!
//! The visible contact is back-projected from the keypoint and depth, the
//! second contact sits `w` further along the grasp axis, and the gripper
//! roll is fixed by the dihedral angle between the gripper plane and the
//! platform plane. Of the two rolls satisfying that angle, the one whose
//! approach axis points down into the platform is kept.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::config::{Tolerances, PLATFORM_NORMAL};
use crate::error::{Error, Result};
use crate::geom::{Frame, PinholeCamera, Pixel, RigidTransform, UnitVec3, Vec3};

/// Monocular grasp: keypoint `p` of the visible contact, its depth `d`,
/// opening width `w`, dihedral angle `phi` (base frame) and grasp axis
/// `n_x` (camera frame, from visible toward invisible contact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspMono {
    pub p: Pixel,
    pub d: f64,
    pub w: f64,
    pub phi: f64,
    pub n_x: UnitVec3,
}

/// Flat JSON form `{u, v, d, w, phi, nx: [3]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonoRecord {
    pub u: f64,
    pub v: f64,
    pub d: f64,
    pub w: f64,
    pub phi: f64,
    pub nx: UnitVec3,
}

impl From<&GraspMono> for MonoRecord {
    fn from(g: &GraspMono) -> Self {
        Self {
            u: g.p.u,
            v: g.p.v,
            d: g.d,
            w: g.w,
            phi: g.phi,
            nx: g.n_x,
        }
    }
}

impl From<MonoRecord> for GraspMono {
    fn from(r: MonoRecord) -> Self {
        Self {
            p: Pixel::new(r.u, r.v),
            d: r.d,
            w: r.w,
            phi: r.phi,
            n_x: r.nx,
        }
    }
}

impl Serialize for GraspMono {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonoRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraspMono {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MonoRecord::deserialize(d).map(Into::into)
    }
}

impl GraspMono {
    pub fn new(p: Pixel, d: f64, w: f64, phi: f64, n_x: UnitVec3, tol: &Tolerances) -> Result<Self> {
        let g = Self { p, d, w, phi, n_x };
        g.validate(tol)?;
        Ok(g)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !(self.p.u.is_finite() && self.p.v.is_finite()) {
            return Err(Error::InvalidGrasp("non-finite keypoint".into()));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::NonPositiveDepth(self.d));
        }
        if !(self.w > 0.0 && self.w <= tol.w_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidGrasp(format!("width {} outside (0, {}]", self.w, tol.w_max)));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.phi) {
            return Err(Error::InvalidGrasp(format!("dihedral angle {} outside [0, pi]", self.phi)));
        }
        if (self.n_x.norm() - 1.0).abs() > tol.unit_norm {
            return Err(Error::NotUnit(self.n_x.norm()));
        }
        Ok(())
    }
}

/// Rigid grasp pose: rotation columns `[n_x, n_y, n_z]`, translation at the
/// grasp center.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspSE3 {
    rotation: Matrix3<f64>,
    translation: Vec3,
    frame: Frame,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRecord {
    #[serde(rename = "R")]
    rotation: [f64; 9],
    t: [f64; 3],
    frame: Frame,
}

impl Serialize for GraspSE3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PoseRecord {
            rotation: crate::geom::transform_row_major(&self.rotation),
            t: self.translation.into(),
            frame: self.frame.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraspSE3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PoseRecord::deserialize(d)?;
        GraspSE3::new_with_tol(Matrix3::from_row_slice(&r.rotation), Vec3::from(r.t), r.frame, 1e-6)
            .map_err(serde::de::Error::custom)
    }
}

impl GraspSE3 {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3, frame: Frame) -> Result<Self> {
        Self::new_with_tol(rotation, translation, frame, Tolerances::default().rotation)
    }

    pub fn new_with_tol(rotation: Matrix3<f64>, translation: Vec3, frame: Frame, tol: f64) -> Result<Self> {
        crate::geom::check_rotation(&rotation, tol)?;
        Ok(Self {
            rotation,
            translation,
            frame,
        })
    }

    pub fn from_axes(n_x: &UnitVec3, n_y: &UnitVec3, n_z: &UnitVec3, center: Vec3, frame: Frame) -> Result<Self> {
        Self::new(
            Matrix3::from_columns(&[n_x.into_inner(), n_y.into_inner(), n_z.into_inner()]),
            center,
            frame,
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    fn axis(&self, k: usize) -> UnitVec3 {
        UnitVec3::normalize(self.rotation.column(k).into_owned()).expect("rotation column")
    }

    /// Closing direction.
    pub fn n_x(&self) -> UnitVec3 {
        self.axis(0)
    }

    /// Gripper-plane normal.
    pub fn n_y(&self) -> UnitVec3 {
        self.axis(1)
    }

    /// Approach direction.
    pub fn n_z(&self) -> UnitVec3 {
        self.axis(2)
    }

    /// Contacts at `center -/+ w/2 * n_x`.
    pub fn contacts(&self, w: f64) -> (Vec3, Vec3) {
        let half = self.rotation.column(0) * (0.5 * w);
        (self.translation - half, self.translation + half)
    }

    /// Pose expressed in `t.to_frame()`; requires `t.from_frame() == frame`.
    pub fn transformed(&self, t: &RigidTransform) -> Result<Self> {
        t.expect_from(&self.frame)?;
        Ok(Self {
            rotation: t.rotation() * self.rotation,
            translation: t.transform_point(&self.translation),
            frame: t.to_frame().clone(),
        })
    }

    /// Same physical grasp with the jaws swapped: rotated half a turn about
    /// the approach axis.
    pub fn jaw_swapped(&self) -> Self {
        let flip = Matrix3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0));
        Self {
            rotation: self.rotation * flip,
            ..self.clone()
        }
    }

    /// Rigid transform from the grasp's local frame into `frame`.
    pub fn as_transform(&self, local: Frame) -> RigidTransform {
        RigidTransform::new_with_tol(self.rotation, self.translation, local, self.frame.clone(), f64::INFINITY)
            .expect("validated on construction")
    }
}

/// Visible (`p1`) and invisible (`p2`) contact points.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPair {
    pub p1: Vec3,
    pub p2: Vec3,
    pub frame: Frame,
}

/// Contacts and their midpoint after transfer to the base frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseContacts {
    pub p1: Vec3,
    pub p2: Vec3,
    pub center: Vec3,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Both gripper-plane normals compatible with a grasp axis and dihedral
/// angle, and the one selected by the platform rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralSolution {
    pub plus: UnitVec3,
    pub minus: UnitVec3,
    pub branch: Branch,
}

impl DihedralSolution {
    pub fn selected(&self) -> UnitVec3 {
        match self.branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }

    pub fn other(&self) -> UnitVec3 {
        match self.branch {
            Branch::Plus => self.minus,
            Branch::Minus => self.plus,
        }
    }
}

/// Grasp axis opposes the estimated outward surface normal at the visible
/// contact.
pub fn grasp_axis_from_normal(v_star: &UnitVec3) -> UnitVec3 {
    -*v_star
}

/// Camera-frame contacts: `P1 = d K^-1 p`, `P2 = P1 + w n_x`.
pub fn contact_points(g: &GraspMono, cam: &PinholeCamera) -> Result<ContactPair> {
    let p1 = cam.backproject(g.p, g.d)?;
    Ok(ContactPair {
        p1,
        p2: p1 + g.n_x.into_inner() * g.w,
        frame: Frame::camera(),
    })
}

pub fn to_base(pair: &ContactPair, base_from_cam: &RigidTransform) -> Result<BaseContacts> {
    base_from_cam.expect_from(&pair.frame)?;
    let p1 = base_from_cam.transform_point(&pair.p1);
    let p2 = base_from_cam.transform_point(&pair.p2);
    Ok(BaseContacts {
        p1,
        p2,
        center: (p1 + p2) / 2.0,
        frame: base_from_cam.to_frame().clone(),
    })
}

/// Solves `n_y . n_x = 0`, `n_y . n = cos(phi)`, `|n_y| = 1` for the
/// platform normal `n = [0, 0, 1]`.
///
/// With `s` the horizontal magnitude of `n_x`, `e1` the unit projection of
/// `n` orthogonal to `n_x` and `e2 = n_x x e1`, the roots are
/// `cos(t) e1 +/- sin(t) e2` where `cos(t) = cos(phi) / s`. The root with
/// the smaller `(n_x x n_y) . n` is selected; near-ties pick `Plus`.
pub fn solve_ny(n_x: &UnitVec3, phi: f64, tol: &Tolerances) -> Result<DihedralSolution> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::InvalidGrasp(format!("dihedral angle {phi} outside [0, pi]")));
    }
    let n = Vec3::from(PLATFORM_NORMAL);
    let s = n_x.x.hypot(n_x.y);
    if s < tol.degenerate_axis {
        return Err(Error::DegenerateAxis);
    }
    let cos_phi = phi.cos();
    if cos_phi.abs() > s + tol.angle_feasibility {
        return Err(Error::InfeasibleAngle {
            phi,
            cos_phi: cos_phi.abs(),
            limit: s,
        });
    }
    let e1 = (n - n_x.dot(&n) * n_x.into_inner()).normalize();
    let e2 = n_x.cross(&e1);
    let cos_t = (cos_phi / s).clamp(-1.0, 1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let plus = UnitVec3::normalize(cos_t * e1 + sin_t * e2).expect("unit combination");
    let minus = UnitVec3::normalize(cos_t * e1 - sin_t * e2).expect("unit combination");
    let score = |ny: &UnitVec3| n_x.cross(ny).dot(&n);
    let (sp, sm) = (score(&plus), score(&minus));
    let branch = if sm < sp - tol.branch_tie {
        Branch::Minus
    } else {
        Branch::Plus
    };
    Ok(DihedralSolution { plus, minus, branch })
}

/// Largest violation of the three constraints by a candidate `n_y`.
pub fn dihedral_residual(n_x: &UnitVec3, n_y: &Vec3, phi: f64) -> f64 {
    let n = Vec3::from(PLATFORM_NORMAL);
    n_y.dot(n_x)
        .abs()
        .max((n_y.dot(&n) - phi.cos()).abs())
        .max((n_y.norm() - 1.0).abs())
}

/// Full 6-DoF grasp in the base frame of `base_from_cam`.
pub fn recover_pose(
    g: &GraspMono,
    cam: &PinholeCamera,
    base_from_cam: &RigidTransform,
    tol: &Tolerances,
) -> Result<GraspSE3> {
    g.validate(tol)?;
    let contacts = to_base(&contact_points(g, cam)?, base_from_cam)?;
    // phi lives in the base frame, so the axis is rotated before the solve.
    let n_x = base_from_cam.transform_unit(&g.n_x);
    let n_y = solve_ny(&n_x, g.phi, tol)?.selected();
    let n_z = UnitVec3::normalize(n_x.cross(&n_y)).expect("orthogonal unit vectors");
    GraspSE3::from_axes(&n_x, &n_y, &n_z, contacts.center, contacts.frame)
}
