#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! C ABI for graspgeom.
//!
//! Conventions: every fallible function returns a [`GgStatus`] and writes
//! its result through an out-pointer; on failure a message is available
//! from [`gg_last_error_message`] on the same thread. Meshes and cameras
//! are opaque handles released with their `_free` function. Rotations are
//! 3x3 row-major. Default tolerances are used throughout.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use graspgeom::config::Tolerances;
use graspgeom::convert::{self, GraspContactNet, GraspL2G};
use graspgeom::error::{Error, ErrorCategory};
use graspgeom::geom::{mesh_io, Frame, PinholeCamera, Pixel, RigidTransform, TriangleMesh, UnitVec3, Vec3};
use graspgeom::nalgebra::Matrix3;
use graspgeom::pose::{self, GraspMono};
use graspgeom::sampling;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Schema = 4,
    Geometry = 5,
    Panic = 6,
}

/// Opaque camera handle.
pub struct GgCamera(PinholeCamera);

/// Opaque triangle mesh handle.
pub struct GgMesh(TriangleMesh);

/// Rigid transform from the camera frame to the robot base frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgTransform {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgMono {
    pub u: f64,
    pub v: f64,
    pub d: f64,
    pub w: f64,
    pub phi: f64,
    pub nx: [f64; 3],
}

/// Base-frame grasp pose; columns of `rotation` are the closing,
/// gripper-plane and approach axes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgPose {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

/// Two-contact grasp in the camera frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgL2G {
    pub p1: [f64; 3],
    pub p2: [f64; 3],
    pub phi: f64,
}

/// Contact-point grasp in the camera frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgContactNet {
    pub p1: [f64; 3],
    pub nx: [f64; 3],
    pub nz: [f64; 3],
    pub w: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgRayHit {
    pub point: [f64; 3],
    pub distance: f64,
    pub face: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> GgStatus {
    let status = match e.category() {
        ErrorCategory::Io => GgStatus::Io,
        ErrorCategory::Schema => GgStatus::Schema,
        ErrorCategory::Geometry => GgStatus::Geometry,
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), GgStatus>) -> GgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            GgStatus::Panic
        }
    }
}

fn null() -> GgStatus {
    set_error("null pointer argument".into());
    GgStatus::NullPointer
}

unsafe fn arg<'a, T>(p: *const T) -> Result<&'a T, GgStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, GgStatus> {
    p.as_mut().ok_or_else(null)
}

fn unit(v: [f64; 3]) -> Result<UnitVec3, GgStatus> {
    UnitVec3::new(Vec3::from(v)).map_err(fail)
}

fn base_from_cam(t: &GgTransform) -> Result<RigidTransform, GgStatus> {
    let r = Matrix3::from_row_slice(&t.rotation);
    RigidTransform::new(r, Vec3::from(t.translation), Frame::camera(), Frame::base()).map_err(fail)
}

fn mono(g: &GgMono) -> Result<GraspMono, GgStatus> {
    let m = GraspMono { p: Pixel::new(g.u, g.v), d: g.d, w: g.w, phi: g.phi, n_x: unit(g.nx)? };
    m.validate(&Tolerances::default()).map_err(fail)?;
    Ok(m)
}

fn to_gg_mono(g: &GraspMono) -> GgMono {
    GgMono { u: g.p.u, v: g.p.v, d: g.d, w: g.w, phi: g.phi, nx: g.n_x.into() }
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[r * 3 + c] = m[(r, c)];
        }
    }
    out
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated). Returns the full message length in bytes, or 0
/// if there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn gg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gg_camera_new(
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    out_camera: *mut *mut GgCamera,
) -> GgStatus {
    guard(|| {
        let slot = out(out_camera)?;
        let cam = PinholeCamera::new(fx, fy, cx, cy, width, height).map_err(fail)?;
        *slot = Box::into_raw(Box::new(GgCamera(cam)));
        Ok(())
    })
}

/// # Safety
/// `camera` must come from [`gg_camera_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gg_camera_free(camera: *mut GgCamera) {
    if !camera.is_null() {
        drop(Box::from_raw(camera));
    }
}

/// Projects a camera-frame point to continuous pixel coordinates.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_camera_project(camera: *const GgCamera, point: *const [f64; 3], out_uv: *mut [f64; 2]) -> GgStatus {
    guard(|| {
        let (cam, p, slot) = (arg(camera)?, arg(point)?, out(out_uv)?);
        let px = cam.0.project(&Vec3::from(*p)).map_err(fail)?;
        *slot = [px.u, px.v];
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_camera_backproject(
    camera: *const GgCamera,
    u: f64,
    v: f64,
    depth: f64,
    out_point: *mut [f64; 3],
) -> GgStatus {
    guard(|| {
        let (cam, slot) = (arg(camera)?, out(out_point)?);
        let p = cam.0.backproject(Pixel::new(u, v), depth).map_err(fail)?;
        *slot = p.into();
        Ok(())
    })
}

/// Gripper-plane normal for a base-frame grasp axis and dihedral angle,
/// on the branch whose approach axis faces the platform.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_solve_ny(nx: *const [f64; 3], phi: f64, out_ny: *mut [f64; 3]) -> GgStatus {
    guard(|| {
        let (nx, slot) = (arg(nx)?, out(out_ny)?);
        let sol = pose::solve_ny(&unit(*nx)?, phi, &Tolerances::default()).map_err(fail)?;
        *slot = sol.selected().into();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_recover_pose(
    camera: *const GgCamera,
    grasp: *const GgMono,
    base_from_camera: *const GgTransform,
    out_pose: *mut GgPose,
) -> GgStatus {
    guard(|| {
        let (cam, g, t, slot) = (arg(camera)?, arg(grasp)?, arg(base_from_camera)?, out(out_pose)?);
        let p = pose::recover_pose(&mono(g)?, &cam.0, &base_from_cam(t)?, &Tolerances::default()).map_err(fail)?;
        *slot = GgPose { rotation: row_major(p.rotation()), translation: (*p.translation()).into() };
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_mono_to_l2g(camera: *const GgCamera, grasp: *const GgMono, out_grasp: *mut GgL2G) -> GgStatus {
    guard(|| {
        let (cam, g, slot) = (arg(camera)?, arg(grasp)?, out(out_grasp)?);
        let l = convert::mono_to_l2g(&mono(g)?, &cam.0, &Tolerances::default()).map_err(fail)?;
        *slot = GgL2G { p1: l.p1.into(), p2: l.p2.into(), phi: l.phi };
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_l2g_to_mono(camera: *const GgCamera, grasp: *const GgL2G, out_grasp: *mut GgMono) -> GgStatus {
    guard(|| {
        let (cam, g, slot) = (arg(camera)?, arg(grasp)?, out(out_grasp)?);
        let l = GraspL2G { p1: Vec3::from(g.p1), p2: Vec3::from(g.p2), phi: g.phi, frame: Frame::camera() };
        let m = convert::l2g_to_mono(&l, &cam.0, &Tolerances::default()).map_err(fail)?;
        *slot = to_gg_mono(&m);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_mono_to_contactnet(
    camera: *const GgCamera,
    grasp: *const GgMono,
    base_from_camera: *const GgTransform,
    out_grasp: *mut GgContactNet,
) -> GgStatus {
    guard(|| {
        let (cam, g, t, slot) = (arg(camera)?, arg(grasp)?, arg(base_from_camera)?, out(out_grasp)?);
        let c = convert::mono_to_contactnet(&mono(g)?, &cam.0, &base_from_cam(t)?, &Tolerances::default()).map_err(fail)?;
        *slot = GgContactNet { p1: c.p1.into(), nx: c.n_x.into(), nz: c.n_z.into(), w: c.w };
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_contactnet_to_mono(
    camera: *const GgCamera,
    grasp: *const GgContactNet,
    base_from_camera: *const GgTransform,
    out_grasp: *mut GgMono,
) -> GgStatus {
    guard(|| {
        let (cam, g, t, slot) = (arg(camera)?, arg(grasp)?, arg(base_from_camera)?, out(out_grasp)?);
        let c = GraspContactNet { p1: Vec3::from(g.p1), n_x: unit(g.nx)?, n_z: unit(g.nz)?, w: g.w, frame: Frame::camera() };
        let m = convert::contactnet_to_mono(&c, &cam.0, &base_from_cam(t)?, &Tolerances::default()).map_err(fail)?;
        *slot = to_gg_mono(&m);
        Ok(())
    })
}

/// Two-contact friction-cone test with outward normals `v1`, `v2`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_force_closure(
    p1: *const [f64; 3],
    v1: *const [f64; 3],
    p2: *const [f64; 3],
    v2: *const [f64; 3],
    mu: f64,
    out_closed: *mut bool,
) -> GgStatus {
    guard(|| {
        let slot = out(out_closed)?;
        let (p1, p2) = (Vec3::from(*arg(p1)?), Vec3::from(*arg(p2)?));
        let (v1, v2) = (unit(*arg(v1)?)?, unit(*arg(v2)?)?);
        *slot = sampling::force_closure(&p1, &v1, &p2, &v2, mu, &Tolerances::default()).map_err(fail)?;
        Ok(())
    })
}

/// Loads an OBJ or PLY mesh.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_mesh` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_mesh_load(path: *const c_char, out_mesh: *mut *mut GgMesh) -> GgStatus {
    guard(|| {
        let slot = out(out_mesh)?;
        if path.is_null() {
            return Err(null());
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| {
            set_error("path is not valid UTF-8".into());
            GgStatus::InvalidUtf8
        })?;
        let mesh = mesh_io::load_mesh(Path::new(path)).map_err(fail)?;
        *slot = Box::into_raw(Box::new(GgMesh(mesh)));
        Ok(())
    })
}

/// Geodesic sphere centered at the origin; returns null on bad arguments.
#[no_mangle]
pub extern "C" fn gg_mesh_icosphere(radius: f64, subdivisions: u32) -> *mut GgMesh {
    if !(radius > 0.0) || subdivisions > 7 {
        set_error("icosphere needs radius > 0 and at most 7 subdivisions".into());
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(GgMesh(TriangleMesh::icosphere(radius, subdivisions))))
}

/// # Safety
/// `mesh` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn gg_mesh_free(mesh: *mut GgMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of triangles, 0 for a null handle.
///
/// # Safety
/// `mesh` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn gg_mesh_face_count(mesh: *const GgMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.len())
}

/// Nearest hit farther than `min_distance`; `out_hit_found` tells whether
/// `out_hit` was written.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gg_mesh_raycast(
    mesh: *const GgMesh,
    origin: *const [f64; 3],
    direction: *const [f64; 3],
    min_distance: f64,
    out_hit: *mut GgRayHit,
    out_hit_found: *mut bool,
) -> GgStatus {
    guard(|| {
        let (m, o, found) = (arg(mesh)?, arg(origin)?, out(out_hit_found)?);
        let hit_slot = out(out_hit)?;
        let dir = UnitVec3::normalize(Vec3::from(*arg(direction)?)).ok_or_else(|| fail(Error::NotUnit(0.0)))?;
        match m.0.raycast(&Vec3::from(*o), &dir, min_distance) {
            Some(h) => {
                *hit_slot = GgRayHit { point: h.point.into(), distance: h.distance, face: h.face };
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}
