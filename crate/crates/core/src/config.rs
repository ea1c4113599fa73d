//! Numeric tolerances and limits shared by every stage.
//!
//! All geometric thresholds live in [`Tolerances`] so a run can be re-tuned
//! from one config record. Defaults are the values the library is tested at.

use serde::{Deserialize, Serialize};

/// Norm tolerance applied when constructing a [`crate::geom::UnitVec3`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Platform normal of the robot base frame (z-up).
pub const PLATFORM_NORMAL: [f64; 3] = [0.0, 0.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed deviation of `|v|` from 1 for unit vectors read from input.
    pub unit_norm: f64,
    /// Allowed deviation of `R^T R` from identity and of `det R` from +1.
    pub rotation: f64,
    /// Ray hits closer than this are ignored (skips the originating face).
    pub ray_epsilon: f64,
    /// Grasp axes with horizontal component below this are vertical.
    pub degenerate_axis: f64,
    /// Slack on `|cos phi| <= sqrt(1 - (n_x . n)^2)`.
    pub angle_feasibility: f64,
    /// Branch scores closer than this count as a tie.
    pub branch_tie: f64,
    /// Minimum separation between two contact points.
    pub min_contact_separation: f64,
    /// Maximum `|n_x . n_z|` accepted for a contact-point grasp frame.
    pub orthogonality: f64,
    /// Maximum `n_z . n` accepted for an approach axis (must face the platform).
    pub platform: f64,
    /// Friction cone boundary slack, radians (closed cone).
    pub cone_boundary: f64,
    /// Largest gripper opening, meters.
    pub w_max: f64,
    /// Max distance between a grasp endpoint and its nearest surface point
    /// for the endpoint to count as visible, meters.
    pub visibility: f64,
    /// Selfcheck: relative width error allowed on the unit sphere.
    pub sphere_width_rel: f64,
    /// Selfcheck: distance of a sphere grasp line from the center.
    pub sphere_center_offset: f64,
    /// Selfcheck: absolute width error on the unit cube.
    pub cube_width: f64,
    /// Selfcheck: plane normal angular error, radians.
    pub plane_normal: f64,
    /// Selfcheck: sphere normal angular error, degrees.
    pub sphere_normal_deg: f64,
    /// Selfcheck: constraint residual of the dihedral solve.
    pub pose_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit_norm: UNIT_NORM_TOL,
            rotation: 1e-9,
            ray_epsilon: 1e-6,
            degenerate_axis: 1e-9,
            angle_feasibility: 1e-9,
            branch_tie: 1e-12,
            min_contact_separation: 1e-6,
            orthogonality: 1e-6,
            platform: 1e-9,
            cone_boundary: 1e-12,
            w_max: 0.08,
            visibility: 0.005,
            sphere_width_rel: 0.01,
            sphere_center_offset: 0.02,
            cube_width: 1e-6,
            plane_normal: 1e-3,
            sphere_normal_deg: 2.0,
            pose_residual: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every field set to `value`; used to probe tolerance sensitivity.
    pub fn uniform(value: f64) -> Self {
        Self {
            unit_norm: value,
            rotation: value,
            ray_epsilon: value,
            degenerate_axis: value,
            angle_feasibility: value,
            branch_tie: value,
            min_contact_separation: value,
            orthogonality: value,
            platform: value,
            cone_boundary: value,
            w_max: value,
            visibility: value,
            sphere_width_rel: value,
            sphere_center_offset: value,
            cube_width: value,
            plane_normal: value,
            sphere_normal_deg: value,
            pose_residual: value,
        }
    }
}
