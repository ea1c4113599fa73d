#ifndef GRASPGEOM_H
#define GRASPGEOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GgStatus {
  GG_STATUS_OK = 0,
  GG_STATUS_NULL_POINTER = 1,
  GG_STATUS_INVALID_UTF8 = 2,
  GG_STATUS_IO = 3,
  GG_STATUS_SCHEMA = 4,
  GG_STATUS_GEOMETRY = 5,
  GG_STATUS_PANIC = 6,
} GgStatus;

// Opaque camera handle.
typedef struct GgCamera GgCamera;

// Opaque triangle mesh handle.
typedef struct GgMesh GgMesh;

typedef struct GgMono {
  double u;
  double v;
  double d;
  double w;
  double phi;
  double nx[3];
} GgMono;

// Rigid transform from the camera frame to the robot base frame.
typedef struct GgTransform {
  double rotation[9];
  double translation[3];
} GgTransform;

// Base-frame grasp pose; columns of `rotation` are the closing,
// gripper-plane and approach axes.
typedef struct GgPose {
  double rotation[9];
  double translation[3];
} GgPose;

// Two-contact grasp in the camera frame.
typedef struct GgL2G {
  double p1[3];
  double p2[3];
  double phi;
} GgL2G;

// Contact-point grasp in the camera frame.
typedef struct GgContactNet {
  double p1[3];
  double nx[3];
  double nz[3];
  double w;
} GgContactNet;

typedef struct GgRayHit {
  double point[3];
  double distance;
  uintptr_t face;
} GgRayHit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gg_version(void);

// Copies the last error message of this thread into `buf` (truncated,
// always NUL-terminated). Returns the full message length in bytes, or 0
// if there is none.
//
// # Safety
// `buf` must be valid for `len` bytes or null.
uintptr_t gg_last_error_message(char *buf, uintptr_t len);

// # Safety
// `out` must be a valid pointer.
enum GgStatus gg_camera_new(double fx,
                            double fy,
                            double cx,
                            double cy,
                            uintptr_t width,
                            uintptr_t height,
                            struct GgCamera **out_camera);

// # Safety
// `camera` must come from [`gg_camera_new`] or be null.
void gg_camera_free(struct GgCamera *camera);

// Projects a camera-frame point to continuous pixel coordinates.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_camera_project(const struct GgCamera *camera,
                                const double (*point)[3],
                                double (*out_uv)[2]);

// # Safety
// Pointers must be valid.
enum GgStatus gg_camera_backproject(const struct GgCamera *camera,
                                    double u,
                                    double v,
                                    double depth,
                                    double (*out_point)[3]);

// Gripper-plane normal for a base-frame grasp axis and dihedral angle,
// on the branch whose approach axis faces the platform.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_solve_ny(const double (*nx)[3], double phi, double (*out_ny)[3]);

// # Safety
// Pointers must be valid.
enum GgStatus gg_recover_pose(const struct GgCamera *camera,
                              const struct GgMono *grasp,
                              const struct GgTransform *base_from_camera,
                              struct GgPose *out_pose);

// # Safety
// Pointers must be valid.
enum GgStatus gg_mono_to_l2g(const struct GgCamera *camera,
                             const struct GgMono *grasp,
                             struct GgL2G *out_grasp);

// # Safety
// Pointers must be valid.
enum GgStatus gg_l2g_to_mono(const struct GgCamera *camera,
                             const struct GgL2G *grasp,
                             struct GgMono *out_grasp);

// # Safety
// Pointers must be valid.
enum GgStatus gg_mono_to_contactnet(const struct GgCamera *camera,
                                    const struct GgMono *grasp,
                                    const struct GgTransform *base_from_camera,
                                    struct GgContactNet *out_grasp);

// # Safety
// Pointers must be valid.
enum GgStatus gg_contactnet_to_mono(const struct GgCamera *camera,
                                    const struct GgContactNet *grasp,
                                    const struct GgTransform *base_from_camera,
                                    struct GgMono *out_grasp);

// Two-contact friction-cone test with outward normals `v1`, `v2`.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_force_closure(const double (*p1)[3],
                               const double (*v1)[3],
                               const double (*p2)[3],
                               const double (*v2)[3],
                               double mu,
                               bool *out_closed);

// Loads an OBJ or PLY mesh.
//
// # Safety
// `path` must be a NUL-terminated string; `out_mesh` must be valid.
enum GgStatus gg_mesh_load(const char *path, struct GgMesh **out_mesh);

// Geodesic sphere centered at the origin; returns null on bad arguments.
struct GgMesh *gg_mesh_icosphere(double radius, uint32_t subdivisions);

// # Safety
// `mesh` must come from this library or be null.
void gg_mesh_free(struct GgMesh *mesh);

// Number of triangles, 0 for a null handle.
//
// # Safety
// `mesh` must be a valid handle or null.
uintptr_t gg_mesh_face_count(const struct GgMesh *mesh);

// Nearest hit farther than `min_distance`; `out_hit_found` tells whether
// `out_hit` was written.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_mesh_raycast(const struct GgMesh *mesh,
                              const double (*origin)[3],
                              const double (*direction)[3],
                              double min_distance,
                              struct GgRayHit *out_hit,
                              bool *out_hit_found);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASPGEOM_H */
