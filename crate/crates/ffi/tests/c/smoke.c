#include <math.h>
#include <stdio.h>

#include "graspgeom.h"

int main(void) {
    GgCamera *cam = NULL;
    if (gg_camera_new(1000.0, 1000.0, 640.0, 480.0, 1280, 960, &cam) != GG_STATUS_OK) return 1;

    GgMono g = {1640.0, 480.0, 1.0, 0.04, 1.5707963267948966, {-1.0, 0.0, 0.0}};
    GgTransform id = {{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}};
    GgPose pose;
    if (gg_recover_pose(cam, &g, &id, &pose) != GG_STATUS_OK) return 2;
    if (fabs(pose.translation[0] - 0.98) > 1e-12 || fabs(pose.rotation[8] + 1.0) > 1e-12) return 3;

    g.d = -1.0;
    if (gg_recover_pose(cam, &g, &id, &pose) != GG_STATUS_GEOMETRY) return 4;
    char msg[128];
    if (gg_last_error_message(msg, sizeof msg) == 0) return 5;

    GgMesh *ball = gg_mesh_icosphere(0.03, 2);
    GgRayHit hit;
    bool found = false;
    double o[3] = {0, 0, -1}, d[3] = {0, 0, 1};
    if (gg_mesh_raycast(ball, &o, &d, 0.0, &hit, &found) != GG_STATUS_OK || !found) return 6;

    gg_mesh_free(ball);
    gg_camera_free(cam);
    printf("graspgeom %s ok\n", gg_version());
    return 0;
}
