use std::collections::HashMap;
use std::sync::OnceLock;

use super::{RigidTransform, UnitVec3, Vec3};
use crate::error::{Error, Result};

/// Nearest intersection of a ray with a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Vec3,
    pub face: usize,
    pub distance: f64,
    /// Barycentric weights of `point` on the hit face.
    pub barycentric: [f64; 3],
}

/// Indexed triangle mesh with outward face normals derived from winding
/// and optional per-vertex normals for smooth shading.
#[derive(Debug)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    face_normals: Vec<UnitVec3>,
    vertex_normals: Option<Vec<UnitVec3>>,
    areas: Vec<f64>,
    bvh: OnceLock<Bvh>,
}

impl Clone for TriangleMesh {
    fn clone(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            face_normals: self.face_normals.clone(),
            vertex_normals: self.vertex_normals.clone(),
            areas: self.areas.clone(),
            bvh: OnceLock::new(),
        }
    }
}

impl TriangleMesh {
    /// Builds a mesh; face normals follow the counter-clockwise winding.
    /// Degenerate (zero-area) triangles are rejected.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(bad) = triangles.iter().flatten().find(|&&i| i >= vertices.len()) {
            return Err(Error::InvalidMesh(format!(
                "vertex index {bad} out of range ({} vertices)",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex".into()));
        }
        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for (f, t) in triangles.iter().enumerate() {
            let c = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            let n = UnitVec3::normalize(c)
                .ok_or_else(|| Error::InvalidMesh(format!("triangle {f} is degenerate")))?;
            face_normals.push(n);
            areas.push(0.5 * c.norm());
        }
        Ok(Self {
            vertices,
            triangles,
            face_normals,
            vertex_normals: None,
            areas,
            bvh: OnceLock::new(),
        })
    }

    pub fn with_vertex_normals(mut self, normals: Vec<UnitVec3>) -> Result<Self> {
        if normals.len() != self.vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "{} vertex normals for {} vertices",
                normals.len(),
                self.vertices.len()
            )));
        }
        self.vertex_normals = Some(normals);
        Ok(self)
    }

    pub fn without_vertex_normals(mut self) -> Self {
        self.vertex_normals = None;
        self
    }

    /// Icosahedron subdivided `subdivisions` times and pushed onto the
    /// sphere; `20 * 4^subdivisions` faces. Vertex normals are exact.
    pub fn icosphere(radius: f64, subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|v| Vec3::from(*v).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let normals = verts.iter().map(|v| UnitVec3::normalize(*v).expect("unit")).collect();
        let verts = verts.into_iter().map(|v| v * radius).collect();
        Self::new(verts, faces)
            .expect("icosphere is well formed")
            .with_vertex_normals(normals)
            .expect("one normal per vertex")
    }

    /// Axis-aligned box centered at the origin with flat faces.
    pub fn cuboid(half_extents: Vec3) -> Self {
        let h = half_extents;
        let verts: Vec<Vec3> = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
            })
            .collect();
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let tris = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
        Self::new(verts, tris).expect("cuboid is well formed")
    }

    /// Concatenation of several meshes; vertex normals survive only if every
    /// part carries them.
    pub fn merge(parts: &[TriangleMesh]) -> Result<Self> {
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        let mut normals = Some(Vec::new());
        for m in parts {
            let off = verts.len();
            verts.extend_from_slice(&m.vertices);
            tris.extend(m.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
            match (&mut normals, &m.vertex_normals) {
                (Some(acc), Some(n)) => acc.extend_from_slice(n),
                _ => normals = None,
            }
        }
        let mesh = Self::new(verts, tris)?;
        match normals {
            Some(n) => mesh.with_vertex_normals(n),
            None => Ok(mesh),
        }
    }

    /// Mesh with every vertex and normal mapped through `t`.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| t.transform_point(v)).collect(),
            triangles: self.triangles.clone(),
            face_normals: self.face_normals.iter().map(|n| t.transform_unit(n)).collect(),
            vertex_normals: self
                .vertex_normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| t.transform_unit(n)).collect()),
            areas: self.areas.clone(),
            bvh: OnceLock::new(),
        }
    }

    /// Same surface with every triangle's winding reversed.
    pub fn flipped(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            triangles: self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect(),
            face_normals: self.face_normals.iter().map(|n| -*n).collect(),
            vertex_normals: self.vertex_normals.as_ref().map(|ns| ns.iter().map(|n| -*n).collect()),
            areas: self.areas.clone(),
            bvh: OnceLock::new(),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn face_normals(&self) -> &[UnitVec3] {
        &self.face_normals
    }

    pub fn vertex_normals(&self) -> Option<&[UnitVec3]> {
        self.vertex_normals.as_deref()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let t = self.triangles[face];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn point_at(&self, face: usize, bary: [f64; 3]) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        a * bary[0] + b * bary[1] + c * bary[2]
    }

    /// Outward normal at a surface point: interpolated vertex normals when
    /// present, the flat face normal otherwise.
    pub fn normal_at(&self, face: usize, bary: [f64; 3]) -> UnitVec3 {
        match &self.vertex_normals {
            Some(ns) => {
                let t = self.triangles[face];
                let n = *ns[t[0]] * bary[0] + *ns[t[1]] * bary[1] + *ns[t[2]] * bary[2];
                UnitVec3::normalize(n).unwrap_or(self.face_normals[face])
            }
            None => self.face_normals[face],
        }
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.vertices[t[0]].dot(&self.vertices[t[1]].cross(&self.vertices[t[2]])))
            .sum::<f64>()
            / 6.0
    }

    /// Every undirected edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        !edges.is_empty() && edges.values().all(|&c| c == 2)
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Nearest hit farther than `min_distance`, via the bounding volume
    /// hierarchy. Returns exactly what [`Self::raycast_exhaustive`] returns.
    pub fn raycast(&self, origin: &Vec3, dir: &UnitVec3, min_distance: f64) -> Option<RayHit> {
        if self.triangles.is_empty() {
            return None;
        }
        let bvh = self.bvh.get_or_init(|| Bvh::build(self));
        bvh.raycast(self, origin, dir, min_distance)
    }

    /// Reference path: tests every triangle; ties go to the lowest face index.
    pub fn raycast_exhaustive(&self, origin: &Vec3, dir: &UnitVec3, min_distance: f64) -> Option<RayHit> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for f in 0..self.triangles.len() {
            if let Some((t, bary)) = self.intersect_face(f, origin, dir) {
                if t > min_distance && best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, f, bary));
                }
            }
        }
        best.map(|(t, f, bary)| self.make_hit(origin, dir, t, f, bary))
    }

    fn make_hit(&self, origin: &Vec3, dir: &UnitVec3, t: f64, face: usize, barycentric: [f64; 3]) -> RayHit {
        RayHit {
            point: origin + dir.into_inner() * t,
            face,
            distance: t,
            barycentric,
        }
    }

    /// Two-sided Moller-Trumbore test with closed edges.
    fn intersect_face(&self, face: usize, origin: &Vec3, dir: &UnitVec3) -> Option<(f64, [f64; 3])> {
        let [v0, v1, v2] = self.triangle(face);
        let e1 = v1 - v0;
        let e2 = v2 - v0;
        let pvec = dir.cross(&e2);
        let det = e1.dot(&pvec);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        let tvec = origin - v0;
        let u = tvec.dot(&pvec) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let qvec = tvec.cross(&e1);
        let v = dir.dot(&qvec) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = e2.dot(&qvec) * inv;
        t.is_finite().then_some((t, [1.0 - u - v, u, v]))
    }
}

const LEAF_SIZE: usize = 4;

#[derive(Debug)]
struct BvhNode {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: range into `order`. Interior: children indices.
    kind: NodeKind,
}

#[derive(Debug)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Interior { left: usize, right: usize },
}

#[derive(Debug)]
struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
    pad: f64,
}

impl Bvh {
    fn build(mesh: &TriangleMesh) -> Self {
        let n = mesh.triangles.len();
        let mut order: Vec<usize> = (0..n).collect();
        let centroids: Vec<Vec3> = (0..n)
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                (a + b + c) / 3.0
            })
            .collect();
        let (lo, hi) = mesh.bounds();
        // Boxes are inflated so round-off in the slab test never culls a hit.
        let pad = 1e-9 * (hi - lo).norm().max(1.0);
        let mut bvh = Self {
            nodes: Vec::new(),
            order: Vec::new(),
            pad,
        };
        bvh.build_node(mesh, &centroids, &mut order[..], 0);
        bvh.order = order;
        bvh
    }

    fn build_node(&mut self, mesh: &TriangleMesh, centroids: &[Vec3], faces: &mut [usize], start: usize) -> usize {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &f in faces.iter() {
            for v in mesh.triangle(f) {
                lo = lo.inf(&v);
                hi = hi.sup(&v);
            }
        }
        lo -= Vec3::repeat(self.pad);
        hi += Vec3::repeat(self.pad);
        let idx = self.nodes.len();
        self.nodes.push(BvhNode {
            lo,
            hi,
            kind: NodeKind::Leaf {
                start,
                end: start + faces.len(),
            },
        });
        if faces.len() <= LEAF_SIZE {
            return idx;
        }
        let extent = hi - lo;
        let axis = extent.imax();
        let mid = faces.len() / 2;
        faces.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let (l, r) = faces.split_at_mut(mid);
        let left = self.build_node(mesh, centroids, l, start);
        let right = self.build_node(mesh, centroids, r, start + mid);
        self.nodes[idx].kind = NodeKind::Interior { left, right };
        idx
    }

    /// Entry distance of the ray into the node box, if it enters at all.
    fn slab(&self, node: &BvhNode, origin: &Vec3, dir: &UnitVec3) -> Option<f64> {
        let mut tmin = f64::NEG_INFINITY;
        let mut tmax = f64::INFINITY;
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < node.lo[k] || origin[k] > node.hi[k] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[k];
            let (mut t0, mut t1) = ((node.lo[k] - origin[k]) * inv, (node.hi[k] - origin[k]) * inv);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            tmin = tmin.max(t0);
            tmax = tmax.min(t1);
            if tmin > tmax {
                return None;
            }
        }
        Some(tmin)
    }

    fn raycast(&self, mesh: &TriangleMesh, origin: &Vec3, dir: &UnitVec3, min_distance: f64) -> Option<RayHit> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            let Some(entry) = self.slab(node, origin, dir) else {
                continue;
            };
            if let Some((bt, _, _)) = best {
                // Only strictly farther boxes are skipped so ties survive.
                if entry > bt + self.pad {
                    continue;
                }
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &f in &self.order[start..end] {
                        if let Some((t, bary)) = mesh.intersect_face(f, origin, dir) {
                            if t > min_distance
                                && best.is_none_or(|(bt, bf, _)| t < bt || (t == bt && f < bf))
                            {
                                best = Some((t, f, bary));
                            }
                        }
                    }
                }
                NodeKind::Interior { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best.map(|(t, f, bary)| mesh.make_hit(origin, dir, t, f, bary))
    }
}
