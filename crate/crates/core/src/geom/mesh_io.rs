//! Mesh ingestion from ASCII OBJ and ASCII/binary PLY, and OBJ export.
//!
//! Face normals always come from the triangle winding. Vertex normals are
//! kept only when the file supplies exactly one per position. Closed meshes
//! with negative signed volume are flipped to face outward.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use super::{TriangleMesh, UnitVec3, Vec3};
use crate::error::{Error, Result};

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "mesh file not found"),
        ));
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let (verts, tris, normals) = match ext.as_str() {
        "obj" => read_obj(path)?,
        "ply" => read_ply(path)?,
        _ => return Err(Error::format(path, "unsupported mesh format (expected .obj or .ply)")),
    };
    assemble(path, verts, tris, normals)
}

type RawMesh = (Vec<Vec3>, Vec<[usize; 3]>, Option<Vec<Vec3>>);

fn assemble(path: &Path, verts: Vec<Vec3>, tris: Vec<[usize; 3]>, normals: Option<Vec<Vec3>>) -> Result<TriangleMesh> {
    let total = tris.len();
    let kept: Vec<[usize; 3]> = tris
        .into_iter()
        .filter(|t| {
            t.iter().all(|&i| i < verts.len())
                && (verts[t[1]] - verts[t[0]]).cross(&(verts[t[2]] - verts[t[0]])).norm() > 0.0
        })
        .collect();
    if kept.len() != total {
        log::warn!("{}: dropped {} degenerate or malformed triangles", path.display(), total - kept.len());
    }
    if kept.is_empty() {
        return Err(Error::format(path, "mesh has no usable triangles"));
    }
    let mut mesh = TriangleMesh::new(verts, kept).map_err(|e| Error::format(path, e.to_string()))?;
    if let Some(ns) = normals {
        let unit: Option<Vec<UnitVec3>> = ns.into_iter().map(UnitVec3::normalize).collect();
        match unit {
            Some(ns) => mesh = mesh.with_vertex_normals(ns).map_err(|e| Error::format(path, e.to_string()))?,
            None => log::warn!("{}: ignoring zero-length vertex normals", path.display()),
        }
    }
    if mesh.is_closed() {
        if mesh.signed_volume() < 0.0 {
            log::warn!("{}: inward winding, flipping faces", path.display());
            mesh = mesh.flipped();
        }
    } else {
        log::warn!("{}: mesh is not closed; rays may escape", path.display());
    }
    Ok(mesh)
}

fn read_obj(path: &Path) -> Result<RawMesh> {
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: false,
        ignore_points: true,
        ignore_lines: true,
    };
    let (models, _) = tobj::load_obj(path, &opts).map_err(|e| match e {
        tobj::LoadError::OpenFileFailed => Error::io(path, std::io::Error::other("cannot open file")),
        other => Error::format(path, other.to_string()),
    })?;
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut normals: Option<Vec<Option<Vec3>>> = Some(Vec::new());
    for m in models {
        let mesh = m.mesh;
        let off = verts.len();
        let nv = mesh.positions.len() / 3;
        verts.extend(mesh.positions.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])));
        tris.extend(
            mesh.indices
                .chunks_exact(3)
                .map(|c| [c[0] as usize + off, c[1] as usize + off, c[2] as usize + off]),
        );
        // Keep vertex normals only when each position maps to one normal.
        if let Some(acc) = normals.as_mut() {
            if mesh.normal_indices.len() != mesh.indices.len() || mesh.normals.is_empty() {
                normals = None;
                continue;
            }
            let mut per_vertex: Vec<Option<Vec3>> = vec![None; nv];
            let mut consistent = true;
            for (&vi, &ni) in mesh.indices.iter().zip(&mesh.normal_indices) {
                let n = &mesh.normals[3 * ni as usize..3 * ni as usize + 3];
                let n = Vec3::new(n[0], n[1], n[2]);
                match per_vertex[vi as usize] {
                    None => per_vertex[vi as usize] = Some(n),
                    Some(prev) if prev == n => {}
                    Some(_) => consistent = false,
                }
            }
            if consistent {
                acc.extend(per_vertex);
            } else {
                normals = None;
            }
        }
    }
    let normals = normals.and_then(|ns| ns.into_iter().collect::<Option<Vec<_>>>());
    Ok((verts, tris, normals))
}

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Char(x) => x as f64,
        Property::UChar(x) => x as f64,
        Property::Short(x) => x as f64,
        Property::UShort(x) => x as f64,
        Property::Int(x) => x as f64,
        Property::UInt(x) => x as f64,
        Property::Float(x) => x as f64,
        Property::Double(x) => x,
        _ => return None,
    })
}

fn index_list(p: &Property) -> Option<Vec<usize>> {
    fn conv<T: Copy + TryInto<i64>>(v: &[T]) -> Option<Vec<usize>> {
        v.iter().map(|&x| x.try_into().ok().and_then(|i: i64| usize::try_from(i).ok())).collect()
    }
    match p {
        Property::ListChar(v) => conv(v),
        Property::ListUChar(v) => conv(v),
        Property::ListShort(v) => conv(v),
        Property::ListUShort(v) => conv(v),
        Property::ListInt(v) => conv(v),
        Property::ListUInt(v) => conv(v),
        _ => None,
    }
}

fn read_ply(path: &Path) -> Result<RawMesh> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let ply = Parser::<DefaultElement>::new()
        .read_ply(&mut reader)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let vertex_els = ply
        .payload
        .get("vertex")
        .ok_or_else(|| Error::format(path, "no vertex element"))?;
    let face_els = ply
        .payload
        .get("face")
        .ok_or_else(|| Error::format(path, "no face element"))?;
    let get = |el: &DefaultElement, k: &str| el.get(k).and_then(scalar);
    let mut verts = Vec::with_capacity(vertex_els.len());
    let mut normals = Some(Vec::with_capacity(vertex_els.len()));
    for el in vertex_els {
        let (Some(x), Some(y), Some(z)) = (get(el, "x"), get(el, "y"), get(el, "z")) else {
            return Err(Error::format(path, "vertex without x/y/z"));
        };
        verts.push(Vec3::new(x, y, z));
        match (get(el, "nx"), get(el, "ny"), get(el, "nz"), normals.as_mut()) {
            (Some(a), Some(b), Some(c), Some(acc)) => acc.push(Vec3::new(a, b, c)),
            _ => normals = None,
        }
    }
    let mut tris = Vec::with_capacity(face_els.len());
    for el in face_els {
        let idx = el
            .get("vertex_indices")
            .or_else(|| el.get("vertex_index"))
            .and_then(index_list)
            .ok_or_else(|| Error::format(path, "face without vertex_indices list"))?;
        if idx.len() < 3 {
            return Err(Error::format(path, "face with fewer than 3 vertices"));
        }
        for k in 1..idx.len() - 1 {
            tris.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    if let Some(bad) = tris.iter().flatten().find(|&&i| i >= verts.len()) {
        return Err(Error::format(path, format!("face index {bad} out of range")));
    }
    Ok((verts, tris, normals))
}

/// Writes `v`/`vn`/`f` records; normals are emitted when the mesh has
/// vertex normals. Coordinates use shortest round-trip formatting.
pub fn write_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    for v in mesh.vertices() {
        out.push_str(&format!("v {:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    if let Some(ns) = mesh.vertex_normals() {
        for n in ns {
            out.push_str(&format!("vn {:?} {:?} {:?}\n", n.x, n.y, n.z));
        }
    }
    let with_normals = mesh.vertex_normals().is_some();
    for t in mesh.triangles() {
        let [a, b, c] = [t[0] + 1, t[1] + 1, t[2] + 1];
        if with_normals {
            out.push_str(&format!("f {a}//{a} {b}//{b} {c}//{c}\n"));
        } else {
            out.push_str(&format!("f {a} {b} {c}\n"));
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
