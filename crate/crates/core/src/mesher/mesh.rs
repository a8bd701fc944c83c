use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::math::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index} but only {count} exist")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("uv list has {found} entries for {expected} triangles")]
    UvCount { expected: usize, found: usize },
    #[error("obj line {line}: {msg}")]
    Obj { line: usize, msg: String },
}

/// Indexed triangle mesh with optional per-corner texture coordinates.
/// Front faces are counterclockwise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub uvs: Option<Vec<[[f64; 2]; 3]>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let mesh = TriMesh {
            vertices,
            triangles,
            uvs: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let count = self.vertices.len();
        for (triangle, tri) in self.triangles.iter().enumerate() {
            for &index in tri {
                if index as usize >= count {
                    return Err(MeshError::IndexOutOfRange {
                        triangle,
                        index,
                        count,
                    });
                }
            }
        }
        if let Some(uvs) = &self.uvs {
            if uvs.len() != self.triangles.len() {
                return Err(MeshError::UvCount {
                    expected: self.triangles.len(),
                    found: uvs.len(),
                });
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Unnormalized normal, twice the area long.
    pub fn face_cross(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(c - a)
    }

    pub fn face_area(&self, t: usize) -> f64 {
        0.5 * self.face_cross(t).length()
    }

    /// Undirected edge -> number of incident triangles.
    pub fn edge_counts(&self) -> HashMap<(u32, u32), usize> {
        let mut counts = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// `V - E + F`, counting only referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &i in tri {
                used[i as usize] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_counts().len() as i64;
        v - e + self.triangles.len() as i64
    }

    /// Every directed edge is matched by exactly one opposite edge.
    pub fn is_watertight(&self) -> bool {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *directed.entry((tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }

    /// Signed enclosed volume; positive when faces point outward.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Drops vertices no triangle references, keeping order.
    pub fn compact(&mut self) {
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut kept = Vec::new();
        for tri in &mut self.triangles {
            for i in tri.iter_mut() {
                let slot = &mut remap[*i as usize];
                if *slot == u32::MAX {
                    *slot = kept.len() as u32;
                    kept.push(self.vertices[*i as usize]);
                }
                *i = *slot;
            }
        }
        self.vertices = kept;
    }

    /// Rounds every coordinate to `f32`, the precision of the OBJ payload.
    pub fn round_to_f32(&mut self) {
        for v in &mut self.vertices {
            *v = v.map(|c| c as f32 as f64);
        }
        if let Some(uvs) = &mut self.uvs {
            for tri in uvs {
                for uv in tri {
                    uv[0] = uv[0] as f32 as f64;
                    uv[1] = uv[1] as f32 as f64;
                }
            }
        }
    }

    /// OBJ text with `f32` coordinates. Each triangle gets its own three
    /// `vt` records when uvs are present.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x as f32, v.y as f32, v.z as f32);
        }
        match &self.uvs {
            Some(uvs) => {
                for tri in uvs {
                    for uv in tri {
                        let _ = writeln!(out, "vt {} {}", uv[0] as f32, uv[1] as f32);
                    }
                }
                for (t, tri) in self.triangles.iter().enumerate() {
                    let base = 3 * t + 1;
                    let _ = writeln!(
                        out,
                        "f {}/{} {}/{} {}/{}",
                        tri[0] + 1,
                        base,
                        tri[1] + 1,
                        base + 1,
                        tri[2] + 1,
                        base + 2
                    );
                }
            }
            None => {
                for tri in &self.triangles {
                    let _ = writeln!(out, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
                }
            }
        }
        out
    }

    /// Reads the subset of OBJ written by [`TriMesh::to_obj`]: triangles
    /// only, positive indices, optional `vt`.
    pub fn from_obj(text: &str) -> Result<TriMesh, MeshError> {
        let mut vertices = Vec::new();
        let mut texcoords: Vec<[f64; 2]> = Vec::new();
        let mut triangles = Vec::new();
        let mut uvs = Vec::new();
        let mut with_uv = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| MeshError::Obj { line, msg };
            let mut parts = raw.split_whitespace();
            let Some(tag) = parts.next() else { continue };
            let nums = |parts: std::str::SplitWhitespace, n: usize| -> Result<Vec<f64>, MeshError> {
                let vals: Vec<f64> = parts
                    .map(|p| p.parse::<f32>().map(f64::from))
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(e.to_string()))?;
                if vals.len() != n {
                    return Err(err(format!("expected {n} numbers, found {}", vals.len())));
                }
                Ok(vals)
            };
            match tag {
                "#" | "o" | "g" | "s" | "mtllib" | "usemtl" => {}
                "v" => {
                    let v = nums(parts, 3)?;
                    vertices.push(Vec3::new(v[0], v[1], v[2]));
                }
                "vt" => {
                    let v = nums(parts, 2)?;
                    texcoords.push([v[0], v[1]]);
                }
                "f" => {
                    let refs: Vec<&str> = parts.collect();
                    if refs.len() != 3 {
                        return Err(err(format!("only triangles supported, found {} corners", refs.len())));
                    }
                    let mut tri = [0u32; 3];
                    let mut tri_uv = [[0.0; 2]; 3];
                    let mut has_uv = false;
                    for (k, r) in refs.iter().enumerate() {
                        let mut it = r.split('/');
                        let vi: usize = it
                            .next()
                            .unwrap_or("")
                            .parse()
                            .map_err(|_| err(format!("bad vertex reference {r:?}")))?;
                        if vi == 0 || vi > vertices.len() {
                            return Err(err(format!("vertex index {vi} out of range")));
                        }
                        tri[k] = (vi - 1) as u32;
                        if let Some(ti) = it.next().filter(|s| !s.is_empty()) {
                            let ti: usize =
                                ti.parse().map_err(|_| err(format!("bad texcoord reference {r:?}")))?;
                            if ti == 0 || ti > texcoords.len() {
                                return Err(err(format!("texcoord index {ti} out of range")));
                            }
                            tri_uv[k] = texcoords[ti - 1];
                            has_uv = true;
                        }
                    }
                    match with_uv {
                        None => with_uv = Some(has_uv),
                        Some(prev) if prev != has_uv => {
                            return Err(err("faces mix textured and untextured corners".into()))
                        }
                        _ => {}
                    }
                    triangles.push(tri);
                    uvs.push(tri_uv);
                }
                other => return Err(err(format!("unsupported record {other:?}"))),
            }
        }
        Ok(TriMesh {
            vertices,
            triangles,
            uvs: with_uv.unwrap_or(false).then_some(uvs),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tetrahedron() -> TriMesh {
        TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn tetrahedron_topology() {
        let t = tetrahedron();
        assert_eq!(t.euler_characteristic(), 2);
        assert!(t.is_watertight());
        assert!((t.signed_volume() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn bad_index_rejected() {
        let err = TriMesh::new(vec![Vec3::ZERO], vec![[0, 0, 1]]).unwrap_err();
        assert!(matches!(err, MeshError::IndexOutOfRange { index: 1, .. }));
    }

    #[test]
    fn obj_round_trip() {
        let mut t = tetrahedron();
        t.vertices[1] = Vec3::new(0.1, 0.7, 1.0 / 3.0);
        t.uvs = Some(vec![[[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]]; 4]);
        t.round_to_f32();
        let back = TriMesh::from_obj(&t.to_obj()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_obj(), t.to_obj());
    }

    #[test]
    fn obj_errors_name_line() {
        let err = TriMesh::from_obj("v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(matches!(err, MeshError::Obj { line: 2, .. }));
    }

    #[test]
    fn compact_drops_unused() {
        let mut t = TriMesh::new(
            vec![Vec3::X, Vec3::ZERO, Vec3::Y, Vec3::Z],
            vec![[1, 0, 3]],
        )
        .unwrap();
        t.compact();
        assert_eq!(t.vertices, vec![Vec3::ZERO, Vec3::X, Vec3::Z]);
        assert_eq!(t.triangles, vec![[0, 1, 2]]);
    }
}
