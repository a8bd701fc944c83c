//! Marching cubes over the scene SDF.
//!
//! The per-configuration triangulation is derived rather than tabulated:
//! on each cube face, walked counterclockwise as seen from outside, every
//! crossing into the inside region is joined to the next crossing out of
//! it. Faces with two diagonal inside corners therefore always cut the
//! inside corners apart, and neighbouring cells agree on every shared face,
//! which keeps the result watertight. The face segments chain into closed
//! loops that are fan-triangulated.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::mesh::TriMesh;
use crate::field::SceneDescription;
use crate::math::Vec3;

/// Triangles with less area than this are dropped after extraction.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Edge-interpolation parameter is kept this far from either lattice point.
const T_MARGIN: f64 = 1e-4;

fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

/// The 12 cube edges as corner pairs `(low, high)` differing in one bit.
fn cube_edges() -> [(usize, usize); 12] {
    let mut edges = [(0, 0); 12];
    let mut n = 0;
    for axis in 0..3 {
        let bit = 1 << axis;
        for c in 0..8 {
            if c & bit == 0 {
                edges[n] = (c, c | bit);
                n += 1;
            }
        }
    }
    edges
}

fn edge_index(a: usize, b: usize) -> usize {
    let pair = (a.min(b), a.max(b));
    cube_edges()
        .iter()
        .position(|&e| e == pair)
        .expect("corners share a cube edge")
}

/// Corners of each face in counterclockwise order seen from outside.
fn face_loops() -> Vec<[usize; 4]> {
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in 0..2 {
            let mut corners: Vec<usize> = (0..8)
                .filter(|&c| corner_offset(c)[axis] == side)
                .collect();
            let mut outward = [0.0; 3];
            outward[axis] = if side == 1 { 1.0 } else { -1.0 };
            let outward = Vec3::from_array(outward);
            let pos = |c: usize| {
                let o = corner_offset(c);
                Vec3::new(o[0] as f64, o[1] as f64, o[2] as f64) - Vec3::splat(0.5)
            };
            // Order by angle about the outward axis.
            let u_axis = (axis + 1) % 3;
            let v_axis = (axis + 2) % 3;
            corners.sort_by(|&a, &b| {
                let ang = |c: usize| {
                    let p = pos(c);
                    p[v_axis].atan2(p[u_axis])
                };
                ang(a).total_cmp(&ang(b))
            });
            let (p0, p1, p2) = (pos(corners[0]), pos(corners[1]), pos(corners[2]));
            if (p1 - p0).cross(p2 - p1).dot(outward) < 0.0 {
                corners.reverse();
            }
            faces.push([corners[0], corners[1], corners[2], corners[3]]);
        }
    }
    faces
}

/// For each inside-corner mask, closed loops of cube-edge indices.
fn case_table() -> &'static Vec<Vec<Vec<u8>>> {
    static TABLE: OnceLock<Vec<Vec<Vec<u8>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let faces = face_loops();
        (0..256usize)
            .map(|mask| {
                let inside = |c: usize| mask & (1 << c) != 0;
                let mut next = [usize::MAX; 12];
                for face in &faces {
                    // Crossings in walking order: (edge, entering-inside?)
                    let mut crossings = Vec::new();
                    for k in 0..4 {
                        let (a, b) = (face[k], face[(k + 1) % 4]);
                        if inside(a) != inside(b) {
                            crossings.push((edge_index(a, b), inside(b)));
                        }
                    }
                    let n = crossings.len();
                    for (i, &(edge, entering)) in crossings.iter().enumerate() {
                        if entering {
                            let exit = (1..n)
                                .map(|j| crossings[(i + j) % n])
                                .find(|&(_, e)| !e)
                                .expect("face crossings alternate");
                            next[edge] = exit.0;
                        }
                    }
                }
                let mut seen = [false; 12];
                let mut loops = Vec::new();
                for start in 0..12 {
                    if next[start] == usize::MAX || seen[start] {
                        continue;
                    }
                    let mut lp = Vec::new();
                    let mut e = start;
                    while !seen[e] {
                        seen[e] = true;
                        lp.push(e as u8);
                        e = next[e];
                    }
                    loops.push(lp);
                }
                loops
            })
            .collect()
    })
}

fn sample_slice(scene: &SceneDescription, res: usize, z: usize) -> Vec<f64> {
    let n = res + 1;
    let lo = scene.bounds.min;
    let step = scene.bounds.extent() / res as f64;
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let p = Vec3::new(
                lo.x + x as f64 * step.x,
                lo.y + y as f64 * step.y,
                lo.z + z as f64 * step.z,
            );
            *v = scene.sdf(p);
        }
    });
    out
}

/// Extracts the zero level set sampled on a `(res + 1)^3` lattice over the
/// scene bounds. Inside is `sdf < 0`; faces point toward positive values.
pub fn marching_cubes(scene: &SceneDescription, res: usize) -> TriMesh {
    assert!(res >= 1, "marching cubes needs at least one cell");
    if !scene.has_surface() {
        return TriMesh::default();
    }
    let table = case_table();
    let edges = cube_edges();
    let n = res + 1;
    let lo = scene.bounds.min;
    let step = scene.bounds.extent() / res as f64;
    let lattice = |x: usize, y: usize, z: usize| {
        Vec3::new(
            lo.x + x as f64 * step.x,
            lo.y + y as f64 * step.y,
            lo.z + z as f64 * step.z,
        )
    };

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut welded: HashMap<(usize, usize, usize, usize), u32> = HashMap::new();
    let mut below = sample_slice(scene, res, 0);
    for z in 0..res {
        let above = sample_slice(scene, res, z + 1);
        let value = |x: usize, y: usize, dz: usize| {
            let s = if dz == 0 { &below } else { &above };
            s[y * n + x]
        };
        for y in 0..res {
            for x in 0..res {
                let mut mask = 0usize;
                let mut vals = [0.0; 8];
                for (c, v) in vals.iter_mut().enumerate() {
                    let o = corner_offset(c);
                    *v = value(x + o[0], y + o[1], o[2]);
                    if *v < 0.0 {
                        mask |= 1 << c;
                    }
                }
                if mask == 0 || mask == 255 {
                    continue;
                }
                for lp in &table[mask] {
                    let ids: Vec<u32> = lp
                        .iter()
                        .map(|&e| {
                            let (a, b) = edges[e as usize];
                            let oa = corner_offset(a);
                            let axis = (a ^ b).trailing_zeros() as usize;
                            let key = (x + oa[0], y + oa[1], z + oa[2], axis);
                            *welded.entry(key).or_insert_with(|| {
                                let ob = corner_offset(b);
                                let pa = lattice(x + oa[0], y + oa[1], z + oa[2]);
                                let pb = lattice(x + ob[0], y + ob[1], z + ob[2]);
                                let (va, vb) = (vals[a], vals[b]);
                                let t = (va / (va - vb)).clamp(T_MARGIN, 1.0 - T_MARGIN);
                                vertices.push(pa + (pb - pa) * t);
                                (vertices.len() - 1) as u32
                            })
                        })
                        .collect();
                    for k in 1..ids.len() - 1 {
                        triangles.push([ids[0], ids[k], ids[k + 1]]);
                    }
                }
            }
        }
        below = above;
    }
    let mut mesh = TriMesh {
        vertices,
        triangles,
        uvs: None,
    };
    let keep: Vec<bool> = (0..mesh.triangles.len())
        .map(|t| mesh.face_area(t) >= MIN_TRIANGLE_AREA)
        .collect();
    let mut k = keep.iter();
    mesh.triangles.retain(|_| *k.next().unwrap());
    mesh.compact();
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SdfPrimitive;

    #[test]
    fn every_case_yields_closed_loops() {
        let table = case_table();
        assert!(table[0].is_empty() && table[255].is_empty());
        for (mask, loops) in table.iter().enumerate() {
            let used: usize = loops.iter().map(Vec::len).sum();
            let crossing = cube_edges()
                .iter()
                .filter(|&&(a, b)| (mask >> a & 1) != (mask >> b & 1))
                .count();
            assert_eq!(used, crossing, "mask {mask}");
            assert!(loops.iter().all(|l| l.len() >= 3));
        }
    }

    #[test]
    fn positive_field_is_empty() {
        let scene = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::new(5.0, 0.0, 0.0),
                radius: 0.5,
            }],
            vec![],
        );
        assert!(marching_cubes(&scene, 16).is_empty());
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let scene = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::new(0.05, -0.02, 0.01),
                radius: 0.5,
            }],
            vec![],
        );
        let mesh = marching_cubes(&scene, 32);
        assert!(mesh.is_watertight());
        assert_eq!(mesh.euler_characteristic(), 2);
        let v = mesh.signed_volume();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        assert!((v - exact).abs() < 0.02 * exact, "{v} vs {exact}");
    }

    #[test]
    fn box_with_corner_sphere_stays_closed() {
        // The sphere on the box corner produces faces with diagonal signs.
        let scene = SceneDescription::simple(
            vec![
                SdfPrimitive::Box {
                    center: Vec3::new(0.03, 0.03, 0.03),
                    half: Vec3::splat(0.3),
                },
                SdfPrimitive::Sphere {
                    center: Vec3::new(0.33, 0.33, 0.33),
                    radius: 0.1,
                },
            ],
            vec![],
        );
        let mesh = marching_cubes(&scene, 24);
        assert!(mesh.is_watertight());
    }
}
