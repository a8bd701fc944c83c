//! Quadric error metric edge-collapse decimation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::mesh::TriMesh;
use crate::math::Vec3;

/// Collapses that turn any surviving face normal by more than this
/// (as a cosine) are rejected.
const MIN_NORMAL_COS: f64 = 0.2;

/// Symmetric 4x4 plane quadric, upper triangle row-major.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadric([f64; 10]);

impl Quadric {
    /// Squared distance to the plane `n . x + d = 0` (`n` unit).
    pub fn plane(n: Vec3, d: f64) -> Self {
        let (a, b, c) = (n.x, n.y, n.z);
        Quadric([
            a * a,
            a * b,
            a * c,
            a * d,
            b * b,
            b * c,
            b * d,
            c * c,
            c * d,
            d * d,
        ])
    }

    pub fn add(&self, o: &Quadric) -> Quadric {
        let mut q = *self;
        for (x, y) in q.0.iter_mut().zip(o.0) {
            *x += y;
        }
        q
    }

    pub fn error(&self, p: Vec3) -> f64 {
        let q = &self.0;
        let (x, y, z) = (p.x, p.y, p.z);
        q[0] * x * x
            + 2.0 * q[1] * x * y
            + 2.0 * q[2] * x * z
            + 2.0 * q[3] * x
            + q[4] * y * y
            + 2.0 * q[5] * y * z
            + 2.0 * q[6] * y
            + q[7] * z * z
            + 2.0 * q[8] * z
            + q[9]
    }

    /// Minimizer of the quadric when its 3x3 block is well conditioned.
    pub fn optimum(&self) -> Option<Vec3> {
        let q = &self.0;
        let m = [[q[0], q[1], q[2]], [q[1], q[4], q[5]], [q[2], q[5], q[7]]];
        let rhs = [-q[3], -q[6], -q[8]];
        let det3 = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let det = det3(&m);
        let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 || det.abs() <= 1e-10 * scale * scale * scale {
            return None;
        }
        let mut out = [0.0; 3];
        for (col, o) in out.iter_mut().enumerate() {
            let mut mc = m;
            for row in 0..3 {
                mc[row][col] = rhs[row];
            }
            *o = det3(&mc) / det;
        }
        let p = Vec3::from_array(out);
        p.is_finite().then_some(p)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    keep: u32,
    remove: u32,
    target: Vec3,
    keep_version: u32,
    remove_version: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    // Reversed so the max-heap pops the cheapest collapse first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost
            .total_cmp(&self.cost)
            .then_with(|| o.keep.cmp(&self.keep))
            .then_with(|| o.remove.cmp(&self.remove))
    }
}

struct Decimator {
    pos: Vec<Vec3>,
    quadrics: Vec<Quadric>,
    faces: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    vert_faces: Vec<Vec<u32>>,
    locked: Vec<bool>,
    version: Vec<u32>,
    alive_faces: usize,
}

impl Decimator {
    fn new(mesh: &TriMesh) -> Self {
        let nv = mesh.vertices.len();
        let mut quadrics = vec![Quadric::default(); nv];
        let mut vert_faces = vec![Vec::new(); nv];
        for (f, tri) in mesh.triangles.iter().enumerate() {
            let cross = mesh.face_cross(f);
            let len = cross.length();
            if len > 0.0 {
                let n = cross / len;
                let q = Quadric::plane(n, -n.dot(mesh.vertices[tri[0] as usize]));
                for &v in tri {
                    quadrics[v as usize] = quadrics[v as usize].add(&q);
                }
            }
            for &v in tri {
                vert_faces[v as usize].push(f as u32);
            }
        }
        let mut locked = vec![false; nv];
        for ((a, b), n) in mesh.edge_counts() {
            if n != 2 {
                locked[a as usize] = true;
                locked[b as usize] = true;
            }
        }
        Decimator {
            pos: mesh.vertices.clone(),
            quadrics,
            faces: mesh.triangles.clone(),
            face_alive: vec![true; mesh.triangles.len()],
            vert_faces,
            locked,
            version: vec![0; nv],
            alive_faces: mesh.triangles.len(),
        }
    }

    fn faces_of(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.vert_faces[v as usize]
            .iter()
            .copied()
            .filter(|&f| self.face_alive[f as usize])
    }

    fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .faces_of(v)
            .flat_map(|f| self.faces[f as usize])
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn candidate(&self, a: u32, b: u32) -> Option<Candidate> {
        let (la, lb) = (self.locked[a as usize], self.locked[b as usize]);
        if la && lb {
            return None;
        }
        let (keep, remove) = if lb { (b, a) } else { (a, b) };
        let q = self.quadrics[keep as usize].add(&self.quadrics[remove as usize]);
        let pk = self.pos[keep as usize];
        let pr = self.pos[remove as usize];
        let target = if la || lb {
            pk
        } else {
            let mid = (pk + pr) * 0.5;
            let reach = (pk - pr).length();
            match q.optimum() {
                Some(p) if (p - mid).length() <= reach => p,
                _ => [pk, pr, mid]
                    .into_iter()
                    .min_by(|x, y| q.error(*x).total_cmp(&q.error(*y)))
                    .expect("three choices"),
            }
        };
        Some(Candidate {
            cost: q.error(target).max(0.0),
            keep,
            remove,
            target,
            keep_version: self.version[keep as usize],
            remove_version: self.version[remove as usize],
        })
    }

    fn is_current(&self, c: &Candidate) -> bool {
        self.version[c.keep as usize] == c.keep_version
            && self.version[c.remove as usize] == c.remove_version
            && self.vert_faces[c.remove as usize]
                .iter()
                .any(|&f| self.face_alive[f as usize])
    }

    fn is_valid(&self, c: &Candidate) -> bool {
        let (keep, remove) = (c.keep, c.remove);
        let shared: Vec<u32> = self
            .faces_of(remove)
            .filter(|&f| self.faces[f as usize].contains(&keep))
            .collect();
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        // Link condition: the only common neighbours are the apexes of the
        // faces being removed.
        let mut apexes: Vec<u32> = shared
            .iter()
            .flat_map(|&f| self.faces[f as usize])
            .filter(|&v| v != keep && v != remove)
            .collect();
        apexes.sort_unstable();
        let nk: HashSet<u32> = self.neighbors(keep).into_iter().collect();
        let mut common: Vec<u32> = self
            .neighbors(remove)
            .into_iter()
            .filter(|v| nk.contains(v))
            .collect();
        common.sort_unstable();
        if common != apexes {
            return false;
        }
        if self.alive_faces <= shared.len() + 2 {
            return false;
        }
        for moved in [keep, remove] {
            for f in self.faces_of(moved) {
                if shared.contains(&f) {
                    continue;
                }
                let tri = self.faces[f as usize];
                let corner = |v: u32| self.pos[v as usize];
                let old = (corner(tri[1]) - corner(tri[0])).cross(corner(tri[2]) - corner(tri[0]));
                let moved_corner = |v: u32| if v == moved { c.target } else { corner(v) };
                let new = (moved_corner(tri[1]) - moved_corner(tri[0]))
                    .cross(moved_corner(tri[2]) - moved_corner(tri[0]));
                let (lo, ln) = (old.length(), new.length());
                if ln <= 1e-14 || new.dot(old) < MIN_NORMAL_COS * lo * ln {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, c: &Candidate) {
        let (keep, remove) = (c.keep, c.remove);
        let incident: Vec<u32> = self.faces_of(remove).collect();
        for f in incident {
            let tri = &mut self.faces[f as usize];
            if tri.contains(&keep) {
                self.face_alive[f as usize] = false;
                self.alive_faces -= 1;
            } else {
                for v in tri.iter_mut() {
                    if *v == remove {
                        *v = keep;
                    }
                }
                self.vert_faces[keep as usize].push(f);
            }
        }
        self.vert_faces[remove as usize].clear();
        let alive = &self.face_alive;
        self.vert_faces[keep as usize].retain(|&f| alive[f as usize]);
        self.pos[keep as usize] = c.target;
        self.quadrics[keep as usize] = self.quadrics[keep as usize].add(&self.quadrics[remove as usize]);
        self.version[keep as usize] += 1;
        self.version[remove as usize] += 1;
    }
}

/// Greedy minimum-error edge collapse until at most
/// `floor(face_ratio * faces)` triangles remain, or no legal collapse is
/// left. Boundary and non-manifold vertices stay where they are.
pub fn simplify(mesh: &TriMesh, face_ratio: f64) -> TriMesh {
    assert!(
        face_ratio > 0.0 && face_ratio <= 1.0,
        "face ratio must be in (0, 1], got {face_ratio}"
    );
    if face_ratio >= 1.0 || mesh.is_empty() {
        return mesh.clone();
    }
    let target = (face_ratio * mesh.triangles.len() as f64).floor() as usize;
    let mut dec = Decimator::new(mesh);
    let mut heap = BinaryHeap::new();
    let mut edges: Vec<(u32, u32)> = mesh.edge_counts().into_keys().collect();
    edges.sort_unstable();
    for (a, b) in edges {
        if let Some(c) = dec.candidate(a, b) {
            heap.push(c);
        }
    }
    while dec.alive_faces > target {
        let Some(c) = heap.pop() else { break };
        if !dec.is_current(&c) || !dec.is_valid(&c) {
            continue;
        }
        dec.collapse(&c);
        for n in dec.neighbors(c.keep) {
            if let Some(next) = dec.candidate(c.keep, n) {
                heap.push(next);
            }
        }
    }
    let triangles: Vec<[u32; 3]> = dec
        .faces
        .iter()
        .zip(&dec.face_alive)
        .filter(|(_, &alive)| alive)
        .map(|(t, _)| *t)
        .collect();
    let mut out = TriMesh {
        vertices: dec.pos,
        triangles,
        uvs: None,
    };
    out.compact();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{SceneDescription, SdfPrimitive};
    use crate::mesher::marching_cubes;

    fn grid(n: usize) -> TriMesh {
        let mut vertices = Vec::new();
        for y in 0..=n {
            for x in 0..=n {
                vertices.push(Vec3::new(x as f64 / n as f64, y as f64 / n as f64, 0.0));
            }
        }
        let id = |x: usize, y: usize| (y * (n + 1) + x) as u32;
        let mut triangles = Vec::new();
        for y in 0..n {
            for x in 0..n {
                triangles.push([id(x, y), id(x + 1, y), id(x + 1, y + 1)]);
                triangles.push([id(x, y), id(x + 1, y + 1), id(x, y + 1)]);
            }
        }
        TriMesh::new(vertices, triangles).unwrap()
    }

    #[test]
    fn quadric_plane_error() {
        let q = Quadric::plane(Vec3::Z, -1.0);
        assert_eq!(q.error(Vec3::new(3.0, 4.0, 1.0)), 0.0);
        assert!((q.error(Vec3::new(0.0, 0.0, 3.0)) - 4.0).abs() < 1e-12);
        assert!(q.optimum().is_none());
        let corner = q
            .add(&Quadric::plane(Vec3::X, -0.5))
            .add(&Quadric::plane(Vec3::Y, 0.25));
        let p = corner.optimum().unwrap();
        assert!((p - Vec3::new(0.5, -0.25, 1.0)).length() < 1e-12);
    }

    #[test]
    fn ratio_one_is_identity() {
        let g = grid(4);
        assert_eq!(simplify(&g, 1.0), g);
    }

    #[test]
    fn flat_square_stays_flat() {
        let g = grid(30);
        let s = simplify(&g, 0.1);
        assert!(s.triangles.len() <= g.triangles.len() / 10, "{}", s.triangles.len());
        assert!(s.vertices.iter().all(|v| v.z == 0.0));
        let boundary = |v: &Vec3| v.x == 0.0 || v.y == 0.0 || v.x == 1.0 || v.y == 1.0;
        let before = g.vertices.iter().filter(|v| boundary(v)).count();
        let after = s.vertices.iter().filter(|v| boundary(v)).count();
        assert_eq!(before, after);
        let total: f64 = (0..s.triangles.len()).map(|t| s.face_area(t)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((0..s.triangles.len()).all(|t| s.face_cross(t).z > 0.0));
    }

    #[test]
    fn sphere_keeps_topology() {
        let scene = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::ZERO,
                radius: 0.5,
            }],
            vec![],
        );
        let mesh = marching_cubes(&scene, 32);
        let s = simplify(&mesh, 0.25);
        assert!(s.triangles.len() <= mesh.triangles.len() / 4);
        assert!(s.is_watertight());
        assert_eq!(s.euler_characteristic(), 2);
        s.validate().unwrap();
        let cell = 2.0 / 32.0;
        assert!(s.vertices.iter().all(|v| (v.length() - 0.5).abs() < cell));
    }
}
