//! Triangle rasterization shared by the renderer and the volume pruner.
//!
//! Coverage is decided in screen space with edge functions and a top-left
//! fill rule; the hit distance and barycentrics come from intersecting the
//! pixel ray with the triangle's plane, so depth is exact along the ray.

use crate::math::{CameraBasis, CameraPose, Vec3};
use crate::mesher::TriMesh;

/// Geometry closer than this along the view axis is clipped away.
pub const NEAR_PLANE: f64 = 1e-3;

/// Nearest front-facing surface seen through one pixel center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment {
    /// Ray parameter of the hit (distance, since rays are unit length).
    pub t: f64,
    pub triangle: u32,
    /// Weights of the triangle's three corners; nonnegative, summing to 1.
    pub barycentric: [f64; 3],
}

#[inline]
fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Whether an edge of a positively oriented screen triangle claims pixel
/// centers lying exactly on it: left edges and horizontal top edges do.
#[inline]
fn owns_edge(a: [f64; 2], b: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Clips a polygon to the half-space in front of the near plane.
fn clip_near(basis: &CameraBasis, poly: &[Vec3]) -> Vec<Vec3> {
    let depth = |p: Vec3| (p - basis.origin).dot(basis.forward) - NEAR_PLANE;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (da, db) = (depth(a), depth(b));
        if da >= 0.0 {
            out.push(a);
        }
        if (da >= 0.0) != (db >= 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

/// Ray/plane hit with barycentrics, or `None` when the ray runs parallel.
fn intersect(origin: Vec3, dir: Vec3, c: &[Vec3; 3]) -> Option<(f64, [f64; 3])> {
    let e1 = c[1] - c[0];
    let e2 = c[2] - c[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - c[0];
    let u = s.dot(p) * inv;
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    let t = e2.dot(q) * inv;
    let mut w = [1.0 - u - v, u, v].map(|x| x.max(0.0));
    let sum = w[0] + w[1] + w[2];
    if sum <= 0.0 {
        return None;
    }
    for x in &mut w {
        *x /= sum;
    }
    Some((t, w))
}

/// Nearest front-facing fragment per pixel, row-major.
pub fn rasterize(mesh: &TriMesh, cam: &CameraPose) -> Vec<Option<Fragment>> {
    let basis = cam.basis();
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut frags: Vec<Option<Fragment>> = vec![None; w * h];
    for t in 0..mesh.triangles.len() {
        let corners = mesh.corners(t);
        let normal = (corners[1] - corners[0]).cross(corners[2] - corners[0]);
        if normal.dot(corners[0] - basis.origin) >= 0.0 {
            continue;
        }
        let poly = clip_near(&basis, &corners);
        if poly.len() < 3 {
            continue;
        }
        let screen: Vec<[f64; 2]> = poly
            .iter()
            .map(|&p| {
                let (sx, sy, _) = basis.project(p);
                [sx, sy]
            })
            .collect();
        for k in 1..screen.len() - 1 {
            let mut tri = [screen[0], screen[k], screen[k + 1]];
            let area = edge(tri[0], tri[1], tri[2]);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
            let min_x = tri.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let max_x = tri.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let min_y = tri.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let max_y = tri.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let x0 = (min_x - 0.5).ceil().max(0.0) as i64;
            let x1 = ((max_x - 0.5).floor()).min(w as f64 - 1.0) as i64;
            let y0 = (min_y - 0.5).ceil().max(0.0) as i64;
            let y1 = ((max_y - 0.5).floor()).min(h as f64 - 1.0) as i64;
            let owns = [
                owns_edge(tri[1], tri[2]),
                owns_edge(tri[2], tri[0]),
                owns_edge(tri[0], tri[1]),
            ];
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let p = [x as f64 + 0.5, y as f64 + 0.5];
                    let e = [edge(tri[1], tri[2], p), edge(tri[2], tri[0], p), edge(tri[0], tri[1], p)];
                    let inside = e
                        .iter()
                        .zip(owns)
                        .all(|(&v, own)| v > 0.0 || (v == 0.0 && own));
                    if !inside {
                        continue;
                    }
                    let ray = basis.pixel_ray(x as u32, y as u32);
                    let Some((depth, bary)) = intersect(ray.origin, ray.direction, &corners) else {
                        continue;
                    };
                    if !(depth > 0.0) {
                        continue;
                    }
                    let slot = &mut frags[y as usize * w + x as usize];
                    if slot.is_none_or(|f| depth < f.t) {
                        *slot = Some(Fragment {
                            t: depth,
                            triangle: t as u32,
                            barycentric: bary,
                        });
                    }
                }
            }
        }
    }
    frags
}
