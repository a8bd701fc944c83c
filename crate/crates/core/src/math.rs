//! Geometry primitives shared by every stage: vectors, rays, boxes and the
//! pinhole camera.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const ONE: Vec3 = Vec3::new(1.0, 1.0, 1.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction. Zero vectors stay zero.
    #[inline]
    pub fn normalize(self) -> Vec3 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    #[inline]
    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    #[inline]
    pub fn clamp01(self) -> Vec3 {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn max_component(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    #[inline]
    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl MulAssign<f64> for Vec3 {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// RGB triples reuse the vector type.
pub type Rgb = Vec3;

/// Half-line `origin + t * direction` with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// The scene domain `[-1, 1]^3`.
    pub const fn unit_cube() -> Self {
        Self::new(Vec3::splat(-1.0), Vec3::splat(1.0))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x
            && self.max.x >= o.min.x
            && self.min.y <= o.max.y
            && self.max.y >= o.min.y
            && self.min.z <= o.max.z
            && self.max.z >= o.min.z
    }
}

/// Slab-method intersection. Returns `(t_near, t_far)` with `t_near`
/// clamped to zero, or `None` when the box lies entirely behind the origin
/// or is missed.
pub fn ray_box_intersect(ray: &Ray, aabb: &Aabb) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin[axis];
        let d = ray.direction[axis];
        let (lo, hi) = (aabb.min[axis], aabb.max[axis]);
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
    }
    let t_near = t0.max(0.0);
    if t1 < t_near {
        None
    } else {
        Some((t_near, t1))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("camera position coincides with look-at point")]
    DegenerateView,
    #[error("up vector is parallel to the view axis")]
    ParallelUp,
    #[error("vertical field of view {0} outside (0, 180) degrees")]
    BadFov(f64),
    #[error("image dimensions must be positive")]
    EmptyImage,
    #[error("pixel ({px}, {py}) outside a {width}x{height} image")]
    PixelOutOfRange {
        px: f64,
        py: f64,
        width: u32,
        height: u32,
    },
    #[error("camera path line {line}: {msg}")]
    PathSyntax { line: usize, msg: String },
}

/// Pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

/// Orthonormal camera frame derived from a pose.
#[derive(Debug, Clone, Copy)]
pub struct CameraBasis {
    pub origin: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    /// `tan(fov / 2)`.
    pub tan_half_fov: f64,
    pub aspect: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraPose {
    pub fn new(
        position: Vec3,
        look_at: Vec3,
        up: Vec3,
        vertical_fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        let cam = Self {
            position,
            look_at,
            up,
            vertical_fov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let view = self.look_at - self.position;
        if view.length() <= 1e-12 {
            return Err(CameraError::DegenerateView);
        }
        if view.normalize().cross(self.up.normalize()).length() <= 1e-9 {
            return Err(CameraError::ParallelUp);
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < 180.0) {
            return Err(CameraError::BadFov(self.vertical_fov));
        }
        if self.width == 0 || self.height == 0 {
            return Err(CameraError::EmptyImage);
        }
        Ok(())
    }

    pub fn basis(&self) -> CameraBasis {
        let forward = (self.look_at - self.position).normalize();
        let right = forward.cross(self.up).normalize();
        let up = right.cross(forward);
        CameraBasis {
            origin: self.position,
            right,
            up,
            forward,
            tan_half_fov: (self.vertical_fov.to_radians() * 0.5).tan(),
            aspect: self.width as f64 / self.height as f64,
            width: self.width,
            height: self.height,
        }
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }
}

impl CameraBasis {
    /// Unnormalized direction through the image point `(sx, sy)` in pixel
    /// units, where pixel centers sit at half-integers.
    #[inline]
    pub fn direction_at(&self, sx: f64, sy: f64) -> Vec3 {
        let ndc_x = 2.0 * sx / self.width as f64 - 1.0;
        let ndc_y = 1.0 - 2.0 * sy / self.height as f64;
        self.forward
            + self.right * (ndc_x * self.tan_half_fov * self.aspect)
            + self.up * (ndc_y * self.tan_half_fov)
    }

    /// Ray through the center of integer pixel `(x, y)`.
    #[inline]
    pub fn pixel_ray(&self, x: u32, y: u32) -> Ray {
        Ray::new(
            self.origin,
            self.direction_at(x as f64 + 0.5, y as f64 + 0.5),
        )
    }

    /// Maps a world point to continuous pixel coordinates and view depth
    /// (distance along `forward`).
    #[inline]
    pub fn project(&self, p: Vec3) -> (f64, f64, f64) {
        let d = p - self.origin;
        let z = d.dot(self.forward);
        let x = d.dot(self.right) / (z * self.tan_half_fov * self.aspect);
        let y = d.dot(self.up) / (z * self.tan_half_fov);
        (
            (x + 1.0) * 0.5 * self.width as f64,
            (1.0 - y) * 0.5 * self.height as f64,
            z,
        )
    }
}

/// Unit ray through the pixel center `(px + 0.5, py + 0.5)`.
pub fn camera_ray(cam: &CameraPose, px: f64, py: f64) -> Result<Ray, CameraError> {
    let in_range = px >= 0.0 && py >= 0.0 && px < cam.width as f64 && py < cam.height as f64;
    if !in_range {
        return Err(CameraError::PixelOutOfRange {
            px,
            py,
            width: cam.width,
            height: cam.height,
        });
    }
    let basis = cam.basis();
    Ok(Ray::new(cam.position, basis.direction_at(px + 0.5, py + 0.5)))
}

/// Parses a camera-path file: one camera per line,
/// `px py pz lx ly lz ux uy uz fov width height`, `#` comments.
pub fn parse_camera_path(text: &str) -> Result<Vec<CameraPose>, CameraError> {
    let mut cams = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 12 {
            return Err(CameraError::PathSyntax {
                line: line_no,
                msg: format!("expected 12 fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0f64; 10];
        for (slot, tok) in nums.iter_mut().zip(&fields[..10]) {
            *slot = tok.parse().map_err(|_| CameraError::PathSyntax {
                line: line_no,
                msg: format!("not a number: {tok:?}"),
            })?;
        }
        let dim = |tok: &str| -> Result<u32, CameraError> {
            tok.parse().map_err(|_| CameraError::PathSyntax {
                line: line_no,
                msg: format!("not an image dimension: {tok:?}"),
            })
        };
        let cam = CameraPose::new(
            Vec3::new(nums[0], nums[1], nums[2]),
            Vec3::new(nums[3], nums[4], nums[5]),
            Vec3::new(nums[6], nums[7], nums[8]),
            nums[9],
            dim(fields[10])?,
            dim(fields[11])?,
        )
        .map_err(|e| CameraError::PathSyntax {
            line: line_no,
            msg: e.to_string(),
        })?;
        cams.push(cam);
    }
    Ok(cams)
}

/// Serializes cameras in the camera-path format.
pub fn format_camera_path(cams: &[CameraPose]) -> String {
    let mut out = String::from("# px py pz lx ly lz ux uy uz fov width height\n");
    for c in cams {
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {} {} {} {}\n",
            c.position.x,
            c.position.y,
            c.position.z,
            c.look_at.x,
            c.look_at.y,
            c.look_at.z,
            c.up.x,
            c.up.y,
            c.up.z,
            c.vertical_fov,
            c.width,
            c.height
        ));
    }
    out
}

/// Horizontal ring of cameras around the origin, looking at it, `+y` up.
pub fn orbit_ring(
    count: usize,
    radius: f64,
    elevation_deg: f64,
    fov: f64,
    width: u32,
    height: u32,
) -> Vec<CameraPose> {
    let elev = elevation_deg.to_radians();
    (0..count)
        .map(|i| {
            let az = std::f64::consts::TAU * i as f64 / count as f64;
            let position = Vec3::new(
                radius * elev.cos() * az.sin(),
                radius * elev.sin(),
                radius * elev.cos() * az.cos(),
            );
            CameraPose {
                position,
                look_at: Vec3::ZERO,
                up: Vec3::Y,
                vertical_fov: fov,
                width,
                height,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cube() -> Aabb {
        Aabb::unit_cube()
    }

    #[test]
    fn box_axis_entry_exit() {
        let r = Ray::new(Vec3::new(0.0, 0.0, -2.0), Vec3::Z);
        assert_eq!(ray_box_intersect(&r, &cube()), Some((1.0, 3.0)));
    }

    #[test]
    fn box_parallel_miss() {
        let r = Ray::new(Vec3::new(0.0, 0.0, -2.0), Vec3::Y);
        assert_eq!(ray_box_intersect(&r, &cube()), None);
    }

    #[test]
    fn box_interior_origin() {
        let r = Ray::new(Vec3::ZERO, Vec3::X);
        assert_eq!(ray_box_intersect(&r, &cube()), Some((0.0, 1.0)));
    }

    #[test]
    fn box_behind_origin() {
        let r = Ray::new(Vec3::new(0.0, 0.0, 2.0), Vec3::Z);
        assert_eq!(ray_box_intersect(&r, &cube()), None);
    }

    fn cam(fov: f64, w: u32, h: u32) -> CameraPose {
        CameraPose::new(Vec3::new(0.3, 0.5, 3.0), Vec3::new(0.1, 0.0, 0.0), Vec3::Y, fov, w, h).unwrap()
    }

    #[test]
    fn center_pixel_is_view_axis() {
        for (w, h) in [(64, 64), (65, 33), (1, 1)] {
            let c = cam(50.0, w, h);
            let r = camera_ray(&c, w as f64 / 2.0 - 0.5, h as f64 / 2.0 - 0.5).unwrap();
            let axis = (c.look_at - c.position).normalize();
            assert_abs_diff_eq!((r.direction - axis).length(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn right_edge_is_half_fov_off_axis() {
        let c = CameraPose::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0), Vec3::Y, 90.0, 32, 32).unwrap();
        let r = camera_ray(&c, 31.5, 15.5).unwrap();
        let angle = r.direction.dot(Vec3::new(0.0, 0.0, -1.0)).acos();
        assert_abs_diff_eq!(angle, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert!(r.direction.x > 0.0);
        assert_abs_diff_eq!(r.direction.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_pixel_rejected() {
        let c = cam(50.0, 8, 8);
        assert!(camera_ray(&c, 8.0, 0.0).is_err());
        assert!(camera_ray(&c, -0.1, 0.0).is_err());
    }

    #[test]
    fn corner_rays_symmetric() {
        let c = CameraPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::ZERO, Vec3::Y, 60.0, 40, 30).unwrap();
        let axis = (c.look_at - c.position).normalize();
        let corners = [(0.0, 0.0), (39.0, 0.0), (0.0, 29.0), (39.0, 29.0)];
        let cosines: Vec<f64> = corners
            .iter()
            .map(|&(x, y)| camera_ray(&c, x, y).unwrap().direction.dot(axis))
            .collect();
        for c in &cosines {
            assert_abs_diff_eq!(*c, cosines[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_cameras() {
        assert_eq!(
            CameraPose::new(Vec3::ZERO, Vec3::ZERO, Vec3::Y, 50.0, 4, 4),
            Err(CameraError::DegenerateView)
        );
        assert_eq!(
            CameraPose::new(Vec3::ZERO, Vec3::Y, Vec3::Y, 50.0, 4, 4),
            Err(CameraError::ParallelUp)
        );
        assert_eq!(
            CameraPose::new(Vec3::ZERO, Vec3::Z, Vec3::Y, 180.0, 4, 4),
            Err(CameraError::BadFov(180.0))
        );
    }

    #[test]
    fn camera_path_round_trip() {
        let ring = orbit_ring(5, 2.5, 20.0, 50.0, 64, 48);
        let text = format_camera_path(&ring);
        assert_eq!(parse_camera_path(&text).unwrap(), ring);
    }

    #[test]
    fn camera_path_reports_line() {
        let text = "# header\n0 0 3 0 0 0 0 1 0 50 8 8\n0 0 3 0 0 0 0 1 0 50 8\n";
        match parse_camera_path(text) {
            Err(CameraError::PathSyntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn project_inverts_pixel_ray() {
        let c = cam(45.0, 50, 40).basis();
        let r = c.pixel_ray(12, 31);
        let (sx, sy, _) = c.project(r.at(2.0));
        assert_abs_diff_eq!(sx, 12.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sy, 31.5, epsilon = 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn box_hits_lie_on_boundary(
            ox in -3.0f64..3.0, oy in -3.0f64..3.0, oz in -3.0f64..3.0,
            dx in -1.0f64..1.0, dy in -1.0f64..1.0, dz in -1.0f64..1.0,
        ) {
            let d = Vec3::new(dx, dy, dz);
            proptest::prop_assume!(d.length() > 1e-3);
            let ray = Ray::new(Vec3::new(ox, oy, oz), d);
            let b = cube();
            if let Some((tn, tf)) = ray_box_intersect(&ray, &b) {
                proptest::prop_assert!(tn <= tf);
                let on_boundary = |p: Vec3| {
                    let q = p.abs();
                    (q.max_component() - 1.0).abs() < 1e-6
                };
                if tn > 0.0 {
                    proptest::prop_assert!(on_boundary(ray.at(tn)));
                } else {
                    proptest::prop_assert!(b.contains(ray.origin));
                }
                proptest::prop_assert!(on_boundary(ray.at(tf)));
            }
        }

        #[test]
        fn rays_are_unit(px in 0.0f64..63.99, py in 0.0f64..47.99) {
            let c = cam(70.0, 64, 48);
            let r = camera_ray(&c, px, py).unwrap();
            proptest::prop_assert!((r.direction.length() - 1.0).abs() < 1e-12);
        }
    }
}
