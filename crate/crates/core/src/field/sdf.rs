//! Point evaluation of the analytic scene fields.

use super::scene::{CsgOp, FieldSample, SceneDescription};
use crate::math::Vec3;

/// Central-difference step used for all field derivatives.
pub const GRADIENT_STEP: f64 = 1e-4;

/// Normalized SDF gradient. `degenerate` is set (and `normal` is `+z`)
/// where the difference quotient vanishes or the surface is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfGradient {
    pub normal: Vec3,
    pub degenerate: bool,
}

/// Signed distance to the CSG surface, negative inside. An empty surface
/// is infinitely far away.
pub fn sdf_eval(scene: &SceneDescription, x: Vec3) -> f64 {
    let mut nodes = scene.surface.iter();
    let Some(first) = nodes.next() else {
        return f64::INFINITY;
    };
    let mut d = first.primitive.distance(x);
    for node in nodes {
        let e = node.primitive.distance(x);
        d = match node.op {
            CsgOp::Union => d.min(e),
            CsgOp::Intersect => d.max(e),
            CsgOp::Subtract => d.max(-e),
        };
    }
    d
}

fn central_difference(f: impl Fn(Vec3) -> f64, x: Vec3) -> Vec3 {
    let h = GRADIENT_STEP;
    let dx = Vec3::new(h, 0.0, 0.0);
    let dy = Vec3::new(0.0, h, 0.0);
    let dz = Vec3::new(0.0, 0.0, h);
    Vec3::new(
        f(x + dx) - f(x - dx),
        f(x + dy) - f(x - dy),
        f(x + dz) - f(x - dz),
    ) / (2.0 * h)
}

pub fn sdf_gradient(scene: &SceneDescription, x: Vec3) -> SdfGradient {
    let g = central_difference(|p| sdf_eval(scene, p), x);
    if !g.is_finite() || g.length() == 0.0 {
        return SdfGradient {
            normal: Vec3::Z,
            degenerate: true,
        };
    }
    SdfGradient {
        normal: g.normalize(),
        degenerate: false,
    }
}

/// Total volume density at `x`.
pub fn density_eval(scene: &SceneDescription, x: Vec3) -> f64 {
    scene
        .volume
        .iter()
        .map(|e| e.density(x))
        .sum::<f64>()
}

/// Shading normal: the SDF gradient where it exists, otherwise the
/// direction of steepest density decrease, otherwise `+z`.
pub fn normal_at(scene: &SceneDescription, x: Vec3) -> Vec3 {
    let g = sdf_gradient(scene, x);
    if !g.degenerate {
        return g.normal;
    }
    let dg = central_difference(|p| density_eval(scene, p), x);
    if dg.length() > 0.0 {
        -dg.normalize()
    } else {
        Vec3::Z
    }
}

impl SceneDescription {
    pub fn sdf(&self, x: Vec3) -> f64 {
        sdf_eval(self, x)
    }

    pub fn density(&self, x: Vec3) -> f64 {
        density_eval(self, x)
    }

    /// Evaluates every field at `x`.
    pub fn sample(&self, x: Vec3) -> FieldSample {
        let b = &self.bounds;
        FieldSample {
            sdf: sdf_eval(self, x),
            density: density_eval(self, x),
            normal: normal_at(self, x),
            diffuse: self.materials.diffuse.eval(x, b),
            tint: self.materials.tint.eval(x, b),
            weights: self.materials.weights.eval(x, b),
            metallic: self.materials.metallic.eval(x, b),
        }
    }

    pub fn has_surface(&self) -> bool {
        !self.surface.is_empty()
    }

    pub fn has_volume(&self) -> bool {
        !self.volume.is_empty()
    }
}
