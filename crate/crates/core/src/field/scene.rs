use crate::math::{Aabb, Rgb, Vec3};

/// Number of RefBasis base environment maps / weights per point.
pub const N_BASIS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SdfPrimitive {
    Sphere { center: Vec3, radius: f64 },
    /// Axis-aligned box given by its half extents.
    Box { center: Vec3, half: Vec3 },
    /// Ring in the xz-plane around the y axis.
    Torus { center: Vec3, major: f64, minor: f64 },
    Capsule { from: Vec3, to: Vec3, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsgOp {
    #[default]
    Union,
    Intersect,
    Subtract,
}

/// A primitive and the operation folding it into everything listed before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceNode {
    pub primitive: SdfPrimitive,
    pub op: CsgOp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityElement {
    Blob {
        center: Vec3,
        radius: f64,
        density: f64,
    },
    Curve {
        from: Vec3,
        to: Vec3,
        radius: f64,
        density: f64,
    },
    Slab {
        axis: usize,
        min: f64,
        max: f64,
        density: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorField {
    Constant(Rgb),
    Checker { a: Rgb, b: Rgb, scale: f64 },
    Gradient { axis: usize, low: Rgb, high: Rgb },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    Gradient { axis: usize, low: f64, high: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightsField {
    Constant([f64; N_BASIS]),
    Gradient {
        axis: usize,
        low: [f64; N_BASIS],
        high: [f64; N_BASIS],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Materials {
    pub diffuse: ColorField,
    pub tint: ColorField,
    pub weights: WeightsField,
    pub metallic: ScalarField,
}

/// Analytic definition of one base environment map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvDef {
    Constant(Rgb),
    Gradient { axis: usize, low: Rgb, high: Rgb },
    Lobe { dir: Vec3, power: f64, color: Rgb },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LutKind {
    /// `m + (1 - m)(1 - cos)^5`.
    #[default]
    Schlick,
    /// No attenuation.
    One,
}

impl std::str::FromStr for LutKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "schlick" => Ok(LutKind::Schlick),
            "one" => Ok(LutKind::One),
            other => Err(format!("unknown attenuation model {other:?}")),
        }
    }
}

impl LutKind {
    pub fn name(self) -> &'static str {
        match self {
            LutKind::Schlick => "schlick",
            LutKind::One => "one",
        }
    }

    pub fn eval(self, cos_theta: f64, metallic: f64) -> f64 {
        match self {
            LutKind::Schlick => metallic + (1.0 - metallic) * (1.0 - cos_theta).powi(5),
            LutKind::One => 1.0,
        }
    }
}

/// Parsed analytic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub bounds: Aabb,
    pub sharpness: f64,
    pub surface: Vec<SurfaceNode>,
    pub volume: Vec<DensityElement>,
    pub materials: Materials,
    pub env: [EnvDef; N_BASIS],
    pub lut_kind: LutKind,
}

/// Everything the shading model needs at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub sdf: f64,
    pub density: f64,
    pub normal: Vec3,
    pub diffuse: Rgb,
    pub tint: Rgb,
    pub weights: [f64; N_BASIS],
    pub metallic: f64,
}

/// Density profile falloff: `exp(-FALLOFF * (d / r)^2)` inside radius `r`.
pub(crate) const FALLOFF: f64 = 4.5;

fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.length_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).length()
}

impl SdfPrimitive {
    pub fn distance(&self, p: Vec3) -> f64 {
        match *self {
            SdfPrimitive::Sphere { center, radius } => (p - center).length() - radius,
            SdfPrimitive::Box { center, half } => {
                let q = (p - center).abs() - half;
                q.max(Vec3::ZERO).length() + q.max_component().min(0.0)
            }
            SdfPrimitive::Torus {
                center,
                major,
                minor,
            } => {
                let d = p - center;
                let ring = (d.x * d.x + d.z * d.z).sqrt() - major;
                (ring * ring + d.y * d.y).sqrt() - minor
            }
            SdfPrimitive::Capsule { from, to, radius } => segment_distance(p, from, to) - radius,
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match *self {
            SdfPrimitive::Sphere { center, radius } => {
                Aabb::new(center - Vec3::splat(radius), center + Vec3::splat(radius))
            }
            SdfPrimitive::Box { center, half } => Aabb::new(center - half, center + half),
            SdfPrimitive::Torus {
                center,
                major,
                minor,
            } => {
                let e = Vec3::new(major + minor, minor, major + minor);
                Aabb::new(center - e, center + e)
            }
            SdfPrimitive::Capsule { from, to, radius } => Aabb::new(
                from.min(to) - Vec3::splat(radius),
                from.max(to) + Vec3::splat(radius),
            ),
        }
    }
}

impl DensityElement {
    pub fn density(&self, p: Vec3) -> f64 {
        let profile = |d: f64, r: f64, rho: f64| {
            if d < r {
                let u = d / r;
                rho * (-FALLOFF * u * u).exp()
            } else {
                0.0
            }
        };
        match *self {
            DensityElement::Blob {
                center,
                radius,
                density,
            } => profile((p - center).length(), radius, density),
            DensityElement::Curve {
                from,
                to,
                radius,
                density,
            } => profile(segment_distance(p, from, to), radius, density),
            DensityElement::Slab {
                axis,
                min,
                max,
                density,
            } => {
                let v = p[axis];
                if v >= min && v < max {
                    density
                } else {
                    0.0
                }
            }
        }
    }

    /// Region outside of which the element's density is zero.
    pub fn support(&self, bounds: &Aabb) -> Aabb {
        match *self {
            DensityElement::Blob { center, radius, .. } => {
                Aabb::new(center - Vec3::splat(radius), center + Vec3::splat(radius))
            }
            DensityElement::Curve {
                from, to, radius, ..
            } => Aabb::new(
                from.min(to) - Vec3::splat(radius),
                from.max(to) + Vec3::splat(radius),
            ),
            DensityElement::Slab { axis, min, max, .. } => {
                let mut lo = bounds.min.to_array();
                let mut hi = bounds.max.to_array();
                lo[axis] = min;
                hi[axis] = max;
                Aabb::new(Vec3::from_array(lo), Vec3::from_array(hi))
            }
        }
    }

    pub fn peak_density(&self) -> f64 {
        match *self {
            DensityElement::Blob { density, .. }
            | DensityElement::Curve { density, .. }
            | DensityElement::Slab { density, .. } => density,
        }
    }
}

fn axis_t(p: Vec3, axis: usize, bounds: &Aabb) -> f64 {
    let lo = bounds.min[axis];
    let hi = bounds.max[axis];
    ((p[axis] - lo) / (hi - lo)).clamp(0.0, 1.0)
}

impl ColorField {
    pub fn eval(&self, p: Vec3, bounds: &Aabb) -> Rgb {
        match *self {
            ColorField::Constant(c) => c,
            ColorField::Checker { a, b, scale } => {
                let cell = (p.x * scale).floor() + (p.y * scale).floor() + (p.z * scale).floor();
                if (cell as i64).rem_euclid(2) == 0 {
                    a
                } else {
                    b
                }
            }
            ColorField::Gradient { axis, low, high } => low.lerp(high, axis_t(p, axis, bounds)),
        }
    }
}

impl ScalarField {
    pub fn eval(&self, p: Vec3, bounds: &Aabb) -> f64 {
        match *self {
            ScalarField::Constant(v) => v,
            ScalarField::Gradient { axis, low, high } => {
                low + (high - low) * axis_t(p, axis, bounds)
            }
        }
    }
}

impl WeightsField {
    pub fn eval(&self, p: Vec3, bounds: &Aabb) -> [f64; N_BASIS] {
        match *self {
            WeightsField::Constant(w) => w,
            WeightsField::Gradient { axis, low, high } => {
                let t = axis_t(p, axis, bounds);
                std::array::from_fn(|i| low[i] + (high[i] - low[i]) * t)
            }
        }
    }
}

impl EnvDef {
    /// Base specular color seen along unit direction `dir`.
    pub fn eval(&self, dir: Vec3) -> Rgb {
        match *self {
            EnvDef::Constant(c) => c,
            EnvDef::Gradient { axis, low, high } => low.lerp(high, (dir[axis] + 1.0) * 0.5),
            EnvDef::Lobe { dir: d, power, color } => color * d.dot(dir).max(0.0).powf(power),
        }
    }
}
