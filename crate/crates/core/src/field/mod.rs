//! Analytic scene fields: the scene DSL, signed distance / density /
//! material evaluation, opacity conversions, and the brute-force hybrid
//! raymarcher used as the correctness oracle.

mod neus;
mod parse;
mod reference;
mod scene;
mod sdf;

pub use neus::{
    hybrid_alpha, neus_alpha, neus_opaque_density, opaque_density_along, sigmoid_phi,
    volume_render, Composited,
};
pub use parse::{parse_scene, ParseError, ParseErrorKind};
pub use reference::{render_reference, AnalyticAppearance, DEFAULT_REFERENCE_STEPS};
pub use scene::*;
pub use sdf::{density_eval, normal_at, sdf_eval, sdf_gradient, SdfGradient, GRADIENT_STEP};

use crate::math::{Aabb, Vec3};

impl SceneDescription {
    /// A scene with the given geometry and neutral defaults elsewhere:
    /// grey diffuse, no specular tint, white first basis map, Schlick LUT.
    pub fn simple(surface: Vec<SdfPrimitive>, volume: Vec<DensityElement>) -> Self {
        SceneDescription {
            bounds: Aabb::unit_cube(),
            sharpness: 2000.0,
            surface: surface
                .into_iter()
                .map(|primitive| SurfaceNode {
                    primitive,
                    op: CsgOp::Union,
                })
                .collect(),
            volume,
            materials: Materials {
                diffuse: ColorField::Constant(Vec3::splat(0.5)),
                tint: ColorField::Constant(Vec3::ZERO),
                weights: WeightsField::Constant([1.0, 0.0, 0.0, 0.0]),
                metallic: ScalarField::Constant(0.0),
            },
            env: [
                EnvDef::Constant(Vec3::ONE),
                EnvDef::Constant(Vec3::ZERO),
                EnvDef::Constant(Vec3::ZERO),
                EnvDef::Constant(Vec3::ZERO),
            ],
            lut_kind: LutKind::Schlick,
        }
    }
}
