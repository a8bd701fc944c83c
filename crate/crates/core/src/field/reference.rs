//! Brute-force hybrid raymarcher over the analytic fields.

use rayon::prelude::*;

use super::neus::{hybrid_alpha, neus_alpha};
use super::scene::SceneDescription;
use crate::image::ImageRGBA;
use crate::math::{ray_box_intersect, CameraPose, Ray, Vec3};
use crate::refbasis::{shade_with, AttenuationModel, MaterialSample, SpecularBasis};

pub const DEFAULT_REFERENCE_STEPS: usize = 512;

/// Marching stops once transmittance falls below this.
const REFERENCE_MIN_TRANSMITTANCE: f64 = 1e-10;

/// Shading straight from the scene's analytic environment and attenuation
/// definitions, with no cube-map or table discretization.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticAppearance<'a>(pub &'a SceneDescription);

impl SpecularBasis for AnalyticAppearance<'_> {
    fn base_color(&self, basis: usize, dir: Vec3) -> Vec3 {
        self.0.env[basis].eval(dir)
    }
}

impl AttenuationModel for AnalyticAppearance<'_> {
    fn attenuation(&self, cos_theta: f64, metallic: f64) -> f64 {
        self.0.lut_kind.attenuation(cos_theta, metallic)
    }
}

/// Premultiplied RGBA for one ray, marching `steps` equal intervals across
/// the scene bounds.
pub fn reference_ray(scene: &SceneDescription, ray: &Ray, steps: usize) -> [f64; 4] {
    assert!(steps >= 2, "reference marcher needs at least 2 steps");
    let Some((t_near, t_far)) = ray_box_intersect(ray, &scene.bounds) else {
        return [0.0; 4];
    };
    if t_far <= t_near {
        return [0.0; 4];
    }
    let appearance = AnalyticAppearance(scene);
    let has_surface = scene.has_surface();
    let delta = (t_far - t_near) / steps as f64;
    let omega_o = -ray.direction;
    let mut transmittance = 1.0;
    let mut color = Vec3::ZERO;
    let mut opacity = 0.0;
    let mut d_prev = if has_surface { scene.sdf(ray.at(t_near)) } else { 0.0 };
    for i in 0..steps {
        let ta = t_near + i as f64 * delta;
        let tb = t_near + (i + 1) as f64 * delta;
        let alpha_surf = if has_surface {
            let d_next = scene.sdf(ray.at(tb));
            let a = neus_alpha(d_prev, d_next, scene.sharpness);
            d_prev = d_next;
            a
        } else {
            0.0
        };
        let mid = ray.at(0.5 * (ta + tb));
        let sigma = scene.density(mid);
        let alpha_vol = 1.0 - (-sigma * delta).exp();
        let alpha = hybrid_alpha(alpha_surf, alpha_vol);
        if alpha > 0.0 {
            let sample = scene.sample(mid);
            let c = shade_with(&MaterialSample::from(&sample), omega_o, &appearance, &appearance);
            let w = transmittance * alpha;
            color += c * w;
            opacity += w;
            transmittance *= 1.0 - alpha;
            if transmittance < REFERENCE_MIN_TRANSMITTANCE {
                break;
            }
        }
    }
    [color.x, color.y, color.z, opacity]
}

/// Renders premultiplied RGBA over a transparent background.
pub fn render_reference(scene: &SceneDescription, cam: &CameraPose, steps: usize) -> ImageRGBA {
    let basis = cam.basis();
    let (w, h) = (cam.width, cam.height);
    let pixels: Vec<[f32; 4]> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let basis = &basis;
            (0..w).map(move |x| {
                let c = reference_ray(scene, &basis.pixel_ray(x, y), steps);
                [c[0] as f32, c[1] as f32, c[2] as f32, c[3] as f32]
            })
        })
        .collect();
    ImageRGBA::new_float(w, h, pixels).expect("pixel count matches camera size")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ColorField, DensityElement, SdfPrimitive};
    use crate::refbasis::tone_map;

    fn cam(size: u32) -> CameraPose {
        CameraPose::new(
            Vec3::new(0.0, 0.0, 3.0),
            Vec3::ZERO,
            Vec3::Y,
            40.0,
            size,
            size,
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_is_transparent() {
        let scene = SceneDescription::simple(vec![], vec![]);
        let img = render_reference(&scene, &cam(16), 32);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(img.get(x, y), [0.0; 4]);
            }
        }
    }

    #[test]
    fn opaque_sphere_collapses_to_diffuse() {
        let mut scene = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::ZERO,
                radius: 0.5,
            }],
            vec![],
        );
        let cd = Vec3::new(0.5, 0.2, 0.2);
        scene.materials.diffuse = ColorField::Constant(cd);
        let expect = tone_map(cd);
        let img = render_reference(&scene, &cam(24), DEFAULT_REFERENCE_STEPS);
        let mut covered = 0;
        for y in 0..24 {
            for x in 0..24 {
                let p = img.get(x, y);
                if p[3] > 1.0 - 1e-6 {
                    covered += 1;
                    for ch in 0..3 {
                        assert!((p[ch] - expect[ch]).abs() < 1e-6);
                    }
                }
            }
        }
        assert!(covered > 50);
    }

    #[test]
    fn slab_follows_beer_lambert() {
        let (sigma, thickness) = (3.0, 0.5);
        let scene = SceneDescription::simple(
            vec![],
            vec![DensityElement::Slab {
                axis: 2,
                min: -0.25,
                max: 0.25,
                density: sigma,
            }],
        );
        let dir = Vec3::new(0.3, 0.2, -1.0).normalize();
        let ray = Ray::new(Vec3::new(0.0, 0.0, 2.0), dir);
        let path = thickness / dir.z.abs();
        let expect = 1.0 - (-sigma * path).exp();
        let got = reference_ray(&scene, &ray, 512)[3];
        assert!((got - expect).abs() <= 0.01 * expect, "{got} vs {expect}");
    }

    #[test]
    fn deterministic() {
        let scene = crate::field::parse_scene(crate::scenes::HYBRID_DEMO).unwrap();
        let a = render_reference(&scene, &cam(12), 64);
        let b = render_reference(&scene, &cam(12), 64);
        assert_eq!(a, b);
    }
}
