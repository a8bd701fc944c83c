//! Opacity conversions and the volume-rendering quadrature.

use super::scene::SceneDescription;
use super::sdf::sdf_eval;
use crate::math::{Ray, Rgb, Vec3};

/// Logistic sigmoid with slope `s`.
#[inline]
pub fn sigmoid_phi(x: f64, s: f64) -> f64 {
    1.0 / (1.0 + (-s * x).exp())
}

/// Discrete surface opacity between consecutive SDF samples `d_i`, `d_next`.
#[inline]
pub fn neus_alpha(d_i: f64, d_next: f64, s: f64) -> f64 {
    let phi_i = sigmoid_phi(d_i, s);
    let phi_next = sigmoid_phi(d_next, s);
    if phi_i <= 0.0 {
        // Both samples are deep inside; nothing left to absorb.
        return 0.0;
    }
    ((phi_i - phi_next) / phi_i).clamp(0.0, 1.0)
}

/// Opaque density of an SDF profile `f(t)` along a ray, using a central
/// difference of step `1e-4` in `t`.
pub fn opaque_density_along(f: impl Fn(f64) -> f64, t: f64, s: f64) -> f64 {
    const H: f64 = 1e-4;
    let phi = sigmoid_phi(f(t), s);
    if phi <= 0.0 {
        return 0.0;
    }
    let dphi_dt = (sigmoid_phi(f(t + H), s) - sigmoid_phi(f(t - H), s)) / (2.0 * H);
    (-dphi_dt / phi).max(0.0)
}

pub fn neus_opaque_density(scene: &SceneDescription, ray: &Ray, t: f64) -> f64 {
    opaque_density_along(|u| sdf_eval(scene, ray.at(u)), t, scene.sharpness)
}

/// Opacity of summed densities expressed through the component opacities.
#[inline]
pub fn hybrid_alpha(alpha_surf: f64, alpha_vol: f64) -> f64 {
    1.0 - (1.0 - alpha_surf) * (1.0 - alpha_vol)
}

/// Result of front-to-back compositing.
#[derive(Debug, Clone, PartialEq)]
pub struct Composited {
    pub color: Rgb,
    pub opacity: f64,
    pub weights: Vec<f64>,
}

/// `w_i = T_i * alpha_i`, `T_i = prod_{j<i} (1 - alpha_j)`; returns the
/// weighted color sum, the total weight and the weights.
pub fn volume_render(alphas: &[f64], colors: &[Rgb]) -> Composited {
    assert_eq!(alphas.len(), colors.len(), "one color per sample");
    let mut transmittance = 1.0;
    let mut color = Vec3::ZERO;
    let mut opacity = 0.0;
    let mut weights = Vec::with_capacity(alphas.len());
    for (&a, &c) in alphas.iter().zip(colors) {
        let w = transmittance * a;
        weights.push(w);
        color += c * w;
        opacity += w;
        transmittance *= 1.0 - a;
    }
    Composited {
        color,
        opacity,
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SdfPrimitive;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_values() {
        for s in [0.1, 1.0, 100.0, 1e4] {
            assert_eq!(sigmoid_phi(0.0, s), 0.5);
        }
        assert_eq!(sigmoid_phi(1e6, 10.0), 1.0);
        assert_eq!(sigmoid_phi(-1e6, 10.0), 0.0);
        assert_abs_diff_eq!(sigmoid_phi(0.01, 100.0), 0.731_058_578_630_004_9, epsilon = 1e-12);
    }

    #[test]
    fn neus_alpha_cases() {
        assert_eq!(neus_alpha(0.3, 0.3, 50.0), 0.0);
        assert_abs_diff_eq!(neus_alpha(0.1, -0.1, 1000.0), 1.0, epsilon = 1e-6);
        assert_eq!(neus_alpha(-0.1, 0.1, 1000.0), 0.0);
    }

    #[test]
    fn opaque_density_linear_profile() {
        // Oracle: Phi' = s Phi (1 - Phi), f' = -1, so rho = s (1 - Phi_s(0.1)).
        let s = 10.0;
        let oracle = s * (1.0 - sigmoid_phi(0.1, s));
        assert_abs_diff_eq!(oracle, 2.689_414_214, epsilon = 1e-8);
        let rho = opaque_density_along(|t| 0.1 - t, 0.0, s);
        assert_abs_diff_eq!(rho, oracle, epsilon = 1e-6);
    }

    #[test]
    fn opaque_density_clamps() {
        assert_eq!(opaque_density_along(|t| 0.1 + t, 0.0, 10.0), 0.0);
        assert_eq!(opaque_density_along(|_| 0.2, 0.0, 10.0), 0.0);
    }

    #[test]
    fn opaque_density_on_scene_ray() {
        // Big sphere whose surface is 0.1 ahead of the origin along +x:
        // f(t) = 0.1 - t exactly.
        let mut scene = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::new(10.1, 0.0, 0.0),
                radius: 10.0,
            }],
            vec![],
        );
        scene.sharpness = 10.0;
        let ray = Ray::new(Vec3::ZERO, Vec3::X);
        let rho = neus_opaque_density(&scene, &ray, 0.0);
        assert_abs_diff_eq!(rho, 10.0 * (1.0 - sigmoid_phi(0.1, 10.0)), epsilon = 1e-5);
        let away = Ray::new(Vec3::ZERO, -Vec3::X);
        assert_eq!(neus_opaque_density(&scene, &away, 0.0), 0.0);
    }

    #[test]
    fn hybrid_alpha_cases() {
        assert_eq!(hybrid_alpha(1.0, 0.37), 1.0);
        assert_eq!(hybrid_alpha(0.0, 0.37), 0.37);
        assert_eq!(hybrid_alpha(0.5, 0.5), 0.75);
    }

    #[test]
    fn volume_render_cases() {
        let one = volume_render(&[1.0], &[Vec3::ONE]);
        assert_eq!(one.weights, vec![1.0]);
        assert_eq!(one.opacity, 1.0);

        let empty = volume_render(&[0.0; 5], &[Vec3::ONE; 5]);
        assert!(empty.weights.iter().all(|&w| w == 0.0));
        assert_eq!(empty.opacity, 0.0);

        let half = volume_render(&[0.5, 0.5], &[Vec3::X, Vec3::Y]);
        assert_eq!(half.weights, vec![0.5, 0.25]);
        assert_eq!(half.opacity, 0.75);
        assert_eq!(half.color, Vec3::new(0.5, 0.25, 0.0));
    }

    proptest! {
        #[test]
        fn neus_alpha_in_unit_interval(a in -1e3f64..1e3, b in -1e3f64..1e3, s in 1e-3f64..1e5) {
            let alpha = neus_alpha(a, b, s);
            prop_assert!((0.0..=1.0).contains(&alpha));
        }

        #[test]
        fn summed_density_matches_hybrid(ss in 0.0f64..50.0, sv in 0.0f64..50.0, d in 0.0f64..1.0) {
            let lhs = 1.0 - (-(ss + sv) * d).exp();
            let rhs = hybrid_alpha(1.0 - (-ss * d).exp(), 1.0 - (-sv * d).exp());
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn weights_and_transmittance_sum_to_one(alphas in proptest::collection::vec(0.0f64..=1.0, 1..64)) {
            let colors = vec![Vec3::ONE; alphas.len()];
            let out = volume_render(&alphas, &colors);
            let t: f64 = alphas.iter().map(|a| 1.0 - a).product();
            prop_assert!((out.opacity + t - 1.0).abs() <= 1e-9);
        }
    }
}
