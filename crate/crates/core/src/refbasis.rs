//! The RefBasis appearance model.
//!
//! A point's color is `tone_map(c_d + s * A(cos, m) * c_s(w_r))`: a diffuse
//! color plus a tinted specular color that depends only on the reflected
//! direction `w_r`. The specular color is a per-point weighted sum of
//! [`N_BASIS`] base colors, each read from a base environment cube map, and
//! `A` is a Fresnel-like attenuation looked up from a 2D table over the
//! incidence cosine and a per-point metallic value.

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{EnvDef, LutKind, SceneDescription, N_BASIS};
use crate::math::{Rgb, Vec3};
use crate::texture::{lerp, texel_span};

/// Default cube-map face edge in texels.
pub const DEFAULT_ENV_EDGE: usize = 512;
/// Default attenuation table resolution.
pub const DEFAULT_LUT_SIZE: usize = 256;

/// Face order of every cube map.
pub const FACE_ORDER: [&str; 6] = ["+X", "-X", "+Y", "-Y", "+Z", "-Z"];

#[derive(Debug, Error, PartialEq)]
pub enum RefBasisError {
    #[error("attenuation table size must be at least 2, got {0}")]
    LutTooSmall(usize),
    #[error("cube map edge must be at least 1")]
    EmptyCubeMap,
    #[error("expected {expected} values, found {found}")]
    BadLength { expected: usize, found: usize },
}

/// Per-point appearance parameters: 11 scalar features plus the normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSample {
    pub diffuse: Rgb,
    pub tint: Rgb,
    pub weights: [f64; N_BASIS],
    pub metallic: f64,
    pub normal: Vec3,
}

impl MaterialSample {
    /// Number of scalar material features (diffuse 3, tint 3, weights 4, metallic 1).
    pub const FEATURES: usize = 3 + 3 + N_BASIS + 1;
}

impl From<&crate::field::FieldSample> for MaterialSample {
    fn from(s: &crate::field::FieldSample) -> Self {
        MaterialSample {
            diffuse: s.diffuse,
            tint: s.tint,
            weights: s.weights,
            metallic: s.metallic,
            normal: s.normal,
        }
    }
}

/// Mirror of the view direction `omega_o` (pointing toward the viewer)
/// about the normal `n`.
#[inline]
pub fn reflect(omega_o: Vec3, n: Vec3) -> Vec3 {
    n * (2.0 * omega_o.dot(n)) - omega_o
}

/// Clamp to `[0, 1]` followed by the sRGB transfer curve.
#[inline]
pub fn tone_map(c: Rgb) -> Rgb {
    c.map(|v| {
        let l = v.clamp(0.0, 1.0);
        if l <= 0.003_130_8 {
            12.92 * l
        } else {
            1.055 * l.powf(1.0 / 2.4) - 0.055
        }
    })
}

/// `sum_i w_i c_i`, clamped to `[0, 1]`.
#[inline]
pub fn specular_color(weights: &[f64; N_BASIS], base_colors: &[Rgb; N_BASIS]) -> Rgb {
    let mut c = Vec3::ZERO;
    for (w, b) in weights.iter().zip(base_colors) {
        if *w != 0.0 {
            c += *b * *w;
        }
    }
    c.clamp01()
}

/// Source of base specular colors by reflected direction.
pub trait SpecularBasis {
    fn base_color(&self, basis: usize, dir: Vec3) -> Rgb;
}

/// Source of the attenuation factor.
pub trait AttenuationModel {
    fn attenuation(&self, cos_theta: f64, metallic: f64) -> f64;
}

impl SpecularBasis for [EnvDef; N_BASIS] {
    fn base_color(&self, basis: usize, dir: Vec3) -> Rgb {
        self[basis].eval(dir)
    }
}

impl AttenuationModel for LutKind {
    fn attenuation(&self, cos_theta: f64, metallic: f64) -> f64 {
        self.eval(cos_theta.clamp(0.0, 1.0), metallic.clamp(0.0, 1.0))
    }
}

/// Shades one point with any basis/attenuation source.
pub fn shade_with<B, A>(mat: &MaterialSample, omega_o: Vec3, basis: &B, att: &A) -> Rgb
where
    B: SpecularBasis + ?Sized,
    A: AttenuationModel + ?Sized,
{
    if mat.tint == Vec3::ZERO {
        return tone_map(mat.diffuse);
    }
    let n = mat.normal;
    let w_r = reflect(omega_o, n);
    let cos_theta = omega_o.dot(n).clamp(0.0, 1.0);
    let a = att.attenuation(cos_theta, mat.metallic);
    let mut bases = [Vec3::ZERO; N_BASIS];
    for (i, b) in bases.iter_mut().enumerate() {
        if mat.weights[i] != 0.0 {
            *b = basis.base_color(i, w_r);
        }
    }
    let cs = specular_color(&mat.weights, &bases);
    tone_map(mat.diffuse + mat.tint.mul_elem(cs * a))
}

/// Shades one point from the baked cube maps and attenuation table.
pub fn shade(mat: &MaterialSample, omega_o: Vec3, maps: &CubeMapSet, lut: &AttenuationLut) -> Rgb {
    shade_with(mat, omega_o, maps, lut)
}

/// N_BASIS cube maps, each 6 square RGB faces of edge `edge`, stored as a
/// vertical strip: face `f`, row `y`, column `x` lives at
/// `((f * edge + y) * edge + x) * 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeMapSet {
    pub edge: usize,
    pub maps: Vec<Vec<f32>>,
}

/// Face index and face coordinates `(s, t)` in `[-1, 1]` for a direction.
#[inline]
pub fn cube_face_coords(d: Vec3) -> (usize, f64, f64) {
    let a = d.abs();
    if a.x >= a.y && a.x >= a.z {
        if d.x >= 0.0 {
            (0, -d.z / a.x, -d.y / a.x)
        } else {
            (1, d.z / a.x, -d.y / a.x)
        }
    } else if a.y >= a.z {
        if d.y >= 0.0 {
            (2, d.x / a.y, d.z / a.y)
        } else {
            (3, d.x / a.y, -d.z / a.y)
        }
    } else if d.z >= 0.0 {
        (4, d.x / a.z, -d.y / a.z)
    } else {
        (5, -d.x / a.z, -d.y / a.z)
    }
}

/// Inverse of [`cube_face_coords`] (unnormalized direction).
#[inline]
pub fn cube_face_direction(face: usize, s: f64, t: f64) -> Vec3 {
    match face {
        0 => Vec3::new(1.0, -t, -s),
        1 => Vec3::new(-1.0, -t, s),
        2 => Vec3::new(s, 1.0, t),
        3 => Vec3::new(s, -1.0, -t),
        4 => Vec3::new(s, -t, 1.0),
        5 => Vec3::new(-s, -t, -1.0),
        _ => panic!("cube face {face} out of range"),
    }
}

impl CubeMapSet {
    pub fn new(edge: usize, maps: Vec<Vec<f32>>) -> Result<Self, RefBasisError> {
        if edge == 0 {
            return Err(RefBasisError::EmptyCubeMap);
        }
        let expected = 6 * edge * edge * 3;
        for m in &maps {
            if m.len() != expected {
                return Err(RefBasisError::BadLength {
                    expected,
                    found: m.len(),
                });
            }
        }
        if maps.len() != N_BASIS {
            return Err(RefBasisError::BadLength {
                expected: N_BASIS,
                found: maps.len(),
            });
        }
        Ok(Self { edge, maps })
    }

    #[inline]
    pub fn texel(&self, basis: usize, face: usize, x: usize, y: usize) -> Rgb {
        let i = ((face * self.edge + y) * self.edge + x) * 3;
        let m = &self.maps[basis];
        Vec3::new(m[i] as f64, m[i + 1] as f64, m[i + 2] as f64)
    }
}

/// Bilinear cube-map lookup with per-face edge clamping.
pub fn sample_cubemap(maps: &CubeMapSet, basis: usize, dir: Vec3) -> Rgb {
    let (face, s, t) = cube_face_coords(dir);
    let e = maps.edge;
    let fx = (s + 1.0) * 0.5 * e as f64 - 0.5;
    let fy = (t + 1.0) * 0.5 * e as f64 - 0.5;
    let (x0, x1, tx) = texel_span(fx, e);
    let (y0, y1, ty) = texel_span(fy, e);
    let c00 = maps.texel(basis, face, x0, y0);
    let c10 = maps.texel(basis, face, x1, y0);
    let c01 = maps.texel(basis, face, x0, y1);
    let c11 = maps.texel(basis, face, x1, y1);
    let top = c00.lerp(c10, tx);
    let bottom = c01.lerp(c11, tx);
    top.lerp(bottom, ty)
}

impl SpecularBasis for CubeMapSet {
    fn base_color(&self, basis: usize, dir: Vec3) -> Rgb {
        sample_cubemap(self, basis, dir)
    }
}

/// Evaluates every environment definition at every texel-center direction.
pub fn bake_env_maps(scene: &SceneDescription, edge: usize) -> Result<CubeMapSet, RefBasisError> {
    if edge == 0 {
        return Err(RefBasisError::EmptyCubeMap);
    }
    let maps = scene
        .env
        .par_iter()
        .map(|env| {
            let mut data = Vec::with_capacity(6 * edge * edge * 3);
            for face in 0..6 {
                for y in 0..edge {
                    let t = (y as f64 + 0.5) / edge as f64 * 2.0 - 1.0;
                    for x in 0..edge {
                        let s = (x as f64 + 0.5) / edge as f64 * 2.0 - 1.0;
                        let c = env.eval(cube_face_direction(face, s, t).normalize());
                        data.extend_from_slice(&[c.x as f32, c.y as f32, c.z as f32]);
                    }
                }
            }
            data
        })
        .collect();
    CubeMapSet::new(edge, maps)
}

/// 2D attenuation table over `(cos theta, metallic)`, both on `[0, 1]`.
/// Entry `(u, v)` is stored at `v * size + u`, so `u` runs along image rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationLut {
    pub size: usize,
    pub table: Vec<f32>,
}

impl AttenuationLut {
    pub fn new(size: usize, table: Vec<f32>) -> Result<Self, RefBasisError> {
        if size < 2 {
            return Err(RefBasisError::LutTooSmall(size));
        }
        if table.len() != size * size {
            return Err(RefBasisError::BadLength {
                expected: size * size,
                found: table.len(),
            });
        }
        Ok(Self { size, table })
    }

    #[inline]
    pub fn node(&self, u: usize, v: usize) -> f64 {
        self.table[v * self.size + u] as f64
    }
}

pub fn bake_attenuation_lut(kind: LutKind, size: usize) -> Result<AttenuationLut, RefBasisError> {
    if size < 2 {
        return Err(RefBasisError::LutTooSmall(size));
    }
    let step = 1.0 / (size - 1) as f64;
    let mut table = Vec::with_capacity(size * size);
    for v in 0..size {
        for u in 0..size {
            table.push(kind.eval(u as f64 * step, v as f64 * step) as f32);
        }
    }
    AttenuationLut::new(size, table)
}

/// Bilinear table lookup; inputs are clamped to `[0, 1]`.
pub fn attenuation(lut: &AttenuationLut, cos_theta: f64, m: f64) -> f64 {
    let scale = (lut.size - 1) as f64;
    let (u0, u1, tu) = texel_span(cos_theta.clamp(0.0, 1.0) * scale, lut.size);
    let (v0, v1, tv) = texel_span(m.clamp(0.0, 1.0) * scale, lut.size);
    let a = lerp(lut.node(u0, v0), lut.node(u1, v0), tu);
    let b = lerp(lut.node(u0, v1), lut.node(u1, v1), tu);
    lerp(a, b, tv)
}

impl AttenuationModel for AttenuationLut {
    fn attenuation(&self, cos_theta: f64, metallic: f64) -> f64 {
        attenuation(self, cos_theta, metallic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn unit(v: Vec3) -> Vec3 {
        v.normalize()
    }

    #[test]
    fn reflect_cases() {
        let n = unit(Vec3::new(0.2, 0.9, -0.1));
        assert_abs_diff_eq!((reflect(n, n) - n).length(), 0.0, epsilon = 1e-12);
        let perp = unit(n.cross(Vec3::X));
        assert_abs_diff_eq!((reflect(perp, n) + perp).length(), 0.0, epsilon = 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = reflect(Vec3::new(0.0, h, h), Vec3::Z);
        assert_abs_diff_eq!((r - Vec3::new(0.0, -h, h)).length(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tone_map_values() {
        assert_eq!(tone_map(Vec3::ZERO), Vec3::ZERO);
        assert_abs_diff_eq!(tone_map(Vec3::ONE).x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tone_map(Vec3::splat(0.5)).x, 0.735_356_983, epsilon = 1e-8);
        assert_eq!(tone_map(Vec3::splat(2.0)), tone_map(Vec3::ONE));
    }

    #[test]
    fn specular_color_cases() {
        let red = Vec3::X;
        let blue = Vec3::Z;
        let bases = [red, blue, Vec3::Y, Vec3::ONE];
        assert_eq!(specular_color(&[1.0, 0.0, 0.0, 0.0], &bases), red);
        let c = Vec3::new(0.2, 0.4, 0.6);
        let s = specular_color(&[0.1, 0.2, 0.3, 0.4], &[c; 4]);
        assert_abs_diff_eq!((s - c).length(), 0.0, epsilon = 1e-12);
        assert_eq!(
            specular_color(&[0.5, 0.5, 0.0, 0.0], &bases),
            Vec3::new(0.5, 0.0, 0.5)
        );
    }

    fn constant_scene(c: Rgb) -> SceneDescription {
        let mut s = SceneDescription::simple(vec![], vec![]);
        s.env = [EnvDef::Constant(c); N_BASIS];
        s
    }

    #[test]
    fn constant_face_and_constant_env() {
        let c = Vec3::new(0.25, 0.5, 0.75);
        let maps = bake_env_maps(&constant_scene(c), 7).unwrap();
        let expect = Vec3::new(0.25f32 as f64, 0.5f32 as f64, 0.75f32 as f64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if d.length() < 1e-6 {
                continue;
            }
            for b in 0..N_BASIS {
                assert_eq!(sample_cubemap(&maps, b, d.normalize()), expect);
            }
        }
        assert_eq!(sample_cubemap(&maps, 0, Vec3::ONE.normalize()), expect);
    }

    #[test]
    fn axis_hits_face_center() {
        let mut s = constant_scene(Vec3::ZERO);
        s.env[0] = EnvDef::Lobe {
            dir: Vec3::X,
            power: 3.0,
            color: Vec3::ONE,
        };
        let maps = bake_env_maps(&s, 9).unwrap();
        let center = maps.texel(0, 0, 4, 4);
        assert_eq!(sample_cubemap(&maps, 0, Vec3::X), center);
    }

    #[test]
    fn red_plus_z_face() {
        let mut data = vec![0.0f32; 6 * 4 * 4 * 3];
        for i in 0..16 {
            data[(4 * 16 + i) * 3] = 1.0;
        }
        let maps = CubeMapSet::new(4, vec![data.clone(), data.clone(), data.clone(), data]).unwrap();
        assert_eq!(sample_cubemap(&maps, 2, Vec3::Z), Vec3::X);
    }

    #[test]
    fn gradient_env_endpoints() {
        let mut s = constant_scene(Vec3::ZERO);
        let low = Vec3::new(0.0, 0.1, 0.2);
        let high = Vec3::new(1.0, 0.9, 0.8);
        s.env[1] = EnvDef::Gradient { axis: 2, low, high };
        let maps = bake_env_maps(&s, 64).unwrap();
        let top = sample_cubemap(&maps, 1, Vec3::Z);
        let bottom = sample_cubemap(&maps, 1, -Vec3::Z);
        assert_abs_diff_eq!((top - high).length(), 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!((bottom - low).length(), 0.0, epsilon = 1e-3);
    }

    #[test]
    fn lobe_peak_on_plus_z_center() {
        let mut s = constant_scene(Vec3::ZERO);
        s.env[2] = EnvDef::Lobe {
            dir: Vec3::Z,
            power: 8.0,
            color: Vec3::ONE,
        };
        let e = 16;
        let maps = bake_env_maps(&s, e).unwrap();
        let mut best = (f64::MIN, 0, 0, 0);
        for face in 0..6 {
            for y in 0..e {
                for x in 0..e {
                    let v = maps.texel(2, face, x, y).x;
                    if v > best.0 {
                        best = (v, face, x, y);
                    }
                }
            }
        }
        assert_eq!(best.1, 4);
        // the four central texels of an even face tie; the scan keeps the first
        assert_eq!((best.2, best.3), (e / 2 - 1, e / 2 - 1));
    }

    #[test]
    fn schlick_lut_values() {
        let lut = bake_attenuation_lut(LutKind::Schlick, 256).unwrap();
        assert_abs_diff_eq!(attenuation(&lut, 1.0, 0.04), 0.04, epsilon = 1e-6);
        assert_eq!(attenuation(&lut, 0.0, 0.3), 1.0);
        assert_eq!(attenuation(&lut, 1.0, 1.0), 1.0);
        assert_eq!(attenuation(&lut, 1.0, 0.0), 0.0);
        let small = bake_attenuation_lut(LutKind::Schlick, 3).unwrap();
        assert_abs_diff_eq!(small.node(1, 0), 0.03125, epsilon = 1e-9);
        for v in 0..3 {
            for u in 0..3 {
                let q = attenuation(&small, u as f64 / 2.0, v as f64 / 2.0);
                assert_eq!(q, small.node(u, v));
            }
        }
    }

    #[test]
    fn lut_errors() {
        assert_eq!(
            bake_attenuation_lut(LutKind::Schlick, 1),
            Err(RefBasisError::LutTooSmall(1))
        );
        assert!("ggx".parse::<LutKind>().is_err());
    }

    #[test]
    fn lut_close_to_analytic() {
        let lut = bake_attenuation_lut(LutKind::Schlick, 256).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            for j in 0..=40 {
                let c = i as f64 / 400.0;
                let m = j as f64 / 40.0;
                worst = worst.max((attenuation(&lut, c, m) - LutKind::Schlick.eval(c, m)).abs());
            }
        }
        assert!(worst <= 1e-3, "max LUT error {worst}");
    }

    fn sample_mat(diffuse: Rgb, tint: Rgb) -> MaterialSample {
        MaterialSample {
            diffuse,
            tint,
            weights: [0.4, 0.3, 0.2, 0.1],
            metallic: 0.3,
            normal: unit(Vec3::new(0.3, 0.8, 0.2)),
        }
    }

    #[test]
    fn zero_tint_is_diffuse_only() {
        let s = constant_scene(Vec3::ONE);
        let maps = bake_env_maps(&s, 4).unwrap();
        let lut = bake_attenuation_lut(LutKind::Schlick, 8).unwrap();
        let m = sample_mat(Vec3::new(0.5, 0.2, 0.2), Vec3::ZERO);
        assert_eq!(shade(&m, Vec3::Z, &maps, &lut), tone_map(m.diffuse));
    }

    #[test]
    fn pure_white_specular() {
        let s = constant_scene(Vec3::ONE);
        let maps = bake_env_maps(&s, 4).unwrap();
        let lut = bake_attenuation_lut(LutKind::One, 4).unwrap();
        let mut m = sample_mat(Vec3::ZERO, Vec3::ONE);
        m.weights = [1.0, 0.0, 0.0, 0.0];
        let c = shade(&m, unit(Vec3::new(0.1, 1.0, 0.3)), &maps, &lut);
        assert_abs_diff_eq!((c - Vec3::ONE).length(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn shade_matches_stepwise_formula() {
        let scene = crate::field::parse_scene(crate::scenes::HYBRID_DEMO).unwrap();
        let maps = bake_env_maps(&scene, 32).unwrap();
        let lut = bake_attenuation_lut(scene.lut_kind, 64).unwrap();
        let x = Vec3::new(0.1, 0.45, 0.2);
        let fs = scene.sample(x);
        let mat = MaterialSample::from(&fs);
        let wo = unit(Vec3::new(0.2, 0.5, 1.0));
        // independent scalar evaluation
        let n = fs.normal;
        let d = wo.x * n.x + wo.y * n.y + wo.z * n.z;
        let wr = [2.0 * d * n.x - wo.x, 2.0 * d * n.y - wo.y, 2.0 * d * n.z - wo.z];
        let cos = d.clamp(0.0, 1.0);
        let a = attenuation(&lut, cos, fs.metallic);
        let wr = Vec3::from_array(wr);
        let mut out = [0.0; 3];
        for ch in 0..3 {
            let mut cs = 0.0;
            for b in 0..N_BASIS {
                cs += fs.weights[b] * sample_cubemap(&maps, b, wr)[ch];
            }
            let lin = fs.diffuse[ch] + fs.tint[ch] * a * cs.clamp(0.0, 1.0);
            let l = lin.clamp(0.0, 1.0);
            out[ch] = if l <= 0.0031308 {
                12.92 * l
            } else {
                1.055 * l.powf(1.0 / 2.4) - 0.055
            };
        }
        let got = shade(&mat, wo, &maps, &lut);
        for ch in 0..3 {
            assert_abs_diff_eq!(got[ch], out[ch], epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn reflect_properties(
            a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0,
            d in -1.0f64..1.0, e in -1.0f64..1.0, f in -1.0f64..1.0,
        ) {
            let wo = Vec3::new(a, b, c);
            let n = Vec3::new(d, e, f);
            prop_assume!(wo.length() > 1e-3 && n.length() > 1e-3);
            let (wo, n) = (wo.normalize(), n.normalize());
            let r = reflect(wo, n);
            prop_assert!((r.length() - 1.0).abs() < 1e-6);
            prop_assert!((r.dot(n) - wo.dot(n)).abs() < 1e-6);
            prop_assert!((reflect(r, n) - wo).length() < 1e-6);
        }

        #[test]
        fn shade_monotone_in_diffuse(base in 0.0f64..1.0, bump in 0.0f64..1.0, ch in 0usize..3) {
            let s = constant_scene(Vec3::splat(0.6));
            let maps = bake_env_maps(&s, 2).unwrap();
            let lut = bake_attenuation_lut(LutKind::Schlick, 4).unwrap();
            let lo = sample_mat(Vec3::splat(base), Vec3::splat(0.5));
            let mut hi = lo;
            let mut arr = hi.diffuse.to_array();
            arr[ch] = (arr[ch] + bump).min(1.0);
            hi.diffuse = Vec3::from_array(arr);
            let wo = Vec3::new(0.0, 0.6, 0.8);
            prop_assert!(shade(&hi, wo, &maps, &lut)[ch] >= shade(&lo, wo, &maps, &lut)[ch]);
        }
    }
}
