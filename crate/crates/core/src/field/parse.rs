//! Line-oriented scene DSL.
//!
//! ```text
//! scene {
//!   bounds -1 1
//!   sharpness 2000
//!   surface {
//!     primitive sphere center 0 0 0 radius 0.5
//!     primitive box center 0 0 0 half 0.3 0.3 0.3 op subtract
//!   }
//!   volume {
//!     curve from 0 0 0 to 0 0.9 0 radius 0.05 density 40
//!   }
//!   material {
//!     diffuse constant 0.5 0.2 0.2
//!     tint constant 0.3 0.3 0.3
//!     weights constant 1 0 0 0
//!     metallic constant 0.1
//!   }
//!   env {
//!     map 0 constant 1 1 1
//!     map 1 gradient axis y low 0 0 0 high 1 1 1
//!     map 2 lobe dir 0 1 0 power 8 color 1 0.9 0.8
//!     map 3 constant 0 0 0
//!   }
//!   lut schlick
//! }
//! ```

use std::fmt;

use thiserror::Error;

use super::scene::*;
use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownKeyword(String),
    OutOfRange(String),
    MissingBlock(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownKeyword(k) => write!(f, "unknown keyword {k:?}"),
            ParseErrorKind::OutOfRange(m) => write!(f, "parameter out of range: {m}"),
            ParseErrorKind::MissingBlock(b) => write!(f, "missing required block or statement `{b}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based; 0 when the error concerns the whole document.
    pub line: usize,
    pub kind: ParseErrorKind,
}

type PResult<T> = Result<T, ParseError>;

struct Cursor<'a> {
    line: usize,
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError {
            line: self.line,
            kind,
        })
    }

    fn next(&mut self, what: &str) -> PResult<&'a str> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => self.err(ParseErrorKind::Syntax(format!("expected {what}, found end of line"))),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let t = self.next(kw)?;
        if t != kw {
            return self.err(ParseErrorKind::Syntax(format!("expected `{kw}`, found {t:?}")));
        }
        Ok(())
    }

    fn num(&mut self) -> PResult<f64> {
        let t = self.next("number")?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(ParseErrorKind::Syntax(format!("expected number, found {t:?}"))),
        }
    }

    fn vec3(&mut self) -> PResult<Vec3> {
        Ok(Vec3::new(self.num()?, self.num()?, self.num()?))
    }

    fn kw_num(&mut self, kw: &str) -> PResult<f64> {
        self.keyword(kw)?;
        self.num()
    }

    fn kw_vec3(&mut self, kw: &str) -> PResult<Vec3> {
        self.keyword(kw)?;
        self.vec3()
    }

    fn positive(&mut self, kw: &str) -> PResult<f64> {
        let v = self.kw_num(kw)?;
        if v <= 0.0 {
            return self.err(ParseErrorKind::OutOfRange(format!("{kw} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&mut self, kw: &str) -> PResult<f64> {
        let v = self.kw_num(kw)?;
        if v < 0.0 {
            return self.err(ParseErrorKind::OutOfRange(format!("{kw} must be non-negative, got {v}")));
        }
        Ok(v)
    }

    fn unit(&mut self, what: &str) -> PResult<f64> {
        let v = self.num()?;
        if !(0.0..=1.0).contains(&v) {
            return self.err(ParseErrorKind::OutOfRange(format!("{what} {v} outside [0, 1]")));
        }
        Ok(v)
    }

    fn color(&mut self) -> PResult<Vec3> {
        Ok(Vec3::new(self.unit("color")?, self.unit("color")?, self.unit("color")?))
    }

    fn axis(&mut self) -> PResult<usize> {
        self.keyword("axis")?;
        match self.next("axis name")? {
            "x" => Ok(0),
            "y" => Ok(1),
            "z" => Ok(2),
            other => self.err(ParseErrorKind::Syntax(format!("axis must be x, y or z, found {other:?}"))),
        }
    }

    fn end(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(ParseErrorKind::Syntax(format!("unexpected trailing token {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Block {
    Top,
    Scene,
    Surface,
    Volume,
    Material,
    Env,
}

#[derive(Default)]
struct Builder {
    seen_scene: bool,
    bounds: Option<Aabb>,
    sharpness: Option<f64>,
    surface: Vec<SurfaceNode>,
    volume: Vec<DensityElement>,
    seen_material: bool,
    diffuse: Option<ColorField>,
    tint: Option<ColorField>,
    weights: Option<WeightsField>,
    metallic: Option<ScalarField>,
    seen_env: bool,
    env: [Option<EnvDef>; N_BASIS],
    lut: Option<LutKind>,
}

fn missing(what: &str) -> ParseError {
    ParseError {
        line: 0,
        kind: ParseErrorKind::MissingBlock(what.to_string()),
    }
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<SceneDescription, ParseError> {
    let mut stack = vec![Block::Top];
    let mut b = Builder::default();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut c = Cursor {
            line: line_no,
            toks: content.split_whitespace().collect(),
            pos: 0,
        };
        let cur = *stack.last().unwrap();
        if c.toks == ["}"] {
            if cur == Block::Top {
                return c.err(ParseErrorKind::Syntax("unbalanced `}`".into()));
            }
            stack.pop();
            continue;
        }
        let head = c.next("statement")?;
        let opens = c.toks.last() == Some(&"{") && c.toks.len() == 2;
        match (cur, head) {
            (Block::Top, "scene") if opens => {
                if b.seen_scene {
                    return c.err(ParseErrorKind::Syntax("duplicate scene block".into()));
                }
                b.seen_scene = true;
                stack.push(Block::Scene);
            }
            (Block::Scene, "surface") if opens => stack.push(Block::Surface),
            (Block::Scene, "volume") if opens => stack.push(Block::Volume),
            (Block::Scene, "material") if opens => {
                b.seen_material = true;
                stack.push(Block::Material)
            }
            (Block::Scene, "env") if opens => {
                b.seen_env = true;
                stack.push(Block::Env)
            }
            (Block::Scene, "bounds") => {
                let lo = c.num()?;
                let hi = c.num()?;
                if lo >= hi {
                    return c.err(ParseErrorKind::OutOfRange(format!("bounds {lo} >= {hi}")));
                }
                c.end()?;
                b.bounds = Some(Aabb::new(Vec3::splat(lo), Vec3::splat(hi)));
            }
            (Block::Scene, "sharpness") => {
                let s = c.num()?;
                if s <= 0.0 {
                    return c.err(ParseErrorKind::OutOfRange(format!("sharpness must be positive, got {s}")));
                }
                c.end()?;
                b.sharpness = Some(s);
            }
            (Block::Scene, "lut") => {
                let kind = c.next("attenuation model")?;
                let k = kind
                    .parse::<LutKind>()
                    .or_else(|_| c.err(ParseErrorKind::UnknownKeyword(kind.to_string())))?;
                c.end()?;
                b.lut = Some(k);
            }
            (Block::Surface, "primitive") => b.surface.push(parse_primitive(&mut c)?),
            (Block::Volume, kw) => b.volume.push(parse_density(&mut c, kw)?),
            (Block::Material, kw) => parse_material(&mut c, kw, &mut b)?,
            (Block::Env, "map") => {
                let i = c.num()?;
                if i < 0.0 || i >= N_BASIS as f64 || i.fract() != 0.0 {
                    return c.err(ParseErrorKind::OutOfRange(format!("map index {i} not in 0..{N_BASIS}")));
                }
                let i = i as usize;
                if b.env[i].is_some() {
                    return c.err(ParseErrorKind::Syntax(format!("map {i} defined twice")));
                }
                b.env[i] = Some(parse_env(&mut c)?);
            }
            (_, kw) => return c.err(ParseErrorKind::UnknownKeyword(kw.to_string())),
        }
    }
    if stack.len() > 1 {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::Syntax("unterminated block".into()),
        });
    }
    if !b.seen_scene {
        return Err(missing("scene"));
    }
    if !b.seen_material {
        return Err(missing("material"));
    }
    if !b.seen_env {
        return Err(missing("env"));
    }
    let sharpness = b.sharpness.ok_or_else(|| missing("sharpness"))?;
    let materials = Materials {
        diffuse: b.diffuse.ok_or_else(|| missing("material.diffuse"))?,
        tint: b.tint.ok_or_else(|| missing("material.tint"))?,
        weights: b.weights.ok_or_else(|| missing("material.weights"))?,
        metallic: b.metallic.ok_or_else(|| missing("material.metallic"))?,
    };
    let mut env = [EnvDef::Constant(Vec3::ZERO); N_BASIS];
    for (i, slot) in b.env.iter().enumerate() {
        env[i] = slot.ok_or_else(|| missing(&format!("env.map {i}")))?;
    }
    Ok(SceneDescription {
        bounds: b.bounds.unwrap_or_else(Aabb::unit_cube),
        sharpness,
        surface: b.surface,
        volume: b.volume,
        materials,
        env,
        lut_kind: b.lut.unwrap_or_default(),
    })
}

fn parse_primitive(c: &mut Cursor) -> PResult<SurfaceNode> {
    let kind = c.next("primitive kind")?;
    let primitive = match kind {
        "sphere" => SdfPrimitive::Sphere {
            center: c.kw_vec3("center")?,
            radius: c.positive("radius")?,
        },
        "box" => {
            let center = c.kw_vec3("center")?;
            let half = c.kw_vec3("half")?;
            if half.x <= 0.0 || half.y <= 0.0 || half.z <= 0.0 {
                return c.err(ParseErrorKind::OutOfRange(format!("box half extents must be positive, got {half}")));
            }
            SdfPrimitive::Box { center, half }
        }
        "torus" => SdfPrimitive::Torus {
            center: c.kw_vec3("center")?,
            major: c.positive("major")?,
            minor: c.positive("minor")?,
        },
        "capsule" => SdfPrimitive::Capsule {
            from: c.kw_vec3("from")?,
            to: c.kw_vec3("to")?,
            radius: c.positive("radius")?,
        },
        other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
    };
    let op = if c.peek() == Some("op") {
        c.keyword("op")?;
        match c.next("csg operation")? {
            "union" => CsgOp::Union,
            "intersect" => CsgOp::Intersect,
            "subtract" => CsgOp::Subtract,
            other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
        }
    } else {
        CsgOp::Union
    };
    c.end()?;
    Ok(SurfaceNode { primitive, op })
}

fn parse_density(c: &mut Cursor, kw: &str) -> PResult<DensityElement> {
    let e = match kw {
        "blob" => DensityElement::Blob {
            center: c.kw_vec3("center")?,
            radius: c.positive("radius")?,
            density: c.non_negative("density")?,
        },
        "curve" => DensityElement::Curve {
            from: c.kw_vec3("from")?,
            to: c.kw_vec3("to")?,
            radius: c.positive("radius")?,
            density: c.non_negative("density")?,
        },
        "slab" => {
            let axis = c.axis()?;
            let min = c.kw_num("min")?;
            let max = c.kw_num("max")?;
            if min >= max {
                return c.err(ParseErrorKind::OutOfRange(format!("slab min {min} >= max {max}")));
            }
            DensityElement::Slab {
                axis,
                min,
                max,
                density: c.non_negative("density")?,
            }
        }
        other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
    };
    c.end()?;
    Ok(e)
}

fn parse_color_field(c: &mut Cursor) -> PResult<ColorField> {
    let f = match c.next("pattern")? {
        "constant" => ColorField::Constant(c.color()?),
        "checker" => {
            let a = c.color()?;
            let b = c.color()?;
            ColorField::Checker {
                a,
                b,
                scale: c.positive("scale")?,
            }
        }
        "gradient" => {
            let axis = c.axis()?;
            c.keyword("low")?;
            let low = c.color()?;
            c.keyword("high")?;
            let high = c.color()?;
            ColorField::Gradient { axis, low, high }
        }
        other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
    };
    Ok(f)
}

fn parse_weights(c: &mut Cursor) -> PResult<[f64; N_BASIS]> {
    let mut w = [0.0; N_BASIS];
    for v in &mut w {
        *v = c.unit("weight")?;
    }
    Ok(w)
}

fn parse_material(c: &mut Cursor, kw: &str, b: &mut Builder) -> PResult<()> {
    match kw {
        "diffuse" => b.diffuse = Some(parse_color_field(c)?),
        "tint" => b.tint = Some(parse_color_field(c)?),
        "weights" => {
            b.weights = Some(match c.next("pattern")? {
                "constant" => WeightsField::Constant(parse_weights(c)?),
                "gradient" => {
                    let axis = c.axis()?;
                    c.keyword("low")?;
                    let low = parse_weights(c)?;
                    c.keyword("high")?;
                    let high = parse_weights(c)?;
                    WeightsField::Gradient { axis, low, high }
                }
                other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
            })
        }
        "metallic" => {
            b.metallic = Some(match c.next("pattern")? {
                "constant" => ScalarField::Constant(c.unit("metallic")?),
                "gradient" => {
                    let axis = c.axis()?;
                    c.keyword("low")?;
                    let low = c.unit("metallic")?;
                    c.keyword("high")?;
                    let high = c.unit("metallic")?;
                    ScalarField::Gradient { axis, low, high }
                }
                other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
            })
        }
        other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
    }
    c.end()
}

fn parse_env(c: &mut Cursor) -> PResult<EnvDef> {
    let e = match c.next("environment kind")? {
        "constant" => EnvDef::Constant(c.color()?),
        "gradient" => {
            let axis = c.axis()?;
            c.keyword("low")?;
            let low = c.color()?;
            c.keyword("high")?;
            let high = c.color()?;
            EnvDef::Gradient { axis, low, high }
        }
        "lobe" => {
            let dir = c.kw_vec3("dir")?;
            if dir.length() == 0.0 {
                return c.err(ParseErrorKind::OutOfRange("lobe direction is zero".into()));
            }
            let power = c.positive("power")?;
            c.keyword("color")?;
            EnvDef::Lobe {
                dir: dir.normalize(),
                power,
                color: c.color()?,
            }
        }
        other => return c.err(ParseErrorKind::UnknownKeyword(other.to_string())),
    };
    c.end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
scene {
  sharpness 500
  surface {
    primitive sphere center 0 0 0 radius 0.5
  }
  material {
    diffuse constant 0.5 0.2 0.2
    tint constant 0 0 0
    weights constant 1 0 0 0
    metallic constant 0
  }
  env {
    map 0 constant 1 1 1
    map 1 constant 0 0 0
    map 2 constant 0 0 0
    map 3 constant 0 0 0
  }
}
";

    #[test]
    fn minimal_scene() {
        let s = parse_scene(MINIMAL).unwrap();
        assert_eq!(s.surface.len(), 1);
        assert!(s.volume.is_empty());
        assert_eq!(s.bounds, Aabb::unit_cube());
        assert_eq!(s.lut_kind, LutKind::Schlick);
        assert_eq!(s.sharpness, 500.0);
    }

    #[test]
    fn cone_is_unknown() {
        let text = MINIMAL.replace(
            "primitive sphere center 0 0 0 radius 0.5",
            "primitive cone center 0 0 0 radius 0.5",
        );
        let err = parse_scene(&text).unwrap_err();
        assert_eq!(err.line, 5);
        assert_eq!(err.kind, ParseErrorKind::UnknownKeyword("cone".into()));
    }

    #[test]
    fn negative_radius() {
        let text = MINIMAL.replace("radius 0.5", "radius -0.5");
        let err = parse_scene(&text).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::OutOfRange(_)), "{err}");
    }

    #[test]
    fn missing_env() {
        let start = MINIMAL.find("  env {").unwrap();
        let end = MINIMAL.rfind("  }").unwrap() + 4;
        let text = format!("{}{}", &MINIMAL[..start], &MINIMAL[end..]);
        let err = parse_scene(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingBlock("env".into()));
    }

    #[test]
    fn missing_map() {
        let text = MINIMAL.replace("    map 3 constant 0 0 0\n", "");
        let err = parse_scene(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingBlock("env.map 3".into()));
    }

    #[test]
    fn color_out_of_range() {
        let text = MINIMAL.replace("diffuse constant 0.5 0.2 0.2", "diffuse constant 1.5 0.2 0.2");
        assert!(matches!(
            parse_scene(&text).unwrap_err().kind,
            ParseErrorKind::OutOfRange(_)
        ));
    }

    #[test]
    fn unknown_lut() {
        let text = MINIMAL.replace("  env {", "  lut ggx\n  env {");
        assert_eq!(
            parse_scene(&text).unwrap_err().kind,
            ParseErrorKind::UnknownKeyword("ggx".into())
        );
    }

    #[test]
    fn unterminated() {
        let text = MINIMAL.trim_end().trim_end_matches('}');
        assert!(matches!(
            parse_scene(text).unwrap_err().kind,
            ParseErrorKind::Syntax(_)
        ));
    }

    #[test]
    fn csg_and_volume_elements() {
        let text = MINIMAL.replace(
            "    primitive sphere center 0 0 0 radius 0.5\n",
            "    primitive sphere center 0 0 0 radius 0.5\n    primitive box center 0 0.5 0 half 0.2 0.2 0.2 op subtract\n  }\n  volume {\n    blob center 0 0 0 radius 0.2 density 10\n    slab axis y min -0.1 max 0.1 density 2\n",
        );
        let s = parse_scene(&text).unwrap();
        assert_eq!(s.surface[1].op, CsgOp::Subtract);
        assert_eq!(s.volume.len(), 2);
        assert!(matches!(s.volume[1], DensityElement::Slab { axis: 1, .. }));
    }
}
