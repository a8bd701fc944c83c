//! RGBA images, PSNR, and the 8-bit PNG codec used by the container and
//! frame output.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("pixel buffer holds {got} pixels, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: png encode failed: {msg}")]
    Encode { path: String, msg: String },
    #[error("{path}: png decode failed: {msg}")]
    Decode { path: String, msg: String },
    #[error("{path}: expected 8-bit {expected} channel png, found {found}")]
    Format {
        path: String,
        expected: usize,
        found: String,
    },
}

/// Pixel storage. The representation is explicit so that quantized frames
/// never silently pass through float paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Pixels {
    Float(Vec<[f32; 4]>),
    Byte(Vec<[u8; 4]>),
}

/// Row-major RGBA image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRGBA {
    pub width: u32,
    pub height: u32,
    pub pixels: Pixels,
}

impl ImageRGBA {
    pub fn new_float(width: u32, height: u32, data: Vec<[f32; 4]>) -> Result<Self, ImageError> {
        let expected = width as usize * height as usize;
        if data.len() != expected || expected == 0 {
            return Err(ImageError::BadLength {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels: Pixels::Float(data),
        })
    }

    pub fn new_byte(width: u32, height: u32, data: Vec<[u8; 4]>) -> Result<Self, ImageError> {
        let expected = width as usize * height as usize;
        if data.len() != expected || expected == 0 {
            return Err(ImageError::BadLength {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels: Pixels::Byte(data),
        })
    }

    pub fn filled(width: u32, height: u32, value: [f32; 4]) -> Self {
        Self {
            width,
            height,
            pixels: Pixels::Float(vec![value; width as usize * height as usize]),
        }
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_quantized(&self) -> bool {
        matches!(self.pixels, Pixels::Byte(_))
    }

    /// Pixel value as reals in `[0, 1]`.
    pub fn get(&self, x: u32, y: u32) -> [f64; 4] {
        let i = y as usize * self.width as usize + x as usize;
        self.get_index(i)
    }

    fn get_index(&self, i: usize) -> [f64; 4] {
        match &self.pixels {
            Pixels::Float(p) => p[i].map(|v| v as f64),
            Pixels::Byte(p) => p[i].map(|v| v as f64 / 255.0),
        }
    }

    /// 8-bit copy, rounding to nearest.
    pub fn to_bytes(&self) -> ImageRGBA {
        let data = match &self.pixels {
            Pixels::Byte(p) => p.clone(),
            Pixels::Float(p) => p
                .iter()
                .map(|px| px.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
                .collect(),
        };
        ImageRGBA {
            width: self.width,
            height: self.height,
            pixels: Pixels::Byte(data),
        }
    }

    pub fn save_png(&self, path: &Path) -> Result<(), ImageError> {
        let bytes = self.to_bytes();
        let Pixels::Byte(px) = &bytes.pixels else {
            unreachable!()
        };
        let flat: Vec<u8> = px.iter().flatten().copied().collect();
        write_png(path, self.width, self.height, 4, &flat)
    }

    pub fn load_png(path: &Path) -> Result<ImageRGBA, ImageError> {
        let raw = read_png(path)?;
        let px: Vec<[u8; 4]> = match raw.channels {
            4 => raw.data.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
            3 => raw.data.chunks_exact(3).map(|c| [c[0], c[1], c[2], 255]).collect(),
            1 => raw.data.iter().map(|&g| [g, g, g, 255]).collect(),
            2 => raw.data.chunks_exact(2).map(|c| [c[0], c[0], c[0], c[1]]).collect(),
            _ => unreachable!(),
        };
        ImageRGBA::new_byte(raw.width, raw.height, px)
    }
}

/// Cap reported for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Peak signal-to-noise ratio over RGB (alpha excluded), in dB.
pub fn psnr(a: &ImageRGBA, b: &ImageRGBA) -> Result<f64, ImageError> {
    if a.width != b.width || a.height != b.height {
        return Err(ImageError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let mut sum = 0.0;
    for i in 0..a.len() {
        let (pa, pb) = (a.get_index(i), b.get_index(i));
        for c in 0..3 {
            let d = pa[c] - pb[c];
            sum += d * d;
        }
    }
    let mse = sum / (3 * a.len()) as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Decoded 8-bit PNG payload.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPng {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub data: Vec<u8>,
}

fn color_type(channels: usize) -> png::ColorType {
    match channels {
        1 => png::ColorType::Grayscale,
        2 => png::ColorType::GrayscaleAlpha,
        3 => png::ColorType::Rgb,
        4 => png::ColorType::Rgba,
        _ => panic!("unsupported channel count {channels}"),
    }
}

/// Writes an 8-bit non-interlaced PNG. Output bytes depend only on the input.
pub fn write_png(
    path: &Path,
    width: u32,
    height: u32,
    channels: usize,
    data: &[u8],
) -> Result<(), ImageError> {
    let p = path.display().to_string();
    let file = File::create(path).map_err(|source| ImageError::Io {
        path: p.clone(),
        source,
    })?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width, height);
    enc.set_color(color_type(channels));
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Fast);
    let enc_err = |e: png::EncodingError| ImageError::Encode {
        path: p.clone(),
        msg: e.to_string(),
    };
    let mut writer = enc.write_header().map_err(enc_err)?;
    writer.write_image_data(data).map_err(enc_err)?;
    writer.finish().map_err(enc_err)?;
    Ok(())
}

pub fn read_png(path: &Path) -> Result<RawPng, ImageError> {
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| ImageError::Io {
        path: p.clone(),
        source,
    })?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let dec_err = |e: png::DecodingError| ImageError::Decode {
        path: p.clone(),
        msg: e.to_string(),
    };
    let mut reader = decoder.read_info().map_err(dec_err)?;
    let size = reader.output_buffer_size().ok_or_else(|| ImageError::Decode {
        path: p.clone(),
        msg: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(dec_err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::Format {
            path: p,
            expected: 0,
            found: format!("{:?}", info.bit_depth),
        });
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(ImageError::Format {
                path: p,
                expected: 0,
                found: "indexed".into(),
            })
        }
    };
    buf.truncate(info.buffer_size());
    Ok(RawPng {
        width: info.width,
        height: info.height,
        channels,
        data: buf,
    })
}
