use crate::texture::Texture;

/// `round(255 * clamp((v - min) / (max - min), 0, 1))`; a degenerate range
/// maps everything to 0.
pub fn quantize(v: f32, min: f32, max: f32) -> u8 {
    if !(max > min) {
        return 0;
    }
    let t = ((v as f64 - min as f64) / (max as f64 - min as f64)).clamp(0.0, 1.0);
    (255.0 * t).round() as u8
}

pub fn dequantize(q: u8, min: f32, max: f32) -> f32 {
    if !(max > min) {
        return min;
    }
    (min as f64 + q as f64 / 255.0 * (max as f64 - min as f64)) as f32
}

/// Largest dequantization error for values inside `[min, max]`.
pub fn quantization_bound(min: f32, max: f32) -> f64 {
    (max as f64 - min as f64) / 510.0 + 1e-7
}

/// An 8-bit image with a value range per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMap {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// `[min, max]` per channel.
    pub ranges: Vec<[f32; 2]>,
    /// Row-major, channels interleaved.
    pub data: Vec<u8>,
}

impl QuantizedMap {
    /// Quantizes a texture. Channels with a `Some` entry in `fixed` use that
    /// range; the others use the data's own minimum and maximum.
    pub fn from_texture(tex: &Texture, fixed: &[Option<[f32; 2]>]) -> Self {
        let c = tex.channels;
        let ranges: Vec<[f32; 2]> = (0..c)
            .map(|ch| {
                fixed.get(ch).copied().flatten().unwrap_or_else(|| {
                    let mut lo = f32::INFINITY;
                    let mut hi = f32::NEG_INFINITY;
                    for v in tex.data.iter().skip(ch).step_by(c) {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                    if lo > hi {
                        [0.0, 0.0]
                    } else {
                        [lo, hi]
                    }
                })
            })
            .collect();
        let data = tex
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let [lo, hi] = ranges[i % c];
                quantize(v, lo, hi)
            })
            .collect();
        QuantizedMap {
            width: tex.width,
            height: tex.height,
            channels: c,
            ranges,
            data,
        }
    }

    pub fn to_texture(&self) -> Texture {
        let c = self.channels;
        let mut tex = Texture::new(self.width, self.height, c);
        for (i, (out, &q)) in tex.data.iter_mut().zip(&self.data).enumerate() {
            let [lo, hi] = self.ranges[i % c];
            *out = dequantize(q, lo, hi);
        }
        tex
    }

    /// Dequantized channel value at a texel.
    pub fn value(&self, x: usize, y: usize, ch: usize) -> f32 {
        let [lo, hi] = self.ranges[ch];
        dequantize(self.data[(y * self.width + x) * self.channels + ch], lo, hi)
    }
}
