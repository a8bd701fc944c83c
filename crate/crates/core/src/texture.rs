//! Multi-channel float rasters used for baked maps.

/// Row-major, channel-interleaved `f32` raster. Texel `(x, y)` has its
/// center at `((x + 0.5) / width, (y + 0.5) / height)` in UV space, with
/// `v` growing downward.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Texture {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        assert!((1..=4).contains(&channels), "1 to 4 channels supported");
        Texture {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    #[inline]
    pub fn texel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn texel_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Bilinear lookup with edge clamping; unused channels are zero.
    pub fn sample(&self, u: f64, v: f64) -> [f64; 4] {
        let (x0, x1, tx) = texel_span(u * self.width as f64 - 0.5, self.width);
        let (y0, y1, ty) = texel_span(v * self.height as f64 - 0.5, self.height);
        let (a, b) = (self.texel(x0, y0), self.texel(x1, y0));
        let (c, d) = (self.texel(x0, y1), self.texel(x1, y1));
        let mut out = [0.0; 4];
        for (ch, o) in out.iter_mut().enumerate().take(self.channels) {
            let top = lerp(a[ch] as f64, b[ch] as f64, tx);
            let bottom = lerp(c[ch] as f64, d[ch] as f64, tx);
            *o = lerp(top, bottom, ty);
        }
        out
    }
}

#[inline]
pub(crate) fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Splits a continuous texel coordinate into `(i0, i1, frac)` with edge
/// clamping. Exact grid nodes yield `frac == 0`.
#[inline]
pub(crate) fn texel_span(f: f64, n: usize) -> (usize, usize, f64) {
    let f = f.clamp(0.0, (n - 1) as f64);
    let i0 = f.floor() as usize;
    (i0, (i0 + 1).min(n - 1), f - i0 as f64)
}
