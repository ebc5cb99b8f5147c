//! Camera-defect simulation: radial blur, Gaussian blur, contrast boost
//! and a Bayer mosaic/demosaic cycle. All stages are photometric — the
//! ground-truth flow is never touched.

use std::fmt;
use std::str::FromStr;

use crate::geometry::Point;
use crate::raster::{ImageBuffer, Sample};

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

/// 2x2 color-filter tile layout of the simulated sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayerPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl BayerPattern {
    pub const ALL: [BayerPattern; 4] = [
        BayerPattern::Rggb,
        BayerPattern::Bggr,
        BayerPattern::Grbg,
        BayerPattern::Gbrg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BayerPattern::Rggb => "rggb",
            BayerPattern::Bggr => "bggr",
            BayerPattern::Grbg => "grbg",
            BayerPattern::Gbrg => "gbrg",
        }
    }

    /// RGB channel index the sensor records at site (x, y).
    fn channel_at(self, x: u32, y: u32) -> usize {
        let key = (((y & 1) << 1) | (x & 1)) as usize;
        match self {
            BayerPattern::Rggb => [0, 1, 1, 2][key],
            BayerPattern::Bggr => [2, 1, 1, 0][key],
            BayerPattern::Grbg => [1, 0, 2, 1][key],
            BayerPattern::Gbrg => [1, 2, 0, 1][key],
        }
    }
}

impl fmt::Display for BayerPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BayerPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rggb" => Ok(BayerPattern::Rggb),
            "bggr" => Ok(BayerPattern::Bggr),
            "grbg" => Ok(BayerPattern::Grbg),
            "gbrg" => Ok(BayerPattern::Gbrg),
            _ => Err(format!(
                "unknown bayer pattern `{s}` (expected rggb, bggr, grbg or gbrg)"
            )),
        }
    }
}

/// Imaging-defect parameters, applied optics-first: radial blur, then
/// Gaussian blur, then contrast boost, then the Bayer cycle. The default
/// profile is the bit-exact identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraProfile {
    /// Blur span per unit radius (span in px = strength * distance from
    /// the image center).
    pub radial_blur_strength: f64,
    pub gaussian_sigma: f64,
    /// Gain >= 1 about mid-gray, clipping into saturation.
    pub contrast_boost: f64,
    pub bayer: Option<BayerPattern>,
}

impl Default for CameraProfile {
    fn default() -> Self {
        CameraProfile {
            radial_blur_strength: 0.0,
            gaussian_sigma: 0.0,
            contrast_boost: 1.0,
            bayer: None,
        }
    }
}

impl CameraProfile {
    pub fn is_identity(&self) -> bool {
        *self == CameraProfile::default()
    }
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Averages 9 bilinear samples along the ray through the image center,
/// spanning `strength * r` pixels at distance r, so blur grows linearly
/// toward the borders. Strength zero is the bit-exact identity.
pub fn radial_blur(img: &ImageBuffer, strength: f64) -> ImageBuffer {
    assert!(strength >= 0.0, "blur strength must be nonnegative");
    if strength == 0.0 {
        return img.clone();
    }
    let (w, h, c) = (img.width(), img.height(), img.channels() as usize);
    let cx = w as f64 / 2.0;
    let cy = h as f64 / 2.0;
    let mut out = ImageBuffer::new(w, h, img.channels());
    let mut buf = vec![0.0f32; c];
    let mut acc = vec![0.0f64; c];
    for y in 0..h {
        for x in 0..w {
            let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            let dx = p.x - cx;
            let dy = p.y - cy;
            let r = libm::hypot(dx, dy);
            if r < 1e-12 {
                out.pixel_mut(x, y).copy_from_slice(img.pixel(x, y));
                continue;
            }
            let (ux, uy) = (dx / r, dy / r);
            let span = strength * r;
            acc.fill(0.0);
            for k in 0..9 {
                let t = span * (k as f64 / 8.0 - 0.5);
                img.sample_bilinear(Point::new(p.x + ux * t, p.y + uy * t), &mut buf);
                for ch in 0..c {
                    acc[ch] += buf[ch] as f64;
                }
            }
            let o = out.pixel_mut(x, y);
            for ch in 0..c {
                o[ch] = (acc[ch] / 9.0) as f32;
            }
        }
    }
    out
}

/// Separable Gaussian with radius ceil(3 sigma) and replicated edges.
/// Sigma zero is the bit-exact identity.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }

    let (w, h, c) = (
        img.width() as i64,
        img.height() as i64,
        img.channels() as usize,
    );
    let idx = |x: i64, y: i64, ch: usize| (y * w + x) as usize * c + ch;

    // Horizontal pass into a f64 buffer, then vertical into the output.
    let mut tmp = vec![0.0f64; (w * h) as usize * c];
    let data = img.data();
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let sx = (x + k as i64 - radius).clamp(0, w - 1);
                    acc += kw * data[idx(sx, y, ch)] as f64;
                }
                tmp[idx(x, y, ch)] = acc;
            }
        }
    }
    let mut out = vec![0.0f32; (w * h) as usize * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let sy = (y + k as i64 - radius).clamp(0, h - 1);
                    acc += kw * tmp[idx(x, sy, ch)];
                }
                out[idx(x, y, ch)] = acc as f32;
            }
        }
    }
    ImageBuffer::from_data(img.width(), img.height(), img.channels(), out)
}

/// clip(gain * (v - 0.5) + 0.5): over-saturates toward the gamut ends.
/// Gain one is the bit-exact identity.
pub fn contrast_boost(img: &ImageBuffer, gain: f64) -> ImageBuffer {
    assert!(gain >= 1.0, "contrast boost must be >= 1");
    if gain == 1.0 {
        return img.clone();
    }
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = (gain * (*v as f64 - 0.5) + 0.5).clamp(0.0, 1.0) as f32;
    }
    out
}

/// Mosaics to a single-channel sensor image per `pattern`, then
/// bilinear-demosaics back to RGB: each missing channel averages the
/// same-channel sites in the 3x3 neighborhood. Borders mirror inward,
/// which keeps the mosaic parity intact, so constant images round-trip
/// bit-identically at any dimensions.
pub fn bayer_cycle(img: &ImageBuffer, pattern: BayerPattern) -> ImageBuffer {
    assert_eq!(img.channels(), 3, "bayer cycle expects RGB input");
    let (w, h) = (img.width(), img.height());
    let (wi, hi) = (w as i64, h as i64);

    let mut sensor = vec![0.0f32; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            sensor[(y * w + x) as usize] = img.get(x, y, pattern.channel_at(x, y) as u32);
        }
    }

    let reflect = |v: i64, n: i64| -> i64 {
        if v < 0 {
            (-v).min(n - 1)
        } else if v >= n {
            (2 * n - 2 - v).max(0)
        } else {
            v
        }
    };

    let mut data = Vec::with_capacity((w * h) as usize * 3);
    for y in 0..h {
        for x in 0..w {
            let own = pattern.channel_at(x, y);
            for ch in 0..3usize {
                if ch == own {
                    data.push(sensor[(y * w + x) as usize]);
                    continue;
                }
                let mut acc = 0.0f64;
                let mut count = 0u32;
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let sx = reflect(x as i64 + dx, wi);
                        let sy = reflect(y as i64 + dy, hi);
                        if pattern.channel_at(sx as u32, sy as u32) == ch {
                            acc += sensor[(sy * wi + sx) as usize] as f64;
                            count += 1;
                        }
                    }
                }
                data.push((acc / count as f64) as f32);
            }
        }
    }
    ImageBuffer::from_data(w, h, 3, data)
}

// ---------------------------------------------------------------------------
// Whole-profile application
// ---------------------------------------------------------------------------

/// All enabled stages in imaging-chain order.
pub fn degrade_image(img: &ImageBuffer, profile: &CameraProfile) -> ImageBuffer {
    let mut out = radial_blur(img, profile.radial_blur_strength);
    if profile.gaussian_sigma > 0.0 {
        out = gaussian_blur(&out, profile.gaussian_sigma);
    }
    if profile.contrast_boost != 1.0 {
        out = contrast_boost(&out, profile.contrast_boost);
    }
    if let Some(pattern) = profile.bayer {
        out = bayer_cycle(&out, pattern);
    }
    out
}

/// Degrades both frames identically; flow and occlusion pass through
/// bit-unchanged (the defects are photometric, not geometric).
pub fn apply_profile(sample: &Sample, profile: &CameraProfile) -> Sample {
    Sample {
        frame1: degrade_image(&sample.frame1, profile),
        frame2: degrade_image(&sample.frame2, profile),
        flow: sample.flow.clone(),
        occ: sample.occ.clone(),
    }
}
