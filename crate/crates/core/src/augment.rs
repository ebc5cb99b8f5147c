//! Color and geometry augmentation. Photometric changes and affine
//! re-warps can hit both frames identically or add an extra frame-2 delta;
//! geometric changes relabel the flow analytically.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::geometry::{Affine2, Point};
use crate::raster::{FlowField, ImageBuffer, OcclusionMask, Sample};
use crate::rng;
use crate::Result;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// The four augmentation switches. A "between" switch layers an extra
/// frame-2 change on top of the shared one, so enabling it implies the
/// corresponding "both" behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AugmentMode {
    pub color_both: bool,
    pub color_between: bool,
    pub geom_both: bool,
    pub geom_between: bool,
}

impl AugmentMode {
    pub fn any(&self) -> bool {
        self.color_both || self.color_between || self.geom_both || self.geom_between
    }
}

/// Ranges the per-sample augmentation draws come from. Additive parameters
/// are symmetric about zero, multiplicative ranges straddle one, shifts are
/// fractions of the frame size. Between-frame deltas reuse these ranges
/// shrunk toward the identity by `between_frac`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentRanges {
    pub brightness: f64,
    pub contrast: (f64, f64),
    pub channel_gain: (f64, f64),
    pub noise_std: f64,
    pub shift_frac: f64,
    pub rotation_deg: f64,
    pub scale: (f64, f64),
    pub between_frac: f64,
}

impl Default for AugmentRanges {
    fn default() -> Self {
        AugmentRanges {
            brightness: 0.2,
            contrast: (0.5, 2.0),
            channel_gain: (0.8, 1.2),
            noise_std: 0.04,
            shift_frac: 0.2,
            rotation_deg: 17.0,
            scale: (0.9, 2.0),
            between_frac: 0.25,
        }
    }
}

/// Photometric change: per-channel gain, contrast about mid-gray, a
/// brightness offset and additive Gaussian noise, clipped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ColorAugment {
    pub brightness_offset: f64,
    pub contrast_gain: f64,
    pub channel_gain: [f64; 3],
    pub noise_std: f64,
}

impl Default for ColorAugment {
    fn default() -> Self {
        ColorAugment {
            brightness_offset: 0.0,
            contrast_gain: 1.0,
            channel_gain: [1.0; 3],
            noise_std: 0.0,
        }
    }
}

impl ColorAugment {
    pub fn identity() -> ColorAugment {
        ColorAugment::default()
    }

    pub fn is_identity(&self) -> bool {
        *self == ColorAugment::default()
    }

    /// Uniform draw from `ranges` shrunk toward the identity by `frac`
    /// (1.0 for the shared change, `between_frac` for the frame-2 delta).
    pub fn sample(ranges: &AugmentRanges, frac: f64, rng: &mut ChaCha8Rng) -> ColorAugment {
        let b = ranges.brightness * frac;
        let (clo, chi) = shrink_about_one(ranges.contrast, frac);
        let (glo, ghi) = shrink_about_one(ranges.channel_gain, frac);
        ColorAugment {
            brightness_offset: rng::uniform(rng, -b, b),
            contrast_gain: rng::uniform(rng, clo, chi),
            channel_gain: [
                rng::uniform(rng, glo, ghi),
                rng::uniform(rng, glo, ghi),
                rng::uniform(rng, glo, ghi),
            ],
            noise_std: rng::uniform(rng, 0.0, ranges.noise_std * frac),
        }
    }
}

/// Geometric change: `shared` re-warps both frames, `incremental` applies
/// to frame 2 only.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomAugment {
    pub shared: Affine2,
    pub incremental: Affine2,
}

impl Default for GeomAugment {
    fn default() -> Self {
        GeomAugment {
            shared: Affine2::IDENTITY,
            incremental: Affine2::IDENTITY,
        }
    }
}

impl GeomAugment {
    pub fn identity() -> GeomAugment {
        GeomAugment::default()
    }

    pub fn is_identity(&self) -> bool {
        *self == GeomAugment::default()
    }

    /// Draws a shared transform, plus an incremental one when `between`
    /// is set (identity otherwise).
    pub fn sample(
        ranges: &AugmentRanges,
        width: u32,
        height: u32,
        between: bool,
        rng: &mut ChaCha8Rng,
    ) -> GeomAugment {
        let shared = draw_affine(ranges, width, height, 1.0, rng);
        let incremental = if between {
            draw_affine(ranges, width, height, ranges.between_frac, rng)
        } else {
            Affine2::IDENTITY
        };
        GeomAugment { shared, incremental }
    }
}

fn shrink_about_one((lo, hi): (f64, f64), frac: f64) -> (f64, f64) {
    (1.0 - frac * (1.0 - lo), 1.0 + frac * (hi - 1.0))
}

fn draw_affine(
    ranges: &AugmentRanges,
    width: u32,
    height: u32,
    frac: f64,
    rng: &mut ChaCha8Rng,
) -> Affine2 {
    let sx = ranges.shift_frac * width as f64 * frac;
    let sy = ranges.shift_frac * height as f64 * frac;
    let rot = ranges.rotation_deg * frac;
    let (klo, khi) = shrink_about_one(ranges.scale, frac);
    let tx = rng::uniform(rng, -sx, sx);
    let ty = rng::uniform(rng, -sy, sy);
    let theta = rng::uniform(rng, -rot, rot);
    let k = rng::uniform(rng, klo, khi);
    let center = Point::new(width as f64 / 2.0, height as f64 / 2.0);
    Affine2::compose(
        Affine2::translate(tx, ty),
        Affine2::about(
            center,
            Affine2::compose(Affine2::rotate_deg(theta), Affine2::scale(k)),
        ),
    )
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

/// out = clip(contrast * (gain * v - 0.5) + 0.5 + brightness + noise).
/// Identity parameters return the image bit-unchanged.
pub fn apply_color(img: &ImageBuffer, aug: &ColorAugment, rng: &mut ChaCha8Rng) -> ImageBuffer {
    if aug.is_identity() {
        return img.clone();
    }
    let c = img.channels() as usize;
    assert!(c <= 3, "color augmentation expects at most 3 channels");
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        let gain = aug.channel_gain[i % c];
        let noise = if aug.noise_std > 0.0 {
            rng::standard_normal(rng) * aug.noise_std
        } else {
            0.0
        };
        let y = aug.contrast_gain * (gain * *v as f64 - 0.5) + 0.5 + aug.brightness_offset + noise;
        *v = y.clamp(0.0, 1.0) as f32;
    }
    out
}

/// How flow is read at non-integer pullback points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowResample {
    Bilinear,
    /// Nearest pixel, keeping labels crisp across motion boundaries.
    Nearest,
}

/// Geometric augmentation output. `invalid` marks pixels whose pullback
/// left a source frame; their intensities and flow are edge-extended and
/// should be excluded from training and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomAugmented {
    pub frame1: ImageBuffer,
    pub frame2: ImageBuffer,
    pub flow: FlowField,
    pub invalid: OcclusionMask,
}

/// Re-warps a frame pair by `shared` (plus `incremental` on frame 2) and
/// relabels the flow: the new target of output pixel x with pullback
/// p = shared⁻¹(x) is incremental(shared(p + flow(p))).
pub fn apply_geom(
    frame1: &ImageBuffer,
    frame2: &ImageBuffer,
    flow: &FlowField,
    aug: &GeomAugment,
    resample: FlowResample,
) -> Result<GeomAugmented> {
    let (w, h) = (frame1.width(), frame1.height());
    for (fw, fh) in [
        (frame2.width(), frame2.height()),
        (flow.width(), flow.height()),
    ] {
        if (fw, fh) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                got: (fw, fh),
            });
        }
    }
    let shared_inv = aug.shared.invert()?;
    let both = Affine2::compose(aug.incremental, aug.shared);
    let both_inv = both.invert()?;

    let c = frame1.channels();
    let n = w as usize * h as usize;
    let mut d1 = Vec::with_capacity(n * c as usize);
    let mut d2 = Vec::with_capacity(n * c as usize);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut invalid = Vec::with_capacity(n);
    let mut buf = vec![0.0f32; c as usize];
    let (wf, hf) = (w as f64, h as f64);
    let outside = |p: Point| p.x < 0.0 || p.y < 0.0 || p.x > wf || p.y > hf;

    for y in 0..h {
        for x in 0..w {
            let center = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            let p1 = shared_inv.apply(center);
            let p2 = both_inv.apply(center);
            frame1.sample_bilinear(p1, &mut buf);
            d1.extend_from_slice(&buf);
            frame2.sample_bilinear(p2, &mut buf);
            d2.extend_from_slice(&buf);

            let (fu, fv) = match resample {
                FlowResample::Bilinear => flow.sample_bilinear(p1),
                FlowResample::Nearest => {
                    let sx = (p1.x.floor().max(0.0) as u32).min(w - 1);
                    let sy = (p1.y.floor().max(0.0) as u32).min(h - 1);
                    let (a, b) = flow.get(sx, sy);
                    (a as f64, b as f64)
                }
            };
            let target = both.apply(Point::new(p1.x + fu, p1.y + fv));
            u.push((target.x - center.x) as f32);
            v.push((target.y - center.y) as f32);
            invalid.push(outside(p1) || outside(p2));
        }
    }
    Ok(GeomAugmented {
        frame1: ImageBuffer::from_data(w, h, c, d1),
        frame2: ImageBuffer::from_data(w, h, c, d2),
        flow: FlowField::from_planes(w, h, u, v),
        invalid: OcclusionMask::from_data(w, h, invalid),
    })
}

/// Occlusion for a re-warped sample: source occlusion pulled back through
/// the shared transform, plus pixels whose new target leaves the frame,
/// plus invalid pullbacks.
fn geometry_occlusion(
    occ: &OcclusionMask,
    shared_inv: Affine2,
    flow: &FlowField,
    invalid: &OcclusionMask,
) -> OcclusionMask {
    let (w, h) = (occ.width(), occ.height());
    let (wf, hf) = (w as f64, h as f64);
    let mut data = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let center = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            let p = shared_inv.apply(center);
            let (sx, sy) = (p.x.floor(), p.y.floor());
            let pulled = if sx < 0.0 || sy < 0.0 || sx >= wf || sy >= hf {
                true
            } else {
                occ.get(sx as u32, sy as u32)
            };
            let (fu, fv) = flow.get(x, y);
            let tx = center.x + fu as f64;
            let ty = center.y + fv as f64;
            let gone = tx < 0.0 || ty < 0.0 || tx >= wf || ty >= hf;
            data.push(pulled || gone || invalid.get(x, y));
        }
    }
    OcclusionMask::from_data(w, h, data)
}

// ---------------------------------------------------------------------------
// Whole-sample augmentation
// ---------------------------------------------------------------------------

/// An augmented sample plus the validity mask from the geometric stage
/// (empty when geometry is off). Invalid pixels are also folded into the
/// sample's occlusion mask, so downstream consumers that only honor `occ`
/// stay correct.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub sample: Sample,
    pub invalid: OcclusionMask,
}

/// Namespace tag separating augmentation streams from scene streams.
const AUGMENT_TAG: u64 = 0x6175_676d_656e_7431;

/// The per-sample augmentation stream for dataset-level runs: derived from
/// the master seed under a distinct namespace, so enabling augmentation
/// never perturbs what the scene sampler draws.
pub fn augment_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    rng::stream(rng::sample_seed(rng::splitmix64(master_seed ^ AUGMENT_TAG), index))
}

/// Draws one augmentation per enabled switch and applies it. Geometry runs
/// first, then the shared color change on both frames, then the frame-2
/// color delta. Each stage draws from its own derived stream, so toggling
/// one switch never changes what another one draws.
pub fn augment_sample(
    sample: &Sample,
    mode: AugmentMode,
    ranges: &AugmentRanges,
    rng: &mut ChaCha8Rng,
) -> Result<AugmentedSample> {
    let (w, h) = (sample.frame1.width(), sample.frame1.height());
    let s_geom = rng.next_u64();
    let s_color = rng.next_u64();
    let s_noise1 = rng.next_u64();
    let s_noise2 = rng.next_u64();
    let s_color_delta = rng.next_u64();
    let s_noise_delta = rng.next_u64();

    let geom_on = mode.geom_both || mode.geom_between;
    let color_on = mode.color_both || mode.color_between;

    let (mut frame1, mut frame2, flow, occ, invalid) = if geom_on {
        let geom = GeomAugment::sample(
            ranges,
            w,
            h,
            mode.geom_between,
            &mut rng::stream(s_geom),
        );
        let out = apply_geom(
            &sample.frame1,
            &sample.frame2,
            &sample.flow,
            &geom,
            FlowResample::Bilinear,
        )?;
        let occ = geometry_occlusion(&sample.occ, geom.shared.invert()?, &out.flow, &out.invalid);
        (out.frame1, out.frame2, out.flow, occ, out.invalid)
    } else {
        (
            sample.frame1.clone(),
            sample.frame2.clone(),
            sample.flow.clone(),
            sample.occ.clone(),
            OcclusionMask::new(w, h),
        )
    };

    if color_on {
        let aug = ColorAugment::sample(ranges, 1.0, &mut rng::stream(s_color));
        frame1 = apply_color(&frame1, &aug, &mut rng::stream(s_noise1));
        frame2 = apply_color(&frame2, &aug, &mut rng::stream(s_noise2));
        if mode.color_between {
            let delta = ColorAugment::sample(
                ranges,
                ranges.between_frac,
                &mut rng::stream(s_color_delta),
            );
            frame2 = apply_color(&frame2, &delta, &mut rng::stream(s_noise_delta));
        }
    }

    Ok(AugmentedSample {
        sample: Sample {
            frame1,
            frame2,
            flow,
            occ,
        },
        invalid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{layer_motion, WarpMap};
    use crate::raster::{backward_warp_mae, render_pair, topmost_layer};
    use crate::scene::{BackgroundSpec, LayerSpec, SceneSpec, OBJECT_TEXTURE_DIM};
    use crate::shapes::{rasterize_mask, ShapeSpec};
    use crate::textures::{TextureSource, TextureSpec};

    fn noise_image(width: u32, height: u32, seed: u64) -> ImageBuffer {
        let mut r = rng::stream(seed);
        let n = width as usize * height as usize * 3;
        let data = (0..n).map(|_| rng::uniform(&mut r, 0.0, 1.0) as f32).collect();
        ImageBuffer::from_data(width, height, 3, data)
    }

    fn patterned_flow(width: u32, height: u32) -> FlowField {
        let mut f = FlowField::new(width, height);
        for y in 0..height {
            for x in 0..width {
                f.set(x, y, (x % 7) as f32 * 0.5 - 1.0, (y % 5) as f32 * 0.25);
            }
        }
        f
    }

    fn synthetic_sample(width: u32, height: u32) -> Sample {
        Sample {
            frame1: noise_image(width, height, 31),
            frame2: noise_image(width, height, 32),
            flow: patterned_flow(width, height),
            occ: OcclusionMask::new(width, height),
        }
    }

    #[test]
    fn identity_color_is_a_bitwise_noop() {
        let img = noise_image(16, 12, 1);
        let out = apply_color(&img, &ColorAugment::identity(), &mut rng::stream(2));
        assert_eq!(out, img);
    }

    #[test]
    fn color_formula_matches_closed_forms() {
        let flat = ImageBuffer::from_data(4, 3, 3, vec![0.5; 36]);
        let brighter = apply_color(
            &flat,
            &ColorAugment {
                brightness_offset: 0.1,
                ..ColorAugment::identity()
            },
            &mut rng::stream(3),
        );
        for &v in brighter.data() {
            assert!((v - 0.6).abs() < 1e-6);
        }

        // Contrast 2 about mid-gray clips 0.25 / 0.75 to the gamut ends.
        let steps = ImageBuffer::from_data(2, 1, 3, vec![0.25, 0.25, 0.25, 0.75, 0.75, 0.75]);
        let hard = apply_color(
            &steps,
            &ColorAugment {
                contrast_gain: 2.0,
                ..ColorAugment::identity()
            },
            &mut rng::stream(3),
        );
        assert_eq!(hard.pixel(0, 0), &[0.0, 0.0, 0.0]);
        assert_eq!(hard.pixel(1, 0), &[1.0, 1.0, 1.0]);

        // Clipping keeps everything in gamut.
        let bright = apply_color(
            &noise_image(8, 8, 4),
            &ColorAugment {
                brightness_offset: 0.2,
                contrast_gain: 2.0,
                ..ColorAugment::identity()
            },
            &mut rng::stream(3),
        );
        for &v in bright.data() {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let img = noise_image(20, 20, 5);
        let aug = ColorAugment {
            noise_std: 0.04,
            ..ColorAugment::identity()
        };
        let a = apply_color(&img, &aug, &mut rng::stream(7));
        let b = apply_color(&img, &aug, &mut rng::stream(7));
        let c = apply_color(&img, &aug, &mut rng::stream(8));
        assert_eq!(a, b);
        assert_ne!(a, c);

        let mean_abs: f64 = a
            .data()
            .iter()
            .zip(img.data())
            .map(|(&x, &y)| (x - y).abs() as f64)
            .sum::<f64>()
            / a.data().len() as f64;
        assert!(mean_abs > 0.01 && mean_abs < 0.08, "mean |noise| {mean_abs}");
        assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn identity_geometry_is_a_bitwise_noop() {
        let s = synthetic_sample(24, 18);
        let out = apply_geom(
            &s.frame1,
            &s.frame2,
            &s.flow,
            &GeomAugment::identity(),
            FlowResample::Bilinear,
        )
        .unwrap();
        assert_eq!(out.frame1, s.frame1);
        assert_eq!(out.frame2, s.frame2);
        assert_eq!(out.flow, s.flow);
        assert_eq!(out.invalid.count(), 0);
    }

    #[test]
    fn integer_translation_relabels_exactly() {
        let s = synthetic_sample(32, 24);
        let aug = GeomAugment {
            shared: Affine2::translate(5.0, -3.0),
            incremental: Affine2::IDENTITY,
        };
        let out = apply_geom(&s.frame1, &s.frame2, &s.flow, &aug, FlowResample::Bilinear).unwrap();

        for y in 0..24u32 {
            for x in 0..32u32 {
                let inside = x >= 5 && (y as i64) < 24 - 3;
                assert_eq!(out.invalid.get(x, y), !inside, "validity at {x},{y}");
                if inside {
                    assert_eq!(out.flow.get(x, y), s.flow.get(x - 5, y + 3));
                    assert_eq!(out.frame1.pixel(x, y), s.frame1.pixel(x - 5, y + 3));
                }
            }
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let s = synthetic_sample(16, 16);
        let flow = FlowField::new(16, 15);
        assert!(matches!(
            apply_geom(
                &s.frame1,
                &s.frame2,
                &flow,
                &GeomAugment::identity(),
                FlowResample::Bilinear
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn between_flag_controls_the_incremental_transform() {
        let ranges = AugmentRanges::default();
        let fixed = GeomAugment::sample(&ranges, 64, 48, false, &mut rng::stream(9));
        assert_eq!(fixed.incremental, Affine2::IDENTITY);
        assert_ne!(fixed.shared, Affine2::IDENTITY);
        let moving = GeomAugment::sample(&ranges, 64, 48, true, &mut rng::stream(9));
        assert_ne!(moving.incremental, Affine2::IDENTITY);
    }

    #[test]
    fn all_off_mode_returns_the_sample_unchanged() {
        let s = synthetic_sample(20, 20);
        let out = augment_sample(
            &s,
            AugmentMode::default(),
            &AugmentRanges::default(),
            &mut rng::stream(10),
        )
        .unwrap();
        assert_eq!(out.sample, s);
        assert_eq!(out.invalid.count(), 0);
    }

    #[test]
    fn between_switches_only_touch_frame_two() {
        let s = synthetic_sample(28, 22);
        let ranges = AugmentRanges::default();
        let run = |mode: AugmentMode| {
            augment_sample(&s, mode, &ranges, &mut rng::stream(11)).unwrap()
        };

        let both = run(AugmentMode {
            color_both: true,
            ..AugmentMode::default()
        });
        let between = run(AugmentMode {
            color_both: true,
            color_between: true,
            ..AugmentMode::default()
        });
        assert_eq!(both.sample.frame1, between.sample.frame1);
        assert_ne!(both.sample.frame2, between.sample.frame2);
        assert_eq!(both.sample.flow, between.sample.flow);

        let geom = run(AugmentMode {
            geom_both: true,
            ..AugmentMode::default()
        });
        let geom_between = run(AugmentMode {
            geom_both: true,
            geom_between: true,
            ..AugmentMode::default()
        });
        assert_eq!(geom.sample.frame1, geom_between.sample.frame1);
        assert_ne!(geom.sample.frame2, geom_between.sample.frame2);
        assert_ne!(geom.sample.flow, geom_between.sample.flow);
    }

    // -----------------------------------------------------------------
    // Recomposition oracle: relabeled flow must equal the ground truth of
    // the scene whose warps are conjugated by the augment transforms.
    // -----------------------------------------------------------------

    fn tex_map_for(shape: &ShapeSpec) -> Affine2 {
        let (lo, hi) = shape.local_bbox();
        let d = OBJECT_TEXTURE_DIM as f64;
        Affine2::compose(
            Affine2::scale_xy(d / (hi.x - lo.x), d / (hi.y - lo.y)),
            Affine2::translate(-lo.x, -lo.y),
        )
    }

    fn oracle_scene(width: u32, height: u32) -> SceneSpec {
        let bg_motion = WarpMap::affine(Affine2::compose(
            Affine2::translate(2.0, 1.0),
            Affine2::about(
                Point::new(width as f64 / 2.0, height as f64 / 2.0),
                Affine2::rotate_deg(1.5),
            ),
        ));
        let mk = |shape: ShapeSpec, place: Affine2, own: Affine2, seed: u64| LayerSpec {
            tex_map: tex_map_for(&shape),
            motion: layer_motion(&bg_motion, &WarpMap::affine(own)),
            own_motion: WarpMap::affine(own),
            texture: TextureSpec::Clouds {
                width: OBJECT_TEXTURE_DIM,
                height: OBJECT_TEXTURE_DIM,
                octaves: 4,
                seed,
            },
            shape,
            place,
        };
        SceneSpec {
            width,
            height,
            supersample: 4,
            background: BackgroundSpec {
                texture: TextureSpec::Clouds {
                    width,
                    height,
                    octaves: 3,
                    seed: 12,
                },
                place: Affine2::IDENTITY,
                motion: bg_motion.clone(),
            },
            layers: vec![
                mk(
                    ShapeSpec::solid_box(10.0, 8.0),
                    Affine2::translate(30.0, 28.0),
                    Affine2::translate(6.0, -3.0),
                    13,
                ),
                mk(
                    ShapeSpec::solid_ellipse(9.0, 6.0),
                    Affine2::translate(66.0, 44.0),
                    Affine2::about(Point::new(66.0, 44.0), Affine2::rotate_deg(8.0)),
                    14,
                ),
            ],
        }
    }

    fn conjugate(scene: &SceneSpec, shared: Affine2, incremental: Affine2) -> SceneSpec {
        let fold = |m: &WarpMap| {
            let post = WarpMap::affine(Affine2::compose(incremental, shared));
            let pre = WarpMap::affine(shared.invert().unwrap());
            WarpMap::compose(&WarpMap::compose(&post, m), &pre)
        };
        let mut out = scene.clone();
        out.background.place = Affine2::compose(shared, scene.background.place);
        out.background.motion = fold(&scene.background.motion);
        for layer in &mut out.layers {
            layer.place = Affine2::compose(shared, layer.place);
            layer.motion = fold(&layer.motion);
        }
        out
    }

    #[test]
    fn relabeled_flow_matches_the_recomposed_scene() {
        let (w, h) = (96u32, 72u32);
        let scene = oracle_scene(w, h);
        let source = TextureSource::procedural_only();
        let sample = render_pair(&scene, &source).unwrap();

        let center = Point::new(w as f64 / 2.0, h as f64 / 2.0);
        let shared = Affine2::compose(
            Affine2::translate(3.0, -2.0),
            Affine2::about(
                center,
                Affine2::compose(Affine2::rotate_deg(10.0), Affine2::scale(1.2)),
            ),
        );
        let incremental = Affine2::about(center, Affine2::scale(1.05));
        let aug = GeomAugment { shared, incremental };
        let out = apply_geom(
            &sample.frame1,
            &sample.frame2,
            &sample.flow,
            &aug,
            FlowResample::Bilinear,
        )
        .unwrap();

        // Ground truth of the conjugated scene.
        let recomposed = conjugate(&scene, shared, incremental);
        let oracle = render_pair(&recomposed, &source).unwrap();

        // Bilinear flow resampling mixes labels around source-space label
        // edges and clamps at the frame border; skip target pixels whose
        // pullback lands within 2 px of either (the flow is piecewise
        // affine, so resampling is exact everywhere else).
        let masks: Vec<_> = scene
            .layers
            .iter()
            .map(|l| rasterize_mask(&l.shape, l.place, w, h, 4).unwrap())
            .collect();
        let label =
            |x: u32, y: u32| topmost_layer(&masks, x, y).map(|i| i as i64).unwrap_or(-1);
        let near_edge = |x: u32, y: u32| {
            let own = label(x, y);
            for dy in -2i64..=2 {
                for dx in -2i64..=2 {
                    let nx = (x as i64 + dx).clamp(0, w as i64 - 1);
                    let ny = (y as i64 + dy).clamp(0, h as i64 - 1);
                    if label(nx as u32, ny as u32) != own {
                        return true;
                    }
                }
            }
            false
        };
        let shared_inv = shared.invert().unwrap();

        let mut checked = 0u32;
        let mut worst = 0.0f64;
        for y in 0..h {
            for x in 0..w {
                if out.invalid.get(x, y) {
                    continue;
                }
                let p = shared_inv.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
                let border = p.x < 2.0
                    || p.y < 2.0
                    || p.x > w as f64 - 2.0
                    || p.y > h as f64 - 2.0;
                let sx = (p.x.floor().max(0.0) as u32).min(w - 1);
                let sy = (p.y.floor().max(0.0) as u32).min(h - 1);
                if border || near_edge(sx, sy) {
                    continue;
                }
                let (au, av) = out.flow.get(x, y);
                let (ou, ov) = oracle.flow.get(x, y);
                let err = ((au - ou) as f64).hypot((av - ov) as f64);
                worst = worst.max(err);
                checked += 1;
            }
        }
        assert!(checked > (w * h) / 2, "only {checked} pixels checked");
        assert!(worst < 1e-3, "worst flow error {worst}");

        // The relabeled pair stays photometrically consistent.
        let occ = geometry_occlusion(
            &sample.occ,
            shared.invert().unwrap(),
            &out.flow,
            &out.invalid,
        );
        let mae = backward_warp_mae(&out.frame1, &out.frame2, &out.flow, &occ, 1);
        assert!(mae < 0.03, "augmented backward-warp MAE {mae}");
    }

    #[test]
    fn random_geometry_keeps_warp_consistency() {
        let scene = oracle_scene(96, 72);
        let source = TextureSource::procedural_only();
        let sample = render_pair(&scene, &source).unwrap();
        let mode = AugmentMode {
            geom_both: true,
            geom_between: true,
            ..AugmentMode::default()
        };
        for seed in [21, 22] {
            let out = augment_sample(
                &sample,
                mode,
                &AugmentRanges::default(),
                &mut rng::stream(seed),
            )
            .unwrap();
            let s = &out.sample;
            let mae = backward_warp_mae(&s.frame1, &s.frame2, &s.flow, &s.occ, 1);
            assert!(mae < 0.03, "seed {seed}: augmented MAE {mae}");
        }
    }
}
