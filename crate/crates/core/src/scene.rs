//! Scene sampling: one background plus a z-ordered stack of textured,
//! independently moving shape layers, all drawn deterministically from
//! `(config, sample_index)`.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::config::{Dist, GenConfig, MotionDistribution};
use crate::error::Error;
use crate::geometry::{layer_motion, Affine2, DeformField, Point, WarpMap};
use crate::rng::{self, int_inclusive, unit};
use crate::shapes::{punch_holes, sample_shape, ShapeSpec};
use crate::textures::{TextureFamily, TextureSpec};
use crate::Result;

/// Edge of the virtual texture square object layers are mapped against.
/// Photo textures with other dimensions are rescaled by the renderer.
pub const OBJECT_TEXTURE_DIM: u32 = 192;

const BG_DEFORM_GRID: (u32, u32) = (8, 6);
const OBJ_DEFORM_GRID: (u32, u32) = (4, 4);
/// Fraction of the footprint an initial placement must keep in frame.
const MIN_IN_FRAME: f64 = 0.25;
const PLACEMENT_ATTEMPTS: u32 = 100;

// ---------------------------------------------------------------------------
// Spec types

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSpec {
    pub texture: TextureSpec,
    /// Virtual frame-sized texture coordinates -> scene coordinates.
    pub place: Affine2,
    pub motion: WarpMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub shape: ShapeSpec,
    pub texture: TextureSpec,
    /// Shape-local coordinates -> scene coordinates.
    pub place: Affine2,
    /// Shape-local coordinates -> virtual texture coordinates (a square of
    /// edge [`OBJECT_TEXTURE_DIM`] covering the shape's bounding box).
    pub tex_map: Affine2,
    /// Motion relative to the background.
    pub own_motion: WarpMap,
    /// Resolved scene motion: own motion carried along by the background's.
    pub motion: WarpMap,
}

/// A fully sampled two-frame scene. Layer order is z-order: later layers
/// occlude earlier ones, and all layers occlude the background.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub supersample: u32,
    pub background: BackgroundSpec,
    pub layers: Vec<LayerSpec>,
}

// ---------------------------------------------------------------------------
// Sampling

/// Samples the complete scene for `sample_index`. Pure in
/// `(config, sample_index)`: the per-sample seed is a 64-bit mix of the
/// master seed and the index, so samples are independent and may be
/// generated in any order or in parallel.
pub fn sample_scene(config: &GenConfig, sample_index: u64) -> Result<SceneSpec> {
    let seed = rng::sample_seed(config.master_seed, sample_index);
    let mut rng = rng::stream(seed);
    let (w, h) = (config.width as f64, config.height as f64);
    let frame_center = Point::new(w / 2.0, h / 2.0);

    let bg_texture = texture_spec(config, config.width, config.height, &mut rng);
    let bg_place = sample_background_place(config, frame_center, &mut rng);
    let bg_motion = sample_warp(
        &config.background_motion,
        frame_center,
        BG_DEFORM_GRID,
        Point::new(0.0, 0.0),
        (w, h),
        &mut rng,
    );

    let n = int_inclusive(&mut rng, config.n_objects.0 as i64, config.n_objects.1 as i64);
    let mut layers = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let mut shape = sample_shape(&config.shape_classes, &mut rng)?;
        if config.holes {
            punch_holes(&mut shape, &mut rng);
        }
        let texture = texture_spec(config, OBJECT_TEXTURE_DIM, OBJECT_TEXTURE_DIM, &mut rng);
        let place = place_object(&shape, config, &mut rng)?;
        let anchor = place.apply(Point::new(0.0, 0.0));
        let (dom_origin, dom_size) = deform_domain(&shape, place);
        let own_motion = sample_warp(
            &config.object_motion,
            anchor,
            OBJ_DEFORM_GRID,
            dom_origin,
            dom_size,
            &mut rng,
        );
        let motion = layer_motion(&bg_motion, &own_motion);
        let tex_map = texture_map(&shape);
        layers.push(LayerSpec { shape, texture, place, tex_map, own_motion, motion });
    }

    Ok(SceneSpec {
        width: config.width,
        height: config.height,
        supersample: config.supersample,
        background: BackgroundSpec { texture: bg_texture, place: bg_place, motion: bg_motion },
        layers,
    })
}

/// One texture reference; always consumes exactly one seed draw.
fn texture_spec(config: &GenConfig, w: u32, h: u32, rng: &mut ChaCha8Rng) -> TextureSpec {
    let pick = rng.next_u64();
    match config.texture.family {
        TextureFamily::Plasma => TextureSpec::Plasma { width: w, height: h, seed: pick },
        TextureFamily::Clouds => TextureSpec::Clouds {
            width: w,
            height: h,
            octaves: config.texture.clouds_octaves,
            seed: pick,
        },
        TextureFamily::Photo => TextureSpec::Photo { pick },
    }
}

/// Background placement: mild zoom and tilt about the frame center plus a
/// small shift, keeping the texture covering the frame.
fn sample_background_place(config: &GenConfig, center: Point, rng: &mut ChaCha8Rng) -> Affine2 {
    let scale = config.placement.bg_scale.sample(rng);
    let rot = config.placement.bg_rotation.sample(rng);
    let mag = config.placement.bg_translation.sample(rng);
    let ang = unit(rng) * std::f64::consts::TAU;
    let linear = Affine2::compose(Affine2::rotate_deg(rot), Affine2::scale(scale));
    Affine2::compose(
        Affine2::translate(mag * libm::cos(ang), mag * libm::sin(ang)),
        Affine2::about(center, linear),
    )
}

/// Rejection-samples an object placement until at least [`MIN_IN_FRAME`] of
/// the footprint lands inside the frame.
fn place_object(shape: &ShapeSpec, config: &GenConfig, rng: &mut ChaCha8Rng) -> Result<Affine2> {
    let (w, h) = (config.width as f64, config.height as f64);
    for _ in 0..PLACEMENT_ATTEMPTS {
        let scale = config.placement.scale.sample(rng);
        let rot = config.placement.rotation.sample(rng);
        let pos = Point::new(unit(rng) * w, unit(rng) * h);
        let linear = Affine2::compose(Affine2::rotate_deg(rot), Affine2::scale(scale));
        let place = Affine2::compose(Affine2::translate(pos.x, pos.y), linear);
        if in_frame_fraction(shape, place, w, h) >= MIN_IN_FRAME {
            return Ok(place);
        }
    }
    Err(Error::PlacementFailure { attempts: PLACEMENT_ATTEMPTS })
}

/// Fraction of the placed footprint inside `[0,w) x [0,h)`, estimated on an
/// 8x8 probe grid over the hull (stroke bands and holes ignored so thin
/// shapes probe reliably).
fn in_frame_fraction(shape: &ShapeSpec, place: Affine2, w: f64, h: f64) -> f64 {
    let (lo, hi) = shape.local_bbox();
    let mut in_shape = 0u32;
    let mut in_frame = 0u32;
    for gy in 0..8 {
        for gx in 0..8 {
            let p = Point::new(
                lo.x + (hi.x - lo.x) * ((gx as f64 + 0.5) / 8.0),
                lo.y + (hi.y - lo.y) * ((gy as f64 + 0.5) / 8.0),
            );
            if !shape.hull_contains(p) {
                continue;
            }
            in_shape += 1;
            let q = place.apply(p);
            if q.x >= 0.0 && q.x < w && q.y >= 0.0 && q.y < h {
                in_frame += 1;
            }
        }
    }
    if in_shape == 0 {
        // A sliver so thin the grid misses it entirely: fall back to its
        // bounding-box corners and center so placement stays total.
        let cx = (lo.x + hi.x) / 2.0;
        let cy = (lo.y + hi.y) / 2.0;
        let probes = [
            Point::new(lo.x, lo.y),
            Point::new(hi.x, lo.y),
            Point::new(lo.x, hi.y),
            Point::new(hi.x, hi.y),
            Point::new(cx, cy),
        ];
        let inside = probes
            .iter()
            .filter(|&&p| {
                let q = place.apply(p);
                q.x >= 0.0 && q.x < w && q.y >= 0.0 && q.y < h
            })
            .count();
        return inside as f64 / probes.len() as f64;
    }
    in_frame as f64 / in_shape as f64
}

/// Deformation control-grid domain: the placed bounding box, padded so the
/// field stays smooth across the footprint in both frames.
fn deform_domain(shape: &ShapeSpec, place: Affine2) -> (Point, (f64, f64)) {
    let (lo, hi) = shape.local_bbox();
    let corners = [
        Point::new(lo.x, lo.y),
        Point::new(hi.x, lo.y),
        Point::new(lo.x, hi.y),
        Point::new(hi.x, hi.y),
    ];
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let q = place.apply(c);
        min = Point::new(min.x.min(q.x), min.y.min(q.y));
        max = Point::new(max.x.max(q.x), max.y.max(q.y));
    }
    const PAD: f64 = 16.0;
    (
        Point::new(min.x - PAD, min.y - PAD),
        (max.x - min.x + 2.0 * PAD, max.y - min.y + 2.0 * PAD),
    )
}

/// Shape-local coordinates -> virtual texture square over the local bbox.
fn texture_map(shape: &ShapeSpec) -> Affine2 {
    let (lo, hi) = shape.local_bbox();
    let sx = OBJECT_TEXTURE_DIM as f64 / (hi.x - lo.x);
    let sy = OBJECT_TEXTURE_DIM as f64 / (hi.y - lo.y);
    Affine2::compose(Affine2::scale_xy(sx, sy), Affine2::translate(-lo.x, -lo.y))
}

/// Draws one warp from a motion distribution. Disabled components contribute
/// their exact identity; the affine part rotates and scales about `center`.
fn sample_warp(
    motion: &MotionDistribution,
    center: Point,
    grid: (u32, u32),
    domain_origin: Point,
    domain_size: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> WarpMap {
    let (dx, dy) = if motion.enable_translation {
        sample_translation(&motion.translation, rng)
    } else {
        (0.0, 0.0)
    };
    let rot = if motion.enable_rotation { motion.rotation.sample(rng) } else { 0.0 };
    let scale = if motion.enable_scaling {
        libm::exp(motion.log_scale.sample(rng))
    } else {
        1.0
    };
    let linear = Affine2::compose(Affine2::rotate_deg(rot), Affine2::scale(scale));
    let affine = Affine2::compose(Affine2::translate(dx, dy), Affine2::about(center, linear));
    let deform = if motion.enable_deform {
        let amplitude = motion.deform_amplitude.sample(rng).max(0.0);
        if amplitude > 1e-9 {
            Some(DeformField::sample(rng, grid.0, grid.1, domain_origin, domain_size, amplitude))
        } else {
            None
        }
    } else {
        None
    };
    WarpMap::new(affine, deform)
}

/// Normal translations draw each component; uniform translations draw a
/// magnitude and a uniform direction, so scaling min/max scales displacement
/// lengths exactly.
fn sample_translation(dist: &Dist, rng: &mut ChaCha8Rng) -> (f64, f64) {
    match dist {
        Dist::Normal { .. } => (dist.sample(rng), dist.sample(rng)),
        Dist::Uniform { .. } => {
            let mag = dist.sample(rng);
            let ang = unit(rng) * std::f64::consts::TAU;
            (mag * libm::cos(ang), mag * libm::sin(ang))
        }
    }
}

// ---------------------------------------------------------------------------
// Full pipeline

/// The complete per-index pipeline: scene sampling, rendering, dataset
/// augmentation, and camera degradation, each stage switched by the config.
/// `(config, index)` fully determines the result, so batches can run in any
/// order and on any number of threads.
pub fn generate_sample(
    config: &GenConfig,
    source: &crate::textures::TextureSource,
    index: u64,
) -> Result<crate::raster::Sample> {
    let scene = sample_scene(config, index)?;
    let mut sample = crate::raster::render_pair(&scene, source)?;
    if config.augment_mode.any() {
        let mut rng = crate::augment::augment_stream(config.master_seed, index);
        sample = crate::augment::augment_sample(
            &sample,
            config.augment_mode,
            &config.augment,
            &mut rng,
        )?
        .sample;
    }
    if !config.camera.is_identity() {
        sample = crate::degrade::apply_profile(&sample, &config.camera);
    }
    Ok(sample)
}

// ---------------------------------------------------------------------------
