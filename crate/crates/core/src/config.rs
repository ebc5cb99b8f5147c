//! Dataset recipes: motion distributions, generation parameters, canonical
//! text serialization, and config hashing.
//!
//! A dataset is a pure function of its `GenConfig`. The config serializes
//! to a canonical text form — sorted `key = value` lines, UTF-8 — whose
//! SHA-256 identifies the dataset; parsing that text back yields an equal
//! config (lossless round-trip). Missing keys take documented defaults;
//! emitted text always lists every key.

use sha2::{Digest, Sha256};

use crate::augment::{AugmentMode, AugmentRanges};
use crate::degrade::{BayerPattern, CameraProfile};
use crate::error::Error;
use crate::rng;
use crate::shapes::ShapeClass;
use crate::textures::TextureFamily;
use crate::Result;

/// A scalar sampling distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    /// Zero-mean normal with the given standard deviation.
    Normal { std: f64 },
    /// Uniform over `[min, max]`.
    Uniform { min: f64, max: f64 },
}

impl Dist {
    pub fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        match *self {
            Dist::Normal { std } => std * rng::standard_normal(rng),
            Dist::Uniform { min, max } => rng::uniform(rng, min, max),
        }
    }

    /// All magnitude parameters multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Dist {
        match *self {
            Dist::Normal { std } => Dist::Normal { std: std * k },
            Dist::Uniform { min, max } => Dist::Uniform { min: min * k, max: max * k },
        }
    }

    fn to_text(self) -> String {
        match self {
            Dist::Normal { std } => format!("normal {std}"),
            Dist::Uniform { min, max } => format!("uniform {min} {max}"),
        }
    }

    fn parse(s: &str) -> std::result::Result<Dist, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["normal", std] => Ok(Dist::Normal {
                std: std.parse().map_err(|_| format!("bad number `{std}`"))?,
            }),
            ["uniform", min, max] => {
                let min: f64 = min.parse().map_err(|_| format!("bad number `{min}`"))?;
                let max: f64 = max.parse().map_err(|_| format!("bad number `{max}`"))?;
                if min > max {
                    return Err(format!("uniform min {min} > max {max}"));
                }
                Ok(Dist::Uniform { min, max })
            }
            _ => Err(format!("expected `normal <std>` or `uniform <min> <max>`, got `{s}`")),
        }
    }
}

/// Frame-to-frame motion sampling parameters for one group (background or
/// objects).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionDistribution {
    /// Translation draw, pixels. Normal samples each component; Uniform
    /// samples a magnitude (with uniform direction).
    pub translation: Dist,
    /// Rotation draw, degrees.
    pub rotation: Dist,
    /// Log scale-factor draw (0 = no scaling).
    pub log_scale: Dist,
    /// Non-rigid deformation amplitude draw, pixels (negative draws clamp
    /// to zero).
    pub deform_amplitude: Dist,
    pub enable_translation: bool,
    pub enable_rotation: bool,
    pub enable_scaling: bool,
    pub enable_deform: bool,
    /// Bookkeeping factor recording how far this distribution has been
    /// scaled from its base (see [`scale_distribution`]).
    pub global_scale: f64,
}

/// Returns `motion` with every magnitude parameter multiplied by `k`
/// (enable flags unchanged, `global_scale` multiplied for provenance).
pub fn scale_distribution(motion: &MotionDistribution, k: f64) -> Result<MotionDistribution> {
    if k <= 0.0 {
        return Err(Error::NonpositiveFactor(k));
    }
    Ok(MotionDistribution {
        translation: motion.translation.scaled(k),
        rotation: motion.rotation.scaled(k),
        log_scale: motion.log_scale.scaled(k),
        deform_amplitude: motion.deform_amplitude.scaled(k),
        global_scale: motion.global_scale * k,
        ..*motion
    })
}

/// Texture selection for generated scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureConfig {
    pub family: TextureFamily,
    pub clouds_octaves: u32,
}

/// Initial-placement draw ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementConfig {
    /// Object scale factor at placement.
    pub scale: Dist,
    /// Object orientation at placement, degrees.
    pub rotation: Dist,
    /// Background texture zoom at placement.
    pub bg_scale: Dist,
    /// Background orientation at placement, degrees.
    pub bg_rotation: Dist,
    /// Background shift magnitude at placement, pixels.
    pub bg_translation: Dist,
}

/// Complete recipe for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub width: u32,
    pub height: u32,
    pub supersample: u32,
    pub master_seed: u64,
    /// Inclusive range for the per-sample object count.
    pub n_objects: (u32, u32),
    /// Sorted, deduplicated shape class set.
    pub shape_classes: Vec<ShapeClass>,
    /// Punch holes into solid objects.
    pub holes: bool,
    pub texture: TextureConfig,
    pub background_motion: MotionDistribution,
    pub object_motion: MotionDistribution,
    pub placement: PlacementConfig,
    pub augment_mode: AugmentMode,
    pub augment: AugmentRanges,
    pub camera: CameraProfile,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            width: 512,
            height: 384,
            supersample: 4,
            master_seed: 1,
            n_objects: (16, 24),
            shape_classes: vec![ShapeClass::Polygon, ShapeClass::Ellipse],
            holes: false,
            texture: TextureConfig { family: TextureFamily::Clouds, clouds_octaves: 6 },
            background_motion: MotionDistribution {
                translation: Dist::Normal { std: 7.0 },
                rotation: Dist::Normal { std: 4.0 },
                log_scale: Dist::Normal { std: 0.06 },
                deform_amplitude: Dist::Uniform { min: 0.0, max: 4.0 },
                enable_translation: true,
                enable_rotation: true,
                enable_scaling: true,
                enable_deform: false,
                global_scale: 1.0,
            },
            object_motion: MotionDistribution {
                translation: Dist::Normal { std: 9.0 },
                rotation: Dist::Normal { std: 7.0 },
                log_scale: Dist::Normal { std: 0.08 },
                deform_amplitude: Dist::Uniform { min: 0.0, max: 3.0 },
                enable_translation: true,
                enable_rotation: true,
                enable_scaling: true,
                enable_deform: false,
                global_scale: 1.0,
            },
            placement: PlacementConfig {
                scale: Dist::Uniform { min: 0.35, max: 1.1 },
                rotation: Dist::Uniform { min: 0.0, max: 360.0 },
                bg_scale: Dist::Uniform { min: 1.05, max: 1.4 },
                bg_rotation: Dist::Uniform { min: -8.0, max: 8.0 },
                bg_translation: Dist::Uniform { min: 0.0, max: 30.0 },
            },
            augment_mode: AugmentMode::default(),
            augment: AugmentRanges::default(),
            camera: CameraProfile::default(),
        }
    }
}

impl GenConfig {
    /// Canonical text form: every key, sorted, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut kv: Vec<(String, String)> = Vec::with_capacity(64);
        let mut put = |k: &str, v: String| kv.push((k.to_string(), v));

        put("width", self.width.to_string());
        put("height", self.height.to_string());
        put("supersample", self.supersample.to_string());
        put("master_seed", self.master_seed.to_string());
        put("objects.min", self.n_objects.0.to_string());
        put("objects.max", self.n_objects.1.to_string());
        let classes: Vec<&str> = self.shape_classes.iter().map(|c| c.name()).collect();
        put("shapes.classes", classes.join(","));
        put("shapes.holes", self.holes.to_string());
        put("texture.family", self.texture.family.name().to_string());
        put("texture.clouds_octaves", self.texture.clouds_octaves.to_string());

        for (prefix, m) in [("bg", &self.background_motion), ("obj", &self.object_motion)] {
            put(&format!("{prefix}.translation"), m.translation.to_text());
            put(&format!("{prefix}.rotation"), m.rotation.to_text());
            put(&format!("{prefix}.log_scale"), m.log_scale.to_text());
            put(&format!("{prefix}.deform"), m.deform_amplitude.to_text());
            put(&format!("{prefix}.enable_translation"), m.enable_translation.to_string());
            put(&format!("{prefix}.enable_rotation"), m.enable_rotation.to_string());
            put(&format!("{prefix}.enable_scaling"), m.enable_scaling.to_string());
            put(&format!("{prefix}.enable_deform"), m.enable_deform.to_string());
            put(&format!("{prefix}.global_scale"), m.global_scale.to_string());
        }

        put("place.scale", self.placement.scale.to_text());
        put("place.rotation", self.placement.rotation.to_text());
        put("place.bg_scale", self.placement.bg_scale.to_text());
        put("place.bg_rotation", self.placement.bg_rotation.to_text());
        put("place.bg_translation", self.placement.bg_translation.to_text());

        put("aug.color_both", self.augment_mode.color_both.to_string());
        put("aug.color_between", self.augment_mode.color_between.to_string());
        put("aug.geom_both", self.augment_mode.geom_both.to_string());
        put("aug.geom_between", self.augment_mode.geom_between.to_string());
        let a = &self.augment;
        put("aug.brightness", a.brightness.to_string());
        put("aug.contrast_min", a.contrast.0.to_string());
        put("aug.contrast_max", a.contrast.1.to_string());
        put("aug.channel_gain_min", a.channel_gain.0.to_string());
        put("aug.channel_gain_max", a.channel_gain.1.to_string());
        put("aug.noise_std", a.noise_std.to_string());
        put("aug.shift_frac", a.shift_frac.to_string());
        put("aug.rotation_deg", a.rotation_deg.to_string());
        put("aug.scale_min", a.scale.0.to_string());
        put("aug.scale_max", a.scale.1.to_string());
        put("aug.between_frac", a.between_frac.to_string());

        let c = &self.camera;
        put("cam.radial_blur", c.radial_blur_strength.to_string());
        put("cam.gaussian_sigma", c.gaussian_sigma.to_string());
        put("cam.contrast_boost", c.contrast_boost.to_string());
        put(
            "cam.bayer",
            match c.bayer {
                None => "none".to_string(),
                Some(p) => p.name().to_string(),
            },
        );

        kv.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (k, v) in kv {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Unknown keys and malformed values are
    /// rejected; absent keys keep their defaults. Lines starting with `#`
    /// and blank lines are ignored.
    pub fn from_text(text: &str) -> Result<GenConfig> {
        let mut cfg = GenConfig::default();
        let mut seen: std::collections::BTreeSet<String> = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::BadConfig { line: line_no, reason };
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad("expected `key = value`".into()));
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            apply_key(&mut cfg, key, value).map_err(bad)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` override using the text-form keys. The
    /// caller revalidates once all overrides are in.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        apply_key(self, key.trim(), value.trim())
            .map_err(|reason| Error::BadConfig { line: 0, reason })
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Semantic validation beyond per-line parsing.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| Error::BadConfig { line: 0, reason: reason.to_string() };
        // The frame doubles as the background texture's canvas, so the
        // procedural texture floor is the frame floor.
        if self.width < crate::textures::MIN_TEXTURE_DIM
            || self.height < crate::textures::MIN_TEXTURE_DIM
        {
            return Err(fail("width and height must be at least 64"));
        }
        if !matches!(self.supersample, 1 | 2 | 4 | 8) {
            return Err(fail("supersample must be 1, 2, 4, or 8"));
        }
        if self.n_objects.0 > self.n_objects.1 {
            return Err(fail("objects.min must not exceed objects.max"));
        }
        if self.shape_classes.is_empty() {
            return Err(fail("shapes.classes must be nonempty"));
        }
        if !(1..=10).contains(&self.texture.clouds_octaves) {
            return Err(fail("texture.clouds_octaves must be in 1..=10"));
        }
        if self.camera.contrast_boost < 1.0 {
            return Err(fail("cam.contrast_boost must be >= 1"));
        }
        if self.camera.radial_blur_strength < 0.0 || self.camera.gaussian_sigma < 0.0 {
            return Err(fail("camera blur parameters must be >= 0"));
        }
        Ok(())
    }

    /// Both motion groups scaled by `k` (the 2x/3x displacement presets).
    pub fn with_motion_scaled(&self, k: f64) -> Result<GenConfig> {
        let mut cfg = self.clone();
        cfg.background_motion = scale_distribution(&self.background_motion, k)?;
        cfg.object_motion = scale_distribution(&self.object_motion, k)?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("bad number `{v}`"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true/false, got `{v}`")),
    }
}

fn apply_key(cfg: &mut GenConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "width" => cfg.width = parse_num(v)?,
        "height" => cfg.height = parse_num(v)?,
        "supersample" => cfg.supersample = parse_num(v)?,
        "master_seed" => cfg.master_seed = parse_num(v)?,
        "objects.min" => cfg.n_objects.0 = parse_num(v)?,
        "objects.max" => cfg.n_objects.1 = parse_num(v)?,
        "shapes.classes" => {
            let mut classes = Vec::new();
            for part in v.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                classes.push(part.parse::<ShapeClass>()?);
            }
            classes.sort();
            classes.dedup();
            cfg.shape_classes = classes;
        }
        "shapes.holes" => cfg.holes = parse_bool(v)?,
        "texture.family" => cfg.texture.family = v.parse()?,
        "texture.clouds_octaves" => cfg.texture.clouds_octaves = parse_num(v)?,
        _ if key.starts_with("bg.") || key.starts_with("obj.") => {
            let (prefix, field) = key.split_once('.').unwrap();
            let m = if prefix == "bg" {
                &mut cfg.background_motion
            } else {
                &mut cfg.object_motion
            };
            match field {
                "translation" => m.translation = Dist::parse(v)?,
                "rotation" => m.rotation = Dist::parse(v)?,
                "log_scale" => m.log_scale = Dist::parse(v)?,
                "deform" => m.deform_amplitude = Dist::parse(v)?,
                "enable_translation" => m.enable_translation = parse_bool(v)?,
                "enable_rotation" => m.enable_rotation = parse_bool(v)?,
                "enable_scaling" => m.enable_scaling = parse_bool(v)?,
                "enable_deform" => m.enable_deform = parse_bool(v)?,
                "global_scale" => m.global_scale = parse_num(v)?,
                _ => return Err(format!("unknown key `{key}`")),
            }
        }
        "place.scale" => cfg.placement.scale = Dist::parse(v)?,
        "place.rotation" => cfg.placement.rotation = Dist::parse(v)?,
        "place.bg_scale" => cfg.placement.bg_scale = Dist::parse(v)?,
        "place.bg_rotation" => cfg.placement.bg_rotation = Dist::parse(v)?,
        "place.bg_translation" => cfg.placement.bg_translation = Dist::parse(v)?,
        "aug.color_both" => cfg.augment_mode.color_both = parse_bool(v)?,
        "aug.color_between" => cfg.augment_mode.color_between = parse_bool(v)?,
        "aug.geom_both" => cfg.augment_mode.geom_both = parse_bool(v)?,
        "aug.geom_between" => cfg.augment_mode.geom_between = parse_bool(v)?,
        "aug.brightness" => cfg.augment.brightness = parse_num(v)?,
        "aug.contrast_min" => cfg.augment.contrast.0 = parse_num(v)?,
        "aug.contrast_max" => cfg.augment.contrast.1 = parse_num(v)?,
        "aug.channel_gain_min" => cfg.augment.channel_gain.0 = parse_num(v)?,
        "aug.channel_gain_max" => cfg.augment.channel_gain.1 = parse_num(v)?,
        "aug.noise_std" => cfg.augment.noise_std = parse_num(v)?,
        "aug.shift_frac" => cfg.augment.shift_frac = parse_num(v)?,
        "aug.rotation_deg" => cfg.augment.rotation_deg = parse_num(v)?,
        "aug.scale_min" => cfg.augment.scale.0 = parse_num(v)?,
        "aug.scale_max" => cfg.augment.scale.1 = parse_num(v)?,
        "aug.between_frac" => cfg.augment.between_frac = parse_num(v)?,
        "cam.radial_blur" => cfg.camera.radial_blur_strength = parse_num(v)?,
        "cam.gaussian_sigma" => cfg.camera.gaussian_sigma = parse_num(v)?,
        "cam.contrast_boost" => cfg.camera.contrast_boost = parse_num(v)?,
        "cam.bayer" => {
            cfg.camera.bayer = match v {
                "none" => None,
                _ => Some(v.parse::<BayerPattern>()?),
            }
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}
