//! Named, shipped dataset recipes: the shape/motion ladder, texture
//! variants, displacement-scale variants, augmentation modes, and camera
//! degradation profiles. A preset is just a `GenConfig` value; flags can
//! still override individual keys on top.

use crate::config::GenConfig;
use crate::degrade::{BayerPattern, CameraProfile};
use crate::shapes::ShapeClass;
use crate::textures::TextureFamily;

/// One shipped recipe: a stable name, a one-line summary, and the config
/// it denotes.
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> GenConfig,
}

impl Preset {
    pub fn config(&self) -> GenConfig {
        (self.build)()
    }
}

/// Looks up a preset's config by name.
pub fn find(name: &str) -> Option<GenConfig> {
    CATALOG.iter().find(|p| p.name == name).map(|p| p.config())
}

/// All shipped presets, in catalog order.
pub fn catalog() -> &'static [Preset] {
    CATALOG
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Restricts both motion groups to the given components (the shape/motion
/// ladder turns them on cumulatively).
fn with_motions(mut cfg: GenConfig, rotation: bool, scaling: bool, deform: bool) -> GenConfig {
    for m in [&mut cfg.background_motion, &mut cfg.object_motion] {
        m.enable_translation = true;
        m.enable_rotation = rotation;
        m.enable_scaling = scaling;
        m.enable_deform = deform;
    }
    cfg
}

fn shapes(mut cfg: GenConfig, classes: &[ShapeClass]) -> GenConfig {
    cfg.shape_classes = classes.to_vec();
    cfg
}

fn boxes_translation() -> GenConfig {
    let mut cfg = with_motions(GenConfig::default(), false, false, false);
    cfg = shapes(cfg, &[ShapeClass::Box]);
    // Axis-aligned boxes: the plainest dataset in the ladder.
    cfg.placement.rotation = crate::config::Dist::Uniform { min: 0.0, max: 0.0 };
    cfg
}

fn polygons() -> GenConfig {
    shapes(with_motions(GenConfig::default(), false, false, false), &[ShapeClass::Polygon])
}

fn ellipses() -> GenConfig {
    shapes(with_motions(GenConfig::default(), false, false, false), &[ShapeClass::Ellipse])
}

fn polygons_ellipses() -> GenConfig {
    with_motions(GenConfig::default(), false, false, false)
}

fn plus_rotations() -> GenConfig {
    with_motions(GenConfig::default(), true, false, false)
}

fn plus_scaling() -> GenConfig {
    with_motions(GenConfig::default(), true, true, false)
}

fn plus_holes() -> GenConfig {
    let mut cfg = plus_scaling();
    cfg.holes = true;
    cfg
}

fn plus_thin() -> GenConfig {
    let mut cfg = plus_holes();
    cfg.shape_classes = vec![
        ShapeClass::Polygon,
        ShapeClass::Ellipse,
        ShapeClass::Outline,
        ShapeClass::Needle,
    ];
    cfg.shape_classes.sort();
    cfg
}

fn plus_deformations() -> GenConfig {
    let mut cfg = plus_thin();
    cfg.background_motion.enable_deform = true;
    cfg.object_motion.enable_deform = true;
    cfg
}

fn with_family(family: TextureFamily) -> GenConfig {
    let mut cfg = GenConfig::default();
    cfg.texture.family = family;
    cfg
}

fn scaled(k: f64) -> GenConfig {
    GenConfig::default().with_motion_scaled(k).expect("factor is positive")
}

/// Augmentation-mode presets share the thin-objects base dataset.
fn with_augment(color_both: bool, color_between: bool, geom_both: bool, geom_between: bool) -> GenConfig {
    let mut cfg = plus_thin();
    cfg.augment_mode.color_both = color_both;
    cfg.augment_mode.color_between = color_between;
    cfg.augment_mode.geom_both = geom_both;
    cfg.augment_mode.geom_between = geom_between;
    cfg
}

fn cam_bumblebee() -> GenConfig {
    // Wide-angle stereo camera after undistortion: radial blur growing
    // toward the borders, mild general blur, over-saturated colors.
    let mut cfg = GenConfig::default();
    cfg.camera = CameraProfile {
        radial_blur_strength: 0.12,
        gaussian_sigma: 1.2,
        contrast_boost: 1.3,
        bayer: None,
    };
    cfg
}

fn cam_bayer() -> GenConfig {
    let mut cfg = GenConfig::default();
    cfg.camera = CameraProfile {
        radial_blur_strength: 0.0,
        gaussian_sigma: 0.0,
        contrast_boost: 1.0,
        bayer: Some(BayerPattern::Rggb),
    };
    cfg
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

static CATALOG: &[Preset] = &[
    // Shape/motion ladder, simplest first; each row keeps everything the
    // previous row had and adds one ingredient.
    Preset {
        name: "boxes-translation",
        summary: "axis-aligned textured boxes, translation-only motion",
        build: boxes_translation,
    },
    Preset {
        name: "polygons",
        summary: "convex polygons, translation-only motion",
        build: polygons,
    },
    Preset {
        name: "ellipses",
        summary: "ellipses, translation-only motion",
        build: ellipses,
    },
    Preset {
        name: "polygons-ellipses",
        summary: "polygons and ellipses, translation-only motion",
        build: polygons_ellipses,
    },
    Preset {
        name: "plus-rotations",
        summary: "polygons and ellipses, translation and rotation",
        build: plus_rotations,
    },
    Preset {
        name: "plus-scaling",
        summary: "adds scaling motion",
        build: plus_scaling,
    },
    Preset {
        name: "plus-holes",
        summary: "adds holes punched into solid objects",
        build: plus_holes,
    },
    Preset {
        name: "plus-thin",
        summary: "adds thin objects (outlines and needles)",
        build: plus_thin,
    },
    Preset {
        name: "plus-deformations",
        summary: "adds nonrigid deformations to objects and background",
        build: plus_deformations,
    },
    // Texture families.
    Preset {
        name: "tex-plasma",
        summary: "plasma textures everywhere",
        build: || with_family(TextureFamily::Plasma),
    },
    Preset {
        name: "tex-clouds",
        summary: "fractal cloud textures everywhere",
        build: || with_family(TextureFamily::Clouds),
    },
    Preset {
        name: "tex-photo",
        summary: "photographs from a texture pool (needs --textures DIR)",
        build: || with_family(TextureFamily::Photo),
    },
    // Displacement-size variants.
    Preset {
        name: "scale-1x",
        summary: "baseline displacement statistics",
        build: || scaled(1.0),
    },
    Preset {
        name: "scale-2x",
        summary: "all motion magnitudes doubled",
        build: || scaled(2.0),
    },
    Preset {
        name: "scale-3x",
        summary: "all motion magnitudes tripled",
        build: || scaled(3.0),
    },
    // Augmentation modes (thin-objects base).
    Preset {
        name: "aug-none",
        summary: "no augmentation",
        build: || with_augment(false, false, false, false),
    },
    Preset {
        name: "aug-color",
        summary: "same color change on both frames",
        build: || with_augment(true, false, false, false),
    },
    Preset {
        name: "aug-color-between",
        summary: "color change on both frames plus an increment on frame 2",
        build: || with_augment(true, true, false, false),
    },
    Preset {
        name: "aug-geom",
        summary: "same geometric change on both frames",
        build: || with_augment(false, false, true, false),
    },
    Preset {
        name: "aug-geom-between",
        summary: "geometric change on both frames plus an increment on frame 2",
        build: || with_augment(false, false, true, true),
    },
    Preset {
        name: "aug-color-geom",
        summary: "color and geometric changes, both frames only",
        build: || with_augment(true, false, true, false),
    },
    Preset {
        name: "aug-full",
        summary: "all augmentations including between-frame increments",
        build: || with_augment(true, true, true, true),
    },
    // Camera degradation.
    Preset {
        name: "cam-bumblebee",
        summary: "radial blur, general blur and strong contrast",
        build: cam_bumblebee,
    },
    Preset {
        name: "cam-bayer",
        summary: "color-filter mosaic/demosaic fringing",
        build: cam_bayer,
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dist;
    use crate::geometry::{Point, Vec2};
    use crate::scene::sample_scene;

    #[test]
    fn names_are_unique_and_findable() {
        let mut seen = std::collections::BTreeSet::new();
        for p in catalog() {
            assert!(seen.insert(p.name), "duplicate preset `{}`", p.name);
            assert!(find(p.name).is_some());
            assert!(
                p.name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-'),
                "`{}` is not kebab-case",
                p.name
            );
        }
        assert!(find("no-such-preset").is_none());
        assert_eq!(catalog().len(), 24);
    }

    #[test]
    fn every_preset_validates_and_round_trips() {
        for p in catalog() {
            let cfg = p.config();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let back = GenConfig::from_text(&cfg.to_text()).unwrap();
            assert_eq!(back, cfg, "{}", p.name);
        }
    }

    /// Linear part of a motion measured by its action on the basis vectors.
    fn linear_part(cfg: &GenConfig, index: u64) -> Vec<[f64; 4]> {
        let scene = sample_scene(cfg, index).unwrap();
        let mut parts = Vec::new();
        let mut push = |m: &crate::geometry::WarpMap| {
            let a = m.as_affine().expect("ladder presets are affine");
            let ex = a.apply_vec(Vec2::new(1.0, 0.0));
            let ey = a.apply_vec(Vec2::new(0.0, 1.0));
            parts.push([ex.x, ey.x, ex.y, ey.y]);
        };
        push(&scene.background.motion);
        for layer in &scene.layers {
            push(&layer.motion);
        }
        parts
    }

    #[test]
    fn translation_presets_give_constant_flow_per_layer() {
        for name in ["boxes-translation", "polygons", "ellipses", "polygons-ellipses"] {
            let cfg = find(name).unwrap();
            for index in 0..3 {
                for m in linear_part(&cfg, index) {
                    assert_eq!(m, [1.0, 0.0, 0.0, 1.0], "{name} sample {index}");
                }
            }
        }
    }

    #[test]
    fn rotation_preset_turns_without_scaling() {
        let cfg = find("plus-rotations").unwrap();
        let mut any_rotation = false;
        for index in 0..5 {
            for [a, b, c, d] in linear_part(&cfg, index) {
                let det = a * d - b * c;
                assert!((det - 1.0).abs() < 1e-12, "area changed: det {det}");
                let curl = c - b;
                if curl.abs() > 1e-6 {
                    any_rotation = true;
                }
            }
        }
        assert!(any_rotation, "no rotation drawn in 5 samples");
    }

    #[test]
    fn scaling_preset_changes_areas() {
        let cfg = find("plus-scaling").unwrap();
        let mut any_scaling = false;
        for index in 0..5 {
            for [a, b, c, d] in linear_part(&cfg, index) {
                if (a * d - b * c - 1.0).abs() > 1e-3 {
                    any_scaling = true;
                }
            }
        }
        assert!(any_scaling, "no scaling drawn in 5 samples");
    }

    #[test]
    fn ladder_accumulates_ingredients() {
        let holes = find("plus-holes").unwrap();
        assert!(holes.holes);
        assert!(holes.object_motion.enable_scaling);

        let thin = find("plus-thin").unwrap();
        assert!(thin.holes);
        assert!(thin.shape_classes.contains(&ShapeClass::Outline));
        assert!(thin.shape_classes.contains(&ShapeClass::Needle));
        assert!(!thin.object_motion.enable_deform);

        let deform = find("plus-deformations").unwrap();
        assert!(deform.object_motion.enable_deform);
        assert!(deform.background_motion.enable_deform);
        assert!(deform.shape_classes.contains(&ShapeClass::Needle));

        // A deformations sample actually carries a deform stage.
        let scene = sample_scene(&deform, 0).unwrap();
        let deformed = scene.layers.iter().any(|l| l.motion.has_deform())
            || scene.background.motion.has_deform();
        assert!(deformed, "no deformation in sample 0");
    }

    #[test]
    fn scale_presets_multiply_displacements() {
        let base = find("scale-1x").unwrap();
        let twice = find("scale-2x").unwrap();
        let thrice = find("scale-3x").unwrap();
        assert_eq!(base, GenConfig::default());
        match (base.object_motion.translation, twice.object_motion.translation) {
            (Dist::Normal { std: a }, Dist::Normal { std: b }) => assert_eq!(b, 2.0 * a),
            other => panic!("unexpected dists {other:?}"),
        }
        assert_eq!(thrice.object_motion.global_scale, 3.0);
        assert_eq!(thrice.background_motion.global_scale, 3.0);
    }

    #[test]
    fn augment_presets_cover_the_mode_matrix() {
        let rows = [
            ("aug-none", [false, false, false, false]),
            ("aug-color", [true, false, false, false]),
            ("aug-color-between", [true, true, false, false]),
            ("aug-geom", [false, false, true, false]),
            ("aug-geom-between", [false, false, true, true]),
            ("aug-color-geom", [true, false, true, false]),
            ("aug-full", [true, true, true, true]),
        ];
        for (name, [cb, ci, gb, gi]) in rows {
            let m = find(name).unwrap().augment_mode;
            assert_eq!(
                (m.color_both, m.color_between, m.geom_both, m.geom_between),
                (cb, ci, gb, gi),
                "{name}"
            );
        }
        assert!(!find("aug-none").unwrap().augment_mode.any());
    }

    #[test]
    fn camera_presets_shape_their_profiles() {
        let bb = find("cam-bumblebee").unwrap().camera;
        assert!(bb.radial_blur_strength > 0.0);
        assert!(bb.gaussian_sigma > 0.0);
        assert!(bb.contrast_boost > 1.0);
        assert_eq!(bb.bayer, None);

        let bayer = find("cam-bayer").unwrap().camera;
        assert_eq!(bayer.bayer, Some(BayerPattern::Rggb));
        assert_eq!(bayer.gaussian_sigma, 0.0);

        // Textures differ where they should; flow statistics do not.
        let plasma = find("tex-plasma").unwrap();
        assert_eq!(plasma.object_motion, GenConfig::default().object_motion);
    }

    #[test]
    fn translation_only_flow_is_constant_in_the_rendered_field() {
        let mut cfg = find("polygons-ellipses").unwrap();
        cfg.width = 96;
        cfg.height = 72;
        let scene = sample_scene(&cfg, 7).unwrap();
        // Every motion, applied to two distant points, moves them equally.
        let probe = |m: &crate::geometry::WarpMap| {
            let a = Point::new(10.0, 10.0);
            let b = Point::new(80.0, 60.0);
            let da = m.apply(a).sub(a);
            let db = m.apply(b).sub(b);
            assert!((da.x - db.x).abs() < 1e-12 && (da.y - db.y).abs() < 1e-12);
        };
        probe(&scene.background.motion);
        for layer in &scene.layers {
            probe(&layer.motion);
        }
    }
}
