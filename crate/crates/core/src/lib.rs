//! Procedural generation of two-frame optical flow training data with
//! pixel-exact ground truth.
//!
//! A dataset is a pure function of a [`GenConfig`]: scenes are layered
//! textured shapes over a moving background, every layer motion is a known
//! warp, and the flow field is derived analytically from those warps. The
//! companion modules cover augmentation with flow recomposition, camera
//! degradation (blur, contrast, Bayer artifacts), evaluation metrics (EPE,
//! partial EPE, displacement histograms) and bit-exact file formats.

pub mod analysis;
pub mod augment;
pub mod config;
pub mod degrade;
pub mod error;
pub mod geometry;
pub mod io;
pub mod presets;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod shapes;
pub mod textures;

pub use analysis::{DisplacementHistogram, EpeReport};
pub use augment::{AugmentMode, ColorAugment, GeomAugment};
pub use config::{Dist, GenConfig, MotionDistribution};
pub use degrade::{BayerPattern, CameraProfile};
pub use error::Error;
pub use geometry::{Affine2, DeformField, Point, Vec2, WarpMap};
pub use raster::{FlowField, ImageBuffer, OcclusionMask, Sample};
pub use scene::{generate_sample, sample_scene, LayerSpec, SceneSpec};
pub use shapes::{Mask, ShapeClass, ShapeSpec};
pub use textures::{Texture, TextureFamily, TextureSource, TextureSpec};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
