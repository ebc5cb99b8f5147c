//! Error type shared across the crate.

use std::fmt;
use std::path::PathBuf;

/// All failure modes of generation, I/O and evaluation.
#[derive(Debug)]
pub enum Error {
    /// Transform determinant is at or below the invertibility floor.
    SingularTransform { det: f64 },
    /// `sample_shape` was called with no shape classes to draw from.
    EmptyClassSet,
    /// A placement collapsed a shape below one subpixel of area.
    ZeroArea,
    /// No valid object placement found within the attempt budget.
    PlacementFailure { attempts: u32 },
    /// Photo pool directory contained no decodable images.
    EmptyPool(PathBuf),
    /// An image file could not be decoded.
    DecodeFailure { path: PathBuf, reason: String },
    /// A scene references a photo texture but no pool was supplied.
    MissingTexture(String),
    /// Scale factor passed to `scale_distribution` must be positive.
    NonpositiveFactor(f64),
    /// Flow fields (or images) have mismatched dimensions.
    DimensionMismatch {
        expected: (u32, u32),
        got: (u32, u32),
    },
    /// Histogram comparison requires identical bin edges.
    EdgeMismatch,
    /// .flo file does not start with the expected magic number.
    BadMagic(f32),
    /// PFM header is malformed or names an unsupported variant.
    BadHeader(String),
    /// File ended before the declared payload.
    TruncatedFile(PathBuf),
    /// Declared image dimensions exceed the sanity limit.
    DimensionOverflow { width: i32, height: i32 },
    /// Evaluation directories do not contain the same sample indices.
    SampleMismatch { missing: Vec<u64> },
    /// Directory holds no .flo files to aggregate.
    NoFlowFiles(PathBuf),
    /// Config text could not be parsed.
    BadConfig { line: usize, reason: String },
    /// Underlying I/O failure with the offending path.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularTransform { det } => {
                write!(f, "singular transform (|det| = {:.3e})", det.abs())
            }
            Error::EmptyClassSet => write!(f, "shape class set is empty"),
            Error::ZeroArea => write!(f, "placement collapses shape below one subpixel"),
            Error::PlacementFailure { attempts } => {
                write!(f, "no valid placement found in {attempts} attempts")
            }
            Error::EmptyPool(dir) => {
                write!(f, "no decodable images in {}", dir.display())
            }
            Error::DecodeFailure { path, reason } => {
                write!(f, "cannot decode {}: {reason}", path.display())
            }
            Error::MissingTexture(what) => write!(f, "missing texture: {what}"),
            Error::NonpositiveFactor(k) => {
                write!(f, "scale factor must be positive, got {k}")
            }
            Error::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::EdgeMismatch => write!(f, "histogram bin edges differ"),
            Error::BadMagic(got) => {
                write!(f, "bad .flo magic: expected 202021.25, got {got}")
            }
            Error::BadHeader(why) => write!(f, "bad PFM header: {why}"),
            Error::TruncatedFile(path) => {
                write!(f, "truncated file: {}", path.display())
            }
            Error::DimensionOverflow { width, height } => {
                write!(f, "unreasonable dimensions {width}x{height}")
            }
            Error::SampleMismatch { missing } => {
                write!(f, "sample sets differ; missing indices {missing:?}")
            }
            Error::NoFlowFiles(dir) => {
                write!(f, "no .flo files under {}", dir.display())
            }
            Error::BadConfig { line, reason } => {
                write!(f, "config line {line}: {reason}")
            }
            Error::Io { path, source } => {
                write!(f, "{}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
