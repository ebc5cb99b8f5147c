//! Seeded sampling of object shape classes and antialiased coverage masks.
//!
//! Shapes live in a local frame centered at the origin; placement into the
//! scene happens through an [`Affine2`] at rasterization time. Five classes
//! are supported: solid boxes, star-shaped polygons, ellipses, thin
//! outlines (rings/bands around a polygon or ellipse), and needles (very
//! elongated bars). Solid shapes may carry holes, which are nested shapes
//! subtracted from the footprint.

use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::geometry::{Affine2, Point, WarpMap};
use crate::rng;
use crate::Result;

/// Object shape classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ShapeClass {
    Box,
    Polygon,
    Ellipse,
    Outline,
    Needle,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 5] = [
        ShapeClass::Box,
        ShapeClass::Polygon,
        ShapeClass::Ellipse,
        ShapeClass::Outline,
        ShapeClass::Needle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Box => "box",
            ShapeClass::Polygon => "polygon",
            ShapeClass::Ellipse => "ellipse",
            ShapeClass::Outline => "outline",
            ShapeClass::Needle => "needle",
        }
    }
}

impl std::fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ShapeClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "box" => Ok(ShapeClass::Box),
            "polygon" => Ok(ShapeClass::Polygon),
            "ellipse" => Ok(ShapeClass::Ellipse),
            "outline" => Ok(ShapeClass::Outline),
            "needle" => Ok(ShapeClass::Needle),
            other => Err(format!("unknown shape class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Geometry {
    /// Axis-aligned box given by half extents.
    Box { half_w: f64, half_h: f64 },
    /// Simple polygon, star-shaped about the origin, vertices in angular order.
    Polygon { vertices: Vec<Point> },
    /// Axis-aligned ellipse given by semi-axes.
    Ellipse { a: f64, b: f64 },
}

impl Geometry {
    fn contains(&self, q: Point) -> bool {
        match self {
            Geometry::Box { half_w, half_h } => q.x.abs() <= *half_w && q.y.abs() <= *half_h,
            Geometry::Polygon { vertices } => point_in_polygon(vertices, q),
            Geometry::Ellipse { a, b } => {
                let (nx, ny) = (q.x / a, q.y / b);
                nx * nx + ny * ny <= 1.0
            }
        }
    }

    /// Distance from `q` to the boundary, for points inside the shape.
    /// Exact for boxes and polygons; for ellipses an inner-ellipse band is
    /// used instead (see `band_contains`).
    fn inner_distance(&self, q: Point) -> f64 {
        match self {
            Geometry::Box { half_w, half_h } => (half_w - q.x.abs()).min(half_h - q.y.abs()),
            Geometry::Polygon { vertices } => polygon_boundary_distance(vertices, q),
            Geometry::Ellipse { .. } => unreachable!("ellipse bands use inner ellipses"),
        }
    }

    /// Membership in the band of width `w` just inside the boundary.
    fn band_contains(&self, q: Point, w: f64) -> bool {
        if !self.contains(q) {
            return false;
        }
        match self {
            Geometry::Ellipse { a, b } => {
                let (ia, ib) = (a - w, b - w);
                if ia <= 0.0 || ib <= 0.0 {
                    return true; // band swallows the whole ellipse
                }
                let (nx, ny) = (q.x / ia, q.y / ib);
                nx * nx + ny * ny > 1.0
            }
            _ => self.inner_distance(q) <= w,
        }
    }

    fn bbox(&self) -> (Point, Point) {
        match self {
            Geometry::Box { half_w, half_h } => {
                (Point::new(-half_w, -half_h), Point::new(*half_w, *half_h))
            }
            Geometry::Polygon { vertices } => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
            Geometry::Ellipse { a, b } => (Point::new(-a, -b), Point::new(*a, *b)),
        }
    }

    fn area(&self) -> f64 {
        match self {
            Geometry::Box { half_w, half_h } => 4.0 * half_w * half_h,
            Geometry::Polygon { vertices } => polygon_area(vertices),
            Geometry::Ellipse { a, b } => std::f64::consts::PI * a * b,
        }
    }

    fn perimeter(&self) -> f64 {
        match self {
            Geometry::Box { half_w, half_h } => 4.0 * (half_w + half_h),
            Geometry::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| vertices[(i + 1) % n].sub(vertices[i]).norm())
                    .sum()
            }
            // Ramanujan's approximation.
            Geometry::Ellipse { a, b } => {
                let h3 = 3.0 * (a - b) * (a - b) / ((a + b) * (a + b));
                std::f64::consts::PI
                    * (a + b)
                    * (1.0 + h3 / (10.0 + (4.0 - h3).sqrt()))
            }
        }
    }

    /// Max distance from the origin to the boundary.
    fn circumradius(&self) -> f64 {
        match self {
            Geometry::Box { half_w, half_h } => (half_w * half_w + half_h * half_h).sqrt(),
            Geometry::Polygon { vertices } => vertices
                .iter()
                .map(|v| v.sub(Point::new(0.0, 0.0)).norm())
                .fold(0.0, f64::max),
            Geometry::Ellipse { a, b } => a.max(*b),
        }
    }

    /// Min distance from the origin to the boundary.
    fn inradius(&self) -> f64 {
        match self {
            Geometry::Box { half_w, half_h } => half_w.min(*half_h),
            Geometry::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        segment_distance(Point::new(0.0, 0.0), vertices[i], vertices[(i + 1) % n])
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            Geometry::Ellipse { a, b } => a.min(*b),
        }
    }
}

/// A sampled object shape in its local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    class: ShapeClass,
    /// Offset within the parent frame; zero for top-level shapes, nonzero
    /// for holes.
    center: Point,
    geometry: Geometry,
    holes: Vec<ShapeSpec>,
    /// Band/bar thickness for Outline and Needle.
    stroke_width: Option<f64>,
}

impl ShapeSpec {
    /// Axis-aligned solid box around the local origin. Handy for
    /// hand-constructed scenes with known geometry.
    pub fn solid_box(half_w: f64, half_h: f64) -> ShapeSpec {
        assert!(half_w > 0.0 && half_h > 0.0, "box extents must be positive");
        ShapeSpec {
            class: ShapeClass::Box,
            center: Point::new(0.0, 0.0),
            geometry: Geometry::Box { half_w, half_h },
            holes: Vec::new(),
            stroke_width: None,
        }
    }

    /// Axis-aligned solid ellipse around the local origin.
    pub fn solid_ellipse(a: f64, b: f64) -> ShapeSpec {
        assert!(a > 0.0 && b > 0.0, "ellipse axes must be positive");
        ShapeSpec {
            class: ShapeClass::Ellipse,
            center: Point::new(0.0, 0.0),
            geometry: Geometry::Ellipse { a, b },
            holes: Vec::new(),
            stroke_width: None,
        }
    }

    pub fn class(&self) -> ShapeClass {
        self.class
    }

    pub fn holes(&self) -> &[ShapeSpec] {
        &self.holes
    }

    pub fn stroke_width(&self) -> Option<f64> {
        self.stroke_width
    }

    /// Point membership in the local frame (holes subtracted).
    pub fn contains(&self, p: Point) -> bool {
        let q = p.sub(self.center);
        let q = Point::new(q.x, q.y);
        let in_base = match (self.class, self.stroke_width) {
            (ShapeClass::Outline, Some(w)) => self.geometry.band_contains(q, w),
            _ => self.geometry.contains(q),
        };
        in_base && !self.holes.iter().any(|h| h.contains(q))
    }

    /// Membership in the solid base geometry, ignoring stroke bands and
    /// holes. Placement checks footprint visibility against this hull, which
    /// stays meaningful for thin outlines where sparse probes would miss the
    /// band itself.
    pub fn hull_contains(&self, p: Point) -> bool {
        let q = p.sub(self.center);
        self.geometry.contains(Point::new(q.x, q.y))
    }

    /// Local-frame bounding box (holes never extend it).
    pub fn local_bbox(&self) -> (Point, Point) {
        let (lo, hi) = self.geometry.bbox();
        (
            Point::new(lo.x + self.center.x, lo.y + self.center.y),
            Point::new(hi.x + self.center.x, hi.y + self.center.y),
        )
    }

    /// Analytic area of the base footprint (holes and bands not
    /// subtracted); used for degeneracy checks.
    pub fn base_area(&self) -> f64 {
        self.geometry.area()
    }

    /// Analytic area with band/stroke and holes accounted for where a
    /// closed form exists (bands use perimeter x width).
    pub fn area_estimate(&self) -> f64 {
        let base = match (self.class, self.stroke_width) {
            (ShapeClass::Outline, Some(w)) => self.geometry.perimeter() * w,
            _ => self.geometry.area(),
        };
        base - self.holes.iter().map(|h| h.area_estimate()).sum::<f64>()
    }

    /// Perimeter of the base geometry (outline bases included).
    pub fn perimeter(&self) -> f64 {
        self.geometry.perimeter()
    }

    /// Diameter of the circumscribed circle about the local origin.
    pub fn diameter(&self) -> f64 {
        2.0 * self.geometry.circumradius()
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Default size ranges for sampled shapes, in local pixels (scene placement
/// rescales them).
mod ranges {
    pub const BOX_HALF: (f64, f64) = (10.0, 50.0);
    pub const ELLIPSE_AXIS: (f64, f64) = (10.0, 50.0);
    pub const POLY_RADIUS_LOG_MEAN: f64 = 3.33; // exp ≈ 28 px
    pub const POLY_RADIUS_LOG_STD: f64 = 0.35;
    pub const POLY_RADIUS_CLAMP: (f64, f64) = (8.0, 60.0);
    pub const NEEDLE_LEN: (f64, f64) = (40.0, 120.0);
    pub const NEEDLE_ASPECT: (f64, f64) = (8.0, 20.0);
    pub const OUTLINE_STROKE_FRAC: (f64, f64) = (0.02, 0.10);
    pub const HOLE_COUNT: (i64, i64) = (1, 3);
    pub const HOLE_DIAMETER_FRAC: (f64, f64) = (0.10, 0.30);
}

/// Draws one shape of a uniformly chosen class from `class_set`.
///
/// The set is taken as an ordered slice so identical seeds and sets give
/// identical draws. Holes are added separately via [`punch_holes`].
pub fn sample_shape(class_set: &[ShapeClass], rng: &mut ChaCha8Rng) -> Result<ShapeSpec> {
    if class_set.is_empty() {
        return Err(Error::EmptyClassSet);
    }
    let class = class_set[rng::index(rng, class_set.len())];
    let geometry = match class {
        ShapeClass::Box => sample_box(rng),
        ShapeClass::Polygon => sample_polygon(rng),
        ShapeClass::Ellipse => sample_ellipse(rng),
        ShapeClass::Outline | ShapeClass::Needle => Geometry::Box { half_w: 0.0, half_h: 0.0 },
    };
    let (geometry, stroke_width) = match class {
        ShapeClass::Outline => {
            let base = if rng::index(rng, 2) == 0 {
                sample_polygon(rng)
            } else {
                sample_ellipse(rng)
            };
            let d = 2.0 * base.circumradius();
            let lo = (ranges::OUTLINE_STROKE_FRAC.0 * d).max(1.5);
            let hi = (ranges::OUTLINE_STROKE_FRAC.1 * d).max(lo * (1.0 + 1e-9));
            let w = rng::uniform(rng, lo, hi);
            (base, Some(w.min(0.10 * d).max(0.5)))
        }
        ShapeClass::Needle => {
            let len = rng::uniform(rng, ranges::NEEDLE_LEN.0, ranges::NEEDLE_LEN.1);
            let aspect = rng::uniform(rng, ranges::NEEDLE_ASPECT.0, ranges::NEEDLE_ASPECT.1);
            let w = len / aspect;
            (Geometry::Box { half_w: len / 2.0, half_h: w / 2.0 }, Some(w))
        }
        _ => (geometry, None),
    };
    Ok(ShapeSpec {
        class,
        center: Point::new(0.0, 0.0),
        geometry,
        holes: Vec::new(),
        stroke_width,
    })
}

/// Punches 1-3 holes (10-30% of the parent diameter) into a solid shape.
/// Thin classes (Outline, Needle) are left untouched; holes too small to
/// rasterize are skipped.
pub fn punch_holes(shape: &mut ShapeSpec, rng: &mut ChaCha8Rng) {
    if matches!(shape.class, ShapeClass::Outline | ShapeClass::Needle) {
        return;
    }
    let parent_r = shape.geometry.circumradius();
    let inradius = shape.geometry.inradius();
    let n = rng::int_inclusive(rng, ranges::HOLE_COUNT.0, ranges::HOLE_COUNT.1);
    for _ in 0..n {
        let frac = rng::uniform(rng, ranges::HOLE_DIAMETER_FRAC.0, ranges::HOLE_DIAMETER_FRAC.1);
        let mut hole_r = frac * parent_r;
        hole_r = hole_r.min(0.4 * inradius);
        if hole_r < 2.0 {
            continue;
        }
        let max_off = (inradius - hole_r) * 0.9;
        let angle = rng::uniform(rng, 0.0, std::f64::consts::TAU);
        let dist = rng::uniform(rng, 0.0, max_off.max(0.0));
        let center = Point::new(dist * libm::cos(angle), dist * libm::sin(angle));
        let geometry = if rng::index(rng, 2) == 0 {
            let s = hole_r / std::f64::consts::SQRT_2;
            Geometry::Box { half_w: s, half_h: s }
        } else {
            let b = hole_r * rng::uniform(rng, 0.5, 1.0);
            Geometry::Ellipse { a: hole_r, b }
        };
        let class = match geometry {
            Geometry::Box { .. } => ShapeClass::Box,
            _ => ShapeClass::Ellipse,
        };
        shape.holes.push(ShapeSpec {
            class,
            center,
            geometry,
            holes: Vec::new(),
            stroke_width: None,
        });
    }
}

fn sample_box(rng: &mut ChaCha8Rng) -> Geometry {
    Geometry::Box {
        half_w: rng::uniform(rng, ranges::BOX_HALF.0, ranges::BOX_HALF.1),
        half_h: rng::uniform(rng, ranges::BOX_HALF.0, ranges::BOX_HALF.1),
    }
}

fn sample_ellipse(rng: &mut ChaCha8Rng) -> Geometry {
    Geometry::Ellipse {
        a: rng::uniform(rng, ranges::ELLIPSE_AXIS.0, ranges::ELLIPSE_AXIS.1),
        b: rng::uniform(rng, ranges::ELLIPSE_AXIS.0, ranges::ELLIPSE_AXIS.1),
    }
}

/// Radial polygon: sorted random angles, radii from a bounded lognormal.
/// Star-shaped about the origin, hence always simple.
fn sample_polygon(rng: &mut ChaCha8Rng) -> Geometry {
    let n = rng::int_inclusive(rng, 3, 12) as usize;
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng::uniform(rng, 0.0, std::f64::consts::TAU))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vertices = angles
        .into_iter()
        .map(|t| {
            let r = libm::exp(
                ranges::POLY_RADIUS_LOG_MEAN
                    + ranges::POLY_RADIUS_LOG_STD * rng::standard_normal(rng),
            )
            .clamp(ranges::POLY_RADIUS_CLAMP.0, ranges::POLY_RADIUS_CLAMP.1);
            Point::new(r * libm::cos(t), r * libm::sin(t))
        })
        .collect();
    Geometry::Polygon { vertices }
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

/// Antialiased coverage mask: per-pixel covered-area fraction in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<f32>,
    /// Inclusive pixel bounds of the nonzero region, if any.
    bbox: Option<(u32, u32, u32, u32)>,
}

impl Mask {
    pub fn zero(width: u32, height: u32) -> Mask {
        Mask {
            width,
            height,
            data: vec![0.0; width as usize * height as usize],
            bbox: None,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Total covered area in square pixels.
    pub fn area(&self) -> f64 {
        self.data.iter().map(|&c| c as f64).sum()
    }

    /// Inclusive (x0, y0, x1, y1) bounds of nonzero coverage.
    pub fn bbox(&self) -> Option<(u32, u32, u32, u32)> {
        self.bbox
    }
}

/// Rasterizes a placed shape into a coverage mask by `supersample`^2
/// subpixel containment tests per pixel.
///
/// `supersample` must be one of 1, 2, 4, 8. Fails with [`Error::ZeroArea`]
/// when the placement collapses the footprint below one subpixel.
pub fn rasterize_mask(
    shape: &ShapeSpec,
    placement: Affine2,
    width: u32,
    height: u32,
    supersample: u32,
) -> Result<Mask> {
    assert!(
        matches!(supersample, 1 | 2 | 4 | 8),
        "supersample must be 1, 2, 4, or 8"
    );
    let placed_area = placement.det().abs() * shape.base_area();
    let subpixel = 1.0 / (supersample as f64 * supersample as f64);
    if placed_area < subpixel {
        return Err(Error::ZeroArea);
    }
    let inv = placement.invert()?;

    // Placed bounding box -> pixel range.
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
        let p = placement.apply(c);
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    let x0 = (min.x.floor().max(0.0) as i64).min(width as i64) as u32;
    let y0 = (min.y.floor().max(0.0) as i64).min(height as i64) as u32;
    let x1 = (max.x.ceil().max(0.0) as i64).min(width as i64) as u32;
    let y1 = (max.y.ceil().max(0.0) as i64).min(height as i64) as u32;

    let mut mask = Mask::zero(width, height);
    if x0 >= x1 || y0 >= y1 {
        return Ok(mask);
    }

    let s = supersample as usize;
    let inv_s = 1.0 / supersample as f64;
    let norm = 1.0 / (s * s) as f32;
    let mut bbox: Option<(u32, u32, u32, u32)> = None;
    for py in y0..y1 {
        let row = py as usize * width as usize;
        for px in x0..x1 {
            let mut count = 0u32;
            for sy in 0..s {
                let y = py as f64 + (sy as f64 + 0.5) * inv_s;
                for sx in 0..s {
                    let x = px as f64 + (sx as f64 + 0.5) * inv_s;
                    if shape.contains(inv.apply(Point::new(x, y))) {
                        count += 1;
                    }
                }
            }
            if count > 0 {
                mask.data[row + px as usize] = count as f32 * norm;
                bbox = Some(match bbox {
                    None => (px, py, px, py),
                    Some((a, b, c, d)) => (a.min(px), b.min(py), c.max(px), d.max(py)),
                });
            }
        }
    }
    mask.bbox = bbox;
    Ok(mask)
}

/// Rasterizes the placed shape's footprint *after* pushing it through
/// `motion`: the frame-2 coverage of a moving layer. Affine motions reuse
/// the exact affine rasterizer; deformed motions test each subsample through
/// the inverse warp.
pub fn rasterize_warped_mask(
    shape: &ShapeSpec,
    placement: Affine2,
    motion: &WarpMap,
    width: u32,
    height: u32,
    supersample: u32,
) -> Result<Mask> {
    if let Some(a) = motion.as_affine() {
        return rasterize_mask(shape, Affine2::compose(a, placement), width, height, supersample);
    }
    assert!(
        matches!(supersample, 1 | 2 | 4 | 8),
        "supersample must be 1, 2, 4, or 8"
    );
    let inv_place = placement.invert()?;
    let motion_inv = motion.inverter()?;

    // Conservative pixel range: motion image of the placed bounding box,
    // padded by the worst-case deformation displacement.
    let (lo, hi) = shape.local_bbox();
    let corners = [
        Point::new(lo.x, lo.y),
        Point::new(hi.x, lo.y),
        Point::new(lo.x, hi.y),
        Point::new(hi.x, hi.y),
    ];
    let pad = 4.0 * motion.deform_bound() + 2.0;
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let p = motion.apply(placement.apply(c));
        min.x = min.x.min(p.x - pad);
        min.y = min.y.min(p.y - pad);
        max.x = max.x.max(p.x + pad);
        max.y = max.y.max(p.y + pad);
    }
    let x0 = (min.x.floor().max(0.0) as i64).min(width as i64) as u32;
    let y0 = (min.y.floor().max(0.0) as i64).min(height as i64) as u32;
    let x1 = (max.x.ceil().max(0.0) as i64).min(width as i64) as u32;
    let y1 = (max.y.ceil().max(0.0) as i64).min(height as i64) as u32;

    let mut mask = Mask::zero(width, height);
    if x0 >= x1 || y0 >= y1 {
        return Ok(mask);
    }

    let s = supersample as usize;
    let inv_s = 1.0 / supersample as f64;
    let norm = 1.0 / (s * s) as f32;
    let mut bbox: Option<(u32, u32, u32, u32)> = None;
    for py in y0..y1 {
        let row = py as usize * width as usize;
        for px in x0..x1 {
            let mut count = 0u32;
            for sy in 0..s {
                let y = py as f64 + (sy as f64 + 0.5) * inv_s;
                for sx in 0..s {
                    let x = px as f64 + (sx as f64 + 0.5) * inv_s;
                    let local = inv_place.apply(motion_inv.invert(Point::new(x, y)));
                    if shape.contains(local) {
                        count += 1;
                    }
                }
            }
            if count > 0 {
                mask.data[row + px as usize] = count as f32 * norm;
                bbox = Some(match bbox {
                    None => (px, py, px, py),
                    Some((a, b, c, d)) => (a.min(px), b.min(py), c.max(px), d.max(py)),
                });
            }
        }
    }
    mask.bbox = bbox;
    Ok(mask)
}

// ---------------------------------------------------------------------------
// Polygon helpers
// ---------------------------------------------------------------------------

fn point_in_polygon(vertices: &[Point], q: Point) -> bool {
    let mut inside = false;
    let mut j = vertices.len() - 1;
    for i in 0..vertices.len() {
        let (a, b) = (vertices[i], vertices[j]);
        if (a.y > q.y) != (b.y > q.y) {
            let x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if q.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        twice += a.x * b.y - b.x * a.y;
    }
    twice.abs() / 2.0
}

fn segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return q.sub(a).norm();
    }
    let t = (((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    q.sub(Point::new(a.x + t * ab.x, a.y + t * ab.y)).norm()
}

fn polygon_boundary_distance(vertices: &[Point], q: Point) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| segment_distance(q, vertices[i], vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
