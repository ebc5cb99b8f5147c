//! Affine transforms, smooth deformation fields, and the warp algebra that
//! ground-truth flow is derived from.
//!
//! Coordinates are continuous image coordinates: origin at the top-left
//! corner, x right, y down, pixel `(i, j)` centered at `(i + 0.5, j + 0.5)`.
//! A layer's frame-to-frame motion is a [`WarpMap`]; composing the
//! background warp around an object's own warp yields the object's full
//! scene motion.

use crate::error::Error;
use crate::Result;

/// A 2D point in image coordinates (pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// A 2D displacement in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn offset(self, v: Vec2) -> Point {
        Point { x: self.x + v.x, y: self.y + v.y }
    }

    /// Displacement from `other` to `self`.
    pub fn sub(self, other: Point) -> Vec2 {
        Vec2 { x: self.x - other.x, y: self.y - other.y }
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2 { x: self.x * k, y: self.y * k }
    }
}

/// Determinant floor below which a transform counts as singular.
pub const SINGULAR_EPS: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Affine2
// ---------------------------------------------------------------------------

/// 2x3 affine map `p ↦ A·p + t`.
///
/// ```text
/// | a11  a12  tx |
/// | a21  a22  ty |
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64, tx: f64, ty: f64) -> Self {
        Affine2 { a11, a12, a21, a22, tx, ty }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn translate(tx: f64, ty: f64) -> Self {
        Affine2 { tx, ty, ..Self::IDENTITY }
    }

    /// Rotation by `rad` radians. With y pointing down this turns
    /// `(1, 0)` towards `(0, 1)` for positive angles.
    pub fn rotate(rad: f64) -> Self {
        let (s, c) = (libm::sin(rad), libm::cos(rad));
        Affine2 { a11: c, a12: -s, a21: s, a22: c, tx: 0.0, ty: 0.0 }
    }

    pub fn rotate_deg(deg: f64) -> Self {
        Self::rotate(deg.to_radians())
    }

    pub fn scale(k: f64) -> Self {
        Self::scale_xy(k, k)
    }

    pub fn scale_xy(kx: f64, ky: f64) -> Self {
        Affine2 { a11: kx, a22: ky, ..Self::IDENTITY }
    }

    /// Conjugates `linear` by a translation so it acts about `center`.
    pub fn about(center: Point, linear: Affine2) -> Self {
        let to_origin = Affine2::translate(-center.x, -center.y);
        let back = Affine2::translate(center.x, center.y);
        Affine2::compose(back, Affine2::compose(linear, to_origin))
    }

    pub fn apply(&self, p: Point) -> Point {
        Point {
            x: self.a11 * p.x + self.a12 * p.y + self.tx,
            y: self.a21 * p.x + self.a22 * p.y + self.ty,
        }
    }

    /// Applies only the linear part (no translation).
    pub fn apply_vec(&self, v: Vec2) -> Vec2 {
        Vec2 {
            x: self.a11 * v.x + self.a12 * v.y,
            y: self.a21 * v.x + self.a22 * v.y,
        }
    }

    /// `compose(outer, inner)` maps `p` to `outer(inner(p))`.
    pub fn compose(outer: Affine2, inner: Affine2) -> Affine2 {
        Affine2 {
            a11: outer.a11 * inner.a11 + outer.a12 * inner.a21,
            a12: outer.a11 * inner.a12 + outer.a12 * inner.a22,
            a21: outer.a21 * inner.a11 + outer.a22 * inner.a21,
            a22: outer.a21 * inner.a12 + outer.a22 * inner.a22,
            tx: outer.a11 * inner.tx + outer.a12 * inner.ty + outer.tx,
            ty: outer.a21 * inner.tx + outer.a22 * inner.ty + outer.ty,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite()
            && self.a12.is_finite()
            && self.a21.is_finite()
            && self.a22.is_finite()
            && self.tx.is_finite()
            && self.ty.is_finite()
    }

    /// Inverse map. Errors with [`Error::SingularTransform`] when
    /// `|det| <= 1e-8`.
    pub fn invert(&self) -> Result<Affine2> {
        let det = self.det();
        if det.abs() <= SINGULAR_EPS {
            return Err(Error::SingularTransform { det });
        }
        let inv = 1.0 / det;
        let a11 = self.a22 * inv;
        let a12 = -self.a12 * inv;
        let a21 = -self.a21 * inv;
        let a22 = self.a11 * inv;
        Ok(Affine2 {
            a11,
            a12,
            a21,
            a22,
            tx: -(a11 * self.tx + a12 * self.ty),
            ty: -(a21 * self.tx + a22 * self.ty),
        })
    }

    /// Largest singular value of the linear part.
    pub fn op_norm(&self) -> f64 {
        let t = self.a11 * self.a11
            + self.a12 * self.a12
            + self.a21 * self.a21
            + self.a22 * self.a22;
        let d = self.det();
        // Eigenvalues of MᵀM are (t ± sqrt(t² - 4d²)) / 2.
        let disc = (t * t - 4.0 * d * d).max(0.0).sqrt();
        ((t + disc) / 2.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// DeformField
// ---------------------------------------------------------------------------

/// Smooth non-rigid displacement field: a control grid of 2D vectors,
/// bilinearly interpolated over a rectangular domain and clamped outside it.
///
/// Every control vector has magnitude at most `amplitude`; interpolation is
/// a convex combination, so the same bound holds everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformField {
    grid_w: u32,
    grid_h: u32,
    origin: Point,
    cell_w: f64,
    cell_h: f64,
    /// `(grid_h + 1) x (grid_w + 1)` control vectors, row-major.
    vectors: Vec<Vec2>,
    amplitude: f64,
}

impl DeformField {
    /// Builds a field over domain `origin .. origin + size` with
    /// `grid_w x grid_h` cells. `vectors` must hold
    /// `(grid_w + 1) * (grid_h + 1)` entries, each no longer than
    /// `amplitude`.
    pub fn new(
        grid_w: u32,
        grid_h: u32,
        origin: Point,
        size: (f64, f64),
        vectors: Vec<Vec2>,
        amplitude: f64,
    ) -> Self {
        assert!(grid_w >= 1 && grid_h >= 1, "grid must have at least one cell");
        assert!(size.0 > 0.0 && size.1 > 0.0, "domain must have positive size");
        assert_eq!(
            vectors.len(),
            ((grid_w + 1) * (grid_h + 1)) as usize,
            "control grid size mismatch"
        );
        debug_assert!(vectors.iter().all(|v| v.norm() <= amplitude * (1.0 + 1e-12)));
        DeformField {
            grid_w,
            grid_h,
            origin,
            cell_w: size.0 / grid_w as f64,
            cell_h: size.1 / grid_h as f64,
            vectors,
            amplitude,
        }
    }

    /// Draws control vectors uniformly in the disc of radius `amplitude`.
    pub fn sample(
        rng: &mut rand_chacha::ChaCha8Rng,
        grid_w: u32,
        grid_h: u32,
        origin: Point,
        size: (f64, f64),
        amplitude: f64,
    ) -> Self {
        let n = ((grid_w + 1) * (grid_h + 1)) as usize;
        let mut vectors = Vec::with_capacity(n);
        for _ in 0..n {
            let angle = crate::rng::uniform(rng, 0.0, std::f64::consts::TAU);
            let mag = crate::rng::uniform(rng, 0.0, 1.0) * amplitude;
            vectors.push(Vec2::new(mag * libm::cos(angle), mag * libm::sin(angle)));
        }
        Self::new(grid_w, grid_h, origin, size, vectors, amplitude)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Bilinear evaluation; constant continuation outside the domain.
    pub fn eval(&self, p: Point) -> Vec2 {
        let gx = ((p.x - self.origin.x) / self.cell_w).clamp(0.0, self.grid_w as f64);
        let gy = ((p.y - self.origin.y) / self.cell_h).clamp(0.0, self.grid_h as f64);
        let x0 = (gx as u32).min(self.grid_w - 1);
        let y0 = (gy as u32).min(self.grid_h - 1);
        let fx = gx - x0 as f64;
        let fy = gy - y0 as f64;
        let stride = (self.grid_w + 1) as usize;
        let i = y0 as usize * stride + x0 as usize;
        let v00 = self.vectors[i];
        let v10 = self.vectors[i + 1];
        let v01 = self.vectors[i + stride];
        let v11 = self.vectors[i + stride + 1];
        let top_x = v00.x + (v10.x - v00.x) * fx;
        let top_y = v00.y + (v10.y - v00.y) * fx;
        let bot_x = v01.x + (v11.x - v01.x) * fx;
        let bot_y = v01.y + (v11.y - v01.y) * fx;
        Vec2 {
            x: top_x + (bot_x - top_x) * fy,
            y: top_y + (bot_y - top_y) * fy,
        }
    }
}

// ---------------------------------------------------------------------------
// WarpMap
// ---------------------------------------------------------------------------

/// One warp stage: `p ↦ affine(p + deform(p))`.
#[derive(Debug, Clone, PartialEq)]
struct Stage {
    deform: Option<DeformField>,
    affine: Affine2,
}

impl Stage {
    fn apply(&self, p: Point) -> Point {
        let q = match &self.deform {
            Some(d) => p.offset(d.eval(p)),
            None => p,
        };
        self.affine.apply(q)
    }
}

/// A frame-to-frame mapping: a chain of deform+affine stages.
///
/// A single affine is one stage; composition concatenates chains, merging
/// deform-free stages into their predecessor so a pure-affine warp always
/// stays a single exact affine.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpMap {
    stages: Vec<Stage>,
}

impl WarpMap {
    pub fn identity() -> Self {
        Self::affine(Affine2::IDENTITY)
    }

    pub fn affine(a: Affine2) -> Self {
        WarpMap { stages: vec![Stage { deform: None, affine: a }] }
    }

    /// `p ↦ affine(p + deform(p))`; with `deform` absent this is exactly
    /// the affine.
    pub fn new(affine: Affine2, deform: Option<DeformField>) -> Self {
        WarpMap { stages: vec![Stage { deform, affine }] }
    }

    /// Pure-affine view, when the warp is a single deform-free stage.
    pub fn as_affine(&self) -> Option<Affine2> {
        match self.stages.as_slice() {
            [Stage { deform: None, affine }] => Some(*affine),
            _ => None,
        }
    }

    pub fn has_deform(&self) -> bool {
        self.stages.iter().any(|s| s.deform.is_some())
    }

    /// Upper bound on the total deformation displacement across stages.
    pub fn deform_bound(&self) -> f64 {
        self.stages
            .iter()
            .filter_map(|s| s.deform.as_ref().map(|d| d.amplitude()))
            .sum()
    }

    pub fn apply(&self, p: Point) -> Point {
        self.stages.iter().fold(p, |q, s| s.apply(q))
    }

    /// `compose(outer, inner)` maps `p` to `outer(inner(p))`.
    pub fn compose(outer: &WarpMap, inner: &WarpMap) -> WarpMap {
        let mut stages: Vec<Stage> = Vec::with_capacity(outer.stages.len() + inner.stages.len());
        for s in inner.stages.iter().chain(outer.stages.iter()) {
            match (&s.deform, stages.last_mut()) {
                // A deform-free stage folds into the previous affine.
                (None, Some(prev)) => prev.affine = Affine2::compose(s.affine, prev.affine),
                _ => stages.push(s.clone()),
            }
        }
        WarpMap { stages }
    }

    /// Builds the point-wise inverse evaluator. Errors if any stage's
    /// affine part is singular.
    pub fn inverter(&self) -> Result<WarpInverter<'_>> {
        let mut stages = Vec::with_capacity(self.stages.len());
        for s in self.stages.iter().rev() {
            stages.push(InvStage { affine_inv: s.affine.invert()?, deform: s.deform.as_ref() });
        }
        Ok(WarpInverter { stages })
    }
}

/// Composes the background's motion onto an object's own motion, so the
/// object moves "with the background" when its own motion is the identity.
pub fn layer_motion(background_motion: &WarpMap, object_motion: &WarpMap) -> WarpMap {
    WarpMap::compose(background_motion, object_motion)
}

/// Ground-truth displacement at `p`: `W(p) - p`. Defined for every point
/// regardless of occlusion or out-of-frame targets.
pub fn flow_at(warp: &WarpMap, p: Point) -> Vec2 {
    warp.apply(p).sub(p)
}

struct InvStage<'a> {
    affine_inv: Affine2,
    deform: Option<&'a DeformField>,
}

/// Point-wise inverse of a [`WarpMap`].
///
/// Deformed stages are inverted by fixed-point iteration on
/// `p = A⁻¹(x) - D(p)`, which contracts as long as the deformation varies
/// slowly relative to its control-cell size (amplitudes are small compared
/// to cells for every sampled field).
pub struct WarpInverter<'a> {
    stages: Vec<InvStage<'a>>,
}

impl WarpInverter<'_> {
    pub fn invert(&self, x: Point) -> Point {
        let mut p = x;
        for s in &self.stages {
            let q = s.affine_inv.apply(p);
            p = match s.deform {
                None => q,
                Some(d) => {
                    let mut cur = q;
                    for _ in 0..32 {
                        let v = d.eval(cur);
                        let next = Point::new(q.x - v.x, q.y - v.y);
                        let step = next.sub(cur).norm();
                        cur = next;
                        if step < 1e-12 {
                            break;
                        }
                    }
                    cur
                }
            };
        }
        p
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
