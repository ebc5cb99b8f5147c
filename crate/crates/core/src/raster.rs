//! Image/flow buffers and scene rendering.
//!
//! Continuous coordinates put pixel `(i, j)`'s center at `(i + 0.5, j + 0.5)`.
//! Out-of-range texture lookups clamp to the edge.

use rayon::prelude::*;

use crate::geometry::{Affine2, Point, WarpInverter, WarpMap};
use crate::scene::{SceneSpec, OBJECT_TEXTURE_DIM};
use crate::shapes::{rasterize_mask, rasterize_warped_mask, Mask};
use crate::textures::TextureSource;
use crate::Result;

/// Row-major float image, 1 or 3 channels, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u32,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, channels: u32) -> ImageBuffer {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert!(channels == 1 || channels == 3, "1 or 3 channels");
        ImageBuffer {
            width,
            height,
            channels,
            data: vec![0.0; width as usize * height as usize * channels as usize],
        }
    }

    pub fn from_data(width: u32, height: u32, channels: u32, data: Vec<f32>) -> ImageBuffer {
        assert_eq!(
            data.len(),
            width as usize * height as usize * channels as usize,
            "data length mismatch"
        );
        debug_assert!(data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        ImageBuffer { width, height, channels, data }
    }

    /// Like [`ImageBuffer::from_data`] but without the `[0, 1]` range
    /// check, for planes that carry physical quantities (disparities).
    pub fn from_data_unchecked(
        width: u32,
        height: u32,
        channels: u32,
        data: Vec<f32>,
    ) -> ImageBuffer {
        assert_eq!(
            data.len(),
            width as usize * height as usize * channels as usize,
            "data length mismatch"
        );
        ImageBuffer { width, height, channels, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[f32] {
        let c = self.channels as usize;
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.data[i..i + c]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [f32] {
        let c = self.channels as usize;
        let i = (y as usize * self.width as usize + x as usize) * c;
        &mut self.data[i..i + c]
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, ch: u32) -> f32 {
        self.data[(y as usize * self.width as usize + x as usize) * self.channels as usize
            + ch as usize]
    }

    /// Bilinear sample at a continuous point, clamped to the edge. `out`
    /// receives one value per channel.
    pub fn sample_bilinear(&self, p: Point, out: &mut [f32]) {
        let c = self.channels as usize;
        debug_assert_eq!(out.len(), c);
        // Shift so integer coordinates land on pixel centers. Sampling at
        // an exact center has fx = fy = 0 (edges included), so it returns
        // the stored pixel bit-identically.
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = (p.x - 0.5).clamp(0.0, max_x);
        let y = (p.y - 0.5).clamp(0.0, max_y);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as usize, y0 as usize);
        let w = self.width as usize;
        let row0 = (y0 * w + x0) * c;
        let row1 = ((y0 + 1).min(self.height as usize - 1) * w + x0) * c;
        let x1_off = if x0 + 1 < w { c } else { 0 };
        for ch in 0..c {
            let v00 = self.data[row0 + ch] as f64;
            let v10 = self.data[row0 + x1_off + ch] as f64;
            let v01 = self.data[row1 + ch] as f64;
            let v11 = self.data[row1 + x1_off + ch] as f64;
            let top = v00 + (v10 - v00) * fx;
            let bot = v01 + (v11 - v01) * fx;
            out[ch] = (top + (bot - top) * fy) as f32;
        }
    }

    /// Expands grayscale to RGB; 3-channel images are returned unchanged.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        ImageBuffer { width: self.width, height: self.height, channels: 3, data }
    }
}

/// Dense per-pixel displacement field, frame 1 -> frame 2, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: u32,
    height: u32,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(width: u32, height: u32) -> FlowField {
        assert!(width > 0 && height > 0);
        let n = width as usize * height as usize;
        FlowField { width, height, u: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn from_planes(width: u32, height: u32, u: Vec<f32>, v: Vec<f32>) -> FlowField {
        let n = width as usize * height as usize;
        assert_eq!(u.len(), n);
        assert_eq!(v.len(), n);
        FlowField { width, height, u, v }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> (f32, f32) {
        let i = y as usize * self.width as usize + x as usize;
        (self.u[i], self.v[i])
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, u: f32, v: f32) {
        let i = y as usize * self.width as usize + x as usize;
        self.u[i] = u;
        self.v[i] = v;
    }

    pub fn u_plane(&self) -> &[f32] {
        &self.u
    }

    pub fn v_plane(&self) -> &[f32] {
        &self.v
    }

    /// Bilinear flow sample at a continuous point, clamped to the edge.
    /// Sampling at an exact pixel center returns that pixel's flow.
    pub fn sample_bilinear(&self, p: Point) -> (f64, f64) {
        let x = (p.x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let y = (p.y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as u32, y0 as u32);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let at = |x: u32, y: u32| {
            let i = y as usize * self.width as usize + x as usize;
            (self.u[i] as f64, self.v[i] as f64)
        };
        let (u00, v00) = at(x0, y0);
        let (u10, v10) = at(x1, y0);
        let (u01, v01) = at(x0, y1);
        let (u11, v11) = at(x1, y1);
        let lerp2 = |a: f64, b: f64, c: f64, d: f64| {
            let top = a + (b - a) * fx;
            let bot = c + (d - c) * fx;
            top + (bot - top) * fy
        };
        (lerp2(u00, u10, u01, u11), lerp2(v00, v10, v01, v11))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
}

/// Per-pixel occlusion flags: true where the frame-1 surface point is not
/// visible in frame 2 (covered by a higher layer, or out of frame).
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl OcclusionMask {
    pub fn new(width: u32, height: u32) -> OcclusionMask {
        OcclusionMask {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<bool>) -> OcclusionMask {
        assert_eq!(data.len(), width as usize * height as usize);
        OcclusionMask { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, occluded: bool) {
        self.data[y as usize * self.width as usize + x as usize] = occluded;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Grows the occluded region by `r` pixels (Chebyshev metric), used to
    /// exclude edge bands from photometric checks.
    pub fn dilate(&self, r: u32) -> OcclusionMask {
        if r == 0 {
            return self.clone();
        }
        let mut out = OcclusionMask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                let x0 = x.saturating_sub(r);
                let y0 = y.saturating_sub(r);
                let x1 = (x + r).min(self.width - 1);
                let y1 = (y + r).min(self.height - 1);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        out.set(xx, yy, true);
                    }
                }
            }
        }
        out
    }
}

/// One generated training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub frame1: ImageBuffer,
    pub frame2: ImageBuffer,
    pub flow: FlowField,
    pub occ: OcclusionMask,
}

/// Mean absolute intensity error between `frame1` and `frame2` pulled back
/// by the flow, over non-occluded pixels with the occlusion set dilated by
/// `dilate` pixels. The standard photometric consistency check for
/// generated ground truth.
pub fn backward_warp_mae(
    frame1: &ImageBuffer,
    frame2: &ImageBuffer,
    flow: &FlowField,
    occ: &OcclusionMask,
    dilate: u32,
) -> f64 {
    let skip = occ.dilate(dilate);
    let c = frame1.channels() as usize;
    let mut sum = 0.0f64;
    let mut n = 0u64;
    let mut buf = vec![0.0f32; c];
    for y in 0..frame1.height() {
        for x in 0..frame1.width() {
            if skip.get(x, y) {
                continue;
            }
            let (u, v) = flow.get(x, y);
            let target = Point::new(x as f64 + 0.5 + u as f64, y as f64 + 0.5 + v as f64);
            frame2.sample_bilinear(target, &mut buf);
            let src = frame1.pixel(x, y);
            for ch in 0..c {
                sum += (buf[ch] - src[ch]).abs() as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

// ---------------------------------------------------------------------------
// Scene rendering
// ---------------------------------------------------------------------------

/// Index into `masks` of the topmost layer whose coverage at `(x, y)`
/// exceeds one half, or `None` when the background shows through. Masks
/// are listed back to front, matching `SceneSpec::layers`.
pub fn topmost_layer(masks: &[Mask], x: u32, y: u32) -> Option<usize> {
    masks.iter().rposition(|m| m.get(x, y) > 0.5)
}

/// Precomputed inverse of a warp: closed-form when the warp is affine,
/// otherwise the iterative fixed-point inverter.
enum WarpInverse<'a> {
    Affine(Affine2),
    Iterative(WarpInverter<'a>),
}

impl<'a> WarpInverse<'a> {
    fn build(warp: &'a WarpMap) -> Result<WarpInverse<'a>> {
        match warp.as_affine() {
            Some(a) => Ok(WarpInverse::Affine(a.invert()?)),
            None => Ok(WarpInverse::Iterative(warp.inverter()?)),
        }
    }

    fn apply(&self, p: Point) -> Point {
        match self {
            WarpInverse::Affine(a) => a.apply(p),
            WarpInverse::Iterative(inv) => inv.invert(p),
        }
    }
}

struct BgCtx<'a> {
    tex: &'a ImageBuffer,
    /// Scene coordinates -> texture pixels (placement inverse folded in).
    tex_map: Affine2,
    motion: &'a WarpMap,
    motion_inv: WarpInverse<'a>,
}

impl BgCtx<'_> {
    fn color(&self, p: Point, moved: bool, out: &mut [f32]) {
        let q = if moved { self.motion_inv.apply(p) } else { p };
        self.tex.sample_bilinear(self.tex_map.apply(q), out);
    }
}

struct LayerCtx<'a> {
    tex: &'a ImageBuffer,
    /// Scene coordinates -> texture pixels (placement inverse folded in).
    tex_px: Affine2,
    motion: &'a WarpMap,
    motion_inv: WarpInverse<'a>,
}

impl LayerCtx<'_> {
    fn color(&self, p: Point, moved: bool, out: &mut [f32]) {
        let q = if moved { self.motion_inv.apply(p) } else { p };
        self.tex.sample_bilinear(self.tex_px.apply(q), out);
    }
}

struct RenderCtx<'a> {
    width: u32,
    height: u32,
    bg: BgCtx<'a>,
    layers: Vec<LayerCtx<'a>>,
    masks1: Vec<Mask>,
    masks2: Vec<Mask>,
}

struct RowOut {
    c1: Vec<f32>,
    c2: Vec<f32>,
    u: Vec<f32>,
    v: Vec<f32>,
    occ: Vec<bool>,
}

impl RenderCtx<'_> {
    fn render_row(&self, y: u32) -> RowOut {
        let w = self.width as usize;
        let wf = self.width as f64;
        let hf = self.height as f64;
        let mut out = RowOut {
            c1: Vec::with_capacity(w * 3),
            c2: Vec::with_capacity(w * 3),
            u: Vec::with_capacity(w),
            v: Vec::with_capacity(w),
            occ: Vec::with_capacity(w),
        };
        let mut col = [0.0f32; 3];
        for x in 0..self.width {
            let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);

            // Composite both frames back to front, blending by coverage.
            let mut px1 = [0.0f32; 3];
            self.bg.color(p, false, &mut px1);
            for (layer, mask) in self.layers.iter().zip(&self.masks1) {
                let a = mask.get(x, y);
                if a > 0.0 {
                    layer.color(p, false, &mut col);
                    for ch in 0..3 {
                        px1[ch] = px1[ch] * (1.0 - a) + col[ch] * a;
                    }
                }
            }
            let mut px2 = [0.0f32; 3];
            self.bg.color(p, true, &mut px2);
            for (layer, mask) in self.layers.iter().zip(&self.masks2) {
                let a = mask.get(x, y);
                if a > 0.0 {
                    layer.color(p, true, &mut col);
                    for ch in 0..3 {
                        px2[ch] = px2[ch] * (1.0 - a) + col[ch] * a;
                    }
                }
            }

            // Crisp motion label: topmost layer with majority coverage.
            let label = topmost_layer(&self.masks1, x, y);
            let motion = match label {
                Some(i) => self.layers[i].motion,
                None => self.bg.motion,
            };
            let target = motion.apply(p);
            let flow = target.sub(p);

            // Occluded when the target leaves the frame or a layer above
            // the labelled one covers its pixel in frame 2.
            let occluded = if target.x < 0.0 || target.y < 0.0 || target.x >= wf || target.y >= hf
            {
                true
            } else {
                let (tx, ty) = (target.x as u32, target.y as u32);
                let above = label.map_or(0, |i| i + 1);
                self.masks2[above..].iter().any(|m| m.get(tx, ty) > 0.5)
            };

            out.c1.extend_from_slice(&px1);
            out.c2.extend_from_slice(&px2);
            out.u.push(flow.x as f32);
            out.v.push(flow.y as f32);
            out.occ.push(occluded);
        }
        out
    }
}

/// Renders a scene into two frames, the ground-truth flow and the occlusion
/// mask.
///
/// Every pixel takes the analytic motion of the layer it is labelled with
/// (topmost layer covering more than half the pixel, background otherwise),
/// so flow is defined and finite everywhere, including occluded pixels.
/// A pixel is occluded when its target leaves the frame or lands under a
/// higher layer. Rows render in parallel and are reassembled in order, so
/// output bytes do not depend on the thread count.
pub fn render_pair(scene: &SceneSpec, source: &TextureSource) -> Result<Sample> {
    let (w, h) = (scene.width, scene.height);
    assert!(w > 0 && h > 0, "frame dimensions must be positive");

    let bg_tex = source.realize(scene.background.texture)?;
    let mut layer_tex = Vec::with_capacity(scene.layers.len());
    for layer in &scene.layers {
        layer_tex.push(source.realize(layer.texture)?);
    }

    // Texture maps carry virtual texture dimensions (frame-sized for the
    // background, OBJECT_TEXTURE_DIM squares for layers); rescale them to
    // the realized texture's actual pixels.
    let bg_img = &bg_tex.image;
    let bg = BgCtx {
        tex: bg_img,
        tex_map: Affine2::compose(
            Affine2::scale_xy(
                bg_img.width() as f64 / w as f64,
                bg_img.height() as f64 / h as f64,
            ),
            scene.background.place.invert()?,
        ),
        motion: &scene.background.motion,
        motion_inv: WarpInverse::build(&scene.background.motion)?,
    };

    let mut layers = Vec::with_capacity(scene.layers.len());
    let mut masks1 = Vec::with_capacity(scene.layers.len());
    let mut masks2 = Vec::with_capacity(scene.layers.len());
    for (spec, tex) in scene.layers.iter().zip(&layer_tex) {
        masks1.push(rasterize_mask(
            &spec.shape,
            spec.place,
            w,
            h,
            scene.supersample,
        )?);
        masks2.push(rasterize_warped_mask(
            &spec.shape,
            spec.place,
            &spec.motion,
            w,
            h,
            scene.supersample,
        )?);
        let img = &tex.image;
        let virt = Affine2::scale_xy(
            img.width() as f64 / OBJECT_TEXTURE_DIM as f64,
            img.height() as f64 / OBJECT_TEXTURE_DIM as f64,
        );
        layers.push(LayerCtx {
            tex: img,
            tex_px: Affine2::compose(virt, Affine2::compose(spec.tex_map, spec.place.invert()?)),
            motion: &spec.motion,
            motion_inv: WarpInverse::build(&spec.motion)?,
        });
    }

    let ctx = RenderCtx {
        width: w,
        height: h,
        bg,
        layers,
        masks1,
        masks2,
    };
    let rows: Vec<RowOut> = (0..h).into_par_iter().map(|y| ctx.render_row(y)).collect();

    let n = w as usize * h as usize;
    let mut c1 = Vec::with_capacity(n * 3);
    let mut c2 = Vec::with_capacity(n * 3);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut occ = Vec::with_capacity(n);
    for row in rows {
        c1.extend_from_slice(&row.c1);
        c2.extend_from_slice(&row.c2);
        u.extend_from_slice(&row.u);
        v.extend_from_slice(&row.v);
        occ.extend_from_slice(&row.occ);
    }
    Ok(Sample {
        frame1: ImageBuffer::from_data(w, h, 3, c1),
        frame2: ImageBuffer::from_data(w, h, 3, c2),
        flow: FlowField::from_planes(w, h, u, v),
        occ: OcclusionMask::from_data(w, h, occ),
    })
}
