//! Flow metrics: endpoint error with a per-magnitude-range breakdown, and
//! displacement-magnitude histograms for comparing datasets.

use crate::error::Error;
use crate::raster::FlowField;
use crate::Result;

// ---------------------------------------------------------------------------
// Endpoint error
// ---------------------------------------------------------------------------

/// Standard ranges for the partial-error breakdown, as half-open intervals
/// [lo, hi) in pixels of ground-truth displacement magnitude.
pub const DEFAULT_RANGES: [(f64, f64); 4] = [
    (0.0, 10.0),
    (10.0, 40.0),
    (40.0, 160.0),
    (160.0, f64::INFINITY),
];

/// Error mass one magnitude range adds to the total.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeContribution {
    /// Half-open interval [lo, hi) over ground-truth magnitude.
    pub range: (f64, f64),
    /// Sum of endpoint errors over this range's pixels divided by the
    /// total pixel count, so contributions of covering ranges sum to
    /// `total_epe`.
    pub contribution: f64,
    /// Pixels whose ground-truth magnitude falls in the range.
    pub pixels: u64,
}

/// Mean endpoint error plus its decomposition over magnitude ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct EpeReport {
    pub total_epe: f64,
    pub partial: Vec<RangeContribution>,
    pub pixel_count: u64,
}

/// Streaming endpoint-error aggregation over any number of field pairs.
/// The report averages over all pixels seen, so multi-sample aggregates
/// keep the partial-sum-equals-total identity.
#[derive(Debug, Clone)]
pub struct EpeAccumulator {
    ranges: Vec<(f64, f64)>,
    error_sum: f64,
    range_error: Vec<f64>,
    range_pixels: Vec<u64>,
    pixels: u64,
}

impl EpeAccumulator {
    pub fn new(ranges: &[(f64, f64)]) -> EpeAccumulator {
        EpeAccumulator {
            ranges: ranges.to_vec(),
            error_sum: 0.0,
            range_error: vec![0.0; ranges.len()],
            range_pixels: vec![0; ranges.len()],
            pixels: 0,
        }
    }

    /// Folds one estimate/ground-truth pair into the running totals.
    pub fn add(&mut self, est: &FlowField, gt: &FlowField) -> Result<()> {
        if est.width() != gt.width() || est.height() != gt.height() {
            return Err(Error::DimensionMismatch {
                expected: (gt.width(), gt.height()),
                got: (est.width(), est.height()),
            });
        }
        for (i, (&eu, &gu)) in est.u_plane().iter().zip(gt.u_plane()).enumerate() {
            let ev = est.v_plane()[i];
            let gv = gt.v_plane()[i];
            let err = libm::hypot((eu - gu) as f64, (ev - gv) as f64);
            let mag = libm::hypot(gu as f64, gv as f64);
            self.error_sum += err;
            self.pixels += 1;
            // First matching range takes the pixel.
            for (r, &(lo, hi)) in self.ranges.iter().enumerate() {
                if mag >= lo && mag < hi {
                    self.range_error[r] += err;
                    self.range_pixels[r] += 1;
                    break;
                }
            }
        }
        Ok(())
    }

    pub fn report(&self) -> EpeReport {
        let n = self.pixels.max(1) as f64;
        EpeReport {
            total_epe: self.error_sum / n,
            partial: self
                .ranges
                .iter()
                .zip(&self.range_error)
                .zip(&self.range_pixels)
                .map(|((&range, &err), &pixels)| RangeContribution {
                    range,
                    contribution: err / n,
                    pixels,
                })
                .collect(),
            pixel_count: self.pixels,
        }
    }
}

/// Endpoint error of one estimate against one ground truth.
pub fn epe(est: &FlowField, gt: &FlowField, ranges: &[(f64, f64)]) -> Result<EpeReport> {
    let mut acc = EpeAccumulator::new(ranges);
    acc.add(est, gt)?;
    Ok(acc.report())
}

// ---------------------------------------------------------------------------
// Displacement histograms
// ---------------------------------------------------------------------------

/// Per-pixel displacement-magnitude histogram.
///
/// `counts` has one slot per edge: slot 0 collects magnitudes below the
/// first edge, slot `i` the interval `[edges[i-1], edges[i])`, and values
/// at or above the last edge clamp into the final slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementHistogram {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
}

impl DisplacementHistogram {
    pub fn new(bin_edges: Vec<f64>) -> DisplacementHistogram {
        assert!(!bin_edges.is_empty(), "need at least one bin edge");
        assert!(
            bin_edges.windows(2).all(|w| w[0] < w[1]),
            "bin edges must be strictly increasing"
        );
        assert!(bin_edges[0] >= 0.0, "magnitude edges cannot be negative");
        let counts = vec![0; bin_edges.len()];
        DisplacementHistogram { bin_edges, counts }
    }

    /// 40 log-spaced bins over [0.1, 300] px plus the underflow slot.
    pub fn default_edges() -> Vec<f64> {
        log_spaced_edges(0.1, 300.0, 40)
    }

    pub fn with_default_edges() -> DisplacementHistogram {
        DisplacementHistogram::new(Self::default_edges())
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_pixels(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds one displacement magnitude.
    pub fn add_magnitude(&mut self, mag: f64) {
        let i = self.bin_edges.partition_point(|&e| e <= mag);
        let i = i.min(self.counts.len() - 1);
        self.counts[i] += 1;
    }

    /// Folds a whole flow field into the histogram.
    pub fn accumulate(&mut self, flow: &FlowField) {
        for (&u, &v) in flow.u_plane().iter().zip(flow.v_plane()) {
            self.add_magnitude(libm::hypot(u as f64, v as f64));
        }
    }

    /// Merges another histogram accumulated over the same edges, enabling
    /// order-independent parallel reduction.
    pub fn merge(&mut self, other: &DisplacementHistogram) -> Result<()> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::EdgeMismatch);
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        Ok(())
    }

    /// Per-bin shares of the total mass (all zero while empty).
    pub fn shares(&self) -> Vec<f64> {
        let total = self.total_pixels();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

/// The `n + 1` edges of `n` log-spaced bins covering `[lo, hi]`.
pub fn log_spaced_edges(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n > 0, "need 0 < lo < hi and n >= 1");
    let step = libm::log(hi / lo) / n as f64;
    (0..=n).map(|i| lo * libm::exp(step * i as f64)).collect()
}

/// Symmetric chi-square distance between normalized histograms:
/// sum of (p-q)^2/(p+q), which is 0 iff the proportions agree and at most
/// 2.0 (disjoint mass).
pub fn compare_histograms(a: &DisplacementHistogram, b: &DisplacementHistogram) -> Result<f64> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::EdgeMismatch);
    }
    let (pa, pb) = (a.shares(), b.shares());
    let mut score = 0.0;
    for (p, q) in pa.iter().zip(&pb) {
        if p + q > 0.0 {
            score += (p - q).powi(2) / (p + q);
        }
    }
    Ok(score)
}

/// Kolmogorov-Smirnov distance between the binned distributions: the
/// largest absolute difference of cumulative shares. The histograms must
/// have the same number of bins but may use different edges — comparing a
/// scaled dataset against the reference uses proportionally scaled edges.
pub fn ks_distance(a: &DisplacementHistogram, b: &DisplacementHistogram) -> Result<f64> {
    if a.counts.len() != b.counts.len() {
        return Err(Error::EdgeMismatch);
    }
    let (pa, pb) = (a.shares(), b.shares());
    let mut ca = 0.0;
    let mut cb = 0.0;
    let mut worst: f64 = 0.0;
    for (p, q) in pa.iter().zip(&pb) {
        ca += p;
        cb += q;
        worst = worst.max((ca - cb).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_field(width: u32, height: u32, seed: u64, span: f64) -> FlowField {
        let mut r = rng::stream(seed);
        let n = width as usize * height as usize;
        let u = (0..n).map(|_| rng::uniform(&mut r, -span, span) as f32).collect();
        let v = (0..n).map(|_| rng::uniform(&mut r, -span, span) as f32).collect();
        FlowField::from_planes(width, height, u, v)
    }

    #[test]
    fn identical_fields_score_zero() {
        let gt = random_field(20, 15, 1, 50.0);
        let r = epe(&gt.clone(), &gt, &DEFAULT_RANGES).unwrap();
        assert_eq!(r.total_epe, 0.0);
        assert_eq!(r.pixel_count, 300);
        for part in &r.partial {
            assert_eq!(part.contribution, 0.0);
        }
    }

    #[test]
    fn constant_offset_gives_exact_total() {
        // Flow values quantized to 1/64 px stay exact under adding small
        // integers, so every per-pixel error is exactly (3, 4) -> 5.
        let raw = random_field(32, 24, 2, 120.0);
        let quantize = |p: &[f32]| p.iter().map(|&x| (x * 64.0).round() / 64.0).collect();
        let gt = FlowField::from_planes(32, 24, quantize(raw.u_plane()), quantize(raw.v_plane()));
        let mut est = gt.clone();
        for y in 0..24 {
            for x in 0..32 {
                let (u, v) = gt.get(x, y);
                est.set(x, y, u + 3.0, v + 4.0);
            }
        }
        let r = epe(&est, &gt, &DEFAULT_RANGES).unwrap();
        assert_eq!(r.total_epe, 5.0);
    }

    #[test]
    fn partials_sum_to_total() {
        let gt = random_field(64, 48, 3, 250.0);
        let est = random_field(64, 48, 4, 250.0);
        let r = epe(&est, &gt, &DEFAULT_RANGES).unwrap();
        let sum: f64 = r.partial.iter().map(|p| p.contribution).sum();
        assert!((sum - r.total_epe).abs() <= 1e-6 * r.total_epe.max(1e-12));
        let pixels: u64 = r.partial.iter().map(|p| p.pixels).sum();
        assert_eq!(pixels, r.pixel_count);
        // Mass actually lands in several ranges at this span.
        assert!(r.partial.iter().filter(|p| p.pixels > 0).count() >= 3);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = FlowField::new(8, 8);
        let b = FlowField::new(8, 9);
        match epe(&a, &b, &DEFAULT_RANGES) {
            Err(Error::DimensionMismatch { expected, got }) => {
                assert_eq!(expected, (8, 9));
                assert_eq!(got, (8, 8));
            }
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn epe_ignores_pixel_order_and_shared_offsets() {
        // Snap to multiples of 1/64 so the dyadic shift below is exact.
        let quantize = |f: FlowField| {
            let q = |p: &[f32]| -> Vec<f32> {
                p.iter().map(|&x| (x * 64.0).round() / 64.0).collect()
            };
            FlowField::from_planes(f.width(), f.height(), q(f.u_plane()), q(f.v_plane()))
        };
        let gt = quantize(random_field(30, 20, 5, 80.0));
        let est = quantize(random_field(30, 20, 6, 80.0));
        let base = epe(&est, &gt, &DEFAULT_RANGES).unwrap();

        // Reverse both fields pixel-for-pixel.
        let rev = |f: &FlowField| {
            let mut u: Vec<f32> = f.u_plane().to_vec();
            let mut v: Vec<f32> = f.v_plane().to_vec();
            u.reverse();
            v.reverse();
            FlowField::from_planes(30, 20, u, v)
        };
        let r = epe(&rev(&est), &rev(&gt), &DEFAULT_RANGES).unwrap();
        assert!((r.total_epe - base.total_epe).abs() < 1e-9);

        // Shift both by the same constant: total is preserved.
        let shift = |f: &FlowField| {
            let u = f.u_plane().iter().map(|&x| x + 2.5).collect();
            let v = f.v_plane().iter().map(|&x| x - 1.5).collect();
            FlowField::from_planes(30, 20, u, v)
        };
        let s = epe(&shift(&est), &shift(&gt), &DEFAULT_RANGES).unwrap();
        assert!((s.total_epe - base.total_epe).abs() < 1e-9);
    }

    #[test]
    fn accumulator_matches_concatenation() {
        let gt1 = random_field(16, 16, 7, 60.0);
        let est1 = random_field(16, 16, 8, 60.0);
        let gt2 = random_field(24, 10, 9, 60.0);
        let est2 = random_field(24, 10, 10, 60.0);

        let mut acc = EpeAccumulator::new(&DEFAULT_RANGES);
        acc.add(&est1, &gt1).unwrap();
        acc.add(&est2, &gt2).unwrap();
        let joint = acc.report();

        let a = epe(&est1, &gt1, &DEFAULT_RANGES).unwrap();
        let b = epe(&est2, &gt2, &DEFAULT_RANGES).unwrap();
        let na = a.pixel_count as f64;
        let nb = b.pixel_count as f64;
        let expected = (a.total_epe * na + b.total_epe * nb) / (na + nb);
        assert!((joint.total_epe - expected).abs() < 1e-9);
        assert_eq!(joint.pixel_count, a.pixel_count + b.pixel_count);
    }

    #[test]
    fn zero_field_lands_in_the_underflow_bin() {
        let mut h = DisplacementHistogram::with_default_edges();
        h.accumulate(&FlowField::new(10, 10));
        assert_eq!(h.counts()[0], 100);
        assert_eq!(h.total_pixels(), 100);
        assert!(h.counts()[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn constant_magnitude_fills_one_bin() {
        let mut h = DisplacementHistogram::new(vec![0.0, 5.0, 10.0]);
        let n = 6 * 4;
        let u = vec![7.0f32; n];
        let v = vec![0.0f32; n];
        h.accumulate(&FlowField::from_planes(6, 4, u, v));
        assert_eq!(h.counts(), &[0, 0, n as u64]);
    }

    #[test]
    fn overflow_clamps_into_the_last_bin() {
        let mut h = DisplacementHistogram::with_default_edges();
        h.add_magnitude(1e6);
        h.add_magnitude(300.0);
        let last = h.counts().len() - 1;
        assert_eq!(h.counts()[last], 2);
    }

    #[test]
    fn accumulation_is_order_independent() {
        let a = random_field(20, 20, 11, 40.0);
        let b = random_field(20, 20, 12, 200.0);

        let mut h1 = DisplacementHistogram::with_default_edges();
        h1.accumulate(&a);
        h1.accumulate(&b);
        let mut h2 = DisplacementHistogram::with_default_edges();
        h2.accumulate(&b);
        h2.accumulate(&a);
        assert_eq!(h1, h2);

        // Parallel-style merge agrees with sequential accumulation.
        let mut ha = DisplacementHistogram::with_default_edges();
        ha.accumulate(&a);
        let mut hb = DisplacementHistogram::with_default_edges();
        hb.accumulate(&b);
        ha.merge(&hb).unwrap();
        assert_eq!(ha, h1);
    }

    #[test]
    fn identical_histograms_have_zero_distance() {
        let mut h = DisplacementHistogram::with_default_edges();
        h.accumulate(&random_field(25, 25, 13, 90.0));
        assert_eq!(compare_histograms(&h, &h).unwrap(), 0.0);
        assert_eq!(ks_distance(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_masses_hit_the_chi_square_bound() {
        let mut a = DisplacementHistogram::new(vec![0.0, 1.0, 2.0]);
        let mut b = DisplacementHistogram::new(vec![0.0, 1.0, 2.0]);
        a.add_magnitude(0.5);
        b.add_magnitude(1.5);
        let d = compare_histograms(&a, &b).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_edges_are_rejected() {
        let a = DisplacementHistogram::with_default_edges();
        let b = DisplacementHistogram::new(vec![0.0, 1.0]);
        assert!(matches!(compare_histograms(&a, &b), Err(Error::EdgeMismatch)));
        assert!(matches!(ks_distance(&a, &b), Err(Error::EdgeMismatch)));
    }

    #[test]
    fn scaled_magnitudes_match_under_scaled_edges() {
        let base = random_field(40, 40, 14, 70.0);
        let doubled = {
            let u = base.u_plane().iter().map(|&x| x * 2.0).collect();
            let v = base.v_plane().iter().map(|&x| x * 2.0).collect();
            FlowField::from_planes(40, 40, u, v)
        };
        let mut h1 = DisplacementHistogram::with_default_edges();
        h1.accumulate(&base);
        let edges2: Vec<f64> = DisplacementHistogram::default_edges()
            .into_iter()
            .map(|e| e * 2.0)
            .collect();
        let mut h2 = DisplacementHistogram::new(edges2);
        h2.accumulate(&doubled);
        // Same logical bins: the distributions coincide almost everywhere
        // (float rounding can move a value sitting exactly on an edge).
        assert!(ks_distance(&h1, &h2).unwrap() < 1e-3);
    }
}
