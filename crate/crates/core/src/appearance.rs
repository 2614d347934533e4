//! Colour-histogram appearance features and similarity measures.

use crate::geometry::BBox;
use crate::scalar::Scalar;

pub const HUE_BINS: usize = 8;
pub const SAT_BINS: usize = 8;
pub const VAL_BINS: usize = 8;
pub const HIST_BINS: usize = HUE_BINS * SAT_BINS * VAL_BINS;

/// L1-normalized 8x8x8 HSV histogram. An all-zero histogram is the
/// sentinel for "no imagery available".
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram<T> {
    bins: Vec<T>,
}

impl<T: Scalar> ColorHistogram<T> {
    pub fn sentinel() -> Self {
        Self {
            bins: vec![T::zero(); HIST_BINS],
        }
    }

    /// Normalizes arbitrary nonnegative bin masses. Returns the sentinel when
    /// the input is empty, has the wrong length, or sums to zero.
    pub fn from_bins(bins: &[T]) -> Self {
        if bins.len() != HIST_BINS {
            return Self::sentinel();
        }
        let total = bins.iter().fold(T::zero(), |acc, &b| acc + b.max(T::zero()));
        if total <= T::zero() || !total.is_finite_value() {
            return Self::sentinel();
        }
        Self {
            bins: bins.iter().map(|&b| b.max(T::zero()) / total).collect(),
        }
    }

    pub fn bins(&self) -> &[T] {
        &self.bins
    }

    pub fn is_sentinel(&self) -> bool {
        self.bins.iter().all(|b| *b == T::zero())
    }

    pub fn cast<U: Scalar>(&self) -> ColorHistogram<U> {
        ColorHistogram {
            bins: self.bins.iter().map(|b| U::lit(b.to_f64_lossy())).collect(),
        }
    }
}

/// What the tracker remembers about an object's look.
#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceDescriptor<T> {
    pub histogram: ColorHistogram<T>,
    pub width: T,
    pub height: T,
}

impl<T: Scalar> AppearanceDescriptor<T> {
    pub fn new(histogram: ColorHistogram<T>, bbox: &BBox<T>) -> Self {
        Self {
            histogram,
            width: bbox.width,
            height: bbox.height,
        }
    }
}

/// Source of per-detection histograms (image crops, a feature file, or a
/// synthetic generator). Implementations must tolerate concurrent reads.
pub trait FeatureProvider: Send + Sync {
    /// Histogram of detection `det_index` of `frame`; the sentinel when the
    /// source has nothing for it.
    fn histogram(&self, frame: u32, det_index: usize, bbox: &BBox<f64>) -> ColorHistogram<f64>;
}

/// No appearance information at all.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoFeatures;

impl FeatureProvider for NoFeatures {
    fn histogram(&self, _: u32, _: usize, _: &BBox<f64>) -> ColorHistogram<f64> {
        ColorHistogram::sentinel()
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let r = rgb[0] as f64 / 255.0;
    let g = rgb[1] as f64 / 255.0;
    let b = rgb[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let sat = if max == 0.0 { 0.0 } else { delta / max };
    (hue, sat, max)
}

pub fn hsv_bin(rgb: [u8; 3]) -> usize {
    let (h, s, v) = rgb_to_hsv(rgb);
    let hb = ((h / 360.0 * HUE_BINS as f64) as usize).min(HUE_BINS - 1);
    let sb = ((s * SAT_BINS as f64) as usize).min(SAT_BINS - 1);
    let vb = ((v * VAL_BINS as f64) as usize).min(VAL_BINS - 1);
    (hb * SAT_BINS + sb) * VAL_BINS + vb
}

/// HSV histogram of an RGB pixel region; the sentinel for an empty region.
pub fn hsv_histogram<T: Scalar>(pixels: &[[u8; 3]]) -> ColorHistogram<T> {
    if pixels.is_empty() {
        return ColorHistogram::sentinel();
    }
    let mut counts = vec![0u64; HIST_BINS];
    for &px in pixels {
        counts[hsv_bin(px)] += 1;
    }
    let bins: Vec<T> = counts.iter().map(|&c| T::lit(c as f64)).collect();
    ColorHistogram::from_bins(&bins)
}

/// `sqrt(1 - Σ sqrt(p_i q_i))`, clamped to `[0, 1]`.
pub fn bhattacharyya<T: Scalar>(p: &ColorHistogram<T>, q: &ColorHistogram<T>) -> T {
    let bc = p
        .bins
        .iter()
        .zip(&q.bins)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a * b).sqrt());
    (T::one() - bc).max(T::zero()).min(T::one()).sqrt()
}

/// Product of the width ratio and the height ratio (smaller over larger).
pub fn same_size<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    size_ratio(a.width, b.width) * size_ratio(a.height, b.height)
}

fn size_ratio<T: Scalar>(x: T, y: T) -> T {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    if hi <= T::zero() {
        T::zero()
    } else {
        lo / hi
    }
}

/// `1 - d_B`; 1 when either histogram is the sentinel.
pub fn same_color<T: Scalar>(a: &AppearanceDescriptor<T>, b: &AppearanceDescriptor<T>) -> T {
    if a.histogram.is_sentinel() || b.histogram.is_sentinel() {
        log::debug!("event=same_color_skipped reason=no_histogram");
        return T::one();
    }
    T::one() - bhattacharyya(&a.histogram, &b.histogram)
}

/// Blend of Euclidean distance and cosine dissimilarity between two
/// 2-vectors: `sqrt(λ1²|x-y|² + λ2²(1 - cos(x, y)))`.
///
/// When either vector has zero norm the cosine dissimilarity is taken as 1.
pub fn direction_aware_distance<T: Scalar>(x: [T; 2], y: [T; 2], lambda1: T, lambda2: T) -> T {
    let dx = x[0] - y[0];
    let dy = x[1] - y[1];
    let euclid_sq = dx * dx + dy * dy;
    let nx = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let ny = (y[0] * y[0] + y[1] * y[1]).sqrt();
    // 1 - cos(x, y) = |x/|x| - y/|y||² / 2, exact zero for equal directions
    let cos_term = if nx > T::zero() && ny > T::zero() {
        let ux = x[0] / nx - y[0] / ny;
        let uy = x[1] / nx - y[1] / ny;
        (ux * ux + uy * uy) / T::lit(2.0)
    } else {
        T::one()
    };
    (lambda1 * lambda1 * euclid_sq + lambda2 * lambda2 * cos_term).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_bin(a: f64, b: f64) -> ColorHistogram<f64> {
        let mut bins = vec![0.0; HIST_BINS];
        bins[0] = a;
        bins[1] = b;
        ColorHistogram::from_bins(&bins)
    }

    #[test]
    fn uniform_region_fills_one_bin() {
        let h: ColorHistogram<f64> = hsv_histogram(&[[200, 30, 30]; 50]);
        assert_eq!(h.bins().iter().filter(|b| **b > 0.0).count(), 1);
        assert_eq!(h.bins().iter().cloned().fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn half_half_region() {
        let mut px = vec![[200u8, 30, 30]; 20];
        px.extend(vec![[30u8, 30, 200]; 20]);
        let h: ColorHistogram<f64> = hsv_histogram(&px);
        let nonzero: Vec<f64> = h.bins().iter().cloned().filter(|b| *b > 0.0).collect();
        assert_eq!(nonzero, vec![0.5, 0.5]);
        let again: ColorHistogram<f64> = hsv_histogram(&px);
        assert_eq!(bhattacharyya(&h, &again), 0.0);
    }

    #[test]
    fn empty_region_is_sentinel() {
        assert!(hsv_histogram::<f64>(&[]).is_sentinel());
    }

    #[test]
    fn hsv_conversion_primaries() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 255, 0]).0, 120.0);
        assert_eq!(rgb_to_hsv([0, 0, 255]).0, 240.0);
        assert_eq!(rgb_to_hsv([0, 0, 0]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = two_bin(0.5, 0.5);
        let q = two_bin(1.0, 0.0);
        assert_eq!(bhattacharyya(&p, &p), 0.0);
        assert_eq!(bhattacharyya(&two_bin(1.0, 0.0), &two_bin(0.0, 1.0)), 1.0);
        let expected = (1.0 - 0.5f64.sqrt()).sqrt();
        assert!((bhattacharyya(&p, &q) - expected).abs() < 1e-15);
        assert!((expected - 0.5412).abs() < 1e-4);
    }

    #[test]
    fn same_size_examples() {
        let b = |w: f64, h: f64| BBox::new(0.0, 0.0, w, h);
        assert_eq!(same_size(&b(10., 20.), &b(10., 20.)), 1.0);
        assert_eq!(same_size(&b(10., 20.), &b(20., 20.)), 0.5);
        assert!((same_size(&b(10., 10.), &b(20., 30.)) - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn same_color_examples() {
        let bb = BBox::new(0.0, 0.0, 1.0, 1.0);
        let d = |h| AppearanceDescriptor::new(h, &bb);
        assert_eq!(same_color(&d(two_bin(1., 0.)), &d(two_bin(1., 0.))), 1.0);
        assert_eq!(same_color(&d(two_bin(1., 0.)), &d(two_bin(0., 1.))), 0.0);
        let s = same_color(&d(two_bin(0.5, 0.5)), &d(two_bin(1., 0.)));
        assert!((s - 0.4588).abs() < 1e-4);
        assert_eq!(same_color(&d(ColorHistogram::sentinel()), &d(two_bin(0., 1.))), 1.0);
    }

    #[test]
    fn direction_aware_examples() {
        assert_eq!(direction_aware_distance([3.0, -1.0], [3.0, -1.0], 0.7, 2.0), 0.0);
        assert!((direction_aware_distance([1.0, 0.0], [0.0, 1.0], 1.0, 1.0) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(direction_aware_distance([2.0, 0.0], [1.0, 0.0], 1.0, 1.0), 1.0);
        // zero-norm convention
        assert_eq!(direction_aware_distance([0.0, 0.0], [0.0, 0.0], 1.0, 1.0), 1.0);
    }

    fn arb_hist() -> impl Strategy<Value = ColorHistogram<f64>> {
        proptest::collection::vec(0.0f64..1.0, HIST_BINS)
            .prop_filter("nonzero", |v| v.iter().sum::<f64>() > 0.0)
            .prop_map(|v| ColorHistogram::from_bins(&v))
    }

    proptest! {
        #[test]
        fn bhattacharyya_symmetric_bounded(p in arb_hist(), q in arb_hist()) {
            let a = bhattacharyya(&p, &q);
            let b = bhattacharyya(&q, &p);
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(bhattacharyya(&p, &p) < 1e-6);
        }

        #[test]
        fn same_size_symmetric_and_scale_invariant(
            w1 in 1.0f64..500.0, h1 in 1.0f64..500.0, w2 in 1.0f64..500.0, h2 in 1.0f64..500.0, c in 0.1f64..10.0
        ) {
            let a = BBox::new(0.0, 0.0, w1, h1);
            let b = BBox::new(0.0, 0.0, w2, h2);
            let s = same_size(&a, &b);
            prop_assert!((s - same_size(&b, &a)).abs() < 1e-15);
            let sa = BBox::new(0.0, 0.0, c * w1, c * h1);
            let sb = BBox::new(0.0, 0.0, c * w2, c * h2);
            prop_assert!((s - same_size(&sa, &sb)).abs() < 1e-12);
            prop_assert!(s > 0.0 && s <= 1.0);
        }

        #[test]
        fn direction_aware_symmetric(
            x0 in -50.0f64..50.0, x1 in -50.0f64..50.0, y0 in -50.0f64..50.0, y1 in -50.0f64..50.0,
            c in 0.01f64..10.0,
        ) {
            let d1 = direction_aware_distance([x0, x1], [y0, y1], 0.2, 1.0);
            let d2 = direction_aware_distance([y0, y1], [x0, x1], 0.2, 1.0);
            prop_assert!((d1 - d2).abs() < 1e-12);
            // same direction: reduces to λ1 · Euclidean
            prop_assume!(x0.hypot(x1) > 1e-3);
            let scaled = [c * x0, c * x1];
            let d = direction_aware_distance([x0, x1], scaled, 0.2, 1.0);
            let euclid = ((x0 - scaled[0]).powi(2) + (x1 - scaled[1]).powi(2)).sqrt();
            prop_assert!((d - 0.2 * euclid).abs() < 1e-6);
        }
    }
}
