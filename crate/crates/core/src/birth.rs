//! Two-frame adaptive birth.
//!
//! A measurement left unassigned at frame `k-1` becomes a birth point at
//! frame `k` only if some measurement of frame `k` overlaps it (IOU above a
//! threshold). Those overlapping measurements are the only ones the new
//! track may take in its first update, so isolated clutter never spawns a
//! track.

use crate::gaussian::{GaussianComponent, StateCovariance, StateVector};
use crate::geometry::BBox;
use crate::glmb::{LabeledGaussianTrack, TrackLabel};
use crate::scalar::Scalar;

/// Intersection over union; 0 when either box is degenerate.
pub fn iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let (aa, ab) = (a.area(), b.area());
    if aa <= T::zero() || ab <= T::zero() {
        return T::zero();
    }
    let inter = a.intersection_area(b);
    (inter / (aa + ab - inter)).min(T::one())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthPoint<T> {
    pub origin: BBox<T>,
    pub origin_frame: u32,
    /// Index of the origin measurement within frame `origin_frame`.
    pub origin_index: usize,
    pub label: TrackLabel,
    /// Current-frame measurements overlapping the origin, ascending.
    pub valid_meas: Vec<usize>,
}

/// Birth points for frame `prev_frame + 1`.
///
/// `unassigned_prev` pairs each leftover measurement of the previous frame
/// with its index in that frame; the index becomes the label's birth index.
pub fn propose_birth_points<T: Scalar>(
    unassigned_prev: &[(usize, BBox<T>)],
    prev_frame: u32,
    current: &[BBox<T>],
    overlap_threshold: T,
) -> Vec<BirthPoint<T>> {
    let mut points: Vec<BirthPoint<T>> = Vec::new();
    for &(index, origin) in unassigned_prev {
        let valid: Vec<usize> = current
            .iter()
            .enumerate()
            .filter(|(_, z)| iou(&origin, z) > overlap_threshold)
            .map(|(j, _)| j)
            .collect();
        if valid.is_empty() || points.iter().any(|p| p.origin == origin) {
            continue;
        }
        points.push(BirthPoint {
            origin,
            origin_frame: prev_frame,
            origin_index: index,
            label: TrackLabel::new(prev_frame, index as u32),
            valid_meas: valid,
        });
    }
    points
}

#[derive(Debug, Clone)]
pub struct BirthParams<T: Scalar> {
    pub existence: T,
    /// Diagonal of the prior covariance in state order.
    pub prior_std: [T; 6],
    pub dt: T,
}

impl<T: Scalar> Default for BirthParams<T> {
    fn default() -> Self {
        Self {
            existence: T::lit(0.35),
            prior_std: [
                T::lit(20.0),
                T::lit(20.0),
                T::lit(10.0),
                T::lit(10.0),
                T::lit(10.0),
                T::lit(10.0),
            ],
            dt: T::one(),
        }
    }
}

/// One Bernoulli component of the labeled multi-Bernoulli birth density.
/// The track's prior lives at the origin frame; prediction moves it forward.
#[derive(Debug, Clone)]
pub struct BirthTrack<T: Scalar> {
    pub track: LabeledGaussianTrack<T>,
    pub existence: T,
}

impl<T: Scalar> BirthTrack<T> {
    pub fn new(track: LabeledGaussianTrack<T>, existence: T) -> Self {
        Self { track, existence }
    }
}

#[derive(Debug, Clone)]
pub struct BirthDensity<T: Scalar> {
    pub tracks: Vec<BirthTrack<T>>,
}

impl<T: Scalar> Default for BirthDensity<T> {
    fn default() -> Self {
        Self { tracks: Vec::new() }
    }
}

impl<T: Scalar> BirthDensity<T> {
    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Every label subset with its LMB weight
    /// `∏_{ℓ∉J}(1 - r_ℓ) ∏_{ℓ∈J} r_ℓ`. Exponential in the number of points.
    pub fn label_set_weights(&self) -> Vec<(Vec<TrackLabel>, T)> {
        let n = self.tracks.len();
        assert!(n < 24, "label subset enumeration is exponential");
        (0..1u32 << n)
            .map(|mask| {
                let mut labels = Vec::new();
                let mut w = T::one();
                for (i, b) in self.tracks.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        labels.push(b.track.label);
                        w *= b.existence;
                    } else {
                        w *= T::one() - b.existence;
                    }
                }
                (labels, w)
            })
            .collect()
    }
}

/// Builds the LMB birth density. Each prior is centred on the origin box,
/// with velocity taken from the displacement to the best-overlapping valid
/// measurement.
pub fn build_birth_density<T: Scalar>(
    points: &[BirthPoint<T>],
    current: &[BBox<T>],
    params: &BirthParams<T>,
) -> BirthDensity<T> {
    let cov = StateCovariance::from_diagonal(&StateVector::from_iterator(params.prior_std.iter().map(|s| *s * *s)));
    let tracks = points
        .iter()
        .map(|p| {
            let (ox, oy) = p.origin.center();
            let matched = p
                .valid_meas
                .iter()
                .map(|&j| current[j])
                .max_by(|a, b| {
                    iou(&p.origin, a)
                        .partial_cmp(&iou(&p.origin, b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(p.origin);
            let (mx, my) = matched.center();
            let mean = StateVector::from_column_slice(&[
                ox,
                oy,
                (mx - ox) / params.dt,
                (my - oy) / params.dt,
                p.origin.width,
                p.origin.height,
            ]);
            let mut track = LabeledGaussianTrack::new(
                p.label,
                vec![GaussianComponent::new(T::one(), mean, cov)],
                p.origin_frame,
            );
            track.valid_meas = Some(p.valid_meas.clone());
            BirthTrack::new(track, params.existence)
        })
        .collect();
    BirthDensity { tracks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{VX, VY};

    fn b(l: f64, t: f64, w: f64, h: f64) -> BBox<f64> {
        BBox::new(l, t, w, h)
    }

    /// Pixel-grid area count; independent of the analytic intersection.
    fn iou_by_pixels(a: &BBox<f64>, c: &BBox<f64>) -> f64 {
        let inside = |bb: &BBox<f64>, x: f64, y: f64| {
            x >= bb.left && x < bb.left + bb.width && y >= bb.top && y < bb.top + bb.height
        };
        let (mut inter, mut union) = (0u64, 0u64);
        for yi in 0..400 {
            for xi in 0..400 {
                let (x, y) = (xi as f64 + 0.5, yi as f64 + 0.5);
                let (ia, ic) = (inside(a, x, y), inside(c, x, y));
                inter += (ia && ic) as u64;
                union += (ia || ic) as u64;
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_examples() {
        let a = b(0., 0., 10., 10.);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(20., 20., 5., 5.)), 0.0);
        assert!((iou(&a, &b(5., 0., 10., 10.)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(iou(&a, &b(0., 0., 0., 10.)), 0.0);
    }

    #[test]
    fn iou_matches_pixel_oracle() {
        let prev = b(100., 100., 50., 100.);
        let cur = b(104., 102., 50., 100.);
        let oracle = iou_by_pixels(&prev, &cur);
        assert!((oracle - 4508.0 / 5492.0).abs() < 1e-12);
        assert!((iou(&prev, &cur) - oracle).abs() < 1e-12);
    }

    #[test]
    fn birth_point_from_overlap() {
        let prev = [(3usize, b(100., 100., 50., 100.))];
        let cur = [b(500., 500., 50., 100.), b(104., 102., 50., 100.)];
        let points = propose_birth_points(&prev, 4, &cur, 0.4);
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].valid_meas, vec![1]);
        assert_eq!(points[0].label, TrackLabel::new(4, 3));
    }

    #[test]
    fn no_overlap_no_birth() {
        let prev = [(0usize, b(100., 100., 50., 100.))];
        let cur = [b(500., 500., 50., 100.)];
        assert!(propose_birth_points(&prev, 1, &cur, 0.3).is_empty());
    }

    #[test]
    fn two_overlapping_measurements_share_one_point() {
        let prev = [(0usize, b(100., 100., 50., 100.))];
        let cur = [b(102., 100., 50., 100.), b(98., 101., 50., 100.)];
        let points = propose_birth_points(&prev, 1, &cur, 0.3);
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].valid_meas, vec![0, 1]);
    }

    #[test]
    fn duplicate_origins_collapse() {
        let prev = [(0usize, b(100., 100., 50., 100.)), (1, b(100., 100., 50., 100.))];
        let cur = [b(102., 100., 50., 100.)];
        assert_eq!(propose_birth_points(&prev, 1, &cur, 0.3).len(), 1);
    }

    #[test]
    fn prior_velocity_from_displacement() {
        let prev = [(0usize, b(100., 100., 50., 100.))];
        let cur = [b(104., 102., 50., 100.)];
        let points = propose_birth_points(&prev, 1, &cur, 0.3);
        let density = build_birth_density(&points, &cur, &BirthParams::default());
        let mean = density.tracks[0].track.mean();
        assert_eq!((mean[VX], mean[VY]), (4.0, 2.0));
        assert_eq!(density.tracks[0].existence, 0.35);
    }

    #[test]
    fn empty_points_give_empty_density() {
        assert!(build_birth_density::<f64>(&[], &[], &BirthParams::default()).is_empty());
    }

    #[test]
    fn two_point_lmb_weights() {
        let prev = [(0usize, b(100., 100., 50., 100.)), (1, b(400., 100., 50., 100.))];
        let cur = [b(101., 100., 50., 100.), b(401., 100., 50., 100.)];
        let points = propose_birth_points(&prev, 1, &cur, 0.3);
        let params = BirthParams {
            existence: 0.3,
            ..BirthParams::default()
        };
        let w = build_birth_density(&points, &cur, &params).label_set_weights();
        let expect = [0.49, 0.21, 0.21, 0.09];
        for ((_, got), want) in w.iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(w[3].0.len(), 2);
    }
}
