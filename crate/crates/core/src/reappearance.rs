//! Bookkeeping for tracks that vanish from the estimate, and the one-step
//! filters that bring them back.
//!
//! A label that drops out of the estimate is either leaving the scene (near
//! an edge and heading out), hidden behind another object, or simply missed
//! by the detector. The latter two are parked in lookup tables. Each frame,
//! the parked entries compete for the measurements the main filter left
//! unassigned in a single-step labeled filter whose only components are
//! "entry reappears on measurement m" and "entry stays hidden".

use std::collections::HashMap;
use std::sync::Arc;

use crate::appearance::{bhattacharyya, direction_aware_distance, AppearanceDescriptor, ColorHistogram};
use crate::assignment::{murty_k_best, CostMatrix};
use crate::error::{Error, Result};
use crate::estimator::{map_cardinality, select_hypothesis, EstimateSet, EstimatedObject};
use crate::gaussian::{
    kalman_predict, kalman_update_detailed, mixture_prune_merge, state_box, GaussianComponent, StateVector, PX, PY, VX,
    VY,
};
use crate::geometry::BBox;
use crate::glmb::{
    refine_out_label, FilterParams, GlmbDensity, GlmbHypothesis, LabeledGaussianTrack, Measurement, TrackLabel,
};
use crate::scalar::Scalar;

/// Fraction of `a` covered by `b`.
pub fn ioa<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> Result<T> {
    let area = a.area();
    if area <= T::zero() {
        return Err(Error::ZeroArea);
    }
    Ok((a.intersection_area(b) / area).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Disappearance {
    LeftScene,
    Occluded,
    MissDetected,
}

impl std::fmt::Display for Disappearance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LeftScene => "left_scene",
            Self::Occluded => "occluded",
            Self::MissDetected => "miss_detected",
        })
    }
}

/// A parked track.
#[derive(Debug, Clone)]
pub struct DisappearedEntry<T: Scalar> {
    pub label: TrackLabel,
    /// Mean state at `k0`.
    pub state: StateVector<T>,
    /// Full posterior at `k0`; extrapolated when scoring a reappearance.
    pub mixture: Vec<GaussianComponent<T>>,
    /// Last frame the track was estimated.
    pub k0: u32,
    pub histogram: ColorHistogram<T>,
    pub velocity: [T; 2],
}

impl<T: Scalar> DisappearedEntry<T> {
    pub fn from_track(track: &LabeledGaussianTrack<T>, k0: u32, histogram: ColorHistogram<T>) -> Self {
        let state = track.mean();
        Self {
            label: track.label,
            state,
            mixture: track.mixture.clone(),
            k0,
            histogram,
            velocity: [state[VX], state[VY]],
        }
    }

    pub fn bbox(&self) -> BBox<T> {
        state_box(&self.state)
    }
}

#[derive(Debug, Clone)]
pub struct LookupTable<T: Scalar> {
    pub kind: Disappearance,
    pub max_age: u32,
    entries: Vec<DisappearedEntry<T>>,
}

impl<T: Scalar> LookupTable<T> {
    pub fn new(kind: Disappearance, max_age: u32) -> Self {
        Self {
            kind,
            max_age,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[DisappearedEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, label: TrackLabel) -> bool {
        self.entries.iter().any(|e| e.label == label)
    }

    /// Adds `entry`, replacing any older entry with the same label.
    pub fn insert(&mut self, entry: DisappearedEntry<T>) {
        self.remove(entry.label);
        self.entries.push(entry);
    }

    pub fn remove(&mut self, label: TrackLabel) -> Option<DisappearedEntry<T>> {
        let i = self.entries.iter().position(|e| e.label == label)?;
        Some(self.entries.remove(i))
    }

    /// Drops entries parked for more than `max_age` frames at `frame`.
    pub fn evict(&mut self, frame: u32) -> usize {
        let before = self.entries.len();
        let max_age = self.max_age;
        self.entries.retain(|e| frame.saturating_sub(e.k0) <= max_age);
        before - self.entries.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CategorizeParams<T> {
    pub image_width: T,
    pub image_height: T,
    /// Distance from the image edge within which an outward-moving track
    /// counts as leaving.
    pub border_margin: T,
    /// Minimum IOA of the predicted box with a live object to call it occluded.
    pub overlap_thresh: T,
}

impl<T: Scalar> Default for CategorizeParams<T> {
    fn default() -> Self {
        Self {
            image_width: T::lit(1920.0),
            image_height: T::lit(1080.0),
            border_margin: T::lit(30.0),
            overlap_thresh: T::lit(0.5),
        }
    }
}

/// True when the box centre is within the margin of its nearest image edge
/// and the velocity points toward that edge.
pub fn is_leaving<T: Scalar>(state: &StateVector<T>, params: &CategorizeParams<T>) -> bool {
    let (cx, cy) = (state[PX], state[PY]);
    let edges = [
        (cx, state[VX] < T::zero()),
        (params.image_width - cx, state[VX] > T::zero()),
        (cy, state[VY] < T::zero()),
        (params.image_height - cy, state[VY] > T::zero()),
    ];
    let (dist, outward) = edges
        .iter()
        .copied()
        .fold(edges[0], |best, e| if e.0 < best.0 { e } else { best });
    dist <= params.border_margin && outward
}

/// Classifies one vanished state. `predicted` is its box one step ahead and
/// `live` the boxes of the objects still estimated.
pub fn classify<T: Scalar>(
    state: &StateVector<T>,
    predicted: &BBox<T>,
    live: &[BBox<T>],
    params: &CategorizeParams<T>,
) -> Disappearance {
    if is_leaving(state, params) {
        return Disappearance::LeftScene;
    }
    let covered = live
        .iter()
        .any(|b| ioa(predicted, b).map(|v| v > params.overlap_thresh).unwrap_or(false));
    if covered {
        Disappearance::Occluded
    } else {
        Disappearance::MissDetected
    }
}

/// Sorts every label of `est_prev` missing from `est_now` into leaving,
/// occluded or missed; parks the latter two and removes all of them from the
/// density.
#[allow(clippy::too_many_arguments)]
pub fn categorize_disappeared<T: Scalar>(
    d: &GlmbDensity<T>,
    est_prev: &EstimateSet<T>,
    est_now: &EstimateSet<T>,
    references: &HashMap<TrackLabel, AppearanceDescriptor<T>>,
    filter: &FilterParams<T>,
    params: &CategorizeParams<T>,
    occluded: &mut LookupTable<T>,
    missed: &mut LookupTable<T>,
) -> (GlmbDensity<T>, Vec<(TrackLabel, Disappearance)>) {
    let live: Vec<BBox<T>> = est_now.objects.iter().map(|o| o.bbox()).collect();
    let mut density = d.clone();
    let mut out = Vec::new();
    for obj in &est_prev.objects {
        if est_now.contains(obj.label) {
            continue;
        }
        let predicted = state_box(&(filter.motion.transition * obj.state));
        let kind = classify(&obj.state, &predicted, &live, params);
        let table = match kind {
            Disappearance::LeftScene => None,
            Disappearance::Occluded => Some(&mut *occluded),
            Disappearance::MissDetected => Some(&mut *missed),
        };
        if let Some(table) = table {
            table.insert(park(obj, est_prev, references));
        }
        if density.hypotheses.iter().any(|h| h.contains(obj.label)) {
            density = refine_out_label(&density, obj.label);
        }
        out.push((obj.label, kind));
    }
    (density, out)
}

/// Entry for `obj` as estimated in `est`.
pub fn park<T: Scalar>(
    obj: &EstimatedObject<T>,
    est: &EstimateSet<T>,
    references: &HashMap<TrackLabel, AppearanceDescriptor<T>>,
) -> DisappearedEntry<T> {
    let histogram = references
        .get(&obj.label)
        .map(|r| r.histogram.clone())
        .unwrap_or_else(ColorHistogram::sentinel);
    match est.hypothesis.track(obj.label) {
        Some(t) => DisappearedEntry::from_track(t, est.frame, histogram),
        None => {
            let comp = GaussianComponent::new(T::one(), obj.state, crate::gaussian::StateCovariance::identity());
            let t = LabeledGaussianTrack::new(obj.label, vec![comp], est.frame);
            DisappearedEntry::from_track(&t, est.frame, histogram)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReappearanceParams<T> {
    /// Per-frame forgetting rate of the motion term.
    pub forgetting: T,
    pub velocity_std: T,
    pub color_std: T,
    /// Total probability mass an entry puts on reappearing this frame.
    pub reappear_prob: T,
    pub lambda1: T,
    pub lambda2: T,
    /// Candidate pairs whose raw score falls below this get zero weight.
    pub min_score: T,
    pub max_age: u32,
    /// Mahalanobis gate on the extrapolated entry.
    pub gate: T,
    /// Ranked assignments examined per filter run.
    pub k_best: usize,
}

impl<T: Scalar> Default for ReappearanceParams<T> {
    fn default() -> Self {
        Self {
            forgetting: T::lit(0.1),
            velocity_std: T::lit(2.0),
            color_std: T::lit(0.3),
            reappear_prob: T::lit(0.5),
            lambda1: T::lit(0.2),
            lambda2: T::one(),
            min_score: T::lit(0.5),
            max_age: 60,
            gate: T::lit(5.0),
            k_best: 100,
        }
    }
}

/// Unnormalized affinity of `entry` for a measurement at frame `k`:
/// a forgetting-weighted motion-consistency term plus a colour term.
pub fn raw_score<T: Scalar>(
    entry: &DisappearedEntry<T>,
    meas: &Measurement<T>,
    k: u32,
    params: &ReappearanceParams<T>,
) -> T {
    let gap = T::lit(k.saturating_sub(entry.k0).max(1) as f64);
    let (mx, my) = meas.bbox.center();
    let mean_velocity = [(mx - entry.state[PX]) / gap, (my - entry.state[PY]) / gap];
    let d_da = direction_aware_distance(entry.velocity, mean_velocity, params.lambda1, params.lambda2);
    let two = T::lit(2.0);
    let motion =
        (-params.forgetting * gap).exp() * (-(d_da * d_da) / (two * params.velocity_std * params.velocity_std)).exp();
    let d_b = match &meas.appearance {
        Some(a) if !a.histogram.is_sentinel() && !entry.histogram.is_sentinel() => {
            bhattacharyya(&entry.histogram, &a.histogram)
        }
        _ => T::zero(),
    };
    motion + (-(d_b * d_b) / (two * params.color_std * params.color_std)).exp()
}

/// Weight matrix with one row per entry and `1 + candidates.len()` columns.
/// Column 0 is "does not reappear"; column `m + 1` is candidate `m`. Each
/// row sums to one: the reappearance mass is spread over the candidates in
/// proportion to their raw scores, and an entry with no admissible
/// candidate keeps all its mass in column 0.
pub fn reappearance_weights<T: Scalar>(
    table: &LookupTable<T>,
    candidates: &[&Measurement<T>],
    k: u32,
    params: &ReappearanceParams<T>,
) -> Vec<Vec<T>> {
    table
        .entries
        .iter()
        .map(|e| {
            let raw: Vec<T> = candidates
                .iter()
                .map(|m| {
                    let s = raw_score(e, m, k, params);
                    if s >= params.min_score {
                        s
                    } else {
                        T::zero()
                    }
                })
                .collect();
            let total = raw.iter().fold(T::zero(), |a, &b| a + b);
            let mut row = Vec::with_capacity(raw.len() + 1);
            if total > T::zero() {
                row.push(T::one() - params.reappear_prob);
                row.extend(raw.iter().map(|&s| params.reappear_prob * s / total));
            } else {
                row.push(T::one());
                row.extend(raw.iter().map(|_| T::zero()));
            }
            row
        })
        .collect()
}

/// A parked track that was matched again.
#[derive(Debug, Clone)]
pub struct Recovered<T: Scalar> {
    pub track: Arc<LabeledGaussianTrack<T>>,
    /// Index into the frame's full measurement list.
    pub measurement: usize,
    /// Frames spent parked.
    pub gap: u32,
}

/// Runs one reappearance filter over the table.
///
/// `unassigned` indexes into `meas`. Recovered entries leave the table and
/// their measurements leave the returned unassigned list.
pub fn one_step_reappearance_filter<T: Scalar>(
    table: &mut LookupTable<T>,
    meas: &[Measurement<T>],
    unassigned: &[usize],
    k: u32,
    filter: &FilterParams<T>,
    params: &ReappearanceParams<T>,
) -> Result<(Vec<Recovered<T>>, Vec<usize>)> {
    if table.is_empty() || unassigned.is_empty() {
        return Ok((Vec::new(), unassigned.to_vec()));
    }
    let candidates: Vec<&Measurement<T>> = unassigned.iter().map(|&j| &meas[j]).collect();
    let weights = reappearance_weights(table, &candidates, k, params);
    let n = table.len();
    let m = candidates.len();
    let base = filter.detection_prob.ln() - filter.clutter_intensity.ln();

    // candidate tracks, one per admissible (entry, measurement) pair
    let mut cost = CostMatrix::filled(n, m + n, T::infinity());
    let mut tracks: HashMap<(usize, usize), Arc<LabeledGaussianTrack<T>>> = HashMap::new();
    for (i, entry) in table.entries.iter().enumerate() {
        let w0 = weights[i][0];
        if w0 > T::zero() {
            cost.set(i, m + i, -w0.ln());
        }
        let steps = k.saturating_sub(entry.k0).max(1);
        let mut prior = entry.mixture.clone();
        for _ in 0..steps {
            prior = prior
                .iter()
                .map(|c| kalman_predict(c, &filter.motion))
                .collect::<Result<_>>()?;
        }
        for (c, cand) in candidates.iter().enumerate() {
            let w = weights[i][c + 1];
            if w <= T::zero() {
                continue;
            }
            let mut logs = Vec::with_capacity(prior.len());
            let mut posts = Vec::with_capacity(prior.len());
            let mut admitted = false;
            for comp in &prior {
                let out = kalman_update_detailed(comp, &cand.z, &filter.measurement)?;
                admitted |= out.mahalanobis_sq <= params.gate * params.gate;
                logs.push(comp.weight.ln() + out.log_likelihood);
                posts.push(out.posterior);
            }
            if !admitted {
                continue;
            }
            let max = logs.iter().fold(-T::infinity(), |a, &b| a.max(b));
            let total = max + logs.iter().fold(T::zero(), |a, &l| a + (l - max).exp()).ln();
            for (p, l) in posts.iter_mut().zip(&logs) {
                p.weight = (*l - total).exp();
            }
            cost.set(i, c, -(w.ln() + base + total));
            let mixture = mixture_prune_merge(&posts, filter.prune_thresh, filter.merge_dist, filter.max_components);
            let mut t = LabeledGaussianTrack::new(entry.label, mixture, k);
            t.history.push(unassigned[c] as u32 + 1);
            t.appearance = cand.appearance.clone();
            tracks.insert((i, c), Arc::new(t));
        }
    }

    let ranked = match murty_k_best(&cost, params.k_best.max(1)) {
        Ok(r) => r,
        Err(Error::Infeasible) => return Ok((Vec::new(), unassigned.to_vec())),
        Err(e) => return Err(e),
    };
    let min_cost = ranked[0].cost;
    let hypotheses = ranked
        .iter()
        .map(|a| {
            let chosen = a
                .cols
                .iter()
                .enumerate()
                .filter(|(_, &c)| c < m)
                .map(|(i, &c)| Arc::clone(&tracks[&(i, c)]))
                .collect();
            GlmbHypothesis::new((min_cost - a.cost).exp(), chosen)
        })
        .collect();
    let mut density = GlmbDensity { hypotheses, frame: k };
    density.normalize();
    let best = select_hypothesis(&density, map_cardinality(&density))?;

    let mut recovered = Vec::new();
    let mut used = Vec::new();
    for t in &best.tracks {
        let j = t.history[0] as usize - 1;
        let entry = table.remove(t.label).expect("recovered label comes from the table");
        used.push(j);
        recovered.push(Recovered {
            track: Arc::clone(t),
            measurement: j,
            gap: k - entry.k0,
        });
    }
    let still = unassigned.iter().copied().filter(|j| !used.contains(j)).collect();
    Ok((recovered, still))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appearance::HIST_BINS;
    use crate::birth::iou;
    use crate::gaussian::{StateCovariance, StateVector};
    use proptest::prelude::*;

    fn hist(bin: usize) -> ColorHistogram<f64> {
        let mut b = vec![0.0; HIST_BINS];
        b[bin] = 1.0;
        ColorHistogram::from_bins(&b)
    }

    fn state(cx: f64, cy: f64, vx: f64, vy: f64) -> StateVector<f64> {
        StateVector::from_column_slice(&[cx, cy, vx, vy, 50.0, 100.0])
    }

    fn entry(label: u32, s: StateVector<f64>, k0: u32, bin: usize) -> DisappearedEntry<f64> {
        let cov = StateCovariance::from_diagonal(&StateVector::from_column_slice(&[25., 25., 4., 4., 4., 4.]));
        let t = LabeledGaussianTrack::new(TrackLabel::new(1, label), vec![GaussianComponent::new(1.0, s, cov)], k0);
        DisappearedEntry::from_track(&t, k0, hist(bin))
    }

    fn meas(cx: f64, cy: f64, bin: usize) -> Measurement<f64> {
        let b = BBox::from_center(cx, cy, 50.0, 100.0);
        Measurement::from_box(b).with_appearance(Arc::new(AppearanceDescriptor::new(hist(bin), &b)))
    }

    #[test]
    fn ioa_examples() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(ioa(&BBox::new(2.0, 2.0, 3.0, 3.0), &a).unwrap(), 1.0);
        assert_eq!(ioa(&a, &BBox::new(50.0, 50.0, 3.0, 3.0)).unwrap(), 0.0);
        assert_eq!(ioa(&a, &BBox::new(5.0, 0.0, 10.0, 10.0)).unwrap(), 0.5);
        assert!(matches!(ioa(&BBox::new(0.0, 0.0, 0.0, 5.0), &a), Err(Error::ZeroArea)));
    }

    proptest! {
        #[test]
        fn ioa_relates_to_iou(
            l1 in 0.0f64..100.0, t1 in 0.0f64..100.0, w1 in 1.0f64..60.0, h1 in 1.0f64..60.0,
            l2 in 0.0f64..100.0, t2 in 0.0f64..100.0, w2 in 1.0f64..60.0, h2 in 1.0f64..60.0,
        ) {
            let a = BBox::new(l1, t1, w1, h1);
            let b = BBox::new(l2, t2, w2, h2);
            let v = ioa(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            let inter = a.intersection_area(&b);
            let union = a.area() + b.area() - inter;
            prop_assert!((v - iou(&a, &b) * union / a.area()).abs() < 1e-9);
        }
    }

    #[test]
    fn left_edge_outward_is_leaving() {
        let p = CategorizeParams::default();
        let s = state(2.0, 500.0, -5.0, 0.0);
        let predicted = state_box(&s);
        assert_eq!(classify(&s, &predicted, &[], &p), Disappearance::LeftScene);
        // heading inward is not leaving
        let s = state(2.0, 500.0, 5.0, 0.0);
        assert_eq!(classify(&s, &state_box(&s), &[], &p), Disappearance::MissDetected);
    }

    #[test]
    fn covered_prediction_is_occluded() {
        let p = CategorizeParams::default();
        let s = state(500.0, 500.0, 0.0, 0.0);
        let predicted = BBox::new(0.0, 0.0, 10.0, 10.0);
        // covers 8 of the 10 columns: ioa 0.8
        let occluder = BBox::new(2.0, 0.0, 20.0, 10.0);
        assert_eq!(ioa(&predicted, &occluder).unwrap(), 0.8);
        assert_eq!(classify(&s, &predicted, &[occluder], &p), Disappearance::Occluded);
    }

    #[test]
    fn isolated_is_missed() {
        let p = CategorizeParams::default();
        let s = state(900.0, 500.0, 1.0, 0.0);
        let far = BBox::new(100.0, 100.0, 50.0, 100.0);
        assert_eq!(classify(&s, &state_box(&s), &[far], &p), Disappearance::MissDetected);
    }

    #[test]
    fn table_eviction_and_replacement() {
        let mut t = LookupTable::new(Disappearance::Occluded, 60);
        t.insert(entry(0, state(0., 0., 0., 0.), 10, 0));
        t.insert(entry(0, state(0., 0., 0., 0.), 12, 0));
        assert_eq!(t.len(), 1);
        assert_eq!(t.entries()[0].k0, 12);
        t.insert(entry(1, state(0., 0., 0., 0.), 20, 0));
        assert_eq!(t.evict(72), 0);
        assert_eq!(t.evict(73), 1);
        assert_eq!(t.entries()[0].label, TrackLabel::new(1, 1));
    }

    #[test]
    fn on_path_identical_colour_scores_highest() {
        let params = ReappearanceParams::default();
        let e = entry(0, state(100.0, 100.0, 5.0, 0.0), 9, 3);
        let on_path = meas(105.0, 100.0, 3);
        let s = raw_score(&e, &on_path, 10, &params);
        assert!((s - ((-0.1f64).exp() + 1.0)).abs() < 1e-12);
        let wrong = meas(95.0, 100.0, 9);
        assert!(raw_score(&e, &wrong, 10, &params) < s);
    }

    #[test]
    fn rows_sum_to_one() {
        let params = ReappearanceParams::default();
        let mut t = LookupTable::new(Disappearance::Occluded, 60);
        t.insert(entry(0, state(100.0, 100.0, 5.0, 0.0), 5, 3));
        t.insert(entry(1, state(800.0, 100.0, 0.0, 5.0), 5, 9));
        let ms = [meas(130.0, 100.0, 3), meas(800.0, 130.0, 9), meas(400.0, 400.0, 40)];
        let refs: Vec<&Measurement<f64>> = ms.iter().collect();
        for row in reappearance_weights(&t, &refs, 10, &params) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // clutter-like candidate falls below the score floor
        let w = reappearance_weights(&t, &refs, 10, &params);
        assert_eq!(w[0][3], 0.0);
        assert!(w[0][1] > 0.0);
    }

    #[test]
    fn recovers_on_compatible_measurement() {
        let filter = FilterParams::default();
        let params = ReappearanceParams::default();
        let mut t = LookupTable::new(Disappearance::Occluded, 60);
        t.insert(entry(0, state(100.0, 100.0, 5.0, 0.0), 5, 3));
        let ms = vec![meas(900.0, 900.0, 50), meas(125.0, 100.0, 3)];
        let (rec, still) = one_step_reappearance_filter(&mut t, &ms, &[0, 1], 10, &filter, &params).unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(rec[0].measurement, 1);
        assert_eq!(rec[0].track.label, TrackLabel::new(1, 0));
        assert_eq!(rec[0].gap, 5);
        assert_eq!(still, vec![0]);
        assert!(t.is_empty());
    }

    #[test]
    fn no_measurements_no_recovery() {
        let mut t = LookupTable::new(Disappearance::Occluded, 60);
        t.insert(entry(0, state(100.0, 100.0, 5.0, 0.0), 5, 3));
        let (rec, still) = one_step_reappearance_filter(
            &mut t,
            &[],
            &[],
            6,
            &FilterParams::default(),
            &ReappearanceParams::default(),
        )
        .unwrap();
        assert!(rec.is_empty() && still.is_empty());
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn two_entries_one_measurement_at_most_one_recovery() {
        let filter = FilterParams::default();
        let params = ReappearanceParams::default();
        let mut t = LookupTable::new(Disappearance::MissDetected, 60);
        t.insert(entry(0, state(100.0, 100.0, 5.0, 0.0), 9, 3));
        t.insert(entry(1, state(110.0, 100.0, 5.0, 0.0), 9, 3));
        let ms = vec![meas(108.0, 100.0, 3)];
        let (rec, still) = one_step_reappearance_filter(&mut t, &ms, &[0], 10, &filter, &params).unwrap();
        assert_eq!(rec.len(), 1);
        assert!(still.is_empty());
        assert_eq!(t.len(), 1);

        // brute force over the three injective maps: none, 0->m, 1->m
        let candidates = [&ms[0]];
        let mut fresh = LookupTable::new(Disappearance::MissDetected, 60);
        fresh.insert(entry(0, state(100.0, 100.0, 5.0, 0.0), 9, 3));
        fresh.insert(entry(1, state(110.0, 100.0, 5.0, 0.0), 9, 3));
        let w = reappearance_weights(&fresh, &candidates, 10, &params);
        let psi = |e: &DisappearedEntry<f64>| {
            let prior = kalman_predict(&e.mixture[0], &filter.motion).unwrap();
            let (_, lik) = crate::gaussian::kalman_update(&prior, &ms[0].z, &filter.measurement).unwrap();
            filter.detection_prob * lik / filter.clutter_intensity
        };
        let none = w[0][0] * w[1][0];
        let first = w[0][1] * psi(&fresh.entries()[0]) * w[1][0];
        let second = w[0][0] * w[1][1] * psi(&fresh.entries()[1]);
        let expect = if first >= second { 0 } else { 1 };
        assert!(first.max(second) > none);
        assert_eq!(rec[0].track.label, TrackLabel::new(1, expect));
    }
}
