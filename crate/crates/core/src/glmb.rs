//! Gaussian-mixture δ-GLMB density and its prediction/update recursion.
//!
//! A density is a weighted list of hypotheses; each hypothesis is a label set
//! together with one Gaussian-mixture track per label. Tracks are shared
//! between hypotheses through `Arc`, so a track that is predicted or updated
//! identically in many hypotheses is computed once per step.

use std::collections::HashMap;
use std::sync::Arc;

use crate::appearance::AppearanceDescriptor;
use crate::assignment::{k_shortest_paths, murty_k_best, CostMatrix, LayeredDag};
use crate::birth::BirthDensity;
use crate::error::{Error, Result};
use crate::estimator::{map_cardinality, select_hypothesis};
use crate::gaussian::{
    box_measurement, kalman_predict, kalman_update_detailed, mixture_prune_merge, GaussianComponent, MeasVector,
    MeasurementModel, MotionModel,
};
use crate::geometry::BBox;
use crate::scalar::Scalar;

/// `(birth_time, birth_index)`; ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackLabel {
    pub birth_time: u32,
    pub birth_index: u32,
}

impl TrackLabel {
    pub fn new(birth_time: u32, birth_index: u32) -> Self {
        Self {
            birth_time,
            birth_index,
        }
    }
}

impl std::fmt::Display for TrackLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.birth_time, self.birth_index)
    }
}

/// Marker stored in association histories for a missed detection.
pub const MISSED: u32 = 0;

#[derive(Debug, Clone)]
pub struct LabeledGaussianTrack<T: Scalar> {
    pub label: TrackLabel,
    pub mixture: Vec<GaussianComponent<T>>,
    /// Appearance at the last associated measurement.
    pub appearance: Option<Arc<AppearanceDescriptor<T>>>,
    /// Frame of the last associated measurement.
    pub last_update: u32,
    /// One entry per update since birth: [`MISSED`] or the 1-based
    /// measurement index.
    pub history: Vec<u32>,
    /// Set only on fresh births: the measurements the track may take in its
    /// first update.
    pub valid_meas: Option<Vec<usize>>,
}

impl<T: Scalar> LabeledGaussianTrack<T> {
    pub fn new(label: TrackLabel, mixture: Vec<GaussianComponent<T>>, last_update: u32) -> Self {
        Self {
            label,
            mixture,
            appearance: None,
            last_update,
            history: Vec::new(),
            valid_meas: None,
        }
    }

    /// Mixture mean.
    pub fn mean(&self) -> crate::gaussian::StateVector<T> {
        crate::gaussian::mixture_mean(&self.mixture)
    }

    /// Measurement index (0-based) taken in the most recent update, if any.
    pub fn last_measurement(&self, frame: u32) -> Option<usize> {
        match self.history.last() {
            Some(&j) if j != MISSED && self.last_update == frame => Some(j as usize - 1),
            _ => None,
        }
    }
}

/// One `(I, ξ)` component: a label set with per-label densities and a weight.
#[derive(Debug, Clone)]
pub struct GlmbHypothesis<T: Scalar> {
    pub weight: T,
    /// Sorted by label; labels are distinct.
    pub tracks: Vec<Arc<LabeledGaussianTrack<T>>>,
}

impl<T: Scalar> GlmbHypothesis<T> {
    pub fn new(weight: T, mut tracks: Vec<Arc<LabeledGaussianTrack<T>>>) -> Self {
        tracks.sort_by_key(|t| t.label);
        Self { weight, tracks }
    }

    pub fn empty(weight: T) -> Self {
        Self {
            weight,
            tracks: Vec::new(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.tracks.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = TrackLabel> + '_ {
        self.tracks.iter().map(|t| t.label)
    }

    pub fn contains(&self, label: TrackLabel) -> bool {
        self.track(label).is_some()
    }

    pub fn track(&self, label: TrackLabel) -> Option<&Arc<LabeledGaussianTrack<T>>> {
        self.tracks
            .binary_search_by_key(&label, |t| t.label)
            .ok()
            .map(|i| &self.tracks[i])
    }

    /// Per-label association histories (the `ξ` of this component).
    pub fn assoc_history(&self) -> impl Iterator<Item = (TrackLabel, &[u32])> + '_ {
        self.tracks.iter().map(|t| (t.label, t.history.as_slice()))
    }

    fn identity_key(&self) -> Vec<(TrackLabel, usize)> {
        self.tracks.iter().map(|t| (t.label, Arc::as_ptr(t) as usize)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GlmbDensity<T: Scalar> {
    pub hypotheses: Vec<GlmbHypothesis<T>>,
    pub frame: u32,
}

impl<T: Scalar> GlmbDensity<T> {
    /// The "no objects" density: one empty hypothesis of weight 1.
    pub fn empty(frame: u32) -> Self {
        Self {
            hypotheses: vec![GlmbHypothesis::empty(T::one())],
            frame,
        }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.hypotheses.iter().fold(T::zero(), |acc, h| acc + h.weight)
    }

    pub fn normalize(&mut self) {
        let total = self.total_weight();
        if total > T::zero() {
            for h in &mut self.hypotheses {
                h.weight /= total;
            }
        }
    }

    /// Adds `track` to every hypothesis, leaving weights unchanged.
    pub fn append_track(&mut self, track: Arc<LabeledGaussianTrack<T>>) {
        for h in &mut self.hypotheses {
            if !h.contains(track.label) {
                let pos = h.tracks.partition_point(|t| t.label < track.label);
                h.tracks.insert(pos, Arc::clone(&track));
            }
        }
    }
}

/// Mahalanobis gate in innovation space; `None` disables gating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate<T> {
    pub max_distance: Option<T>,
}

impl<T: Scalar> Gate<T> {
    pub fn mahalanobis(max_distance: T) -> Self {
        Self {
            max_distance: Some(max_distance),
        }
    }

    pub fn none() -> Self {
        Self { max_distance: None }
    }

    fn admits(&self, mahalanobis_sq: T) -> bool {
        match self.max_distance {
            Some(d) => mahalanobis_sq <= d * d,
            None => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterParams<T: Scalar> {
    pub detection_prob: T,
    pub survival_prob: T,
    /// Clutter intensity per unit measurement volume (pixels^4).
    pub clutter_intensity: T,
    pub max_hypotheses: usize,
    pub min_hyp_weight: T,
    /// Prediction budget; a parent of weight ω gets `ceil(ω·k_predict)` children.
    pub k_predict: usize,
    /// Update budget; a parent of weight ω gets `ceil(ω·k_update)` children.
    pub k_update: usize,
    pub motion: MotionModel<T>,
    pub measurement: MeasurementModel<T>,
    pub prune_thresh: T,
    pub merge_dist: T,
    pub max_components: usize,
}

impl<T: Scalar> Default for FilterParams<T> {
    fn default() -> Self {
        Self {
            detection_prob: T::lit(0.9),
            survival_prob: T::lit(0.99),
            clutter_intensity: T::lit(10.0 / (1920.0 * 1080.0 * 200.0 * 400.0)),
            max_hypotheses: 1000,
            min_hyp_weight: T::lit(1e-5),
            k_predict: 1000,
            k_update: 1000,
            motion: MotionModel::constant_velocity(T::one(), T::lit(5.0), T::lit(2.0), T::lit(3.0)),
            measurement: MeasurementModel::isotropic(T::lit(10.0)),
            prune_thresh: T::lit(1e-5),
            merge_dist: T::lit(4.0),
            max_components: 20,
        }
    }
}

/// One detection as seen by the filter.
#[derive(Debug, Clone)]
pub struct Measurement<T: Scalar> {
    pub bbox: BBox<T>,
    pub z: MeasVector<T>,
    pub appearance: Option<Arc<AppearanceDescriptor<T>>>,
}

impl<T: Scalar> Measurement<T> {
    pub fn from_box(bbox: BBox<T>) -> Self {
        Self {
            bbox,
            z: box_measurement(&bbox),
            appearance: None,
        }
    }

    pub fn with_appearance(mut self, appearance: Arc<AppearanceDescriptor<T>>) -> Self {
        self.appearance = Some(appearance);
        self
    }
}

fn budget<T: Scalar>(weight: T, total: usize) -> usize {
    let k = (weight * T::lit(total as f64)).ceil().to_f64_lossy();
    if k.is_finite() && k >= 1.0 {
        (k as usize).min(total.max(1))
    } else {
        1
    }
}

fn neg_ln<T: Scalar>(p: T) -> T {
    if p > T::zero() {
        -p.ln()
    } else {
        T::infinity()
    }
}

/// Collapses hypotheses with identical track sets, normalizes the
/// log-weights and sorts by decreasing weight (stable).
fn finalize<T: Scalar>(children: Vec<(T, Vec<Arc<LabeledGaussianTrack<T>>>)>) -> Vec<GlmbHypothesis<T>> {
    let mut index: HashMap<Vec<(TrackLabel, usize)>, usize> = HashMap::new();
    let mut merged: Vec<(Vec<T>, GlmbHypothesis<T>)> = Vec::new();
    for (log_w, tracks) in children {
        let h = GlmbHypothesis::new(T::zero(), tracks);
        let key = h.identity_key();
        match index.get(&key) {
            Some(&i) => merged[i].0.push(log_w),
            None => {
                index.insert(key, merged.len());
                merged.push((vec![log_w], h));
            }
        }
    }
    let max_log = merged
        .iter()
        .flat_map(|(l, _)| l.iter().copied())
        .fold(-T::infinity(), |a, b| a.max(b));
    let mut out: Vec<GlmbHypothesis<T>> = merged
        .into_iter()
        .map(|(logs, mut h)| {
            h.weight = logs.into_iter().fold(T::zero(), |acc, l| acc + (l - max_log).exp());
            h
        })
        .collect();
    let total = out.iter().fold(T::zero(), |acc, h| acc + h.weight);
    for h in &mut out {
        h.weight /= total;
    }
    out.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn predict_track<T: Scalar>(
    track: &LabeledGaussianTrack<T>,
    motion: &MotionModel<T>,
) -> Result<LabeledGaussianTrack<T>> {
    let mixture = track
        .mixture
        .iter()
        .map(|c| kalman_predict(c, motion))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledGaussianTrack {
        mixture,
        valid_meas: None,
        ..track.clone()
    })
}

/// δ-GLMB prediction with an LMB birth density.
///
/// For each parent hypothesis the surviving subset of its labels and the
/// subset of born labels are ranked jointly with k-shortest paths over a
/// chain whose steps are survive/die (weights `-ln P_S`, `-ln(1-P_S)`) and
/// born/not-born (`-ln r_B`, `-ln(1-r_B)`).
pub fn predict<T: Scalar>(
    d: &GlmbDensity<T>,
    birth: &BirthDensity<T>,
    params: &FilterParams<T>,
) -> Result<GlmbDensity<T>> {
    let frame = d.frame + 1;
    let mut cache: HashMap<usize, Arc<LabeledGaussianTrack<T>>> = HashMap::new();

    let born: Vec<Arc<LabeledGaussianTrack<T>>> = birth
        .tracks
        .iter()
        .map(|b| {
            let mut t = predict_track(&b.track, &params.motion)?;
            t.valid_meas = b.track.valid_meas.clone();
            Ok(Arc::new(t))
        })
        .collect::<Result<_>>()?;
    let birth_choices: Vec<(T, T)> = birth
        .tracks
        .iter()
        .map(|b| (neg_ln(b.existence), neg_ln(T::one() - b.existence)))
        .collect();
    let survive = (neg_ln(params.survival_prob), neg_ln(T::one() - params.survival_prob));

    let mut children = Vec::new();
    for parent in &d.hypotheses {
        if parent.weight <= T::zero() {
            continue;
        }
        let mut predicted = Vec::with_capacity(parent.tracks.len());
        for t in &parent.tracks {
            let key = Arc::as_ptr(t) as usize;
            let p = match cache.get(&key) {
                Some(p) => Arc::clone(p),
                None => {
                    let p = Arc::new(predict_track(t, &params.motion)?);
                    cache.insert(key, Arc::clone(&p));
                    p
                }
            };
            predicted.push(p);
        }
        let mut choices = vec![survive; predicted.len()];
        choices.extend_from_slice(&birth_choices);
        let dag = LayeredDag::binary_choices(&choices);
        let log_w = parent.weight.ln();
        for path in k_shortest_paths(&dag, budget(parent.weight, params.k_predict)) {
            let tracks: Vec<_> = path
                .arcs
                .iter()
                .enumerate()
                .filter(|(_, &arc)| arc % 2 == 0)
                .map(|(step, _)| {
                    if step < predicted.len() {
                        Arc::clone(&predicted[step])
                    } else {
                        Arc::clone(&born[step - predicted.len()])
                    }
                })
                .collect();
            children.push((log_w - path.cost, tracks));
        }
    }
    Ok(GlmbDensity {
        hypotheses: finalize(children),
        frame,
    })
}

struct TrackUpdate<T: Scalar> {
    /// `ln ψ` per measurement, `-inf` when gated out.
    log_psi: Vec<T>,
    outcomes: Vec<Option<Vec<GaussianComponent<T>>>>,
    updated: Vec<Option<Arc<LabeledGaussianTrack<T>>>>,
    missed: Option<Arc<LabeledGaussianTrack<T>>>,
}

fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values.iter().fold(-T::infinity(), |a, &b| a.max(b));
    if !max.is_finite_value() {
        return max;
    }
    max + values.iter().fold(T::zero(), |acc, &v| acc + (v - max).exp()).ln()
}

fn score_track<T: Scalar>(
    track: &LabeledGaussianTrack<T>,
    meas: &[Measurement<T>],
    gate: &Gate<T>,
    params: &FilterParams<T>,
) -> Result<TrackUpdate<T>> {
    let base = params.detection_prob.ln() - params.clutter_intensity.ln();
    let mut log_psi = vec![-T::infinity(); meas.len()];
    let mut outcomes = vec![None; meas.len()];
    for (j, m) in meas.iter().enumerate() {
        if let Some(valid) = &track.valid_meas {
            if !valid.contains(&j) {
                continue;
            }
        }
        let mut admitted = false;
        let mut logs = Vec::with_capacity(track.mixture.len());
        let mut posts = Vec::with_capacity(track.mixture.len());
        for c in &track.mixture {
            let out = kalman_update_detailed(c, &m.z, &params.measurement)?;
            admitted |= gate.admits(out.mahalanobis_sq);
            logs.push(c.weight.ln() + out.log_likelihood);
            posts.push(out.posterior);
        }
        if !admitted {
            continue;
        }
        let total = log_sum_exp(&logs);
        for (p, l) in posts.iter_mut().zip(&logs) {
            p.weight = (*l - total).exp();
        }
        log_psi[j] = base + total;
        outcomes[j] = Some(posts);
    }
    Ok(TrackUpdate {
        log_psi,
        outcomes,
        updated: vec![None; meas.len()],
        missed: None,
    })
}

/// δ-GLMB measurement update with ranked-assignment truncation.
///
/// Returns the posterior and the measurements left unassigned by the
/// maximum a posteriori hypothesis.
pub fn update<T: Scalar>(
    d: &GlmbDensity<T>,
    meas: &[Measurement<T>],
    gate: &Gate<T>,
    params: &FilterParams<T>,
) -> Result<(GlmbDensity<T>, Vec<usize>)> {
    let frame = d.frame;
    let miss_cost = neg_ln(T::one() - params.detection_prob);
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut scored: Vec<(Arc<LabeledGaussianTrack<T>>, TrackUpdate<T>)> = Vec::new();
    for h in &d.hypotheses {
        for t in &h.tracks {
            let key = Arc::as_ptr(t) as usize;
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
                e.insert(scored.len());
                scored.push((Arc::clone(t), score_track(t, meas, gate, params)?));
            }
        }
    }

    let mut children = Vec::new();
    for parent in &d.hypotheses {
        if parent.weight <= T::zero() {
            continue;
        }
        let log_w = parent.weight.ln();
        let rows: Vec<usize> = parent
            .tracks
            .iter()
            .map(|t| index[&(Arc::as_ptr(t) as usize)])
            .collect();
        let n = rows.len();
        if n == 0 {
            children.push((log_w, Vec::new()));
            continue;
        }
        // measurement columns reachable by at least one row, then one private miss column per row
        let used: Vec<usize> = (0..meas.len())
            .filter(|&j| rows.iter().any(|&r| scored[r].1.log_psi[j].is_finite_value()))
            .collect();
        let cols = used.len() + n;
        let mut cost = CostMatrix::filled(n, cols, T::infinity());
        for (i, &r) in rows.iter().enumerate() {
            for (c, &j) in used.iter().enumerate() {
                let lp = scored[r].1.log_psi[j];
                if lp.is_finite_value() {
                    cost.set(i, c, -lp);
                }
            }
            cost.set(i, used.len() + i, miss_cost);
        }
        let ranked = murty_k_best(&cost, budget(parent.weight, params.k_update))?;
        for a in ranked {
            let tracks = a
                .cols
                .iter()
                .zip(&rows)
                .map(|(&c, &r)| {
                    if c < used.len() {
                        updated_track(&mut scored[r], used[c], meas, frame, params)
                    } else {
                        missed_track(&mut scored[r])
                    }
                })
                .collect();
            children.push((log_w - a.cost, tracks));
        }
    }
    let mut hypotheses = finalize(children);
    hypotheses.truncate(params.max_hypotheses.max(1));
    hypotheses.retain(|h| h.weight >= params.min_hyp_weight);
    if hypotheses.is_empty() {
        return Err(Error::FilterDivergence);
    }
    let mut out = GlmbDensity { hypotheses, frame };
    out.normalize();
    let unassigned = match select_hypothesis(&out, map_cardinality(&out)) {
        Ok(best) => unassigned_measurements(best, meas.len(), frame),
        Err(_) => (0..meas.len()).collect(),
    };
    Ok((out, unassigned))
}

fn updated_track<T: Scalar>(
    entry: &mut (Arc<LabeledGaussianTrack<T>>, TrackUpdate<T>),
    j: usize,
    meas: &[Measurement<T>],
    frame: u32,
    params: &FilterParams<T>,
) -> Arc<LabeledGaussianTrack<T>> {
    let (track, upd) = entry;
    if let Some(t) = &upd.updated[j] {
        return Arc::clone(t);
    }
    let posts = upd.outcomes[j].as_ref().expect("finite cost implies an update outcome");
    let mixture = mixture_prune_merge(posts, params.prune_thresh, params.merge_dist, params.max_components);
    let mut history = track.history.clone();
    history.push(j as u32 + 1);
    let t = Arc::new(LabeledGaussianTrack {
        label: track.label,
        mixture,
        appearance: meas[j].appearance.clone().or_else(|| track.appearance.clone()),
        last_update: frame,
        history,
        valid_meas: None,
    });
    upd.updated[j] = Some(Arc::clone(&t));
    t
}

fn missed_track<T: Scalar>(entry: &mut (Arc<LabeledGaussianTrack<T>>, TrackUpdate<T>)) -> Arc<LabeledGaussianTrack<T>> {
    let (track, upd) = entry;
    if let Some(t) = &upd.missed {
        return Arc::clone(t);
    }
    let mut history = track.history.clone();
    history.push(MISSED);
    let t = Arc::new(LabeledGaussianTrack {
        history,
        valid_meas: None,
        ..(**track).clone()
    });
    upd.missed = Some(Arc::clone(&t));
    t
}

/// Measurements (0-based) not taken by any track of `h` in frame `frame`.
pub fn unassigned_measurements<T: Scalar>(h: &GlmbHypothesis<T>, count: usize, frame: u32) -> Vec<usize> {
    let mut taken = vec![false; count];
    for t in &h.tracks {
        if let Some(j) = t.last_measurement(frame) {
            if j < count {
                taken[j] = true;
            }
        }
    }
    (0..count).filter(|&j| !taken[j]).collect()
}

/// `ρ(n)`: total weight of hypotheses with exactly `n` labels.
pub fn cardinality_distribution<T: Scalar>(d: &GlmbDensity<T>) -> Vec<T> {
    let max_n = d.hypotheses.iter().map(|h| h.cardinality()).max().unwrap_or(0);
    let mut rho = vec![T::zero(); max_n + 1];
    for h in &d.hypotheses {
        rho[h.cardinality()] += h.weight;
    }
    rho
}

/// Drops every hypothesis containing `label` and renormalizes.
pub fn remove_hypotheses_with_label<T: Scalar>(d: &GlmbDensity<T>, label: TrackLabel) -> Result<GlmbDensity<T>> {
    let kept: Vec<_> = d.hypotheses.iter().filter(|h| !h.contains(label)).cloned().collect();
    if kept.is_empty() {
        return Err(Error::PoolExhausted);
    }
    let mut out = GlmbDensity {
        hypotheses: kept,
        frame: d.frame,
    };
    out.normalize();
    Ok(out)
}

/// Like [`remove_hypotheses_with_label`], but when every hypothesis holds
/// `label` the heaviest one is kept with the label dropped from it.
pub fn refine_out_label<T: Scalar>(d: &GlmbDensity<T>, label: TrackLabel) -> GlmbDensity<T> {
    match remove_hypotheses_with_label(d, label) {
        Ok(out) => out,
        Err(_) => {
            log::warn!("event=pool_exhausted label={label} action=force_drop");
            let mut best = d.hypotheses[0].clone();
            for h in &d.hypotheses {
                if h.weight > best.weight {
                    best = h.clone();
                }
            }
            best.tracks.retain(|t| t.label != label);
            best.weight = T::one();
            GlmbDensity {
                hypotheses: vec![best],
                frame: d.frame,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birth::{BirthDensity, BirthTrack};
    use crate::gaussian::{StateCovariance, StateVector};

    fn track(label: TrackLabel, mean: [f64; 6]) -> Arc<LabeledGaussianTrack<f64>> {
        Arc::new(LabeledGaussianTrack::new(
            label,
            vec![GaussianComponent::new(
                1.0,
                StateVector::from_column_slice(&mean),
                StateCovariance::identity() * 25.0,
            )],
            0,
        ))
    }

    fn density(hyps: Vec<GlmbHypothesis<f64>>) -> GlmbDensity<f64> {
        GlmbDensity {
            hypotheses: hyps,
            frame: 0,
        }
    }

    fn l(t: u32, b: u32) -> TrackLabel {
        TrackLabel::new(t, b)
    }

    #[test]
    fn predict_empty_with_one_birth() {
        let birth = BirthDensity {
            tracks: vec![BirthTrack::new(
                (*track(l(0, 0), [10., 10., 0., 0., 5., 5.])).clone(),
                0.3,
            )],
        };
        let p = predict(&GlmbDensity::empty(0), &birth, &FilterParams::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p.hypotheses[0].weight - 0.7).abs() < 1e-12);
        assert_eq!(p.hypotheses[0].cardinality(), 0);
        assert!((p.hypotheses[1].weight - 0.3).abs() < 1e-12);
        assert_eq!(p.hypotheses[1].labels().collect::<Vec<_>>(), vec![l(0, 0)]);
    }

    #[test]
    fn predict_certain_survival() {
        let d = density(vec![GlmbHypothesis::new(
            1.0,
            vec![track(l(0, 0), [0., 0., 1., 2., 5., 5.])],
        )]);
        let params = FilterParams {
            survival_prob: 1.0,
            ..FilterParams::default()
        };
        let p = predict(&d, &BirthDensity::default(), &params).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.hypotheses[0].weight, 1.0);
        let mean = p.hypotheses[0].tracks[0].mean();
        assert_eq!((mean[0], mean[1]), (1.0, 2.0));
    }

    #[test]
    fn predict_binomial_survival() {
        let d = density(vec![GlmbHypothesis::new(1.0, vec![track(l(0, 0), [0.; 6])])]);
        let params = FilterParams {
            survival_prob: 0.8,
            ..FilterParams::default()
        };
        let p = predict(&d, &BirthDensity::default(), &params).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p.hypotheses[0].weight - 0.8).abs() < 1e-12);
        assert_eq!(p.hypotheses[0].cardinality(), 1);
        assert!((p.hypotheses[1].weight - 0.2).abs() < 1e-12);
    }

    #[test]
    fn update_single_track_on_prediction() {
        let t = track(l(0, 0), [100., 100., 0., 0., 50., 100.]);
        let d = density(vec![GlmbHypothesis::new(1.0, vec![t.clone()])]);
        let params = FilterParams {
            clutter_intensity: 1e-12,
            min_hyp_weight: 0.0,
            ..FilterParams::default()
        };
        let z = Measurement::from_box(BBox::from_center(100., 100., 50., 100.));
        let (post, unassigned) = update(&d, std::slice::from_ref(&z), &Gate::none(), &params).unwrap();
        assert_eq!(post.len(), 2);
        assert!(unassigned.is_empty());
        let (_, lik) = crate::gaussian::kalman_update(&t.mixture[0], &z.z, &params.measurement).unwrap();
        let detect = 0.9 * lik / 1e-12;
        let miss = 0.1;
        assert!((post.hypotheses[0].weight - detect / (detect + miss)).abs() < 1e-12);
        assert_eq!(post.hypotheses[0].tracks[0].history, vec![1]);
        assert!((post.hypotheses[1].weight - miss / (detect + miss)).abs() < 1e-12);
        assert_eq!(post.hypotheses[1].tracks[0].history, vec![MISSED]);
    }

    #[test]
    fn update_without_measurements_keeps_equal_cardinality_order() {
        let a = track(l(0, 0), [0.; 6]);
        let b = track(l(0, 1), [50.; 6]);
        let d = density(vec![
            GlmbHypothesis::new(0.5, vec![a.clone()]),
            GlmbHypothesis::new(0.3, vec![b.clone()]),
            GlmbHypothesis::new(0.2, vec![a, b]),
        ]);
        let (post, unassigned) = update(&d, &[], &Gate::none(), &FilterParams::default()).unwrap();
        assert!(unassigned.is_empty());
        // weights scale by 0.1^|I|
        let raw = [0.5 * 0.1, 0.3 * 0.1, 0.2 * 0.01];
        let total: f64 = raw.iter().sum();
        for (h, r) in post.hypotheses.iter().zip(raw) {
            assert!((h.weight - r / total).abs() < 1e-12);
        }
        assert_eq!(post.hypotheses[0].labels().next(), Some(l(0, 0)));
        assert_eq!(post.hypotheses[1].labels().next(), Some(l(0, 1)));
    }

    #[test]
    fn cardinality_examples() {
        let a = track(l(0, 0), [0.; 6]);
        let b = track(l(0, 1), [0.; 6]);
        let d = density(vec![
            GlmbHypothesis::new(0.6, vec![a.clone(), b.clone()]),
            GlmbHypothesis::new(0.4, vec![a.clone()]),
        ]);
        assert_eq!(cardinality_distribution(&d), vec![0.0, 0.4, 0.6]);
        assert_eq!(cardinality_distribution(&GlmbDensity::<f64>::empty(0)), vec![1.0]);
        let d = density(vec![
            GlmbHypothesis::new(0.5, vec![a.clone()]),
            GlmbHypothesis::new(0.3, vec![a.clone(), b.clone()]),
            GlmbHypothesis::new(0.2, vec![a, b]),
        ]);
        let rho = cardinality_distribution(&d);
        assert!((rho[1] - 0.5).abs() < 1e-15 && (rho[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn remove_label_examples() {
        let a = track(l(0, 0), [0.; 6]);
        let b = track(l(0, 1), [0.; 6]);
        let d = density(vec![
            GlmbHypothesis::new(0.7, vec![a.clone()]),
            GlmbHypothesis::empty(0.3),
        ]);
        let r = remove_hypotheses_with_label(&d, l(0, 0)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.hypotheses[0].weight, 1.0);

        let r = remove_hypotheses_with_label(&d, l(9, 9)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.hypotheses[0].weight, 0.7);

        let d = density(vec![
            GlmbHypothesis::new(0.5, vec![a.clone(), b.clone()]),
            GlmbHypothesis::new(0.3, vec![b.clone()]),
            GlmbHypothesis::empty(0.2),
        ]);
        let r = remove_hypotheses_with_label(&d, l(0, 0)).unwrap();
        assert!((r.hypotheses[0].weight - 0.6).abs() < 1e-15);
        assert!((r.hypotheses[1].weight - 0.4).abs() < 1e-15);

        let only = density(vec![GlmbHypothesis::new(1.0, vec![a])]);
        assert!(matches!(
            remove_hypotheses_with_label(&only, l(0, 0)),
            Err(Error::PoolExhausted)
        ));
        let forced = refine_out_label(&only, l(0, 0));
        assert_eq!(forced.len(), 1);
        assert_eq!(forced.hypotheses[0].cardinality(), 0);
    }

    #[test]
    fn birth_valid_measurements_gate_association() {
        let mut b = (*track(l(0, 0), [100., 100., 0., 0., 50., 100.])).clone();
        b.valid_meas = Some(vec![1]);
        let birth = BirthDensity {
            tracks: vec![BirthTrack::new(b, 0.3)],
        };
        let params = FilterParams::default();
        let p = predict(&GlmbDensity::empty(0), &birth, &params).unwrap();
        let z = vec![
            Measurement::from_box(BBox::from_center(100., 100., 50., 100.)),
            Measurement::from_box(BBox::from_center(101., 100., 50., 100.)),
        ];
        let (post, _) = update(&p, &z, &Gate::none(), &params).unwrap();
        for h in &post.hypotheses {
            for t in &h.tracks {
                assert_ne!(t.history.last(), Some(&1), "birth took a non-valid measurement");
            }
        }
    }
}
