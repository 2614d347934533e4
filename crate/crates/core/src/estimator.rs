//! State extraction and appearance-based label verification.

use std::collections::HashMap;

use crate::appearance::{same_color, same_size, AppearanceDescriptor};
use crate::error::{Error, Result};
use crate::gaussian::{state_box, StateVector};
use crate::geometry::BBox;
use crate::glmb::{cardinality_distribution, GlmbDensity, GlmbHypothesis, TrackLabel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedObject<T: Scalar> {
    pub label: TrackLabel,
    pub state: StateVector<T>,
}

impl<T: Scalar> EstimatedObject<T> {
    pub fn bbox(&self) -> BBox<T> {
        state_box(&self.state)
    }
}

/// Objects reported for one frame, sorted by label.
#[derive(Debug, Clone)]
pub struct EstimateSet<T: Scalar> {
    pub frame: u32,
    pub objects: Vec<EstimatedObject<T>>,
    pub hypothesis: GlmbHypothesis<T>,
}

impl<T: Scalar> EstimateSet<T> {
    pub fn empty(frame: u32) -> Self {
        Self {
            frame,
            objects: Vec::new(),
            hypothesis: GlmbHypothesis::empty(T::one()),
        }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, label: TrackLabel) -> Option<&EstimatedObject<T>> {
        self.objects
            .binary_search_by_key(&label, |o| o.label)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn contains(&self, label: TrackLabel) -> bool {
        self.get(label).is_some()
    }

    pub fn labels(&self) -> impl Iterator<Item = TrackLabel> + '_ {
        self.objects.iter().map(|o| o.label)
    }

    pub fn remove(&mut self, label: TrackLabel) {
        self.objects.retain(|o| o.label != label);
    }

    pub fn insert(&mut self, object: EstimatedObject<T>) {
        match self.objects.binary_search_by_key(&object.label, |o| o.label) {
            Ok(i) => self.objects[i] = object,
            Err(i) => self.objects.insert(i, object),
        }
    }
}

/// Most probable number of objects; ties go to the smaller count.
pub fn map_cardinality<T: Scalar>(d: &GlmbDensity<T>) -> usize {
    let rho = cardinality_distribution(d);
    let mut best = 0;
    for (n, &p) in rho.iter().enumerate() {
        if p > rho[best] {
            best = n;
        }
    }
    best
}

/// Heaviest hypothesis with exactly `n` labels; equal weights are broken
/// by the lexicographically smaller label list.
pub fn select_hypothesis<T: Scalar>(d: &GlmbDensity<T>, n: usize) -> Result<&GlmbHypothesis<T>> {
    select_index(d, n).map(|i| &d.hypotheses[i])
}

fn select_index<T: Scalar>(d: &GlmbDensity<T>, n: usize) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, h) in d.hypotheses.iter().enumerate() {
        if h.cardinality() != n {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let cur = &d.hypotheses[b];
                if h.weight > cur.weight || (h.weight == cur.weight && h.labels().lt(cur.labels())) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or(Error::NoHypothesisOfCardinality(n))
}

/// Per-label mixture means of `h`.
pub fn extract_states<T: Scalar>(h: &GlmbHypothesis<T>, frame: u32) -> EstimateSet<T> {
    EstimateSet {
        frame,
        objects: h
            .tracks
            .iter()
            .map(|t| EstimatedObject {
                label: t.label,
                state: t.mean(),
            })
            .collect(),
        hypothesis: h.clone(),
    }
}

/// Index of the hypothesis that [`estimate`] reports. Falls back through
/// cardinalities in decreasing probability if the MAP one has no member.
fn estimate_index<T: Scalar>(d: &GlmbDensity<T>) -> Option<usize> {
    let n_map = map_cardinality(d);
    if let Ok(i) = select_index(d, n_map) {
        return Some(i);
    }
    let rho = cardinality_distribution(d);
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].partial_cmp(&rho[a]).unwrap_or(std::cmp::Ordering::Equal));
    order.into_iter().find_map(|n| select_index(d, n).ok())
}

/// MAP-cardinality estimate of `d`; empty when `d` has no hypotheses.
pub fn estimate<T: Scalar>(d: &GlmbDensity<T>) -> EstimateSet<T> {
    match estimate_index(d) {
        Some(i) => extract_states(&d.hypotheses[i], d.frame),
        None => EstimateSet::empty(d.frame),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdSwitchParams<T> {
    pub size_thresh: T,
    pub color_thresh: T,
    /// The search stops once the best remaining hypothesis is lighter than this.
    pub weight_floor: T,
}

impl<T: Scalar> Default for IdSwitchParams<T> {
    fn default() -> Self {
        Self {
            size_thresh: T::lit(0.4),
            color_thresh: T::lit(0.5),
            weight_floor: T::lit(1e-3),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdSwitchOutcome<T: Scalar> {
    pub density: GlmbDensity<T>,
    pub estimate: EstimateSet<T>,
    /// Labels dropped from the estimate because no acceptable hypothesis
    /// verified them.
    pub unverified: Vec<TrackLabel>,
    /// Hypotheses discarded while searching.
    pub removed: usize,
}

/// Labels of `h` whose appearance at this frame contradicts `references`.
///
/// Only tracks that took a measurement in `frame` are checked; a missed
/// track has nothing new to compare.
pub fn failing_labels<T: Scalar>(
    h: &GlmbHypothesis<T>,
    frame: u32,
    references: &HashMap<TrackLabel, AppearanceDescriptor<T>>,
    params: &IdSwitchParams<T>,
) -> Vec<TrackLabel> {
    h.tracks
        .iter()
        .filter(|t| t.last_measurement(frame).is_some())
        .filter_map(|t| {
            let reference = references.get(&t.label)?;
            let now = t.appearance.as_deref()?;
            let size = same_size(
                &BBox::new(T::zero(), T::zero(), now.width, now.height),
                &BBox::new(T::zero(), T::zero(), reference.width, reference.height),
            );
            let color = same_color(now, reference);
            (size < params.size_thresh || color < params.color_thresh).then_some(t.label)
        })
        .collect()
}

/// Re-estimates until every referenced label's appearance is consistent.
///
/// Each failing pass removes the chosen hypothesis from the pool, renormalizes
/// and picks again. If the next choice weighed less than the floor in `d`,
/// or nothing is left, the first estimate is kept minus
/// its failing labels and the pool is returned untouched.
pub fn id_switch_recovery<T: Scalar>(
    d: &GlmbDensity<T>,
    references: &HashMap<TrackLabel, AppearanceDescriptor<T>>,
    params: &IdSwitchParams<T>,
) -> IdSwitchOutcome<T> {
    let first = estimate(d);
    let first_failing = failing_labels(&first.hypothesis, d.frame, references, params);
    if first_failing.is_empty() {
        return IdSwitchOutcome {
            density: d.clone(),
            estimate: first,
            unverified: Vec::new(),
            removed: 0,
        };
    }
    let mut pool = d.clone();
    // weights as they stood before the search; the floor is checked against these
    let mut prior: Vec<T> = d.hypotheses.iter().map(|h| h.weight).collect();
    let mut chosen = estimate_index(&pool);
    let mut removed = 0;
    while let Some(i) = chosen {
        pool.hypotheses.remove(i);
        prior.remove(i);
        pool.normalize();
        removed += 1;
        chosen = estimate_index(&pool);
        let Some(next) = chosen else { break };
        let h = &pool.hypotheses[next];
        if prior[next] < params.weight_floor {
            break;
        }
        if failing_labels(h, pool.frame, references, params).is_empty() {
            let estimate = extract_states(h, pool.frame);
            log::debug!("event=id_switch_resolved frame={} removed={removed}", pool.frame);
            return IdSwitchOutcome {
                density: pool,
                estimate,
                unverified: Vec::new(),
                removed,
            };
        }
    }
    let mut estimate = first;
    for &l in &first_failing {
        estimate.remove(l);
    }
    log::debug!(
        "event=id_switch_unresolved frame={} unverified={}",
        d.frame,
        first_failing.len()
    );
    IdSwitchOutcome {
        density: d.clone(),
        estimate,
        unverified: first_failing,
        removed,
    }
}
