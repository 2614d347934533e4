//! The per-frame tracking loop.
//!
//! Order within a frame: adaptive birth from the previous frame's leftover
//! detections, prediction, update, label verification, disappearance
//! bookkeeping, the occluded-track filter, the missed-track filter, and
//! finally the estimate. Whatever detections remain unclaimed seed the next
//! frame's births.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::appearance::{AppearanceDescriptor, FeatureProvider};
use crate::birth::{build_birth_density, propose_birth_points, BirthParams};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimator::{estimate, id_switch_recovery, EstimateSet, EstimatedObject, IdSwitchParams};
use crate::glmb::{predict, refine_out_label, update, FilterParams, Gate, GlmbDensity, Measurement, TrackLabel};
use crate::mot_io::{DetectionFrame, DetectionSequence, TrackRecord};
use crate::reappearance::{
    categorize_disappeared, one_step_reappearance_filter, park, CategorizeParams, Disappearance, LookupTable,
    ReappearanceParams,
};
use crate::scalar::Scalar;

/// What happened in one frame; printed as a `key=value` log line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameReport {
    pub frame: u32,
    pub detections: usize,
    pub births: usize,
    pub hypotheses: usize,
    pub unassigned: usize,
    pub id_switch_removed: usize,
    pub unverified: usize,
    pub left_scene: usize,
    pub occluded: usize,
    pub missed: usize,
    pub recovered_occluded: usize,
    pub recovered_missed: usize,
    pub lut_occluded: usize,
    pub lut_missed: usize,
    pub estimated: usize,
}

impl fmt::Display for FrameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "frame={} detections={} births={} hypotheses={} unassigned={} id_switch_removed={} unverified={} \
             left_scene={} occluded={} missed={} recovered_occluded={} recovered_missed={} lut_occluded={} \
             lut_missed={} estimated={}",
            self.frame,
            self.detections,
            self.births,
            self.hypotheses,
            self.unassigned,
            self.id_switch_removed,
            self.unverified,
            self.left_scene,
            self.occluded,
            self.missed,
            self.recovered_occluded,
            self.recovered_missed,
            self.lut_occluded,
            self.lut_missed,
            self.estimated,
        )
    }
}

/// Parameters in the tracker's scalar type.
#[derive(Debug, Clone)]
pub struct TrackerParams<T: Scalar> {
    pub filter: FilterParams<T>,
    pub gate: Gate<T>,
    pub birth: BirthParams<T>,
    pub birth_iou: T,
    pub id_switch: Option<IdSwitchParams<T>>,
    pub check_newborn: bool,
    pub categorize: CategorizeParams<T>,
    pub reappearance: Option<ReappearanceParams<T>>,
}

impl<T: Scalar> TrackerParams<T> {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            filter: cfg.filter_params(),
            gate: cfg.gate(),
            birth: cfg.birth_params(),
            birth_iou: T::lit(cfg.birth.iou_thresh),
            id_switch: cfg.id_switch.enabled.then(|| cfg.id_switch_params()),
            check_newborn: cfg.id_switch.check_newborn,
            categorize: cfg.categorize_params(),
            reappearance: cfg.reappearance.enabled.then(|| cfg.reappearance_params()),
        }
    }
}

pub struct Tracker<T: Scalar> {
    params: TrackerParams<T>,
    density: GlmbDensity<T>,
    est_prev: EstimateSet<T>,
    /// Leftover detections of the previous frame, by index.
    leftovers: Vec<(usize, Measurement<T>)>,
    /// Last confirmed appearance per label.
    references: HashMap<TrackLabel, AppearanceDescriptor<T>>,
    /// Birth-origin appearance of labels not yet reported.
    pending: HashMap<TrackLabel, AppearanceDescriptor<T>>,
    occluded: LookupTable<T>,
    missed: LookupTable<T>,
    ids: HashMap<TrackLabel, u64>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(params: TrackerParams<T>) -> Self {
        let max_age = params.reappearance.map_or(0, |r| r.max_age);
        Self {
            params,
            density: GlmbDensity::empty(0),
            est_prev: EstimateSet::empty(0),
            leftovers: Vec::new(),
            references: HashMap::new(),
            pending: HashMap::new(),
            occluded: LookupTable::new(Disappearance::Occluded, max_age),
            missed: LookupTable::new(Disappearance::MissDetected, max_age),
            ids: HashMap::new(),
        }
    }

    pub fn density(&self) -> &GlmbDensity<T> {
        &self.density
    }

    pub fn occluded_table(&self) -> &LookupTable<T> {
        &self.occluded
    }

    pub fn missed_table(&self) -> &LookupTable<T> {
        &self.missed
    }

    /// Output id for `label`, assigned in order of first report.
    pub fn output_id(&mut self, label: TrackLabel) -> u64 {
        let next = self.ids.len() as u64 + 1;
        *self.ids.entry(label).or_insert(next)
    }

    /// Processes the next frame. Frames must be consecutive.
    pub fn step(&mut self, meas: &[Measurement<T>]) -> Result<(EstimateSet<T>, FrameReport)> {
        let frame = self.density.frame + 1;
        self.step_inner(frame, meas).map_err(|e| Error::at_frame(frame, e))
    }

    fn step_inner(&mut self, frame: u32, meas: &[Measurement<T>]) -> Result<(EstimateSet<T>, FrameReport)> {
        let p = &self.params;
        let mut report = FrameReport {
            frame,
            detections: meas.len(),
            ..FrameReport::default()
        };

        // adaptive birth from the previous frame's leftovers
        let prev_boxes: Vec<_> = self.leftovers.iter().map(|(j, m)| (*j, m.bbox)).collect();
        let boxes: Vec<_> = meas.iter().map(|m| m.bbox).collect();
        let points = propose_birth_points(&prev_boxes, frame - 1, &boxes, p.birth_iou);
        let birth = build_birth_density(&points, &boxes, &p.birth);
        report.births = birth.tracks.len();
        for pt in &points {
            if let Some((_, m)) = self.leftovers.iter().find(|(j, _)| *j == pt.origin_index) {
                if let Some(a) = &m.appearance {
                    self.pending.insert(pt.label, (**a).clone());
                }
            }
        }

        let predicted = predict(&self.density, &birth, &p.filter)?;
        let (mut density, _) = update(&predicted, meas, &p.gate, &p.filter)?;
        report.hypotheses = density.len();

        // label verification
        let mut est_now;
        let mut unverified = Vec::new();
        match &p.id_switch {
            Some(params) => {
                let mut refs: HashMap<TrackLabel, AppearanceDescriptor<T>> = self
                    .est_prev
                    .labels()
                    .filter_map(|l| self.references.get(&l).map(|r| (l, r.clone())))
                    .collect();
                if p.check_newborn {
                    refs.extend(self.pending.iter().map(|(l, r)| (*l, r.clone())));
                }
                let out = id_switch_recovery(&density, &refs, params);
                report.id_switch_removed = out.removed;
                density = out.density;
                est_now = out.estimate;
                unverified = out.unverified;
            }
            None => est_now = estimate(&density),
        }
        report.unverified = unverified.len();
        // a label is first reported on a frame where it is detected and verified
        if p.id_switch.is_some() && p.check_newborn {
            let unseen: Vec<_> = est_now
                .labels()
                .filter(|l| self.pending.contains_key(l))
                .filter(|&l| {
                    est_now
                        .hypothesis
                        .track(l)
                        .and_then(|t| t.last_measurement(frame))
                        .is_none()
                })
                .collect();
            for l in unseen {
                est_now.remove(l);
            }
        }
        for &label in &unverified {
            if let (Some(obj), Some(_)) = (self.est_prev.get(label), p.reappearance) {
                self.missed.insert(park(obj, &self.est_prev, &self.references));
            }
            density = refine_out_label(&density, label);
        }

        // disappearance bookkeeping
        let mut prev = self.est_prev.clone();
        for &label in &unverified {
            prev.remove(label);
        }
        let (mut occ_scratch, mut miss_scratch);
        let (occ, miss) = if p.reappearance.is_some() {
            (&mut self.occluded, &mut self.missed)
        } else {
            occ_scratch = LookupTable::new(Disappearance::Occluded, 0);
            miss_scratch = LookupTable::new(Disappearance::MissDetected, 0);
            (&mut occ_scratch, &mut miss_scratch)
        };
        let (refined, categories) = categorize_disappeared(
            &density,
            &prev,
            &est_now,
            &self.references,
            &p.filter,
            &p.categorize,
            occ,
            miss,
        );
        density = refined;
        for (_, kind) in &categories {
            match kind {
                Disappearance::LeftScene => report.left_scene += 1,
                Disappearance::Occluded => report.occluded += 1,
                Disappearance::MissDetected => report.missed += 1,
            }
        }

        let mut unassigned = claimed_complement(&est_now, meas.len(), frame);
        if let Some(rp) = &p.reappearance {
            self.occluded.evict(frame);
            self.missed.evict(frame);
            for table in [&mut self.occluded, &mut self.missed] {
                let (recovered, still) = one_step_reappearance_filter(table, meas, &unassigned, frame, &p.filter, rp)?;
                unassigned = still;
                match table.kind {
                    Disappearance::Occluded => report.recovered_occluded += recovered.len(),
                    _ => report.recovered_missed += recovered.len(),
                }
                for r in recovered {
                    log::debug!(
                        "event=recovered frame={frame} label={} gap={} table={}",
                        r.track.label,
                        r.gap,
                        table.kind
                    );
                    density.append_track(Arc::clone(&r.track));
                    est_now.hypothesis.tracks.retain(|t| t.label != r.track.label);
                    let pos = est_now.hypothesis.tracks.partition_point(|t| t.label < r.track.label);
                    est_now.hypothesis.tracks.insert(pos, Arc::clone(&r.track));
                    est_now.insert(EstimatedObject {
                        label: r.track.label,
                        state: r.track.mean(),
                    });
                }
            }
        }
        report.unassigned = unassigned.len();
        report.lut_occluded = self.occluded.len();
        report.lut_missed = self.missed.len();
        report.estimated = est_now.len();

        // confirmed appearance of everything measured this frame
        for obj in &est_now.objects {
            if let Some(t) = est_now.hypothesis.track(obj.label) {
                if t.last_measurement(frame).is_some() {
                    if let Some(a) = &t.appearance {
                        self.references.insert(obj.label, (**a).clone());
                    }
                }
            }
        }
        let keep: HashSet<TrackLabel> = est_now
            .labels()
            .chain(self.occluded.entries().iter().map(|e| e.label))
            .chain(self.missed.entries().iter().map(|e| e.label))
            .collect();
        self.references.retain(|l, _| keep.contains(l));
        let alive: HashSet<TrackLabel> = density
            .hypotheses
            .iter()
            .flat_map(|h| h.tracks.iter().map(|t| t.label))
            .collect();
        self.pending.retain(|l, _| alive.contains(l) && !est_now.contains(*l));

        self.leftovers = unassigned.iter().map(|&j| (j, meas[j].clone())).collect();
        self.density = density;
        self.est_prev = est_now.clone();
        Ok((est_now, report))
    }
}

/// Measurements not claimed by any reported object.
fn claimed_complement<T: Scalar>(est: &EstimateSet<T>, count: usize, frame: u32) -> Vec<usize> {
    let mut taken = vec![false; count];
    for obj in &est.objects {
        if let Some(j) = est.hypothesis.track(obj.label).and_then(|t| t.last_measurement(frame)) {
            if j < count {
                taken[j] = true;
            }
        }
    }
    (0..count).filter(|&j| !taken[j]).collect()
}

/// Filter measurements for one frame, with appearance from `features`.
pub fn frame_measurements<T: Scalar>(
    frame: Option<&DetectionFrame>,
    frame_number: u32,
    features: &dyn FeatureProvider,
) -> Vec<Measurement<T>> {
    let Some(frame) = frame else { return Vec::new() };
    frame
        .detections
        .iter()
        .map(|d| {
            let bbox = d.bbox.cast::<T>();
            let hist = features.histogram(frame_number, d.index, &d.bbox).cast::<T>();
            Measurement::from_box(bbox).with_appearance(Arc::new(AppearanceDescriptor::new(hist, &bbox)))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<TrackRecord>,
    pub reports: Vec<FrameReport>,
}

/// Tracks a whole detection sequence over frames `1..=frames` (defaults to
/// the last frame with detections).
pub fn run_sequence<T: Scalar>(
    cfg: &RunConfig,
    seq: &DetectionSequence,
    features: &dyn FeatureProvider,
    frames: Option<u32>,
) -> Result<RunOutput> {
    let mut tracker = Tracker::<T>::new(TrackerParams::from_config(cfg));
    let last = frames.unwrap_or_else(|| seq.last_frame());
    let mut out = RunOutput::default();
    for frame in 1..=last {
        let meas = frame_measurements::<T>(seq.frame(frame), frame, features);
        let (est, report) = tracker.step(&meas)?;
        log::info!("{report}");
        for obj in &est.objects {
            let id = tracker.output_id(obj.label);
            out.records.push(TrackRecord {
                frame,
                track_id: id,
                bbox: obj.bbox().cast::<f64>(),
                confidence: 1.0,
            });
        }
        out.reports.push(report);
    }
    out.records.sort_by_key(|r| (r.frame, r.track_id));
    Ok(out)
}
