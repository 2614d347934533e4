//! CLEAR-MOT evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::assignment::{best_assignment, CostMatrix};
use crate::birth::iou;
use crate::mot_io::TrackRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatches {
    pub frame: u32,
    /// `(gt id, hypothesis id, iou)`.
    pub matches: Vec<(u64, u64, f64)>,
    pub false_positives: usize,
    pub misses: usize,
    pub id_switches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Percent.
    pub mota: f64,
    /// Mean IOU of matches, percent.
    pub motp: f64,
    /// Percent of ground-truth trajectories covered at least 80% of their span.
    pub mostly_tracked: f64,
    /// Percent covered at most 20%.
    pub mostly_lost: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    /// Percent; 0 when nothing was reported.
    pub precision: f64,
    /// Percent; 0 without ground truth.
    pub recall: f64,
    pub true_positives: usize,
    pub total_gt: usize,
    pub gt_tracks: usize,
    pub frames: Vec<FrameMatches>,
}

const CSV_HEADER: &str = "MOTA,MOTP,MT,ML,FP,FN,IDsw,Precision,Recall,TP,GT,GTTracks";

impl EvalReport {
    pub fn is_perfect(&self) -> bool {
        self.false_positives == 0 && self.false_negatives == 0 && self.id_switches == 0
    }

    pub fn csv_header() -> &'static str {
        CSV_HEADER
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.3},{:.3},{:.3},{:.3},{},{},{},{:.3},{:.3},{},{},{}",
            self.mota,
            self.motp,
            self.mostly_tracked,
            self.mostly_lost,
            self.false_positives,
            self.false_negatives,
            self.id_switches,
            self.precision,
            self.recall,
            self.true_positives,
            self.total_gt,
            self.gt_tracks,
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("MOTA", format!("{:.1}", self.mota)),
            ("MOTP", format!("{:.1}", self.motp)),
            ("MT", format!("{:.1}%", self.mostly_tracked)),
            ("ML", format!("{:.1}%", self.mostly_lost)),
            ("FP", self.false_positives.to_string()),
            ("FN", self.false_negatives.to_string()),
            ("IDsw", self.id_switches.to_string()),
            ("Precision", format!("{:.1}", self.precision)),
            ("Recall", format!("{:.1}", self.recall)),
        ];
        let mut out = String::new();
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<10}{value:>12}");
        }
        out
    }
}

fn group(records: &[TrackRecord]) -> BTreeMap<u32, Vec<&TrackRecord>> {
    let mut out: BTreeMap<u32, Vec<&TrackRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.frame).or_default().push(r);
    }
    out
}

/// CLEAR-MOT scores of `hyp` against `gt`.
///
/// Correspondences from the previous frame are kept while their overlap
/// stays at or above `iou_thresh`; the remaining pairs are matched by
/// minimum total `1 - IOU` among pairs at or above the threshold, with the
/// number of matches maximized first.
pub fn evaluate(gt: &[TrackRecord], hyp: &[TrackRecord], iou_thresh: f64) -> EvalReport {
    let gt_frames = group(gt);
    let hyp_frames = group(hyp);
    let mut all_frames: Vec<u32> = gt_frames.keys().chain(hyp_frames.keys()).copied().collect();
    all_frames.sort_unstable();
    all_frames.dedup();

    let mut prev: HashMap<u64, u64> = HashMap::new();
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    let mut gt_len: HashMap<u64, usize> = HashMap::new();
    let mut gt_hits: HashMap<u64, usize> = HashMap::new();
    let (mut fp, mut fnc, mut idsw, mut tp) = (0usize, 0usize, 0usize, 0usize);
    let mut iou_sum = 0.0;
    let mut frames = Vec::with_capacity(all_frames.len());

    for f in all_frames {
        let g: &[&TrackRecord] = gt_frames.get(&f).map_or(&[], |v| v.as_slice());
        let h: &[&TrackRecord] = hyp_frames.get(&f).map_or(&[], |v| v.as_slice());
        for r in g {
            *gt_len.entry(r.track_id).or_default() += 1;
        }
        let mut gt_used = vec![false; g.len()];
        let mut hyp_used = vec![false; h.len()];
        let mut matches = Vec::new();

        for (i, gr) in g.iter().enumerate() {
            let Some(&hid) = prev.get(&gr.track_id) else { continue };
            if let Some(j) = h.iter().position(|hr| hr.track_id == hid) {
                let v = iou(&gr.bbox, &h[j].bbox);
                if v >= iou_thresh && !hyp_used[j] {
                    gt_used[i] = true;
                    hyp_used[j] = true;
                    matches.push((i, j, v));
                }
            }
        }

        let free_g: Vec<usize> = (0..g.len()).filter(|&i| !gt_used[i]).collect();
        let free_h: Vec<usize> = (0..h.len()).filter(|&j| !hyp_used[j]).collect();
        if !free_g.is_empty() && !free_h.is_empty() {
            let n = free_g.len();
            let dummy = (n + 1) as f64;
            let mut cost = CostMatrix::filled(n, free_h.len() + n, f64::INFINITY);
            for (r, &i) in free_g.iter().enumerate() {
                for (c, &j) in free_h.iter().enumerate() {
                    let v = iou(&g[i].bbox, &h[j].bbox);
                    if v >= iou_thresh {
                        cost.set(r, c, 1.0 - v);
                    }
                }
                cost.set(r, free_h.len() + r, dummy);
            }
            let a = best_assignment(&cost).expect("dummy columns keep the matching feasible");
            for (r, &c) in a.cols.iter().enumerate() {
                if c < free_h.len() {
                    let (i, j) = (free_g[r], free_h[c]);
                    matches.push((i, j, iou(&g[i].bbox, &h[j].bbox)));
                }
            }
        }

        let mut frame_sw = 0;
        let mut now = HashMap::new();
        let mut logged = Vec::with_capacity(matches.len());
        for &(i, j, v) in &matches {
            let (gid, hid) = (g[i].track_id, h[j].track_id);
            if let Some(&old) = last_match.get(&gid) {
                if old != hid {
                    frame_sw += 1;
                }
            }
            last_match.insert(gid, hid);
            now.insert(gid, hid);
            *gt_hits.entry(gid).or_default() += 1;
            iou_sum += v;
            logged.push((gid, hid, v));
        }
        logged.sort_by_key(|m| m.0);
        prev = now;
        let frame_fp = h.len() - matches.len();
        let frame_fn = g.len() - matches.len();
        fp += frame_fp;
        fnc += frame_fn;
        idsw += frame_sw;
        tp += matches.len();
        frames.push(FrameMatches {
            frame: f,
            matches: logged,
            false_positives: frame_fp,
            misses: frame_fn,
            id_switches: frame_sw,
        });
    }

    let total_gt = gt.len();
    let gt_tracks = gt_len.len();
    let pct = |num: f64, den: f64| if den > 0.0 { 100.0 * num / den } else { 0.0 };
    let (mut mt, mut ml) = (0usize, 0usize);
    for (id, &len) in &gt_len {
        let ratio = *gt_hits.get(id).unwrap_or(&0) as f64 / len as f64;
        if ratio >= 0.8 {
            mt += 1;
        }
        if ratio <= 0.2 {
            ml += 1;
        }
    }
    let errors = (fnc + fp + idsw) as f64;
    let mota = if total_gt > 0 {
        100.0 * (1.0 - errors / total_gt as f64)
    } else if errors == 0.0 {
        100.0
    } else {
        0.0
    };
    EvalReport {
        mota,
        motp: pct(iou_sum, tp as f64),
        mostly_tracked: pct(mt as f64, gt_tracks as f64),
        mostly_lost: pct(ml as f64, gt_tracks as f64),
        false_positives: fp,
        false_negatives: fnc,
        id_switches: idsw,
        precision: pct(tp as f64, (tp + fp) as f64),
        recall: pct(tp as f64, total_gt as f64),
        true_positives: tp,
        total_gt,
        gt_tracks,
        frames,
    }
}
