//! Seeded scenario generator: ground truth, noisy detections with clutter
//! and dropouts, and per-detection colour histograms.
//!
//! The seed only drives detection noise, dropouts and clutter. Ground truth
//! is a pure function of the waypoints.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::appearance::{ColorHistogram, HIST_BINS};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::mot_io::{format_detections, format_results, Detection, DetectionFrame, FeatureTable, TrackRecord};

/// Box centre of a target at a given frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub frame: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// Ascending by frame. The target exists from the first waypoint to the
    /// last and moves at constant velocity between consecutive ones.
    pub waypoints: Vec<Waypoint>,
    pub width: f64,
    pub height: f64,
}

/// Frames `start..start + duration` during which a target is never detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionScript {
    pub target: usize,
    pub start: u32,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub frames: u32,
    pub image_width: f64,
    pub image_height: f64,
    pub detection_prob: f64,
    /// Mean clutter detections per frame.
    pub clutter_rate: f64,
    /// Standard deviation of the noise added to each box coordinate.
    pub noise_std: f64,
    pub seed: u64,
    #[serde(default)]
    pub occlusions: Vec<OcclusionScript>,
    pub targets: Vec<TargetSpec>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("scenario {}: {m}", self.name)));
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return bad(format!("detection_prob {} outside [0, 1]", self.detection_prob));
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return bad(format!("clutter_rate {} must be nonnegative", self.clutter_rate));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std {} must be nonnegative", self.noise_std));
        }
        if self.image_width <= 0.0 || self.image_height <= 0.0 {
            return bad("image size must be positive".into());
        }
        if self.targets.len() > TARGET_PALETTE {
            return bad(format!("at most {TARGET_PALETTE} targets"));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.waypoints.is_empty() || t.width <= 0.0 || t.height <= 0.0 {
                return bad(format!("target {i} needs waypoints and a positive size"));
            }
            if t.waypoints.windows(2).any(|w| w[0].frame >= w[1].frame) {
                return bad(format!("target {i} waypoints must have increasing frames"));
            }
            if t.waypoints[0].frame < 1 {
                return bad(format!("target {i} starts before frame 1"));
            }
        }
        for o in &self.occlusions {
            if o.target >= self.targets.len() {
                return bad(format!("occlusion refers to missing target {}", o.target));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl TargetSpec {
    /// Box centre at `frame`, or `None` outside the target's lifetime.
    pub fn center_at(&self, frame: u32) -> Option<(f64, f64)> {
        let first = self.waypoints.first()?;
        let last = self.waypoints.last()?;
        if frame < first.frame || frame > last.frame {
            return None;
        }
        let seg = self
            .waypoints
            .windows(2)
            .find(|w| frame <= w[1].frame)
            .map(|w| (w[0], w[1]));
        Some(match seg {
            Some((a, b)) => {
                let t = (frame - a.frame) as f64 / (b.frame - a.frame) as f64;
                (a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
            }
            None => (first.x, first.y),
        })
    }
}

/// Targets get disjoint colour supports in the lower half of the bins;
/// clutter draws from the upper half.
const TARGET_PALETTE: usize = 32;
const CLUTTER_BINS: std::ops::Range<usize> = 256..HIST_BINS;

pub fn target_histogram(target: usize) -> ColorHistogram<f64> {
    let mut bins = vec![0.0; HIST_BINS];
    let base = (target % TARGET_PALETTE) * 8;
    for (k, w) in [0.5, 0.25, 0.15, 0.1].into_iter().enumerate() {
        bins[base + 2 * k] = w;
    }
    ColorHistogram::from_bins(&bins)
}

fn clutter_histogram(rng: &mut ChaCha8Rng) -> ColorHistogram<f64> {
    let mut bins = vec![0.0; HIST_BINS];
    for _ in 0..3 {
        bins[rng.random_range(CLUTTER_BINS)] += rng.random_range(0.1..1.0);
    }
    ColorHistogram::from_bins(&bins)
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn rounded_box(left: f64, top: f64, width: f64, height: f64) -> BBox<f64> {
    BBox::new(round2(left), round2(top), round2(width), round2(height))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    /// Track ids are 1-based target indices.
    pub ground_truth: Vec<TrackRecord>,
    /// Frames with at least one detection, detections in index order.
    pub detections: Vec<DetectionFrame>,
    pub features: FeatureTable,
}

impl Scenario {
    /// Detection count over all frames.
    pub fn detection_count(&self) -> usize {
        self.detections.iter().map(|f| f.detections.len()).sum()
    }

    /// Writes `det/det.txt`, `gt/gt.txt`, `features.txt` and `scenario.toml`
    /// under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let put = |rel: &str, text: String| {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        put("det/det.txt", format_detections(&self.detections))?;
        put("gt/gt.txt", format_results(&self.ground_truth))?;
        put(crate::mot_io::SYNTHETIC_FEATURES_FILE, self.features.to_text())?;
        put("scenario.toml", self.spec.to_toml())?;
        Ok(())
    }
}

struct Raw {
    bbox: BBox<f64>,
    histogram: ColorHistogram<f64>,
}

/// Generates the scenario. Values are rounded to hundredths so that the
/// written files parse back to exactly the same numbers.
pub fn generate(spec: &ScenarioSpec) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std.max(0.0)).expect("finite std");
    let clutter = (spec.clutter_rate > 0.0).then(|| Poisson::new(spec.clutter_rate).expect("positive rate"));
    let mut ground_truth = Vec::new();
    let mut detections = Vec::new();
    let mut features = FeatureTable::new();

    for frame in 1..=spec.frames {
        let mut raw: Vec<Raw> = Vec::new();
        for (i, target) in spec.targets.iter().enumerate() {
            let Some((cx, cy)) = target.center_at(frame) else {
                continue;
            };
            let truth = rounded_box(
                cx - target.width / 2.0,
                cy - target.height / 2.0,
                target.width,
                target.height,
            );
            ground_truth.push(TrackRecord {
                frame,
                track_id: i as u64 + 1,
                bbox: truth,
                confidence: 1.0,
            });
            // draw every random number even when the detection is dropped,
            // so the stream does not depend on the occlusion scripts
            let detected = rng.random::<f64>() < spec.detection_prob;
            let d: [f64; 4] = std::array::from_fn(|_| noise.sample(&mut rng));
            let occluded = spec
                .occlusions
                .iter()
                .any(|o| o.target == i && frame >= o.start && frame < o.start + o.duration);
            if detected && !occluded {
                raw.push(Raw {
                    bbox: rounded_box(
                        truth.left + d[0],
                        truth.top + d[1],
                        (truth.width + d[2]).max(1.0),
                        (truth.height + d[3]).max(1.0),
                    ),
                    histogram: target_histogram(i),
                });
            }
        }
        let n_clutter = clutter.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..n_clutter {
            let w = rng.random_range(20.0..200.0f64).min(spec.image_width);
            let h = rng.random_range(40.0..400.0f64).min(spec.image_height);
            let left = rng.random_range(0.0..=(spec.image_width - w));
            let top = rng.random_range(0.0..=(spec.image_height - h));
            raw.push(Raw {
                bbox: rounded_box(left, top, w, h),
                histogram: clutter_histogram(&mut rng),
            });
        }
        if raw.is_empty() {
            continue;
        }
        raw.sort_by(|a, b| {
            let ka = [a.bbox.left, a.bbox.top, a.bbox.width, a.bbox.height];
            let kb = [b.bbox.left, b.bbox.top, b.bbox.width, b.bbox.height];
            ka.iter()
                .zip(&kb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let dets = raw
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                features.insert(frame, index, r.histogram);
                Detection {
                    bbox: r.bbox,
                    confidence: 1.0,
                    index,
                }
            })
            .collect();
        detections.push(DetectionFrame {
            frame,
            detections: dets,
        });
    }
    ground_truth.sort_by_key(|r| (r.frame, r.track_id));
    Scenario {
        spec: spec.clone(),
        ground_truth,
        detections,
        features,
    }
}

fn wp(frame: u32, x: f64, y: f64) -> Waypoint {
    Waypoint { frame, x, y }
}

fn straight(from: (u32, f64, f64), to: (u32, f64, f64), width: f64, height: f64) -> TargetSpec {
    TargetSpec {
        waypoints: vec![wp(from.0, from.1, from.2), wp(to.0, to.1, to.2)],
        width,
        height,
    }
}

/// Five pedestrians over 100 frames whose paths cross pairwise.
pub fn crossing5(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "crossing5".into(),
        frames: 100,
        image_width: 1920.0,
        image_height: 1080.0,
        detection_prob: 0.95,
        clutter_rate: 10.0,
        noise_std: 2.0,
        seed,
        occlusions: Vec::new(),
        targets: vec![
            straight((1, 200.0, 300.0), (100, 1400.0, 700.0), 50.0, 120.0),
            straight((1, 1500.0, 250.0), (100, 300.0, 750.0), 60.0, 140.0),
            straight((1, 800.0, 150.0), (100, 900.0, 950.0), 45.0, 110.0),
            straight((1, 300.0, 800.0), (100, 1600.0, 400.0), 55.0, 130.0),
            straight((1, 1700.0, 600.0), (100, 500.0, 500.0), 50.0, 125.0),
        ],
    }
}

/// Two walkers; the first is hidden for frames 40..50 while the second
/// passes in front of it.
pub fn occlusion_pair(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "occlusion".into(),
        frames: 80,
        image_width: 1920.0,
        image_height: 1080.0,
        detection_prob: 1.0,
        clutter_rate: 2.0,
        noise_std: 2.0,
        seed,
        occlusions: vec![OcclusionScript {
            target: 0,
            start: 40,
            duration: 10,
        }],
        targets: vec![
            straight((1, 400.0, 520.0), (80, 1190.0, 520.0), 50.0, 120.0),
            straight((1, 1500.0, 540.0), (80, 710.0, 540.0), 60.0, 140.0),
        ],
    }
}

/// Two same-size walkers moving down side by side that trade lanes over a
/// few frames halfway through.
pub fn lane_swap(seed: u64) -> ScenarioSpec {
    let lane = |x0: f64, x1: f64| TargetSpec {
        waypoints: vec![
            wp(1, x0, 200.0),
            wp(28, x0, 281.0),
            wp(34, x1, 299.0),
            wp(60, x1, 377.0),
        ],
        width: 50.0,
        height: 120.0,
    };
    ScenarioSpec {
        name: "lane_swap".into(),
        frames: 60,
        image_width: 1920.0,
        image_height: 1080.0,
        detection_prob: 1.0,
        clutter_rate: 0.0,
        noise_std: 2.0,
        seed,
        occlusions: Vec::new(),
        targets: vec![lane(900.0, 960.0), lane(960.0, 900.0)],
    }
}

/// Clutter only.
pub fn clutter_only(seed: u64, frames: u32, clutter_rate: f64) -> ScenarioSpec {
    ScenarioSpec {
        name: "clutter".into(),
        frames,
        image_width: 1920.0,
        image_height: 1080.0,
        detection_prob: 1.0,
        clutter_rate,
        noise_std: 0.0,
        seed,
        occlusions: Vec::new(),
        targets: Vec::new(),
    }
}

/// Built-in scenario by name.
pub fn builtin(name: &str, seed: u64) -> Option<ScenarioSpec> {
    match name {
        "crossing5" => Some(crossing5(seed)),
        "occlusion" => Some(occlusion_pair(seed)),
        "lane_swap" => Some(lane_swap(seed)),
        "clutter" => Some(clutter_only(seed, 200, 10.0)),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["crossing5", "occlusion", "lane_swap", "clutter"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mot_io::{parse_detections_str, parse_tracks_str};

    #[test]
    fn perfect_detections_equal_truth() {
        let mut spec = crossing5(1);
        spec.detection_prob = 1.0;
        spec.clutter_rate = 0.0;
        spec.noise_std = 0.0;
        let s = generate(&spec);
        let n: usize = s.detections.iter().map(|f| f.detections.len()).sum();
        assert_eq!(n, s.ground_truth.len());
        for f in &s.detections {
            for d in &f.detections {
                assert!(s.ground_truth.iter().any(|g| g.frame == f.frame && g.bbox == d.bbox));
            }
        }
    }

    #[test]
    fn occlusion_removes_detections() {
        let mut spec = crossing5(3);
        spec.detection_prob = 1.0;
        spec.clutter_rate = 0.0;
        spec.noise_std = 0.0;
        spec.occlusions.push(OcclusionScript {
            target: 2,
            start: 40,
            duration: 10,
        });
        let s = generate(&spec);
        let hist = target_histogram(2);
        for f in &s.detections {
            let has = f
                .detections
                .iter()
                .any(|d| s.features.get(f.frame, d.index) == Some(&hist));
            assert_eq!(has, !(40..50).contains(&f.frame), "frame {}", f.frame);
        }
    }

    #[test]
    fn clutter_count_concentrates() {
        let s = generate(&clutter_only(11, 100, 10.0));
        let n = s.detection_count();
        assert!((800..=1200).contains(&n), "{n}");
    }

    #[test]
    fn same_seed_same_output() {
        let a = generate(&crossing5(5));
        let b = generate(&crossing5(5));
        assert_eq!(a, b);
        let c = generate(&crossing5(6));
        assert_ne!(a.detections, c.detections);
        assert_eq!(a.ground_truth, c.ground_truth);
    }

    #[test]
    fn written_files_parse_back() {
        let s = generate(&crossing5(2));
        let det = parse_detections_str(&format_detections(&s.detections), Path::new("det"), 0.0).unwrap();
        assert_eq!(det.frames, s.detections);
        assert_eq!(det.dropped_nonpositive, 0);
        let gt = parse_tracks_str(&format_results(&s.ground_truth), Path::new("gt")).unwrap();
        assert_eq!(gt, s.ground_truth);
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = occlusion_pair(9);
        assert_eq!(ScenarioSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        assert!(ScenarioSpec::from_toml("name = 1").is_err());
    }

    #[test]
    fn target_histograms_are_distinct() {
        let a = target_histogram(0);
        let b = target_histogram(1);
        assert_eq!(crate::appearance::bhattacharyya(&a, &b), 1.0);
    }

    #[test]
    fn waypoint_interpolation() {
        let t = straight((1, 0.0, 0.0), (11, 100.0, 50.0), 10.0, 10.0);
        assert_eq!(t.center_at(6), Some((50.0, 25.0)));
        assert_eq!(t.center_at(12), None);
        assert_eq!(t.center_at(1), Some((0.0, 0.0)));
    }
}
