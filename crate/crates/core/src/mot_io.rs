//! MOTChallenge text formats: detections, tracking results, ground truth,
//! and the per-detection feature file. Also the feature providers that back
//! appearance lookups.
//!
//! Detections within a frame are sorted by `(left, top, width, height,
//! confidence)` before anything else happens, and a detection's index is its
//! position in that order, counted before any filtering. Feature files use
//! the same index, so they stay valid whatever thresholds a run applies.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::appearance::{hsv_histogram, ColorHistogram, FeatureProvider, NoFeatures, HIST_BINS};
use crate::error::{Error, Result};
use crate::geometry::BBox;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BBox<f64>,
    pub confidence: f64,
    /// Position within the sorted, unfiltered frame.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionFrame {
    /// 1-based.
    pub frame: u32,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSequence {
    /// Ascending by frame; frames without any rows are absent.
    pub frames: Vec<DetectionFrame>,
    pub dropped_nonpositive: usize,
    pub dropped_low_confidence: usize,
}

impl DetectionSequence {
    pub fn last_frame(&self) -> u32 {
        self.frames.last().map_or(0, |f| f.frame)
    }

    pub fn frame(&self, frame: u32) -> Option<&DetectionFrame> {
        self.frames
            .binary_search_by_key(&frame, |f| f.frame)
            .ok()
            .map(|i| &self.frames[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: u32,
    pub track_id: u64,
    pub bbox: BBox<f64>,
    pub confidence: f64,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Splits a data line into trimmed fields; `None` for blank lines.
fn fields(line: &str) -> Option<Vec<&str>> {
    let line = line.trim();
    if line.is_empty() {
        return None;
    }
    Some(line.split(',').map(str::trim).collect())
}

fn number(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{what}: {field:?} is not finite")));
    }
    Ok(v)
}

fn frame_number(path: &Path, line: usize, field: &str) -> Result<u32> {
    let v = number(path, line, field, "frame")?;
    if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(parse_err(
            path,
            line,
            format!("frame: {field:?} is not a positive integer"),
        ));
    }
    Ok(v as u32)
}

fn cmp_detection(a: &(BBox<f64>, f64), b: &(BBox<f64>, f64)) -> std::cmp::Ordering {
    let ka = [a.0.left, a.0.top, a.0.width, a.0.height, a.1];
    let kb = [b.0.left, b.0.top, b.0.width, b.0.height, b.1];
    ka.iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Parses `frame,id,left,top,width,height,conf,x,y,z` rows. Rows below
/// `min_confidence` and boxes with non-positive size are dropped and
/// counted.
pub fn parse_detections_str(text: &str, path: &Path, min_confidence: f64) -> Result<DetectionSequence> {
    let mut by_frame: std::collections::BTreeMap<u32, Vec<(BBox<f64>, f64)>> = Default::default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let Some(f) = fields(line) else { continue };
        if f.len() < 7 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected at least 7 fields, found {}", f.len()),
            ));
        }
        let frame = frame_number(path, lineno, f[0])?;
        let bbox = BBox::new(
            number(path, lineno, f[2], "bb_left")?,
            number(path, lineno, f[3], "bb_top")?,
            number(path, lineno, f[4], "bb_width")?,
            number(path, lineno, f[5], "bb_height")?,
        );
        let conf = number(path, lineno, f[6], "conf")?;
        by_frame.entry(frame).or_default().push((bbox, conf));
    }
    let mut seq = DetectionSequence::default();
    for (frame, mut rows) in by_frame {
        rows.sort_by(cmp_detection);
        let mut detections = Vec::with_capacity(rows.len());
        for (index, (bbox, confidence)) in rows.into_iter().enumerate() {
            if bbox.width <= 0.0 || bbox.height <= 0.0 {
                seq.dropped_nonpositive += 1;
                continue;
            }
            if confidence < min_confidence {
                seq.dropped_low_confidence += 1;
                continue;
            }
            detections.push(Detection {
                bbox,
                confidence,
                index,
            });
        }
        seq.frames.push(DetectionFrame { frame, detections });
    }
    if seq.dropped_nonpositive > 0 {
        log::warn!(
            "event=dropped_detections reason=nonpositive_size count={} path={}",
            seq.dropped_nonpositive,
            path.display()
        );
    }
    Ok(seq)
}

pub fn parse_detections(path: &Path, min_confidence: f64) -> Result<DetectionSequence> {
    parse_detections_str(&read(path)?, path, min_confidence)
}

/// Parses ground truth or tracker output.
///
/// Ground-truth rows whose seventh field is 0 are "do not evaluate" markers
/// and are skipped, as are rows of the nine-column layout whose class
/// (eighth field) is not 1.
pub fn parse_tracks_str(text: &str, path: &Path) -> Result<Vec<TrackRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let Some(f) = fields(line) else { continue };
        if f.len() < 6 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected at least 6 fields, found {}", f.len()),
            ));
        }
        let frame = frame_number(path, lineno, f[0])?;
        let id = number(path, lineno, f[1], "id")?;
        if id < 0.0 || id.fract() != 0.0 {
            return Err(parse_err(
                path,
                lineno,
                format!("id: {:?} is not a nonnegative integer", f[1]),
            ));
        }
        let confidence = match f.get(6) {
            Some(s) => number(path, lineno, s, "conf")?,
            None => 1.0,
        };
        if confidence == 0.0 {
            continue;
        }
        if f.len() >= 9 {
            let class = number(path, lineno, f[7], "class")?;
            if class != 1.0 && class != -1.0 {
                continue;
            }
        }
        out.push(TrackRecord {
            frame,
            track_id: id as u64,
            bbox: BBox::new(
                number(path, lineno, f[2], "bb_left")?,
                number(path, lineno, f[3], "bb_top")?,
                number(path, lineno, f[4], "bb_width")?,
                number(path, lineno, f[5], "bb_height")?,
            ),
            confidence,
        });
    }
    out.sort_by_key(|r| (r.frame, r.track_id));
    Ok(out)
}

pub fn parse_tracks(path: &Path) -> Result<Vec<TrackRecord>> {
    parse_tracks_str(&read(path)?, path)
}

/// Shortest decimal with at most two fractional digits; no trailing zeros,
/// no decimal point for whole numbers.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

pub fn format_record(r: &TrackRecord) -> String {
    format!(
        "{},{},{},{},{},{},1,-1,-1,-1",
        r.frame,
        r.track_id,
        format_value(r.bbox.left),
        format_value(r.bbox.top),
        format_value(r.bbox.width),
        format_value(r.bbox.height),
    )
}

pub fn format_results(records: &[TrackRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

pub fn write_results(records: &[TrackRecord], path: &Path) -> Result<()> {
    fs::write(path, format_results(records)).map_err(|e| Error::io(path, e))
}

/// Detection rows in the same schema, `id = -1`.
pub fn format_detections(frames: &[DetectionFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        for d in &f.detections {
            let _ = writeln!(
                out,
                "{},-1,{},{},{},{},{},-1,-1,-1",
                f.frame,
                format_value(d.bbox.left),
                format_value(d.bbox.top),
                format_value(d.bbox.width),
                format_value(d.bbox.height),
                format_value(d.confidence),
            );
        }
    }
    out
}

/// Per-detection histograms keyed by `(frame, detection index)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    rows: HashMap<(u32, usize), ColorHistogram<f64>>,
}

impl FeatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, frame: u32, index: usize, histogram: ColorHistogram<f64>) {
        self.rows.insert((frame, index), histogram);
    }

    pub fn get(&self, frame: u32, index: usize) -> Option<&ColorHistogram<f64>> {
        self.rows.get(&(frame, index))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One line per detection, `frame,index,b0,...,b511`, ordered by key.
    pub fn to_text(&self) -> String {
        let mut keys: Vec<_> = self.rows.keys().copied().collect();
        keys.sort_unstable();
        let mut out = String::new();
        for key in keys {
            let _ = write!(out, "{},{}", key.0, key.1);
            for b in self.rows[&key].bins() {
                let _ = write!(out, ",{b}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let mut table = Self::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let Some(f) = fields(line) else { continue };
            if f.len() != HIST_BINS + 2 {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {} fields, found {}", HIST_BINS + 2, f.len()),
                ));
            }
            let frame = frame_number(path, lineno, f[0])?;
            let index: usize = f[1]
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("det_index: {:?} is not an index", f[1])))?;
            let bins = f[2..]
                .iter()
                .map(|s| number(path, lineno, s, "bin"))
                .collect::<Result<Vec<_>>>()?;
            if bins.iter().any(|b| *b < 0.0) {
                return Err(parse_err(path, lineno, "negative histogram bin"));
            }
            table.insert(frame, index, ColorHistogram::from_bins(&bins));
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_str(&read(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl FeatureProvider for FeatureTable {
    fn histogram(&self, frame: u32, det_index: usize, _: &BBox<f64>) -> ColorHistogram<f64> {
        self.get(frame, det_index)
            .cloned()
            .unwrap_or_else(ColorHistogram::sentinel)
    }
}

/// Crops boxes out of `root/img1/NNNNNN.jpg`. Keeps the most recently
/// decoded frame.
#[derive(Debug)]
pub struct ImageDirectory {
    root: PathBuf,
    cache: Mutex<Option<(u32, Option<Arc<image::RgbImage>>)>>,
}

impl ImageDirectory {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        let root = root.into();
        if !root.join("img1").is_dir() {
            log::warn!(
                "event=degraded_appearance reason=missing_image_dir path={}",
                root.join("img1").display()
            );
        }
        Self {
            root,
            cache: Mutex::new(None),
        }
    }

    pub fn frame_path(&self, frame: u32) -> PathBuf {
        self.root.join("img1").join(format!("{frame:06}.jpg"))
    }

    fn load(&self, frame: u32) -> Option<Arc<image::RgbImage>> {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((f, img)) = cache.as_ref() {
            if *f == frame {
                return img.clone();
            }
        }
        let path = self.frame_path(frame);
        let img = match image::open(&path) {
            Ok(img) => Some(Arc::new(img.to_rgb8())),
            Err(e) => {
                log::warn!(
                    "event=missing_frame_image frame={frame} path={} error={e}",
                    path.display()
                );
                None
            }
        };
        *cache = Some((frame, img.clone()));
        img
    }
}

/// RGB pixels of `bbox` clipped to the image.
pub fn crop_pixels(img: &image::RgbImage, bbox: &BBox<f64>) -> Vec<[u8; 3]> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let x0 = bbox.left.max(0.0).floor() as u32;
    let y0 = bbox.top.max(0.0).floor() as u32;
    let x1 = bbox.right().min(w).ceil().max(0.0) as u32;
    let y1 = bbox.bottom().min(h).ceil().max(0.0) as u32;
    let mut out = Vec::new();
    for y in y0..y1 {
        for x in x0..x1 {
            out.push(img.get_pixel(x, y).0);
        }
    }
    out
}

impl FeatureProvider for ImageDirectory {
    fn histogram(&self, frame: u32, _: usize, bbox: &BBox<f64>) -> ColorHistogram<f64> {
        match self.load(frame) {
            Some(img) => hsv_histogram(&crop_pixels(&img, bbox)),
            None => ColorHistogram::sentinel(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    None,
    Images,
    Features,
    Synthetic,
}

/// File a generated scenario stores its features in.
pub const SYNTHETIC_FEATURES_FILE: &str = "features.txt";

/// Appearance source for `mode`. `root` is the sequence directory for
/// images, the feature file for features, and the generated dataset
/// directory for synthetic.
pub fn frame_provider(mode: FeatureMode, root: Option<&Path>) -> Result<Box<dyn FeatureProvider>> {
    let need = |what: &str| root.ok_or_else(|| Error::Config(format!("feature mode {what} needs a path")));
    Ok(match mode {
        FeatureMode::None => Box::new(NoFeatures),
        FeatureMode::Images => Box::new(ImageDirectory::new(need("images")?)),
        FeatureMode::Features => Box::new(FeatureTable::read(need("features")?)?),
        FeatureMode::Synthetic => Box::new(FeatureTable::read(&need("synthetic")?.join(SYNTHETIC_FEATURES_FILE))?),
    })
}
