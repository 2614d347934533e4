//! Run configuration: every tunable in one TOML document.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::birth::BirthParams;
use crate::error::{Error, Result};
use crate::estimator::IdSwitchParams;
use crate::gaussian::{MeasurementModel, MotionModel};
use crate::glmb::{FilterParams, Gate};
use crate::mot_io::FeatureMode;
use crate::reappearance::{CategorizeParams, ReappearanceParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub detection_prob: f64,
    pub survival_prob: f64,
    /// Expected false detections per frame.
    pub clutter_rate: f64,
    /// Largest plausible box, used to spread clutter over measurement space.
    pub max_box_width: f64,
    pub max_box_height: f64,
    pub max_hypotheses: usize,
    pub min_hyp_weight: f64,
    pub k_predict: usize,
    pub k_update: usize,
    /// Mahalanobis gate in innovation space; 0 disables gating.
    pub gate: f64,
    pub position_noise: f64,
    pub velocity_noise: f64,
    pub size_noise: f64,
    pub measurement_noise: f64,
    pub prune_thresh: f64,
    pub merge_dist: f64,
    pub max_components: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            detection_prob: 0.9,
            survival_prob: 0.99,
            clutter_rate: 10.0,
            max_box_width: 200.0,
            max_box_height: 400.0,
            max_hypotheses: 1000,
            min_hyp_weight: 1e-5,
            k_predict: 1000,
            k_update: 1000,
            gate: 5.0,
            position_noise: 5.0,
            velocity_noise: 2.0,
            size_noise: 3.0,
            measurement_noise: 10.0,
            prune_thresh: 1e-5,
            merge_dist: 4.0,
            max_components: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BirthConfig {
    /// IOU a current measurement must exceed against a leftover one.
    pub iou_thresh: f64,
    pub existence: f64,
    /// Prior standard deviations in state order: cx, cy, vx, vy, w, h.
    pub prior_std: [f64; 6],
}

impl Default for BirthConfig {
    fn default() -> Self {
        Self {
            iou_thresh: 0.3,
            existence: 0.35,
            prior_std: [20.0, 20.0, 10.0, 10.0, 10.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppearanceConfig {
    pub mode: FeatureMode,
    /// Sequence directory (images), feature file (features) or dataset
    /// directory (synthetic).
    pub path: Option<PathBuf>,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for AppearanceConfig {
    fn default() -> Self {
        Self {
            mode: FeatureMode::None,
            path: None,
            lambda1: 0.2,
            lambda2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdSwitchConfig {
    pub enabled: bool,
    pub size_thresh: f64,
    pub color_thresh: f64,
    pub weight_floor: f64,
    /// Also compare a newborn's first update with the detection it was
    /// born from.
    pub check_newborn: bool,
}

impl Default for IdSwitchConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            size_thresh: 0.4,
            color_thresh: 0.5,
            weight_floor: 1e-3,
            check_newborn: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReappearanceConfig {
    pub enabled: bool,
    pub forgetting: f64,
    pub velocity_std: f64,
    pub color_std: f64,
    pub reappear_prob: f64,
    pub min_score: f64,
    pub max_age: u32,
    pub gate: f64,
    pub k_best: usize,
    pub border_margin: f64,
    pub overlap_thresh: f64,
}

impl Default for ReappearanceConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            forgetting: 0.1,
            velocity_std: 2.0,
            color_std: 0.3,
            reappear_prob: 0.5,
            min_score: 0.5,
            max_age: 60,
            gate: 5.0,
            k_best: 100,
            border_margin: 30.0,
            overlap_thresh: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub image_width: f64,
    pub image_height: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            image_width: 1920.0,
            image_height: 1080.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub detections: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Detections scoring below this are ignored.
    pub min_confidence: f64,
    /// Only used by scenario generation.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub birth: BirthConfig,
    pub appearance: AppearanceConfig,
    pub id_switch: IdSwitchConfig,
    pub reappearance: ReappearanceConfig,
    pub scene: SceneConfig,
    pub io: IoConfig,
}

fn check(ok: bool, what: &str, value: impl std::fmt::Display, range: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {value} is outside {range}")))
    }
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn nonnegative(v: f64) -> bool {
    v >= 0.0 && v.is_finite()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.filter;
        check(
            open_unit(f.detection_prob),
            "filter.detection_prob",
            f.detection_prob,
            "(0, 1)",
        )?;
        check(
            open_unit(f.survival_prob),
            "filter.survival_prob",
            f.survival_prob,
            "(0, 1)",
        )?;
        check(
            positive(f.clutter_rate),
            "filter.clutter_rate",
            f.clutter_rate,
            "(0, inf)",
        )?;
        check(
            positive(f.max_box_width),
            "filter.max_box_width",
            f.max_box_width,
            "(0, inf)",
        )?;
        check(
            positive(f.max_box_height),
            "filter.max_box_height",
            f.max_box_height,
            "(0, inf)",
        )?;
        check(
            f.max_hypotheses >= 1,
            "filter.max_hypotheses",
            f.max_hypotheses,
            "[1, inf)",
        )?;
        check(
            (0.0..1.0).contains(&f.min_hyp_weight),
            "filter.min_hyp_weight",
            f.min_hyp_weight,
            "[0, 1)",
        )?;
        check(f.k_predict >= 1, "filter.k_predict", f.k_predict, "[1, inf)")?;
        check(f.k_update >= 1, "filter.k_update", f.k_update, "[1, inf)")?;
        check(nonnegative(f.gate), "filter.gate", f.gate, "[0, inf)")?;
        for (name, v) in [
            ("filter.position_noise", f.position_noise),
            ("filter.velocity_noise", f.velocity_noise),
            ("filter.size_noise", f.size_noise),
        ] {
            check(nonnegative(v), name, v, "[0, inf)")?;
        }
        check(
            positive(f.measurement_noise),
            "filter.measurement_noise",
            f.measurement_noise,
            "(0, inf)",
        )?;
        check(
            (0.0..1.0).contains(&f.prune_thresh),
            "filter.prune_thresh",
            f.prune_thresh,
            "[0, 1)",
        )?;
        check(nonnegative(f.merge_dist), "filter.merge_dist", f.merge_dist, "[0, inf)")?;
        check(
            f.max_components >= 1,
            "filter.max_components",
            f.max_components,
            "[1, inf)",
        )?;

        let b = &self.birth;
        check(
            (0.0..1.0).contains(&b.iou_thresh),
            "birth.iou_thresh",
            b.iou_thresh,
            "[0, 1)",
        )?;
        check(open_unit(b.existence), "birth.existence", b.existence, "(0, 1)")?;
        for v in b.prior_std {
            check(positive(v), "birth.prior_std", v, "(0, inf)")?;
        }

        let a = &self.appearance;
        check(nonnegative(a.lambda1), "appearance.lambda1", a.lambda1, "[0, inf)")?;
        check(nonnegative(a.lambda2), "appearance.lambda2", a.lambda2, "[0, inf)")?;
        if a.mode != FeatureMode::None && a.path.is_none() {
            return Err(Error::Config(format!(
                "appearance.mode = {:?} needs appearance.path",
                a.mode
            )));
        }

        let s = &self.id_switch;
        check(
            (0.0..=1.0).contains(&s.size_thresh),
            "id_switch.size_thresh",
            s.size_thresh,
            "[0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&s.color_thresh),
            "id_switch.color_thresh",
            s.color_thresh,
            "[0, 1]",
        )?;
        check(
            (0.0..1.0).contains(&s.weight_floor),
            "id_switch.weight_floor",
            s.weight_floor,
            "[0, 1)",
        )?;

        let r = &self.reappearance;
        check(
            nonnegative(r.forgetting),
            "reappearance.forgetting",
            r.forgetting,
            "[0, inf)",
        )?;
        check(
            positive(r.velocity_std),
            "reappearance.velocity_std",
            r.velocity_std,
            "(0, inf)",
        )?;
        check(positive(r.color_std), "reappearance.color_std", r.color_std, "(0, inf)")?;
        check(
            open_unit(r.reappear_prob),
            "reappearance.reappear_prob",
            r.reappear_prob,
            "(0, 1)",
        )?;
        check(
            nonnegative(r.min_score),
            "reappearance.min_score",
            r.min_score,
            "[0, inf)",
        )?;
        check(positive(r.gate), "reappearance.gate", r.gate, "(0, inf)")?;
        check(r.k_best >= 1, "reappearance.k_best", r.k_best, "[1, inf)")?;
        check(
            nonnegative(r.border_margin),
            "reappearance.border_margin",
            r.border_margin,
            "[0, inf)",
        )?;
        check(
            (0.0..=1.0).contains(&r.overlap_thresh),
            "reappearance.overlap_thresh",
            r.overlap_thresh,
            "[0, 1]",
        )?;

        let sc = &self.scene;
        check(
            positive(sc.image_width),
            "scene.image_width",
            sc.image_width,
            "(0, inf)",
        )?;
        check(
            positive(sc.image_height),
            "scene.image_height",
            sc.image_height,
            "(0, inf)",
        )?;
        check(
            self.io.min_confidence.is_finite(),
            "io.min_confidence",
            self.io.min_confidence,
            "finite values",
        )?;
        Ok(())
    }

    /// Clutter intensity per unit of (cx, cy, w, h) measurement volume.
    pub fn clutter_intensity(&self) -> f64 {
        let f = &self.filter;
        f.clutter_rate / (self.scene.image_width * self.scene.image_height * f.max_box_width * f.max_box_height)
    }

    pub fn filter_params<T: Scalar>(&self) -> FilterParams<T> {
        let f = &self.filter;
        let l = T::lit;
        FilterParams {
            detection_prob: l(f.detection_prob),
            survival_prob: l(f.survival_prob),
            clutter_intensity: l(self.clutter_intensity()),
            max_hypotheses: f.max_hypotheses,
            min_hyp_weight: l(f.min_hyp_weight),
            k_predict: f.k_predict,
            k_update: f.k_update,
            motion: MotionModel::constant_velocity(T::one(), l(f.position_noise), l(f.velocity_noise), l(f.size_noise)),
            measurement: MeasurementModel::isotropic(l(f.measurement_noise)),
            prune_thresh: l(f.prune_thresh),
            merge_dist: l(f.merge_dist),
            max_components: f.max_components,
        }
    }

    pub fn gate<T: Scalar>(&self) -> Gate<T> {
        if self.filter.gate > 0.0 {
            Gate::mahalanobis(T::lit(self.filter.gate))
        } else {
            Gate::none()
        }
    }

    pub fn birth_params<T: Scalar>(&self) -> BirthParams<T> {
        BirthParams {
            existence: T::lit(self.birth.existence),
            prior_std: self.birth.prior_std.map(T::lit),
            dt: T::one(),
        }
    }

    pub fn id_switch_params<T: Scalar>(&self) -> IdSwitchParams<T> {
        IdSwitchParams {
            size_thresh: T::lit(self.id_switch.size_thresh),
            color_thresh: T::lit(self.id_switch.color_thresh),
            weight_floor: T::lit(self.id_switch.weight_floor),
        }
    }

    pub fn categorize_params<T: Scalar>(&self) -> CategorizeParams<T> {
        CategorizeParams {
            image_width: T::lit(self.scene.image_width),
            image_height: T::lit(self.scene.image_height),
            border_margin: T::lit(self.reappearance.border_margin),
            overlap_thresh: T::lit(self.reappearance.overlap_thresh),
        }
    }

    pub fn reappearance_params<T: Scalar>(&self) -> ReappearanceParams<T> {
        let r = &self.reappearance;
        ReappearanceParams {
            forgetting: T::lit(r.forgetting),
            velocity_std: T::lit(r.velocity_std),
            color_std: T::lit(r.color_std),
            reappear_prob: T::lit(r.reappear_prob),
            lambda1: T::lit(self.appearance.lambda1),
            lambda2: T::lit(self.appearance.lambda2),
            min_score: T::lit(r.min_score),
            max_age: r.max_age,
            gate: T::lit(r.gate),
            k_best: r.k_best,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("[filter]\ndetection_prob = 0.8\n").unwrap();
        assert_eq!(cfg.filter.detection_prob, 0.8);
        assert_eq!(cfg.filter.survival_prob, 0.99);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[filter]\ndetection_probability = 0.8\n").is_err());
        assert!(RunConfig::from_toml("[nonsense]\n").is_err());
    }

    #[test]
    fn ranges_checked() {
        let err = RunConfig::from_toml("[filter]\ndetection_prob = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("filter.detection_prob"), "{err}");
        assert!(RunConfig::from_toml("[reappearance]\nreappear_prob = 0\n").is_err());
        assert!(RunConfig::from_toml("[appearance]\nmode = \"images\"\n").is_err());
    }

    #[test]
    fn clutter_intensity_spreads_rate() {
        let cfg = RunConfig::default();
        let expect = 10.0 / (1920.0 * 1080.0 * 200.0 * 400.0);
        assert!((cfg.clutter_intensity() - expect).abs() < 1e-25);
        let p: FilterParams<f64> = cfg.filter_params();
        assert_eq!(p.clutter_intensity, cfg.clutter_intensity());
    }
}
