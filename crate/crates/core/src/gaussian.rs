//! Linear-Gaussian single-object machinery.
//!
//! State layout is `[px, py, vx, vy, w, h]` where `(px, py)` is the box
//! centre in pixels, `(vx, vy)` the centre velocity in pixels per frame and
//! `(w, h)` the box size. Measurements are `[px, py, w, h]`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::scalar::Scalar;

pub const STATE_DIM: usize = 6;
pub const MEAS_DIM: usize = 4;

pub type StateVector<T> = SVector<T, STATE_DIM>;
pub type StateCovariance<T> = SMatrix<T, STATE_DIM, STATE_DIM>;
pub type MeasVector<T> = SVector<T, MEAS_DIM>;
pub type MeasCovariance<T> = SMatrix<T, MEAS_DIM, MEAS_DIM>;
pub type ObservationMatrix<T> = SMatrix<T, MEAS_DIM, STATE_DIM>;

pub const PX: usize = 0;
pub const PY: usize = 1;
pub const VX: usize = 2;
pub const VY: usize = 3;
pub const W: usize = 4;
pub const H: usize = 5;

/// Box described by a state vector.
pub fn state_box<T: Scalar>(x: &StateVector<T>) -> BBox<T> {
    BBox::from_center(x[PX], x[PY], x[W], x[H])
}

/// Measurement vector of a box.
pub fn box_measurement<T: Scalar>(b: &BBox<T>) -> MeasVector<T> {
    let (cx, cy) = b.center();
    MeasVector::new(cx, cy, b.width, b.height)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent<T: Scalar> {
    pub weight: T,
    pub mean: StateVector<T>,
    pub covariance: StateCovariance<T>,
}

impl<T: Scalar> GaussianComponent<T> {
    pub fn new(weight: T, mean: StateVector<T>, covariance: StateCovariance<T>) -> Self {
        Self {
            weight,
            mean,
            covariance,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.weight.is_finite_value()
            && self.mean.iter().all(|v| v.is_finite_value())
            && self.covariance.iter().all(|v| v.is_finite_value());
        if finite {
            Ok(())
        } else {
            Err(Error::ModelViolation("non-finite Gaussian component".into()))
        }
    }
}

/// Constant-velocity transition `x' = F x + w`, `w ~ N(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel<T: Scalar> {
    pub transition: StateCovariance<T>,
    pub process_noise: StateCovariance<T>,
    pub dt: T,
}

impl<T: Scalar> MotionModel<T> {
    /// `Q = diag(σp², σp², σv², σv², σwh², σwh²)`.
    pub fn constant_velocity(dt: T, sigma_pos: T, sigma_vel: T, sigma_size: T) -> Self {
        let q = StateVector::from_column_slice(&[
            sigma_pos * sigma_pos,
            sigma_pos * sigma_pos,
            sigma_vel * sigma_vel,
            sigma_vel * sigma_vel,
            sigma_size * sigma_size,
            sigma_size * sigma_size,
        ]);
        Self::with_noise(dt, StateCovariance::from_diagonal(&q))
    }

    pub fn with_noise(dt: T, process_noise: StateCovariance<T>) -> Self {
        let mut f = StateCovariance::identity();
        f[(PX, VX)] = dt;
        f[(PY, VY)] = dt;
        Self {
            transition: f,
            process_noise,
            dt,
        }
    }
}

/// Linear observation `z = H x + v`, `v ~ N(0, R)`, selecting `[px, py, w, h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel<T: Scalar> {
    pub observation: ObservationMatrix<T>,
    pub noise: MeasCovariance<T>,
}

impl<T: Scalar> MeasurementModel<T> {
    pub fn with_noise(noise: MeasCovariance<T>) -> Self {
        let mut h = ObservationMatrix::zeros();
        h[(0, PX)] = T::one();
        h[(1, PY)] = T::one();
        h[(2, W)] = T::one();
        h[(3, H)] = T::one();
        Self { observation: h, noise }
    }

    /// `R = σ² I₄`.
    pub fn isotropic(sigma: T) -> Self {
        Self::with_noise(MeasCovariance::identity() * (sigma * sigma))
    }
}

pub fn kalman_predict<T: Scalar>(comp: &GaussianComponent<T>, model: &MotionModel<T>) -> Result<GaussianComponent<T>> {
    comp.check_finite()?;
    let f = &model.transition;
    let mean = f * comp.mean;
    let cov = f * comp.covariance * f.transpose() + model.process_noise;
    Ok(GaussianComponent::new(comp.weight, mean, symmetrize(cov)))
}

/// Posterior plus the quantities the association step needs.
#[derive(Debug, Clone)]
pub struct UpdateOutcome<T: Scalar> {
    pub posterior: GaussianComponent<T>,
    /// `ln N(z; H m, S)`.
    pub log_likelihood: T,
    /// Squared Mahalanobis distance of `z` in innovation space.
    pub mahalanobis_sq: T,
}

/// Conjugate update with Joseph-form covariance.
pub fn kalman_update_detailed<T: Scalar>(
    comp: &GaussianComponent<T>,
    z: &MeasVector<T>,
    model: &MeasurementModel<T>,
) -> Result<UpdateOutcome<T>> {
    comp.check_finite()?;
    if !z.iter().all(|v| v.is_finite_value()) {
        return Err(Error::ModelViolation("non-finite measurement".into()));
    }
    let h = &model.observation;
    let p = &comp.covariance;
    let s = symmetrize(h * p * h.transpose() + model.noise);
    let chol = match s.cholesky() {
        Some(c) => c,
        None => {
            return Err(Error::SingularInnovation {
                condition: condition_estimate(&s),
            })
        }
    };
    let s_inv = chol.inverse();
    let innovation = z - h * comp.mean;
    let gain = p * h.transpose() * s_inv;
    let mean = comp.mean + gain * innovation;
    let i_kh = StateCovariance::identity() - gain * h;
    let cov = i_kh * p * i_kh.transpose() + gain * model.noise * gain.transpose();

    let maha = (innovation.transpose() * s_inv * innovation)[(0, 0)];
    let log_det = chol.l().diagonal().iter().fold(T::zero(), |acc, d| acc + d.ln()) * T::lit(2.0);
    let log_norm = T::lit(MEAS_DIM as f64) * (T::two_pi()).ln();
    let log_likelihood = -T::lit(0.5) * (maha + log_det + log_norm);

    Ok(UpdateOutcome {
        posterior: GaussianComponent::new(comp.weight, mean, symmetrize(cov)),
        log_likelihood,
        mahalanobis_sq: maha,
    })
}

/// Returns the posterior component and `N(z; H m, H P Hᵀ + R)`.
pub fn kalman_update<T: Scalar>(
    comp: &GaussianComponent<T>,
    z: &MeasVector<T>,
    model: &MeasurementModel<T>,
) -> Result<(GaussianComponent<T>, T)> {
    let out = kalman_update_detailed(comp, z, model)?;
    Ok((out.posterior, out.log_likelihood.exp()))
}

fn symmetrize<T: Scalar, const N: usize>(m: SMatrix<T, N, N>) -> SMatrix<T, N, N> {
    (m + m.transpose()) * T::lit(0.5)
}

fn condition_estimate<T: Scalar>(s: &MeasCovariance<T>) -> f64 {
    let eig = s.symmetric_eigenvalues();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for e in eig.iter() {
        let a = e.to_f64_lossy().abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Prune, merge and cap a Gaussian mixture.
///
/// Components lighter than `prune_thresh` are dropped. The heaviest remaining
/// component absorbs every component within Mahalanobis distance `merge_dist`
/// of it (measured with its covariance) by moment matching, and the process
/// repeats on what is left. At most `max_components` of the heaviest results
/// are kept and the total weight is rescaled to the input total.
pub fn mixture_prune_merge<T: Scalar>(
    mix: &[GaussianComponent<T>],
    prune_thresh: T,
    merge_dist: T,
    max_components: usize,
) -> Vec<GaussianComponent<T>> {
    if mix.len() <= 1 {
        return mix.to_vec();
    }
    let total = mix.iter().fold(T::zero(), |acc, c| acc + c.weight);
    let mut pool: Vec<&GaussianComponent<T>> = mix.iter().filter(|c| c.weight >= prune_thresh).collect();
    if pool.is_empty() {
        // keep the heaviest rather than return an empty density
        let best = mix
            .iter()
            .max_by(|a, b| a.weight.partial_cmp(&b.weight).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty mixture");
        pool.push(best);
    }
    let gate = merge_dist * merge_dist;
    let mut merged = Vec::new();
    while !pool.is_empty() {
        let lead = pool.iter().enumerate().fold(
            0usize,
            |best, (i, c)| if c.weight > pool[best].weight { i } else { best },
        );
        let lead_inv = pool[lead]
            .covariance
            .try_inverse()
            .unwrap_or_else(StateCovariance::zeros);
        let lead_mean = pool[lead].mean;
        let (close, far): (Vec<_>, Vec<_>) = pool.into_iter().enumerate().partition(|(i, c)| {
            if *i == lead {
                return true;
            }
            let d = c.mean - lead_mean;
            (d.transpose() * lead_inv * d)[(0, 0)] <= gate
        });
        pool = far.into_iter().map(|(_, c)| c).collect();
        merged.push(moment_match(close.iter().map(|(_, c)| *c)));
    }
    merged.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap_or(std::cmp::Ordering::Equal));
    merged.truncate(max_components.max(1));
    let kept = merged.iter().fold(T::zero(), |acc, c| acc + c.weight);
    if kept > T::zero() {
        let scale = total / kept;
        for c in &mut merged {
            c.weight *= scale;
        }
    }
    merged
}

fn moment_match<'a, T: Scalar>(comps: impl Iterator<Item = &'a GaussianComponent<T>> + Clone) -> GaussianComponent<T> {
    let weight = comps.clone().fold(T::zero(), |acc, c| acc + c.weight);
    let mean = comps
        .clone()
        .fold(StateVector::zeros(), |acc, c| acc + c.mean * c.weight)
        / weight;
    let cov = comps.fold(StateCovariance::zeros(), |acc, c| {
        let d = c.mean - mean;
        acc + (c.covariance + d * d.transpose()) * c.weight
    }) / weight;
    GaussianComponent::new(weight, mean, symmetrize(cov))
}

/// Weighted mean of a mixture.
pub fn mixture_mean<T: Scalar>(mix: &[GaussianComponent<T>]) -> StateVector<T> {
    let total = mix.iter().fold(T::zero(), |acc, c| acc + c.weight);
    let sum = mix.iter().fold(StateVector::zeros(), |acc, c| acc + c.mean * c.weight);
    if total > T::zero() {
        sum / total
    } else {
        sum
    }
}
