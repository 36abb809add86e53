//! Scalar loss kernels for training a polar-template instance head: polar
//! centerness, the polar template IoU loss with its analytic gradient, focal
//! loss, binary cross entropy, and the `N_pos`-normalized total.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codec::build_template;
use crate::geometry::Angle;

/// Floor applied to every logarithm argument.
pub const LOG_FLOOR: f64 = 1e-12;

pub const DEFAULT_FOCAL_ALPHA: f64 = 0.25;
pub const DEFAULT_FOCAL_GAMMA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("ray distances must be finite and positive (index {index}: {value})")]
    NonPositiveDistance { index: usize, value: f64 },
    #[error("input {name}[{index}] must be finite and positive, got {value}")]
    NonPositiveInput {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("length mismatch: d has {d}, d* has {d_star}, Δθ has {delta}")]
    LengthMismatch {
        d: usize,
        d_star: usize,
        delta: usize,
    },
    #[error("empty distance list")]
    Empty,
    #[error("{name} = {value} is outside its allowed range")]
    ProbOutOfRange { name: &'static str, value: f64 },
    #[error("empty batch")]
    EmptyBatch,
    #[error("number of positive samples must be at least 1")]
    ZeroPositives,
    #[error("n_pos differs across the batch ({0} vs {1})")]
    InconsistentPositives(usize, usize),
}

fn ln_clamped(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// Loss value with its gradient with respect to the predicted ray lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossEval {
    pub value: f64,
    pub grad_d: Vec<f64>,
}

/// `sqrt(min(d) / max(d))`, in `(0, 1]`.
pub fn polar_centerness(d: &[f64]) -> Result<f64, LossError> {
    if d.is_empty() {
        return Err(LossError::Empty);
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (index, &value) in d.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(LossError::NonPositiveDistance { index, value });
        }
        lo = lo.min(value);
        hi = hi.max(value);
    }
    Ok((lo / hi).sqrt())
}

fn check_positive(name: &'static str, xs: &[f64]) -> Result<(), LossError> {
    match xs.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        Some(index) => Err(LossError::NonPositiveInput {
            name,
            index,
            value: xs[index],
        }),
        None => Ok(()),
    }
}

/// Polar template IoU loss `log(Σ max(dᵢ, dᵢ*)Δθᵢ / Σ min(dᵢ, dᵢ*)Δθᵢ)`.
///
/// The gradient is taken with respect to `d`. Where `dᵢ = dᵢ*` exactly both
/// one-sided slopes are summed, `Δθᵢ/Σmax − Δθᵢ/Σmin`.
pub fn pt_iou_loss(d: &[f64], d_star: &[f64], delta_thetas: &[f64]) -> Result<LossEval, LossError> {
    if d.len() != d_star.len() || d.len() != delta_thetas.len() {
        return Err(LossError::LengthMismatch {
            d: d.len(),
            d_star: d_star.len(),
            delta: delta_thetas.len(),
        });
    }
    if d.is_empty() {
        return Err(LossError::Empty);
    }
    check_positive("d", d)?;
    check_positive("d_star", d_star)?;
    check_positive("delta_theta", delta_thetas)?;

    let mut sum_max = 0.0;
    let mut sum_min = 0.0;
    for ((&p, &t), &w) in d.iter().zip(d_star).zip(delta_thetas) {
        sum_max += p.max(t) * w;
        sum_min += p.min(t) * w;
    }
    let value = ln_clamped(sum_max / sum_min).max(0.0);
    let grad_d = d
        .iter()
        .zip(d_star)
        .zip(delta_thetas)
        .map(|((&p, &t), &w)| {
            if p > t {
                w / sum_max
            } else if p < t {
                -w / sum_min
            } else {
                w / sum_max - w / sum_min
            }
        })
        .collect();
    Ok(LossEval { value, grad_d })
}

fn check_prob_open(name: &'static str, p: f64) -> Result<(), LossError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(LossError::ProbOutOfRange { name, value: p })
    }
}

/// Focal loss `−α_t (1 − p_t)^γ log p_t` for a binary target.
pub fn focal_loss(p: f64, positive: bool, alpha: f64, gamma: f64) -> Result<f64, LossError> {
    check_prob_open("p", p)?;
    let (p_t, alpha_t) = if positive {
        (p, alpha)
    } else {
        (1.0 - p, 1.0 - alpha)
    };
    Ok(-alpha_t * (1.0 - p_t).powf(gamma) * ln_clamped(p_t))
}

/// Binary cross entropy of a probability against a soft target in `[0, 1]`.
pub fn bce(pred: f64, target: f64) -> Result<f64, LossError> {
    check_prob_open("pred", pred)?;
    if !(0.0..=1.0).contains(&target) {
        return Err(LossError::ProbOutOfRange {
            name: "target",
            value: target,
        });
    }
    Ok(-target * ln_clamped(pred) - (1.0 - target) * ln_clamped(1.0 - pred))
}

/// Main-angle regression target, `A / 2π` in `[0, 1)`.
pub fn angle_target(main_angle: Angle) -> f64 {
    main_angle.radians() / TAU
}

/// Centerness regression target derived from the ground-truth ray lengths.
pub fn centerness_target(d_star: &[f64]) -> Result<f64, LossError> {
    polar_centerness(d_star)
}

/// Per-location inputs to [`total_loss`].
///
/// The centerness, angle and distance fields are only read at positive
/// locations and may be left at their defaults elsewhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossInputs {
    pub cls_score: f64,
    pub cls_target: bool,
    pub centerness: f64,
    pub centerness_target: f64,
    pub angle: f64,
    pub angle_target: f64,
    pub pred_distances: Vec<f64>,
    pub target_distances: Vec<f64>,
    pub delta_thetas: Vec<f64>,
    pub n_pos: usize,
}

impl LossInputs {
    /// A background location: only the classification term applies.
    pub fn negative(cls_score: f64, n_pos: usize) -> Self {
        Self {
            cls_score,
            cls_target: false,
            n_pos,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocalParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for FocalParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_FOCAL_ALPHA,
            gamma: DEFAULT_FOCAL_GAMMA,
        }
    }
}

/// The four loss terms, each already divided by `N_pos`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossTerms {
    pub cls: f64,
    pub polar: f64,
    pub center: f64,
    pub angle: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.cls + self.polar + self.center + self.angle
    }
}

/// Per-term breakdown of [`total_loss`]. Terms are accumulated in batch order.
pub fn loss_terms(batch: &[LossInputs], focal: FocalParams) -> Result<LossTerms, LossError> {
    let first = batch.first().ok_or(LossError::EmptyBatch)?;
    let n_pos = first.n_pos;
    if n_pos == 0 {
        return Err(LossError::ZeroPositives);
    }
    let mut sums = LossTerms::default();
    for loc in batch {
        if loc.n_pos != n_pos {
            return Err(LossError::InconsistentPositives(n_pos, loc.n_pos));
        }
        sums.cls += focal_loss(loc.cls_score, loc.cls_target, focal.alpha, focal.gamma)?;
        if loc.cls_target {
            sums.polar += pt_iou_loss(
                &loc.pred_distances,
                &loc.target_distances,
                &loc.delta_thetas,
            )?
            .value;
            sums.center += bce(loc.centerness, loc.centerness_target)?;
            sums.angle += bce(loc.angle, loc.angle_target)?;
        }
    }
    let scale = 1.0 / n_pos as f64;
    Ok(LossTerms {
        cls: sums.cls * scale,
        polar: sums.polar * scale,
        center: sums.center * scale,
        angle: sums.angle * scale,
    })
}

/// Total loss over a batch of feature-map locations, normalized by `N_pos`,
/// with default focal parameters.
pub fn total_loss(batch: &[LossInputs]) -> Result<f64, LossError> {
    loss_terms(batch, FocalParams::default()).map(|t| t.total())
}

/// Settings for the randomized finite-difference check of [`pt_iou_loss`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradcheckConfig {
    pub trials: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            step: 1e-6,
            seed: 42,
        }
    }
}

impl GradcheckConfig {
    /// Smallest allowed `|dᵢ − dᵢ*|`. A central difference straddling a kink
    /// measures the wrong slope, so the margin grows with the step.
    pub fn kink_margin(&self) -> f64 {
        (10.0 * self.step).max(1e-3)
    }

    /// Pass threshold on the relative error: 1e-5 at the default step, scaled
    /// linearly for coarser steps.
    pub fn threshold(&self) -> f64 {
        1e-5 * (self.step / 1e-6).max(1.0)
    }
}

/// Inputs of the worst trial, kept so a failure can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckCase {
    pub d: Vec<f64>,
    pub d_star: Vec<f64>,
    pub delta_thetas: Vec<f64>,
    pub component: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub trials: usize,
    pub step: f64,
    pub seed: u64,
    pub threshold: f64,
    pub kink_margin: f64,
    /// Samples rejected for sitting too close to a kink and drawn again.
    pub resampled: usize,
    pub max_rel_err: f64,
    pub worst: Option<GradcheckCase>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.threshold
    }
}

/// Relative error with a floor on the denominator so exact zeros compare sanely.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Compare the analytic gradient of [`pt_iou_loss`] with central differences
/// at random inputs. Each trial draws a template (m in 1..=3, random main
/// direction) and distances in `[1, 10)`; draws where any ray is within the
/// kink margin of its target are rejected and redrawn.
pub fn gradcheck(config: GradcheckConfig) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let margin = config.kink_margin();
    let h = config.step;
    let mut report = GradcheckReport {
        trials: config.trials,
        step: h,
        seed: config.seed,
        threshold: config.threshold(),
        kink_margin: margin,
        resampled: 0,
        max_rel_err: 0.0,
        worst: None,
    };
    for _ in 0..config.trials {
        let (d, d_star, delta) = loop {
            let m = rng.random_range(1..=3);
            let main = Angle::new(rng.random_range(0.0..TAU));
            let delta = build_template(m, main)
                .expect("m >= 1")
                .delta_thetas()
                .to_vec();
            let d: Vec<f64> = (0..delta.len())
                .map(|_| rng.random_range(1.0..10.0))
                .collect();
            let d_star: Vec<f64> = (0..delta.len())
                .map(|_| rng.random_range(1.0..10.0))
                .collect();
            if d.iter().zip(&d_star).all(|(a, b)| (a - b).abs() > margin) {
                break (d, d_star, delta);
            }
            report.resampled += 1;
        };
        let analytic = pt_iou_loss(&d, &d_star, &delta)
            .expect("valid inputs")
            .grad_d;
        let mut probe = d.clone();
        for i in 0..d.len() {
            probe[i] = d[i] + h;
            let up = pt_iou_loss(&probe, &d_star, &delta)
                .expect("valid inputs")
                .value;
            probe[i] = d[i] - h;
            let down = pt_iou_loss(&probe, &d_star, &delta)
                .expect("valid inputs")
                .value;
            probe[i] = d[i];
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(analytic[i], numeric);
            if err > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = report.max_rel_err.max(err);
                report.worst = Some(GradcheckCase {
                    d: d.clone(),
                    d_star: d_star.clone(),
                    delta_thetas: delta.clone(),
                    component: i,
                    analytic: analytic[i],
                    numeric,
                });
            }
        }
    }
    report
}
