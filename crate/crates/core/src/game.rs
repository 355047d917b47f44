//! The incompatibility game between a quantum player (QP) and a local
//! realist (LR) who may add noise of strength at most `lambda_lr` to QP's
//! measurements. QP wins when LR cannot make the noisy pair compatible.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::commutator_norm;
use crate::povm::Effect;
use crate::qubit::{imax, imax_inverse, inoise_qubit, theta_star};
use crate::spectral::inoise_projective;

/// Quadrature tolerance for the averaged winning probabilities.
pub const QUADRATURE_TOL: f64 = 1e-8;
const MAX_DEPTH: usize = 50;
const PROJ_TOL: f64 = 1e-9;

/// `1 - 1/sqrt 2`: the largest unbiased noise robustness of a qubit pair.
pub const UNBIASED_THRESHOLD: f64 = 1.0 - FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// QP picks the bias.
    ControlledBias,
    /// The bias is fixed and announced beforehand.
    KnownBias,
    /// QP picks the bias, LR knows it.
    QpBias,
    /// The bias is drawn at random after QP commits to the pair.
    UnknownBias,
    /// Neither bias nor noise are known to QP.
    UnknownBoth,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::ControlledBias,
        Scenario::KnownBias,
        Scenario::QpBias,
        Scenario::UnknownBias,
        Scenario::UnknownBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ControlledBias => "controlled-bias",
            Scenario::KnownBias => "known-bias",
            Scenario::QpBias => "qp-bias",
            Scenario::UnknownBias => "unknown-bias",
            Scenario::UnknownBoth => "unknown-both",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    lambda_lr: f64,
    scenario: Scenario,
}

impl GameConfig {
    pub fn new(lambda_lr: f64, scenario: Scenario) -> Result<Self> {
        check_lambda(lambda_lr)?;
        Ok(Self { lambda_lr, scenario })
    }

    pub fn lambda_lr(&self) -> f64 {
        self.lambda_lr
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::InvalidParameter(format!("LR noise {lambda} outside (0, 1/2]")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ControlledBias {
    pub commutator_norm: f64,
    /// `(1 + 2 |[M, N]|)^(-1/2)`.
    pub j_value: f64,
    /// LR needs at least this much noise against this pair.
    pub pair_threshold: f64,
    pub qp_optimal_theta: f64,
    /// LR wins against the best pair exactly when `lambda_lr >= threshold`.
    pub threshold: f64,
}

impl ControlledBias {
    pub fn lr_wins(&self, lambda_lr: f64) -> bool {
        lambda_lr >= self.pair_threshold
    }
}

/// QP chooses the bias, so only the unbiased robustness matters.
pub fn scenario_controlled_bias(m: &Effect, n: &Effect) -> Result<ControlledBias> {
    for (e, name) in [(m, "M"), (n, "N")] {
        if !e.is_projection(PROJ_TOL) {
            return Err(Error::InvalidParameter(format!(
                "{name} is not a projection (defect {:.3e})",
                e.projection_defect()
            )));
        }
    }
    let c = commutator_norm(m.op(), n.op())?;
    let j_value = 1.0 / (1.0 + 2.0 * c).sqrt();
    Ok(ControlledBias {
        commutator_norm: c,
        j_value,
        pair_threshold: 1.0 - j_value,
        qp_optimal_theta: FRAC_PI_2,
        threshold: UNBIASED_THRESHOLD,
    })
}

/// `1 - j(M, N)` and `I_0^noise(M, N)`, which must agree for projections.
pub fn j_identity_residual(m: &Effect, n: &Effect) -> Result<f64> {
    let j = scenario_controlled_bias(m, n)?.j_value;
    Ok((j + inoise_projective(m, n, 0.0)? - 1.0).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct KnownBias {
    pub b: f64,
    pub qp_optimal_theta: f64,
    /// LR wins exactly when `lambda_lr > threshold`.
    pub threshold: f64,
}

pub fn scenario_known_bias(b: f64) -> Result<KnownBias> {
    if !(-1.0..=1.0).contains(&b) {
        return Err(Error::InvalidParameter(format!("bias {b} outside [-1, 1]")));
    }
    Ok(KnownBias {
        b,
        qp_optimal_theta: theta_star(b).radians(),
        threshold: imax(b),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QpBias {
    pub b_choice: f64,
    pub threshold: f64,
    pub note: &'static str,
}

/// QP picks a fully biased noise model; the best pair then degenerates to
/// nearly commuting projections.
pub fn scenario_qp_bias() -> QpBias {
    QpBias {
        b_choice: 1.0,
        threshold: imax(1.0),
        note: "b = +1 or -1; the optimal angle tends to 0, so QP should use nearly commuting projections",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnknownBias {
    pub lambda_lr: f64,
    pub qp_optimal_theta: f64,
    pub p_qp_win: f64,
}

/// `b` is uniform on `[-1, 1]`; QP tunes the angle to `lambda_lr`.
pub fn scenario_unknown_bias(lambda_lr: f64) -> Result<UnknownBias> {
    check_lambda(lambda_lr)?;
    if lambda_lr <= UNBIASED_THRESHOLD {
        return Ok(UnknownBias { lambda_lr, qp_optimal_theta: FRAC_PI_2, p_qp_win: 1.0 });
    }
    let cos_theta = 0.5 / (1.0 - lambda_lr).powi(2) - 1.0;
    let inv = 1.0 / lambda_lr;
    let radicand = 0.5 * inv * inv - (inv - 1.0).powi(2);
    Ok(UnknownBias {
        lambda_lr,
        qp_optimal_theta: cos_theta.clamp(-1.0, 1.0).acos(),
        p_qp_win: (1.0 - radicand.max(0.0).sqrt()).clamp(0.0, 1.0),
    })
}

/// `1 - imax^{-1}(lambda)`, the same probability obtained by inverting
/// `imax` numerically.
pub fn p_qp_win_by_inversion(lambda_lr: f64) -> Result<f64> {
    check_lambda(lambda_lr)?;
    Ok(imax_inverse(lambda_lr).map_or(1.0, |b| 1.0 - b))
}

/// `lambda` at which both players win with probability 1/2.
pub fn fair_noise() -> f64 {
    1.0 / (2.0 + 1.5f64.sqrt())
}

/// Distribution of the bias in the last scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasPrior {
    #[default]
    UniformB,
    UniformBSquared,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnknownBoth {
    pub theta: Option<f64>,
    pub prior: BiasPrior,
    pub p_qp_win: f64,
    /// The same quantity with maximal resources: `imax` for every `b`.
    pub p_max: f64,
}

/// Adaptive Simpson quadrature; fails if the recursion depth runs out.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NumericalFailure(format!(
            "quadrature did not converge on [{a}, {b}] (error estimate {:.3e})",
            delta.abs() / 15.0
        )));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// `int_{-1}^{1} I_b db` under the chosen prior, for an integrand even in `b`.
/// With `b^2 = s` uniform the same normalization reads `2 int_0^1 I_{sqrt s} ds`.
fn integrate_over_bias(integrand: &dyn Fn(f64) -> Result<f64>, prior: BiasPrior) -> Result<f64> {
    match prior {
        BiasPrior::UniformB => adaptive_simpson(integrand, -1.0, 1.0, QUADRATURE_TOL),
        BiasPrior::UniformBSquared => {
            let g = |s: f64| integrand(s.max(0.0).sqrt());
            Ok(2.0 * adaptive_simpson(&g, 0.0, 1.0, QUADRATURE_TOL)?)
        }
    }
}

/// `(pi/2)(sqrt 2 - 1)`: the integral of `imax` over `[-1, 1]`.
pub fn maximal_resource_value() -> f64 {
    FRAC_PI_2 * (2f64.sqrt() - 1.0)
}

/// Averaged robustness of `(P_0, P_theta)`, or of the best pair for every
/// bias when `theta` is `None`.
pub fn scenario_unknown_both(theta: Option<f64>, prior: BiasPrior) -> Result<UnknownBoth> {
    let imax_f = |b: f64| Ok(imax(b));
    let p_max = integrate_over_bias(&imax_f, prior)?;
    let p_qp_win = match theta {
        None => p_max,
        Some(t) => {
            if !(t > 0.0 && t < PI) {
                return Err(Error::InvalidParameter(format!("angle {t} outside (0, pi)")));
            }
            let f = |b: f64| inoise_qubit(t, b);
            integrate_over_bias(&f, prior)?
        }
    };
    Ok(UnknownBoth { theta, prior, p_qp_win, p_max })
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedAngleOptimum {
    pub theta: f64,
    pub p_qp_win: f64,
}

/// Best single angle for the last scenario, by golden-section search on
/// `(0, pi/2]`.
pub fn optimal_fixed_angle(prior: BiasPrior, tol: f64) -> Result<FixedAngleOptimum> {
    let value = |t: f64| scenario_unknown_both(Some(t), prior).map(|r| r.p_qp_win);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-3, FRAC_PI_2);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (value(x1)?, value(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = value(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = value(x1)?;
        }
    }
    let theta = 0.5 * (lo + hi);
    Ok(FixedAngleOptimum { theta, p_qp_win: value(theta)? })
}
