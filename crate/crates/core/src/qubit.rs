//! Analytic ground truth for qubit pairs.
//!
//! For the sharp pair `(P_0, P_theta)` the noise robustness at bias `b` is
//! the unique root on `[0, 1/2]` of
//!
//! ```text
//! h(lambda) = [(1-l)^2 cos(theta) - l^2 b^2]^2 - 2 (1-l)^2 + 1 - 2 l^2 b^2
//! ```
//!
//! which is negative at `lambda = 0` and non-negative at `lambda = 1/2`.
//! All root finding is plain bisection.

use std::f64::consts::PI;

use crate::error::{check_dim, Error, Result};
use crate::povm::{bloch_of, DeformationMatrix, Effect};

/// Tolerance on the Busch functional.
pub const BUSCH_TOL: f64 = 1e-10;

/// Angle between the Bloch vectors of two qubit projections, in `[0, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct QubitAngle(f64);

impl QubitAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("angle {theta} outside [0, pi]")));
        }
        Ok(Self(theta))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// `f_a(mu) = a mu / (1 + a mu)`, linking `I_a` to the noise robustness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkFunction {
    a_total: f64,
}

impl LinkFunction {
    pub fn new(a_total: f64) -> Result<Self> {
        if a_total.is_nan() || a_total <= 0.0 || !a_total.is_finite() {
            return Err(Error::InvalidParameter(format!("a = {a_total} must be positive")));
        }
        Ok(Self { a_total })
    }

    pub fn of(a: &DeformationMatrix) -> Result<Self> {
        Self::new(a.total())
    }

    pub fn apply(&self, mu: f64) -> f64 {
        let am = self.a_total * mu;
        am / (1.0 + am)
    }

    pub fn inverse(&self, lambda: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "inverse link undefined at lambda = {lambda}"
            )));
        }
        Ok(lambda / (self.a_total * (1.0 - lambda)))
    }
}

pub fn f_a(mu: f64, link: LinkFunction) -> f64 {
    link.apply(mu)
}

pub fn f_a_inv(lambda: f64, link: LinkFunction) -> Result<f64> {
    link.inverse(lambda)
}

pub fn bias_of(a: &DeformationMatrix) -> f64 {
    a.bias()
}

fn pairing(alpha: f64, m: [f64; 3], beta: f64, n: [f64; 3]) -> f64 {
    alpha * beta - (m[0] * n[0] + m[1] * n[1] + m[2] * n[2])
}

/// Left-hand side of the Busch compatibility functional for two qubit effects.
/// Non-negative exactly for compatible pairs.
pub fn busch_functional(e: &Effect, f: &Effect) -> Result<f64> {
    check_dim(2, e.dim())?;
    check_dim(2, f.dim())?;
    let (a, m) = bloch_of(e)?;
    let (b, n) = bloch_of(f)?;
    let neg = |v: [f64; 3]| [-v[0], -v[1], -v[2]];
    let (ac, mc) = (2.0 - a, neg(m));
    let (bc, nc) = (2.0 - b, neg(n));

    let ee = pairing(a, m, a, m);
    let ecec = pairing(ac, mc, ac, mc);
    let ff = pairing(b, n, b, n);
    let fcfc = pairing(bc, nc, bc, nc);
    let root = (ee * ecec * ff * fcfc).max(0.0).sqrt();

    Ok(root - pairing(a, m, ac, mc) * pairing(b, n, bc, nc)
        + pairing(a, m, bc, nc) * pairing(ac, mc, b, n)
        + pairing(a, m, b, n) * pairing(ac, mc, bc, nc))
}

pub fn busch_compatible(e: &Effect, f: &Effect) -> Result<bool> {
    Ok(busch_functional(e, f)? >= -BUSCH_TOL)
}

/// The polynomial whose root on `[0, 1/2]` is the noise robustness.
pub fn compatibility_polynomial(lambda: f64, theta: f64, b: f64) -> f64 {
    let u = (1.0 - lambda) * (1.0 - lambda);
    let lb = lambda * lambda * b * b;
    let f = u * theta.cos() - lb;
    f * f - 2.0 * u + 1.0 - 2.0 * lb
}

/// Bisection for a sign change of `f` on `[lo, hi]` with `f(lo) < 0 <= f(hi)`,
/// run to full double resolution.
pub(crate) fn bisect_root(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `I_b^noise(P_0, P_theta)`.
///
/// Angles outside the open interval `(0, pi)` describe commuting pairs and
/// return 0, including at `b = +-1` where the limit from inside is 1/2.
pub fn inoise_qubit(theta: f64, b: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&b) {
        return Err(Error::InvalidParameter(format!("bias {b} outside [-1, 1]")));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParameter("non-finite angle".into()));
    }
    if theta <= 0.0 || theta >= PI {
        return Ok(0.0);
    }
    Ok(bisect_root(0.0, 0.5, |l| compatibility_polynomial(l, theta, b)))
}

/// Closed form at `b = 0`: `1 - (1 + sin theta)^(-1/2)`.
pub fn inoise_unbiased_closed_form(theta: f64) -> f64 {
    1.0 - (1.0 + theta.sin()).powf(-0.5)
}

/// Closed form at `b = +-1`: `1 - [1 + sqrt((1 + cos theta)/2)]^(-1)`.
pub fn inoise_max_biased_closed_form(theta: f64) -> f64 {
    1.0 - 1.0 / (1.0 + ((1.0 + theta.cos()) / 2.0).sqrt())
}

/// Largest noise robustness reachable at bias `b`: `1 / (2 + sqrt(2(1 - b^2)))`.
pub fn imax(b: f64) -> f64 {
    1.0 / (2.0 + (2.0 * (1.0 - b * b)).max(0.0).sqrt())
}

/// The eigenvalue `chi_b = (1 - imax(b))^(-2) / 4` a projective pair must
/// carry to reach `imax(b)`.
pub fn chi(b: f64) -> f64 {
    0.25 / (1.0 - imax(b)).powi(2)
}

/// The angle at which `(P_0, P_theta)` reaches `imax(b)`:
/// `cos(theta_b) = (1 - imax(b))^(-2) / 2 - 1`.
pub fn theta_star(b: f64) -> QubitAngle {
    let c = (0.5 / (1.0 - imax(b)).powi(2) - 1.0).clamp(-1.0, 1.0);
    QubitAngle(c.acos())
}

/// Inverse of `imax` on `b >= 0`; `None` outside `[imax(0), 1/2]`.
pub fn imax_inverse(lambda: f64) -> Option<f64> {
    let lo = imax(0.0);
    if !(lo - 1e-15..=0.5).contains(&lambda) {
        return None;
    }
    let k = 1.0 / lambda - 2.0;
    Some((1.0 - 0.5 * k * k).clamp(0.0, 1.0).sqrt())
}

/// The bias `b >= 0` at which `inoise_qubit(theta, b) = lambda`.
///
/// Returns 0 when `lambda` does not exceed the unbiased value and 1 when it
/// reaches the maximally biased one; in between `b -> inoise_qubit(theta, b)`
/// is non-decreasing, so bisection applies.
pub fn bias_threshold(theta: f64, lambda: f64) -> Result<f64> {
    let at0 = inoise_qubit(theta, 0.0)?;
    if lambda <= at0 {
        return Ok(0.0);
    }
    if lambda >= inoise_qubit(theta, 1.0)? {
        return Ok(1.0);
    }
    // theta and b are validated above, so the evaluation cannot fail here.
    Ok(bisect_root(0.0, 1.0, |b| {
        inoise_qubit(theta, b).map_or(f64::NAN, |v| v - lambda)
    }))
}

/// Sign of a number with a dead band.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64, band: f64) -> Self {
        if x > band {
            Sign::Positive
        } else if x < -band {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Finite-difference estimate of `d lambda / d b` for `(P_0, P_theta)`.
/// Central with step `1e-5`, one-sided at `|b| = 1`.
pub fn dlambda_db(theta: f64, b: f64) -> Result<f64> {
    const H: f64 = 1e-5;
    if b + H > 1.0 {
        Ok((inoise_qubit(theta, b)? - inoise_qubit(theta, b - H)?) / H)
    } else if b - H < -1.0 {
        Ok((inoise_qubit(theta, b + H)? - inoise_qubit(theta, b)?) / H)
    } else {
        Ok((inoise_qubit(theta, b + H)? - inoise_qubit(theta, b - H)?) / (2.0 * H))
    }
}

/// Sign of `d lambda / d b`, zero inside a `1e-6` band.
pub fn dlambda_db_sign(theta: f64, b: f64) -> Result<Sign> {
    Ok(Sign::of(dlambda_db(theta, b)?, 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{deform_noise, qubit_projector, NoiseParams};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    /// Implicit-function derivative of the root, used as an independent
    /// check on the finite differences.
    fn implicit_derivative(theta: f64, b: f64) -> f64 {
        let l = inoise_qubit(theta, b).unwrap();
        let f = |c: f64| (1.0 - l).powi(2) * c - l * l * b * b;
        let ft = f(theta.cos());
        let fpi = f(-1.0);
        -l * l * (1.0 - l) * b * (ft + 1.0) / (ft * ft + ft * l * b * b + fpi + l * b * b)
    }

    #[test]
    fn busch_examples() {
        let p0 = qubit_projector(0.0);
        assert!(busch_compatible(&p0, &p0).unwrap());
        assert!(busch_compatible(&p0, &p0.complement()).unwrap());
        assert!(!busch_compatible(&p0, &qubit_projector(FRAC_PI_2)).unwrap());

        let thr = 1.0 - 0.5f64.sqrt();
        let pair = |lam: f64| {
            let noise = NoiseParams::new(lam, 0.0).unwrap();
            (
                deform_noise(&p0, noise),
                deform_noise(&qubit_projector(FRAC_PI_2), noise),
            )
        };
        let (e, f) = pair(thr - 1e-4);
        assert!(!busch_compatible(&e, &f).unwrap());
        let (e, f) = pair(thr + 1e-4);
        assert!(busch_compatible(&e, &f).unwrap());
        assert!(busch_compatible(&Effect::zero(3), &Effect::zero(3)).is_err());
    }

    #[test]
    fn closed_forms() {
        let v = inoise_qubit(FRAC_PI_2, 0.0).unwrap();
        assert!((v - 0.292_893_218_813_452_5).abs() < 1e-12);
        let v = inoise_qubit(FRAC_PI_2, 1.0).unwrap();
        assert!((v - 0.414_213_562_373_095).abs() < 1e-12);
        assert!((inoise_qubit(FRAC_PI_2, -1.0).unwrap() - v).abs() < 1e-15);
        for k in 1..40 {
            let theta = PI * k as f64 / 40.0;
            let a = inoise_qubit(theta, 0.0).unwrap();
            assert!((a - inoise_unbiased_closed_form(theta)).abs() < 1e-12);
            let b = inoise_qubit(theta, 1.0).unwrap();
            assert!((b - inoise_max_biased_closed_form(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn commuting_endpoints_are_zero() {
        for b in [-1.0, -0.3, 0.0, 0.99, 1.0] {
            assert_eq!(inoise_qubit(PI, b).unwrap(), 0.0);
            assert_eq!(inoise_qubit(0.0, b).unwrap(), 0.0);
        }
        assert!(inoise_qubit(1.0, 1.5).is_err());
    }

    #[test]
    fn root_is_unique_sign_change() {
        for i in 1..20 {
            let theta = PI * i as f64 / 20.0;
            for j in 0..=10 {
                let b = -1.0 + 0.2 * j as f64;
                let changes = (0..2000)
                    .map(|k| compatibility_polynomial(0.5 * k as f64 / 2000.0, theta, b))
                    .collect::<Vec<_>>()
                    .windows(2)
                    .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
                    .count();
                assert_eq!(changes, 1, "theta {theta}, b {b}");
            }
        }
    }

    #[test]
    fn busch_agrees_with_root() {
        for i in 1..12 {
            let theta = PI * i as f64 / 12.0;
            for b in [-0.9, -0.4, 0.0, 0.5, 0.95] {
                let lam = inoise_qubit(theta, b).unwrap();
                let check = |l: f64| {
                    let noise = NoiseParams::new(l, b).unwrap();
                    busch_compatible(
                        &deform_noise(&qubit_projector(0.0), noise),
                        &deform_noise(&qubit_projector(theta), noise),
                    )
                    .unwrap()
                };
                assert!(!check(lam - 1e-6), "theta {theta} b {b}");
                assert!(check(lam + 1e-6), "theta {theta} b {b}");
            }
        }
    }

    #[test]
    fn maximal_values() {
        assert!((imax(0.0) - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((theta_star(0.0).radians() - FRAC_PI_2).abs() < 1e-7);
        assert!((chi(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(imax(1.0), 0.5);
        assert_eq!(imax(-1.0), 0.5);
        for b in [0.0, 0.3, 0.6, 0.9] {
            let peak = inoise_qubit(theta_star(b).radians(), b).unwrap();
            assert!((peak - imax(b)).abs() < 1e-9, "b {b}");
            assert!((imax_inverse(imax(b)).unwrap() - b).abs() < 1e-7);
            // chi is the eigenvalue of I - (M - N)^2 at theta_star
            let c = 0.5 * (1.0 + theta_star(b).radians().cos());
            assert!((c - chi(b)).abs() < 1e-12);
        }
        assert!(imax_inverse(0.2).is_none());
    }

    #[test]
    fn link_function() {
        let link = LinkFunction::new(1.0).unwrap();
        assert_eq!(f_a(0.0, link), 0.0);
        assert_eq!(f_a_inv(0.0, link).unwrap(), 0.0);
        let mu = f_a_inv(1.0 - 0.5f64.sqrt(), link).unwrap();
        assert!((mu - (2f64.sqrt() - 1.0)).abs() < 1e-14);
        assert!((f_a(mu, link) - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!(f_a_inv(1.0, link).is_err());
        assert!(LinkFunction::new(0.0).is_err());
        assert_eq!(bias_of(&DeformationMatrix::new(0.5, 0.0, 0.5).unwrap()), 0.0);
        assert_eq!(bias_of(&DeformationMatrix::new(0.0, 0.0, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn thresholds() {
        let l0 = inoise_qubit(1.0, 0.0).unwrap();
        assert_eq!(bias_threshold(1.0, l0).unwrap(), 0.0);
        // lambda is flat in b at b = 0, so round-off in imax shows up as ~sqrt(eps)
        assert!(bias_threshold(FRAC_PI_2, imax(0.0)).unwrap() < 1e-6);
        let lam = inoise_qubit(FRAC_PI_4, 0.5).unwrap();
        assert!((bias_threshold(FRAC_PI_4, lam).unwrap() - 0.5).abs() < 1e-8);
        assert_eq!(bias_threshold(FRAC_PI_4, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn derivative_signs() {
        assert_eq!(dlambda_db_sign(FRAC_PI_3, 0.0).unwrap(), Sign::Zero);
        assert!(dlambda_db(FRAC_PI_3, 0.0).unwrap().abs() < 1e-6);
        assert_eq!(dlambda_db_sign(FRAC_PI_3, 0.5).unwrap(), Sign::Positive);
        assert_eq!(dlambda_db_sign(FRAC_PI_3, -0.5).unwrap(), Sign::Negative);
        for theta in [0.3, FRAC_PI_3, 2.0, 2.8] {
            for b in [-0.8, -0.3, 0.2, 0.7] {
                let fd = dlambda_db(theta, b).unwrap();
                let exact = implicit_derivative(theta, b);
                assert!((fd - exact).abs() < 1e-7, "theta {theta} b {b}: {fd} vs {exact}");
            }
        }
    }
}
