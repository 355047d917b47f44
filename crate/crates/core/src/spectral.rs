//! Angle spectra of projective pairs.
//!
//! Two projections decompose into a commuting part and a direct sum of qubit
//! blocks `(P_0, P_theta)`. Each block contributes the eigenvalue
//! `(1 + cos theta)/2` of `I - (M - N)^2` twice, so the noise robustness of
//! the pair is the supremum of the qubit formula over those angles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{inner, vec_norm, Hermitian, Matrix};
use crate::povm::Effect;
use crate::qubit::{imax, inoise_qubit, QubitAngle};

/// Band around 0 and 1 treated as commuting directions.
pub const EIG_EPS: f64 = 1e-9;
const PROJ_TOL: f64 = 1e-9;
const PAIR_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct AngleSpectrum {
    /// Distinct angles in `(0, pi)`, ascending.
    pub angles: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

impl AngleSpectrum {
    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angles repeated by multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.angles
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&a, &k)| std::iter::repeat_n(a, k))
            .collect()
    }

    /// Largest gap between consecutive points of `{0} u angles u {pi}`.
    pub fn max_gap(&self) -> f64 {
        let mut pts = vec![0.0];
        pts.extend(&self.angles);
        pts.push(PI);
        pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn require_projection(e: &Effect) -> Result<()> {
    let defect = e.projection_defect();
    if defect > PROJ_TOL {
        return Err(Error::NotProjective(defect));
    }
    Ok(())
}

fn angle_of(x: f64) -> f64 {
    (2.0 * x - 1.0).clamp(-1.0, 1.0).acos()
}

/// Groups sorted values that agree within `tol`.
fn group(values: &[f64], tol: f64) -> (Vec<f64>, Vec<usize>) {
    let mut out: Vec<f64> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for &v in values {
        match out.last() {
            Some(&last) if (v - last).abs() <= tol => {
                let i = out.len() - 1;
                mult[i] += 1;
                sums[i] += v;
                out[i] = sums[i] / mult[i] as f64;
            }
            _ => {
                out.push(v);
                mult.push(1);
                sums.push(v);
            }
        }
    }
    (out, mult)
}

/// Angles of the qubit blocks of a projective pair, from the spectrum of
/// `I - (M - N)^2`.
pub fn angle_spectrum(m: &Effect, n: &Effect) -> Result<AngleSpectrum> {
    check_dim(m.dim(), n.dim())?;
    require_projection(m)?;
    require_projection(n)?;
    let diff = m.op().sub(n.op());
    let op = Hermitian::symmetrize((diff.matrix() * diff.matrix()).scale(-1.0).shift(1.0));
    let interior: Vec<f64> = op
        .eigenvalues()
        .into_iter()
        .filter(|&x| x > EIG_EPS && x < 1.0 - EIG_EPS)
        .collect();
    if !interior.len().is_multiple_of(2) {
        return Err(Error::Consistency(format!(
            "odd number ({}) of interior eigenvalues of I - (M - N)^2",
            interior.len()
        )));
    }
    // ascending eigenvalues come in equal pairs, one pair per qubit block
    let mut per_block = Vec::with_capacity(interior.len() / 2);
    for pair in interior.chunks(2) {
        if (pair[1] - pair[0]).abs() > PAIR_TOL {
            return Err(Error::Consistency(format!(
                "eigenvalues {} and {} of I - (M - N)^2 should coincide",
                pair[0], pair[1]
            )));
        }
        per_block.push(0.5 * (pair[0] + pair[1]));
    }
    // descending x is ascending angle
    per_block.reverse();
    let angles: Vec<f64> = per_block.into_iter().map(angle_of).collect();
    let (angles, multiplicities) = group(&angles, PAIR_TOL);
    Ok(AngleSpectrum { angles, multiplicities })
}

/// Same angles from the eigenvalues of `MNM` in `(0, 1)`, which equal
/// `cos^2(theta/2)` once per block.
pub fn angle_spectrum_mnm(m: &Effect, n: &Effect) -> Result<AngleSpectrum> {
    check_dim(m.dim(), n.dim())?;
    require_projection(m)?;
    require_projection(n)?;
    let mm = m.op().matrix();
    let op = Hermitian::symmetrize(&(mm * n.op().matrix()) * mm);
    let mut angles: Vec<f64> = op
        .eigenvalues()
        .into_iter()
        .filter(|&x| x > EIG_EPS && x < 1.0 - EIG_EPS)
        .map(angle_of)
        .collect();
    angles.sort_by(f64::total_cmp);
    let (angles, multiplicities) = group(&angles, PAIR_TOL);
    Ok(AngleSpectrum { angles, multiplicities })
}

/// `I_b^noise` of a projective pair: the supremum of the qubit value over
/// the angle spectrum, or 0 for a commuting pair.
pub fn inoise_projective(m: &Effect, n: &Effect, b: f64) -> Result<f64> {
    let spec = angle_spectrum(m, n)?;
    spec.angles
        .iter()
        .map(|&t| inoise_qubit(t, b))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

/// `theta_F = arccos(2F^2 - 1)` for the fidelity `F = |<psi|phi>|`.
///
/// `None` when `F` is 0 or 1: the two projections then commute.
pub fn fidelity_angle(phi: &[Complex64], psi: &[Complex64]) -> Result<Option<QubitAngle>> {
    check_dim(phi.len(), psi.len())?;
    for v in [phi, psi] {
        let norm = vec_norm(v);
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("vector norm {norm} is not 1")));
        }
    }
    let f2 = inner(psi, phi).norm_sqr();
    if f2 <= 1e-12 || f2 >= 1.0 - 1e-12 {
        return Ok(None);
    }
    Ok(Some(QubitAngle::new(angle_of(f2))?))
}

/// Centered unitary DFT `F_jk = exp(-2 pi i (j - c)(k - c)/n) / sqrt(n)`,
/// `c = (n - 1)/2`.
///
/// With grid step `h = 1/sqrt(n)` for position, `x_j p_k` reduces to the
/// exponent above, so `h` drops out.
pub fn centered_dft(n: usize) -> Matrix {
    let c = (n as f64 - 1.0) / 2.0;
    let norm = 1.0 / (n as f64).sqrt();
    Matrix::from_fn(n, |j, k| {
        let phase = -2.0 * PI * (j as f64 - c) * (k as f64 - c) / n as f64;
        Complex64::from_polar(norm, phase)
    })
}

/// Half-line binarizations `(Q+, P+)` of position and momentum on a
/// centered grid of `grid_size` points.
pub fn qp_binarization(grid_size: usize) -> Result<(Effect, Effect)> {
    if grid_size < 2 || !grid_size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid_size} must be even and at least 2"
        )));
    }
    let c = (grid_size as f64 - 1.0) / 2.0;
    let diag: Vec<f64> = (0..grid_size).map(|j| if j as f64 > c { 1.0 } else { 0.0 }).collect();
    let q = Hermitian::diag(&diag);
    let f = centered_dft(grid_size);
    let p = q.conjugate_by(&f);
    Ok((Effect::new(q)?, Effect::new(p)?))
}

/// `sup_b [imax(b) - I_b^noise(Q+, P+)]` over `b_samples` evenly spaced
/// biases in `[-1, 1]`.
pub fn qp_robustness_deficit(grid_size: usize, b_samples: usize) -> Result<f64> {
    let (q, p) = qp_binarization(grid_size)?;
    let spec = angle_spectrum(&q, &p)?;
    let mut worst = 0.0f64;
    for i in 0..b_samples.max(2) {
        let b = -1.0 + 2.0 * i as f64 / (b_samples.max(2) - 1) as f64;
        let best = spec
            .angles
            .iter()
            .map(|&t| inoise_qubit(t, b))
            .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
        worst = worst.max(imax(b) - best);
    }
    Ok(worst)
}
