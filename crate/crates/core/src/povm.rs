//! Binary observables, classical noise, channels and joint-POVM blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{sigma_x, sigma_y, sigma_z, Hermitian, Matrix};

/// Eigenvalue slack tolerated (and clamped) when validating effects.
pub const EFFECT_TOL: f64 = 1e-10;

/// A binary observable `(M, I - M)`, stored through its outcome-1 effect.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect(Hermitian);

impl Effect {
    /// Validates `0 <= M <= I`. Violations up to [`EFFECT_TOL`] are clamped
    /// onto the valid range; larger ones are rejected.
    pub fn new(m: Hermitian) -> Result<Self> {
        let ev = m.eigenvalues();
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        let violation = (-lo).max(hi - 1.0).max(0.0);
        if !violation.is_finite() || violation > EFFECT_TOL {
            return Err(Error::InvalidEffect(violation));
        }
        if violation > 0.0 {
            return Ok(Self(m.map_spectrum(|x| x.clamp(0.0, 1.0))));
        }
        Ok(Self(m))
    }

    pub fn zero(dim: usize) -> Self {
        Self(Hermitian::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Hermitian::identity(dim))
    }

    pub fn op(&self) -> &Hermitian {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// The outcome-0 effect `I - M`.
    pub fn complement(&self) -> Effect {
        Effect(Hermitian::identity(self.dim()).sub(&self.0))
    }

    /// `max |M^2 - M|`; zero for projections.
    pub fn projection_defect(&self) -> f64 {
        let sq = self.0.matrix() * self.0.matrix();
        sq.max_abs_diff(self.0.matrix())
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.projection_defect() <= tol
    }

    pub fn conjugate_by(&self, u: &Matrix) -> Effect {
        Effect(self.0.conjugate_by(u))
    }

    pub fn direct_sum(&self, other: &Effect) -> Effect {
        Effect(self.0.direct_sum(&other.0))
    }
}

/// Classical noise of magnitude `lambda` and bias `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    lambda: f64,
    bias: f64,
}

impl NoiseParams {
    pub fn new(lambda: f64, bias: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
        }
        if !(-1.0..=1.0).contains(&bias) {
            return Err(Error::InvalidParameter(format!("bias {bias} outside [-1, 1]")));
        }
        Ok(Self { lambda, bias })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Outcome distribution `(p1, p0)` of the trivial device.
    pub fn probabilities(&self) -> (f64, f64) {
        (0.5 * (1.0 + self.bias), 0.5 * (1.0 - self.bias))
    }
}

/// Symmetric non-negative 2x2 matrix `(a_ij)`, `i, j in {0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationMatrix {
    pub a00: f64,
    pub a01: f64,
    pub a11: f64,
}

impl DeformationMatrix {
    pub fn new(a00: f64, a01: f64, a11: f64) -> Result<Self> {
        for (name, v) in [("a00", a00), ("a01", a01), ("a11", a11)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(Self { a00, a01, a11 })
    }

    /// The diagonal matrix `diag(a00, a11) = diag((1-b)/2, (1+b)/2)`.
    pub fn from_bias(b: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&b) {
            return Err(Error::InvalidParameter(format!("bias {b} outside [-1, 1]")));
        }
        Self::new(0.5 * (1.0 - b), 0.0, 0.5 * (1.0 + b))
    }

    /// `a = sum_ij a_ij`, counting the off-diagonal entry twice.
    pub fn total(&self) -> f64 {
        self.a00 + 2.0 * self.a01 + self.a11
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a00,
            (1, 1) => self.a11,
            _ => self.a01,
        }
    }

    /// Weights in block order `(11, 10, 01, 00)`.
    pub fn block_weights(&self) -> [f64; 4] {
        [self.a11, self.a01, self.a01, self.a00]
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0.0
    }

    /// `a~_ij = a_{i+1, j+1}` (binary addition).
    pub fn complemented(&self) -> Self {
        Self {
            a00: self.a11,
            a01: self.a01,
            a11: self.a00,
        }
    }

    /// Bias `2 (a11 + a01) / a - 1` of the equivalent noise model.
    pub fn bias(&self) -> f64 {
        2.0 * (self.a11 + self.a01) / self.total() - 1.0
    }
}

/// Four candidate joint-POVM blocks `G_11, G_10, G_01, G_00`.
#[derive(Clone, Debug)]
pub struct JointCandidate {
    pub g11: Hermitian,
    pub g10: Hermitian,
    pub g01: Hermitian,
    pub g00: Hermitian,
}

impl JointCandidate {
    pub fn blocks(&self) -> [&Hermitian; 4] {
        [&self.g11, &self.g10, &self.g01, &self.g00]
    }

    /// Largest entrywise violation of the three marginal equalities.
    pub fn equality_residual(&self, m: &Effect, n: &Effect) -> f64 {
        let dim = m.dim();
        let r1 = self.g11.add(&self.g10).max_abs_diff(m.op());
        let r2 = self.g11.add(&self.g01).max_abs_diff(n.op());
        let total = self.g11.add(&self.g10).add(&self.g01).add(&self.g00);
        let r3 = total.max_abs_diff(&Matrix::identity(dim));
        r1.max(r2).max(r3)
    }

    /// Smallest eigenvalue of each `G_ij + mu a_ij I`, in block order.
    pub fn shifted_min_eigs(&self, mu: f64, a: &DeformationMatrix) -> [f64; 4] {
        let w = a.block_weights();
        let b = self.blocks();
        std::array::from_fn(|k| b[k].shift(mu * w[k]).min_eig())
    }
}

/// `(1 - lambda) M + lambda (1 + b)/2 I`.
pub fn deform_noise(m: &Effect, noise: NoiseParams) -> Effect {
    let (p1, _) = noise.probabilities();
    let lam = noise.lambda();
    Effect(m.op().scale(1.0 - lam).shift(lam * p1))
}

/// `(1 - lambda) M + lambda tr(M)/d I`: the completely depolarizing channel
/// mixed in with weight `lambda`.
pub fn deform_depolarize(m: &Effect, lambda: f64) -> Result<Effect> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
    }
    let avg = m.op().trace() / m.dim() as f64;
    Ok(Effect(m.op().scale(1.0 - lambda).shift(lambda * avg)))
}

/// Heisenberg-picture channel `M -> sum_i K_i^dagger M K_i`.
///
/// The Kraus set must satisfy `sum_i K_i^dagger K_i = I` within `1e-9`.
pub fn apply_channel(kraus: &[Matrix], m: &Effect) -> Result<Effect> {
    let dim = m.dim();
    if kraus.is_empty() {
        return Err(Error::InvalidParameter("empty Kraus set".into()));
    }
    let mut norm = Matrix::zeros(dim);
    let mut out = Matrix::zeros(dim);
    for k in kraus {
        check_dim(dim, k.dim())?;
        let kd = k.adjoint();
        norm = &norm + &(&kd * k);
        out = &out + &(&(&kd * m.op().matrix()) * k);
    }
    let residual = norm.max_abs_diff(&Matrix::identity(dim));
    if residual > 1e-9 {
        return Err(Error::NonUnital(residual));
    }
    Effect::new(Hermitian::symmetrize(out))
}

/// Blocks `(G, M - G, N - G, I - M - N + G)`; the marginal equalities hold by
/// construction for any Hermitian `G`.
pub fn joint_from_free_block(g: &Hermitian, m: &Effect, n: &Effect) -> Result<JointCandidate> {
    check_dim(m.dim(), n.dim())?;
    check_dim(m.dim(), g.dim())?;
    let dim = m.dim();
    Ok(JointCandidate {
        g11: g.clone(),
        g10: m.op().sub(g),
        g01: n.op().sub(g),
        g00: Hermitian::identity(dim).sub(m.op()).sub(n.op()).add(g),
    })
}

/// Rank-one qubit projection `(I + sin(theta) sx + cos(theta) sz) / 2`.
pub fn qubit_projector(theta: f64) -> Effect {
    let (s, c) = theta.sin_cos();
    Effect(
        sigma_x()
            .scale(s)
            .add(&sigma_z().scale(c))
            .shift(1.0)
            .scale(0.5),
    )
}

/// Qubit effect `(alpha I + m . sigma) / 2`; requires `|m| <= min(alpha, 2 - alpha)`.
pub fn effect_from_bloch(alpha: f64, m: [f64; 3]) -> Result<Effect> {
    let len = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if !len.is_finite() || len > alpha.min(2.0 - alpha) + EFFECT_TOL {
        return Err(Error::InvalidParameter(format!(
            "Bloch data (alpha {alpha}, |m| {len}) is not an effect"
        )));
    }
    let op = sigma_x()
        .scale(m[0])
        .add(&sigma_y().scale(m[1]))
        .add(&sigma_z().scale(m[2]))
        .shift(alpha)
        .scale(0.5);
    Effect::new(op)
}

/// Bloch data `(alpha, m)` with `alpha = tr E`, `m_k = tr(E sigma_k)`.
pub fn bloch_of(e: &Effect) -> Result<(f64, [f64; 3])> {
    check_dim(2, e.dim())?;
    let op = e.op().matrix();
    let tr = |s: &Hermitian| (op * s.matrix()).trace().re;
    Ok((e.op().trace(), [tr(&sigma_x()), tr(&sigma_y()), tr(&sigma_z())]))
}

/// Kraus operators of the completely dephasing channel in the computational basis.
pub fn dephasing_kraus(dim: usize) -> Vec<Matrix> {
    (0..dim)
        .map(|i| {
            let mut k = Matrix::zeros(dim);
            k[(i, i)] = Complex64::new(1.0, 0.0);
            k
        })
        .collect()
}

/// Kraus operators of `rho -> (1 - lambda) rho + lambda I/d`, using the
/// generalized Pauli (clock and shift) basis.
pub fn depolarizing_kraus(dim: usize, lambda: f64) -> Vec<Matrix> {
    let d = dim as f64;
    let omega = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d);
    let mut out = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        for z in 0..dim {
            let weight = if x == 0 && z == 0 {
                1.0 - lambda + lambda / (d * d)
            } else {
                lambda / (d * d)
            };
            // shift^x clock^z
            let k = Matrix::from_fn(dim, |r, c| {
                if r == (c + x) % dim {
                    omega(c * z % dim)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            out.push(k.scale(weight.sqrt()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, Hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn eig_close(e: &Effect, want: &[f64]) {
        let ev = e.op().eigenvalues();
        for (x, y) in ev.iter().zip(want) {
            assert!((x - y).abs() < 1e-12, "{ev:?} vs {want:?}");
        }
    }

    #[test]
    fn effect_validation() {
        assert!(Effect::new(Hermitian::diag(&[0.0, 1.0])).is_ok());
        assert!(matches!(
            Effect::new(Hermitian::diag(&[-1e-3, 1.0])),
            Err(Error::InvalidEffect(_))
        ));
        let clamped = Effect::new(Hermitian::diag(&[-1e-12, 1.0 + 1e-12])).unwrap();
        eig_close(&clamped, &[0.0, 1.0]);
        assert!(clamped.op().min_eig() >= 0.0);
    }

    #[test]
    fn noise_endpoints() {
        let m = qubit_projector(0.3);
        let same = deform_noise(&m, NoiseParams::new(0.0, 0.4).unwrap());
        assert!(same.op().max_abs_diff(m.op()) < 1e-15);
        let triv = deform_noise(&m, NoiseParams::new(1.0, 0.4).unwrap());
        assert!(triv.op().max_abs_diff(&Matrix::identity(2).scale(0.7)) < 1e-15);
        let half = deform_noise(&qubit_projector(0.0), NoiseParams::new(0.5, 0.0).unwrap());
        eig_close(&half, &[0.25, 0.75]);
        assert!(NoiseParams::new(1.5, 0.0).is_err());
        assert!(NoiseParams::new(0.5, -1.5).is_err());
    }

    #[test]
    fn noise_composes_with_same_bias() {
        let m = qubit_projector(1.1);
        let (l1, l2, b) = (0.2, 0.35, -0.3);
        let twice = deform_noise(
            &deform_noise(&m, NoiseParams::new(l1, b).unwrap()),
            NoiseParams::new(l2, b).unwrap(),
        );
        let once = deform_noise(&m, NoiseParams::new(1.0 - (1.0 - l1) * (1.0 - l2), b).unwrap());
        assert!(twice.op().max_abs_diff(once.op()) < 1e-15);
    }

    #[test]
    fn depolarize_matches_unbiased_noise_for_rank_one_qubit() {
        let m = qubit_projector(0.9);
        for lam in [0.0, 0.3, 1.0] {
            let dep = deform_depolarize(&m, lam).unwrap();
            let noisy = deform_noise(&m, NoiseParams::new(lam, 0.0).unwrap());
            assert!(dep.op().max_abs_diff(noisy.op()) < 1e-15);
        }
        let full = deform_depolarize(&m, 1.0).unwrap();
        assert!(full.op().max_abs_diff(&Matrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Effect::new(Hermitian::diag(&[0.1, 0.5, 0.9])).unwrap();
        let u = random_unitary(3, &mut rng);
        let rotated = apply_channel(std::slice::from_ref(&u), &m).unwrap();
        eig_close(&rotated, &[0.1, 0.5, 0.9]);
        assert!(rotated.op().max_abs_diff(m.op().conjugate_by(&u).matrix()) < 1e-12);

        let lam = 0.37;
        let via_kraus = apply_channel(&depolarizing_kraus(3, lam), &m).unwrap();
        let direct = deform_depolarize(&m, lam).unwrap();
        assert!(via_kraus.op().max_abs_diff(direct.op()) < 1e-12);

        let dephased = apply_channel(&dephasing_kraus(2), &qubit_projector(PI / 2.0)).unwrap();
        assert!(dephased.op().max_abs_diff(&Matrix::identity(2).scale(0.5)) < 1e-15);

        let bad = [Matrix::identity(3).scale(0.5)];
        assert!(matches!(apply_channel(&bad, &m), Err(Error::NonUnital(_))));
    }

    #[test]
    fn noise_commutes_with_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u1 = random_unitary(2, &mut rng);
        let u2 = random_unitary(2, &mut rng);
        let kraus = vec![u1.scale(0.6f64.sqrt()), u2.scale(0.4f64.sqrt())];
        let m = qubit_projector(0.8);
        let noise = NoiseParams::new(0.3, 0.6).unwrap();
        let lhs = apply_channel(&kraus, &deform_noise(&m, noise)).unwrap();
        let rhs = deform_noise(&apply_channel(&kraus, &m).unwrap(), noise);
        assert!(lhs.op().max_abs_diff(rhs.op()) < 1e-12);
    }

    #[test]
    fn free_block_parametrization() {
        let zero = Effect::zero(2);
        let j = joint_from_free_block(&Hermitian::zeros(2), &zero, &zero).unwrap();
        assert!(j.g00.max_abs_diff(&Matrix::identity(2)) == 0.0);

        // commuting projections: G = MN is a genuine joint POVM
        let m = Effect::new(Hermitian::diag(&[1.0, 1.0, 0.0, 0.0])).unwrap();
        let n = Effect::new(Hermitian::diag(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        let j = joint_from_free_block(&m.op().jordan_product(n.op()), &m, &n).unwrap();
        assert!(j.blocks().iter().all(|b| b.min_eig() >= -1e-15));

        let (m, n) = (qubit_projector(0.3), qubit_projector(2.0));
        let g = m.op().add(n.op()).scale(0.5);
        let j = joint_from_free_block(&g, &m, &n).unwrap();
        assert!(j.equality_residual(&m, &n) < 1e-15);
        assert!(joint_from_free_block(&Hermitian::zeros(3), &m, &n).is_err());
    }

    #[test]
    fn qubit_constructors() {
        assert!(qubit_projector(0.0).op().max_abs_diff(Hermitian::diag(&[1.0, 0.0]).matrix()) < 1e-16);
        let px = sigma_x().shift(1.0).scale(0.5);
        assert!(qubit_projector(PI / 2.0).op().max_abs_diff(px.matrix()) < 1e-16);
        assert!(qubit_projector(1.234).is_projection(1e-14));
        let e = effect_from_bloch(1.0, [0.0, 0.0, 1.0]).unwrap();
        assert!(e.op().max_abs_diff(qubit_projector(0.0).op()) < 1e-16);
        assert!(effect_from_bloch(0.5, [0.0, 0.6, 0.0]).is_err());
        let (alpha, m) = bloch_of(&effect_from_bloch(0.8, [0.1, -0.2, 0.3]).unwrap()).unwrap();
        assert!((alpha - 0.8).abs() < 1e-15);
        assert!((m[0] - 0.1).abs() < 1e-15 && (m[1] + 0.2).abs() < 1e-15 && (m[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn deformation_matrix() {
        let half = DeformationMatrix::new(0.5, 0.0, 0.5).unwrap();
        assert_eq!(half.bias(), 0.0);
        assert_eq!(DeformationMatrix::new(0.0, 0.0, 1.0).unwrap().bias(), 1.0);
        assert_eq!(DeformationMatrix::from_bias(0.2).unwrap().total(), 1.0);
        let a = DeformationMatrix::new(0.1, 0.2, 0.7).unwrap();
        assert_eq!(a.complemented().a00, 0.7);
        assert_eq!(a.entry(1, 0), 0.2);
        assert!(DeformationMatrix::new(-0.1, 0.0, 1.0).is_err());
    }
}
