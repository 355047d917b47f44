//! CHSH-type Bell operators and the dual witness for `I_a`.
//!
//! For `A_1 = I - 2N`, `A_2 = 2M - I`, the value
//!
//! ```text
//! sup  <psi| (B - I)/2 |psi> / <psi| I (x) S_a |psi>
//! ```
//!
//! over states and `-I <= B_1, B_2 <= I` equals `I_a(M, N)`, where `B` is the
//! Bell operator and `S_a = [a00 (I - B2) + a11 (I + B2) + 2 a01 I] / 2`.
//! Any attained ratio is therefore a lower bound; [`dual_value_lower`] finds
//! good ones by alternating maximization.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{random_hermitian, random_unit_vector, random_unitary, vec_norm, Hermitian, Matrix};
use crate::povm::{qubit_projector, DeformationMatrix, Effect};
use crate::qubit::theta_star;

const BOUND_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;
const DENOM_GUARD: f64 = 1e-12;
const DINKELBACH_TOL: f64 = 1e-10;
const DINKELBACH_MAX: usize = 50;
/// Independent seesaw starts per call.
pub const RESTARTS: u64 = 8;

/// Two dichotomic observables per party and a joint state.
#[derive(Clone, Debug)]
pub struct BellSetting {
    a1: Hermitian,
    a2: Hermitian,
    b1: Hermitian,
    b2: Hermitian,
    psi: Vec<Complex64>,
}

fn check_contraction(x: &Hermitian, name: &str) -> Result<()> {
    let ev = x.eigenvalues();
    let worst = (ev[0] + 1.0).min(1.0 - ev[ev.len() - 1]);
    if worst < -BOUND_TOL {
        return Err(Error::InvalidParameter(format!(
            "{name} must satisfy -I <= {name} <= I (violation {:.3e})",
            -worst
        )));
    }
    Ok(())
}

impl BellSetting {
    pub fn new(a1: Hermitian, a2: Hermitian, b1: Hermitian, b2: Hermitian, psi: Vec<Complex64>) -> Result<Self> {
        check_dim(a1.dim(), a2.dim())?;
        check_dim(b1.dim(), b2.dim())?;
        check_dim(a1.dim() * b1.dim(), psi.len())?;
        for (x, name) in [(&a1, "A1"), (&a2, "A2"), (&b1, "B1"), (&b2, "B2")] {
            check_contraction(x, name)?;
        }
        let norm = vec_norm(&psi);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm {norm} is not 1")));
        }
        Ok(Self { a1, a2, b1, b2, psi })
    }

    /// Alice's observables `A_1 = I - 2N`, `A_2 = 2M - I` for a measurement pair.
    pub fn alice_from_pair(m: &Effect, n: &Effect) -> Result<(Hermitian, Hermitian)> {
        check_dim(m.dim(), n.dim())?;
        Ok((n.op().scale(-2.0).shift(1.0), m.op().scale(2.0).shift(-1.0)))
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn b2(&self) -> &Hermitian {
        &self.b2
    }

    /// `<psi| B |psi>`.
    pub fn bell_value(&self) -> f64 {
        bell_operator(self).expectation(&self.psi)
    }

    /// `<psi|(B - I)|psi> / <psi| I (x) (I + b B_2) |psi>`, or `None` if the
    /// denominator vanishes.
    pub fn generalized_ratio(&self, b: f64) -> Option<f64> {
        let den_op = self.b2.scale(b).shift(1.0);
        let den = Hermitian::identity(self.a1.dim()).kron(&den_op).expectation(&self.psi);
        (den > DENOM_GUARD).then(|| (self.bell_value() - 1.0) / den)
    }
}

/// `B = [A1 (x) (B1 + B2) + A2 (x) (B1 - B2)] / 2`.
pub fn bell_operator(s: &BellSetting) -> Hermitian {
    let plus = s.b1.add(&s.b2);
    let minus = s.b1.sub(&s.b2);
    s.a1.kron(&plus).add(&s.a2.kron(&minus)).scale(0.5)
}

/// `S_a = [a00 (I - B2) + a11 (I + B2) + 2 a01 I] / 2`.
pub fn s_operator(b2: &Hermitian, a: &DeformationMatrix) -> Result<Hermitian> {
    check_contraction(b2, "B2")?;
    Ok(s_operator_unchecked(b2, a))
}

fn s_operator_unchecked(b2: &Hermitian, a: &DeformationMatrix) -> Hermitian {
    b2.scale(0.5 * (a.a11 - a.a00)).shift(0.5 * (a.a00 + a.a11 + 2.0 * a.a01))
}

/// `Tr_A[(X (x) I) |psi><psi|]`, so that `<psi|X (x) B|psi> = tr(B T)`.
fn reduced_coefficient(x: &Hermitian, psi: &[Complex64], db: usize) -> Hermitian {
    let da = x.dim();
    let mut t = Matrix::zeros(db);
    for j in 0..db {
        for jp in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..da {
                for k in 0..da {
                    acc += x[(i, k)] * psi[k * db + j] * psi[i * db + jp].conj();
                }
            }
            t[(j, jp)] = acc;
        }
    }
    Hermitian::symmetrize(t)
}

/// Unitary `sign(T)`, with `+1` on the kernel.
fn sign_operator(t: &Hermitian) -> Hermitian {
    t.map_spectrum(|x| if x >= 0.0 { 1.0 } else { -1.0 })
}

fn random_sign<R: Rng>(dim: usize, rng: &mut R) -> Hermitian {
    sign_operator(&random_hermitian(dim, rng))
}

/// State of one seesaw run.
struct Seesaw<'a> {
    a_plus: Hermitian,
    a_minus: Hermitian,
    a: &'a DeformationMatrix,
    d: usize,
    b1: Hermitian,
    b2: Hermitian,
    psi: Vec<Complex64>,
}

impl Seesaw<'_> {
    /// `X = (B - I)/2` and `Y = I (x) S_a`.
    fn operators(&self) -> (Hermitian, Hermitian) {
        let x = self
            .a_plus
            .kron(&self.b1)
            .add(&self.a_minus.kron(&self.b2))
            .scale(0.25)
            .shift(-0.5);
        let y = Hermitian::identity(self.d).kron(&s_operator_unchecked(&self.b2, self.a));
        (x, y)
    }

    fn ratio(&self) -> Option<f64> {
        let (x, y) = self.operators();
        let den = y.expectation(&self.psi);
        (den > DENOM_GUARD).then(|| x.expectation(&self.psi) / den)
    }

    /// Exact maximization of the ratio over states.
    ///
    /// In an eigenbasis of `Y` split into support `s` and kernel `k`, the
    /// kernel component is optimized in closed form, leaving the Schur
    /// complement `X_ss - X_sk X_kk^+ X_ks` against `Y_ss`.
    fn psi_step(&mut self) -> Result<()> {
        let (x, y) = self.operators();
        let spec = y.eig();
        let n = y.dim();
        let (support, kernel): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| spec.values[i] > DENOM_GUARD);
        if support.is_empty() {
            return Err(Error::NumericalFailure(
                "I (x) S_a vanishes: ratio unbounded along every direction".into(),
            ));
        }
        let v = &spec.vectors;
        let xv = &(&v.adjoint() * x.matrix()) * v;
        let block = |rows: &[usize], cols: &[usize]| -> Vec<Vec<Complex64>> {
            rows.iter().map(|&r| cols.iter().map(|&c| xv[(r, c)]).collect()).collect()
        };
        let (ns, nk) = (support.len(), kernel.len());
        let x_ss = block(&support, &support);
        let x_sk = block(&support, &kernel);

        // pseudo-inverse of X_kk on its negative-definite part
        let mut kk_pinv = Matrix::zeros(nk.max(1));
        if nk > 0 {
            let x_kk = Hermitian::symmetrize(Matrix::from_fn(nk, |r, c| xv[(kernel[r], kernel[c])]));
            kk_pinv = x_kk.map_spectrum(|e| if e < -DENOM_GUARD { 1.0 / e } else { 0.0 }).into_matrix();
        }
        // H = X_kk^+ X_ks, so the kernel part of psi is -H c
        let h: Vec<Vec<Complex64>> = (0..nk)
            .map(|r| {
                (0..ns)
                    .map(|c| (0..nk).map(|q| kk_pinv[(r, q)] * x_sk[c][q].conj()).sum())
                    .collect()
            })
            .collect();
        let inv_sqrt: Vec<f64> = support.iter().map(|&i| 1.0 / spec.values[i].sqrt()).collect();
        let k = Matrix::from_fn(ns, |p, q| {
            let schur: Complex64 = x_ss[p][q] - (0..nk).map(|r| x_sk[p][r] * h[r][q]).sum::<Complex64>();
            schur * inv_sqrt[p] * inv_sqrt[q]
        });
        let ks = Hermitian::symmetrize(k).eig();
        let c: Vec<Complex64> = (0..ns).map(|p| ks.vectors[(p, ns - 1)] * inv_sqrt[p]).collect();

        let mut coords = vec![Complex64::new(0.0, 0.0); n];
        for (p, &i) in support.iter().enumerate() {
            coords[i] = c[p];
        }
        for (r, &i) in kernel.iter().enumerate() {
            coords[i] = -(0..ns).map(|q| h[r][q] * c[q]).sum::<Complex64>();
        }
        let mut psi = v.apply(&coords);
        let norm = vec_norm(&psi);
        psi.iter_mut().for_each(|z| *z /= norm);
        self.psi = psi;
        Ok(())
    }

    fn b1_step(&mut self) {
        let t = reduced_coefficient(&self.a_plus, &self.psi, self.d);
        self.b1 = sign_operator(&t);
    }

    /// Dinkelbach iteration on `B2`, which enters both numerator and
    /// denominator.
    fn b2_step(&mut self) {
        let Some(mut r) = self.ratio() else { return };
        let t_num = reduced_coefficient(&self.a_minus, &self.psi, self.d).scale(0.25);
        let rho_b = reduced_coefficient(&Hermitian::identity(self.d), &self.psi, self.d);
        let t_den = rho_b.scale(0.5 * (self.a.a11 - self.a.a00));
        for _ in 0..DINKELBACH_MAX {
            let candidate = sign_operator(&t_num.sub(&t_den.scale(r)));
            let previous = std::mem::replace(&mut self.b2, candidate);
            match self.ratio() {
                Some(next) if next >= r => {
                    let done = next - r < DINKELBACH_TOL;
                    r = next;
                    if done {
                        break;
                    }
                }
                _ => {
                    self.b2 = previous;
                    break;
                }
            }
        }
    }
}

/// Best ratio and per-sweep objective history of every restart.
#[derive(Clone, Debug)]
pub struct SeesawOutcome {
    pub best: f64,
    pub histories: Vec<Vec<f64>>,
}

/// Runs [`RESTARTS`] seeded seesaws of at most `iters` sweeps each.
pub fn seesaw(m: &Effect, n: &Effect, a: &DeformationMatrix, iters: usize, seed: u64) -> Result<SeesawOutcome> {
    if a.is_zero() {
        return Err(Error::InvalidProgram("deformation matrix is all zero".into()));
    }
    let (a1, a2) = BellSetting::alice_from_pair(m, n)?;
    let d = m.dim();
    let mut best = f64::NEG_INFINITY;
    let mut histories = Vec::new();
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart));
        let mut run = Seesaw {
            a_plus: a1.add(&a2),
            a_minus: a1.sub(&a2),
            a,
            d,
            b1: random_sign(d, &mut rng),
            b2: random_sign(d, &mut rng),
            psi: random_unit_vector(d * d, &mut rng),
        };
        // a start with S_a = 0 has nothing to optimize over
        if run.operators().1.max_eig() <= DENOM_GUARD {
            run.b2 = run.b2.scale(-1.0);
        }
        let mut history = Vec::with_capacity(iters);
        let mut last = f64::NEG_INFINITY;
        for _ in 0..iters {
            run.psi_step()?;
            run.b1_step();
            run.b2_step();
            let value = run.ratio().unwrap_or(f64::NEG_INFINITY);
            history.push(value);
            if value - last < 1e-14 {
                break;
            }
            last = value;
        }
        best = best.max(history.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        histories.push(history);
    }
    Ok(SeesawOutcome { best, histories })
}

/// Lower bound on `I_a(M, N)` from the best witness the seesaw finds.
pub fn dual_value_lower(m: &Effect, n: &Effect, a: &DeformationMatrix, iters: usize, seed: u64) -> Result<f64> {
    Ok(seesaw(m, n, a, iters, seed)?.best)
}

/// `1 / (1 + sqrt(2 (1 - b^2)))`.
pub fn generalized_tsirelson_bound(b: f64) -> f64 {
    1.0 / (1.0 + (2.0 * (1.0 - b * b)).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct TsirelsonRow {
    pub b: f64,
    pub bound: f64,
    pub max_random: f64,
    pub max_seesaw: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TsirelsonReport {
    pub rows: Vec<TsirelsonRow>,
    pub samples: usize,
    pub violations: usize,
}

impl TsirelsonReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn random_contraction<R: Rng>(dim: usize, rng: &mut R) -> Hermitian {
    let u = random_unitary(dim, rng);
    let values: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Hermitian::diag(&values).conjugate_by(&u.adjoint())
}

/// Samples random settings (qubit and four-dimensional factors) against the
/// generalized Tsirelson bound on a grid of `b`, and adds the seesaw optimum
/// for the maximally incompatible qubit pair at each `b`.
pub fn tsirelson_check(samples: usize, seed: u64) -> Result<TsirelsonReport> {
    let grid: Vec<f64> = (-4..=4).map(|i| i as f64 / 4.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<TsirelsonRow> = grid
        .iter()
        .map(|&b| TsirelsonRow {
            b,
            bound: generalized_tsirelson_bound(b),
            max_random: f64::NEG_INFINITY,
            max_seesaw: f64::NEG_INFINITY,
        })
        .collect();
    let mut violations = 0;
    for s in 0..samples {
        let d = if s % 2 == 0 { 2 } else { 4 };
        let setting = BellSetting::new(
            random_contraction(d, &mut rng),
            random_contraction(d, &mut rng),
            random_contraction(d, &mut rng),
            random_contraction(d, &mut rng),
            random_unit_vector(d * d, &mut rng),
        )?;
        for row in rows.iter_mut() {
            if let Some(r) = setting.generalized_ratio(row.b) {
                row.max_random = row.max_random.max(r);
                if r > row.bound + 1e-8 {
                    violations += 1;
                }
            }
        }
    }
    for row in rows.iter_mut() {
        let a = DeformationMatrix::from_bias(row.b)?;
        let theta = theta_star(row.b).radians();
        let value = dual_value_lower(&qubit_projector(0.0), &qubit_projector(theta), &a, 200, seed)?;
        row.max_seesaw = value;
        if value > row.bound + 1e-8 {
            violations += 1;
        }
    }
    Ok(TsirelsonReport { rows, samples, violations })
}
