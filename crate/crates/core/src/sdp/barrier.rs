//! Log-det barrier path following for the inner max-min-eigenvalue problem
//!
//! ```text
//! maximize t  over Hermitian G and real t
//! subject to F_k(G, t) = C_k + s_k G - t I >= 0,   k = 1..4
//! ```
//!
//! with `s = (+1, -1, -1, +1)`. `G` is handled through its coordinates in an
//! orthonormal basis of the real vector space of Hermitian matrices. Each
//! centering step is a damped Newton iteration on
//! `-tau t - sum_k log det F_k`; after centering, `Z_k = F_k^{-1} / tau` is
//! repaired into an exactly dual-feasible point, which turns the current
//! iterate into a certified bracket `t_primal <= t* <= dual_value`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::linalg::{cholesky, inverse_from_cholesky, spd_solve, Hermitian, Matrix};

pub(crate) const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

#[derive(Clone, Copy, Debug)]
pub(crate) struct BarrierOptions {
    /// Decision threshold on `t`.
    pub feas_tol: f64,
    /// Stop once the certified bracket on `t*` is narrower than this.
    pub gap_tol: f64,
    /// Total Newton iterations allowed.
    pub max_newton: usize,
    /// Stop as soon as the sign of `t* + feas_tol` is certified.
    pub early_exit: bool,
}

/// Outcome of one inner solve.
#[derive(Clone, Debug)]
pub(crate) struct InnerSolution {
    /// Free block of the best primal point.
    pub g: Hermitian,
    /// `min_k lambda_min(C_k + s_k G)` at that point: a lower bound on `t*`.
    pub t_primal: f64,
    /// Dual objective `sum_k tr(Z_k C_k)`: an upper bound on `t*`.
    pub dual_value: f64,
    /// Exactly dual-feasible multipliers (`Z_k >= 0`, `sum tr Z_k = 1`,
    /// `sum_k s_k Z_k = 0`).
    pub z: [Hermitian; 4],
    pub newton_steps: usize,
}

/// Coordinates of Hermitian matrices in the orthonormal basis
/// `E_pp`, `(E_pq + E_qp)/sqrt2`, `i(E_pq - E_qp)/sqrt2`.
#[derive(Clone, Debug)]
struct HermitianBasis {
    dim: usize,
    /// `(p, q, kind)`; kind 0 diagonal, 1 symmetric, 2 antisymmetric.
    elems: Vec<(usize, usize, u8)>,
}

impl HermitianBasis {
    fn new(dim: usize) -> Self {
        let mut elems = Vec::with_capacity(dim * dim);
        for p in 0..dim {
            elems.push((p, p, 0));
        }
        for p in 0..dim {
            for q in p + 1..dim {
                elems.push((p, q, 1));
                elems.push((p, q, 2));
            }
        }
        Self { dim, elems }
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    fn coords(&self, x: &Matrix) -> Vec<f64> {
        self.elems
            .iter()
            .map(|&(p, q, kind)| match kind {
                0 => x[(p, p)].re,
                1 => SQRT_2 * 0.5 * (x[(p, q)].re + x[(q, p)].re),
                _ => SQRT_2 * 0.5 * (x[(p, q)].im - x[(q, p)].im),
            })
            .collect()
    }

    fn matrix(&self, g: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        for (&(p, q, kind), &v) in self.elems.iter().zip(g) {
            match kind {
                0 => m[(p, p)] += v,
                1 => {
                    m[(p, q)] += v / SQRT_2;
                    m[(q, p)] += v / SQRT_2;
                }
                _ => {
                    m[(p, q)] += Complex64::new(0.0, v / SQRT_2);
                    m[(q, p)] -= Complex64::new(0.0, v / SQRT_2);
                }
            }
        }
        m
    }

    /// `S B_b S` for basis element `b`.
    fn sandwich(&self, s: &Matrix, b: usize, out: &mut Matrix) {
        let n = self.dim;
        let (p, q, kind) = self.elems[b];
        let entries: [(usize, usize, Complex64); 2] = match kind {
            0 => [
                (p, p, Complex64::new(1.0, 0.0)),
                (p, p, Complex64::new(0.0, 0.0)),
            ],
            1 => [
                (p, q, Complex64::new(1.0 / SQRT_2, 0.0)),
                (q, p, Complex64::new(1.0 / SQRT_2, 0.0)),
            ],
            _ => [
                (p, q, Complex64::new(0.0, 1.0 / SQRT_2)),
                (q, p, Complex64::new(0.0, -1.0 / SQRT_2)),
            ],
        };
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(r, c, v) in &entries {
                    acc += s[(i, r)] * v * s[(c, j)];
                }
                out[(i, j)] = acc;
            }
        }
    }
}

/// Blocks `C_k + s_k G - t I`.
fn blocks(c: &[Matrix; 4], g: &Matrix, t: f64) -> [Matrix; 4] {
    std::array::from_fn(|k| (&c[k] + &g.scale(SIGNS[k])).shift(-t))
}

fn interior(c: &[Matrix; 4], g: &Matrix, t: f64) -> bool {
    blocks(c, g, t).iter().all(|f| cholesky(f).is_some())
}

fn min_eig_all(c: &[Matrix; 4], g: &Matrix) -> f64 {
    c.iter()
        .zip(SIGNS)
        .map(|(ck, s)| Hermitian::symmetrize(ck + &g.scale(s)).min_eig())
        .fold(f64::INFINITY, f64::min)
}

/// Turns `F_k^{-1} / tau` into an exactly dual-feasible tuple.
fn repair_dual(s_inv: &[Matrix; 4], tau: f64) -> [Hermitian; 4] {
    let dim = s_inv[0].dim();
    let z: [Matrix; 4] = std::array::from_fn(|k| s_inv[k].scale(1.0 / tau));
    let mut resid = Matrix::zeros(dim);
    for k in 0..4 {
        resid = &resid + &z[k].scale(SIGNS[k]);
    }
    let mut z: [Hermitian; 4] =
        std::array::from_fn(|k| Hermitian::symmetrize(&z[k] - &resid.scale(SIGNS[k] * 0.25)));
    // a PSD matrix added to one block and to a block of opposite sign keeps
    // sum_k s_k Z_k = 0, so each negative part is moved onto a partner block
    let neg: [Hermitian; 4] = std::array::from_fn(|k| z[k].map_spectrum(|x| (-x).max(0.0)));
    const PARTNER: [usize; 4] = [1, 0, 3, 2];
    for k in 0..4 {
        z[k] = z[k].add(&neg[k]);
        z[PARTNER[k]] = z[PARTNER[k]].add(&neg[k]);
    }
    let total: f64 = z.iter().map(|zk| zk.trace()).sum();
    std::array::from_fn(|k| z[k].scale(1.0 / total))
}

pub(crate) fn dual_objective(z: &[Hermitian; 4], c: &[Matrix; 4]) -> f64 {
    z.iter()
        .zip(c)
        .map(|(zk, ck)| (zk.matrix() * ck).trace().re)
        .sum()
}

/// Maximizes `t` subject to `C_k + s_k G - t I >= 0`.
///
/// Returns early once the sign of `t*` relative to `-feas_tol` is certified.
/// `warm` seeds the free block.
pub(crate) fn solve_inner(
    c: &[Matrix; 4],
    warm: Option<&Hermitian>,
    opts: &BarrierOptions,
) -> Result<InnerSolution, String> {
    let dim = c[0].dim();
    let basis = HermitianBasis::new(dim);
    let m = basis.len();
    let n = m + 1;

    let mut g_coords = match warm {
        Some(g) => basis.coords(g.matrix()),
        None => vec![0.0; m],
    };
    let mut g = basis.matrix(&g_coords);
    let mut t = min_eig_all(c, &g) - 1.0;

    let mut tau = 1.0;
    let mut newton_steps = 0usize;
    let mut hess = vec![0.0; n * n];
    let mut grad = vec![0.0; n];
    let mut scratch = Matrix::zeros(dim);
    let mut best: Option<InnerSolution> = None;

    loop {
        // centering
        let mut centered = false;
        let mut s_inv: [Matrix; 4] = std::array::from_fn(|_| Matrix::zeros(dim));
        for stage_steps in 0..200 {
            if newton_steps >= opts.max_newton {
                return Err(format!("inner solver exceeded {} Newton steps", opts.max_newton));
            }
            newton_steps += 1;

            let f = blocks(c, &g, t);
            for k in 0..4 {
                let l = cholesky(&f[k]).ok_or("iterate left the interior")?;
                s_inv[k] = inverse_from_cholesky(&l);
            }

            hess.iter_mut().for_each(|h| *h = 0.0);
            let mut sum_signed = Matrix::zeros(dim);
            let mut sum_signed_sq = Matrix::zeros(dim);
            let mut tr_s = 0.0;
            let mut tr_s2 = 0.0;
            for k in 0..4 {
                let sk = &s_inv[k];
                let sk2 = sk * sk;
                sum_signed = &sum_signed + &sk.scale(SIGNS[k]);
                sum_signed_sq = &sum_signed_sq + &sk2.scale(SIGNS[k]);
                tr_s += sk.trace().re;
                tr_s2 += sk2.trace().re;
                for b in 0..m {
                    basis.sandwich(sk, b, &mut scratch);
                    let col = basis.coords(&scratch);
                    for a in 0..m {
                        hess[a * n + b] += col[a];
                    }
                }
            }
            let g_grad = basis.coords(&sum_signed);
            let gt = basis.coords(&sum_signed_sq);
            for a in 0..m {
                grad[a] = -g_grad[a];
                hess[a * n + m] = -gt[a];
                hess[m * n + a] = -gt[a];
            }
            grad[m] = -tau + tr_s;
            hess[m * n + m] = tr_s2;
            // symmetrize against round-off
            for a in 0..n {
                for b in a + 1..n {
                    let v = 0.5 * (hess[a * n + b] + hess[b * n + a]);
                    hess[a * n + b] = v;
                    hess[b * n + a] = v;
                }
            }

            let mut step: Vec<f64> = grad.iter().map(|x| -x).collect();
            if !spd_solve(&hess, n, &mut step) {
                // fall back to a lightly regularized system
                let mut reg = hess.clone();
                let diag_max = (0..n).map(|i| hess[i * n + i]).fold(0.0, f64::max);
                for i in 0..n {
                    reg[i * n + i] += 1e-12 * diag_max.max(1.0);
                }
                step = grad.iter().map(|x| -x).collect();
                if !spd_solve(&reg, n, &mut step) {
                    return Err("Newton system is not positive definite".into());
                }
            }
            let decrement: f64 = -grad.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if decrement < 1e-10 {
                centered = true;
                break;
            }

            // damped Newton step; stays interior for a self-concordant barrier
            let mut alpha = if decrement > 0.0625 { 1.0 / (1.0 + decrement.sqrt()) } else { 1.0 };
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = g_coords
                    .iter()
                    .zip(&step[..m])
                    .map(|(x, d)| x + alpha * d)
                    .collect();
                let t_trial = t + alpha * step[m];
                let g_trial = basis.matrix(&trial);
                if interior(c, &g_trial, t_trial) {
                    g_coords = trial;
                    g = g_trial;
                    t = t_trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || (stage_steps > 50 && decrement < 1e-6) {
                // round-off floor at this tau
                centered = true;
                break;
            }
        }
        if !centered && best.is_none() {
            return Err("centering did not converge".into());
        }

        let t_primal = min_eig_all(c, &g);
        let z = repair_dual(&s_inv, tau);
        let dual_value = dual_objective(&z, c);

        let mut sol = best.take().unwrap_or_else(|| InnerSolution {
            g: Hermitian::symmetrize(g.clone()),
            t_primal,
            dual_value,
            z: z.clone(),
            newton_steps,
        });
        // past the round-off floor the certificate gets worse, not better
        let degraded = dual_value > sol.dual_value + 1e-12;
        if t_primal > sol.t_primal {
            sol.t_primal = t_primal;
            sol.g = Hermitian::symmetrize(g.clone());
        }
        if dual_value < sol.dual_value {
            sol.dual_value = dual_value;
            sol.z = z;
        }
        sol.newton_steps = newton_steps;

        let certified = sol.t_primal >= -opts.feas_tol || sol.dual_value < -opts.feas_tol;
        let decided = (opts.early_exit && certified)
            || sol.dual_value - sol.t_primal <= opts.gap_tol
            || degraded
            || !centered
            || tau >= 1e13;
        if decided {
            return Ok(sol);
        }
        best = Some(sol);
        tau *= 10.0;
    }
}
