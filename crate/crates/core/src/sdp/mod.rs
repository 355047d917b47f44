//! The deformed joint-measurability program.
//!
//! `I_a(M, N)` is the least `mu >= 0` for which there are blocks `G_ij`
//! with `G_11 + G_10 = M`, `G_11 + G_01 = N`, `sum G_ij = I` and
//! `G_ij + mu a_ij I >= 0`. Feasibility at fixed `mu` is decided by an inner
//! max-min-eigenvalue problem over the free block `G = G_11`; the outer loop
//! bisects on `mu` using the certified bounds every inner solve produces.

mod barrier;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{commutator_norm, Hermitian, Matrix};
use crate::povm::{deform_depolarize, deform_noise, joint_from_free_block, DeformationMatrix, Effect, JointCandidate, NoiseParams};

use barrier::{solve_inner, BarrierOptions, InnerSolution, SIGNS};

/// Feasibility threshold on the inner value `t`.
pub const FEAS_TOL: f64 = 1e-8;
/// Default outer bisection tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default Newton budget for one inner solve.
pub const DEFAULT_MAX_ITER: usize = 2000;

const COMMUTING_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct IncompatProgram {
    pub m: Effect,
    pub n: Effect,
    pub a: DeformationMatrix,
    pub tol: f64,
    /// Newton steps allowed per inner solve.
    pub max_iter: usize,
}

impl IncompatProgram {
    pub fn new(m: Effect, n: Effect, a: DeformationMatrix) -> Result<Self> {
        check_dim(m.dim(), n.dim())?;
        Ok(Self { m, n, a, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `C_k^0`: the blocks of the joint at `G = 0`, in order `(11, 10, 01, 00)`.
    fn base_blocks(&self) -> [Matrix; 4] {
        let d = self.dim();
        let m = self.m.op().matrix();
        let n = self.n.op().matrix();
        [
            Matrix::zeros(d),
            m.clone(),
            n.clone(),
            &(&Matrix::identity(d) - m) - n,
        ]
    }

    fn shifted_blocks(&self, mu: f64) -> [Matrix; 4] {
        let w = self.a.block_weights();
        let base = self.base_blocks();
        std::array::from_fn(|k| base[k].shift(mu * w[k]))
    }

    fn barrier_options(&self, feas_tol: f64) -> BarrierOptions {
        BarrierOptions { feas_tol, gap_tol: 1e-11, max_newton: self.max_iter, early_exit: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleOnly,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct IncompatResult {
    pub mu_star: f64,
    /// Joint blocks admissible at `joint_mu <= mu_star + tol`.
    pub joint: JointCandidate,
    pub joint_mu: f64,
    /// Certified lower bound on `I_a` from the inner dual multipliers.
    pub dual_lower: f64,
    /// `joint_mu - dual_lower`.
    pub gap: f64,
    pub status: SolveStatus,
    /// Inner solves performed.
    pub evaluations: usize,
    pub newton_steps: usize,
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible { joint: JointCandidate, margin: f64 },
    Infeasible { margin: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Linear-in-`mu` lower bound read off a dual certificate at `mu`.
struct Evaluation {
    sol: InnerSolution,
    feasible: bool,
    /// Every `mu' < mu_lower` is infeasible.
    mu_lower: f64,
}

/// `feas_tol` is the threshold on `t`. The bisection uses `0`: near `mu*`
/// the slope of `t*(mu)` can be tiny, so any slack on `t` becomes a large
/// error in `mu`.
fn evaluate(prog: &IncompatProgram, mu: f64, warm: Option<&Hermitian>, feas_tol: f64) -> Result<Evaluation> {
    let c = prog.shifted_blocks(mu);
    let sol = solve_inner(&c, warm, &prog.barrier_options(feas_tol))
        .map_err(|e| Error::NumericalFailure(format!("inner solve at mu = {mu:.3e}: {e}")))?;
    let w = prog.a.block_weights();
    let slope: f64 = sol.z.iter().zip(w).map(|(z, wk)| wk * z.trace()).sum();
    let mu_lower = if slope > 1e-14 { mu - sol.dual_value / slope } else { f64::NEG_INFINITY };
    let feasible = sol.t_primal >= -feas_tol;
    Ok(Evaluation { sol, feasible, mu_lower })
}

/// `G = (MN + NM)/2`; an admissible product joint when `M` and `N` commute.
fn commuting_joint(m: &Effect, n: &Effect) -> Result<Option<JointCandidate>> {
    if commutator_norm(m.op(), n.op())? >= COMMUTING_TOL {
        return Ok(None);
    }
    let g = m.op().jordan_product(n.op());
    let joint = joint_from_free_block(&g, m, n)?;
    let ok = joint.blocks().iter().all(|b| b.min_eig() >= -FEAS_TOL);
    Ok(ok.then_some(joint))
}

/// Decides whether the blocks `G_ij + mu a_ij I` can all be made PSD.
pub fn feasible_at(mu: f64, prog: &IncompatProgram) -> Result<Feasibility> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 0")));
    }
    let ev = evaluate(prog, mu, None, FEAS_TOL)?;
    if ev.feasible {
        let joint = joint_from_free_block(&ev.sol.g, &prog.m, &prog.n)?;
        Ok(Feasibility::Feasible { joint, margin: ev.sol.t_primal })
    } else {
        Ok(Feasibility::Infeasible { margin: -ev.sol.t_primal })
    }
}

/// Whether `(M, N)` is jointly measurable, i.e. feasible at `mu = 0`.
pub fn compatible(m: &Effect, n: &Effect, max_iter: usize) -> Result<bool> {
    check_dim(m.dim(), n.dim())?;
    if commuting_joint(m, n)?.is_some() {
        return Ok(true);
    }
    let prog = IncompatProgram::new(m.clone(), n.clone(), DeformationMatrix::from_bias(0.0)?)?
        .with_max_iter(max_iter);
    Ok(evaluate(&prog, 0.0, None, FEAS_TOL)?.feasible)
}

/// Smallest `mu` making the joint built from `g` admissible, if any.
fn admissible_mu(prog: &IncompatProgram, g: &Hermitian) -> Option<f64> {
    let base = prog.base_blocks();
    let w = prog.a.block_weights();
    let mut mu: f64 = 0.0;
    for k in 0..4 {
        let lmin = Hermitian::symmetrize(&base[k] + &g.matrix().scale(SIGNS[k])).min_eig();
        if lmin >= -1e-12 {
            continue;
        }
        if w[k] <= 0.0 {
            return None;
        }
        mu = mu.max(-lmin / w[k]);
    }
    Some(mu)
}

fn zero_result(joint: JointCandidate) -> IncompatResult {
    IncompatResult {
        mu_star: 0.0,
        joint,
        joint_mu: 0.0,
        dual_lower: 0.0,
        gap: 0.0,
        status: SolveStatus::Optimal,
        evaluations: 0,
        newton_steps: 0,
    }
}

/// Computes `I_a(M, N)` by certified bisection.
pub fn solve_incompat(prog: &IncompatProgram) -> Result<IncompatResult> {
    if prog.a.is_zero() {
        return Err(Error::InvalidProgram("deformation matrix is all zero".into()));
    }
    check_dim(prog.m.dim(), prog.n.dim())?;
    if let Some(joint) = commuting_joint(&prog.m, &prog.n)? {
        return Ok(zero_result(joint));
    }

    let d = prog.dim();
    let m = prog.m.op();
    let n = prog.n.op();
    let candidates = [
        Hermitian::zeros(d),
        m.clone(),
        n.clone(),
        m.add(n).shift(-1.0),
    ];
    let (mut hi, mut g_hi) = candidates
        .iter()
        .filter_map(|g| admissible_mu(prog, g).map(|mu| (mu, g.clone())))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .ok_or_else(|| Error::InvalidProgram("no admissible starting point".into()))?;
    let w_max = prog.a.block_weights().into_iter().fold(0.0, f64::max);

    let mut evaluations = 0usize;
    let mut lo = 0.0f64;
    let mut dual_lower = f64::NEG_INFINITY;
    let mut status = SolveStatus::Optimal;

    let ev0 = evaluate(prog, 0.0, Some(&g_hi), FEAS_TOL)?;
    evaluations += 1;
    let mut newton_steps = ev0.sol.newton_steps;
    if ev0.feasible {
        let joint = joint_from_free_block(&ev0.sol.g, &prog.m, &prog.n)?;
        let mut r = zero_result(joint);
        r.evaluations = evaluations;
        r.newton_steps = newton_steps;
        return Ok(r);
    }
    lo = lo.max(ev0.mu_lower);
    dual_lower = dual_lower.max(ev0.mu_lower);
    let mut warm = ev0.sol.g.clone();
    // last infeasible and feasible evaluations: (mu, t_primal, G)
    let mut left = (0.0, ev0.sol.t_primal, ev0.sol.g);
    let mut right = (hi, 0.0, g_hi.clone());

    while hi - lo > prog.tol {
        let mid = 0.5 * (lo + hi);
        let ev = match evaluate(prog, mid, Some(&warm), 0.0) {
            Ok(ev) => ev,
            Err(_) => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };
        evaluations += 1;
        newton_steps += ev.sol.newton_steps;
        dual_lower = dual_lower.max(ev.mu_lower);
        warm = ev.sol.g.clone();
        if ev.feasible {
            // positive slack lets the same G work at a smaller mu
            let slack = ev.sol.t_primal.max(0.0);
            let shifted = if w_max > 0.0 { mid - slack / w_max } else { mid };
            if shifted < hi {
                hi = shifted;
                g_hi = ev.sol.g.clone();
            }
            right = (mid, ev.sol.t_primal, ev.sol.g);
        } else {
            lo = mid.max(ev.mu_lower);
            left = (mid, ev.sol.t_primal, ev.sol.g);
        }
        // t*(mu) is concave and the primal values are lower bounds, so the
        // chord root is admissible with the matching mixture of free blocks
        let (ml, tl, gl) = &left;
        let (mr, tr, gr) = &right;
        if *tl < 0.0 && *tr >= 0.0 && mr > ml {
            let theta = -tl / (tr - tl);
            let chord = ml + theta * (mr - ml);
            if chord < hi {
                hi = chord;
                g_hi = gl.scale(1.0 - theta).add(&gr.scale(theta));
            }
        }
        if lo > hi {
            // the tolerance-level decision and the certificate disagree
            lo = hi;
        }
    }

    let joint = joint_from_free_block(&g_hi, &prog.m, &prog.n)?;
    let mu_star = 0.5 * (lo + hi);
    let dual_lower = dual_lower.max(0.0).min(hi);
    let gap = hi - dual_lower;
    if status == SolveStatus::Optimal && gap > 10.0 * prog.tol {
        status = SolveStatus::FeasibleOnly;
    }
    Ok(IncompatResult {
        mu_star,
        joint,
        joint_mu: hi,
        dual_lower,
        gap,
        status,
        evaluations,
        newton_steps,
    })
}

/// Least `lambda` in `[lo, hi]` at which `compatible_at(lambda)` holds,
/// assuming a single switch from incompatible to compatible.
fn bisect_compat(mut lo: f64, mut hi: f64, tol: f64, compatible_at: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    if compatible_at(lo)? {
        return Ok(lo);
    }
    if !compatible_at(hi)? {
        return Err(Error::NumericalFailure(format!("not compatible at lambda = {hi}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if compatible_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `I_b^noise(M, N)`: least `lambda` making the noise-deformed pair
/// compatible. Independent of the deformed program at `mu > 0`.
pub fn solve_noise(m: &Effect, n: &Effect, b: f64, tol: f64, max_iter: usize) -> Result<f64> {
    check_dim(m.dim(), n.dim())?;
    NoiseParams::new(0.0, b)?;
    bisect_compat(0.0, 0.5, tol, |lam| {
        let noise = NoiseParams::new(lam, b)?;
        compatible(&deform_noise(m, noise), &deform_noise(n, noise), max_iter)
    })
}

/// `I_steer(M, N)`: least depolarizing weight making the pair compatible.
///
/// Monotonicity in `lambda` is checked on a sample grid before bisecting.
pub fn solve_steer(m: &Effect, n: &Effect, tol: f64, max_iter: usize) -> Result<f64> {
    check_dim(m.dim(), n.dim())?;
    let compatible_at = |lam: f64| -> Result<bool> {
        compatible(&deform_depolarize(m, lam)?, &deform_depolarize(n, lam)?, max_iter)
    };
    const SAMPLES: usize = 8;
    let flags: Vec<bool> = (0..=SAMPLES)
        .map(|i| compatible_at(i as f64 / SAMPLES as f64))
        .collect::<Result<_>>()?;
    if flags.windows(2).any(|w| w[0] && !w[1]) {
        return Err(Error::NumericalFailure(
            "compatibility is not monotone in the depolarizing weight".into(),
        ));
    }
    let first = flags.iter().position(|&f| f).ok_or_else(|| {
        Error::NumericalFailure("pair stays incompatible under full depolarization".into())
    })?;
    if first == 0 {
        return Ok(0.0);
    }
    let lo = (first - 1) as f64 / SAMPLES as f64;
    let hi = first as f64 / SAMPLES as f64;
    bisect_compat(lo, hi, tol, compatible_at)
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    /// Seesaw sweeps; `0` skips the seesaw.
    pub seesaw_iters: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { seesaw_iters: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub mu_star: f64,
    pub equality_residual: f64,
    /// `lambda_min(G_ij + mu a_ij I)` at `mu_star + tol`.
    pub psd_margins: [f64; 4],
    pub dual_lower: f64,
    pub ipm_gap: f64,
    pub seesaw_lower: Option<f64>,
    pub seesaw_gap: Option<f64>,
    pub violations: Vec<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Recomputes residuals, PSD margins and duality gaps for a result.
pub fn certify(result: &IncompatResult, prog: &IncompatProgram, opts: CertifyOptions) -> Result<CertificateReport> {
    let flag = 10.0 * prog.tol;
    let mut violations = Vec::new();

    let equality_residual = result.joint.equality_residual(&prog.m, &prog.n);
    if equality_residual > flag {
        violations.push(format!("marginal residual {equality_residual:.3e}"));
    }
    let psd_margins = result.joint.shifted_min_eigs(result.mu_star + prog.tol, &prog.a);
    for (k, &v) in psd_margins.iter().enumerate() {
        if v < -flag {
            violations.push(format!("block {k} has eigenvalue {v:.3e} at mu* + tol"));
        }
    }
    if result.dual_lower > result.mu_star + prog.tol {
        violations.push(format!(
            "dual bound {:.9} exceeds mu* {:.9}",
            result.dual_lower, result.mu_star
        ));
    }
    let ipm_gap = result.mu_star - result.dual_lower;
    if ipm_gap > flag {
        violations.push(format!("interior-point gap {ipm_gap:.3e}"));
    }

    let (seesaw_lower, seesaw_gap) = if opts.seesaw_iters > 0 {
        let lower = crate::chsh::dual_value_lower(&prog.m, &prog.n, &prog.a, opts.seesaw_iters, opts.seed)?;
        let gap = result.mu_star - lower;
        if lower > result.mu_star + flag {
            violations.push(format!("seesaw bound {lower:.9} exceeds mu* {:.9}", result.mu_star));
        }
        (Some(lower), Some(gap))
    } else {
        (None, None)
    };

    Ok(CertificateReport {
        mu_star: result.mu_star,
        equality_residual,
        psd_margins,
        dual_lower: result.dual_lower,
        ipm_gap,
        seesaw_lower,
        seesaw_gap,
        violations,
    })
}
