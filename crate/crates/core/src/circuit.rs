//! n-qubit circuits that realize projective pairs with prescribed angles.
//!
//! `M_0` measures only the last qubit (`|1><1|` on it). For every control
//! pattern `i` of the first `n - 1` qubits, the gadget
//! `W_i = X(i) CU_theta X(i)` applies a y-rotation to the last qubit exactly
//! on `span{|i0>, |i1>}`. The product `W` of all gadgets makes `(M_0, W^† M_0 W)`
//! a direct sum of qubit pairs with angles `theta_i`.
//!
//! Basis index convention: qubit 1 is the most significant bit, the measured
//! qubit the least significant, so block `i` holds indices `2i` and `2i + 1`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Hermitian, Matrix};
use crate::povm::Effect;
use crate::qubit::{imax, imax_inverse, inoise_qubit, QubitAngle};
use crate::spectral::{angle_spectrum, fidelity_angle, inoise_projective};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 10;
const AGREEMENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    n: usize,
    thetas: Vec<f64>,
}

impl CircuitSpec {
    /// `thetas[i]` is the angle for control pattern `i` (binary, first qubit
    /// most significant); there must be exactly `2^(n-1)` of them.
    pub fn new(n: usize, thetas: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let blocks = 1usize << (n - 1);
        if thetas.len() != blocks {
            return Err(Error::InvalidParameter(format!(
                "{n} qubits need {blocks} angles, got {}",
                thetas.len()
            )));
        }
        if let Some(t) = thetas.iter().find(|t| !(0.0..=FRAC_PI_2).contains(*t)) {
            return Err(Error::InvalidParameter(format!("angle {t} outside [0, pi/2]")));
        }
        Ok(Self { n, thetas })
    }

    /// `theta_i = (i + 1) (pi/2) / 2^(n-1)`: evenly spaced over `(0, pi/2]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let blocks = 1usize << (n - 1);
        let thetas = (0..blocks).map(|i| (i + 1) as f64 * FRAC_PI_2 / blocks as f64).collect();
        Self::new(n, thetas)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Gate {
    /// Pauli X on qubit `k` (0-based, 0 is the most significant).
    X(usize),
    /// `U_theta` on the last qubit, controlled on all others being `|1>`.
    ControlledRotation(f64),
}

/// `U_theta = exp(-i theta sigma_y / 2)`, real rotation `[[c, -s], [s, c]]`.
pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, -s], [s, c]]
}

/// Gate list of `W = prod_i W_i(theta_i)`, rightmost factor first.
///
/// `X` is applied to control qubit `k` when `i_k = 0`, which moves pattern
/// `i` onto the all-ones control pattern of `CU_theta`.
pub fn gate_sequence(spec: &CircuitSpec) -> Vec<Gate> {
    spec.thetas
        .iter()
        .enumerate()
        .flat_map(|(i, &theta)| gadget(spec.n, i, theta))
        .collect()
}

/// `W_i(theta) = X(i) CU_theta X(i)` for control pattern `i`.
pub fn gadget(n: usize, i: usize, theta: f64) -> Vec<Gate> {
    let controls = n - 1;
    let flips: Vec<usize> = (0..controls)
        .filter(|&k| (i >> (controls - 1 - k)) & 1 == 0)
        .collect();
    let mut gates: Vec<Gate> = flips.iter().map(|&k| Gate::X(k)).collect();
    gates.push(Gate::ControlledRotation(theta));
    gates.extend(flips.iter().rev().map(|&k| Gate::X(k)));
    gates
}

/// Multiplies out a gate list acting on `n` qubits.
///
/// X gates only permute the basis, so they are tracked as a bit mask and
/// folded into the controlled rotations, which touch two rows each.
pub fn simulate(n: usize, gates: &[Gate]) -> Result<Matrix> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    let dim = 1usize << n;
    // actual unitary = X(frame) * w
    let mut w = Matrix::identity(dim);
    let mut frame = 0usize;
    for gate in gates {
        match *gate {
            Gate::X(k) => {
                if k + 1 >= n {
                    return Err(Error::InvalidProgram(format!("X on qubit {k} is not a control qubit")));
                }
                frame ^= 1 << (n - 1 - k);
            }
            Gate::ControlledRotation(theta) => {
                // X_F CU X_F rotates the block whose controls equal ones ^ F
                let block_start = (dim - 2) ^ frame;
                let (r0, r1) = (block_start & !1, block_start | 1);
                let u = rotation(theta);
                for c in 0..dim {
                    let (a, b) = (w[(r0, c)], w[(r1, c)]);
                    w[(r0, c)] = a * u[0][0] + b * u[0][1];
                    w[(r1, c)] = a * u[1][0] + b * u[1][1];
                }
            }
        }
    }
    Ok(Matrix::from_fn(dim, |r, c| w[(r ^ frame, c)]))
}

/// The circuit unitary `W`.
pub fn circuit_unitary(spec: &CircuitSpec) -> Matrix {
    simulate(spec.n, &gate_sequence(spec)).expect("gate sequence built from a valid spec")
}

/// `M_0 = I^(n-1) (x) |1><1|`.
pub fn measured_projection(n: usize) -> Effect {
    let diag: Vec<f64> = (0..1usize << n).map(|i| (i & 1) as f64).collect();
    Effect::new(Hermitian::diag(&diag)).expect("diagonal 0/1")
}

/// `(M_0, W^† M_0 W)`.
pub fn build_measurement_pair(spec: &CircuitSpec) -> Result<(Effect, Effect)> {
    let m0 = measured_projection(spec.n);
    let w = circuit_unitary(spec);
    let n = m0.conjugate_by(&w);
    Ok((m0, n))
}

/// The 2x2 restriction of `w` to `span{|i0>, |i1>}`.
pub fn block_of(w: &Matrix, i: usize) -> [[Complex64; 2]; 2] {
    let (r0, r1) = (2 * i, 2 * i + 1);
    [[w[(r0, r0)], w[(r0, r1)]], [w[(r1, r0)], w[(r1, r1)]]]
}

/// `I_b^noise(M_0, W^† M_0 W)` from the spectrum of the full pair, checked
/// against the maximum of the qubit values over the blocks.
pub fn circuit_incompat(spec: &CircuitSpec, b: f64) -> Result<f64> {
    let (m0, n) = build_measurement_pair(spec)?;
    let spectral = inoise_projective(&m0, &n, b)?;
    let blockwise = spec
        .thetas
        .iter()
        .map(|&t| inoise_qubit(t, b))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
    if (spectral - blockwise).abs() > AGREEMENT_TOL {
        return Err(Error::Consistency(format!(
            "spectral value {spectral} differs from blockwise value {blockwise}"
        )));
    }
    Ok(spectral)
}

/// The bias `b >= 0` at which `(P_0, P_theta)` attains `imax(b)`, for each
/// angle of the spec. Inverts `cos(theta_b) = (1 - imax(b))^(-2)/2 - 1`,
/// i.e. `imax(b) = 1 - 1/(2 cos(theta/2))`.
pub fn maximal_bias_points(spec: &CircuitSpec) -> Result<Vec<f64>> {
    spec.thetas
        .iter()
        .map(|&t| {
            let target = 1.0 - 0.5 / (t / 2.0).cos();
            imax_inverse(target.clamp(imax(0.0), 0.5))
                .ok_or_else(|| Error::InvalidParameter(format!("no bias reaches angle {t}")))
        })
        .collect()
}

/// `sup_b [imax(b) - I_b^noise(M_0, W^† M_0 W)]` over `b_samples` evenly
/// spaced biases in `[0, 1]` (the value is even in `b`). The angles are read
/// off the built pair, not the spec.
pub fn circuit_deficit(spec: &CircuitSpec, b_samples: usize) -> Result<f64> {
    let (m0, n) = build_measurement_pair(spec)?;
    let angles = angle_spectrum(&m0, &n)?.angles;
    let steps = b_samples.max(2) - 1;
    let mut worst = 0.0f64;
    for k in 0..=steps {
        let b = k as f64 / steps as f64;
        let best = angles
            .iter()
            .map(|&t| inoise_qubit(t, b))
            .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
        worst = worst.max(imax(b) - best);
    }
    Ok(worst)
}

/// Angle of the rank-one pair obtained by measuring every qubit for
/// `|1...1>`: fixed by the fidelity `|<1...1|W|1...1>|`.
pub fn all_qubit_angle(spec: &CircuitSpec) -> Result<Option<QubitAngle>> {
    let w = circuit_unitary(spec);
    let dim = spec.dim();
    let mut ones = vec![Complex64::new(0.0, 0.0); dim];
    ones[dim - 1] = Complex64::new(1.0, 0.0);
    let image = w.apply(&ones);
    fidelity_angle(&ones, &image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eigh;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn spec_validation() {
        assert!(CircuitSpec::new(2, vec![0.1]).is_err());
        assert!(CircuitSpec::new(1, vec![2.0]).is_err());
        assert!(CircuitSpec::new(0, vec![]).is_err());
        assert!(CircuitSpec::new(2, vec![0.1, 0.2]).is_ok());
    }

    #[test]
    fn single_qubit() {
        let spec = CircuitSpec::new(1, vec![1.1]).unwrap();
        let (m, n) = build_measurement_pair(&spec).unwrap();
        let s = angle_spectrum(&m, &n).unwrap();
        assert!((s.angles[0] - 1.1).abs() < 1e-9);
    }

    #[test]
    fn blocks_carry_their_rotation() {
        let spec = CircuitSpec::new(3, vec![0.2, 0.7, 1.1, 1.5]).unwrap();
        let w = circuit_unitary(&spec);
        assert!(w.unitarity_defect() < 1e-10);
        for (i, &t) in spec.thetas().iter().enumerate() {
            let u = rotation(t);
            let blk = block_of(&w, i);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((blk[r][c] - Complex64::new(u[r][c], 0.0)).norm() < 1e-12);
                }
            }
        }
        // nothing leaks between blocks
        for r in 0..8 {
            for c in 0..8 {
                if r / 2 != c / 2 {
                    assert!(w[(r, c)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gadgets_commute() {
        let spec = CircuitSpec::new(3, vec![0.2, 0.7, 1.1, 1.5]).unwrap();
        let forward = simulate(3, &gate_sequence(&spec)).unwrap();
        let gates: Vec<Gate> = (0..4).rev().flat_map(|i| gadget(3, i, spec.thetas()[i])).collect();
        let backward = simulate(3, &gates).unwrap();
        assert!(forward.max_abs_diff(&backward) < 1e-15);
    }

    #[test]
    fn figure_circuit() {
        let spec = CircuitSpec::new(2, vec![FRAC_PI_2, FRAC_PI_4]).unwrap();
        let (m, n) = build_measurement_pair(&spec).unwrap();
        assert!(n.is_projection(1e-12));
        let s = angle_spectrum(&m, &n).unwrap();
        assert!((s.angles[0] - FRAC_PI_4).abs() < 1e-9);
        assert!((s.angles[1] - FRAC_PI_2).abs() < 1e-9);
        let v = circuit_incompat(&spec, 0.0).unwrap();
        assert!((v - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-9);
        let bs = maximal_bias_points(&spec).unwrap();
        assert!(bs[0].abs() < 1e-7);
        for &b in &bs {
            assert!((circuit_incompat(&spec, b).unwrap() - imax(b)).abs() < 1e-8);
        }
    }

    #[test]
    fn small_angles_push_bias_to_one() {
        let spec = CircuitSpec::new(1, vec![1e-3]).unwrap();
        assert!(maximal_bias_points(&spec).unwrap()[0] > 0.999);
    }

    #[test]
    fn all_qubit_measurement_single_angle() {
        let spec = CircuitSpec::new(2, vec![0.4, 1.3]).unwrap();
        let w = circuit_unitary(&spec);
        let theta = all_qubit_angle(&spec).unwrap().unwrap();
        let p = Hermitian::diag(&[0.0, 0.0, 0.0, 1.0]);
        let m = Effect::new(p.clone()).unwrap();
        let n = Effect::new(p.conjugate_by(&w)).unwrap();
        let s = angle_spectrum(&m, &n).unwrap();
        assert_eq!(s.angles.len(), 1);
        assert!((s.angles[0] - theta.radians()).abs() < 1e-9);
        assert!(theta.radians() < PI);
        // sanity: a direct eigen solve sees the same rank-two structure
        let d = m.op().sub(n.op());
        let ev = jacobi_eigh(&(d.matrix() * d.matrix())).values;
        assert_eq!(ev.iter().filter(|&&x| x > 1e-9).count(), 2);
    }
}
