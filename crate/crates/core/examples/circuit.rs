//! A two-qubit circuit realizes a projective pair whose angle spectrum is
//! `{pi/2, pi/4}`; its robustness at every bias is the larger of the two
//! qubit curves.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use incompat::circuit::{build_measurement_pair, circuit_deficit, circuit_incompat, gate_sequence, maximal_bias_points, CircuitSpec};
use incompat::qubit::imax;
use incompat::spectral::angle_spectrum;

pub fn run() -> incompat::Result<()> {
    let spec = CircuitSpec::new(2, vec![FRAC_PI_2, FRAC_PI_4])?;
    println!("gates: {:?}", gate_sequence(&spec));
    let (m, n) = build_measurement_pair(&spec)?;
    println!("angles: {:?}", angle_spectrum(&m, &n)?.angles);
    for b in [0.0, 0.5, 0.9, 1.0] {
        println!("b = {b:.1}: I = {:.6}  imax = {:.6}", circuit_incompat(&spec, b)?, imax(b));
    }
    println!("maximal at b = {:?}", maximal_bias_points(&spec)?);

    // more qubits fill the angle range more densely
    for q in 1..=5 {
        println!("n = {q}: sup_b deficit {:.6}", circuit_deficit(&CircuitSpec::uniform(q)?, 401)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
