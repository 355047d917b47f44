//! Depolarizing robustness of projective qubit pairs stays below 1/2 and
//! matches the unbiased noise robustness.

use incompat::povm::qubit_projector;
use incompat::qubit::inoise_qubit;
use incompat::sdp::{solve_steer, DEFAULT_MAX_ITER};

pub fn run() -> incompat::Result<()> {
    println!("theta   I_steer      I_0^noise");
    for theta in [0.3, 0.9, std::f64::consts::FRAC_PI_2, 2.4] {
        let s = solve_steer(&qubit_projector(0.0), &qubit_projector(theta), 1e-8, DEFAULT_MAX_ITER)?;
        println!("{theta:.3}  {s:.8}  {:.8}", inoise_qubit(theta, 0.0)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
