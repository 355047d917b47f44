//! Noise robustness of a qubit pair: closed forms, the root of the
//! compatibility polynomial, and the semidefinite program agree.

use std::f64::consts::PI;

use incompat::povm::{qubit_projector, DeformationMatrix};
use incompat::qubit::{f_a, inoise_max_biased_closed_form, inoise_qubit, inoise_unbiased_closed_form, LinkFunction};
use incompat::sdp::{solve_incompat, IncompatProgram};

pub fn run() -> incompat::Result<()> {
    let theta = PI / 3.0;
    println!("theta = pi/3");
    println!("  b = 0   root {:.9}  closed form {:.9}", inoise_qubit(theta, 0.0)?, inoise_unbiased_closed_form(theta));
    println!("  b = 1   root {:.9}  closed form {:.9}", inoise_qubit(theta, 1.0)?, inoise_max_biased_closed_form(theta));

    for b in [-0.8, -0.2, 0.4, 0.9] {
        let a = DeformationMatrix::from_bias(b)?;
        let prog = IncompatProgram::new(qubit_projector(0.0), qubit_projector(theta), a)?;
        let res = solve_incompat(&prog)?;
        let via_program = f_a(res.mu_star, LinkFunction::of(&a)?);
        println!(
            "  b = {b:+.1}  I_a {:.9}  f_a(I_a) {:.9}  direct {:.9}  ({:?})",
            res.mu_star,
            via_program,
            inoise_qubit(theta, b)?,
            res.status
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
