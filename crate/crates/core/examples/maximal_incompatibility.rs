//! For each bias there is one angle with the largest robustness `imax(b)`.
//! A coarse scan over angles finds it.

use std::f64::consts::PI;

use incompat::qubit::{chi, imax, inoise_qubit, theta_star};

pub fn run() -> incompat::Result<()> {
    println!("   b     imax(b)     grid max    argmax   theta*(b)");
    for b in [0.0, 0.3, 0.6, 0.9, 1.0] {
        let mut best = (0.0, 0.0);
        for k in 1..400 {
            let t = PI * k as f64 / 400.0;
            let v = inoise_qubit(t, b)?;
            if v > best.0 {
                best = (v, t);
            }
        }
        println!(
            "{b:5.2}  {:.8}  {:.8}  {:.4}  {:.4}",
            imax(b),
            best.0,
            best.1,
            theta_star(b).radians()
        );
    }
    println!("chi_0 = {}", chi(0.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
