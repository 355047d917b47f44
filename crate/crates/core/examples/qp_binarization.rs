//! Sign-binarized position and momentum on a finite grid. Finer grids
//! fill in the angle spectrum and push the pair towards maximal robustness.

use incompat::spectral::{angle_spectrum, qp_binarization, qp_robustness_deficit};

pub fn run() -> incompat::Result<()> {
    println!("  N  angles  max gap  sup_b deficit");
    for size in [8, 16, 32, 64] {
        let (q, p) = qp_binarization(size)?;
        let s = angle_spectrum(&q, &p)?;
        println!("{size:3}  {:6}  {:.4}  {:.6}", s.angles.len(), s.max_gap(), qp_robustness_deficit(size, 201)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
