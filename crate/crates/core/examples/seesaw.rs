//! Lower bounds from Bell witnesses, found by alternating maximization,
//! meet the program value from above.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use incompat::chsh::seesaw;
use incompat::linalg::random_unitary;
use incompat::povm::{qubit_projector, DeformationMatrix, Effect};
use incompat::sdp::{solve_incompat, IncompatProgram};

pub fn run() -> incompat::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = DeformationMatrix::new(0.2, 0.1, 0.6)?;
    let u = random_unitary(3, &mut rng);
    let m = qubit_projector(0.4).direct_sum(&Effect::zero(1)).conjugate_by(&u);
    let n = qubit_projector(1.9).direct_sum(&Effect::identity(1));

    let res = solve_incompat(&IncompatProgram::new(m.clone(), n.clone(), a)?)?;
    let out = seesaw(&m, &n, &a, 200, 1)?;
    println!("program   {:.9}", res.mu_star);
    println!("seesaw    {:.9}", out.best);
    for (k, h) in out.histories.iter().enumerate().take(3) {
        println!("  restart {k}: {} sweeps, {:.9} -> {:.9}", h.len(), h[0], h[h.len() - 1]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
