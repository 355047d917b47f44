//! Winning probabilities of the quantum player in each game scenario.

use std::f64::consts::FRAC_PI_2;

use incompat::game::*;
use incompat::povm::qubit_projector;

pub fn run() -> incompat::Result<()> {
    let a = scenario_controlled_bias(&qubit_projector(0.0), &qubit_projector(FRAC_PI_2))?;
    println!("controlled bias: j = {:.6}, LR needs {:.6}", a.j_value, a.threshold);
    let b = scenario_known_bias(0.6)?;
    println!("known bias 0.6: theta = {:.6}, LR needs {:.6}", b.qp_optimal_theta, b.threshold);
    println!("QP picks bias: LR needs {}", scenario_qp_bias().threshold);

    println!("unknown bias:");
    for lambda in [0.25, UNBIASED_THRESHOLD, 0.30, fair_noise(), 0.4, 0.5] {
        let r = scenario_unknown_bias(lambda)?;
        println!("  lambda {lambda:.6}  theta {:.4}  P(QP wins) {:.6}", r.qp_optimal_theta, r.p_qp_win);
    }

    let e = scenario_unknown_both(None, BiasPrior::UniformB)?;
    println!("unknown both, maximal resources: {:.7} (exact {:.7})", e.p_qp_win, maximal_resource_value());
    let best = optimal_fixed_angle(BiasPrior::UniformB, 1e-6)?;
    println!("unknown both, best single angle {:.6}: {:.7}", best.theta, best.p_qp_win);
    Ok(())
}

#[allow(dead_code)]
fn main() -> incompat::Result<()> {
    run()
}
