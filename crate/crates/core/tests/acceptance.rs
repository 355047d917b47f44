//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always print; exits non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use incompat::chsh::{dual_value_lower, tsirelson_check};
use incompat::circuit::{build_measurement_pair, circuit_deficit, circuit_incompat, CircuitSpec};
use incompat::game::{fair_noise, maximal_resource_value, scenario_unknown_both, scenario_unknown_bias, BiasPrior, UNBIASED_THRESHOLD};
use incompat::linalg::random_unitary;
use incompat::povm::{apply_channel, qubit_projector, DeformationMatrix, Effect};
use incompat::qubit::{
    bias_of, busch_compatible, chi, dlambda_db_sign, imax, inoise_max_biased_closed_form, inoise_qubit,
    inoise_unbiased_closed_form, theta_star, LinkFunction, Sign,
};
use incompat::sdp::{solve_incompat, solve_steer, IncompatProgram, DEFAULT_MAX_ITER};
use incompat::spectral::{inoise_projective, qp_robustness_deficit};

// pinned tolerances
const CLOSED_FORM_TOL: f64 = 1e-9;
const CLOSED_FORM_BUDGET_S: f64 = 1.0;
const SDP_ANALYTIC_TOL: f64 = 1e-6;
const SDP_GRID_BUDGET_S: f64 = 60.0;
const DUALITY_TOL: f64 = 1e-4;
const TSIRELSON_TOL: f64 = 1e-6;
const TSIRELSON_BOUND_SLACK: f64 = 1e-8;
const IMAX_TOL: f64 = 1e-6;
const ARGMAX_TOL: f64 = 5e-3;
const PROPERTY_TOL: f64 = 2e-6;
const CIRCUIT_TOL: f64 = 1e-8;
const FAIR_TOL: f64 = 1e-6;
const INTEGRAL_TOL: f64 = 1e-5;
const STEER_TOL: f64 = 1e-5;
const SOLVER_TOL: f64 = 1e-8;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn i_a(m: &Effect, n: &Effect, a: DeformationMatrix) -> f64 {
    let prog = IncompatProgram::new(m.clone(), n.clone(), a).unwrap().with_tol(SOLVER_TOL).unwrap();
    solve_incompat(&prog).unwrap().mu_star
}

fn unbiased_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for t in theta_grid(50) {
        worst = worst.max((inoise_qubit(t, 0.0).unwrap() - inoise_unbiased_closed_form(t)).abs());
    }
    let at_half = inoise_qubit(FRAC_PI_2, 0.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= CLOSED_FORM_TOL && (at_half - (1.0 - FRAC_1_SQRT_2)).abs() <= CLOSED_FORM_TOL && secs < CLOSED_FORM_BUDGET_S;
    (ok, format!("max err {worst:.2e}, I(pi/2, 0) = {at_half:.9}, {secs:.3} s"))
}

fn biased_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for t in theta_grid(50) {
        for b in [-1.0, 1.0] {
            worst = worst.max((inoise_qubit(t, b).unwrap() - inoise_max_biased_closed_form(t)).abs());
        }
    }
    let commuting = [0.0, PI]
        .iter()
        .flat_map(|&t| [-1.0, 1.0].map(|b| inoise_qubit(t, b).unwrap()))
        .chain([i_a(&qubit_projector(0.0), &qubit_projector(0.0), DeformationMatrix::from_bias(1.0).unwrap())])
        .collect::<Vec<_>>();
    let exact_zero = commuting.iter().all(|&v| v == 0.0);
    (worst <= CLOSED_FORM_TOL && exact_zero, format!("max err {worst:.2e}, commuting values {commuting:?}"))
}

fn sdp_analytic() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for t in theta_grid(10) {
        for b in linspace(-1.0, 1.0, 10) {
            let a = DeformationMatrix::from_bias(b).unwrap();
            let prog = IncompatProgram::new(qubit_projector(0.0), qubit_projector(t), a).unwrap();
            match solve_incompat(&prog) {
                Ok(res) => {
                    let via = LinkFunction::of(&a).unwrap().apply(res.mu_star);
                    worst = worst.max((via - inoise_qubit(t, bias_of(&a)).unwrap()).abs());
                }
                Err(_) => failures += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= SDP_ANALYTIC_TOL && failures == 0 && secs < SDP_GRID_BUDGET_S;
    (ok, format!("max |f_a(I_a) - I_b| {worst:.2e} over 100 points (b = +-1 included), {failures} failures, {secs:.1} s"))
}

fn strong_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut below = 0.0f64;
    let mut count = 0;
    while count < 20 {
        let m = common::sharp_qubit_effect(&mut rng);
        let n = common::sharp_qubit_effect(&mut rng);
        if busch_compatible(&m, &n).unwrap() {
            continue;
        }
        let a = common::random_a(&mut rng);
        let primal = i_a(&m, &n, a);
        let dual = dual_value_lower(&m, &n, &a, 300, count as u64).unwrap();
        worst = worst.max((primal - dual).abs());
        below = below.max(dual - primal);
        count += 1;
    }
    (worst <= DUALITY_TOL, format!("max |I_a - seesaw| {worst:.2e} on 20 incompatible qubit instances (max excess {below:.1e})"))
}

fn tsirelson() -> Outcome {
    let v = i_a(&qubit_projector(0.0), &qubit_projector(FRAC_PI_2), DeformationMatrix::new(0.5, 0.0, 0.5).unwrap());
    let err = (v - (2f64.sqrt() - 1.0)).abs();
    let report = tsirelson_check(400, 21).unwrap();
    let excess = report
        .rows
        .iter()
        .map(|r| r.max_random.max(r.max_seesaw) - r.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = err <= TSIRELSON_TOL && report.passed() && excess <= TSIRELSON_BOUND_SLACK;
    (ok, format!("|I - (sqrt2 - 1)| {err:.2e}, ratio {:.9}, {} settings, worst margin {excess:.2e}", 1.0 / (1.0 + v), report.samples))
}

fn maximal_incompatibility() -> Outcome {
    let grid: Vec<f64> = (1..20000).map(|k| PI * k as f64 / 20000.0).collect();
    let mut worst_val = 0.0f64;
    let mut worst_arg = 0.0f64;
    for b in [0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9, 1.0, -1.0] {
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for &t in &grid {
            let v = inoise_qubit(t, b).unwrap();
            if v > best {
                best = v;
                arg = t;
            }
        }
        worst_val = worst_val.max((best - imax(b)).abs());
        worst_arg = worst_arg.max((arg - theta_star(b).radians()).abs());
    }
    let chi0 = chi(0.0);
    let ok = worst_val <= IMAX_TOL && worst_arg <= ARGMAX_TOL && (chi0 - 0.5).abs() < 1e-12;
    (ok, format!("max |grid max - imax| {worst_val:.2e}, max |argmax - theta*| {worst_arg:.2e}, chi_0 = {chi0}"))
}

fn proposition_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();
    let mut ok = true;
    let mut record = |name: &str, err: f64, dims: &str| {
        ok &= err <= PROPERTY_TOL;
        notes.push(format!("{name} {err:.1e} ({dims})"));
    };

    let mut err = 0.0f64;
    for d in [2, 3, 4, 6] {
        let (m, n, a) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::random_a(&mut rng));
        err = err.max((i_a(&m, &n, a) - i_a(&n, &m, a)).abs());
    }
    record("symmetry", err, "d 2-6");

    let mut err = 0.0f64;
    for d in [2, 3, 5, 16] {
        let (m, n, a) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::random_a(&mut rng));
        let u = random_unitary(d, &mut rng);
        err = err.max((i_a(&m, &n, a) - i_a(&m.conjugate_by(&u), &n.conjugate_by(&u), a)).abs());
    }
    record("unitary", err, "d 2-16");

    let mut excess = 0.0f64;
    for d in [2, 3, 4] {
        let (m, n, a) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::random_a(&mut rng));
        let k = common::random_unital_channel(d, 3, &mut rng);
        let after = i_a(&apply_channel(&k, &m).unwrap(), &apply_channel(&k, &n).unwrap(), a);
        excess = excess.max(after - i_a(&m, &n, a));
    }
    record("channel", excess.max(0.0), "d 2-4");

    let mut excess = 0.0f64;
    for d in [2, 3] {
        let (m1, m2, n) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng));
        let a = common::random_a(&mut rng);
        let t = rng.random_range(0.2..0.8);
        let mix = Effect::new(m1.op().scale(t).add(&m2.op().scale(1.0 - t))).unwrap();
        excess = excess.max(i_a(&mix, &n, a) - i_a(&m1, &n, a).max(i_a(&m2, &n, a)));
    }
    record("convexity", excess.max(0.0), "d 2-3");

    let mut err = 0.0f64;
    for (d1, d2) in [(2, 3), (8, 8)] {
        let (m1, n1) = (common::sharp_effect(d1, &mut rng), common::sharp_effect(d1, &mut rng));
        let (m2, n2) = (common::sharp_effect(d2, &mut rng), common::sharp_effect(d2, &mut rng));
        let a = common::random_a(&mut rng);
        let whole = i_a(&m1.direct_sum(&m2), &n1.direct_sum(&n2), a);
        err = err.max((whole - i_a(&m1, &n1, a).max(i_a(&m2, &n2, a))).abs());
    }
    record("direct-sum", err, "d 5, 16");

    let mut err = 0.0f64;
    for (d, extra) in [(2, 2), (3, 3)] {
        let (m, n, a) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::random_a(&mut rng));
        let (vm, vn) = common::embed(&m, &n, extra, &mut rng);
        err = err.max((i_a(&vm, &vn, a) - i_a(&m, &n, a)).abs());
    }
    record("isometry", err, "d 2-6");

    let mut err = 0.0f64;
    for d in [2, 3, 4] {
        let (m, n, a) = (common::sharp_effect(d, &mut rng), common::sharp_effect(d, &mut rng), common::random_a(&mut rng));
        err = err.max((i_a(&m.complement(), &n.complement(), a) - i_a(&m, &n, a.complemented())).abs());
    }
    record("complement", err, "d 2-4");

    let mut err = 0.0f64;
    for (d, r1, r2) in [(4, 2, 2), (5, 2, 3), (16, 8, 8)] {
        let (m, n) = (common::random_projection(d, r1, &mut rng), common::random_projection(d, r2, &mut rng));
        let b = rng.random_range(-0.9..0.9);
        let a = DeformationMatrix::from_bias(b).unwrap();
        let via = LinkFunction::of(&a).unwrap().apply(i_a(&m, &n, a));
        err = err.max((via - inoise_projective(&m, &n, b).unwrap()).abs());
    }
    record("spectral", err, "d 4-16");

    (ok, notes.join(", "))
}

fn bias_monotonicity() -> Outcome {
    let bs = linspace(-1.0, 1.0, 30);
    let mut drops = 0;
    let mut sign_mismatch = 0;
    for t in theta_grid(30) {
        let vals: Vec<f64> = bs.iter().map(|&b| inoise_qubit(t, b).unwrap()).collect();
        for k in 0..bs.len() - 1 {
            // moving away from b = 0 never lowers the value
            let (inner, outer) = if bs[k + 1] > 0.0 { (k, k + 1) } else { (k + 1, k) };
            if bs[inner].abs() <= bs[outer].abs() && vals[outer] < vals[inner] - 1e-12 {
                drops += 1;
            }
        }
        for &b in &bs {
            if b.abs() >= 1.0 - 1e-9 {
                continue;
            }
            let h = 1e-5;
            let fd = (inoise_qubit(t, b + h).unwrap() - inoise_qubit(t, b - h).unwrap()) / (2.0 * h);
            let expected = Sign::of(b, 0.0);
            let got = Sign::of(fd, 1e-9);
            let library = dlambda_db_sign(t, b).unwrap();
            if got != expected || library != expected {
                sign_mismatch += 1;
            }
        }
    }
    (drops == 0 && sign_mismatch == 0, format!("{drops} decreases in |b|, {sign_mismatch} sign mismatches on 30x30"))
}

fn circuit_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut specs = vec![CircuitSpec::new(2, vec![FRAC_PI_2, PI / 4.0]).unwrap()];
    for n in [3, 4] {
        let thetas = (0..1 << (n - 1)).map(|_| rng.random_range(0.05..FRAC_PI_2)).collect();
        specs.push(CircuitSpec::new(n, thetas).unwrap());
    }
    let mut worst = 0.0f64;
    let mut errors = 0;
    for spec in &specs {
        let (m0, n) = build_measurement_pair(spec).unwrap();
        for b in linspace(-1.0, 1.0, 21) {
            let spectral = inoise_projective(&m0, &n, b).unwrap();
            let blockwise = spec.thetas().iter().map(|&t| inoise_qubit(t, b).unwrap()).fold(0.0, f64::max);
            worst = worst.max((spectral - blockwise).abs());
            if circuit_incompat(spec, b).is_err() {
                errors += 1;
            }
        }
    }
    let deficits: Vec<f64> = (2..=4).map(|n| circuit_deficit(&CircuitSpec::uniform(n).unwrap(), 401).unwrap()).collect();
    let decreasing = deficits.windows(2).all(|w| w[1] < w[0]);
    let ok = worst <= CIRCUIT_TOL && errors == 0 && decreasing;
    (ok, format!("max |spectral - blockwise| {worst:.2e} (n = 2, 3, 4), uniform deficits {deficits:.6?}"))
}

fn game_numbers() -> Outcome {
    let fair = scenario_unknown_bias(fair_noise()).unwrap().p_qp_win;
    let top = scenario_unknown_bias(UNBIASED_THRESHOLD).unwrap().p_qp_win;
    let bottom = scenario_unknown_bias(0.5).unwrap().p_qp_win;
    let integral = scenario_unknown_both(None, BiasPrior::UniformB).unwrap().p_qp_win;
    let exact = maximal_resource_value();
    // the exact form is (pi/2)(sqrt 2 - 1) = 0.6506451...; the rounded
    // decimal quoted alongside it (0.650614) is off by 3.1e-5
    let ok = (fair - 0.5).abs() <= FAIR_TOL && top == 1.0 && bottom == 0.0 && (integral - exact).abs() <= INTEGRAL_TOL;
    (
        ok,
        format!(
            "fair lambda {:.6} -> p {fair:.8}, p(1-1/sqrt2) = {top}, p(1/2) = {bottom}, integral {integral:.8} vs (pi/2)(sqrt2-1) = {exact:.8}",
            fair_noise()
        ),
    )
}

fn steering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    let mut largest = 0.0f64;
    for _ in 0..10 {
        let t = rng.random_range(0.1..PI - 0.1);
        let u = random_unitary(2, &mut rng);
        let (m, n) = (qubit_projector(0.0).conjugate_by(&u), qubit_projector(t).conjugate_by(&u));
        let s = solve_steer(&m, &n, SOLVER_TOL, DEFAULT_MAX_ITER).unwrap();
        largest = largest.max(s);
        worst = worst.max((s - inoise_qubit(t, 0.0).unwrap()).abs());
    }
    (largest <= 0.5 && worst <= STEER_TOL, format!("max I_steer {largest:.6}, max |I_steer - I_0| {worst:.2e}"))
}

fn qp_refinement() -> Outcome {
    let deficits: Vec<f64> = [32, 64, 128].iter().map(|&n| qp_robustness_deficit(n, 201).unwrap()).collect();
    let ok = deficits.windows(2).all(|w| w[1] <= w[0]);
    (ok, format!("sup_b deficit for N = 32, 64, 128: {deficits:.6?}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("unbiased closed form", unbiased_closed_form),
        ("maximally biased closed form", biased_closed_form),
        ("program vs analytic qubit values", sdp_analytic),
        ("strong duality via seesaw", strong_duality),
        ("Tsirelson special case", tsirelson),
        ("maximal incompatibility", maximal_incompatibility),
        ("monotone property suite", proposition_suite),
        ("bias monotonicity", bias_monotonicity),
        ("circuit equality and refinement", circuit_equality),
        ("game numbers", game_numbers),
        ("steering bound", steering),
        ("Q/P refinement", qp_refinement),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:2} {}: {name}: {detail} [{:.1} s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
