//! Command-line front end. Every command produces a [`Report`] that is
//! written as JSON (`"schema": 1`) or as a CSV table with a fixed header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{self, CircuitSpec};
use crate::error::{Error, Result};
use crate::game::{self, BiasPrior, GameConfig, Scenario};
use crate::linalg::{Hermitian, Matrix};
use crate::povm::{qubit_projector, DeformationMatrix, Effect};
use crate::qubit::{bias_of, imax, inoise_qubit, theta_star, LinkFunction};
use crate::sdp::{self, CertifyOptions, IncompatProgram, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::spectral;

pub const SCHEMA: u32 = 1;
const MAX_TOL: f64 = 1e-3;
const PROJ_TOL: f64 = 1e-9;
const ATTAINS_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "incompat", version, about = "Incompatibility of binary measurement pairs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Absolute tolerance of the outer bisections, in (0, 1e-3].
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Newton steps allowed per inner solve.
    #[arg(long = "max-iter", global = true, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,

    /// Seed for randomized steps (required by `compute`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the incompatibility program for a pair file.
    Compute(ComputeArgs),
    /// Tabulate the qubit noise robustness over an angle and bias grid.
    Scan(ScanArgs),
    /// Build the n-qubit circuit pair and compare with its qubit blocks.
    Circuit(CircuitArgs),
    /// Evaluate one scenario of the incompatibility game.
    Game(GameArgs),
    /// Binarized position/momentum pairs on finite grids.
    Qpdemo(QpArgs),
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// JSON file `{"M": matrix, "N": matrix}`.
    #[arg(long)]
    pair: PathBuf,
    /// Deformation matrix entries `a00,a01,a11`.
    #[arg(long, conflicts_with = "bias", allow_hyphen_values = true)]
    a: Option<String>,
    /// Noise bias `b`, i.e. `a = diag((1-b)/2, (1+b)/2)`. Default 0.
    #[arg(long, allow_hyphen_values = true)]
    bias: Option<f64>,
    /// Seesaw sweeps for the independent lower bound.
    #[arg(long, default_value_t = 200)]
    seesaw_iters: usize,
    /// Skip the depolarizing (steering) robustness.
    #[arg(long)]
    no_steer: bool,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Angles: `start:stop:count` or a comma list, inside (0, pi).
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// Biases: `start:stop:count` or a comma list, inside [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    b: String,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// Number of qubits.
    #[arg(long)]
    n: usize,
    /// `2^(n-1)` angles in [0, pi/2]; uniform over (0, pi/2] when omitted.
    #[arg(long)]
    thetas: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "-1:1:41")]
    b: String,
}

#[derive(Args, Debug)]
struct GameArgs {
    #[arg(long)]
    scenario: Scenario,
    /// LR's maximal noise, in (0, 1/2].
    #[arg(long)]
    lambda: Option<f64>,
    /// Announced bias (known-bias).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Fixed angle of QP's pair (unknown-both).
    #[arg(long)]
    theta: Option<f64>,
    /// Draw `b^2` instead of `b` uniformly (unknown-both).
    #[arg(long)]
    b_squared: bool,
    /// Also search the best fixed angle (unknown-both).
    #[arg(long)]
    optimize: bool,
    /// Projective pair file (controlled-bias); defaults to orthogonal qubit bases.
    #[arg(long)]
    pair: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QpArgs {
    /// Even grid sizes.
    #[arg(long, default_value = "32,64,128")]
    sizes: String,
    #[arg(long, default_value_t = 201)]
    b_samples: usize,
}

impl Scenario {
    fn parse_arg(s: &str) -> std::result::Result<Self, String> {
        s.parse().map_err(|e: Error| e.to_string())
    }
}

impl clap::builder::ValueParserFactory for Scenario {
    type Parser = fn(&str) -> std::result::Result<Scenario, String>;
    fn value_parser() -> Self::Parser {
        Scenario::parse_arg
    }
}

/// `{"dim": d, "re": [[..]], "im": [[..]]}`, row major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix) -> Self {
        Self { dim: m.dim(), re: m.re_rows(), im: m.im_rows() }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let m = Matrix::from_parts(&self.re, &self.im)?;
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim() });
        }
        Ok(m)
    }

    pub fn to_effect(&self) -> Result<Effect> {
        Effect::new(Hermitian::new(self.to_matrix()?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    #[serde(rename = "M")]
    pub m: MatrixJson,
    #[serde(rename = "N")]
    pub n: MatrixJson,
}

impl PairJson {
    pub fn from_effects(m: &Effect, n: &Effect) -> Self {
        Self { m: MatrixJson::from_matrix(m.op().matrix()), n: MatrixJson::from_matrix(n.op().matrix()) }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn effects(&self) -> Result<(Effect, Effect)> {
        let m = self.m.to_effect()?;
        let n = self.n.to_effect()?;
        if m.dim() != n.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: n.dim() });
        }
        Ok((m, n))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

/// Output of one command: a JSON body and the same data as a table.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "params": self.params,
            "result": self.result,
            "checks": self.checks,
            "passed": self.passed(),
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Grid syntax: `start:stop:count` (inclusive, evenly spaced) or `x,y,z`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("invalid grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, count] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        }
        [list] => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|x: &f64| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

fn parse_a(s: &str) -> Result<DeformationMatrix> {
    let v = parse_grid(s)?;
    match v.as_slice() {
        [a00, a01, a11] => DeformationMatrix::new(*a00, *a01, *a11),
        _ => Err(Error::InvalidParameter(format!("--a needs a00,a01,a11, got {s:?}"))),
    }
}

struct Settings {
    tol: f64,
    max_iter: usize,
    seed: Option<u64>,
}

/// Runs the parsed command and returns its report.
pub fn run(cli: &Cli) -> Result<Report> {
    if !(cli.tol > 0.0 && cli.tol <= MAX_TOL) {
        return Err(Error::InvalidParameter(format!("--tol {} outside (0, {MAX_TOL}]", cli.tol)));
    }
    let s = Settings { tol: cli.tol, max_iter: cli.max_iter.max(1), seed: cli.seed };
    match &cli.command {
        Command::Compute(args) => cmd_compute(args, &s),
        Command::Scan(args) => cmd_scan(args),
        Command::Circuit(args) => cmd_circuit(args),
        Command::Game(args) => cmd_game(args, &s),
        Command::Qpdemo(args) => cmd_qpdemo(args),
    }
}

fn cmd_compute(args: &ComputeArgs, s: &Settings) -> Result<Report> {
    let seed = s
        .seed
        .ok_or_else(|| Error::InvalidParameter("compute needs --seed (the seesaw bound is randomized)".into()))?;
    let pair = PairJson::load(&args.pair)?;
    let (m, n) = pair.effects()?;
    let a = match (&args.a, args.bias) {
        (Some(text), _) => parse_a(text)?,
        (None, b) => DeformationMatrix::from_bias(b.unwrap_or(0.0))?,
    };

    let prog = IncompatProgram::new(m.clone(), n.clone(), a)?
        .with_tol(s.tol)?
        .with_max_iter(s.max_iter);
    let res = sdp::solve_incompat(&prog)?;
    let cert = sdp::certify(&res, &prog, CertifyOptions { seesaw_iters: args.seesaw_iters, seed })?;
    let inoise = if a.is_zero() { 0.0 } else { LinkFunction::of(&a)?.apply(res.mu_star) };
    let b = bias_of(&a);

    let mut checks = vec![Check::new(
        "certificate",
        cert.passed(),
        if cert.passed() { "ok".to_string() } else { cert.violations.join("; ") },
    )];
    checks.push(Check::new(
        "solver-status",
        res.status == sdp::SolveStatus::Optimal,
        format!("{:?}, gap {:.3e}", res.status, res.gap),
    ));

    let projective = m.is_projection(PROJ_TOL) && n.is_projection(PROJ_TOL);
    let mut spectrum = Value::Null;
    if projective && !a.is_zero() {
        let angles = spectral::angle_spectrum(&m, &n)?;
        let spectral_value = spectral::inoise_projective(&m, &n, b)?;
        let diff = (spectral_value - inoise).abs();
        let tol = (20.0 * s.tol).max(1e-6);
        checks.push(Check::new(
            "spectral-agreement",
            diff <= tol,
            format!("program {inoise:.9}, spectral {spectral_value:.9}"),
        ));
        spectrum = json!({ "angles": angles.angles, "multiplicities": angles.multiplicities, "inoise": spectral_value });
    }
    let steer = if args.no_steer { None } else { Some(sdp::solve_steer(&m, &n, s.tol, s.max_iter)?) };

    let result = json!({
        "i_a": res.mu_star,
        "i_noise": inoise,
        "bias": b,
        "i_steer": steer,
        "dual_lower": res.dual_lower,
        "gap": res.gap,
        "status": res.status,
        "evaluations": res.evaluations,
        "newton_steps": res.newton_steps,
        "certificate": cert,
        "angle_spectrum": spectrum,
        "joint": res.joint.blocks().iter().map(|g| MatrixJson::from_matrix(g.matrix())).collect::<Vec<_>>(),
    });
    let row = vec![
        num(res.mu_star),
        num(inoise),
        steer.map(num).unwrap_or_default(),
        num(res.gap),
        format!("{:?}", res.status).to_lowercase(),
    ];
    Ok(Report {
        command: "compute",
        params: json!({
            "input": pair,
            "a": [a.a00, a.a01, a.a11],
            "tol": s.tol,
            "max_iter": s.max_iter,
            "seed": seed,
        }),
        result,
        checks,
        header: vec!["i_a", "i_noise", "i_steer", "gap", "status"],
        rows: vec![row],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub theta: f64,
    pub b: f64,
    pub inoise: f64,
    pub imax: f64,
    pub theta_star: f64,
    pub attains_max: bool,
}

/// `I_b^noise(P_0, P_theta)` on the product grid, in grid order.
pub fn scan_grid(thetas: &[f64], bs: &[f64]) -> Result<Vec<ScanRow>> {
    if let Some(t) = thetas.iter().find(|t| !(**t > 0.0 && **t < std::f64::consts::PI)) {
        return Err(Error::InvalidParameter(format!("angle {t} outside (0, pi)")));
    }
    if let Some(b) = bs.iter().find(|b| !(-1.0..=1.0).contains(*b)) {
        return Err(Error::InvalidParameter(format!("bias {b} outside [-1, 1]")));
    }
    let points: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| bs.iter().map(move |&b| (t, b))).collect();
    points
        .par_iter()
        .map(|&(theta, b)| {
            let inoise = inoise_qubit(theta, b)?;
            let top = imax(b);
            Ok(ScanRow {
                theta,
                b,
                inoise,
                imax: top,
                theta_star: theta_star(b).radians(),
                attains_max: (top - inoise).abs() <= ATTAINS_TOL,
            })
        })
        .collect()
}

fn cmd_scan(args: &ScanArgs) -> Result<Report> {
    let thetas = parse_grid(&args.theta)?;
    let bs = parse_grid(&args.b)?;
    let rows = scan_grid(&thetas, &bs)?;
    let worst = rows.iter().map(|r| r.inoise - r.imax).fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![Check::new("below-imax", worst <= 1e-12, format!("max excess {worst:.3e}"))];
    let table = rows
        .iter()
        .map(|r| {
            vec![num(r.theta), num(r.b), num(r.inoise), num(r.imax), num(r.theta_star), r.attains_max.to_string()]
        })
        .collect();
    Ok(Report {
        command: "scan",
        params: json!({ "theta": thetas, "b": bs }),
        result: json!({ "rows": rows }),
        checks,
        header: vec!["theta", "b", "inoise", "imax", "theta_star", "attains_max"],
        rows: table,
    })
}

fn cmd_circuit(args: &CircuitArgs) -> Result<Report> {
    let spec = match &args.thetas {
        Some(text) => CircuitSpec::new(args.n, parse_grid(text)?)?,
        None => CircuitSpec::uniform(args.n)?,
    };
    let bs = parse_grid(&args.b)?;
    let w = circuit::circuit_unitary(&spec);
    let (m0, n) = circuit::build_measurement_pair(&spec)?;
    let mut checks = Vec::new();

    let unitarity = w.unitarity_defect();
    checks.push(Check::new("unitary", unitarity < 1e-10, format!("defect {unitarity:.3e}")));
    let block_defect = spec
        .thetas()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let u = circuit::rotation(t);
            let blk = circuit::block_of(&w, i);
            (0..4).map(|k| (blk[k / 2][k % 2].re - u[k / 2][k % 2]).abs() + blk[k / 2][k % 2].im.abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("block-structure", block_defect < 1e-10, format!("defect {block_defect:.3e}")));

    let angles = spectral::angle_spectrum(&m0, &n)?;
    let mut expected: Vec<f64> = spec.thetas().iter().copied().filter(|&t| t > 1e-6).collect();
    expected.sort_by(f64::total_cmp);
    let got = angles.expanded();
    let spectrum_ok = got.len() == expected.len() && got.iter().zip(&expected).all(|(x, y)| (x - y).abs() < 1e-9);
    checks.push(Check::new("angle-spectrum", spectrum_ok, format!("{got:?}")));

    let mut rows = Vec::new();
    let mut agreement = true;
    for &b in &bs {
        match circuit::circuit_incompat(&spec, b) {
            Ok(v) => rows.push((b, v, imax(b))),
            Err(e) => {
                agreement = false;
                checks.push(Check::new("blockwise-agreement", false, format!("b = {b}: {e}")));
            }
        }
    }
    if agreement {
        checks.push(Check::new("blockwise-agreement", true, "spectral value equals block maximum"));
    }
    let peaks = circuit::maximal_bias_points(&spec)?;
    let peak_err = peaks
        .iter()
        .map(|&b| circuit::circuit_incompat(&spec, b).map(|v| (v - imax(b)).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::new("maximal-points", peak_err < 1e-8, format!("max |I - imax| {peak_err:.3e}")));

    Ok(Report {
        command: "circuit",
        params: json!({ "n": spec.n(), "thetas": spec.thetas(), "b": bs }),
        result: json!({
            "angles": angles.angles,
            "multiplicities": angles.multiplicities,
            "maximal_bias_points": peaks,
            "deficit": rows.iter().map(|r| r.2 - r.1).fold(0.0, f64::max),
            "rows": rows.iter().map(|r| json!({ "b": r.0, "inoise": r.1, "imax": r.2 })).collect::<Vec<_>>(),
        }),
        checks,
        header: vec!["b", "inoise", "imax"],
        rows: rows.iter().map(|r| vec![num(r.0), num(r.1), num(r.2)]).collect(),
    })
}

fn flatten(value: &Value) -> Vec<Vec<String>> {
    match value {
        Value::Object(map) => map
            .iter()
            .filter(|(_, v)| !v.is_object() && !v.is_array())
            .map(|(k, v)| vec![k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())])
            .collect(),
        _ => Vec::new(),
    }
}

fn cmd_game(args: &GameArgs, s: &Settings) -> Result<Report> {
    let config = args.lambda.map(|l| GameConfig::new(l, args.scenario)).transpose()?;
    let mut checks = Vec::new();
    let require = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("{} needs --{flag}", args.scenario)))
    };
    let mut result = match args.scenario {
        Scenario::ControlledBias => {
            let (m, n) = match &args.pair {
                Some(path) => PairJson::load(path)?.effects()?,
                None => (qubit_projector(0.0), qubit_projector(std::f64::consts::FRAC_PI_2)),
            };
            let r = game::scenario_controlled_bias(&m, &n)?;
            let residual = game::j_identity_residual(&m, &n)?;
            checks.push(Check::new("j-identity", residual < 1e-9, format!("|j + I_0 - 1| = {residual:.3e}")));
            let mut v = serde_json::to_value(&r)?;
            if let Some(c) = config {
                v["lr_wins"] = json!(r.lr_wins(c.lambda_lr()));
            }
            v
        }
        Scenario::KnownBias => {
            let r = game::scenario_known_bias(require(args.b, "b")?)?;
            let mut v = serde_json::to_value(&r)?;
            if let Some(c) = config {
                v["lr_wins"] = json!(c.lambda_lr() > r.threshold);
            }
            v
        }
        Scenario::QpBias => {
            let r = game::scenario_qp_bias();
            checks.push(Check::new("above-unbiased", r.threshold > imax(0.0), "1/2 > 1 - 1/sqrt 2"));
            serde_json::to_value(&r)?
        }
        Scenario::UnknownBias => {
            let lambda = require(args.lambda, "lambda")?;
            let r = game::scenario_unknown_bias(lambda)?;
            let inv = game::p_qp_win_by_inversion(lambda)?;
            let diff = (inv - r.p_qp_win).abs();
            checks.push(Check::new("inversion", diff < 1e-8, format!("closed form vs inverted imax: {diff:.3e}")));
            serde_json::to_value(&r)?
        }
        Scenario::UnknownBoth => {
            let prior = if args.b_squared { BiasPrior::UniformBSquared } else { BiasPrior::UniformB };
            let r = game::scenario_unknown_both(args.theta, prior)?;
            checks.push(Check::new(
                "dominated",
                r.p_qp_win <= r.p_max + 1e-9,
                format!("{} <= {}", r.p_qp_win, r.p_max),
            ));
            if prior == BiasPrior::UniformB {
                let diff = (r.p_max - game::maximal_resource_value()).abs();
                checks.push(Check::new("exact-maximum", diff < 1e-7, format!("|P - (pi/2)(sqrt 2 - 1)| = {diff:.3e}")));
            }
            let mut v = serde_json::to_value(&r)?;
            if args.optimize {
                let best = game::optimal_fixed_angle(prior, s.tol.max(1e-7))?;
                v["fixed_angle_theta"] = json!(best.theta);
                v["fixed_angle_p"] = json!(best.p_qp_win);
            }
            v
        }
    };
    result["scenario"] = json!(args.scenario);
    let rows = flatten(&result);
    Ok(Report {
        command: "game",
        params: json!({
            "scenario": args.scenario,
            "lambda": args.lambda,
            "b": args.b,
            "theta": args.theta,
            "b_squared": args.b_squared,
        }),
        result,
        checks,
        header: vec!["field", "value"],
        rows,
    })
}

fn cmd_qpdemo(args: &QpArgs) -> Result<Report> {
    let mut sizes: Vec<usize> = parse_grid(&args.sizes)?
        .into_iter()
        .map(|x| if x >= 2.0 && x.fract() == 0.0 { Ok(x as usize) } else { Err(Error::InvalidParameter(format!("grid size {x}"))) })
        .collect::<Result<_>>()?;
    sizes.sort_unstable();
    sizes.dedup();
    let rows: Vec<(usize, usize, f64, f64, f64)> = sizes
        .par_iter()
        .map(|&size| {
            let (q, p) = spectral::qp_binarization(size)?;
            let angles = spectral::angle_spectrum(&q, &p)?;
            let deficit = spectral::qp_robustness_deficit(size, args.b_samples)?;
            let i0 = spectral::inoise_projective(&q, &p, 0.0)?;
            Ok((size, angles.angles.len(), angles.max_gap(), deficit, i0))
        })
        .collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].3 <= w[0].3 + 1e-12);
    let checks = vec![Check::new(
        "deficit-non-increasing",
        monotone,
        format!("{:?}", rows.iter().map(|r| r.3).collect::<Vec<_>>()),
    )];
    Ok(Report {
        command: "qpdemo",
        params: json!({ "sizes": sizes, "b_samples": args.b_samples }),
        result: json!({
            "rows": rows.iter().map(|r| json!({
                "grid_size": r.0, "angles": r.1, "max_gap": r.2, "deficit": r.3, "inoise_unbiased": r.4,
            })).collect::<Vec<_>>(),
        }),
        checks,
        header: vec!["grid_size", "angles", "max_gap", "deficit", "inoise_unbiased"],
        rows: rows
            .iter()
            .map(|r| vec![r.0.to_string(), r.1.to_string(), num(r.2), num(r.3), num(r.4)])
            .collect(),
    })
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json())?;
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv()?,
    };
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
///
/// `0`: all checks passed, `1`: a consistency check failed, `2`: bad input
/// or a solver error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: {e}");
        return 2;
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    if report.passed() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-1,0.5").unwrap(), vec![-1.0, 0.5]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn scan_single_point() {
        let rows = scan_grid(&[std::f64::consts::FRAC_PI_2], &[0.0]).unwrap();
        assert!((rows[0].inoise - 0.292_893_218_813_452_5).abs() < 1e-9);
        assert!(rows[0].attains_max);
        assert!(scan_grid(&[0.0], &[0.0]).is_err());
        assert!(scan_grid(&[1.0], &[1.5]).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let e = qubit_projector(0.7);
        let js = MatrixJson::from_matrix(e.op().matrix());
        let text = serde_json::to_string(&js).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, js);
        assert_eq!(back.to_matrix().unwrap().max_abs_diff(e.op().matrix()), 0.0);
    }
}
