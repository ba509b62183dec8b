//! Command-line driver. Each subcommand runs one verification suite and
//! writes a JSON [`VerificationReport`]; the exit status is 0 when every
//! check passes, 1 on a numerical failure and 2 on a usage or input error.
//!
//! The suite functions are public so the same checks can be driven from
//! tests with the default parameters of each argument struct.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{
    i_pow, ramanujan_sum, ramanujan_sum_direct, salie_sum_direct, salie_sum_exact,
    salie_sum_exact_direct, salie_sum_oriented, sigma_twisted, zero_mode_constant,
    DirichletCharacterMod4N, HalfIntegralWeight, SalieSumInput, SymbolOrientation,
};
use crate::error::{Error, Result};
use crate::forms::{
    ingest_coefficients, random_gamma0, theta_cocycle_residual, theta_expansion, transform_check,
    QExpansion,
};
use crate::gammasolve::{
    common_root_filter, g_numeric_crosscheck, g_roots, table1_classify, ClassificationRow,
    ResidueRow, RESIDUE_ROWS,
};
use crate::special::bessel::{bessel_j, bessel_j_mellin_barnes};
use crate::special::gamma::GammaFactorSpec;
use crate::special::mellin::{
    chebyshev_v, chebyshev_v_weighted_integral, f_integral, f_lambda_mellin_check,
};
use crate::special::zeta::zeta_without;
use crate::special::PrecisionConfig;
use crate::trace::{
    geometric_side_batch, k_continued, k_direct, KCutoffs, KFunctionInput, TraceGeomInput,
};
use crate::twists::{
    default_hecke_panel, fe_residual, hecke_variant_check, OmegaMode, TwistFraction,
};

pub const REPORT_SCHEMA: u32 = 1;

/// One checked quantity. `pass` means `value <= tolerance + tail_estimate`
/// for an agreement check, or `value > tolerance` for a control that must
/// fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: Value,
    pub value: f64,
    pub tolerance: f64,
    pub tail_estimate: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl CheckRecord {
    pub fn within(
        name: impl Into<String>,
        inputs: Value,
        value: f64,
        tolerance: f64,
        tail: f64,
    ) -> Self {
        Self {
            name: name.into(),
            inputs,
            value,
            tolerance,
            tail_estimate: tail,
            pass: value <= tolerance + tail,
            detail: Value::Null,
        }
    }

    pub fn exceeds(name: impl Into<String>, inputs: Value, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            inputs,
            value,
            tolerance: threshold,
            tail_estimate: 0.0,
            pass: value > threshold,
            detail: Value::Null,
        }
    }

    /// An exact check, recorded as the number of mismatches against zero.
    pub fn exact(name: impl Into<String>, inputs: Value, mismatches: usize) -> Self {
        Self::within(name, inputs, mismatches as f64, 0.0, 0.0)
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub precision: PrecisionConfig,
    pub parameters: Value,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub config: ConfigEcho,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub csv: Option<String>,
}

impl VerificationReport {
    fn assemble(
        suite: &str,
        mut checks: Vec<CheckRecord>,
        cfg: &PrecisionConfig,
        parameters: Value,
        seed: u64,
        started: Instant,
    ) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Self {
            schema: REPORT_SCHEMA,
            suite: suite.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            config: ConfigEcho {
                precision: *cfg,
                parameters,
                seed,
            },
            wall_time_s: started.elapsed().as_secs_f64(),
            csv: None,
        }
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- gpoly

#[derive(Debug, Clone, Default, Args)]
pub struct GpolyArgs {
    /// Every tabulated row (the default when no row is given).
    #[arg(long)]
    pub all: bool,
    #[arg(long, requires_all = ["two_nu", "two_lambda"])]
    pub delta: Option<u8>,
    #[arg(long)]
    pub two_nu: Option<u32>,
    #[arg(long)]
    pub two_lambda: Option<u32>,
}

/// Tabulated coefficients as `(2·exponent, coefficient)` and closed-form
/// positive roots, per row of [`RESIDUE_ROWS`].
fn tabulated_g(row: &ResidueRow) -> Option<(Vec<(i64, &'static str)>, Vec<f64>)> {
    let s7 = 7f64.sqrt();
    let s15 = 15f64.sqrt();
    Some(match (row.delta, row.two_nu, row.two_lambda) {
        (1, 1, 9) => (
            vec![(1, "-1/2"), (-3, "3"), (-7, "-5/2")],
            vec![1.0, 5f64.sqrt()],
        ),
        (1, 1, 13) => (
            vec![(1, "-1/4"), (-3, "15/4"), (-7, "-35/4"), (-11, "21/4")],
            vec![1.0, (7.0 - 2.0 * s7).sqrt(), (7.0 + 2.0 * s7).sqrt()],
        ),
        (1, 5, 9) => (vec![(-3, "-2"), (-7, "2")], vec![1.0]),
        (3, 3, 11) => (
            vec![(-1, "-3/2"), (-5, "5"), (-9, "-7/2")],
            vec![1.0, (7.0f64 / 3.0).sqrt()],
        ),
        (3, 3, 15) => (
            vec![(-1, "-5/4"), (-5, "35/4"), (-9, "-63/4"), (-13, "33/4")],
            vec![
                1.0,
                ((15.0 - 2.0 * s15) / 5.0).sqrt(),
                ((15.0 + 2.0 * s15) / 5.0).sqrt(),
            ],
        ),
        (3, 7, 11) => (vec![(-5, "-2"), (-9, "2")], vec![1.0]),
        _ => return None,
    })
}

pub const ROOT_TOL: f64 = 1e-12;

pub fn suite_gpoly(args: &GpolyArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let custom = match (args.all, args.delta, args.two_nu, args.two_lambda) {
        (false, Some(delta), Some(two_nu), Some(two_lambda)) => Some(ResidueRow {
            delta,
            two_nu,
            two_lambda,
        }),
        _ => None,
    };
    let rows: Vec<ResidueRow> = match custom {
        Some(row) => vec![row],
        None => RESIDUE_ROWS.to_vec(),
    };
    let mut checks = Vec::new();
    let mut csv = String::from("delta,two_nu,two_lambda,G,roots\n");
    for row in &rows {
        let poly = row.polynomial()?;
        let roots = g_roots(&poly)?;
        let tag = format!("{}-{}-{}", row.delta, row.two_nu, row.two_lambda);
        let inputs =
            json!({"delta": row.delta, "two_nu": row.two_nu, "two_lambda": row.two_lambda});
        let root_text: Vec<String> = roots.iter().map(|r| format!("{r:.15}")).collect();
        csv.push_str(&format!(
            "{},{},{},\"{}\",\"{}\"\n",
            row.delta,
            row.two_nu,
            row.two_lambda,
            poly,
            root_text.join(" ")
        ));
        let detail = json!({"polynomial": poly.to_string(), "roots": roots});
        match tabulated_g(row) {
            Some((coeffs, expected_roots)) => {
                let got = poly.coefficients();
                let want: Vec<(i64, String)> =
                    coeffs.iter().map(|&(e, c)| (e, c.to_string())).collect();
                checks.push(
                    CheckRecord::exact(
                        format!("g-coefficients-{tag}"),
                        inputs.clone(),
                        usize::from(got != want),
                    )
                    .with_detail(detail.clone()),
                );
                let root_err = if roots.len() == expected_roots.len() {
                    roots
                        .iter()
                        .zip(&expected_roots)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                } else {
                    f64::INFINITY
                };
                checks.push(
                    CheckRecord::within(
                        format!("g-roots-{tag}"),
                        inputs.clone(),
                        root_err,
                        ROOT_TOL,
                        0.0,
                    )
                    .with_detail(json!({"expected": expected_roots, "found": roots})),
                );
            }
            None => checks.push(
                CheckRecord::within(
                    format!("g-at-one-{tag}"),
                    inputs.clone(),
                    poly.eval(1.0).abs(),
                    ROOT_TOL,
                    0.0,
                )
                .with_detail(detail),
            ),
        }
    }
    let mut groups: Vec<(u8, u32)> = match custom {
        Some(_) => Vec::new(),
        None => rows.iter().map(|r| (r.delta, r.two_nu)).collect(),
    };
    groups.dedup();
    for (delta, two_nu) in groups {
        let members: Vec<ResidueRow> = rows
            .iter()
            .copied()
            .filter(|r| r.delta == delta && r.two_nu == two_nu)
            .collect();
        let common = common_root_filter(&members)?;
        let err = if common.len() == 1 {
            (common[0] - 1.0).abs()
        } else {
            f64::INFINITY
        };
        checks.push(
            CheckRecord::within(
                format!("common-roots-{delta}-{two_nu}"),
                json!({"delta": delta, "two_nu": two_nu, "rows": members.len()}),
                err,
                ROOT_TOL,
                0.0,
            )
            .with_detail(json!({"common": common})),
        );
    }
    let mut report = VerificationReport::assemble(
        "gpoly",
        checks,
        cfg,
        json!({"rows": rows.len()}),
        0,
        started,
    );
    report.csv = Some(csv);
    Ok(report)
}

// ---------------------------------------------------------------- table1

#[derive(Debug, Clone, Default, Args)]
pub struct Table1Args {}

/// The tabulated classification per `2ν̄`: δ, largest forced pole, possible
/// poles, `P(s)` candidates and the resulting `2ν`.
fn tabulated_classification(two_nu_bar: u32) -> (u32, i64, Vec<i64>, Vec<&'static str>, Vec<u32>) {
    match two_nu_bar {
        1 => (3, -2, vec![-1], vec!["s", "s(s+1)"], vec![3, 7]),
        3 => (1, -2, vec![-1], vec!["s", "s(s+1)"], vec![1, 5]),
        5 => (3, -3, vec![-2], vec!["s(s+1)", "s(s+1)(s+2)"], vec![3, 7]),
        _ => (1, -3, vec![-2], vec!["s(s+1)", "s(s+1)(s+2)"], vec![1, 5]),
    }
}

pub fn suite_table1(_args: &Table1Args, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let mut csv = String::from("nu_bar,delta,forced_poles,possible_poles,P,nu\n");
    for two_nu_bar in [1u32, 3, 5, 7] {
        let row = table1_classify(HalfIntegralWeight::new(two_nu_bar)?)?;
        let (delta, forced, possible, ps, nus) = tabulated_classification(two_nu_bar);
        let p_text: Vec<String> = row
            .candidate_p
            .iter()
            .map(|r| ClassificationRow::describe_p(r))
            .collect();
        let nu_twice: Vec<u32> = row.candidate_nu.iter().map(|n| n.two_lambda()).collect();
        let mut mismatches = 0;
        mismatches += usize::from(row.delta as u32 != delta);
        mismatches += usize::from(row.forced_pole_max != forced);
        mismatches += usize::from(row.possible_poles != possible);
        mismatches += usize::from(p_text != ps);
        mismatches += usize::from(nu_twice != nus);
        let inputs = json!({"two_nu_bar": two_nu_bar});
        checks.push(
            CheckRecord::exact(format!("row-{two_nu_bar}"), inputs.clone(), mismatches)
                .with_detail(json!({
                    "delta": row.delta,
                    "forced_pole_max": row.forced_pole_max,
                    "possible_poles": row.possible_poles,
                    "P": p_text,
                    "two_nu": nu_twice,
                })),
        );
        let parity = nu_twice
            .iter()
            .filter(|&&t| t % 4 != row.delta as u32 % 4)
            .count();
        checks.push(CheckRecord::exact(
            format!("parity-{two_nu_bar}"),
            inputs,
            parity,
        ));
        let nu_text: Vec<String> = nu_twice.iter().map(|t| format!("{t}/2")).collect();
        csv.push_str(&format!(
            "{two_nu_bar}/2,{},n<={},{:?},{},{}\n",
            row.delta,
            row.forced_pole_max,
            row.possible_poles,
            p_text.join(" or "),
            nu_text.join(" or ")
        ));
    }
    let mut report = VerificationReport::assemble("table1", checks, cfg, json!({}), 0, started);
    report.csv = Some(csv);
    Ok(report)
}

// ---------------------------------------------------------------- sigma-check

#[derive(Debug, Clone, Args)]
pub struct SigmaArgs {
    /// Largest modulus q in the partial sums.
    #[arg(long, default_value_t = 100_000)]
    pub qmax: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

impl Default for SigmaArgs {
    fn default() -> Self {
        Self {
            qmax: 100_000,
            tolerance: 1e-8,
        }
    }
}

pub fn suite_sigma(args: &SigmaArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    for s in [Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.5)] {
        for four_n in [4u64, 8, 12] {
            let zeta_4n = zeta_without(2.0 * s, four_n)?;
            for n in -6i64..=6 {
                let mut partial = Complex64::new(0.0, 0.0);
                let mut q = four_n;
                while q <= args.qmax {
                    let r = ramanujan_sum(n, q);
                    if r != 0 {
                        partial += r as f64 * (-2.0 * s * (q as f64).ln()).exp();
                    }
                    q += four_n;
                }
                let closed = if n == 0 {
                    zero_mode_constant(s, four_n)?
                } else {
                    sigma_twisted(1.0 - 2.0 * s, n, four_n)? / zeta_4n
                };
                // |r(n;q)| <= gcd(n, q) <= |n|, and r(0;q) = φ(q) <= q.
                let qf = args.qmax as f64;
                let tail = if n == 0 {
                    qf.powf(2.0 - 4.0 * s.re) / ((4.0 * s.re - 2.0) * four_n as f64)
                } else {
                    n.unsigned_abs() as f64 * qf.powf(1.0 - 4.0 * s.re)
                        / ((4.0 * s.re - 1.0) * four_n as f64)
                };
                checks.push(
                    CheckRecord::within(
                        format!("sigma-4N{four_n:02}-n{n:+}-t{}", s.im),
                        json!({"four_n": four_n, "n": n, "s": cjson(s), "qmax": args.qmax}),
                        (partial - closed).norm(),
                        args.tolerance,
                        tail,
                    )
                    .with_detail(json!({"partial": cjson(partial), "closed": cjson(closed)})),
                );
            }
        }
    }
    Ok(VerificationReport::assemble(
        "sigma-check",
        checks,
        cfg,
        json!({"qmax": args.qmax, "tolerance": args.tolerance}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- salie

#[derive(Debug, Clone, Args)]
pub struct SalieArgs {
    #[arg(skip = 1000u64)]
    pub cmax: u64,
    /// Ramanujan sums are compared for `q <= qmax`, `|n| <= qmax`.
    #[arg(long, default_value_t = 500)]
    pub qmax: u64,
}

impl Default for SalieArgs {
    fn default() -> Self {
        Self {
            cmax: 1000,
            qmax: 500,
        }
    }
}

pub fn suite_salie(args: &SalieArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let characters = [
        ("trivial-4", DirichletCharacterMod4N::trivial(4)?),
        (
            "kronecker-12-24",
            DirichletCharacterMod4N::kronecker(12, 24)?,
        ),
        ("kronecker-m4-8", DirichletCharacterMod4N::kronecker(-4, 8)?),
    ];
    let pairs = [(1i64, 1i64), (3, 7), (0, 5), (-2, 9)];
    let round_off = 2f64.powi(-(cfg.working_precision as i32 - 8));
    for (label, chi) in &characters {
        for orientation in [SymbolOrientation::CoverA, SymbolOrientation::AoverC] {
            let mut mismatches = 0;
            let mut worst_float = 0.0f64;
            let mut compared = 0;
            let mut c = chi.modulus();
            while c <= args.cmax {
                for &(m, n) in &pairs {
                    for two_lambda in [1u32, 9] {
                        let input = SalieSumInput {
                            m,
                            n,
                            c,
                            chi: chi.clone(),
                            weight: HalfIntegralWeight::new(two_lambda)?,
                        };
                        let fast = salie_sum_exact(&input, orientation)?;
                        let slow = salie_sum_exact_direct(&input, orientation)?;
                        mismatches += usize::from(fast != slow);
                        let reversed: Vec<u64> = (0..c).rev().collect();
                        let direct = salie_sum_direct(&input, orientation, &reversed)?;
                        let float = salie_sum_oriented(&input, orientation)?;
                        worst_float = worst_float.max((direct - float).norm() / c as f64);
                        compared += 1;
                    }
                }
                c += chi.modulus();
            }
            let tag = format!("{label}-{orientation:?}");
            let inputs = json!({"character": label, "orientation": format!("{orientation:?}"), "cmax": args.cmax, "sums": compared});
            checks.push(CheckRecord::exact(
                format!("salie-exact-{tag}"),
                inputs.clone(),
                mismatches,
            ));
            checks.push(CheckRecord::within(
                format!("salie-order-{tag}"),
                inputs,
                worst_float,
                round_off,
                0.0,
            ));
        }
    }
    let q_max = args.qmax;
    let mut mismatches = 0;
    for q in 1..=q_max {
        for n in -(q_max as i64)..=q_max as i64 {
            mismatches += usize::from(ramanujan_sum(n, q) != ramanujan_sum_direct(n, q));
        }
    }
    checks.push(CheckRecord::exact(
        "ramanujan-exact",
        json!({"qmax": q_max, "nmax": q_max}),
        mismatches,
    ));
    Ok(VerificationReport::assemble(
        "salie",
        checks,
        cfg,
        json!({"cmax": args.cmax, "qmax": args.qmax}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- theta-cocycle

#[derive(Debug, Clone, Args)]
pub struct ThetaArgs {
    /// Number of random Γ0(4) matrices.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Lower-left entries are bounded by `4 · cmult`.
    #[arg(long, default_value_t = 10)]
    pub cmult: i64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

impl Default for ThetaArgs {
    fn default() -> Self {
        Self {
            count: 20,
            cmult: 10,
            tolerance: 1e-8,
        }
    }
}

pub fn suite_theta(
    args: &ThetaArgs,
    seed: u64,
    cfg: &PrecisionConfig,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let theta = theta_expansion(20_000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mats: Vec<_> = (0..args.count)
        .map(|_| random_gamma0(&mut rng, 4, args.cmult))
        .collect();
    for (k, &g) in mats.iter().enumerate() {
        let residual = transform_check(&theta, g, cfg)?;
        checks.push(CheckRecord::within(
            format!("theta-transform-{k:02}"),
            json!({"matrix": [g.0, g.1, g.2, g.3]}),
            residual,
            args.tolerance,
            0.0,
        ));
    }
    for (k, pair) in mats.windows(2).enumerate() {
        let residual = theta_cocycle_residual(pair[0], pair[1], cfg)?;
        checks.push(CheckRecord::within(
            format!("theta-cocycle-{k:02}"),
            json!({"g1": [pair[0].0, pair[0].1, pair[0].2, pair[0].3], "g2": [pair[1].0, pair[1].1, pair[1].2, pair[1].3]}),
            residual,
            args.tolerance,
            0.0,
        ));
    }
    Ok(VerificationReport::assemble(
        "theta-cocycle",
        checks,
        cfg,
        json!({"count": args.count, "cmult": args.cmult, "tolerance": args.tolerance}),
        seed,
        started,
    ))
}

// ---------------------------------------------------------------- fint

#[derive(Debug, Clone, Args)]
pub struct FintArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Bound on |F_λ(1,1)| at H = 1.
    #[arg(long, default_value_t = 1e-6)]
    pub vanishing_tolerance: f64,
}

impl Default for FintArgs {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            vanishing_tolerance: 1e-6,
        }
    }
}

/// `2ν` for the Hecke factor matched to `2λ`: `ν = 1/2` when `2λ ≡ 1` and
/// `ν = 3/2` when `2λ ≡ 3 (mod 4)`.
fn matched_two_nu(two_lambda: u32) -> u32 {
    if two_lambda % 4 == 1 {
        1
    } else {
        3
    }
}

pub fn suite_fint(args: &FintArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let two_lambdas = [9u32, 11, 13];
    for k in 0..20 {
        let two_lambda = two_lambdas[k % 3];
        let order = two_lambda as f64 / 2.0 - 1.0;
        let y = 0.1 * 100f64.powf(k as f64 / 19.0);
        let series = bessel_j(order, 4.0 * std::f64::consts::PI * y, cfg)?;
        let contour = bessel_j_mellin_barnes(order, y, -order / 4.0, cfg)?;
        checks.push(
            CheckRecord::within(
                format!("bessel-mb-{k:02}"),
                json!({"two_lambda": two_lambda, "y": y}),
                (series - contour).abs(),
                args.tolerance,
                0.0,
            )
            .with_detail(json!({"series": series, "mellin_barnes": contour})),
        );
    }
    for two_lambda in [9u32, 13] {
        let weight = HalfIntegralWeight::new(two_lambda)?;
        let gamma = GammaFactorSpec::hecke(1.0, 1.0, matched_two_nu(two_lambda))?;
        let lo = (1.0 - weight.value()) / 2.0;
        for (s, x) in [
            (Complex64::new(0.8, 1.0), 0.5),
            (Complex64::new(1.2, -2.0), 3.0),
        ] {
            let near = -s.re - 0.15;
            let far = lo + 0.15;
            let a = f_integral(weight, &gamma, s, x, near, cfg)?;
            let b = f_integral(weight, &gamma, s, x, far, cfg)?;
            checks.push(
                CheckRecord::within(
                    format!("f-shift-{two_lambda}-x{x}"),
                    json!({"two_lambda": two_lambda, "s": cjson(s), "x": x, "sigma1": [near, far]}),
                    (a - b).norm() / b.norm().max(1.0),
                    args.tolerance,
                    0.0,
                )
                .with_detail(json!({"near": cjson(a), "far": cjson(b)})),
            );
        }
    }
    for two_lambda in [9u32, 13, 11, 15] {
        let weight = HalfIntegralWeight::new(two_lambda)?;
        let two_nu = matched_two_nu(two_lambda);
        let gamma = GammaFactorSpec::hecke(1.0, 1.0, two_nu)?;
        let sigma1 = ((1.0 - weight.value()) / 2.0 - 1.0) / 2.0;
        let value = f_integral(weight, &gamma, Complex64::new(1.0, 0.0), 1.0, sigma1, cfg)?;
        checks.push(
            CheckRecord::within(
                format!("f-vanishes-at-h1-{two_lambda}"),
                json!({"two_lambda": two_lambda, "two_nu": two_nu, "sigma1": sigma1}),
                value.norm(),
                args.vanishing_tolerance,
                0.0,
            )
            .with_detail(json!({"value": cjson(value)})),
        );
    }
    for row in RESIDUE_ROWS {
        let cc = g_numeric_crosscheck(
            row.delta,
            HalfIntegralWeight::new(row.two_nu)?,
            HalfIntegralWeight::new(row.two_lambda)?,
            2.0,
            cfg,
        )?;
        checks.push(
            CheckRecord::within(
                format!("g-contour-{}-{}-{}", row.delta, row.two_nu, row.two_lambda),
                json!({"delta": row.delta, "two_nu": row.two_nu, "two_lambda": row.two_lambda, "h": 2.0}),
                (cc.exact - cc.quadrature).abs(),
                args.tolerance,
                cc.quadrature_error,
            )
            .with_detail(json!({"exact": cc.exact, "quadrature": cc.quadrature})),
        );
    }
    Ok(VerificationReport::assemble(
        "fint",
        checks,
        cfg,
        json!({"tolerance": args.tolerance, "vanishing_tolerance": args.vanishing_tolerance}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- mellin-flambda

#[derive(Debug, Clone, Args)]
pub struct MellinArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

impl Default for MellinArgs {
    fn default() -> Self {
        Self { tolerance: 1e-8 }
    }
}

pub fn suite_mellin(args: &MellinArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let points = [
        (7u32, Complex64::new(2.0, 0.0)),
        (5, Complex64::new(2.0, 0.0)),
        (7, Complex64::new(0.4, 1.5)),
        (9, Complex64::new(1.3, -0.7)),
        (11, Complex64::new(3.0, 2.0)),
    ];
    for (two_lambda, s) in points {
        let (quad, closed) = f_lambda_mellin_check(HalfIntegralWeight::new(two_lambda)?, s, cfg)?;
        checks.push(
            CheckRecord::within(
                format!("mellin-{two_lambda}-{}-{}", s.re, s.im),
                json!({"two_lambda": two_lambda, "s": cjson(s)}),
                (quad - closed).norm() / closed.norm().max(1.0),
                args.tolerance,
                0.0,
            )
            .with_detail(json!({"quadrature": cjson(quad), "closed": cjson(closed)})),
        );
    }
    // The closed form vanishes where (s − λ + 1)/2 is a pole of Γ_C.
    for (two_lambda, s) in [(7u32, 2.5), (7, 0.5), (11, 2.5)] {
        let s = Complex64::new(s, 0.0);
        let (quad, closed) = f_lambda_mellin_check(HalfIntegralWeight::new(two_lambda)?, s, cfg)?;
        checks.push(
            CheckRecord::within(
                format!("mellin-zero-{two_lambda}-{}", s.re),
                json!({"two_lambda": two_lambda, "s": cjson(s)}),
                quad.norm() + closed.norm(),
                args.tolerance,
                0.0,
            )
            .with_detail(json!({"quadrature": cjson(quad)})),
        );
    }
    let mut worst = 0.0f64;
    for n in 0..=6 {
        for m in 0..=6 {
            let ip = chebyshev_v_weighted_integral(n, |v| chebyshev_v(m, v), 64);
            let expect = if n == m { std::f64::consts::PI } else { 0.0 };
            worst = worst.max((ip - expect).abs());
        }
    }
    checks.push(CheckRecord::within(
        "chebyshev-v-orthogonality",
        json!({"degrees": 6, "nodes": 64}),
        worst,
        args.tolerance,
        0.0,
    ));
    Ok(VerificationReport::assemble(
        "mellin-flambda",
        checks,
        cfg,
        json!({"tolerance": args.tolerance}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- fe-check

const CUSP_FIXTURE: &str = include_str!("../fixtures/cusp.qexp");
const ETA24_FIXTURE: &str = include_str!("../fixtures/eta24.qexp");

fn load_form(path: Option<&Path>, builtin: &str) -> Result<QExpansion> {
    let ingested = match path {
        Some(p) => {
            let file = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            ingest_coefficients(BufReader::new(file))?
        }
        None => ingest_coefficients(builtin.as_bytes())?,
    };
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ingested.form)
}

/// The checked-in θ(z)η(2z)^{12} coefficients.
pub fn cusp_fixture() -> Result<QExpansion> {
    load_form(None, CUSP_FIXTURE)
}

/// The checked-in η(24z) coefficients.
pub fn eta24_fixture() -> Result<QExpansion> {
    load_form(None, ETA24_FIXTURE)
}

#[derive(Debug, Clone, Args)]
pub struct FeArgs {
    /// Coefficient file; the built-in weight-13/2 cusp form if omitted.
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub c: i64,
    #[arg(long, default_value_t = 3)]
    pub a: i64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// The perturbed control must deviate by more than this.
    #[arg(long, default_value_t = 1e-3)]
    pub control_threshold: f64,
}

impl Default for FeArgs {
    fn default() -> Self {
        Self {
            form: None,
            c: 16,
            a: 3,
            tolerance: 1e-6,
            control_threshold: 1e-3,
        }
    }
}

/// Six points on `0.3 <= Re s <= 0.7`.
pub fn fe_grid() -> Vec<Complex64> {
    (0..6)
        .map(|k| Complex64::new(0.3 + 0.08 * k as f64, 0.5 * k as f64 - 1.0))
        .collect()
}

pub fn suite_fe(args: &FeArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let form = load_form(args.form.as_deref(), CUSP_FIXTURE)?;
    let weight = form.weight();
    let frac = TwistFraction::new(args.a, args.c, form.level())?;
    let gamma = GammaFactorSpec::hecke(1.0, 1.0, weight.two_lambda())?;
    let delta = weight.delta() as u8;
    let grid = fe_grid();
    let expected = i_pow(weight.value());
    let inputs = json!({"a": args.a, "c": args.c, "level": form.level(), "two_lambda": weight.two_lambda(), "grid": grid.iter().map(|&s| cjson(s)).collect::<Vec<_>>()});
    let report = fe_residual(
        &form,
        &frac,
        &gamma,
        delta,
        OmegaMode::Fixed(expected),
        &grid,
        cfg,
    )?;
    let mut checks = vec![
        CheckRecord::within(
            "fe-deviation",
            inputs.clone(),
            report.max_rel_dev,
            args.tolerance,
            0.0,
        )
        .with_detail(json!({"skipped": report.skipped_points.len()})),
        CheckRecord::within(
            "fe-omega",
            inputs.clone(),
            (report.omega_hat - expected).norm(),
            args.tolerance,
            0.0,
        )
        .with_detail(
            json!({"omega_hat": cjson(report.omega_hat), "i_pow_lambda": cjson(expected)}),
        ),
        CheckRecord::exact(
            "fe-all-points-used",
            inputs.clone(),
            report.skipped_points.len(),
        ),
    ];
    let n = form.support().get(1).map(|&(n, _)| n).unwrap_or(1);
    let perturbed = form.with_coeff(n, form.coeff(n) * 1.1)?;
    let control = fe_residual(
        &perturbed,
        &frac,
        &gamma,
        delta,
        OmegaMode::Measured,
        &grid,
        cfg,
    )?;
    checks.push(
        CheckRecord::exceeds(
            "fe-perturbed-control",
            json!({"perturbed_index": n, "factor": 1.1}),
            control.max_rel_dev,
            args.control_threshold,
        )
        .with_detail(json!({"omega_hat": cjson(control.omega_hat)})),
    );
    Ok(VerificationReport::assemble(
        "fe-check",
        checks,
        cfg,
        json!({"form": args.form, "a": args.a, "c": args.c, "tolerance": args.tolerance}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- hecke-check

#[derive(Debug, Clone, Args)]
pub struct HeckeArgs {
    /// Coefficient file; the built-in η(24z) if omitted.
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, default_value_t = 576)]
    pub c: i64,
    #[arg(long, default_value_t = 1)]
    pub a: i64,
    /// H of the failing control.
    #[arg(long, default_value_t = 1.3)]
    pub control_h: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

impl Default for HeckeArgs {
    fn default() -> Self {
        Self {
            form: None,
            c: 576,
            a: 1,
            control_h: 1.3,
            tolerance: 1e-6,
        }
    }
}

pub fn suite_hecke(args: &HeckeArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let form = load_form(args.form.as_deref(), ETA24_FIXTURE)?;
    let frac = TwistFraction::new(args.a, args.c, form.level())?;
    let two_nu = form.weight().two_lambda();
    let omega = i_pow(form.weight().value());
    let panel = default_hecke_panel(1.0);
    let inputs =
        |h: f64| json!({"a": args.a, "c": args.c, "h": h, "two_nu": two_nu, "panel": panel.len()});
    let at_one = hecke_variant_check(
        &form,
        &frac,
        &GammaFactorSpec::hecke(1.0, 1.0, two_nu)?,
        omega,
        &panel,
        cfg,
    )?;
    let control = hecke_variant_check(
        &form,
        &frac,
        &GammaFactorSpec::hecke(1.0, args.control_h, two_nu)?,
        omega,
        &panel,
        cfg,
    )?;
    let checks = vec![
        CheckRecord::within(
            "hecke-h1",
            inputs(1.0),
            at_one.residual,
            args.tolerance,
            0.0,
        ),
        CheckRecord::exact(
            "hecke-h1-all-points-used",
            inputs(1.0),
            at_one.skipped_points.len(),
        ),
        CheckRecord::exceeds(
            "hecke-control",
            inputs(args.control_h),
            control.residual,
            args.tolerance,
        ),
    ];
    Ok(VerificationReport::assemble(
        "hecke-check",
        checks,
        cfg,
        json!({"form": args.form, "a": args.a, "c": args.c, "control_h": args.control_h}),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- trace-zero

#[derive(Debug, Clone, Args)]
pub struct TraceZeroArgs {
    #[arg(long, default_value_t = 5)]
    pub two_lambda: u32,
    #[arg(skip = 100_000u64)]
    pub c_max: u64,
    /// Bound on the partial sums.
    #[arg(long, default_value_t = 1e-2)]
    pub target: f64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub slope: f64,
    #[arg(long, default_value_t = 0.15)]
    pub slope_tolerance: f64,
}

impl Default for TraceZeroArgs {
    fn default() -> Self {
        Self {
            two_lambda: 5,
            c_max: 100_000,
            target: 1e-2,
            slope: -0.5,
            slope_tolerance: 0.15,
        }
    }
}

/// Pairs `(m, n)` summed by `trace-zero`.
pub const TRACE_PAIRS: [(u64, u64); 3] = [(1, 1), (1, 2), (2, 3)];

pub fn suite_trace_zero(args: &TraceZeroArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let input = TraceGeomInput {
        m: 1,
        n: 1,
        level: 4,
        chi: DirichletCharacterMod4N::trivial(4)?,
        weight: HalfIntegralWeight::new(args.two_lambda)?,
        c_max: args.c_max,
    };
    let sides = geometric_side_batch(&input, &TRACE_PAIRS, cfg)?;
    let mut checks = Vec::new();
    let mut csv = String::from("m,n,c,oscillation\n");
    let envelope_tail = sides.iter().map(|g| g.tail_estimate).fold(0.0, f64::max);
    for (&(m, n), side) in TRACE_PAIRS.iter().zip(&sides) {
        let tag = format!("{m}-{n}");
        let inputs =
            json!({"m": m, "n": n, "level": 4, "two_lambda": args.two_lambda, "c_max": args.c_max});
        let size = side.partial_sum.norm();
        let detail = json!({"partial_sum": cjson(side.partial_sum), "tail_estimate": side.tail_estimate, "envelope_slope": side.envelope_slope});
        let tail = if m == n {
            side.tail_estimate
        } else {
            envelope_tail
        };
        checks.push(
            CheckRecord::within(
                format!("trace-within-tail-{tag}"),
                inputs.clone(),
                size,
                0.0,
                tail,
            )
            .with_detail(detail.clone()),
        );
        checks.push(CheckRecord::within(
            format!("trace-target-{tag}"),
            inputs.clone(),
            size,
            args.target,
            0.0,
        ));
        checks.push(
            CheckRecord::within(
                format!("trace-slope-{tag}"),
                inputs,
                (side.envelope_slope - args.slope).abs(),
                args.slope_tolerance,
                0.0,
            )
            .with_detail(json!({"slope": side.envelope_slope, "expected": args.slope})),
        );
        for &(c, w) in &side.envelope {
            csv.push_str(&format!("{m},{n},{c},{w:e}\n"));
        }
    }
    let mut report = VerificationReport::assemble(
        "trace-zero",
        checks,
        cfg,
        json!({"two_lambda": args.two_lambda, "c_max": args.c_max, "pairs": TRACE_PAIRS}),
        0,
        started,
    );
    report.csv = Some(csv);
    Ok(report)
}

// ---------------------------------------------------------------- kfun-compare

#[derive(Debug, Clone, Args)]
pub struct KfunArgs {
    /// Form coefficients; the built-in η(24z) if omitted.
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n: u64,
    /// Petersson weight as 2λ.
    #[arg(long, default_value_t = 17)]
    pub two_lambda: u32,
    #[arg(skip = 1_000_000u64)]
    pub m_max: u64,
    #[arg(skip = 200_000u64)]
    pub c_max: u64,
    /// Cutoff of the continued sum.
    #[arg(long, default_value_t = 20_000)]
    pub continued_m_max: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub max_rel_tail: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

impl Default for KfunArgs {
    fn default() -> Self {
        Self {
            form: None,
            n: 1,
            two_lambda: 17,
            m_max: 1_000_000,
            c_max: 200_000,
            continued_m_max: 20_000,
            max_rel_tail: 1e-3,
            tolerance: 1e-4,
        }
    }
}

/// Imaginary parts of the comparison grid on `Re s = 1.4`.
pub const K_GRID_IM: [f64; 6] = [-5.0, -2.0, 0.0, 1.0, 3.0, 6.0];

pub fn suite_kfun(args: &KfunArgs, cfg: &PrecisionConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let form = load_form(args.form.as_deref(), ETA24_FIXTURE)?;
    let weight = HalfIntegralWeight::new(args.two_lambda)?;
    let base = KFunctionInput {
        n: args.n,
        gamma: GammaFactorSpec::hecke(1.0, 1.0, form.weight().two_lambda())?,
        omega: i_pow(form.weight().value()),
        form,
        s: Complex64::new(1.4, 0.0),
        weight,
        sigma1: (1.0 - weight.value()) / 2.0 + 0.25,
    };
    let direct_cuts = KCutoffs {
        m_max: args.m_max,
        c_max: args.c_max,
        max_rel_tail: args.max_rel_tail,
    };
    let continued_cuts = |m_max| KCutoffs {
        m_max,
        ..direct_cuts
    };
    let mut checks = Vec::new();
    // Grid points are independent; each keeps its own summation order.
    let values: Vec<Result<_>> = std::thread::scope(|scope| {
        let handles: Vec<_> = K_GRID_IM
            .iter()
            .map(|&im| {
                let input = KFunctionInput {
                    s: Complex64::new(1.4, im),
                    ..base.clone()
                };
                scope.spawn(move || {
                    let d = k_direct(&input, &direct_cuts, cfg)?;
                    let k = k_continued(&input, &continued_cuts(args.continued_m_max), cfg)?;
                    Ok((input, d, k))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("K evaluation panicked"))
            .collect()
    });
    for value in values {
        let (input, d, k) = value?;
        let im = input.s.im;
        checks.push(
            CheckRecord::within(
                format!("k-agreement-t{im:+}"),
                json!({"s": cjson(input.s), "n": args.n, "two_lambda": args.two_lambda}),
                rel_diff(d.value, k.value),
                args.tolerance,
                0.0,
            )
            .with_detail(json!({
                "direct": cjson(d.value),
                "continued": cjson(k.value),
                "direct_tail": d.tail_estimate() / d.value.norm(),
                "continued_tail": k.tail_estimate() / k.value.norm(),
            })),
        );
    }
    let left_cfg = cfg.with_tol(cfg.target_tol.max(1e-7));
    for im in [0.0, 2.0] {
        let input = KFunctionInput {
            s: Complex64::new(0.8, im),
            ..base.clone()
        };
        let short = k_continued(
            &input,
            &continued_cuts(args.continued_m_max / 10),
            &left_cfg,
        )?;
        let long = k_continued(&input, &continued_cuts(args.continued_m_max), &left_cfg)?;
        let inputs = json!({"s": cjson(input.s), "m_max": [args.continued_m_max / 10, args.continued_m_max]});
        let finite = long.value.re.is_finite() && long.value.im.is_finite();
        checks.push(
            CheckRecord::within(
                format!("k-left-stable-t{im:+}"),
                inputs.clone(),
                rel_diff(short.value, long.value),
                10.0 * left_cfg.target_tol,
                0.0,
            )
            .with_detail(json!({"short": cjson(short.value), "long": cjson(long.value)})),
        );
        checks.push(CheckRecord::exact(
            format!("k-left-finite-t{im:+}"),
            inputs,
            usize::from(!finite),
        ));
    }
    Ok(VerificationReport::assemble(
        "kfun-compare",
        checks,
        cfg,
        json!({
            "n": args.n,
            "two_lambda": args.two_lambda,
            "m_max": args.m_max,
            "c_max": args.c_max,
            "continued_m_max": args.continued_m_max,
            "max_rel_tail": args.max_rel_tail,
            "tolerance": args.tolerance,
        }),
        0,
        started,
    ))
}

// ---------------------------------------------------------------- dispatch

#[derive(Debug, Parser)]
#[command(
    name = "halfint",
    version,
    about = "Verification suites for half-integral weight twists and trace formulas"
)]
pub struct Cli {
    /// Working precision in bits (at most 53).
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Target tolerance of the numerical routines.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest modulus c (salie, trace-zero, kfun-compare).
    #[arg(long, global = true)]
    pub cmax: Option<u64>,
    /// Largest coefficient index m (kfun-compare).
    #[arg(long, global = true)]
    pub mmax: Option<u64>,
    /// Contour truncation height.
    #[arg(long = "contour-T", global = true)]
    pub contour_t: Option<f64>,
    /// Initial contour step.
    #[arg(long = "contour-h", global = true)]
    pub contour_h: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print the suite's table as CSV (gpoly, table1, trace-zero).
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residue polynomials G(H), their roots and common roots.
    Gpoly(GpolyArgs),
    /// Classification of the admissible gamma factors.
    Table1(Table1Args),
    /// Ramanujan-sum Dirichlet series against the divisor-sum closed form.
    SigmaCheck(SigmaArgs),
    /// Fast Salié and Ramanujan sums against direct summation.
    Salie(SalieArgs),
    /// Bessel contour representation, F integral shifts and zeros.
    Fint(FintArgs),
    /// Mellin transform of f_λ and Chebyshev orthogonality.
    MellinFlambda(MellinArgs),
    /// Functional equation of an additive twist.
    FeCheck(FeArgs),
    /// Hecke-variant transformation law.
    HeckeCheck(HeckeArgs),
    /// Geometric side of the trace formula on a space of dimension zero.
    TraceZero(TraceZeroArgs),
    /// Direct against continued K-function.
    KfunCompare(KfunArgs),
    /// Theta transformation law and multiplier cocycle.
    ThetaCocycle(ThetaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gpoly(_) => "gpoly",
            Self::Table1(_) => "table1",
            Self::SigmaCheck(_) => "sigma-check",
            Self::Salie(_) => "salie",
            Self::Fint(_) => "fint",
            Self::MellinFlambda(_) => "mellin-flambda",
            Self::FeCheck(_) => "fe-check",
            Self::HeckeCheck(_) => "hecke-check",
            Self::TraceZero(_) => "trace-zero",
            Self::KfunCompare(_) => "kfun-compare",
            Self::ThetaCocycle(_) => "theta-cocycle",
        }
    }
}

impl Cli {
    pub fn precision(&self) -> Result<PrecisionConfig> {
        let mut cfg = PrecisionConfig::default();
        if let Some(p) = self.prec {
            cfg.working_precision = p;
        }
        if let Some(t) = self.tol {
            cfg.target_tol = t;
        }
        if let Some(t) = self.contour_t {
            cfg.contour_t = t;
        }
        if let Some(h) = self.contour_h {
            cfg.contour_h = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<VerificationReport> {
    let cfg = cli.precision()?;
    match &cli.command {
        Command::Gpoly(a) => suite_gpoly(a, &cfg),
        Command::Table1(a) => suite_table1(a, &cfg),
        Command::SigmaCheck(a) => suite_sigma(a, &cfg),
        Command::Salie(a) => {
            let mut a = a.clone();
            a.cmax = cli.cmax.unwrap_or(a.cmax);
            suite_salie(&a, &cfg)
        }
        Command::Fint(a) => suite_fint(a, &cfg),
        Command::MellinFlambda(a) => suite_mellin(a, &cfg),
        Command::FeCheck(a) => suite_fe(a, &cfg),
        Command::HeckeCheck(a) => suite_hecke(a, &cfg),
        Command::TraceZero(a) => {
            let mut a = a.clone();
            a.c_max = cli.cmax.unwrap_or(a.c_max);
            suite_trace_zero(&a, &cfg)
        }
        Command::KfunCompare(a) => {
            let mut a = a.clone();
            a.c_max = cli.cmax.unwrap_or(a.c_max);
            a.m_max = cli.mmax.unwrap_or(a.m_max);
            suite_kfun(&a, &cfg)
        }
        Command::ThetaCocycle(a) => suite_theta(a, cli.seed, &cfg),
    }
}

/// Usage and input errors exit with 2; everything else is numerical.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_)
            | Error::NoInverse { .. }
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Domain(_)
    )
}

fn emit(cli: &Cli, report: &VerificationReport) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None if !cli.csv => println!("{text}"),
        None => {}
    }
    if cli.csv {
        if let Some(csv) = &report.csv {
            std::io::stdout().write_all(csv.as_bytes())?;
        }
    }
    for c in report.failures() {
        eprintln!(
            "FAIL {}: {:e} > {:e} + {:e}",
            c.name, c.value, c.tolerance, c.tail_estimate
        );
    }
    Ok(())
}

pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let started = Instant::now();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) if is_config_error(&e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            let cfg = cli.precision().unwrap_or_default();
            let check = CheckRecord::within("suite-error", Value::Null, f64::INFINITY, 0.0, 0.0)
                .with_detail(json!(e.to_string()));
            VerificationReport::assemble(
                cli.command.name(),
                vec![check],
                &cfg,
                Value::Null,
                cli.seed,
                started,
            )
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
