//! Runs every acceptance criterion at its stated tolerance and runtime
//! budget, printing one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use halfint::cli::{
    suite_fe, suite_fint, suite_gpoly, suite_hecke, suite_kfun, suite_salie, suite_sigma,
    suite_table1, suite_theta, suite_trace_zero, CheckRecord, FeArgs, FintArgs, GpolyArgs,
    HeckeArgs, KfunArgs, SalieArgs, SigmaArgs, Table1Args, ThetaArgs, TraceZeroArgs,
    VerificationReport,
};
use halfint::special::PrecisionConfig;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    note: String,
}

fn judge(
    id: u32,
    title: &'static str,
    budget: Duration,
    report: &VerificationReport,
    select: impl Fn(&CheckRecord) -> bool,
    elapsed: Duration,
) -> Outcome {
    let chosen: Vec<&CheckRecord> = report.checks.iter().filter(|c| select(c)).collect();
    let failed: Vec<String> = chosen
        .iter()
        .filter(|c| !c.pass)
        .map(|c| {
            format!(
                "{} = {:.3e} (tol {:.1e} + tail {:.1e})",
                c.name, c.value, c.tolerance, c.tail_estimate
            )
        })
        .collect();
    let worst = chosen.iter().map(|c| c.value).fold(0.0, f64::max);
    let in_time = elapsed <= budget;
    let mut note = format!(
        "{} checks, worst value {:.3e}, {:.2?} of {:?}",
        chosen.len(),
        worst,
        elapsed,
        budget
    );
    if !in_time {
        note.push_str(", over budget");
    }
    if !failed.is_empty() {
        note.push_str(&format!("; failing: {}", failed.join("; ")));
    }
    Outcome {
        id,
        title,
        pass: !chosen.is_empty() && failed.is_empty() && in_time,
        note,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

#[test]
fn acceptance_criteria() {
    let cfg = PrecisionConfig::default();
    let all = |_: &CheckRecord| true;
    let secs = Duration::from_secs;
    let mut outcomes = Vec::new();

    let (r, t) = timed(|| {
        suite_gpoly(
            &GpolyArgs {
                all: true,
                ..Default::default()
            },
            &cfg,
        )
        .unwrap()
    });
    outcomes.push(judge(
        1,
        "residue polynomials and roots",
        secs(1),
        &r,
        all,
        t,
    ));

    let (r, t) = timed(|| suite_table1(&Table1Args {}, &cfg).unwrap());
    outcomes.push(judge(2, "gamma-factor classification", secs(1), &r, all, t));

    let (r, t) = timed(|| suite_sigma(&SigmaArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        3,
        "Ramanujan-sum series closed form",
        secs(60),
        &r,
        all,
        t,
    ));

    let (r, t) = timed(|| suite_theta(&ThetaArgs::default(), 0, &cfg).unwrap());
    outcomes.push(judge(
        4,
        "theta transformation and cocycle",
        secs(10),
        &r,
        all,
        t,
    ));

    let (r, t) = timed(|| suite_fe(&FeArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        5,
        "twisted functional equation",
        secs(60),
        &r,
        all,
        t,
    ));

    let (r, t) = timed(|| suite_hecke(&HeckeArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        6,
        "Hecke-variant transformation",
        secs(60),
        &r,
        all,
        t,
    ));

    let (fint, t_fint) = timed(|| suite_fint(&FintArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        7,
        "Bessel contour form and F shift invariance",
        secs(60),
        &fint,
        |c| c.name.starts_with("bessel-mb") || c.name.starts_with("f-shift"),
        t_fint,
    ));

    let (r, t) = timed(|| suite_kfun(&KfunArgs::default(), &cfg).unwrap());
    outcomes.push(judge(8, "K-function continuation", secs(600), &r, all, t));

    outcomes.push(judge(
        9,
        "F(1,1) vanishing and G contour check",
        secs(60),
        &fint,
        |c| c.name.starts_with("f-vanishes") || c.name.starts_with("g-contour"),
        t_fint,
    ));

    let (r, t) = timed(|| suite_trace_zero(&TraceZeroArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        10,
        "trace formula on a zero space",
        secs(600),
        &r,
        all,
        t,
    ));

    let (r, t) = timed(|| suite_salie(&SalieArgs::default(), &cfg).unwrap());
    outcomes.push(judge(
        11,
        "exponential-sum fast paths",
        secs(60),
        &r,
        all,
        t,
    ));

    for o in &outcomes {
        println!(
            "criterion {:>2} {}: {} ({})",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.note
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
