//! The checked-in coefficient files must match the eta-quotient
//! constructors. Set `HALFINT_REGENERATE_FIXTURES=1` to rewrite them.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use halfint::forms::{
    fixture_eta24, fixture_theta_eta2_12, ingest_coefficients, write_coefficients, QExpansion,
};

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn check(name: &str, built: QExpansion, comments: &[&str]) {
    let p = path(name);
    if std::env::var_os("HALFINT_REGENERATE_FIXTURES").is_some() || !p.exists() {
        write_coefficients(&built, comments, File::create(&p).unwrap()).unwrap();
    }
    let read = ingest_coefficients(BufReader::new(File::open(&p).unwrap())).unwrap();
    assert!(read.warnings.is_empty(), "{:?}", read.warnings);
    let form = read.form;
    assert_eq!(form.level(), built.level());
    assert_eq!(form.weight(), built.weight());
    assert_eq!(form.cutoff(), built.cutoff());
    assert_eq!(form.character().values(), built.character().values());
    assert_eq!(form.support().len(), built.support().len());
    for (&(n, a), &(k, b)) in form.support().iter().zip(built.support()) {
        assert_eq!(n, k);
        assert!((a - b).norm() <= 1e-15 * b.norm(), "f_{n}: {a} vs {b}");
    }
}

#[test]
fn cusp_fixture_matches_constructor() {
    check(
        "cusp.qexp",
        fixture_theta_eta2_12(1000).unwrap(),
        &["theta(z) eta(2z)^12, weight 13/2 on Gamma0(4), trivial character"],
    );
}

#[test]
fn eta24_fixture_matches_constructor() {
    check(
        "eta24.qexp",
        fixture_eta24(1_000_000).unwrap(),
        &["eta(24z), weight 1/2 on Gamma0(576), character (12/.)"],
    );
}
