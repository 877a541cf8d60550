use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fxcredit::cli::{PriceReport, SimulationReport};
use fxcredit::io::{self, ParamFile};
use fxcredit_core::affine::{cir_pp_bond, ProcessState};
use fxcredit_core::calibration::{BondKind, BondQuote, MarketQuote};
use fxcredit_core::curve::{Curve, CurveKind};
use fxcredit_core::products::{cds_spread_from_recovery, corp_bond_value, PaymentSchedule};
use fxcredit_core::recovery::{forward_recovery_delayed, forward_recovery_simple};

const Y_DRIVEN: &str = r#"
[ajd]
sigma_x = 0.0
sigma_y = 0.4
m = 1.0
mu_y = 0.6
y0 = 0.5
h = 0.25
jump = { type = "exp_x", lambda_x = 2.0 }

[cirpp]
r0 = 0.02
b_x = 0.04
beta_x = 0.5
sigma_x = 0.1

[schedule]
maturity = 2.0
n = 8
coupon = 0.04
"#;

fn fxcredit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fxcredit"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_column(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn curve_with_negligible_risk_is_flat_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let params = write(
        dir.path(),
        "p.toml",
        &Y_DRIVEN
            .replace("m = 1.0", "m = 1e-300")
            .replace("mu_y = 0.6", "mu_y = 0.0"),
    );
    let out = dir.path().join("out");
    let o = fxcredit(&["curve", "--params", &params, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = read_column(&out.join("F.csv"));
    assert_eq!(f.len(), 41);
    assert!(f.iter().all(|(_, v)| *v == 1.0));
}

#[test]
fn curve_matches_library_values() {
    let dir = tempfile::tempdir().unwrap();
    let params = write(dir.path(), "p.toml", Y_DRIVEN);
    let out = dir.path().join("out");
    let o = fxcredit(&[
        "curve",
        "--params",
        &params,
        "--grid",
        "0:5:0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let pf = ParamFile::parse(Y_DRIVEN, "p").unwrap();
    let p = pf.require_ajd("p").unwrap();
    let c = pf.require_cir("p").unwrap();
    let s = ProcessState::initial(&p);
    for (t, v) in read_column(&out.join("F.csv")) {
        assert_eq!(v, forward_recovery_delayed(&p, &s, t).unwrap());
    }
    for ((t, pv), (_, pdv)) in read_column(&out.join("P.csv"))
        .into_iter()
        .zip(read_column(&out.join("Pd.csv")))
    {
        assert_eq!(pv, cir_pp_bond(&c, t).unwrap());
        assert_eq!(pdv, pv * forward_recovery_delayed(&p, &s, t).unwrap());
    }
    let o = fxcredit(&[
        "curve",
        "--params",
        &params,
        "--grid",
        "0,1,2",
        "--recovery",
        "simple",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    for (t, v) in read_column(&out.join("F.csv")) {
        assert_eq!(v, forward_recovery_simple(&p, 0.0, t).unwrap());
    }
    assert_eq!(read_column(&out.join("spread.csv")).len(), 3);
}

#[test]
fn malformed_param_file_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let params = write(
        dir.path(),
        "p.toml",
        &Y_DRIVEN.replace("sigma_y = 0.4", "sigma_y = [1]"),
    );
    let o = fxcredit(&["curve", "--params", &params, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ajd.sigma_y"));
    let params = write(dir.path(), "q.toml", &Y_DRIVEN.replace("h = 0.25", "h = -1"));
    let o = fxcredit(&["curve", "--params", &params, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ajd.h"));
}

fn price_json(params: &str, product: &str, extra: &[&str]) -> PriceReport {
    let mut args = vec!["price", "--params", params, "--product", product, "--json"];
    args.extend_from_slice(extra);
    let o = fxcredit(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn price_products() {
    let dir = tempfile::tempdir().unwrap();
    let pf = ParamFile::parse(Y_DRIVEN, "p").unwrap();
    let c = pf.require_cir("p").unwrap();

    let zero = write(dir.path(), "z.toml", &Y_DRIVEN.replace("coupon = 0.04", "coupon = 0.0"));
    assert_eq!(price_json(&zero, "gov", &[]).value, cir_pp_bond(&c, 2.0).unwrap());

    // uniform schedule, x0 = 0 and intensity free of y
    let flat = write(dir.path(), "a.toml", &Y_DRIVEN.replace("mu_y = 0.6", "mu_y = 0.0"));
    let p = ParamFile::parse(&Y_DRIVEN.replace("mu_y = 0.6", "mu_y = 0.0"), "a")
        .unwrap()
        .require_ajd("a")
        .unwrap();
    let light = cds_spread_from_recovery(forward_recovery_simple(&p, 0.0, 0.25).unwrap(), 0.25).unwrap();
    let rep = price_json(&flat, "cds", &[]);
    assert!((rep.value - light).abs() < 1e-12);
    let ts = rep.term_sheet.unwrap();
    assert_eq!(ts.dates.len(), 8);

    let params = write(dir.path(), "p.toml", Y_DRIVEN);
    let pb = pf.require_ajd("p").unwrap();
    let sched = PaymentSchedule::equidistant(2.0, 8, 0.04).unwrap();
    let dates = sched.payment_dates().to_vec();
    let l = Curve::new(
        dates.clone(),
        dates.iter().map(|t| 0.001 * t).collect(),
        CurveKind::Illiquidity,
    )
    .unwrap();
    let l_path = dir.path().join("L.csv");
    io::write_curve(&l_path, &l).unwrap();
    let pd = Curve::new(
        dates.clone(),
        dates
            .iter()
            .map(|t| cir_pp_bond(&c, *t).unwrap() * forward_recovery_simple(&pb, 0.0, *t).unwrap())
            .collect(),
        CurveKind::Discount,
    )
    .unwrap();
    let got = price_json(&params, "corp", &["--illiquidity", l_path.to_str().unwrap()]).value;
    assert!((got - corp_bond_value(&pd, &l, &sched).unwrap()).abs() < 1e-15);

    let o = fxcredit(&["price", "--params", &params, "--product", "cds"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("spread") && text.contains("survival") && text.lines().count() > 10);
}

#[test]
fn calibrate_round_trip_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    // the fit model has a deterministic jump intensity
    let pf = ParamFile::parse(&Y_DRIVEN.replace("mu_y = 0.6", "mu_y = 0.0"), "p").unwrap();
    let (c, a) = (pf.require_cir("p").unwrap(), pf.require_ajd("p").unwrap());
    let mut quotes = Vec::new();
    for k in 1..=8 {
        let t = 0.25 * k as f64;
        let sched = PaymentSchedule::equidistant(t, k, 0.03).unwrap();
        let p = Curve::new(
            sched.dates().to_vec(),
            sched.dates().iter().map(|s| cir_pp_bond(&c, *s).unwrap()).collect(),
            CurveKind::Discount,
        )
        .unwrap();
        let f = |s: f64| forward_recovery_simple(&a, 0.0, s).unwrap();
        let pd = Curve::new(
            sched.dates().to_vec(),
            sched
                .dates()
                .iter()
                .map(|s| cir_pp_bond(&c, *s).unwrap() * f(*s))
                .collect(),
            CurveKind::Discount,
        )
        .unwrap();
        let l = Curve::new(sched.dates().to_vec(), vec![0.002; k + 1], CurveKind::Illiquidity).unwrap();
        let bond = |kind, price| {
            MarketQuote::Bond(BondQuote {
                kind,
                maturity: t,
                coupon: 0.03,
                price,
                frequency: 4.0,
            })
        };
        quotes.push(bond(
            BondKind::Government,
            fxcredit_core::products::gov_bond_value(&p, &sched).unwrap(),
        ));
        quotes.push(bond(BondKind::Corporate, corp_bond_value(&pd, &l, &sched).unwrap()));
        quotes.push(MarketQuote::Cds(fxcredit_core::calibration::CdsQuote {
            maturity: t,
            spread: (1.0 - f(t)) / t,
            frequency: 1.0 / t,
        }));
    }
    let qpath = dir.path().join("q.csv");
    io::write_quotes(&qpath, &quotes).unwrap();
    let out = dir.path().join("cal");
    let o = fxcredit(&[
        "calibrate",
        "--quotes",
        qpath.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (_, r) in read_column(&out.join("residuals.csv")) {
        assert!(r.abs() < 1e-8);
    }
    for (t, l) in read_column(&out.join("L.csv")) {
        assert!((l - 0.002).abs() < 1e-8, "t={t}: {l}");
    }
    assert!(!out.join("params.json").exists());

    let o = fxcredit(&[
        "calibrate",
        "--quotes",
        qpath.to_str().unwrap(),
        "--mode",
        "fit",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("params.json")).unwrap()).unwrap();
    assert_eq!(fit["values"].as_array().unwrap().len(), 10);

    let empty = write(dir.path(), "empty.csv", "");
    let o = fxcredit(&["calibrate", "--quotes", &empty, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let corp_only = write(
        dir.path(),
        "corp.csv",
        "kind,maturity_years,coupon,price,spread,frequency\ncorp,1,0.05,1.0,,1\n",
    );
    let o = fxcredit(&["calibrate", "--quotes", &corp_only, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing government quotes"));
}

#[test]
fn simulate_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let riskless = write(
        dir.path(),
        "r.toml",
        &Y_DRIVEN
            .replace("m = 1.0", "m = 1e-8")
            .replace("mu_y = 0.6", "mu_y = 0.0"),
    );
    let o = fxcredit(&[
        "simulate",
        "--params",
        &riskless,
        "--payoff",
        "simple-recovery",
        "--maturity",
        "1",
        "--paths",
        "1000",
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SimulationReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.estimate, 1.0);
    assert!((r.analytic - 1.0).abs() < 1e-7);

    let params = write(dir.path(), "p.toml", Y_DRIVEN);
    let args = [
        "simulate",
        "--params",
        &params,
        "--payoff",
        "simple-recovery",
        "--maturity",
        "1",
        "--paths",
        "20000",
        "--seed",
        "7",
    ];
    let a = fxcredit(&args);
    let b = fxcredit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut json_args = args.to_vec();
    json_args.push("--json");
    let r: SimulationReport = serde_json::from_slice(&fxcredit(&json_args).stdout).unwrap();
    let z = r.z_score.unwrap();
    assert!(z.abs() < 3.0, "z = {z}");
    let again: SimulationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(again, r);

    let o = fxcredit(&[
        "simulate",
        "--params",
        &params,
        "--payoff",
        "atom",
        "--maturity",
        "1",
        "--dt",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = fxcredit(&[
        "simulate",
        "--params",
        &params,
        "--payoff",
        "cascaded",
        "--maturity",
        "1",
        "--t2",
        "1.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
