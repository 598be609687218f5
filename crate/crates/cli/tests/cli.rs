use std::path::PathBuf;

use entropik_cli::report::Report;
use entropik_cli::{run, tex};

const MODELS: [&str; 4] = ["gas1d", "fluid2d", "nonsimple2d", "granular2d"];

fn tmp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("entropik-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(args: &[&str]) -> (Report, serde_json::Value) {
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["--output", "json"]);
    let o = run(a.iter().copied());
    assert!(o.code <= 1, "{args:?}: {}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    (Report::from_json(&o.stdout).unwrap(), v)
}

fn schema() -> jsonschema::Validator {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(["analyze", "gas1d"]).code, 0);
    assert_eq!(run(["analyze", "no-such-model"]).code, 1);
    let bad = tmp("bad.epk", "independent t x\nfield u\nequation e: dt(u) + = 0\n");
    let o = run(["analyze", bad.as_str()]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("E0"), "{}", o.stderr);
    let nonlinear = tmp(
        "nonlinear.epk",
        "independent t x\nfield u\nconstitutive q(u)\nequation e: dt(u)*dt(u) + dx(q) = 0\n\
         entropy: dt(u) + dx(q) >= 0\nleading: dt(u)\n",
    );
    let o = run(["analyze", nonlinear.as_str()]);
    assert_eq!(o.code, 2, "{}{}", o.stdout, o.stderr);
    assert!(o.stderr.contains("error[E3"), "{}", o.stderr);
    assert_eq!(run(["check", "nonsimple2d", "ideal_gas"]).code, 1);
}

#[test]
fn reports_validate_and_round_trip() {
    let v = schema();
    let runs: Vec<Vec<&str>> = vec![
        vec!["analyze", "gas1d"],
        vec!["analyze", "fluid2d", "--method", "mueller-liu"],
        vec!["compare", "nonsimple2d"],
        vec!["split", "gas1d"],
        vec!["verify", "gas1d", "--trials", "20", "--bindings", "ideal_gas"],
        vec!["check", "nonsimple2d", "eq49"],
    ];
    for args in runs {
        let (r, value) = json(&args);
        let errs: Vec<String> = v.iter_errors(&value).map(|e| format!("{e} at {}", e.instance_path())).collect();
        assert!(errs.is_empty(), "{args:?}: {errs:?}");
        let again = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(again, r);
    }
}

#[test]
fn deterministic_section_is_stable() {
    let (a, _) = json(&["verify", "fluid2d", "--trials", "30", "--seed", "3"]);
    let (b, _) = json(&["verify", "fluid2d", "--trials", "30", "--seed", "3"]);
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert!(!a.deterministic_json().contains("total_us"));
}

#[test]
fn fingerprint_tracks_canonical_model() {
    let src = std::fs::read_to_string(entropik_cli::cmd::resolve("gas1d", "epk").unwrap()).unwrap();
    let spaced = tmp("spaced.epk", &src.replace("dt(rho) + dx(rho*u)", "dt(rho)   +   dx(rho*u)"));
    let changed = tmp("changed.epk", &src.replace("dt(rho) + dx(rho*u)", "dt(rho) + dx(rho*u) + rho"));
    let f = |p: &str| json(&["analyze", p]).0.model.fingerprint;
    assert_eq!(f("gas1d"), f(&spaced));
    assert_ne!(f("gas1d"), f(&changed));
}

#[test]
fn latex_is_standalone() {
    for args in [
        vec!["analyze", "fluid2d"],
        vec!["analyze", "gas1d", "--method", "mueller-liu"],
        vec!["compare", "nonsimple2d"],
        vec!["split", "gas1d"],
        vec!["check", "gas1d", "ideal_gas"],
    ] {
        let mut a = args.clone();
        a.extend(["--output", "latex"]);
        let o = run(a);
        assert_eq!(o.code, 0, "{args:?}");
        assert!(o.stdout.starts_with("\\documentclass{article}"));
        assert!(o.stdout.trim_end().ends_with("\\end{document}"));
        assert!(tex::balanced(&o.stdout), "{args:?}");
        assert_eq!(o.stdout.matches("\\begin{").count(), o.stdout.matches("\\end{").count());
    }
}

#[test]
fn split_flags() {
    let (r, _) = json(&["split", "gas1d", "--assume", "deta/deps = 0", "--assume", "deta/deps != 0"]);
    let entropik_cli::report::Body::Split(s) = r.result else { panic!() };
    assert_eq!(s.tree.status, "closed-inconsistent");
    assert_eq!(s.leaves, 0);
    let o = run(["split", "gas1d", "--assume", "dPhi1/deps ="]);
    assert_eq!(o.code, 1);
}

#[test]
fn golden_reports() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for m in MODELS {
        let (r, _) = json(&["analyze", m]);
        let got = r.deterministic_json();
        let path = dir.join(format!("{m}.json"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(got, want, "{m} differs from its golden report");
    }
}
