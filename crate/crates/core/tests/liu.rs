use std::collections::BTreeSet;

use entropik_core::liu::*;
use entropik_core::split::analyze_solution_set;
use entropik_core::*;

fn load(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

fn run(name: &str) -> (ModelDef, Comparison) {
    let m = load(name);
    let (x, lr) = analyze_liu(&m, None).unwrap();
    let r = analyze_solution_set(&m).unwrap();
    let c = compare(&m, &x, &lr, &r.system);
    (m, c)
}

#[test]
fn gas_multipliers() {
    let (m, c) = run("gas1d");
    assert_eq!(c.verdict, Verdict::Identical);
    assert!(!c.incomplete);
    let got: BTreeSet<(String, String)> =
        c.elimination.solved.iter().map(|(a, v)| (m.atom_text(*a), m.expr_text(v))).collect();
    let want: BTreeSet<(String, String)> =
        [("Lambda_momentum", "0"), ("Lambda_mass", "rho*deta/drho"), ("Lambda_energy", "deta/deps")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
    assert_eq!(got, want);
    assert!(c.elimination.generic.is_empty());
}

#[test]
fn fluid_identical() {
    let (_, c) = run("fluid2d");
    assert_eq!(c.verdict, Verdict::Identical);
    assert!(c.liu_only.is_empty() && c.solution_set_only.is_empty());
}

#[test]
fn nonsimple_liu_requires_constant_fluxes() {
    let (m, c) = run("nonsimple2d");
    assert_eq!(c.verdict, Verdict::LiuOverRestricts);
    let extra: BTreeSet<String> = c.liu_only.iter().map(|e| m.expr_text(e)).collect();
    for f in ["q1", "q2", "Phi1", "Phi2"] {
        for v in ["rho", "theta"] {
            assert!(extra.contains(&format!("d{f}/d{v}")), "missing d{f}/d{v}: {extra:?}");
        }
    }
}

#[test]
fn splitting_set_excludes_dependency() {
    let m = load("nonsimple2d");
    let (_, lr) = analyze_liu(&m, None).unwrap();
    let rho_t = m.jet("rho", &["t"]);
    assert!(lr.dependency.contains(&rho_t));
    assert!(!lr.splitting.contains(&rho_t));
    assert!(lr.splitting.contains(&m.jet("rho", &["t", "t"])));
}
