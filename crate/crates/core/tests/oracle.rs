use entropik_core::oracle::numeric_oracle;
use entropik_core::split::analyze_solution_set;
use entropik_core::*;

fn load(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

#[test]
fn gas_all_trials_pass_with_witnesses() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let o = numeric_oracle(&m, &r, 100, 1);
    assert!(o.ok(), "{:?}", o.failures);
    assert_eq!(o.variety_pass, 100);
    assert_eq!(o.witnesses.len(), 3);
}

#[test]
fn fluid_on_variety_matches_residual() {
    let m = load("fluid2d");
    let r = analyze_solution_set(&m).unwrap();
    let o = numeric_oracle(&m, &r, 100, 3);
    assert!(o.ok());
    assert_eq!(o.variety_pass, 100);
}

#[test]
fn same_seed_same_report() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    assert_eq!(numeric_oracle(&m, &r, 20, 9), numeric_oracle(&m, &r, 20, 9));
}

#[test]
fn tampered_system_is_caught() {
    let m = load("gas1d");
    let mut r = analyze_solution_set(&m).unwrap();
    // Drop the pressure relation: points on the smaller variety no longer give zero entropy.
    let p = m.partial("eta", &[m.field("rho")]).unwrap();
    r.system.constraints.retain(|c| !c.expr.contains_atom(p));
    let o = numeric_oracle(&m, &r, 30, 7);
    assert!(!o.ok());
    assert!(o.failures.iter().all(|f| f.check == "on-variety" && !f.point.is_empty()));
}
