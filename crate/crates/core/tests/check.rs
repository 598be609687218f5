use entropik_core::check::*;
use entropik_core::split::analyze_solution_set;
use entropik_core::*;

fn root() -> String {
    format!("{}/../../models", env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> ModelDef {
    let path = format!("{}/{name}.epk", root());
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

fn bindings(name: &str) -> String {
    std::fs::read_to_string(format!("{}/{name}.bind", root())).unwrap()
}

#[test]
fn ideal_gas_passes() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let b = Bindings::parse(&m, &bindings("ideal_gas")).unwrap();
    let rep = check_candidate(&m, &r.system, &b).unwrap();
    assert_eq!(rep.checks.len(), 3);
    assert!(rep.pass, "{rep:?}");
    let s = sample_production(&m, &r, &b, 50, 7).unwrap();
    assert!(s.identically_zero);
    assert_eq!(s.zero + s.undefined, 50);
}

#[test]
fn gamma_sensitivity() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let text = |g: i32| {
        format!(
            "parameter gamma = {g}\nparameter Cv = 1\nbind p = rho*eps\nbind deta/deps = Cv/eps\n\
             bind deta/drho = -Cv*(gamma - 1)/rho\nbind q1 = 0\nbind Phi1 = 0\n"
        )
    };
    let pass = |g| check_candidate(&m, &r.system, &Bindings::parse(&m, &text(g)).unwrap()).unwrap().pass;
    assert!(pass(2));
    assert!(!pass(3));
}

#[test]
fn nonsimple_family_passes_and_anisotropy_fails() {
    let m = load("nonsimple2d");
    let r = analyze_solution_set(&m).unwrap();
    let src = bindings("eq49");
    let rep = check_candidate(&m, &r.system, &Bindings::parse(&m, &src).unwrap()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.residual, "0");
    let bad = src.replace("bind T12 = 0", "bind T12 = 3");
    let rep = check_candidate(&m, &r.system, &Bindings::parse(&m, &bad).unwrap()).unwrap();
    assert!(!rep.pass);
    let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.constraint.as_str()).collect();
    assert_eq!(failed, ["T12"]);
}

#[test]
fn missing_binding_is_reported() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let b = Bindings::parse(&m, "bind p = rho*eps\nbind q1 = 0\n").unwrap();
    let e = check_candidate(&m, &r.system, &b).unwrap_err();
    assert!(matches!(e, CheckError::UnboundSymbol(_)));
    assert_eq!(e.code(), "E601");
}

#[test]
fn logarithm_is_rejected() {
    let m = load("gas1d");
    for src in ["bind eta = log(eps)", "bind p = rho^(1/2)", "bind p = rho^0.5"] {
        let e = Bindings::parse(&m, src).unwrap_err();
        assert!(matches!(e, CheckError::NonRationalBinding { line: 1, .. }), "{src}: {e:?}");
    }
}

#[test]
fn higher_partials_follow_from_bound_ones() {
    let m = load("gas1d");
    let b = Bindings::parse(&m, "parameter Cv\nbind deta/deps = Cv/eps\n").unwrap();
    let e = parse_expr(&m, "deta/deps/deps").unwrap().normalize(Some(&m.ctx())).unwrap();
    assert_eq!(m.expr_text(&b.apply(&m, &e).unwrap()), "-Cv/(eps^2)");
}

#[test]
fn directive_errors() {
    let m = load("gas1d");
    assert!(matches!(Bindings::parse(&m, "bogus x"), Err(CheckError::BadDirective { line: 1, .. })));
    assert!(matches!(Bindings::parse(&m, "\nbind rho = 1"), Err(CheckError::BadDirective { line: 2, .. })));
    assert!(matches!(Bindings::parse(&m, "parameter g = rho"), Err(CheckError::BadDirective { .. })));
}
