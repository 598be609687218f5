use std::collections::BTreeSet;

use entropik_core::solve::{
    close_consequences, is_triangular, solve_for_entropy, solve_leading, solve_with_zeroed, verify_solved, SolveError,
};
use entropik_core::split::analyze_solution_set;
use entropik_core::*;

fn load(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

fn texts(m: &ModelDef, es: &[Expr]) -> BTreeSet<String> {
    es.iter().map(|e| m.expr_text(e)).collect()
}

fn parse(m: &ModelDef, s: &str) -> Expr {
    parse_expr(m, s).unwrap().normalize(Some(&m.ctx())).unwrap()
}

#[test]
fn gas_keys_and_pivots() {
    let m = load("gas1d");
    let s = solve_leading(&m).unwrap();
    assert_eq!(s.keys, m.leading);
    assert_eq!(texts(&m, &s.pivots), ["rho".to_string()].into());
    assert_eq!(s.rhs(m.jet("rho", &["t"])).unwrap(), &parse(&m, "-rho*dx(u) - u*dx(rho)"));
    assert!(is_triangular(&m, &s));
    let (_, closed) = solve_for_entropy(&m).unwrap();
    assert!(closed.log.is_empty());
}

#[test]
fn fluid_pivots() {
    let m = load("fluid2d");
    let s = solve_leading(&m).unwrap();
    assert_eq!(texts(&m, &s.pivots), ["rho".to_string(), "deps/dtheta".to_string()].into());
}

#[test]
fn zeroed_pivot_is_singular() {
    let m = load("fluid2d");
    let et = m.partial("eps", &[m.field("theta")]).unwrap();
    assert_eq!(solve_with_zeroed(&m, &[et]), Err(SolveError::SingularSystem));
}

#[test]
fn omitted_leading_is_singular() {
    let mut m = load("gas1d");
    m.leading[2] = m.jet("u", &["x", "x"]);
    let r = solve_leading(&m);
    assert!(matches!(r, Err(SolveError::SingularSystem)), "{r:?}");
}

#[test]
fn nonsimple_closure_keys() {
    let m = load("nonsimple2d");
    let (_, s) = solve_for_entropy(&m).unwrap();
    let keys: BTreeSet<String> = s.log.iter().map(|c| m.atom_text(c.key)).collect();
    let want: BTreeSet<String> = ["rho_tt", "rho_tx", "rho_ty", "u_tx", "v_ty"].iter().map(|s| s.to_string()).collect();
    assert_eq!(keys, want);
    assert!(is_triangular(&m, &s));
    assert!(verify_solved(&m, &s).unwrap().ok());
}

#[test]
fn granular_closure_keys() {
    let m = load("granular2d");
    let (_, s) = solve_for_entropy(&m).unwrap();
    let keys: BTreeSet<String> = s.log.iter().map(|c| m.atom_text(c.key)).collect();
    let want: BTreeSet<String> = ["u_tx", "u_ty", "v_tx", "v_ty"].iter().map(|s| s.to_string()).collect();
    assert_eq!(keys, want);
}

#[test]
fn perturbed_rhs_is_flagged() {
    let m = load("gas1d");
    let mut s = solve_leading(&m).unwrap();
    let k = m.leading[1];
    let v = s.rhs(k).unwrap().add(&Expr::one());
    s.subst.insert(k, v);
    let r = verify_solved(&m, &s).unwrap();
    assert_eq!(r.nonzero.len(), 1);
    assert_eq!(r.nonzero[0].equation, m.equations[1].label);
}

#[test]
fn closure_is_noop_without_targets() {
    let m = load("gas1d");
    let s = solve_leading(&m).unwrap();
    let c = close_consequences(&m, s.clone(), &Expr::zero()).unwrap();
    assert_eq!(c.keys.len(), s.keys.len());
}

#[test]
fn gas_constraints() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    assert!(r.system.residual.is_zero());
    let want = texts(
        &m,
        &[
            parse(&m, "rho^2*deta/drho + p*deta/deps"),
            parse(&m, "dPhi1/drho - deta/deps*dq1/drho"),
            parse(&m, "dPhi1/deps - deta/deps*dq1/deps"),
        ],
    );
    assert_eq!(texts(&m, &r.system.exprs()), want);
    assert_eq!(r.system.reconstruct(), *r.entropy.num());
}

#[test]
fn fluid_constraints_and_residual() {
    let m = load("fluid2d");
    let r = analyze_solution_set(&m).unwrap();
    assert_eq!(r.system.constraints.len(), 8);
    let res = parse(
        &m,
        "(dx(theta)*(deps/dtheta*dPhi1/dtheta - deta/dtheta*dq1/dtheta) + dy(theta)*(deps/dtheta*dPhi2/dtheta - deta/dtheta*dq2/dtheta))/(deps/dtheta)",
    );
    assert_eq!(r.system.residual, res);
    assert_eq!(m.expr_text(&r.system.residual_den), "deps/dtheta");
    assert!(texts(&m, &r.system.side_conditions).contains("deps/dtheta"));
}

#[test]
fn nonsimple_constraints() {
    let m = load("nonsimple2d");
    let r = analyze_solution_set(&m).unwrap();
    assert!(r.system.residual.is_zero());
    let got = texts(&m, &r.system.exprs());
    for s in ["deps/dtheta*deta/drho_t - deta/dtheta*deps/drho_t", "T12"] {
        let e = parse(&m, s).num().monic();
        assert!(got.contains(&m.expr_text(&Expr::poly(e))), "missing {s}");
    }
    assert!(!r.system.implied.is_empty());
}

#[test]
fn granular_properties() {
    let m = load("granular2d");
    let r = analyze_solution_set(&m).unwrap();
    assert!(!r.system.residual.is_zero());
    assert_eq!(r.system.reconstruct(), *r.entropy.num());
    let sym = r
        .system
        .constraints
        .iter()
        .filter(|c| c.sources.iter().any(|s| matches!(s, split::ConstraintSource::Symmetry { .. })))
        .count();
    assert_eq!(sym, m.constits.iter().filter(|d| !d.symmetric.is_empty()).count());
}
