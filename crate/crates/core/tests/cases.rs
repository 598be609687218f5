use std::collections::BTreeSet;

use entropik_core::cases::*;
use entropik_core::split::analyze_solution_set;
use entropik_core::*;

fn load(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

fn ex(m: &ModelDef, s: &str) -> Expr {
    parse_expr(m, s).unwrap().normalize(Some(&m.ctx())).unwrap()
}

fn texts(m: &ModelDef, es: &[Expr]) -> BTreeSet<String> {
    es.iter().map(|e| m.expr_text(e)).collect()
}

#[test]
fn gas_tree_has_four_leaves_on_three_pivots() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let t = build_tree(&m, &r.system, &[], 3);
    assert_eq!(t.leaves().len(), 4);
    let want = texts(&m, &[ex(&m, "deta/deps"), ex(&m, "dPhi1/deps"), ex(&m, "dPhi1/drho")]);
    assert_eq!(texts(&m, &t.pivots()), want);
    assert_eq!(texts(&m, &pivot_candidates(&m, &r.system)), want);
}

#[test]
fn gas_case_four_gives_constant_entropy() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let out = apply_assumptions(&m, &r.system, &[Assumption::zero(ex(&m, "deta/deps"))]);
    let Outcome::Consistent(red) = out else { panic!("inconsistent") };
    let zero = texts(&m, &red.vanishing().into_iter().map(Expr::atom).collect::<Vec<_>>());
    for s in ["deta/deps", "deta/drho", "dPhi1/deps", "dPhi1/drho"] {
        assert!(zero.contains(s), "{s} not derived zero: {zero:?}");
    }
    assert!(red.pending.is_empty());
}

#[test]
fn gas_case_two_derives_energy_flux_relation() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let asm = [Assumption::zero(ex(&m, "dPhi1/deps")), Assumption::nonzero(ex(&m, "deta/deps"))];
    let Outcome::Consistent(red) = apply_assumptions(&m, &r.system, &asm) else { panic!() };
    assert!(red.vanishing().contains(&ex(&m, "dq1/deps").as_atom().unwrap()));
    assert!(red.certificates.iter().all(|c| !c.divisor.is_zero()));
}

#[test]
fn contradictory_assumptions_close_the_root() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let p = ex(&m, "deta/deps");
    let asm = [Assumption::zero(p.clone()), Assumption::nonzero(p.clone())];
    assert!(matches!(apply_assumptions(&m, &r.system, &asm), Outcome::Inconsistent(_)));
    let t = build_tree(&m, &r.system, &asm, 3);
    assert_eq!(t.status, NodeStatus::ClosedInconsistent);
    assert!(t.leaves().is_empty());
}

#[test]
fn no_pivots_single_leaf() {
    let m = load("gas1d");
    let mut r = analyze_solution_set(&m).unwrap();
    r.system.constraints.clear();
    let t = build_tree(&m, &r.system, &[], 3);
    assert_eq!(t.status, NodeStatus::Leaf);
    assert!(pivot_candidates(&m, &r.system).is_empty());
}

#[test]
fn adiabatic_fluid_tree() {
    let m = load("fluid2d");
    let r = analyze_solution_set(&m).unwrap();
    let cs = force_residual_zero(&r.system);
    assert_eq!(cs.constraints.len(), 9);
    let t = build_tree(&m, &cs, &[], 4);
    assert_eq!(t.leaves().len(), 4);
    let want = texts(
        &m,
        &[
            ex(&m, "deps/dtheta*deta/drho/dtheta - deta/dtheta*deps/drho/dtheta"),
            ex(&m, "deps/dtheta*deta/dtheta/dtheta - deta/dtheta*deps/dtheta/dtheta"),
        ],
    );
    assert_eq!(texts(&m, &t.pivots()), want);
}

#[test]
fn general_fluid_tree_has_two_cases() {
    let m = load("fluid2d");
    let r = analyze_solution_set(&m).unwrap();
    assert_eq!(build_tree(&m, &r.system, &[], 4).leaves().len(), 2);
}

#[test]
fn leaves_are_disjoint() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let t = build_tree(&m, &r.system, &[], 3);
    let leaves = t.leaves();
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            let opposite = a
                .assumptions
                .iter()
                .any(|x| b.assumptions.iter().any(|y| x.expr == y.expr && x.polarity != y.polarity));
            assert!(opposite);
        }
    }
}

#[test]
fn zero_assumption_does_not_add_constraints() {
    let m = load("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    let base = match apply_assumptions(&m, &r.system, &[]) {
        Outcome::Consistent(x) => x.constraints().len(),
        _ => panic!(),
    };
    let z = match apply_assumptions(&m, &r.system, &[Assumption::zero(ex(&m, "dPhi1/drho"))]) {
        Outcome::Consistent(x) => {
            x.constraints().iter().filter(|c| c.atoms().iter().any(|a| !x.vanishing().contains(a))).count()
        }
        _ => panic!(),
    };
    assert!(z <= base);
}
