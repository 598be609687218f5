//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test harness so the
//! lines always show; `cargo test -p entropik-cli --test acceptance`.

use std::time::{Duration, Instant};

use entropik_cli::report::{Body, Report};
use entropik_cli::run;
use entropik_core::kernel::{Atom, DiffContext, Expr, MultiIndex};
use entropik_core::solve::{is_triangular, solve_for_entropy, verify_solved};
use entropik_core::split::analyze_solution_set;
use entropik_core::{format_model, parse_model, ModelDef};

type Check = Result<(), String>;
/// Description, time budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

fn report(args: &[&str]) -> Result<Report, String> {
    let mut a = args.to_vec();
    a.extend(["--output", "json"]);
    let o = run(a.iter().copied());
    if o.code > 1 {
        return Err(format!("{args:?} exited {}: {}", o.code, o.stderr));
    }
    Report::from_json(&o.stdout).map_err(|e| format!("{args:?}: {e}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

macro_rules! body {
    ($r:expr, $kind:ident) => {
        match $r.result {
            Body::$kind(b) => b,
            other => return Err(format!("unexpected result kind {other:?}")),
        }
    };
}

fn c1() -> Check {
    let s = body!(report(&["analyze", "gas1d"])?, SolutionSet);
    ensure(s.constraints.len() == 3, || format!("{} constraints", s.constraints.len()))?;
    ensure(s.residual == "0", || format!("residual {}", s.residual))
}

fn c2() -> Check {
    let s = body!(report(&["analyze", "fluid2d"])?, SolutionSet);
    ensure(s.constraints.len() == 8, || format!("{} constraints", s.constraints.len()))?;
    let want = "(theta_y*dPhi2/dtheta*deps/dtheta - theta_y*deta/dtheta*dq2/dtheta \
                + theta_x*dPhi1/dtheta*deps/dtheta - theta_x*deta/dtheta*dq1/dtheta)/(deps/dtheta)";
    ensure(s.residual == want, || format!("residual {}", s.residual))?;
    ensure(s.side_conditions.iter().any(|c| c == "deps/dtheta"), || format!("side {:?}", s.side_conditions))
}

fn c3() -> Check {
    for m in ["gas1d", "fluid2d"] {
        let c = body!(report(&["compare", m])?, Compare);
        ensure(c.verdict == "identical", || format!("{m}: {}", c.verdict))?;
    }
    let c = body!(report(&["compare", "gas1d"])?, Compare);
    let get = |n: &str| c.multipliers.iter().find(|p| p.name == n).map(|p| p.value.clone());
    ensure(get("Lambda_momentum").as_deref() == Some("0"), || format!("{:?}", c.multipliers))?;
    ensure(get("Lambda_mass").as_deref() == Some("rho*deta/drho"), || format!("{:?}", c.multipliers))?;
    ensure(get("Lambda_energy").as_deref() == Some("deta/deps"), || format!("{:?}", c.multipliers))
}

fn c4() -> Check {
    let s = body!(report(&["analyze", "nonsimple2d"])?, SolutionSet);
    let exprs: Vec<&str> = s.constraints.iter().map(|c| c.expr.as_str()).collect();
    ensure(exprs.contains(&"deps/dtheta*deta/drho_t - deps/drho_t*deta/dtheta"), || format!("{exprs:?}"))?;
    ensure(exprs.contains(&"T12"), || format!("{exprs:?}"))?;
    ensure(s.residual == "0", || format!("residual {}", s.residual))?;
    let mut keys: Vec<&str> = s.keys.iter().filter(|k| !s.leading.contains(k)).map(String::as_str).collect();
    keys.sort();
    ensure(keys == ["rho_tt", "rho_tx", "rho_ty", "u_tx", "v_ty"], || format!("closure keys {keys:?}"))?;
    let c = body!(report(&["compare", "nonsimple2d"])?, Compare);
    ensure(c.verdict == "liu-over-restricts", || c.verdict.clone())?;
    let mut extra = c.liu_only.clone();
    extra.sort();
    let mut want: Vec<String> =
        ["q1", "q2", "Phi1", "Phi2"].iter().flat_map(|f| ["rho", "theta"].map(|v| format!("d{f}/d{v}"))).collect();
    want.sort();
    ensure(extra == want, || format!("liu-only {extra:?}"))
}

fn c5() -> Check {
    let s = body!(report(&["split", "gas1d"])?, Split);
    ensure(s.leaves == 4, || format!("gas1d leaves {}", s.leaves))?;
    let case4 = s
        .tree
        .children
        .iter()
        .find(|n| n.assumptions.last().is_some_and(|a| a == "deta/deps = 0"))
        .ok_or("no leaf for deta/deps = 0")?;
    for sym in ["deta/deps", "deta/drho", "dPhi1/deps", "dPhi1/drho"] {
        let zero = case4.solved.iter().any(|p| p.name == sym && p.value == "0");
        ensure(zero, || format!("case deta/deps = 0 does not give {sym} = 0: {:?}", case4.solved))?;
    }
    ensure(s.pivots == ["deta/deps", "dPhi1/deps", "dPhi1/drho"], || format!("gas1d pivots {:?}", s.pivots))?;
    let s = body!(report(&["split", "fluid2d", "--force-residual-zero"])?, Split);
    ensure(s.leaves == 4, || format!("fluid2d leaves {}", s.leaves))?;
    let p1 = "deps/dtheta*deta/dtheta/dtheta - deps/dtheta/dtheta*deta/dtheta";
    let p2 = "deps/dtheta*deta/drho/dtheta - deps/drho/dtheta*deta/dtheta";
    ensure(s.pivots == [p1, p2], || format!("fluid2d pivots {:?}", s.pivots))
}

/// Small deterministic expression generator for the kernel laws.
struct Gen(u64);

impl Gen {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn pick(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn jet(&mut self, f: &str) -> Atom {
        Atom::jet(f, MultiIndex(vec![self.pick(2) as u32, self.pick(2) as u32]))
    }

    fn leaf(&mut self) -> Expr {
        match self.pick(5) {
            0 => Expr::int(self.pick(11) as i64 - 5),
            1 => Expr::atom(Atom::indep("x")),
            2 => Expr::atom(self.jet("rho")),
            3 => Expr::atom(self.jet("u")),
            _ => Expr::atom(Atom::partial("q", MultiIndex(vec![self.pick(2) as u32, self.pick(2) as u32, 0]))),
        }
    }

    fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.pick(3) == 0 {
            return self.leaf();
        }
        let (a, b) = (self.expr(depth - 1), self.expr(depth - 1));
        match self.pick(3) {
            0 => a.add(&b),
            1 => a.sub(&b),
            _ => a.mul(&b),
        }
    }
}

fn c6() -> Check {
    let mut ctx = DiffContext::new(vec!["t".into(), "x".into()]);
    let rho = Atom::jet("rho", MultiIndex(vec![0, 0]));
    ctx.declare("q", vec![rho, Atom::jet("u", MultiIndex(vec![0, 0])), Atom::jet("u", MultiIndex(vec![0, 1]))]);
    let d = |e: &Expr, v: &str| ctx.total_derivative(e, v).map_err(|e| e.to_string());
    let mut g = Gen(7);
    for i in 0..1000 {
        let (a, b) = (g.expr(3), g.expr(3));
        let tx = d(&d(&a, "t")?, "x")?;
        let xt = d(&d(&a, "x")?, "t")?;
        ensure(tx.equiv(&xt), || format!("commutation fails on sample {i}"))?;
        let lhs = d(&a.mul(&b), "x")?;
        let rhs = d(&a, "x")?.mul(&b).add(&a.mul(&d(&b, "x")?));
        ensure(lhs.equiv(&rhs), || format!("Leibniz fails on sample {i}"))?;
    }
    for name in ["gas1d", "fluid2d", "nonsimple2d", "granular2d"] {
        let m = load(name);
        let (_, s) = solve_for_entropy(&m).map_err(|e| format!("{name}: {e}"))?;
        ensure(is_triangular(&m, &s), || format!("{name}: not triangular"))?;
        let v = verify_solved(&m, &s).map_err(|e| format!("{name}: {e}"))?;
        ensure(v.ok(), || format!("{name}: verify_solved"))?;
        let r = analyze_solution_set(&m).map_err(|e| format!("{name}: {e}"))?;
        ensure(&r.system.reconstruct() == r.entropy.num(), || format!("{name}: reconstruction"))?;
        ensure(&r.system.denominator == r.entropy.den(), || format!("{name}: denominator"))?;
        let back = parse_model(&format_model(&m), name).map_err(|e| format!("{name}: {e:?}"))?;
        ensure(back == m, || format!("{name}: round-trip"))?;
    }
    Ok(())
}

fn c7() -> Check {
    for (m, extra) in [("gas1d", Some("ideal_gas")), ("fluid2d", None)] {
        let mut args = vec!["verify", m, "--trials", "200", "--seed", "7"];
        if let Some(b) = extra {
            args.extend(["--bindings", b]);
        }
        let v = body!(report(&args)?, Verify);
        ensure(v.identity_pass == 200 && v.variety_pass == 200, || {
            format!("{m}: identity {}/200, on-variety {}/200", v.identity_pass, v.variety_pass)
        })?;
        ensure(v.pass, || format!("{m}: failures {:?}", v.failures))?;
        if extra.is_some() {
            let p = v.production.ok_or("no production sample")?;
            ensure(p.identically_zero && p.zero == 200, || format!("{m}: production {}", p.symbolic))?;
        }
    }
    Ok(())
}

fn c8() -> Check {
    let c = body!(report(&["check", "nonsimple2d", "eq49"])?, Check);
    ensure(c.pass, || format!("eq49 fails: {:?}", c.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()))?;
    let text = std::fs::read_to_string(format!("{}/../../models/eq49.bind", env!("CARGO_MANIFEST_DIR")))
        .map_err(|e| e.to_string())?;
    let perturbed = text.replace("bind T12 = 0", "bind T12 = 3");
    ensure(perturbed != text, || "eq49 has no `bind T12 = 0` line".into())?;
    let p = std::env::temp_dir().join(format!("entropik-accept-{}.bind", std::process::id()));
    std::fs::write(&p, perturbed).map_err(|e| e.to_string())?;
    let c = body!(report(&["check", "nonsimple2d", p.to_str().unwrap()])?, Check);
    let _ = std::fs::remove_file(&p);
    ensure(!c.pass, || "perturbed T12 passes".into())?;
    let failing: Vec<&str> = c.checks.iter().filter(|c| !c.pass).map(|c| c.constraint.as_str()).collect();
    ensure(failing == ["T12"], || format!("perturbed failures {failing:?}"))
}

fn c9() -> Check {
    let start = Instant::now();
    let s = body!(report(&["analyze", "granular2d"])?, SolutionSet);
    let took = start.elapsed();
    ensure(took < Duration::from_secs(600), || format!("took {took:?}"))?;
    for k in ["u_tx", "u_ty", "v_tx", "v_ty"] {
        let closure = s.keys.iter().any(|x| x == k) && !s.leading.iter().any(|x| x == k);
        ensure(closure, || format!("closure keys {:?} lack {k}", s.keys))?;
    }
    let m = load("granular2d");
    for d in m.constits.iter().filter(|d| !d.symmetric.is_empty()) {
        let tag = format!("symmetry of {} ", d.name);
        let found = s.constraints.iter().any(|c| c.sources.iter().any(|x| x.starts_with(&tag)));
        ensure(found, || format!("no symmetrization constraint for {}", d.name))?;
    }
    ensure(s.residual != "0", || "residual is zero".into())?;
    let r = analyze_solution_set(&m).map_err(|e| e.to_string())?;
    ensure(&r.system.reconstruct() == r.entropy.num(), || "reconstruction".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("gas1d constraints and zero residual", 1, c1),
        ("fluid2d constraints, residual and side condition", 5, c2),
        ("compare agrees on gas1d and fluid2d; gas multipliers", 5, c3),
        ("nonsimple2d closure, constraints and Liu flux constancy", 30, c4),
        ("case splits for gas1d and forced fluid2d", 30, c5),
        ("kernel laws and per-model properties", 120, c6),
        ("oracle verification and ideal-gas production", 120, c7),
        ("nonsimple candidate check and T12 perturbation", 30, c8),
        ("granular2d analysis", 600, c9),
    ];
    let mut failed = Vec::new();
    for (i, (what, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f().and_then(|()| {
            let took = start.elapsed();
            ensure(took <= Duration::from_secs(*budget), || format!("took {took:.1?}, budget {budget}s"))
        });
        match r {
            Ok(()) => println!("criterion {}: PASS  {what} ({:.1?})", i + 1, start.elapsed()),
            Err(e) => {
                println!("criterion {}: FAIL  {what}: {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: 9/9 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
