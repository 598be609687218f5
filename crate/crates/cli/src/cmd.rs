//! Command implementations behind the `entropik` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use entropik_core::cases::{self, Assumption, CaseNode, NodeStatus};
use entropik_core::check::{self, Bindings};
use entropik_core::kernel::{Atom, Expr};
use entropik_core::liu::{self, Comparison, Elimination, LiuResult};
use entropik_core::oracle::numeric_oracle;
use entropik_core::split::{analyze_solution_set, ConstraintSource, SolutionSetResult};
use entropik_core::{parse_assumption, parse_expr, parse_model, ModelDef};

use crate::report::*;
use crate::tex::{self, Block};

#[derive(Parser, Debug)]
#[command(name = "entropik", version, about = "Solution set entropy principle for constitutive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    SolutionSet,
    MuellerLiu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
    Latex,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Model file, or the name of a bundled model such as `gas1d`.
    pub model: String,
    #[arg(long, value_enum, default_value = "text")]
    pub output: Output,
    /// Highest derivative order of differential consequences.
    #[arg(long)]
    pub max_order: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derive the constraint equations and the residual inequality.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "solution-set")]
        method: Method,
        /// Multiplier arguments for the Liu method, comma separated.
        #[arg(long)]
        multiplier_dep: Option<String>,
    },
    /// Compare the solution set constraints with the Liu identities.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        multiplier_dep: Option<String>,
    },
    /// Case tree over the nonzero factors of the constraints.
    Split {
        #[command(flatten)]
        common: Common,
        /// Root assumption such as "dPhi1/deps = 0" or "deta/deps != 0"; repeatable.
        #[arg(long)]
        assume: Vec<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Require the residual to vanish as well (adiabatic processes).
        #[arg(long)]
        force_residual_zero: bool,
        /// Classifying functions, comma separated; overrides the model's `classify:` line.
        #[arg(long)]
        classify: Option<String>,
    },
    /// Exact random spot checks of the derived system.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also sample the entropy production under these bindings.
        #[arg(long)]
        bindings: Option<String>,
    },
    /// Check candidate constitutive functions against the constraints.
    Check {
        #[command(flatten)]
        common: Common,
        /// Bindings file, or the name of a bundled one such as `eq49`.
        bindings_file: Option<String>,
        #[arg(long)]
        bindings: Option<String>,
    },
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(code: i32, msg: String) -> Outcome {
        Outcome { code, stdout: String::new(), stderr: msg }
    }
}

fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

/// A path as given, else `<name>.<ext>` under `$ENTROPIK_MODELS`, `./models` or the bundled models.
pub fn resolve(arg: &str, ext: &str) -> Option<PathBuf> {
    let p = PathBuf::from(arg);
    if p.is_file() {
        return Some(p);
    }
    let mut dirs: Vec<PathBuf> = Vec::new();
    if let Ok(d) = std::env::var("ENTROPIK_MODELS") {
        dirs.push(d.into());
    }
    dirs.push("models".into());
    dirs.push(bundled_dir());
    let stem = arg.trim_end_matches("-bindings");
    dirs.into_iter().map(|d| d.join(format!("{stem}.{ext}"))).find(|p| p.is_file())
}

struct Timer {
    start: Instant,
    last: Instant,
    stages: Vec<Stage>,
}

impl Timer {
    fn new() -> Timer {
        let now = Instant::now();
        Timer { start: now, last: now, stages: Vec::new() }
    }

    fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(Stage { name: name.into(), us: (now - self.last).as_micros() as u64 });
        self.last = now;
    }

    fn finish(self) -> Timings {
        Timings { total_us: self.start.elapsed().as_micros() as u64, stages: self.stages }
    }
}

fn load(c: &Common) -> Result<(ModelDef, String), Outcome> {
    let Some(path) = resolve(&c.model, "epk") else {
        return Err(Outcome::fail(1, format!("error: model `{}` not found\n", c.model)));
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| Outcome::fail(1, format!("error: {}: {e}\n", path.display())))?;
    let mut m = parse_model(&text, &path.display().to_string())
        .map_err(|ds| Outcome::fail(1, ds.iter().map(|d| format!("{d}\n")).collect()))?;
    if let Some(k) = c.max_order {
        m.max_order = Some(k);
    }
    let errs = m.validate();
    if !errs.is_empty() {
        return Err(Outcome::fail(1, errs.iter().map(|e| format!("error[{}]: {e}\n", e.code())).collect()));
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((m, name))
}

fn engine(code: &str, msg: impl std::fmt::Display) -> Outcome {
    Outcome::fail(2, format!("error[{code}]: {msg}\n"))
}

fn texts(m: &ModelDef, es: &[Expr]) -> Vec<String> {
    es.iter().map(|e| m.expr_text(e)).collect()
}

fn atoms(m: &ModelDef, xs: impl IntoIterator<Item = Atom>) -> Vec<String> {
    xs.into_iter().map(|a| m.atom_text(a)).collect()
}

fn indep_word(m: &ModelDef, idx: &entropik_core::kernel::MultiIndex) -> String {
    idx.0.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(m.indeps[i].as_str(), k as usize)).collect()
}

fn source_text(m: &ModelDef, s: &ConstraintSource) -> String {
    match s {
        ConstraintSource::Coefficient { monomial } => {
            let f: Vec<String> = monomial
                .iter()
                .map(|&(a, k)| if k == 1 { m.atom_text(a) } else { format!("{}^{k}", m.atom_text(a)) })
                .collect();
            format!("coefficient of {}", f.join("*"))
        }
        ConstraintSource::Symmetry { symbol, slots } => {
            format!("symmetry of {symbol} in slots {} and {}", slots.0, slots.1)
        }
        ConstraintSource::Residual => "residual".into(),
        ConstraintSource::Assumption => "assumption".into(),
    }
}

fn solution_set_out(m: &ModelDef, r: &SolutionSetResult) -> SolutionSetOut {
    let cs = &r.system;
    SolutionSetOut {
        leading: atoms(m, m.leading.iter().copied()),
        keys: atoms(m, r.solved.keys.iter().copied()),
        pivots: texts(m, &r.solved.pivots),
        consequences: r
            .solved
            .log
            .iter()
            .map(|s| ConsequenceOut { key: m.atom_text(s.key), equation: s.equation.clone(), by: indep_word(m, &s.by) })
            .collect(),
        free_elements: atoms(m, cs.free.iter().copied()),
        constraints: cs
            .constraints
            .iter()
            .map(|c| ConstraintOut {
                expr: m.expr_text(&c.expr),
                sources: c.sources.iter().map(|s| source_text(m, s)).collect(),
                cancelled: texts(m, &c.cancelled),
            })
            .collect(),
        implied: cs
            .implied
            .iter()
            .map(|(d, b)| ImpliedOut { dropped: m.expr_text(d), multiple_of: m.expr_text(b) })
            .collect(),
        residual: m.expr_text(&cs.residual),
        residual_denominator: m.expr_text(&cs.residual_den),
        side_conditions: texts(m, &cs.side_conditions),
    }
}

fn pairs(m: &ModelDef, xs: &[(Atom, Expr)]) -> Vec<Pair> {
    xs.iter().map(|(a, v)| Pair { name: m.atom_text(*a), value: m.expr_text(v) }).collect()
}

fn liu_out(m: &ModelDef, lr: &LiuResult, el: &Elimination) -> LiuOut {
    LiuOut {
        dependency: atoms(m, lr.dependency.iter().copied()),
        splitting: atoms(m, lr.splitting.iter().copied()),
        identities: texts(m, &lr.identities),
        multipliers: pairs(m, &el.solved),
        unsolved: atoms(m, el.unsolved.iter().copied()),
        physical: texts(m, &el.physical),
        generic: texts(m, &el.generic),
        leftover: texts(m, &el.leftover),
        residual: m.expr_text(&el.residual),
    }
}

fn compare_out(m: &ModelDef, c: &Comparison) -> CompareOut {
    CompareOut {
        verdict: c.verdict.as_str().into(),
        both: texts(m, &c.both),
        liu_only: texts(m, &c.liu_only),
        solution_set_only: texts(m, &c.solution_set_only),
        multipliers: pairs(m, &c.elimination.solved),
        generic: texts(m, &c.elimination.generic),
        incomplete: c.incomplete,
    }
}

fn status_text(s: NodeStatus) -> &'static str {
    match s {
        NodeStatus::Open => "open",
        NodeStatus::ClosedInconsistent => "closed-inconsistent",
        NodeStatus::Leaf => "leaf",
    }
}

fn node_out(m: &ModelDef, n: &CaseNode) -> NodeOut {
    let (solved, pending) = match &n.system {
        Some(r) => (pairs(m, &r.solved), texts(m, &r.pending)),
        None => (Vec::new(), Vec::new()),
    };
    NodeOut {
        assumptions: n.assumptions.iter().map(|a| cases::assumption_text(m, a)).collect(),
        status: status_text(n.status).into(),
        pivot: n.pivot.as_ref().map(|p| m.expr_text(p)),
        contradiction: n.contradiction.clone(),
        solved,
        pending,
        pruned: n.pruned.clone(),
        depth_cap_hit: n.depth_cap_hit,
        children: n.children.iter().map(|c| node_out(m, c)).collect(),
    }
}

fn parse_atoms(m: &ModelDef, list: &str) -> Result<Vec<Atom>, Outcome> {
    let mut out = Vec::new();
    for s in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let t = parse_expr(m, s).map_err(|d| Outcome::fail(1, format!("{d}\n")))?;
        match t.normalize(Some(&m.ctx())).ok().and_then(|e| e.as_atom()) {
            Some(a) => out.push(a),
            None => return Err(Outcome::fail(1, format!("error: `{s}` is not a variable\n"))),
        }
    }
    Ok(out)
}

fn load_bindings(m: &ModelDef, arg: &str) -> Result<Bindings, Outcome> {
    let Some(path) = resolve(arg, "bind") else {
        return Err(Outcome::fail(1, format!("error: bindings `{arg}` not found\n")));
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| Outcome::fail(1, format!("error: {}: {e}\n", path.display())))?;
    Bindings::parse(m, &text).map_err(|e| Outcome::fail(1, format!("{}: error[{}]: {e}\n", path.display(), e.code())))
}

fn list(out: &mut String, head: &str, xs: &[String]) {
    out.push_str(&format!("{head} ({}):\n", xs.len()));
    for x in xs {
        out.push_str(&format!("  {x}\n"));
    }
}

fn text(r: &Report) -> String {
    let mut o = format!("model {} [{}]\n", r.model.name, &r.model.fingerprint[..12]);
    match &r.result {
        Body::SolutionSet(s) => {
            o.push_str("method solution-set\n");
            list(&mut o, "leading derivatives", &s.leading);
            let cons: Vec<String> =
                s.consequences.iter().map(|c| format!("{} from d{}({})", c.key, c.by, c.equation)).collect();
            list(&mut o, "closure keys", &cons);
            list(&mut o, "pivots", &s.pivots);
            let cs: Vec<String> = s.constraints.iter().map(|c| format!("{} = 0", c.expr)).collect();
            list(&mut o, "constraints", &cs);
            if !s.implied.is_empty() {
                let im: Vec<String> =
                    s.implied.iter().map(|i| format!("{}  (multiple of {})", i.dropped, i.multiple_of)).collect();
                list(&mut o, "implied", &im);
            }
            o.push_str(&format!("residual: {}\n", s.residual));
            o.push_str(&format!("residual denominator: {}\n", s.residual_denominator));
            let sc: Vec<String> = s.side_conditions.iter().map(|c| format!("{c} != 0")).collect();
            list(&mut o, "side conditions", &sc);
        }
        Body::MuellerLiu(l) => {
            o.push_str("method mueller-liu\n");
            list(&mut o, "multiplier arguments", &l.dependency);
            list(&mut o, "liu identities", &l.identities.iter().map(|x| format!("{x} = 0")).collect::<Vec<_>>());
            list(
                &mut o,
                "multipliers",
                &l.multipliers.iter().map(|p| format!("{} = {}", p.name, p.value)).collect::<Vec<_>>(),
            );
            if !l.unsolved.is_empty() {
                list(&mut o, "unsolved multipliers", &l.unsolved);
            }
            list(&mut o, "constraints", &l.physical.iter().map(|x| format!("{x} = 0")).collect::<Vec<_>>());
            o.push_str(&format!("residual: {}\n", l.residual));
        }
        Body::Compare(c) => {
            o.push_str(&format!("verdict: {}\n", c.verdict));
            list(
                &mut o,
                "multipliers",
                &c.multipliers.iter().map(|p| format!("{} = {}", p.name, p.value)).collect::<Vec<_>>(),
            );
            list(&mut o, "both", &c.both);
            list(&mut o, "liu only", &c.liu_only);
            list(&mut o, "solution set only", &c.solution_set_only);
            if c.incomplete {
                o.push_str("note: some multipliers could not be eliminated\n");
            }
        }
        Body::Split(s) => {
            o.push_str(&format!("leaves: {}\n", s.leaves));
            list(&mut o, "pivots", &s.pivots);
            tree_text(&mut o, &s.tree, 0);
        }
        Body::Verify(v) => {
            o.push_str(&format!("constraints: {}\n", v.constraints));
            o.push_str(&format!("identity: {}/{}\n", v.identity_pass, v.trials));
            o.push_str(&format!("on-variety: {}/{} ({} skipped)\n", v.variety_pass, v.trials, v.variety_skipped));
            o.push_str(&format!("necessity witnesses: {}/{}\n", v.witnesses.len(), v.constraints));
            for f in &v.failures {
                o.push_str(&format!("FAIL trial {} {}: {:?}\n", f.trial, f.check, f.point));
            }
            if let Some(p) = &v.production {
                o.push_str(&format!("entropy production under bindings: {}\n", p.symbolic));
                o.push_str(&format!(
                    "  sampled {}: {} zero, {} negative, {} undefined\n",
                    p.trials, p.zero, p.negative, p.undefined
                ));
            }
            o.push_str(if v.pass { "result: pass\n" } else { "result: FAIL\n" });
        }
        Body::Check(c) => {
            for k in &c.checks {
                let mark = if k.pass { "pass" } else { "FAIL" };
                o.push_str(&format!("{mark} [{}] {} = 0", k.index, k.constraint));
                if !k.pass {
                    o.push_str(&format!("  (got {})", k.value));
                }
                o.push('\n');
            }
            o.push_str(&format!("residual: {}\n", c.residual));
            o.push_str(if c.pass { "result: pass\n" } else { "result: FAIL\n" });
        }
    }
    o
}

fn tree_text(o: &mut String, n: &NodeOut, depth: usize) {
    let pad = "  ".repeat(depth);
    let last = n.assumptions.last().cloned().unwrap_or_else(|| "root".into());
    o.push_str(&format!("{pad}- {last} [{}]\n", n.status));
    if let Some(c) = &n.contradiction {
        o.push_str(&format!("{pad}    contradiction: {c}\n"));
    }
    if n.status == "leaf" {
        for p in &n.solved {
            o.push_str(&format!("{pad}    {} = {}\n", p.name, p.value));
        }
        for p in &n.pending {
            o.push_str(&format!("{pad}    {p} = 0\n"));
        }
    }
    for c in &n.children {
        tree_text(o, c, depth + 1);
    }
}

fn math(m: &ModelDef, es: &[Expr], rel: &str) -> Block {
    Block::Math(es.iter().map(|e| format!("{} &{rel} 0", tex::expr(m, e))).collect())
}

fn finish(r: Report, output: Output, latex: impl FnOnce() -> String, ok: bool) -> Outcome {
    let stdout = match output {
        Output::Text => text(&r),
        Output::Json => r.to_json() + "\n",
        Output::Latex => latex(),
    };
    Outcome { code: if ok { 0 } else { 1 }, stdout, stderr: String::new() }
}

fn report(command: &str, m: &ModelDef, name: &str, result: Body, t: Timer) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        engine_version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        model: ModelInfo { name: name.into(), fingerprint: fingerprint(m) },
        result,
        timings: t.finish(),
    }
}

fn liu_run(m: &ModelDef, dep: &Option<String>) -> Result<(entropik_core::model::Expanded, LiuResult), Outcome> {
    let dep = match dep {
        Some(s) => Some(parse_atoms(m, s)?),
        None => None,
    };
    liu::analyze_liu(m, dep).map_err(|e| engine(e.code(), e))
}

fn analyze(common: &Common, method: Method, dep: &Option<String>) -> Result<Outcome, Outcome> {
    let (m, name) = load(common)?;
    let mut t = Timer::new();
    match method {
        Method::SolutionSet => {
            let r = analyze_solution_set(&m).map_err(|e| engine(e.code(), e))?;
            t.stage("solution-set");
            let rep = report("analyze", &m, &name, Body::SolutionSet(solution_set_out(&m, &r)), t);
            let latex = || {
                let cs = &r.system;
                tex::document(
                    &format!("Solution set analysis of {name}"),
                    &[
                        ("Constraint equations".into(), math(&m, &cs.exprs(), "=")),
                        (
                            "Residual entropy inequality".into(),
                            Block::Math(vec![format!("{} &\\geq 0", tex::expr(&m, &cs.residual))]),
                        ),
                        ("Side conditions".into(), math(&m, &cs.side_conditions, "\\neq")),
                    ],
                )
            };
            Ok(finish(rep, common.output, latex, true))
        }
        Method::MuellerLiu => {
            let (x, lr) = liu_run(&m, dep)?;
            let el = liu::eliminate_multipliers(&x, &lr);
            let mut el = el;
            el.generic = liu::generic_multiplier_consequences(&m, &x, &lr, &el);
            t.stage("mueller-liu");
            let rep = report("analyze", &m, &name, Body::MuellerLiu(liu_out(&m, &lr, &el)), t);
            let latex = || {
                let mult: Vec<String> =
                    el.solved.iter().map(|(a, v)| format!("{} &= {}", tex::atom(&m, *a), tex::expr(&m, v))).collect();
                tex::document(
                    &format!("Mueller-Liu analysis of {name}"),
                    &[
                        ("Liu identities".into(), math(&m, &lr.identities, "=")),
                        ("Multipliers".into(), Block::Math(mult)),
                        ("Constraints after elimination".into(), math(&m, &el.physical, "=")),
                    ],
                )
            };
            Ok(finish(rep, common.output, latex, true))
        }
    }
}

fn compare(common: &Common, dep: &Option<String>) -> Result<Outcome, Outcome> {
    let (m, name) = load(common)?;
    let mut t = Timer::new();
    let r = analyze_solution_set(&m).map_err(|e| engine(e.code(), e))?;
    t.stage("solution-set");
    let (x, lr) = liu_run(&m, dep)?;
    let c = liu::compare(&m, &x, &lr, &r.system);
    t.stage("mueller-liu");
    let rep = report("compare", &m, &name, Body::Compare(compare_out(&m, &c)), t);
    let latex = || {
        tex::document(
            &format!("Method comparison for {name}: {}", c.verdict.as_str()),
            &[
                ("In both".into(), math(&m, &c.both, "=")),
                ("Liu only".into(), math(&m, &c.liu_only, "=")),
                ("Solution set only".into(), math(&m, &c.solution_set_only, "=")),
            ],
        )
    };
    Ok(finish(rep, common.output, latex, true))
}

fn split(
    common: &Common,
    assume: &[String],
    depth: usize,
    force: bool,
    classify: &Option<String>,
) -> Result<Outcome, Outcome> {
    let (mut m, name) = load(common)?;
    if let Some(c) = classify {
        m.classify = c.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    let ctx = m.ctx();
    let mut root = Vec::new();
    for a in assume {
        let (tree, nonzero) = parse_assumption(&m, a).map_err(|d| Outcome::fail(1, format!("{d}\n")))?;
        let e = tree.normalize(Some(&ctx)).map_err(|e| engine(e.code(), e))?;
        root.push(if nonzero { Assumption::nonzero(e) } else { Assumption::zero(e) });
    }
    let mut t = Timer::new();
    let r = analyze_solution_set(&m).map_err(|e| engine(e.code(), e))?;
    let cs = if force { cases::force_residual_zero(&r.system) } else { r.system.clone() };
    t.stage("solution-set");
    let tree = cases::build_tree(&m, &cs, &root, depth);
    t.stage("cases");
    let out = SplitOut {
        forced_residual_zero: force,
        pivots: texts(&m, &tree.pivots()),
        leaves: tree.leaves().len(),
        tree: node_out(&m, &tree),
    };
    let rep = report("split", &m, &name, Body::Split(out), t);
    let latex = || {
        let mut secs = Vec::new();
        for (i, leaf) in tree.leaves().iter().enumerate() {
            let mut lines: Vec<String> = leaf
                .assumptions
                .iter()
                .map(|a| {
                    let rel = if a.polarity == cases::Polarity::Zero { "=" } else { "\\neq" };
                    format!("{} &{rel} 0", tex::expr(&m, &a.expr))
                })
                .collect();
            if let Some(s) = &leaf.system {
                lines.extend(s.solved.iter().map(|(a, v)| format!("{} &= {}", tex::atom(&m, *a), tex::expr(&m, v))));
                lines.extend(s.pending.iter().map(|p| format!("{} &= 0", tex::expr(&m, p))));
            }
            secs.push((format!("Case {}", i + 1), Block::Math(lines)));
        }
        tex::document(&format!("Case tree for {name}"), &secs)
    };
    Ok(finish(rep, common.output, latex, true))
}

fn verify(common: &Common, trials: usize, seed: u64, bindings: &Option<String>) -> Result<Outcome, Outcome> {
    let (m, name) = load(common)?;
    let b = match bindings {
        Some(s) => Some(load_bindings(&m, s)?),
        None => None,
    };
    let mut t = Timer::new();
    let r = analyze_solution_set(&m).map_err(|e| engine(e.code(), e))?;
    t.stage("solution-set");
    let o = numeric_oracle(&m, &r, trials, seed);
    t.stage("oracle");
    let production = match &b {
        Some(b) => Some(
            check::sample_production(&m, &r, b, trials, seed)
                .map_err(|e| Outcome::fail(1, format!("error[{}]: {e}\n", e.code())))?,
        ),
        None => None,
    };
    let pass = o.ok() && production.as_ref().is_none_or(|p| p.negative == 0);
    let out = VerifyOut {
        constraints: r.system.constraints.len(),
        trials: o.trials,
        seed: o.seed,
        identity_pass: o.identity_pass,
        variety_pass: o.variety_pass,
        variety_skipped: o.variety_skipped,
        rejected_draws: o.rejected_draws,
        failures: o.failures,
        witnesses: o.witnesses,
        production,
        pass,
    };
    let rep = report("verify", &m, &name, Body::Verify(out), t);
    let plain = text(&rep);
    Ok(finish(
        rep,
        common.output,
        || tex::document(&format!("Verification of {name}"), &[("Summary".into(), Block::Text(plain))]),
        pass,
    ))
}

fn check_cmd(common: &Common, file: &Option<String>, flag: &Option<String>) -> Result<Outcome, Outcome> {
    let (m, name) = load(common)?;
    let Some(arg) = file.as_ref().or(flag.as_ref()) else {
        return Err(Outcome::fail(1, "error: a bindings file is required\n".into()));
    };
    let b = load_bindings(&m, arg)?;
    let mut t = Timer::new();
    let r = analyze_solution_set(&m).map_err(|e| engine(e.code(), e))?;
    t.stage("solution-set");
    let c = check::check_candidate(&m, &r.system, &b)
        .map_err(|e| Outcome::fail(1, format!("error[{}]: {e}\n", e.code())))?;
    t.stage("check");
    let pass = c.pass;
    let out = CheckOut { checks: c.checks, residual: c.residual, pass };
    let rep = report("check", &m, &name, Body::Check(out), t);
    let plain = text(&rep);
    Ok(finish(
        rep,
        common.output,
        || tex::document(&format!("Candidate check for {name}"), &[("Summary".into(), Block::Text(plain))]),
        pass,
    ))
}

pub fn execute(cli: &Cli) -> Outcome {
    let r = match &cli.command {
        Command::Analyze { common, method, multiplier_dep } => analyze(common, *method, multiplier_dep),
        Command::Compare { common, multiplier_dep } => compare(common, multiplier_dep),
        Command::Split { common, assume, depth, force_residual_zero, classify } => {
            split(common, assume, *depth, *force_residual_zero, classify)
        }
        Command::Verify { common, trials, seed, bindings } => verify(common, *trials, *seed, bindings),
        Command::Check { common, bindings_file, bindings } => check_cmd(common, bindings_file, bindings),
    };
    r.unwrap_or_else(|o| o)
}

/// Parses `args` (without the program name) and runs the command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = std::iter::once("entropik".to_string()).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let s = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: s, stderr: String::new() }
            } else {
                Outcome::fail(code, s)
            }
        }
    }
}
