use crate::kernel::tree::jet_source;
use crate::model::ModelDef;

/// Canonical DSL text; parsing it gives back an equal model.
pub fn format_model(m: &ModelDef) -> String {
    let ctx = m.ctx();
    let mut out = String::new();
    out.push_str(&format!("independent {}\n", m.indeps.join(" ")));
    out.push_str(&format!("field {}\n", m.fields.join(" ")));
    for d in &m.constits {
        let args: Vec<String> = d.args.iter().map(|&a| jet_source(a, &ctx)).collect();
        out.push_str(&format!("constitutive {}({})", d.name, args.join(", ")));
        if !d.symmetric.is_empty() {
            out.push_str(" symmetric");
            for &(i, j) in &d.symmetric {
                out.push_str(&format!(" ({}, {})", args[i], args[j]));
            }
        }
        out.push('\n');
    }
    for e in &m.equations {
        out.push_str(&format!("equation {}: {} = {}\n", e.label, e.left.render(&ctx), e.right.render(&ctx)));
    }
    out.push_str(&format!("entropy: {} >= 0\n", m.entropy.render(&ctx)));
    let lead: Vec<String> = m.leading.iter().map(|&a| jet_source(a, &ctx)).collect();
    out.push_str(&format!("leading: {}\n", lead.join(", ")));
    if !m.assumptions.is_empty() {
        let a: Vec<String> = m.assumptions.iter().map(|t| t.render(&ctx)).collect();
        out.push_str(&format!("assume nonzero: {}\n", a.join(", ")));
    }
    if let Some(k) = m.max_order {
        out.push_str(&format!("max_order: {k}\n"));
    }
    if !m.classify.is_empty() {
        out.push_str(&format!("classify: {}\n", m.classify.join(", ")));
    }
    out
}
