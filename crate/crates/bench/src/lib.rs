//! Benchmark-only crate; see `benches/`.

use entropik_core::{parse_model, ModelDef};

/// Loads one of the bundled models by name.
pub fn bundled(name: &str) -> ModelDef {
    let path = format!("{}/../../models/{name}.epk", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_model(&text, &path).unwrap_or_else(|d| panic!("{path}: {d:?}"))
}
