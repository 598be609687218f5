use entropik_core::{format_model, parse_model};

fn bundled(name: &str) -> String {
    let p = format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn bundled_models_round_trip() {
    for f in ["gas1d.epk", "fluid2d.epk", "nonsimple2d.epk", "granular2d.epk"] {
        let m = parse_model(&bundled(f), f).unwrap_or_else(|d| panic!("{f}: {d:?}"));
        let text = format_model(&m);
        let back = parse_model(&text, f).unwrap_or_else(|d| panic!("{f} reformatted: {d:?}\n{text}"));
        assert_eq!(back, m, "{f}");
        assert_eq!(format_model(&back), text);
    }
}
