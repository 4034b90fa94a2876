//! Benchmark fixtures shared by the bench targets.

use mvcolor_core::{build_graph, Color, MvGraph, MvSpec};

/// A bundled case by file stem, e.g. `case2_pets`.
pub fn case(name: &str) -> MvGraph {
    let path = format!("{}/../core/cases/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    build_graph(&MvSpec::from_json(&text).expect("bundled case parses")).expect("bundled case builds")
}

/// Deterministic spread of `n` colors over the sRGB cube.
pub fn colors(n: usize) -> Vec<Color> {
    (0..n).map(|i| Color::from_rgb8((i * 37 % 256) as u8, (i * 91 % 256) as u8, (i * 53 % 256) as u8)).collect()
}
