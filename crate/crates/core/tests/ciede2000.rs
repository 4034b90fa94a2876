use mvcolor_core::color::{ciede2000_lab, Lab};
use mvcolor_core::{ciede2000, Color};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Pair {
    lab1: [f64; 3],
    lab2: [f64; 3],
    delta_e: f64,
}

fn lab(v: [f64; 3]) -> Lab {
    Lab { l: v[0], a: v[1], b: v[2] }
}

#[test]
fn published_verification_pairs() {
    let pairs: Vec<Pair> = serde_json::from_str(include_str!("fixtures/ciede2000_pairs.json")).unwrap();
    assert_eq!(pairs.len(), 34);
    for (i, p) in pairs.iter().enumerate() {
        let d = ciede2000_lab(&lab(p.lab1), &lab(p.lab2));
        assert!((d - p.delta_e).abs() < 1e-4, "pair {}: {d} vs {}", i + 1, p.delta_e);
        let back = ciede2000_lab(&lab(p.lab2), &lab(p.lab1));
        assert!((back - p.delta_e).abs() < 1e-4, "pair {} reversed", i + 1);
    }
}

#[test]
fn black_and_white_are_100_apart() {
    // scikit-image reports 100.0000002 for this pair
    assert!((ciede2000(&Color::BLACK, &Color::WHITE) - 100.0).abs() < 1e-4);
}

fn color() -> impl Strategy<Value = Color> {
    (0u8..=255, 0u8..=255, 0u8..=255).prop_map(|(r, g, b)| Color::from_rgb8(r, g, b))
}

proptest! {
    #[test]
    fn symmetric_and_non_negative(a in color(), b in color()) {
        let d = ciede2000(&a, &b);
        prop_assert!(d >= 0.0);
        prop_assert!((d - ciede2000(&b, &a)).abs() < 1e-9);
    }

    #[test]
    fn identity_is_zero(a in color()) {
        prop_assert!(ciede2000(&a, &a).abs() < 1e-12);
    }
}
