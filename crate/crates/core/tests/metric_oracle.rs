//! The four raw metrics against straightforward nested loops.

use mvcolor_core::metrics::{continuity, global_discriminability, hue_uniformity, local_discriminability};
use mvcolor_core::spec::ColormapKind;
use mvcolor_core::{ciede2000, Colormap, Color};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
const KEYS: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];

fn random_map(rng: &mut ChaCha8Rng) -> Colormap {
    let n = rng.gen_range(1..=8);
    let mut keys: Vec<&str> = KEYS.to_vec();
    let entries = (0..n)
        .map(|_| {
            let k = keys.remove(rng.gen_range(0..keys.len()));
            // a few exact grays exercise the achromatic convention
            let c = if rng.gen_bool(0.1) {
                let v = rng.gen();
                Color::from_rgb8(v, v, v)
            } else {
                Color::from_rgb8(rng.gen(), rng.gen(), rng.gen())
            };
            (k.to_string(), c)
        })
        .collect();
    Colormap::keyed(ColormapKind::Discrete, entries)
}

fn oracle_local(m: &Colormap) -> f64 {
    let mut s = 0.0;
    for i in 0..m.entries.len() {
        for j in 0..m.entries.len() {
            if i != j {
                s += ciede2000(&m.entries[i].1, &m.entries[j].1);
            }
        }
    }
    s
}

/// Cross pairs between entities that only one of the two maps encodes.
fn oracle_global(a: &Colormap, b: &Colormap) -> Option<f64> {
    let mut s = 0.0;
    let mut any = false;
    for (ka, ca) in &a.entries {
        if b.entries.iter().any(|(k, _)| k == ka) {
            continue;
        }
        for (kb, cb) in &b.entries {
            if a.entries.iter().any(|(k, _)| k == kb) {
                continue;
            }
            s += ciede2000(ca, cb);
            any = true;
        }
    }
    any.then_some(s)
}

fn hsl_hue(c: &Color) -> f64 {
    let (r, g, b) = (c.r(), c.g(), c.b());
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if max == r {
        60.0 * (((g - b) / d) % 6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

fn oracle_hue(a: &Colormap, b: &Colormap) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (_, ca) in &a.entries {
        for (_, cb) in &b.entries {
            if ca.is_achromatic() || cb.is_achromatic() {
                continue;
            }
            let d = (hsl_hue(ca) - hsl_hue(cb)).abs();
            let d = d.min(360.0 - d);
            best = Some(best.map_or(d, |m: f64| m.min(d)));
        }
    }
    best
}

fn oracle_continuity(a: &Colormap, b: &Colormap) -> f64 {
    let mut s = 0.0;
    for (_, ca) in &a.entries {
        for (_, cb) in &b.entries {
            s += (ca.lab().l - cb.lab().l).abs();
        }
    }
    s
}

#[test]
fn hundred_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..100 {
        let a = random_map(&mut rng);
        let b = random_map(&mut rng);
        assert!((local_discriminability(&a) - oracle_local(&a)).abs() < TOL, "round {round} local");
        match (global_discriminability(&a, &b).value(), oracle_global(&a, &b)) {
            (Some(x), Some(y)) => assert!((x - y).abs() < TOL, "round {round} global {x} vs {y}"),
            (x, y) => assert_eq!(x, y, "round {round} global applicability"),
        }
        match (hue_uniformity(&a, &b).value(), oracle_hue(&a, &b)) {
            (Some(x), Some(y)) => assert!((x - y).abs() < TOL, "round {round} hue {x} vs {y}"),
            (x, y) => assert_eq!(x, y, "round {round} hue applicability"),
        }
        assert!((continuity(&a, &b) - oracle_continuity(&a, &b)).abs() < TOL, "round {round} continuity");
    }
}
