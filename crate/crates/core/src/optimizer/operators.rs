//! Population initialization and the variation operators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::genome::{default_child_params, ChildParams, Solution};
use super::inherit::{MAX_SPREAD, MIN_SPREAD};
use crate::color::{ciede2000, hcl_to_srgb, normalize_hue, Color, Hsv};
use crate::graph::MvGraph;
use crate::palette::PaletteLibrary;

pub const GOLDEN_ANGLE: f64 = 137.507_764_050_037_85;
pub const EXTRA_CHROMA: f64 = 50.0;
pub const EXTRA_LUMINANCE: f64 = 60.0;
/// Luminances tried, in order, when a generated hue collides with an existing color.
const EXTRA_LUMINANCE_FALLBACKS: [f64; 5] = [EXTRA_LUMINANCE, 45.0, 75.0, 35.0, 85.0];
/// Probability that a child's hue spread is jittered by `perturb`.
pub const SPREAD_JITTER_PROBABILITY: f64 = 0.1;
/// Degrees of spread jitter per unit of step.
pub const SPREAD_JITTER_SCALE: f64 = 60.0;

/// Appends `count` colors to `seed` by golden-angle hue stepping at fixed
/// chroma and luminance, skipping candidates closer than `floor` to any color
/// already present.
pub fn extend_palette(seed: &[Color], count: usize, floor: f64) -> Vec<Color> {
    let mut out = seed.to_vec();
    let mut added = 0;
    let mut step = 0usize;
    // 360 golden-angle steps visit the hue circle densely; after that the
    // floor is relaxed rather than looping forever.
    while added < count {
        let h = normalize_hue(step as f64 * GOLDEN_ANGLE);
        let relaxed = step >= 360;
        let candidate = EXTRA_LUMINANCE_FALLBACKS
            .iter()
            .map(|&l| hcl_to_srgb(h, EXTRA_CHROMA, l).color)
            .find(|c| relaxed || out.iter().all(|o| ciede2000(o, c) >= floor));
        if let Some(c) = candidate {
            out.push(c);
            added += 1;
        }
        step += 1;
    }
    out
}

/// Colors for a group needing `needed` colors drawn from `palette`, extended
/// by the generator when the palette is too short.
pub fn palette_colors(palette: &[Color], needed: usize, floor: f64) -> Vec<Color> {
    if palette.len() >= needed {
        palette[..needed].to_vec()
    } else {
        extend_palette(palette, needed - palette.len(), floor)
    }
}

/// One random individual: every root group draws its own palette (distinct
/// within the individual while the library allows) with enough colors.
pub fn random_solution<R: Rng>(g: &MvGraph, lib: &PaletteLibrary, floor: f64, rng: &mut R) -> Solution {
    let mut used = BTreeSet::new();
    let mut sol = Solution { roots: Default::default(), child_params: default_child_params(g) };
    for group in g.root_groups() {
        let needed = g.groups[group].keys().map_or(1, |k| k.len());
        let fits: Vec<usize> = (0..lib.len()).filter(|&i| lib.palettes[i].colors.len() >= needed).collect();
        let pool: Vec<usize> = if fits.is_empty() {
            let largest = lib.palettes.iter().map(|p| p.colors.len()).max().unwrap_or(0);
            (0..lib.len()).filter(|&i| lib.palettes[i].colors.len() == largest).collect()
        } else {
            fits
        };
        let fresh: Vec<usize> = pool.iter().copied().filter(|i| !used.contains(i)).collect();
        let choice = *(if fresh.is_empty() { &pool } else { &fresh }).choose(rng).expect("library is non-empty");
        used.insert(choice);
        let palette = &lib.palettes[choice].colors;
        let colors = if g.groups[group].is_categorical() {
            palette_colors(palette, needed, floor)
        } else {
            vec![*palette.choose(rng).expect("palettes are non-empty")]
        };
        sol.roots.insert(group, colors);
    }
    sol
}

/// Uniform HSV noise in `[-step, step]` on every root color (hue measured in
/// turns and wrapped, saturation and value clamped), plus occasional jitter
/// of child hue spreads.
pub fn perturb<R: Rng>(s: &Solution, step: f64, rng: &mut R) -> Solution {
    let mut out = s.clone();
    if step == 0.0 {
        return out;
    }
    for colors in out.roots.values_mut() {
        for c in colors.iter_mut() {
            let hsv = c.hsv();
            let dh = rng.gen_range(-step..=step) * 360.0;
            let ds = rng.gen_range(-step..=step);
            let dv = rng.gen_range(-step..=step);
            *c = Color::from_hsv(Hsv { h: normalize_hue(hsv.h + dh), s: (hsv.s + ds).clamp(0.0, 1.0), v: (hsv.v + dv).clamp(0.0, 1.0) });
        }
    }
    for params in out.child_params.values_mut() {
        if rng.gen_bool(SPREAD_JITTER_PROBABILITY) {
            let d = rng.gen_range(-step..=step) * SPREAD_JITTER_SCALE;
            params.spread = (params.spread + d).clamp(MIN_SPREAD, MAX_SPREAD);
        }
    }
    out
}

/// Swaps each root group between the parents with probability `rate`; the
/// derivation parameters of the group's descendants move with it.
pub fn crossover<R: Rng>(a: &Solution, b: &Solution, g: &MvGraph, rate: f64, rng: &mut R) -> (Solution, Solution) {
    let mut o1 = a.clone();
    let mut o2 = b.clone();
    for group in g.root_groups() {
        if !rng.gen_bool(rate) {
            continue;
        }
        swap_entry(&mut o1.roots, &mut o2.roots, group);
        for child in g.descendants(group) {
            swap_entry(&mut o1.child_params, &mut o2.child_params, child);
        }
    }
    (o1, o2)
}

fn swap_entry<V>(x: &mut std::collections::BTreeMap<usize, V>, y: &mut std::collections::BTreeMap<usize, V>, key: usize) {
    match (x.remove(&key), y.remove(&key)) {
        (Some(vx), Some(vy)) => {
            x.insert(key, vy);
            y.insert(key, vx);
        }
        (Some(vx), None) => {
            y.insert(key, vx);
        }
        (None, Some(vy)) => {
            x.insert(key, vy);
        }
        (None, None) => {}
    }
}

/// Draws two positions from an elite pool of `pool_len` members, distinct
/// whenever the pool has at least two.
pub fn select_parents<R: Rng>(pool_len: usize, rng: &mut R) -> (usize, usize) {
    assert!(pool_len > 0, "elite pool is empty");
    if pool_len == 1 {
        return (0, 0);
    }
    let a = rng.gen_range(0..pool_len);
    let mut b = rng.gen_range(0..pool_len - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Defaults for child parameters absent from a genome.
pub fn fill_child_params(sol: &mut Solution, g: &MvGraph) {
    for link in &g.hierarchy_links {
        sol.child_params.entry(link.child_group).or_insert_with(ChildParams::default);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extension_respects_floor() {
        let lib = PaletteLibrary::bundled();
        let seed = &lib.largest().colors;
        let out = palette_colors(seed, 14, 10.0);
        assert_eq!(out.len(), 14);
        assert_eq!(&out[..12], &seed[..]);
        for extra in &out[12..] {
            for c in seed {
                assert!(ciede2000(extra, c) >= 10.0);
            }
        }
        assert!(ciede2000(&out[12], &out[13]) >= 10.0);
    }

    #[test]
    fn truncation_keeps_palette_order() {
        let lib = PaletteLibrary::bundled();
        let p = &lib.get("Set2").unwrap().colors;
        assert_eq!(palette_colors(p, 3, 10.0), p[..3].to_vec());
    }

    #[test]
    fn zero_step_is_identity() {
        let s = Solution { roots: [(0, vec![Color::from_rgb8(10, 200, 30)])].into(), child_params: [(1, ChildParams::default())].into() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(perturb(&s, 0.0, &mut rng), s);
    }

    #[test]
    fn perturb_is_bounded() {
        let base = Color::from_rgb8(120, 80, 200);
        let s = Solution { roots: [(0, vec![base; 20])].into(), child_params: Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = perturb(&s, 0.05, &mut rng);
        let h0 = base.hsv();
        for c in &out.roots[&0] {
            let h = c.hsv();
            let dh = crate::color::circular_hue_distance(h.h, h0.h) / 360.0;
            assert!(dh <= 0.05 + 1e-9);
            assert!((h.s - h0.s).abs() <= 0.05 + 1e-9);
            assert!((h.v - h0.v).abs() <= 0.05 + 1e-9);
        }
    }

    #[test]
    fn parent_pairs_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(select_parents(1, &mut rng), (0, 0));
        for _ in 0..200 {
            let (a, b) = select_parents(2, &mut rng);
            assert_ne!(a, b);
            assert!(a < 2 && b < 2);
        }
    }
}
