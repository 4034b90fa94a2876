//! Deriving child colormaps from a parent color: sequential ramps at constant
//! hue, and tree-style categorical families spread around the parent hue.

use crate::color::{ciede2000, circular_hue_distance, hcl_to_srgb, Color};
use crate::error::InheritError;

pub const RAMP_LIGHT_L: f64 = 92.0;
pub const RAMP_LIGHT_C: f64 = 15.0;
pub const FAMILY_LUMINANCE_STEP: f64 = 8.0;
pub const MIN_SPREAD: f64 = 5.0;
pub const MAX_SPREAD: f64 = 120.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Derived {
    pub colors: Vec<Color>,
    /// Some color needed chroma reduction to fit the sRGB gamut.
    pub gamut_mapped: bool,
    /// The parent had no hue; a gray ramp was produced instead.
    pub achromatic_parent: bool,
}

/// A `k`-sample ramp at the parent's hue, from a light desaturated end down
/// to a darker, more saturated end near the parent.
pub fn inherit_sequential(parent: &Color, k: usize) -> Result<Derived, InheritError> {
    if k < 2 {
        return Err(InheritError::TooFewSamples(k));
    }
    let hcl = parent.hcl();
    let achromatic = parent.is_achromatic();
    let dark_l = (hcl.l - 20.0).max(20.0);
    let (light_c, dark_c) = if achromatic { (0.0, 0.0) } else { (RAMP_LIGHT_C, (hcl.c + 20.0).min(90.0)) };
    let mut gamut_mapped = false;
    let colors = (0..k)
        .map(|i| {
            let t = i as f64 / (k - 1) as f64;
            let l = RAMP_LIGHT_L + t * (dark_l - RAMP_LIGHT_L);
            let c = light_c + t * (dark_c - light_c);
            let mapped = hcl_to_srgb(hcl.h, c, l);
            gamut_mapped |= mapped.out_of_gamut;
            mapped.color
        })
        .collect();
    if achromatic {
        log::warn!("achromatic parent {parent}: deriving a gray ramp");
    }
    Ok(Derived { colors, gamut_mapped, achromatic_parent: achromatic })
}

/// One parent entity and the shape of the family derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyRequest {
    pub parent: Color,
    pub count: usize,
    pub spread: f64,
    pub chroma_offset: f64,
    pub luminance_offset: f64,
}

/// Tree colors for several parents at once. Each family occupies the hue
/// range `[h - spread/2, h + spread/2]` around its parent; spreads are scaled
/// down together until no two ranges overlap on the hue circle.
pub fn derive_families(requests: &[FamilyRequest]) -> Result<Vec<Derived>, InheritError> {
    for r in requests {
        if !(r.spread > 0.0 && r.spread <= MAX_SPREAD) {
            return Err(InheritError::InvalidSpread(r.spread));
        }
        if r.count == 0 {
            return Err(InheritError::NoChildren(r.parent.to_hex()));
        }
    }
    let hcls: Vec<_> = requests.iter().map(|r| r.parent.hcl()).collect();
    let mut scale: f64 = 1.0;
    for i in 0..requests.len() {
        for j in i + 1..requests.len() {
            let gap = circular_hue_distance(hcls[i].h, hcls[j].h);
            let needed = (requests[i].spread + requests[j].spread) / 2.0;
            scale = scale.min(gap / needed);
        }
    }
    let narrowest = requests.iter().map(|r| r.spread * scale).fold(f64::INFINITY, f64::min);
    if narrowest < MIN_SPREAD {
        return Err(InheritError::ParentsTooClose(narrowest));
    }

    Ok(requests
        .iter()
        .zip(&hcls)
        .map(|(r, hcl)| {
            let spread = r.spread * scale;
            let n = r.count;
            let achromatic = r.parent.is_achromatic();
            let chroma = if achromatic { 0.0 } else { (hcl.c + r.chroma_offset).max(0.0) };
            let mut gamut_mapped = false;
            let colors: Vec<Color> = (0..n)
                .map(|i| {
                    let h = hcl.h - spread / 2.0 + (i as f64 + 0.5) * spread / n as f64;
                    let alternate = match (n, i % 2) {
                        (1, _) => 0.0,
                        (_, 0) => FAMILY_LUMINANCE_STEP,
                        _ => -FAMILY_LUMINANCE_STEP,
                    };
                    let l = (hcl.l + r.luminance_offset + alternate).clamp(0.0, 100.0);
                    let mapped = hcl_to_srgb(h, chroma, l);
                    gamut_mapped |= mapped.out_of_gamut;
                    mapped.color
                })
                .collect();
            Derived { colors: reorder_for_contrast(&colors), gamut_mapped, achromatic_parent: achromatic }
        })
        .collect())
}

/// Tree colors with one shared spread and no chroma/luminance offsets.
pub fn inherit_categorical(parents: &[(String, Color)], child_counts: &[usize], spread: f64) -> Result<Vec<(String, Vec<Color>)>, InheritError> {
    let requests: Vec<FamilyRequest> = parents
        .iter()
        .zip(child_counts)
        .map(|((_, parent), &count)| FamilyRequest { parent: *parent, count, spread, chroma_offset: 0.0, luminance_offset: 0.0 })
        .collect();
    let families = derive_families(&requests)?;
    Ok(parents.iter().map(|(k, _)| k.clone()).zip(families.into_iter().map(|f| f.colors)).collect())
}

/// Chains colors so each next one is the farthest remaining from the last.
pub fn reorder_for_contrast(colors: &[Color]) -> Vec<Color> {
    if colors.len() <= 2 {
        return colors.to_vec();
    }
    let mut remaining: Vec<Color> = colors[1..].to_vec();
    let mut out = vec![colors[0]];
    while !remaining.is_empty() {
        let last = out[out.len() - 1];
        let mut best = 0;
        let mut best_d = f64::NEG_INFINITY;
        for (i, c) in remaining.iter().enumerate() {
            let d = ciede2000(&last, c);
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        out.push(remaining.remove(best));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hcl_color(h: f64, c: f64, l: f64) -> Color {
        hcl_to_srgb(h, c, l).color
    }

    #[test]
    fn ramp_endpoints_and_constant_hue() {
        let parent = hcl_color(30.0, 60.0, 50.0);
        let two = inherit_sequential(&parent, 2).unwrap();
        assert_eq!(two.colors.len(), 2);
        let light = two.colors[0].hcl();
        let dark = two.colors[1].hcl();
        assert!((light.l - 92.0).abs() < 1e-6);
        assert!(light.c <= 15.0 + 1e-6 && (two.gamut_mapped || (light.c - 15.0).abs() < 1e-6));
        assert!((dark.l - 30.0).abs() < 1e-6);

        let ramp = inherit_sequential(&parent, 5).unwrap();
        let h = parent.hcl().h;
        for c in &ramp.colors {
            assert!(circular_hue_distance(c.hcl().h, h) < 0.5);
        }
        let ls: Vec<f64> = ramp.colors.iter().map(|c| c.lab().l).collect();
        assert!(ls.windows(2).all(|w| w[1] < w[0]), "{ls:?}");
    }

    #[test]
    fn ramp_rejects_single_sample() {
        assert_eq!(inherit_sequential(&Color::WHITE, 1), Err(InheritError::TooFewSamples(1)));
    }

    #[test]
    fn gray_parent_gives_gray_ramp() {
        let d = inherit_sequential(&Color::new(0.5, 0.5, 0.5), 4).unwrap();
        assert!(d.achromatic_parent);
        assert!(d.colors.iter().all(|c| c.is_achromatic()));
    }

    #[test]
    fn single_child_sits_at_parent_hue() {
        let parent = hcl_color(200.0, 40.0, 55.0);
        let out = inherit_categorical(&[("a".into(), parent)], &[1], 30.0).unwrap();
        let child = out[0].1[0].hcl();
        assert!(circular_hue_distance(child.h, 200.0) < 1e-6);
        assert!((child.l - 55.0).abs() < 1e-6);
    }

    #[test]
    fn opposite_parents_keep_full_spread() {
        let a = hcl_color(0.0, 40.0, 60.0);
        let b = hcl_color(180.0, 40.0, 60.0);
        let out = inherit_categorical(&[("a".into(), a), ("b".into(), b)], &[3, 3], 60.0).unwrap();
        for c in &out[0].1 {
            assert!(circular_hue_distance(c.hcl().h, 0.0) <= 30.0 + 1e-6);
        }
        for c in &out[1].1 {
            assert!(circular_hue_distance(c.hcl().h, 180.0) <= 30.0 + 1e-6);
        }
        // bins of 20 degrees: centers at -20, 0, +20
        let hues: Vec<f64> = out[0].1.iter().map(|c| c.hcl().h).collect();
        assert!(hues.iter().any(|h| circular_hue_distance(*h, 340.0) < 1e-6));
    }

    #[test]
    fn spreads_shrink_until_disjoint() {
        let a = hcl_color(0.0, 40.0, 60.0);
        let b = hcl_color(40.0, 40.0, 60.0);
        let out = derive_families(&[
            FamilyRequest { parent: a, count: 2, spread: 60.0, chroma_offset: 0.0, luminance_offset: 0.0 },
            FamilyRequest { parent: b, count: 2, spread: 60.0, chroma_offset: 0.0, luminance_offset: 0.0 },
        ])
        .unwrap();
        // shrunk to 40 degrees each: families stay on their own side of 20
        for c in &out[0].colors {
            assert!(circular_hue_distance(c.hcl().h, 0.0) <= 20.0 + 1e-6);
        }
        for c in &out[1].colors {
            assert!(circular_hue_distance(c.hcl().h, 40.0) <= 20.0 + 1e-6);
        }
    }

    #[test]
    fn too_close_parents_fail() {
        let a = hcl_color(0.0, 40.0, 60.0);
        let b = hcl_color(3.0, 40.0, 60.0);
        let err = inherit_categorical(&[("a".into(), a), ("b".into(), b)], &[2, 2], 30.0).unwrap_err();
        assert!(matches!(err, InheritError::ParentsTooClose(_)));
    }

    #[test]
    fn three_families_like_a_tree() {
        let parents = vec![
            ("A".to_string(), hcl_color(130.0, 50.0, 60.0)),
            ("B".to_string(), hcl_color(250.0, 50.0, 50.0)),
            ("C".to_string(), hcl_color(50.0, 60.0, 65.0)),
        ];
        let out = inherit_categorical(&parents, &[3, 3, 2], 40.0).unwrap();
        assert_eq!(out.iter().map(|(_, c)| c.len()).collect::<Vec<_>>(), vec![3, 3, 2]);
        for ((_, parent), (_, children)) in parents.iter().zip(&out) {
            let ph = parent.hcl().h;
            // every child is closer in hue to its own parent than to the others
            for child in children {
                let own = circular_hue_distance(child.hcl().h, ph);
                for (_, other) in parents.iter().filter(|(_, p)| p != parent) {
                    assert!(own < circular_hue_distance(child.hcl().h, other.hcl().h));
                }
            }
        }
    }

    #[test]
    fn reorder_keeps_colors() {
        let colors: Vec<Color> = (0..5).map(|i| hcl_color(i as f64 * 10.0, 40.0, 60.0)).collect();
        let out = reorder_for_contrast(&colors);
        assert_eq!(out.len(), 5);
        assert_eq!(out[0], colors[0]);
        for c in &colors {
            assert!(out.contains(c));
        }
        // the farthest hue from the first comes second
        assert_eq!(out[1], colors[4]);
    }
}
