//! Quantitative evaluation: worst-case discriminability, the parallel
//! relationship score and the hierarchical quality score.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::Serialize;

use crate::color::{ciede2000, circular_hue_distance, Color};
use crate::document::Assignment;
use crate::error::EvalError;
use crate::graph::{GroupKind, MvGraph};
use crate::metrics::{Applicable, Colormap};
use crate::optimizer::inherit::inherit_sequential;
use crate::optimizer::operators::palette_colors;
use crate::palette::PaletteLibrary;

/// Smallest pairwise difference within one colormap.
pub fn wcd(cm: &Colormap) -> Applicable<f64> {
    min_pairwise(&cm.colors().copied().collect::<Vec<_>>())
}

fn min_pairwise(colors: &[Color]) -> Applicable<f64> {
    let mut best: Option<f64> = None;
    for i in 0..colors.len() {
        for j in i + 1..colors.len() {
            let d = ciede2000(&colors[i], &colors[j]);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best.into()
}

/// Minimum of [`wcd`] over the categorical views with at least two colors.
pub fn overall_wcd(views: &[Colormap]) -> Applicable<f64> {
    views.iter().filter(|cm| cm.keyed).filter_map(|cm| wcd(cm).value()).reduce(f64::min).into()
}

/// Smallest difference between colors of two categorical views that encode
/// different entities. View pairs where one view's group derives from the
/// other's are skipped: their colors are meant to be related.
pub fn prs(views: &[Colormap], g: &MvGraph) -> Applicable<f64> {
    let mut best: Option<f64> = None;
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            if !views[i].keyed || !views[j].keyed || g.hierarchy_related(i, j) {
                continue;
            }
            for (ka, ca) in &views[i].entries {
                for (kb, cb) in &views[j].entries {
                    if ka != kb {
                        let d = ciede2000(ca, cb);
                        best = Some(best.map_or(d, |b| b.min(d)));
                    }
                }
            }
        }
    }
    best.into()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HqsScore {
    pub hqs: f64,
    pub child_wcd: f64,
    /// Mean circular hue distance from parent to children, in degrees.
    pub hhd: f64,
}

/// `child_wcd / (1 + hhd)`, with `child_wcd = 0` for fewer than two children.
pub fn hqs(parent: &Color, children: &[Color]) -> HqsScore {
    assert!(!children.is_empty(), "a hierarchy needs at least one child color");
    let child_wcd = min_pairwise(children).value().unwrap_or(0.0);
    let ph = parent.hcl().h;
    let hhd = children.iter().map(|c| circular_hue_distance(ph, c.hcl().h)).sum::<f64>() / children.len() as f64;
    HqsScore { hqs: child_wcd / (1.0 + hhd), child_wcd, hhd }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyScore {
    pub parent_views: Vec<String>,
    pub parent_key: String,
    pub child_views: Vec<String>,
    #[serde(flatten)]
    pub score: HqsScore,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub view_wcd: IndexMap<String, Applicable<f64>>,
    pub wcd: Applicable<f64>,
    pub prs: Applicable<f64>,
    pub hierarchies: Vec<HierarchyScore>,
    /// Mean HQS over all hierarchy links.
    pub hqs: Applicable<f64>,
}

/// Colors of a group as the first view carrying each entity shows them, or
/// the samples of its first view for a ramp.
fn group_colors(views: &[Colormap], g: &MvGraph, group: usize) -> Vec<(String, Color)> {
    let grp = &g.groups[group];
    match &grp.kind {
        GroupKind::Categorical { keys } => keys
            .iter()
            .filter_map(|k| grp.views.iter().find_map(|&v| views[v].get(k).map(|c| (k.clone(), *c))))
            .collect(),
        GroupKind::Sequential { .. } => views[grp.views[0]].entries.clone(),
    }
}

pub fn report(views: &[Colormap], g: &MvGraph) -> EvalReport {
    let view_wcd = views
        .iter()
        .enumerate()
        .filter(|(_, cm)| cm.keyed)
        .map(|(i, cm)| (g.view(i).id.clone(), wcd(cm)))
        .collect();
    let ids = |group: usize| g.groups[group].views.iter().map(|&v| g.view(v).id.clone()).collect::<Vec<_>>();
    let hierarchies: Vec<HierarchyScore> = g
        .hierarchy_links
        .iter()
        .filter_map(|link| {
            let parent = group_colors(views, g, link.parent_group).into_iter().find(|(k, _)| *k == link.parent_key)?.1;
            let children: Vec<Color> = group_colors(views, g, link.child_group).into_iter().map(|(_, c)| c).collect();
            (!children.is_empty()).then(|| HierarchyScore {
                parent_views: ids(link.parent_group),
                parent_key: link.parent_key.clone(),
                child_views: ids(link.child_group),
                score: hqs(&parent, &children),
            })
        })
        .collect();
    let hqs = if hierarchies.is_empty() {
        Applicable::NotApplicable
    } else {
        Applicable::Value(hierarchies.iter().map(|h| h.score.hqs).sum::<f64>() / hierarchies.len() as f64)
    };
    EvalReport { view_wcd, wcd: overall_wcd(views), prs: prs(views, g), hierarchies, hqs }
}

pub fn evaluate_assignment(a: &Assignment, g: &MvGraph) -> Result<EvalReport, EvalError> {
    Ok(report(&a.to_views(g)?, g))
}

/// The naive shared-palette design: every root group takes the leading
/// colors of the first palette, and hierarchy children repeat their parent
/// entity's color.
pub fn baseline_views(g: &MvGraph, lib: &PaletteLibrary, samples: usize, floor: f64) -> Vec<Colormap> {
    let first = &lib.palettes[0].colors;
    let mut groups: Vec<Vec<(String, Color)>> = vec![Vec::new(); g.groups.len()];
    for &group in g.coloring_order() {
        let keys: Vec<String> = g.groups[group].keys().map(<[String]>::to_vec).unwrap_or_default();
        let colors: Vec<(String, Color)> = match g.parent_link(group) {
            Some(link) => {
                let parent = groups[link.parent_group].iter().find(|(k, _)| *k == link.parent_key).map_or(first[0], |(_, c)| *c);
                if keys.is_empty() {
                    (0..samples).map(|i| (i.to_string(), parent)).collect()
                } else {
                    keys.into_iter().map(|k| (k, parent)).collect()
                }
            }
            None if keys.is_empty() => {
                let ramp = inherit_sequential(&first[0], samples).map(|d| d.colors).unwrap_or_else(|_| vec![first[0]; samples]);
                ramp.into_iter().enumerate().map(|(i, c)| (i.to_string(), c)).collect()
            }
            None => keys.iter().cloned().zip(palette_colors(first, keys.len(), floor)).collect(),
        };
        groups[group] = colors;
    }
    (0..g.view_count())
        .map(|v| {
            let spec = g.view(v);
            let colors = &groups[g.view_group[v]];
            match spec.keys() {
                Some(keys) => Colormap::keyed(
                    spec.colormap_kind,
                    keys.iter().filter_map(|k| colors.iter().find(|(ck, _)| ck == k).map(|(k, c)| (k.clone(), c.quantized()))).collect(),
                ),
                None => Colormap::sampled(spec.colormap_kind, colors.iter().map(|(_, c)| c.quantized()).collect()),
            }
        })
        .collect()
}

/// Candidate minus baseline for each headline metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: EvalReport,
    pub candidate: EvalReport,
    pub delta_wcd: Applicable<f64>,
    pub delta_prs: Applicable<f64>,
    pub delta_hqs: Applicable<f64>,
}

fn delta(candidate: Applicable<f64>, baseline: Applicable<f64>) -> Applicable<f64> {
    match (candidate.value(), baseline.value()) {
        (Some(c), Some(b)) => Applicable::Value(c - b),
        _ => Applicable::NotApplicable,
    }
}

pub fn compare(baseline: EvalReport, candidate: EvalReport) -> Comparison {
    Comparison {
        delta_wcd: delta(candidate.wcd, baseline.wcd),
        delta_prs: delta(candidate.prs, baseline.prs),
        delta_hqs: delta(candidate.hqs, baseline.hqs),
        baseline,
        candidate,
    }
}

fn cell(v: Applicable<f64>) -> String {
    match v.value() {
        Some(x) => format!("{x:.2}"),
        None => "n/a".into(),
    }
}

/// Plain-text table of one report.
pub fn format_report(r: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>10}", "metric", "value");
    for (name, v) in [("WCD", r.wcd), ("PRS", r.prs), ("HQS (mean)", r.hqs)] {
        let _ = writeln!(out, "{name:<24} {:>10}", cell(v));
    }
    for (view, v) in &r.view_wcd {
        let _ = writeln!(out, "{:<24} {:>10}", format!("  WCD {view}"), cell(*v));
    }
    for h in &r.hierarchies {
        let label = format!("  HQS {}:{}", h.parent_views.join("+"), h.parent_key);
        let _ = writeln!(out, "{label:<24} {:>10}  (child WCD {:.2}, HHD {:.2})", format!("{:.2}", h.score.hqs), h.score.child_wcd, h.score.hhd);
    }
    out
}

/// Plain-text side-by-side table of a comparison.
pub fn format_comparison(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>10} {:>10} {:>10}", "metric", "baseline", "candidate", "delta");
    for (name, b, x, d) in [
        ("WCD", c.baseline.wcd, c.candidate.wcd, c.delta_wcd),
        ("PRS", c.baseline.prs, c.candidate.prs, c.delta_prs),
        ("HQS (mean)", c.baseline.hqs, c.candidate.hqs, c.delta_hqs),
    ] {
        let _ = writeln!(out, "{name:<12} {:>10} {:>10} {:>10}", cell(b), cell(x), cell(d));
    }
    out
}

/// Arithmetic mean of each headline metric over the reports where it applies.
pub fn mean_summary(reports: &[EvalReport]) -> (Applicable<f64>, Applicable<f64>, Applicable<f64>) {
    let mean = |f: fn(&EvalReport) -> Applicable<f64>| -> Applicable<f64> {
        let vals: Vec<f64> = reports.iter().filter_map(|r| f(r).value()).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64).into()
    };
    (mean(|r| r.wcd), mean(|r| r.prs), mean(|r| r.hqs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::hcl_to_srgb;
    use crate::spec::ColormapKind;

    fn keyed(entries: &[(&str, Color)]) -> Colormap {
        Colormap::keyed(ColormapKind::Discrete, entries.iter().map(|(k, c)| (k.to_string(), *c)).collect())
    }

    #[test]
    fn wcd_cases() {
        let red = Color::from_rgb8(255, 0, 0);
        assert_eq!(wcd(&keyed(&[("a", red), ("b", red)])), Applicable::Value(0.0));
        assert_eq!(wcd(&keyed(&[("a", red)])), Applicable::NotApplicable);
    }

    #[test]
    fn overall_skips_single_color_views() {
        let a = keyed(&[("x", Color::BLACK)]);
        let b = keyed(&[("y", Color::BLACK), ("z", Color::WHITE)]);
        assert_eq!(overall_wcd(&[a.clone()]), Applicable::NotApplicable);
        let v = overall_wcd(&[a, b]).value().unwrap();
        assert!((v - 100.0).abs() < 1e-3);
    }

    #[test]
    fn hqs_cases() {
        let parent = hcl_to_srgb(0.0, 40.0, 60.0).color;
        let single = hqs(&parent, &[parent]);
        assert_eq!(single.hqs, 0.0);
        let at_parent = hqs(&parent, &[hcl_to_srgb(0.0, 40.0, 40.0).color, hcl_to_srgb(0.0, 40.0, 75.0).color]);
        assert!(at_parent.hhd < 1e-6);
        assert!((at_parent.hqs - at_parent.child_wcd).abs() < 1e-6);
        let around = hqs(&parent, &[hcl_to_srgb(10.0, 40.0, 60.0).color, hcl_to_srgb(350.0, 40.0, 60.0).color]);
        assert!((around.hhd - 10.0).abs() < 1e-6);
    }

    #[test]
    fn delta_is_candidate_minus_baseline() {
        assert_eq!(delta(Applicable::Value(5.0), Applicable::Value(2.0)), Applicable::Value(3.0));
        assert_eq!(delta(Applicable::NotApplicable, Applicable::Value(2.0)), Applicable::NotApplicable);
    }
}
