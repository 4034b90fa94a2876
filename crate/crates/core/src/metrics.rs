//! Raw design metrics, normalization, penalties and the two aggregate
//! objectives (single-view effectiveness and multiple-view consistency).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::color::{ciede2000_lab, circular_hue_distance, Color, Lab};
use crate::graph::MvGraph;
use crate::params::{CaseExtrema, ParamsStore};
use crate::spec::ColormapKind;

/// Default number of samples taken from a continuous colormap.
pub const DEFAULT_SAMPLES: usize = 5;
/// Steepness of the logistic penalty.
pub const PENALTY_FACTOR: f64 = 0.2;
/// Normalized cost above which a component is surcharged.
pub const MAX_ALLOWED: f64 = 0.2;
pub const VIOLATION_SURCHARGE: f64 = 0.5;

/// A colormap as seen by the metrics: colors in order, each tagged with the
/// entity it encodes (or its sample index for continuous colormaps).
#[derive(Clone, Debug, PartialEq)]
pub struct Colormap {
    pub kind: ColormapKind,
    /// True when the keys are data entities rather than sample positions.
    pub keyed: bool,
    pub entries: Vec<(String, Color)>,
}

impl Colormap {
    pub fn keyed(kind: ColormapKind, entries: Vec<(String, Color)>) -> Colormap {
        Colormap { kind, keyed: true, entries }
    }

    pub fn sampled(kind: ColormapKind, samples: Vec<Color>) -> Colormap {
        let entries = samples.into_iter().enumerate().map(|(i, c)| (i.to_string(), c)).collect();
        Colormap { kind, keyed: false, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn colors(&self) -> impl Iterator<Item = &Color> + '_ {
        self.entries.iter().map(|(_, c)| c)
    }

    pub fn get(&self, key: &str) -> Option<&Color> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, c)| c)
    }
}

/// A metric value that may be undefined for its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Applicable<T> {
    Value(T),
    #[serde(serialize_with = "serialize_na")]
    NotApplicable,
}

fn serialize_na<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("n/a")
}

impl<T: Copy> Applicable<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Applicable::Value(v) => Some(*v),
            Applicable::NotApplicable => None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, Applicable::Value(_))
    }
}

impl<T> From<Option<T>> for Applicable<T> {
    fn from(v: Option<T>) -> Self {
        v.map_or(Applicable::NotApplicable, Applicable::Value)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Weights {
    #[serde(default = "one")]
    pub w_d: f64,
    #[serde(default = "one")]
    pub w_gdis: f64,
    #[serde(default = "one")]
    pub w_hu: f64,
    #[serde(default = "one")]
    pub w_con: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w_d: 1.0, w_gdis: 1.0, w_hu: 1.0, w_con: 1.0 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [("w_d", self.w_d), ("w_gdis", self.w_gdis), ("w_hu", self.w_hu), ("w_con", self.w_con)] {
            if !w.is_finite() || w < 0.0 {
                return Err(format!("{name} must be a finite non-negative number, got {w}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SvDiff,
    Continuity,
    MvDiff,
    HueUniformity,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::SvDiff, Metric::Continuity, Metric::MvDiff, Metric::HueUniformity];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SvDiff => "sv_diff",
            Metric::Continuity => "continuity",
            Metric::MvDiff => "mv_diff",
            Metric::HueUniformity => "hue_uniformity",
        }
    }

    pub fn threshold(self) -> f64 {
        match self {
            Metric::SvDiff => 30.0,
            Metric::Continuity => 30.0,
            Metric::MvDiff => 20.0,
            Metric::HueUniformity => 20.0,
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Continuity)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Local discriminability: summed CIEDE2000 over every ordered pair of
/// distinct positions, so each pair counts twice.
pub fn local_discriminability(cm: &Colormap) -> f64 {
    local_stats(cm).0
}

/// Local discriminability together with the smallest pairwise difference.
fn local_stats(cm: &Colormap) -> (f64, f64) {
    let labs: Vec<Lab> = cm.colors().map(Color::lab).collect();
    let mut total = 0.0;
    let mut min = f64::INFINITY;
    for (i, a) in labs.iter().enumerate() {
        for b in &labs[i + 1..] {
            let d = ciede2000_lab(a, b);
            total += 2.0 * d;
            min = min.min(d);
        }
    }
    (total, min)
}

/// Colors of each map whose entity key does not occur in the other.
fn unshared<'a>(a: &'a Colormap, b: &'a Colormap) -> (Vec<&'a Color>, Vec<&'a Color>) {
    if !(a.keyed && b.keyed) {
        return (a.colors().collect(), b.colors().collect());
    }
    let ka: HashSet<&str> = a.entries.iter().map(|(k, _)| k.as_str()).collect();
    let kb: HashSet<&str> = b.entries.iter().map(|(k, _)| k.as_str()).collect();
    (
        a.entries.iter().filter(|(k, _)| !kb.contains(k.as_str())).map(|(_, c)| c).collect(),
        b.entries.iter().filter(|(k, _)| !ka.contains(k.as_str())).map(|(_, c)| c).collect(),
    )
}

/// Global discriminability: summed CIEDE2000 over cross-view pairs, leaving
/// out entities both maps encode.
pub fn global_discriminability(a: &Colormap, b: &Colormap) -> Applicable<f64> {
    cross_stats(a, b).map(|(total, _, _)| total).into()
}

/// Global discriminability with the smallest cross difference and the
/// number of pairs summed.
fn cross_stats(a: &Colormap, b: &Colormap) -> Option<(f64, f64, usize)> {
    let (xs, ys) = unshared(a, b);
    if xs.is_empty() || ys.is_empty() {
        return None;
    }
    let ylabs: Vec<Lab> = ys.iter().map(|c| c.lab()).collect();
    let mut total = 0.0;
    let mut min = f64::INFINITY;
    for x in xs.iter().map(|x| x.lab()) {
        for y in &ylabs {
            let d = ciede2000_lab(&x, y);
            total += d;
            min = min.min(d);
        }
    }
    Some((total, min, xs.len() * ys.len()))
}

/// Hue uniformity: smallest circular HSL hue gap across the two maps, grays
/// skipped.
pub fn hue_uniformity(a: &Colormap, b: &Colormap) -> Applicable<f64> {
    let hues = |cm: &Colormap| -> Vec<f64> { cm.colors().filter(|c| !c.is_achromatic()).map(Color::hsl_hue).collect() };
    let (ha, hb) = (hues(a), hues(b));
    let min = ha
        .iter()
        .flat_map(|x| hb.iter().map(move |y| circular_hue_distance(*x, *y)))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |m| m.min(d))));
    min.into()
}

/// Continuity: summed CIELAB lightness gaps across the two maps.
pub fn continuity(a: &Colormap, b: &Colormap) -> f64 {
    let lb: Vec<f64> = b.colors().map(|c| c.lab().l).collect();
    a.colors().map(|c| c.lab().l).map(|la| lb.iter().map(|l| (la - l).abs()).sum::<f64>()).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic penalty multiplier in `(1, 2)`: near 1 when `raw` comfortably
/// meets the metric's threshold, 1.5 at the threshold, near 2 when it misses.
pub fn penalty_multiplier(raw: f64, metric: Metric) -> f64 {
    let t = metric.threshold();
    let x = if metric.higher_is_better() { t - raw } else { raw - t };
    1.0 + sigmoid(PENALTY_FACTOR * x)
}

pub fn penalize(normalized_cost: f64, raw: f64, metric: Metric) -> f64 {
    normalized_cost * penalty_multiplier(raw, metric)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Scope {
    View(usize),
    Pair(usize, usize),
}

/// One raw measurement before normalization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RawEntry {
    pub metric: Metric,
    pub scope: Scope,
    /// Params-store key, e.g. `sv_diff:pie` or `mv_diff:pie|bar`.
    pub key: String,
    pub raw: Applicable<f64>,
    /// Value compared against the metric threshold: the closest pair for the
    /// two color-difference metrics, the per-pair mean lightness gap for
    /// continuity, the raw minimum for hue uniformity.
    pub level: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RawMetrics {
    pub entries: Vec<RawEntry>,
}

impl RawMetrics {
    pub fn total(&self, metric: Metric) -> f64 {
        self.entries.iter().filter(|e| e.metric == metric).filter_map(|e| e.raw.value()).sum()
    }

    pub fn observed(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.entries.iter().filter_map(|e| e.raw.value().map(|v| (e.key.as_str(), v)))
    }
}

/// Measures every metric in its scope. `views` is indexed like the graph's views.
pub fn raw_metrics(views: &[Colormap], g: &MvGraph) -> RawMetrics {
    let mut entries = Vec::new();
    let id = |i: usize| g.view(i).id.as_str();
    for (i, cm) in views.iter().enumerate() {
        if !cm.keyed || cm.len() < 2 {
            continue;
        }
        let (raw, closest) = local_stats(cm);
        entries.push(RawEntry {
            metric: Metric::SvDiff,
            scope: Scope::View(i),
            key: format!("sv_diff:{}", id(i)),
            raw: Applicable::Value(raw),
            level: closest,
        });
    }
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            let (a, b) = (&views[i], &views[j]);
            let pair_key = |m: Metric| format!("{}:{}|{}", m.name(), id(i), id(j));
            let gdis = cross_stats(a, b);
            entries.push(RawEntry {
                metric: Metric::MvDiff,
                scope: Scope::Pair(i, j),
                key: pair_key(Metric::MvDiff),
                raw: gdis.map(|(total, _, _)| total).into(),
                level: gdis.map_or(0.0, |(_, closest, _)| closest),
            });
            if g.are_siblings(g.view_group[i], g.view_group[j]) {
                let hu = hue_uniformity(a, b);
                entries.push(RawEntry {
                    metric: Metric::HueUniformity,
                    scope: Scope::Pair(i, j),
                    key: pair_key(Metric::HueUniformity),
                    raw: hu,
                    level: hu.value().unwrap_or(0.0),
                });
            }
            let con = continuity(a, b);
            entries.push(RawEntry {
                metric: Metric::Continuity,
                scope: Scope::Pair(i, j),
                key: pair_key(Metric::Continuity),
                raw: Applicable::Value(con),
                level: con / (a.len() * b.len()).max(1) as f64,
            });
        }
    }
    RawMetrics { entries }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub metric: Metric,
    pub key: String,
    pub raw: f64,
    /// Min-max scaled raw value in `[0, 1]`.
    pub normalized: f64,
    /// Normalized value oriented so that lower is better.
    pub cost: f64,
    pub penalized: f64,
    /// Weight applied in the aggregate (criterion weight times proximity).
    pub weight: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostVector {
    pub c_sv: f64,
    pub c_mv: f64,
    pub components: Vec<Component>,
    /// Keys of scopes where a metric was undefined and contributed nothing.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub not_applicable: Vec<String>,
}

impl CostVector {
    pub fn rejected() -> CostVector {
        CostVector { c_sv: f64::INFINITY, c_mv: f64::INFINITY, components: Vec::new(), not_applicable: Vec::new() }
    }

    pub fn is_rejected(&self) -> bool {
        !(self.c_sv.is_finite() && self.c_mv.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.c_sv + self.c_mv
    }

    pub fn mean_normalized(&self, metric: Metric) -> Option<f64> {
        let values: Vec<f64> = self.components.iter().filter(|c| c.metric == metric).map(|c| c.normalized).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Folds raw measurements into `(C_SV, C_MV)` under fixed extrema.
pub fn aggregate(raw: &RawMetrics, g: &MvGraph, extrema: &CaseExtrema, weights: &Weights) -> CostVector {
    let mut c_sv = 0.0;
    let mut c_mv = 0.0;
    let mut components = Vec::new();
    let mut not_applicable = Vec::new();
    for entry in &raw.entries {
        let Some(value) = entry.raw.value() else {
            not_applicable.push(entry.key.clone());
            continue;
        };
        let normalized = extrema.scale(&entry.key, value);
        let cost = if entry.metric.higher_is_better() { 1.0 - normalized } else { normalized };
        let penalized = penalize(cost, entry.level, entry.metric);
        let weight = match (entry.metric, entry.scope) {
            (Metric::SvDiff, _) => weights.w_d,
            (metric, Scope::Pair(i, j)) => {
                let w = match metric {
                    Metric::MvDiff => weights.w_gdis,
                    Metric::HueUniformity => weights.w_hu,
                    _ => weights.w_con,
                };
                g.spatial_proximity(i, j).omega * w
            }
            (_, Scope::View(_)) => 0.0,
        };
        let violated = cost > MAX_ALLOWED;
        let contribution = weight * (penalized + if violated { VIOLATION_SURCHARGE } else { 0.0 });
        if entry.metric == Metric::SvDiff {
            c_sv += contribution;
        } else {
            c_mv += contribution;
        }
        components.push(Component { metric: entry.metric, key: entry.key.clone(), raw: value, normalized, cost, penalized, weight, violated });
    }
    CostVector { c_sv, c_mv, components, not_applicable }
}

/// Measures, records the observations in `store`, and aggregates.
pub fn cost_vector(views: &[Colormap], g: &MvGraph, store: &mut ParamsStore, case_id: &str, weights: &Weights) -> CostVector {
    let raw = raw_metrics(views, g);
    for (key, value) in raw.observed() {
        store.observe(case_id, key, value);
    }
    aggregate(&raw, g, &store.case(case_id), weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{ciede2000, hcl_to_srgb};

    fn keyed(colors: &[(&str, Color)]) -> Colormap {
        Colormap::keyed(ColormapKind::Discrete, colors.iter().map(|(k, c)| (k.to_string(), *c)).collect())
    }

    fn hue(h: f64) -> Color {
        hcl_to_srgb(h, 40.0, 60.0).color
    }

    fn hsv_hue(h: f64) -> Color {
        Color::from_hsv(crate::color::Hsv { h, s: 0.8, v: 0.8 })
    }

    #[test]
    fn local_discriminability_cases() {
        let a = Color::new(0.9, 0.1, 0.1);
        let b = Color::new(0.1, 0.2, 0.8);
        assert_eq!(local_discriminability(&keyed(&[("a", a)])), 0.0);
        let two = local_discriminability(&keyed(&[("a", a), ("b", b)]));
        assert!((two - 2.0 * ciede2000(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn global_discriminability_cases() {
        let red = Color::new(1.0, 0.0, 0.0);
        assert_eq!(global_discriminability(&keyed(&[("x", red)]), &keyed(&[("x", red)])), Applicable::NotApplicable);
        assert_eq!(global_discriminability(&keyed(&[("a", red)]), &keyed(&[("b", red)])), Applicable::Value(0.0));
    }

    #[test]
    fn hue_uniformity_cases() {
        let v = |hs: &[f64]| keyed(&hs.iter().enumerate().map(|(i, h)| (["p", "q", "r"][i], hsv_hue(*h))).collect::<Vec<_>>());
        let close = |x: Applicable<f64>, y: f64| (x.value().unwrap() - y).abs() < 1e-9;
        assert!(close(hue_uniformity(&v(&[0.0]), &v(&[180.0])), 180.0));
        assert!(close(hue_uniformity(&v(&[0.0, 90.0]), &v(&[90.0])), 0.0));
        assert!(close(hue_uniformity(&v(&[10.0]), &v(&[350.0])), 20.0));
        let gray = keyed(&[("g", Color::new(0.4, 0.4, 0.4))]);
        assert_eq!(hue_uniformity(&gray, &v(&[10.0])), Applicable::NotApplicable);
    }

    #[test]
    fn continuity_cases() {
        let gray50 = hcl_to_srgb(0.0, 0.0, 50.0).color;
        let other50 = hcl_to_srgb(120.0, 20.0, 50.0).color;
        assert!(continuity(&keyed(&[("a", gray50)]), &keyed(&[("b", other50)])) < 1e-9);
        let c = continuity(&keyed(&[("a", Color::BLACK)]), &keyed(&[("b", Color::WHITE)]));
        assert!((c - 100.0).abs() < 1e-9);
    }

    #[test]
    fn penalty_shape() {
        for m in Metric::ALL {
            assert!((penalty_multiplier(m.threshold(), m) - 1.5).abs() < 1e-12);
        }
        assert!(penalty_multiplier(500.0, Metric::SvDiff) - 1.0 < 1e-9);
        assert!(2.0 - penalty_multiplier(-500.0, Metric::SvDiff) < 1e-9);
        assert!(penalty_multiplier(-500.0, Metric::Continuity) - 1.0 < 1e-9);
        assert_eq!(penalize(0.0, 0.0, Metric::MvDiff), 0.0);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = keyed(&[("a", hue(10.0)), ("b", hue(200.0))]);
        let b = keyed(&[("c", hue(90.0)), ("a", hue(10.0)), ("d", hue(300.0))]);
        assert_eq!(global_discriminability(&a, &b).value().map(|v| (v * 1e9).round()), global_discriminability(&b, &a).value().map(|v| (v * 1e9).round()));
        assert!((continuity(&a, &b) - continuity(&b, &a)).abs() < 1e-9);
        assert_eq!(hue_uniformity(&a, &b), hue_uniformity(&b, &a));
    }
}
