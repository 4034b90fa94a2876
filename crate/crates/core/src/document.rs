//! Serialized assignments, result documents and chart-document patching.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::color::Color;
use crate::error::EvalError;
use crate::evaluator::EvalReport;
use crate::graph::MvGraph;
use crate::metrics::{Colormap, CostVector, Weights};
use crate::optimizer::{ChildParams, GaConfig, Solution};
use crate::spec::ColormapKind;

pub const DEFAULT_SCALE_PATH: &str = "encoding.color.scale";

/// Colors of one view: entity key to color, or sample index to color for
/// continuous colormaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewColors {
    pub kind: ColormapKind,
    pub colors: IndexMap<String, Color>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub views: IndexMap<String, ViewColors>,
}

impl Assignment {
    pub fn from_views(g: &MvGraph, views: &[Colormap]) -> Assignment {
        let views = views
            .iter()
            .enumerate()
            .map(|(i, cm)| {
                let colors = cm.entries.iter().map(|(k, c)| (k.clone(), c.quantized())).collect();
                (g.view(i).id.clone(), ViewColors { kind: cm.kind, colors })
            })
            .collect();
        Assignment { views }
    }

    /// Per-view colormaps in graph order. Every view and every categorical
    /// entity of the spec must be present.
    pub fn to_views(&self, g: &MvGraph) -> Result<Vec<Colormap>, EvalError> {
        (0..g.view_count())
            .map(|i| {
                let spec = g.view(i);
                let vc = self.views.get(&spec.id).ok_or_else(|| EvalError::SchemaMismatch(format!("view {:?} is missing", spec.id)))?;
                match spec.keys() {
                    Some(keys) => {
                        let entries = keys
                            .iter()
                            .map(|k| {
                                vc.colors.get(k).map(|c| (k.clone(), *c)).ok_or_else(|| {
                                    EvalError::SchemaMismatch(format!("view {:?} has no color for entity {k:?}", spec.id))
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Colormap::keyed(spec.colormap_kind, entries))
                    }
                    None => {
                        if vc.colors.len() < 2 {
                            return Err(EvalError::SchemaMismatch(format!("continuous view {:?} needs at least two samples", spec.id)));
                        }
                        Ok(Colormap::sampled(spec.colormap_kind, vc.colors.values().copied().collect()))
                    }
                }
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Assignment, EvalError> {
        let value: Value = serde_json::from_str(text).map_err(|e| EvalError::SchemaMismatch(e.to_string()))?;
        // A result document is accepted too; its first front member is used.
        let value = match value.get("front").and_then(|f| f.get(0)).and_then(|m| m.get("assignment")) {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(value).map_err(|e| EvalError::SchemaMismatch(e.to_string()))
    }
}

/// The genome in serialized form: root colors keyed by the view ids of
/// their group, and child parameters keyed by the child's first view id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeDoc {
    pub roots: IndexMap<String, Vec<Color>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub child_params: IndexMap<String, ChildParams>,
}

fn group_label(g: &MvGraph, group: usize) -> String {
    g.groups[group].views.iter().map(|&v| g.view(v).id.as_str()).collect::<Vec<_>>().join("+")
}

impl GenomeDoc {
    pub fn from_solution(g: &MvGraph, sol: &Solution) -> GenomeDoc {
        GenomeDoc {
            roots: sol.roots.iter().map(|(&grp, colors)| (group_label(g, grp), colors.clone())).collect(),
            child_params: sol.child_params.iter().map(|(&grp, p)| (group_label(g, grp), *p)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontEntry {
    pub assignment: Assignment,
    pub genome: GenomeDoc,
    pub cost: CostSummary,
    pub eval: EvalReport,
}

/// Aggregate objectives plus the per-metric breakdown.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostSummary {
    pub c_sv: f64,
    pub c_mv: f64,
    pub components: Vec<crate::metrics::Component>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub not_applicable: Vec<String>,
}

impl From<&CostVector> for CostSummary {
    fn from(c: &CostVector) -> Self {
        CostSummary { c_sv: c.c_sv, c_mv: c.c_mv, components: c.components.clone(), not_applicable: c.not_applicable.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunEcho {
    pub case_id: String,
    pub ga: GaConfig,
    pub weights: Weights,
    pub palettes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultDoc {
    pub seed: u64,
    pub config: RunEcho,
    pub front: Vec<FrontEntry>,
}

impl ResultDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }
}

/// Writes `{domain, range}` into `doc` at the dotted `path`, creating
/// intermediate objects. Everything else in the document is left as is.
pub fn patch_chart(doc: &Value, path: &str, colors: &ViewColors) -> Result<Value, String> {
    let mut out = doc.clone();
    let mut cursor = &mut out;
    for part in path.split('.').filter(|p| !p.is_empty()) {
        let obj = cursor.as_object_mut().ok_or_else(|| format!("cannot descend into non-object at {part:?}"))?;
        cursor = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let scale = cursor.as_object_mut().ok_or_else(|| format!("{path:?} is not an object"))?;
    let range: Vec<Value> = colors.colors.values().map(|c| Value::String(c.to_hex())).collect();
    if colors.kind == ColormapKind::Discrete {
        let domain: Vec<Value> = colors.colors.keys().map(|k| Value::String(k.clone())).collect();
        scale.insert("domain".into(), Value::Array(domain));
    } else {
        scale.remove("domain");
    }
    scale.insert("range".into(), Value::Array(range));
    Ok(out)
}
