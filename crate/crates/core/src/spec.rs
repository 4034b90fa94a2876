//! The multi-view specification document.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::SpecError;
use crate::metrics::Weights;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MvSpec {
    pub canvas: Canvas,
    pub views: Vec<ViewSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Weights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaOverrides>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    /// Euclidean gap between two boxes; 0 when they touch or overlap.
    pub fn distance(&self, other: &BBox) -> f64 {
        let gap = |a0: f64, a1: f64, b0: f64, b1: f64| (b0 - a1).max(a0 - b1).max(0.0);
        let dx = gap(self.x, self.x + self.width, other.x, other.x + other.width);
        let dy = gap(self.y, self.y + self.height, other.y, other.y + other.height);
        dx.hypot(dy)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Categorical,
    Sequential,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "lowercase")]
pub enum ColormapKind {
    Discrete,
    Continuous,
}

/// Entity keys for categorical fields, a numeric `[min, max]` for sequential ones.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Domain {
    Keys(Vec<String>),
    Range([f64; 2]),
}

impl Domain {
    pub fn keys(&self) -> Option<&[String]> {
        match self {
            Domain::Keys(keys) => Some(keys),
            Domain::Range(_) => None,
        }
    }
}

/// Points a view at the entity of another view it refines.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ParentPath {
    pub view: String,
    pub key: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ViewSpec {
    pub id: String,
    pub bbox: BBox,
    #[serde(default)]
    pub chart_kind: String,
    pub color_field: String,
    pub field_kind: FieldKind,
    pub domain: Domain,
    pub colormap_kind: ColormapKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedded_chart_doc: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_path: Option<ParentPath>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ViewSpec {
    pub fn keys(&self) -> Option<&[String]> {
        match self.field_kind {
            FieldKind::Categorical => self.domain.keys(),
            FieldKind::Sequential => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.field_kind == FieldKind::Categorical
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DeclaredKind {
    Full,
    Partial,
    None,
    Hierarchy,
}

/// An explicit relation. For `hierarchy`, `a` is the parent view, `b` the
/// child, and `parent` the entity of `a` that `b` refines.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RelationDecl {
    pub a: String,
    pub b: String,
    pub kind: DeclaredKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct GaOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pop_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_best: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl MvSpec {
    pub fn from_json(text: &str) -> Result<MvSpec, SpecError> {
        let spec: MvSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn view(&self, id: &str) -> Option<&ViewSpec> {
        self.views.iter().find(|v| v.id == id)
    }

    pub fn weights(&self) -> Weights {
        self.weights.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.views.is_empty() {
            return Err(SpecError::Empty);
        }
        let mut ids = HashSet::new();
        for view in &self.views {
            if !ids.insert(view.id.as_str()) {
                return Err(SpecError::DuplicateView(view.id.clone()));
            }
            validate_view(view)?;
        }
        for rel in &self.relations {
            for id in [&rel.a, &rel.b] {
                if !ids.contains(id.as_str()) {
                    return Err(SpecError::UnknownView(id.clone()));
                }
            }
        }
        if let Some(parent) = self.views.iter().filter_map(|v| v.parent_path.as_ref()).find(|p| !ids.contains(p.view.as_str())) {
            return Err(SpecError::UnknownView(parent.view.clone()));
        }
        if let Some(w) = &self.weights {
            w.validate().map_err(SpecError::InvalidWeights)?;
        }
        Ok(())
    }
}

fn validate_view(view: &ViewSpec) -> Result<(), SpecError> {
    let invalid = |reason: &str| SpecError::InvalidView { id: view.id.clone(), reason: reason.to_string() };
    if !(view.bbox.width > 0.0 && view.bbox.height > 0.0) {
        return Err(invalid("bounding box needs positive width and height"));
    }
    if view.colormap_kind == ColormapKind::Continuous && view.field_kind != FieldKind::Sequential {
        return Err(invalid("continuous colormaps require a sequential field"));
    }
    match (&view.domain, view.field_kind) {
        (Domain::Keys(keys), FieldKind::Categorical) => {
            if keys.is_empty() {
                return Err(invalid("empty domain"));
            }
            let unique: HashSet<_> = keys.iter().collect();
            if unique.len() != keys.len() {
                return Err(invalid("duplicate entity keys in domain"));
            }
        }
        (Domain::Range([lo, hi]), FieldKind::Sequential) => {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(invalid("sequential domain must be a finite [min, max]"));
            }
        }
        (Domain::Keys(_), FieldKind::Sequential) => return Err(invalid("sequential fields take a [min, max] domain")),
        (Domain::Range(_), FieldKind::Categorical) => return Err(invalid("categorical fields take a list of entity keys")),
    }
    Ok(())
}
