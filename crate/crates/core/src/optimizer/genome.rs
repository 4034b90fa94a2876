use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::inherit::{derive_families, inherit_sequential, FamilyRequest};
use crate::color::{hcl_to_srgb, Color};
use crate::error::DecodeError;
use crate::graph::{GroupKind, MvGraph};
use crate::metrics::Colormap;

pub const DEFAULT_SPREAD: f64 = 30.0;

/// How a hierarchy child group is derived from its parent entity's color.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChildParams {
    /// Hue range in degrees covered by a categorical family.
    pub spread: f64,
    pub chroma_offset: f64,
    pub luminance_offset: f64,
}

impl Default for ChildParams {
    fn default() -> Self {
        ChildParams { spread: DEFAULT_SPREAD, chroma_offset: 0.0, luminance_offset: 0.0 }
    }
}

/// The genome: colors for every root group, derivation parameters for every
/// hierarchy child. Child colors are never stored.
///
/// A categorical root group holds one color per entity key (in group key
/// order); a sequential root group holds the single base color of its ramp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub roots: BTreeMap<usize, Vec<Color>>,
    pub child_params: BTreeMap<usize, ChildParams>,
}

/// Colors of one group after decoding.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupColors {
    Keyed(Vec<(String, Color)>),
    Ramp(Vec<Color>),
}

impl GroupColors {
    pub fn get(&self, key: &str) -> Option<Color> {
        match self {
            GroupColors::Keyed(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, c)| *c),
            GroupColors::Ramp(_) => None,
        }
    }

    pub fn colors(&self) -> Vec<Color> {
        match self {
            GroupColors::Keyed(entries) => entries.iter().map(|(_, c)| *c).collect(),
            GroupColors::Ramp(colors) => colors.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub groups: Vec<GroupColors>,
    pub views: Vec<Colormap>,
    pub gamut_mapped: bool,
}

impl Solution {
    /// Every root group gets the leading colors of `palette`; sequential
    /// roots take its first color.
    pub fn uniform(g: &MvGraph, palette: &[Color]) -> Solution {
        let mut roots = BTreeMap::new();
        for group in g.root_groups() {
            let colors = match g.groups[group].keys() {
                Some(keys) => (0..keys.len()).map(|i| palette[i % palette.len()]).collect(),
                None => vec![palette[0]],
            };
            roots.insert(group, colors);
        }
        Solution { roots, child_params: default_child_params(g) }
    }

    pub fn decode(&self, g: &MvGraph, samples: usize) -> Result<Decoded, DecodeError> {
        let mut groups: Vec<Option<GroupColors>> = vec![None; g.groups.len()];
        let mut gamut_mapped = false;
        for &group in g.coloring_order() {
            if !g.is_derived(group) {
                groups[group] = Some(self.root_colors(g, group, samples, &mut gamut_mapped)?);
            }
            self.derive_children(g, group, samples, &mut groups, &mut gamut_mapped)?;
        }
        let groups: Vec<GroupColors> = groups.into_iter().map(|c| c.expect("every group is colored in coloring order")).collect();
        let views = (0..g.view_count()).map(|v| view_colormap(g, v, &groups)).collect();
        Ok(Decoded { groups, views, gamut_mapped })
    }

    /// Re-derives `group` (if it is a root) and everything below it, updating
    /// only the affected groups and views of `decoded`.
    pub fn redecode_subtree(&self, g: &MvGraph, group: usize, samples: usize, decoded: &mut Decoded) -> Result<(), DecodeError> {
        let mut groups: Vec<Option<GroupColors>> = decoded.groups.iter().cloned().map(Some).collect();
        let mut gamut_mapped = false;
        if !g.is_derived(group) {
            groups[group] = Some(self.root_colors(g, group, samples, &mut gamut_mapped)?);
        }
        let mut affected = vec![group];
        affected.extend(g.descendants(group));
        for &p in &affected {
            self.derive_children(g, p, samples, &mut groups, &mut gamut_mapped)?;
        }
        for &p in &affected {
            decoded.groups[p] = groups[p].take().expect("affected groups are colored");
            for &v in &g.groups[p].views {
                decoded.views[v] = view_colormap(g, v, &decoded.groups);
            }
        }
        decoded.gamut_mapped |= gamut_mapped;
        Ok(())
    }

    fn root_colors(&self, g: &MvGraph, group: usize, samples: usize, gamut: &mut bool) -> Result<GroupColors, DecodeError> {
        let colors = self.roots.get(&group).ok_or(DecodeError::MissingRoot(group))?;
        match &g.groups[group].kind {
            GroupKind::Categorical { keys } => {
                if colors.len() != keys.len() {
                    return Err(DecodeError::RootSize { group, expected: keys.len(), actual: colors.len() });
                }
                Ok(GroupColors::Keyed(keys.iter().cloned().zip(colors.iter().copied()).collect()))
            }
            GroupKind::Sequential { .. } => {
                if colors.len() != 1 {
                    return Err(DecodeError::RootSize { group, expected: 1, actual: colors.len() });
                }
                let ramp = inherit_sequential(&colors[0], samples)?;
                *gamut |= ramp.gamut_mapped;
                Ok(GroupColors::Ramp(ramp.colors))
            }
        }
    }

    pub fn params_for(&self, group: usize) -> ChildParams {
        self.child_params.get(&group).copied().unwrap_or_default()
    }

    /// Colors every direct child group of `parent` from its decoded colors.
    fn derive_children(
        &self,
        g: &MvGraph,
        parent: usize,
        samples: usize,
        groups: &mut [Option<GroupColors>],
        gamut: &mut bool,
    ) -> Result<(), DecodeError> {
        let links: Vec<_> = g.child_links(parent).collect();
        if links.is_empty() {
            return Ok(());
        }
        let parent_colors = groups[parent].clone().expect("parents are colored before their children");
        let mut families = Vec::new();
        let mut requests = Vec::new();
        for link in &links {
            let base = parent_colors.get(&link.parent_key).ok_or(DecodeError::MissingRoot(parent))?;
            let params = self.params_for(link.child_group);
            match &g.groups[link.child_group].kind {
                GroupKind::Sequential { .. } => {
                    let ramp = inherit_sequential(&offset_parent(base, &params), samples)?;
                    *gamut |= ramp.gamut_mapped;
                    groups[link.child_group] = Some(GroupColors::Ramp(ramp.colors));
                }
                GroupKind::Categorical { keys } => {
                    families.push(link.child_group);
                    requests.push(FamilyRequest {
                        parent: base,
                        count: keys.len(),
                        spread: params.spread,
                        chroma_offset: params.chroma_offset,
                        luminance_offset: params.luminance_offset,
                    });
                }
            }
        }
        if !requests.is_empty() {
            for (child, derived) in families.into_iter().zip(derive_families(&requests)?) {
                *gamut |= derived.gamut_mapped;
                let keys = g.groups[child].keys().unwrap_or_default();
                groups[child] = Some(GroupColors::Keyed(keys.iter().cloned().zip(derived.colors).collect()));
            }
        }
        Ok(())
    }
}

/// Parent color shifted by a child's chroma/luminance offsets.
pub fn offset_parent(base: Color, params: &ChildParams) -> Color {
    if params.chroma_offset == 0.0 && params.luminance_offset == 0.0 {
        return base;
    }
    let hcl = base.hcl();
    hcl_to_srgb(hcl.h, (hcl.c + params.chroma_offset).max(0.0), hcl.l + params.luminance_offset).color
}

pub fn default_child_params(g: &MvGraph) -> BTreeMap<usize, ChildParams> {
    g.hierarchy_links.iter().map(|l| (l.child_group, ChildParams::default())).collect()
}

fn view_colormap(g: &MvGraph, view: usize, groups: &[GroupColors]) -> Colormap {
    let spec = g.view(view);
    match &groups[g.view_group[view]] {
        GroupColors::Keyed(entries) => {
            let keys = spec.keys().unwrap_or_default();
            let picked = keys
                .iter()
                .filter_map(|k| entries.iter().find(|(ek, _)| ek == k).cloned())
                .collect();
            Colormap::keyed(spec.colormap_kind, picked)
        }
        GroupColors::Ramp(colors) => Colormap::sampled(spec.colormap_kind, colors.clone()),
    }
}

/// Re-derives every hierarchy child from its decoded parent colors and
/// reports the child groups whose colors differ from `decoded`.
pub fn hierarchy_violations(sol: &Solution, g: &MvGraph, decoded: &Decoded, samples: usize) -> Vec<usize> {
    let mut violations = Vec::new();
    for parent in 0..g.groups.len() {
        let links: Vec<_> = g.child_links(parent).collect();
        if links.is_empty() {
            continue;
        }
        let mut fresh: Vec<Option<GroupColors>> = vec![None; g.groups.len()];
        fresh[parent] = Some(decoded.groups[parent].clone());
        let mut gamut = false;
        if sol.derive_children(g, parent, samples, &mut fresh, &mut gamut).is_err() {
            violations.extend(links.iter().map(|l| l.child_group));
            continue;
        }
        for link in links {
            if fresh[link.child_group].as_ref() != Some(&decoded.groups[link.child_group]) {
                violations.push(link.child_group);
            }
        }
    }
    violations
}
