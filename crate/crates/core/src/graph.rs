//! The knowledge graph over views: data relations, layout adjacency, color
//! groups and hierarchy links.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::GraphError;
use crate::spec::{DeclaredKind, MvSpec, RelationDecl, ViewSpec};

/// Fraction of the canvas diagonal by which each bounding box is grown
/// before testing adjacency.
pub const DEFAULT_ADJACENCY_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationKind {
    FullRedundancy,
    PartialRedundancy,
    NonRedundancy,
    /// `child` refines entity `key` of `parent`.
    Hierarchy { parent: String, child: String, key: String },
}

impl RelationKind {
    pub fn is_redundant(&self) -> bool {
        matches!(self, RelationKind::FullRedundancy | RelationKind::PartialRedundancy)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DataEdge {
    pub a: usize,
    pub b: usize,
    pub kind: RelationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    Categorical { keys: Vec<String> },
    Sequential { field: String },
}

/// Views sharing one entity-keyed colormap.
#[derive(Clone, Debug, Serialize)]
pub struct ColorGroup {
    pub id: usize,
    pub views: Vec<usize>,
    pub kind: GroupKind,
}

impl ColorGroup {
    pub fn keys(&self) -> Option<&[String]> {
        match &self.kind {
            GroupKind::Categorical { keys } => Some(keys),
            GroupKind::Sequential { .. } => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, GroupKind::Categorical { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HierarchyLink {
    pub parent_group: usize,
    pub parent_key: String,
    pub child_group: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proximity {
    pub omega: f64,
    /// Set when the views are not connected in the adjacency graph and
    /// `omega` fell back to `1 / (max hop + 1)`.
    pub disconnected: bool,
}

#[derive(Clone, Debug)]
pub struct GraphOptions {
    pub adjacency_margin: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { adjacency_margin: DEFAULT_ADJACENCY_MARGIN }
    }
}

#[derive(Clone, Debug)]
pub struct MvGraph {
    pub spec: MvSpec,
    pub data_edges: Vec<DataEdge>,
    pub adjacency_edges: Vec<(usize, usize)>,
    pub groups: Vec<ColorGroup>,
    pub view_group: Vec<usize>,
    pub hierarchy_links: Vec<HierarchyLink>,
    hops: Vec<Vec<Option<u32>>>,
    max_hop: u32,
    order: Vec<usize>,
}

/// Infers the data relation between two views; a declaration always wins.
pub fn infer_relation(a: &ViewSpec, b: &ViewSpec, declared: Option<&RelationDecl>) -> Result<RelationKind, GraphError> {
    if let Some(decl) = declared {
        return resolve_declared(a, b, decl);
    }
    let down = hierarchy_pattern(a, b);
    let up = hierarchy_pattern(b, a);
    let redundancy = redundancy_pattern(a, b);
    let ambiguous = || GraphError::AmbiguousRelation { a: a.id.clone(), b: b.id.clone() };
    let hierarchy = match (down, up) {
        (Some(_), Some(_)) => return Err(ambiguous()),
        (h, None) | (None, h) => h,
    };
    match hierarchy {
        Some(_) if redundancy.is_redundant() => Err(ambiguous()),
        Some(h) => Ok(h),
        None => Ok(redundancy),
    }
}

fn hierarchy_pattern(parent: &ViewSpec, child: &ViewSpec) -> Option<RelationKind> {
    let keys = parent.keys()?;
    let key = match &child.parent_path {
        Some(path) if path.view == parent.id => Some(path.key.clone()),
        Some(_) => None,
        None => keys.contains(&child.color_field).then(|| child.color_field.clone()),
    }?;
    Some(RelationKind::Hierarchy { parent: parent.id.clone(), child: child.id.clone(), key })
}

fn redundancy_pattern(a: &ViewSpec, b: &ViewSpec) -> RelationKind {
    match (a.keys(), b.keys()) {
        (Some(ka), Some(kb)) => {
            let sa: HashSet<&String> = ka.iter().collect();
            let sb: HashSet<&String> = kb.iter().collect();
            if sa == sb && a.color_field == b.color_field {
                RelationKind::FullRedundancy
            } else if sa.intersection(&sb).next().is_some() {
                RelationKind::PartialRedundancy
            } else {
                RelationKind::NonRedundancy
            }
        }
        (None, None) if a.color_field == b.color_field => RelationKind::FullRedundancy,
        _ => RelationKind::NonRedundancy,
    }
}

fn resolve_declared(a: &ViewSpec, b: &ViewSpec, decl: &RelationDecl) -> Result<RelationKind, GraphError> {
    let invalid = |reason: &str| GraphError::InvalidRelation { a: decl.a.clone(), b: decl.b.clone(), reason: reason.to_string() };
    match decl.kind {
        DeclaredKind::Full | DeclaredKind::Partial => {
            if a.field_kind != b.field_kind {
                return Err(invalid("redundant views must encode the same kind of field"));
            }
            Ok(if decl.kind == DeclaredKind::Full { RelationKind::FullRedundancy } else { RelationKind::PartialRedundancy })
        }
        DeclaredKind::None => Ok(RelationKind::NonRedundancy),
        DeclaredKind::Hierarchy => {
            let (parent, child) = if decl.a == a.id { (a, b) } else { (b, a) };
            let keys = parent.keys().ok_or_else(|| invalid("hierarchy parent must be categorical"))?;
            let key = decl
                .parent
                .clone()
                .or_else(|| child.parent_path.as_ref().filter(|p| p.view == parent.id).map(|p| p.key.clone()))
                .unwrap_or_else(|| child.color_field.clone());
            if !keys.contains(&key) {
                return Err(invalid(&format!("parent entity {key:?} is not in the parent's domain")));
            }
            Ok(RelationKind::Hierarchy { parent: parent.id.clone(), child: child.id.clone(), key })
        }
    }
}

/// Topological order over groups; parents precede children, ties by id.
pub fn coloring_order(n_groups: usize, links: &[HierarchyLink]) -> Result<Vec<usize>, GraphError> {
    let mut indegree = vec![0usize; n_groups];
    let mut children = vec![Vec::new(); n_groups];
    for link in links {
        indegree[link.child_group] += 1;
        children[link.parent_group].push(link.child_group);
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n_groups).filter(|g| indegree[*g] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n_groups);
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for &c in &children[g] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() < n_groups {
        let stuck = (0..n_groups).find(|g| indegree[*g] > 0).unwrap_or(0);
        return Err(GraphError::CyclicHierarchy(stuck));
    }
    Ok(order)
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as representative so group ids follow view order
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

pub fn build_graph(spec: &MvSpec) -> Result<MvGraph, GraphError> {
    build_graph_with(spec, &GraphOptions::default())
}

pub fn build_graph_with(spec: &MvSpec, options: &GraphOptions) -> Result<MvGraph, GraphError> {
    let views = &spec.views;
    let n = views.len();

    let mut data_edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let declared = spec
                .relations
                .iter()
                .find(|r| (r.a == views[i].id && r.b == views[j].id) || (r.a == views[j].id && r.b == views[i].id));
            let kind = infer_relation(&views[i], &views[j], declared)?;
            data_edges.push(DataEdge { a: i, b: j, kind });
        }
    }

    let diagonal = spec.canvas.width.hypot(spec.canvas.height);
    let reach = 2.0 * options.adjacency_margin * diagonal;
    let mut adjacency_edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if views[i].bbox.distance(&views[j].bbox) <= reach {
                adjacency_edges.push((i, j));
            }
        }
    }

    let mut sets = DisjointSet((0..n).collect());
    for edge in data_edges.iter().filter(|e| e.kind.is_redundant()) {
        sets.union(edge.a, edge.b);
    }
    let mut view_group = vec![usize::MAX; n];
    let mut groups: Vec<ColorGroup> = Vec::new();
    for v in 0..n {
        let root = sets.find(v);
        if view_group[root] == usize::MAX {
            view_group[root] = groups.len();
            groups.push(ColorGroup { id: groups.len(), views: Vec::new(), kind: GroupKind::Sequential { field: String::new() } });
        }
        view_group[v] = view_group[root];
        groups[view_group[v]].views.push(v);
    }
    for group in &mut groups {
        group.kind = group_kind(spec, &group.views)?;
    }

    let mut links = BTreeSet::new();
    for edge in &data_edges {
        if let RelationKind::Hierarchy { parent, child, key } = &edge.kind {
            let p = index_of(spec, parent)?;
            let c = index_of(spec, child)?;
            let link = HierarchyLink { parent_group: view_group[p], parent_key: key.clone(), child_group: view_group[c] };
            if link.parent_group == link.child_group {
                return Err(GraphError::CyclicHierarchy(link.parent_group));
            }
            links.insert(link);
        }
    }
    let hierarchy_links: Vec<HierarchyLink> = links.into_iter().collect();
    let mut parents_seen = HashSet::new();
    for link in &hierarchy_links {
        if !parents_seen.insert(link.child_group) {
            return Err(GraphError::ConflictingHierarchy { group: link.child_group });
        }
    }
    let order = coloring_order(groups.len(), &hierarchy_links)?;

    let hops = hop_matrix(n, &adjacency_edges);
    let max_hop = hops.iter().flatten().flatten().copied().max().unwrap_or(0);

    Ok(MvGraph {
        spec: spec.clone(),
        data_edges,
        adjacency_edges,
        groups,
        view_group,
        hierarchy_links,
        hops,
        max_hop,
        order,
    })
}

fn index_of(spec: &MvSpec, id: &str) -> Result<usize, GraphError> {
    spec.views.iter().position(|v| v.id == id).ok_or_else(|| GraphError::UnknownView(id.to_string()))
}

fn group_kind(spec: &MvSpec, members: &[usize]) -> Result<GroupKind, GraphError> {
    let first = &spec.views[members[0]];
    if let Some(other) = members.iter().map(|&v| &spec.views[v]).find(|v| v.field_kind != first.field_kind) {
        return Err(GraphError::InvalidRelation {
            a: first.id.clone(),
            b: other.id.clone(),
            reason: "a color group cannot mix categorical and sequential fields".into(),
        });
    }
    if first.is_categorical() {
        let mut keys: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        for &v in members {
            for key in spec.views[v].keys().unwrap_or_default() {
                if seen.insert(key.clone()) {
                    keys.push(key.clone());
                }
            }
        }
        Ok(GroupKind::Categorical { keys })
    } else {
        Ok(GroupKind::Sequential { field: first.color_field.clone() })
    }
}

fn hop_matrix(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    let mut neighbors = vec![Vec::new(); n];
    for &(a, b) in edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    (0..n)
        .map(|start| {
            let mut dist = vec![None; n];
            dist[start] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let d = dist[v].unwrap_or(0);
                for &w in &neighbors[v] {
                    if dist[w].is_none() {
                        dist[w] = Some(d + 1);
                        queue.push_back(w);
                    }
                }
            }
            dist
        })
        .collect()
}

impl MvGraph {
    pub fn view_count(&self) -> usize {
        self.spec.views.len()
    }

    pub fn view(&self, index: usize) -> &ViewSpec {
        &self.spec.views[index]
    }

    pub fn view_index(&self, id: &str) -> Option<usize> {
        self.spec.views.iter().position(|v| v.id == id)
    }

    pub fn group_of(&self, view: usize) -> &ColorGroup {
        &self.groups[self.view_group[view]]
    }

    pub fn hop_distance(&self, i: usize, j: usize) -> Option<u32> {
        self.hops[i][j]
    }

    /// Inverse hop distance between two views.
    pub fn spatial_proximity(&self, i: usize, j: usize) -> Proximity {
        match self.hops[i][j] {
            Some(d) if d > 0 => Proximity { omega: 1.0 / d as f64, disconnected: false },
            Some(_) => Proximity { omega: 1.0, disconnected: false },
            None => Proximity { omega: 1.0 / (self.max_hop as f64 + 1.0), disconnected: true },
        }
    }

    pub fn coloring_order(&self) -> &[usize] {
        &self.order
    }

    pub fn parent_link(&self, group: usize) -> Option<&HierarchyLink> {
        self.hierarchy_links.iter().find(|l| l.child_group == group)
    }

    pub fn child_links(&self, group: usize) -> impl Iterator<Item = &HierarchyLink> {
        self.hierarchy_links.iter().filter(move |l| l.parent_group == group)
    }

    /// Groups whose colors are chosen directly rather than derived from a parent.
    pub fn root_groups(&self) -> Vec<usize> {
        self.order.iter().copied().filter(|g| self.parent_link(*g).is_none()).collect()
    }

    pub fn is_derived(&self, group: usize) -> bool {
        self.parent_link(group).is_some()
    }

    /// The root group a derived group descends from.
    pub fn root_of(&self, mut group: usize) -> usize {
        while let Some(link) = self.parent_link(group) {
            group = link.parent_group;
        }
        group
    }

    pub fn is_ancestor(&self, ancestor: usize, mut group: usize) -> bool {
        while let Some(link) = self.parent_link(group) {
            if link.parent_group == ancestor {
                return true;
            }
            group = link.parent_group;
        }
        false
    }

    /// Groups derived from `group`, in coloring order.
    pub fn descendants(&self, group: usize) -> Vec<usize> {
        self.order.iter().copied().filter(|g| self.is_ancestor(group, *g)).collect()
    }

    /// Child groups hanging off the same parent group.
    pub fn are_siblings(&self, a: usize, b: usize) -> bool {
        a != b
            && matches!((self.parent_link(a), self.parent_link(b)), (Some(x), Some(y)) if x.parent_group == y.parent_group)
    }

    /// Views in groups where one derives from the other.
    pub fn hierarchy_related(&self, a: usize, b: usize) -> bool {
        let (ga, gb) = (self.view_group[a], self.view_group[b]);
        self.is_ancestor(ga, gb) || self.is_ancestor(gb, ga)
    }

    pub fn relation(&self, a: usize, b: usize) -> Option<&RelationKind> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.data_edges.iter().find(|e| e.a == lo && e.b == hi).map(|e| &e.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{BBox, ColormapKind, Domain, FieldKind, ParentPath};
    use serde_json::Map;

    fn cat(id: &str, field: &str, keys: &[&str], x: f64, y: f64) -> ViewSpec {
        ViewSpec {
            id: id.into(),
            bbox: BBox { x, y, width: 10.0, height: 10.0 },
            chart_kind: String::new(),
            color_field: field.into(),
            field_kind: FieldKind::Categorical,
            domain: Domain::Keys(keys.iter().map(|k| k.to_string()).collect()),
            colormap_kind: ColormapKind::Discrete,
            embedded_chart_doc: None,
            parent_path: None,
            extra: Map::new(),
        }
    }

    fn seq(id: &str, field: &str, x: f64, y: f64) -> ViewSpec {
        ViewSpec {
            field_kind: FieldKind::Sequential,
            domain: Domain::Range([0.0, 1.0]),
            colormap_kind: ColormapKind::Continuous,
            ..cat(id, field, &["x"], x, y)
        }
    }

    fn spec(views: Vec<ViewSpec>) -> MvSpec {
        MvSpec {
            canvas: crate::spec::Canvas { width: 100.0, height: 100.0, extra: Map::new() },
            views,
            relations: Vec::new(),
            weights: None,
            ga: None,
            extra: Map::new(),
        }
    }

    #[test]
    fn pet_relations() {
        let pie = cat("pie", "species", &["cat", "dog"], 0.0, 0.0);
        let bar = cat("bar", "species", &["cat", "dog"], 12.0, 0.0);
        let map_cat = seq("map_cat", "cat", 0.0, 12.0);
        let map_dog = seq("map_dog", "dog", 12.0, 12.0);
        assert_eq!(infer_relation(&pie, &bar, None).unwrap(), RelationKind::FullRedundancy);
        assert_eq!(infer_relation(&map_cat, &map_dog, None).unwrap(), RelationKind::NonRedundancy);
        assert_eq!(
            infer_relation(&pie, &map_cat, None).unwrap(),
            RelationKind::Hierarchy { parent: "pie".into(), child: "map_cat".into(), key: "cat".into() }
        );
        // direction is recovered regardless of argument order
        assert_eq!(
            infer_relation(&map_cat, &pie, None).unwrap(),
            RelationKind::Hierarchy { parent: "pie".into(), child: "map_cat".into(), key: "cat".into() }
        );

        let g = build_graph(&spec(vec![pie, bar, map_cat, map_dog])).unwrap();
        assert_eq!(g.groups.len(), 3);
        assert_eq!(g.groups[0].views, vec![0, 1]);
        assert_eq!(g.hierarchy_links.len(), 2);
        assert_eq!(g.root_groups(), vec![0]);
        assert_eq!(g.coloring_order(), &[0, 1, 2]);
        assert!(g.are_siblings(1, 2));
    }

    #[test]
    fn partial_and_disjoint() {
        let a = cat("a", "party", &["dem", "rep", "grn"], 0.0, 0.0);
        let b = cat("b", "party", &["dem", "rep", "lib"], 0.0, 0.0);
        let c = cat("c", "party", &["x", "y"], 0.0, 0.0);
        assert_eq!(infer_relation(&a, &b, None).unwrap(), RelationKind::PartialRedundancy);
        assert_eq!(infer_relation(&a, &c, None).unwrap(), RelationKind::NonRedundancy);
        let g = build_graph(&spec(vec![a, b, c])).unwrap();
        assert_eq!(g.groups[0].keys().unwrap(), ["dem", "rep", "grn", "lib"]);
        assert_eq!(g.view_group, vec![0, 0, 1]);
    }

    #[test]
    fn ambiguous_needs_declaration() {
        // "cat" is both an entity of `a` and the field of `b`, while the domains overlap
        let a = cat("a", "species", &["cat", "dog"], 0.0, 0.0);
        let b = cat("b", "cat", &["cat", "tabby"], 0.0, 0.0);
        assert!(matches!(infer_relation(&a, &b, None), Err(GraphError::AmbiguousRelation { .. })));
        let decl = RelationDecl { a: "a".into(), b: "b".into(), kind: DeclaredKind::Hierarchy, parent: Some("cat".into()) };
        assert!(matches!(infer_relation(&a, &b, Some(&decl)).unwrap(), RelationKind::Hierarchy { .. }));
        let decl = RelationDecl { a: "a".into(), b: "b".into(), kind: DeclaredKind::None, parent: None };
        assert_eq!(infer_relation(&a, &b, Some(&decl)).unwrap(), RelationKind::NonRedundancy);
    }

    #[test]
    fn parent_path_declares_hierarchy() {
        let a = cat("a", "class", &["food", "fuel"], 0.0, 0.0);
        let mut b = cat("b", "goods", &["rice", "corn"], 0.0, 0.0);
        b.parent_path = Some(ParentPath { view: "a".into(), key: "food".into() });
        assert_eq!(
            infer_relation(&a, &b, None).unwrap(),
            RelationKind::Hierarchy { parent: "a".into(), child: "b".into(), key: "food".into() }
        );
    }

    #[test]
    fn single_view_graph() {
        let g = build_graph(&spec(vec![cat("only", "f", &["a", "b"], 0.0, 0.0)])).unwrap();
        assert_eq!(g.groups.len(), 1);
        assert!(g.data_edges.is_empty());
        assert!(g.adjacency_edges.is_empty());
        assert_eq!(g.hop_distance(0, 0), Some(0));
    }

    #[test]
    fn row_of_three_hops() {
        // reach is 2 * 1% of the diagonal (~2.83): gaps of 2 connect neighbors only
        let views = vec![
            cat("a", "f", &["1"], 0.0, 0.0),
            cat("b", "g", &["2"], 12.0, 0.0),
            cat("c", "h", &["3"], 24.0, 0.0),
        ];
        let s = spec(views);
        let g = build_graph_with(&s, &GraphOptions { adjacency_margin: 0.01 }).unwrap();
        assert_eq!(g.adjacency_edges, vec![(0, 1), (1, 2)]);
        assert_eq!(g.hop_distance(0, 2), Some(2));
        assert_eq!(g.spatial_proximity(0, 1).omega, 1.0);
        assert_eq!(g.spatial_proximity(0, 2).omega, 0.5);
    }

    #[test]
    fn disconnected_views_fall_back() {
        let views = vec![cat("a", "f", &["1"], 0.0, 0.0), cat("b", "g", &["2"], 80.0, 80.0)];
        let g = build_graph(&spec(views)).unwrap();
        let p = g.spatial_proximity(0, 1);
        assert!(p.disconnected);
        assert_eq!(p.omega, 1.0);
    }

    #[test]
    fn cycles_are_rejected() {
        let mut a = cat("a", "f", &["x", "y"], 0.0, 0.0);
        let mut b = cat("b", "x", &["p", "q"], 0.0, 0.0);
        a.parent_path = Some(ParentPath { view: "b".into(), key: "p".into() });
        b.parent_path = Some(ParentPath { view: "a".into(), key: "x".into() });
        let s = spec(vec![a, b]);
        assert!(build_graph(&s).is_err());

        let links = vec![
            HierarchyLink { parent_group: 0, parent_key: "k".into(), child_group: 1 },
            HierarchyLink { parent_group: 1, parent_key: "k".into(), child_group: 0 },
        ];
        assert!(matches!(coloring_order(2, &links), Err(GraphError::CyclicHierarchy(_))));
    }

    #[test]
    fn coloring_order_cases() {
        assert_eq!(coloring_order(3, &[]).unwrap(), vec![0, 1, 2]);
        let link = |p, c| HierarchyLink { parent_group: p, parent_key: "k".into(), child_group: c };
        assert_eq!(coloring_order(3, &[link(0, 1), link(0, 2)]).unwrap(), vec![0, 1, 2]);
        assert_eq!(coloring_order(3, &[link(2, 0), link(0, 1)]).unwrap(), vec![2, 0, 1]);
    }
}
