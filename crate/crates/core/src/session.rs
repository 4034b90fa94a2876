//! An authoring session: a fixed Pareto front, a selected member and the
//! edited working copy with consistency-preserving edit propagation.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::color::Color;
use crate::document::{Assignment, CostSummary, FrontEntry, GenomeDoc, ResultDoc, RunEcho};
use crate::error::EditError;
use crate::evaluator::{report, EvalReport};
use crate::graph::{GroupKind, MvGraph};
use crate::metrics::{aggregate, raw_metrics, Colormap, CostVector, Weights};
use crate::optimizer::{quantize_views, violates_floor, Decoded, Evaluated, GaConfig, OptimizeResult, Solution};
use crate::params::CaseExtrema;

/// Number of previous working copies kept for undo.
pub const UNDO_DEPTH: usize = 32;

/// The selected solution as currently edited.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkingCopy {
    pub solution: Solution,
    pub decoded: Decoded,
    pub views: Vec<Colormap>,
    pub cost: CostVector,
    pub eval: EvalReport,
}

/// What an edit changed, for the caller to display.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EditOutcome {
    /// Views whose colors changed.
    pub updated_views: Vec<String>,
    /// Some derived color had to be pulled into the sRGB gamut.
    pub gamut_warning: bool,
    /// Some categorical view now holds two colors closer than the hard floor.
    pub floor_violation: bool,
}

#[derive(Debug)]
pub struct Session {
    pub graph: Arc<MvGraph>,
    pub case_id: String,
    pub weights: Weights,
    pub config: GaConfig,
    pub palettes: usize,
    front: Vec<Evaluated>,
    extrema: CaseExtrema,
    selected: Option<usize>,
    working: Option<WorkingCopy>,
    undo: VecDeque<WorkingCopy>,
}

impl Session {
    pub fn new(graph: Arc<MvGraph>, case_id: impl Into<String>, weights: Weights, config: GaConfig, palettes: usize) -> Session {
        Session {
            graph,
            case_id: case_id.into(),
            weights,
            config,
            palettes,
            front: Vec::new(),
            extrema: CaseExtrema::default(),
            selected: None,
            working: None,
            undo: VecDeque::new(),
        }
    }

    /// Replaces the front with a fresh optimization result and selects its
    /// first member.
    pub fn set_result(&mut self, result: OptimizeResult) {
        self.front = result.front.members;
        self.extrema = result.extrema;
        self.undo.clear();
        self.working = None;
        self.selected = None;
        if !self.front.is_empty() {
            let _ = self.select(0);
        }
    }

    pub fn front(&self) -> &[Evaluated] {
        &self.front
    }

    pub fn selected(&self) -> Option<usize> {
        self.selected
    }

    pub fn working(&self) -> Option<&WorkingCopy> {
        self.working.as_ref()
    }

    /// Starts editing a copy of front member `index`. Returns false when the
    /// index is out of range.
    pub fn select(&mut self, index: usize) -> bool {
        let Some(member) = self.front.get(index) else {
            return false;
        };
        let Some(decoded) = member.decoded.clone() else {
            return false;
        };
        let eval = report(&member.views, &self.graph);
        self.working = Some(WorkingCopy { solution: member.solution.clone(), decoded, views: member.views.clone(), cost: member.cost.clone(), eval });
        self.selected = Some(index);
        self.undo.clear();
        true
    }

    /// Sets the color of `key` in `view_id` and re-derives exactly the
    /// affected colors: every view sharing the entity, plus the hierarchy
    /// subtree below the edited group. The genetic search is not involved.
    pub fn propagate_edit(&mut self, view_id: &str, key: &str, color: Color) -> Result<EditOutcome, EditError> {
        let g = Arc::clone(&self.graph);
        let view = g.view_index(view_id).ok_or_else(|| EditError::UnknownView(view_id.to_string()))?;
        let group = g.view_group[view];
        let spec = g.view(view);
        let unknown = || EditError::UnknownEntity { view: view_id.to_string(), key: key.to_string() };
        let slot = match &g.groups[group].kind {
            GroupKind::Categorical { keys } => {
                if !spec.keys().is_some_and(|k| k.iter().any(|k| k == key)) {
                    return Err(unknown());
                }
                keys.iter().position(|k| k == key).ok_or_else(unknown)?
            }
            GroupKind::Sequential { .. } => {
                let in_range = key.parse::<usize>().is_ok_and(|i| i < self.config.samples);
                if !in_range {
                    return Err(unknown());
                }
                0
            }
        };
        if g.is_derived(group) {
            return Err(EditError::DerivedEntity { view: view_id.to_string(), key: key.to_string() });
        }
        let current = self.working.as_ref().ok_or(EditError::NoSelection)?;

        let mut solution = current.solution.clone();
        let colors = solution.roots.get_mut(&group).ok_or(crate::error::DecodeError::MissingRoot(group))?;
        colors[slot] = color;
        let mut decoded = current.decoded.clone();
        decoded.gamut_mapped = false;
        solution.redecode_subtree(&g, group, self.config.samples, &mut decoded)?;

        let mut affected = vec![group];
        affected.extend(g.descendants(group));
        let mut views = current.views.clone();
        let mut updated_views = Vec::new();
        for v in 0..g.view_count() {
            if affected.contains(&g.view_group[v]) {
                let fresh = quantize_views(std::slice::from_ref(&decoded.views[v])).remove(0);
                if fresh != views[v] {
                    views[v] = fresh;
                    updated_views.push(g.view(v).id.clone());
                }
            }
        }
        let cost = aggregate(&raw_metrics(&views, &g), &g, &self.extrema, &self.weights);
        let eval = report(&views, &g);
        let outcome = EditOutcome { updated_views, gamut_warning: decoded.gamut_mapped, floor_violation: violates_floor(&views, self.config.hard_floor_delta_e) };

        let previous = self.working.replace(WorkingCopy { solution, decoded, views, cost, eval }).expect("checked above");
        self.undo.push_back(previous);
        if self.undo.len() > UNDO_DEPTH {
            self.undo.pop_front();
        }
        Ok(outcome)
    }

    /// Restores the working copy from before the last edit.
    pub fn undo(&mut self) -> bool {
        match self.undo.pop_back() {
            Some(prev) => {
                self.working = Some(prev);
                true
            }
            None => false,
        }
    }

    fn entry(&self, solution: &Solution, views: &[Colormap], cost: &CostVector, eval: EvalReport) -> FrontEntry {
        FrontEntry {
            assignment: Assignment::from_views(&self.graph, views),
            genome: GenomeDoc::from_solution(&self.graph, solution),
            cost: CostSummary::from(cost),
            eval,
        }
    }

    /// Result document of the front, with the working copy (if edited)
    /// in place of the selected member.
    pub fn export(&self) -> ResultDoc {
        let front = self
            .front
            .iter()
            .enumerate()
            .map(|(i, m)| match (&self.working, self.selected) {
                (Some(w), Some(sel)) if sel == i => self.entry(&w.solution, &w.views, &w.cost, w.eval.clone()),
                _ => self.entry(&m.solution, &m.views, &m.cost, report(&m.views, &self.graph)),
            })
            .collect();
        ResultDoc {
            seed: self.config.rng_seed,
            config: RunEcho { case_id: self.case_id.clone(), ga: self.config.clone(), weights: self.weights, palettes: self.palettes },
            front,
        }
    }
}
