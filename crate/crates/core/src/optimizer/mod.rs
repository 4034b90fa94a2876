//! Pareto-based genetic search over root colormaps and child derivation
//! parameters.

pub mod genome;
pub mod inherit;
pub mod operators;
pub mod pareto;

use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::ciede2000;
use crate::error::OptimizeError;
use crate::graph::MvGraph;
use crate::metrics::{aggregate, raw_metrics, Colormap, CostVector, RawMetrics, Weights, DEFAULT_SAMPLES};
use crate::palette::PaletteLibrary;
use crate::params::CaseExtrema;
use crate::spec::GaOverrides;

pub use genome::{ChildParams, Decoded, GroupColors, Solution};

pub const DEFAULT_SEED: u64 = 0x6d76_636f_6c6f_72;
/// Front members closer than this everywhere are considered duplicates.
pub const DEDUP_DELTA_E: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub n_best: usize,
    pub crossover_rate: f64,
    pub step: f64,
    pub rng_seed: u64,
    pub hard_floor_delta_e: f64,
    pub samples: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 50,
            generations: 100,
            n_best: 10,
            crossover_rate: 0.5,
            step: 0.05,
            rng_seed: DEFAULT_SEED,
            hard_floor_delta_e: 10.0,
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let fail = |m: &str| Err(OptimizeError::InvalidConfig(m.to_string()));
        if self.pop_size < 2 {
            return fail("pop_size must be at least 2");
        }
        if self.n_best == 0 || self.n_best > self.pop_size {
            return fail("n_best must be in 1..=pop_size");
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return fail("step must be in (0, 1]");
        }
        if self.generations == 0 {
            return fail("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail("crossover_rate must be in [0, 1]");
        }
        if !(self.hard_floor_delta_e >= 0.0) {
            return fail("hard_floor_delta_e must be non-negative");
        }
        if self.samples < 2 {
            return fail("samples must be at least 2");
        }
        Ok(())
    }

    pub fn with_overrides(mut self, o: &GaOverrides) -> GaConfig {
        if let Some(v) = o.pop_size {
            self.pop_size = v;
        }
        if let Some(v) = o.generations {
            self.generations = v;
        }
        if let Some(v) = o.n_best {
            self.n_best = v;
        }
        if let Some(v) = o.step {
            self.step = v;
        }
        if let Some(v) = o.seed {
            self.rng_seed = v;
        }
        self
    }
}

/// A solution with its decoded colormaps and costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    pub solution: Solution,
    pub decoded: Option<Decoded>,
    /// Decoded view colormaps rounded to 8-bit sRGB, as written to documents.
    pub views: Vec<Colormap>,
    pub raw: RawMetrics,
    pub cost: CostVector,
}

impl Evaluated {
    pub fn is_rejected(&self) -> bool {
        self.cost.is_rejected()
    }
}

/// Views rounded to the 8-bit colors they serialize as.
pub fn quantize_views(views: &[Colormap]) -> Vec<Colormap> {
    views
        .iter()
        .map(|cm| Colormap { kind: cm.kind, keyed: cm.keyed, entries: cm.entries.iter().map(|(k, c)| (k.clone(), c.quantized())).collect() })
        .collect()
}

/// True when some keyed view holds two colors closer than `floor`.
pub fn violates_floor(views: &[Colormap], floor: f64) -> bool {
    views.iter().filter(|cm| cm.keyed).any(|cm| {
        let colors: Vec<_> = cm.colors().collect();
        (0..colors.len()).any(|i| (i + 1..colors.len()).any(|j| ciede2000(colors[i], colors[j]) < floor))
    })
}

/// Decodes and measures a solution; rejected solutions carry infinite costs
/// and no raw metrics.
pub fn measure(solution: Solution, g: &MvGraph, cfg: &GaConfig) -> (Solution, Option<Decoded>, Vec<Colormap>, Option<RawMetrics>) {
    let decoded = match solution.decode(g, cfg.samples) {
        Ok(d) => d,
        Err(e) => {
            log::debug!("rejecting undecodable solution: {e}");
            return (solution, None, Vec::new(), None);
        }
    };
    let views = quantize_views(&decoded.views);
    if violates_floor(&views, cfg.hard_floor_delta_e) {
        return (solution, Some(decoded), views, None);
    }
    let raw = raw_metrics(&views, g);
    (solution, Some(decoded), views, Some(raw))
}

pub fn evaluate(solution: Solution, g: &MvGraph, extrema: &CaseExtrema, weights: &Weights, cfg: &GaConfig) -> Evaluated {
    let (solution, decoded, views, raw) = measure(solution, g, cfg);
    finish(solution, decoded, views, raw, g, extrema, weights)
}

fn finish(
    solution: Solution,
    decoded: Option<Decoded>,
    views: Vec<Colormap>,
    raw: Option<RawMetrics>,
    g: &MvGraph,
    extrema: &CaseExtrema,
    weights: &Weights,
) -> Evaluated {
    match raw {
        Some(raw) => {
            let cost = aggregate(&raw, g, extrema, weights);
            Evaluated { solution, decoded, views, raw, cost }
        }
        None => Evaluated { solution, decoded, views, raw: RawMetrics::default(), cost: CostVector::rejected() },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoFront {
    pub members: Vec<Evaluated>,
}

/// Non-dominated, feasible members of a costed population, in input order.
pub fn pareto_front(pop: &[Evaluated]) -> Result<ParetoFront, OptimizeError> {
    let points: Vec<(f64, f64)> = pop.iter().map(|e| (e.cost.c_sv, e.cost.c_mv)).collect();
    let idx = pareto::front_indices(&points);
    if idx.is_empty() {
        return Err(OptimizeError::AllRejected);
    }
    Ok(ParetoFront { members: idx.into_iter().map(|i| pop[i].clone()).collect() })
}

/// Up to `n_best` front positions, ordered by `C_SV + C_MV` then position.
pub fn elite_pool(front: &[Evaluated], n_best: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..front.len()).collect();
    idx.sort_by(|&a, &b| front[a].cost.sum().total_cmp(&front[b].cost.sum()).then(a.cmp(&b)));
    idx.truncate(n_best);
    idx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_sum: f64,
    pub front_size: usize,
    pub rejected: usize,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    /// Deduplicated front of the final generation, sorted by `C_MV`.
    pub front: ParetoFront,
    pub history: Vec<GenerationStats>,
    /// Extrema used for normalization throughout the run.
    pub extrema: CaseExtrema,
    /// Every raw value observed during the run, for persisting.
    pub observed: CaseExtrema,
}

thread_local! {
    static INVOCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of `optimize` calls made on the current thread.
pub fn invocation_count() -> u64 {
    INVOCATIONS.with(Cell::get)
}

const INIT_STREAM: u64 = 1 << 63;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn init_population(g: &MvGraph, lib: &PaletteLibrary, cfg: &GaConfig, round: u64) -> Vec<Solution> {
    (0..cfg.pop_size)
        .map(|i| {
            let mut rng = rng_for(cfg.rng_seed, INIT_STREAM | (round << 32) | i as u64);
            operators::random_solution(g, lib, cfg.hard_floor_delta_e, &mut rng)
        })
        .collect()
}

/// Runs the genetic search. Normalization uses `prior` widened by the
/// initial population and is then frozen, so costs of carried-over elites
/// never change between generations.
pub fn optimize(g: &MvGraph, lib: &PaletteLibrary, prior: &CaseExtrema, weights: &Weights, cfg: &GaConfig) -> Result<OptimizeResult, OptimizeError> {
    INVOCATIONS.with(|c| c.set(c.get() + 1));
    cfg.validate()?;
    if lib.is_empty() {
        return Err(OptimizeError::NoPalettes);
    }

    let mut observed = CaseExtrema::default();
    let mut round = 0;
    let mut measured = measure_all(init_population(g, lib, cfg, round), g, cfg);
    while measured.iter().all(|m| m.3.is_none()) && round < 10 {
        round += 1;
        measured = measure_all(init_population(g, lib, cfg, round), g, cfg);
    }
    record(&mut observed, &measured);
    let mut extrema = prior.clone();
    extrema.merge(&observed);

    let mut pop: Vec<Evaluated> = measured.into_iter().map(|(s, d, v, r)| finish(s, d, v, r, g, &extrema, weights)).collect();
    let mut history = Vec::with_capacity(cfg.generations);
    let mut front = Vec::new();

    for gen in 0..cfg.generations {
        let idx = pareto::front_indices(&pop.iter().map(|e| (e.cost.c_sv, e.cost.c_mv)).collect::<Vec<_>>());
        let rejected = pop.iter().filter(|e| e.is_rejected()).count();
        let best_sum = pop.iter().map(|e| e.cost.sum()).fold(f64::INFINITY, f64::min);
        history.push(GenerationStats { generation: gen, best_sum, front_size: idx.len(), rejected });
        front = idx.iter().map(|&i| pop[i].clone()).collect::<Vec<_>>();
        if gen + 1 == cfg.generations {
            break;
        }

        let elites: Vec<Evaluated> = elite_pool(&front, cfg.n_best).into_iter().map(|i| front[i].clone()).collect();
        let offspring = if elites.is_empty() {
            round += 1;
            init_population(g, lib, cfg, round)
        } else {
            breed(&elites, g, cfg, gen as u64)
        };
        let measured = measure_all(offspring, g, cfg);
        record(&mut observed, &measured);
        let mut new_pop = elites;
        new_pop.extend(measured.into_iter().map(|(s, d, v, r)| finish(s, d, v, r, g, &extrema, weights)));
        pop = new_pop;
    }

    if front.is_empty() {
        return Err(OptimizeError::AllRejected);
    }
    let mut members = dedup(front);
    members.sort_by(|a, b| a.cost.c_mv.total_cmp(&b.cost.c_mv).then(a.cost.c_sv.total_cmp(&b.cost.c_sv)));
    Ok(OptimizeResult { front: ParetoFront { members }, history, extrema, observed })
}

/// Mutated crossover offspring of the elites, filling the population up to `pop_size`.
fn breed(elites: &[Evaluated], g: &MvGraph, cfg: &GaConfig, gen: u64) -> Vec<Solution> {
    let wanted = cfg.pop_size.saturating_sub(elites.len());
    let mut next = Vec::with_capacity(wanted);
    let mut slot = 0u64;
    while next.len() < wanted {
        let mut rng = rng_for(cfg.rng_seed, ((gen + 1) << 32) | slot);
        slot += 1;
        let (a, b) = operators::select_parents(elites.len(), &mut rng);
        let (o1, o2) = operators::crossover(&elites[a].solution, &elites[b].solution, g, cfg.crossover_rate, &mut rng);
        next.push(operators::perturb(&o1, cfg.step, &mut rng));
        if next.len() < wanted {
            next.push(operators::perturb(&o2, cfg.step, &mut rng));
        }
    }
    next
}

type Measured = (Solution, Option<Decoded>, Vec<Colormap>, Option<RawMetrics>);

fn measure_all(pop: Vec<Solution>, g: &MvGraph, cfg: &GaConfig) -> Vec<Measured> {
    pop.into_par_iter().map(|s| measure(s, g, cfg)).collect()
}

fn record(observed: &mut CaseExtrema, measured: &[Measured]) {
    for raw in measured.iter().filter_map(|m| m.3.as_ref()) {
        for (key, value) in raw.observed() {
            observed.observe(key, value);
        }
    }
}

fn same_colors(a: &[Colormap], b: &[Colormap]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| x.len() == y.len() && x.colors().zip(y.colors()).all(|(p, q)| ciede2000(p, q) < DEDUP_DELTA_E))
}

fn dedup(front: Vec<Evaluated>) -> Vec<Evaluated> {
    let mut out: Vec<Evaluated> = Vec::with_capacity(front.len());
    for e in front {
        if !out.iter().any(|o| same_colors(&o.views, &e.views)) {
            out.push(e);
        }
    }
    out
}
