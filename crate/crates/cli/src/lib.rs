//! The `mvcolor` command line: generate, evaluate, compare, serve.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use mvcolor_core::document::{patch_chart, Assignment, DEFAULT_SCALE_PATH};
use mvcolor_core::evaluator::{baseline_views, compare, evaluate_assignment, format_comparison, format_report, report};
use mvcolor_core::spec::GaOverrides;
use mvcolor_core::{
    build_graph, optimize, EvalError, GaConfig, GraphError, MvGraph, MvSpec, OptimizeError, PaletteError, PaletteLibrary, ParamsError,
    ParamsStore, ResultDoc, Session, SpecError, Weights,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Schema(#[from] EvalError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    /// 2 usage or parse error, 3 graph error, 4 infeasible, 5 schema
    /// mismatch, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Graph(_) => 3,
            CliError::Optimize(OptimizeError::AllRejected) => 4,
            CliError::Optimize(OptimizeError::InvalidConfig(_)) => 2,
            CliError::Optimize(OptimizeError::NoPalettes) => 2,
            CliError::Schema(_) => 5,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<PaletteError> for CliError {
    fn from(e: PaletteError) -> Self {
        match e {
            PaletteError::Io(source) => CliError::Io { context: "reading palettes".into(), source },
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        match e {
            ParamsError::Io(source) => CliError::Io { context: "params file".into(), source },
            ParamsError::Json(e) => CliError::Parse(format!("malformed params file: {e}")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mvcolor", version, about = "Colormaps for multiple-view visualizations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize colormaps for a specification and write the Pareto front.
    Generate(GenerateArgs),
    /// Score an assignment (or the first member of a result document).
    Evaluate(EvaluateArgs),
    /// Score two assignments side by side.
    Compare(CompareArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Palette library JSON; the bundled library when omitted.
    #[arg(long)]
    pub palettes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub input: SpecArgs,
    #[arg(long, default_value = "params.json")]
    pub params: PathBuf,
    /// Result document path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, conflicts_with = "random_seed")]
    pub seed: Option<u64>,
    /// Seed the search from system entropy instead of the fixed default.
    #[arg(long)]
    pub random_seed: bool,
    #[arg(long)]
    pub pop_size: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub n_best: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    /// `w_d,w_gdis,w_hu,w_con`
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<Weights>,
    /// Keep only the first N front members in the result document.
    #[arg(long)]
    pub gallery_size: Option<usize>,
    /// Front member injected into embedded chart documents.
    #[arg(long, default_value_t = 0)]
    pub pick: usize,
    #[arg(long, default_value = DEFAULT_SCALE_PATH)]
    pub scale_path: String,
    /// Where patched chart documents go; next to `--out` when omitted.
    #[arg(long)]
    pub charts_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: SpecArgs,
    pub assignment: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a table instead of JSON.
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: SpecArgs,
    /// Baseline then candidate; only the candidate with `--naive`.
    #[arg(required = true, num_args = 1..=2)]
    pub assignments: Vec<PathBuf>,
    /// Use the shared-palette baseline (first palette everywhere, children
    /// repeating their parent's color).
    #[arg(long)]
    pub naive: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long)]
    pub palettes: Option<PathBuf>,
    #[arg(long, default_value = "params.json")]
    pub params: PathBuf,
    /// Directory holding the UI bundle.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = mvcolor_service::DEFAULT_CAPACITY)]
    pub capacity: usize,
}

fn parse_weights(s: &str) -> Result<Weights, String> {
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    let [w_d, w_gdis, w_hu, w_con] = parts[..] else {
        return Err(format!("expected four comma-separated weights, got {}", parts.len()));
    };
    let w = Weights { w_d, w_gdis, w_hu, w_con };
    w.validate()?;
    Ok(w)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => generate(&args).map(|_| ()),
        Command::Evaluate(args) => evaluate(&args),
        Command::Compare(args) => compare_cmd(&args),
        Command::Serve(args) => serve(&args),
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn require_parent(path: &Path, what: &str) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(CliError::Usage(format!("directory for {what} {} does not exist", path.display())))
        }
        _ => Ok(()),
    }
}

impl SpecArgs {
    fn validate(&self) -> Result<(), CliError> {
        require_file(&self.spec, "spec")?;
        if let Some(p) = &self.palettes {
            require_file(p, "palette file")?;
        }
        Ok(())
    }

    fn load(&self) -> Result<(MvSpec, MvGraph, PaletteLibrary), CliError> {
        let text = fs::read_to_string(&self.spec).map_err(io(format!("reading {}", self.spec.display())))?;
        let spec = MvSpec::from_json(&text)?;
        let lib = match &self.palettes {
            Some(p) => PaletteLibrary::load(p)?,
            None => PaletteLibrary::bundled(),
        };
        let graph = build_graph(&spec)?;
        Ok((spec, graph, lib))
    }

    /// Parameters are stored per case; the case is named after the spec file.
    fn case_id(&self) -> String {
        self.spec.file_stem().map_or_else(|| "case".to_string(), |s| s.to_string_lossy().into_owned())
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(io(format!("writing {}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io("writing to stdout")),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs the search, updates the params file and writes the result document
/// plus any patched chart documents.
pub fn generate(args: &GenerateArgs) -> Result<ResultDoc, CliError> {
    args.input.validate()?;
    require_parent(&args.params, "params file")?;
    if let Some(out) = &args.out {
        require_parent(out, "output")?;
    }
    if let Some(dir) = &args.charts_dir {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("charts directory {} does not exist", dir.display())));
        }
    }

    let (spec, graph, lib) = args.input.load()?;
    let mut store = ParamsStore::load(&args.params)?;
    let mut config = GaConfig::default();
    if let Some(o) = &spec.ga {
        config = config.with_overrides(o);
    }
    let seed = if args.random_seed { Some(rand::random()) } else { args.seed };
    config = config.with_overrides(&GaOverrides { pop_size: args.pop_size, generations: args.generations, n_best: args.n_best, step: args.step, seed });
    config.validate()?;
    let weights = args.weights.unwrap_or_else(|| spec.weights());
    weights.validate().map_err(CliError::Usage)?;
    let case_id = args.input.case_id();

    let graph = Arc::new(graph);
    let result = optimize(&graph, &lib, &store.case(&case_id), &weights, &config)?;
    store.merge(&case_id, &result.observed);
    store.save(&args.params)?;
    log::info!("case {case_id}: {} front members after {} generations", result.front.members.len(), config.generations);

    let mut session = Session::new(Arc::clone(&graph), case_id, weights, config, lib.len());
    session.set_result(result);
    let mut doc = session.export();
    if let Some(n) = args.gallery_size {
        doc.front.truncate(n.max(1));
    }
    if args.pick >= doc.front.len() {
        return Err(CliError::Usage(format!("--pick {} is out of range; the front has {} members", args.pick, doc.front.len())));
    }
    write_output(args.out.as_deref(), &doc.to_json())?;

    let charts_dir = args.charts_dir.clone().or_else(|| args.out.as_ref().map(|o| o.parent().map(Path::to_path_buf).unwrap_or_default()));
    let chosen = &doc.front[args.pick].assignment;
    for view in &spec.views {
        let Some(chart) = &view.embedded_chart_doc else { continue };
        let Some(dir) = &charts_dir else {
            log::info!("view {:?} carries a chart document; pass --out or --charts-dir to write it", view.id);
            continue;
        };
        let colors = &chosen.views[&view.id];
        let patched = patch_chart(chart, &args.scale_path, colors).map_err(|e| CliError::Usage(format!("view {:?}: {e}", view.id)))?;
        let path = dir.join(format!("{}.chart.json", view.id));
        fs::write(&path, to_json(&patched)).map_err(io(format!("writing {}", path.display())))?;
    }
    Ok(doc)
}

fn read_assignment(path: &Path) -> Result<Assignment, CliError> {
    let text = fs::read_to_string(path).map_err(io(format!("reading {}", path.display())))?;
    Ok(Assignment::from_json(&text)?)
}

fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    args.input.validate()?;
    require_file(&args.assignment, "assignment")?;
    let (_, graph, _) = args.input.load()?;
    let r = evaluate_assignment(&read_assignment(&args.assignment)?, &graph)?;
    let text = if args.text { format_report(&r) } else { to_json(&r) };
    write_output(args.out.as_deref(), &text)
}

fn compare_cmd(args: &CompareArgs) -> Result<(), CliError> {
    args.input.validate()?;
    let expected = if args.naive { 1 } else { 2 };
    if args.assignments.len() != expected {
        let msg = if args.naive { "with --naive give only the candidate assignment" } else { "give a baseline and a candidate assignment" };
        return Err(CliError::Usage(msg.into()));
    }
    for a in &args.assignments {
        require_file(a, "assignment")?;
    }
    let (_, graph, lib) = args.input.load()?;
    let baseline = if args.naive {
        let config = GaConfig::default();
        report(&baseline_views(&graph, &lib, config.samples, config.hard_floor_delta_e), &graph)
    } else {
        evaluate_assignment(&read_assignment(&args.assignments[0])?, &graph)?
    };
    let candidate = evaluate_assignment(&read_assignment(args.assignments.last().expect("checked above"))?, &graph)?;
    let c = compare(baseline, candidate);
    let text = if args.text { format_comparison(&c) } else { to_json(&c) };
    write_output(args.out.as_deref(), &text)
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    if let Some(p) = &args.palettes {
        require_file(p, "palette file")?;
    }
    if let Some(d) = &args.static_dir {
        if !d.is_dir() {
            return Err(CliError::Usage(format!("static directory {} does not exist", d.display())));
        }
    }
    require_parent(&args.params, "params file")?;
    let palettes = match &args.palettes {
        Some(p) => PaletteLibrary::load(p)?,
        None => PaletteLibrary::bundled(),
    };
    let config = mvcolor_service::ServiceConfig {
        capacity: args.capacity,
        palettes,
        params_path: Some(args.params.clone()),
        static_dir: args.static_dir.clone(),
        ..Default::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io("starting runtime"))?;
    runtime.block_on(mvcolor_service::serve(config, SocketAddr::new(args.host, args.port))).map_err(io("serving"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_flag() {
        let w = parse_weights("1, 0.5,2,0").unwrap();
        assert_eq!(w, Weights { w_d: 1.0, w_gdis: 0.5, w_hu: 2.0, w_con: 0.0 });
        assert!(parse_weights("1,2,3").is_err());
        assert!(parse_weights("1,2,3,-1").is_err());
        assert!(parse_weights("a,2,3,4").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 2);
        assert_eq!(CliError::Graph(GraphError::CyclicHierarchy(0)).exit_code(), 3);
        assert_eq!(CliError::Optimize(OptimizeError::AllRejected).exit_code(), 4);
        assert_eq!(CliError::Schema(EvalError::SchemaMismatch("x".into())).exit_code(), 5);
    }

    #[test]
    fn seed_flags_conflict() {
        let r = Cli::try_parse_from(["mvcolor", "generate", "--spec", "s.json", "--seed", "3", "--random-seed"]);
        assert!(r.is_err());
    }
}
