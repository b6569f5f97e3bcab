//! Command-line frontend for the consensus-selection pipeline.
//!
//! Four subcommands cover the stages: `ensemble` clusters a graph
//! repeatedly, `select` groups the runs by similarity and picks the
//! consensus run, `phased` simulates gradual data arrival, and `validate`
//! scores a single clustering. Every run also writes a `manifest.txt` of
//! sorted `key=value` lines that fully determines the outputs, and reruns
//! with identical flags produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use clusterval::align::{align_labels, error_rate};
use clusterval::clusterer::{run_ensemble_parallel, Algorithm, ClustererConfig};
use clusterval::graph::{Clustering, Graph};
use clusterval::incremental::{run_phased, AttachmentPolicy};
use clusterval::io::{parse_clustering, parse_edge_list, serialize_clustering};
use clusterval::metasim::SimilarityMatrix;
use clusterval::synth::generate_phased_dataset;
use clusterval::validity::{
    dunn_index, measures_to_csv, modularity, report_to_text, select_most_similar, validity_report,
};
use clusterval::wgc::{wgc_cluster, StopRule};
use clusterval::Error;

#[derive(Parser)]
#[command(
    name = "clusterval",
    version,
    about = "Ensemble graph clustering with similarity-based consensus selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a graph several times under derived seeds and save each run
    Ensemble(EnsembleArgs),
    /// Group an ensemble by pairwise similarity and pick the consensus run
    Select(SelectArgs),
    /// Reveal a graph in phases: cluster the first, attach later arrivals
    Phased(PhasedArgs),
    /// Score one clustering of a graph
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    /// Hard EM on a two-probability block model
    Em,
    /// Weighted-majority label propagation
    Lp,
}

impl Algo {
    fn algorithm(self) -> Algorithm {
        match self {
            Algo::Em => Algorithm::EmMixture,
            Algo::Lp => Algorithm::LabelPropagation,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Algo::Em => "em",
            Algo::Lp => "lp",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    /// Attach to the label with the most incident edge weight
    Majority,
    /// Attach to the label that maximizes modularity of the labeled part
    Modgain,
}

impl Policy {
    fn policy(self) -> AttachmentPolicy {
        match self {
            Policy::Majority => AttachmentPolicy::WeightedMajority,
            Policy::Modgain => AttachmentPolicy::BestModularityGain,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Policy::Majority => "majority",
            Policy::Modgain => "modgain",
        }
    }
}

#[derive(Args)]
struct EnsembleArgs {
    /// Edge-list file of the graph to cluster
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Em)]
    algo: Algo,
    /// Class count for the em engine
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Number of runs to produce
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Base seed; run i derives its own seed from (seed, i)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Ensemble directory (run_*.csv + manifest.txt) or a similarity
    /// matrix CSV file
    input: PathBuf,
    /// Graph file; overrides the path recorded in the ensemble manifest
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Reference clustering for error rates
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Split the ensemble into exactly this many groups (default 2)
    #[arg(long, conflicts_with = "threshold")]
    target_groups: Option<usize>,
    /// Split while any group's cut-to-internal weight ratio is at or
    /// below this value
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PhasedArgs {
    /// Edge-list file of the full graph
    #[arg(long)]
    graph: PathBuf,
    /// Reference clustering for per-phase error rates
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Comma-separated cumulative arrival fractions ending at 1.0,
    /// for example 0.4,0.7,1.0
    #[arg(long)]
    fractions: String,
    #[arg(long, value_enum, default_value_t = Policy::Majority)]
    policy: Policy,
    #[arg(long, value_enum, default_value_t = Algo::Em)]
    algo: Algo,
    /// Class count for the em engine
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Seed for both the arrival order and the first-phase clusterer
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Edge-list file of the graph
    #[arg(long)]
    graph: PathBuf,
    /// Clustering CSV to score
    clustering: PathBuf,
    /// Reference clustering for error rates
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Emit measure,value CSV instead of key=value lines
    #[arg(long)]
    csv: bool,
    /// Fail when a measure is undefined for this input
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ensemble(args) => cmd_ensemble(&args),
        Command::Select(args) => cmd_select(&args),
        Command::Phased(args) => cmd_phased(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

/// Staged output writing. Nothing the command wrote survives a failure:
/// written files are deleted and a directory created by this run is
/// removed again, so an output directory either holds a complete result
/// set or was never touched.
struct OutputDir {
    path: PathBuf,
    created: bool,
    written: Vec<PathBuf>,
}

impl OutputDir {
    fn prepare(path: &Path) -> Result<Self, String> {
        let created = !path.exists();
        if created {
            fs::create_dir_all(path)
                .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
        } else if !path.is_dir() {
            return Err(format!("{} exists and is not a directory", path.display()));
        }
        Ok(OutputDir { path: path.to_path_buf(), created, written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), String> {
        let target = self.path.join(name);
        fs::write(&target, contents)
            .map_err(|e| format!("cannot write {}: {e}", target.display()))?;
        self.written.push(target);
        Ok(())
    }

    fn discard(self) {
        for file in &self.written {
            let _ = fs::remove_file(file);
        }
        if self.created {
            let _ = fs::remove_dir_all(&self.path);
        }
    }
}

/// Runs `body` against a prepared output directory, undoing all writes if
/// it fails.
fn with_output_dir(
    path: &Path,
    body: impl FnOnce(&mut OutputDir) -> Result<(), String>,
) -> Result<(), String> {
    let mut dir = OutputDir::prepare(path)?;
    match body(&mut dir) {
        Ok(()) => Ok(()),
        Err(message) => {
            dir.discard();
            Err(message)
        }
    }
}

fn manifest_text(entries: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (key, value) in entries {
        out.push_str(&format!("{key}={value}\n"));
    }
    out
}

fn parse_manifest(input: &str) -> BTreeMap<String, String> {
    let mut entries = BTreeMap::new();
    for line in input.lines() {
        if let Some((key, value)) = line.split_once('=') {
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    entries
}

fn entry(key: &str, value: impl Display) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph, String> {
    parse_edge_list(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_clustering(path: &Path) -> Result<Clustering, String> {
    parse_clustering(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn clusterer_config(algo: Algo, k: usize, seed: u64) -> ClustererConfig {
    ClustererConfig { k, seed, ..ClustererConfig::new(algo.algorithm()) }
}

fn cmd_ensemble(args: &EnsembleArgs) -> Result<(), String> {
    let graph = load_graph(&args.graph)?;
    let base = clusterer_config(args.algo, args.k, args.seed);
    let ensemble =
        run_ensemble_parallel(&graph, &base, args.runs, args.seed).map_err(|e| e.to_string())?;

    with_output_dir(&args.out, |dir| {
        for (index, run) in ensemble.runs().iter().enumerate() {
            let name = format!("run_{index:03}.csv");
            dir.write(&name, &serialize_clustering(&run.clustering))?;
        }
        let manifest: BTreeMap<String, String> = [
            entry("command", "ensemble"),
            entry("graph", args.graph.display()),
            entry("algo", args.algo.name()),
            entry("k", args.k),
            entry("runs", args.runs),
            entry("seed", args.seed),
            entry("max_iterations", base.max_iterations),
            entry("tolerance", base.tolerance),
            entry("out", args.out.display()),
        ]
        .into();
        dir.write("manifest.txt", &manifest_text(&manifest))
    })
}

fn stop_rule(args: &SelectArgs) -> Result<StopRule, String> {
    match (args.target_groups, args.threshold) {
        (Some(t), None) => Ok(StopRule::TargetGroups(t)),
        (None, Some(t)) => Ok(StopRule::Threshold(t)),
        (None, None) => Ok(StopRule::TargetGroups(2)),
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting stop flags"),
    }
}

/// Numerically ordered `run_NNN.csv` paths inside an ensemble directory.
fn list_run_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
    for item in entries {
        let item = item.map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
        let name = item.file_name().to_string_lossy().into_owned();
        let index = name
            .strip_prefix("run_")
            .and_then(|rest| rest.strip_suffix(".csv"))
            .and_then(|digits| digits.parse::<usize>().ok());
        if let Some(index) = index {
            found.push((index, item.path()));
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, path)| path).collect())
}

fn cmd_select(args: &SelectArgs) -> Result<(), String> {
    if args.input.is_dir() {
        select_from_ensemble(args)
    } else {
        select_from_matrix(args)
    }
}

fn select_from_ensemble(args: &SelectArgs) -> Result<(), String> {
    let run_files = list_run_files(&args.input)?;
    if run_files.is_empty() {
        return Err(format!("no run_*.csv files in {}", args.input.display()));
    }
    let mut runs = Vec::with_capacity(run_files.len());
    for file in &run_files {
        runs.push(load_clustering(file)?);
    }

    // The manifest written by the ensemble command records where the graph
    // lives; an explicit --graph wins over it.
    let manifest_path = args.input.join("manifest.txt");
    let recorded_graph = if manifest_path.exists() {
        parse_manifest(&read_text(&manifest_path)?).remove("graph").map(PathBuf::from)
    } else {
        None
    };
    let graph_path =
        args.graph.clone().or(recorded_graph).ok_or_else(|| {
            "no graph recorded in the ensemble manifest; pass --graph".to_string()
        })?;
    let graph = load_graph(&graph_path)?;
    let truth = args.truth.as_ref().map(|p| load_clustering(p)).transpose()?;

    let stop = stop_rule(args)?;
    let cc = SimilarityMatrix::from_clusterings(&runs).map_err(|e| e.to_string())?;
    let mc = wgc_cluster(&cc.to_graph(), stop).map_err(|e| e.to_string())?;
    let report =
        validity_report(&graph, &runs, truth.as_ref(), &cc, &mc).map_err(|e| e.to_string())?;

    with_output_dir(&args.out, |dir| {
        dir.write("cc.csv", &cc.to_csv())?;
        dir.write("metaclusters.csv", &mc.to_csv())?;
        dir.write("report.txt", &report_to_text(&report))?;
        dir.write("measures.csv", &measures_to_csv(&report))?;
        let mut manifest: BTreeMap<String, String> = [
            entry("command", "select"),
            entry("input", args.input.display()),
            entry("mode", "ensemble"),
            entry("graph", graph_path.display()),
            entry("out", args.out.display()),
        ]
        .into();
        if let Some(truth_path) = &args.truth {
            manifest.insert("truth".into(), truth_path.display().to_string());
        }
        insert_stop(&mut manifest, stop);
        dir.write("manifest.txt", &manifest_text(&manifest))
    })
}

fn select_from_matrix(args: &SelectArgs) -> Result<(), String> {
    if args.graph.is_some() || args.truth.is_some() {
        return Err(
            "matrix input carries no clusterings, so --graph and --truth do not apply".into()
        );
    }
    let cc = SimilarityMatrix::from_csv(&read_text(&args.input)?)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let stop = stop_rule(args)?;
    let mc = wgc_cluster(&cc.to_graph(), stop).map_err(|e| e.to_string())?;
    let consensus = select_most_similar(&cc, &mc).map_err(|e| e.to_string())?;

    // Without the underlying clusterings there are no per-run measures;
    // the report carries the consensus section only.
    let mut report = format!("runs={}\n", cc.size());
    report.push_str("\n[consensus]\n");
    report.push_str(&format!("selected_run={consensus}\n"));
    report.push_str(&format!("group_count={}\n", mc.group_count()));
    let sizes: Vec<String> = mc.groups().iter().map(|g| g.len().to_string()).collect();
    report.push_str(&format!("group_sizes={}\n", sizes.join(",")));
    report.push_str(&format!("groups={}\n", mc.summary()));

    with_output_dir(&args.out, |dir| {
        dir.write("cc.csv", &cc.to_csv())?;
        dir.write("metaclusters.csv", &mc.to_csv())?;
        dir.write("report.txt", &report)?;
        let mut manifest: BTreeMap<String, String> = [
            entry("command", "select"),
            entry("input", args.input.display()),
            entry("mode", "matrix"),
            entry("out", args.out.display()),
        ]
        .into();
        insert_stop(&mut manifest, stop);
        dir.write("manifest.txt", &manifest_text(&manifest))
    })
}

fn insert_stop(manifest: &mut BTreeMap<String, String>, stop: StopRule) {
    match stop {
        StopRule::TargetGroups(t) => manifest.insert("target_groups".into(), t.to_string()),
        StopRule::Threshold(t) => manifest.insert("threshold".into(), t.to_string()),
    };
}

fn cmd_phased(args: &PhasedArgs) -> Result<(), String> {
    let graph = load_graph(&args.graph)?;
    let truth = args.truth.as_ref().map(|p| load_clustering(p)).transpose()?;
    let fractions = args
        .fractions
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad fraction `{}` in --fractions", part.trim()))
        })
        .collect::<Result<Vec<f64>, String>>()?;

    let dataset = generate_phased_dataset(&graph, truth.as_ref(), &fractions, args.seed)
        .map_err(|e| e.to_string())?;
    let base = clusterer_config(args.algo, args.k, args.seed);
    let trace = run_phased(&dataset, &base, args.policy.policy()).map_err(|e| e.to_string())?;

    with_output_dir(&args.out, |dir| {
        dir.write("trace.csv", &trace.to_csv())?;
        dir.write("phases.csv", &trace.summary_csv())?;
        let mut manifest: BTreeMap<String, String> = [
            entry("command", "phased"),
            entry("graph", args.graph.display()),
            entry("fractions", args.fractions.trim()),
            entry("policy", args.policy.name()),
            entry("algo", args.algo.name()),
            entry("k", args.k),
            entry("seed", args.seed),
            entry("max_iterations", base.max_iterations),
            entry("tolerance", base.tolerance),
            entry("out", args.out.display()),
        ]
        .into();
        if let Some(truth_path) = &args.truth {
            manifest.insert("truth".into(), truth_path.display().to_string());
        }
        dir.write("manifest.txt", &manifest_text(&manifest))
    })
}

/// One measure line: defined value, or the reason it is undefined for
/// this input.
enum Measure {
    Defined(String),
    Undefined(&'static str),
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), String> {
    let graph = load_graph(&args.graph)?;
    let clustering = load_clustering(&args.clustering)?;
    if clustering.len() != graph.vertex_count() {
        return Err(format!(
            "{} labels {} vertices but the graph has {}",
            args.clustering.display(),
            clustering.len(),
            graph.vertex_count()
        ));
    }

    let mut lines: Vec<(&str, Measure)> = Vec::new();
    match modularity(&graph, &clustering) {
        Ok(q) => lines.push(("q", Measure::Defined(q.to_string()))),
        Err(Error::EdgelessGraph) => lines.push(("q", Measure::Undefined("graph has no edges"))),
        Err(other) => return Err(other.to_string()),
    }
    match dunn_index(&graph, &clustering) {
        Ok(d) => lines.push(("dunn", Measure::Defined(d.to_string()))),
        Err(Error::TooFewClusters(_)) => {
            lines.push(("dunn", Measure::Undefined("fewer than two clusters")))
        }
        Err(Error::NoIntraPairs) => {
            lines.push(("dunn", Measure::Undefined("no cluster has two vertices")))
        }
        Err(other) => return Err(other.to_string()),
    }
    if let Some(truth_path) = &args.truth {
        let truth = load_clustering(truth_path)?;
        let (aligned, _) = align_labels(&clustering, &truth).map_err(|e| e.to_string())?;
        let (count, fraction) = error_rate(&aligned, &truth).map_err(|e| e.to_string())?;
        lines.push(("error_count", Measure::Defined(count.to_string())));
        lines.push(("error_fraction", Measure::Defined(fraction.to_string())));
    }

    if args.strict {
        for (name, measure) in &lines {
            if let Measure::Undefined(reason) = measure {
                return Err(format!("{name} is undefined: {reason}"));
            }
        }
    }

    if args.csv {
        println!("measure,value");
        for (name, measure) in &lines {
            match measure {
                Measure::Defined(value) => println!("{name},{value}"),
                Measure::Undefined(_) => println!("{name},"),
            }
        }
    } else {
        for (name, measure) in &lines {
            match measure {
                Measure::Defined(value) => println!("{name}={value}"),
                Measure::Undefined(reason) => println!("{name}=undefined ({reason})"),
            }
        }
    }
    Ok(())
}
