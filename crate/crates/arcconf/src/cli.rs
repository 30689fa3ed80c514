//! The `arcconf` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use arcconf_core::bayes::{compute_arc_marginals, expected_true_arcs, truncation_check, BayesConfig};
use arcconf_core::evalharness::{run_calibration, Truth};
use arcconf_core::fdr::{estimate_fdr, fdr_from_counts, fdr_sweep, FdrEstimate, FdrOutcome, DEFAULT_PERMUTATIONS};
use arcconf_core::search::{learn_structure, ParentRestriction, SearchConfig};
use arcconf_core::synth::{derive_hiv_standin, StandinRecipe, HIV_STANDIN_PATIENTS};
use arcconf_core::{Dataset, ScoreConfig, ScoreFamily};
use clap::{Args, Parser, Subcommand};

use crate::dataset::{dataset_to_csv, load_dataset, Schema};
use crate::error::{Error, Result};
use crate::exec::Threaded;
use crate::experiment::{calibration_csv, Experiment, TruthSource};
use crate::header::Header;
use crate::modelfile::ModelFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_DISCOVERIES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "arcconf", version, about = "Arc confidence for ordered DAG structure learning")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greedy structure search; writes a model file.
    Learn(LearnArgs),
    /// Permutation FDR estimate of the search on a dataset.
    Fdr(FdrArgs),
    /// Posterior expected number of true arcs in a model.
    Bayes(BayesArgs),
    /// Sample a dataset from a generating model.
    Simulate(SimulateArgs),
    /// Run a calibration experiment from a spec file.
    Calibrate(CalibrateArgs),
    /// Rebuild the bundled HIV stand-in model.
    #[command(hide = true)]
    Standin(StandinArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Variable ordering as comma-separated names; defaults to column order.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// bdeu, bic-cpt or bic-noisyor.
    #[arg(long, default_value = "bdeu")]
    pub score: String,
    /// Structure prior strength κ.
    #[arg(long, default_value_t = 0.01)]
    pub kappa: f64,
    /// BDeu equivalent sample size α.
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    #[arg(long)]
    pub max_parents: Option<usize>,
    /// Only these variables may be parents (comma-separated; empty for none).
    #[arg(long)]
    pub parents: Option<String>,
    /// Only these variables are searched as children.
    #[arg(long)]
    pub children: Option<String>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FdrArgs {
    #[arg(long, required_unless_present = "counts")]
    pub data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    #[command(flatten)]
    pub score: ScoreArgs,
    /// Number of permuted null datasets.
    #[arg(long, short = 'q', default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sweep κ over a comma-separated grid instead of `--kappa`.
    #[arg(long, value_delimiter = ',')]
    pub kappa_grid: Option<Vec<f64>>,
    /// Evaluate the estimator on known counts, `<observed>:<n1,n2,...>`.
    #[arg(long, conflicts_with = "data")]
    pub counts: Option<String>,
    /// Also write the estimate as a one-row CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model file from `learn`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub kappa: f64,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    /// Parent-set size limit.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Recompute with limit k + 1 and report the largest marginal change.
    #[arg(long)]
    pub check_next_k: bool,
    /// Write per-arc marginals as CSV.
    #[arg(long)]
    pub marginals: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// A network spec path, `alarm`, or `hiv-standin`.
    #[arg(long)]
    pub network: String,
    /// Rows; defaults to 1000 (102 for the HIV stand-in).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Experiment spec file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StandinArgs {
    #[arg(long, default_value_t = StandinRecipe::default().seed)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where output goes, and what the process should exit with.
struct Sink<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
            None => self.stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
        }
    }

    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "{msg}");
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let mut sink = Sink { stdout, stderr };
    match dispatch(&cli, &mut sink) {
        Ok(code) => code,
        Err(e) => {
            sink.note(&format!("error: {e}"));
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, sink: &mut Sink<'_>) -> Result<i32> {
    let exec = Threaded::new(cli.workers)?;
    match &cli.command {
        Command::Learn(a) => cmd_learn(a, &exec, sink),
        Command::Fdr(a) => cmd_fdr(a, &exec, sink),
        Command::Bayes(a) => cmd_bayes(a, &exec, sink),
        Command::Simulate(a) => cmd_simulate(a, sink),
        Command::Calibrate(a) => cmd_calibrate(a, &exec, sink),
        Command::Standin(a) => cmd_standin(a, &exec, sink),
    }
}

fn names_to_indices(data: &Dataset, list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| data.index_of(n).ok_or_else(|| Error::Usage(format!("unknown variable {n}"))))
        .collect()
}

fn score_config(a: &ScoreArgs) -> Result<ScoreConfig> {
    let family = ScoreFamily::parse(&a.score).ok_or_else(|| Error::Usage(format!("unknown score {:?}", a.score)))?;
    let mut cfg = match family {
        ScoreFamily::BdeuExact => ScoreConfig::bdeu(a.kappa, a.alpha),
        ScoreFamily::BicCpt => ScoreConfig::bic_cpt(a.kappa),
        ScoreFamily::BicNoisyOr => ScoreConfig::bic_noisyor(a.kappa),
    };
    cfg.max_parents = a.max_parents;
    cfg.validate()?;
    Ok(cfg)
}

fn search_config(data: &Dataset, a: &ScoreArgs) -> Result<SearchConfig> {
    let mut cfg = SearchConfig::for_dataset(data, score_config(a)?);
    if a.max_parents.is_some() {
        cfg.max_parents = a.max_parents;
    }
    if let Some(p) = &a.parents {
        cfg.allowed_parents = ParentRestriction::Pool(names_to_indices(data, p)?);
    }
    if let Some(c) = &a.children {
        cfg.allowed_children = Some(names_to_indices(data, c)?);
    }
    cfg.validate(data)?;
    Ok(cfg)
}

fn score_header(h: Header, a: &ScoreArgs) -> Header {
    let h = h.entry("score", &a.score).entry("kappa", a.kappa);
    let h = if a.score == "bdeu" { h.entry("alpha", a.alpha) } else { h };
    let h = match a.max_parents {
        Some(m) => h.entry("max_parents", m),
        None => h,
    };
    let h = match &a.parents {
        Some(p) => h.entry("parents", p),
        None => h,
    };
    match &a.children {
        Some(c) => h.entry("children", c),
        None => h,
    }
}

fn data_header(h: Header, path: &Path, order: &Option<Vec<String>>) -> Header {
    let h = h.entry("data", path.display());
    match order {
        Some(o) => h.entry("order", o.join(",")),
        None => h,
    }
}

fn cmd_learn(a: &LearnArgs, exec: &Threaded, sink: &mut Sink<'_>) -> Result<i32> {
    let (data, _) = load_dataset(&a.data.data, a.data.order.as_deref())?;
    let cfg = search_config(&data, &a.score)?;
    let learned = learn_structure(&data, &cfg, exec)?;
    let model = ModelFile {
        names: data.names().to_vec(),
        dag: learned.dag.clone(),
        scores: learned.scores.iter().map(|s| (s.node, s.log_score)).collect(),
    };
    let header = score_header(data_header(Header::new("learn"), &a.data.data, &a.data.order), &a.score);
    sink.emit(a.out.as_deref(), &(header.render() + &model.to_text()))?;
    sink.note(&format!("learned {} arcs, total score {}", learned.dag.arc_count(), learned.total_score()));
    Ok(EXIT_OK)
}

fn estimate_text(e: &FdrEstimate) -> String {
    let nulls: Vec<String> = e.null_counts.iter().map(usize::to_string).collect();
    format!(
        "observed_arcs = {}\nnull_counts = {}\npermutations = {}\nfdr_raw = {}\nfdr_clamped = {}\nexpected_ppv = {}\n",
        e.observed_arcs,
        nulls.join(","),
        e.q_permutations,
        e.fdr_raw,
        e.fdr_clamped,
        e.expected_ppv
    )
}

const FDR_CSV_HEADER: &str = "kappa,observed_arcs,null_total,permutations,fdr_raw,fdr_clamped,expected_ppv,seed";

fn estimate_csv_row(kappa: f64, e: &FdrEstimate) -> String {
    format!(
        "{kappa},{},{},{},{},{},{},{}\n",
        e.observed_arcs,
        e.null_counts.iter().sum::<usize>(),
        e.q_permutations,
        e.fdr_raw,
        e.fdr_clamped,
        e.expected_ppv,
        e.seed
    )
}

fn parse_counts(spec: &str) -> Result<(usize, Vec<usize>)> {
    let bad = || Error::Usage(format!("--counts expects <observed>:<n1,n2,...>, got {spec:?}"));
    let (obs, nulls) = spec.split_once(':').ok_or_else(bad)?;
    let obs = obs.trim().parse().map_err(|_| bad())?;
    let nulls = nulls.split(',').map(|n| n.trim().parse().map_err(|_| bad())).collect::<Result<Vec<usize>>>()?;
    Ok((obs, nulls))
}

fn cmd_fdr(a: &FdrArgs, exec: &Threaded, sink: &mut Sink<'_>) -> Result<i32> {
    if let Some(spec) = &a.counts {
        let (observed, nulls) = parse_counts(spec)?;
        let header = Header::new("fdr").entry("counts", spec).seed(a.seed);
        return match fdr_from_counts(observed, &nulls, a.seed) {
            Some(e) => {
                sink.emit(a.out.as_deref(), &(header.render() + &estimate_text(&e)))?;
                Ok(EXIT_OK)
            }
            None => {
                sink.emit(a.out.as_deref(), &(header.render() + "no discoveries\n"))?;
                Ok(EXIT_NO_DISCOVERIES)
            }
        };
    }
    let path = a.data.as_ref().expect("clap requires --data without --counts");
    let (data, _) = load_dataset(path, a.order.as_deref())?;
    let cfg = search_config(&data, &a.score)?;
    let header = score_header(data_header(Header::new("fdr"), path, &a.order), &a.score)
        .entry("permutations", a.permutations)
        .seed(a.seed);

    if let Some(grid) = &a.kappa_grid {
        let header = header.entry("kappa_grid", grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        let mut text = header.render() + FDR_CSV_HEADER + "\n";
        for point in fdr_sweep(&data, &cfg, grid, a.permutations, a.seed, exec)? {
            match point.result {
                Ok(run) => match run.outcome {
                    FdrOutcome::Estimate(e) => text += &estimate_csv_row(point.kappa, &e),
                    FdrOutcome::NoDiscoveries { seed } => {
                        let _ = writeln!(text, "{},0,,{},,,,{seed}", point.kappa, a.permutations);
                    }
                },
                Err(e) => {
                    let _ = writeln!(text, "# error kappa={}: {e}", point.kappa);
                }
            }
        }
        sink.emit(a.out.as_deref(), &text)?;
        return Ok(EXIT_OK);
    }

    let run = estimate_fdr(&data, &cfg, a.permutations, a.seed, exec)?;
    match run.outcome {
        FdrOutcome::Estimate(e) => {
            sink.emit(a.out.as_deref(), &(header.render() + &estimate_text(&e)))?;
            if let Some(csv) = &a.csv {
                let text = header.render() + FDR_CSV_HEADER + "\n" + &estimate_csv_row(a.score.kappa, &e);
                std::fs::write(csv, text).map_err(|err| Error::io(csv, err))?;
            }
            Ok(EXIT_OK)
        }
        FdrOutcome::NoDiscoveries { .. } => {
            sink.emit(a.out.as_deref(), &(header.render() + "no discoveries\n"))?;
            sink.note("no discoveries: the search found no arcs, so the FDR is undefined");
            Ok(EXIT_NO_DISCOVERIES)
        }
    }
}

fn cmd_bayes(a: &BayesArgs, exec: &Threaded, sink: &mut Sink<'_>) -> Result<i32> {
    let (data, _) = load_dataset(&a.data.data, a.data.order.as_deref())?;
    let model = ModelFile::load(&a.model)?;
    model.check_against(&data)?;
    let cfg = BayesConfig::new(a.kappa, a.alpha, a.k);
    let marginals = compute_arc_marginals(&data, &cfg, exec)?;
    let est = expected_true_arcs(&marginals, &model.dag)?;
    let header = data_header(Header::new("bayes"), &a.data.data, &a.data.order)
        .entry("model", a.model.display())
        .entry("kappa", a.kappa)
        .entry("alpha", a.alpha)
        .entry("k", a.k);
    let mut text = header.render();
    let _ = writeln!(text, "expected_true_arcs = {}", est.expected_true_arcs);
    let _ = writeln!(text, "model_arcs = {}", est.model_arc_count);
    let _ = writeln!(text, "expected_ppv = {}", est.expected_ppv.map_or("null".to_string(), |p| p.to_string()));
    if a.check_next_k {
        let check = truncation_check(&data, &cfg, &marginals, exec)?;
        let _ = writeln!(text, "max_marginal_change_k{} = {}", a.k + 1, check.max_abs_change);
    }
    sink.emit(a.out.as_deref(), &text)?;
    if let Some(path) = &a.marginals {
        let names = data.names();
        let mut csv = header.render() + "parent,child,marginal,in_model\n";
        for (arc, m) in marginals.iter() {
            let _ = writeln!(csv, "{},{},{m},{}", names[arc.parent], names[arc.child], u8::from(model.dag.contains(arc)));
        }
        std::fs::write(path, csv).map_err(|e| Error::io(path, e))?;
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(a: &SimulateArgs, sink: &mut Sink<'_>) -> Result<i32> {
    let source = TruthSource::parse(&a.network, Path::new(""));
    let truth = source.load()?;
    let n = a.n.unwrap_or(match truth {
        Truth::NoisyOr(_) => HIV_STANDIN_PATIENTS,
        Truth::Cpt(_) => 1000,
    });
    let data = truth.sample(n, a.seed)?;
    let header = Header::new("simulate").entry("network", source.label()).entry("n", n).seed(a.seed);
    sink.emit(a.out.as_deref(), &(header.render() + &dataset_to_csv(&data, &Schema::numeric(&data))?))?;
    Ok(EXIT_OK)
}

fn cmd_calibrate(a: &CalibrateArgs, exec: &Threaded, sink: &mut Sink<'_>) -> Result<i32> {
    let exp = Experiment::load(&a.spec)?;
    let truth = exp.truth.load()?;
    let run = run_calibration(&truth, &exp.fdr, exp.bayes.as_ref(), exec)?;
    let mut header = Header::new("calibrate").entry("spec", a.spec.display());
    let given: BTreeMap<&str, &str> = exp.entries.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    for (k, v) in given {
        if k != "seed" {
            header = header.entry(k, v);
        }
    }
    let header = header.seed(exp.fdr.seed);
    sink.emit(a.out.as_deref(), &(header.render() + &calibration_csv(&run.points)))?;
    Ok(EXIT_OK)
}

fn cmd_standin(a: &StandinArgs, exec: &Threaded, sink: &mut Sink<'_>) -> Result<i32> {
    let recipe = StandinRecipe { seed: a.seed, ..StandinRecipe::default() };
    let standin = derive_hiv_standin(&recipe, exec)?;
    let g = &recipe.generator;
    let header = Header::new("standin")
        .entry("hla", g.hla_count)
        .entry("peptides", g.peptide_count)
        .entry("patients", recipe.patients)
        .entry("kappa_grid", recipe.kappa_grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        .entry("target_fdr", recipe.target_fdr)
        .entry("selected_kappa", standin.kappa)
        .entry("estimated_fdr", standin.fdr)
        .entry("arcs", standin.network.dag().arc_count())
        .seed(a.seed);
    sink.emit(a.out.as_deref(), &(header.render() + &standin.network.to_spec()))?;
    Ok(EXIT_OK)
}
