//! Calibration experiments: expected versus actual PPV of learned models
//! against a known generating structure.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bayes::{
    averaged_predictive_loglik, compute_arc_marginals, dag_predictive_loglik, expected_true_arcs,
    nested_models_by_threshold, ArcMarginals, BayesConfig,
};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fdr::{fdr_from_counts, null_counts};
use crate::model::{arc_overlap, Dag, Dataset};
use crate::rng::{derive_seed, stream};
use crate::scoring::{ScoreConfig, ScoreFamily};
use crate::search::{learn_structure, LearnedStructure, SearchConfig};
use crate::synth::{sample_cpt_network, sample_noisyor_network, CptNetwork, NoisyOrNetwork};

const DATA_KEY: u64 = 0xDA7A;
const NULL_KEY: u64 = 0x4E55_4C4C;

/// Fraction of learned arcs present in the truth; `None` for an empty model.
pub fn actual_ppv(learned: &Dag, truth: &Dag) -> Result<Option<f64>> {
    let overlap = arc_overlap(learned, truth)?;
    let m = learned.arc_count();
    Ok((m > 0).then(|| overlap as f64 / m as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Fdr,
    /// Bayesian estimate for the models found by greedy search.
    Bayes,
    /// Bayesian estimate for the models obtained by thresholding marginals.
    BayesNested,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fdr => "FDR",
            Method::Bayes => "BAYES",
            Method::BayesNested => "BAYES_NESTED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Ok,
    /// Model larger than the arc budget; the null runs were not attempted.
    OverBudget,
    /// The search found no arcs, so the FDR is undefined.
    NoDiscoveries,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub method: Method,
    pub family: ScoreFamily,
    /// Structure prior of the search that produced the model, or of the
    /// posterior for nested models.
    pub kappa: f64,
    pub alpha: Option<f64>,
    pub n: usize,
    pub replicate: usize,
    pub model_arcs: Option<usize>,
    pub expected_ppv: Option<f64>,
    pub actual_ppv: Option<f64>,
    pub fdr_raw: Option<f64>,
    pub threshold: Option<f64>,
    pub seed: u64,
    pub status: PointStatus,
}

impl CalibrationPoint {
    fn blank(method: Method, family: ScoreFamily, kappa: f64, alpha: Option<f64>, n: usize, replicate: usize, seed: u64) -> Self {
        Self {
            method,
            family,
            kappa,
            alpha,
            n,
            replicate,
            model_arcs: None,
            expected_ppv: None,
            actual_ppv: None,
            fdr_raw: None,
            threshold: None,
            seed,
            status: PointStatus::Ok,
        }
    }

    fn failed(mut self, e: &Error) -> Self {
        self.status = PointStatus::Failed(format!("{e}"));
        self
    }
}

/// A generating model to sample from and score against.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Cpt(CptNetwork),
    NoisyOr(NoisyOrNetwork),
}

impl Truth {
    pub fn dag(&self) -> Dag {
        match self {
            Truth::Cpt(net) => net.dag().clone(),
            Truth::NoisyOr(net) => net.dag(),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = stream(seed, &[]);
        match self {
            Truth::Cpt(net) => sample_cpt_network(net, n, &mut rng),
            Truth::NoisyOr(net) => sample_noisyor_network(net, n, &mut rng),
        }
    }

    /// Search configuration for this truth: ordering-consistent for CPT
    /// networks, HLA → peptide only for noisy-OR networks.
    pub fn search_config(&self, data: &Dataset, score: ScoreConfig) -> SearchConfig {
        match self {
            Truth::Cpt(_) => SearchConfig::for_dataset(data, score),
            Truth::NoisyOr(net) => {
                let h = net.hla_count();
                SearchConfig::bipartite(score, data.ordering().clone(), (0..h).collect(), (h..net.n_nodes()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrCalibration {
    pub sample_sizes: Vec<usize>,
    pub kappa_grid: Vec<f64>,
    /// Score family and BDeu ESS; κ is taken from the grid.
    pub score: ScoreConfig,
    pub max_parents: Option<usize>,
    pub replicates: usize,
    pub permutations: usize,
    pub seed: u64,
    /// Models with more arcs than this skip the null runs.
    pub arc_budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesCalibration {
    pub config: BayesConfig,
    /// Strictly descending thresholds in `(0, 1]` for the nested models.
    pub thresholds: Vec<f64>,
}

/// Seed of the dataset for `(n, replicate)`; shared by both estimators.
pub fn data_seed(seed: u64, n: usize, replicate: usize) -> u64 {
    derive_seed(seed, &[DATA_KEY, n as u64, replicate as u64])
}

/// Seed of the null replicates for one grid cell.
pub fn null_seed(seed: u64, n: usize, replicate: usize, kappa: f64) -> u64 {
    derive_seed(seed, &[NULL_KEY, n as u64, replicate as u64, kappa.to_bits()])
}

fn validate_grid(sizes: &[usize], kappas: &[f64], replicates: usize) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidConfig("sample sizes must be nonempty and positive".into()));
    }
    if kappas.is_empty() || kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::InvalidConfig("kappa grid must be nonempty and positive".into()));
    }
    if replicates == 0 {
        return Err(Error::InvalidConfig("at least one replicate is required".into()));
    }
    Ok(())
}

/// Everything computed for one sampled dataset.
struct Cell<'a> {
    truth_dag: &'a Dag,
    n: usize,
    replicate: usize,
}

fn fdr_point<E: Executor>(
    cell: &Cell<'_>,
    data: &Dataset,
    search: &SearchConfig,
    learned: &LearnedStructure,
    cfg: &FdrCalibration,
    exec: &E,
) -> CalibrationPoint {
    let kappa = search.score.kappa;
    let seed = null_seed(cfg.seed, cell.n, cell.replicate, kappa);
    let alpha = (cfg.score.family == ScoreFamily::BdeuExact).then_some(cfg.score.ess);
    let mut point = CalibrationPoint::blank(Method::Fdr, cfg.score.family, kappa, alpha, cell.n, cell.replicate, seed);
    let arcs = learned.dag.arc_count();
    point.model_arcs = Some(arcs);
    match actual_ppv(&learned.dag, cell.truth_dag) {
        Ok(p) => point.actual_ppv = p,
        Err(e) => return point.failed(&e),
    }
    if arcs == 0 {
        point.status = PointStatus::NoDiscoveries;
        return point;
    }
    if cfg.arc_budget.is_some_and(|b| arcs > b) {
        point.status = PointStatus::OverBudget;
        return point;
    }
    match null_counts(data, search, cfg.permutations, seed, exec) {
        Ok(nulls) => {
            let est = fdr_from_counts(arcs, &nulls, seed).expect("arcs > 0");
            point.expected_ppv = Some(est.expected_ppv);
            point.fdr_raw = Some(est.fdr_raw);
            point
        }
        Err(e) => point.failed(&e),
    }
}

fn bayes_point(
    cell: &Cell<'_>,
    method: Method,
    kappa: f64,
    dag: &Dag,
    marginals: &ArcMarginals,
    bayes: &BayesConfig,
    seed: u64,
) -> CalibrationPoint {
    let mut point =
        CalibrationPoint::blank(method, ScoreFamily::BdeuExact, kappa, Some(bayes.ess), cell.n, cell.replicate, seed);
    point.model_arcs = Some(dag.arc_count());
    match (expected_true_arcs(marginals, dag), actual_ppv(dag, cell.truth_dag)) {
        (Ok(est), Ok(actual)) => {
            point.expected_ppv = est.expected_ppv;
            point.actual_ppv = actual;
            point
        }
        (Err(e), _) | (_, Err(e)) => point.failed(&e),
    }
}

fn sort_points(points: &mut [CalibrationPoint]) {
    // Stable, so nested models keep their threshold order within a cell.
    points.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.n.cmp(&b.n))
            .then(a.kappa.total_cmp(&b.kappa))
            .then(a.replicate.cmp(&b.replicate))
    });
}

/// Output of a combined run, plus the marginals kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    pub points: Vec<CalibrationPoint>,
    /// `(n, replicate, marginals)` for each dataset when the Bayesian
    /// estimator ran.
    pub marginals: Vec<(usize, usize, ArcMarginals)>,
}

/// For each `(n, replicate)`: sample one dataset from the truth, learn one
/// model per κ, and evaluate the FDR estimator and (optionally) the
/// Bayesian estimator on the same models. Per-point failures are recorded.
pub fn run_calibration<E: Executor>(
    truth: &Truth,
    fdr: &FdrCalibration,
    bayes: Option<&BayesCalibration>,
    exec: &E,
) -> Result<CalibrationRun> {
    validate_grid(&fdr.sample_sizes, &fdr.kappa_grid, fdr.replicates)?;
    if fdr.permutations == 0 {
        return Err(Error::InvalidConfig("at least one permutation is required".into()));
    }
    if let Some(b) = bayes {
        if !matches!(truth, Truth::Cpt(_)) {
            return Err(Error::InvalidConfig("the Bayesian estimator needs a CPT truth".into()));
        }
        b.config.validate()?;
    }
    let truth_dag = truth.dag();
    let mut points = Vec::new();
    let mut kept = Vec::new();
    for &n in &fdr.sample_sizes {
        for replicate in 0..fdr.replicates {
            let cell = Cell { truth_dag: &truth_dag, n, replicate };
            let dseed = data_seed(fdr.seed, n, replicate);
            let data = match truth.sample(n, dseed) {
                Ok(d) => d,
                Err(e) => {
                    for &kappa in &fdr.kappa_grid {
                        let p = CalibrationPoint::blank(Method::Fdr, fdr.score.family, kappa, None, n, replicate, dseed);
                        points.push(p.failed(&e));
                    }
                    continue;
                }
            };
            let marginals = bayes.map(|b| compute_arc_marginals(&data, &b.config, exec));
            for &kappa in &fdr.kappa_grid {
                let mut score = fdr.score.clone();
                score.kappa = kappa;
                let mut search = truth.search_config(&data, score);
                if fdr.max_parents.is_some() {
                    search.max_parents = fdr.max_parents;
                }
                let learned = match learn_structure(&data, &search, exec) {
                    Ok(l) => l,
                    Err(e) => {
                        let p = CalibrationPoint::blank(Method::Fdr, fdr.score.family, kappa, None, n, replicate, dseed);
                        points.push(p.failed(&e));
                        continue;
                    }
                };
                points.push(fdr_point(&cell, &data, &search, &learned, fdr, exec));
                if let (Some(b), Some(m)) = (bayes, marginals.as_ref()) {
                    points.push(match m {
                        Ok(m) => bayes_point(&cell, Method::Bayes, kappa, &learned.dag, m, &b.config, dseed),
                        Err(e) => CalibrationPoint::blank(Method::Bayes, ScoreFamily::BdeuExact, kappa, Some(b.config.ess), n, replicate, dseed)
                            .failed(e),
                    });
                }
            }
            if let (Some(b), Some(m)) = (bayes, marginals) {
                match m.and_then(|m| nested_models_by_threshold(&m, &b.thresholds).map(|nested| (m, nested))) {
                    Ok((m, nested)) => {
                        for model in nested {
                            let mut p =
                                bayes_point(&cell, Method::BayesNested, b.config.kappa, &model.dag, &m, &b.config, dseed);
                            p.threshold = Some(model.threshold);
                            points.push(p);
                        }
                        kept.push((n, replicate, m));
                    }
                    Err(e) => points.push(
                        CalibrationPoint::blank(Method::BayesNested, ScoreFamily::BdeuExact, b.config.kappa, Some(b.config.ess), n, replicate, dseed)
                            .failed(&e),
                    ),
                }
            }
        }
    }
    sort_points(&mut points);
    Ok(CalibrationRun { points, marginals: kept })
}

pub fn run_fdr_calibration<E: Executor>(truth: &Truth, cfg: &FdrCalibration, exec: &E) -> Result<Vec<CalibrationPoint>> {
    Ok(run_calibration(truth, cfg, None, exec)?.points)
}

/// Bayesian points only: nested models by threshold, plus the greedy
/// models learned at each κ of `cfg` (no null runs).
pub fn run_bayes_calibration<E: Executor>(
    truth: &Truth,
    cfg: &FdrCalibration,
    bayes: &BayesCalibration,
    exec: &E,
) -> Result<Vec<CalibrationPoint>> {
    if cfg.score.family != ScoreFamily::BdeuExact {
        return Err(Error::InvalidConfig("Bayesian calibration needs the bdeu family".into()));
    }
    let no_nulls = FdrCalibration { arc_budget: Some(0), ..cfg.clone() };
    let run = run_calibration(truth, &no_nulls, Some(bayes), exec)?;
    Ok(run.points.into_iter().filter(|p| p.method != Method::Fdr).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneMode {
    /// Held-out likelihood of the single model found by greedy search.
    ModelSelection,
    /// Held-out likelihood averaged over parent-set posteriors.
    ModelAveraging,
}

impl TuneMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TuneMode::ModelSelection => "MODEL_SELECTION",
            TuneMode::ModelAveraging => "MODEL_AVERAGING",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: (f64, f64),
    /// Held-out log likelihood per grid point, in grid order.
    pub scores: Vec<f64>,
}

/// Grid point `(κ, α)` with the highest held-out log predictive likelihood.
/// Ties go to the earlier grid point.
pub fn tune_hyperparams_by_prediction<E: Executor>(
    train: &Dataset,
    test: &Dataset,
    grid: &[(f64, f64)],
    mode: TuneMode,
    k: usize,
    exec: &E,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &(kappa, ess) in grid {
        let s = match mode {
            TuneMode::ModelSelection => {
                let search = SearchConfig::for_dataset(train, ScoreConfig::bdeu(kappa, ess));
                let learned = learn_structure(train, &search, exec)?;
                dag_predictive_loglik(train, test, &learned.dag, ess)?
            }
            TuneMode::ModelAveraging => averaged_predictive_loglik(train, test, &BayesConfig::new(kappa, ess, k), exec)?,
        };
        scores.push(s);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(TuneResult { best: grid[best], scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::model::{Arc, VarOrder};
    use crate::synth::parse_network_spec;

    fn dag(n: usize, arcs: &[(usize, usize)]) -> Dag {
        Dag::from_arcs(arcs.iter().map(|&(p, c)| Arc::new(p, c)), VarOrder::identity(n)).unwrap()
    }

    #[test]
    fn actual_ppv_examples() {
        let truth = dag(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(actual_ppv(&dag(4, &[(0, 1), (2, 3)]), &truth).unwrap(), Some(1.0));
        assert_eq!(actual_ppv(&dag(4, &[(0, 2)]), &truth).unwrap(), Some(0.0));
        let third = actual_ppv(&dag(4, &[(0, 1), (0, 2), (0, 3)]), &truth).unwrap().unwrap();
        assert!((third - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(actual_ppv(&dag(4, &[]), &truth).unwrap(), None);
        assert!(actual_ppv(&dag(3, &[]), &truth).is_err());
    }

    fn independent_truth() -> Truth {
        Truth::Cpt(parse_network_spec("node A 2\nnode B 2\nnode C 2\ncpt A 0 0.5 0.5\ncpt B 0 0.5 0.5\ncpt C 0 0.5 0.5\n").unwrap())
    }

    fn small_grid(score: ScoreConfig) -> FdrCalibration {
        FdrCalibration {
            sample_sizes: alloc::vec![40],
            kappa_grid: alloc::vec![0.5, 50.0],
            score,
            max_parents: None,
            replicates: 2,
            permutations: 3,
            seed: 9,
            arc_budget: None,
        }
    }

    #[test]
    fn empty_truth_gives_zero_actual_ppv() {
        let points = run_fdr_calibration(&independent_truth(), &small_grid(ScoreConfig::bdeu(1.0, 4.0)), &Sequential).unwrap();
        assert_eq!(points.len(), 4);
        for p in &points {
            match p.model_arcs {
                Some(0) => assert_eq!(p.actual_ppv, None),
                Some(_) => assert_eq!(p.actual_ppv, Some(0.0)),
                None => panic!("{p:?}"),
            }
        }
    }

    #[test]
    fn points_are_sorted_and_deterministic() {
        let cfg = small_grid(ScoreConfig::bdeu(1.0, 4.0));
        let bayes = BayesCalibration { config: BayesConfig::default(), thresholds: alloc::vec![0.9, 0.5, 0.1] };
        let a = run_calibration(&independent_truth(), &cfg, Some(&bayes), &Sequential).unwrap();
        let b = run_calibration(&independent_truth(), &cfg, Some(&bayes), &Sequential).unwrap();
        assert_eq!(a, b);
        let keys: Vec<_> = a.points.iter().map(|p| (p.method, p.n, p.kappa.to_bits(), p.replicate)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(a.points.iter().filter(|p| p.method == Method::BayesNested).count(), 6);
    }

    #[test]
    fn single_node_truth() {
        let truth = Truth::Cpt(parse_network_spec("node A 2\ncpt A 0 0.3 0.7\n").unwrap());
        let cfg = FdrCalibration { kappa_grid: alloc::vec![1.0], replicates: 1, ..small_grid(ScoreConfig::bdeu(1.0, 4.0)) };
        let bayes = BayesCalibration { config: BayesConfig::default(), thresholds: alloc::vec![0.5] };
        let pts = run_bayes_calibration(&truth, &cfg, &bayes, &Sequential).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.model_arcs == Some(0) && p.expected_ppv.is_none()));
    }

    #[test]
    fn one_point_grid_tuning() {
        let d = Dataset::from_columns(alloc::vec![alloc::vec![0, 1, 1, 0]], alloc::vec![2], None, alloc::vec![0]).unwrap();
        for mode in [TuneMode::ModelSelection, TuneMode::ModelAveraging] {
            let r = tune_hyperparams_by_prediction(&d, &d, &[(0.3, 2.0)], mode, 5, &Sequential).unwrap();
            assert_eq!(r.best, (0.3, 2.0));
        }
    }
}
