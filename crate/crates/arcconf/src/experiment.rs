//! Experiment spec files and calibration CSV output.
//!
//! An experiment spec is `key = value` lines with `#` comments. Lists are
//! comma separated. See `experiments/` for complete examples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use arcconf_core::bayes::BayesConfig;
use arcconf_core::evalharness::{BayesCalibration, CalibrationPoint, FdrCalibration, PointStatus, Truth};
use arcconf_core::synth::{alarm, hiv_standin};
use arcconf_core::{ScoreConfig, ScoreFamily};

use crate::error::{Error, Result};
use crate::network::load_truth;

pub const CALIBRATION_HEADER: &str = "method,family,kappa,alpha,n,replicate,model_arcs,expected_ppv,actual_ppv,fdr_raw,seed";

const KEYS: &[&str] = &[
    "truth",
    "family",
    "alpha",
    "kappa",
    "sample_sizes",
    "replicates",
    "permutations",
    "seed",
    "max_parents",
    "arc_budget",
    "bayes",
    "bayes_kappa",
    "bayes_alpha",
    "bayes_k",
    "thresholds",
];

#[derive(Debug, Clone, PartialEq)]
pub enum TruthSource {
    Alarm,
    HivStandin,
    File(PathBuf),
}

impl TruthSource {
    pub fn parse(value: &str, base: &Path) -> Self {
        match value {
            "alarm" => TruthSource::Alarm,
            "hiv-standin" => TruthSource::HivStandin,
            path => TruthSource::File(base.join(path)),
        }
    }

    pub fn load(&self) -> Result<Truth> {
        match self {
            TruthSource::Alarm => Ok(Truth::Cpt(alarm())),
            TruthSource::HivStandin => Ok(Truth::NoisyOr(hiv_standin())),
            TruthSource::File(path) => load_truth(path),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TruthSource::Alarm => "alarm".into(),
            TruthSource::HivStandin => "hiv-standin".into(),
            TruthSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub truth: TruthSource,
    pub fdr: FdrCalibration,
    pub bayes: Option<BayesCalibration>,
    /// Entries as given, for the output header.
    pub entries: Vec<(String, String)>,
}

fn list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|s| s.trim().parse().ok()).collect()
}

impl Experiment {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        let mut problems = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            match content.split_once('=') {
                Some((k, v)) => {
                    let (k, v) = (k.trim(), v.trim());
                    if entries.iter().any(|(e, _)| e == k) {
                        problems.push(format!("line {}: key {k} repeated", i + 1));
                    }
                    entries.push((k.to_string(), v.to_string()));
                }
                None => problems.push(format!("line {}: expected `key = value`", i + 1)),
            }
        }
        let unknown: Vec<&str> =
            entries.iter().map(|(k, _)| k.as_str()).filter(|k| !KEYS.contains(k)).collect();
        if !unknown.is_empty() {
            problems.push(format!("unknown keys: {}", unknown.join(", ")));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let mut bad = |key: &str| problems.push(format!("bad value for {key}: {:?}", get(key).unwrap_or("")));

        let truth = TruthSource::parse(get("truth").unwrap_or("alarm"), base);
        let family = match get("family").map(ScoreFamily::parse) {
            None => ScoreFamily::BdeuExact,
            Some(Some(f)) => f,
            Some(None) => {
                bad("family");
                ScoreFamily::BdeuExact
            }
        };
        macro_rules! value {
            ($key:expr, $parse:expr, $default:expr) => {
                match get($key) {
                    None => $default,
                    Some(v) => match $parse(v) {
                        Some(x) => x,
                        None => {
                            bad($key);
                            $default
                        }
                    },
                }
            };
        }
        let num = |v: &str| v.parse::<f64>().ok();
        let int = |v: &str| v.parse::<usize>().ok();
        let alpha = value!("alpha", num, 4.0);
        let kappas: Vec<f64> = value!("kappa", list::<f64>, vec![0.01]);
        let sizes: Vec<usize> = value!("sample_sizes", list::<usize>, vec![1000]);
        let replicates = value!("replicates", int, 3);
        let permutations = value!("permutations", int, 10);
        let seed = value!("seed", |v: &str| v.parse::<u64>().ok(), 0);
        let max_parents = value!("max_parents", |v: &str| v.parse::<usize>().ok().map(Some), None);
        let arc_budget = value!("arc_budget", |v: &str| v.parse::<usize>().ok().map(Some), None);
        let bayes_on = value!("bayes", |v: &str| v.parse::<bool>().ok(), false);
        let bayes_kappa = value!("bayes_kappa", num, 0.1);
        let bayes_alpha = value!("bayes_alpha", num, 4.0);
        let bayes_k = value!("bayes_k", int, 5);
        let thresholds: Vec<f64> = value!("thresholds", list::<f64>, vec![0.99, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1]);

        if !problems.is_empty() {
            return Err(Error::ExperimentSpec(problems.join("; ")));
        }
        let score = match family {
            ScoreFamily::BdeuExact => ScoreConfig::bdeu(1.0, alpha),
            ScoreFamily::BicCpt => ScoreConfig::bic_cpt(1.0),
            ScoreFamily::BicNoisyOr => ScoreConfig::bic_noisyor(1.0),
        };
        let fdr = FdrCalibration {
            sample_sizes: sizes,
            kappa_grid: kappas,
            score,
            max_parents,
            replicates,
            permutations,
            seed,
            arc_budget,
        };
        let bayes = bayes_on.then(|| BayesCalibration { config: BayesConfig::new(bayes_kappa, bayes_alpha, bayes_k), thresholds });
        Ok(Self { truth, fdr, bayes, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Calibration rows under [`CALIBRATION_HEADER`]. Undefined values are empty
/// fields; failed cells become `# error` comment lines in their sorted place.
pub fn calibration_csv(points: &[CalibrationPoint]) -> String {
    let mut out = String::from(CALIBRATION_HEADER);
    out.push('\n');
    for p in points {
        if let PointStatus::Failed(msg) = &p.status {
            let _ = writeln!(
                out,
                "# error method={} n={} kappa={} replicate={}: {msg}",
                p.method.as_str(),
                p.n,
                p.kappa,
                p.replicate
            );
            continue;
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.method.as_str(),
            p.family.as_str(),
            p.kappa,
            opt(p.alpha),
            p.n,
            p.replicate,
            opt(p.model_arcs),
            opt(p.expected_ppv),
            opt(p.actual_ppv),
            opt(p.fdr_raw),
            p.seed
        );
    }
    out
}
