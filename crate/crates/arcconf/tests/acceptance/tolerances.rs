//! Every tolerance, band, grid and instance count used by the acceptance
//! suite. The calibration bands read qualitative claims as numbers; they
//! are choices, kept here so they can be audited in one place.

/// 1. BDeu closed form vs numerical Beta integrals.
pub const BDEU_FAMILIES: usize = 50;
pub const BDEU_MAX_ROWS: usize = 6;
pub const BDEU_MAX_PARENTS: usize = 2;
pub const BDEU_ABS_TOL: f64 = 1e-8;

/// 2. Expected shared arcs from marginals vs enumeration of every DAG.
pub const EQ1_INSTANCES: usize = 20;
pub const EQ1_NODES: usize = 4;
pub const EQ1_ABS_TOL: f64 = 1e-10;

/// 3. FDR arithmetic; counts are exact integers, the division is one rounding.
pub const FDR_ARITH_ABS_TOL: f64 = 1e-15;

/// 4. Noisy-OR gradient vs central differences.
pub const GRAD_INSTANCES: usize = 100;
pub const GRAD_STEP: f64 = 1e-5;
pub const GRAD_REL_TOL: f64 = 1e-5;
/// Relative error is `|a − b| / max(|a|, |b|, GRAD_REL_FLOOR)`: near-zero
/// components are compared on the scale of a single row's contribution.
pub const GRAD_REL_FLOOR: f64 = 1.0;

/// 5. Noisy-OR fit vs an exhaustive grid over every parameter.
pub const GRID_INSTANCES: usize = 10;
pub const GRID_MAX_PARENTS: usize = 3;
pub const GRID_STEPS: usize = 100;
/// The fit may fall short of the grid only by the solver's stopping slack,
/// `GRID_SLACK_ABS + (parameters) · tol`.
pub const GRID_SLACK_ABS: f64 = 1e-9;

/// 6. Greedy vs exhaustive parent search.
pub const GREEDY_INSTANCES: usize = 200;
pub const GREEDY_MAX_CANDIDATES: usize = 4;
pub const GREEDY_MIN_MATCH_RATE: f64 = 0.80;
/// Scores within this are the same optimum.
pub const GREEDY_SCORE_TOL: f64 = 1e-9;

/// 7. and 8. Alarm calibration; both estimators read the same datasets.
pub const ALARM_N: usize = 1000;
pub const ALARM_REPLICATES: usize = 3;
pub const ALARM_ALPHA: f64 = 4.0;
pub const ALARM_KAPPA_GRID: &[f64] = &[1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3, 1.0, 2.0, 5.0];
pub const ALARM_PERMUTATIONS: usize = 10;
pub const ALARM_SEED: u64 = 2024;

pub const FDR_HIGH_PPV: f64 = 0.8;
pub const FDR_HIGH_BAND: f64 = 0.15;
pub const FDR_LOW_PPV: f64 = 0.5;
/// Lower bound on mean(actual − expected) where expected PPV is low.
pub const FDR_LOW_MIN_MEAN_GAP: f64 = 0.0;

pub const BAYES_KAPPA: f64 = 0.1;
pub const BAYES_ALPHA: f64 = 4.0;
pub const BAYES_K: usize = 5;
pub const BAYES_MIN_PPV: f64 = 0.5;
/// Band on mean(actual − expected) over greedy models with expected PPV at
/// least `BAYES_MIN_PPV`.
pub const BAYES_MEAN_GAP: (f64, f64) = (-0.25, 0.05);
pub const BAYES_NEXT_K_MAX_CHANGE: f64 = 0.02;
pub const BAYES_THRESHOLDS: &[f64] = &[0.99, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];

/// 9. Noisy-OR stand-in calibration.
pub const HIV_REPLICATES: usize = 3;
/// The grid stops at κ = 3: larger priors admit so many arcs that noisy-OR
/// fits dominate the run time.
pub const HIV_KAPPA_GRID: &[f64] = &[1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0];
pub const HIV_PERMUTATIONS: usize = 10;
pub const HIV_SEED: u64 = 2025;
pub const HIV_MAX_FDR: f64 = 0.2;
pub const HIV_BAND: f64 = 0.10;

/// 10. Worker counts compared for byte-identical output; 0 means every core.
pub const DETERMINISM_WORKERS: &[&str] = &["1", "0", "8"];
