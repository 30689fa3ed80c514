mod common;

use arcconf_core::evalharness::{actual_ppv, run_fdr_calibration, FdrCalibration, PointStatus, Truth};
use arcconf_core::rng::stream;
use arcconf_core::synth::{
    alarm, hiv_standin, parse_network_spec, parse_noisyor_spec, sample_cpt_network, sample_noisyor_network, CptNetwork,
    HIV_STANDIN_PATIENTS,
};
use arcconf_core::{ScoreConfig, Sequential};
use common::random_network;

/// `|observed − p| ≤ 5` standard errors.
fn close(count: usize, total: usize, p: f64) -> bool {
    let se = (p * (1.0 - p) / total as f64).sqrt().max(1e-3);
    (count as f64 / total as f64 - p).abs() <= 5.0 * se
}

fn check_conditional_frequencies(net: &CptNetwork, n: usize, seed: u64) {
    let d = sample_cpt_network(net, n, &mut stream(seed, &[])).unwrap();
    for node in 0..net.n_nodes() {
        let parents = net.dag().parents(node);
        let cpt = net.cpt(node);
        let mut counts = vec![vec![0usize; net.arities()[node]]; cpt.len()];
        for row in 0..n {
            let mut config = 0;
            for &p in parents {
                config = config * net.arities()[p] + d.column(p)[row] as usize;
            }
            counts[config][d.column(node)[row] as usize] += 1;
        }
        for (config, row) in counts.iter().enumerate() {
            let total: usize = row.iter().sum();
            if total < 200 {
                continue;
            }
            for (value, &c) in row.iter().enumerate() {
                assert!(close(c, total, cpt[config][value]), "node {node} config {config} value {value}: {c}/{total}");
            }
        }
    }
}

#[test]
fn random_network_frequencies_follow_the_tables() {
    for seed in 0..5 {
        let mut rng = stream(seed, &[7]);
        let net = random_network(&mut rng, &[2, 3, 2, 4, 2], 0.5, 3);
        check_conditional_frequencies(&net, 40_000, seed);
    }
}

#[test]
fn alarm_frequencies_follow_the_tables() {
    let net = alarm();
    assert_eq!(net.n_nodes(), 37);
    assert_eq!(net.dag().arc_count(), 46);
    check_conditional_frequencies(&net, 40_000, 3);
}

#[test]
fn alarm_spec_round_trips() {
    let net = alarm();
    assert_eq!(parse_network_spec(&net.to_spec()).unwrap(), net);
}

#[test]
fn standin_has_the_cohort_shape() {
    let net = hiv_standin();
    assert_eq!(net.hla_count(), 70);
    assert_eq!(net.peptide_count(), 140);
    assert_eq!(HIV_STANDIN_PATIENTS, 102);
    assert!(net.dag().arc_count() > 0);
    assert_eq!(parse_noisyor_spec(&net.to_spec()).unwrap(), net);
    let d = sample_noisyor_network(&net, HIV_STANDIN_PATIENTS, &mut stream(1, &[])).unwrap();
    assert_eq!((d.n_rows(), d.n_vars()), (102, 210));
    for row in 0..d.n_rows() {
        let carried = (0..70).filter(|&a| d.column(a)[row] == 1).count();
        assert!((3..=6).contains(&carried), "row {row} carries {carried}");
    }
}

#[test]
fn noisyor_reactions_follow_the_model() {
    let net = hiv_standin();
    let n = 60_000;
    let d = sample_noisyor_network(&net, n, &mut stream(2, &[])).unwrap();
    let h = net.hla_count();
    for (j, p) in net.params.iter().enumerate().filter(|(_, p)| !p.links().is_empty()).take(12) {
        let (a, _) = p.links()[0];
        let with: Vec<usize> = (0..n).filter(|&r| d.column(a)[r] == 1 && p.links()[1..].iter().all(|&(b, _)| d.column(b)[r] == 0)).collect();
        let without: Vec<usize> = (0..n).filter(|&r| p.links().iter().all(|&(b, _)| d.column(b)[r] == 0)).collect();
        for (rows, active) in [(with, vec![a]), (without, vec![])] {
            let hits = rows.iter().filter(|&&r| d.column(h + j)[r] == 1).count();
            assert!(close(hits, rows.len(), p.prob_active(&active).unwrap()), "peptide {j} active {active:?}");
        }
    }
}

#[test]
fn huge_sample_of_a_strong_chain_is_calibrated() {
    let spec = "\
node A 2
node B 2
node C 2
order A B C
cpt A 0 0.5 0.5
parents B A
cpt B 0 0.99 0.01
cpt B 1 0.01 0.99
parents C B
cpt C 0 0.99 0.01
cpt C 1 0.01 0.99
";
    let net = parse_network_spec(spec).unwrap();
    let truth = Truth::Cpt(net);
    let cfg = FdrCalibration {
        sample_sizes: vec![5000],
        kappa_grid: vec![0.01],
        score: ScoreConfig::bdeu(0.01, 4.0),
        max_parents: None,
        replicates: 2,
        permutations: 10,
        seed: 5,
        arc_budget: None,
    };
    let points = run_fdr_calibration(&truth, &cfg, &Sequential).unwrap();
    assert_eq!(points.len(), 2);
    for p in &points {
        assert_eq!(p.status, PointStatus::Ok);
        assert!(p.actual_ppv.unwrap() >= 0.99);
        assert!(p.expected_ppv.unwrap() >= 0.9);
    }
    let dag = truth.dag();
    assert_eq!(actual_ppv(&dag, &dag).unwrap(), Some(1.0));
}
