//! Noisy-OR likelihoods in probability space and their grid maximum.

use std::collections::BTreeMap;

/// `Σ_rows ln p(y | active parents)` with
/// `p(y = 0) = (1 − q₀) Π_active (1 − q_i)`.
pub fn noisyor_loglik(child: &[usize], parents: &[&[usize]], leak: f64, links: &[f64]) -> f64 {
    (0..child.len())
        .map(|row| {
            let mut p0 = 1.0 - leak;
            for (col, q) in parents.iter().zip(links) {
                if col[row] == 1 {
                    p0 *= 1.0 - q;
                }
            }
            if child[row] == 1 { (1.0 - p0).ln() } else { p0.ln() }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    /// `[q₀, q₁, ...]` at the best grid point.
    pub q: Vec<f64>,
    pub loglik: f64,
}

/// Counts `(rows with y = 0, rows with y = 1)` per active-parent mask.
fn mask_counts(child: &[usize], parents: &[&[usize]]) -> Vec<(u32, f64, f64)> {
    let mut by_mask: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (row, &y) in child.iter().enumerate() {
        let mask = parents.iter().enumerate().filter(|(_, c)| c[row] == 1).fold(0, |m, (i, _)| m | 1 << i);
        let e = by_mask.entry(mask).or_default();
        if y == 1 { e.1 += 1.0 } else { e.0 += 1.0 }
    }
    by_mask.into_iter().map(|(m, (n0, n1))| (m, n0, n1)).collect()
}

fn term(n0: f64, n1: f64, p0: f64) -> f64 {
    let mut t = 0.0;
    if n0 > 0.0 {
        t += n0 * p0.ln();
    }
    if n1 > 0.0 {
        t += n1 * (-p0).ln_1p();
    }
    t
}

/// Exhaustive maximum of the noisy-OR log likelihood over
/// `{0, 1/steps, ..., 1}` for the leak and every link.
///
/// Rows are grouped by which parents are active; the groups not touching the
/// last link are summed once per setting of the other coordinates.
pub fn grid_max(child: &[usize], parents: &[&[usize]], steps: usize) -> GridMax {
    let m = parents.len();
    let groups = mask_counts(child, parents);
    let keep: Vec<f64> = (0..=steps).map(|i| 1.0 - i as f64 / steps as f64).collect();
    let mut best = GridMax { q: vec![0.0; m + 1], loglik: f64::NEG_INFINITY };
    // Outer coordinates: leak and links 0..m-1 (all but the last).
    let outer = if m == 0 { 0 } else { m };
    let mut idx = vec![0usize; outer];
    loop {
        // idx[0] is the leak, idx[i] link i-1; the innermost coordinate is
        // the last link, or the leak itself when there are no parents.
        let mut fixed = 0.0;
        let mut inner: Vec<(f64, f64, f64)> = Vec::new();
        for &(mask, n0, n1) in &groups {
            let mut p0 = if m == 0 { 1.0 } else { keep[idx[0]] };
            for i in 0..m.saturating_sub(1) {
                if mask >> i & 1 == 1 {
                    p0 *= keep[idx[i + 1]];
                }
            }
            if m == 0 || mask >> (m - 1) & 1 == 1 {
                inner.push((n0, n1, p0));
            } else {
                fixed += term(n0, n1, p0);
            }
        }
        for (last, &k) in keep.iter().enumerate() {
            let ll = fixed + inner.iter().map(|&(n0, n1, p0)| term(n0, n1, p0 * k)).sum::<f64>();
            if ll > best.loglik {
                let mut q: Vec<f64> = idx.iter().map(|&i| i as f64 / steps as f64).collect();
                q.push(last as f64 / steps as f64);
                best = GridMax { q, loglik: ll };
            }
        }
        // Advance the odometer over the outer coordinates.
        let mut d = 0;
        loop {
            if d == outer {
                return best;
            }
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Loss from rounding `q` to the nearest grid point: an upper bound on how
/// far the grid maximum can sit below the log likelihood at `q`.
pub fn rounding_gap(child: &[usize], parents: &[&[usize]], q: &[f64], steps: usize) -> f64 {
    let s = steps as f64;
    let r: Vec<f64> = q.iter().map(|&v| (v * s).round() / s).collect();
    noisyor_loglik(child, parents, q[0], &q[1..]) - noisyor_loglik(child, parents, r[0], &r[1..])
}
