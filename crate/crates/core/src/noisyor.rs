//! Noisy-OR conditional distributions for binary children.
//!
//! `p(y = 0 | active parents) = (1 − q₀) ∏ (1 − q_i)` over the active parents.
//! Fitting works in `θ = −ln(1 − q)` coordinates, where the negative log
//! likelihood is convex: each row contributes `η` when `y = 0` and
//! `−ln(1 − e^{−η})` when `y = 1`, with `η = θ₀ + Σ_active θ_i`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp_m1, ln, ln_1p};
use crate::model::Dataset;
use crate::scoring::checked_parents;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Cap on link strength in θ space: `q ≤ 1 − e^{−30}`.
pub const THETA_MAX: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOrParams {
    pub leak: f64,
    /// `(parent, q)` pairs sorted by parent index.
    links: Vec<(usize, f64)>,
}

impl NoisyOrParams {
    pub fn new(leak: f64, mut links: Vec<(usize, f64)>) -> Result<Self> {
        links.sort_by_key(|&(p, _)| p);
        for w in links.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidConfig(alloc::format!(
                    "duplicate noisy-OR link for parent {}",
                    w[0].0
                )));
            }
        }
        let in_range = |q: f64| (0.0..=1.0).contains(&q);
        if !in_range(leak) || links.iter().any(|&(_, q)| !in_range(q)) {
            return Err(Error::InvalidConfig("noisy-OR probabilities must lie in [0, 1]".into()));
        }
        Ok(Self { leak, links })
    }

    pub fn links(&self) -> &[(usize, f64)] {
        &self.links
    }

    pub fn parents(&self) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().map(|&(p, _)| p)
    }

    pub fn link(&self, parent: usize) -> Option<f64> {
        self.links.binary_search_by_key(&parent, |&(p, _)| p).ok().map(|i| self.links[i].1)
    }

    /// `P(y = 1)` when exactly `active` parents are on.
    pub fn prob_active(&self, active: &[usize]) -> Result<f64> {
        let mut p0 = 1.0 - self.leak;
        for &a in active {
            let q = self.link(a).ok_or(Error::UnknownParent { parent: a })?;
            p0 *= 1.0 - q;
        }
        Ok(1.0 - p0)
    }

    /// θ vector: leak first, then links in parent order.
    pub fn to_theta(&self) -> Vec<f64> {
        core::iter::once(self.leak)
            .chain(self.links.iter().map(|&(_, q)| q))
            .map(q_to_theta)
            .collect()
    }

    pub fn from_theta(parents: &[usize], theta: &[f64]) -> Self {
        debug_assert_eq!(parents.len() + 1, theta.len());
        Self {
            leak: theta_to_q(theta[0]),
            links: parents.iter().zip(&theta[1..]).map(|(&p, &t)| (p, theta_to_q(t))).collect(),
        }
    }
}

#[inline]
pub fn q_to_theta(q: f64) -> f64 {
    -ln_1p(-q)
}

#[inline]
pub fn theta_to_q(theta: f64) -> f64 {
    if theta == 0.0 {
        0.0
    } else {
        -exp_m1(-theta)
    }
}

pub fn noisyor_prob_active(params: &NoisyOrParams, active_parents: &[usize]) -> Result<f64> {
    params.prob_active(active_parents)
}

fn check_binary(data: &Dataset, node: usize) -> Result<()> {
    match data.arity(node) {
        2 => Ok(()),
        arity => Err(Error::NotBinary { node, arity }),
    }
}

/// Row-by-row log likelihood of `node` under `params`. May be `-inf`.
pub fn noisyor_loglik(
    params: &NoisyOrParams,
    data: &Dataset,
    node: usize,
    parents: &[usize],
) -> Result<f64> {
    let ps = checked_parents(data, node, parents)?;
    check_binary(data, node)?;
    for &p in &ps {
        check_binary(data, p)?;
        if params.link(p).is_none() {
            return Err(Error::UnknownParent { parent: p });
        }
    }
    if let Some(extra) = params.parents().find(|p| ps.binary_search(p).is_err()) {
        return Err(Error::UnknownParent { parent: extra });
    }
    let y = data.column(node);
    let mut active = Vec::with_capacity(ps.len());
    let mut ll = 0.0;
    for row in 0..data.n_rows() {
        active.clear();
        active.extend(ps.iter().copied().filter(|&p| data.column(p)[row] == 1));
        let p1 = params.prob_active(&active)?;
        ll += if y[row] == 1 { ln(p1) } else { ln(1.0 - p1) };
    }
    Ok(ll)
}

#[derive(Debug, Clone)]
struct Pattern {
    /// Active coordinates; always starts with 0 (the leak).
    active: Vec<u32>,
    y: bool,
    weight: f64,
}

/// The noisy-OR objective of one family with identical rows merged.
#[derive(Debug, Clone)]
pub struct NoisyOrDesign {
    parents: Vec<usize>,
    patterns: Vec<Pattern>,
    rows: usize,
}

impl NoisyOrDesign {
    pub fn new(data: &Dataset, node: usize, parents: &[usize]) -> Result<Self> {
        let ps = checked_parents(data, node, parents)?;
        check_binary(data, node)?;
        for &p in &ps {
            check_binary(data, p)?;
        }
        let y = data.column(node);
        let mut merged: BTreeMap<(Vec<u32>, bool), usize> = BTreeMap::new();
        for row in 0..data.n_rows() {
            let mut active = vec![0u32];
            for (j, &p) in ps.iter().enumerate() {
                if data.column(p)[row] == 1 {
                    active.push(j as u32 + 1);
                }
            }
            *merged.entry((active, y[row] == 1)).or_default() += 1;
        }
        let patterns = merged
            .into_iter()
            .map(|((active, y), w)| Pattern { active, y, weight: w as f64 })
            .collect();
        Ok(Self { parents: ps, patterns, rows: data.n_rows() })
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn dim(&self) -> usize {
        self.parents.len() + 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    fn eta(theta: &[f64], active: &[u32]) -> f64 {
        active.iter().map(|&i| theta[i as usize]).sum()
    }

    /// Negative log likelihood at `theta`; `+inf` where an observed `y = 1`
    /// has zero activation.
    pub fn neg_loglik(&self, theta: &[f64]) -> f64 {
        let mut f = 0.0;
        for pat in &self.patterns {
            let eta = Self::eta(theta, &pat.active);
            if pat.y {
                // −ln(1 − e^{−η})
                let p1 = -exp_m1(-eta);
                if p1 <= 0.0 {
                    return f64::INFINITY;
                }
                f -= pat.weight * ln(p1);
            } else {
                f += pat.weight * eta;
            }
        }
        f
    }

    /// Analytic gradient of [`Self::neg_loglik`].
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        for pat in &self.patterns {
            let c = if pat.y {
                let eta = Self::eta(theta, &pat.active);
                if eta <= 0.0 {
                    return Err(Error::InfiniteGradient);
                }
                // e^{−η} / (1 − e^{−η}) = 1 / (e^η − 1)
                -pat.weight / exp_m1(eta)
            } else {
                pat.weight
            };
            for &i in &pat.active {
                g[i as usize] += c;
            }
        }
        Ok(g)
    }

    /// Hessian (dense, row-major); only `y = 1` rows contribute.
    pub fn hessian(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d * d];
        for pat in self.patterns.iter().filter(|p| p.y) {
            let s = 1.0 / exp_m1(Self::eta(theta, &pat.active));
            let c = pat.weight * (s + s * s);
            if !(c > 0.0) || !c.is_finite() {
                continue;
            }
            for &i in &pat.active {
                for &j in &pat.active {
                    h[i as usize * d + j as usize] += c;
                }
            }
        }
        h
    }

    fn positive_fraction(&self) -> f64 {
        let ones: f64 = self.patterns.iter().filter(|p| p.y).map(|p| p.weight).sum();
        ones / self.rows as f64
    }
}

pub fn noisyor_gradient(
    theta: &[f64],
    data: &Dataset,
    node: usize,
    parents: &[usize],
) -> Result<Vec<f64>> {
    let design = NoisyOrDesign::new(data, node, parents)?;
    if theta.len() != design.dim() || theta.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidConfig("theta must have one entry >= 0 per link plus the leak".into()));
    }
    design.gradient(theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub theta_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, theta_max: THETA_MAX }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOrFit {
    pub params: NoisyOrParams,
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub projected_grad_norm: f64,
}

/// Max-norm of the projected gradient on the box `[0, θ_max]^d`.
pub fn projected_grad_norm(theta: &[f64], grad: &[f64], theta_max: f64) -> f64 {
    theta
        .iter()
        .zip(grad)
        .map(|(&x, &g)| {
            if (x <= 0.0 && g > 0.0) || (x >= theta_max && g < 0.0) {
                0.0
            } else {
                g.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Solve `(H + λI) d = −g` by Cholesky, raising `λ` until it factors.
fn damped_newton(h: &[f64], g: &[f64], free: &[usize], d: usize) -> Vec<f64> {
    let m = free.len();
    let scale = free.iter().map(|&i| h[i * d + i]).fold(0.0, f64::max).max(1.0);
    let mut lambda = 1e-12 * scale;
    loop {
        let mut l = vec![0.0; m * m];
        let mut ok = true;
        'fact: for a in 0..m {
            for b in 0..=a {
                let mut s = h[free[a] * d + free[b]] + if a == b { lambda } else { 0.0 };
                for k in 0..b {
                    s -= l[a * m + k] * l[b * m + k];
                }
                if a == b {
                    if !(s > 0.0) {
                        ok = false;
                        break 'fact;
                    }
                    l[a * m + a] = crate::math::sqrt(s);
                } else {
                    l[a * m + b] = s / l[b * m + b];
                }
            }
        }
        if ok {
            let mut z = vec![0.0; m];
            for a in 0..m {
                let mut s = -g[free[a]];
                for k in 0..a {
                    s -= l[a * m + k] * z[k];
                }
                z[a] = s / l[a * m + a];
            }
            for a in (0..m).rev() {
                let mut s = z[a];
                for k in a + 1..m {
                    s -= l[k * m + a] * z[k];
                }
                z[a] = s / l[a * m + a];
            }
            return z;
        }
        lambda *= 100.0;
    }
}

/// Maximum-likelihood noisy-OR parameters by projected Newton on the box
/// `[0, θ_max]^d`, stopped when the projected gradient max-norm is `≤ tol`.
pub fn fit_design(design: &NoisyOrDesign, opts: &FitOptions) -> Result<NoisyOrFit> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be > 0".into()));
    }
    let d = design.dim();
    let theta_max = opts.theta_max;
    let ybar = design.positive_fraction().clamp(1e-3, 0.999);
    let mut x = vec![0.1; d];
    x[0] = q_to_theta(ybar);
    let mut f = design.neg_loglik(&x);
    let project = |v: f64| v.clamp(0.0, theta_max);
    let mut pg_norm = f64::INFINITY;
    let mut iterations = opts.max_iter;

    for iter in 0..opts.max_iter {
        let g = design.gradient(&x)?;
        pg_norm = projected_grad_norm(&x, &g, theta_max);
        if pg_norm <= opts.tol {
            let params = NoisyOrParams::from_theta(design.parents(), &x);
            return Ok(NoisyOrFit {
                params,
                theta: x,
                loglik: -f,
                iterations: iter,
                projected_grad_norm: pg_norm,
            });
        }
        // Bertsekas' ε-active set.
        let width: f64 = x
            .iter()
            .zip(&g)
            .map(|(&xi, &gi)| (xi - project(xi - gi)).abs())
            .fold(0.0, f64::max);
        let eps = width.min(1e-6);
        let mut active: Vec<bool> = x
            .iter()
            .zip(&g)
            .map(|(&xi, &gi)| (xi <= eps && gi > 0.0) || (xi >= theta_max - eps && gi < 0.0))
            .collect();
        let h = design.hessian(&x);
        let mut dir = vec![0.0; d];
        let mut free: Vec<usize>;
        let mut rhs = vec![0.0; d];
        loop {
            free = (0..d).filter(|&i| !active[i]).collect();
            // Active coordinates move onto their bound; the free ones take
            // the Newton step given that move.
            for i in 0..d {
                dir[i] = match active[i] {
                    false => 0.0,
                    true if x[i] <= eps => -x[i],
                    true => theta_max - x[i],
                };
            }
            if free.is_empty() {
                break;
            }
            for &i in &free {
                rhs[i] = g[i] + (0..d).filter(|&j| active[j]).map(|j| h[i * d + j] * dir[j]).sum::<f64>();
            }
            let step = damped_newton(&h, &rhs, &free, d);
            for (&i, s) in free.iter().zip(step) {
                dir[i] = s;
            }
            // A Newton step that leaves the box at a bound coordinate
            // (typical along near-collinear parents) is re-solved with that
            // coordinate on its bound.
            let blocked: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&i| (x[i] <= eps && dir[i] < 0.0) || (x[i] >= theta_max - eps && dir[i] > 0.0))
                .collect();
            if blocked.is_empty() {
                break;
            }
            for i in blocked {
                active[i] = true;
            }
        }

        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; d];
        while t > 1e-16 {
            for i in 0..d {
                trial[i] = project(x[i] + t * dir[i]);
            }
            let ft = design.neg_loglik(&trial);
            let mut decrease = 0.0;
            for i in 0..d {
                decrease += if active[i] { g[i] * (x[i] - trial[i]) } else { -t * g[i] * dir[i] };
            }
            if ft.is_finite() && f - ft >= 1e-4 * decrease && ft <= f {
                accepted = true;
                break;
            }
            // Near the optimum the decrease drops below the rounding level of
            // `f`; judge the step by the projected gradient instead.
            if ft.is_finite() && (f - ft).abs() <= 1e3 * f64::EPSILON * f.abs().max(1.0) {
                if let Ok(gt) = design.gradient(&trial) {
                    if projected_grad_norm(&trial, &gt, theta_max) < pg_norm {
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // Diagonally scaled projected gradient: still a descent direction
            // when the Newton system is badly conditioned.
            let scale = (0..d).map(|i| h[i * d + i]).fold(0.0, f64::max).max(1.0);
            let mut t = 1.0;
            while t > 1e-12 {
                for i in 0..d {
                    trial[i] = project(x[i] - t * g[i] / h[i * d + i].max(1e-12 * scale));
                }
                let ft = design.neg_loglik(&trial);
                if ft.is_finite() && ft < f {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !accepted {
            // Projected steepest descent as a last resort.
            let mut t = 1.0 / g.iter().map(|v| v.abs()).fold(1.0, f64::max);
            while t > 1e-20 {
                for i in 0..d {
                    trial[i] = project(x[i] - t * g[i]);
                }
                let ft = design.neg_loglik(&trial);
                if ft.is_finite() && ft < f {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !accepted || trial == x {
            // No representable step lowers the objective. That is convergence
            // when the Newton decrease predicted on the free coordinates is
            // already below the rounding level of `f`; otherwise the fit is stuck.
            let predicted: f64 = -free.iter().map(|&i| g[i] * dir[i]).sum::<f64>();
            if predicted <= 1e3 * f64::EPSILON * f.abs().max(1.0) {
                let params = NoisyOrParams::from_theta(design.parents(), &x);
                return Ok(NoisyOrFit { params, theta: x, loglik: -f, iterations: iter, projected_grad_norm: pg_norm });
            }
            iterations = iter;
            break;
        }
        x.copy_from_slice(&trial);
        f = design.neg_loglik(&x);
    }
    Err(Error::NonConvergence {
        iterations,
        grad_norm: pg_norm,
        best: Box::new(NoisyOrParams::from_theta(design.parents(), &x)),
    })
}

pub fn fit_noisyor_ml(
    data: &Dataset,
    node: usize,
    parents: &[usize],
    tol: f64,
) -> Result<NoisyOrFit> {
    let design = NoisyOrDesign::new(data, node, parents)?;
    fit_design(&design, &FitOptions { tol, ..FitOptions::default() })
}

/// Maximized noisy-OR log likelihood minus `(d/2) ln n`, `d = |parents| + 1`.
pub fn noisyor_bic_family(data: &Dataset, node: usize, parents: &[usize], tol: f64) -> Result<f64> {
    let fit = fit_noisyor_ml(data, node, parents, tol)?;
    let d = (parents.len() + 1) as f64;
    Ok(fit.loglik - 0.5 * d * ln(data.n_rows() as f64))
}
