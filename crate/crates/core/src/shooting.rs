//! Periodic and Neumann solutions by shooting: multistart Newton on the
//! Poincaré displacement, code classification over the positivity humps,
//! a posteriori verification and winding numbers of the displacement map.
//!
//! Newton works on a multiple-shooting discretisation (node times and node
//! states). Single shooting is the special case of one segment per period.
//! Large `μ` is reached by continuation from a moderate value, splitting
//! segments whose flow Jacobian grows too much.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrator::{Boundary, ProblemSpec, Tolerances, Trajectory};
use crate::subharmonic::minimal_period_multiple;

/// Multistart search parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Log-spaced `u₀` grid (periodic mode).
    pub u_range: (f64, f64),
    pub u_count: usize,
    /// `y₀` grid (periodic mode), denser near 0.
    pub y_range: (f64, f64),
    pub y_count: usize,
    /// Linear `u₀` sweep with `y₀ = 0` (Neumann mode).
    pub neumann_range: (f64, f64),
    pub neumann_count: usize,
    pub dedup_tol: f64,
    pub newton_max_iter: usize,
    /// Relative: `‖r‖∞ ≤ residual_tol · max_j |x_j|`.
    pub residual_tol: f64,
    pub damping_halvings: usize,
    pub tol: Tolerances,
    /// Hump maxima above this count as large. `None` picks the widest gap
    /// among the maxima of all records found.
    pub code_threshold: Option<f64>,
    /// Run coded-seed continuation when `2^{mk} - 1` is at most this.
    pub coded_words: usize,
    /// `μ` at which coded seeds are harvested; defaults to `min(μ, 7μ#)`.
    pub continuation_start: Option<f64>,
    /// Segments per period for coded seeds and Neumann records.
    pub nodes_per_period: usize,
    /// Split a segment when an entry of its flow Jacobian exceeds this.
    pub split_threshold: f64,
    /// Records whose sup norm is below this are the trivial solution.
    pub trivial_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            u_range: (1e-4, 2.0),
            u_count: 24,
            y_range: (-5.0, 5.0),
            y_count: 16,
            neumann_range: (1e-3, 1.0),
            neumann_count: 200,
            dedup_tol: 1e-6,
            newton_max_iter: 40,
            residual_tol: 1e-10,
            damping_halvings: 12,
            tol: Tolerances {
                guard: 1e4,
                ..Tolerances::with_tol(1e-11, 1e-18)
            },
            code_threshold: None,
            coded_words: 63,
            continuation_start: None,
            nodes_per_period: 16,
            split_threshold: 20.0,
            trivial_tol: 1e-8,
        }
    }
}

impl SearchConfig {
    /// Upper end of the `u₀` grid at `1.2 R*`.
    pub fn with_r_star(mut self, r_star: f64) -> Self {
        self.u_range.1 = 1.2 * r_star;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.u_count > 0
            && self.y_count > 0
            && self.neumann_count > 1
            && self.u_range.0 > 0.0
            && self.u_range.0 < self.u_range.1
            && self.y_range.0 <= self.y_range.1
            && self.neumann_range.0 < self.neumann_range.1
            && self.dedup_tol > 0.0
            && self.residual_tol > 0.0
            && self.newton_max_iter > 0
            && self.nodes_per_period > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("search grid counts, ranges and tolerances must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Closure {
    Periodic,
    Neumann,
}

/// Multiple-shooting unknowns: node times `t_0 < … < t_n` and the states at
/// `t_0, …, t_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shooting {
    pub nodes: Vec<f64>,
    pub states: Vec<[f64; 2]>,
}

impl Shooting {
    /// Node states taken from the flow of `x0`.
    pub fn from_flow(p: &ProblemSpec, x0: [f64; 2], nodes: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let mut states = vec![x0];
        for j in 1..nodes.len() - 1 {
            let prev = states[j - 1];
            states.push(p.flow(prev, nodes[j - 1], nodes[j], tol)?);
        }
        Ok(Shooting { nodes, states })
    }

    pub fn segments(&self) -> usize {
        self.states.len()
    }

    pub fn scale(&self) -> f64 {
        self.states
            .iter()
            .map(|x| x[0].abs() + x[1].abs())
            .fold(0.0, f64::max)
    }

    /// Concatenated per-segment trajectories.
    pub fn trajectory(&self, p: &ProblemSpec, tol: &Tolerances) -> Result<Trajectory> {
        let parts = (0..self.segments())
            .into_par_iter()
            .map(|j| p.integrate(self.states[j], self.nodes[j], self.nodes[j + 1], tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory::concat(parts))
    }

    /// Repeat a periodic discretisation over `times` consecutive copies.
    pub fn tile(&self, times: usize) -> Shooting {
        let span = self.nodes[self.nodes.len() - 1] - self.nodes[0];
        let mut nodes = Vec::new();
        let mut states = Vec::new();
        for c in 0..times {
            let off = c as f64 * span;
            nodes.extend(self.nodes[..self.segments()].iter().map(|t| t + off));
            states.extend_from_slice(&self.states);
        }
        nodes.push(self.nodes[0] + times as f64 * span);
        Shooting { nodes, states }
    }

    /// Restart a periodic discretisation at node time `t` (which must be a
    /// node), keeping the time origin at 0.
    pub fn rotate_to(&self, t: f64) -> Option<Shooting> {
        let span = self.nodes[self.nodes.len() - 1] - self.nodes[0];
        let n = self.segments();
        let idx = self.nodes[..n]
            .iter()
            .position(|&x| (x - t).abs() <= 1e-12 * (1.0 + span))?;
        let mut nodes = Vec::with_capacity(n + 1);
        let mut states = Vec::with_capacity(n);
        for j in 0..n {
            let i = (idx + j) % n;
            let base = if i >= idx { self.nodes[i] - t } else { self.nodes[i] + span - t };
            nodes.push(base);
            states.push(self.states[i]);
        }
        nodes[0] = 0.0;
        nodes.push(span);
        Some(Shooting { nodes, states })
    }

    /// Insert the midpoint of every segment whose Jacobian entry exceeds
    /// `threshold`.
    fn split(&self, p: &ProblemSpec, norms: &[f64], threshold: f64, tol: &Tolerances) -> Result<Shooting> {
        let mut nodes = vec![self.nodes[0]];
        let mut states = Vec::new();
        for j in 0..self.segments() {
            states.push(self.states[j]);
            if norms[j] > threshold {
                let mid = 0.5 * (self.nodes[j] + self.nodes[j + 1]);
                states.push(p.flow(self.states[j], self.nodes[j], mid, tol)?);
                nodes.push(mid);
            }
            nodes.push(self.nodes[j + 1]);
        }
        Ok(Shooting { nodes, states })
    }
}

fn n_unknowns(closure: Closure, n: usize) -> usize {
    match closure {
        Closure::Periodic => 2 * n,
        Closure::Neumann => 2 * n - 1,
    }
}

fn index(closure: Closure, j: usize, comp: usize) -> Option<usize> {
    match closure {
        Closure::Periodic => Some(2 * j + comp),
        Closure::Neumann if j == 0 => (comp == 0).then_some(0),
        Closure::Neumann => Some(2 * j - 1 + comp),
    }
}

struct Evaluation {
    r: DVector<f64>,
    jac: Option<DMatrix<f64>>,
    norms: Vec<f64>,
}

fn evaluate(p: &ProblemSpec, sh: &Shooting, closure: Closure, tol: &Tolerances, with_jac: bool) -> Result<Evaluation> {
    let n = sh.segments();
    let flows = (0..n)
        .into_par_iter()
        .map(|j| {
            let (x, t0, t1) = (sh.states[j], sh.nodes[j], sh.nodes[j + 1]);
            if with_jac {
                p.flow_with_jacobian(x, t0, t1, tol)
            } else {
                p.flow(x, t0, t1, tol).map(|e| (e, [[0.0; 2]; 2]))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = n_unknowns(closure, n);
    let mut r = DVector::zeros(dim);
    let mut jac = with_jac.then(|| DMatrix::zeros(dim, dim));
    let mut norms = vec![0.0; n];
    for (j, (end, jj)) in flows.iter().enumerate() {
        norms[j] = jj.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = j + 1 == n;
        if last && closure == Closure::Neumann {
            let row = dim - 1;
            r[row] = end[1];
            if let Some(m) = jac.as_mut() {
                for l in 0..2 {
                    if let Some(c) = index(closure, j, l) {
                        m[(row, c)] += jj[1][l];
                    }
                }
            }
            continue;
        }
        let next = if last { 0 } else { j + 1 };
        for i in 0..2 {
            let row = 2 * j + i;
            r[row] = end[i] - sh.states[next][i];
            if let Some(m) = jac.as_mut() {
                for l in 0..2 {
                    if let Some(c) = index(closure, j, l) {
                        m[(row, c)] += jj[i][l];
                    }
                }
                if let Some(c) = index(closure, next, i) {
                    m[(row, c)] -= 1.0;
                }
            }
        }
    }
    Ok(Evaluation { r, jac, norms })
}

fn apply(sh: &Shooting, closure: Closure, dx: &DVector<f64>, lam: f64) -> Shooting {
    let mut out = sh.clone();
    for j in 0..sh.segments() {
        for i in 0..2 {
            if let Some(c) = index(closure, j, i) {
                out.states[j][i] += lam * dx[c];
            }
        }
    }
    out
}

/// Converged discretisation with its absolute residual and per-segment
/// Jacobian sizes.
struct Converged {
    sh: Shooting,
    residual: f64,
    norms: Vec<f64>,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve `a x = b` for a matrix that is banded once its first `border`
/// columns are moved to the end, by Gaussian elimination with partial
/// pivoting restricted to the band and the trailing dense columns.
fn solve_bordered(a: &DMatrix<f64>, b: &DVector<f64>, border: usize) -> Option<DVector<f64>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return None;
    }
    let mut m = DMatrix::from_fn(n, n, |i, j| a[(i, (j + border) % n)]);
    let mut rhs = b.clone();
    let core = n - border.min(n);
    let (mut kl, mut ku) = (0usize, 0usize);
    for j in 0..core {
        for i in 0..n {
            if m[(i, j)] != 0.0 {
                kl = kl.max(i.saturating_sub(j));
                ku = ku.max(j.saturating_sub(i));
            }
        }
    }
    let reach = ku + kl;
    let cols = |c: usize| {
        let hi = (c + reach).min(n - 1);
        (c + 1..=hi).chain((hi + 1).max(core)..n)
    };
    for c in 0..n {
        let last = if c >= core { n - 1 } else { (c + kl).min(n - 1) };
        let piv = (c..=last).max_by(|&x, &y| m[(x, c)].abs().total_cmp(&m[(y, c)].abs()))?;
        if m[(piv, c)] == 0.0 || !m[(piv, c)].is_finite() {
            return None;
        }
        if piv != c {
            m.swap_rows(piv, c);
            rhs.swap_rows(piv, c);
        }
        let d = m[(c, c)];
        for r in c + 1..=last {
            let f = m[(r, c)] / d;
            if f == 0.0 {
                continue;
            }
            m[(r, c)] = 0.0;
            for j in cols(c) {
                let v = m[(c, j)];
                m[(r, j)] -= f * v;
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut x = DVector::zeros(n);
    for c in (0..n).rev() {
        let s: f64 = cols(c).map(|j| m[(c, j)] * x[j]).sum();
        x[c] = (rhs[c] - s) / m[(c, c)];
    }
    Some(DVector::from_fn(n, |j, _| x[(j + n - border.min(n)) % n]))
}

fn newton(p: &ProblemSpec, mut sh: Shooting, closure: Closure, sc: &SearchConfig) -> Option<Converged> {
    if closure == Closure::Neumann {
        sh.states[0][1] = 0.0;
    }
    for _ in 0..sc.newton_max_iter {
        let ev = evaluate(p, &sh, closure, &sc.tol, true).ok()?;
        let nr = inf_norm(&ev.r);
        let scale = sh.scale();
        if !nr.is_finite() || scale < sc.trivial_tol {
            return None;
        }
        if nr <= sc.residual_tol * scale {
            return Some(Converged { sh, residual: nr, norms: ev.norms });
        }
        let border = if closure == Closure::Periodic { 2 } else { 0 };
        let dx = solve_bordered(&ev.jac?, &(-&ev.r), border)?;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..=sc.damping_halvings {
            let trial = apply(&sh, closure, &dx, lam);
            if let Ok(e) = evaluate(p, &trial, closure, &sc.tol, false) {
                if inf_norm(&e.r) < nr {
                    sh = trial;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            return (nr <= 100.0 * sc.residual_tol * scale).then_some(Converged {
                sh,
                residual: nr,
                norms: ev.norms,
            });
        }
    }
    None
}

/// Track a solution from `sh` (a solution or seed at `mu0`) to the `μ` of
/// `p`, with adaptive steps in `log μ` and segment splitting.
fn continuation(p: &ProblemSpec, sh: Shooting, mu0: f64, closure: Closure, sc: &SearchConfig) -> Option<Converged> {
    let mut good = newton(&p.with_mu(mu0), sh, closure, sc)?;
    let target = p.mu;
    let mut mu = mu0;
    let mut fac: f64 = 1.5;
    let up = target >= mu0;
    while (up && mu < target) || (!up && mu > target) {
        let next = if up { (mu * fac).min(target) } else { (mu / fac).max(target) };
        let pm = p.with_mu(next);
        match newton(&pm, good.sh.clone(), closure, sc) {
            Some(c) => {
                let sh = if c.norms.iter().any(|&v| v > sc.split_threshold) {
                    c.sh.split(&pm, &c.norms, sc.split_threshold, &sc.tol).ok()?
                } else {
                    c.sh.clone()
                };
                good = Converged { sh, ..c };
                mu = next;
                fac = (fac * 1.5).min(2.0);
            }
            None => {
                fac = fac.sqrt();
                if fac < 1.001 {
                    return None;
                }
            }
        }
    }
    // polish on the final (possibly split) discretisation
    newton(p, good.sh, closure, sc)
}

/// A solution found by a search.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub initial: [f64; 2],
    /// Period multiple (1 for Neumann records).
    pub k: usize,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    #[serde(skip)]
    pub node_states: Vec<[f64; 2]>,
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// Largest node mismatch (and `|u'(T)|` for Neumann records).
    pub residual: f64,
    /// One bit per positivity hump in `[0, kT]`, serialized as e.g. `"10"`.
    #[serde(serialize_with = "bits")]
    pub code: Vec<u8>,
    pub hump_max: Vec<f64>,
    /// Maxima over the negativity intervals.
    pub neg_max: Vec<f64>,
    pub min_period_multiple: usize,
    pub positive: bool,
    pub sup_norm: f64,
    pub min_u: f64,
    pub method: String,
}

fn bits<S: serde::Serializer>(code: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&code.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect::<String>())
}

impl SolutionRecord {
    pub fn code_string(&self) -> String {
        self.code.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }

    pub fn shooting(&self) -> Shooting {
        Shooting {
            nodes: self.nodes.clone(),
            states: self.node_states.clone(),
        }
    }
}

/// Assemble a record from a converged discretisation of `p` (whose boundary
/// fixes `k`). The code is left empty.
pub fn build_record(p: &ProblemSpec, sh: &Shooting, residual: f64, method: &str, tol: &Tolerances) -> Result<SolutionRecord> {
    let traj = sh.trajectory(p, tol)?;
    let fp = p.full_pattern();
    let hump_max = (0..fp.m)
        .map(|i| {
            let (a, b) = fp.positive(i);
            traj.max_on_interval(a, b).1
        })
        .collect();
    let neg_max = (0..fp.m)
        .filter_map(|i| {
            let (a, b) = fp.negative(i);
            (b > a).then(|| traj.max_on_interval(a, b).1)
        })
        .collect();
    let (_, min_u) = traj.min_on_interval(traj.t0(), traj.t1());
    let sup_norm = traj.sup_norm();
    Ok(SolutionRecord {
        initial: sh.states[0],
        k: p.k(),
        nodes: sh.nodes.clone(),
        node_states: sh.states.clone(),
        trajectory: traj,
        residual,
        code: Vec::new(),
        hump_max,
        neg_max,
        min_period_multiple: p.k(),
        positive: min_u > 0.0,
        sup_norm,
        min_u,
        method: method.to_string(),
    })
}

/// State at `kT` from `s0` at 0 (`T` in Neumann mode); `None` marks escape.
pub fn poincare_map(p: &ProblemSpec, s0: [f64; 2], k: usize, tol: &Tolerances) -> Option<[f64; 2]> {
    let horizon = match p.boundary {
        Boundary::Neumann => p.pattern.span,
        Boundary::Periodic { .. } => p.pattern.span * k as f64,
    };
    p.flow(s0, 0.0, horizon, tol).ok()
}

/// Number of times the image of the segment `{(u₀, 0) : lo ≤ u₀ ≤ hi}`
/// crosses the positive `u` axis, sampled at `n + 1` points.
pub fn poincare_axis_crossings(p: &ProblemSpec, lo: f64, hi: f64, n: usize, tol: &Tolerances) -> usize {
    let img: Vec<Option<[f64; 2]>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let u0 = lo + (hi - lo) * i as f64 / n as f64;
            poincare_map(p, [u0, 0.0], 1, tol)
        })
        .collect();
    img.windows(2)
        .filter(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => a[1].signum() * b[1].signum() < 0.0 && a[0] > 0.0 && b[0] > 0.0,
            _ => false,
        })
        .count()
}

/// Geometric midpoint of the widest multiplicative gap among hump maxima,
/// if some gap exceeds a factor 1.5.
pub fn gap_threshold(records: &[SolutionRecord]) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .flat_map(|r| r.hump_max.iter().copied())
        .filter(|x| *x > 0.0)
        .collect();
    v.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64)> = None;
    for w in v.windows(2) {
        let ratio = w[1] / w[0];
        if ratio > 1.5 && best.map_or(true, |(r, _)| ratio > r) {
            best = Some((ratio, (w[0] * w[1]).sqrt()));
        }
    }
    best.map(|b| b.1)
}

/// Set each record's code from its hump maxima: bit 1 above `threshold`.
pub fn assign_codes(records: &mut [SolutionRecord], threshold: f64) {
    for r in records {
        r.code = r.hump_max.iter().map(|&h| u8::from(h > threshold)).collect();
    }
}

/// Code of a record against thresholds `0 < r < R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub code: Vec<u8>,
    /// Whether the maximum over every negativity interval stays below `r`.
    pub negative_below_r: bool,
}

pub fn classify_code(rec: &SolutionRecord, p: &ProblemSpec, r: f64, big_r: f64) -> Result<Classification> {
    if !(0.0 < r && r < big_r) {
        return Err(Error::Domain(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    if !rec.positive {
        return Err(Error::Domain("only positive solutions carry a code".into()));
    }
    let band = 10.0 * p_tol(p) * r.max(1.0);
    let mut code = Vec::with_capacity(rec.hump_max.len());
    for (i, &h) in rec.hump_max.iter().enumerate() {
        if (h - r).abs() <= band {
            return Err(Error::Unclassifiable(format!("hump {} maximum {h} is at the threshold r = {r}", i + 1)));
        }
        if h >= big_r {
            return Err(Error::Unclassifiable(format!("hump {} maximum {h} exceeds R = {big_r}", i + 1)));
        }
        code.push(u8::from(h > r));
    }
    Ok(Classification {
        code,
        negative_below_r: rec.neg_max.iter().all(|&v| v < r),
    })
}

fn p_tol(_p: &ProblemSpec) -> f64 {
    Tolerances::default().rtol
}

/// Outcome of the a posteriori checks on a record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub residual_ok: bool,
    pub positive: bool,
    pub slope_monotone: bool,
    pub endpoint_max: bool,
    pub reintegration_ok: bool,
    /// `None` when no `R*` was supplied.
    pub below_r_star: Option<bool>,
    pub sup_change: f64,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.residual_ok
            && self.positive
            && self.slope_monotone
            && self.endpoint_max
            && self.reintegration_ok
            && self.below_r_star != Some(false)
    }
}

pub const VERIFY_RESIDUAL: f64 = 1e-8;

pub fn verify_solution(rec: &SolutionRecord, p: &ProblemSpec, r_star: Option<f64>) -> Verification {
    let pk = match p.boundary {
        Boundary::Periodic { .. } => p.with_boundary(Boundary::Periodic { k: rec.k }),
        Boundary::Neumann => p.clone(),
    };
    let fp = pk.full_pattern();
    let traj = &rec.trajectory;
    let scale = rec.sup_norm.max(f64::MIN_POSITIVE);
    let mut endpoint_max = true;
    for i in 0..fp.m {
        let (a, b) = fp.negative(i);
        if b <= a {
            continue;
        }
        let inner = traj.max_on_interval(a, b).1;
        let ends = traj.eval(a)[0].max(traj.eval(b)[0]);
        endpoint_max &= inner <= ends + 1e-9 * scale;
    }
    let sup_change = rec
        .shooting()
        .trajectory(&pk, &Tolerances::default().tighter(100.0))
        .map(|t| (t.sup_norm() - rec.sup_norm).abs())
        .unwrap_or(f64::INFINITY);
    Verification {
        residual_ok: rec.residual <= VERIFY_RESIDUAL * scale,
        positive: rec.positive && rec.min_u > 0.0,
        slope_monotone: traj.slope_monotone(&fp, p.c, 1e-9),
        endpoint_max,
        reintegration_ok: sup_change < 1e-6,
        below_r_star: r_star.map(|r| rec.sup_norm < r),
        sup_change,
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Symmetric grid denser near `y = 0` when the range straddles it.
fn y_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(lo < 0.0 && hi > 0.0) || n < 3 {
        return lin_grid(lo, hi, n);
    }
    let a: f64 = 3.0;
    lin_grid(-1.0, 1.0, n)
        .into_iter()
        .map(|s| {
            let v = (a * s).sinh() / a.sinh();
            if v < 0.0 {
                -lo * v
            } else {
                hi * v
            }
        })
        .collect()
}

fn uniform_nodes(span: f64, segments: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..segments).map(|i| span * i as f64 / segments as f64).collect();
    v.push(span);
    v
}

fn periodic_problem(p: &ProblemSpec, k: usize) -> Result<ProblemSpec> {
    match p.boundary {
        Boundary::Periodic { .. } => Ok(p.with_boundary(Boundary::Periodic { k })),
        Boundary::Neumann => Err(Error::Config("periodic search needs a periodic problem".into())),
    }
}

/// Plain multistart over the `(u₀, y₀)` grid with one segment per period.
fn grid_solutions(p: &ProblemSpec, k: usize, sc: &SearchConfig) -> Vec<Converged> {
    let span = p.pattern.span;
    let starts: Vec<[f64; 2]> = log_grid(sc.u_range.0, sc.u_range.1, sc.u_count)
        .into_iter()
        .flat_map(|u| y_grid(sc.y_range.0, sc.y_range.1, sc.y_count).into_iter().map(move |y| [u, y]))
        .collect();
    let nodes = uniform_nodes(span * k as f64, k);
    starts
        .into_par_iter()
        .filter_map(|x0| {
            let sh = Shooting::from_flow(p, x0, nodes.clone(), &sc.tol).ok()?;
            newton(p, sh, Closure::Periodic, sc)
        })
        .filter(|c| c.sh.scale() > sc.trivial_tol)
        .collect()
}

/// Per-hump profiles for coded seeds: for hump `i`, a `T`-periodic solution
/// whose maximum on hump `i` is as large as possible (empty when the grid
/// finds none).
#[derive(Debug, Clone)]
pub struct SeedBase {
    pub profiles: Vec<Trajectory>,
    /// Hump profiles vanishing at the hump ends, for seeding directly at
    /// large `μ`.
    pub dirichlet: Option<Vec<Trajectory>>,
}

/// Seed for `word`: on hump `i` of period `b` (the hump and the negativity
/// interval after it) follow the profile of hump `i` when the bit is set and
/// a 0.05 multiple of it otherwise.
pub fn coded_seed(p: &ProblemSpec, base: &SeedBase, word: &[u8], nodes_per_period: usize) -> Shooting {
    let pat = &p.pattern;
    let span = pat.span;
    let k = word.len() / pat.m;
    let nodes = uniform_nodes(span * k as f64, nodes_per_period * k);
    let states = nodes[..nodes.len() - 1]
        .iter()
        .map(|&t| {
            let b = ((t / span + 1e-12).floor() as usize).min(k - 1);
            let tt = t - b as f64 * span;
            let i = (0..pat.m).rev().find(|&i| pat.sigma[i] <= tt + 1e-12).unwrap_or(0);
            let s = if word[b * pat.m + i] == 1 { 1.0 } else { 0.05 };
            let x = base.profiles[i].eval_periodic(tt);
            [s * x[0], s * x[1]]
        })
        .collect();
    Shooting { nodes, states }
}

/// Positive `T`-periodic grid solutions at `μ₀`, condensed into per-hump
/// profiles.
pub fn seed_base(p: &ProblemSpec, mu0: f64, sc: &SearchConfig) -> Option<SeedBase> {
    let p1 = p.with_mu(mu0).with_boundary(Boundary::Periodic { k: 1 });
    let sols: Vec<Converged> = grid_solutions(&p1, 1, sc);
    let records: Vec<SolutionRecord> = sols
        .into_par_iter()
        .filter_map(|c| build_record(&p1, &c.sh, c.residual, "grid", &sc.tol).ok())
        .filter(|r| r.positive)
        .collect();
    let dirichlet = dirichlet_profiles(p, &sc.tol);
    if records.is_empty() && dirichlet.is_none() {
        return None;
    }
    let profiles = (0..p.pattern.m)
        .filter_map(|i| {
            records
                .iter()
                .max_by(|a, b| a.hump_max[i].total_cmp(&b.hump_max[i]))
                .map(|r| r.trajectory.clone())
        })
        .collect();
    Some(SeedBase { profiles, dirichlet })
}

/// Positive solution of the hump equation on `[σ_i, τ_i]` vanishing at both
/// ends (for Neumann problems, with zero slope instead at an end of
/// `[0, T]`), the one with the largest initial value or slope.
fn dirichlet_profile(p: &ProblemSpec, i: usize, tol: &Tolerances) -> Option<Trajectory> {
    let (s, t) = p.pattern.positive(i);
    let len = t - s;
    let neumann = p.boundary == Boundary::Neumann;
    let (at_start, at_end) = (neumann && s <= 0.0, neumann && t >= p.pattern.span);
    if at_start && at_end {
        return None;
    }
    let shoot = |v: f64| {
        let x0 = if at_start { [v, 0.0] } else { [0.0, v] };
        p.integrate(x0, s, t, tol).ok()
    };
    let from = if at_start { s } else { s + 0.05 * len };
    let stays = |v: f64| {
        shoot(v).is_some_and(|tr| {
            let end = tr.end_state();
            let closes = if at_end { end[1] >= 0.0 } else { end[0] > 0.0 };
            closes && tr.min_on_interval(from, t).1 > 0.0
        })
    };
    let vs = log_grid(1e-4, 1e4, 81);
    let flags: Vec<bool> = vs.iter().map(|&v| stays(v)).collect();
    let j = (0..vs.len() - 1).rev().find(|&j| flags[j] != flags[j + 1])?;
    let (mut lo, mut hi) = (vs[j], vs[j + 1]);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if stays(mid) == flags[j] {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shoot(if flags[j] { lo } else { hi })
}

/// Seed for `word` at the `μ` of `p`: hump profiles from [`dirichlet_profile`]
/// (scaled by 0.05 for zero bits) and zero on the negativity intervals,
/// which get enough nodes to keep each segment's growth moderate.
fn dirichlet_seed(p: &ProblemSpec, profiles: &[Trajectory], word: &[u8], nodes_per_period: usize) -> Shooting {
    let pat = &p.pattern;
    let span = pat.span;
    let k = word.len() / pat.m;
    let per = |len: f64| ((nodes_per_period as f64 * len / span).ceil() as usize).max(2);
    let mut nodes = Vec::new();
    let mut states = Vec::new();
    let zero_run = |nodes: &mut Vec<f64>, states: &mut Vec<[f64; 2]>, n0: f64, n1: f64, off: f64| {
        let len = n1 - n0;
        if len <= 0.0 {
            return;
        }
        let amax = lin_grid(n0, n1, 33).into_iter().map(|t| -p.weight_at(t)).fold(0.0, f64::max);
        let n = per(len).max((len * (p.mu * amax).sqrt() / 3.0).ceil() as usize);
        for j in 0..n {
            nodes.push(n0 + len * j as f64 / n as f64 + off);
            states.push([0.0, 0.0]);
        }
    };
    for b in 0..k {
        let off = b as f64 * span;
        if pat.sigma[0] > 0.0 {
            zero_run(&mut nodes, &mut states, 0.0, pat.sigma[0], off);
        }
        for i in 0..pat.m {
            let s = if word[b * pat.m + i] == 1 { 1.0 } else { 0.05 };
            let (h0, h1) = pat.positive(i);
            let n = per(h1 - h0);
            for j in 0..n {
                let t = h0 + (h1 - h0) * j as f64 / n as f64;
                let x = profiles[i].eval(t);
                nodes.push(t + off);
                states.push([s * x[0], s * x[1]]);
            }
            let (n0, n1) = pat.negative(i);
            zero_run(&mut nodes, &mut states, n0, n1, off);
        }
    }
    nodes.push(k as f64 * span);
    Shooting { nodes, states }
}

/// Hump profiles for [`dirichlet_seed`], one per hump of `p`.
fn dirichlet_profiles(p: &ProblemSpec, tol: &Tolerances) -> Option<Vec<Trajectory>> {
    (0..p.pattern.m).map(|i| dirichlet_profile(p, i, tol)).collect()
}

/// `min(μ, 7 μ#)` unless configured.
pub fn continuation_start(p: &ProblemSpec, sc: &SearchConfig) -> f64 {
    sc.continuation_start.unwrap_or_else(|| {
        let breaks = p.weight.discontinuities(0.0, p.weight.period);
        let pos = p.weight.integral_positive(0.0, p.weight.period, &breaks);
        let neg = p.weight.integral_negative(0.0, p.weight.period, &breaks);
        let sharp = if neg > 0.0 { pos / neg } else { p.mu };
        p.mu.min(7.0 * sharp)
    })
}

/// Whether the hump maxima of `sh` separate the one bits of `word` from the
/// zero bits, with every one bit at least a tenth of the sup norm.
fn realises(p: &ProblemSpec, sh: &Shooting, word: &[u8], tol: &Tolerances) -> bool {
    let Ok(traj) = sh.trajectory(p, tol) else {
        return false;
    };
    let fp = p.full_pattern();
    let (mut ones, mut zeros) = (f64::INFINITY, 0.0f64);
    for (i, &b) in word.iter().enumerate() {
        let (lo, hi) = fp.positive(i);
        let m = traj.max_on_interval(lo, hi).1;
        if b == 1 {
            ones = ones.min(m);
        } else {
            zeros = zeros.max(m);
        }
    }
    ones > zeros && ones > 0.1 * traj.sup_norm() && traj.min_on_interval(traj.t0(), traj.t1()).1 > 0.0
}

/// Solve for the coded seed of `word` at `μ` of `p` (periodic with
/// `k = |word| / m`): continuation of the grid-profile seed from `mu0`, then
/// Newton on the vanishing-profile seed directly at `μ`.
pub fn solve_coded(p: &ProblemSpec, base: &SeedBase, word: &[u8], mu0: f64, sc: &SearchConfig) -> Option<(Shooting, f64)> {
    if !base.profiles.is_empty() {
        let seed = coded_seed(p, base, word, sc.nodes_per_period);
        let c = if (p.mu - mu0).abs() <= 1e-12 * p.mu {
            newton(p, seed, Closure::Periodic, sc)
        } else {
            continuation(p, seed, mu0, Closure::Periodic, sc)
        };
        if let Some(c) = c.filter(|c| realises(p, &c.sh, word, &sc.tol)) {
            return Some((c.sh, c.residual));
        }
    }
    let profiles = base.dirichlet.as_ref()?;
    let c = newton(p, dirichlet_seed(p, profiles, word, sc.nodes_per_period), Closure::Periodic, sc)?;
    Some((c.sh, c.residual))
}

/// All binary words of length `n` except the zero word.
fn nonzero_words(n: usize) -> Vec<Vec<u8>> {
    (1u64..(1u64 << n))
        .map(|v| (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect())
        .collect()
}

fn same_solution(a: &SolutionRecord, b: &SolutionRecord, tol: f64) -> bool {
    let scale = 1.0 + a.sup_norm.max(b.sup_norm);
    let d = (a.initial[0] - b.initial[0]).hypot(a.initial[1] - b.initial[1]);
    if d > 1e-3 * scale || (a.sup_norm - b.sup_norm).abs() > tol * scale {
        return false;
    }
    let close = |x: &Trajectory, y: &Trajectory| {
        x.steps()
            .iter()
            .flat_map(|s| [s.t, s.t + 0.5 * s.h])
            .all(|t| (x.eval(t)[0] - y.eval_periodic(t)[0]).abs() < tol * scale)
    };
    close(&a.trajectory, &b.trajectory) && close(&b.trajectory, &a.trajectory)
}

/// Sort by initial `u₀` and drop duplicates.
pub fn dedup_records(mut records: Vec<SolutionRecord>, tol: f64) -> Vec<SolutionRecord> {
    records.sort_by(|a, b| a.initial[0].total_cmp(&b.initial[0]).then(a.initial[1].total_cmp(&b.initial[1])));
    let mut out: Vec<SolutionRecord> = Vec::new();
    for r in records {
        if !out.iter().any(|o| o.k == r.k && same_solution(o, &r, tol)) {
            out.push(r);
        }
    }
    out
}

fn finish(p: &ProblemSpec, raw: Vec<(Shooting, f64, String)>, sc: &SearchConfig) -> Vec<SolutionRecord> {
    let records: Vec<SolutionRecord> = raw
        .into_par_iter()
        .filter_map(|(sh, res, how)| build_record(p, &sh, res, &how, &sc.tol).ok())
        .filter(|r| r.positive && r.sup_norm > sc.trivial_tol)
        .collect();
    let mut records = dedup_records(records, sc.dedup_tol);
    let threshold = sc.code_threshold.or_else(|| gap_threshold(&records)).unwrap_or(0.0);
    assign_codes(&mut records, threshold);
    for r in records.iter_mut() {
        r.min_period_multiple = minimal_period_multiple(r, p, 1e-6 * (1.0 + r.sup_norm));
    }
    records
}

/// Positive `kT`-periodic solutions: grid multistart, the `T`-periodic shift
/// images, solutions of every divisor period tiled up to `k`, and coded
/// seeds continued from a moderate `μ`.
pub fn find_periodic_solutions(p: &ProblemSpec, k: usize, sc: &SearchConfig) -> Result<Vec<SolutionRecord>> {
    sc.validate()?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let pk = periodic_problem(p, k)?;
    let span = p.pattern.span;
    let mut raw: Vec<(Shooting, f64, String)> = Vec::new();
    for d in (1..=k).filter(|d| k % d == 0) {
        let pd = periodic_problem(p, d)?;
        for c in grid_solutions(&pd, d, sc) {
            raw.push((c.sh.tile(k / d), c.residual, format!("grid k={d}")));
        }
    }
    let words = p.pattern.m * k;
    if words < 63 && (1usize << words) - 1 <= sc.coded_words {
        let mu0 = continuation_start(&pk, sc);
        if let Some(base) = seed_base(&pk, mu0, sc) {
            let found: Vec<_> = nonzero_words(words)
                .into_par_iter()
                .filter_map(|w| solve_coded(&pk, &base, &w, mu0, sc).map(|(sh, res)| (sh, res, "coded".to_string())))
                .collect();
            raw.extend(found);
        }
    }
    let mut shifted = Vec::new();
    for (sh, _, how) in &raw {
        for l in 1..k {
            if let Some(rot) = sh.rotate_to(l as f64 * span) {
                if let Some(c) = newton(&pk, rot, Closure::Periodic, sc) {
                    shifted.push((c.sh, c.residual, format!("{how}, shifted by {l}T")));
                }
            }
        }
    }
    raw.extend(shifted);
    Ok(finish(&pk, raw, sc))
}

/// Positive Neumann solutions: sweep `u₀` with `u'(0) = 0`, bracket sign
/// changes of `u'(T)` and bisect; then Newton from coded seeds built of
/// per-hump profiles.
pub fn find_neumann_solutions(p: &ProblemSpec, sc: &SearchConfig) -> Result<Vec<SolutionRecord>> {
    sc.validate()?;
    if !matches!(p.boundary, Boundary::Neumann) {
        return Err(Error::Config("Neumann search needs a Neumann problem".into()));
    }
    let span = p.pattern.span;
    let grid = lin_grid(sc.neumann_range.0, sc.neumann_range.1, sc.neumann_count);
    let end = |u0: f64| p.flow([u0, 0.0], 0.0, span, &sc.tol).ok().map(|x| x[1]);
    let vals: Vec<Option<f64>> = grid.par_iter().map(|&u| end(u)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (Some(fa), Some(fb)) = (vals[i], vals[i + 1]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (grid[i], grid[i + 1], fa);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let Some(fm) = end(mid) else { break };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let u0 = if end(lo).map(f64::abs) <= end(hi).map(f64::abs) { lo } else { hi };
        roots.push(u0);
    }
    let nodes = uniform_nodes(span, sc.nodes_per_period);
    let raw: Vec<(Shooting, f64, String)> = roots
        .into_par_iter()
        .filter_map(|u0| {
            let sh = Shooting::from_flow(p, [u0, 0.0], nodes.clone(), &sc.tol).ok()?;
            let ev = evaluate(p, &sh, Closure::Neumann, &sc.tol, false).ok()?;
            let res = inf_norm(&ev.r);
            if res <= sc.residual_tol * sh.scale().max(1.0) {
                Some((sh, res, "sweep".to_string()))
            } else {
                newton(p, sh, Closure::Neumann, sc).map(|c| (c.sh, c.residual, "sweep+newton".to_string()))
            }
        })
        .collect();
    let mut raw = raw;
    let m = p.pattern.m;
    if m < 63 && (1usize << m) - 1 <= sc.coded_words {
        if let Some(profiles) = dirichlet_profiles(p, &sc.tol) {
            let found: Vec<_> = nonzero_words(m)
                .into_par_iter()
                .filter_map(|w| {
                    let c = newton(p, dirichlet_seed(p, &profiles, &w, sc.nodes_per_period), Closure::Neumann, sc)?;
                    Some((c.sh, c.residual, "coded".to_string()))
                })
                .collect();
            raw.extend(found);
        }
    }
    Ok(finish(p, raw, sc))
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x < -PI {
        x += 2.0 * PI;
    }
    x
}

/// Winding number of the displacement `D(s) = P^k(s) - s` along a closed
/// polyline (the last point connects back to the first). Edges are bisected
/// until consecutive angle increments stay below π/2.
pub fn winding_number(p: &ProblemSpec, k: usize, curve: &[[f64; 2]], tol: f64) -> Result<i64> {
    if curve.len() < 3 {
        return Err(Error::Domain("a closed curve needs at least three points".into()));
    }
    let ftol = Tolerances::with_tol(1e-11, 1e-14);
    let disp = |s: [f64; 2]| -> Result<[f64; 2]> {
        let img = poincare_map(p, s, k, &ftol).ok_or(Error::Divergence { t: p.pattern.span * k as f64 })?;
        let d = [img[0] - s[0], img[1] - s[1]];
        if d[0].hypot(d[1]) < tol {
            return Err(Error::DegreeUndefined((s[0], s[1])));
        }
        Ok(d)
    };
    fn edge<F: Fn([f64; 2]) -> Result<[f64; 2]>>(
        disp: &F,
        a: [f64; 2],
        da: [f64; 2],
        b: [f64; 2],
        db: [f64; 2],
        depth: u32,
    ) -> Result<f64> {
        let inc = wrap_angle(db[1].atan2(db[0]) - da[1].atan2(da[0]));
        if inc.abs() < PI / 2.0 {
            return Ok(inc);
        }
        if depth == 0 {
            return Err(Error::Resolution("winding number refinement did not settle".into()));
        }
        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let dm = disp(m)?;
        Ok(edge(disp, a, da, m, dm, depth - 1)? + edge(disp, m, dm, b, db, depth - 1)?)
    }
    let ds = curve.par_iter().map(|&s| disp(s)).collect::<Result<Vec<_>>>()?;
    let n = curve.len();
    let total = (0..n)
        .into_par_iter()
        .map(|i| {
            let j = (i + 1) % n;
            edge(&disp, curve[i], ds[i], curve[j], ds[j], 40)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<f64>();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Counter-clockwise circle with `n` vertices.
pub fn circle(center: [f64; 2], radius: f64, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

/// Counter-clockwise boundary of `[lo, hi]` with `n` points per side.
pub fn rectangle(lo: [f64; 2], hi: [f64; 2], n: usize) -> Vec<[f64; 2]> {
    let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let mut out = Vec::with_capacity(4 * n);
    for c in 0..4 {
        let (a, b) = (corners[c], corners[(c + 1) % 4]);
        for i in 0..n {
            let s = i as f64 / n as f64;
            out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    out
}
