//! The explicit constants behind the multiplicity threshold `μ*`: `K_i`,
//! `K₀`, `r`, `η(r)`, `μ#`, `μ_r`, `δ±_j`, `μ±_j`, `γ(r)`, `γ` and a
//! numerical surrogate for `R*`.
//!
//! Constants are computed on the pattern over the full horizon, so a
//! `kT`-periodic problem sees `m·k` humps.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::integrator::{Boundary, ProblemSpec};
use crate::nonlinearity::{eta, gamma_min, gamma_ratio, limit_estimates, Limits, NonlinearitySpec};
use crate::quad::simpson_split;
use crate::shooting::{find_neumann_solutions, find_periodic_solutions, SearchConfig};
use crate::weight::SignPattern;

pub const ETA_SAFETY: f64 = 0.5;
pub const MU_R_SAFETY: f64 = 1.01;
pub const R_STAR_SAFETY: f64 = 10.0;
const R_GRID_STEPS: usize = 200;
const QUAD_TOL: f64 = 1e-13;

/// Every constant of the threshold construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    #[serde(rename = "K")]
    pub k_i: Vec<f64>,
    #[serde(rename = "K0")]
    pub k0: f64,
    pub r: f64,
    pub eta_r: f64,
    pub mu_sharp: f64,
    pub mu_r: f64,
    /// `None` where the window does not exist (Neumann ends).
    pub delta_plus: Vec<Option<f64>>,
    pub delta_minus: Vec<Option<f64>>,
    pub mu_plus: Vec<Option<f64>>,
    pub mu_minus: Vec<Option<f64>>,
    pub gamma_small: f64,
    pub gamma_big: f64,
    pub r_star: f64,
    pub r_star_estimated: bool,
    /// Sufficient, not necessary.
    pub mu_star: f64,
    pub g0: f64,
    pub ginf: f64,
    /// `max_i λ₁^i`, which `g_∞` must exceed.
    pub lambda_max: f64,
    /// `1/K₀` and `min_i λ₁^i`, the bracket for the optimal constant.
    pub lambda_lower: f64,
    pub lambda_upper: f64,
    pub safety: BTreeMap<String, f64>,
    pub provenance: BTreeMap<String, String>,
}

impl BoundsReport {
    /// Violated invariants, empty when the report is consistent.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eta_r * self.k0 < 1.0) {
            v.push(format!("eta(r)·K0 = {} is not below 1", self.eta_r * self.k0));
        }
        if !(self.mu_r > self.mu_sharp) {
            v.push(format!("mu_r = {} does not exceed mu# = {}", self.mu_r, self.mu_sharp));
        }
        if !(self.mu_star >= self.mu_r) {
            v.push("mu* below mu_r".into());
        }
        for m in self.mu_plus.iter().chain(&self.mu_minus).flatten() {
            if !(self.mu_star >= *m) {
                v.push(format!("mu* below mu± = {m}"));
            }
        }
        if !(0.0 < self.r && self.r < self.r_star) {
            v.push(format!("need 0 < r < R*, got r = {}, R* = {}", self.r, self.r_star));
        }
        v
    }
}

fn a_plus(p: &ProblemSpec, t: f64) -> f64 {
    p.weight_at(t).max(0.0)
}

fn a_minus(p: &ProblemSpec, t: f64) -> f64 {
    (-p.weight_at(t)).max(0.0)
}

fn integral<F: Fn(f64) -> f64>(p: &ProblemSpec, f: F, lo: f64, hi: f64) -> f64 {
    simpson_split(f, lo, hi, &p.breakpoints(lo, hi), QUAD_TOL)
}

/// `∫_a^b ∫_a^t a⁻ dξ dt = ∫_a^b (b - ξ) a⁻(ξ) dξ`.
pub fn nested_after(p: &ProblemSpec, a: f64, b: f64) -> f64 {
    integral(p, |x| (b - x) * a_minus(p, x), a, b)
}

/// `∫_a^b ∫_t^b a⁻ dξ dt = ∫_a^b (ξ - a) a⁻(ξ) dξ`.
pub fn nested_before(p: &ProblemSpec, a: f64, b: f64) -> f64 {
    integral(p, |x| (x - a) * a_minus(p, x), a, b)
}

/// `K_i = ‖a⁺‖_{L¹(I⁺_i)} e^{|c||I⁺_i|}` and
/// `K₀ = 2 max_i K_i (|I⁺_i| + e^{|c||I⁻_i|} |I⁻_i|)`.
pub fn compute_k(p: &ProblemSpec) -> (Vec<f64>, f64) {
    let pat = p.full_pattern();
    compute_k_on(p, &pat)
}

fn compute_k_on(p: &ProblemSpec, pat: &SignPattern) -> (Vec<f64>, f64) {
    let c = p.c.abs();
    let mut k0: f64 = 0.0;
    let ks = (0..pat.m)
        .map(|i| {
            let (a, b) = pat.positive(i);
            let len = b - a;
            let ki = integral(p, |t| a_plus(p, t), a, b) * (c * len).exp();
            let nl = pat.negative_len(i);
            k0 = k0.max(2.0 * ki * (len + (c * nl).exp() * nl));
            ki
        })
        .collect();
    (ks, k0)
}

/// Largest `r` in `1, 1/2, 1/4, …` with `η(r) ≤ 0.5/K₀`.
pub fn choose_r(g: &NonlinearitySpec, k0: f64) -> Result<(f64, f64)> {
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("K0 must be positive, got {k0}")));
    }
    let bound = ETA_SAFETY / k0;
    let mut r: f64 = 1.0;
    for _ in 0..R_GRID_STEPS {
        let e = eta(g, r);
        if e <= bound {
            return Ok((r, e));
        }
        r *= 0.5;
    }
    Err(Error::Hypothesis(format!(
        "no r ≥ 2^-{R_GRID_STEPS} with eta(r) ≤ {bound}; g0 is too large"
    )))
}

/// `μ# = ∫ a⁺ / ∫ a⁻` over the horizon.
pub fn compute_mu_sharp(p: &ProblemSpec) -> Result<f64> {
    let h = p.horizon();
    let pos = integral(p, |t| a_plus(p, t), 0.0, h);
    let neg = integral(p, |t| a_minus(p, t), 0.0, h);
    if !(neg > 0.0) {
        return Err(Error::Pattern("the weight has no negative part".into()));
    }
    Ok(pos / neg)
}

/// `1.01 · max_i K₀ e^{|c||I⁻_i|} η(r) / (γ(r) ∫_{τ_i}^{σ_{i+1}} ∫_{τ_i}^t a⁻)`,
/// at least `1.01 μ#`.
pub fn compute_mu_r(p: &ProblemSpec, r: f64) -> Result<f64> {
    let (_, k0) = compute_k(p);
    compute_mu_r_with(p, r, k0)
}

fn compute_mu_r_with(p: &ProblemSpec, r: f64, k0: f64) -> Result<f64> {
    let pat = p.full_pattern();
    let ratio = eta(&p.g, r) / gamma_ratio(&p.g, r);
    let c = p.c.abs();
    let mut best: f64 = 0.0;
    for i in 0..pat.m {
        let (a, b) = pat.negative(i);
        if b <= a {
            continue;
        }
        let dd = nested_after(p, a, b);
        if !(dd > 0.0) {
            return Err(Error::Pattern(format!("a⁻ vanishes on [{a}, {b}]")));
        }
        best = best.max(k0 * (c * (b - a)).exp() * ratio / dd);
    }
    let sharp = compute_mu_sharp(p)?;
    Ok((MU_R_SAFETY * best).max(MU_R_SAFETY * sharp))
}

/// Largest `δ` with `δ e^{|c|δ} < half` and `δ < gap`, one ulp inside.
fn largest_delta(c: f64, half: f64, gap: f64) -> f64 {
    let f = |d: f64| d * (c * d).exp();
    let d = if c == 0.0 {
        half
    } else {
        let (mut lo, mut hi) = (0.0, half);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    d.min(gap).next_down()
}

/// `δ⁺_j` (window `[τ_j, τ_j + δ]`) and `δ⁻_j` (window `[σ_j - δ, σ_j]`),
/// each shrunk until `a⁻` has positive mass on the window.
pub fn compute_delta(p: &ProblemSpec) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let pat = p.full_pattern();
    let c = p.c.abs();
    let shrink = |mut d: f64, window: &dyn Fn(f64) -> (f64, f64)| -> Option<f64> {
        for _ in 0..200 {
            let (a, b) = window(d);
            if integral(p, |t| a_minus(p, t), a, b) > 0.0 {
                return Some(d);
            }
            d *= 0.5;
        }
        None
    };
    let mut plus = Vec::with_capacity(pat.m);
    let mut minus = Vec::with_capacity(pat.m);
    for j in 0..pat.m {
        let (s, t) = pat.positive(j);
        let half = 0.5 * (t - s);
        let gap = pat.negative_len(j);
        plus.push(if gap > 0.0 {
            shrink(largest_delta(c, half, gap), &|d| (t, t + d))
        } else {
            None
        });
        minus.push(match pat.negative_before(j) {
            Some((a, b)) if b > a => shrink(largest_delta(c, half, b - a), &|d| (s - d, s)),
            _ => None,
        });
    }
    (plus, minus)
}

/// `R*`: ten times the largest sup norm among `T`-periodic (or Neumann)
/// solutions found by a coarse sweep at `μ` and at `1.1 μ#`, at least `10 r`.
pub fn estimate_r_star(p: &ProblemSpec, r: f64) -> Result<f64> {
    check_ginf(p)?;
    let sharp = compute_mu_sharp(&p.with_boundary(base_boundary(p)))?;
    let sc = SearchConfig {
        u_count: 16,
        y_count: 12,
        neumann_count: 120,
        ..Default::default()
    };
    let mut sup: f64 = 0.0;
    for mu in [p.mu, 1.1 * sharp] {
        let q = p.with_mu(mu).with_boundary(base_boundary(p));
        let recs = match q.boundary {
            Boundary::Neumann => find_neumann_solutions(&q, &sc)?,
            Boundary::Periodic { .. } => find_periodic_solutions(&q, 1, &sc)?,
        };
        for rec in recs {
            sup = sup.max(rec.sup_norm);
        }
    }
    Ok((R_STAR_SAFETY * sup).max(R_STAR_SAFETY * r))
}

/// `g_∞ > max_i λ₁^i`; returns the limits and the per-hump eigenvalues.
fn check_ginf(p: &ProblemSpec) -> Result<(Limits, Vec<f64>)> {
    let lim = limit_estimates(&p.g);
    let lambdas: Vec<f64> = crate::eigen::hump_eigenvalues(p)?.iter().map(|h| h.lambda1).collect();
    let lam = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lim.ginf > lam) {
        return Err(Error::Hypothesis(format!(
            "g_inf = {} does not exceed max lambda_1 = {lam}",
            lim.ginf
        )));
    }
    Ok((lim, lambdas))
}

fn base_boundary(p: &ProblemSpec) -> Boundary {
    match p.boundary {
        Boundary::Neumann => Boundary::Neumann,
        Boundary::Periodic { .. } => Boundary::Periodic { k: 1 },
    }
}

/// The full report with `R*` from [`estimate_r_star`].
pub fn compute_mu_star(p: &ProblemSpec) -> Result<BoundsReport> {
    compute_mu_star_with(p, None)
}

/// The full report, with `R*` supplied or estimated.
pub fn compute_mu_star_with(p: &ProblemSpec, r_star: Option<f64>) -> Result<BoundsReport> {
    let (lim, lambdas) = check_ginf(p)?;
    let (k_i, k0) = compute_k(p);
    let (r, eta_r) = choose_r(&p.g, k0)?;
    let mu_sharp = compute_mu_sharp(p)?;
    let mu_r = compute_mu_r_with(p, r, k0)?;
    let (delta_plus, delta_minus) = compute_delta(p);
    let (r_star, estimated) = match r_star {
        Some(v) => (v, false),
        None => (estimate_r_star(p, r)?, true),
    };
    let gamma_big = gamma_min(&p.g, r, r_star)?;
    let gamma_small = gamma_ratio(&p.g, r);
    let pat = p.full_pattern();
    let c = p.c.abs();
    let mu_pm = |d: Option<f64>, window: (f64, f64), after: bool| -> Result<Option<f64>> {
        let Some(d) = d else { return Ok(None) };
        let dd = if after {
            nested_after(p, window.0, window.1)
        } else {
            nested_before(p, window.0, window.1)
        };
        if !(dd > 0.0) {
            return Err(Error::Pattern(format!("a⁻ vanishes on [{}, {}]", window.0, window.1)));
        }
        Ok(Some(r_star * (c * d).exp() / (gamma_big * dd)))
    };
    let mut mu_plus = Vec::with_capacity(pat.m);
    let mut mu_minus = Vec::with_capacity(pat.m);
    for j in 0..pat.m {
        let (s, t) = pat.positive(j);
        let dp = delta_plus[j];
        let dm = delta_minus[j];
        mu_plus.push(mu_pm(dp, (t, t + dp.unwrap_or(0.0)), true)?);
        mu_minus.push(mu_pm(dm, (s - dm.unwrap_or(0.0), s), false)?);
    }
    let mu_star = mu_plus
        .iter()
        .chain(&mu_minus)
        .flatten()
        .fold(mu_r, |m, v| m.max(*v));
    let lambda_max = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let safety = BTreeMap::from([
        ("eta".to_string(), ETA_SAFETY),
        ("mu_r".to_string(), MU_R_SAFETY),
        ("R_star".to_string(), R_STAR_SAFETY),
    ]);
    let prov = |s: &str| s.to_string();
    let provenance = BTreeMap::from([
        (prov("K"), prov("K_i = ||a+||_L1(I+_i) * exp(|c| |I+_i|)")),
        (prov("K0"), prov("K0 = 2 max_i K_i (|I+_i| + exp(|c| |I-_i|) |I-_i|)")),
        (prov("r"), prov("largest r = 2^-j with eta(r) <= 0.5 / K0")),
        (prov("eta_r"), prov("eta(r) = sup_{0<s<=r} g(s)/s")),
        (prov("mu_sharp"), prov("mu# = int a+ / int a-")),
        (
            prov("mu_r"),
            prov("1.01 max_i K0 exp(|c| |I-_i|) eta(r) / (gamma(r) int_tau^sigma int_tau^t a-), at least 1.01 mu#"),
        ),
        (
            prov("delta"),
            prov("largest d with d exp(|c| d) < |I+_j|/2 inside the adjacent negativity interval, shrunk until a- has mass"),
        ),
        (prov("mu_plus"), prov("R* exp(|c| d+) / (gamma int_tau^{tau+d} int_tau^s a-)")),
        (prov("mu_minus"), prov("R* exp(|c| d-) / (gamma int_{sigma-d}^sigma int_s^sigma a-)")),
        (prov("gamma_small"), prov("gamma(r) = min_{r/2<=s<=r} g(s)/s")),
        (prov("gamma_big"), prov("gamma = min_{r/4<=s<=R*} g(s)")),
        (
            prov("R_star"),
            if estimated {
                prov("estimate: 10 x largest sup norm of solutions found at mu and 1.1 mu#, at least 10 r")
            } else {
                prov("supplied")
            },
        ),
        (prov("mu_star"), prov("sufficient threshold: max(mu_r, mu+_j, mu-_j)")),
    ]);
    Ok(BoundsReport {
        k_i,
        k0,
        r,
        eta_r,
        mu_sharp,
        mu_r,
        delta_plus,
        delta_minus,
        mu_plus,
        mu_minus,
        gamma_small,
        gamma_big,
        r_star,
        r_star_estimated: estimated,
        mu_star,
        g0: lim.g0,
        ginf: lim.ginf,
        lambda_max,
        lambda_lower: 1.0 / k0,
        lambda_upper: lambda_min,
        safety,
        provenance,
    })
}
