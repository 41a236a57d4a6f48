#![allow(dead_code)]

use indefinite::config::{preset, RunConfig};
use indefinite::integrator::ProblemSpec;
use indefinite::shooting::SearchConfig;

/// Smallest eigenvalue of `-φ'' = λ a φ`, `φ(α) = φ(β) = 0`, from the
/// symmetric tridiagonal matrix `W^{-1/2} A W^{-1/2}` on `n` cells, located by
/// Sturm-sequence bisection.
pub fn fd_eigenvalue(a: &dyn Fn(f64) -> f64, alpha: f64, beta: f64, n: usize) -> f64 {
    let h = (beta - alpha) / n as f64;
    let w: Vec<f64> = (1..n).map(|i| a(alpha + i as f64 * h)).collect();
    let d: Vec<f64> = w.iter().map(|wi| 2.0 / (h * h * wi)).collect();
    let e: Vec<f64> = w.windows(2).map(|p| -1.0 / (h * h * (p[0] * p[1]).sqrt())).collect();
    let below = |x: f64| {
        let mut count = 0;
        let mut q = d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..d.len() {
            let prev = if q == 0.0 { 1e-300 } else { q };
            q = d[i] - x - e[i - 1] * e[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let off = |i: usize| e.get(i).map_or(0.0, |v| v.abs());
    let mut hi = (0..d.len())
        .map(|i| d[i] + off(i) + if i > 0 { off(i - 1) } else { 0.0 })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two Richardson steps over `n`, `2n`, `4n` cells.
pub fn fd_extrapolated(a: &dyn Fn(f64) -> f64, alpha: f64, beta: f64, n: usize) -> f64 {
    let l1 = fd_eigenvalue(a, alpha, beta, n);
    let l2 = fd_eigenvalue(a, alpha, beta, 2 * n);
    let l4 = fd_eigenvalue(a, alpha, beta, 4 * n);
    let r1 = (4.0 * l2 - l1) / 3.0;
    let r2 = (4.0 * l4 - l2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Classical fixed-step RK4 for the extended field, independent of the
/// adaptive integrator; returns the state at `t1`.
pub fn rk4(p: &ProblemSpec, x0: [f64; 2], t0: f64, t1: f64, n: usize) -> [f64; 2] {
    let h = (t1 - t0) / n as f64;
    let f = |t: f64, x: [f64; 2]| p.extended_field(t, &x);
    let mut x = x0;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, x);
        let k2 = f(t + 0.5 * h, [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f(t + 0.5 * h, [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f(t + h, [x[0] + h * k3[0], x[1] + h * k3[1]]);
        for j in 0..2 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    x
}

pub fn preset_problem(name: &str) -> ProblemSpec {
    preset(name).unwrap().problem_spec().unwrap()
}

pub fn with_mu(name: &str, mu: f64) -> ProblemSpec {
    let mut cfg: RunConfig = preset(name).unwrap();
    cfg.problem.mu = Some(mu);
    cfg.problem_spec().unwrap()
}

/// `sin⁺(3t) - μ sin⁻(3t)` on `[0, 2π]` with `g(s) = s²`.
pub fn three_hump(mu: f64) -> ProblemSpec {
    let mut cfg = preset("cor53").unwrap();
    cfg.problem.weight = Some("sin_pm(3, 1, 1)".into());
    cfg.problem.mu = Some(mu);
    cfg.problem_spec().unwrap()
}

pub fn search() -> SearchConfig {
    SearchConfig::default()
}

/// Threshold values measured once with the supplied pipeline and frozen.
pub const FIG2_MU_STAR: f64 = 3.26e5;
pub const FIG2_R_STAR: f64 = 1.798;
