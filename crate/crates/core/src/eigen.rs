//! First eigenvalues of `φ'' + cφ' + λ a(t) φ = 0` on a positivity interval,
//! by Prüfer angle shooting and bisection in `λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::integrator::{integrate_generic, Boundary, ProblemSpec, Tolerances};
use crate::weight::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// Eigenvalue problem on `[alpha, beta]` for the weight `t ↦ weight(t + shift)`.
#[derive(Debug, Clone)]
pub struct EigenProblem {
    pub weight: WeightSpec,
    pub shift: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub left: Bc,
    pub right: Bc,
    /// Breakpoints of the weight inside the interval.
    pub breaks: Vec<f64>,
}

const MAX_LAMBDA: f64 = 1e12;

impl EigenProblem {
    pub fn new(weight: WeightSpec, alpha: f64, beta: f64, c: f64, left: Bc, right: Bc) -> Result<Self> {
        if !(alpha < beta) {
            return Err(Error::Domain(format!("need alpha < beta, got [{alpha}, {beta}]")));
        }
        let p = EigenProblem {
            weight,
            shift: 0.0,
            alpha,
            beta,
            c,
            left,
            right,
            breaks: Vec::new(),
        };
        p.check_weight()?;
        Ok(p)
    }

    fn a(&self, t: f64) -> f64 {
        self.weight.evaluate(t + self.shift).max(0.0)
    }

    fn check_weight(&self) -> Result<()> {
        let n = 256;
        let mut any = false;
        for i in 0..=n {
            let t = self.alpha + (self.beta - self.alpha) * i as f64 / n as f64;
            let v = self.weight.evaluate(t + self.shift);
            if v < -1e-9 {
                return Err(Error::Pattern(format!(
                    "weight is negative at t = {t} inside the eigenvalue interval"
                )));
            }
            any |= v > 0.0;
        }
        if !any {
            return Err(Error::Pattern("weight vanishes on the eigenvalue interval".into()));
        }
        Ok(())
    }

    fn start_angle(&self) -> f64 {
        match self.left {
            Bc::Dirichlet => 0.0,
            Bc::Neumann => FRAC_PI_2,
        }
    }

    /// First angle above the starting one that satisfies the right condition.
    fn target_angle(&self) -> f64 {
        let th0 = self.start_angle();
        match self.right {
            Bc::Dirichlet => PI,
            Bc::Neumann => {
                if th0 < FRAC_PI_2 {
                    FRAC_PI_2
                } else {
                    th0 + PI
                }
            }
        }
    }
}

/// Prüfer angle `θ(β)` for the given `λ`, with
/// `θ' = e^{-c(t-α)} cos²θ + e^{c(t-α)} λ a(t) sin²θ`.
pub fn prufer_angle_sweep(ep: &EigenProblem, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be non-negative, got {lambda}")));
    }
    let (alpha, c) = (ep.alpha, ep.c);
    let f = |t: f64, th: &[f64; 1]| {
        let e = (c * (t - alpha)).exp();
        let (s, co) = th[0].sin_cos();
        [co * co / e + e * lambda * ep.a(t) * s * s]
    };
    let tol = Tolerances {
        rtol: 1e-12,
        atol: 1e-12,
        guard: f64::INFINITY,
        ..Default::default()
    };
    let th = integrate_generic(&f, ep.alpha, [ep.start_angle()], ep.beta, &ep.breaks, &tol, None)?;
    Ok(th[0])
}

/// Smallest positive `λ` whose Prüfer angle hits the boundary condition at `β`.
pub fn first_eigenvalue(ep: &EigenProblem) -> Result<f64> {
    let target = ep.target_angle();
    let above = |l: f64| -> Result<bool> { Ok(prufer_angle_sweep(ep, l)? >= target) };
    let mut lo = 1.0;
    let mut hi = 1.0;
    if above(1.0)? {
        loop {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::Bracketing("no eigenvalue above 0".into()));
            }
            if !above(lo)? {
                break;
            }
            hi = lo;
        }
    } else {
        loop {
            hi *= 2.0;
            if hi > MAX_LAMBDA {
                return Err(Error::Bracketing(format!(
                    "no sign change up to lambda = {MAX_LAMBDA:e}"
                )));
            }
            if above(hi)? {
                break;
            }
            lo = hi;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-hump first eigenvalues of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumpEigenvalue {
    pub hump: usize,
    pub alpha: f64,
    pub beta: f64,
    pub left: Bc,
    pub right: Bc,
    pub lambda1: f64,
}

/// The eigenvalue problem on positivity interval `i`. In Neumann mode an
/// interval touching `0` or `T` carries a Neumann condition there.
pub fn hump_problem(p: &ProblemSpec, i: usize) -> EigenProblem {
    let (alpha, beta) = p.pattern.positive(i);
    let neumann = matches!(p.boundary, Boundary::Neumann);
    let left = if neumann && alpha <= 0.0 { Bc::Neumann } else { Bc::Dirichlet };
    let right = if neumann && beta >= p.pattern.span {
        Bc::Neumann
    } else {
        Bc::Dirichlet
    };
    let s = p.pattern.origin_shift;
    EigenProblem {
        weight: p.weight.clone(),
        shift: s,
        alpha,
        beta,
        c: p.c,
        left,
        right,
        breaks: p
            .weight
            .discontinuities(alpha + s, beta + s)
            .into_iter()
            .map(|x| x - s)
            .collect(),
    }
}

pub fn hump_eigenvalues(p: &ProblemSpec) -> Result<Vec<HumpEigenvalue>> {
    (0..p.pattern.m)
        .into_par_iter()
        .map(|i| {
            let ep = hump_problem(p, i);
            Ok(HumpEigenvalue {
                hump: i + 1,
                alpha: ep.alpha,
                beta: ep.beta,
                left: ep.left,
                right: ep.right,
                lambda1: first_eigenvalue(&ep)?,
            })
        })
        .collect()
}

/// `max_i λ₁^i`, the value `g_∞` has to exceed.
pub fn ginf_threshold(p: &ProblemSpec) -> Result<f64> {
    Ok(hump_eigenvalues(p)?
        .iter()
        .map(|h| h.lambda1)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> WeightSpec {
        WeightSpec::expression("1", 1.0, false).unwrap()
    }

    #[test]
    fn angle_sweep_values() {
        let ep = EigenProblem::new(one(), 0.0, 1.0, 0.0, Bc::Dirichlet, Bc::Dirichlet).unwrap();
        let th0 = prufer_angle_sweep(&ep, 0.0).unwrap();
        assert!((th0 - 1f64.atan()).abs() < 1e-10);
        assert!((prufer_angle_sweep(&ep, PI * PI).unwrap() - PI).abs() < 1e-8);
        assert!((prufer_angle_sweep(&ep, 4.0 * PI * PI).unwrap() - 2.0 * PI).abs() < 1e-8);
        let mut prev = -1.0;
        for i in 0..40 {
            let th = prufer_angle_sweep(&ep, i as f64 * 2.5).unwrap();
            assert!(th > prev);
            prev = th;
        }
    }

    #[test]
    fn classical_eigenvalues() {
        for len in [1.0, 0.5, 2.0] {
            let ep = EigenProblem::new(one(), 0.3, 0.3 + len, 0.0, Bc::Dirichlet, Bc::Dirichlet).unwrap();
            let l = first_eigenvalue(&ep).unwrap();
            let want = PI * PI / (len * len);
            assert!((l - want).abs() < 1e-9 * want, "{l} vs {want}");
        }
        let ep = EigenProblem::new(one(), 0.0, 1.0, 1.0, Bc::Dirichlet, Bc::Dirichlet).unwrap();
        let want = PI * PI + 0.25;
        assert!((first_eigenvalue(&ep).unwrap() - want).abs() < 1e-9 * want);
        // mixed conditions: quarter wave
        let ep = EigenProblem::new(one(), 0.0, 1.0, 0.0, Bc::Neumann, Bc::Dirichlet).unwrap();
        let want = PI * PI / 4.0;
        assert!((first_eigenvalue(&ep).unwrap() - want).abs() < 1e-9 * want);
        let ep = EigenProblem::new(one(), 0.0, 1.0, 0.0, Bc::Dirichlet, Bc::Neumann).unwrap();
        assert!((first_eigenvalue(&ep).unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn friction_sign_symmetry() {
        let w = WeightSpec::expression("sin(3*pi*t)", 1.0, false).unwrap();
        let a = EigenProblem::new(w.clone(), 0.0, 1.0 / 3.0, 0.7, Bc::Dirichlet, Bc::Dirichlet).unwrap();
        let b = EigenProblem::new(w, 0.0, 1.0 / 3.0, -0.7, Bc::Dirichlet, Bc::Dirichlet).unwrap();
        let (la, lb) = (first_eigenvalue(&a).unwrap(), first_eigenvalue(&b).unwrap());
        assert!((la - lb).abs() < 1e-8 * la, "{la} {lb}");
    }

    #[test]
    fn rejects_bad_intervals() {
        let w = WeightSpec::expression("sin(2*pi*t)", 1.0, true).unwrap();
        assert!(matches!(
            EigenProblem::new(w.clone(), 0.0, 1.0, 0.0, Bc::Dirichlet, Bc::Dirichlet),
            Err(Error::Pattern(_))
        ));
        assert!(EigenProblem::new(w, 0.5, 0.2, 0.0, Bc::Dirichlet, Bc::Dirichlet).is_err());
    }
}
