//! Nonlinearities `g: [0, ∞) → [0, ∞)` with `g(0) = 0` and `g > 0` elsewhere,
//! and the growth functionals built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_constant_args, parse_expression, split_call, Expression, Var};

const GRID: usize = 4096;
const REFINE_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    /// `s^p`, `p > 1`.
    Power { p: f64 },
    /// `ν s arctan(s)`.
    ScaledArctan { nu: f64 },
    /// `max(0, expr(s))`.
    Clamped(Expression),
    Expr(Expression),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub declared_g0: Option<f64>,
    /// `f64::INFINITY` is allowed.
    pub declared_ginf: Option<f64>,
    /// When set, `g` is checked to be nondecreasing on a sample grid.
    pub monotone: bool,
}

/// `g₀ = limsup_{s→0} g(s)/s` and `g_∞ = liminf_{s→∞} g(s)/s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub g0: f64,
    pub ginf: f64,
    /// True when the values come from sampling rather than a closed form
    /// or a declaration.
    pub estimated: bool,
    /// True when the sampled ratio did not settle.
    pub indeterminate: bool,
}

impl NonlinearitySpec {
    fn with_kind(kind: NonlinearityKind) -> Self {
        NonlinearitySpec {
            kind,
            declared_g0: None,
            declared_ginf: None,
            monotone: false,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Config(format!("power exponent must exceed 1, got {p}")));
        }
        Ok(Self::with_kind(NonlinearityKind::Power { p }))
    }

    pub fn scaled_arctan(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Config(format!("arctan scale must be positive, got {nu}")));
        }
        Ok(Self::with_kind(NonlinearityKind::ScaledArctan { nu }))
    }

    pub fn expression(src: &str) -> Result<Self> {
        let e = Self::expr_in_s(src)?;
        let g = Self::with_kind(NonlinearityKind::Expr(e));
        g.validate()?;
        Ok(g)
    }

    pub fn clamped(src: &str) -> Result<Self> {
        let e = Self::expr_in_s(src)?;
        let g = Self::with_kind(NonlinearityKind::Clamped(e));
        g.validate()?;
        Ok(g)
    }

    fn expr_in_s(src: &str) -> Result<Expression> {
        let e = parse_expression(src)?;
        if e.variables().contains(&Var::T) {
            return Err(Error::Config(format!(
                "nonlinearity '{src}' must be an expression in s"
            )));
        }
        Ok(e)
    }

    /// Parse the DSL: `power(p)`, `arctan_scaled(nu)`, `clamp0(expr)` or a raw
    /// expression in `s`.
    pub fn parse(src: &str) -> Result<Self> {
        if let Some((name, args)) = split_call(src) {
            match name {
                "power" => return Self::power(one_arg(name, args)?),
                "arctan_scaled" => return Self::scaled_arctan(one_arg(name, args)?),
                "clamp0" => return Self::clamped(args),
                _ => {}
            }
        }
        Self::expression(src)
    }

    pub fn to_dsl(&self) -> String {
        match &self.kind {
            NonlinearityKind::Power { p } => format!("power({p:?})"),
            NonlinearityKind::ScaledArctan { nu } => format!("arctan_scaled({nu:?})"),
            NonlinearityKind::Clamped(e) => format!("clamp0({})", e.source()),
            NonlinearityKind::Expr(e) => e.source().to_string(),
        }
    }

    pub fn with_limits(mut self, g0: Option<f64>, ginf: Option<f64>) -> Self {
        self.declared_g0 = g0;
        self.declared_ginf = ginf;
        self
    }

    pub fn with_monotone(mut self, monotone: bool) -> Result<Self> {
        self.monotone = monotone;
        self.validate()?;
        Ok(self)
    }

    /// Check `g(0) = 0`, `g(s) > 0` on a sample grid and, when flagged,
    /// monotonicity.
    pub fn validate(&self) -> Result<()> {
        let g0 = self.value(0.0);
        if g0 != 0.0 {
            return Err(Error::Hypothesis(format!("g(0) = {g0}, expected 0")));
        }
        let mut prev = 0.0;
        for i in 0..=240 {
            let s = 10f64.powf(-8.0 + 12.0 * i as f64 / 240.0);
            let v = self.value(s);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Hypothesis(format!("g({s:e}) = {v} is not positive")));
            }
            if self.monotone && v < prev {
                return Err(Error::Hypothesis(format!("g is not monotone near s = {s:e}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// `g(s)` for `s ≥ 0`, without the domain check.
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Power { p } => {
                if *p == 2.0 {
                    s * s
                } else if *p == 3.0 {
                    s * s * s
                } else {
                    s.powf(*p)
                }
            }
            NonlinearityKind::ScaledArctan { nu } => nu * s * s.atan(),
            NonlinearityKind::Clamped(e) => e.eval(s).max(0.0),
            NonlinearityKind::Expr(e) => e.eval(s),
        }
    }

    /// `g'(s)` for `s ≥ 0`; central differences for expression kinds.
    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Power { p } => {
                if *p == 2.0 {
                    2.0 * s
                } else {
                    p * s.powf(p - 1.0)
                }
            }
            NonlinearityKind::ScaledArctan { nu } => nu * (s.atan() + s / (1.0 + s * s)),
            _ => {
                let h = 1e-6 * s.max(1e-6);
                let lo = (s - h).max(0.0);
                (self.value(s + h) - self.value(lo)) / (s + h - lo)
            }
        }
    }

    fn ratio(&self, s: f64) -> f64 {
        self.value(s) / s
    }
}

fn one_arg(name: &str, args: &str) -> Result<f64> {
    let v = parse_constant_args(args)?;
    if v.len() != 1 {
        return Err(Error::Config(format!("{name} takes one argument")));
    }
    Ok(v[0])
}

pub fn g_eval(g: &NonlinearitySpec, s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::Domain(format!("g is defined for s >= 0, got {s}")));
    }
    Ok(g.value(s))
}

/// Extremum of `f` over `[lo, hi]` on a grid (log-spaced when `log`), then
/// refined locally around the best node.
fn grid_extremum<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, log: bool, maximize: bool) -> f64 {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let node = |a: f64, b: f64, i: usize, n: usize| {
        let x = i as f64 / n as f64;
        if log {
            a * (b / a).powf(x)
        } else {
            a + (b - a) * x
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut best = f(hi);
    for _ in 0..=REFINE_ROUNDS {
        let n = GRID;
        let mut arg = 0;
        let mut round = f(a);
        for i in 1..=n {
            let v = f(node(a, b, i, n));
            if better(v, round) {
                round = v;
                arg = i;
            }
        }
        if better(round, best) {
            best = round;
        }
        let na = node(a, b, arg.saturating_sub(1), n);
        let nb = node(a, b, (arg + 1).min(n), n);
        a = na;
        b = nb;
    }
    // final golden-section pass inside the last bracket
    let v = golden(&f, a, b, maximize);
    if better(v, best) {
        v
    } else {
        best
    }
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, maximize: bool) -> f64 {
    let sign = if maximize { -1.0 } else { 1.0 };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sign * f(x2);
        }
    }
    sign * f1.min(f2)
}

/// `η(r) = sup_{0<s≤r} g(s)/s`.
pub fn eta(g: &NonlinearitySpec, r: f64) -> f64 {
    match g.kind {
        NonlinearityKind::Power { p } => r.powf(p - 1.0),
        NonlinearityKind::ScaledArctan { nu } => nu * r.atan(),
        _ => grid_extremum(|s| g.ratio(s), r * 1e-12, r, true, true),
    }
}

/// `γ(r) = min_{r/2≤s≤r} g(s)/s`.
pub fn gamma_ratio(g: &NonlinearitySpec, r: f64) -> f64 {
    match g.kind {
        NonlinearityKind::Power { p } => (0.5 * r).powf(p - 1.0),
        NonlinearityKind::ScaledArctan { nu } => nu * (0.5 * r).atan(),
        _ => grid_extremum(|s| g.ratio(s), 0.5 * r, r, false, false),
    }
}

/// `γ = min_{r/4≤s≤R*} g(s)`.
pub fn gamma_min(g: &NonlinearitySpec, r: f64, r_star: f64) -> Result<f64> {
    let lo = 0.25 * r;
    if !(lo > 0.0) || !(lo < r_star) {
        return Err(Error::Domain(format!(
            "need 0 < r/4 < R*, got r = {r}, R* = {r_star}"
        )));
    }
    let v = match g.kind {
        NonlinearityKind::Power { .. } | NonlinearityKind::ScaledArctan { .. } => g.value(lo),
        _ if g.monotone => g.value(lo),
        _ => grid_extremum(|s| g.value(s), lo, r_star, true, false),
    };
    if !(v > 0.0) {
        return Err(Error::Hypothesis(format!(
            "min of g on [{lo}, {r_star}] is {v}, not positive"
        )));
    }
    Ok(v)
}

fn ratio_range<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, maximize: bool) -> f64 {
    let n = 512;
    let mut best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    for i in 0..=n {
        let s = lo * (hi / lo).powf(i as f64 / n as f64);
        let v = f(s);
        best = if maximize { best.max(v) } else { best.min(v) };
    }
    best
}

/// `g₀` and `g_∞`: closed forms for the known kinds, declarations when
/// given, sampled estimates otherwise.
pub fn limit_estimates(g: &NonlinearitySpec) -> Limits {
    let (mut g0, mut ginf, mut estimated, mut indeterminate) = match g.kind {
        NonlinearityKind::Power { .. } => (0.0, f64::INFINITY, false, false),
        NonlinearityKind::ScaledArctan { nu } => (0.0, nu * std::f64::consts::FRAC_PI_2, false, false),
        _ => {
            let r = |s: f64| g.ratio(s);
            let near = ratio_range(r, 1e-9, 1e-8, true);
            let far = ratio_range(r, 1e-7, 1e-6, true);
            let mut ind = (near - far).abs() > 1e-3 * near.abs().max(far.abs()).max(1.0);
            let g0 = near.min(far).max(0.0);
            let g0 = if g0 < 1e-5 { 0.0 } else { g0 };
            let lo = ratio_range(r, 1e3, 1e4, false);
            let hi = ratio_range(r, 1e5, 1e6, false);
            let ginf = if hi > 10.0 * lo && hi > 1e3 {
                f64::INFINITY
            } else if (hi - lo).abs() <= 1e-2 * hi.abs().max(1.0) {
                lo.min(hi)
            } else {
                ind = true;
                ratio_range(r, 1e3, 1e6, false)
            };
            (g0, ginf, true, ind)
        }
    };
    if let Some(v) = g.declared_g0 {
        g0 = v;
    }
    if let Some(v) = g.declared_ginf {
        ginf = v;
    }
    if g.declared_g0.is_some() && g.declared_ginf.is_some() {
        estimated = false;
        indeterminate = false;
    }
    Limits {
        g0,
        ginf,
        estimated,
        indeterminate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn evaluation() {
        let p2 = NonlinearitySpec::power(2.0).unwrap();
        assert_eq!(g_eval(&p2, 3.0).unwrap(), 9.0);
        let at = NonlinearitySpec::scaled_arctan(100.0).unwrap();
        assert_eq!(g_eval(&at, 0.0).unwrap(), 0.0);
        let raw = NonlinearitySpec::parse("max(0, 100*s*atan(abs(s)))").unwrap();
        assert!((g_eval(&raw, 1.0).unwrap() - 25.0 * PI).abs() < 1e-12);
        assert!((g_eval(&raw, 1.0).unwrap() - 78.5398).abs() < 1e-4);
        assert!(matches!(g_eval(&p2, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hypothesis_checks() {
        assert!(NonlinearitySpec::parse("s^2 + 1").is_err());
        assert!(NonlinearitySpec::parse("s*(s-1)").is_err());
        assert!(NonlinearitySpec::parse("sin(t)").is_err());
        assert!(NonlinearitySpec::power(1.0).is_err());
        let wavy = NonlinearitySpec::parse("s^2*(2+sin(10*s))").unwrap();
        assert!(wavy.clone().with_monotone(true).is_err());
        assert!(wavy.with_monotone(false).is_ok());
    }

    #[test]
    fn derivatives() {
        for g in [
            NonlinearitySpec::power(2.0).unwrap(),
            NonlinearitySpec::power(2.5).unwrap(),
            NonlinearitySpec::scaled_arctan(100.0).unwrap(),
            NonlinearitySpec::parse("s^2*(2+sin(s))").unwrap(),
        ] {
            for &s in &[1e-3, 0.3, 2.0] {
                let h = 1e-5 * s;
                let fd = (g.value(s + h) - g.value(s - h)) / (2.0 * h);
                assert!((g.derivative(s) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{} at {s}", g.to_dsl());
            }
        }
    }

    #[test]
    fn eta_values() {
        let p2 = NonlinearitySpec::power(2.0).unwrap();
        assert!((eta(&p2, 0.1) - 0.1).abs() < 1e-15);
        let p3 = NonlinearitySpec::power(3.0).unwrap();
        assert!((eta(&p3, 0.5) - 0.25).abs() < 1e-15);
        let at = NonlinearitySpec::scaled_arctan(100.0).unwrap();
        let want = 100.0 * 0.01f64.atan();
        assert!((eta(&at, 0.01) - want).abs() < 1e-12);
        assert!((want - 0.99997).abs() < 1e-5);
        // the same functional through the sampling route
        let e = NonlinearitySpec::parse("100*s*atan(s)").unwrap();
        assert!((eta(&e, 0.01) - want).abs() < 1e-10);
        let e = NonlinearitySpec::parse("s^2").unwrap();
        assert!((eta(&e, 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gamma_values() {
        let p2 = NonlinearitySpec::power(2.0).unwrap();
        assert!((gamma_ratio(&p2, 0.1) - 0.05).abs() < 1e-15);
        let lin = NonlinearitySpec::parse("3*s").unwrap();
        assert!((gamma_ratio(&lin, 0.7) - 3.0).abs() < 1e-12);
        let at = NonlinearitySpec::scaled_arctan(100.0).unwrap();
        assert!((gamma_ratio(&at, 0.01) - 100.0 * 0.005f64.atan()).abs() < 1e-12);
        assert!((gamma_min(&p2, 0.4, 10.0).unwrap() - 0.01).abs() < 1e-15);
        let e = NonlinearitySpec::parse("s^2").unwrap();
        assert!((gamma_min(&e, 0.4, 10.0).unwrap() - 0.01).abs() < 1e-12);
        assert!(gamma_min(&p2, 1.0, 0.1).is_err());
    }

    #[test]
    fn gamma_min_non_monotone_matches_brute_force() {
        // dips between humps of the oscillating factor
        let g = NonlinearitySpec::parse("s^2*(1.05+sin(7*s))").unwrap();
        let (r, rs) = (0.4, 3.0);
        let got = gamma_min(&g, r, rs).unwrap();
        let n = 1_000_000;
        let brute = (0..=n)
            .map(|i| {
                let s = 0.1 + (rs - 0.1) * i as f64 / n as f64;
                g.value(s)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(got <= brute + 1e-12, "{got} vs {brute}");
        assert!((got - brute).abs() < 1e-9, "{got} vs {brute}");
    }

    #[test]
    fn limits() {
        let l = limit_estimates(&NonlinearitySpec::power(2.0).unwrap());
        assert_eq!((l.g0, l.ginf), (0.0, f64::INFINITY));
        let l = limit_estimates(&NonlinearitySpec::scaled_arctan(100.0).unwrap());
        assert_eq!((l.g0, l.ginf), (0.0, 50.0 * PI));
        let l = limit_estimates(&NonlinearitySpec::parse("s").unwrap());
        assert!((l.g0 - 1.0).abs() < 1e-12 && (l.ginf - 1.0).abs() < 1e-12);
        assert!(!l.indeterminate);
        let l = limit_estimates(&NonlinearitySpec::parse("s^3").unwrap());
        assert_eq!(l.g0, 0.0);
        assert_eq!(l.ginf, f64::INFINITY);
        let l = limit_estimates(&NonlinearitySpec::parse("s*(2+sin(log(1+s)))").unwrap());
        assert!(l.indeterminate);
        let l = limit_estimates(
            &NonlinearitySpec::parse("s*(2+sin(log(1+s)))")
                .unwrap()
                .with_limits(Some(3.0), Some(1.0)),
        );
        assert!(!l.indeterminate && l.g0 == 3.0 && l.ginf == 1.0);
    }

    #[test]
    fn dsl_round_trip() {
        for src in ["power(2.0)", "arctan_scaled(100.0)", "clamp0(s^2*(1 - s/1e6))", "s*atan(s)"] {
            let g = NonlinearitySpec::parse(src).unwrap();
            assert_eq!(g.to_dsl(), src);
            assert_eq!(NonlinearitySpec::parse(&g.to_dsl()).unwrap(), g);
        }
    }
}
