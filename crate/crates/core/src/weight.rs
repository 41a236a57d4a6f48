//! Sign-changing weights `a(t)`, their positive and negative parts, and the
//! interval structure `σ_1 < τ_1 < … < σ_{m+1}` that splits a period into
//! positivity and negativity intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_constant_args, parse_expression, split_call, Expression, Var};
use crate::quad;

/// Samples per period used when locating sign changes.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Bisection tolerance for sign changes.
pub const DEFAULT_SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `nu * sin⁺(freq t) - neg * sin⁻(freq t)`.
    SinPm { freq: f64, nu: f64, neg: f64 },
    /// Free expression in `t`.
    Expr(Expression),
    /// Piecewise constant: `values[i]` on `[starts[i], starts[i+1])`, the
    /// last value extends to the end of the period.
    Table { starts: Vec<f64>, values: Vec<f64> },
    /// `r(t)^{2(N-1)} Q(r(t))` for the radial change of variables
    /// `t = ∫_{R1}^r ξ^{1-N} dξ`.
    Radial { dim: u32, r1: f64, q: Box<WeightSpec> },
}

/// A weight together with its period. Non-periodic weights (Neumann
/// problems, radial profiles) are evaluated without reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub period: f64,
    pub periodic: bool,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, period: f64, periodic: bool) -> Result<Self> {
        let w = WeightSpec {
            kind,
            period,
            periodic,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn sin_pm(freq: f64, nu: f64, neg: f64, period: f64) -> Self {
        WeightSpec {
            kind: WeightKind::SinPm { freq, nu, neg },
            period,
            periodic: true,
        }
    }

    /// `sin(freq t)` with period `period`.
    pub fn sine(freq: f64, period: f64) -> Self {
        Self::sin_pm(freq, 1.0, 1.0, period)
    }

    pub fn expression(src: &str, period: f64, periodic: bool) -> Result<Self> {
        let e = parse_expression(src)?;
        if e.variables().contains(&Var::S) {
            return Err(Error::Config(format!(
                "weight '{src}' must be an expression in t"
            )));
        }
        WeightSpec::new(WeightKind::Expr(e), period, periodic)
    }

    pub fn table(starts: Vec<f64>, values: Vec<f64>, period: f64) -> Result<Self> {
        WeightSpec::new(WeightKind::Table { starts, values }, period, true)
    }

    /// Parse the weight DSL: `sin_pm(freq, nu, mu)`, `table(x0:v0, x1:v1, …)`
    /// or any expression in `t`.
    pub fn parse(src: &str, period: f64, periodic: bool) -> Result<Self> {
        if let Some((name, args)) = split_call(src) {
            match name {
                "sin_pm" => {
                    let v = parse_constant_args(args)?;
                    if v.len() != 3 {
                        return Err(Error::Config(
                            "sin_pm takes (freq, nu, mu)".to_string(),
                        ));
                    }
                    let mut w = WeightSpec::sin_pm(v[0], v[1], v[2], period);
                    w.periodic = periodic;
                    w.validate()?;
                    return Ok(w);
                }
                "table" => {
                    let mut starts = Vec::new();
                    let mut values = Vec::new();
                    for item in args.split(',') {
                        let (x, v) = item.split_once(':').ok_or_else(|| {
                            Error::Config(format!("table entry '{item}' must be start:value"))
                        })?;
                        starts.push(parse_constant_args(x)?[0]);
                        values.push(parse_constant_args(v)?[0]);
                    }
                    let mut w = WeightSpec {
                        kind: WeightKind::Table { starts, values },
                        period,
                        periodic,
                    };
                    w.periodic = periodic;
                    w.validate()?;
                    return Ok(w);
                }
                _ => {}
            }
        }
        WeightSpec::expression(src, period, periodic)
    }

    /// DSL text that [`WeightSpec::parse`] maps back to this weight.
    pub fn to_dsl(&self) -> String {
        match &self.kind {
            WeightKind::SinPm { freq, nu, neg } => format!("sin_pm({freq:?}, {nu:?}, {neg:?})"),
            WeightKind::Expr(e) => e.source().to_string(),
            WeightKind::Table { starts, values } => {
                let items: Vec<String> = starts
                    .iter()
                    .zip(values)
                    .map(|(x, v)| format!("{x:?}:{v:?}"))
                    .collect();
                format!("table({})", items.join(", "))
            }
            WeightKind::Radial { dim, r1, q } => {
                format!("radial(N={dim}, R1={r1:?}, Q={})", q.to_dsl())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::Config(format!(
                "weight period must be positive, got {}",
                self.period
            )));
        }
        if let WeightKind::Table { starts, values } = &self.kind {
            if starts.is_empty() || starts.len() != values.len() {
                return Err(Error::Config("table needs matching starts and values".into()));
            }
            if starts[0] != 0.0 {
                return Err(Error::Config("table must start at 0".into()));
            }
            if starts.windows(2).any(|w| w[1] <= w[0]) || *starts.last().unwrap() >= self.period {
                return Err(Error::Config(
                    "table breakpoints must be strictly increasing inside [0, T)".into(),
                ));
            }
        }
        let n = 257;
        for i in 0..n {
            let t = self.period * i as f64 / (n - 1) as f64;
            if !self.evaluate(t).is_finite() {
                return Err(Error::Config(format!(
                    "weight '{}' is not finite at t = {t}",
                    self.to_dsl()
                )));
            }
        }
        Ok(())
    }

    fn reduce(&self, t: f64) -> f64 {
        if self.periodic {
            t.rem_euclid(self.period)
        } else {
            t
        }
    }

    /// `a(t)` with the periodic extension applied.
    pub fn evaluate(&self, t: f64) -> f64 {
        let t = self.reduce(t);
        match &self.kind {
            WeightKind::SinPm { freq, nu, neg } => {
                let s = (freq * t).sin();
                if s >= 0.0 {
                    nu * s
                } else {
                    neg * s
                }
            }
            WeightKind::Expr(e) => e.eval(t),
            WeightKind::Table { starts, values } => {
                let idx = starts.partition_point(|&x| x <= t).saturating_sub(1);
                values[idx]
            }
            WeightKind::Radial { dim, r1, q } => {
                let r = crate::radial::radius_of(*dim, *r1, t);
                r.powi(2 * (*dim as i32 - 1)) * q.evaluate(r)
            }
        }
    }

    pub fn positive_part(&self, t: f64) -> f64 {
        self.evaluate(t).max(0.0)
    }

    pub fn negative_part(&self, t: f64) -> f64 {
        (-self.evaluate(t)).max(0.0)
    }

    /// Points inside `[lo, hi]` where the weight itself is discontinuous.
    pub fn discontinuities(&self, lo: f64, hi: f64) -> Vec<f64> {
        if let WeightKind::Radial { dim, r1, q } = &self.kind {
            let (a, b) = (crate::radial::radius_of(*dim, *r1, lo), crate::radial::radius_of(*dim, *r1, hi));
            return q
                .discontinuities(a, b)
                .into_iter()
                .map(|r| crate::radial::t_of_radius(*dim, *r1, r))
                .collect();
        }
        let WeightKind::Table { starts, .. } = &self.kind else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if self.periodic {
            let first = (lo / self.period).floor() as i64;
            let last = (hi / self.period).ceil() as i64;
            for k in first..=last {
                for s in starts {
                    let x = s + k as f64 * self.period;
                    if x > lo && x < hi {
                        out.push(x);
                    }
                }
            }
        } else {
            out.extend(starts.iter().copied().filter(|&x| x > lo && x < hi));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// `∫_lo^hi f(a(t)) dt`, split at `breaks` and at the weight's own
    /// discontinuities.
    pub fn integrate_with<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
        let mut pts = self.discontinuities(lo.min(hi), lo.max(hi));
        pts.extend_from_slice(breaks);
        quad::simpson_split(|t| f(self.evaluate(t)), lo, hi, &pts, 1e-14)
    }

    pub fn integral_positive(&self, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
        self.integrate_with(|a| a.max(0.0), lo, hi, breaks)
    }

    pub fn integral_negative(&self, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
        self.integrate_with(|a| (-a).max(0.0), lo, hi, breaks)
    }
}

/// `a⁺(t) - μ a⁻(t)`.
pub fn a_mu(w: &WeightSpec, mu: f64, t: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    Ok(combine(w.evaluate(t), mu))
}

#[inline]
pub(crate) fn combine(a: f64, mu: f64) -> f64 {
    if a >= 0.0 {
        a
    } else {
        mu * a
    }
}

/// Positivity intervals `[σ_i, τ_i]` and negativity intervals
/// `[τ_i, σ_{i+1}]` of a weight.
///
/// Periodic patterns satisfy `σ_1 = 0` and `σ_{m+1} = span`. Interval
/// patterns (Neumann problems) live on `[0, span]` and may start with a
/// negativity interval `[0, σ_1]` or end with `τ_m = span`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub m: usize,
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub origin_shift: f64,
    pub span: f64,
    pub periodic: bool,
}

impl SignPattern {
    pub fn positive(&self, i: usize) -> (f64, f64) {
        (self.sigma[i], self.tau[i])
    }

    /// The negativity interval following hump `i` (may be empty for
    /// interval patterns ending with a hump).
    pub fn negative(&self, i: usize) -> (f64, f64) {
        (self.tau[i], self.sigma[i + 1])
    }

    /// The negativity interval preceding hump `i`. For periodic patterns the
    /// one before the first hump is the last one translated by `-span`.
    pub fn negative_before(&self, i: usize) -> Option<(f64, f64)> {
        if i > 0 {
            Some((self.tau[i - 1], self.sigma[i]))
        } else if self.periodic {
            Some((self.tau[self.m - 1] - self.span, self.sigma[0]))
        } else if self.sigma[0] > 0.0 {
            Some((0.0, self.sigma[0]))
        } else {
            None
        }
    }

    pub fn positive_len(&self, i: usize) -> f64 {
        self.tau[i] - self.sigma[i]
    }

    pub fn negative_len(&self, i: usize) -> f64 {
        self.sigma[i + 1] - self.tau[i]
    }

    /// All σ and τ strictly inside `(0, span)` plus the endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.sigma.iter().chain(&self.tau).copied().collect();
        pts.push(0.0);
        pts.push(self.span);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        pts
    }

    /// Breakpoints of the periodic extension that fall inside `[lo, hi]`.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let base = self.breakpoints();
        let mut out = Vec::new();
        if self.periodic {
            let first = (lo / self.span).floor() as i64 - 1;
            let last = (hi / self.span).ceil() as i64 + 1;
            for k in first..=last {
                for b in &base {
                    let x = b + k as f64 * self.span;
                    if x >= lo && x <= hi {
                        out.push(x);
                    }
                }
            }
        } else {
            out.extend(base.into_iter().filter(|&x| x >= lo && x <= hi));
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        out
    }

    /// The pattern over `[0, k·span]` made of `k` translated copies.
    pub fn k_fold(&self, k: usize) -> SignPattern {
        assert!(k >= 1, "k must be at least 1");
        let mut sigma = Vec::with_capacity(self.m * k + 1);
        let mut tau = Vec::with_capacity(self.m * k);
        for l in 0..k {
            let off = l as f64 * self.span;
            sigma.extend(self.sigma[..self.m].iter().map(|s| s + off));
            tau.extend(self.tau.iter().map(|t| t + off));
        }
        sigma.push(self.sigma[self.m] + (k - 1) as f64 * self.span);
        SignPattern {
            m: self.m * k,
            sigma,
            tau,
            origin_shift: self.origin_shift,
            span: self.span * k as f64,
            periodic: self.periodic,
        }
    }

    /// Check the sign conditions on a dense grid.
    pub fn check(&self, w: &WeightSpec, tol: f64) -> Result<()> {
        let n = 64;
        for i in 0..self.m {
            let (lo, hi) = self.positive(i);
            for j in 0..=n {
                let t = lo + (hi - lo) * j as f64 / n as f64;
                if w.evaluate(t + self.origin_shift) < -tol {
                    return Err(Error::Pattern(format!(
                        "weight negative at t = {t} inside positivity interval {}",
                        i + 1
                    )));
                }
            }
            let (lo, hi) = self.negative(i);
            for j in 0..=n {
                let t = lo + (hi - lo) * j as f64 / n as f64;
                if w.evaluate(t + self.origin_shift) > tol {
                    return Err(Error::Pattern(format!(
                        "weight positive at t = {t} inside negativity interval {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Pos,
    Neg,
    Zero,
}

/// Locate the positivity/negativity structure of `w`.
///
/// For periodic weights the origin is moved to the first sign change from
/// negative to non-negative at or after `t = 0`, so that the period interval
/// starts with a positivity interval. Plateaus where `|a| ≤ tol` join an
/// adjacent positivity interval if there is one, otherwise they are absorbed
/// into the surrounding negativity interval.
pub fn detect_sign_pattern(w: &WeightSpec, tol: f64) -> Result<SignPattern> {
    detect_with_samples(w, tol, DEFAULT_SAMPLES)
}

pub fn detect_with_samples(w: &WeightSpec, tol: f64, samples: usize) -> Result<SignPattern> {
    let big_t = w.period;
    let periodic = w.periodic;
    let count = if periodic { samples } else { samples + 1 };
    let h = big_t / samples as f64;
    let time = |j: usize| j as f64 * h;
    let classify = |a: f64| {
        if a > tol {
            Sign::Pos
        } else if a < -tol {
            Sign::Neg
        } else {
            Sign::Zero
        }
    };
    let signs: Vec<Sign> = (0..count).map(|j| classify(w.evaluate(time(j)))).collect();

    // runs of equal sign: (sign, first sample, last sample)
    let mut runs: Vec<(Sign, usize, usize)> = Vec::new();
    for (j, &s) in signs.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.0 == s => r.2 = j,
            _ => runs.push((s, j, j)),
        }
    }
    if periodic && runs.len() > 1 && runs[0].0 == runs.last().unwrap().0 {
        let last = runs.pop().unwrap();
        runs[0].1 = last.1;
    }
    if runs.iter().all(|r| r.0 == Sign::Zero) {
        return Err(Error::Pattern("weight vanishes identically".into()));
    }
    // plateau absorption
    let n_runs = runs.len();
    let relabeled: Vec<Sign> = (0..n_runs)
        .map(|i| {
            if runs[i].0 != Sign::Zero {
                return runs[i].0;
            }
            let prev = if i > 0 {
                Some(runs[i - 1].0)
            } else if periodic {
                Some(runs[n_runs - 1].0)
            } else {
                None
            };
            let next = if i + 1 < n_runs {
                Some(runs[i + 1].0)
            } else if periodic {
                Some(runs[0].0)
            } else {
                None
            };
            if prev == Some(Sign::Pos) || next == Some(Sign::Pos) {
                Sign::Pos
            } else {
                Sign::Neg
            }
        })
        .collect();
    let mut merged: Vec<(Sign, usize, usize)> = Vec::new();
    for (r, s) in runs.iter().zip(&relabeled) {
        match merged.last_mut() {
            Some(m) if m.0 == *s => m.2 = r.2,
            _ => merged.push((*s, r.1, r.2)),
        }
    }
    if periodic && merged.len() > 1 && merged[0].0 == merged.last().unwrap().0 {
        let last = merged.pop().unwrap();
        merged[0].1 = last.1;
    }
    let n_pos = merged.iter().filter(|r| r.0 == Sign::Pos).count();
    let n_neg = merged.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Pattern("not indefinite: weight has constant sign".into()));
    }

    let negative = |t: f64| w.evaluate(t) < -tol;
    // refine the flip of `negative` between sample j and the next sample
    let refine = |j: usize| -> Result<f64> {
        let mut lo = time(j);
        let mut hi = lo + h;
        let at_lo = negative(lo);
        if at_lo == negative(hi) {
            return Err(Error::Resolution(format!(
                "no sign flip between t = {lo} and t = {hi}"
            )));
        }
        for _ in 0..200 {
            if hi - lo <= tol * big_t.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if negative(mid) == at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    // boundaries: (time, is_sigma)
    let mut bounds: Vec<(f64, bool)> = Vec::new();
    for (i, r) in merged.iter().enumerate() {
        let is_last = i + 1 == merged.len();
        if is_last && !periodic {
            break;
        }
        // boundary after run r (between sample r.2 and r.2 + 1)
        let t = refine(r.2 % count)?;
        bounds.push((t, r.0 == Sign::Neg));
    }

    if periodic {
        let eps = 1e-9 * big_t;
        let norm = |x: f64| {
            let y = x.rem_euclid(big_t);
            if y >= big_t - eps {
                y - big_t
            } else {
                y
            }
        };
        let t0 = bounds
            .iter()
            .filter(|b| b.1)
            .map(|b| norm(b.0))
            .fold(f64::INFINITY, f64::min);
        let mut rel: Vec<(f64, bool)> = bounds
            .iter()
            .map(|&(t, s)| {
                let mut x = (t - t0).rem_euclid(big_t);
                if x >= big_t - eps {
                    x -= big_t;
                }
                (if x.abs() < eps { 0.0 } else { x }, s)
            })
            .collect();
        rel.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut sigma = Vec::new();
        let mut tau = Vec::new();
        for (x, s) in rel {
            if s {
                sigma.push(x);
            } else {
                tau.push(x);
            }
        }
        sigma.push(big_t);
        let m = tau.len();
        let p = SignPattern {
            m,
            sigma,
            tau,
            origin_shift: t0,
            span: big_t,
            periodic: true,
        };
        check_order(&p)?;
        Ok(p)
    } else {
        let mut sigma = Vec::new();
        let mut tau = Vec::new();
        if merged[0].0 == Sign::Pos {
            sigma.push(0.0);
        }
        for (t, s) in bounds {
            if s {
                sigma.push(t);
            } else {
                tau.push(t);
            }
        }
        if merged.last().unwrap().0 == Sign::Pos {
            tau.push(big_t);
        }
        sigma.push(big_t);
        let p = SignPattern {
            m: tau.len(),
            sigma,
            tau,
            origin_shift: 0.0,
            span: big_t,
            periodic: false,
        };
        check_order(&p)?;
        Ok(p)
    }
}

fn check_order(p: &SignPattern) -> Result<()> {
    if p.m == 0 || p.sigma.len() != p.m + 1 || p.tau.len() != p.m {
        return Err(Error::Resolution("inconsistent interval count".into()));
    }
    for i in 0..p.m {
        let ok_pos = p.sigma[i] < p.tau[i];
        let ok_neg = if p.periodic || i + 1 < p.m {
            p.tau[i] < p.sigma[i + 1]
        } else {
            p.tau[i] <= p.sigma[i + 1]
        };
        if !ok_pos || !ok_neg {
            return Err(Error::Resolution(format!(
                "interval endpoints out of order near hump {}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Sign pattern of a weight viewed as `k·T`-periodic, detected directly.
pub fn detect_extended(w: &WeightSpec, k: usize, tol: f64) -> Result<SignPattern> {
    let mut ext = w.clone();
    ext.period = w.period * k as f64;
    detect_with_samples(&ext, tol, DEFAULT_SAMPLES * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sin2pi() -> WeightSpec {
        WeightSpec::expression("sin(2*pi*t)", 1.0, true).unwrap()
    }

    #[test]
    fn evaluate_and_periodicity() {
        let w = sin2pi();
        assert!((w.evaluate(0.25) - 1.0).abs() < 1e-15);
        for &t in &[0.1, 0.37, 2.9, -0.4] {
            assert!((w.evaluate(t) - w.evaluate(t + 1.0)).abs() < 1e-12);
        }
        let tab = WeightSpec::table(vec![0.0, 0.5], vec![1.0, -3.0], 1.0).unwrap();
        assert_eq!(tab.evaluate(0.7), -3.0);
        assert_eq!(tab.evaluate(0.2), 1.0);
        assert_eq!(tab.evaluate(1.7), -3.0);
    }

    #[test]
    fn a_mu_combination() {
        let one = WeightSpec::expression("1", 1.0, true).unwrap();
        assert_eq!(a_mu(&one, 7.0, 0.3).unwrap(), 1.0);
        let minus = WeightSpec::expression("-1", 1.0, true).unwrap();
        assert_eq!(a_mu(&minus, 7.0, 0.3).unwrap(), -7.0);
        assert!((a_mu(&sin2pi(), 7.0, 0.75).unwrap() + 7.0).abs() < 1e-12);
        assert!(matches!(a_mu(&one, 0.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn single_hump_pattern() {
        let p = detect_sign_pattern(&sin2pi(), DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 1);
        assert!(p.sigma[0].abs() < 1e-10 && (p.sigma[1] - 1.0).abs() < 1e-10);
        assert!((p.tau[0] - 0.5).abs() < 1e-10);
        assert!(p.origin_shift.abs() < 1e-10);
    }

    #[test]
    fn cosine_needs_origin_shift() {
        let w = WeightSpec::expression("cos(2*t)", 2.0 * PI, true).unwrap();
        let p = detect_sign_pattern(&w, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 2);
        assert!((p.origin_shift - 0.75 * PI).abs() < 1e-10);
        assert!((p.tau[0] - PI / 2.0).abs() < 1e-10);
        assert!((p.sigma[1] - PI).abs() < 1e-10);
        p.check(&w, 1e-9).unwrap();
        let s = WeightSpec::sine(2.0, 2.0 * PI);
        let q = detect_sign_pattern(&s, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(q.m, 2);
        assert!(q.origin_shift.abs() < 1e-10);
    }

    #[test]
    fn neumann_interval_pattern() {
        let w = WeightSpec::expression("sin(3*pi*t)", 1.0, false).unwrap();
        let p = detect_sign_pattern(&w, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 2);
        let want_s = [0.0, 2.0 / 3.0, 1.0];
        let want_t = [1.0 / 3.0, 1.0];
        for (a, b) in p.sigma.iter().zip(want_s) {
            assert!((a - b).abs() < 1e-10, "{:?}", p.sigma);
        }
        for (a, b) in p.tau.iter().zip(want_t) {
            assert!((a - b).abs() < 1e-10, "{:?}", p.tau);
        }
        assert!(p.negative_before(0).is_none());
    }

    #[test]
    fn constant_sign_is_rejected() {
        let w = WeightSpec::expression("2+sin(t)", 2.0 * PI, true).unwrap();
        assert!(matches!(
            detect_sign_pattern(&w, DEFAULT_SIGN_TOL),
            Err(Error::Pattern(_))
        ));
    }

    #[test]
    fn zero_plateaus_join_positive_humps() {
        // +1 on [0, .3), 0 on [.3, .4), -1 on [.4, .6), 0 on [.6, .7), -2 on [.7, 1)
        let w = WeightSpec::table(
            vec![0.0, 0.3, 0.4, 0.6, 0.7],
            vec![1.0, 0.0, -1.0, 0.0, -2.0],
            1.0,
        )
        .unwrap();
        let p = detect_sign_pattern(&w, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 1);
        assert!((p.tau[0] - 0.4).abs() < 1e-10, "{p:?}");
        assert!(p.sigma[0].abs() < 1e-10);
        // a plateau sitting between a negative run and the next hump
        let w = WeightSpec::table(
            vec![0.0, 0.3, 0.6, 0.8],
            vec![1.0, -1.0, 0.0, 2.0],
            1.0,
        )
        .unwrap();
        let p = detect_sign_pattern(&w, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 1);
        // the hump [0.6, 1.3) (mod 1) starts the period
        assert!((p.origin_shift - 0.6).abs() < 1e-10, "{p:?}");
        assert!((p.tau[0] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn k_fold_translates() {
        let p = detect_sign_pattern(&sin2pi(), DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.k_fold(1), p);
        let q = p.k_fold(3);
        assert_eq!(q.m, 3);
        for i in 0..3 {
            assert!((q.sigma[i] - i as f64).abs() < 1e-10);
            assert!((q.tau[i] - (i as f64 + 0.5)).abs() < 1e-10);
        }
        assert!((q.span - 3.0).abs() < 1e-15);
    }

    #[test]
    fn k_fold_of_two_humps_interleaves() {
        let w = WeightSpec::expression("sin(4*pi*t) + 0.3*sin(2*pi*t)", 1.0, true).unwrap();
        let p = detect_sign_pattern(&w, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(p.m, 2);
        let q = p.k_fold(2);
        assert_eq!(q.m, 4);
        // direct construction check
        let want_sigma = [p.sigma[0], p.sigma[1], p.sigma[0] + 1.0, p.sigma[1] + 1.0, 2.0];
        let want_tau = [p.tau[0], p.tau[1], p.tau[0] + 1.0, p.tau[1] + 1.0];
        for (a, b) in q.sigma.iter().zip(want_sigma) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in q.tau.iter().zip(want_tau) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(q.sigma.windows(2).all(|w| w[0] < w[1]));
        let direct = detect_extended(&w, 2, DEFAULT_SIGN_TOL).unwrap();
        assert_eq!(direct.m, 4);
        for (a, b) in direct.sigma.iter().zip(&q.sigma) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in direct.tau.iter().zip(&q.tau) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn part_integrals_match_closed_forms() {
        let w = sin2pi();
        let pos = w.integral_positive(0.0, 1.0, &[0.5]);
        let neg = w.integral_negative(0.0, 1.0, &[0.5]);
        assert!((pos - 1.0 / PI).abs() < 1e-10 / PI);
        assert!((neg - 1.0 / PI).abs() < 1e-10 / PI);
        let w3 = WeightSpec::expression("sin(3*pi*t)", 1.0, false).unwrap();
        let pos = w3.integral_positive(0.0, 1.0, &[1.0 / 3.0, 2.0 / 3.0]);
        let neg = w3.integral_negative(0.0, 1.0, &[1.0 / 3.0, 2.0 / 3.0]);
        assert!((pos - 4.0 / (3.0 * PI)).abs() < 1e-10 * pos);
        assert!((neg - 2.0 / (3.0 * PI)).abs() < 1e-10 * neg);
    }

    #[test]
    fn dsl_round_trip() {
        for src in ["sin_pm(6.283185307179586, 2.0, 1.0)", "sin(2*pi*t)", "table(0.0:1.0, 0.5:-3.0)"] {
            let w = WeightSpec::parse(src, 1.0, true).unwrap();
            let back = WeightSpec::parse(&w.to_dsl(), 1.0, true).unwrap();
            assert_eq!(w, back);
        }
        assert!(WeightSpec::parse("sin(s)", 1.0, true).is_err());
        assert!(WeightSpec::parse("sin_pm(1, 2)", 1.0, true).is_err());
        assert!(WeightSpec::parse("table(0:1, 2:3)", 1.0, true).is_err());
    }
}
