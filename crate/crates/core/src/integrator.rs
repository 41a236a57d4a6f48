//! Dormand–Prince 5(4) integration of the planar system
//! `u' = y, y' = -c y - f̃(t, u)` with dense output. Steps never cross a weight
//! breakpoint: every σ_i and τ_i in the span is a node.

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::weight::{combine, detect_sign_pattern, SignPattern, WeightSpec, DEFAULT_SIGN_TOL};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: Option<f64>,
    /// Take uniform steps of this size with no error control.
    pub fixed_step: Option<f64>,
    /// Abort when the sum of absolute state components exceeds this.
    pub guard: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: None,
            fixed_step: None,
            guard: 1e8,
            max_steps: 2_000_000,
        }
    }
}

impl Tolerances {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Tolerances {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn fixed(h: f64) -> Self {
        Tolerances {
            fixed_step: Some(h),
            ..Default::default()
        }
    }

    /// Tolerances tightened by `factor`.
    pub fn tighter(&self, factor: f64) -> Self {
        Tolerances {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            ..*self
        }
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<const N: usize> {
    pub t: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn start(&self) -> [f64; N] {
        self.rc[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut out = self.rc[0];
        for i in 0..N {
            out[i] += self.rc[1][i];
        }
        out
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.rc;
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

#[inline]
fn axpy<const N: usize>(x: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *x;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn initial_step<const N: usize, F>(f: &F, t: f64, x: &[f64; N], f0: &[f64; N], tol: &Tolerances, hmax: f64) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = tol.atol + tol.rtol * x[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (x[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(hmax);
    let x1 = axpy(x, h, &[(1.0, f0)]);
    let f1 = f(t + h, &x1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = tol.atol + tol.rtol * x[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(hmax)
}

/// Integrate one smooth segment `[a, b]`.
fn segment<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    x0: [f64; N],
    tol: &Tolerances,
    steps: &mut usize,
    mut rec: Option<&mut Vec<Step<N>>>,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let len = b - a;
    if len <= 0.0 {
        return Ok(x0);
    }
    let hmax = tol.h_max.unwrap_or(len).min(len);
    let mut t = a;
    let mut x = x0;
    let mut k1 = f(t, &x);
    let mut h = match tol.fixed_step {
        Some(hf) => hf.min(len),
        None => initial_step(f, t, &x, &k1, tol, hmax),
    };
    let mut facold: f64 = 1e-4;
    let mut rejected = false;
    loop {
        *steps += 1;
        if *steps > tol.max_steps {
            return Err(Error::Divergence { t });
        }
        let mut last = false;
        if t + 1.01 * h >= b {
            h = b - t;
            last = true;
        }
        let k2 = f(t + C2 * h, &axpy(&x, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&x, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&x, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&x, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&x, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let x1 = axpy(&x, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &x1);

        let accept;
        let mut hnew;
        if tol.fixed_step.is_some() {
            accept = true;
            hnew = tol.fixed_step.unwrap();
        } else {
            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = tol.atol + tol.rtol * x[i].abs().max(x1[i].abs());
                err += (e / sk).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                accept = false;
                hnew = 0.1 * h;
            } else {
                let fac11 = err.powf(0.17);
                if err <= 1.0 {
                    accept = true;
                    let fac = (fac11 / facold.powf(0.04) / 0.9).clamp(0.2, 10.0);
                    hnew = h / fac;
                    facold = err.max(1e-4);
                } else {
                    accept = false;
                    hnew = h / (fac11 / 0.9).min(5.0);
                }
            }
        }
        hnew = hnew.min(hmax);
        if accept {
            if !x1.iter().all(|v| v.is_finite()) || x1.iter().map(|v| v.abs()).sum::<f64>() > tol.guard {
                return Err(Error::Divergence { t });
            }
            if let Some(r) = rec.as_deref_mut() {
                let mut rc = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = x1[i] - x[i];
                    let bspl = h * k1[i] - ydiff;
                    rc[0][i] = x[i];
                    rc[1][i] = ydiff;
                    rc[2][i] = bspl;
                    rc[3][i] = ydiff - h * k7[i] - bspl;
                    rc[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                r.push(Step { t, h, rc });
            }
            x = x1;
            k1 = k7;
            if last {
                return Ok(x);
            }
            t += h;
            if rejected {
                hnew = hnew.min(h);
            }
            rejected = false;
        } else {
            rejected = true;
        }
        h = hnew;
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Divergence { t });
        }
    }
}

/// Integrate `x' = f(t, x)` from `t0` to `t1`, restarting at every point of
/// `breaks` inside `(t0, t1)`. Accepted steps are appended to `rec`.
pub fn integrate_generic<const N: usize, F>(
    f: &F,
    t0: f64,
    x0: [f64; N],
    t1: f64,
    breaks: &[f64],
    tol: &Tolerances,
    mut rec: Option<&mut Vec<Step<N>>>,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if t1 < t0 {
        return Err(Error::Domain(format!("integration needs t0 < t1, got {t0} > {t1}")));
    }
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > t0 + 1e-13 * (1.0 + t0.abs()) && b < t1 - 1e-13 * (1.0 + t1.abs()))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.push(t1);
    let mut x = x0;
    let mut a = t0;
    let mut steps = 0;
    for b in pts {
        x = segment(f, a, b, x, tol, &mut steps, rec.as_deref_mut())?;
        a = b;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `u(0) = u(kT)`, `u'(0) = u'(kT)`.
    Periodic { k: usize },
    /// `u'(0) = u'(T) = 0`.
    Neumann,
}

/// `u'' + c u' + (a⁺ − μ a⁻) g(u) = 0` together with its boundary conditions.
/// Time is measured from the first σ of the pattern: `a(t)` below means
/// `weight(t + pattern.origin_shift)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub weight: WeightSpec,
    pub pattern: SignPattern,
    pub mu: f64,
    pub c: f64,
    pub g: NonlinearitySpec,
    pub boundary: Boundary,
}

impl ProblemSpec {
    /// Build a problem, detecting the sign pattern of the weight. Neumann
    /// problems use the non-periodic pattern on `[0, T]`.
    pub fn new(weight: WeightSpec, g: NonlinearitySpec, mu: f64, c: f64, boundary: Boundary) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if !c.is_finite() {
            return Err(Error::Config(format!("friction c must be finite, got {c}")));
        }
        if let Boundary::Periodic { k } = boundary {
            if k == 0 {
                return Err(Error::Config("k must be at least 1".into()));
            }
        }
        let mut w = weight;
        w.periodic = matches!(boundary, Boundary::Periodic { .. });
        let pattern = detect_sign_pattern(&w, DEFAULT_SIGN_TOL)?;
        Ok(ProblemSpec {
            weight: w,
            pattern,
            mu,
            c,
            g,
            boundary,
        })
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        ProblemSpec { mu, ..self.clone() }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        ProblemSpec {
            boundary,
            ..self.clone()
        }
    }

    pub fn k(&self) -> usize {
        match self.boundary {
            Boundary::Periodic { k } => k,
            Boundary::Neumann => 1,
        }
    }

    /// Length of the boundary value problem's interval.
    pub fn horizon(&self) -> f64 {
        self.pattern.span * self.k() as f64
    }

    /// The sign pattern over the full horizon.
    pub fn full_pattern(&self) -> SignPattern {
        self.pattern.k_fold(self.k())
    }

    #[inline]
    pub fn weight_at(&self, t: f64) -> f64 {
        self.weight.evaluate(t + self.pattern.origin_shift)
    }

    #[inline]
    pub fn a_mu(&self, t: f64) -> f64 {
        combine(self.weight_at(t), self.mu)
    }

    /// `f̃(t, s)`: `a_μ(t) g(s)` for `s ≥ 0` and `-s` for `s < 0`.
    #[inline]
    pub fn f_tilde(&self, t: f64, s: f64) -> f64 {
        if s >= 0.0 {
            let a = self.a_mu(t);
            if a == 0.0 {
                0.0
            } else {
                a * self.g.value(s)
            }
        } else {
            -s
        }
    }

    #[inline]
    pub fn extended_field(&self, t: f64, x: &[f64; 2]) -> [f64; 2] {
        [x[1], -self.c * x[1] - self.f_tilde(t, x[0])]
    }

    /// Nonsmooth points of the field inside `[t0, t1]`.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut b = self.pattern.breakpoints_in(t0, t1);
        let s = self.pattern.origin_shift;
        b.extend(
            self.weight
                .discontinuities(t0 + s, t1 + s)
                .into_iter()
                .map(|x| x - s),
        );
        b.sort_by(f64::total_cmp);
        b
    }

    /// State at `t1` starting from `x0` at `t0`, without recording.
    pub fn flow(&self, x0: [f64; 2], t0: f64, t1: f64, tol: &Tolerances) -> Result<[f64; 2]> {
        let f = |t: f64, x: &[f64; 2]| self.extended_field(t, x);
        integrate_generic(&f, t0, x0, t1, &self.breakpoints(t0, t1), tol, None)
    }

    /// `∂f̃/∂u`.
    #[inline]
    pub fn f_tilde_du(&self, t: f64, s: f64) -> f64 {
        if s >= 0.0 {
            let a = self.a_mu(t);
            if a == 0.0 {
                0.0
            } else {
                a * self.g.derivative(s)
            }
        } else {
            -1.0
        }
    }

    /// State at `t1` together with the Jacobian `∂x(t1)/∂x0`, from the
    /// variational equations.
    pub fn flow_with_jacobian(
        &self,
        x0: [f64; 2],
        t0: f64,
        t1: f64,
        tol: &Tolerances,
    ) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let c = self.c;
        let f = |t: f64, z: &[f64; 6]| {
            let fu = self.f_tilde_du(t, z[0]);
            [
                z[1],
                -c * z[1] - self.f_tilde(t, z[0]),
                z[3],
                -c * z[3] - fu * z[2],
                z[5],
                -c * z[5] - fu * z[4],
            ]
        };
        let z0 = [x0[0], x0[1], 1.0, 0.0, 0.0, 1.0];
        let mut vtol = *tol;
        vtol.guard = f64::INFINITY;
        let guard = tol.guard;
        let gf = |t: f64, z: &[f64; 6]| {
            if z[0].abs() + z[1].abs() > guard {
                [f64::NAN; 6]
            } else {
                f(t, z)
            }
        };
        let z = integrate_generic(&gf, t0, z0, t1, &self.breakpoints(t0, t1), &vtol, None)?;
        Ok(([z[0], z[1]], [[z[2], z[4]], [z[3], z[5]]]))
    }

    pub fn integrate(&self, x0: [f64; 2], t0: f64, t1: f64, tol: &Tolerances) -> Result<Trajectory> {
        let f = |t: f64, x: &[f64; 2]| self.extended_field(t, x);
        let breaks = self.breakpoints(t0, t1);
        let mut steps = Vec::new();
        integrate_generic(&f, t0, x0, t1, &breaks, tol, Some(&mut steps))?;
        let breakpoints_hit = breaks.into_iter().filter(|&b| b > t0 && b < t1).collect();
        Ok(Trajectory::new(steps, breakpoints_hit))
    }
}

/// Dense solution of the planar system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step<2>>,
    pub breakpoints_hit: Vec<f64>,
}

/// Order of the dense interpolant.
pub const INTERPOLATION_ORDER: usize = 4;

impl Trajectory {
    pub fn new(steps: Vec<Step<2>>, breakpoints_hit: Vec<f64>) -> Self {
        assert!(!steps.is_empty(), "empty trajectory");
        Trajectory {
            steps,
            breakpoints_hit,
        }
    }

    /// Join trajectories over consecutive intervals.
    pub fn concat(parts: Vec<Trajectory>) -> Self {
        let mut steps = Vec::new();
        let mut hits = Vec::new();
        let n = parts.len();
        for (i, part) in parts.into_iter().enumerate() {
            if i + 1 < n {
                hits.push(part.t1());
            }
            steps.extend(part.steps);
            hits.extend(part.breakpoints_hit);
        }
        hits.sort_by(f64::total_cmp);
        hits.dedup();
        Trajectory::new(steps, hits)
    }

    /// `u(t)` for the periodic extension with period `t1 - t0`.
    pub fn eval_periodic(&self, t: f64) -> [f64; 2] {
        let (a, b) = (self.t0(), self.t1());
        self.eval(a + (t - a).rem_euclid(b - a))
    }

    pub fn steps(&self) -> &[Step<2>] {
        &self.steps
    }

    pub fn t0(&self) -> f64 {
        self.steps[0].t
    }

    pub fn t1(&self) -> f64 {
        let s = self.steps.last().unwrap();
        s.t + s.h
    }

    pub fn times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.steps.iter().map(|s| s.t).collect();
        v.push(self.t1());
        v
    }

    pub fn states(&self) -> Vec<[f64; 2]> {
        let mut v: Vec<[f64; 2]> = self.steps.iter().map(|s| s.start()).collect();
        v.push(self.end_state());
        v
    }

    pub fn start_state(&self) -> [f64; 2] {
        self.steps[0].start()
    }

    pub fn end_state(&self) -> [f64; 2] {
        self.steps.last().unwrap().end()
    }

    fn step_index(&self, t: f64) -> usize {
        self.steps
            .partition_point(|s| s.t <= t)
            .saturating_sub(1)
            .min(self.steps.len() - 1)
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        self.steps[self.step_index(t)].eval(t)
    }

    /// `n + 1` equally spaced samples `(t, u, u')`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let (a, b) = (self.t0(), self.t1());
        (0..=n)
            .map(|i| {
                let t = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
                let x = self.eval(t);
                (t, x[0], x[1])
            })
            .collect()
    }

    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("t,u,up\n");
        for (t, u, y) in self.sample(n) {
            out.push_str(&format!("{t:.12e},{u:.12e},{y:.12e}\n"));
        }
        out
    }

    /// Maximum of `u` over `[lo, hi]`: node scan plus interior critical points
    /// located as sign changes of the interpolated `u'`.
    pub fn max_on_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, self.eval(lo)[0]);
        let mut consider = |t: f64, u: f64| {
            if u > best.1 {
                best = (t, u);
            }
        };
        let end = self.eval(hi);
        consider(hi, end[0]);
        let first = self.step_index(lo);
        for s in &self.steps[first..] {
            if s.t >= hi {
                break;
            }
            let a = s.t.max(lo);
            let b = (s.t + s.h).min(hi);
            if b <= a {
                continue;
            }
            let sub = 8;
            let mut ta = a;
            let mut ya = s.eval(ta)[1];
            for j in 1..=sub {
                let tb = if j == sub { b } else { a + (b - a) * j as f64 / sub as f64 };
                let yb = s.eval(tb)[1];
                consider(tb, s.eval(tb)[0]);
                if ya > 0.0 && yb <= 0.0 {
                    let (mut l, mut r) = (ta, tb);
                    for _ in 0..100 {
                        let m = 0.5 * (l + r);
                        if m <= l || m >= r {
                            break;
                        }
                        if s.eval(m)[1] > 0.0 {
                            l = m;
                        } else {
                            r = m;
                        }
                    }
                    let tm = 0.5 * (l + r);
                    consider(tm, s.eval(tm)[0]);
                }
                ta = tb;
                ya = yb;
            }
        }
        best
    }

    /// Minimum of `u` over `[lo, hi]`.
    pub fn min_on_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let neg = Trajectory {
            steps: self
                .steps
                .iter()
                .map(|s| {
                    let mut rc = s.rc;
                    for r in rc.iter_mut() {
                        r[0] = -r[0];
                        r[1] = -r[1];
                    }
                    Step { t: s.t, h: s.h, rc }
                })
                .collect(),
            breakpoints_hit: Vec::new(),
        };
        let (t, v) = neg.max_on_interval(lo, hi);
        (t, -v)
    }

    pub fn sup_norm(&self) -> f64 {
        let (_, mx) = self.max_on_interval(self.t0(), self.t1());
        let (_, mn) = self.min_on_interval(self.t0(), self.t1());
        mx.abs().max(mn.abs())
    }

    /// Check that `e^{ct} u'` is non-increasing on every positivity interval
    /// and non-decreasing on every negativity interval, at the step nodes.
    pub fn slope_monotone(&self, pattern: &SignPattern, c: f64, tol: f64) -> bool {
        let times = self.times();
        let states = self.states();
        let q: Vec<f64> = times
            .iter()
            .zip(&states)
            .map(|(t, x)| (c * t).exp() * x[1])
            .collect();
        let scale = q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..pattern.m {
            let (a, b) = pattern.positive(i);
            let (na, nb) = pattern.negative(i);
            for j in 1..times.len() {
                let (t0, t1) = (times[j - 1], times[j]);
                let d = q[j] - q[j - 1];
                if t0 >= a && t1 <= b && d > tol * scale {
                    return false;
                }
                if t0 >= na && t1 <= nb && d < -tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn const_problem(a: &str, g: &str, c: f64) -> ProblemSpec {
        // weight never changes sign, so build the struct directly
        let w = WeightSpec::expression(a, 1.0, true).unwrap();
        ProblemSpec {
            weight: w,
            pattern: SignPattern {
                m: 1,
                sigma: vec![0.0, 1.0],
                tau: vec![0.5],
                origin_shift: 0.0,
                span: 1.0,
                periodic: true,
            },
            mu: 1.0,
            c,
            g: NonlinearitySpec::parse(g).unwrap(),
            boundary: Boundary::Periodic { k: 1 },
        }
    }

    #[test]
    fn dense_output_coefficients() {
        // Hairer's contd5 weights reproduce the derivative at θ = 0
        let sum = D1 + D3 + D4 + D5 + D6 + D7;
        assert!(sum.abs() < 1e-12, "{sum}");
        assert!((A71 + A73 + A74 + A75 + A76 - 1.0).abs() < 1e-15);
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-15);
    }

    #[test]
    fn extended_field_branches() {
        let p = const_problem("1", "s^2", 0.0);
        assert_eq!(p.extended_field(0.3, &[0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(p.extended_field(0.3, &[-1.0, 0.0]), [0.0, -1.0]);
        assert_eq!(p.extended_field(0.3, &[2.0, 0.0]), [0.0, -4.0]);
        let q = const_problem("1", "s^2", 2.0);
        assert_eq!(q.extended_field(0.0, &[-1.0, 1.0]), [1.0, -3.0]);
    }

    #[test]
    fn free_motion_and_friction() {
        let p = const_problem("0", "s^2", 0.0);
        let tr = p.integrate([1.0, 1.0], 0.0, 1.0, &Tolerances::default()).unwrap();
        let e = tr.end_state();
        assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        let p = const_problem("0", "s^2", 1.0);
        let e = p.flow([0.0, 1.0], 0.0, 1.0, &Tolerances::default()).unwrap();
        assert!((e[1] - (-1f64).exp()).abs() < 1e-10);
        assert!((e[0] - (1.0 - (-1f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator() {
        let p = const_problem("1", "s", 0.0);
        let e = p.flow([1.0, 0.0], 0.0, PI / 2.0, &Tolerances::default()).unwrap();
        assert!(e[0].abs() < 1e-9 && (e[1] + 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn fifth_order_convergence() {
        let p = const_problem("1", "s", 0.0);
        let err = |h: f64| {
            // u stays positive on [0, 1.5], where the field is the harmonic one
            let e = p.flow([1.0, 0.0], 0.0, 1.5, &Tolerances::fixed(h)).unwrap();
            ((e[0] - 1.5f64.cos()).powi(2) + (e[1] + 1.5f64.sin()).powi(2)).sqrt()
        };
        let (e1, e2) = (err(0.25), err(0.125));
        let order = (e1 / e2).log2();
        assert!(order > 4.7 && order < 5.5, "order {order}");
    }

    #[test]
    fn steps_respect_breakpoints() {
        let w = WeightSpec::expression("sin(2*pi*t)", 1.0, true).unwrap();
        let p = ProblemSpec::new(
            w,
            NonlinearitySpec::power(2.0).unwrap(),
            3.0,
            0.2,
            Boundary::Periodic { k: 2 },
        )
        .unwrap();
        let tr = p.integrate([0.3, 0.1], 0.0, 2.0, &Tolerances::default()).unwrap();
        let times = tr.times();
        for b in [0.5, 1.0, 1.5] {
            assert!(times.iter().any(|t| (t - b).abs() < 1e-12), "{b} not a node");
            for s in tr.steps() {
                assert!(!(s.t < b - 1e-12 && s.t + s.h > b + 1e-12));
            }
        }
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.breakpoints_hit.len(), 3);
    }

    #[test]
    fn maxima() {
        let p = const_problem("1", "s", 0.0);
        // u = sin(t + 0.3): peak at π/2 - 0.3
        let tr = p
            .integrate([0.3f64.sin(), 0.3f64.cos()], 0.0, 3.0, &Tolerances::default())
            .unwrap();
        let (tm, um) = tr.max_on_interval(0.2, 2.5);
        assert!((tm - (PI / 2.0 - 0.3)).abs() < 1e-8, "{tm}");
        assert!((um - 1.0).abs() < 1e-10);
        let (tm, _) = tr.max_on_interval(0.0, 0.5);
        assert!((tm - 0.5).abs() < 1e-15);
        let flat = const_problem("0", "s", 0.0);
        let tr = flat.integrate([5.0, 0.0], 0.0, 1.0, &Tolerances::default()).unwrap();
        assert_eq!(tr.max_on_interval(0.25, 0.75), (0.25, 5.0));
    }

    #[test]
    fn blow_up_is_reported() {
        let p = const_problem("-1", "s^2", 0.0);
        match p.flow([10.0, 10.0], 0.0, 10.0, &Tolerances::default()) {
            Err(Error::Divergence { t }) => assert!(t > 0.0 && t < 10.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_export() {
        let p = const_problem("0", "s", 0.0);
        let tr = p.integrate([0.0, 1.0], 0.0, 1.0, &Tolerances::default()).unwrap();
        let csv = tr.to_csv(4);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,u,up");
        assert_eq!(lines.len(), 6);
        let last: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((last[0] - 1.0).abs() < 1e-12 && (last[1] - 1.0).abs() < 1e-12);
    }
}
