//! Radially symmetric Neumann problems on annuli, reduced to the 1D
//! Neumann problem by `t = h(r) = ∫_{R1}^r ξ^{1-N} dξ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{integrate_generic, Boundary, ProblemSpec, Step, Tolerances, Trajectory};
use crate::nonlinearity::NonlinearitySpec;
use crate::quad;
use crate::shooting::{find_neumann_solutions, SearchConfig, SolutionRecord};
use crate::weight::{combine, detect_sign_pattern, WeightKind, WeightSpec, DEFAULT_SIGN_TOL};

/// `h(r) = ∫_{R1}^r ξ^{1-N} dξ`.
pub fn t_of_radius(dim: u32, r1: f64, r: f64) -> f64 {
    match dim {
        1 => r - r1,
        2 => (r / r1).ln(),
        _ => {
            let e = 2.0 - dim as f64;
            (r.powf(e) - r1.powf(e)) / e
        }
    }
}

/// Inverse of [`t_of_radius`].
pub fn radius_of(dim: u32, r1: f64, t: f64) -> f64 {
    match dim {
        1 => r1 + t,
        2 => r1 * t.exp(),
        _ => {
            let e = 2.0 - dim as f64;
            (r1.powf(e) + e * t).powf(1.0 / e)
        }
    }
}

/// `Δu + q_μ(|x|) g(u) = 0` on `R1 < |x| < R2` in dimension `N` with zero
/// normal derivative; `q` is given in the radial variable on `[R1, R2]`.
/// The sign pattern is only required once the problem is reduced.
#[derive(Debug, Clone)]
pub struct AnnulusProblem {
    pub dim: u32,
    pub r1: f64,
    pub r2: f64,
    pub q: WeightSpec,
    pub g: NonlinearitySpec,
    pub mu: f64,
}

impl AnnulusProblem {
    pub fn new(dim: u32, r1: f64, r2: f64, q: WeightSpec, g: NonlinearitySpec, mu: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("dimension must be at least 2, got {dim}")));
        }
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(Error::Config(format!("need 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")));
        }
        if !(mu > 0.0) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        let mut q = q;
        q.periodic = false;
        Ok(AnnulusProblem { dim, r1, r2, q, g, mu })
    }

    /// Length of the transformed interval, `h(R2)`.
    pub fn t_end(&self) -> f64 {
        t_of_radius(self.dim, self.r1, self.r2)
    }

    pub fn radius(&self, t: f64) -> f64 {
        radius_of(self.dim, self.r1, t)
    }

    pub fn time(&self, r: f64) -> f64 {
        t_of_radius(self.dim, self.r1, r)
    }

    /// `a(t) = r(t)^{2(N-1)} Q(r(t))` on `[0, h(R2)]`.
    pub fn transformed_weight(&self) -> WeightSpec {
        WeightSpec {
            kind: WeightKind::Radial {
                dim: self.dim,
                r1: self.r1,
                q: Box::new(self.q.clone()),
            },
            period: self.t_end(),
            periodic: false,
        }
    }

    fn q_mu(&self, r: f64) -> f64 {
        combine(self.q.evaluate(r), self.mu)
    }
}

/// The 1D Neumann problem on `[0, h(R2)]` with `c = 0` and the transformed
/// weight.
pub fn radial_to_1d(ap: &AnnulusProblem) -> Result<ProblemSpec> {
    ProblemSpec::new(ap.transformed_weight(), ap.g.clone(), ap.mu, 0.0, Boundary::Neumann)
}

/// Samples `(r, U(r))` of `U(r) = v(h(r))` on `n` uniformly spaced radii.
pub fn solution_to_radial(v: &Trajectory, ap: &AnnulusProblem, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let r = ap.r1 + (ap.r2 - ap.r1) * i as f64 / (n - 1) as f64;
            let t = ap.time(r).clamp(v.t0(), v.t1());
            (r, v.eval(t)[0])
        })
        .collect()
}

/// `∫_{R1}^{R2} r^{N-1} Q_μ(r) dr`; the sign of `∫_Ω q_μ`.
pub fn check_q_integral(ap: &AnnulusProblem) -> f64 {
    let breaks = q_breakpoints(ap);
    let n1 = ap.dim as i32 - 1;
    let f = |r: f64| r.powi(n1) * ap.q_mu(r);
    let size = quad::simpson_split(|r| f(r).abs(), ap.r1, ap.r2, &breaks, 1e-6);
    quad::simpson_split(f, ap.r1, ap.r2, &breaks, 1e-13 * size.max(1.0))
}

/// Sign changes and discontinuities of `Q` inside `(R1, R2)`.
fn q_breakpoints(ap: &AnnulusProblem) -> Vec<f64> {
    let Ok(pat) = detect_sign_pattern(&ap.transformed_weight(), DEFAULT_SIGN_TOL) else {
        return Vec::new();
    };
    let mut b: Vec<f64> = pat.breakpoints().into_iter().map(|t| ap.radius(t)).collect();
    b.extend(ap.q.discontinuities(ap.r1, ap.r2));
    b.retain(|&r| r > ap.r1 && r < ap.r2);
    b.sort_by(f64::total_cmp);
    b
}

/// Direct integration of `U'' + (N-1)/r U' + Q_μ(r) g(U) = 0` from
/// `U(R1) = u0`, `U'(R1) = 0`; negative values use the same extension as the
/// 1D field, `-U r^{-2(N-1)}`. Returns `(r, U, U')` at the accepted steps.
pub fn integrate_radial(ap: &AnnulusProblem, u0: f64, tol: &Tolerances) -> Result<Vec<(f64, f64, f64)>> {
    let n1 = (ap.dim - 1) as f64;
    let f = |r: f64, x: &[f64; 2]| {
        let force = if x[0] >= 0.0 {
            ap.q_mu(r) * ap.g.value(x[0])
        } else {
            -x[0] * r.powf(-2.0 * n1)
        };
        [x[1], -n1 / r * x[1] - force]
    };
    let mut steps: Vec<Step<2>> = Vec::new();
    integrate_generic(&f, ap.r1, [u0, 0.0], ap.r2, &q_breakpoints(ap), tol, Some(&mut steps))?;
    let mut out: Vec<(f64, f64, f64)> = steps.iter().map(|s| (s.t, s.start()[0], s.start()[1])).collect();
    if let Some(s) = steps.last() {
        let e = s.end();
        out.push((s.t + s.h, e[0], e[1]));
    }
    Ok(out)
}

/// Largest `|U(r) - v(h(r))|` between the direct radial integration and the
/// 1D solution from `v(0) = u0`, `v'(0) = 0`, over the direct integrator's
/// step radii.
pub fn equivalence_gap(ap: &AnnulusProblem, u0: f64, tol: &Tolerances) -> Result<f64> {
    let p = radial_to_1d(ap)?;
    let v = p.integrate([u0, 0.0], 0.0, ap.t_end(), tol)?;
    let direct = integrate_radial(ap, u0, tol)?;
    Ok(direct
        .iter()
        .map(|&(r, u, _)| (u - v.eval(ap.time(r).clamp(0.0, ap.t_end()))[0]).abs())
        .fold(0.0, f64::max))
}

/// A positive radial Neumann solution and its profile.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub record: SolutionRecord,
    /// `(r, U(r))` samples.
    pub profile: Vec<(f64, f64)>,
}

/// Positive radial solutions via the 1D Neumann search.
pub fn find_radial_solutions(ap: &AnnulusProblem, sc: &SearchConfig, samples: usize) -> Result<Vec<RadialProfile>> {
    let p = radial_to_1d(ap)?;
    Ok(find_neumann_solutions(&p, sc)?
        .into_iter()
        .map(|record| {
            let profile = solution_to_radial(&record.trajectory, ap, samples);
            RadialProfile { record, profile }
        })
        .collect())
}

/// CSV with header `r,U`.
pub fn profile_csv(profile: &[(f64, f64)]) -> String {
    let mut s = String::from("r,U\n");
    for (r, u) in profile {
        s.push_str(&format!("{r:.12e},{u:.12e}\n"));
    }
    s
}
