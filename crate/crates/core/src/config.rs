//! Run configuration in TOML, and the presets for the worked examples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{Boundary, ProblemSpec};
use crate::nonlinearity::NonlinearitySpec;
use crate::radial::{radial_to_1d, AnnulusProblem};
use crate::shooting::SearchConfig;
use crate::weight::WeightSpec;

pub const PRESETS: [&str; 5] = ["fig1", "fig2", "cor53", "cor51", "annulus"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Weight DSL: `sin_pm(freq, nu, mu)`, `table(x:v, …)` or an expression
    /// in `t`.
    pub weight: Option<String>,
    pub period: Option<f64>,
    /// Nonlinearity DSL: `power(p)`, `arctan_scaled(nu)`, `clamp0(expr)` or
    /// an expression in `s`.
    pub nonlinearity: Option<String>,
    pub mu: Option<f64>,
    pub c: Option<f64>,
    /// `"periodic"` or `"neumann"`.
    pub boundary: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchOverrides {
    pub u_range: Option<[f64; 2]>,
    pub u_count: Option<usize>,
    pub y_range: Option<[f64; 2]>,
    pub y_count: Option<usize>,
    pub neumann_range: Option<[f64; 2]>,
    pub neumann_count: Option<usize>,
    pub residual_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub code_threshold: Option<f64>,
    pub coded_words: Option<usize>,
    pub continuation_start: Option<f64>,
    pub nodes_per_period: Option<usize>,
    /// Supplied `R*` instead of the sweep estimate.
    pub r_star: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubharmonicConfig {
    pub word: Option<String>,
    pub enumerate: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub dim: Option<u32>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    /// Weight DSL in the radial variable.
    pub q: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path; standard output when absent.
    pub json: Option<String>,
    /// Directory for per-solution CSV files.
    pub csv_dir: Option<String>,
    /// Samples per CSV.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub search: SearchOverrides,
    #[serde(default)]
    pub subharmonic: SubharmonicConfig,
    #[serde(default)]
    pub annulus: AnnulusConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

macro_rules! merge {
    ($dst:expr, $src:expr; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.with_preset()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fill every field left unset from the named preset.
    pub fn with_preset(mut self) -> Result<Self> {
        let Some(name) = self.preset.clone() else {
            return Ok(self);
        };
        let base = preset(&name)?;
        merge!(self.problem, base.problem; weight, period, nonlinearity, mu, c, boundary, k);
        merge!(self.search, base.search; u_range, u_count, y_range, y_count, neumann_range, neumann_count,
            residual_tol, newton_max_iter, rtol, atol, code_threshold, coded_words, continuation_start,
            nodes_per_period, r_star);
        merge!(self.subharmonic, base.subharmonic; word, enumerate);
        merge!(self.annulus, base.annulus; dim, r1, r2, q);
        merge!(self.output, base.output; json, csv_dir, samples);
        Ok(self)
    }

    pub fn boundary(&self) -> Result<Boundary> {
        let k = self.problem.k.unwrap_or(1);
        match self.problem.boundary.as_deref().unwrap_or("periodic") {
            "periodic" => Ok(Boundary::Periodic { k }),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::Config(format!("boundary must be periodic or neumann, got '{other}'"))),
        }
    }

    /// The 1D problem; with an `[annulus]` section, its reduction.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        if self.annulus.q.is_some() {
            return radial_to_1d(&self.annulus_problem()?);
        }
        let pc = &self.problem;
        let src = pc.weight.as_deref().ok_or_else(|| Error::Config("problem.weight is required".into()))?;
        let period = pc.period.unwrap_or(1.0);
        let boundary = self.boundary()?;
        let weight = WeightSpec::parse(src, period, matches!(boundary, Boundary::Periodic { .. }))?;
        ProblemSpec::new(weight, self.nonlinearity()?, pc.mu.unwrap_or(1.0), pc.c.unwrap_or(0.0), boundary)
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        let src = self
            .problem
            .nonlinearity
            .as_deref()
            .ok_or_else(|| Error::Config("problem.nonlinearity is required".into()))?;
        NonlinearitySpec::parse(src)
    }

    pub fn search_config(&self) -> Result<SearchConfig> {
        let s = &self.search;
        let mut sc = SearchConfig::default();
        if let Some(r) = s.r_star {
            sc = sc.with_r_star(r);
        }
        if let Some([a, b]) = s.u_range {
            sc.u_range = (a, b);
        }
        if let Some([a, b]) = s.y_range {
            sc.y_range = (a, b);
        }
        if let Some([a, b]) = s.neumann_range {
            sc.neumann_range = (a, b);
        }
        sc.u_count = s.u_count.unwrap_or(sc.u_count);
        sc.y_count = s.y_count.unwrap_or(sc.y_count);
        sc.neumann_count = s.neumann_count.unwrap_or(sc.neumann_count);
        sc.residual_tol = s.residual_tol.unwrap_or(sc.residual_tol);
        sc.newton_max_iter = s.newton_max_iter.unwrap_or(sc.newton_max_iter);
        sc.tol.rtol = s.rtol.unwrap_or(sc.tol.rtol);
        sc.tol.atol = s.atol.unwrap_or(sc.tol.atol);
        sc.code_threshold = s.code_threshold.or(sc.code_threshold);
        sc.coded_words = s.coded_words.unwrap_or(sc.coded_words);
        sc.continuation_start = s.continuation_start.or(sc.continuation_start);
        sc.nodes_per_period = s.nodes_per_period.unwrap_or(sc.nodes_per_period);
        sc.validate()?;
        Ok(sc)
    }

    pub fn annulus_problem(&self) -> Result<AnnulusProblem> {
        let a = &self.annulus;
        let q = a.q.as_deref().ok_or_else(|| Error::Config("annulus.q is required".into()))?;
        let (r1, r2) = (a.r1.unwrap_or(1.0), a.r2.unwrap_or(2.0));
        let q = WeightSpec::parse(q, r2, false)?;
        AnnulusProblem::new(a.dim.unwrap_or(2), r1, r2, q, self.nonlinearity()?, self.problem.mu.unwrap_or(1.0))
    }

    pub fn samples(&self) -> usize {
        self.output.samples.unwrap_or(400)
    }
}

/// The configuration behind a preset name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let problem = |weight: &str, period: f64, g: &str, mu: f64, boundary: &str, k: usize| ProblemConfig {
        weight: Some(weight.into()),
        period: Some(period),
        nonlinearity: Some(g.into()),
        mu: Some(mu),
        c: Some(0.0),
        boundary: Some(boundary.into()),
        k: Some(k),
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut cfg = RunConfig {
        preset: Some(name.into()),
        ..Default::default()
    };
    match name {
        "fig1" => cfg.problem = problem("sin(3*pi*t)", 1.0, "arctan_scaled(100)", 7.0, "neumann", 1),
        "fig2" => cfg.problem = problem("sin(2*pi*t)", 1.0, "arctan_scaled(100)", 7.0, "periodic", 2),
        "cor53" => cfg.problem = problem("sin_pm(2, 1, 1)", two_pi, "power(2)", 6.0e5, "periodic", 1),
        "cor51" => cfg.problem = problem("sin_pm(3, 10, 1)", two_pi, "s*atan(s)", 2.0e5, "periodic", 1),
        "annulus" => {
            cfg.problem = ProblemConfig {
                nonlinearity: Some("power(2)".into()),
                mu: Some(2.0e6),
                boundary: Some("neumann".into()),
                ..Default::default()
            };
            cfg.annulus = AnnulusConfig {
                dim: Some(2),
                r1: Some(1.0),
                r2: Some(2.0),
                q: Some("sin(3*pi*(t-1))".into()),
            };
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let p = cfg.problem_spec().unwrap();
            assert!(p.pattern.m >= 1, "{name}");
        }
        let p = preset("cor53").unwrap().problem_spec().unwrap();
        assert_eq!(p.pattern.m, 2);
        assert!((p.pattern.origin_shift - 0.0).abs() < 1e-9);
        let p = preset("fig1").unwrap().problem_spec().unwrap();
        assert_eq!(p.pattern.m, 2);
        assert!((p.weight.evaluate(0.5) + 1.0).abs() < 1e-12);
        assert!(preset("nope").is_err());
    }

    #[test]
    fn file_overrides_preset() {
        let cfg = RunConfig::parse("preset = \"fig2\"\n[problem]\nmu = 9.5\nk = 3\n").unwrap();
        assert_eq!(cfg.problem.mu, Some(9.5));
        assert_eq!(cfg.problem.k, Some(3));
        assert_eq!(cfg.problem.weight.as_deref(), Some("sin(2*pi*t)"));
        assert!(RunConfig::parse("[problem]\nmoo = 1\n").is_err());
        assert!(RunConfig::parse("[problem]\nweight = \"t\"\nboundary = \"dirichlet\"\n")
            .unwrap()
            .boundary()
            .is_err());
    }

    #[test]
    fn search_overrides() {
        let cfg = RunConfig::parse("[search]\nu_count = 5\nr_star = 3.0\ncoded_words = 0\n").unwrap();
        let sc = cfg.search_config().unwrap();
        assert_eq!(sc.u_count, 5);
        assert_eq!(sc.coded_words, 0);
        assert!((sc.u_range.1 - 3.6).abs() < 1e-12);
    }
}
