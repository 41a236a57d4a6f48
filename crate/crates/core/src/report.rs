//! Command dispatch, JSON reports and CSV artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{compute_mu_star_with, BoundsReport};
use crate::config::RunConfig;
use crate::eigen::hump_eigenvalues;
use crate::error::{Error, Result};
use crate::integrator::{Boundary, ProblemSpec};
use crate::lyndon::{lyndon_words, witt_count};
use crate::radial::{check_q_integral, find_radial_solutions, profile_csv};
use crate::shooting::{find_neumann_solutions, find_periodic_solutions, verify_solution, SolutionRecord, Verification};
use crate::subharmonic::{class_table, find_coded_solution, CodeTarget};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Solve,
    Neumann,
    Subharmonic,
    Lyndon { n: u32, k: usize, list: bool },
    Eigen,
    Radial,
    /// Bounds, eigenvalues and the solution search in one document.
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Solve => "solve",
            Command::Neumann => "neumann",
            Command::Subharmonic => "subharmonic",
            Command::Lyndon { .. } => "lyndon",
            Command::Eigen => "eigen",
            Command::Radial => "radial",
            Command::Report => "report",
        }
    }
}

/// A record with its code string and a posteriori checks.
#[derive(Debug, Clone, Serialize)]
pub struct CheckedRecord {
    #[serde(flatten)]
    pub record: SolutionRecord,
    pub verification: Verification,
    /// Trajectory CSV, when written.
    pub csv: Option<String>,
}

/// The outcome of [`run`]: the JSON document and the files written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub json: Value,
    pub files: Vec<PathBuf>,
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<RunOutput> {
    let mut files = Vec::new();
    let result = match cmd {
        Command::Lyndon { n, k, list } => lyndon_json(*n, *k, *list)?,
        Command::Bounds => serde_json::to_value(bounds(cfg)?)?,
        Command::Eigen => serde_json::to_value(hump_eigenvalues(&cfg.problem_spec()?)?)?,
        Command::Solve => {
            let p = periodic(cfg)?;
            let k = p.k();
            let sc = cfg.search_config()?;
            let recs = find_periodic_solutions(&p, k, &sc)?;
            json!({ "k": k, "solutions": checked(&p, recs, cfg, &mut files)? })
        }
        Command::Neumann => {
            let p = cfg.problem_spec()?;
            if p.boundary != Boundary::Neumann {
                return Err(Error::Config("neumann needs problem.boundary = \"neumann\"".into()));
            }
            let recs = find_neumann_solutions(&p, &cfg.search_config()?)?;
            json!({ "solutions": checked(&p, recs, cfg, &mut files)? })
        }
        Command::Subharmonic => subharmonic(cfg, &mut files)?,
        Command::Radial => radial(cfg, &mut files)?,
        Command::Report => {
            let p = cfg.problem_spec()?;
            let b = bounds(cfg)?;
            let eig = hump_eigenvalues(&p)?;
            let sc = cfg.search_config()?.with_r_star(b.r_star);
            let recs = match p.boundary {
                Boundary::Neumann => find_neumann_solutions(&p, &sc)?,
                Boundary::Periodic { k } => find_periodic_solutions(&p, k, &sc)?,
            };
            let mut cfg = cfg.clone();
            cfg.search.r_star = Some(b.r_star);
            let sols = checked(&p, recs, &cfg, &mut files)?;
            json!({
                "mu": p.mu,
                "above_mu_star": p.mu > b.mu_star,
                "bounds": b,
                "eigenvalues": eig,
                "solutions": sols,
            })
        }
    };
    let json = json!({
        "command": cmd.name(),
        "version": VERSION,
        "config": cfg,
        "result": result,
    });
    if let Some(path) = &cfg.output.json {
        write(Path::new(path), &serde_json::to_string_pretty(&json)?)?;
        files.push(PathBuf::from(path));
    }
    Ok(RunOutput { json, files })
}

/// Structured error document printed on failure.
pub fn error_json(e: &Error) -> Value {
    json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
        "version": VERSION,
    })
}

fn bounds(cfg: &RunConfig) -> Result<BoundsReport> {
    compute_mu_star_with(&cfg.problem_spec()?, cfg.search.r_star)
}

fn periodic(cfg: &RunConfig) -> Result<ProblemSpec> {
    let p = cfg.problem_spec()?;
    match p.boundary {
        Boundary::Periodic { .. } => Ok(p),
        Boundary::Neumann => Err(Error::Config("this command needs problem.boundary = \"periodic\"".into())),
    }
}

fn lyndon_json(n: u32, k: usize, list: bool) -> Result<Value> {
    if n < 1 || k < 1 {
        return Err(Error::Domain(format!("need n ≥ 1 and k ≥ 1, got n = {n}, k = {k}")));
    }
    let count = witt_count(n as u64, k as u64);
    let mut v = json!({ "n": n, "k": k, "count": count.to_string() });
    if list {
        let words: Vec<String> = lyndon_words(n, k)
            .iter()
            .map(|w| w.symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(if n > 10 { "," } else { "" }))
            .collect();
        v["words"] = json!(words);
    }
    Ok(v)
}

fn subharmonic(cfg: &RunConfig, files: &mut Vec<PathBuf>) -> Result<Value> {
    let p = periodic(cfg)?;
    let sc = cfg.search_config()?;
    let m = p.pattern.m;
    if cfg.subharmonic.enumerate.unwrap_or(false) {
        let k = p.k();
        let table = class_table(&p, k, &sc)?;
        let mut rows = Vec::new();
        for e in table {
            let rec = match e.record {
                Some(r) => checked(&p, vec![r], cfg, files)?.pop(),
                None => None,
            };
            rows.push(json!({
                "target": e.target,
                "found": e.found,
                "min_period_multiple": e.min_period_multiple,
                "record": rec,
            }));
        }
        return Ok(json!({ "k": k, "classes": rows.len(), "table": rows }));
    }
    let word = cfg
        .subharmonic
        .word
        .as_deref()
        .ok_or_else(|| Error::Config("subharmonic needs a word or enumerate = true".into()))?;
    let tgt = CodeTarget::parse(m, word)?;
    let rec = find_coded_solution(&p, &tgt, &sc)?;
    let rec = match rec {
        Some(r) => checked(&p, vec![r], cfg, files)?.pop(),
        None => None,
    };
    Ok(json!({
        "k": tgt.k,
        "target": tgt.bits(),
        "canonical": tgt.canonical,
        "found": rec.is_some(),
        "record": rec,
    }))
}

fn radial(cfg: &RunConfig, files: &mut Vec<PathBuf>) -> Result<Value> {
    let ap = cfg.annulus_problem()?;
    let sc = cfg.search_config()?;
    let profiles = find_radial_solutions(&ap, &sc, cfg.samples())?;
    let mut out = Vec::new();
    for (i, pr) in profiles.iter().enumerate() {
        let csv = match &cfg.output.csv_dir {
            Some(dir) => {
                let path = Path::new(dir).join(format!("radial_{i}_{}.csv", pr.record.code_string()));
                write(&path, &profile_csv(&pr.profile))?;
                files.push(path.clone());
                Some(path.display().to_string())
            }
            None => None,
        };
        out.push(json!({
            "code": pr.record.code_string(),
            "u_at_r1": pr.record.initial[0],
            "residual": pr.record.residual,
            "sup_norm": pr.record.sup_norm,
            "positive": pr.record.positive,
            "csv": csv,
        }));
    }
    Ok(json!({
        "dim": ap.dim,
        "r1": ap.r1,
        "r2": ap.r2,
        "t_end": ap.t_end(),
        "q_integral": check_q_integral(&ap),
        "profiles": out,
    }))
}

fn checked(p: &ProblemSpec, recs: Vec<SolutionRecord>, cfg: &RunConfig, files: &mut Vec<PathBuf>) -> Result<Vec<CheckedRecord>> {
    let mut out = Vec::with_capacity(recs.len());
    for (i, record) in recs.into_iter().enumerate() {
        let verification = verify_solution(&record, p, cfg.search.r_star);
        let code = record.code_string();
        let csv = match &cfg.output.csv_dir {
            Some(dir) => {
                let path = Path::new(dir).join(format!("solution_{i}_{code}.csv"));
                write(&path, &record.trajectory.to_csv(cfg.samples()))?;
                files.push(path.clone());
                Some(path.display().to_string())
            }
            None => None,
        };
        out.push(CheckedRecord { record, verification, csv });
    }
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyndon_command() {
        let out = run(&Command::Lyndon { n: 2, k: 7, list: false }, &RunConfig::default()).unwrap();
        assert_eq!(out.json["result"]["count"], "18");
        assert_eq!(out.json["version"], VERSION);
        let out = run(&Command::Lyndon { n: 2, k: 4, list: true }, &RunConfig::default()).unwrap();
        assert_eq!(out.json["result"]["words"], json!(["0001", "0011", "0111"]));
    }

    #[test]
    fn errors_carry_exit_codes() {
        let e = run(&Command::Bounds, &RunConfig::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(error_json(&e)["exit_code"], 2);
    }

    #[test]
    fn eigen_and_bounds_embed_config() {
        let cfg = RunConfig::parse("preset = \"fig2\"\n[search]\nr_star = 2.0\n").unwrap();
        let out = run(&Command::Eigen, &cfg).unwrap();
        assert_eq!(out.json["result"].as_array().unwrap().len(), 1);
        assert_eq!(out.json["config"]["preset"], "fig2");
        let out = run(&Command::Bounds, &cfg).unwrap();
        assert!(out.json["result"]["mu_star"].as_f64().unwrap() > 7.0);
    }
}
