mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use indefinite::bounds::{compute_mu_star, compute_mu_star_with, BoundsReport};
use indefinite::eigen::{first_eigenvalue, Bc, EigenProblem};
use indefinite::integrator::{Boundary, ProblemSpec, Tolerances};
use indefinite::lyndon::{brute_force_count, witt_count, witt_count_factored};
use indefinite::radial::{equivalence_gap, find_radial_solutions, radius_of, t_of_radius, AnnulusProblem};
use indefinite::shooting::{
    circle, find_neumann_solutions, find_periodic_solutions, poincare_axis_crossings, rectangle, verify_solution,
    winding_number, SearchConfig, SolutionRecord,
};
use indefinite::subharmonic::{class_table, enumerate_class_representatives};
use indefinite::weight::WeightSpec;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass: cond, detail: detail.into() }
}

/// Records gathered along the way for the invariant suite.
#[derive(Default)]
struct Pool {
    entries: Vec<(String, ProblemSpec, SolutionRecord, Option<f64>)>,
    cor53: Option<BoundsReport>,
}

impl Pool {
    fn add(&mut self, tag: &str, p: &ProblemSpec, recs: &[SolutionRecord], r_star: Option<f64>) {
        for r in recs {
            self.entries.push((tag.to_string(), p.clone(), r.clone(), r_star));
        }
    }
}

fn codes(recs: &[SolutionRecord]) -> BTreeSet<String> {
    recs.iter().map(|r| r.code_string()).collect()
}

fn lyndon() -> Outcome {
    let s2 = [1u64, 2, 3, 6, 9, 18, 30, 56, 99];
    let s4 = [6u64, 20, 60, 204, 670, 2340, 8160, 29120, 104754];
    let mut bad = Vec::new();
    for k in 2..=10u64 {
        if witt_count(2, k) != s2[k as usize - 2].into() {
            bad.push(format!("S2({k})"));
        }
        if witt_count(4, k) != s4[k as usize - 2].into() {
            bad.push(format!("S4({k})"));
        }
    }
    for n in 2..=4u32 {
        for k in 1..=10usize {
            let w = witt_count(n as u64, k as u64);
            if w != witt_count_factored(n as u64, k as u64) || w != brute_force_count(n, k).into() {
                bad.push(format!("n={n} k={k}"));
            }
        }
    }
    check(bad.is_empty(), format!("S2, S4 tables and three-way agreement; mismatches {bad:?}"))
}

fn eigen() -> Outcome {
    let one = WeightSpec::expression("1", 1.0, false).unwrap();
    let l0 = first_eigenvalue(&EigenProblem::new(one.clone(), 0.0, 1.0, 0.0, Bc::Dirichlet, Bc::Dirichlet).unwrap()).unwrap();
    let l1 = first_eigenvalue(&EigenProblem::new(one, 0.0, 1.0, 1.0, Bc::Dirichlet, Bc::Dirichlet).unwrap()).unwrap();
    let pi2 = PI * PI;
    let e0 = (l0 - pi2).abs() / pi2;
    let e1 = (l1 - pi2 - 0.25).abs() / (pi2 + 0.25);
    let w = WeightSpec::expression("sin(3*pi*t)", 1.0, false).unwrap();
    let hump = first_eigenvalue(&EigenProblem::new(w, 0.0, 1.0 / 3.0, 0.0, Bc::Dirichlet, Bc::Dirichlet).unwrap()).unwrap();
    let fd = fd_extrapolated(&|t| (3.0 * PI * t).sin(), 0.0, 1.0 / 3.0, 400);
    let e2 = (hump - fd).abs() / fd;
    check(
        e0 < 1e-8 && e1 < 1e-8 && e2 < 1e-6,
        format!("rel. errors: pi^2 {e0:.1e}, pi^2+1/4 {e1:.1e}, sin(3 pi t) hump {hump:.10} vs FD {fd:.10} ({e2:.1e})"),
    )
}

fn figure1(pool: &mut Pool) -> Outcome {
    let p = preset_problem("fig1");
    let recs = find_neumann_solutions(&p, &search()).unwrap();
    let positive: Vec<_> = recs.iter().filter(|r| r.positive).cloned().collect();
    let end_slope = positive
        .iter()
        .map(|r| r.trajectory.end_state()[1].abs())
        .fold(0.0, f64::max);
    let want: BTreeSet<String> = ["10", "01", "11"].iter().map(|s| s.to_string()).collect();
    let got = codes(&positive);
    let crossings = poincare_axis_crossings(&p, 0.0, 0.2, 400, &Tolerances::with_tol(1e-11, 1e-14));
    let r_star = compute_mu_star(&p).map(|b| b.r_star).ok();
    pool.add("fig1", &p, &positive, r_star);
    check(
        positive.len() == 3 && end_slope < 1e-8 && got == want && crossings == 3,
        format!(
            "{} positive, codes {got:?}, max |u'(1)| {end_slope:.1e}, axis crossings {crossings}",
            positive.len()
        ),
    )
}

fn figure2(pool: &mut Pool) -> Outcome {
    let p = preset_problem("fig2");
    let recs = find_periodic_solutions(&p, 2, &search()).unwrap();
    let positive: Vec<_> = recs.iter().filter(|r| r.positive).cloned().collect();
    let by = |c: &str| positive.iter().find(|r| r.code_string() == c);
    let shift = match (by("01"), by("10")) {
        (Some(a), Some(b)) => (0..=2000)
            .map(|i| {
                let t = 2.0 * i as f64 / 2000.0;
                (a.trajectory.eval(t)[0] - b.trajectory.eval_periodic(t + 1.0)[0]).abs()
            })
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    let mpm11 = by("11").map(|r| r.min_period_multiple);
    let classes = witt_count(2, 2);
    let r_star = compute_mu_star(&p).map(|b| b.r_star).ok();
    pool.add("fig2", &p.with_boundary(Boundary::Periodic { k: 2 }), &positive, r_star);
    check(
        positive.len() == 3 && classes == 1.into() && shift < 1e-6 && mpm11 == Some(1),
        format!(
            "{} positive, codes {:?}, S2(2) = {classes}, sup|u01(t) - u10(t+1)| {shift:.1e}, period multiple of 11 {mpm11:?}",
            positive.len(),
            codes(&positive)
        ),
    )
}

fn multiplicity(pool: &mut Pool) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let cases: [(&str, ProblemSpec, usize); 2] =
        [("m=2", preset_problem("cor53"), 3), ("m=3", three_hump(7.0e5), 7)];
    for (tag, p, need) in cases {
        let b = compute_mu_star(&p).unwrap();
        let q = p.with_mu(1.05 * b.mu_star);
        let sc = search().with_r_star(b.r_star);
        let recs = find_periodic_solutions(&q, 1, &sc).unwrap();
        let positive: Vec<_> = recs.iter().filter(|r| r.positive).cloned().collect();
        let distinct = codes(&positive).len();
        pass &= distinct >= need;
        details.push(format!("{tag}: mu* {:.4e}, {distinct} distinct codes (need {need})", b.mu_star));
        pool.add(tag, &q, &positive, Some(b.r_star));
        if tag == "m=2" {
            pool.cor53 = Some(b);
        }
    }
    check(pass, details.join("; "))
}

fn invariants(pool: &Pool) -> Outcome {
    let mut failed = Vec::new();
    for (tag, p, rec, r_star) in &pool.entries {
        let v = verify_solution(rec, p, *r_star);
        if !v.passed() {
            failed.push(format!("{tag} {} {v:?}", rec.code_string()));
        }
    }
    check(
        failed.is_empty() && !pool.entries.is_empty(),
        format!("{} of {} records pass {failed:?}", pool.entries.len() - failed.len(), pool.entries.len()),
    )
}

fn bounds_consistency(pool: &Pool) -> Outcome {
    let mut bad = Vec::new();
    for name in ["fig1", "fig2", "cor51"] {
        match compute_mu_star(&preset_problem(name)) {
            Ok(b) if b.violations().is_empty() => {}
            Ok(b) => bad.push(format!("{name}: {:?}", b.violations())),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    match &pool.cor53 {
        Some(b) if b.violations().is_empty() => {}
        Some(b) => bad.push(format!("cor53: {:?}", b.violations())),
        None => bad.push("cor53: no report".into()),
    }
    let p = preset_problem("fig2").with_boundary(Boundary::Periodic { k: 1 });
    let b1 = compute_mu_star_with(&p, Some(FIG2_R_STAR)).unwrap();
    let b4 = compute_mu_star_with(&p.with_boundary(Boundary::Periodic { k: 4 }), Some(FIG2_R_STAR)).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let mut worst = rel(b1.r, b4.r)
        .max(rel(b1.k0, b4.k0))
        .max(rel(b1.mu_r, b4.mu_r))
        .max(rel(b1.mu_star, b4.mu_star));
    for (i, (mp, mm)) in b4.mu_plus.iter().zip(&b4.mu_minus).enumerate() {
        let j = i % b1.mu_plus.len();
        for (x, y) in [(mp, &b1.mu_plus[j]), (mm, &b1.mu_minus[j])] {
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max(rel(*x, *y)),
                _ => worst = f64::INFINITY,
            }
        }
    }
    check(
        bad.is_empty() && worst < 1e-8,
        format!("violations {bad:?}; k=1 vs k=4 worst relative gap {worst:.1e}"),
    )
}

fn winding() -> Outcome {
    let p = preset_problem("fig2");
    let recs: Vec<_> = find_periodic_solutions(&p, 1, &search())
        .unwrap()
        .into_iter()
        .filter(|r| r.positive)
        .collect();
    let fixed: Vec<[f64; 2]> = recs.iter().map(|r| r.initial).chain([[0.0, 0.0]]).collect();
    let tol = 1e-12;
    let mut indices = Vec::new();
    for r in &recs {
        let x = r.initial;
        let gap = fixed
            .iter()
            .filter(|y| **y != x)
            .map(|y| (y[0] - x[0]).hypot(y[1] - x[1]))
            .fold(f64::INFINITY, f64::min);
        indices.push(winding_number(&p, 1, &circle(x, 0.3 * gap, 32), tol).unwrap());
    }
    let around = !indices.is_empty() && indices.iter().all(|i| i.abs() == 1);
    let sup = recs.iter().map(|r| r.sup_norm).fold(0.0, f64::max);
    let far = winding_number(&p, 1, &circle([3.0 * sup + 1.0, 0.0], 0.5, 32), tol).unwrap();
    // a box around the first solution, cut off-centre into four
    let x = recs[0].initial;
    let (lo, hi) = ([0.5 * x[0], x[1] - 0.37 * x[0].max(0.05)], [1.43 * x[0], x[1] + 0.41 * x[0].max(0.05)]);
    let cut = [x[0] * 1.013 + 1e-4, x[1] - 0.021 * x[0].max(0.05)];
    let whole = winding_number(&p, 1, &rectangle(lo, hi, 16), tol);
    let parts: indefinite::Result<Vec<i64>> = [
        (lo, cut),
        ([cut[0], lo[1]], [hi[0], cut[1]]),
        ([lo[0], cut[1]], [cut[0], hi[1]]),
        (cut, hi),
    ]
    .into_iter()
    .map(|(a, b)| winding_number(&p, 1, &rectangle(a, b, 16), tol))
    .collect();
    let additive = match (&whole, &parts) {
        (Ok(w), Ok(ps)) => *w == ps.iter().sum::<i64>(),
        _ => false,
    };
    check(
        around && far == 0 && additive,
        format!("indices {indices:?}, zero-free circle {far}, box {whole:?} = sum {parts:?}"),
    )
}

fn radial(pool: &mut Pool) -> Outcome {
    let mut cf = 0.0f64;
    for r in [1.0, 1.3, 2.0, 2.7] {
        cf = cf.max((t_of_radius(2, 1.0, r) - r.ln()).abs());
        cf = cf.max((t_of_radius(3, 1.0, r) - (1.0 - 1.0 / r)).abs());
    }
    for t in [0.0, 0.2, 0.5] {
        cf = cf.max((radius_of(2, 1.0, t) - t.exp()).abs());
        cf = cf.max((radius_of(3, 1.0, t) - 1.0 / (1.0 - t)).abs());
    }
    let cfg = indefinite::config::preset("annulus").unwrap();
    let ap = cfg.annulus_problem().unwrap();
    let mild = AnnulusProblem::new(3, 1.0, 2.0, ap.q.clone(), ap.g.clone(), 20.0).unwrap();
    let gap = equivalence_gap(&mild, 0.8, &Tolerances::with_tol(1e-12, 1e-14)).unwrap();
    let p1 = indefinite::radial::radial_to_1d(&ap).unwrap();
    let b = compute_mu_star(&p1).unwrap();
    let sc = SearchConfig::default();
    let profiles = find_radial_solutions(&ap, &sc, 200).unwrap();
    let positive: Vec<_> = profiles.iter().filter(|pr| pr.record.positive).map(|pr| pr.record.clone()).collect();
    let n = codes(&positive).len();
    pool.add("radial", &p1, &positive, Some(b.r_star));
    check(
        cf < 1e-10 && gap < 1e-7 && n >= 3 && ap.mu > b.mu_star,
        format!(
            "closed forms {cf:.1e}, direct vs reduced {gap:.1e}, {n} profiles at mu {:.3e} (mu* {:.3e})",
            ap.mu, b.mu_star
        ),
    )
}

fn subharmonics(pool: &mut Pool) -> Outcome {
    let p = preset_problem("fig2").with_boundary(Boundary::Periodic { k: 1 });
    let b = compute_mu_star(&p).unwrap();
    let q = p.with_mu(1.1 * b.mu_star);
    let sc = search().with_r_star(b.r_star);
    let reps = enumerate_class_representatives(1, 3).unwrap();
    let table = class_table(&q, 3, &sc).unwrap();
    let ok = reps.len() == 2
        && table.len() == 2
        && table.iter().all(|e| e.found && e.min_period_multiple == Some(3));
    let q3 = q.with_boundary(Boundary::Periodic { k: 3 });
    let recs: Vec<_> = table.iter().filter_map(|e| e.record.clone()).collect();
    pool.add("k=3", &q3, &recs, Some(b.r_star));
    let rows: Vec<String> = table
        .iter()
        .map(|e| format!("{}: {} ({:?})", e.target, if e.found { "found" } else { "absent" }, e.min_period_multiple))
        .collect();
    check(ok, format!("mu {:.3e} > mu* {:.3e}; {}", q.mu, b.mu_star, rows.join(", ")))
}

fn main() {
    let mut pool = Pool::default();
    type Criterion<'a> = (&'a str, Duration, Box<dyn FnOnce(&mut Pool) -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("lyndon counts", Duration::from_secs(1), Box::new(|_| lyndon())),
        ("eigenvalues", Duration::from_secs(5), Box::new(|_| eigen())),
        ("figure 1", Duration::from_secs(30), Box::new(figure1)),
        ("figure 2", Duration::from_secs(60), Box::new(figure2)),
        ("multiplicity", Duration::from_secs(120), Box::new(multiplicity)),
        ("subharmonic enumeration", Duration::from_secs(120), Box::new(subharmonics)),
        ("radial", Duration::from_secs(60), Box::new(radial)),
        ("invariant suite", Duration::MAX, Box::new(|p: &mut Pool| invariants(p))),
        ("bounds consistency", Duration::MAX, Box::new(|p: &mut Pool| bounds_consistency(p))),
        ("degree proxy", Duration::MAX, Box::new(|_| winding())),
    ];
    let numbers = [1, 2, 3, 4, 5, 10, 9, 6, 7, 8];
    let mut lines = Vec::new();
    let mut all = true;
    for ((name, budget, f), no) in criteria.into_iter().zip(numbers) {
        let start = Instant::now();
        let out = f(&mut pool);
        let took = start.elapsed();
        let pass = out.pass && took <= budget;
        all &= pass;
        let line = format!(
            "criterion {no:>2} {:<4} {name} ({:.2} s): {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
        println!("{line}");
        lines.push((no, line));
    }
    lines.sort_by_key(|l| l.0);
    println!("\nsummary");
    for (_, l) in &lines {
        println!("{}", l.split(':').next().unwrap_or(l));
    }
    if !all {
        std::process::exit(1);
    }
}
