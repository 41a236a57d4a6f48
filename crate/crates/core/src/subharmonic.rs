//! Subharmonic solutions with a prescribed code, minimal periods, and one
//! representative code per subharmonic class.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{Boundary, ProblemSpec};
use crate::lyndon::lyndon_words;
use crate::shooting::{
    assign_codes, build_record, continuation_start, find_periodic_solutions, gap_threshold, seed_base, solve_coded,
    SearchConfig, SeedBase, SolutionRecord,
};

/// A binary code over the `m·k` humps of `[0, kT]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeTarget {
    pub k: usize,
    pub word: Vec<u8>,
    /// Lexicographically minimal among its rotations by multiples of `m`.
    pub canonical: bool,
}

impl CodeTarget {
    pub fn new(m: usize, word: Vec<u8>) -> Result<Self> {
        if m == 0 || word.is_empty() || word.len() % m != 0 {
            return Err(Error::Config(format!(
                "word length {} is not a positive multiple of m = {m}",
                word.len()
            )));
        }
        if word.iter().any(|&b| b > 1) {
            return Err(Error::Config("words are made of bits 0 and 1".into()));
        }
        if word.iter().all(|&b| b == 0) {
            return Err(Error::Config("the all-zero word codes the trivial solution".into()));
        }
        let k = word.len() / m;
        let canonical = (1..k).all(|r| rotate(&word, r * m) >= word);
        Ok(CodeTarget { k, word, canonical })
    }

    pub fn parse(m: usize, bits: &str) -> Result<Self> {
        let word = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("bad bit {c:?} in word {bits:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        CodeTarget::new(m, word)
    }

    pub fn bits(&self) -> String {
        self.word.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

fn rotate(w: &[u8], r: usize) -> Vec<u8> {
    w[r..].iter().chain(&w[..r]).copied().collect()
}

/// Whether two codes agree up to a rotation by a multiple of `m`.
pub fn rotation_equivalent(a: &[u8], b: &[u8], m: usize) -> bool {
    a.len() == b.len() && (0..a.len().max(1) / m.max(1)).any(|r| rotate(a, r * m) == b)
}

/// Smallest divisor `l` of `k` with `sup |u(t + lT) - u(t)| < tol`.
pub fn minimal_period_multiple(rec: &SolutionRecord, p: &ProblemSpec, tol: f64) -> usize {
    let k = rec.k;
    let span = p.pattern.span;
    let traj = &rec.trajectory;
    let times: Vec<f64> = traj
        .steps()
        .iter()
        .flat_map(|s| [s.t, s.t + 0.5 * s.h])
        .chain([traj.t1()])
        .collect();
    for l in (1..k).filter(|l| k % l == 0) {
        let shift = l as f64 * span;
        let close = times
            .iter()
            .all(|&t| (traj.eval_periodic(t + shift)[0] - traj.eval(t)[0]).abs() < tol);
        if close {
            return l;
        }
    }
    k
}

/// Solution of `p` (periodic, `k = tgt.k`) whose code is `tgt.word`. Tries
/// the coded seed first, then the full periodic search.
pub fn find_coded_solution(p: &ProblemSpec, tgt: &CodeTarget, sc: &SearchConfig) -> Result<Option<SolutionRecord>> {
    if tgt.word.len() != p.pattern.m * tgt.k {
        return Err(Error::Config(format!(
            "word length {} does not match m·k = {}",
            tgt.word.len(),
            p.pattern.m * tgt.k
        )));
    }
    let pk = match p.boundary {
        Boundary::Periodic { .. } => p.with_boundary(Boundary::Periodic { k: tgt.k }),
        Boundary::Neumann => return Err(Error::Config("coded solutions need a periodic problem".into())),
    };
    let mu0 = continuation_start(&pk, sc);
    if let Some(base) = seed_base(&pk, mu0, sc) {
        if let Some(rec) = coded_record(&pk, &base, tgt, mu0, sc) {
            return Ok(Some(rec));
        }
    }
    let all = find_periodic_solutions(&pk, tgt.k, sc)?;
    Ok(all.into_iter().find(|r| r.code == tgt.word))
}

fn coded_record(
    pk: &ProblemSpec,
    base: &SeedBase,
    tgt: &CodeTarget,
    mu0: f64,
    sc: &SearchConfig,
) -> Option<SolutionRecord> {
    let (sh, res) = solve_coded(pk, base, &tgt.word, mu0, sc)?;
    let mut rec = build_record(pk, &sh, res, "coded", &sc.tol).ok()?;
    if !rec.positive {
        return None;
    }
    let mut one = vec![rec];
    let threshold = sc
        .code_threshold
        .or_else(|| gap_threshold(&one))
        .unwrap_or(0.0);
    assign_codes(&mut one, threshold);
    rec = one.pop()?;
    rec.min_period_multiple = minimal_period_multiple(&rec, pk, 1e-6 * (1.0 + rec.sup_norm));
    (rec.code == tgt.word).then_some(rec)
}

/// One canonical target per subharmonic class of order `k`: the `2^m`-ary
/// Lyndon words of length `k`, each symbol written as `m` bits.
pub fn enumerate_class_representatives(m: usize, k: usize) -> Result<Vec<CodeTarget>> {
    if m == 0 || k < 2 {
        return Err(Error::Domain(format!("need m ≥ 1 and k ≥ 2, got m = {m}, k = {k}")));
    }
    if m > 16 {
        return Err(Error::Domain("alphabets beyond 2^16 symbols are not supported".into()));
    }
    lyndon_words(1 << m, k)
        .into_iter()
        .map(|w| {
            let bits = w
                .symbols
                .iter()
                .flat_map(|&s| (0..m).rev().map(move |i| ((s >> i) & 1) as u8))
                .collect();
            CodeTarget::new(m, bits)
        })
        .collect()
}

/// Finite-horizon stand-in for a coded bounded solution: the periodic
/// solution whose code repeats `word` `2·horizon + 1` times.
pub fn coded_orbit_segment(
    p: &ProblemSpec,
    word: &[u8],
    horizon: usize,
    sc: &SearchConfig,
) -> Result<Option<SolutionRecord>> {
    let reps = 2 * horizon + 1;
    let full: Vec<u8> = (0..reps).flat_map(|_| word.iter().copied()).collect();
    let tgt = CodeTarget::new(p.pattern.m, full)?;
    find_coded_solution(p, &tgt, sc)
}

/// Targets of a class table together with what the search found.
#[derive(Debug, Clone, Serialize)]
pub struct ClassEntry {
    pub target: String,
    pub found: bool,
    pub min_period_multiple: Option<usize>,
    pub record: Option<SolutionRecord>,
}

pub fn class_table(p: &ProblemSpec, k: usize, sc: &SearchConfig) -> Result<Vec<ClassEntry>> {
    enumerate_class_representatives(p.pattern.m, k)?
        .into_iter()
        .map(|t| {
            let rec = find_coded_solution(p, &t, sc)?;
            Ok(ClassEntry {
                target: t.bits(),
                found: rec.is_some(),
                min_period_multiple: rec.as_ref().map(|r| r.min_period_multiple),
                record: rec,
            })
        })
        .collect()
}
