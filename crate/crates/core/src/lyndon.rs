//! Möbius function, Witt's formula and Lyndon words.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word over the alphabet `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u32>,
    pub n: u32,
}

impl Word {
    pub fn new(symbols: Vec<u32>, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("alphabet must be nonempty".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= n) {
            return Err(Error::Domain(format!("symbol {s} outside alphabet of size {n}")));
        }
        Ok(Word { symbols, n })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.symbols {
            if self.n <= 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s},")?;
            }
        }
        Ok(())
    }
}

fn prime_factors(mut l: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= l {
        if l % p == 0 {
            let mut e = 0;
            while l % p == 0 {
                l /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if l > 1 {
        out.push((l, 1));
    }
    out
}

pub fn mobius(l: u64) -> Result<i32> {
    if l == 0 {
        return Err(Error::Domain("the Möbius function is defined for l ≥ 1".into()));
    }
    let f = prime_factors(l);
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

/// `S_n(k) = (1/k) Σ_{l | k} μ(l) n^{k/l}`.
pub fn witt_count(n: u64, k: u64) -> BigInt {
    if k == 0 {
        return BigInt::zero();
    }
    let mut sum = BigInt::zero();
    let base = BigInt::from(n);
    for l in (1..=k).filter(|l| k % l == 0) {
        let m = mobius(l).expect("l ≥ 1");
        if m != 0 {
            sum += base.pow((k / l) as u32) * m;
        }
    }
    sum / BigInt::from(k)
}

/// Inclusion-exclusion over the square-free products of the distinct primes
/// of `k`: `S_n(k) = (1/k) Σ_{J} (-1)^{|J|} n^{k / Π_{j∈J} p_j}`.
pub fn witt_count_factored(n: u64, k: u64) -> BigInt {
    if k == 0 {
        return BigInt::zero();
    }
    let primes: Vec<u64> = prime_factors(k).into_iter().map(|(p, _)| p).collect();
    let base = BigInt::from(n);
    let mut sum = BigInt::zero();
    for mask in 0u64..(1 << primes.len()) {
        let mut d = 1;
        for (i, p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d *= p;
            }
        }
        let term = base.pow((k / d) as u32);
        if mask.count_ones() % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum / BigInt::from(k)
}

/// All `n`-ary Lyndon words of length exactly `k`, in lexicographic order
/// (Fredricksen–Kessler–Maiorana generation).
pub fn lyndon_words(n: u32, k: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 || k == 0 {
        return out;
    }
    let mut w: Vec<u32> = vec![0];
    while !w.is_empty() {
        if w.len() == k {
            out.push(Word { symbols: w.clone(), n });
        }
        let len = w.len();
        while w.len() < k {
            let c = w[w.len() - len];
            w.push(c);
        }
        while w.last() == Some(&(n - 1)) {
            w.pop();
        }
        if let Some(last) = w.last_mut() {
            *last += 1;
        }
    }
    out
}

/// Lexicographically smallest rotation and whether the word is aperiodic.
pub fn canonical_rotation(w: &Word) -> (Word, bool) {
    let k = w.len();
    if k == 0 {
        return (w.clone(), false);
    }
    let rot = |r: usize| -> Vec<u32> { w.symbols[r..].iter().chain(&w.symbols[..r]).copied().collect() };
    let mut best = w.symbols.clone();
    let mut aperiodic = true;
    for r in 1..k {
        let x = rot(r);
        if x == w.symbols {
            aperiodic = false;
        }
        if x < best {
            best = x;
        }
    }
    (Word { symbols: best, n: w.n }, aperiodic)
}

/// Whether `w` is a Lyndon word: strictly smaller than all its nontrivial
/// rotations.
pub fn is_lyndon(w: &Word) -> bool {
    let (c, aperiodic) = canonical_rotation(w);
    aperiodic && c == *w
}

/// Count Lyndon words by brute force over all `n^k` words.
pub fn brute_force_count(n: u32, k: usize) -> u64 {
    let total = (n as u64).pow(k as u32);
    let mut count = 0;
    let mut symbols = vec![0u32; k];
    for mut v in 0..total {
        for s in symbols.iter_mut().rev() {
            *s = (v % n as u64) as u32;
            v /= n as u64;
        }
        if is_lyndon(&Word { symbols: symbols.clone(), n }) {
            count += 1;
        }
    }
    count
}

/// `Σ_{K ⊆ J} (-1)^{|K|}` for `|J| = size`.
pub fn subset_parity_sum(size: u32) -> i64 {
    (0u64..(1 << size)).map(|m| if m.count_ones() % 2 == 0 { 1 } else { -1 }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::new(s.bytes().map(|b| (b - b'0') as u32).collect(), 2).unwrap()
    }

    #[test]
    fn mobius_values() {
        let want = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, m) in want.iter().enumerate() {
            assert_eq!(mobius(i as u64 + 1).unwrap(), *m, "l = {}", i + 1);
        }
        assert!(mobius(0).is_err());
    }

    #[test]
    fn small_counts() {
        assert_eq!(witt_count(2, 2), BigInt::from(1));
        assert_eq!(witt_count(2, 12), BigInt::from(335));
        assert_eq!(witt_count_factored(2, 12), BigInt::from(335));
        assert_eq!(witt_count(5, 7), BigInt::from((5u64.pow(7) - 5) / 7));
        assert_eq!(witt_count(2, 1), BigInt::from(2));
        // 2^80 overflows u64
        assert!(witt_count(4, 40) > BigInt::from(u64::MAX));
    }

    #[test]
    fn generation() {
        let l: Vec<String> = lyndon_words(2, 4).iter().map(|x| x.to_string()).collect();
        assert_eq!(l, ["0001", "0011", "0111"]);
        let l: Vec<String> = lyndon_words(2, 1).iter().map(|x| x.to_string()).collect();
        assert_eq!(l, ["0", "1"]);
        assert_eq!(lyndon_words(2, 2).len(), 1);
    }

    #[test]
    fn rotations() {
        assert_eq!(canonical_rotation(&w("1100")), (w("0011"), true));
        assert_eq!(canonical_rotation(&w("0101")), (w("0101"), false));
        assert_eq!(canonical_rotation(&w("0000")), (w("0000"), false));
        assert!(Word::new(vec![2], 2).is_err());
    }

    #[test]
    fn parity() {
        assert_eq!(subset_parity_sum(0), 1);
        for s in 1..=12 {
            assert_eq!(subset_parity_sum(s), 0);
        }
    }
}
