mod common;

use indefinite::subharmonic::{enumerate_class_representatives, find_coded_solution, minimal_period_multiple, rotation_equivalent, CodeTarget};

fn aperiodic(word: &[u8], m: usize) -> bool {
    let k = word.len() / m;
    (1..k).filter(|l| k % l == 0).all(|l| {
        let r: Vec<u8> = word[l * m..].iter().chain(&word[..l * m]).copied().collect();
        r != word
    })
}

#[test]
fn period_multiple_tracks_word_periodicity() {
    let p = common::preset_problem("fig2");
    let sc = common::search();
    for bits in ["01", "11", "0011", "0101", "011", "111"] {
        let tgt = CodeTarget::parse(1, bits).unwrap();
        let Some(rec) = find_coded_solution(&p, &tgt, &sc).unwrap() else {
            continue;
        };
        let pk = p.with_boundary(indefinite::integrator::Boundary::Periodic { k: tgt.k });
        assert_eq!(rec.code_string(), bits);
        assert_eq!(rec.min_period_multiple, minimal_period_multiple(&rec, &pk, 1e-6));
        assert_eq!(rec.min_period_multiple == tgt.k, aperiodic(&tgt.word, 1), "{bits}");
    }
}

#[test]
fn representatives_are_pairwise_inequivalent() {
    for (m, k) in [(1, 5), (2, 3), (3, 2)] {
        let reps = enumerate_class_representatives(m, k).unwrap();
        for (i, a) in reps.iter().enumerate() {
            assert!(a.canonical && aperiodic(&a.word, m));
            for b in &reps[i + 1..] {
                assert!(!rotation_equivalent(&a.word, &b.word, m));
            }
        }
    }
}

#[test]
fn found_representatives_have_distinct_classes() {
    let p = common::with_mu("fig2", 3.6e5);
    let sc = common::search().with_r_star(common::FIG2_R_STAR);
    let found: Vec<_> = enumerate_class_representatives(1, 4)
        .unwrap()
        .into_iter()
        .filter_map(|t| find_coded_solution(&p, &t, &sc).unwrap())
        .collect();
    assert_eq!(found.len(), 3);
    for (i, a) in found.iter().enumerate() {
        assert_eq!(a.min_period_multiple, 4);
        for b in &found[i + 1..] {
            assert!(!rotation_equivalent(&a.code, &b.code, 1));
        }
    }
}
