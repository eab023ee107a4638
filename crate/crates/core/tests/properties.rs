use proptest::prelude::*;

use flc_spectra::correlation::autocorr_symbolic;
use flc_spectra::delone::{locator_set, Cluster};
use flc_spectra::factors::{apply_block_map, indicator_block_map, verify_factor_equivariance, BlockMap};
use flc_spectra::modelset::{silver_mean_chain, QuadraticInt};
use flc_spectra::subshift::{
    dictionary, fixed_point_window, word_frequency_empirical, Letter, SubstitutionRule, SymbolicWindow, BUILTIN_RULES,
};
use flc_spectra::Complex64;

fn window(name: &str, half: usize) -> (SubstitutionRule, SymbolicWindow) {
    let rule = SubstitutionRule::builtin(name).unwrap();
    let w = fixed_point_window(&rule, 0, half, SubstitutionRule::builtin_weights(name).unwrap()).unwrap();
    (rule, w)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_is_positive_definite(
        rule in 0usize..BUILTIN_RULES.len(),
        c in prop::collection::vec(complex(), 1..=8),
    ) {
        let (_, w) = window(BUILTIN_RULES[rule], 1 << 11);
        let eta = autocorr_symbolic(&w, 8).unwrap();
        prop_assert!(eta.quadratic_form(&c) >= -1e-9);
        for m in 0..=8 {
            prop_assert_eq!(eta.get(-m), eta.get(m).conj());
        }
    }

    #[test]
    fn indicators_partition_unity(rule in 0usize..BUILTIN_RULES.len(), len in 1usize..=3, n in -4i64..=4) {
        let (r, w) = window(BUILTIN_RULES[rule], 256);
        let words = dictionary(&w, len).unwrap();
        let mut total: Option<Vec<Complex64>> = None;
        for word in words.iter().filter(|x| x.len() == len) {
            let g = indicator_block_map(word, n, r.alphabet_size()).unwrap();
            let y = apply_block_map(&w, &g).unwrap();
            prop_assert!(y.values().iter().all(|v| *v == Complex64::new(0.0, 0.0) || *v == Complex64::new(1.0, 0.0)));
            let vals = y.values();
            total = Some(match total {
                None => vals,
                Some(t) => t.iter().zip(&vals).map(|(a, b)| a + b).collect(),
            });
        }
        prop_assert!(total.unwrap().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn composition_matches_sequential(
        m1 in -2i64..=2, m2 in -2i64..=2,
        t1 in prop::collection::vec(0u8..2, 4), t2 in prop::collection::vec(0u8..2, 4),
    ) {
        let (_, w) = window("thue-morse", 512);
        let mk = |m: i64, t: &[u8]| {
            let entries = [[0u8, 0], [0, 1], [1, 0], [1, 1]]
                .iter()
                .zip(t)
                .map(|(word, &v)| (word.to_vec(), Complex64::new(v as f64, 0.0)))
                .collect::<Vec<_>>();
            BlockMap::from_values(m, 2, 2, entries).unwrap()
        };
        let g1 = mk(m1, &t1);
        // second map reads output letters of the first
        let inner = apply_block_map(&w, &g1).unwrap();
        let g2 = {
            let ids: Vec<Vec<Letter>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
            let out = g1.outputs().len();
            let entries = ids
                .into_iter()
                .filter(|word| word.iter().all(|&l| (l as usize) < out))
                .zip(&t2)
                .map(|(word, &v)| (word, Complex64::new(v as f64, 0.0)))
                .collect::<Vec<_>>();
            BlockMap::from_values(m2, 2, out, entries).unwrap()
        };
        let Ok(seq) = apply_block_map(&inner, &g2) else { return Ok(()) };
        let composed = g1.compose(&g2).unwrap();
        let direct = apply_block_map(&w, &composed).unwrap();
        for n in seq.lo().max(direct.lo())..=seq.hi().min(direct.hi()) {
            let a = seq.weights()[seq.letter_at(n).unwrap() as usize];
            let b = direct.weights()[direct.letter_at(n).unwrap() as usize];
            prop_assert_eq!(a, b, "n = {}", n);
        }
    }

    #[test]
    fn block_maps_commute_with_shift(rule in 0usize..3, n in -3i64..=3, word_idx in 0usize..8) {
        let (r, w) = window(BUILTIN_RULES[rule], 1 << 11);
        let words: Vec<_> = dictionary(&w, 3).unwrap().into_iter().collect();
        let g = indicator_block_map(&words[word_idx % words.len()], n, r.alphabet_size()).unwrap();
        let rep = verify_factor_equivariance(&w, &g, -32..=32);
        prop_assert!(rep.passed());
        prop_assert_eq!(rep.shifts_tested.len(), 65);
    }

    #[test]
    fn locator_sets_translate(a in -50i64..50, b in -50i64..50, which in 0usize..3) {
        let sm = silver_mean_chain(3000).unwrap();
        let clusters = [
            vec![QuadraticInt::ZERO],
            vec![QuadraticInt::new(-1, 0), QuadraticInt::ZERO],
            vec![QuadraticInt::ZERO, QuadraticInt::ONE],
        ];
        let c = Cluster::new_exact(1.1, clusters[which].clone()).unwrap();
        let t = QuadraticInt::new(a, b);
        let lhs = locator_set(&sm.translate_exact(t).unwrap(), &c).unwrap();
        let rhs: Vec<QuadraticInt> = locator_set(&sm, &c).unwrap().exact().unwrap().iter().map(|&x| x + t).collect();
        prop_assert_eq!(lhs.exact().unwrap(), rhs.as_slice());
    }
}

#[test]
fn dictionaries_are_factorial() {
    for name in BUILTIN_RULES {
        let (_, w) = window(name, 1 << 10);
        let d = dictionary(&w, 5).unwrap();
        for word in &d {
            for i in 0..word.len() {
                for j in i + 1..=word.len() {
                    assert!(d.contains(&word[i..j]), "{name}");
                }
            }
        }
    }
}

#[test]
fn frequency_convergence_trend() {
    let rule = SubstitutionRule::builtin("fibonacci").unwrap();
    let ab = rule.word_from_str("aba").unwrap();
    let (_, w) = window("fibonacci", 1 << 16);
    let f = |len: i64| word_frequency_empirical(&w.slice(0, len - 1).unwrap(), &ab).unwrap().0;
    let diffs: Vec<f64> = (12..16).map(|j| (f(1 << (j + 1)) - f(1 << j)).abs()).collect();
    // decreasing in trend: last difference below the first
    assert!(diffs[3] < diffs[0], "{diffs:?}");
}
