//! Library results against independent oracles: naive sums, recursions and
//! hand-derived values.

use std::f64::consts::PI;

use flc_spectra::correlation::{
    autocorr_pointset, autocorr_symbolic, autocorr_via_spectral_inner, regularised_autocorr,
};
use flc_spectra::delone::{smooth_comb, BumpFunction, PointSet1D};
use flc_spectra::factors::{apply_block_map, indicator_block_map, BlockMap};
use flc_spectra::modelset::{intensity_at, is_extinct, silver_mean_chain, weighted_silver_comb, FourierModuleElement};
use flc_spectra::spectral::{detect_atoms, intensity_estimate, ExponentialSum, Frequency};
use flc_spectra::subshift::{
    fixed_point_window, letter_frequencies_pf, word_frequency_empirical, SubstitutionRule, SymbolicWindow,
};
use flc_spectra::Complex64;

fn window(name: &str, half: usize) -> SymbolicWindow {
    let rule = SubstitutionRule::builtin(name).unwrap();
    fixed_point_window(&rule, 0, half, SubstitutionRule::builtin_weights(name).unwrap()).unwrap()
}

/// `η(m)` for the ±1 Thue–Morse comb from `η(0) = 1`, `η(2m) = η(m)`,
/// `η(2m+1) = -(η(m) + η(m+1))/2`. Odd lags depend on themselves through
/// `m = 0`, so the table is filled by fixed-point iteration.
fn tm_recursion(m_max: usize) -> Vec<f64> {
    let mut eta = vec![0.0; 2 * m_max + 2];
    eta[0] = 1.0;
    for _ in 0..200 {
        for m in 1..eta.len() {
            eta[m] = if m % 2 == 0 {
                eta[m / 2]
            } else {
                let h = m / 2;
                -(eta[h] + eta.get(h + 1).copied().unwrap_or(0.0)) / 2.0
            };
        }
    }
    eta.truncate(m_max + 1);
    eta
}

#[test]
fn thue_morse_matches_recursion() {
    let w = window("thue-morse", 1 << 16);
    let eta = autocorr_symbolic(&w, 16).unwrap();
    let oracle = tm_recursion(16);
    assert!((oracle[1] + 1.0 / 3.0).abs() < 1e-12);
    for (m, &o) in oracle.iter().enumerate() {
        assert!((eta.get(m as i64).re - o).abs() < 1e-3, "m = {m}");
    }
}

#[test]
fn naive_average_agrees() {
    let w = window("rudin-shapiro", 1 << 10);
    let y = w.values();
    let eta = autocorr_symbolic(&w, 10).unwrap();
    for m in -10i64..=10 {
        let mut s = Complex64::new(0.0, 0.0);
        let mut c = 0;
        for n in 0..y.len() as i64 {
            let j = n + m;
            if (0..y.len() as i64).contains(&j) {
                s += y[n as usize].conj() * y[j as usize];
                c += 1;
            }
        }
        assert!((eta.get(m) - s / c as f64).norm() < 1e-12, "m = {m}");
    }
}

#[test]
fn period_doubling_eta0_is_letter_frequency() {
    let w = window("period-doubling", 1 << 16);
    let eta = autocorr_symbolic(&w, 8).unwrap();
    assert!((eta.get(0).re - 2.0 / 3.0).abs() < 1e-3);
    let pf = letter_frequencies_pf(&SubstitutionRule::builtin("period-doubling").unwrap()).unwrap();
    assert!((eta.get(0).re - pf[0]).abs() < 1e-3);
    for m in 1..=8 {
        assert!(eta.get(m).norm() <= eta.get(0).re + 1e-15);
    }
}

#[test]
fn fibonacci_ab_indicator() {
    let rule = SubstitutionRule::builtin("fibonacci").unwrap();
    let w = window("fibonacci", 1 << 16);
    let ab = rule.word_from_str("ab").unwrap();
    let g = indicator_block_map(&ab, 0, 2).unwrap();
    let eta = autocorr_via_spectral_inner(&w, &g, 4).unwrap();
    let (f, _) = word_frequency_empirical(&w, &ab).unwrap();
    assert!((eta.get(0).re - 0.381966).abs() < 1e-3);
    assert!((eta.get(0).re - f).abs() < 2.0 / w.len() as f64);
}

#[test]
fn xor_factor_routes_agree() {
    let w = window("thue-morse", 1 << 15);
    let g = BlockMap::xor();
    let a = autocorr_via_spectral_inner(&w, &g, 16).unwrap();
    let b = autocorr_symbolic(&apply_block_map(&w, &g).unwrap(), 16).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-12);
}

fn naive_intensity(pts: &[f64], weights: &[Complex64], k: f64, norm: f64) -> f64 {
    let s: Complex64 = pts
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * Complex64::from_polar(1.0, -2.0 * PI * k * x))
        .sum();
    (s / norm).norm_sqr()
}

#[test]
fn point_intensity_against_naive_sum() {
    let sm = silver_mean_chain(3000).unwrap();
    let r = sm.available_size() / 2.0;
    let end = sm.points().partition_point(|&x| x < 2.0 * r);
    for (a, b) in [(1, 0), (0, 1), (3, -1), (-2, 2)] {
        let k = FourierModuleElement::new(a, b);
        let got = intensity_at(&sm, k, r).unwrap();
        let want = naive_intensity(&sm.points()[..end], &sm.weights()[..end], k.value(), 2.0 * r);
        assert!((got - want).abs() < 1e-9, "({a},{b})");
        let neg = intensity_estimate(&sm, Frequency::Module(k).neg(), r).unwrap();
        assert!((got - neg).abs() < 1e-12);
    }
}

#[test]
fn symbolic_intensity_against_naive_sum() {
    let w = window("period-doubling", 1 << 10);
    let pts: Vec<f64> = (w.lo()..w.lo() + 1024).map(|n| n as f64).collect();
    let ys = w.values()[..1024].to_vec();
    for k in [0.0, 0.25, 1.0 / 3.0, 0.7] {
        let got = intensity_estimate(&w, Frequency::Real(k), 1024.0).unwrap();
        assert!((got - naive_intensity(&pts, &ys, k, 1024.0)).abs() < 1e-10);
    }
}

#[test]
fn period_doubling_atoms() {
    let w = window("period-doubling", 1 << 16);
    let mut ks: Vec<Frequency> = (0..64).map(|p| Frequency::Real(p as f64 / 64.0)).collect();
    ks.push(Frequency::Real(1.0 / 3.0));
    let sched = [8192.0, 16384.0, 32768.0, 65536.0];
    let est = detect_atoms(&w, &ks, &sched, 0.05).unwrap();
    assert_eq!(est.atoms.len(), 64);
    assert!(est.atom_at(1.0 / 3.0, 1e-12).is_none());
    assert!(est.atoms.iter().all(|a| a.intensity > 0.0 && a.stability <= 0.05));
    // intensity at 0 is η(0)², and atoms cannot carry more than η(0)
    let eta0 = autocorr_symbolic(&w, 2).unwrap().get(0).re;
    let i0 = est.atom_at(0.0, 0.0).unwrap().intensity;
    assert!((i0 - eta0 * eta0).abs() / (eta0 * eta0) < 0.01);
    assert!(est.total_atom_mass() <= eta0 + 1e-3);
    // symmetric atoms for a real comb: k and 1 - k
    for a in &est.atoms {
        if a.k > 0.0 {
            let b = est.atom_at(1.0 - a.k, 1e-12).unwrap();
            assert!((a.intensity - b.intensity).abs() < 1e-12);
        }
    }
}

#[test]
fn silver_mean_density_and_extinction() {
    let sm = silver_mean_chain(100_000).unwrap();
    assert!((sm.density() - 0.5).abs() < 1e-3);
    let r = sm.available_size();
    let i0 = intensity_at(&sm, FourierModuleElement::new(0, 0), r).unwrap();
    assert!((i0 - 0.25).abs() / 0.25 < 0.01);
    assert!(is_extinct(FourierModuleElement::new(2, 0)));
    assert!(intensity_at(&sm, FourierModuleElement::new(2, 0), r).unwrap() < 1e-4);
    let i10 = intensity_at(&sm, FourierModuleElement::new(1, 0), r).unwrap();
    let i10_half = intensity_at(&sm, FourierModuleElement::new(1, 0), r / 2.0).unwrap();
    assert!(i10 > 1e-3 && (i10 - i10_half).abs() / i10 < 0.05);
    // generic weights lift the extinction
    let weighted = weighted_silver_comb(&sm, Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
    assert!(intensity_at(&weighted, FourierModuleElement::new(2, 0), r).unwrap() > 1e-3);
}

#[test]
fn tent_smoothing_on_lattice() {
    let z = PointSet1D::from_floats((0..64).map(|i| i as f64).collect(), None, (0.0, 64.0)).unwrap();
    let phi = BumpFunction::tent(0.25).unwrap();
    let s = smooth_comb(&z, &phi, &[10.0, 10.125, 10.5]);
    assert_eq!(s.values[0].re, 1.0);
    assert_eq!(s.values[1].re, 0.5);
    assert_eq!(s.values[2].re, 0.0);

    let sm = silver_mean_chain(1000).unwrap();
    let grid: Vec<f64> = (0..20_000).map(|i| i as f64 * 0.05).collect();
    assert_eq!(smooth_comb(&sm, &phi, &grid).max_overlap, 1);

    // ∫φ² for the unit-height tent of half-width ε is 2ε/3
    let pc = autocorr_pointset(&z, 2.0).unwrap();
    let g = regularised_autocorr(&pc, &phi, &[0.0, 0.5]);
    let quad: f64 = (0..=100_000)
        .map(|i| {
            let t = -0.25 + i as f64 * 5e-6;
            let w = if i == 0 || i == 100_000 { 0.5 } else { 1.0 };
            w * phi.value(t).powi(2)
        })
        .sum::<f64>()
        * 5e-6;
    assert!((g[0].re - quad).abs() < 1e-9);
    assert_eq!(g[1].re, 0.0);
}

#[test]
fn lattice_spectrum() {
    let z = PointSet1D::from_floats((0..4096).map(|i| i as f64).collect(), None, (0.0, 4096.0)).unwrap();
    let ks = [0.0, 0.25, 0.5].map(Frequency::Real);
    let est = detect_atoms(&z, &ks, &[256.0, 512.0, 1024.0, 2048.0], 0.05).unwrap();
    assert_eq!(est.atoms.len(), 1);
    assert!((est.atoms[0].intensity - 1.0).abs() < 1e-12);
}
