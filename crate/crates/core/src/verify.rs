//! Property suites that recompute the same quantity along independent routes
//! and report the largest disagreement.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::correlation::{autocorr_symbolic, autocorr_via_spectral_inner};
use crate::delone::{cluster_frequency, enumerate_k_clusters, locator_set, smooth_comb_sparse, tent_ft, BumpFunction};
use crate::error::Result;
use crate::factors::{apply_block_map, indicator_block_map, BlockMap};
use crate::modelset::{
    intensity_at, is_extinct, module_box, silver_mean_chain, verify_inflation_identity, FourierModuleElement,
};
use crate::spectral::{
    detect_atoms, intensity_estimate, spectral_distribution, ExponentialSum, Frequency, UniformGrid,
};
use crate::subshift::{dictionary, letter_frequencies_pf, word_frequency_empirical, SubstitutionRule, SymbolicWindow};

pub const SUITES: [&str; 5] = ["specmeas", "freq-back", "reg-diffract", "inflation", "extinction"];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub lines: Vec<String>,
}

impl SuiteReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            writeln!(s, "{l}").unwrap();
        }
        writeln!(
            s,
            "{} {} max_deviation {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_deviation
        )
        .unwrap();
        s
    }
}

/// `p / 2^j` for `0 ≤ p < 2^j`: every dyadic in `[0, 1)` of level `≤ j`.
pub fn dyadic_candidates(j_max: u32) -> Vec<f64> {
    let n = 1u64 << j_max;
    (0..n).map(|p| p as f64 / n as f64).collect()
}

/// `frac(i (√5 - 1)/2)` for `i = 1..=n`: well spread, badly approximable
/// and far from dyadic rationals of low level.
pub fn weyl_controls(n: usize) -> Vec<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    (1..=n).map(|i| (i as f64 * g).fract()).collect()
}

/// `[n/8, n/4, n/2, n]`.
pub fn doubling_schedule(n: f64) -> Vec<f64> {
    vec![n / 8.0, n / 4.0, n / 2.0, n]
}

/// `[n/8, n/4, n/2, n]` in whole sites, for symbolic windows.
pub fn site_schedule(n: usize) -> Vec<f64> {
    [n / 8, n / 4, n / 2, n].iter().map(|&m| m as f64).collect()
}

#[derive(Debug, Clone)]
pub struct SpecmeasParams {
    pub max_lag: usize,
    pub sites: usize,
    pub grid_cells: usize,
    pub candidates: Vec<f64>,
    /// Candidates that must all be detected as atoms.
    pub expect_atoms: bool,
    /// Candidates at which no atom may be detected.
    pub controls: Vec<f64>,
    pub rel_tol: f64,
    pub corr_tol: f64,
    pub l1_tol: f64,
}

impl Default for SpecmeasParams {
    fn default() -> Self {
        Self {
            max_lag: 512,
            sites: 1 << 16,
            grid_cells: 4096,
            candidates: dyadic_candidates(6),
            expect_atoms: false,
            controls: weyl_controls(64),
            rel_tol: 0.05,
            corr_tol: 1e-12,
            l1_tol: 0.05,
        }
    }
}

/// The spectral measure of `g` against the diffraction of the factor comb
/// `Φ_g(x)`: correlations along both routes, their Fejér measures, and atoms
/// of the factor comb, each of which must carry Fejér mass nearby.
pub fn specmeas(window: &SymbolicWindow, g: &BlockMap, p: &SpecmeasParams) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    let factor = apply_block_map(window, g)?;
    let direct = autocorr_symbolic(&factor, p.max_lag)?;
    let inner = autocorr_via_spectral_inner(window, g, p.max_lag)?;
    let corr_dev = direct.max_abs_diff(&inner);
    lines.push(format!(
        "correlation routes, |m| <= {}: max |diff| {:.3e}",
        p.max_lag, corr_dev
    ));

    let grid = UniformGrid::torus(p.grid_cells);
    let sigma_g = spectral_distribution(&inner, &grid)?;
    let rho = spectral_distribution(&direct, &grid)?;
    let l1 = sigma_g.l1_distance(&rho)?;
    lines.push(format!(
        "Fejér measures: L1 distance {:.3e}, mass {:.6}",
        l1,
        sigma_g.total_mass()
    ));

    let sites = p.sites.min(factor.len());
    let ks: Vec<Frequency> = p.candidates.iter().chain(&p.controls).map(|&k| k.into()).collect();
    let est = detect_atoms(&factor, &ks, &site_schedule(sites), p.rel_tol)?;
    let mut ok = corr_dev <= p.corr_tol && l1 <= p.l1_tol;
    let radius = 1.0 / p.max_lag as f64;
    for a in &est.atoms {
        let near = sigma_g.mass_near(a.k, radius);
        let consistent = near >= 0.5 * a.intensity;
        ok &= consistent;
        lines.push(format!(
            "atom k {:.6} intensity {:.6e} stability {:.2e} sigma_g mass nearby {:.6e}{}",
            a.k,
            a.intensity,
            a.stability,
            near,
            if consistent { "" } else { "  <- inconsistent" }
        ));
    }
    let found = |k: f64| est.atom_at(k, 1e-12).is_some();
    if p.expect_atoms {
        let missing: Vec<f64> = p.candidates.iter().copied().filter(|&k| !found(k)).collect();
        lines.push(format!("expected atoms missing: {}", missing.len()));
        ok &= missing.is_empty();
    }
    let false_atoms = p.controls.iter().filter(|&&k| found(k)).count();
    lines.push(format!("atoms among {} controls: {}", p.controls.len(), false_atoms));
    ok &= false_atoms == 0;
    Ok(SuiteReport {
        name: "specmeas".into(),
        passed: ok,
        max_deviation: corr_dev.max(l1),
        lines,
    })
}

#[derive(Debug, Clone)]
pub struct FreqBackParams {
    pub max_len: usize,
    pub tol: f64,
    pub max_lag: usize,
    pub grid_cells: usize,
}

impl Default for FreqBackParams {
    fn default() -> Self {
        Self {
            max_len: 4,
            tol: 1e-3,
            max_lag: 8,
            grid_cells: 64,
        }
    }
}

/// Word frequencies recovered from the spectral data of indicator factors:
/// `ν_w = η_Y(0) = σ_{1_w}(T)`, against direct counting, and single letters
/// against Perron–Frobenius frequencies.
pub fn freq_back(rule: &SubstitutionRule, window: &SymbolicWindow, p: &FreqBackParams) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    let mut dev: f64 = 0.0;
    let grid = UniformGrid::torus(p.grid_cells);
    let k = rule.alphabet_size();
    let mut by_len = vec![0.0; p.max_len + 1];
    let words = dictionary(window, p.max_len)?;
    for w in &words {
        let g = indicator_block_map(w, 0, k)?;
        let eta = autocorr_via_spectral_inner(window, &g, p.max_lag)?;
        let nu = eta.get(0).re;
        let sigma_mass = spectral_distribution(&eta, &grid)?.total_mass();
        let (direct, _) = word_frequency_empirical(window, w)?;
        let d = (nu - direct).abs().max((sigma_mass - nu).abs());
        dev = dev.max(d);
        by_len[w.len()] += nu;
        lines.push(format!(
            "{:<8} nu {:.6}  direct {:.6}  sigma(T) {:.6}",
            rule.word_to_string(w),
            nu,
            direct,
            sigma_mass
        ));
    }
    for (len, total) in by_len.iter().enumerate().skip(1) {
        lines.push(format!("length {len}: sum of nu {total:.9}"));
        dev = dev.max((total - 1.0).abs());
    }
    let pf = letter_frequencies_pf(rule)?;
    for (l, f) in pf.iter().enumerate() {
        let g = indicator_block_map(&[l as u8], 0, k)?;
        let nu = autocorr_via_spectral_inner(window, &g, p.max_lag)?.get(0).re;
        dev = dev.max((nu - f).abs());
        lines.push(format!("letter {}: nu {:.6}  PF {:.6}", rule.names()[l], nu, f));
    }
    Ok(SuiteReport {
        name: "freq-back".into(),
        passed: dev <= p.tol,
        max_deviation: dev,
        lines,
    })
}

#[derive(Debug, Clone)]
pub struct RegDiffractParams {
    pub n_points: usize,
    pub k_radius: f64,
    /// Index into the enumerated clusters; `None` picks the most frequent.
    pub cluster: Option<usize>,
    pub eps: f64,
    pub samples_per_eps: usize,
    pub n_atoms: usize,
    pub a_max: i64,
    pub b_max: i64,
    pub k_max: f64,
    pub rel_tol: f64,
    pub tol: f64,
}

impl Default for RegDiffractParams {
    fn default() -> Self {
        Self {
            n_points: 100_000,
            k_radius: 1.1,
            cluster: None,
            eps: 0.25,
            samples_per_eps: 64,
            n_atoms: 10,
            a_max: 6,
            b_max: 3,
            k_max: 3.0,
            rel_tol: 0.05,
            tol: 0.01,
        }
    }
}

/// Atoms of the tent-smoothed locator comb of a silver-mean cluster,
/// computed from samples of the smoothed function, against `φ̂(k)²` times the
/// atoms of the raw locator comb.
pub fn reg_diffract(p: &RegDiffractParams) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    let sm = silver_mean_chain(p.n_points)?;
    let clusters = enumerate_k_clusters(&sm, p.k_radius)?;
    let freqs: Vec<f64> = clusters
        .iter()
        .map(|c| cluster_frequency(&sm, c).map(|f| f.0))
        .collect::<Result<_>>()?;
    let idx = match p.cluster {
        Some(i) if i < clusters.len() => i,
        Some(i) => {
            return Err(crate::Error::InvalidArgument(format!(
                "cluster index {i} out of range ({} clusters)",
                clusters.len()
            )))
        }
        None => (0..clusters.len())
            .max_by(|&a, &b| freqs[a].total_cmp(&freqs[b]).then(b.cmp(&a)))
            .unwrap(),
    };
    let c = &clusters[idx];
    lines.push(format!(
        "cluster {:?} at K = {}, frequency {:.6}",
        c.offsets(),
        p.k_radius,
        freqs[idx]
    ));
    let t = locator_set(&sm, c)?;
    let r = t.available_size();
    let ks: Vec<Frequency> = module_box(p.a_max, p.b_max, p.k_max)
        .into_iter()
        .map(Frequency::Module)
        .collect();
    let raw = detect_atoms(&t, &ks, &doubling_schedule(r), p.rel_tol)?;
    let mut atoms = raw.atoms.clone();
    atoms.sort_by(|a, b| b.intensity.total_cmp(&a.intensity));
    atoms.truncate(p.n_atoms);

    let phi = BumpFunction::tent(p.eps)?;
    let smoothed = smooth_comb_sparse(&t, &phi, p.eps / p.samples_per_eps as f64)?;
    let mut dev: f64 = 0.0;
    for a in &atoms {
        let k = a.k_exact.map_or(Frequency::Real(a.k), |[x, y]| {
            Frequency::Module(FourierModuleElement::new(x, y))
        });
        let got = intensity_estimate(&smoothed, k, r)?;
        let predicted = tent_ft(p.eps, a.k).powi(2) * a.intensity;
        let rel = (got - predicted).abs() / predicted;
        dev = dev.max(rel);
        lines.push(format!(
            "k {:>10.6} raw {:.6e} smoothed {:.6e} predicted {:.6e} rel {:.2e}",
            a.k, a.intensity, got, predicted, rel
        ));
    }
    let passed = atoms.len() == p.n_atoms && dev <= p.tol;
    Ok(SuiteReport {
        name: "reg-diffract".into(),
        passed,
        max_deviation: dev,
        lines,
    })
}

#[derive(Debug, Clone)]
pub struct InflationParams {
    pub n_points: usize,
    pub a_max: i64,
    pub b_max: i64,
    pub k_max: f64,
    pub n_strongest: usize,
    pub tol: f64,
    pub extinct_floor: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            n_points: 100_000,
            a_max: 6,
            b_max: 3,
            k_max: 3.0,
            n_strongest: 20,
            tol: 0.02,
            extinct_floor: 1e-3,
        }
    }
}

/// `I_{λΛ}(k)` against `I_Λ(λk)` over the strongest candidates whose `λk` is
/// not an extinction, plus the lifted extinctions of the original chain.
pub fn inflation(p: &InflationParams) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    let sm = silver_mean_chain(p.n_points)?;
    let cands = module_box(p.a_max, p.b_max, p.k_max);
    let rep = verify_inflation_identity(&sm, &cands, sm.available_size())?;
    lines.push(format!("density ratio constant c = {:.6}", rep.density_ratio_constant));
    let mut rows: Vec<_> = rep.rows.iter().filter(|r| !is_extinct(r.k.mul_lambda())).collect();
    rows.sort_by(|a, b| b.inflated.total_cmp(&a.inflated).then(a.k.cmp(&b.k)));
    rows.truncate(p.n_strongest);
    let mut dev: f64 = 0.0;
    for r in &rows {
        dev = dev.max(r.rel_error);
        lines.push(format!(
            "k {} inflated {:.6e} c*I(lambda k) {:.6e} rel {:.2e}",
            r.k, r.inflated, r.scaled_original, r.rel_error
        ));
    }
    let mut lifted = true;
    for r in rep.rows.iter().filter(|r| is_extinct(r.k)) {
        let ok = r.inflated > p.extinct_floor;
        lifted &= ok;
        lines.push(format!(
            "original extinction {} carries {:.6e} in the inflated chain{}",
            r.k,
            r.inflated,
            if ok { "" } else { "  <- too small" }
        ));
    }
    Ok(SuiteReport {
        name: "inflation".into(),
        passed: rows.len() == p.n_strongest && dev <= p.tol && lifted,
        max_deviation: dev,
        lines,
    })
}

#[derive(Debug, Clone)]
pub struct ExtinctionParams {
    pub n_points: usize,
    pub a_max: i64,
    pub b_max: i64,
    pub k_max: f64,
    pub threshold: f64,
}

impl Default for ExtinctionParams {
    fn default() -> Self {
        Self {
            n_points: 100_000,
            a_max: 6,
            b_max: 3,
            k_max: 3.0,
            threshold: 1e-4,
        }
    }
}

/// Over a box of nonzero module elements, `I(k) < threshold` exactly on the
/// predicted extinctions.
pub fn extinction(p: &ExtinctionParams) -> Result<SuiteReport> {
    let mut lines = Vec::new();
    let sm = silver_mean_chain(p.n_points)?;
    let r = sm.available_size();
    let mut max_extinct: f64 = 0.0;
    let mut min_present = f64::INFINITY;
    let mut mismatches = 0;
    for k in module_box(p.a_max, p.b_max, p.k_max) {
        if k.q.a == 0 && k.q.b == 0 {
            continue;
        }
        let i = intensity_at(&sm, k, r)?;
        let predicted = is_extinct(k);
        if predicted {
            max_extinct = max_extinct.max(i);
        } else {
            min_present = min_present.min(i);
        }
        let agrees = (i < p.threshold) == predicted;
        if !agrees {
            mismatches += 1;
        }
        if predicted || !agrees {
            lines.push(format!(
                "k {} = {:.6} intensity {:.3e}{}",
                k,
                k.value(),
                i,
                if agrees { "  extinct" } else { "  <- mismatch" }
            ));
        }
    }
    lines.push(format!(
        "largest extinct intensity {max_extinct:.3e}, smallest non-extinct {min_present:.3e}"
    ));
    Ok(SuiteReport {
        name: "extinction".into(),
        passed: mismatches == 0,
        max_deviation: max_extinct,
        lines,
    })
}

/// Unit weights for every letter; convenience for suites on custom rules.
pub fn unit_weights(rule: &SubstitutionRule) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); rule.alphabet_size()]
}
