//! Autocorrelation coefficients of weighted symbolic combs and of weighted
//! point sets on the line.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::delone::{BumpFunction, PointSet1D, MERGE_TOL};
use crate::error::{Error, Result};
use crate::factors::{factor_range, orbit_values, BlockMap};
use crate::modelset::QuadraticInt;
use crate::subshift::SymbolicWindow;

/// Hermitian sequence `η(m)`, `|m| ≤ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeq {
    max_lag: usize,
    // index m + M
    values: Vec<Complex64>,
    // number of averaged pairs for |m|
    counts: Vec<usize>,
    n_used: usize,
}

impl CorrelationSeq {
    /// Builds the sequence from `η(0), …, η(M)`, filling negative lags by
    /// conjugation. `η(0)` is made real.
    pub fn from_lags(nonneg: Vec<Complex64>, n_used: usize) -> Result<Self> {
        if nonneg.is_empty() {
            return Err(Error::InvalidArgument("need at least η(0)".into()));
        }
        let m = nonneg.len() - 1;
        let counts = (0..=m).map(|k| n_used.saturating_sub(k)).collect();
        Ok(Self::assemble(nonneg, counts, n_used))
    }

    fn assemble(mut nonneg: Vec<Complex64>, counts: Vec<usize>, n_used: usize) -> Self {
        nonneg[0].im = 0.0;
        let m = nonneg.len() - 1;
        let mut values: Vec<Complex64> = nonneg[1..].iter().rev().map(|z| z.conj()).collect();
        values.extend_from_slice(&nonneg);
        debug_assert_eq!(values.len(), 2 * m + 1);
        Self {
            max_lag: m,
            values,
            counts,
            n_used,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// Length of the sequence that was averaged.
    pub fn n_used(&self) -> usize {
        self.n_used
    }

    /// `η(m)`; panics for `|m| > M`.
    pub fn get(&self, m: i64) -> Complex64 {
        self.values[(m + self.max_lag as i64) as usize]
    }

    /// Number of index pairs averaged at lag `m`.
    pub fn count(&self, m: i64) -> usize {
        self.counts[m.unsigned_abs() as usize]
    }

    /// Values for `m = -M ..= M`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Raw access for diagnostics and negative tests; bypasses hermiticity.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let m = self.max_lag.min(other.max_lag) as i64;
        (-m..=m)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    /// `min Σ conj(c_i) c_j η(m_j - m_i)` over the given coefficient vectors
    /// placed at consecutive lags starting at 0.
    pub fn quadratic_form(&self, c: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ci) in c.iter().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                acc += ci.conj() * cj * self.get(j as i64 - i as i64);
            }
        }
        acc.re
    }

    /// Columns `lag_or_diff,re,im,n_used` with the per-lag pair count.
    pub fn to_csv(&self) -> String {
        let m = self.max_lag as i64;
        let mut s = String::from("lag_or_diff,re,im,n_used\n");
        for k in -m..=m {
            let z = self.get(k);
            s.push_str(&format!("{},{},{},{}\n", k, z.re + 0.0, z.im + 0.0, self.count(k)));
        }
        s
    }
}

/// `(1/(L-m)) Σ conj(y_n) y_{n+m}` for `m = 0..=M`.
fn average_lags(y: &[Complex64], max_lag: usize) -> CorrelationSeq {
    let l = y.len();
    let nonneg: Vec<Complex64> = (0..=max_lag)
        .into_par_iter()
        .map(|m| {
            let s: Complex64 = y[..l - m].iter().zip(&y[m..]).map(|(a, b)| a.conj() * b).sum();
            s / (l - m) as f64
        })
        .collect();
    let counts = (0..=max_lag).map(|m| l - m).collect();
    CorrelationSeq::assemble(nonneg, counts, l)
}

fn check_len(len: usize, max_lag: usize) -> Result<()> {
    let needed = 2 * max_lag + 4;
    if len < needed {
        return Err(Error::WindowTooShort { needed, available: len });
    }
    Ok(())
}

/// `η(m)` of the weighted comb `y_n = weight(x_n)`, averaging over every `n`
/// with `n` and `n + m` in the window.
pub fn autocorr_symbolic(window: &SymbolicWindow, max_lag: usize) -> Result<CorrelationSeq> {
    check_len(window.len(), max_lag)?;
    Ok(average_lags(&window.values(), max_lag))
}

/// `⟨g | U^m g⟩` as the ergodic average of `conj(g(S^n x)) g(S^{n+m} x)`,
/// reading `g` off the source window directly.
pub fn autocorr_via_spectral_inner(window: &SymbolicWindow, g: &BlockMap, max_lag: usize) -> Result<CorrelationSeq> {
    let (first, last) = factor_range(window, g).ok_or(Error::WindowTooShort {
        needed: g.length(),
        available: window.len(),
    })?;
    let orbit = orbit_values(window, g, first..=last)?;
    check_len(orbit.len(), max_lag)?;
    Ok(average_lags(&orbit, max_lag))
}

/// Autocorrelation coefficients `η(z)` of a weighted point set on its
/// realised differences `|z| ≤ Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCorrelation {
    /// Sorted differences, symmetric about 0.
    pub support: Vec<f64>,
    pub exact_support: Option<Vec<QuadraticInt>>,
    pub values: Vec<Complex64>,
    /// Number of point pairs realising each difference.
    pub counts: Vec<usize>,
    /// Extent length `2R` of the sample.
    pub window_length: f64,
}

impl PointCorrelation {
    pub fn value_at(&self, z: f64) -> Option<Complex64> {
        let i = self.support.partition_point(|&s| s < z - MERGE_TOL);
        (i < self.support.len() && (self.support[i] - z).abs() <= MERGE_TOL).then(|| self.values[i])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lag_or_diff,re,im,n_used\n");
        for ((z, v), c) in self.support.iter().zip(&self.values).zip(&self.counts) {
            s.push_str(&format!("{},{},{},{}\n", z, v.re + 0.0, v.im + 0.0, c));
        }
        s
    }
}

/// `η(z) = (1/(L-|z|)) Σ_{x, x+z ∈ Λ} conj(w(x)) w(x+z)` with `L` the extent
/// length; the divisor is the length of the set of `x` for which both `x` and
/// `x + z` can lie in the sample.
pub fn autocorr_pointset(ps: &PointSet1D, z_max: f64) -> Result<PointCorrelation> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let len = ps.extent_length();
    if !(z_max >= 0.0) || z_max >= len {
        return Err(Error::ZTooLarge { z: z_max, extent: len });
    }
    let pts = ps.points();
    let w = ps.weights();
    let n = pts.len();
    let reach = |i: usize| {
        let mut j = i;
        while j < n && pts[j] - pts[i] <= z_max + MERGE_TOL {
            j += 1;
        }
        j
    };

    // nonnegative differences: (value, weighted sum, count)
    let mut pos: Vec<(f64, Option<QuadraticInt>, Complex64, usize)> = Vec::new();
    if let Some(exact) = ps.exact() {
        let mut acc: BTreeMap<QuadraticInt, (Complex64, usize)> = BTreeMap::new();
        for i in 0..n {
            for j in i..reach(i) {
                let d = exact[j] - exact[i];
                if d.to_f64() > z_max {
                    continue;
                }
                let e = acc.entry(d).or_insert((Complex64::new(0.0, 0.0), 0));
                e.0 += w[i].conj() * w[j];
                e.1 += 1;
            }
        }
        for (d, (s, c)) in acc {
            pos.push((d.to_f64(), Some(d), s, c));
        }
    } else {
        let mut raw: Vec<(f64, Complex64)> = Vec::new();
        for i in 0..n {
            for j in i..reach(i) {
                let d = pts[j] - pts[i];
                if d <= z_max {
                    raw.push((d, w[i].conj() * w[j]));
                }
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (d, v) in raw {
            match pos.last_mut() {
                Some(last) if d - last.0 <= MERGE_TOL => {
                    last.2 += v;
                    last.3 += 1;
                }
                _ => pos.push((d, None, v, 1)),
            }
        }
    }

    let exact_mode = ps.exact().is_some();
    let mut support = Vec::with_capacity(2 * pos.len());
    let mut exact_support = Vec::new();
    let mut values = Vec::with_capacity(2 * pos.len());
    let mut counts = Vec::with_capacity(2 * pos.len());
    let norm = |d: f64| len - d.abs();
    for &(d, q, s, c) in pos.iter().rev() {
        if d == 0.0 {
            continue;
        }
        support.push(-d);
        if let Some(q) = q {
            exact_support.push(-q);
        }
        values.push(s.conj() / norm(d));
        counts.push(c);
    }
    for &(d, q, s, c) in &pos {
        support.push(d);
        if let Some(q) = q {
            exact_support.push(q);
        }
        let mut v = s / norm(d);
        if d == 0.0 {
            v.im = 0.0;
        }
        values.push(v);
        counts.push(c);
    }
    Ok(PointCorrelation {
        support,
        exact_support: exact_mode.then_some(exact_support),
        values,
        counts,
        window_length: len,
    })
}

/// `γ_{ω_φ}(t) = Σ_z η(z) (φ * φ̃)(t - z)` on the grid.
pub fn regularised_autocorr(pc: &PointCorrelation, phi: &BumpFunction, t_grid: &[f64]) -> Vec<Complex64> {
    let reach = 2.0 * phi.support_radius();
    t_grid
        .par_iter()
        .map(|&t| {
            let a = pc.support.partition_point(|&z| z < t - reach);
            let b = pc.support.partition_point(|&z| z <= t + reach);
            (a..b)
                .map(|i| pc.values[i] * phi.autocorrelation(t - pc.support[i]))
                .sum()
        })
        .collect()
}
