//! Diffraction and spectral measure estimation: exponential sums and atom
//! detection, Fejér-smoothed spectral densities on a grid, maximal-type
//! mixtures and the `ν_h^{*n}` family.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationSeq;
use crate::delone::{BumpFunction, PointSet1D, SampledFunction};
use crate::error::{Error, Result};
use crate::modelset::FourierModuleElement;
use crate::subshift::SymbolicWindow;

/// Default relative stability threshold for atoms.
pub const DEFAULT_REL_TOL: f64 = 0.05;
/// Intensities at or below this are treated as zero by [`detect_atoms`].
pub const ATOM_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    Real(f64),
    Module(FourierModuleElement),
}

impl Frequency {
    pub fn value(self) -> f64 {
        match self {
            Frequency::Real(k) => k,
            Frequency::Module(k) => k.value(),
        }
    }

    pub fn exact(self) -> Option<[i64; 2]> {
        match self {
            Frequency::Real(_) => None,
            Frequency::Module(k) => Some([k.q.a, k.q.b]),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        match self {
            Frequency::Real(k) => Frequency::Real(-k),
            Frequency::Module(k) => Frequency::Module(FourierModuleElement { q: -k.q }),
        }
    }
}

impl From<f64> for Frequency {
    fn from(k: f64) -> Self {
        Frequency::Real(k)
    }
}

impl From<FourierModuleElement> for Frequency {
    fn from(k: FourierModuleElement) -> Self {
        Frequency::Module(k)
    }
}

fn cis_neg(phase: f64) -> Complex64 {
    // e^{-2πi·phase} with phase reduced mod 1 first
    let p = phase - phase.floor();
    Complex64::from_polar(1.0, -2.0 * PI * p)
}

const CHUNK: usize = 4096;

/// `Σ_i f(i, x_i)` in fixed chunks summed in order, so the result does not
/// depend on the thread count.
fn chunked_sum<T: Sync, F: Fn(usize, &T) -> Complex64 + Sync>(items: &[T], f: F) -> Complex64 {
    let partial: Vec<Complex64> = items
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| chunk.iter().enumerate().map(|(i, x)| f(c * CHUNK + i, x)).sum())
        .collect();
    partial.into_iter().sum()
}

/// A weighted comb or sampled function whose normalised exponential sums can
/// be evaluated over growing windows.
pub trait ExponentialSum: Sync {
    /// Largest admissible size: site count for symbolic windows, half-width
    /// `R` for sets on the line.
    fn available_size(&self) -> f64;

    /// `(1/norm) Σ w(x) e^{-2πikx}` over the window of the given size.
    fn amplitude(&self, k: Frequency, size: f64) -> Result<Complex64>;
}

fn check_size(size: f64, available: f64) -> Result<()> {
    if !(size > 0.0) || size > available * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            requested: size,
            available,
        });
    }
    Ok(())
}

/// Sites `lo .. lo + N`, normalised by `N`.
impl ExponentialSum for SymbolicWindow {
    fn available_size(&self) -> f64 {
        self.len() as f64
    }

    fn amplitude(&self, k: Frequency, size: f64) -> Result<Complex64> {
        check_size(size, self.available_size())?;
        let n = size as usize;
        if n as f64 != size {
            return Err(Error::InvalidArgument(format!("site count {size} is not an integer")));
        }
        let k = k.value();
        let kf = k - k.floor();
        let weights = self.weights();
        let lo = self.lo();
        let sum = chunked_sum(&self.letters()[..n], |i, &l| {
            let site = lo + i as i64;
            // kf·site mod 1 keeps the float argument small
            weights[l as usize] * cis_neg((kf * site as f64).rem_euclid(1.0))
        });
        Ok(sum / size)
    }
}

/// Points in `[lo, lo + 2R)`, normalised by `2R`.
impl ExponentialSum for PointSet1D {
    fn available_size(&self) -> f64 {
        self.extent_length() / 2.0
    }

    fn amplitude(&self, k: Frequency, r: f64) -> Result<Complex64> {
        check_size(r, self.available_size())?;
        if self.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let lo = self.extent().0;
        let end = self.points().partition_point(|&x| x < lo + 2.0 * r);
        let w = &self.weights()[..end];
        let sum: Complex64 = match (k, self.exact()) {
            (Frequency::Module(k), Some(exact)) => chunked_sum(&exact[..end], |i, &x| w[i] * cis_neg(k.phase(x))),
            _ => {
                let k = k.value();
                chunked_sum(&self.points()[..end], |i, &x| w[i] * cis_neg((k * x).rem_euclid(1.0)))
            }
        };
        Ok(sum / (2.0 * r))
    }
}

/// Riemann sum `step · Σ f(t_j) e^{-2πik t_j}` over `[lo, lo + 2R)`,
/// normalised by `2R`.
impl ExponentialSum for SampledFunction {
    fn available_size(&self) -> f64 {
        (self.extent.1 - self.extent.0) / 2.0
    }

    fn amplitude(&self, k: Frequency, r: f64) -> Result<Complex64> {
        check_size(r, self.available_size())?;
        let lo = self.extent.0;
        let hi = lo + 2.0 * r;
        let h = self.step;
        let k = k.value();
        let sum = chunked_sum(&self.samples, |_, &(j, f)| {
            let t = j as f64 * h;
            if t >= lo && t < hi {
                f * cis_neg((k * h * j as f64).rem_euclid(1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(sum * h / (2.0 * r))
    }
}

/// `I(k) = |amplitude|²` at the given window size.
pub fn intensity_estimate<S: ExponentialSum + ?Sized>(source: &S, k: Frequency, size: f64) -> Result<f64> {
    Ok(source.amplitude(k, size)?.norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub k: f64,
    pub k_exact: Option<[i64; 2]>,
    pub intensity: f64,
    /// Largest relative deviation of the last three `I_N` from the last one.
    pub stability: f64,
}

/// A candidate that failed the atom test, with its `I_N` along the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub k: f64,
    pub k_exact: Option<[i64; 2]>,
    pub intensities: Vec<f64>,
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub atoms: Vec<Atom>,
    pub grid: Option<DensityGrid>,
    pub schedule: Vec<f64>,
    #[serde(skip)]
    pub rejected: Vec<Rejected>,
}

impl SpectralEstimate {
    pub fn total_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.intensity).sum()
    }

    pub fn atom_at(&self, k: f64, tol: f64) -> Option<&Atom> {
        self.atoms.iter().find(|a| (a.k - k).abs() <= tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectral estimate serialises")
    }

    /// Atoms as CSV with columns `k,intensity,stability`.
    pub fn atoms_csv(&self) -> String {
        let mut s = String::from("k,intensity,stability\n");
        for a in &self.atoms {
            s.push_str(&format!("{},{},{}\n", a.k, a.intensity, a.stability));
        }
        s
    }
}

/// Evaluates `I_N(k)` along the schedule for every candidate; `k` is an atom
/// when the last intensity exceeds [`ATOM_FLOOR`] and the last three differ
/// from it by at most `rel_tol` relatively. Heuristic: it separates `N⁰`
/// behaviour from decay at the sizes used, nothing more.
pub fn detect_atoms<S: ExponentialSum + ?Sized>(
    source: &S,
    candidates: &[Frequency],
    schedule: &[f64],
    rel_tol: f64,
) -> Result<SpectralEstimate> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "schedule must be strictly increasing with at least 3 entries".into(),
        ));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidArgument("rel_tol must be positive".into()));
    }
    let rows: Vec<(Frequency, Vec<f64>)> = candidates
        .par_iter()
        .map(|&k| {
            let is: Result<Vec<f64>> = schedule.iter().map(|&n| intensity_estimate(source, k, n)).collect();
            is.map(|is| (k, is))
        })
        .collect::<Result<_>>()?;
    let mut atoms = Vec::new();
    let mut rejected = Vec::new();
    for (k, is) in rows {
        let last = *is.last().unwrap();
        let stability = is[is.len() - 3..]
            .iter()
            .map(|&i| (i - last).abs() / last)
            .fold(0.0, f64::max);
        let stability = if last > 0.0 { stability } else { f64::INFINITY };
        if last > ATOM_FLOOR && stability <= rel_tol {
            atoms.push(Atom {
                k: k.value(),
                k_exact: k.exact(),
                intensity: last,
                stability,
            });
        } else {
            rejected.push(Rejected {
                k: k.value(),
                k_exact: k.exact(),
                intensities: is,
                stability,
            });
        }
    }
    atoms.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.k_exact.cmp(&b.k_exact)));
    Ok(SpectralEstimate {
        atoms,
        grid: None,
        schedule: schedule.to_vec(),
        rejected,
    })
}

/// Points `min + i·step` for `i < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(min: f64, step: f64, n: usize) -> Result<Self> {
        if !(step > 0.0) || n == 0 {
            return Err(Error::InvalidArgument("grid needs positive step and size".into()));
        }
        Ok(Self { min, step, n })
    }

    /// `n` equal cells on the circle `[0, 1)`.
    pub fn torus(n: usize) -> Self {
        Self {
            min: 0.0,
            step: 1.0 / n as f64,
            n,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn is_torus(&self) -> bool {
        self.min == 0.0 && (self.step * self.n as f64 - 1.0).abs() < 1e-12
    }

    /// Index of the cell containing `t` (taken mod 1 on a torus grid).
    pub fn cell_of(&self, t: f64) -> Option<usize> {
        let t = if self.is_torus() { t.rem_euclid(1.0) } else { t };
        let i = ((t - self.min) / self.step).round();
        if i < 0.0 {
            return None;
        }
        let i = i as usize;
        if self.is_torus() {
            Some(i % self.n)
        } else {
            (i < self.n).then_some(i)
        }
    }
}

/// Point masses on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOnGrid {
    pub grid: UniformGrid,
    pub masses: Vec<f64>,
    /// Convolution wraps around (measure on the circle).
    pub periodic: bool,
    /// Smallest raw density value before flooring at zero (diagnostic).
    pub min_density: f64,
    /// Mass lost off the grid by truncated convolution before renormalising.
    pub truncated_mass: f64,
}

impl MeasureOnGrid {
    pub fn new(grid: UniformGrid, masses: Vec<f64>, periodic: bool) -> Result<Self> {
        if masses.len() != grid.n {
            return Err(Error::GridMismatch);
        }
        if masses.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidArgument("masses must be nonnegative".into()));
        }
        if periodic && !grid.is_torus() {
            return Err(Error::InvalidArgument("periodic measures need a torus grid".into()));
        }
        Ok(Self {
            grid,
            masses,
            periodic,
            min_density: 0.0,
            truncated_mass: 0.0,
        })
    }

    /// Unit point masses at the given positions (snapped to cells).
    pub fn from_atoms(grid: UniformGrid, atoms: &[(f64, f64)], periodic: bool) -> Result<Self> {
        let mut masses = vec![0.0; grid.n];
        for &(t, m) in atoms {
            let i = grid
                .cell_of(t)
                .ok_or_else(|| Error::InvalidArgument(format!("{t} is off the grid")))?;
            masses[i] += m;
        }
        Self::new(grid, masses, periodic)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Cell densities `mass / step`.
    pub fn densities(&self) -> Vec<f64> {
        self.masses.iter().map(|m| m / self.grid.step).collect()
    }

    /// Total mass of cells whose point lies within `radius` of `t`
    /// (circular distance on a torus).
    pub fn mass_near(&self, t: f64, radius: f64) -> f64 {
        (0..self.grid.n)
            .filter(|&i| {
                let mut d = (self.grid.point(i) - t).abs();
                if self.periodic {
                    d = d.rem_euclid(1.0);
                    d = d.min(1.0 - d);
                }
                d <= radius + 1e-12
            })
            .map(|i| self.masses[i])
            .sum()
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum())
    }

    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.grid.n).filter(|&i| self.masses[i] > threshold).collect()
    }

    /// Columns `t,mass,density`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,density\n");
        for (i, m) in self.masses.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.grid.point(i), m, m / self.grid.step));
        }
        s
    }
}

/// Fejér density `Σ_{|m|≤M} (1 - |m|/(M+1)) η(m) e^{-2πimt}` at `t`.
pub fn fejer_density(eta: &CorrelationSeq, t: f64) -> f64 {
    let m_max = eta.max_lag();
    let norm = (m_max + 1) as f64;
    let mut acc = eta.get(0).re;
    for m in 1..=m_max {
        let w = 1.0 - m as f64 / norm;
        let z = eta.get(m as i64) * cis_neg((m as f64 * t).rem_euclid(1.0));
        acc += 2.0 * w * z.re;
    }
    acc
}

/// Fejér approximation of the spectral measure of `η` on the circle, cell
/// masses by the rectangle rule. Negative rounding is floored to zero and the
/// raw minimum is kept in `min_density`.
pub fn spectral_distribution(eta: &CorrelationSeq, grid: &UniformGrid) -> Result<MeasureOnGrid> {
    let m_max = eta.max_lag() as i64;
    if m_max < 1 {
        return Err(Error::InvalidArgument("need max_lag ≥ 1".into()));
    }
    for m in 0..=m_max {
        if eta.get(-m) != eta.get(m).conj() {
            return Err(Error::NotHermitian { lag: m });
        }
    }
    let raw: Vec<f64> = (0..grid.n)
        .into_par_iter()
        .map(|i| fejer_density(eta, grid.point(i)))
        .collect();
    let min_density = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let masses = raw.iter().map(|&d| d.max(0.0) * grid.step).collect();
    Ok(MeasureOnGrid {
        grid: *grid,
        masses,
        periodic: grid.is_torus(),
        min_density,
        truncated_mass: 0.0,
    })
}

/// `Σ_n ρ_n / (2^n (1 + ρ_n(T)))`, `n = 1, 2, …`.
pub fn maximal_measure_mix(measures: &[MeasureOnGrid]) -> Result<MeasureOnGrid> {
    let first = measures
        .first()
        .ok_or_else(|| Error::InvalidArgument("no measures to mix".into()))?;
    let mut masses = vec![0.0; first.grid.n];
    let mut scale = 1.0;
    for m in measures {
        if m.grid != first.grid || m.periodic != first.periodic {
            return Err(Error::GridMismatch);
        }
        scale *= 0.5;
        let w = scale / (1.0 + m.total_mass());
        for (acc, x) in masses.iter_mut().zip(&m.masses) {
            *acc += w * x;
        }
    }
    Ok(MeasureOnGrid {
        grid: first.grid,
        masses,
        periodic: first.periodic,
        min_density: 0.0,
        truncated_mass: 0.0,
    })
}

/// Grid convolution. Periodic grids wrap around; otherwise cells falling
/// off the grid are dropped, their mass recorded and the rest renormalised
/// to the input mass product.
fn convolve(a: &MeasureOnGrid, b: &MeasureOnGrid) -> Result<MeasureOnGrid> {
    if a.grid != b.grid || a.periodic != b.periodic {
        return Err(Error::GridMismatch);
    }
    let n = a.grid.n;
    let mut out = vec![0.0; n];
    let ia: Vec<usize> = a.support(0.0);
    let ib: Vec<usize> = b.support(0.0);
    let mut lost = 0.0;
    if a.periodic {
        for &i in &ia {
            for &j in &ib {
                out[(i + j) % n] += a.masses[i] * b.masses[j];
            }
        }
    } else {
        // t_i + t_j = t_{i+j+shift} needs min to be a multiple of step
        let shift = a.grid.min / a.grid.step;
        if (shift - shift.round()).abs() > 1e-9 {
            return Err(Error::GridMismatch);
        }
        let shift = shift.round() as i64;
        for &i in &ia {
            for &j in &ib {
                let idx = (i + j) as i64 + shift;
                let m = a.masses[i] * b.masses[j];
                if (0..n as i64).contains(&idx) {
                    out[idx as usize] += m;
                } else {
                    lost += m;
                }
            }
        }
        let kept: f64 = out.iter().sum();
        if kept > 0.0 {
            let target = kept + lost;
            for x in &mut out {
                *x *= target / kept;
            }
        }
    }
    Ok(MeasureOnGrid {
        grid: a.grid,
        masses: out,
        periodic: a.periodic,
        min_density: 0.0,
        truncated_mass: lost,
    })
}

/// `ν_1 = hγ̂ / (hγ̂)(T)` and `ν_n = ν_{n-1} * ν_1` for `n ≤ n_max`.
pub fn nu_family(gamma_hat: &MeasureOnGrid, h: &[f64], n_max: usize) -> Result<Vec<MeasureOnGrid>> {
    if h.len() != gamma_hat.grid.n {
        return Err(Error::GridMismatch);
    }
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("h must be strictly positive".into()));
    }
    let weighted: Vec<f64> = gamma_hat.masses.iter().zip(h).map(|(m, h)| m * h).collect();
    let total: f64 = weighted.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let nu1 = MeasureOnGrid {
        grid: gamma_hat.grid,
        masses: weighted.iter().map(|m| m / total).collect(),
        periodic: gamma_hat.periodic,
        min_density: 0.0,
        truncated_mass: 0.0,
    };
    let mut out = Vec::with_capacity(n_max);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(nu1.clone());
    for _ in 1..n_max {
        let next = convolve(out.last().unwrap(), &nu1)?;
        out.push(next);
    }
    Ok(out)
}

/// Multiplies every atom and grid value by `weight(k)`.
pub fn regularise_with<F: Fn(f64) -> f64>(est: &SpectralEstimate, weight: F) -> SpectralEstimate {
    let mut out = est.clone();
    for a in &mut out.atoms {
        a.intensity *= weight(a.k);
    }
    for r in &mut out.rejected {
        let w = weight(r.k);
        r.intensities.iter_mut().for_each(|i| *i *= w);
    }
    if let Some(g) = &mut out.grid {
        for (i, v) in g.values.iter_mut().enumerate() {
            *v *= weight(g.min + i as f64 * g.step);
        }
    }
    out
}

/// `|φ̂(k)|²` times each atom and density value.
pub fn regularised_diffraction(est: &SpectralEstimate, phi: &BumpFunction) -> SpectralEstimate {
    regularise_with(est, |k| phi.ft(k).norm_sqr())
}
