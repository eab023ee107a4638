//! Finite samples of FLC point sets on the line, K-clusters and their locator
//! sets, and tent-smoothed combs.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modelset::QuadraticInt;

/// Tolerance for merging floating-point coordinates and differences.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extent {
    Float(f64, f64),
    Exact(QuadraticInt, QuadraticInt),
}

/// Sorted weighted points inside the half-open extent `[lo, hi)`.
///
/// In exact mode every coordinate is an element `a + b√2` of `Z[√2]` and the
/// floating coordinates are derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet1D {
    points: Vec<f64>,
    exact: Option<Vec<QuadraticInt>>,
    weights: Vec<Complex64>,
    extent: (f64, f64),
    exact_extent: Option<(QuadraticInt, QuadraticInt)>,
    packing_radius: f64,
}

impl PointSet1D {
    pub fn from_floats(points: Vec<f64>, weights: Option<Vec<Complex64>>, extent: (f64, f64)) -> Result<Self> {
        Self::build(points, None, weights, Extent::Float(extent.0, extent.1))
    }

    pub fn from_exact(
        points: Vec<QuadraticInt>,
        weights: Option<Vec<Complex64>>,
        extent: (QuadraticInt, QuadraticInt),
    ) -> Result<Self> {
        let floats = points.iter().map(|q| q.to_f64()).collect();
        Self::build(floats, Some(points), weights, Extent::Exact(extent.0, extent.1))
    }

    fn build(
        points: Vec<f64>,
        exact: Option<Vec<QuadraticInt>>,
        weights: Option<Vec<Complex64>>,
        extent: Extent,
    ) -> Result<Self> {
        let weights = weights.unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); points.len()]);
        if weights.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        let (extent, exact_extent) = match extent {
            Extent::Float(lo, hi) => ((lo, hi), None),
            Extent::Exact(lo, hi) => ((lo.to_f64(), hi.to_f64()), Some((lo, hi))),
        };
        if !(extent.0 < extent.1) {
            return Err(Error::InvalidArgument(format!("empty extent {extent:?}")));
        }
        match &exact {
            Some(q) => {
                if let Some(i) = q.windows(2).position(|w| w[0] >= w[1]) {
                    return Err(Error::NotSorted { index: i + 1 });
                }
            }
            None => {
                if let Some(i) = points.windows(2).position(|w| !(w[0] < w[1])) {
                    return Err(Error::NotSorted { index: i + 1 });
                }
            }
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            if first < extent.0 - MERGE_TOL || last >= extent.1 {
                return Err(Error::InvalidArgument(format!(
                    "points [{first}, {last}] leave the extent [{}, {})",
                    extent.0, extent.1
                )));
            }
        }
        let min_gap = points.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(Self {
            points,
            exact,
            weights,
            extent,
            exact_extent,
            packing_radius: min_gap / 2.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn exact(&self) -> Option<&[QuadraticInt]> {
        self.exact.as_deref()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn extent(&self) -> (f64, f64) {
        self.extent
    }

    pub fn exact_extent(&self) -> Option<(QuadraticInt, QuadraticInt)> {
        self.exact_extent
    }

    pub fn extent_length(&self) -> f64 {
        self.extent.1 - self.extent.0
    }

    /// Half the minimal gap; infinite for fewer than two points.
    pub fn packing_radius(&self) -> f64 {
        self.packing_radius
    }

    /// Number of points per unit length of the extent.
    pub fn density(&self) -> f64 {
        self.len() as f64 / self.extent_length()
    }

    pub fn with_weights(&self, weights: Vec<Complex64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} points",
                weights.len(),
                self.len()
            )));
        }
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    /// Points at the given (increasing) indices. The extent is kept unless
    /// overridden.
    pub fn subset(&self, indices: &[usize], extent: Option<Extent>, unit_weights: bool) -> Result<Self> {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let exact = self.exact.as_ref().map(|q| indices.iter().map(|&i| q[i]).collect());
        let weights = if unit_weights {
            None
        } else {
            Some(indices.iter().map(|&i| self.weights[i]).collect())
        };
        let extent = extent.unwrap_or(match self.exact_extent {
            Some((lo, hi)) => Extent::Exact(lo, hi),
            None => Extent::Float(self.extent.0, self.extent.1),
        });
        let mut out = Self::build(points, exact, weights, extent)?;
        // a subset inherits the original's packing radius when it is smaller
        if out.len() < 2 {
            out.packing_radius = self.packing_radius;
        }
        Ok(out)
    }

    /// Exact translate `t + Λ`.
    pub fn translate_exact(&self, t: QuadraticInt) -> Result<Self> {
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("exact translation of a float point set".into()))?;
        let pts: Vec<QuadraticInt> = exact.iter().map(|&x| x + t).collect();
        let extent = match self.exact_extent {
            Some((lo, hi)) => Extent::Exact(lo + t, hi + t),
            None => Extent::Float(self.extent.0 + t.to_f64(), self.extent.1 + t.to_f64()),
        };
        let floats = pts.iter().map(|q| q.to_f64()).collect();
        Self::build(floats, Some(pts), Some(self.weights.clone()), extent)
    }

    /// Distinct gap lengths, merged within [`MERGE_TOL`]. A finite sample of
    /// an FLC set shows only a handful.
    pub fn gap_types(&self) -> Vec<f64> {
        let mut gaps: Vec<f64> = self.points.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for g in gaps {
            if out.last().is_none_or(|&l| g - l > MERGE_TOL) {
                out.push(g);
            }
        }
        out
    }

    /// Indices of points whose closed K-neighbourhood lies inside the extent.
    fn interior(&self, k_radius: f64) -> std::ops::Range<usize> {
        let lo = self.extent.0 + k_radius;
        let hi = self.extent.1 - k_radius;
        let start = self.points.partition_point(|&x| x < lo);
        let end = self.points.partition_point(|&x| x < hi);
        start..end.max(start)
    }

    /// Offsets `(Λ - x_i) ∩ [-K, K]` around point `i`.
    fn neighbourhood(&self, i: usize, k_radius: f64) -> Neighbourhood {
        let x = self.points[i];
        let mut a = i;
        while a > 0 && x - self.points[a - 1] <= k_radius {
            a -= 1;
        }
        let mut b = i + 1;
        while b < self.len() && self.points[b] - x <= k_radius {
            b += 1;
        }
        match &self.exact {
            Some(q) => Neighbourhood::Exact((a..b).map(|j| q[j] - q[i]).collect()),
            None => Neighbourhood::Float((a..b).map(|j| FloatKey(self.points[j] - x)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Neighbourhood {
    Float(Vec<FloatKey>),
    Exact(Vec<QuadraticInt>),
}

// f64 wrapper ordered by total_cmp; only used after tolerance merging.
#[derive(Debug, Clone, Copy)]
struct FloatKey(f64);

impl PartialEq for FloatKey {
    fn eq(&self, o: &Self) -> bool {
        self.0.total_cmp(&o.0).is_eq()
    }
}
impl Eq for FloatKey {}
impl PartialOrd for FloatKey {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for FloatKey {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// The K-cluster `P = (Λ - x) ∩ [-K, K]` of some point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    k_radius: f64,
    offsets: Vec<f64>,
    exact: Option<Vec<QuadraticInt>>,
}

impl Cluster {
    pub fn new(k_radius: f64, offsets: Vec<f64>) -> Result<Self> {
        let c = Self {
            k_radius,
            offsets,
            exact: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn new_exact(k_radius: f64, offsets: Vec<QuadraticInt>) -> Result<Self> {
        let c = Self {
            k_radius,
            offsets: offsets.iter().map(|q| q.to_f64()).collect(),
            exact: Some(offsets),
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.k_radius > 0.0
            && self.offsets.windows(2).all(|w| w[0] < w[1])
            && self.offsets.iter().any(|&o| o.abs() <= MERGE_TOL)
            && self.offsets.iter().all(|&o| o.abs() <= self.k_radius);
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleCluster {
                cluster: self.k_radius,
                requested: self.k_radius,
            })
        }
    }

    pub fn k_radius(&self) -> f64 {
        self.k_radius
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn exact_offsets(&self) -> Option<&[QuadraticInt]> {
        self.exact.as_deref()
    }

    fn matches(&self, n: &Neighbourhood) -> bool {
        match (n, &self.exact) {
            (Neighbourhood::Exact(q), Some(e)) => q == e,
            (Neighbourhood::Exact(q), None) => {
                q.len() == self.offsets.len()
                    && q.iter()
                        .zip(&self.offsets)
                        .all(|(a, b)| (a.to_f64() - b).abs() <= MERGE_TOL)
            }
            (Neighbourhood::Float(v), _) => {
                v.len() == self.offsets.len() && v.iter().zip(&self.offsets).all(|(a, b)| (a.0 - b).abs() <= MERGE_TOL)
            }
        }
    }
}

/// All distinct K-clusters of interior points (points at distance ≥ K from
/// both ends of the extent), ordered by their offset lists.
pub fn enumerate_k_clusters(ps: &PointSet1D, k_radius: f64) -> Result<Vec<Cluster>> {
    if !(k_radius > 0.0) {
        return Err(Error::InvalidArgument("K radius must be positive".into()));
    }
    let interior = ps.interior(k_radius);
    if interior.is_empty() {
        return Err(Error::EmptyInterior { k_radius });
    }
    let mut exact_set: BTreeSet<Vec<QuadraticInt>> = BTreeSet::new();
    let mut float_list: Vec<Vec<f64>> = Vec::new();
    for i in interior {
        match ps.neighbourhood(i, k_radius) {
            Neighbourhood::Exact(q) => {
                exact_set.insert(q);
            }
            Neighbourhood::Float(v) => {
                let v: Vec<f64> = v.into_iter().map(|k| k.0).collect();
                let seen = float_list
                    .iter()
                    .any(|u| u.len() == v.len() && u.iter().zip(&v).all(|(a, b)| (a - b).abs() <= MERGE_TOL));
                if !seen {
                    float_list.push(v);
                }
            }
        }
    }
    if ps.exact().is_some() {
        let mut out: Vec<Cluster> = exact_set
            .into_iter()
            .map(|q| Cluster::new_exact(k_radius, q))
            .collect::<Result<_>>()?;
        out.sort_by(|a, b| cmp_offsets(&a.offsets, &b.offsets));
        Ok(out)
    } else {
        float_list.sort_by(|a, b| cmp_offsets(a, b));
        float_list.into_iter().map(|v| Cluster::new(k_radius, v)).collect()
    }
}

fn cmp_offsets(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

fn check_cluster(c: &Cluster, k_radius: Option<f64>) -> Result<()> {
    c.validate()?;
    if let Some(k) = k_radius {
        if (k - c.k_radius).abs() > MERGE_TOL {
            return Err(Error::IncompatibleCluster {
                cluster: c.k_radius,
                requested: k,
            });
        }
    }
    Ok(())
}

/// `T_{K,P}(Λ)`: interior points whose K-neighbourhood equals the cluster,
/// with unit weights and extent shrunk to the interior region.
pub fn locator_set(ps: &PointSet1D, c: &Cluster) -> Result<PointSet1D> {
    check_cluster(c, None)?;
    let k = c.k_radius;
    let idx: Vec<usize> = ps.interior(k).filter(|&i| c.matches(&ps.neighbourhood(i, k))).collect();
    let (lo, hi) = ps.extent();
    if hi - lo <= 2.0 * k {
        return Err(Error::EmptyInterior { k_radius: k });
    }
    ps.subset(&idx, Some(Extent::Float(lo + k, hi - k)), true)
}

/// Density of the locator set over the interior region, and its ratio to the
/// density of all interior points.
pub fn cluster_frequency(ps: &PointSet1D, c: &Cluster) -> Result<(f64, f64)> {
    let t = locator_set(ps, c)?;
    let interior = ps.interior(c.k_radius);
    if interior.is_empty() {
        return Err(Error::EmptyInterior { k_radius: c.k_radius });
    }
    let len = t.extent_length();
    let absolute = t.len() as f64 / len;
    let density = interior.len() as f64 / len;
    Ok((absolute, absolute / density))
}

/// Real bump function used to smooth a point comb.
#[derive(Debug, Clone, PartialEq)]
pub enum BumpFunction {
    /// `φ_ε(t) = max(0, 1 - |t|/ε)`.
    Tent { eps: f64 },
    /// Values on the uniform grid `-half_width ..= half_width`, linearly
    /// interpolated, zero outside.
    Sampled { half_width: f64, values: Vec<f64> },
}

impl BumpFunction {
    pub fn tent(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument("tent width must be positive".into()));
        }
        Ok(Self::Tent { eps })
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            Self::Tent { eps } => *eps,
            Self::Sampled { half_width, .. } => *half_width,
        }
    }

    pub fn has_closed_form_ft(&self) -> bool {
        matches!(self, Self::Tent { .. })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Tent { eps } => (1.0 - t.abs() / eps).max(0.0),
            Self::Sampled { half_width, values } => {
                if t.abs() > *half_width || values.len() < 2 {
                    return 0.0;
                }
                let h = 2.0 * half_width / (values.len() - 1) as f64;
                let pos = (t + half_width) / h;
                let i = (pos.floor() as usize).min(values.len() - 2);
                let f = pos - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// `φ̂(k) = ∫ φ(t) e^{-2πikt} dt`.
    pub fn ft(&self, k: f64) -> Complex64 {
        match self {
            Self::Tent { eps } => Complex64::new(tent_ft(*eps, k), 0.0),
            Self::Sampled { half_width, values } => {
                // piecewise-linear interpolant integrated exactly per cell
                let n = values.len();
                if n < 2 {
                    return Complex64::new(0.0, 0.0);
                }
                let h = 2.0 * half_width / (n - 1) as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n - 1 {
                    let t0 = -half_width + i as f64 * h;
                    acc += linear_segment_ft(t0, h, values[i], values[i + 1], k);
                }
                acc
            }
        }
    }

    /// `(φ * φ̃)(s) = ∫ φ(x) φ(x - s) dx`.
    pub fn autocorrelation(&self, s: f64) -> f64 {
        match self {
            Self::Tent { eps } => tent_autocorrelation(*eps, s),
            Self::Sampled { half_width, .. } => {
                let r = *half_width;
                if s.abs() >= 2.0 * r {
                    return 0.0;
                }
                let n = 4096;
                let lo = (-r).max(s - r);
                let hi = r.min(s + r);
                let h = (hi - lo) / n as f64;
                let f = |x: f64| self.value(x) * self.value(x - s);
                let inner: f64 = (1..n).map(|j| f(lo + j as f64 * h)).sum();
                h * (inner + 0.5 * (f(lo) + f(hi)))
            }
        }
    }
}

/// ∫_{t0}^{t0+h} (linear from v0 to v1) e^{-2πikt} dt.
fn linear_segment_ft(t0: f64, h: f64, v0: f64, v1: f64, k: f64) -> Complex64 {
    let w = 2.0 * PI * k;
    if (w * h).abs() < 1e-6 {
        let mid = Complex64::from_polar(1.0, -w * (t0 + h / 2.0));
        return mid * (0.5 * (v0 + v1) * h);
    }
    // ∫ (v0 + (v1-v0)(t-t0)/h) e^{-iwt} dt, integrated by parts
    let i = Complex64::new(0.0, 1.0);
    let e0 = Complex64::from_polar(1.0, -w * t0);
    let e1 = Complex64::from_polar(1.0, -w * (t0 + h));
    let slope = (v1 - v0) / h;
    let boundary = (e1 * v1 - e0 * v0) * (i / w);
    let rest = (e1 - e0) * (slope / (w * w));
    boundary + rest
}

/// `φ̂_ε(k) = ε (sin(πεk)/(πεk))²`, with value `ε` at `k = 0`.
pub fn tent_ft(eps: f64, k: f64) -> f64 {
    let x = PI * eps * k;
    if x.abs() < 1e-8 {
        return eps;
    }
    let s = x.sin() / x;
    eps * s * s
}

/// Closed form of `(φ_ε * φ_ε)(s)` for the unit-height tent.
pub fn tent_autocorrelation(eps: f64, s: f64) -> f64 {
    let u = s.abs() / eps;
    if u >= 2.0 {
        0.0
    } else if u <= 1.0 {
        eps * (2.0 / 3.0 - u * u + u * u * u / 2.0)
    } else {
        eps * (2.0 - u).powi(3) / 6.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedComb {
    pub values: Vec<Complex64>,
    /// Largest number of bumps overlapping at a single grid point.
    pub max_overlap: usize,
}

/// `(φ * ω)(t) = Σ_x w(x) φ(t - x)` on the given points.
pub fn smooth_comb(ps: &PointSet1D, phi: &BumpFunction, t_grid: &[f64]) -> SmoothedComb {
    let r = phi.support_radius();
    let mut max_overlap = 0;
    let values = t_grid
        .iter()
        .map(|&t| {
            let a = ps.points.partition_point(|&x| x < t - r);
            let b = ps.points.partition_point(|&x| x <= t + r);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut count = 0;
            for j in a..b {
                let v = phi.value(t - ps.points[j]);
                if v != 0.0 {
                    count += 1;
                    acc += ps.weights[j] * v;
                }
            }
            max_overlap = max_overlap.max(count);
            acc
        })
        .collect();
    if r < ps.packing_radius() {
        debug_assert!(max_overlap <= 1);
    }
    SmoothedComb { values, max_overlap }
}

/// Samples of a function at `t_j = j·step`, stored only where nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub step: f64,
    pub samples: Vec<(i64, Complex64)>,
    pub extent: (f64, f64),
}

/// [`smooth_comb`] on the global lattice `step·Z`, keeping only the samples
/// inside some bump. Suited to exponential sums over long samples.
pub fn smooth_comb_sparse(ps: &PointSet1D, phi: &BumpFunction, step: f64) -> Result<SampledFunction> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("sampling step must be positive".into()));
    }
    let r = phi.support_radius();
    let mut samples: Vec<(i64, Complex64)> = Vec::new();
    for (&x, &w) in ps.points.iter().zip(&ps.weights) {
        let j0 = ((x - r) / step).ceil() as i64;
        let j1 = ((x + r) / step).floor() as i64;
        for j in j0..=j1 {
            let v = phi.value(j as f64 * step - x);
            if v == 0.0 {
                continue;
            }
            match samples.last_mut() {
                Some((last, acc)) if *last == j => *acc += w * v,
                _ => samples.push((j, w * v)),
            }
        }
    }
    samples.sort_by_key(|&(j, _)| j);
    samples.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    Ok(SampledFunction {
        step,
        samples,
        extent: ps.extent,
    })
}
