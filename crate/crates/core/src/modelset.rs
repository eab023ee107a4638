//! The silver-mean chain in exact `Z[√2]` arithmetic: its Fourier module,
//! extinctions, inflation factor and weighted variants.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::delone::{Extent, PointSet1D};
use crate::error::{Error, Result};
use crate::spectral::{intensity_estimate, Frequency};
use crate::subshift::{fixed_point_window, SubstitutionRule};

/// `a + b√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct QuadraticInt {
    pub a: i64,
    pub b: i64,
}

/// The silver-mean inflation factor `λ = 1 + √2`.
pub const LAMBDA: QuadraticInt = QuadraticInt { a: 1, b: 1 };

impl QuadraticInt {
    pub const ZERO: Self = Self { a: 0, b: 0 };
    pub const ONE: Self = Self { a: 1, b: 0 };

    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// Algebraic conjugate `a - b√2`.
    pub fn star(self) -> Self {
        Self::new(self.a, -self.b)
    }

    /// Field norm `a² - 2b²`.
    pub fn norm(self) -> i64 {
        self.a * self.a - 2 * self.b * self.b
    }

    pub fn to_f64(self) -> f64 {
        self.a as f64 + self.b as f64 * std::f64::consts::SQRT_2
    }

    /// Sign of `a + b√2`, decided in integers.
    pub fn signum(self) -> i32 {
        let (a, b) = (self.a as i128, self.b as i128);
        let sa = a.signum();
        let sb = b.signum();
        if sa == sb || sb == 0 {
            return sa as i32;
        }
        if sa == 0 {
            return sb as i32;
        }
        // opposite signs: compare a² with 2b²
        match (a * a).cmp(&(2 * b * b)) {
            Ordering::Greater => sa as i32,
            Ordering::Less => sb as i32,
            Ordering::Equal => 0,
        }
    }
}

impl Add for QuadraticInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QuadraticInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for QuadraticInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul for QuadraticInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)
    }
}

impl PartialOrd for QuadraticInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticInt {
    fn cmp(&self, other: &Self) -> Ordering {
        (*self - *other).signum().cmp(&0)
    }
}

impl fmt::Display for QuadraticInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}√2", self.a, self.b)
    }
}

/// Element `k = (√2/4)(a + b√2) = b/2 + a√2/4` of the Fourier module
/// `L^⊛ = (√2/4) Z[√2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FourierModuleElement {
    pub q: QuadraticInt,
}

impl FourierModuleElement {
    pub const fn new(a: i64, b: i64) -> Self {
        Self {
            q: QuadraticInt::new(a, b),
        }
    }

    pub fn value(self) -> f64 {
        self.q.b as f64 / 2.0 + self.q.a as f64 * std::f64::consts::SQRT_2 / 4.0
    }

    /// `k^⋆ = (√2/4)(a - b√2)·(-1)`, i.e. the image under `√2 ↦ -√2`:
    /// `-a√2/4 + b/2`.
    pub fn star_value(self) -> f64 {
        self.q.b as f64 / 2.0 - self.q.a as f64 * std::f64::consts::SQRT_2 / 4.0
    }

    /// `λk`, again a module element since `λ L^⊛ = L^⊛`.
    pub fn mul_lambda(self) -> Self {
        Self { q: self.q * LAMBDA }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, x: QuadraticInt) -> Self {
        Self { q: self.q * x }
    }

    /// `k·x mod 1` for `x ∈ Z[√2]`, reduced before any rounding.
    ///
    /// `k·x = P√2/4 + Q/2` with `P = ac + 2bd`, `Q = ad + bc`. The half-integer
    /// part is exact; `P√2/4` is evaluated as a compensated product against a
    /// two-term split of `√2/4`.
    pub fn phase(self, x: QuadraticInt) -> f64 {
        let (a, b) = (self.q.a as i128, self.q.b as i128);
        let (c, d) = (x.a as i128, x.b as i128);
        let p = a * c + 2 * b * d;
        let q = a * d + b * c;
        let half = if q.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        frac(half + irrational_part(p))
    }
}

impl Add for FourierModuleElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { q: self.q + o.q }
    }
}

impl fmt::Display for FourierModuleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q.a, self.q.b)
    }
}

// √2/4 = SQRT2_4_HI + SQRT2_4_LO to ~32 significant digits.
const SQRT2_4_HI: f64 = std::f64::consts::SQRT_2 / 4.0;
const SQRT2_4_LO: f64 = -2.416_823_328_363_228_3e-17;

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `p·√2/4 mod 1`.
fn irrational_part(p: i128) -> f64 {
    // exact for |p| < 2^53
    let p = p as f64;
    let prod = p * SQRT2_4_HI;
    let err = p.mul_add(SQRT2_4_HI, -prod);
    let whole = prod.floor();
    frac((prod - whole) + err + p * SQRT2_4_LO)
}

/// Extinction test for the unit-weight silver-mean comb: `k^⋆ = m/√2` for a
/// nonzero integer `m`, which holds iff `b = 0` and `a` is even and nonzero.
pub fn is_extinct(k: FourierModuleElement) -> bool {
    k.q.b == 0 && k.q.a != 0 && k.q.a % 2 == 0
}

/// All module elements with `|a| ≤ a_max`, `|b| ≤ b_max` and `|k| ≤ k_max`,
/// sorted by `(a, b)`.
pub fn module_box(a_max: i64, b_max: i64, k_max: f64) -> Vec<FourierModuleElement> {
    let mut out = Vec::new();
    for a in -a_max..=a_max {
        for b in -b_max..=b_max {
            let k = FourierModuleElement::new(a, b);
            if k.value().abs() <= k_max {
                out.push(k);
            }
        }
    }
    out
}

/// Left endpoints of the first `n_points` intervals of the one-sided fixed
/// point of `L → LLS, S → L` (long `λ`, short `1`), starting at 0. The extent
/// ends at the right endpoint of the last interval.
pub fn silver_mean_chain(n_points: usize) -> Result<PointSet1D> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let rule = SubstitutionRule::builtin("silver-mean")?;
    let window = fixed_point_window(&rule, 0, n_points, vec![Complex64::new(1.0, 0.0); 2])?;
    let tiles = &window.right_half()[..n_points];
    let mut x = QuadraticInt::ZERO;
    let mut points = Vec::with_capacity(n_points);
    for &t in tiles {
        points.push(x);
        x = x + if t == 0 { LAMBDA } else { QuadraticInt::ONE };
    }
    PointSet1D::from_exact(points, None, (QuadraticInt::ZERO, x))
}

/// `I_R(k)` of an exact-mode point set, with phases reduced exactly.
pub fn intensity_at(ps: &PointSet1D, k: FourierModuleElement, r: f64) -> Result<f64> {
    if ps.exact().is_none() {
        return Err(Error::InvalidArgument("intensity_at needs exact coordinates".into()));
    }
    intensity_estimate(ps, Frequency::Module(k), r)
}

/// Gap following each point (`None` for the last point when the extent end
/// is not known exactly), and the short gap `s`. Every known gap must be `s`
/// or `sλ`.
fn following_gaps(ps: &PointSet1D) -> Result<(Vec<Option<QuadraticInt>>, QuadraticInt)> {
    let pts = ps
        .exact()
        .ok_or_else(|| Error::NotSilverMean("coordinates are not exact".into()))?;
    let mut gaps: Vec<Option<QuadraticInt>> = pts.windows(2).map(|w| Some(w[1] - w[0])).collect();
    if !pts.is_empty() {
        gaps.push(ps.exact_extent().map(|(_, hi)| hi - *pts.last().unwrap()));
    }
    let short = gaps
        .iter()
        .flatten()
        .min()
        .copied()
        .ok_or_else(|| Error::NotSilverMean("fewer than two points".into()))?;
    let long = short * LAMBDA;
    if let Some(g) = gaps.iter().flatten().find(|&&g| g != short && g != long) {
        return Err(Error::NotSilverMean(format!("gap {g} is neither {short} nor {long}")));
    }
    Ok((gaps, short))
}

/// Points followed by two long intervals.
///
/// This derived factor is exactly `λ` times a silver-mean chain: these
/// points are the left ends of the level-one supertiles `LLS` and `L`. For a
/// chain with gaps `{s, sλ}` the result has gaps `{sλ, sλ²}`. Points whose
/// two following gaps are not both known are dropped. The extent spans the
/// kept points, so the last of them only marks its right end.
pub fn inflate_factor(ps: &PointSet1D) -> Result<PointSet1D> {
    let (gaps, short) = following_gaps(ps)?;
    let long = short * LAMBDA;
    let pts = ps.exact().unwrap();
    let n = pts.len();
    let mut keep = Vec::new();
    for i in 0..n {
        match (gaps[i], gaps.get(i + 1).copied().flatten()) {
            (Some(g0), Some(g1)) => {
                if g0 == long && g1 == long {
                    keep.push(i);
                }
            }
            _ => break,
        }
    }
    // the extent runs from the first kept point to the last one, which is
    // dropped, so every gap of the result is known
    if keep.len() < 3 {
        return Err(Error::NotSilverMean("chain too short to inflate".into()));
    }
    let last = keep.pop().unwrap();
    ps.subset(&keep, Some(Extent::Exact(pts[keep[0]], pts[last])), true)
}

/// Silver-mean comb with weights chosen by the type of the following
/// interval. `(1, 1)` gives the unit comb.
pub fn weighted_silver_comb(ps: &PointSet1D, w_short_start: Complex64, w_long_start: Complex64) -> Result<PointSet1D> {
    let (gaps, short) = following_gaps(ps)?;
    let mut weights = Vec::with_capacity(gaps.len());
    for g in gaps {
        match g {
            Some(g) if g != short => weights.push(w_long_start),
            Some(_) => weights.push(w_short_start),
            None => {
                return Err(Error::NotSilverMean(
                    "last gap unknown; extent end must be exact".into(),
                ))
            }
        }
    }
    ps.with_weights(weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationRow {
    pub k: FourierModuleElement,
    /// `I(k)` of the inflated chain.
    pub inflated: f64,
    /// `c · I(λk)` of the original chain.
    pub scaled_original: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationReport {
    /// `(dens(inflated)/dens(original))²`; equals `λ^{-2}` in the limit.
    pub density_ratio_constant: f64,
    pub rows: Vec<InflationRow>,
    /// Largest relative error over rows with inflated intensity above 1e-3.
    pub max_rel_error: f64,
}

/// Compares `I(k)` of [`inflate_factor`]`(ps)` with `c·I(λk)` of `ps`, each
/// chain normalised over its own extent. `r` caps the half-width used for the
/// original chain (the inflated chain uses its own full extent).
pub fn verify_inflation_identity(
    ps: &PointSet1D,
    candidates: &[FourierModuleElement],
    r: f64,
) -> Result<InflationReport> {
    let inflated = inflate_factor(ps)?;
    let r_orig = r.min(ps.extent_length() / 2.0);
    let r_infl = inflated.extent_length() / 2.0;
    let c = (inflated.density() / ps.density()).powi(2);
    let mut rows = Vec::with_capacity(candidates.len());
    let mut max_rel_error: f64 = 0.0;
    for &k in candidates {
        let lhs = intensity_at(&inflated, k, r_infl)?;
        let rhs = c * intensity_at(ps, k.mul_lambda(), r_orig)?;
        let rel_error = if lhs > 0.0 {
            (lhs - rhs).abs() / lhs
        } else {
            f64::INFINITY
        };
        if lhs > 1e-3 {
            max_rel_error = max_rel_error.max(rel_error);
        }
        rows.push(InflationRow {
            k,
            inflated: lhs,
            scaled_original: rhs,
            rel_error,
        });
    }
    Ok(InflationReport {
        density_ratio_constant: c,
        rows,
        max_rel_error,
    })
}
