//! Sliding-block maps `Φ_g` between subshifts.
//!
//! A [`BlockMap`] reads the letters `x[n+offset ..= n+offset+length-1]` and
//! emits one letter of an output alphabet whose letters carry complex
//! values. Words missing from the table are not defaulted: applying the map
//! to one is an error.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::subshift::{Letter, SymbolicWindow, Word};

/// Largest table that gets a dense lookup array.
const DENSE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    offset: i64,
    length: usize,
    alphabet_size: usize,
    outputs: Vec<Complex64>,
    table: BTreeMap<Word, Letter>,
}

impl BlockMap {
    pub fn new(
        offset: i64,
        length: usize,
        alphabet_size: usize,
        outputs: Vec<Complex64>,
        table: BTreeMap<Word, Letter>,
    ) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("block length must be ≥ 1".into()));
        }
        for (w, &out) in &table {
            if w.len() != length {
                return Err(Error::InvalidArgument(format!(
                    "table word {w:?} has length {} instead of {length}",
                    w.len()
                )));
            }
            if let Some(&bad) = w.iter().find(|&&l| l as usize >= alphabet_size) {
                return Err(Error::UnknownLetter(bad as usize));
            }
            if out as usize >= outputs.len() {
                return Err(Error::UnknownLetter(out as usize));
            }
        }
        Ok(Self {
            offset,
            length,
            alphabet_size,
            outputs,
            table,
        })
    }

    /// Builds a map from `word -> value` pairs. Output letters are numbered
    /// by first appearance of each distinct value.
    pub fn from_values<I>(offset: i64, length: usize, alphabet_size: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, Complex64)>,
    {
        let mut outputs: Vec<Complex64> = Vec::new();
        let mut table = BTreeMap::new();
        for (w, v) in entries {
            let id = match outputs.iter().position(|o| same_value(*o, v)) {
                Some(id) => id,
                None => {
                    outputs.push(v);
                    outputs.len() - 1
                }
            };
            table.insert(w, id as Letter);
        }
        Self::new(offset, length, alphabet_size, outputs, table)
    }

    /// `g(x) = weight(x_0)`.
    pub fn identity(weights: &[Complex64]) -> Self {
        let table = (0..weights.len()).map(|l| (vec![l as Letter], l as Letter)).collect();
        Self::new(0, 1, weights.len(), weights.to_vec(), table).expect("valid identity map")
    }

    /// `g(x) = x_0 XOR x_1` on a two-letter alphabet, output values 0 and 1.
    pub fn xor() -> Self {
        let table = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(|(a, b): (Letter, Letter)| (vec![a, b], a ^ b))
            .collect();
        Self::new(0, 2, 2, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], table).expect("valid xor map")
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn outputs(&self) -> &[Complex64] {
        &self.outputs
    }

    pub fn table(&self) -> &BTreeMap<Word, Letter> {
        &self.table
    }

    pub fn lookup(&self, w: &[Letter]) -> Option<Letter> {
        self.table.get(w).copied()
    }

    pub fn value_of(&self, w: &[Letter]) -> Option<Complex64> {
        self.lookup(w).map(|l| self.outputs[l as usize])
    }

    /// Replaces the value emitted for `w`.
    pub fn with_entry(&self, w: Word, value: Complex64) -> Result<Self> {
        let mut entries: Vec<(Word, Complex64)> = self
            .table
            .iter()
            .map(|(k, &l)| (k.clone(), self.outputs[l as usize]))
            .collect();
        match entries.iter_mut().find(|(k, _)| *k == w) {
            Some(entry) => entry.1 = value,
            None => entries.push((w, value)),
        }
        Self::from_values(self.offset, self.length, self.alphabet_size, entries)
    }

    /// Map equal to applying `self` first and then `next`. The table covers
    /// every word over the source alphabet on which both lookups succeed.
    pub fn compose(&self, next: &BlockMap) -> Result<BlockMap> {
        if next.alphabet_size != self.outputs.len() {
            return Err(Error::InvalidArgument(format!(
                "second map reads {} letters, first emits {}",
                next.alphabet_size,
                self.outputs.len()
            )));
        }
        let length = self.length + next.length - 1;
        let total = self.alphabet_size.checked_pow(length as u32).unwrap_or(usize::MAX);
        if total > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "composed table would have {total} words"
            )));
        }
        let mut table = BTreeMap::new();
        let mut word = vec![0 as Letter; length];
        'words: for code in 0..total {
            let mut c = code;
            for slot in word.iter_mut().rev() {
                *slot = (c % self.alphabet_size) as Letter;
                c /= self.alphabet_size;
            }
            let mut mid = Vec::with_capacity(next.length);
            for i in 0..next.length {
                match self.lookup(&word[i..i + self.length]) {
                    Some(l) => mid.push(l),
                    None => continue 'words,
                }
            }
            if let Some(out) = next.lookup(&mid) {
                table.insert(word.clone(), out);
            }
        }
        BlockMap::new(
            self.offset + next.offset,
            length,
            self.alphabet_size,
            next.outputs.clone(),
            table,
        )
    }

    fn lookup_table(&self) -> Lookup<'_> {
        let size = self.alphabet_size.checked_pow(self.length as u32);
        match size {
            Some(size) if size <= DENSE_LIMIT => {
                let mut dense = vec![None; size];
                for (w, &l) in &self.table {
                    dense[encode(w, self.alphabet_size)] = Some(l);
                }
                Lookup::Dense {
                    dense,
                    base: self.alphabet_size,
                }
            }
            _ => Lookup::Sparse(&self.table),
        }
    }
}

fn same_value(a: Complex64, b: Complex64) -> bool {
    a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
}

fn encode(w: &[Letter], base: usize) -> usize {
    w.iter().fold(0, |acc, &l| acc * base + l as usize)
}

enum Lookup<'a> {
    Dense { dense: Vec<Option<Letter>>, base: usize },
    Sparse(&'a BTreeMap<Word, Letter>),
}

impl Lookup<'_> {
    fn get(&self, w: &[Letter]) -> Option<Letter> {
        match self {
            Lookup::Dense { dense, base } => {
                if w.iter().any(|&l| l as usize >= *base) {
                    return None;
                }
                dense[encode(w, *base)]
            }
            Lookup::Sparse(t) => t.get(w).copied(),
        }
    }
}

/// Index range `n` for which `x[n+m ..= n+m+ℓ-1]` lies inside the window.
pub fn factor_range(window: &SymbolicWindow, g: &BlockMap) -> Option<(i64, i64)> {
    let first = window.lo() - g.offset;
    let last = window.hi() - g.offset - g.length as i64 + 1;
    (first <= last).then_some((first, last))
}

/// Output letters of `Φ_g` over the given index range (ids into
/// `g.outputs()`).
fn image_letters(window: &SymbolicWindow, g: &BlockMap, first: i64, last: i64) -> Result<Vec<Letter>> {
    let lookup = g.lookup_table();
    let letters = window.letters();
    let mut out = Vec::with_capacity((last - first + 1).max(0) as usize);
    for n in first..=last {
        let start = (n + g.offset - window.lo()) as usize;
        let w = &letters[start..start + g.length];
        match lookup.get(w) {
            Some(l) => out.push(l),
            None => {
                return Err(Error::MissingTableEntry {
                    word: w.to_vec(),
                    position: n + g.offset,
                })
            }
        }
    }
    Ok(out)
}

/// `(Φ_g x)_n = g(x[n+m ..= n+m+ℓ-1])` on every `n` where the block fits.
pub fn apply_block_map(window: &SymbolicWindow, g: &BlockMap) -> Result<SymbolicWindow> {
    let (first, last) = factor_range(window, g).ok_or(Error::WindowTooShort {
        needed: g.length,
        available: window.len(),
    })?;
    if first > 0 || last < 0 {
        return Err(Error::WindowTooShort {
            needed: window.len() + g.offset.unsigned_abs() as usize + g.length,
            available: window.len(),
        });
    }
    let letters = image_letters(window, g, first, last)?;
    SymbolicWindow::new(first, letters, g.outputs.clone())
}

/// Values `g(S^n x)` for `n` in `range`, read straight from the source
/// window without building the factor window.
pub fn orbit_values(window: &SymbolicWindow, g: &BlockMap, range: RangeInclusive<i64>) -> Result<Vec<Complex64>> {
    let (first, last) = (*range.start(), *range.end());
    let (lo, hi) = factor_range(window, g).ok_or(Error::WindowTooShort {
        needed: g.length,
        available: window.len(),
    })?;
    if first < lo || last > hi {
        return Err(Error::WindowTooShort {
            needed: (last - first + 1).max(0) as usize + g.length - 1,
            available: window.len(),
        });
    }
    Ok(image_letters(window, g, first, last)?
        .into_iter()
        .map(|l| g.outputs[l as usize])
        .collect())
}

/// The cylinder indicator `1_{w,n}`: value 1 on `w` read at offset `n`, 0 on
/// every other word of the same length over an alphabet of the given size.
pub fn indicator_block_map(w: &[Letter], n: i64, alphabet_size: usize) -> Result<BlockMap> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("indicator word must be nonempty".into()));
    }
    if let Some(&bad) = w.iter().find(|&&l| l as usize >= alphabet_size) {
        return Err(Error::UnknownLetter(bad as usize));
    }
    let total = alphabet_size
        .checked_pow(w.len() as u32)
        .filter(|&t| t <= DENSE_LIMIT)
        .ok_or_else(|| Error::InvalidArgument("indicator word too long".into()))?;
    let mut table = BTreeMap::new();
    let mut word = vec![0 as Letter; w.len()];
    for code in 0..total {
        let mut c = code;
        for slot in word.iter_mut().rev() {
            *slot = (c % alphabet_size) as Letter;
            c /= alphabet_size;
        }
        table.insert(word.clone(), Letter::from(word == w));
    }
    BlockMap::new(
        n,
        w.len(),
        alphabet_size,
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        table,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub shift: i64,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivarianceReport {
    pub shifts_tested: Vec<i64>,
    /// Shifts that could not be tested (shifted window misses the origin or
    /// the map failed on it).
    pub skipped: Vec<i64>,
    pub first_violation: Option<Violation>,
}

impl EquivarianceReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none() && !self.shifts_tested.is_empty()
    }
}

/// Checks `Φ(S^t x) = S^t Φ(x)` on the common index range for each shift.
pub fn verify_equivariance<F>(window: &SymbolicWindow, map: F, shifts: RangeInclusive<i64>) -> EquivarianceReport
where
    F: Fn(&SymbolicWindow) -> Result<SymbolicWindow>,
{
    let mut report = EquivarianceReport {
        shifts_tested: Vec::new(),
        skipped: Vec::new(),
        first_violation: None,
    };
    let Ok(image) = map(window) else {
        report.skipped.extend(shifts);
        return report;
    };
    for t in shifts {
        let lhs = match window.recentred(t).and_then(|w| map(&w)) {
            Ok(lhs) => lhs,
            Err(_) => {
                report.skipped.push(t);
                continue;
            }
        };
        // (S^t y)_n = y_{n+t}
        let lo = lhs.lo().max(image.lo() - t);
        let hi = lhs.hi().min(image.hi() - t);
        report.shifts_tested.push(t);
        if report.first_violation.is_some() {
            continue;
        }
        for n in lo..=hi {
            let a = lhs.weights()[lhs.letter_at(n).unwrap() as usize];
            let b = image.weights()[image.letter_at(n + t).unwrap() as usize];
            if !same_value(a, b) {
                report.first_violation = Some(Violation { shift: t, index: n });
                break;
            }
        }
    }
    report
}

pub fn verify_factor_equivariance(
    window: &SymbolicWindow,
    g: &BlockMap,
    shifts: RangeInclusive<i64>,
) -> EquivarianceReport {
    verify_equivariance(window, |w| apply_block_map(w, g), shifts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subshift::{dictionary, fixed_point_window, SubstitutionRule};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tm(len: usize) -> SymbolicWindow {
        let rule = SubstitutionRule::builtin("thue-morse").unwrap();
        fixed_point_window(&rule, 0, len, vec![c(1.0), c(-1.0)]).unwrap()
    }

    #[test]
    fn identity_is_noop() {
        let w = tm(256);
        let out = apply_block_map(&w, &BlockMap::identity(w.weights())).unwrap();
        assert_eq!(out, w);
    }

    #[test]
    fn xor_of_thue_morse_is_period_doubling() {
        let w = tm(128);
        let y = apply_block_map(&w, &BlockMap::xor()).unwrap();
        let pd_rule = SubstitutionRule::builtin("period-doubling").unwrap();
        let pd = fixed_point_window(&pd_rule, 0, 64, vec![c(1.0), c(0.0)]).unwrap();
        // a -> 1, b -> 0 in the period-doubling word
        let expected: Vec<Complex64> = pd.right_half()[..64]
            .iter()
            .map(|&l| if l == 0 { c(1.0) } else { c(0.0) })
            .collect();
        let got: Vec<Complex64> = (0..64).map(|n| y.weights()[y.letter_at(n).unwrap() as usize]).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn indicator_matches_scan() {
        let rule = SubstitutionRule::builtin("fibonacci").unwrap();
        let w = fixed_point_window(&rule, 0, 512, vec![c(1.0), c(0.0)]).unwrap();
        let ab = rule.word_from_str("ab").unwrap();
        let g = indicator_block_map(&ab, 0, 2).unwrap();
        let y = apply_block_map(&w, &g).unwrap();
        for n in y.lo()..=y.hi() {
            let hit = w.letter_at(n) == Some(0) && w.letter_at(n + 1) == Some(1);
            let v = y.weights()[y.letter_at(n).unwrap() as usize];
            assert_eq!(v, c(if hit { 1.0 } else { 0.0 }));
        }
    }

    #[test]
    fn indicator_offset_is_a_shift() {
        let w = tm(1024);
        let ab = vec![0, 1];
        let y0 = apply_block_map(&w, &indicator_block_map(&ab, 0, 2).unwrap()).unwrap();
        let y3 = apply_block_map(&w, &indicator_block_map(&ab, 3, 2).unwrap()).unwrap();
        for n in y3.lo()..=y3.hi() {
            let a = y3.weights()[y3.letter_at(n).unwrap() as usize];
            let b = y0.weights()[y0.letter_at(n + 3).unwrap() as usize];
            assert_eq!(a, b);
        }
    }

    #[test]
    fn indicators_partition_unity() {
        let w = tm(1 << 12);
        let words: Vec<_> = dictionary(&w, 3)
            .unwrap()
            .into_iter()
            .filter(|w| w.len() == 3)
            .collect();
        let maps: Vec<_> = words.iter().map(|u| indicator_block_map(u, -1, 2).unwrap()).collect();
        let images: Vec<_> = maps.iter().map(|g| apply_block_map(&w, g).unwrap()).collect();
        let y = &images[0];
        for n in y.lo()..=y.hi() {
            let total: Complex64 = images
                .iter()
                .map(|im| im.weights()[im.letter_at(n).unwrap() as usize])
                .sum();
            assert_eq!(total, c(1.0));
        }
    }

    #[test]
    fn missing_entry_is_an_error() {
        let w = tm(64);
        let mut table = BTreeMap::new();
        table.insert(vec![0, 1], 0);
        let g = BlockMap::new(0, 2, 2, vec![c(1.0)], table).unwrap();
        assert!(matches!(apply_block_map(&w, &g), Err(Error::MissingTableEntry { .. })));
    }

    #[test]
    fn equivariance_reports() {
        let w = tm(1 << 12);
        let id = verify_factor_equivariance(&w, &BlockMap::identity(w.weights()), -32..=32);
        assert!(id.passed());
        let xor = verify_factor_equivariance(&w, &BlockMap::xor(), -32..=32);
        assert!(xor.passed());
        assert_eq!(xor.shifts_tested.len(), 65);

        // negative control: output corrupted at a fixed absolute index
        let corrupted = |x: &SymbolicWindow| {
            let y = apply_block_map(x, &BlockMap::xor())?;
            let mut letters = y.letters().to_vec();
            let i = (5 - y.lo()) as usize;
            letters[i] ^= 1;
            SymbolicWindow::new(y.lo(), letters, y.weights().to_vec())
        };
        let report = verify_equivariance(&w, corrupted, -32..=32);
        let v = report.first_violation.expect("violation detected");
        assert!(v.index == 5 || v.index == 5 - v.shift);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let w = tm(1 << 10);
        let xor = BlockMap::xor();
        let ind = indicator_block_map(&[1, 0], 2, 2).unwrap();
        let composed = xor.compose(&ind).unwrap();
        assert_eq!(composed.offset(), 2);
        assert_eq!(composed.length(), 3);
        let seq = apply_block_map(&apply_block_map(&w, &xor).unwrap(), &ind).unwrap();
        let direct = apply_block_map(&w, &composed).unwrap();
        let lo = seq.lo().max(direct.lo());
        let hi = seq.hi().min(direct.hi());
        assert!(hi - lo > 900);
        for n in lo..=hi {
            let a = seq.weights()[seq.letter_at(n).unwrap() as usize];
            let b = direct.weights()[direct.letter_at(n).unwrap() as usize];
            assert_eq!(a, b);
        }
    }
}
