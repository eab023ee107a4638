//! Substitution rules, two-sided fixed-point windows, dictionaries and word
//! frequencies.
//!
//! Letters are small integer ids (`0..alphabet_size`). Character names are
//! only kept for parsing and printing.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Letter = u8;
pub type Word = Vec<Letter>;

/// Names accepted by [`SubstitutionRule::builtin`].
pub const BUILTIN_RULES: [&str; 5] = [
    "thue-morse",
    "period-doubling",
    "fibonacci",
    "silver-mean",
    "rudin-shapiro",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionRule {
    names: Vec<char>,
    images: Vec<Word>,
}

impl SubstitutionRule {
    /// Builds a rule from per-letter images. Letter `i` is displayed as
    /// `names[i]`.
    pub fn new(names: Vec<char>, images: Vec<Word>) -> Result<Self> {
        if names.is_empty() || names.len() != images.len() || names.len() > 64 {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} images",
                names.len(),
                images.len()
            )));
        }
        let n = names.len();
        for image in &images {
            if image.is_empty() {
                return Err(Error::InvalidArgument("empty image".into()));
            }
            if let Some(&bad) = image.iter().find(|&&l| l as usize >= n) {
                return Err(Error::UnknownLetter(bad as usize));
            }
        }
        Ok(Self { names, images })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (names, images): (&[char], &[&str]) = match name {
            "thue-morse" => (&['a', 'b'], &["ab", "ba"]),
            "period-doubling" => (&['a', 'b'], &["ab", "aa"]),
            "fibonacci" => (&['a', 'b'], &["ab", "a"]),
            "silver-mean" => (&['a', 'b'], &["aab", "a"]),
            // 0 -> 02, 1 -> 32, 2 -> 01, 3 -> 31
            "rudin-shapiro" => (&['a', 'b', 'c', 'd'], &["ac", "dc", "ab", "db"]),
            _ => {
                return Err(Error::UnknownRule {
                    name: name.to_string(),
                    known: BUILTIN_RULES.join(", "),
                })
            }
        };
        let images = images.iter().map(|s| s.bytes().map(|c| c - b'a').collect()).collect();
        Self::new(names.to_vec(), images)
    }

    /// Default comb weights of a built-in rule: `±1` for Thue–Morse and
    /// Rudin–Shapiro, the indicator of `a` for the others.
    pub fn builtin_weights(name: &str) -> Option<Vec<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match name {
            "thue-morse" => Some(vec![one, -one]),
            "rudin-shapiro" => Some(vec![one, one, -one, -one]),
            "period-doubling" | "fibonacci" | "silver-mean" => Some(vec![one, zero]),
            _ => None,
        }
    }

    /// Parses one rule per line in the form `a -> ab`. Blank lines and lines
    /// starting with `#` are skipped. Letters are numbered in order of their
    /// left-hand side.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected `x -> word`".into(),
            })?;
            let lhs = lhs.trim();
            let mut chars = lhs.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("left side `{lhs}` must be a single letter"),
                    })
                }
            };
            lines.push((i + 1, letter, rhs.trim().to_string()));
        }
        let names: Vec<char> = lines.iter().map(|(_, c, _)| *c).collect();
        let mut images = Vec::with_capacity(names.len());
        for (line, _, rhs) in &lines {
            let mut image = Vec::with_capacity(rhs.len());
            for c in rhs.chars().filter(|c| !c.is_whitespace()) {
                let id = names.iter().position(|&n| n == c).ok_or_else(|| Error::Parse {
                    line: *line,
                    msg: format!("letter `{c}` has no rule"),
                })?;
                image.push(id as Letter);
            }
            images.push(image);
        }
        let distinct: BTreeSet<_> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::Parse {
                line: 0,
                msg: "duplicate left-hand side".into(),
            });
        }
        Self::new(names, images)
    }

    pub fn alphabet_size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn image(&self, letter: Letter) -> &[Letter] {
        &self.images[letter as usize]
    }

    pub fn letter_id(&self, name: char) -> Option<Letter> {
        self.names.iter().position(|&c| c == name).map(|i| i as Letter)
    }

    pub fn word_from_str(&self, s: &str) -> Result<Word> {
        s.chars()
            .map(|c| {
                self.letter_id(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("letter `{c}` is not in the alphabet")))
            })
            .collect()
    }

    pub fn word_to_string(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.names[l as usize]).collect()
    }

    pub fn apply(&self, word: &[Letter]) -> Word {
        let mut out = Vec::with_capacity(word.len() * 2);
        for &l in word {
            out.extend_from_slice(self.image(l));
        }
        out
    }

    /// `M[i][j]` = number of occurrences of letter `i` in the image of `j`.
    pub fn substitution_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.alphabet_size();
        let mut m = vec![vec![0u64; n]; n];
        for (j, image) in self.images.iter().enumerate() {
            for &i in image {
                m[i as usize][j] += 1;
            }
        }
        m
    }

    /// Checks whether some power `M^k`, `k ≤ (n-1)² + 1`, is entrywise
    /// positive (Wielandt's bound).
    pub fn is_primitive(&self) -> bool {
        let n = self.alphabet_size();
        let base: Vec<Vec<bool>> = self
            .substitution_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|v| v > 0).collect())
            .collect();
        let mut power = base.clone();
        let bound = (n - 1) * (n - 1) + 1;
        for _ in 0..bound {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return true;
            }
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if power[i][k] {
                        for j in 0..n {
                            next[i][j] |= base[k][j];
                        }
                    }
                }
            }
            power = next;
        }
        power.iter().all(|row| row.iter().all(|&b| b))
    }

    /// All legal two-letter words, as the closure of the two-letter subwords
    /// of single images under the substitution.
    pub fn legal_two_words(&self) -> BTreeSet<(Letter, Letter)> {
        let mut legal = BTreeSet::new();
        for image in &self.images {
            for pair in image.windows(2) {
                legal.insert((pair[0], pair[1]));
            }
        }
        loop {
            let mut added = false;
            let current: Vec<_> = legal.iter().copied().collect();
            for (x, y) in current {
                let w = self.apply(&[x, y]);
                for pair in w.windows(2) {
                    added |= legal.insert((pair[0], pair[1]));
                }
            }
            if !added {
                return legal;
            }
        }
    }
}

/// Finite slice `letters[n - lo]` of a bi-infinite sequence, indexed by
/// `lo..=hi` with `lo ≤ 0 ≤ hi`, together with complex comb weights per letter.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicWindow {
    lo: i64,
    letters: Vec<Letter>,
    weights: Vec<Complex64>,
}

impl SymbolicWindow {
    pub fn new(lo: i64, letters: Vec<Letter>, weights: Vec<Complex64>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::WindowTooShort {
                needed: 1,
                available: 0,
            });
        }
        if lo > 0 || lo + letters.len() as i64 - 1 < 0 {
            return Err(Error::InvalidArgument(format!(
                "window [{lo}, {}] does not cover the origin",
                lo + letters.len() as i64 - 1
            )));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l as usize >= weights.len()) {
            return Err(Error::UnknownLetter(bad as usize));
        }
        Ok(Self { lo, letters, weights })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.letters.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn letter_at(&self, n: i64) -> Option<Letter> {
        if n < self.lo || n > self.hi() {
            None
        } else {
            Some(self.letters[(n - self.lo) as usize])
        }
    }

    /// Comb weights `y_n` over the whole window, in index order.
    pub fn values(&self) -> Vec<Complex64> {
        self.letters.iter().map(|&l| self.weights[l as usize]).collect()
    }

    /// Letters from index 0 to `hi`.
    pub fn right_half(&self) -> &[Letter] {
        &self.letters[(-self.lo) as usize..]
    }

    pub fn with_weights(&self, weights: Vec<Complex64>) -> Result<Self> {
        Self::new(self.lo, self.letters.clone(), weights)
    }

    /// Sub-window on `lo..=hi`, which must contain the origin.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo < self.lo || hi > self.hi() || lo > hi {
            return Err(Error::WindowTooShort {
                needed: (hi - lo + 1).max(0) as usize,
                available: self.len(),
            });
        }
        let a = (lo - self.lo) as usize;
        let b = (hi - self.lo) as usize;
        Self::new(lo, self.letters[a..=b].to_vec(), self.weights.clone())
    }

    /// The window of `S^t x`: the same letters with indices lowered by `t`.
    pub fn shifted(&self, t: i64) -> Self {
        Self {
            lo: self.lo - t,
            letters: self.letters.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Re-origins the window so that the letter at index `n` moves to 0;
    /// unlike [`shifted`](Self::shifted) this checks that the origin stays
    /// covered.
    pub fn recentred(&self, n: i64) -> Result<Self> {
        Self::new(self.lo - n, self.letters.clone(), self.weights.clone())
    }
}

/// Two-sided legal window of a fixed point, with `seed` at index 0.
///
/// The left half is the iterated image of a letter `c` such that `c seed` is
/// legal and `c` is the last letter of its own `p`-th image; both halves are
/// iterated with `σ^p` until each has at least `min_len` letters, so the
/// right half is a prefix of the one-sided fixed point starting with `seed`.
pub fn fixed_point_window(
    rule: &SubstitutionRule,
    seed: Letter,
    min_len: usize,
    weights: Vec<Complex64>,
) -> Result<SymbolicWindow> {
    let n = rule.alphabet_size();
    if seed as usize >= n {
        return Err(Error::UnknownLetter(seed as usize));
    }
    if rule.image(seed)[0] != seed {
        return Err(Error::NotAFixedPointSeed { letter: seed as usize });
    }
    if !rule.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let min_len = min_len.max(1);

    // A primitive rule whose images all have length one is the trivial
    // one-letter rule a -> a; its only element is the constant sequence.
    if (0..n).all(|l| rule.image(l as Letter).len() == 1) {
        let letters = vec![seed; 2 * min_len];
        return SymbolicWindow::new(-(min_len as i64), letters, weights);
    }

    let legal = rule.legal_two_words();
    let last = |l: Letter| *rule.image(l).last().expect("nonempty image");
    let mut choice = None;
    'search: for p in 1..=n {
        for c in 0..n as Letter {
            let mut d = c;
            for _ in 0..p {
                d = last(d);
            }
            if d == c && legal.contains(&(c, seed)) {
                choice = Some((p, c));
                break 'search;
            }
        }
    }
    let (p, left_seed) = choice.ok_or(Error::NoLegalSeedPair { seed: seed as usize })?;

    let mut left = vec![left_seed];
    let mut right = vec![seed];
    while left.len() < min_len || right.len() < min_len {
        for _ in 0..p {
            left = rule.apply(&left);
            right = rule.apply(&right);
        }
    }
    let lo = -(left.len() as i64);
    left.extend_from_slice(&right);
    SymbolicWindow::new(lo, left, weights)
}

/// All distinct subwords of length `1..=max_len` of the window.
pub fn dictionary(window: &SymbolicWindow, max_len: usize) -> Result<BTreeSet<Word>> {
    if max_len == 0 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    if max_len > window.len() {
        return Err(Error::WindowTooShort {
            needed: max_len,
            available: window.len(),
        });
    }
    let mut words = BTreeSet::new();
    for len in 1..=max_len {
        for w in window.letters().windows(len) {
            if !words.contains(w) {
                words.insert(w.to_vec());
            }
        }
    }
    Ok(words)
}

/// Letter frequencies from the normalised Perron–Frobenius eigenvector of the
/// substitution matrix.
pub fn letter_frequencies_pf(rule: &SubstitutionRule) -> Result<Vec<f64>> {
    if !rule.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let m = rule.substitution_matrix();
    let n = m.len();
    // Power iteration on M + I: same eigenvectors, and the shift keeps
    // negative eigenvalues from competing with the PF root.
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = v.clone();
        for i in 0..n {
            for j in 0..n {
                next[i] += m[i][j] as f64 * v[j];
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-16 {
            break;
        }
    }
    Ok(v)
}

/// Frequency of `w` among all placements inside the window (no wraparound),
/// with `|w| / len` as a crude error indicator.
pub fn word_frequency_empirical(window: &SymbolicWindow, w: &[Letter]) -> Result<(f64, f64)> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    if w.len() > window.len() {
        return Err(Error::WindowTooShort {
            needed: w.len(),
            available: window.len(),
        });
    }
    let positions = window.len() - w.len() + 1;
    let count = window.letters().windows(w.len()).filter(|s| *s == w).count();
    Ok((count as f64 / positions as f64, w.len() as f64 / window.len() as f64))
}

/// Empirical frequencies of every word of length `1..=max_len` in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct WordFrequencyTable {
    pub entries: BTreeMap<Word, f64>,
    pub max_len: usize,
    pub error_bound: f64,
}

impl WordFrequencyTable {
    pub fn from_window(window: &SymbolicWindow, max_len: usize) -> Result<Self> {
        let words = dictionary(window, max_len)?;
        let mut entries = BTreeMap::new();
        for w in words {
            let (f, _) = word_frequency_empirical(window, &w)?;
            entries.insert(w, f);
        }
        Ok(Self {
            entries,
            max_len,
            error_bound: 2.0 * max_len as f64 / window.len() as f64,
        })
    }

    pub fn get(&self, w: &[Letter]) -> f64 {
        self.entries.get(w).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); n]
    }

    fn window(name: &str, len: usize) -> (SubstitutionRule, SymbolicWindow) {
        let rule = SubstitutionRule::builtin(name).unwrap();
        let w = fixed_point_window(&rule, 0, len, ones(rule.alphabet_size())).unwrap();
        (rule, w)
    }

    #[test]
    fn thue_morse_prefix() {
        let (rule, w) = window("thue-morse", 8);
        assert!(w.lo() <= 0 && w.hi() >= 0);
        assert_eq!(rule.word_to_string(&w.right_half()[..8]), "abbabaab");
    }

    #[test]
    fn identity_rule_is_constant() {
        let rule = SubstitutionRule::parse("a -> a").unwrap();
        let w = fixed_point_window(&rule, 0, 4, ones(1)).unwrap();
        assert_eq!(rule.word_to_string(&w.right_half()[..4]), "aaaa");
        assert!(w.letters().iter().all(|&l| l == 0));
    }

    #[test]
    fn silver_mean_prefix() {
        let (rule, w) = window("silver-mean", 7);
        assert_eq!(rule.word_to_string(&w.right_half()[..7]), "aabaaba");
    }

    #[test]
    fn window_reproduces_own_prefix() {
        for name in BUILTIN_RULES {
            let (rule, w) = window(name, 256);
            let right = w.right_half();
            let image = rule.apply(right);
            assert_eq!(&image[..right.len()], right, "{name}");
        }
    }

    #[test]
    fn seed_errors() {
        let rule = SubstitutionRule::builtin("period-doubling").unwrap();
        assert_eq!(
            fixed_point_window(&rule, 1, 8, ones(2)),
            Err(Error::NotAFixedPointSeed { letter: 1 })
        );
        let reducible = SubstitutionRule::parse("a -> ab\nb -> b").unwrap();
        assert_eq!(fixed_point_window(&reducible, 0, 8, ones(2)), Err(Error::NotPrimitive));
    }

    #[test]
    fn window_is_legal() {
        // every two-letter subword of the window is legal
        for name in BUILTIN_RULES {
            let (rule, w) = window(name, 1 << 10);
            let legal = rule.legal_two_words();
            for pair in w.letters().windows(2) {
                assert!(legal.contains(&(pair[0], pair[1])), "{name}");
            }
        }
    }

    #[test]
    fn dictionaries() {
        let (rule, tm) = window("thue-morse", 1 << 10);
        let d = dictionary(&tm, 3).unwrap();
        assert!(!d.contains(&rule.word_from_str("aaa").unwrap()));
        assert!(!d.contains(&rule.word_from_str("bbb").unwrap()));
        assert_eq!(d.iter().filter(|w| w.len() == 1).count(), 2);

        let (rule, sm) = window("silver-mean", 1 << 10);
        let d2: Vec<String> = dictionary(&sm, 2)
            .unwrap()
            .into_iter()
            .filter(|w| w.len() == 2)
            .map(|w| rule.word_to_string(&w))
            .collect();
        assert_eq!(d2, vec!["aa", "ab", "ba"]);

        assert!(matches!(
            dictionary(&sm, sm.len() + 1),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn pf_frequencies() {
        let tm = letter_frequencies_pf(&SubstitutionRule::builtin("thue-morse").unwrap()).unwrap();
        assert!((tm[0] - 0.5).abs() < 1e-12);
        let fib = letter_frequencies_pf(&SubstitutionRule::builtin("fibonacci").unwrap()).unwrap();
        assert!((fib[0] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((fib[1] - 0.381966).abs() < 1e-6);
        let pd = letter_frequencies_pf(&SubstitutionRule::builtin("period-doubling").unwrap()).unwrap();
        assert!((pd[0] - 2.0 / 3.0).abs() < 1e-12);
        let reducible = SubstitutionRule::parse("a -> ab\nb -> b").unwrap();
        assert_eq!(letter_frequencies_pf(&reducible), Err(Error::NotPrimitive));
    }

    #[test]
    fn empirical_frequencies() {
        let (rule, tm) = window("thue-morse", 1 << 16);
        let (f, _) = word_frequency_empirical(&tm, &[0]).unwrap();
        assert!((f - 0.5).abs() < 1e-3);
        let (f, _) = word_frequency_empirical(&tm, &rule.word_from_str("aaa").unwrap()).unwrap();
        assert_eq!(f, 0.0);

        let (rule, fib) = window("fibonacci", 1 << 16);
        let (f, err) = word_frequency_empirical(&fib, &rule.word_from_str("ab").unwrap()).unwrap();
        assert!((f - 0.381966).abs() < 1e-3);
        assert!(err > 0.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            SubstitutionRule::parse("a -> ac\nb -> a"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(SubstitutionRule::parse("ab -> a"), Err(Error::Parse { .. })));
        assert!(matches!(
            SubstitutionRule::builtin("nope"),
            Err(Error::UnknownRule { .. })
        ));
    }

    #[test]
    fn table_extension_consistency() {
        let (_, fib) = window("fibonacci", 1 << 12);
        let table = WordFrequencyTable::from_window(&fib, 4).unwrap();
        for len in 1..=4 {
            let total: f64 = table
                .entries
                .iter()
                .filter(|(w, _)| w.len() == len)
                .map(|(_, f)| f)
                .sum();
            assert!((total - 1.0).abs() <= table.error_bound);
        }
        for (w, &f) in table.entries.iter().filter(|(w, _)| w.len() < 4) {
            let ext: f64 = (0..2u8)
                .map(|a| {
                    let mut wa = w.clone();
                    wa.push(a);
                    table.get(&wa)
                })
                .sum();
            assert!((f - ext).abs() <= table.error_bound);
        }
    }
}
