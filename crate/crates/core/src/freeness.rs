//! Freeness predicates and backtracking enumeration of power-free words.
//!
//! A [`FreenessSpec`] covers α-free (forbid exponent ≥ α), α⁺-free (forbid
//! exponent > α) and (β⁺, n)-free (forbid exponent > β among periods ≥ n).
//!
//! The incremental test only looks at repetitions ending at the new letter:
//! if `w` satisfies the spec, any violation in `wa` must be a suffix. For a
//! period `p` the shortest violating length is `min_violating_len(p)`, so
//! periods stop once that exceeds `|wa|`, i.e. around `|wa| / threshold`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dfs::{self, DfsOptions, Explorer, Halt, Step};
use crate::rational::{Rational, RationalError};
use crate::words::{Letter, Repetition, Word, MAX_ALPHABET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("threshold {0} must exceed 1")]
    ThresholdTooSmall(Rational),
    #[error("minimum period must be at least 1")]
    ZeroMinPeriod,
    #[error("bad threshold: {0}")]
    Threshold(#[from] RationalError),
    #[error("bad minimum period {0:?}")]
    MinPeriod(String),
}

/// Which repetitions a word must avoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreenessSpec {
    threshold: Rational,
    strict: bool,
    min_period: usize,
}

impl FreenessSpec {
    pub fn new(threshold: Rational, strict: bool, min_period: usize) -> Result<Self, SpecError> {
        if threshold <= Rational::ONE {
            return Err(SpecError::ThresholdTooSmall(threshold));
        }
        if min_period == 0 {
            return Err(SpecError::ZeroMinPeriod);
        }
        Ok(FreenessSpec {
            threshold,
            strict,
            min_period,
        })
    }

    /// α-free: no exponent ≥ α.
    pub fn free(threshold: Rational) -> Self {
        Self::new(threshold, false, 1).expect("threshold must exceed 1")
    }

    /// α⁺-free: no exponent > α.
    pub fn plus(threshold: Rational) -> Self {
        Self::new(threshold, true, 1).expect("threshold must exceed 1")
    }

    /// (β⁺, n)-free: no exponent > β among periods ≥ n.
    pub fn plus_from(threshold: Rational, min_period: usize) -> Self {
        Self::new(threshold, true, min_period).expect("invalid (β⁺, n) spec")
    }

    pub fn square_free() -> Self {
        Self::free(Rational::from_integer(2))
    }

    pub fn threshold(&self) -> Rational {
        self.threshold
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn min_period(&self) -> usize {
        self.min_period
    }

    /// Does a repetition of this length and period break the spec?
    pub fn violates(&self, len: usize, period: usize) -> bool {
        if period < self.min_period {
            return false;
        }
        let ord = self.threshold.cmp_lengths(len, period);
        if self.strict {
            ord.is_gt()
        } else {
            ord.is_ge()
        }
    }

    /// Shortest length at which a repetition of period `p` violates the spec.
    pub fn min_violating_len(&self, p: usize) -> usize {
        let n = self.threshold.numer() as u128;
        let d = self.threshold.denom() as u128;
        let np = n * p as u128;
        let len = if self.strict {
            np / d + 1
        } else {
            np.div_ceil(d)
        };
        len as usize
    }
}

impl fmt::Display for FreenessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.threshold.is_integer() {
            write!(f, "{}", self.threshold.numer())?;
        } else {
            write!(f, "{}", self.threshold)?;
        }
        if self.strict {
            f.write_str("+")?;
        }
        if self.min_period > 1 {
            write!(f, "@{}", self.min_period)?;
        }
        Ok(())
    }
}

impl FromStr for FreenessSpec {
    type Err = SpecError;

    /// `"7/4+"`, `"2"`, `"202/135+@36"`: threshold, optional `+` for strict, optional `@n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (body, min_period) = match s.split_once('@') {
            Some((b, n)) => {
                let n = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| SpecError::MinPeriod(n.to_string()))?;
                (b.trim(), n)
            }
            None => (s, 1),
        };
        let (body, strict) = match body.strip_suffix('+') {
            Some(b) => (b, true),
            None => (body, false),
        };
        FreenessSpec::new(body.parse()?, strict, min_period)
    }
}

impl Serialize for FreenessSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FreenessSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A violating repetition that ends at the last letter of `w`, if any.
///
/// Periods are tried in increasing order; the witness is the longest suffix
/// with that period.
pub fn suffix_violation(w: &[Letter], spec: &FreenessSpec) -> Option<Repetition> {
    let n = w.len();
    if n == 0 {
        return None;
    }
    let last = n - 1;
    let mut p = spec.min_period;
    loop {
        let need = spec.min_violating_len(p);
        if need > n {
            return None;
        }
        // the suffix of length `need` has period p iff its last need-p letters repeat
        let matched = (0..need - p).all(|x| w[last - x] == w[last - x - p]);
        if matched {
            let mut len = need;
            while len < n && w[n - 1 - len] == w[n - 1 - len + p] {
                len += 1;
            }
            return Some(Repetition::new(n - len, p, len));
        }
        p += 1;
    }
}

/// Whether `w·a` still satisfies `spec`, assuming `w` does.
pub fn extend_is_free(w: &[Letter], a: Letter, spec: &FreenessSpec) -> bool {
    let mut x = Vec::with_capacity(w.len() + 1);
    x.extend_from_slice(w);
    x.push(a);
    suffix_violation(&x, spec).is_none()
}

/// The violation ending earliest in `w` (smallest period at that end), if any.
pub fn find_violation(w: &[Letter], spec: &FreenessSpec) -> Option<Repetition> {
    (1..=w.len()).find_map(|end| suffix_violation(&w[..end], spec))
}

/// Full scan, independent of [`suffix_violation`]: for every period `p` the
/// maximal runs of `w[i] = w[i + p]` are exactly the maximal repetitions of
/// period `p`, and the exponent only grows with the run.
pub fn is_free(w: &[Letter], spec: &FreenessSpec) -> bool {
    let n = w.len();
    (spec.min_period()..n).all(|p| {
        let mut run = 0;
        w.iter().zip(&w[p..]).all(|(a, b)| {
            run = if a == b { run + 1 } else { 0 };
            run == 0 || !spec.violates(run + p, p)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationMode {
    /// Per-length survivor counts.
    Count,
    /// Every survivor of the maximal length, in lexicographic order.
    List,
    /// The lexicographically least survivor of the maximal length.
    First,
}

impl FromStr for EnumerationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(EnumerationMode::Count),
            "list" => Ok(EnumerationMode::List),
            "first" => Ok(EnumerationMode::First),
            other => Err(format!("unknown mode {other:?}, expected count|list|first")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub alphabet: u8,
    pub spec: FreenessSpec,
    /// `counts[l]` = number of surviving words of length `l`, from `l = 0`;
    /// stops after the first zero. Partial in `first` mode.
    pub counts: Vec<u64>,
    pub max_length_reached: usize,
    pub exhausted: bool,
    /// False when the search stopped early (`first` mode), so counts are lower bounds.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub report: EnumerationReport,
    pub words: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("alphabet size {0} not in 2..={MAX_ALPHABET}")]
    BadAlphabet(u8),
}

struct FreeWords {
    k: u8,
    spec: FreenessSpec,
}

impl Explorer for FreeWords {
    type State = ();
    type Halt = std::convert::Infallible;

    fn alphabet(&self) -> u8 {
        self.k
    }

    fn step(&self, word: &[Letter], _: &()) -> Step<(), Self::Halt> {
        if suffix_violation(word, &self.spec).is_some() {
            Step::Prune
        } else {
            Step::Descend(())
        }
    }
}

/// Depth-first enumeration of `spec`-free words over `k` letters up to `max_len`.
pub fn enumerate_free(
    k: u8,
    spec: FreenessSpec,
    max_len: usize,
    mode: EnumerationMode,
) -> Result<Enumeration, EnumerationError> {
    if !(2..=MAX_ALPHABET).contains(&k) {
        return Err(EnumerationError::BadAlphabet(k));
    }
    let explorer = FreeWords { k, spec };
    let mut opts = match mode {
        EnumerationMode::First => DfsOptions::first_at(max_len),
        _ => DfsOptions::exhaust(max_len),
    };
    opts.collect_leaves = mode == EnumerationMode::List;
    let out = dfs::explore(&explorer, (), opts);
    let counts = out.counts;
    let words: Vec<Word> = match (mode, out.halt) {
        (EnumerationMode::First, Some(Halt::Reached(w))) => vec![to_word(w, k)],
        (EnumerationMode::List, _) => out.leaves.into_iter().map(|w| to_word(w, k)).collect(),
        _ => Vec::new(),
    };
    let complete = mode != EnumerationMode::First || words.is_empty();
    Ok(Enumeration {
        report: report_from_counts(k, spec, counts, complete),
        words,
    })
}

fn to_word(letters: Vec<Letter>, k: u8) -> Word {
    Word::new(letters, k).expect("search only produces letters below k")
}

fn report_from_counts(
    k: u8,
    spec: FreenessSpec,
    mut counts: Vec<u64>,
    complete: bool,
) -> EnumerationReport {
    if let Some(zero) = counts.iter().position(|&c| c == 0) {
        counts.truncate(zero + 1);
    }
    let exhausted = counts.last() == Some(&0);
    let max_length_reached = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    EnumerationReport {
        alphabet: k,
        spec,
        counts,
        max_length_reached,
        exhausted,
        complete,
    }
}

/// Breadth-first level counts using the full-scan test; the oracle for [`enumerate_free`].
pub fn enumerate_free_bfs(k: u8, spec: FreenessSpec, max_len: usize) -> EnumerationReport {
    let counts = dfs::bfs_counts(k, max_len, |w| is_free(w, &spec));
    report_from_counts(k, spec, counts, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::letters_to_string;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn spec(s: &str) -> FreenessSpec {
        s.parse().unwrap()
    }

    #[test]
    fn spec_parsing() {
        let s = spec("202/135+@36");
        assert_eq!(s.threshold(), Rational::new(202, 135));
        assert!(s.strict());
        assert_eq!(s.min_period(), 36);
        assert_eq!(s.to_string(), "202/135+@36");
        assert_eq!(spec("2"), FreenessSpec::square_free());
        assert_eq!(spec("7/4+").to_string(), "7/4+");
        assert!("1".parse::<FreenessSpec>().is_err());
        assert!("3/2+@0".parse::<FreenessSpec>().is_err());
        assert!("3/2+@x".parse::<FreenessSpec>().is_err());
        assert!("abc".parse::<FreenessSpec>().is_err());
    }

    #[test]
    fn min_violating_len_boundaries() {
        let s = spec("7/4+");
        assert_eq!(s.min_violating_len(4), 8);
        assert!(!s.violates(7, 4));
        assert!(s.violates(8, 4));
        let s = spec("7/4");
        assert_eq!(s.min_violating_len(4), 7);
        assert_eq!(FreenessSpec::square_free().min_violating_len(3), 6);
    }

    #[test]
    fn is_free_examples() {
        let v = find_violation(&w("010102"), &FreenessSpec::square_free()).unwrap();
        assert_eq!(v.factor(&w("010102")), &w("0101")[..]);
        assert_eq!(v.period, 2);
        assert!(is_free(&w("0102010"), &spec("7/4+")));
        assert!(is_free(&w("0101"), &spec("3/2+@3")));
        assert!(!is_free(&w("0101"), &spec("3/2+@2")));
    }

    #[test]
    fn extend_examples() {
        let sq = FreenessSpec::square_free();
        assert!(extend_is_free(&w("01"), 0, &sq));
        assert!(!extend_is_free(&w("010"), 1, &sq));
        assert!(extend_is_free(&w("0102"), 0, &spec("7/4+")));
        assert!(is_free(&w("01020"), &spec("7/4+")));
    }

    #[test]
    fn enumeration_examples() {
        let r = enumerate_free(3, FreenessSpec::square_free(), 3, EnumerationMode::Count).unwrap();
        assert_eq!(r.report.counts, vec![1, 3, 6, 12]);
        let r = enumerate_free(2, FreenessSpec::square_free(), 4, EnumerationMode::Count).unwrap();
        assert_eq!(r.report.counts, vec![1, 2, 2, 2, 0]);
        assert!(r.report.exhausted);
        assert_eq!(r.report.max_length_reached, 3);
        let r = enumerate_free(4, spec("7/5+"), 2, EnumerationMode::Count).unwrap();
        assert_eq!(r.report.counts[2], 12);
        assert!(enumerate_free(5, spec("2"), 2, EnumerationMode::Count).is_err());
    }

    #[test]
    fn first_and_list_modes() {
        let r = enumerate_free(3, FreenessSpec::square_free(), 5, EnumerationMode::First).unwrap();
        assert_eq!(r.words, vec![w("01020")]);
        let r = enumerate_free(3, FreenessSpec::square_free(), 3, EnumerationMode::List).unwrap();
        assert_eq!(r.words.len(), 12);
        assert_eq!(r.words[0].to_string(), "010");
        let r = enumerate_free(2, FreenessSpec::square_free(), 6, EnumerationMode::First).unwrap();
        assert!(r.words.is_empty());
        assert!(r.report.exhausted);
    }

    fn grow(w: &mut Vec<Letter>, max_len: usize, spec: &FreenessSpec, checked: &mut u64) {
        if w.len() == max_len {
            return;
        }
        for a in 0..3 {
            let incremental = extend_is_free(w, a, spec);
            w.push(a);
            assert_eq!(
                incremental,
                is_free(w, spec),
                "{} under {spec}",
                letters_to_string(w)
            );
            *checked += 1;
            if incremental {
                grow(w, max_len, spec, checked);
            }
            w.pop();
        }
    }

    #[test]
    fn incremental_agrees_with_full_scan() {
        for s in ["2", "7/4+", "3/2+@3"] {
            let mut checked = 0;
            grow(&mut Vec::new(), 12, &spec(s), &mut checked);
            assert!(checked > 100, "{s}");
        }
    }

    #[test]
    fn witness_search_agrees_with_full_scan() {
        for s in ["2", "7/4+", "3/2+@3", "5/2+@2"] {
            for n in 0..=9u32 {
                for code in 0..3u32.pow(n) {
                    let x: Vec<Letter> =
                        (0..n).map(|p| (code / 3u32.pow(p) % 3) as Letter).collect();
                    assert_eq!(
                        find_violation(&x, &spec(s)).is_none(),
                        is_free(&x, &spec(s))
                    );
                }
            }
        }
    }

    #[test]
    fn dfs_matches_bfs_oracle() {
        for (k, s, n) in [
            (3, "2", 14),
            (3, "7/4+", 14),
            (2, "5/2+", 16),
            (4, "7/5+", 10),
            (3, "3/2+@3", 12),
        ] {
            let dfs = enumerate_free(k, spec(s), n, EnumerationMode::Count)
                .unwrap()
                .report;
            let bfs = enumerate_free_bfs(k, spec(s), n);
            assert_eq!(dfs, bfs, "k={k} spec={s}");
        }
    }
}
