//! Letters, words, periods, exponents and conjugacy classes.
//!
//! A repetition is a factor `pe` of a word where `p` is non-empty and `e` is a
//! prefix of `pe`; its period is `|p|` and its exponent `|pe|/|p|`. Everything
//! here is quadratic or worse in the word length, which is fine for the
//! lengths the verification pipelines feed in.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

pub type Letter = u8;

/// Largest supported alphabet; words serialize as digit strings over `0..=3`.
pub const MAX_ALPHABET: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("alphabet size {0} outside 1..={MAX_ALPHABET}")]
    BadAlphabet(u8),
    #[error("letter {letter} at position {index} is not below alphabet size {alphabet}")]
    LetterOutOfRange {
        index: usize,
        letter: Letter,
        alphabet: u8,
    },
    #[error("invalid character {0:?} in word, expected a digit")]
    BadChar(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("exponent of the empty word is undefined")]
    EmptyWord,
    #[error("period {period} outside 1..={len}")]
    PeriodOutOfRange { period: usize, len: usize },
    #[error("{period} is not a period of the word")]
    NotAPeriod { period: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConjClassError {
    #[error("conjugacy classes of the empty word are not tracked")]
    Empty,
    #[error("{0} is a proper power; reduce it to its primitive root first")]
    NotPrimitive(String),
    #[error("conjugacy classes need n >= 1 and an alphabet of 2..={MAX_ALPHABET} letters (got n={n}, k={k})")]
    BadParameters { n: usize, k: u8 },
}

/// A finite word over `{0, .., alphabet-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
    alphabet: u8,
}

impl Word {
    pub fn new(letters: Vec<Letter>, alphabet: u8) -> Result<Self, WordError> {
        if alphabet == 0 || alphabet > MAX_ALPHABET {
            return Err(WordError::BadAlphabet(alphabet));
        }
        if let Some((index, &letter)) = letters.iter().enumerate().find(|(_, &l)| l >= alphabet) {
            return Err(WordError::LetterOutOfRange {
                index,
                letter,
                alphabet,
            });
        }
        Ok(Word { letters, alphabet })
    }

    pub fn empty(alphabet: u8) -> Self {
        Word {
            letters: Vec::new(),
            alphabet,
        }
    }

    /// Parses a digit string, checking letters against `alphabet`.
    pub fn parse(s: &str, alphabet: u8) -> Result<Self, WordError> {
        Self::new(parse_digits(s)?, alphabet)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            letters,
            alphabet: self.alphabet.max(other.alphabet),
        }
    }

    /// The conjugate obtained by moving the first `r` letters to the end.
    pub fn rotation(&self, r: usize) -> Word {
        let n = self.letters.len();
        if n == 0 {
            return self.clone();
        }
        let r = r % n;
        let mut letters = self.letters[r..].to_vec();
        letters.extend_from_slice(&self.letters[..r]);
        Word {
            letters,
            alphabet: self.alphabet,
        }
    }
}

impl Deref for Word {
    type Target = [Letter];

    fn deref(&self) -> &[Letter] {
        &self.letters
    }
}

impl AsRef<[Letter]> for Word {
    fn as_ref(&self) -> &[Letter] {
        &self.letters
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Parses a digit string; the alphabet is the smallest `k >= 2` covering its letters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = parse_digits(s)?;
        let alphabet = letters.iter().copied().max().map_or(2, |m| (m + 1).max(2));
        Self::new(letters, alphabet)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&letters_to_string(&self.letters))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Word({:?}/{})",
            letters_to_string(&self.letters),
            self.alphabet
        )
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_digits(s: &str) -> Result<Vec<Letter>, WordError> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            c.to_digit(10)
                .filter(|&d| d < u32::from(MAX_ALPHABET))
                .map(|d| d as Letter)
                .ok_or(WordError::BadChar(c))
        })
        .collect()
}

pub fn letters_to_string(letters: &[Letter]) -> String {
    letters.iter().map(|&l| char::from(b'0' + l)).collect()
}

/// A repetition occurring in some word: `length` letters from `start`, with the given period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repetition {
    pub start: usize,
    pub period: usize,
    pub length: usize,
    pub exponent: Rational,
}

impl Repetition {
    pub fn new(start: usize, period: usize, length: usize) -> Self {
        Repetition {
            start,
            period,
            length,
            exponent: Rational::from_lengths(length, period),
        }
    }

    pub fn factor<'a>(&self, w: &'a [Letter]) -> &'a [Letter] {
        &w[self.start..self.start + self.length]
    }
}

/// Border (failure-function) table: `border[l]` is the longest proper border of `w[..l]`.
pub fn border_table(w: &[Letter]) -> Vec<usize> {
    let mut border = vec![0usize; w.len() + 1];
    extend_border_table(w, &mut border, 1);
    border
}

/// Continues a border table whose entries for prefixes shorter than `from` are valid.
///
/// Lets callers reuse the table of a shared prefix across many continuations.
pub(crate) fn extend_border_table(w: &[Letter], border: &mut [usize], from: usize) {
    if from <= 1 && !w.is_empty() {
        border[1] = 0;
    }
    for len in from.max(2)..=w.len() {
        let c = w[len - 1];
        let mut b = border[len - 1];
        while b > 0 && w[b] != c {
            b = border[b];
        }
        border[len] = if w[b] == c { b + 1 } else { 0 };
    }
}

/// Smallest period of `w[..l]` for every `l` in `1..=|w|` (index 0 unused).
pub fn prefix_periods(w: &[Letter]) -> Vec<usize> {
    let border = border_table(w);
    (0..=w.len()).map(|l| l - border[l]).collect()
}

pub fn is_period(w: &[Letter], p: usize) -> bool {
    p >= 1 && p <= w.len() && (p..w.len()).all(|i| w[i] == w[i - p])
}

/// Every period of `w` in increasing order, read off the border chain.
pub fn all_periods(w: &[Letter]) -> Vec<usize> {
    if w.is_empty() {
        return Vec::new();
    }
    let border = border_table(w);
    let n = w.len();
    let mut periods = Vec::new();
    let mut b = border[n];
    loop {
        periods.push(n - b);
        if b == 0 {
            break;
        }
        b = border[b];
    }
    periods
}

pub fn smallest_period(w: &[Letter]) -> Option<usize> {
    (!w.is_empty()).then(|| w.len() - border_table(w)[w.len()])
}

/// `|w| / p`, provided `p` really is a period of `w`.
pub fn exponent_of(w: &[Letter], p: usize) -> Result<Rational, ExponentError> {
    if w.is_empty() {
        return Err(ExponentError::EmptyWord);
    }
    if p == 0 || p > w.len() {
        return Err(ExponentError::PeriodOutOfRange {
            period: p,
            len: w.len(),
        });
    }
    if !is_period(w, p) {
        return Err(ExponentError::NotAPeriod { period: p });
    }
    Ok(Rational::from_lengths(w.len(), p))
}

/// Exponent of `w` read as one full repetition: `|w|` over its smallest period.
pub fn full_exponent(w: &[Letter]) -> Result<Rational, ExponentError> {
    let p = smallest_period(w).ok_or(ExponentError::EmptyWord)?;
    Ok(Rational::from_lengths(w.len(), p))
}

/// Largest exponent of a factor of `w`, with a witness.
///
/// Witness ties are broken by smallest period, then earliest start.
pub fn critical_exponent(w: &[Letter]) -> Result<(Rational, Repetition), ExponentError> {
    if w.is_empty() {
        return Err(ExponentError::EmptyWord);
    }
    let n = w.len();
    let mut border = vec![0usize; n + 1];
    let mut best = Repetition::new(0, 1, 1);
    for start in 0..n {
        let suffix = &w[start..];
        extend_border_table(suffix, &mut border[..=suffix.len()], 1);
        for (len, &bord) in border[..=suffix.len()].iter().enumerate().skip(1) {
            let period = len - bord;
            let ord = Rational::from_lengths(len, period).cmp(&best.exponent);
            if ord.is_gt() || (ord.is_eq() && period < best.period) {
                best = Repetition::new(start, period, len);
            }
        }
    }
    Ok((best.exponent, best))
}

/// Largest exponent of `sp` over factors `pxs` of `w` with `p` non-empty.
///
/// `sp` is measured as a full repetition (length over smallest period). With
/// `s` empty this covers every factor, so the result is never below
/// [`critical_exponent`].
pub fn circular_exponent(w: &[Letter]) -> Result<Rational, ExponentError> {
    if w.is_empty() {
        return Err(ExponentError::EmptyWord);
    }
    let n = w.len();
    let mut buf: Vec<Letter> = Vec::with_capacity(2 * n);
    let mut border = vec![0usize; 2 * n + 1];
    // best as (len, period) to skip fraction construction in the inner loop
    let (mut best_len, mut best_per) = (1usize, 1usize);
    // s = w[b..c], p is a non-empty prefix of w[i..b] for some i < b
    for b in 1..=n {
        for c in b..=n {
            let s_len = c - b;
            buf.clear();
            buf.extend_from_slice(&w[b..c]);
            extend_border_table(&buf, &mut border[..=s_len], 1);
            for i in 0..b {
                buf.truncate(s_len);
                buf.extend_from_slice(&w[i..b]);
                extend_border_table(&buf, &mut border[..=buf.len()], s_len + 1);
                for (len, &bord) in border[..=buf.len()].iter().enumerate().skip(s_len + 1) {
                    let per = len - bord;
                    if len * best_per > best_len * per {
                        best_len = len;
                        best_per = per;
                    }
                }
            }
        }
    }
    Ok(Rational::from_lengths(best_len, best_per))
}

/// Index of the lexicographically least rotation.
pub fn least_rotation_index(w: &[Letter]) -> usize {
    let n = w.len();
    let mut best = 0;
    for r in 1..n {
        for j in 0..n {
            let a = w[(r + j) % n];
            let b = w[(best + j) % n];
            if a != b {
                if a < b {
                    best = r;
                }
                break;
            }
        }
    }
    best
}

pub fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    let r = least_rotation_index(w);
    let mut out = w[r..].to_vec();
    out.extend_from_slice(&w[..r]);
    out
}

/// True iff `w` is not a proper integer power of a shorter word.
pub fn is_primitive(w: &[Letter]) -> bool {
    match smallest_period(w) {
        None => false,
        Some(p) => p == w.len() || !w.len().is_multiple_of(p),
    }
}

/// A conjugacy class of primitive words, represented by its least rotation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjClass {
    representative: Word,
}

impl ConjClass {
    /// The class of `w`; rejects proper powers instead of reducing them.
    pub fn new(w: &Word) -> Result<Self, ConjClassError> {
        if w.is_empty() {
            return Err(ConjClassError::Empty);
        }
        if !is_primitive(w) {
            return Err(ConjClassError::NotPrimitive(w.to_string()));
        }
        let representative = Word {
            letters: least_rotation(w),
            alphabet: w.alphabet(),
        };
        Ok(ConjClass { representative })
    }

    pub(crate) fn from_canonical(letters: Vec<Letter>, alphabet: u8) -> Self {
        debug_assert!(is_primitive(&letters) && least_rotation_index(&letters) == 0);
        ConjClass {
            representative: Word { letters, alphabet },
        }
    }

    pub fn representative(&self) -> &Word {
        &self.representative
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.representative, f)
    }
}

impl fmt::Debug for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConjClass({})", self.representative)
    }
}

impl Serialize for ConjClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// All conjugacy classes of primitive words of length `n` over `k` letters, in
/// lexicographic order of their least rotations (Lyndon words, generated by
/// the Fredricksen–Kessler–Maiorana algorithm).
pub fn conjugacy_classes(n: usize, k: u8) -> Result<Vec<ConjClass>, ConjClassError> {
    if n == 0 || !(2..=MAX_ALPHABET).contains(&k) {
        return Err(ConjClassError::BadParameters { n, k });
    }
    let mut classes = Vec::new();
    let mut a = vec![0 as Letter; n + 1];
    let mut t = 1usize;
    // a[1..=n] walks the pre-necklaces in lexicographic order; t is the period
    // of the current one, and it is a Lyndon word exactly when t == n.
    loop {
        if t == n {
            classes.push(ConjClass::from_canonical(a[1..=n].to_vec(), k));
        }
        let mut i = n;
        while i > 0 && a[i] == k - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        a[i] += 1;
        for j in i + 1..=n {
            a[j] = a[j - i];
        }
        t = i;
    }
    Ok(classes)
}
