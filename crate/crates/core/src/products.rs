//! Factor languages of morphic images and exponents of products of factors.
//!
//! For a primitive word `t`, `pexp_{i,t}` is the length of the longest factor
//! of `t^ω` that splits into `i` factors of the language, divided by `|t|`.
//! Writing `M(φ)` for the longest indexed factor of `t^ω` starting at phase
//! `φ`, the greedy cover `x ↦ x + M(x mod |t|)` is optimal: the language is
//! factorial, so `x + M(x)` is non-decreasing in `x` and a longer first step
//! never hurts later ones. Empty factors are allowed, which makes `pexp_{i,t}`
//! non-decreasing in `i`.
//!
//! [`verify_upper`] combines these values into certificates that bound
//! `pexp_i` for every `i` of one parity.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::freeness::{enumerate_free, EnumerationError, EnumerationMode, FreenessSpec};
use crate::morphism::{verify_images_free, ImageCheckReport, MorphismError, UniformMorphism};
use crate::rational::Rational;
use crate::words::{
    conjugacy_classes, is_primitive, least_rotation, ConjClass, Letter, Word, MAX_ALPHABET,
};

#[derive(Debug, Error)]
pub enum ProductError {
    #[error("a factor of length {cap} matched; the index is only complete up to length {cap}")]
    CapReached { cap: usize },
    #[error("index length cap must be positive")]
    ZeroCap,
    #[error("j_max must be at least 4, got {0}")]
    JMaxTooSmall(usize),
    #[error("empty word has no product exponents")]
    EmptyWord,
    #[error("no certificate for class {class}: pexp profile {profile:?}")]
    NoCertificate {
        class: ConjClass,
        profile: Vec<Rational>,
    },
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

const NONE: u32 = u32::MAX;
const SIGMA: usize = MAX_ALPHABET as usize;

/// Generalized suffix automaton: recognizes exactly the factors of a set of texts.
#[derive(Debug, Clone)]
struct SuffixAutomaton {
    next: Vec<[u32; SIGMA]>,
    link: Vec<u32>,
    len: Vec<u32>,
}

impl SuffixAutomaton {
    fn new() -> Self {
        SuffixAutomaton {
            next: vec![[NONE; SIGMA]],
            link: vec![NONE],
            len: vec![0],
        }
    }

    fn push(&mut self, len: u32, link: u32, next: [u32; SIGMA]) -> u32 {
        self.next.push(next);
        self.link.push(link);
        self.len.push(len);
        (self.len.len() - 1) as u32
    }

    fn add_text(&mut self, text: &[Letter]) {
        let mut last = 0;
        for &c in text {
            last = self.extend(last, c as usize);
        }
    }

    fn extend(&mut self, last: u32, c: usize) -> u32 {
        let q = self.next[last as usize][c];
        if q != NONE {
            // the text continues along an existing path
            if self.len[last as usize] + 1 == self.len[q as usize] {
                return q;
            }
            return self.split(last, q, c);
        }
        let cur = self.push(self.len[last as usize] + 1, 0, [NONE; SIGMA]);
        let mut p = last;
        while p != NONE && self.next[p as usize][c] == NONE {
            self.next[p as usize][c] = cur;
            p = self.link[p as usize];
        }
        if p != NONE {
            let q = self.next[p as usize][c];
            self.link[cur as usize] = if self.len[p as usize] + 1 == self.len[q as usize] {
                q
            } else {
                self.split(p, q, c)
            };
        }
        cur
    }

    /// Clones `q` so that the clone is reached from `p` by `c` with length `len(p) + 1`.
    fn split(&mut self, p: u32, q: u32, c: usize) -> u32 {
        let clone = self.push(
            self.len[p as usize] + 1,
            self.link[q as usize],
            self.next[q as usize],
        );
        self.link[q as usize] = clone;
        let mut p = p;
        while p != NONE && self.next[p as usize][c] == q {
            self.next[p as usize][c] = clone;
            p = self.link[p as usize];
        }
        clone
    }

    #[inline]
    fn step(&self, state: u32, c: Letter) -> Option<u32> {
        let s = self.next[state as usize][c as usize];
        (s != NONE).then_some(s)
    }
}

/// The factors of a language up to a completeness length.
#[derive(Debug, Clone)]
pub struct FactorIndex {
    sam: SuffixAutomaton,
    alphabet: u8,
    cap: Option<usize>,
    source_word_len: usize,
}

impl FactorIndex {
    /// Index of all factors of the given finite words; exact at every length.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a [Letter]>, alphabet: u8) -> Self {
        let mut sam = SuffixAutomaton::new();
        for w in words {
            sam.add_text(w);
        }
        FactorIndex {
            sam,
            alphabet,
            cap: None,
            source_word_len: 0,
        }
    }

    /// Length up to which the index is known complete; `None` when exact.
    pub fn max_factor_len(&self) -> Option<usize> {
        self.cap
    }

    /// Length of the source words whose images were indexed (0 if built directly).
    pub fn source_word_len(&self) -> usize {
        self.source_word_len
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.sam.len.len()
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        let mut s = 0;
        for &c in w {
            if c as usize >= SIGMA {
                return false;
            }
            match self.sam.step(s, c) {
                Some(n) => s = n,
                None => return false,
            }
        }
        true
    }

    /// Number of distinct indexed factors of each length `0..=max_len`.
    pub fn counts_per_length(&self, max_len: usize) -> Vec<u64> {
        let mut diff = vec![0i64; max_len + 2];
        for v in 1..self.sam.len.len() {
            let lo = self.sam.len[self.sam.link[v] as usize] as usize + 1;
            let hi = (self.sam.len[v] as usize).min(max_len);
            if lo <= hi {
                diff[lo] += 1;
                diff[hi + 1] -= 1;
            }
        }
        let mut counts = vec![1u64; max_len + 1];
        let mut run = 0i64;
        for (l, c) in counts.iter_mut().enumerate().skip(1) {
            run += diff[l];
            *c = run as u64;
        }
        counts
    }

    /// All indexed factors of length `n`, in lexicographic order.
    pub fn factors_of_length(&self, n: usize) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(n);
        self.collect_factors(0, n, &mut word, &mut out);
        out
    }

    fn collect_factors(
        &self,
        state: u32,
        n: usize,
        word: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if word.len() == n {
            out.push(word.clone());
            return;
        }
        for c in 0..self.alphabet {
            if let Some(s) = self.sam.step(state, c) {
                word.push(c);
                self.collect_factors(s, n, word, out);
                word.pop();
            }
        }
    }

    /// Conjugacy classes of length `n` with at least one member in the index.
    pub fn occurring_classes(&self, n: usize) -> Vec<ConjClass> {
        let reps: BTreeSet<Vec<Letter>> = self
            .factors_of_length(n)
            .into_iter()
            .filter(|f| is_primitive(f))
            .map(|f| least_rotation(&f))
            .collect();
        let alphabet = self.alphabet.max(2);
        reps.into_iter()
            .map(|r| ConjClass::from_canonical(r, alphabet))
            .collect()
    }

    /// Length of the longest indexed factor of `t^ω` starting at `phase`.
    pub fn longest_match(&self, t: &[Letter], phase: usize) -> Result<usize, ProductError> {
        if t.is_empty() {
            return Err(ProductError::EmptyWord);
        }
        let q = t.len();
        let mut s = 0;
        let mut len = 0;
        let mut pos = phase % q;
        loop {
            if let Some(cap) = self.cap {
                if len >= cap {
                    return Err(ProductError::CapReached { cap });
                }
            }
            match self.sam.step(s, t[pos]) {
                Some(n) => {
                    s = n;
                    len += 1;
                    pos = if pos + 1 == q { 0 } else { pos + 1 };
                }
                None => return Ok(len),
            }
        }
    }

    fn phase_matches(&self, t: &[Letter]) -> Result<Vec<usize>, ProductError> {
        (0..t.len())
            .map(|phase| self.longest_match(t, phase))
            .collect()
    }
}

/// Indexes every factor of length at most `cap` of the images of `src_spec`-free
/// words, by indexing the images of all legal source words of length
/// `ceil(cap / k) + 1`; a factor of length `cap` meets at most that many blocks.
pub fn build_factor_index(
    m: &UniformMorphism,
    src_spec: FreenessSpec,
    cap: usize,
) -> Result<FactorIndex, ProductError> {
    if cap == 0 {
        return Err(ProductError::ZeroCap);
    }
    let source_word_len = cap.div_ceil(m.image_len()) + 1;
    let sources = enumerate_free(
        m.arity() as u8,
        src_spec,
        source_word_len,
        EnumerationMode::List,
    )?;
    let mut sam = SuffixAutomaton::new();
    let mut image = Vec::with_capacity(source_word_len * m.image_len());
    for w in &sources.words {
        image.clear();
        m.apply_unchecked(w, &mut image);
        sam.add_text(&image);
    }
    Ok(FactorIndex {
        sam,
        alphabet: m.target_alphabet(),
        cap: Some(cap),
        source_word_len,
    })
}

/// Greedy cover lengths: `out[i - 1]` is the best total over phases for `i` steps.
fn greedy_cover(matches: &[usize], i_max: usize) -> Vec<usize> {
    let q = matches.len();
    let mut pos: Vec<usize> = (0..q).collect();
    let mut out = Vec::with_capacity(i_max);
    for _ in 0..i_max {
        for p in pos.iter_mut() {
            *p += matches[*p % q];
        }
        out.push(
            pos.iter()
                .enumerate()
                .map(|(phase, &x)| x - phase)
                .max()
                .unwrap_or(0),
        );
    }
    out
}

/// `[pexp_{1,t}, …, pexp_{i_max,t}]`.
pub fn pexp_profile(
    idx: &FactorIndex,
    t: &[Letter],
    i_max: usize,
) -> Result<Vec<Rational>, ProductError> {
    let matches = idx.phase_matches(t)?;
    Ok(greedy_cover(&matches, i_max)
        .into_iter()
        .map(|len| Rational::from_lengths(len, t.len()))
        .collect())
}

/// `pexp_{i,t}`: longest `i`-term product of indexed factors inside `t^ω`, over `|t|`.
pub fn pexp_it(idx: &FactorIndex, t: &[Letter], i: usize) -> Result<Rational, ProductError> {
    if i == 0 {
        return Ok(Rational::ZERO);
    }
    Ok(pexp_profile(idx, t, i)?[i - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Smallest product length the bound is claimed for: 2 for even, 3 for odd.
    pub fn first_index(self) -> usize {
        match self {
            Parity::Even => 2,
            Parity::Odd => 3,
        }
    }

    pub fn of(i: usize) -> Parity {
        if i.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl FromStr for Parity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(format!("unknown parity {other:?}, expected even|odd")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CertificateKind {
    /// `pexp_{2,t} ≤ 3` and the first product length of the parity is within bound.
    Subadditive,
    /// `pexp_{j+2,t} = pexp_{j,t} + 3`, with every length of the parity up to `j` within bound.
    Saturated { j: usize },
}

/// Evidence that `pexp_{i,t} ≤ 3i/2 + c` for every `i ≥ parity.first_index()` of one parity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductCertificate {
    pub class: ConjClass,
    #[serde(flatten)]
    pub kind: CertificateKind,
    pub parity: Parity,
    pub c: Rational,
    /// `pexp_{1,t}, pexp_{2,t}, …` as far as the certificate needs.
    pub profile: Vec<Rational>,
}

fn bound(i: usize, c: Rational) -> Rational {
    Rational::new(3 * i as i64, 2) + c
}

/// Finds a certificate for class `t`.
///
/// Subadditive needs `pexp_2 ≤ 3` and `pexp_f ≤ 3f/2 + c` for the first length
/// `f` of the parity; then `pexp_{f+2k} ≤ pexp_f + k·pexp_2` bounds the rest.
/// Saturated(j) needs the bound at every length of the parity up to `j`, plus
/// `pexp_{j+2} = pexp_j + 3` and, checked one step further, `pexp_{j+4} = pexp_j + 6`.
pub fn find_certificate(
    idx: &FactorIndex,
    t: &ConjClass,
    parity: Parity,
    j_max: usize,
    c: Rational,
) -> Result<ProductCertificate, ProductError> {
    if j_max < 4 {
        return Err(ProductError::JMaxTooSmall(j_max));
    }
    let first = parity.first_index();
    let profile = pexp_profile(idx, t.representative(), j_max + 4)?;
    let p = |i: usize| profile[i - 1];
    let certificate = |kind, len: usize| ProductCertificate {
        class: t.clone(),
        kind,
        parity,
        c,
        profile: profile[..len].to_vec(),
    };
    let three = Rational::from_integer(3);
    if p(2) <= three && p(first) <= bound(first, c) {
        return Ok(certificate(CertificateKind::Subadditive, first.max(2)));
    }
    let mut j = first;
    while j <= j_max && p(j) <= bound(j, c) {
        if p(j + 2) == p(j) + three && p(j + 4) == p(j) + three + three {
            return Ok(certificate(CertificateKind::Saturated { j }, j + 4));
        }
        j += 2;
    }
    Err(ProductError::NoCertificate {
        class: t.clone(),
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCubeWitness {
    pub t: Word,
    pub u: Word,
    pub v: Word,
    pub exponent: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairScanReport {
    pub len_lo: usize,
    pub len_hi: usize,
    /// Classes with a member in the index; no other class can reach exponent 3.
    pub classes_checked: u64,
    pub passed: bool,
    pub witness: Option<PairCubeWitness>,
}

fn periodic_slice(t: &[Letter], from: usize, len: usize) -> Vec<Letter> {
    (from..from + len).map(|x| t[x % t.len()]).collect()
}

/// Checks that no two indexed factors `u`, `v` satisfy `uv = t^e` with
/// `e > 3` and `len_lo ≤ |t| ≤ len_hi`.
///
/// Only classes with a member in the index are examined: otherwise each
/// factor of `t^ω` is shorter than `|t|` and `e < 2`.
pub fn scan_pair_cubes(
    idx: &FactorIndex,
    len_lo: usize,
    len_hi: usize,
) -> Result<PairScanReport, ProductError> {
    let classes: Vec<ConjClass> = (len_lo.max(1)..=len_hi)
        .flat_map(|n| idx.occurring_classes(n))
        .collect();
    let three = Rational::from_integer(3);
    let results: Vec<Result<Option<PairCubeWitness>, ProductError>> = classes
        .par_iter()
        .map(|class| {
            let t = class.representative();
            let matches = idx.phase_matches(t)?;
            let q = t.len();
            let best = (0..q).max_by_key(|&phase| {
                (
                    matches[phase] + matches[(phase + matches[phase]) % q],
                    q - phase,
                )
            });
            let phase = best.expect("class is non-empty");
            let lu = matches[phase];
            let lv = matches[(phase + lu) % q];
            let exponent = Rational::from_lengths(lu + lv, q);
            if exponent <= three {
                return Ok(None);
            }
            let word = |v: Vec<Letter>| Word::new(v, t.alphabet()).expect("letters of t");
            Ok(Some(PairCubeWitness {
                t: t.clone(),
                u: word(periodic_slice(t, phase, lu)),
                v: word(periodic_slice(t, phase + lu, lv)),
                exponent,
            }))
        })
        .collect();
    let mut witness = None;
    for r in results {
        if let Some(w) = r? {
            witness = Some(w);
            break;
        }
    }
    Ok(PairScanReport {
        len_lo,
        len_hi,
        classes_checked: classes.len() as u64,
        passed: witness.is_none(),
        witness,
    })
}

/// Parameters of one upper-bound verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpperProfile {
    pub name: String,
    pub parity: Parity,
    pub src_spec: FreenessSpec,
    pub dst_spec: FreenessSpec,
    /// Class lengths covered by the pair-cube scan, if any.
    pub pair_scan: Option<(usize, usize)>,
    /// Classes up to this length need a certificate.
    pub classes_max: usize,
    pub c: Rational,
    pub j_max: usize,
    pub initial_cap: usize,
}

/// Classes up to this length are enumerated in full, not just the occurring ones.
pub const FULL_CLASS_ENUMERATION_MAX: usize = 10;

impl UpperProfile {
    fn new(
        name: &str,
        parity: Parity,
        dst: &str,
        pair_scan: Option<(usize, usize)>,
        classes_max: usize,
        c: Rational,
    ) -> Self {
        let dst_spec: FreenessSpec = dst.parse().expect("built-in spec");
        // longest period that still needs explicit work
        let len_hi = dst_spec.min_period() - 1;
        UpperProfile {
            name: name.to_string(),
            parity,
            src_spec: "7/5+".parse().expect("built-in spec"),
            dst_spec,
            pair_scan,
            classes_max,
            c,
            j_max: 20,
            initial_cap: 4 * len_hi * 3,
        }
    }

    /// `pexp_i ≤ 3i/2 + 1/4` for even `i`.
    pub fn even() -> Self {
        Self::new(
            "even",
            Parity::Even,
            "202/135+@36",
            Some((9, 35)),
            8,
            Rational::new(1, 4),
        )
    }

    /// `pexp_i ≤ 3i/2 + 1/6` for odd `i ≥ 3`.
    pub fn odd() -> Self {
        Self::new("odd", Parity::Odd, "3/2+@45", None, 44, Rational::new(1, 6))
    }

    /// The odd profile with certificates only for classes up to length 12;
    /// it does not establish the bound for periods 13 to 44.
    pub fn odd_smoke() -> Self {
        Self {
            name: "odd-smoke".into(),
            classes_max: 12,
            ..Self::odd()
        }
    }

    /// Longest class length not covered by the freeness stage.
    pub fn len_hi(&self) -> usize {
        self.dst_spec.min_period() - 1
    }

    /// Whether the profile's stages together cover every period.
    pub fn covers_all_periods(&self) -> bool {
        let scan_closes_gap = self
            .pair_scan
            .is_some_and(|(lo, hi)| lo <= self.classes_max + 1 && hi >= self.len_hi());
        self.classes_max >= self.len_hi() || scan_closes_gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperStage {
    Images,
    PairScan,
    Certificates,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSummary {
    pub max_factor_len: usize,
    pub source_word_len: usize,
    pub states: usize,
    pub cap_doublings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateFailure {
    pub class: ConjClass,
    pub profile: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateSummary {
    pub classes: u64,
    pub subadditive: u64,
    pub saturated: u64,
    pub max_j: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpperVerdict {
    pub profile: UpperProfile,
    pub arity: usize,
    pub image_len: usize,
    pub passed: bool,
    /// True when `passed` and the profile leaves no period unchecked.
    pub establishes_bound: bool,
    pub failed_stage: Option<UpperStage>,
    pub images: ImageCheckReport,
    pub index: Option<IndexSummary>,
    pub pair_scan: Option<PairScanReport>,
    pub certificate_summary: Option<CertificateSummary>,
    pub certificates: Vec<ProductCertificate>,
    pub certificate_failure: Option<CertificateFailure>,
    /// Classes up to this length were enumerated in full; longer ones only when they occur.
    pub all_classes_up_to: usize,
    /// Period ranges settled by argument rather than enumeration.
    pub derived_clauses: Vec<String>,
}

const MAX_CAP: usize = 1 << 16;

struct IndexStages {
    scan: Option<PairScanReport>,
    certificates: Vec<ProductCertificate>,
    failure: Option<CertificateFailure>,
}

fn classes_for(idx: &FactorIndex, n: usize) -> Vec<ConjClass> {
    if n <= FULL_CLASS_ENUMERATION_MAX {
        conjugacy_classes(n, idx.alphabet().max(2)).expect("valid class parameters")
    } else {
        idx.occurring_classes(n)
    }
}

fn run_index_stages(
    idx: &FactorIndex,
    profile: &UpperProfile,
) -> Result<IndexStages, ProductError> {
    let scan = match profile.pair_scan {
        Some((lo, hi)) => {
            let r = scan_pair_cubes(idx, lo, hi)?;
            if !r.passed {
                return Ok(IndexStages {
                    scan: Some(r),
                    certificates: Vec::new(),
                    failure: None,
                });
            }
            Some(r)
        }
        None => None,
    };
    let classes: Vec<ConjClass> = (1..=profile.classes_max)
        .flat_map(|n| classes_for(idx, n))
        .collect();
    let results: Vec<Result<ProductCertificate, ProductError>> = classes
        .par_iter()
        .map(|t| find_certificate(idx, t, profile.parity, profile.j_max, profile.c))
        .collect();
    let mut certificates = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(cert) => certificates.push(cert),
            Err(ProductError::NoCertificate { class, profile }) => {
                let failure = Some(CertificateFailure { class, profile });
                return Ok(IndexStages {
                    scan,
                    certificates,
                    failure,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(IndexStages {
        scan,
        certificates,
        failure: None,
    })
}

fn derived_clauses(profile: &UpperProfile) -> Vec<String> {
    let n = profile.dst_spec.min_period();
    let beta = profile.dst_spec.threshold();
    let mut out = vec![format!(
        "periods >= {n}: every factor of t^ω has period |t| >= {n}, so its exponent is at most {beta} < 3/2 and an i-term product stays below 3i/2"
    )];
    if let Some((lo, hi)) = profile.pair_scan {
        out.push(format!(
            "periods {lo}..={hi}: the pair scan gives pexp_2 <= 3, so pexp_i <= 3i/2 for even i by subadditivity"
        ));
    }
    out.push(format!(
        "classes longer than {FULL_CLASS_ENUMERATION_MAX} with no member in the factor set: every factor of t^ω is shorter than |t|, so pexp_i < i"
    ));
    if !profile.covers_all_periods() {
        let lo = profile
            .pair_scan
            .map_or(profile.classes_max, |(_, hi)| hi.max(profile.classes_max))
            + 1;
        out.push(format!(
            "periods {lo}..={}: NOT CHECKED by this profile",
            profile.len_hi()
        ));
    }
    out
}

/// Runs the image check, the pair-cube scan (if the profile has one) and the
/// certificate search, stopping at the first failing stage.
pub fn verify_upper(
    m: &UniformMorphism,
    profile: &UpperProfile,
) -> Result<UpperVerdict, ProductError> {
    let images = verify_images_free(m, profile.src_spec, profile.dst_spec)?;
    let mut verdict = UpperVerdict {
        profile: profile.clone(),
        arity: m.arity(),
        image_len: m.image_len(),
        passed: false,
        establishes_bound: false,
        failed_stage: None,
        images,
        index: None,
        pair_scan: None,
        certificate_summary: None,
        certificates: Vec::new(),
        certificate_failure: None,
        all_classes_up_to: FULL_CLASS_ENUMERATION_MAX.min(profile.classes_max),
        derived_clauses: derived_clauses(profile),
    };
    if !verdict.images.passed {
        verdict.failed_stage = Some(UpperStage::Images);
        return Ok(verdict);
    }
    let mut cap = profile.initial_cap.max(1);
    let mut doublings = 0;
    let (idx, stages) = loop {
        let idx = build_factor_index(m, profile.src_spec, cap)?;
        match run_index_stages(&idx, profile) {
            Ok(stages) => break (idx, stages),
            Err(ProductError::CapReached { .. }) if cap < MAX_CAP => {
                cap *= 2;
                doublings += 1;
            }
            Err(e) => return Err(e),
        }
    };
    verdict.index = Some(IndexSummary {
        max_factor_len: cap,
        source_word_len: idx.source_word_len(),
        states: idx.state_count(),
        cap_doublings: doublings,
    });
    let IndexStages {
        scan,
        certificates,
        failure,
    } = stages;
    if scan.as_ref().is_some_and(|s| !s.passed) {
        verdict.failed_stage = Some(UpperStage::PairScan);
    } else if failure.is_some() {
        verdict.failed_stage = Some(UpperStage::Certificates);
    }
    verdict.pair_scan = scan;
    verdict.certificate_summary = Some(CertificateSummary {
        classes: certificates.len() as u64,
        subadditive: certificates
            .iter()
            .filter(|c| c.kind == CertificateKind::Subadditive)
            .count() as u64,
        saturated: certificates
            .iter()
            .filter(|c| matches!(c.kind, CertificateKind::Saturated { .. }))
            .count() as u64,
        max_j: certificates
            .iter()
            .filter_map(|c| match c.kind {
                CertificateKind::Saturated { j } => Some(j),
                CertificateKind::Subadditive => None,
            })
            .max(),
    });
    verdict.certificates = certificates;
    verdict.certificate_failure = failure;
    verdict.passed = verdict.failed_stage.is_none();
    verdict.establishes_bound = verdict.passed && profile.covers_all_periods();
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::g45;
    use std::collections::HashSet;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn class(s: &str) -> ConjClass {
        ConjClass::new(&w(s)).unwrap()
    }

    fn all_factors(texts: &[Vec<Letter>]) -> HashSet<Vec<Letter>> {
        let mut set = HashSet::new();
        for t in texts {
            for i in 0..=t.len() {
                for j in i..=t.len() {
                    set.insert(t[i..j].to_vec());
                }
            }
        }
        set
    }

    /// Best cover of `t^ω` by `i` factors from `set`, by dynamic programming
    /// over reachable positions (no greedy step).
    fn brute_pexp(set: &HashSet<Vec<Letter>>, t: &[Letter], i: usize) -> Rational {
        let q = t.len();
        let longest = set.iter().map(Vec::len).max().unwrap_or(0);
        let mut best = 0;
        for phase in 0..q {
            let mut reach: BTreeSet<usize> = [phase].into();
            for _ in 0..i {
                let mut next = BTreeSet::new();
                for &x in &reach {
                    for len in 0..=longest {
                        if set.contains(&periodic_slice(t, x, len)) {
                            next.insert(x + len);
                        }
                    }
                }
                reach = next;
            }
            best = best.max(reach.iter().max().unwrap() - phase);
        }
        Rational::from_lengths(best, q)
    }

    fn small_index() -> (FactorIndex, HashSet<Vec<Letter>>) {
        let m = g45();
        let texts: Vec<Vec<Letter>> = ["0123", "2031"]
            .iter()
            .map(|s| m.apply(&w(s)).unwrap().into_letters())
            .collect();
        // only factors of length <= 12, so the brute force stays cheap
        let short: Vec<Vec<Letter>> = texts
            .iter()
            .flat_map(|t| t.windows(12).map(<[u8]>::to_vec))
            .collect();
        let idx = FactorIndex::from_words(short.iter().map(|t| &t[..]), 3);
        (idx, all_factors(&short))
    }

    #[test]
    fn automaton_recognizes_exactly_the_factors() {
        let texts = vec![
            vec![0, 1, 0, 2, 0, 1, 2],
            vec![2, 1, 2, 0, 0],
            vec![1, 1, 1],
        ];
        let idx = FactorIndex::from_words(texts.iter().map(|t| &t[..]), 3);
        let set = all_factors(&texts);
        for len in 0..=7 {
            let mut count = 0;
            for n in 0..3u32.pow(len as u32) {
                let word: Vec<Letter> = (0..len)
                    .map(|p| ((n / 3u32.pow(p as u32)) % 3) as Letter)
                    .collect();
                assert_eq!(idx.contains(&word), set.contains(&word), "{word:?}");
                count += set.contains(&word) as u64;
            }
            assert_eq!(idx.counts_per_length(7)[len], count, "len {len}");
            assert_eq!(idx.factors_of_length(len).len() as u64, count);
        }
    }

    #[test]
    fn g45_index_examples() {
        let m = g45();
        let src: FreenessSpec = "7/5+".parse().unwrap();
        assert!(build_factor_index(&m, src, 9)
            .unwrap()
            .contains(&w("010201210")));
        assert!(!build_factor_index(&m, src, 2).unwrap().contains(&w("00")));
        let idx = build_factor_index(&m, src, 1).unwrap();
        assert_eq!(idx.factors_of_length(1), vec![vec![0], vec![1], vec![2]]);
        assert!(matches!(
            build_factor_index(&m, src, 0),
            Err(ProductError::ZeroCap)
        ));
    }

    #[test]
    fn pexp_examples_on_g45() {
        let idx = build_factor_index(&g45(), "7/5+".parse().unwrap(), 60).unwrap();
        assert_eq!(pexp_it(&idx, &[0], 1).unwrap(), Rational::ONE);
        assert_eq!(pexp_it(&idx, &[0], 3).unwrap(), Rational::from_integer(3));
        for t in ["01", "012", "0102", "01021"] {
            assert!(pexp_it(&idx, &w(t), 1).unwrap() < Rational::from_integer(2));
        }
        let cert =
            find_certificate(&idx, &class("0"), Parity::Even, 8, Rational::new(1, 4)).unwrap();
        assert_eq!(cert.kind, CertificateKind::Subadditive);
        assert_eq!(cert.profile[1], Rational::from_integer(2));
    }

    #[test]
    fn cap_hit_is_an_error() {
        let idx = build_factor_index(&g45(), "7/5+".parse().unwrap(), 3).unwrap();
        assert!(matches!(
            idx.longest_match(&w("0102"), 0),
            Err(ProductError::CapReached { cap: 3 })
        ));
        assert!(matches!(
            find_certificate(&idx, &class("0"), Parity::Even, 3, Rational::ZERO),
            Err(ProductError::JMaxTooSmall(3))
        ));
    }

    #[test]
    fn periodic_word_fails_pair_scan() {
        let text: Vec<Letter> = (0..30).map(|x| (x % 3) as Letter).collect();
        let idx = FactorIndex::from_words([&text[..]], 3);
        let r = scan_pair_cubes(&idx, 3, 3).unwrap();
        assert!(!r.passed);
        let wit = r.witness.unwrap();
        assert_eq!(wit.t, w("012"));
        assert!(wit.exponent > Rational::from_integer(3));
        let uv = wit.u.concat(&wit.v);
        assert!(idx.contains(&wit.u) && idx.contains(&wit.v));
        assert_eq!(Rational::from_lengths(uv.len(), 3), wit.exponent);
        assert_eq!(uv.letters(), &periodic_slice(&[0, 1, 2], 0, uv.len())[..]);
    }

    #[test]
    fn g45_pair_scans_pass() {
        let idx = build_factor_index(&g45(), "7/5+".parse().unwrap(), 420).unwrap();
        let r = scan_pair_cubes(&idx, 9, 35).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        assert!(r.classes_checked > 0);
        assert!(scan_pair_cubes(&idx, 36, 40).unwrap().passed);
    }

    #[test]
    fn greedy_matches_dynamic_programming() {
        let (idx, set) = small_index();
        for n in 1..=4 {
            for c in conjugacy_classes(n, 3).unwrap() {
                let prof = pexp_profile(&idx, c.representative(), 4).unwrap();
                for i in 1..=4 {
                    assert_eq!(
                        prof[i - 1],
                        brute_pexp(&set, c.representative(), i),
                        "t={c} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn saturated_certificates_extend_further() {
        let idx = build_factor_index(&g45(), "7/5+".parse().unwrap(), 420).unwrap();
        let three = Rational::from_integer(3);
        for n in 1..=8 {
            for c in conjugacy_classes(n, 3).unwrap() {
                let cert =
                    find_certificate(&idx, &c, Parity::Even, 20, Rational::new(1, 4)).unwrap();
                if let CertificateKind::Saturated { j } = cert.kind {
                    let prof = pexp_profile(&idx, c.representative(), j + 12).unwrap();
                    for k in 0..=6 {
                        assert_eq!(
                            prof[j + 2 * k - 1],
                            prof[j - 1] + three * Rational::from_integer(k as i64),
                            "t={c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn profiles_are_monotone_and_subadditive() {
        let idx = build_factor_index(&g45(), "7/5+".parse().unwrap(), 420).unwrap();
        for n in 1..=6 {
            for c in conjugacy_classes(n, 3).unwrap() {
                let p = pexp_profile(&idx, c.representative(), 12).unwrap();
                for i in 1..=6 {
                    assert!(p[i - 1] <= p[i], "t={c} i={i}");
                    for j in 1..=6 {
                        assert!(p[i + j - 1] <= p[i - 1] + p[j - 1], "t={c} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn certificate_failure_carries_profile() {
        // a factor set containing long powers of 01 cannot meet a +1/4 slack
        let text: Vec<Letter> = [0, 1].repeat(10);
        let idx = FactorIndex::from_words([&text[..]], 2);
        match find_certificate(&idx, &class("01"), Parity::Even, 6, Rational::new(1, 4)) {
            Err(ProductError::NoCertificate { profile, .. }) => assert_eq!(profile.len(), 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn squared_image_fails_first_stage() {
        // every image is a square of period 45
        let doubled = g45().images().iter().map(|x| x.concat(x)).collect();
        let m = UniformMorphism::new(doubled).unwrap();
        for profile in [UpperProfile::even(), UpperProfile::odd()] {
            let v = verify_upper(&m, &profile).unwrap();
            assert!(!v.passed);
            assert_eq!(v.failed_stage, Some(UpperStage::Images));
        }
    }

    #[test]
    fn profile_constants() {
        let e = UpperProfile::even();
        assert_eq!((e.initial_cap, e.len_hi(), e.classes_max), (420, 35, 8));
        assert!(e.covers_all_periods());
        let o = UpperProfile::odd();
        assert_eq!((o.initial_cap, o.len_hi(), o.classes_max), (528, 44, 44));
        assert!(o.covers_all_periods());
        assert!(!UpperProfile::odd_smoke().covers_all_periods());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn index() -> &'static FactorIndex {
            static IDX: OnceLock<FactorIndex> = OnceLock::new();
            IDX.get_or_init(|| build_factor_index(&g45(), "7/5+".parse().unwrap(), 420).unwrap())
        }

        fn primitive_word(max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
            proptest::collection::vec(0u8..3, 1..=max_len)
                .prop_filter("primitive", |t| is_primitive(t))
        }

        proptest! {
            #[test]
            fn rotations_share_pexp(t in primitive_word(12), r in 0usize..12, i in 1usize..8) {
                let r = r % t.len();
                let mut rot = t[r..].to_vec();
                rot.extend_from_slice(&t[..r]);
                prop_assert_eq!(pexp_it(index(), &t, i).unwrap(), pexp_it(index(), &rot, i).unwrap());
            }
        }
    }
}
