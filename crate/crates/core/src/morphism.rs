//! Uniform morphisms and bounded verification of image freeness.
//!
//! [`verify_images_free`] enumerates every source word legal for `src_spec`
//! whose length lies under [`image_check_length_bound`], and checks that its
//! image avoids the repetitions forbidden by `dst_spec`. That the bounded check
//! extends to images of infinite source words is the content of an external
//! lemma about uniform morphisms; only the finite check is performed here.
//!
//! Images are checked incrementally: each new source letter appends one block
//! of `k` letters, and only repetitions ending in that block are examined.
//! Longest-common-suffix queries between two image positions jump whole
//! blocks using a table of common suffixes between pairs of images, so the
//! cost per block does not grow with the image length.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dfs::{self, DfsOptions, Explorer, Halt, Step};
use crate::freeness::{suffix_violation, FreenessSpec};
use crate::rational::Rational;
use crate::words::{letters_to_string, Letter, Repetition, Word, MAX_ALPHABET};

#[derive(Debug, Error)]
pub enum MorphismError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("morphism has no images")]
    Empty,
    #[error("images are not uniform: letter {letter} has length {len}, expected {expected}")]
    NotUniform {
        letter: usize,
        len: usize,
        expected: usize,
    },
    #[error("images must have positive length")]
    EmptyImage,
    #[error("source letter {0} defined twice")]
    DuplicateLetter(usize),
    #[error("source letter {0} has no image")]
    MissingLetter(usize),
    #[error("letter {letter} is outside the source alphabet of size {arity}")]
    LetterOutOfRange { letter: Letter, arity: usize },
    #[error("length bound needs the target threshold {beta} above the source threshold {alpha}")]
    ThresholdOrder { beta: Rational, alpha: Rational },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A morphism sending each of `arity` letters to a word of the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMorphism {
    images: Vec<Word>,
    image_len: usize,
    target_alphabet: u8,
}

impl UniformMorphism {
    pub fn new(images: Vec<Word>) -> Result<Self, MorphismError> {
        let first = images.first().ok_or(MorphismError::Empty)?;
        let image_len = first.len();
        if image_len == 0 {
            return Err(MorphismError::EmptyImage);
        }
        if images.len() > MAX_ALPHABET as usize {
            return Err(MorphismError::LetterOutOfRange {
                letter: images.len() as Letter - 1,
                arity: MAX_ALPHABET as usize,
            });
        }
        for (letter, img) in images.iter().enumerate() {
            if img.len() != image_len {
                return Err(MorphismError::NotUniform {
                    letter,
                    len: img.len(),
                    expected: image_len,
                });
            }
        }
        let max_letter = images
            .iter()
            .flat_map(|w| w.iter().copied())
            .max()
            .unwrap_or(0);
        let target_alphabet = (max_letter + 1).max(2);
        let images = images
            .into_iter()
            .map(|w| {
                Word::new(w.into_letters(), target_alphabet).expect("letters below the maximum")
            })
            .collect();
        Ok(UniformMorphism {
            images,
            image_len,
            target_alphabet,
        })
    }

    /// Number of source letters.
    pub fn arity(&self) -> usize {
        self.images.len()
    }

    /// Common length `k` of all images.
    pub fn image_len(&self) -> usize {
        self.image_len
    }

    pub fn target_alphabet(&self) -> u8 {
        self.target_alphabet
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, letter: Letter) -> &Word {
        &self.images[letter as usize]
    }

    /// Concatenation of the images of the letters of `w`.
    pub fn apply(&self, w: &[Letter]) -> Result<Word, MorphismError> {
        let mut out = Vec::with_capacity(w.len() * self.image_len);
        for &a in w {
            let img = self
                .images
                .get(a as usize)
                .ok_or(MorphismError::LetterOutOfRange {
                    letter: a,
                    arity: self.arity(),
                })?;
            out.extend_from_slice(img);
        }
        Ok(Word::new(out, self.target_alphabet).expect("images use the target alphabet"))
    }

    pub(crate) fn apply_unchecked(&self, w: &[Letter], out: &mut Vec<Letter>) {
        for &a in w {
            out.extend_from_slice(&self.images[a as usize]);
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MorphismError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| MorphismError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    /// Serializes in the text format read by [`FromStr`], wrapping long images.
    pub fn to_text(&self) -> String {
        const WRAP: usize = 62;
        let mut out = String::new();
        for (letter, img) in self.images.iter().enumerate() {
            let s = img.to_string();
            let chunks: Vec<&str> = s
                .as_bytes()
                .chunks(WRAP)
                .map(|c| std::str::from_utf8(c).unwrap())
                .collect();
            out.push_str(&format!("{letter} -> {}", chunks.join(" \\\n     ")));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for UniformMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for UniformMorphism {
    type Err = MorphismError;

    /// One `<digit> -> <image>` rule per source letter. `#` starts a comment,
    /// whitespace is ignored, and a trailing `\` continues the image on the next line.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut rules: Vec<Option<Word>> = Vec::new();
        // (source letter, line of the rule, image text so far)
        let mut pending: Option<(usize, usize, String)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            let (body, continues) = match line.strip_suffix('\\') {
                Some(b) => (b, true),
                None => (line, false),
            };
            let (letter, start_line, image) = match pending.take() {
                Some((letter, start, mut image)) => {
                    image.push_str(body);
                    (letter, start, image)
                }
                None if body.is_empty() => continue,
                None => {
                    let (lhs, rhs) = body.split_once("->").ok_or_else(|| MorphismError::Parse {
                        line: line_no,
                        msg: "expected `<letter> -> <image>`".into(),
                    })?;
                    let letter: usize = lhs.trim().parse().map_err(|_| MorphismError::Parse {
                        line: line_no,
                        msg: format!("bad source letter {:?}", lhs.trim()),
                    })?;
                    (letter, line_no, rhs.to_string())
                }
            };
            if continues {
                pending = Some((letter, start_line, image));
                continue;
            }
            let word = Word::parse(&image, MAX_ALPHABET).map_err(|e| MorphismError::Parse {
                line: start_line,
                msg: e.to_string(),
            })?;
            if rules.len() <= letter {
                rules.resize(letter + 1, None);
            }
            if rules[letter].replace(word).is_some() {
                return Err(MorphismError::DuplicateLetter(letter));
            }
        }
        if let Some((_, line, _)) = pending {
            return Err(MorphismError::Parse {
                line,
                msg: "continuation runs past end of input".into(),
            });
        }
        let images = rules
            .into_iter()
            .enumerate()
            .map(|(l, w)| w.ok_or(MorphismError::MissingLetter(l)))
            .collect::<Result<Vec<_>, _>>()?;
        UniformMorphism::new(images)
    }
}

/// `2β / (β − α)`: source lengths strictly below this value must be checked.
pub fn image_check_length_bound(
    beta: Rational,
    alpha_src: Rational,
) -> Result<Rational, MorphismError> {
    if beta <= alpha_src {
        return Err(MorphismError::ThresholdOrder {
            beta,
            alpha: alpha_src,
        });
    }
    Ok(Rational::from_integer(2) * beta / (beta - alpha_src))
}

/// Longest source length strictly below `bound`: `floor(bound)`, or `bound − 1`
/// when the bound is an integer.
pub fn max_source_len(bound: Rational) -> usize {
    let f = bound.floor();
    let m = if bound.is_integer() { f - 1 } else { f };
    m.max(0) as usize
}

/// Common-suffix lengths between every pair of image positions.
struct BlockTable {
    k: usize,
    arity: usize,
    // cs[((a * arity + b) * k + o1) * k + o2] = common suffix of img(a)[..=o1], img(b)[..=o2]
    cs: Vec<u16>,
}

impl BlockTable {
    fn new(m: &UniformMorphism) -> Self {
        let k = m.image_len();
        let arity = m.arity();
        assert!(
            k < u16::MAX as usize,
            "image length too large for the block table"
        );
        let mut cs = vec![0u16; arity * arity * k * k];
        for a in 0..arity {
            for b in 0..arity {
                let (x, y) = (&m.images[a], &m.images[b]);
                let base = (a * arity + b) * k * k;
                for o1 in 0..k {
                    for o2 in 0..k {
                        if x[o1] == y[o2] {
                            let prev = if o1 > 0 && o2 > 0 {
                                cs[base + (o1 - 1) * k + o2 - 1]
                            } else {
                                0
                            };
                            cs[base + o1 * k + o2] = prev + 1;
                        }
                    }
                }
            }
        }
        BlockTable { k, arity, cs }
    }

    #[inline]
    fn cs(&self, a: Letter, b: Letter, o1: usize, o2: usize) -> usize {
        let k = self.k;
        self.cs[((a as usize * self.arity + b as usize) * k + o1) * k + o2] as usize
    }

    /// Longest common suffix of the image prefixes ending at global positions
    /// `g1` and `g2` (inclusive), stopping early once `cap` is reached.
    fn lcs(&self, src: &[Letter], mut g1: usize, mut g2: usize, cap: usize) -> usize {
        let k = self.k;
        let mut total = 0;
        loop {
            let (o1, o2) = (g1 % k, g2 % k);
            let c = self.cs(src[g1 / k], src[g2 / k], o1, o2);
            total += c;
            if c <= o1.min(o2) || total >= cap {
                return total;
            }
            // matched down to a block start on at least one side
            if g1 < c || g2 < c {
                return total;
            }
            g1 -= c;
            g2 -= c;
        }
    }
}

/// Offsets `(o, o')` in images `(a, b)` where a long enough common suffix
/// can end: the match is already long, or it runs back into a block start.
///
/// Only the last pair of each diagonal run inside the block pair is kept.
/// Along a run the period is fixed and the common suffix only grows, so the
/// run's last pair sees every repetition the earlier pairs would.
fn candidate_pairs(table: &BlockTable, a: Letter, b: Letter, min_match: usize) -> Vec<(u16, u16)> {
    let k = table.k;
    let mut out = Vec::new();
    for o in 0..k {
        for o2 in 0..k {
            let c = table.cs(a, b, o, o2);
            let run_end = o + 1 == k || o2 + 1 == k || table.cs(a, b, o + 1, o2 + 1) == 0;
            if run_end && (c >= min_match || (c > 0 && c == o.min(o2) + 1)) {
                out.push((o as u16, o2 as u16));
            }
        }
    }
    out
}

struct ImageChecker<'a> {
    morphism: &'a UniformMorphism,
    src_spec: FreenessSpec,
    dst_spec: FreenessSpec,
    table: BlockTable,
    // pairs[a * arity + b]
    pairs: Vec<Vec<(u16, u16)>>,
}

impl<'a> ImageChecker<'a> {
    fn new(morphism: &'a UniformMorphism, src_spec: FreenessSpec, dst_spec: FreenessSpec) -> Self {
        let table = BlockTable::new(morphism);
        let n = dst_spec.min_period();
        let min_match = dst_spec.min_violating_len(n) - n;
        let arity = morphism.arity();
        let pairs = (0..arity * arity)
            .map(|ab| {
                candidate_pairs(
                    &table,
                    (ab / arity) as Letter,
                    (ab % arity) as Letter,
                    min_match,
                )
            })
            .collect();
        ImageChecker {
            morphism,
            src_spec,
            dst_spec,
            table,
            pairs,
        }
    }

    /// A forbidden repetition ending inside the image of the last letter of `src`.
    fn last_block_violation(&self, src: &[Letter]) -> Option<Repetition> {
        let k = self.morphism.image_len();
        let arity = self.morphism.arity();
        let last = src.len() - 1;
        let a = src[last];
        for (blk, &b) in src.iter().enumerate() {
            for &(o, o2) in &self.pairs[a as usize * arity + b as usize] {
                let (o, o2) = (o as usize, o2 as usize);
                if blk == last && o2 >= o {
                    continue;
                }
                let e = last * k + o;
                let e2 = blk * k + o2;
                let p = e - e2;
                if p < self.dst_spec.min_period() {
                    continue;
                }
                let need = self.dst_spec.min_violating_len(p) - p;
                if need > e2 + 1 {
                    continue;
                }
                if self.table.lcs(src, e, e2, need) >= need {
                    let len = p + self.table.lcs(src, e, e2, usize::MAX);
                    return Some(Repetition::new(e + 1 - len, p, len));
                }
            }
        }
        None
    }
}

impl Explorer for ImageChecker<'_> {
    type State = ();
    type Halt = Repetition;

    fn alphabet(&self) -> u8 {
        self.morphism.arity() as u8
    }

    fn step(&self, word: &[Letter], _: &()) -> Step<(), Repetition> {
        if suffix_violation(word, &self.src_spec).is_some() {
            return Step::Prune;
        }
        match self.last_block_violation(word) {
            Some(rep) => Step::Halt(rep),
            None => Step::Descend(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageFailure {
    pub source: Word,
    pub repetition: Repetition,
    pub factor: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageCheckReport {
    pub src_spec: FreenessSpec,
    pub dst_spec: FreenessSpec,
    pub length_bound: Rational,
    pub max_source_len: usize,
    /// Legal source words per length, `0..=max_source_len` (partial on failure).
    pub source_counts: Vec<u64>,
    pub passed: bool,
    pub failure: Option<ImageFailure>,
}

/// Checks the images of all `src_spec`-free source words shorter than the
/// length bound against `dst_spec`; the first failure in source-word order wins.
pub fn verify_images_free(
    m: &UniformMorphism,
    src_spec: FreenessSpec,
    dst_spec: FreenessSpec,
) -> Result<ImageCheckReport, MorphismError> {
    let length_bound = image_check_length_bound(dst_spec.threshold(), src_spec.threshold())?;
    let max_len = max_source_len(length_bound);
    let out = verify_images_up_to(m, src_spec, dst_spec, max_len);
    let failure = match out.halt {
        Some(Halt::Found(source, repetition)) => {
            let image = m
                .apply(&source)
                .expect("source letters are below the arity");
            let factor =
                Word::new(repetition.factor(&image).to_vec(), m.target_alphabet()).unwrap();
            let source = Word::new(source, m.arity() as u8).unwrap();
            Some(ImageFailure {
                source,
                repetition,
                factor,
            })
        }
        _ => None,
    };
    Ok(ImageCheckReport {
        src_spec,
        dst_spec,
        length_bound,
        max_source_len: max_len,
        source_counts: out.counts,
        passed: failure.is_none(),
        failure,
    })
}

pub(crate) fn verify_images_up_to(
    m: &UniformMorphism,
    src_spec: FreenessSpec,
    dst_spec: FreenessSpec,
    max_len: usize,
) -> dfs::DfsOutcome<Repetition> {
    let checker = ImageChecker::new(m, src_spec, dst_spec);
    dfs::explore(&checker, (), DfsOptions::exhaust(max_len))
}

impl fmt::Display for ImageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "image of {} contains {} (period {}, exponent {}) at {}",
            self.source,
            letters_to_string(&self.factor),
            self.repetition.period,
            self.repetition.exponent,
            self.repetition.start
        )
    }
}

pub fn g45() -> UniformMorphism {
    include_str!("../../../fixtures/g45.morphism")
        .parse()
        .expect("bundled fixture parses")
}

pub fn g514() -> UniformMorphism {
    include_str!("../../../fixtures/g514.morphism")
        .parse()
        .expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freeness::{find_violation, is_free};

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn spec(s: &str) -> FreenessSpec {
        s.parse().unwrap()
    }

    /// Full rescan of every image; the oracle for the incremental block check.
    fn first_failing_source(
        m: &UniformMorphism,
        src: FreenessSpec,
        dst: FreenessSpec,
        max_len: usize,
    ) -> Option<Vec<Letter>> {
        fn rec(
            m: &UniformMorphism,
            src: FreenessSpec,
            dst: FreenessSpec,
            w: &mut Vec<Letter>,
            max_len: usize,
        ) -> Option<Vec<Letter>> {
            if w.len() == max_len {
                return None;
            }
            for a in 0..m.arity() as Letter {
                w.push(a);
                if is_free(w, &src) {
                    let img = m.apply(w).unwrap();
                    if find_violation(&img, &dst).is_some() {
                        return Some(w.clone());
                    }
                    if let Some(x) = rec(m, src, dst, w, max_len) {
                        return Some(x);
                    }
                }
                w.pop();
            }
            None
        }
        rec(m, src, dst, &mut Vec::new(), max_len)
    }

    #[test]
    fn fixtures_parse_with_expected_shape() {
        let m = g45();
        assert_eq!((m.arity(), m.image_len(), m.target_alphabet()), (4, 45, 3));
        assert!(m
            .image(0)
            .to_string()
            .starts_with("010201210212021012102010212"));
        let m = g514();
        assert_eq!((m.arity(), m.image_len(), m.target_alphabet()), (4, 514, 3));
    }

    #[test]
    fn fixture_images_are_square_free() {
        for m in [g45(), g514()] {
            for img in m.images() {
                assert!(is_free(img, &FreenessSpec::square_free()));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let m = g45();
        assert_eq!(m.apply(&[0]).unwrap(), *m.image(0));
        assert!(m.apply(&[]).unwrap().is_empty());
        assert_eq!(g514().apply(&[0, 1]).unwrap().len(), 1028);
        assert!(matches!(
            m.apply(&[4]),
            Err(MorphismError::LetterOutOfRange { letter: 4, .. })
        ));
    }

    #[test]
    fn parse_format_details() {
        let m: UniformMorphism = "# comment\n1 -> 10 # trailing\n0 -> 0\\\n  1\n"
            .parse()
            .unwrap();
        assert_eq!(m.image(0).to_string(), "01");
        assert_eq!(m.image(1).to_string(), "10");
        assert!(matches!(
            "0 -> 01\n1 -> 0\n".parse::<UniformMorphism>(),
            Err(MorphismError::NotUniform { .. })
        ));
        assert!(matches!(
            "0 -> 01\n0 -> 10\n".parse::<UniformMorphism>(),
            Err(MorphismError::DuplicateLetter(0))
        ));
        assert!(matches!(
            "1 -> 01\n".parse::<UniformMorphism>(),
            Err(MorphismError::MissingLetter(0))
        ));
        assert!(matches!(
            "0 = 01\n".parse::<UniformMorphism>(),
            Err(MorphismError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            "0 -> 0\\\n".parse::<UniformMorphism>(),
            Err(MorphismError::Parse { .. })
        ));
        assert!(matches!(
            "0 -> 0x\n".parse::<UniformMorphism>(),
            Err(MorphismError::Parse { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        for m in [g45(), g514()] {
            assert_eq!(m.to_text().parse::<UniformMorphism>().unwrap(), m);
        }
    }

    #[test]
    fn length_bound_examples() {
        let b = image_check_length_bound(Rational::new(202, 135), Rational::new(7, 5)).unwrap();
        assert_eq!(b, Rational::new(404, 13));
        assert_eq!(max_source_len(b), 31);
        let b = image_check_length_bound(Rational::new(3, 2), Rational::new(7, 5)).unwrap();
        assert_eq!(b, Rational::from_integer(30));
        assert_eq!(max_source_len(b), 29);
        let b = image_check_length_bound(Rational::from_integer(2), Rational::new(7, 5)).unwrap();
        assert_eq!(b, Rational::new(20, 3));
        assert_eq!(max_source_len(b), 6);
        assert!(image_check_length_bound(Rational::new(7, 5), Rational::new(7, 5)).is_err());
    }

    #[test]
    fn squared_image_fails_with_witness() {
        let m: UniformMorphism = "0 -> 0101\n1 -> 0201\n2 -> 1202\n3 -> 2101\n"
            .parse()
            .unwrap();
        let r = verify_images_free(&m, spec("7/5+"), FreenessSpec::square_free()).unwrap();
        assert!(!r.passed);
        let f = r.failure.unwrap();
        assert_eq!(f.source, Word::parse("0", 4).unwrap());
        assert_eq!(f.factor.letters(), word("0101").letters());
    }

    #[test]
    fn block_check_matches_full_rescan() {
        let morphisms = [
            "0 -> 0102\n1 -> 0121\n2 -> 0201\n3 -> 2120\n",
            "0 -> 012\n1 -> 021\n2 -> 102\n3 -> 120\n",
            "0 -> 01020\n1 -> 01210\n2 -> 02120\n3 -> 21012\n",
        ];
        let dsts = ["2", "7/4+", "3/2+@3", "5/3+@2", "3+"];
        for text in morphisms {
            let m: UniformMorphism = text.parse().unwrap();
            for d in dsts {
                let fast = verify_images_up_to(&m, spec("7/5+"), spec(d), 7);
                let fast = match fast.halt {
                    Some(Halt::Found(w, _)) => Some(w),
                    _ => None,
                };
                let slow = first_failing_source(&m, spec("7/5+"), spec(d), 7);
                assert_eq!(fast, slow, "{text:?} dst={d}");
            }
        }
    }

    #[test]
    fn block_check_passes_on_g45_prefix_lengths() {
        // the full-rescan oracle agrees on short source words of the real morphism
        let m = g45();
        let fast = verify_images_up_to(&m, spec("7/5+"), spec("202/135+@36"), 6);
        assert!(fast.halt.is_none());
        assert_eq!(
            first_failing_source(&m, spec("7/5+"), spec("202/135+@36"), 6),
            None
        );
        let fast = verify_images_up_to(&m, spec("7/5+"), spec("3/2+@10"), 6);
        let slow = first_failing_source(&m, spec("7/5+"), spec("3/2+@10"), 6);
        assert_eq!(
            fast.halt.map(|h| match h {
                Halt::Found(w, _) => w,
                Halt::Reached(w) => w,
            }),
            slow
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn morphism_strategy() -> impl Strategy<Value = UniformMorphism> {
            (2usize..7).prop_flat_map(|k| {
                proptest::collection::vec(proptest::collection::vec(0u8..3, k), 4).prop_map(
                    |imgs| {
                        UniformMorphism::new(
                            imgs.into_iter().map(|v| Word::new(v, 3).unwrap()).collect(),
                        )
                        .unwrap()
                    },
                )
            })
        }

        proptest! {
            #[test]
            fn apply_is_a_homomorphism(
                m in morphism_strategy(),
                u in proptest::collection::vec(0u8..4, 0..8),
                v in proptest::collection::vec(0u8..4, 0..8),
            ) {
                let mut uv = u.clone();
                uv.extend(&v);
                let whole = m.apply(&uv).unwrap();
                let parts = m.apply(&u).unwrap().concat(&m.apply(&v).unwrap());
                prop_assert_eq!(whole.letters(), parts.letters());
                prop_assert_eq!(whole.len(), uv.len() * m.image_len());
            }

            #[test]
            fn random_morphisms_agree_with_rescan(m in morphism_strategy(), d in 0usize..4) {
                let dst = spec(["2", "3/2+@2", "7/4+", "5/2"][d]);
                let fast = match verify_images_up_to(&m, spec("7/5+"), dst, 5).halt {
                    Some(Halt::Found(w, _)) => Some(w),
                    _ => None,
                };
                prop_assert_eq!(fast, first_failing_source(&m, spec("7/5+"), dst, 5));
            }
        }
    }
}
