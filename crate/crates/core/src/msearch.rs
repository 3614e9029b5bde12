//! Search for uniform morphisms.
//!
//! A `k`-uniform morphism on four letters is encoded by the ternary word
//! `w = m(0)m(1)m(2)m(3)` of length `4k`. The search backtracks over
//! square-free `w`, forcing `m(0) > m(1) > m(2) > m(3)` lexicographically to
//! break the symmetry between source letters. Early tests look at images of
//! other legal source words: while `m(b)` grows, every `m(a)m(b)` with
//! `a < b` is checked as a prefix, and once `m(b)` is complete the image of
//! every legal word of at most [`MorphismPredicate::early_word_len`] letters
//! whose largest letter is `b` goes through [`MorphismPredicate::word_ok`]. Complete candidates go
//! through the full predicate.
//!
//! The search is sequential so that a checkpoint is a single DFS path:
//! resuming from it visits exactly the nodes the interrupted run had left.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::freeness::{enumerate_free, is_free, suffix_violation, EnumerationMode, FreenessSpec};
use crate::morphism::UniformMorphism;
use crate::products::{verify_upper, UpperProfile};
use crate::words::{letters_to_string, Letter, Word};

/// Conditions a candidate morphism must meet. Every test must be implied by
/// [`MorphismPredicate::accept`], so the cheaper ones only prune.
pub trait MorphismPredicate: Sync {
    /// Freeness condition defining the legal source words.
    fn source_spec(&self) -> FreenessSpec;

    /// `w` is a square-free prefix of the image of a legal source word that
    /// just grew by one letter.
    fn prefix_ok(&self, w: &[Letter]) -> bool;

    /// `w` is the image of a legal source word of at most
    /// [`early_word_len`](Self::early_word_len) letters.
    fn word_ok(&self, w: &[Letter]) -> bool;

    fn early_word_len(&self) -> usize {
        4
    }

    fn accept(&self, m: &UniformMorphism) -> bool;
}

/// Acceptance by [`verify_upper`] under one profile.
///
/// A square of period `q` in an image would give `pexp_{2,t} ≥ 4` for `|t| = q`
/// below the freeness period, which no certificate or pair scan admits, and
/// the freeness stage rules it out above. So square-freeness of images of
/// legal words is a valid early filter, alongside the freeness spec itself.
pub struct UpperPredicate {
    pub profile: UpperProfile,
    /// Images of all legal source words up to this length are checked before the full run.
    pub prefilter_len: usize,
}

impl UpperPredicate {
    pub fn new(profile: UpperProfile) -> Self {
        UpperPredicate {
            profile,
            prefilter_len: 4,
        }
    }
}

impl MorphismPredicate for UpperPredicate {
    fn source_spec(&self) -> FreenessSpec {
        self.profile.src_spec
    }

    fn prefix_ok(&self, w: &[Letter]) -> bool {
        suffix_violation(w, &self.profile.dst_spec).is_none()
    }

    fn word_ok(&self, w: &[Letter]) -> bool {
        is_free(w, &FreenessSpec::square_free()) && is_free(w, &self.profile.dst_spec)
    }

    fn accept(&self, m: &UniformMorphism) -> bool {
        images_square_free(m, self.profile.src_spec, self.prefilter_len)
            && verify_upper(m, &self.profile).is_ok_and(|v| v.passed)
    }
}

/// True iff the images of all `src`-legal words of length `len` are square-free.
pub fn images_square_free(m: &UniformMorphism, src: FreenessSpec, len: usize) -> bool {
    let Ok(words) = enumerate_free(m.arity() as u8, src, len, EnumerationMode::List) else {
        return false;
    };
    let mut image = Vec::new();
    words.words.iter().all(|w| {
        image.clear();
        m.apply_unchecked(w, &mut image);
        is_free(&image, &FreenessSpec::square_free())
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: usize,
    /// The next candidate word to evaluate; all words before it in DFS order are done.
    pub path: String,
    pub nodes: u64,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub k_range: std::ops::RangeInclusive<usize>,
    /// Force `m(0) > m(1) > m(2) > m(3)`.
    pub symmetry_breaking: bool,
    pub early_tests: bool,
    /// Stop with a checkpoint after this many nodes (over all `k`).
    pub node_limit: Option<u64>,
    /// Search only below this fixed prefix of `m(0123)`.
    pub prefix: Vec<Letter>,
    /// Continue an interrupted run.
    pub resume: Option<Checkpoint>,
    /// Keep searching after a solution and report all of them.
    pub all_solutions: bool,
    /// Emit a progress line every this many nodes (0 = never).
    pub progress_every: u64,
}

impl SearchConfig {
    pub fn new(k_range: std::ops::RangeInclusive<usize>) -> Self {
        SearchConfig {
            k_range,
            symmetry_breaking: true,
            early_tests: true,
            node_limit: None,
            prefix: Vec::new(),
            resume: None,
            all_solutions: false,
            progress_every: 0,
        }
    }
}

/// A machine-parseable progress record.
#[derive(Debug, Clone)]
pub struct Progress {
    pub k: usize,
    pub depth: usize,
    pub prefix: String,
    pub nodes: u64,
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={}, depth={}, prefix={}, nodes={}",
            self.k, self.depth, self.prefix, self.nodes
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KReport {
    pub k: usize,
    pub nodes: u64,
    pub candidates: u64,
    pub solutions: u64,
    /// True when every candidate for this `k` was examined.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    #[serde(serialize_with = "serialize_morphisms")]
    pub solutions: Vec<UniformMorphism>,
    pub per_k: Vec<KReport>,
    /// Present when the node limit stopped the search.
    pub checkpoint: Option<Checkpoint>,
}

fn serialize_morphisms<S: serde::Serializer>(
    ms: &[UniformMorphism],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(ms.iter().map(|m| m.to_text()))
}

impl SearchOutcome {
    pub fn first(&self) -> Option<&UniformMorphism> {
        self.solutions.first()
    }
}

struct Run<'a, P, F> {
    pred: &'a P,
    /// Legal source words from length 2 up to the predicate's early word length.
    early_words: Vec<Vec<Letter>>,
    cfg: &'a SearchConfig,
    k: usize,
    nodes: u64,
    total_nodes: u64,
    candidates: u64,
    progress: F,
}

impl<P: MorphismPredicate, F: FnMut(&Progress)> Run<'_, P, F> {
    fn block<'w>(&self, w: &'w [Letter], b: usize) -> &'w [Letter] {
        &w[b * self.k..(b + 1) * self.k]
    }

    /// All tests for the word that just grew by one letter, except the final predicate.
    fn ok(&self, w: &[Letter]) -> bool {
        let k = self.k;
        let n = w.len();
        if suffix_violation(w, &FreenessSpec::square_free()).is_some() || !self.pred.prefix_ok(w) {
            return false;
        }
        if self.cfg.symmetry_breaking && n > k {
            let b = (n - 1) / k;
            let cur = &w[b * k..];
            let prev = &w[(b - 1) * k..(b - 1) * k + cur.len()];
            // the current block must stay strictly below the previous one
            match cur.cmp(prev) {
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal if cur.len() == k => return false,
                _ => {}
            }
        }
        if self.cfg.early_tests && n > k {
            // m(a) followed by the growing image, for every earlier letter a
            let b = (n - 1) / k;
            let cur = &w[b * k..];
            let mut test = Vec::with_capacity(k + cur.len());
            for a in 0..b {
                test.clear();
                test.extend_from_slice(self.block(w, a));
                test.extend_from_slice(cur);
                if suffix_violation(&test, &FreenessSpec::square_free()).is_some()
                    || !self.pred.prefix_ok(&test)
                {
                    return false;
                }
            }
        }
        if self.cfg.early_tests && n.is_multiple_of(k) {
            let b = (n / k - 1) as Letter;
            let mut test = Vec::with_capacity(self.pred.early_word_len() * k);
            for src in self
                .early_words
                .iter()
                .filter(|s| s.iter().max() == Some(&b))
            {
                test.clear();
                for &a in src {
                    test.extend_from_slice(self.block(w, a as usize));
                }
                if !self.pred.word_ok(&test) {
                    return false;
                }
            }
        }
        true
    }

    fn morphism(&self, w: &[Letter]) -> UniformMorphism {
        let images = (0..4)
            .map(|b| Word::new(self.block(w, b).to_vec(), 3).expect("ternary"))
            .collect();
        UniformMorphism::new(images).expect("four images of length k")
    }

    /// DFS over `w`; returns a checkpoint if the node limit interrupted it.
    fn search(
        &mut self,
        start: Option<&[Letter]>,
        solutions: &mut Vec<UniformMorphism>,
    ) -> Option<Checkpoint> {
        let k = self.k;
        let fixed = self.cfg.prefix.len();
        let mut word: Vec<Letter> = Vec::with_capacity(4 * k);
        // the seed prefix is checked once, letter by letter
        for &a in &self.cfg.prefix {
            word.push(a);
            if !self.ok(&word) {
                return None;
            }
        }
        if word.len() == 4 * k {
            self.candidates += 1;
            let m = self.morphism(&word);
            if self.pred.accept(&m) {
                solutions.push(m);
            }
            return None;
        }
        // next[d] = next letter to try at position d
        let mut next: Vec<Letter> = vec![0; fixed + 1];
        if let Some(path) = start {
            let n = path.len();
            word = path[..n - 1].to_vec();
            next = path
                .iter()
                .enumerate()
                .map(|(d, &a)| if d + 1 < n { a + 1 } else { a })
                .collect();
        }
        loop {
            let d = word.len();
            if next[d] == 3 {
                if d <= fixed {
                    return None;
                }
                word.pop();
                next.pop();
                continue;
            }
            let a = next[d];
            if self
                .cfg
                .node_limit
                .is_some_and(|limit| self.total_nodes >= limit)
            {
                let mut path = word.clone();
                path.push(a);
                return Some(Checkpoint {
                    k,
                    path: letters_to_string(&path),
                    nodes: self.nodes,
                });
            }
            next[d] += 1;
            word.push(a);
            self.nodes += 1;
            self.total_nodes += 1;
            if self.cfg.progress_every > 0 && self.nodes.is_multiple_of(self.cfg.progress_every) {
                (self.progress)(&Progress {
                    k,
                    depth: word.len(),
                    prefix: letters_to_string(&word),
                    nodes: self.nodes,
                });
            }
            if !self.ok(&word) {
                word.pop();
                continue;
            }
            if word.len() == 4 * k {
                self.candidates += 1;
                let m = self.morphism(&word);
                word.pop();
                if self.pred.accept(&m) {
                    solutions.push(m);
                    if !self.cfg.all_solutions {
                        return None;
                    }
                }
                continue;
            }
            next.push(0);
        }
    }
}

/// Searches `k`-uniform morphisms for increasing `k` in the configured range.
pub fn search_uniform_morphism<P: MorphismPredicate>(
    pred: &P,
    cfg: &SearchConfig,
    progress: impl FnMut(&Progress),
) -> SearchOutcome {
    let mut outcome = SearchOutcome {
        solutions: Vec::new(),
        per_k: Vec::new(),
        checkpoint: None,
    };
    let early_words = (2..=pred.early_word_len())
        .flat_map(|len| {
            enumerate_free(4, pred.source_spec(), len, EnumerationMode::List)
                .map(|e| e.words)
                .unwrap_or_default()
                .into_iter()
                .map(|w| w.letters().to_vec())
        })
        .collect();
    let mut run = Run {
        pred,
        early_words,
        cfg,
        k: 0,
        nodes: 0,
        total_nodes: 0,
        candidates: 0,
        progress,
    };
    let resume_k = cfg.resume.as_ref().map(|c| c.k);
    for k in cfg.k_range.clone() {
        if k == 0 || resume_k.is_some_and(|rk| k < rk) {
            continue;
        }
        if cfg.prefix.len() > 4 * k {
            continue;
        }
        run.k = k;
        run.nodes = 0;
        run.candidates = 0;
        let start: Option<Vec<Letter>> = match &cfg.resume {
            Some(c) if c.k == k => {
                run.nodes = c.nodes;
                Some(c.path.bytes().map(|b| b - b'0').collect())
            }
            _ => None,
        };
        let before = outcome.solutions.len();
        let checkpoint = run.search(start.as_deref(), &mut outcome.solutions);
        let found = outcome.solutions.len() - before;
        outcome.per_k.push(KReport {
            k,
            nodes: run.nodes,
            candidates: run.candidates,
            solutions: found as u64,
            exhausted: checkpoint.is_none() && (found == 0 || cfg.all_solutions),
        });
        if checkpoint.is_some() {
            outcome.checkpoint = checkpoint;
            break;
        }
        if found > 0 && !cfg.all_solutions {
            break;
        }
    }
    outcome
}
