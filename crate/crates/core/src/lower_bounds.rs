//! Exhaustive searches behind the two lower bounds, and their lift to every `i`.
//!
//! Both searches are backtracking over ternary words with a factorial
//! constraint, so the tree is finite exactly when the constraint admits no
//! infinite word. The survivor counts, ending in 0, are the certificate.

use serde::Serialize;
use thiserror::Error;

use crate::dfs::{self, DfsOptions, Explorer, Goal, Halt, Step};
use crate::freeness::{suffix_violation, FreenessSpec};
use crate::products::{FactorIndex, Parity};
use crate::rational::Rational;
use crate::words::{is_primitive, least_rotation, Letter, Word};

/// Searches deeper than this are reported as not exhausted.
pub const DEPTH_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerBoundError {
    #[error("i = {i} does not fit the {parity} profile")]
    ParityMismatch { i: usize, parity: Parity },
    #[error("threshold {0} must exceed 3")]
    ThresholdTooSmall(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BacktrackReport {
    pub constraint: String,
    /// `counts[l]` = surviving words of length `l`, stopping after the first zero.
    pub counts: Vec<u64>,
    /// Longest surviving length.
    pub max_length: usize,
    pub exhausted: bool,
    pub node_count: u64,
    /// Length limit of the run.
    pub depth_cap: usize,
    /// False when the run stopped at the first word of the limit length.
    pub complete: bool,
    /// That first word, when one was requested and found.
    pub witness: Option<Word>,
}

impl BacktrackReport {
    fn from_outcome<T>(constraint: String, depth_cap: usize, out: dfs::DfsOutcome<T>) -> Self {
        let mut counts = out.counts;
        if let Some(zero) = counts.iter().position(|&c| c == 0) {
            counts.truncate(zero + 1);
        }
        let exhausted = counts.last() == Some(&0);
        let max_length = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        let witness = match out.halt {
            Some(Halt::Reached(w)) => Some(Word::new(w, 3).expect("ternary search")),
            _ => None,
        };
        BacktrackReport {
            constraint,
            counts,
            max_length,
            exhausted,
            node_count: out.nodes,
            depth_cap,
            complete: witness.is_none(),
            witness,
        }
    }

    /// True when some word of length `len` survives.
    pub fn alive_at(&self, len: usize) -> bool {
        self.witness.as_ref().is_some_and(|w| w.len() >= len)
            || self.counts.get(len).is_some_and(|&c| c > 0)
    }
}

/// The four patterns over `a, b, c`, as indices into an assignment.
const ODD_PATTERNS: [&[usize]; 4] = [
    &[0, 1, 2, 0, 1],
    &[2, 0, 1, 2],
    &[0, 1, 2, 1, 0, 1, 2],
    &[1, 0, 1, 2, 1],
];

/// The four patterns instantiated for each of the six bijections `{a,b,c} → {0,1,2}`;
/// `[perm * 4 + pattern]`.
fn odd_pattern_words() -> Vec<Vec<Letter>> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    perms
        .iter()
        .flat_map(|perm| {
            ODD_PATTERNS
                .iter()
                .map(move |pat| pat.iter().map(|&x| perm[x]).collect())
        })
        .collect()
}

/// Flags set means "contains"; forbidden when patterns 0 and 1, or 2 and 3,
/// of the same assignment are both present.
fn odd_flags_forbidden(flags: u32) -> bool {
    (0..6).any(|perm| {
        let f = flags >> (perm * 4);
        f & 0b0011 == 0b0011 || f & 0b1100 == 0b1100
    })
}

struct OddSearch {
    patterns: Vec<Vec<Letter>>,
    pairs: bool,
}

impl Explorer for OddSearch {
    type State = u32;
    type Halt = std::convert::Infallible;

    fn alphabet(&self) -> u8 {
        3
    }

    fn step(&self, word: &[Letter], flags: &u32) -> Step<u32, Self::Halt> {
        if suffix_violation(word, &FreenessSpec::square_free()).is_some() {
            return Step::Prune;
        }
        if !self.pairs {
            return Step::Descend(0);
        }
        let mut flags = *flags;
        for (bit, pat) in self.patterns.iter().enumerate() {
            if word.ends_with(pat) {
                flags |= 1 << bit;
            }
        }
        if odd_flags_forbidden(flags) {
            Step::Prune
        } else {
            Step::Descend(flags)
        }
    }
}

/// Full rescan form of the odd-case constraint: square-free, and no forbidden
/// pattern pair under any assignment.
pub fn odd_constraint_holds(w: &[Letter]) -> bool {
    if crate::freeness::find_violation(w, &FreenessSpec::square_free()).is_some() {
        return false;
    }
    let contains = |p: &[Letter]| w.windows(p.len()).any(|x| x == p);
    let flags = odd_pattern_words()
        .iter()
        .enumerate()
        .fold(
            0u32,
            |acc, (bit, p)| if contains(p) { acc | 1 << bit } else { acc },
        );
    !odd_flags_forbidden(flags)
}

const ODD_CONSTRAINT: &str =
    "square-free ternary, and for distinct a,b,c not both abcab and cabc, not both abcbabc and babcb";

/// Backtracking for the odd case with the length limit and goal chosen by the caller.
/// With `pair_constraints` off this is plain square-free enumeration.
pub fn search_lower_odd(pair_constraints: bool, max_len: usize, goal: Goal) -> BacktrackReport {
    let search = OddSearch {
        patterns: odd_pattern_words(),
        pairs: pair_constraints,
    };
    let mut opts = DfsOptions::exhaust(max_len);
    opts.goal = goal;
    let out = dfs::explore(&search, 0, opts);
    let constraint = if pair_constraints {
        ODD_CONSTRAINT.to_string()
    } else {
        "square-free ternary".to_string()
    };
    BacktrackReport::from_outcome(constraint, max_len, out)
}

/// No infinite square-free ternary word avoids the forbidden pattern pairs.
pub fn verify_lower_odd() -> BacktrackReport {
    search_lower_odd(true, DEPTH_CAP, Goal::Exhaust)
}

/// Longest suffix of `w` with period `q` (at least `q` when `q ≤ |w|`).
fn suffix_run(w: &[Letter], q: usize) -> usize {
    let n = w.len();
    let mut len = q;
    while len < n && w[n - 1 - len] == w[n - 1 - len + q] {
        len += 1;
    }
    len
}

/// Least rotations of the primitive roots of long periodic suffixes of `w`:
/// suffixes with period `q` and length at least `threshold · q / 2`.
fn long_suffix_classes(w: &[Letter], threshold: Rational) -> Vec<Vec<Letter>> {
    let n = w.len();
    let mut out = Vec::new();
    for q in 1..=n {
        // a run of length >= threshold*q/2 > q needs q < n
        if threshold.cmp_lengths(2 * n, q).is_lt() {
            break;
        }
        if q == n {
            continue;
        }
        let run = suffix_run(w, q);
        let t = &w[n - q..];
        if !threshold.cmp_lengths(2 * run, q).is_lt() && is_primitive(t) {
            out.push(least_rotation(t));
        }
    }
    out
}

/// True iff two factors of the indexed word form a product `uv` with period
/// `|t|` and length at least `threshold · |t|`, for some class `t` in the list.
fn two_product_hits(idx: &FactorIndex, classes: &[Vec<Letter>], threshold: Rational) -> bool {
    classes.iter().any(|t| {
        let q = t.len();
        let m: Vec<usize> = (0..q)
            .map(|phase| idx.longest_match(t, phase).expect("exact index"))
            .collect();
        (0..q).any(|phase| {
            let len = m[phase] + m[(phase + m[phase]) % q];
            !threshold.cmp_lengths(len, q).is_lt()
        })
    })
}

/// Two-factor check for the even case.
///
/// If `uv` has period `q` and length at least `T·q`, one of `u`, `v` is a
/// factor with period `q` and length at least `T·q/2`. Each such factor was
/// a suffix when it first appeared, so collecting the classes of long periodic
/// suffixes along the search path and testing the best two-factor cover of
/// `t^ω` for each of them finds every violation.
struct EvenSearch {
    threshold: Rational,
}

impl Explorer for EvenSearch {
    /// Classes registered along the path, sorted.
    type State = Vec<Vec<Letter>>;
    type Halt = std::convert::Infallible;

    fn alphabet(&self) -> u8 {
        3
    }

    fn step(&self, word: &[Letter], parent: &Self::State) -> Step<Self::State, Self::Halt> {
        let mut classes = parent.clone();
        for t in long_suffix_classes(word, self.threshold) {
            if let Err(pos) = classes.binary_search(&t) {
                classes.insert(pos, t);
            }
        }
        let idx = FactorIndex::from_words([word], 3);
        if two_product_hits(&idx, &classes, self.threshold) {
            Step::Prune
        } else {
            Step::Descend(classes)
        }
    }
}

/// Whole-word form of the even-case check, replaying the suffix registrations.
pub fn two_product_free(w: &[Letter], threshold: Rational) -> bool {
    let mut classes: Vec<Vec<Letter>> = (1..=w.len())
        .flat_map(|end| long_suffix_classes(&w[..end], threshold))
        .collect();
    classes.sort();
    classes.dedup();
    let idx = FactorIndex::from_words([w], 3);
    !two_product_hits(&idx, &classes, threshold)
}

/// Backtracking for the even case with the length limit and goal chosen by the caller.
pub fn search_lower_even(
    threshold: Rational,
    max_len: usize,
    goal: Goal,
) -> Result<BacktrackReport, LowerBoundError> {
    if threshold <= Rational::from_integer(3) {
        return Err(LowerBoundError::ThresholdTooSmall(threshold));
    }
    let mut opts = DfsOptions::exhaust(max_len);
    opts.goal = goal;
    let out = dfs::explore(&EvenSearch { threshold }, Vec::new(), opts);
    let constraint = format!("ternary, no two factors u,v with uv of exponent >= {threshold}");
    Ok(BacktrackReport::from_outcome(constraint, max_len, out))
}

/// Every ternary word long enough has two factors whose product has exponent at least `threshold`.
pub fn verify_lower_even(threshold: Rational) -> Result<BacktrackReport, LowerBoundError> {
    search_lower_even(threshold, DEPTH_CAP, Goal::Exhaust)
}

/// Lifts the `i = 2` (even) or `i = 3` (odd) bound to every `i` of that parity:
/// `3(i/2 − 1) + base` for even `i`, `3(i − 1)/2 + base` for odd `i ≥ 3`.
pub fn lift_lower_bound(
    base: Rational,
    i: usize,
    parity: Parity,
) -> Result<Rational, LowerBoundError> {
    let fits = match parity {
        Parity::Even => i >= 2 && i.is_multiple_of(2),
        Parity::Odd => i >= 3 && i % 2 == 1,
    };
    if !fits {
        return Err(LowerBoundError::ParityMismatch { i, parity });
    }
    let steps = match parity {
        Parity::Even => i / 2 - 1,
        Parity::Odd => (i - 1) / 2,
    };
    Ok(Rational::from_integer(3 * steps as i64) + base)
}

/// Base values of the two lower bounds: `RT_2(3) ≥ 13/4` and `RT_3(3) ≥ 14/3`,
/// the latter from products `(uv)^j u` with exponent `3j + 5/3`.
pub fn lower_base(parity: Parity) -> Rational {
    match parity {
        Parity::Even => Rational::new(13, 4),
        Parity::Odd => Rational::new(5, 3),
    }
}

/// `RT_i(3)`: `7/4` for `i = 1`, `3i/2 + 1/4` for even `i`, `3i/2 + 1/6` for odd `i ≥ 3`.
pub fn theorem_value(i: usize) -> Option<Rational> {
    match i {
        0 => None,
        1 => Some(Rational::new(7, 4)),
        _ => {
            let parity = Parity::of(i);
            lift_lower_bound(lower_base(parity), i, parity).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::full_exponent;
    use std::collections::BTreeSet;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Every pair of factors (empty ones included), exponent of the product at its smallest period.
    fn brute_two_product_free(w: &[Letter], threshold: Rational) -> bool {
        let mut factors = BTreeSet::new();
        for i in 0..=w.len() {
            for j in i..=w.len() {
                factors.insert(&w[i..j]);
            }
        }
        for u in &factors {
            for v in &factors {
                if u.len() + v.len() == 0 {
                    continue;
                }
                let uv: Vec<Letter> = u.iter().chain(v.iter()).copied().collect();
                if full_exponent(&uv).unwrap() >= threshold {
                    return false;
                }
            }
        }
        true
    }

    fn all_words(len: usize) -> impl Iterator<Item = Vec<Letter>> {
        (0..3usize.pow(len as u32)).map(move |mut n| {
            (0..len)
                .map(|_| {
                    let d = n % 3;
                    n /= 3;
                    d as Letter
                })
                .collect()
        })
    }

    #[test]
    fn lift_examples() {
        assert_eq!(
            lift_lower_bound(r(13, 4), 4, Parity::Even).unwrap(),
            r(25, 4)
        );
        assert_eq!(lift_lower_bound(r(5, 3), 3, Parity::Odd).unwrap(), r(14, 3));
        assert_eq!(
            lift_lower_bound(r(13, 4), 2, Parity::Even).unwrap(),
            r(13, 4)
        );
        assert!(lift_lower_bound(r(13, 4), 3, Parity::Even).is_err());
        assert!(lift_lower_bound(r(5, 3), 1, Parity::Odd).is_err());
        assert!(lift_lower_bound(r(5, 3), 4, Parity::Odd).is_err());
    }

    #[test]
    fn theorem_values_exceed_three_halves_i() {
        for i in 2..40 {
            let v = theorem_value(i).unwrap();
            assert!(v > r(3 * i as i64, 2));
            let c = if i % 2 == 0 { r(1, 4) } else { r(1, 6) };
            assert_eq!(v, r(3 * i as i64, 2) + c);
        }
        assert_eq!(theorem_value(1), Some(r(7, 4)));
        assert_eq!(theorem_value(0), None);
    }

    #[test]
    fn odd_patterns_cover_all_assignments() {
        let pats = odd_pattern_words();
        assert_eq!(pats.len(), 24);
        assert_eq!(pats[0], vec![0, 1, 2, 0, 1]);
        assert_eq!(pats[1], vec![2, 0, 1, 2]);
        // distinct assignments give distinct instances
        assert_eq!(pats.iter().collect::<BTreeSet<_>>().len(), 24);
    }

    #[test]
    fn odd_search_rejects_powers_and_pairs() {
        assert!(!odd_constraint_holds(&[0, 1, 2, 0, 1, 2, 0, 1, 2]));
        // abcab and cabc under a=0, b=1, c=2
        assert!(odd_constraint_holds(&[0, 1, 2, 0, 1]));
        assert!(!odd_constraint_holds(&[0, 1, 2, 0, 1, 0, 2, 0, 1, 2]));
    }

    #[test]
    fn odd_dfs_matches_bfs_rescan() {
        let dfs = verify_lower_odd();
        assert!(dfs.exhausted);
        let bfs = dfs::bfs_counts(3, DEPTH_CAP, odd_constraint_holds);
        assert_eq!(dfs.counts, bfs);
    }

    #[test]
    fn square_free_words_survive_to_100() {
        let r = search_lower_odd(false, 100, Goal::FirstAt(100));
        assert!(r.alive_at(100));
        let w = r.witness.unwrap();
        assert!(crate::freeness::is_free(&w, &FreenessSpec::square_free()));
    }

    #[test]
    fn even_detector_matches_brute_force() {
        for threshold in [r(13, 4), r(10, 3), r(7, 2), r(4, 1)] {
            for len in 0..=8 {
                for w in all_words(len) {
                    assert_eq!(
                        two_product_free(&w, threshold),
                        brute_two_product_free(&w, threshold),
                        "{w:?} {threshold}"
                    );
                }
            }
        }
    }

    #[test]
    fn even_dfs_matches_bfs_brute_force_to_12() {
        for threshold in [r(13, 4), r(7, 2)] {
            let dfs = search_lower_even(threshold, 12, Goal::Exhaust).unwrap();
            let bfs = dfs::bfs_counts(3, 12, |w| brute_two_product_free(w, threshold));
            let mut dfs_counts = dfs.counts.clone();
            dfs_counts.resize(bfs.len(), 0);
            assert_eq!(dfs_counts, bfs, "{threshold}");
        }
    }

    #[test]
    fn even_threshold_validation() {
        assert!(matches!(
            verify_lower_even(r(3, 1)),
            Err(LowerBoundError::ThresholdTooSmall(_))
        ));
    }
}
