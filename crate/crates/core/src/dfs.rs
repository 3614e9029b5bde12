//! Prefix-sharded depth-first search over words.
//!
//! The tree is cut at a fixed shard depth: a sequential DFS produces the
//! ordered list of frontier prefixes, each shard is explored independently on
//! the rayon pool, and results are merged in prefix order. Shards are fixed by
//! depth, not by thread count, so every merged count, witness and leaf list is
//! the same whatever the pool size. A shard that halts cancels only the shards
//! after it.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::words::Letter;

/// Outcome of extending a word by one letter.
pub enum Step<S, T> {
    /// Keep the word and explore below it with this state.
    Descend(S),
    /// Reject the word and its whole subtree.
    Prune,
    /// Stop the whole search; the first halt in DFS order wins.
    Halt(T),
}

/// A search tree over words on `alphabet()` letters, tried in increasing order.
pub trait Explorer: Sync {
    type State: Clone + Send + Sync;
    type Halt: Send;

    fn alphabet(&self) -> u8;

    /// `word` ends with the letter just appended; `parent` is the state of `word` minus that letter.
    fn step(&self, word: &[Letter], parent: &Self::State) -> Step<Self::State, Self::Halt>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    /// Explore the whole tree up to the length cap.
    Exhaust,
    /// Stop at the first word of exactly this length.
    FirstAt(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct DfsOptions {
    pub max_len: usize,
    pub goal: Goal,
    pub collect_leaves: bool,
    pub shard_depth: usize,
}

impl DfsOptions {
    pub fn exhaust(max_len: usize) -> Self {
        DfsOptions {
            max_len,
            goal: Goal::Exhaust,
            collect_leaves: false,
            shard_depth: 6,
        }
    }

    pub fn first_at(len: usize) -> Self {
        DfsOptions {
            max_len: len,
            goal: Goal::FirstAt(len),
            collect_leaves: false,
            shard_depth: 6,
        }
    }
}

#[derive(Debug)]
pub enum Halt<T> {
    /// The explorer halted on this word.
    Found(Vec<Letter>, T),
    /// The goal length was reached by this word.
    Reached(Vec<Letter>),
}

#[derive(Debug)]
pub struct DfsOutcome<T> {
    /// `counts[l]` = accepted words of length `l` seen (complete unless halted);
    /// the starting prefix counts as one.
    pub counts: Vec<u64>,
    /// Number of one-letter extensions evaluated.
    pub nodes: u64,
    /// Accepted words of length `max_len`, in lexicographic order (when collected).
    pub leaves: Vec<Vec<Letter>>,
    pub halt: Option<Halt<T>>,
}

impl<T> DfsOutcome<T> {
    fn empty(max_len: usize) -> Self {
        DfsOutcome {
            counts: vec![0; max_len + 1],
            nodes: 0,
            leaves: Vec::new(),
            halt: None,
        }
    }

    fn absorb(&mut self, other: DfsOutcome<T>) {
        for (c, o) in self.counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        self.nodes += other.nodes;
        self.leaves.extend(other.leaves);
        self.halt = other.halt;
    }
}

enum FrontierItem<S, T> {
    Shard(Vec<Letter>, S),
    Halted(Halt<T>),
}

struct Frame<S> {
    state: S,
    next: Letter,
}

const CANCEL_POLL: u64 = 1 << 12;

/// DFS below `prefix` down to `limit` letters. Words of length `limit` are
/// recorded in `frontier` (when given) instead of being expanded further.
#[allow(clippy::too_many_arguments)]
fn explore_from<E: Explorer>(
    explorer: &E,
    prefix: Vec<Letter>,
    root: E::State,
    limit: usize,
    opts: &DfsOptions,
    mut frontier: Option<&mut Vec<FrontierItem<E::State, E::Halt>>>,
    cancel: Option<(&AtomicUsize, usize)>,
) -> Option<DfsOutcome<E::Halt>> {
    let k = explorer.alphabet();
    let mut out = DfsOutcome::empty(opts.max_len);
    let mut word = prefix;
    let base = word.len();
    if word.len() >= limit {
        return Some(out);
    }
    let mut stack = vec![Frame {
        state: root,
        next: 0,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next == k || word.len() >= limit {
            stack.pop();
            if stack.is_empty() {
                break;
            }
            word.pop();
            continue;
        }
        let letter = top.next;
        top.next += 1;
        word.push(letter);
        out.nodes += 1;
        if let Some((best, me)) = cancel {
            if out.nodes % CANCEL_POLL == 0 && best.load(Ordering::Relaxed) < me {
                return None;
            }
        }
        match explorer.step(&word, &top.state) {
            Step::Prune => {
                word.pop();
            }
            Step::Halt(t) => {
                let halt = Halt::Found(word.clone(), t);
                match frontier.as_deref_mut() {
                    Some(items) => {
                        items.push(FrontierItem::Halted(halt));
                        word.pop();
                        // later frontier items can never be reached first
                        return Some(out);
                    }
                    None => {
                        out.halt = Some(halt);
                        return Some(out);
                    }
                }
            }
            Step::Descend(state) => {
                let len = word.len();
                out.counts[len] += 1;
                if opts.collect_leaves && len == opts.max_len {
                    out.leaves.push(word.clone());
                }
                if opts.goal == Goal::FirstAt(len) {
                    let halt = Halt::Reached(word.clone());
                    match frontier.as_deref_mut() {
                        Some(items) => items.push(FrontierItem::Halted(halt)),
                        None => out.halt = Some(halt),
                    }
                    return Some(out);
                }
                if len == limit && len < opts.max_len {
                    if let Some(items) = frontier.as_deref_mut() {
                        // counted here; the shard explores strictly below it
                        items.push(FrontierItem::Shard(word.clone(), state));
                        word.pop();
                        continue;
                    }
                }
                stack.push(Frame { state, next: 0 });
            }
        }
    }
    debug_assert!(word.len() == base);
    Some(out)
}

/// Runs the search from the empty word with the given root state.
pub fn explore<E: Explorer>(explorer: &E, root: E::State, opts: DfsOptions) -> DfsOutcome<E::Halt> {
    explore_below(explorer, Vec::new(), root, opts)
}

/// Runs the search below a fixed prefix (whose state is `root`).
pub fn explore_below<E: Explorer>(
    explorer: &E,
    prefix: Vec<Letter>,
    root: E::State,
    opts: DfsOptions,
) -> DfsOutcome<E::Halt> {
    let base = prefix.len();
    let split = (base + opts.shard_depth).min(opts.max_len);
    if split <= base {
        let mut out = explore_from(explorer, prefix, root, opts.max_len, &opts, None, None)
            .expect("uncancellable run");
        out.counts[base] += 1;
        return out;
    }
    let mut items = Vec::new();
    let mut out = explore_from(explorer, prefix, root, split, &opts, Some(&mut items), None)
        .expect("frontier pass is never cancelled");
    out.counts[base] += 1;
    if items.is_empty() {
        return out;
    }
    let best = AtomicUsize::new(usize::MAX);
    let results: Vec<Option<DfsOutcome<E::Halt>>> = items
        .into_par_iter()
        .enumerate()
        .map(|(idx, item)| match item {
            FrontierItem::Halted(halt) => {
                best.fetch_min(idx, Ordering::Relaxed);
                let mut o = DfsOutcome::empty(opts.max_len);
                o.halt = Some(halt);
                Some(o)
            }
            FrontierItem::Shard(prefix, state) => {
                if best.load(Ordering::Relaxed) < idx {
                    return None;
                }
                let r = explore_from(
                    explorer,
                    prefix,
                    state,
                    opts.max_len,
                    &opts,
                    None,
                    Some((&best, idx)),
                );
                if let Some(o) = &r {
                    if o.halt.is_some() {
                        best.fetch_min(idx, Ordering::Relaxed);
                    }
                }
                r
            }
        })
        .collect();
    for r in results {
        // every shard before the first halt ran to completion
        let r = r.expect("shard ahead of the first halt was cancelled");
        let halted = r.halt.is_some();
        out.absorb(r);
        if halted {
            break;
        }
    }
    out
}

/// Level-by-level survivor counts under a from-scratch acceptance test.
///
/// Independent of [`explore`]; used as an oracle. Stops after the first empty
/// level or at `max_len`.
pub fn bfs_counts(
    alphabet: u8,
    max_len: usize,
    accept: impl Fn(&[Letter]) -> bool + Sync,
) -> Vec<u64> {
    let mut counts = vec![1u64];
    let mut level: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        level = level
            .par_iter()
            .flat_map_iter(|w| {
                (0..alphabet).filter_map(|a| {
                    let mut x = w.clone();
                    x.push(a);
                    accept(&x).then_some(x)
                })
            })
            .collect();
        counts.push(level.len() as u64);
        if level.is_empty() {
            break;
        }
    }
    counts
}
