//! Subsequence order, LCS, and extraction of the invariant core.
//!
//! The core of a family of sequences is the set of `≼`-maximal sequences that
//! embed (not necessarily contiguously) into every member. Maximal members can
//! have different lengths, so the core is generally larger than the LCS set.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::abstraction::{apply_abstraction, Abstraction, Symbol};
use crate::error::MiningError;
use crate::trajectory::{Pair, SuccessSet};

/// Default cap on distinct common subsequences explored.
pub const DEFAULT_CORE_BUDGET: usize = 1_000_000;

/// Largest family accepted by the brute-force oracle.
pub const ORACLE_MAX_SEQUENCES: usize = 6;
/// Longest sequence accepted by the brute-force oracle.
pub const ORACLE_MAX_LEN: usize = 12;

/// `u ≼ v`: greedy two-pointer scan.
pub fn is_subsequence<S: PartialEq>(u: &[S], v: &[S]) -> bool {
    let mut it = v.iter();
    u.iter().all(|x| it.any(|y| y == x))
}

/// Length of a longest common subsequence and the lexicographically least
/// witness among all longest ones.
pub fn lcs_pair<S: Ord + Clone>(x: &[S], y: &[S]) -> (usize, Vec<S>) {
    let (n, m) = (x.len(), y.len());
    // suffix table: table[i][j] = LCS(x[i..], y[j..])
    let w = m + 1;
    let mut table = vec![0usize; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i * w + j] = if x[i] == y[j] {
                table[(i + 1) * w + j + 1] + 1
            } else {
                table[(i + 1) * w + j].max(table[i * w + j + 1])
            };
        }
    }
    let len = table[0];

    // candidate symbols in increasing order
    let alphabet: BTreeSet<&S> = x.iter().filter(|s| y.contains(s)).collect();
    let mut witness = Vec::with_capacity(len);
    let (mut i, mut j) = (0, 0);
    while witness.len() < len {
        let need = len - witness.len();
        let mut advanced = false;
        for &c in &alphabet {
            let Some(pi) = x[i..].iter().position(|s| s == c).map(|p| p + i) else {
                continue;
            };
            let Some(pj) = y[j..].iter().position(|s| s == c).map(|p| p + j) else {
                continue;
            };
            if table[(pi + 1) * w + pj + 1] + 1 == need {
                witness.push(c.clone());
                i = pi + 1;
                j = pj + 1;
                advanced = true;
                break;
            }
        }
        debug_assert!(advanced, "backtrack lost the LCS");
        if !advanced {
            break;
        }
    }
    (len, witness)
}

const NONE: u32 = u32::MAX;

/// Next-occurrence automaton over interned symbols.
///
/// `next[i][p * m + c]` is the smallest `q >= p` with `seqs[i][q] == c`. Each
/// distinct common subsequence corresponds to exactly one run of the
/// product automaton (its leftmost embedding in every input).
struct Automaton {
    alphabet: usize,
    next: Vec<Vec<u32>>,
}

impl Automaton {
    fn new(seqs: &[Vec<u32>], alphabet: usize) -> Self {
        let next = seqs
            .iter()
            .map(|seq| {
                let mut table = vec![NONE; (seq.len() + 1) * alphabet];
                for p in (0..seq.len()).rev() {
                    let (head, tail) = table.split_at_mut((p + 1) * alphabet);
                    head[p * alphabet..].copy_from_slice(&tail[..alphabet]);
                    let c = seq[p] as usize;
                    if c < alphabet {
                        head[p * alphabet + c] = p as u32;
                    }
                }
                table
            })
            .collect();
        Automaton { alphabet, next }
    }

    fn step(&self, pos: &[u32], c: u32, out: &mut [u32]) -> bool {
        for (i, (&p, o)) in pos.iter().zip(out.iter_mut()).enumerate() {
            let q = self.next[i][p as usize * self.alphabet + c as usize];
            if q == NONE {
                return false;
            }
            *o = q + 1;
        }
        true
    }

    fn run(&self, start: &[u32], word: &[u32], scratch: &mut Vec<u32>) -> bool {
        scratch.clear();
        scratch.extend_from_slice(start);
        let mut tmp = scratch.clone();
        for &c in word {
            if !self.step(scratch, c, &mut tmp) {
                return false;
            }
            std::mem::swap(scratch, &mut tmp);
        }
        true
    }

    /// No single-symbol insertion into `u` is common. Since common
    /// subsequences are closed under deletion, this is `≼`-maximality.
    fn is_maximal(&self, u: &[u32]) -> bool {
        let k = self.next.len();
        let mut prefix_pos: Vec<Vec<u32>> = Vec::with_capacity(u.len() + 1);
        prefix_pos.push(vec![0; k]);
        for &c in u {
            let mut out = vec![0; k];
            let ok = self.step(prefix_pos.last().unwrap(), c, &mut out);
            debug_assert!(ok, "candidate is not common");
            prefix_pos.push(out);
        }
        let mut after = vec![0u32; k];
        let mut scratch = Vec::with_capacity(k);
        for (i, pos) in prefix_pos.iter().enumerate() {
            for c in 0..self.alphabet as u32 {
                if self.step(pos, c, &mut after) && self.run(&after, &u[i..], &mut scratch) {
                    return false;
                }
            }
        }
        true
    }
}

/// Interns the symbols common to every sequence; others can never be part of
/// a common subsequence and are mapped past the alphabet.
fn intern<S: Ord + Clone>(seqs: &[Vec<S>]) -> (Vec<S>, Vec<Vec<u32>>) {
    let mut common: BTreeSet<&S> = seqs[0].iter().collect();
    for s in &seqs[1..] {
        let here: BTreeSet<&S> = s.iter().collect();
        common.retain(|x| here.contains(x));
    }
    let alphabet: Vec<S> = common.into_iter().cloned().collect();
    let index: BTreeMap<&S, u32> = alphabet.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
    let outside = alphabet.len() as u32;
    let encoded = seqs.iter().map(|s| s.iter().map(|x| index.get(x).copied().unwrap_or(outside)).collect()).collect();
    (alphabet, encoded)
}

fn enumerate_interned(auto: &Automaton, k: usize, budget: usize) -> Result<Vec<Vec<u32>>, MiningError> {
    let mut found = Vec::new();
    let mut stack: Vec<(Vec<u32>, Vec<u32>)> = vec![(vec![0; k], Vec::new())];
    while let Some((pos, word)) = stack.pop() {
        let mut child = vec![0u32; k];
        for c in (0..auto.alphabet as u32).rev() {
            if auto.step(&pos, c, &mut child) {
                let mut w = word.clone();
                w.push(c);
                stack.push((child.clone(), w));
            }
        }
        found.push(word);
        if found.len() + stack.len() > budget {
            return Err(MiningError::BudgetExceeded { budget });
        }
    }
    Ok(found)
}

/// Every `u` with `u ≼ s` for all `s` in `seqs`, the empty sequence included.
///
/// Runs a depth-first search over the product of next-occurrence automata, so
/// each distinct common subsequence is produced once. Fails with
/// `BudgetExceeded` once the result plus frontier passes `budget`.
pub fn common_subsequences<S: Ord + Clone>(seqs: &[Vec<S>], budget: usize) -> Result<BTreeSet<Vec<S>>, MiningError> {
    if seqs.is_empty() {
        return Err(MiningError::EmptySuccessSet);
    }
    let (alphabet, encoded) = intern(seqs);
    let auto = Automaton::new(&encoded, alphabet.len());
    let words = enumerate_interned(&auto, seqs.len(), budget)?;
    Ok(words.into_iter().map(|w| w.into_iter().map(|c| alphabet[c as usize].clone()).collect()).collect())
}

fn canonical_sort<S: Ord>(members: &mut [Vec<S>]) {
    members.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
}

/// The nonempty `≼`-maximal common subsequences, in canonical order
/// (longest first, then lexicographic).
///
/// Empty when the inputs share no symbol.
pub fn maximal_common_subsequences<S: Ord + Clone>(seqs: &[Vec<S>], budget: usize) -> Result<Vec<Vec<S>>, MiningError> {
    if seqs.is_empty() {
        return Err(MiningError::EmptySuccessSet);
    }
    let distinct: Vec<Vec<S>> = seqs.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let (alphabet, encoded) = intern(&distinct);
    let auto = Automaton::new(&encoded, alphabet.len());
    let words = enumerate_interned(&auto, distinct.len(), budget)?;
    let mut members: Vec<Vec<S>> = words
        .into_iter()
        .filter(|w| !w.is_empty() && auto.is_maximal(w))
        .map(|w| w.into_iter().map(|c| alphabet[c as usize].clone()).collect())
        .collect();
    canonical_sort(&mut members);
    Ok(members)
}

/// Keeps the members not strictly embedded in another, deduplicated and in
/// canonical order.
fn maximalize<S: Ord + Clone>(members: Vec<Vec<S>>) -> Vec<Vec<S>> {
    let mut distinct: Vec<Vec<S>> = members.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    canonical_sort(&mut distinct);
    let mut kept: Vec<Vec<S>> = Vec::new();
    for u in distinct {
        if !kept.iter().any(|w| is_subsequence(&u, w)) {
            kept.push(u);
        }
    }
    kept
}

/// Exhaustive oracle: all subsequences of the shortest input, filtered to
/// the common ones, then to the maximal ones.
pub fn brute_force_maximal<S: Ord + Clone>(seqs: &[Vec<S>]) -> Result<Vec<Vec<S>>, MiningError> {
    if seqs.is_empty() {
        return Err(MiningError::EmptySuccessSet);
    }
    let longest = seqs.iter().map(Vec::len).max().unwrap_or(0);
    if seqs.len() > ORACLE_MAX_SEQUENCES || longest > ORACLE_MAX_LEN {
        return Err(MiningError::OracleScale {
            max_sequences: ORACLE_MAX_SEQUENCES,
            max_len: ORACLE_MAX_LEN,
            sequences: seqs.len(),
            longest,
        });
    }
    let shortest = seqs.iter().min_by_key(|s| s.len()).unwrap();
    let n = shortest.len();
    let mut common = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let u: Vec<S> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| shortest[i].clone()).collect();
        if seqs.iter().all(|s| is_subsequence(&u, s)) {
            common.insert(u);
        }
    }
    Ok(maximalize(common.into_iter().collect()))
}

/// `Core_φ(𝒮)`: canonical list of `≼`-maximal common subsequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreSet {
    members: Vec<Vec<Symbol>>,
    alphabet: String,
    collapse_runs: bool,
    strip_terminal: bool,
}

impl CoreSet {
    pub fn members(&self) -> &[Vec<Symbol>] {
        &self.members
    }

    pub fn alphabet(&self) -> &str {
        &self.alphabet
    }

    pub fn strip_terminal(&self) -> bool {
        self.strip_terminal
    }

    pub fn collapse_runs(&self) -> bool {
        self.collapse_runs
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, member: &[Symbol]) -> bool {
        self.members.iter().any(|m| m == member)
    }

    /// Some member has `pattern` as a subsequence.
    pub fn covers(&self, pattern: &[Symbol]) -> bool {
        self.members.iter().any(|m| is_subsequence(pattern, m))
    }

    /// Literal set intersection of the members, canonically ordered.
    pub fn intersection(&self, other: &CoreSet) -> Vec<Vec<Symbol>> {
        self.members.iter().filter(|m| other.contains(m)).cloned().collect()
    }
}

fn abstracted(successes: &SuccessSet, phi: &Abstraction) -> Result<Vec<Vec<Symbol>>, MiningError> {
    if successes.is_empty() {
        return Err(MiningError::EmptySuccessSet);
    }
    let images: BTreeSet<Vec<Symbol>> =
        successes.iter().map(|t| apply_abstraction(t, phi)).collect::<Result<_, _>>()?;
    Ok(images.into_iter().collect())
}

fn finish(
    members: Vec<Vec<Symbol>>,
    successes: &SuccessSet,
    phi: &Abstraction,
    strip_terminal: bool,
) -> Result<CoreSet, MiningError> {
    let members = if strip_terminal {
        let terminal = phi.terminal_images(successes)?;
        let stripped = members
            .into_iter()
            .map(|m| m.into_iter().filter(|s| !terminal.contains(s)).collect::<Vec<_>>())
            .filter(|m| !m.is_empty())
            .collect();
        maximalize(stripped)
    } else {
        members
    };
    Ok(CoreSet { members, alphabet: phi.label().to_string(), collapse_runs: phi.collapse_runs(), strip_terminal })
}

/// `Core_φ(𝒮)` with the default budget.
pub fn core(successes: &SuccessSet, phi: &Abstraction, strip_terminal: bool) -> Result<CoreSet, MiningError> {
    core_with(successes, phi, strip_terminal, DEFAULT_CORE_BUDGET)
}

/// Applies `φ` to every success, enumerates the common subsequences and keeps
/// the maximal ones. With `strip_terminal`, the images of terminal pairs are
/// removed from each member afterwards and the result is re-maximalized;
/// members that become empty are dropped.
pub fn core_with(
    successes: &SuccessSet,
    phi: &Abstraction,
    strip_terminal: bool,
    budget: usize,
) -> Result<CoreSet, MiningError> {
    let seqs = abstracted(successes, phi)?;
    let members = maximal_common_subsequences(&seqs, budget)?;
    finish(members, successes, phi, strip_terminal)
}

/// Oracle twin of [`core`], computed by [`brute_force_maximal`].
pub fn brute_force_core(
    successes: &SuccessSet,
    phi: &Abstraction,
    strip_terminal: bool,
) -> Result<CoreSet, MiningError> {
    let seqs = abstracted(successes, phi)?;
    let members = brute_force_maximal(&seqs)?;
    finish(members, successes, phi, strip_terminal)
}

/// A symbol shared by every success.
///
/// Under the identity abstraction this is the terminal pair `(g, TERMINAL)` of
/// the unique goal. Under a proper abstraction it is the first non-terminal
/// symbol common to all images, falling back to the terminal image.
///
/// # Panics
///
/// If the unique-goal terminal pair is missing from some success, which would
/// mean the success set is malformed.
pub fn core_nonempty_witness(
    successes: &SuccessSet,
    phi: &Abstraction,
    goals: &BTreeSet<usize>,
) -> Result<Symbol, MiningError> {
    let seqs = abstracted(successes, phi)?;
    if phi.is_identity() {
        if goals.len() != 1 {
            return Err(MiningError::NotUniqueGoal(goals.len()));
        }
        let g = *goals.iter().next().unwrap();
        let witness = Symbol::Pair(Pair::terminal(g));
        assert!(seqs.iter().all(|s| s.contains(&witness)), "terminal pair of the unique goal missing from a success");
        return Ok(witness);
    }
    let terminal = phi.terminal_images(successes)?;
    let shared = |sym: &Symbol| seqs.iter().all(|s| s.contains(sym));
    seqs[0]
        .iter()
        .find(|s| !terminal.contains(*s) && shared(s))
        .or_else(|| terminal.iter().find(|s| shared(s)))
        .cloned()
        .ok_or(MiningError::NoCommonSymbol)
}
