//! Fixtures and slow-but-obvious reference implementations.
#![allow(dead_code)]

use std::collections::BTreeSet;

use invcore::{Kernel, Mdp, Pair, RewardTable, SuccessSet, TabularMdp, Trajectory};

pub const L: usize = 0;
pub const R: usize = 1;

/// 0 -L-> 0, 0 -R-> 1, 1 -L-> 0, 1 -R-> 2, goal 2 absorbing, start 0.
pub fn chain(horizon: usize) -> Mdp {
    let next = |s: usize, a: usize| match (s, a) {
        (0, 0) => 0,
        (0, 1) => 1,
        (1, 0) => 0,
        (1, 1) => 2,
        _ => 2,
    };
    let kernel = Kernel::from_fn(3, 2, |s, a, t| if next(s, a) == t { 1.0 } else { 0.0 });
    TabularMdp::new(kernel, RewardTable::zeros(3, 2), horizon, [2], vec![1.0, 0.0, 0.0], true).unwrap()
}

pub fn is_subseq<S: PartialEq>(u: &[S], v: &[S]) -> bool {
    let mut it = v.iter();
    u.iter().all(|x| it.any(|y| y == x))
}

/// Every subsequence of `seq`, by subset masks.
pub fn all_subsequences<S: Clone + Ord>(seq: &[S]) -> BTreeSet<Vec<S>> {
    assert!(seq.len() <= 16);
    (0u32..1 << seq.len())
        .map(|m| (0..seq.len()).filter(|i| m >> i & 1 == 1).map(|i| seq[i].clone()).collect())
        .collect()
}

/// Maximal nonempty common subsequences straight from the definition.
pub fn naive_maximal<S: Clone + Ord>(seqs: &[Vec<S>]) -> BTreeSet<Vec<S>> {
    let shortest = seqs.iter().min_by_key(|s| s.len()).unwrap();
    let common: Vec<Vec<S>> = all_subsequences(shortest)
        .into_iter()
        .filter(|u| !u.is_empty() && seqs.iter().all(|s| is_subseq(u, s)))
        .collect();
    common.iter().filter(|u| !common.iter().any(|v| v.len() > u.len() && is_subseq(u, v))).cloned().collect()
}

/// Longest common subsequence length by exhaustive search.
pub fn naive_lcs_len<S: Clone + Ord>(x: &[S], y: &[S]) -> usize {
    all_subsequences(x).into_iter().filter(|u| is_subseq(u, y)).map(|u| u.len()).max().unwrap_or(0)
}

/// Success set of a small MDP by checking every state/action word against
/// the definition, with no use of the kernel beyond point lookups.
pub fn naive_successes(mdp: &Mdp) -> SuccessSet {
    let n = mdp.num_states();
    let na = mdp.num_actions();
    let mut out = SuccessSet::new();
    // t = number of actions taken; goal is s_{t+1}, so t + 1 <= H
    for t in 0..mdp.horizon() {
        let words = (n * na).pow(t as u32) * n;
        for mut code in 0..words {
            let mut pairs = Vec::with_capacity(t + 1);
            let mut states = Vec::with_capacity(t + 1);
            for _ in 0..t {
                let sa = code % (n * na);
                code /= n * na;
                pairs.push(Pair::step(sa / na, sa % na));
                states.push(sa / na);
            }
            let last = code;
            states.push(last);
            let ok = mdp.initial()[states[0]] > 0.0
                && mdp.is_goal(last)
                && states[..t].iter().all(|&s| !mdp.is_goal(s))
                && (0..t).all(|i| mdp.kernel().prob(states[i], i_action(&pairs[i]), states[i + 1]) > 0.0);
            if ok {
                pairs.push(Pair::terminal(last));
                out.insert(Trajectory::from_pairs(pairs).unwrap());
            }
        }
    }
    out
}

fn i_action(p: &Pair) -> usize {
    match p.action {
        invcore::Action::Act(a) => a,
        invcore::Action::Terminal => unreachable!(),
    }
}

/// `max_{s,a} Σ_{s'} |p - q|` computed directly.
pub fn naive_kernel_distance(p: &Kernel<f64>, q: &Kernel<f64>) -> f64 {
    let mut best = 0.0f64;
    for s in 0..p.num_states() {
        for a in 0..p.num_actions() {
            let d: f64 = (0..p.num_states()).map(|t| (p.prob(s, a, t) - q.prob(s, a, t)).abs()).sum();
            best = best.max(d);
        }
    }
    best
}

/// Same support, every positive entry multiplied by a factor in `[1, 5)`
/// drawn from `factors`, then renormalised.
pub fn reweight(mdp: &Mdp, factors: &[f64]) -> Mdp {
    let n = mdp.num_states();
    let na = mdp.num_actions();
    let mut probs = mdp.kernel().as_slice().to_vec();
    for row in 0..n * na {
        let r = &mut probs[row * n..(row + 1) * n];
        for (i, p) in r.iter_mut().enumerate() {
            if *p > 0.0 {
                *p *= 1.0 + factors[(row * n + i) % factors.len()];
            }
        }
        let total: f64 = r.iter().sum();
        r.iter_mut().for_each(|p| *p /= total);
    }
    mdp.with_kernel(Kernel::from_dense(n, na, probs).unwrap()).unwrap()
}
