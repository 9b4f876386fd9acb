//! Exhaustive, support-based enumeration of the success set.

use std::collections::VecDeque;

use super::TabularMdp;
use crate::error::EnumerationError;
use crate::scalar::Scalar;
use crate::trajectory::{Action, Pair, SuccessSet, Trajectory};

/// Default cap on DFS nodes visited by [`enumerate_successes`].
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

/// All first-visit goal-reaching trajectories with positive support.
///
/// Equivalent to [`enumerate_successes_with`] at [`DEFAULT_NODE_BUDGET`].
pub fn enumerate_successes<T: Scalar>(mdp: &TabularMdp<T>) -> Result<SuccessSet, EnumerationError> {
    enumerate_successes_with(mdp, DEFAULT_NODE_BUDGET)
}

/// Depth-first enumeration of every trajectory that starts in the initial
/// support, follows nonzero kernel entries for some action choice, and visits
/// a goal for the first time at `s_t` with `t <= H`.
///
/// Only the zero pattern of the kernel is read, so the result is independent
/// of probability magnitudes. Branches that cannot reach a goal in the
/// remaining steps are pruned using shortest support distances.
pub fn enumerate_successes_with<T: Scalar>(
    mdp: &TabularMdp<T>,
    node_budget: usize,
) -> Result<SuccessSet, EnumerationError> {
    let n = mdp.num_states();
    let na = mdp.num_actions();
    let horizon = mdp.horizon();

    let support: Vec<Vec<usize>> =
        (0..n).flat_map(|s| (0..na).map(move |a| (s, a))).map(|(s, a)| mdp.kernel().support(s, a).collect()).collect();
    let dist = distance_to_goal(mdp, &support);

    let mut out = SuccessSet::new();
    let mut visited = 0usize;
    let mut path = Trajectory::default();

    // explicit stack of (state, next action to try, next support index)
    struct Frame {
        state: usize,
        action: usize,
        idx: usize,
    }

    for s0 in mdp.initial_support() {
        if dist[s0] == usize::MAX || dist[s0] + 1 > horizon {
            continue;
        }
        let mut stack = vec![Frame { state: s0, action: 0, idx: 0 }];
        visited += 1;
        if mdp.is_goal(s0) {
            out.insert(Trajectory::from_pairs(vec![Pair::terminal(s0)]).expect("terminal-only"));
            continue;
        }
        while let Some(top) = stack.last_mut() {
            let depth = path.len(); // real actions taken before top.state
            if top.action >= na {
                stack.pop();
                path.pop();
                continue;
            }
            let row = &support[top.state * na + top.action];
            if top.idx >= row.len() {
                top.action += 1;
                top.idx = 0;
                continue;
            }
            let next = row[top.idx];
            top.idx += 1;
            let s = top.state;
            let a = top.action;
            // next would be s_{depth+2}
            if dist[next] == usize::MAX || depth + 2 + dist[next] > horizon {
                continue;
            }
            visited += 1;
            if visited > node_budget {
                return Err(EnumerationError::ExplosionGuard { budget: node_budget });
            }
            if mdp.is_goal(next) {
                let mut pairs = path.pairs().to_vec();
                pairs.push(Pair::step(s, a));
                pairs.push(Pair::terminal(next));
                out.insert(Trajectory::from_pairs(pairs).expect("well-formed"));
            } else {
                path.push(Pair::step(s, a));
                stack.push(Frame { state: next, action: 0, idx: 0 });
            }
        }
        debug_assert!(path.is_empty());
    }
    Ok(out)
}

/// Fewest transitions from each state to any goal under the kernel support.
fn distance_to_goal<T: Scalar>(mdp: &TabularMdp<T>, support: &[Vec<usize>]) -> Vec<usize> {
    let n = mdp.num_states();
    let na = mdp.num_actions();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..na {
            for &t in &support[s * na + a] {
                preds[t].push(s);
            }
        }
    }
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &g in mdp.goals() {
        dist[g] = 0;
        queue.push_back(g);
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if dist[s] == usize::MAX && !mdp.is_goal(s) {
                dist[s] = dist[t] + 1;
                queue.push_back(s);
            }
        }
    }
    dist
}

/// Number of states visited by the shortest success, ignoring the horizon.
/// `None` when no goal is reachable from the initial support.
pub fn shortest_success_length<T: Scalar>(mdp: &TabularMdp<T>) -> Option<usize> {
    let na = mdp.num_actions();
    let support: Vec<Vec<usize>> = (0..mdp.num_states())
        .flat_map(|s| (0..na).map(move |a| (s, a)))
        .map(|(s, a)| mdp.kernel().support(s, a).collect())
        .collect();
    let dist = distance_to_goal(mdp, &support);
    mdp.initial_support().filter(|&s| dist[s] != usize::MAX).map(|s| dist[s] + 1).min()
}

/// True iff `traj` is a first-visit success of `mdp`: it starts in the initial
/// support, every transition has nonzero probability, no non-terminal state is
/// a goal, and it closes with a terminal goal pair within the horizon.
pub fn is_successful<T: Scalar>(traj: &Trajectory, mdp: &TabularMdp<T>) -> bool {
    let Some(goal) = traj.terminal_state() else {
        return false;
    };
    if !mdp.is_goal(goal) || traj.len() > mdp.horizon() {
        return false;
    }
    let pairs = traj.pairs();
    let n = mdp.num_states();
    if pairs.iter().any(|p| p.state >= n) {
        return false;
    }
    if mdp.initial()[pairs[0].state].is_zero() {
        return false;
    }
    for w in pairs.windows(2) {
        let (cur, next) = (w[0], w[1]);
        let Action::Act(a) = cur.action else {
            return false;
        };
        if a >= mdp.num_actions() || mdp.is_goal(cur.state) {
            return false;
        }
        if mdp.kernel().prob(cur.state, a, next.state).is_zero() {
            return false;
        }
    }
    true
}
