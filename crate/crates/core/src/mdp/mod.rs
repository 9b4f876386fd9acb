//! Tabular finite-horizon MDPs, two-player Markov games and peer policies.
//!
//! Everything here is immutable once constructed; constructors validate.

mod enumerate;
mod rollout;

use std::collections::BTreeSet;

use crate::error::ValidationError;
use crate::scalar::Scalar;

pub use enumerate::{
    enumerate_successes, enumerate_successes_with, is_successful, shortest_success_length, DEFAULT_NODE_BUDGET,
};
pub use rollout::{rollout, RolloutError};

/// Dense transition kernel `P(s' | s, a)` stored row-major as `(s, a, s')`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    num_states: usize,
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn from_dense(num_states: usize, num_actions: usize, probs: Vec<T>) -> Result<Self, ValidationError> {
        if num_states == 0 {
            return Err(ValidationError::EmptyDimension("num_states"));
        }
        if num_actions == 0 {
            return Err(ValidationError::EmptyDimension("num_actions"));
        }
        let expected = num_states * num_actions * num_states;
        if probs.len() != expected {
            return Err(ValidationError::DimensionMismatch { what: "kernel", expected, found: probs.len() });
        }
        Ok(Kernel { num_states, num_actions, probs })
    }

    pub fn from_fn(num_states: usize, num_actions: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut probs = Vec::with_capacity(num_states * num_actions * num_states);
        for s in 0..num_states {
            for a in 0..num_actions {
                for next in 0..num_states {
                    probs.push(f(s, a, next));
                }
            }
        }
        Kernel { num_states, num_actions, probs }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn row(&self, state: usize, action: usize) -> &[T] {
        let start = (state * self.num_actions + action) * self.num_states;
        &self.probs[start..start + self.num_states]
    }

    pub fn prob(&self, state: usize, action: usize, next: usize) -> T {
        self.row(state, action)[next]
    }

    /// Next states with nonzero probability, in increasing order.
    pub fn support(&self, state: usize, action: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(state, action).iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(s, _)| s)
    }

    /// Applies `f(s, a, s', p)` to every entry.
    pub fn map(&self, mut f: impl FnMut(usize, usize, usize, T) -> T) -> Self {
        Kernel::from_fn(self.num_states, self.num_actions, |s, a, n| f(s, a, n, self.prob(s, a, n)))
    }

    pub(crate) fn check_stochastic(
        &self,
        table: &'static str,
        row_name: impl Fn(usize, usize) -> String,
    ) -> Result<(), ValidationError> {
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                check_distribution(table, self.row(s, a), || row_name(s, a))?;
            }
        }
        Ok(())
    }
}

fn check_distribution<T: Scalar>(
    table: &'static str,
    row: &[T],
    name: impl Fn() -> String,
) -> Result<(), ValidationError> {
    let mut sum = T::zero();
    for (i, &p) in row.iter().enumerate() {
        if p < T::zero() {
            return Err(ValidationError::NegativeProbability {
                table,
                at: format!("{} entry {i}", name()),
                value: p.to_f64_lossy(),
            });
        }
        sum = sum + p;
    }
    let deviation = (sum - T::one()).abs();
    if deviation > T::stochastic_tolerance() {
        return Err(ValidationError::RowSum {
            table,
            row: name(),
            sum: sum.to_f64_lossy(),
            deviation: deviation.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Dense reward table `R(s, a)` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardTable<T> {
    num_states: usize,
    num_actions: usize,
    values: Vec<T>,
}

impl<T: Scalar> RewardTable<T> {
    pub fn from_dense(num_states: usize, num_actions: usize, values: Vec<T>) -> Result<Self, ValidationError> {
        let expected = num_states * num_actions;
        if values.len() != expected {
            return Err(ValidationError::DimensionMismatch { what: "reward", expected, found: values.len() });
        }
        Ok(RewardTable { num_states, num_actions, values })
    }

    pub fn from_fn(num_states: usize, num_actions: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let values =
            (0..num_states).flat_map(|s| (0..num_actions).map(move |a| (s, a))).map(|(s, a)| f(s, a)).collect();
        RewardTable { num_states, num_actions, values }
    }

    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self::from_fn(num_states, num_actions, |_, _| T::zero())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, state: usize, action: usize) -> T {
        self.values[state * self.num_actions + action]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }
}

fn check_goals(goals: &BTreeSet<usize>, num_states: usize) -> Result<(), ValidationError> {
    if goals.is_empty() {
        return Err(ValidationError::EmptyGoal);
    }
    if let Some(&g) = goals.iter().find(|&&g| g >= num_states) {
        return Err(ValidationError::GoalOutOfRange { goal: g, num_states });
    }
    Ok(())
}

fn check_initial<T: Scalar>(initial: &[T], num_states: usize) -> Result<(), ValidationError> {
    if initial.len() != num_states {
        return Err(ValidationError::DimensionMismatch { what: "initial", expected: num_states, found: initial.len() });
    }
    check_distribution("initial", initial, || "initial distribution".to_string())
}

/// Finite-horizon goal-conditioned MDP `(S, A, P, R, H, G)` with an initial
/// distribution.
///
/// The horizon bounds the number of states visited: a success reaches a goal
/// at `s_t` with `t <= H`, so it takes at most `H - 1` real actions.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp<T> {
    kernel: Kernel<T>,
    reward: RewardTable<T>,
    horizon: usize,
    goals: BTreeSet<usize>,
    initial: Vec<T>,
    goal_absorbing: bool,
}

impl<T: Scalar> TabularMdp<T> {
    pub fn new(
        kernel: Kernel<T>,
        reward: RewardTable<T>,
        horizon: usize,
        goals: impl IntoIterator<Item = usize>,
        initial: Vec<T>,
        goal_absorbing: bool,
    ) -> Result<Self, ValidationError> {
        let mdp = TabularMdp { kernel, reward, horizon, goals: goals.into_iter().collect(), initial, goal_absorbing };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.num_states();
        if self.horizon == 0 {
            return Err(ValidationError::Horizon(0));
        }
        if self.reward.num_states != n || self.reward.num_actions != self.num_actions() {
            return Err(ValidationError::DimensionMismatch {
                what: "reward",
                expected: n * self.num_actions(),
                found: self.reward.values.len(),
            });
        }
        check_goals(&self.goals, n)?;
        check_initial(&self.initial, n)?;
        self.kernel.check_stochastic("kernel", |s, a| format!("(s={s},a={a})"))?;
        if self.goal_absorbing {
            for &g in &self.goals {
                for a in 0..self.num_actions() {
                    if self.kernel.prob(g, a, g) != T::one() {
                        return Err(ValidationError::NotAbsorbing { goal: g, action: a });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.kernel.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.kernel.num_actions
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn reward(&self) -> &RewardTable<T> {
        &self.reward
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn goals(&self) -> &BTreeSet<usize> {
        &self.goals
    }

    pub fn is_goal(&self, state: usize) -> bool {
        self.goals.contains(&state)
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    pub fn initial_support(&self) -> impl Iterator<Item = usize> + '_ {
        self.initial.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(s, _)| s)
    }

    pub fn goal_absorbing(&self) -> bool {
        self.goal_absorbing
    }

    /// Same MDP with a different kernel, revalidated.
    pub fn with_kernel(&self, kernel: Kernel<T>) -> Result<Self, ValidationError> {
        TabularMdp::new(
            kernel,
            self.reward.clone(),
            self.horizon,
            self.goals.iter().copied(),
            self.initial.clone(),
            self.goal_absorbing,
        )
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self, ValidationError> {
        let mut m = self.clone();
        m.horizon = horizon;
        m.validate()?;
        Ok(m)
    }
}

/// Returns normally iff every [`TabularMdp`] invariant holds.
pub fn validate_mdp<T: Scalar>(mdp: &TabularMdp<T>) -> Result<(), ValidationError> {
    mdp.validate()
}

/// Two-player decentralized Markov game `(S, A1, A2, P, R1, H, G)`.
///
/// The joint kernel is stored as a [`Kernel`] over joint actions
/// `a1 * |A2| + a2`, which makes its dense layout `(s, a1, a2, s')`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovGame<T> {
    num_actions_1: usize,
    num_actions_2: usize,
    joint: Kernel<T>,
    reward_1: RewardTable<T>,
    horizon: usize,
    goals: BTreeSet<usize>,
    initial: Vec<T>,
}

impl<T: Scalar> MarkovGame<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_states: usize,
        num_actions_1: usize,
        num_actions_2: usize,
        joint_kernel: Vec<T>,
        reward_1: Vec<T>,
        horizon: usize,
        goals: impl IntoIterator<Item = usize>,
        initial: Vec<T>,
    ) -> Result<Self, ValidationError> {
        if num_actions_1 == 0 {
            return Err(ValidationError::EmptyDimension("num_actions_1"));
        }
        if num_actions_2 == 0 {
            return Err(ValidationError::EmptyDimension("num_actions_2"));
        }
        let joint =
            Kernel::from_dense(num_states, num_actions_1 * num_actions_2, joint_kernel).map_err(|e| match e {
                ValidationError::DimensionMismatch { expected, found, .. } => {
                    ValidationError::DimensionMismatch { what: "joint_kernel", expected, found }
                }
                other => other,
            })?;
        let reward_1 =
            RewardTable::from_dense(num_states, num_actions_1 * num_actions_2, reward_1).map_err(|e| match e {
                ValidationError::DimensionMismatch { expected, found, .. } => {
                    ValidationError::DimensionMismatch { what: "reward_1", expected, found }
                }
                other => other,
            })?;
        let game = MarkovGame {
            num_actions_1,
            num_actions_2,
            joint,
            reward_1,
            horizon,
            goals: goals.into_iter().collect(),
            initial,
        };
        game.validate()?;
        Ok(game)
    }

    /// Wraps a single-agent MDP as a game whose peer has one action.
    pub fn from_mdp(mdp: &TabularMdp<T>) -> Self {
        MarkovGame {
            num_actions_1: mdp.num_actions(),
            num_actions_2: 1,
            joint: mdp.kernel.clone(),
            reward_1: mdp.reward.clone(),
            horizon: mdp.horizon,
            goals: mdp.goals.clone(),
            initial: mdp.initial.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.horizon == 0 {
            return Err(ValidationError::Horizon(0));
        }
        let n = self.num_states();
        check_goals(&self.goals, n)?;
        check_initial(&self.initial, n)?;
        let a2 = self.num_actions_2;
        self.joint.check_stochastic("joint_kernel", |s, j| format!("(s={s},a1={},a2={})", j / a2, j % a2))
    }

    pub fn num_states(&self) -> usize {
        self.joint.num_states
    }

    pub fn num_actions_1(&self) -> usize {
        self.num_actions_1
    }

    pub fn num_actions_2(&self) -> usize {
        self.num_actions_2
    }

    pub fn joint_row(&self, state: usize, a1: usize, a2: usize) -> &[T] {
        self.joint.row(state, a1 * self.num_actions_2 + a2)
    }

    pub fn reward_1(&self, state: usize, a1: usize, a2: usize) -> T {
        self.reward_1.get(state, a1 * self.num_actions_2 + a2)
    }

    /// Dense `(s, a1, a2, s')` joint kernel.
    pub fn joint_kernel(&self) -> &[T] {
        self.joint.as_slice()
    }

    /// Dense `(s, a1, a2)` focal reward table.
    pub fn reward_table(&self) -> &[T] {
        self.reward_1.as_slice()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn goals(&self) -> &BTreeSet<usize> {
        &self.goals
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }
}

/// Stochastic policy table `π(a | s)`.
///
/// Used for the peer's `π₂ᵉ` and, with the focal action set, for rollouts.
#[derive(Clone, Debug, PartialEq)]
pub struct PeerPolicy<T> {
    label: String,
    num_states: usize,
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Scalar> PeerPolicy<T> {
    pub fn new(
        label: impl Into<String>,
        num_states: usize,
        num_actions: usize,
        probs: Vec<T>,
    ) -> Result<Self, ValidationError> {
        if num_actions == 0 {
            return Err(ValidationError::EmptyDimension("num_actions"));
        }
        if probs.len() != num_states * num_actions {
            return Err(ValidationError::DimensionMismatch {
                what: "policy",
                expected: num_states * num_actions,
                found: probs.len(),
            });
        }
        let policy = PeerPolicy { label: label.into(), num_states, num_actions, probs };
        for s in 0..num_states {
            check_distribution("policy", policy.row(s), || format!("(s={s})"))?;
        }
        Ok(policy)
    }

    /// Full-support uniform policy.
    pub fn uniform(label: impl Into<String>, num_states: usize, num_actions: usize) -> Self {
        let p = T::ratio(1, num_actions as u32);
        PeerPolicy { label: label.into(), num_states, num_actions, probs: vec![p; num_states * num_actions] }
    }

    /// Point-mass policy choosing `choose(s)` in every state.
    pub fn deterministic(
        label: impl Into<String>,
        num_states: usize,
        num_actions: usize,
        choose: impl Fn(usize) -> usize,
    ) -> Self {
        let mut probs = vec![T::zero(); num_states * num_actions];
        for s in 0..num_states {
            let a = choose(s);
            assert!(a < num_actions, "action {a} out of range");
            probs[s * num_actions + a] = T::one();
        }
        PeerPolicy { label: label.into(), num_states, num_actions, probs }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, state: usize) -> &[T] {
        &self.probs[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn prob(&self, state: usize, action: usize) -> T {
        self.row(state)[action]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }
}

/// Folds the peer into the world: the single-agent MDP `M_e` the focal agent
/// faces while the peer plays `peer`.
///
/// `P_e(s'|s,a1) = Σ_{a2} P(s'|s,a1,a2) π(a2|s)` and
/// `R_e(s,a1) = Σ_{a2} R1(s,a1,a2) π(a2|s)`. The focal action set is `A1`.
pub fn induce_mdp<T: Scalar>(game: &MarkovGame<T>, peer: &PeerPolicy<T>) -> Result<TabularMdp<T>, ValidationError> {
    let n = game.num_states();
    if peer.num_states != n {
        return Err(ValidationError::DimensionMismatch {
            what: "peer policy states",
            expected: n,
            found: peer.num_states,
        });
    }
    if peer.num_actions != game.num_actions_2 {
        return Err(ValidationError::DimensionMismatch {
            what: "peer policy actions",
            expected: game.num_actions_2,
            found: peer.num_actions,
        });
    }
    let a1n = game.num_actions_1;
    let mut probs = vec![T::zero(); n * a1n * n];
    let mut rewards = vec![T::zero(); n * a1n];
    for s in 0..n {
        for a1 in 0..a1n {
            let out = &mut probs[(s * a1n + a1) * n..(s * a1n + a1 + 1) * n];
            for (a2, &w) in peer.row(s).iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (o, &p) in out.iter_mut().zip(game.joint_row(s, a1, a2)) {
                    *o = *o + p * w;
                }
                rewards[s * a1n + a1] = rewards[s * a1n + a1] + game.reward_1(s, a1, a2) * w;
            }
        }
    }
    let kernel = Kernel { num_states: n, num_actions: a1n, probs };
    let absorbing = game.goals.iter().all(|&g| (0..a1n).all(|a| kernel.prob(g, a, g) == T::one()));
    TabularMdp::new(
        kernel,
        RewardTable { num_states: n, num_actions: a1n, values: rewards },
        game.horizon,
        game.goals.iter().copied(),
        game.initial.clone(),
        absorbing,
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// 0 -L-> 0, 0 -R-> 1, 1 -L-> 0, 1 -R-> 2, goal 2 absorbing.
    pub(crate) fn chain(horizon: usize) -> TabularMdp<f64> {
        let next = |s: usize, a: usize| match (s, a) {
            (0, 0) => 0,
            (0, 1) => 1,
            (1, 0) => 0,
            (1, 1) => 2,
            _ => 2,
        };
        let kernel = Kernel::from_fn(3, 2, |s, a, n| if next(s, a) == n { 1.0 } else { 0.0 });
        TabularMdp::new(kernel, RewardTable::zeros(3, 2), horizon, [2], vec![1.0, 0.0, 0.0], true).unwrap()
    }

    #[test]
    fn two_state_chain_validates() {
        let kernel = Kernel::from_fn(2, 1, |_, _, n| if n == 1 { 1.0 } else { 0.0 });
        let mdp = TabularMdp::new(kernel, RewardTable::zeros(2, 1), 2, [1], vec![1.0, 0.0], true);
        assert!(mdp.is_ok());
        assert!(validate_mdp(&mdp.unwrap()).is_ok());
    }

    #[test]
    fn short_row_is_named() {
        let kernel = Kernel::from_fn(2, 2, |s, a, n| match (s, a, n) {
            (0, 1, 1) => 0.98,
            (_, _, 1) => 1.0,
            _ => 0.0,
        });
        let err = TabularMdp::new(kernel, RewardTable::zeros(2, 2), 2, [1], vec![1.0, 0.0], false).unwrap_err();
        match err {
            ValidationError::RowSum { row, deviation, .. } => {
                assert_eq!(row, "(s=0,a=1)");
                assert!((deviation - 0.02).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_goal_rejected() {
        let kernel = Kernel::from_fn(1, 1, |_, _, _| 1.0);
        let err = TabularMdp::new(kernel, RewardTable::zeros(1, 1), 1, [], vec![1.0], false).unwrap_err();
        assert_eq!(err, ValidationError::EmptyGoal);
    }

    #[test]
    fn zero_horizon_and_bad_initial_rejected() {
        let kernel = Kernel::from_fn(1, 1, |_, _, _| 1.0);
        let err = TabularMdp::new(kernel.clone(), RewardTable::zeros(1, 1), 0, [0], vec![1.0], false).unwrap_err();
        assert_eq!(err, ValidationError::Horizon(0));
        let err = TabularMdp::new(kernel, RewardTable::zeros(1, 1), 1, [0], vec![0.5], false).unwrap_err();
        assert!(matches!(err, ValidationError::RowSum { table: "initial", .. }));
    }

    #[test]
    fn non_absorbing_goal_flagged() {
        let kernel = Kernel::from_fn(2, 1, |s, _, n| if n != s { 1.0 } else { 0.0 });
        let err = TabularMdp::new(kernel, RewardTable::zeros(2, 1), 2, [1], vec![1.0, 0.0], true).unwrap_err();
        assert_eq!(err, ValidationError::NotAbsorbing { goal: 1, action: 0 });
    }

    fn two_action_peer_game() -> MarkovGame<f64> {
        // from state 0, peer action 0 sends to 0, peer action 1 sends to 1
        let mut joint = Vec::new();
        for s in 0..2 {
            for _a1 in 0..1 {
                for a2 in 0..2 {
                    if s == 1 {
                        joint.extend([0.0, 1.0]);
                    } else if a2 == 0 {
                        joint.extend([1.0, 0.0]);
                    } else {
                        joint.extend([0.0, 1.0]);
                    }
                }
            }
        }
        let reward = vec![0.0, 1.0, 0.0, 0.0];
        MarkovGame::new(2, 1, 2, joint, reward, 3, [1], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn weighted_mixture_of_joint_rows() {
        let game = two_action_peer_game();
        let peer = PeerPolicy::new("p", 2, 2, vec![0.3, 0.7, 0.5, 0.5]).unwrap();
        let m = induce_mdp(&game, &peer).unwrap();
        assert_eq!(m.kernel().row(0, 0), &[0.3, 0.7]);
        assert!((m.reward().get(0, 0) - 0.7).abs() < 1e-15);
        assert!(m.goal_absorbing());
    }

    #[test]
    fn uniform_peer_averages_rows() {
        let game = two_action_peer_game();
        let m = induce_mdp(&game, &PeerPolicy::uniform("u", 2, 2)).unwrap();
        assert_eq!(m.kernel().row(0, 0), &[0.5, 0.5]);
    }

    #[test]
    fn deterministic_peer_slices_joint_kernel() {
        let game = two_action_peer_game();
        for k in 0..2 {
            let m = induce_mdp(&game, &PeerPolicy::deterministic("d", 2, 2, |_| k)).unwrap();
            for s in 0..2 {
                assert_eq!(m.kernel().row(s, 0), game.joint_row(s, 0, k));
            }
        }
    }

    #[test]
    fn peer_dimension_mismatch() {
        let game = two_action_peer_game();
        let err = induce_mdp(&game, &PeerPolicy::uniform("u", 2, 3)).unwrap_err();
        assert!(matches!(err, ValidationError::DimensionMismatch { what: "peer policy actions", .. }));
    }

    #[test]
    fn single_action_peer_reproduces_mdp() {
        let mdp = chain(4);
        let game = MarkovGame::from_mdp(&mdp);
        let m = induce_mdp(&game, &PeerPolicy::uniform("only", 3, 1)).unwrap();
        assert_eq!(m, mdp);
    }

    #[test]
    fn exact_rationals_induce_exactly() {
        use num_rational::Ratio;
        type Q = Ratio<i64>;
        let q = |n, d| Q::new(n, d);
        let joint = vec![q(1, 1), q(0, 1), q(1, 3), q(2, 3), q(0, 1), q(1, 1), q(0, 1), q(1, 1)];
        let game = MarkovGame::new(2, 1, 2, joint, vec![q(0, 1); 4], 2, [1], vec![q(1, 1), q(0, 1)]).unwrap();
        let peer = PeerPolicy::new("p", 2, 2, vec![q(1, 4), q(3, 4), q(1, 2), q(1, 2)]).unwrap();
        let m = induce_mdp(&game, &peer).unwrap();
        assert_eq!(m.kernel().row(0, 0), &[q(1, 2), q(1, 2)]);
    }
}
