//! Seeded Monte Carlo rollouts.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`), which
//! is portable and produces the same stream on every platform. Each draw uses
//! one `f64` in `[0, 1)` and inverts the cumulative distribution over the
//! nonzero entries in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PeerPolicy, TabularMdp};
use crate::error::ValidationError;
use crate::scalar::Scalar;
use crate::trajectory::{Pair, RolloutSet, Trajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RolloutError {
    #[error("rollout count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn sample<T: Scalar>(rng: &mut ChaCha8Rng, dist: &[T]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in dist.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        last = i;
        acc += p.to_f64_lossy();
        if u < acc {
            return i;
        }
    }
    // rounding left u above the accumulated mass
    last
}

/// Samples `n` trajectories under `policy`, each stopping at the first goal
/// visit (closed with a terminal pair) or after `H` actions.
pub fn rollout<T: Scalar>(
    mdp: &TabularMdp<T>,
    policy: &PeerPolicy<T>,
    n: usize,
    seed: u64,
) -> Result<RolloutSet, RolloutError> {
    if n == 0 {
        return Err(RolloutError::ZeroCount);
    }
    if policy.num_states() != mdp.num_states() {
        return Err(ValidationError::DimensionMismatch {
            what: "policy states",
            expected: mdp.num_states(),
            found: policy.num_states(),
        }
        .into());
    }
    if policy.num_actions() != mdp.num_actions() {
        return Err(ValidationError::DimensionMismatch {
            what: "policy actions",
            expected: mdp.num_actions(),
            found: policy.num_actions(),
        }
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectories = Vec::with_capacity(n);
    for _ in 0..n {
        let mut state = sample(&mut rng, mdp.initial());
        let mut traj = Trajectory::default();
        for t in 0..=mdp.horizon() {
            // state is s_{t+1}
            if mdp.is_goal(state) && t < mdp.horizon() {
                traj.push(Pair::terminal(state));
                break;
            }
            if t == mdp.horizon() {
                break;
            }
            let action = sample(&mut rng, policy.row(state));
            traj.push(Pair::step(state, action));
            state = sample(&mut rng, mdp.kernel().row(state, action));
        }
        trajectories.push(traj);
    }
    Ok(RolloutSet { trajectories, seed, policy_label: policy.label().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::chain;
    use crate::mdp::{enumerate_successes, is_successful};

    #[test]
    fn zero_rollouts_rejected() {
        let mdp = chain(4);
        let pi = PeerPolicy::uniform("u", 3, 2);
        assert_eq!(rollout(&mdp, &pi, 0, 1).unwrap_err(), RolloutError::ZeroCount);
    }

    #[test]
    fn deterministic_policy_gives_its_unique_trajectory() {
        let mdp = chain(4);
        let pi = PeerPolicy::deterministic("right", 3, 2, |_| 1);
        let r = rollout(&mdp, &pi, 1, 99).unwrap();
        assert_eq!(r.trajectories, vec![Trajectory::new(&[(0, 1), (1, 1)], Some(2))]);
    }

    #[test]
    fn never_longer_than_horizon_actions() {
        let mdp = chain(3);
        let pi = PeerPolicy::deterministic("left", 3, 2, |_| 0);
        let r = rollout(&mdp, &pi, 1, 0).unwrap();
        assert_eq!(r.trajectories[0].num_actions(), 3);
        assert!(!r.trajectories[0].is_terminated());
    }

    #[test]
    fn same_seed_same_multiset() {
        let mdp = chain(5);
        let pi = PeerPolicy::uniform("u", 3, 2);
        assert_eq!(rollout(&mdp, &pi, 200, 42).unwrap(), rollout(&mdp, &pi, 200, 42).unwrap());
    }

    #[test]
    fn large_uniform_sample_hits_every_success() {
        let mdp = chain(4);
        let pi = PeerPolicy::uniform("u", 3, 2);
        let r = rollout(&mdp, &pi, 10_000, 7).unwrap();
        let all = enumerate_successes(&mdp).unwrap();
        for t in r.successes() {
            assert!(is_successful(t, &mdp));
            assert!(all.contains(t));
        }
        for t in &all {
            assert!(r.successes().any(|x| x == t));
        }
    }
}
