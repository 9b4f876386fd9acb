//! Seeded random instances for property tests.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)`, so a seed
//! names the same instance on every platform. Kernel rows put integer weights
//! `1..=4` on one or two distinct successors and normalise them with
//! [`Scalar::ratio`], which keeps rational kernels exact.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::Symbol;
use crate::mdp::{shortest_success_length, Kernel, MarkovGame, PeerPolicy, RewardTable, TabularMdp};
use crate::scalar::Scalar;

fn random_row<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, out: &mut [T]) {
    let k = rng.gen_range(1..=2.min(n));
    let targets = sample(rng, n, k).into_vec();
    let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: u32 = weights.iter().sum();
    for (&t, &w) in targets.iter().zip(&weights) {
        out[t] = T::ratio(w, total);
    }
}

/// Random MDP with initial state `0` and the unique absorbing goal
/// `num_states - 1`, resampled until the goal is reachable within `horizon`.
///
/// Rewards are multiples of `1/4` in `[0, 1]`.
///
/// # Panics
/// If a dimension is zero, or if `horizon < 2` with more than one state (no
/// instance could qualify).
pub fn random_mdp<T: Scalar>(num_states: usize, num_actions: usize, horizon: usize, seed: u64) -> TabularMdp<T> {
    assert!(num_states > 0 && num_actions > 0, "empty dimension");
    assert!(horizon >= 2 || (horizon == 1 && num_states == 1), "horizon too short for any success");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal = num_states - 1;
    loop {
        let mut probs = vec![T::zero(); num_states * num_actions * num_states];
        for s in 0..num_states {
            for a in 0..num_actions {
                let row = &mut probs[(s * num_actions + a) * num_states..(s * num_actions + a + 1) * num_states];
                if s == goal {
                    row[goal] = T::one();
                } else {
                    random_row(&mut rng, num_states, row);
                }
            }
        }
        let kernel = Kernel::from_dense(num_states, num_actions, probs).expect("dimensions match");
        let reward = RewardTable::from_fn(num_states, num_actions, |_, _| T::ratio(rng.gen_range(0..=4), 4));
        let mut initial = vec![T::zero(); num_states];
        initial[0] = T::one();
        let mdp = TabularMdp::new(kernel, reward, horizon, [goal], initial, true).expect("generated MDP is valid");
        if shortest_success_length(&mdp).is_some_and(|len| len <= horizon) {
            return mdp;
        }
    }
}

/// Random two-player game with initial state `0` and goal `num_states - 1`,
/// absorbing under every joint action. Reachability is not enforced.
pub fn random_game<T: Scalar>(
    num_states: usize,
    num_actions_1: usize,
    num_actions_2: usize,
    horizon: usize,
    seed: u64,
) -> MarkovGame<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint_actions = num_actions_1 * num_actions_2;
    let goal = num_states - 1;
    let mut probs = vec![T::zero(); num_states * joint_actions * num_states];
    for s in 0..num_states {
        for j in 0..joint_actions {
            let row = &mut probs[(s * joint_actions + j) * num_states..(s * joint_actions + j + 1) * num_states];
            if s == goal {
                row[goal] = T::one();
            } else {
                random_row(&mut rng, num_states, row);
            }
        }
    }
    let reward = (0..num_states * joint_actions).map(|_| T::ratio(rng.gen_range(0..=4), 4)).collect();
    let mut initial = vec![T::zero(); num_states];
    initial[0] = T::one();
    MarkovGame::new(num_states, num_actions_1, num_actions_2, probs, reward, horizon, [goal], initial)
        .expect("generated game is valid")
}

/// Random stochastic policy; each row has weights `0..=4` with at least one
/// positive entry.
pub fn random_peer<T: Scalar>(num_states: usize, num_actions: usize, seed: u64) -> PeerPolicy<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = Vec::with_capacity(num_states * num_actions);
    for _ in 0..num_states {
        let mut w: Vec<u32> = (0..num_actions).map(|_| rng.gen_range(0..=4)).collect();
        if w.iter().all(|&x| x == 0) {
            w[rng.gen_range(0..num_actions)] = 1;
        }
        let total: u32 = w.iter().sum();
        probs.extend(w.into_iter().map(|x| T::ratio(x, total)));
    }
    PeerPolicy::new(format!("random-{seed}"), num_states, num_actions, probs).expect("generated policy is valid")
}

/// Random family of `1..=max_sequences` sequences, each of length
/// `0..=max_len`, over the names `a`, `b`, … (at most `max_alphabet` of them).
pub fn random_family(max_sequences: usize, max_len: usize, max_alphabet: usize, seed: u64) -> Vec<Vec<Symbol>> {
    assert!(max_sequences > 0 && (1..=26).contains(&max_alphabet));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_sequences);
    let sigma = rng.gen_range(1..=max_alphabet);
    (0..k)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len).map(|_| Symbol::named(char::from(b'a' + rng.gen_range(0..sigma) as u8).to_string())).collect()
        })
        .collect()
}
