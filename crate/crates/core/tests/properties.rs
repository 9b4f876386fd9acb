mod common;

use std::collections::BTreeSet;

use invcore::envs::{random_game, random_mdp, random_peer};
use invcore::io::{from_json, to_json, AbstractionFile, GameFile, MdpFile, PolicyFile};
use invcore::{
    brute_force_maximal, budget_of, build_trie, core, enumerate_successes, induce_mdp, is_successful, kernel_distance,
    lcs_pair, maximal_common_subsequences, reward_distance, rollout, successful_leaves, Abstraction, Pair, PeerPolicy,
    Rational, Symbol, DEFAULT_CORE_BUDGET,
};
use proptest::prelude::*;

use common::{is_subseq, naive_lcs_len, naive_maximal, naive_successes, reweight};

fn family() -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1u8..=3).prop_flat_map(|sigma| prop::collection::vec(prop::collection::vec(0..sigma, 0..=8), 1..=4))
}

fn small_dims() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=5, 1usize..=2, 2usize..=5, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maximal_subsequences_match_definition(seqs in family()) {
        let fast = maximal_common_subsequences(&seqs, DEFAULT_CORE_BUDGET).unwrap();
        prop_assert_eq!(&fast, &brute_force_maximal(&seqs).unwrap());
        prop_assert_eq!(fast.iter().cloned().collect::<BTreeSet<_>>(), naive_maximal(&seqs));
        // canonical order: longer first, then lexicographic
        for w in fast.windows(2) {
            prop_assert!(w[0].len() > w[1].len() || (w[0].len() == w[1].len() && w[0] < w[1]));
        }
    }

    #[test]
    fn two_sequence_core_peaks_at_lcs(x in prop::collection::vec(0u8..3, 1..=9), y in prop::collection::vec(0u8..3, 1..=9)) {
        let (len, w) = lcs_pair(&x, &y);
        prop_assert_eq!(len, naive_lcs_len(&x, &y));
        prop_assert!(is_subseq(&w, &x) && is_subseq(&w, &y));
        let members = maximal_common_subsequences(&[x, y], DEFAULT_CORE_BUDGET).unwrap();
        prop_assert_eq!(members.first().map_or(0, Vec::len), len);
    }

    #[test]
    fn enumeration_matches_definition((n, a, h, seed) in small_dims()) {
        // single-action peer gives an arbitrary MDP, reachable goal or not
        let g = random_game::<f64>(n, a, 1, h, seed);
        let m = induce_mdp(&g, &PeerPolicy::uniform("only", n, 1)).unwrap();
        let s = enumerate_successes(&m).unwrap();
        prop_assert_eq!(&s, &naive_successes(&m));
        for t in &s {
            prop_assert!(is_successful(t, &m));
        }
    }

    #[test]
    fn successes_ignore_magnitudes((n, a, h, seed) in small_dims(), factors in prop::collection::vec(0.0f64..4.0, 1..8)) {
        let m = random_mdp::<f64>(n, a, h, seed);
        let w = reweight(&m, &factors);
        let s = enumerate_successes(&m).unwrap();
        prop_assert_eq!(&s, &enumerate_successes(&w).unwrap());
        let id = Abstraction::identity();
        prop_assert_eq!(core(&s, &id, false).unwrap(), core(&enumerate_successes(&w).unwrap(), &id, false).unwrap());
    }

    #[test]
    fn scalar_type_does_not_change_successes((n, a, h, seed) in small_dims()) {
        let s64 = enumerate_successes(&random_mdp::<f64>(n, a, h, seed)).unwrap();
        prop_assert_eq!(&s64, &enumerate_successes(&random_mdp::<f32>(n, a, h, seed)).unwrap());
        prop_assert_eq!(&s64, &enumerate_successes(&random_mdp::<Rational>(n, a, h, seed)).unwrap());
    }

    #[test]
    fn core_members_are_common_and_incomparable((n, a, h, seed) in small_dims(), strip in any::<bool>()) {
        let m = random_mdp::<f64>(n, a, h, seed);
        let s = enumerate_successes(&m).unwrap();
        let c = core(&s, &Abstraction::identity(), strip).unwrap();
        let images: Vec<Vec<Symbol>> = s.iter().map(|t| t.pairs().iter().map(|&p| Symbol::Pair(p)).collect()).collect();
        for u in c.members() {
            prop_assert!(!u.is_empty());
            prop_assert!(images.iter().all(|img| is_subseq(u, img)));
            prop_assert!(!strip || u.iter().all(|x| !matches!(x, Symbol::Pair(p) if p.is_terminal())));
            for v in c.members() {
                prop_assert!(u == v || !is_subseq(u, v));
            }
        }
    }

    #[test]
    fn induced_kernels_are_stochastic(n in 2usize..=6, a1 in 1usize..=3, a2 in 1usize..=3, seed in any::<u64>()) {
        let g = random_game::<Rational>(n, a1, a2, 4, seed);
        let p = random_peer::<Rational>(n, a2, seed.wrapping_add(1));
        let m = induce_mdp(&g, &p).unwrap();
        for s in 0..n {
            for a in 0..a1 {
                let sum: Rational = m.kernel().row(s, a).iter().sum();
                prop_assert_eq!(sum, Rational::from_integer(1));
            }
        }
    }

    #[test]
    fn budget_is_reversal_invariant_and_bounds_end_to_end(seeds in prop::collection::vec(any::<u64>(), 2..=5)) {
        let mdps: Vec<_> = seeds.iter().map(|&s| induce_mdp(&random_game::<f64>(4, 2, 2, 4, 9), &random_peer(4, 2, s)).unwrap()).collect();
        let forward = budget_of(&mdps).unwrap().total;
        let mut rev = mdps.clone();
        rev.reverse();
        prop_assert!((budget_of(&rev).unwrap().total - forward).abs() < 1e-12);
        let (first, last) = (&mdps[0], &mdps[mdps.len() - 1]);
        let direct = kernel_distance(last.kernel(), first.kernel()).unwrap() + reward_distance(last.reward(), first.reward()).unwrap();
        prop_assert!(direct <= forward + 1e-12);
        prop_assert_eq!(forward == 0.0, mdps.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn rollout_trie_is_consistent((n, a, h, seed) in small_dims(), rseed in any::<u64>()) {
        let m = random_mdp::<f64>(n, a, h, seed);
        let pi = PeerPolicy::uniform("uniform", n, a);
        let set = rollout(&m, &pi, 200, rseed).unwrap();
        prop_assert_eq!(&set, &rollout(&m, &pi, 200, rseed).unwrap());
        let trie = build_trie(&set.trajectories);
        prop_assert_eq!(trie.inserted(), 200);
        let prefixes: BTreeSet<&[Pair]> = set
            .trajectories
            .iter()
            .flat_map(|t| (1..=t.len()).map(move |k| &t.pairs()[..k]))
            .collect();
        prop_assert_eq!(trie.node_count(), prefixes.len() + 1);
        let all = enumerate_successes(&m).unwrap();
        let seen = successful_leaves(&trie);
        prop_assert!(seen.is_subset(&all));
        for t in set.successes() {
            prop_assert!(is_successful(t, &m));
        }
        for r in trie.records() {
            let below = set.trajectories.iter().filter(|t| t.pairs().starts_with(&r.prefix)).count() as u64;
            prop_assert_eq!(r.count, below);
            let succ = set.trajectories.iter().any(|t| t.is_terminated() && t.pairs().starts_with(&r.prefix));
            prop_assert_eq!(r.success, succ);
        }
    }

    #[test]
    fn enumerated_trie_round_trips((n, a, h, seed) in small_dims()) {
        let m = random_mdp::<f64>(n, a, h, seed);
        let s = enumerate_successes(&m).unwrap();
        prop_assert_eq!(successful_leaves(&build_trie(&s)), s);
    }

    #[test]
    fn files_round_trip(n in 2usize..=5, a1 in 1usize..=3, a2 in 1usize..=3, seed in any::<u64>()) {
        let m = random_mdp::<f64>(n, a1, 4, seed);
        let back: MdpFile<f64> = from_json(&to_json(&MdpFile::from_mdp(&m))).unwrap();
        prop_assert_eq!(back.to_mdp().unwrap(), m);

        let g = random_game::<Rational>(n, a1, a2, 3, seed);
        let back: GameFile<Rational> = from_json(&to_json(&GameFile::from_game(&g))).unwrap();
        prop_assert_eq!(back.to_game().unwrap(), g);

        let p = random_peer::<f64>(n, a2, seed);
        let back: PolicyFile<f64> = from_json(&to_json(&PolicyFile::from_policy(&p))).unwrap();
        prop_assert_eq!(back.to_policy().unwrap(), p);

        let map = (0..n)
            .flat_map(|s| (0..a1).map(move |a| Pair::step(s, a)))
            .chain([Pair::terminal(n - 1)])
            .enumerate()
            .map(|(i, p)| (p, if i % 3 == 0 { Symbol::Pair(p) } else { Symbol::named(format!("sym{}", i % 4)) }))
            .collect();
        let phi = Abstraction::from_map("generated", map).with_collapse_runs(seed % 2 == 0);
        let back: AbstractionFile = from_json(&to_json(&AbstractionFile::from_abstraction(&phi))).unwrap();
        prop_assert_eq!(back.to_abstraction().unwrap(), phi);
    }
}
