//! Prefix tree over the state–action alphabet.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::EnumerationError;
use crate::mdp::{enumerate_successes_with, TabularMdp, DEFAULT_NODE_BUDGET};
use crate::scalar::Scalar;
use crate::trajectory::{Pair, SuccessSet, Trajectory};

const ROOT: usize = 0;

#[derive(Clone, Debug)]
struct Node {
    symbol: Option<Pair>,
    parent: Option<usize>,
    children: BTreeMap<Pair, usize>,
    count: u64,
    success: bool,
}

/// Trajectory trie `𝒯(Θ)`: nodes are the stored prefixes, the root is the
/// empty prefix, and each edge appends one pair.
///
/// Children are kept in symbol order, so traversals are deterministic. The
/// success label `y(u)` is relative to the stored data: it is 1 iff some
/// stored extension of `u` ends in a terminal goal pair.
#[derive(Clone, Debug)]
pub struct TrajectoryTrie {
    nodes: Vec<Node>,
}

/// One row of a trie dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub prefix: Vec<Pair>,
    pub success: bool,
    pub count: u64,
}

impl Default for TrajectoryTrie {
    fn default() -> Self {
        TrajectoryTrie {
            nodes: vec![Node { symbol: None, parent: None, children: BTreeMap::new(), count: 0, success: false }],
        }
    }
}

impl TrajectoryTrie {
    fn insert(&mut self, traj: &Trajectory) {
        let mut cur = ROOT;
        self.nodes[ROOT].count += 1;
        for &p in traj.pairs() {
            cur = match self.nodes[cur].children.get(&p) {
                Some(&c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(Node {
                        symbol: Some(p),
                        parent: Some(cur),
                        children: BTreeMap::new(),
                        count: 0,
                        success: false,
                    });
                    self.nodes[cur].children.insert(p, id);
                    id
                }
            };
            self.nodes[cur].count += 1;
        }
    }

    fn label(&mut self) {
        // children always have larger ids than their parent
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            let y =
                node.symbol.is_some_and(|p| p.is_terminal()) || node.children.values().any(|&c| self.nodes[c].success);
            self.nodes[id].success = y;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Visit count of the root, i.e. the number of inserted trajectories.
    pub fn inserted(&self) -> u64 {
        self.nodes[ROOT].count
    }

    pub fn root_children(&self) -> usize {
        self.nodes[ROOT].children.len()
    }

    fn prefix_of(&self, mut id: usize) -> Vec<Pair> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[id].symbol {
            out.push(p);
            id = self.nodes[id].parent.expect("non-root has parent");
        }
        out.reverse();
        out
    }

    fn find(&self, prefix: &[Pair]) -> Option<usize> {
        prefix.iter().try_fold(ROOT, |cur, p| self.nodes[cur].children.get(p).copied())
    }

    pub fn contains_prefix(&self, prefix: &[Pair]) -> bool {
        self.find(prefix).is_some()
    }

    /// `y(u)` for a stored prefix, `None` if the prefix is absent.
    pub fn success_label(&self, prefix: &[Pair]) -> Option<bool> {
        self.find(prefix).map(|id| self.nodes[id].success)
    }

    pub fn visit_count(&self, prefix: &[Pair]) -> Option<u64> {
        self.find(prefix).map(|id| self.nodes[id].count)
    }

    /// Nodes in depth-first, symbol-ordered traversal.
    pub fn records(&self) -> Vec<NodeRecord> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![ROOT];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            out.push(NodeRecord { prefix: self.prefix_of(id), success: node.success, count: node.count });
            stack.extend(node.children.values().rev());
        }
        out
    }

    /// Indented text dump: one line per node with its symbol, `y` and count.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(ROOT, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            let sym = node.symbol.map_or_else(|| "ε".to_string(), |p| p.to_string());
            let _ =
                writeln!(out, "{:indent$}{sym} y={} n={}", "", u8::from(node.success), node.count, indent = depth * 2);
            stack.extend(node.children.values().rev().map(|&c| (c, depth + 1)));
        }
        out
    }
}

/// Builds the trie of every prefix of the given trajectories.
pub fn build_trie<'a>(trajectories: impl IntoIterator<Item = &'a Trajectory>) -> TrajectoryTrie {
    let mut trie = TrajectoryTrie::default();
    for t in trajectories {
        trie.insert(t);
    }
    trie.label();
    trie
}

/// The stored trajectories that end in a terminal goal pair, deduplicated.
pub fn successful_leaves(trie: &TrajectoryTrie) -> SuccessSet {
    trie.nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.symbol.is_some_and(|p| p.is_terminal()))
        .map(|(id, _)| Trajectory::from_pairs(trie.prefix_of(id)).expect("terminal is last"))
        .collect()
}

/// True iff the successful leaves are exactly the MDP's success set.
pub fn is_complete<T: Scalar>(trie: &TrajectoryTrie, mdp: &TabularMdp<T>) -> Result<bool, EnumerationError> {
    is_complete_with(trie, mdp, DEFAULT_NODE_BUDGET)
}

pub fn is_complete_with<T: Scalar>(
    trie: &TrajectoryTrie,
    mdp: &TabularMdp<T>,
    node_budget: usize,
) -> Result<bool, EnumerationError> {
    Ok(successful_leaves(trie) == enumerate_successes_with(mdp, node_budget)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::chain;
    use crate::mdp::{enumerate_successes, rollout, PeerPolicy};

    fn p1() -> Trajectory {
        Trajectory::new(&[(0, 1), (1, 1)], Some(2))
    }

    fn p2() -> Trajectory {
        Trajectory::new(&[(0, 0), (0, 1), (1, 1)], Some(2))
    }

    /// Independent count: distinct prefixes (including ε) of the inputs.
    fn count_prefixes(ts: &[Trajectory]) -> usize {
        let mut set = std::collections::BTreeSet::new();
        for t in ts {
            for k in 0..=t.len() {
                set.insert(t.pairs()[..k].to_vec());
            }
        }
        set.len()
    }

    #[test]
    fn empty_input_is_root_only() {
        let trie = build_trie([]);
        assert_eq!(trie.node_count(), 1);
        assert_eq!(trie.success_label(&[]), Some(false));
        assert!(successful_leaves(&trie).is_empty());
    }

    #[test]
    fn chain_successes_share_no_first_symbol() {
        let ts = [p1(), p2()];
        let trie = build_trie(&ts);
        assert_eq!(trie.root_children(), 2);
        assert_eq!(count_prefixes(&ts), 8);
        assert_eq!(trie.node_count(), 8);
        assert_eq!(trie.success_label(&[]), Some(true));
    }

    #[test]
    fn repeated_insert_doubles_counts_only() {
        let once = build_trie([&p2()]);
        let twice = build_trie([&p2(), &p2()]);
        assert_eq!(once.node_count(), twice.node_count());
        let a = once.records();
        let b = twice.records();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.prefix, y.prefix);
            assert_eq!(x.success, y.success);
            assert_eq!(2 * x.count, y.count);
        }
    }

    #[test]
    fn failures_are_filtered_from_leaves() {
        let fail = Trajectory::new(&[(0, 0), (0, 0), (0, 0)], None);
        let trie = build_trie([&p1(), &fail, &p1()]);
        let leaves = successful_leaves(&trie);
        assert_eq!(leaves.len(), 1);
        assert!(leaves.contains(&p1()));
        // failure branch keeps y = 0 except where it shares a successful prefix
        assert_eq!(trie.success_label(fail.pairs()), Some(false));
        assert_eq!(trie.success_label(&fail.pairs()[..1]), Some(false));
    }

    #[test]
    fn completeness_against_enumeration() {
        let mdp = chain(4);
        let all = enumerate_successes(&mdp).unwrap();
        assert!(is_complete(&build_trie(&all), &mdp).unwrap());
        assert!(!is_complete(&build_trie([&p1()]), &mdp).unwrap());
    }

    #[test]
    fn rollout_trie_is_complete_on_chain() {
        let mdp = chain(4);
        let r = rollout(&mdp, &PeerPolicy::uniform("u", 3, 2), 10_000, 7).unwrap();
        assert!(is_complete(&build_trie(&r.trajectories), &mdp).unwrap());
    }

    #[test]
    fn text_dump_lists_every_node() {
        let trie = build_trie([&p1(), &p2()]);
        let text = trie.dump_text();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("ε y=1 n=2\n  (0,0) y=1 n=1\n"));
    }
}
