use std::collections::BTreeMap;

#[derive(Debug, Default, Clone)]
struct Node {
    children: BTreeMap<usize, usize>,
    terminal: bool,
}

/// Set-of-supports store. A support is keyed by its sorted index sequence,
/// so membership ignores the order in which indices were selected.
#[derive(Debug, Clone)]
pub struct SupportTrie {
    nodes: Vec<Node>,
    len: usize,
}

impl Default for SupportTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl SupportTrie {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::default()],
            len: 0,
        }
    }

    /// Number of distinct supports stored.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn sorted(support: &[usize]) -> Vec<usize> {
        let mut key = support.to_vec();
        key.sort_unstable();
        key
    }

    pub fn contains(&self, support: &[usize]) -> bool {
        let mut at = 0;
        for j in Self::sorted(support) {
            match self.nodes[at].children.get(&j) {
                Some(&next) => at = next,
                None => return false,
            }
        }
        self.nodes[at].terminal
    }

    /// Inserts `support`; returns `false` if an equal set was already present.
    pub fn check_insert(&mut self, support: &[usize]) -> bool {
        let mut at = 0;
        for j in Self::sorted(support) {
            at = match self.nodes[at].children.get(&j) {
                Some(&next) => next,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[at].children.insert(j, id);
                    id
                }
            };
        }
        if self.nodes[at].terminal {
            false
        } else {
            self.nodes[at].terminal = true;
            self.len += 1;
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, HashSet};

    #[test]
    fn order_insensitive() {
        let mut t = SupportTrie::new();
        assert!(t.check_insert(&[3, 1, 2]));
        assert!(!t.check_insert(&[2, 3, 1]));
        assert!(t.contains(&[1, 3, 2]));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn prefix_and_superset_are_distinct() {
        let mut t = SupportTrie::new();
        assert!(t.check_insert(&[1, 2]));
        assert!(t.check_insert(&[1, 2, 3]));
        assert!(!t.contains(&[1]));
        assert!(t.check_insert(&[1]));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_set_is_a_member_once_inserted() {
        let mut t = SupportTrie::new();
        assert!(!t.contains(&[]));
        assert!(t.check_insert(&[]));
        assert!(!t.check_insert(&[]));
    }

    #[test]
    fn matches_set_of_sorted_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let mut trie = SupportTrie::new();
        let mut oracle: HashSet<Vec<usize>> = HashSet::new();
        for _ in 0..1000 {
            let size = rng.random_range(0..6);
            let subset: BTreeSet<usize> = (0..size).map(|_| rng.random_range(0..64)).collect();
            // shuffle the presentation order
            let mut shown: Vec<usize> = subset.iter().copied().collect();
            shown.reverse();
            if rng.random_bool(0.5) {
                let half = shown.len() / 2;
                shown.rotate_left(half);
            }
            let key: Vec<usize> = subset.into_iter().collect();
            assert_eq!(trie.contains(&shown), oracle.contains(&key));
            assert_eq!(trie.check_insert(&shown), oracle.insert(key));
        }
        assert_eq!(trie.len(), oracle.len());
    }
}
