use std::collections::BTreeMap;

use crate::dist::StateId;

/// A partition of `0..n` into nonempty disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Single block holding every state.
    pub fn coarsest(n: usize) -> Partition {
        Partition {
            blocks: if n == 0 { vec![] } else { vec![(0..n).map(StateId).collect()] },
            block_of: vec![0; n],
        }
    }

    pub fn discrete(n: usize) -> Partition {
        Partition {
            blocks: (0..n).map(|i| vec![StateId(i)]).collect(),
            block_of: (0..n).collect(),
        }
    }

    /// Builds from explicit blocks; `None` unless they exactly cover `0..n`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<StateId>>) -> Option<Partition> {
        let mut block_of = vec![usize::MAX; n];
        let mut out = Vec::new();
        for mut b in blocks {
            if b.is_empty() {
                return None;
            }
            b.sort();
            for s in &b {
                if s.0 >= n || block_of[s.0] != usize::MAX {
                    return None;
                }
                block_of[s.0] = out.len();
            }
            out.push(b);
        }
        if block_of.contains(&usize::MAX) {
            return None;
        }
        Some(Partition { blocks: out, block_of })
    }

    /// Builds from a block label per state.
    pub fn from_labels(labels: &[usize]) -> Partition {
        let mut by_label: BTreeMap<usize, Vec<StateId>> = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            by_label.entry(*l).or_default().push(StateId(i));
        }
        let mut blocks: Vec<Vec<StateId>> = by_label.into_values().collect();
        blocks.sort();
        Partition::from_blocks(labels.len(), blocks).unwrap()
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s.0]
    }

    pub fn block(&self, i: usize) -> &[StateId] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        self.block_of[s.0] == self.block_of[t.0]
    }

    /// Splits block `i` into the classes of `key`. The sub-block holding the
    /// smallest state keeps index `i`; the others are appended.
    pub fn split_block<K: Ord, F: FnMut(StateId) -> K>(&self, i: usize, mut key: F) -> Partition {
        let mut groups: Vec<(K, Vec<StateId>)> = Vec::new();
        for &s in &self.blocks[i] {
            let k = key(s);
            match groups.iter_mut().find(|(gk, _)| *gk == k) {
                Some((_, g)) => g.push(s),
                None => groups.push((k, vec![s])),
            }
        }
        let mut p = self.clone();
        let mut iter = groups.into_iter().map(|(_, g)| g);
        p.blocks[i] = iter.next().unwrap_or_default();
        for g in iter {
            let idx = p.blocks.len();
            for s in &g {
                p.block_of[s.0] = idx;
            }
            p.blocks.push(g);
        }
        p
    }

    /// Splits block `i` according to a precomputed grouping (each inner vector
    /// a sub-block), used when the key is not `Ord`.
    pub fn split_into(&self, i: usize, groups: Vec<Vec<StateId>>) -> Partition {
        let mut labels: BTreeMap<StateId, usize> = BTreeMap::new();
        for (g, members) in groups.iter().enumerate() {
            for s in members {
                labels.insert(*s, g);
            }
        }
        self.split_block(i, |s| labels[&s])
    }

    /// Blocks sorted internally and among each other; independent of block
    /// numbering, so suitable for equality checks.
    pub fn canonical(&self) -> Vec<Vec<StateId>> {
        let mut b: Vec<Vec<StateId>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort();
                b
            })
            .collect();
        b.sort();
        b
    }

    /// True if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|s| other.same_block(*s, b[0])))
    }

    /// Restricts to a subset of states, renumbered by the given map.
    pub fn project(&self, map: &[Option<StateId>], n: usize) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().filter_map(|s| map[s.0]).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        Partition::from_blocks(n, blocks).expect("projection covers the target")
    }
}
