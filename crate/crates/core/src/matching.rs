//! Maximum bipartite matching (Kuhn's augmenting paths) over bit-set
//! adjacency rows. Backs every Dilworth-style minimum chain cover in the
//! crate. Neighbor scans go in ascending id order, so ties are always broken
//! toward the lowest vertex id and results are deterministic.

use crate::bitset::BitSet;

pub(crate) struct BitMatcher {
    n_left: usize,
    n_right: usize,
    /// Left vertex -> admissible right vertices.
    adj: Vec<BitSet>,
    /// Right vertex -> admissible left vertices (mirror of `adj`).
    radj: Vec<BitSet>,
    pub match_left: Vec<Option<u32>>,
    pub match_right: Vec<Option<u32>>,
}

impl BitMatcher {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        BitMatcher {
            n_left,
            n_right,
            adj: vec![BitSet::new(n_right); n_left],
            radj: vec![BitSet::new(n_left); n_right],
            match_left: vec![None; n_left],
            match_right: vec![None; n_right],
        }
    }

    pub fn add_pair(&mut self, l: u32, r: u32) {
        self.adj[l as usize].insert(r as usize);
        self.radj[r as usize].insert(l as usize);
    }

    /// One augmenting attempt per left vertex, in id order. Since a matched
    /// left vertex never becomes unmatched again, a single pass is exact.
    pub fn solve(&mut self) -> usize {
        let mut visited = BitSet::new(self.n_right);
        for l in 0..self.n_left {
            if self.match_left[l].is_none() && !self.adj[l].is_empty() {
                visited.clear();
                self.try_left(l, &mut visited);
            }
        }
        self.match_left.iter().filter(|m| m.is_some()).count()
    }

    fn try_left(&mut self, l: usize, visited: &mut BitSet) -> bool {
        for wi in 0..visited.word_count() {
            loop {
                let w = self.adj[l].word(wi) & !visited.word(wi);
                if w == 0 {
                    break;
                }
                let r = wi * 64 + w.trailing_zeros() as usize;
                visited.insert(r);
                let free = match self.match_right[r] {
                    None => true,
                    Some(l2) => self.try_left(l2 as usize, visited),
                };
                if free {
                    self.match_right[r] = Some(l as u32);
                    self.match_left[l] = Some(r as u32);
                    return true;
                }
            }
        }
        false
    }

    /// Register a fresh right vertex with in-neighborhood `lefts` and try one
    /// augmenting path ending at it. Used incrementally when vertices arrive
    /// one at a time with all their predecessors already present.
    pub fn add_right_and_augment(&mut self, r: u32, lefts: &BitSet) -> bool {
        for l in lefts.iter() {
            self.adj[l].insert(r as usize);
        }
        self.radj[r as usize].union_with(lefts);
        let mut visited = BitSet::new(self.n_left);
        self.try_right(r as usize, &mut visited)
    }

    fn try_right(&mut self, r: usize, visited: &mut BitSet) -> bool {
        for wi in 0..visited.word_count() {
            loop {
                let w = self.radj[r].word(wi) & !visited.word(wi);
                if w == 0 {
                    break;
                }
                let l = wi * 64 + w.trailing_zeros() as usize;
                visited.insert(l);
                let free = match self.match_left[l] {
                    None => true,
                    Some(r2) => self.try_right(r2 as usize, visited),
                };
                if free {
                    self.match_left[l] = Some(r as u32);
                    self.match_right[r] = Some(l as u32);
                    return true;
                }
            }
        }
        false
    }

    /// Chains over `members` (ascending vertex ids): every member starts a
    /// chain unless it is some other member's matched successor.
    pub fn chains(&self, members: impl Iterator<Item = u32>) -> Vec<Vec<u32>> {
        let mut chains = Vec::new();
        for v in members {
            if self.match_right[v as usize].is_some() {
                continue;
            }
            let mut chain = vec![v];
            let mut cur = v;
            while let Some(next) = self.match_left[cur as usize] {
                chain.push(next);
                cur = next;
            }
            chains.push(chain);
        }
        chains
    }
}
