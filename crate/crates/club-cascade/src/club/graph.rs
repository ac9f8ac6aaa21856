//! Undirected user graph with edge deletion and connected-component queries.
//!
//! Components are cached per user and rebuilt lazily with a union-find pass
//! whenever an edge has been deleted since the last query.

use std::collections::BTreeSet;

use rand::Rng;

#[derive(Clone, Debug)]
pub struct UserGraph {
    adjacency: Vec<BTreeSet<u32>>,
    edge_count: usize,
    component_cache: Vec<u32>,
    dirty: bool,
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

impl UserGraph {
    pub fn complete(user_count: usize) -> Self {
        assert!(user_count >= 1);
        let adjacency = (0..user_count)
            .map(|i| {
                (0..user_count as u32)
                    .filter(|&j| j as usize != i)
                    .collect()
            })
            .collect();
        Self {
            adjacency,
            edge_count: user_count * (user_count - 1) / 2,
            component_cache: vec![0; user_count],
            dirty: true,
        }
    }

    pub fn empty(user_count: usize) -> Self {
        assert!(user_count >= 1);
        Self {
            adjacency: vec![BTreeSet::new(); user_count],
            edge_count: 0,
            component_cache: vec![0; user_count],
            dirty: true,
        }
    }

    /// Include each of the C(u,2) edges independently with probability `p`.
    pub fn erdos_renyi(user_count: usize, p: f64, rng: &mut impl Rng) -> Self {
        assert!((0.0..=1.0).contains(&p), "edge probability must be in [0,1]");
        let mut graph = Self::empty(user_count);
        for i in 0..user_count as u32 {
            for j in i + 1..user_count as u32 {
                if rng.random::<f64>() < p {
                    graph.adjacency[i as usize].insert(j);
                    graph.adjacency[j as usize].insert(i);
                    graph.edge_count += 1;
                }
            }
        }
        graph
    }

    pub fn user_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adjacency[a].contains(&(b as u32))
    }

    /// Neighbors of `user`, ascending.
    pub fn neighbors(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[user].iter().map(|&j| j as usize)
    }

    /// Insert an edge; used when restoring a snapshot (the learner itself
    /// only ever deletes).
    pub(crate) fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b || !self.adjacency[a].insert(b as u32) {
            return false;
        }
        self.adjacency[b].insert(a as u32);
        self.edge_count += 1;
        self.dirty = true;
        true
    }

    /// Remove an edge; returns whether it existed. Deletion invalidates the
    /// component cache.
    pub fn delete_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b || !self.adjacency[a].remove(&(b as u32)) {
            return false;
        }
        self.adjacency[b].remove(&(a as u32));
        self.edge_count -= 1;
        self.dirty = true;
        true
    }

    fn rebuild_components(&mut self) {
        let n = self.user_count();
        let mut uf = UnionFind::new(n);
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors.range(i as u32 + 1..) {
                uf.union(i as u32, j);
            }
        }
        // Canonical component id: smallest member.
        let mut canonical = vec![u32::MAX; n];
        for i in 0..n as u32 {
            let root = uf.find(i) as usize;
            if canonical[root] == u32::MAX {
                canonical[root] = i;
            }
            self.component_cache[i as usize] = canonical[root];
        }
        self.dirty = false;
    }

    /// Component id (smallest member) of `user`.
    pub fn component_id(&mut self, user: usize) -> usize {
        if self.dirty {
            self.rebuild_components();
        }
        self.component_cache[user] as usize
    }

    /// All members of `user`'s component, ascending.
    pub fn component_members(&mut self, user: usize) -> Vec<usize> {
        let id = self.component_id(user) as u32;
        self.component_cache
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == id).then_some(i))
            .collect()
    }

    /// The whole partition, as member lists sorted by smallest member.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        if self.dirty {
            self.rebuild_components();
        }
        let mut by_id: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for (i, &c) in self.component_cache.iter().enumerate() {
            by_id.entry(c).or_default().push(i);
        }
        by_id.into_values().collect()
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`, ascending; deterministic
    /// for snapshots.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors.range(i as u32 + 1..) {
                out.push((i as u32, j));
            }
        }
        out
    }

    /// Recompute the partition from scratch and compare against the cache.
    pub fn cache_is_consistent(&self) -> bool {
        if self.dirty {
            return true;
        }
        let mut fresh = self.clone();
        fresh.dirty = true;
        fresh.rebuild_components();
        fresh.component_cache == self.component_cache
    }
}
