// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Undirected binary networks: representation, random generation and
//! topology comparisons.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{data, invalid, Result};

/// Undirected simple graph on `n ≥ 2` nodes stored as a dense symmetric
/// boolean adjacency matrix with an empty diagonal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    n: usize,
    adj: Vec<bool>,
}

impl Network {
    /// Edgeless network on `n` nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("network needs at least 2 nodes, got {n}")));
        }
        Ok(Self {
            n,
            adj: vec![false; n * n],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut net = Self::empty(n)?;
        for (i, j) in all_pairs(n) {
            net.set_edge(i, j, true);
        }
        Ok(net)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(n)?;
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i},{j}) out of range for n={n}")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at node {i}")));
            }
            net.set_edge(i, j, true);
        }
        Ok(net)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`. Panics on `i == j` or out-of-range indices.
    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not representable");
        self.adj[i * self.n + j] = present;
        self.adj[j * self.n + i] = present;
    }

    #[inline]
    pub fn flip_edge(&mut self, i: usize, j: usize) {
        let v = self.has_edge(i, j);
        self.set_edge(i, j, !v);
    }

    /// Adjacency entry as 0/1.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        u8::from(self.has_edge(i, j))
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        all_pairs(self.n)
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        all_pairs(self.n)
            .filter(|&(i, j)| self.has_edge(i, j))
            .count()
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    /// Checks the representation invariants; used on deserialized input.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.adj.len() != self.n * self.n {
            return Err(data("malformed adjacency storage"));
        }
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return Err(data(format!("self-loop at node {i}")));
            }
            for j in 0..i {
                if self.has_edge(i, j) != self.has_edge(j, i) {
                    return Err(data(format!("asymmetric entry ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&NetworkJson::from(self))
            .expect("network serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: NetworkJson = serde_json::from_str(text)?;
        Self::try_from(raw)
    }
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Network(n={}, edges={:?})", self.n, self.edges())
    }
}

/// Wire form: `{"n": <int>, "edges": [[i,j], ...]}` with `i < j`, sorted.
#[derive(Serialize, Deserialize)]
struct NetworkJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl From<&Network> for NetworkJson {
    fn from(net: &Network) -> Self {
        Self {
            n: net.n,
            edges: net.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = crate::error::QnetError;

    fn try_from(raw: NetworkJson) -> Result<Self> {
        let mut net = Network::empty(raw.n).map_err(|e| data(e.to_string()))?;
        for [i, j] in raw.edges {
            if i >= raw.n || j >= raw.n || i == j {
                return Err(data(format!("invalid edge [{i},{j}] for n={}", raw.n)));
            }
            if net.has_edge(i, j) {
                return Err(data(format!("duplicate edge [{i},{j}]")));
            }
            net.set_edge(i, j, true);
        }
        Ok(net)
    }
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = NetworkJson::deserialize(d)?;
        Network::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// All unordered pairs `(i, j)` with `i < j`, lexicographic.
pub fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Bijection on `{0..n-1}`; `perm[i]` is the new label of node `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NodePermutation(Vec<usize>);

impl NodePermutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(invalid(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            seen[p] = true;
        }
        Ok(Self(perm))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Uniformly random permutation, optionally holding one node in place.
    pub fn random<R: Rng + ?Sized>(n: usize, fixed: Option<usize>, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut movable: Vec<usize> = (0..n).filter(|&i| Some(i) != fixed).collect();
        let mut images = movable.clone();
        images.shuffle(rng);
        let mut perm = vec![0; n];
        if let Some(f) = fixed {
            perm[f] = f;
        }
        for (src, dst) in movable.drain(..).zip(images) {
            perm[src] = dst;
        }
        Self(perm)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl TryFrom<Vec<usize>> for NodePermutation {
    type Error = crate::error::QnetError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NodePermutation> for Vec<usize> {
    fn from(p: NodePermutation) -> Self {
        p.0
    }
}

/// Erdős–Rényi G(n, p): every unordered pair independently present with probability `p`.
pub fn generate_erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Network> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0,1]")));
    }
    let mut net = Network::empty(n)?;
    for (i, j) in all_pairs(n) {
        if rng.random::<f64>() < p {
            net.set_edge(i, j, true);
        }
    }
    Ok(net)
}

/// Connected graph obtained by rejection: draw `p ~ U[0,1]`, draw G(n, p), and
/// retry with a fresh `p` until the sample is connected.
pub fn generate_random_connected<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Network> {
    Network::empty(n)?;
    loop {
        let p: f64 = rng.random();
        let net = generate_erdos_renyi(n, p, rng)?;
        if is_connected(&net) {
            return Ok(net);
        }
    }
}

pub fn is_connected(net: &Network) -> bool {
    let mut seen = vec![false; net.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for v in net.neighbours(u) {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == net.n
}

/// Number of unordered pairs on which the two adjacency matrices differ.
pub fn edge_distance(a: &Network, b: &Network) -> Result<usize> {
    if a.n != b.n {
        return Err(invalid(format!("size mismatch: {} vs {}", a.n, b.n)));
    }
    Ok(all_pairs(a.n)
        .filter(|&(i, j)| a.has_edge(i, j) != b.has_edge(i, j))
        .count())
}

/// Relabels nodes so that `result[perm[i]][perm[j]] == net[i][j]`.
pub fn apply_permutation(net: &Network, perm: &NodePermutation) -> Result<Network> {
    if perm.len() != net.n {
        return Err(invalid(format!(
            "permutation of length {} applied to {}-node network",
            perm.len(),
            net.n
        )));
    }
    let mut out = Network::empty(net.n)?;
    for (i, j) in net.edges() {
        out.set_edge(perm.image(i), perm.image(j), true);
    }
    Ok(out)
}

/// True iff relabelling `a` by `perm` yields `b` exactly.
pub fn verify_isomorphism(a: &Network, b: &Network, perm: &NodePermutation) -> bool {
    a.n == b.n
        && perm.len() == a.n
        && a.edge_count() == b.edge_count()
        && apply_permutation(a, perm).is_ok_and(|relabelled| relabelled == *b)
}

/// Searches for `perm` with `verify_isomorphism(a, b, perm)`, optionally
/// holding node `fixed` in place. Backtracking with degree pruning; intended
/// for the small networks handled here.
pub fn find_isomorphism(a: &Network, b: &Network, fixed: Option<usize>) -> Option<NodePermutation> {
    let n = a.n;
    if n != b.n || a.edge_count() != b.edge_count() {
        return None;
    }
    let da: Vec<usize> = (0..n).map(|i| a.degree(i)).collect();
    let db: Vec<usize> = (0..n).map(|i| b.degree(i)).collect();
    if let Some(f) = fixed {
        if f >= n || da[f] != db[f] {
            return None;
        }
    }
    {
        let (mut sa, mut sb) = (da.clone(), db.clone());
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return None;
        }
    }
    // Fixed node first, then high degree first for early pruning.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (Some(i) != fixed, std::cmp::Reverse(da[i]), i));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        depth: usize,
        order: &[usize],
        a: &Network,
        b: &Network,
        degrees: (&[usize], &[usize]),
        fixed: Option<usize>,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        let Some(&u) = order.get(depth) else {
            return true;
        };
        for v in 0..b.n {
            if used[v] || degrees.0[u] != degrees.1[v] || (Some(u) == fixed && v != u) {
                continue;
            }
            let consistent = order[..depth]
                .iter()
                .all(|&w| a.has_edge(u, w) == b.has_edge(v, map[w]));
            if !consistent {
                continue;
            }
            map[u] = v;
            used[v] = true;
            if extend(depth + 1, order, a, b, degrees, fixed, map, used) {
                return true;
            }
            used[v] = false;
            map[u] = usize::MAX;
        }
        false
    }

    extend(0, &order, a, b, (&da, &db), fixed, &mut map, &mut used).then_some(NodePermutation(map))
}
