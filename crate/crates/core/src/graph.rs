//! Undirected collaboration networks, their structural queries and the
//! generators used by the experiments.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FirmType;
use crate::rng;

/// Largest number of firm pairs `enumerate_networks` will walk (n = 8).
pub const ENUMERATION_PAIR_LIMIT: usize = 28;

/// Symmetric, zero-diagonal binary adjacency. Edits return new values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Network {
    n: usize,
    adj: Vec<bool>,
    degrees: Vec<usize>,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Network(n={}, edges={:?})", self.n, self.edges())
    }
}

/// `eta_i = (n - d_i) / (n + 1)` per firm.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsity(pub Vec<f64>);

impl Sparsity {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for Sparsity {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Network {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
            degrees: vec![0; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = vec![true; n * n];
        for i in 0..n {
            adj[i * n + i] = false;
        }
        Self {
            n,
            adj,
            degrees: vec![n.saturating_sub(1); n],
        }
    }

    /// Builds a network from 0-indexed pairs. Duplicate pairs are tolerated.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::OutOfRange {
                    what: "firm index",
                    value: i.max(j),
                    max: n.saturating_sub(1),
                });
            }
            if i == j {
                return Err(Error::SamePair { i, j });
            }
            net.set(i, j, true);
        }
        Ok(net)
    }

    fn set(&mut self, i: usize, j: usize, linked: bool) {
        if self.adj[i * self.n + j] == linked {
            return;
        }
        self.adj[i * self.n + j] = linked;
        self.adj[j * self.n + i] = linked;
        if linked {
            self.degrees[i] += 1;
            self.degrees[j] += 1;
        } else {
            self.degrees[i] -= 1;
            self.degrees[j] -= 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn linked(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.linked(i, j))
    }

    /// Sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.linked(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn sparsity(&self) -> Sparsity {
        let n = self.n as f64;
        Sparsity(
            self.degrees
                .iter()
                .map(|&d| (n - d as f64) / (n + 1.0))
                .collect(),
        )
    }

    /// True iff `i` and `j` are linked to exactly the same firms outside the pair.
    pub fn symmetric_position(&self, i: usize, j: usize) -> bool {
        (0..self.n)
            .filter(|&k| k != i && k != j)
            .all(|k| self.linked(i, k) == self.linked(j, k))
    }

    pub fn with_link(&self, i: usize, j: usize) -> Self {
        assert_ne!(i, j, "self-links are not allowed");
        let mut out = self.clone();
        out.set(i, j, true);
        out
    }

    pub fn without_link(&self, i: usize, j: usize) -> Self {
        assert_ne!(i, j, "self-links are not allowed");
        let mut out = self.clone();
        out.set(i, j, false);
        out
    }

    /// Same network with the `(i, j)` link flipped.
    pub fn toggled(&self, i: usize, j: usize) -> Self {
        if self.linked(i, j) {
            self.without_link(i, j)
        } else {
            self.with_link(i, j)
        }
    }

    /// Two disjoint cliques: firms of equal type are linked, others are not.
    pub fn positive_assortative(types: &[FirmType]) -> Self {
        let n = types.len();
        let mut net = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if types[i] == types[j] {
                    net.set(i, j, true);
                }
            }
        }
        net
    }

    /// Cliques on `0..a` and `a..a+b`.
    pub fn two_clique(a: usize, b: usize) -> Self {
        let n = a + b;
        let mut net = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if (i < a) == (j < a) {
                    net.set(i, j, true);
                }
            }
        }
        net
    }

    /// `G(n, ell)` with an explicit stream.
    pub fn erdos_renyi_with<R: Rng + ?Sized>(n: usize, ell: f64, rng: &mut R) -> Self {
        if ell <= 0.0 {
            return Self::empty(n);
        }
        if ell >= 1.0 {
            return Self::complete(n);
        }
        let mut net = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < ell {
                    net.set(i, j, true);
                }
            }
        }
        net
    }

    pub fn erdos_renyi(n: usize, ell: f64, seed: u64) -> Self {
        Self::erdos_renyi_with(n, ell, &mut rng::stream(seed))
    }

    /// Uniform draw over edge sets with exactly `m` links.
    pub fn random_with_m_links_with<R: Rng + ?Sized>(
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let max = n * n.saturating_sub(1) / 2;
        if m > max {
            return Err(Error::OutOfRange {
                what: "link count",
                value: m,
                max,
            });
        }
        let pairs = pair_list(n);
        let mut net = Self::empty(n);
        let mut chosen = index::sample(rng, max, m).into_vec();
        chosen.sort_unstable();
        for k in chosen {
            let (i, j) = pairs[k];
            net.set(i, j, true);
        }
        Ok(net)
    }

    pub fn random_with_m_links(n: usize, m: usize, seed: u64) -> Result<Self> {
        Self::random_with_m_links_with(n, m, &mut rng::stream(seed))
    }

    /// Bit `k` set iff pair `k` of [`pair_list`] is linked. Only for n <= 11.
    pub fn to_mask(&self) -> u64 {
        let mut mask = 0u64;
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.linked(i, j) {
                    mask |= 1 << k;
                }
                k += 1;
            }
        }
        mask
    }

    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut net = Self::empty(n);
        for (k, (i, j)) in pair_list(n).into_iter().enumerate() {
            if mask >> k & 1 == 1 {
                net.set(i, j, true);
            }
        }
        net
    }

    /// Relabels firm `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n);
        for (i, j) in self.edges() {
            out.set(perm[i], perm[j], true);
        }
        out
    }

    /// One `i j` line per link, sorted, 0-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    /// Parses the edge-list text format. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse().ok()).ok_or_else(|| {
                    Error::Parse(format!("edge list line {}: {line:?}", lineno + 1))
                })
            };
            let i = parse(parts.next())?;
            let j = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!(
                    "edge list line {}: {line:?}",
                    lineno + 1
                )));
            }
            edges.push((i, j));
        }
        Self::from_edges(n, &edges)
    }

    /// Compact `i-j;k-l` rendering used in CSV cells.
    pub fn edge_string(&self) -> String {
        self.edges()
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkRepr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = NetworkRepr::deserialize(d)?;
        Network::from_edges(repr.n, &repr.edges).map_err(serde::de::Error::custom)
    }
}

/// Unordered firm pairs `(i, j)`, `i < j`, in row-major order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// All permutations of `0..n` mapping every firm to a firm of the same label.
pub fn label_preserving_permutations<T: Ord>(labels: &[T]) -> Vec<Vec<usize>> {
    let n = labels.len();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let distinct: BTreeSet<&T> = labels.iter().collect();
    for label in distinct {
        blocks.push((0..n).filter(|&i| &labels[i] == label).collect());
    }
    let mut out = vec![(0..n).collect::<Vec<usize>>()];
    for block in &blocks {
        let mut next = Vec::new();
        for image in permutations_of(block) {
            for base in &out {
                let mut p = base.clone();
                for (src, dst) in block.iter().zip(&image) {
                    p[*src] = *dst;
                }
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Canonical form of edge masks under a fixed permutation group: the
/// lexicographically (numerically) smallest image of the mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskCanonicalizer {
    /// For each group element, the image index of every pair.
    pair_maps: Vec<Vec<usize>>,
}

impl MaskCanonicalizer {
    pub fn new<T: Ord>(labels: &[T]) -> Self {
        let n = labels.len();
        let pairs = pair_list(n);
        let mut index = vec![usize::MAX; n * n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            index[i * n + j] = k;
            index[j * n + i] = k;
        }
        let pair_maps = label_preserving_permutations(labels)
            .into_iter()
            .map(|p| pairs.iter().map(|&(i, j)| index[p[i] * n + p[j]]).collect())
            .collect();
        Self { pair_maps }
    }

    pub fn group_order(&self) -> usize {
        self.pair_maps.len()
    }

    pub fn canonical(&self, mask: u64) -> u64 {
        self.pair_maps
            .iter()
            .map(|map| {
                let mut image = 0u64;
                let mut m = mask;
                while m != 0 {
                    let k = m.trailing_zeros() as usize;
                    image |= 1 << map[k];
                    m &= m - 1;
                }
                image
            })
            .min()
            .unwrap_or(mask)
    }
}

/// Every labeled network on `n` firms, in mask order. With `dedup_labels`,
/// only the canonical representative of each class under label-preserving
/// relabelings is kept.
pub fn enumerate_networks<T: Ord>(
    n: usize,
    dedup_labels: Option<&[T]>,
) -> Result<impl Iterator<Item = Network>> {
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > ENUMERATION_PAIR_LIMIT {
        return Err(Error::TooLarge {
            pairs,
            limit: ENUMERATION_PAIR_LIMIT,
        });
    }
    if let Some(labels) = dedup_labels {
        if labels.len() != n {
            return Err(Error::SizeMismatch {
                network: n,
                profile: labels.len(),
            });
        }
    }
    let canon = dedup_labels.map(MaskCanonicalizer::new);
    Ok((0..1u64 << pairs)
        .filter(move |&mask| canon.as_ref().is_none_or(|c| c.canonical(mask) == mask))
        .map(move |mask| Network::from_mask(n, mask)))
}
