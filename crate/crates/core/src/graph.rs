//! Side-information graphs, random generators and exact small-n oracles.
//!
//! Vertices are 0-based in the API. The text format is 1-based:
//!
//! ```text
//! n 4 DIRECTED
//! 1 2
//! 1 3
//! ```
//!
//! An edge `(i, j)` means user `i` caches message `j`.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Whether every edge is paired with its reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Undirected,
    Directed,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Undirected => "UNDIRECTED",
            GraphKind::Directed => "DIRECTED",
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UNDIRECTED" => Ok(GraphKind::Undirected),
            "DIRECTED" => Ok(GraphKind::Directed),
            other => Err(Error::InvalidParameter(format!("unknown graph kind {other:?}"))),
        }
    }
}

/// Directed side-information graph on `n` vertices without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SideInfoGraph {
    n: usize,
    kind: GraphKind,
    adj: Vec<bool>,
}

impl SideInfoGraph {
    pub fn empty(n: usize, kind: GraphKind) -> Self {
        SideInfoGraph {
            n,
            kind,
            adj: vec![false; n * n],
        }
    }

    /// Complete bidirected graph.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n, GraphKind::Undirected);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.adj[i * n + j] = true;
                }
            }
        }
        g
    }

    /// Undirected cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n, GraphKind::Undirected);
        for i in 0..n {
            let j = (i + 1) % n;
            if i != j {
                g.set_pair(i, j);
            }
        }
        g
    }

    /// Builds a graph from ordered edges. For `Undirected`, every listed edge
    /// must also appear reversed.
    pub fn from_edges(n: usize, kind: GraphKind, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n, kind);
        for &(i, j) in edges {
            g.check_edge(i, j)?;
            g.adj[i * n + j] = true;
        }
        if kind == GraphKind::Undirected && !g.is_symmetric() {
            return Err(Error::InvalidParameter(
                "UNDIRECTED graph has an edge without its reverse".into(),
            ));
        }
        Ok(g)
    }

    /// Builds an undirected graph from unordered pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n, GraphKind::Undirected);
        for &(i, j) in pairs {
            g.check_edge(i, j)?;
            g.set_pair(i, j);
        }
        Ok(g)
    }

    fn check_edge(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) out of range for n = {}",
                self.n
            )));
        }
        if i == j {
            return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
        }
        Ok(())
    }

    fn set_pair(&mut self, i: usize, j: usize) {
        self.adj[i * self.n + j] = true;
        self.adj[j * self.n + i] = true;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Ordered edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n * n)
            .filter(move |&k| self.adj[k])
            .map(move |k| (k / n, k % n))
    }

    /// Number of ordered edges.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.adj[i * self.n..(i + 1) * self.n]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    /// Messages cached by user `i`.
    pub fn has_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.has_edge(i, j) == self.has_edge(j, i)))
    }

    fn require_undirected(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::InvalidKind)
        }
    }

    /// Neighbour bitmasks for graphs with at most 64 vertices.
    pub(crate) fn neighbour_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| self.has_edge(i, j))
                    .fold(0u64, |m, j| m | (1 << j))
            })
            .collect()
    }

    /// Serializes to the canonical text form (edges sorted).
    pub fn to_text(&self) -> String {
        let mut s = format!("n {} {}\n", self.n, self.kind.as_str());
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "n" {
            return Err(Error::parse(1, "expected `n <count> <UNDIRECTED|DIRECTED>`"));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|_| Error::parse(1, "bad vertex count"))?;
        let kind: GraphKind = parts[2].parse().map_err(|_| Error::parse(1, "bad kind"))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                let tok = it
                    .next()
                    .ok_or_else(|| Error::parse(lineno + 1, "expected `i j`"))?;
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno + 1, format!("bad vertex {tok:?}")))?;
                if v == 0 || v > n {
                    return Err(Error::parse(lineno + 1, format!("vertex {v} out of range")));
                }
                Ok(v - 1)
            };
            let i = next()?;
            let j = next()?;
            if it.next().is_some() {
                return Err(Error::parse(lineno + 1, "trailing tokens"));
            }
            edges.push((i, j));
        }
        Self::from_edges(n, kind, &edges)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")))
    }
}

fn check_nonempty(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Undirected Erdős–Rényi graph `G(n, p)`.
pub fn gen_undirected_er(n: usize, p: f64, seed: RngSeed) -> Result<SideInfoGraph> {
    check_nonempty(n)?;
    check_probability(p)?;
    let mut rng = seed.rng();
    let mut g = SideInfoGraph::empty(n, GraphKind::Undirected);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.set_pair(i, j);
            }
        }
    }
    Ok(g)
}

/// Directed Erdős–Rényi graph: each ordered pair independently with probability `p`.
pub fn gen_directed_er(n: usize, p: f64, seed: RngSeed) -> Result<SideInfoGraph> {
    check_nonempty(n)?;
    check_probability(p)?;
    let mut rng = seed.rng();
    let mut g = SideInfoGraph::empty(n, GraphKind::Directed);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                g.adj[i * n + j] = true;
            }
        }
    }
    Ok(g)
}

/// Directed graph where every user caches a uniformly random `c`-subset of
/// the other messages.
pub fn gen_directed_regular(n: usize, c: usize, seed: RngSeed) -> Result<SideInfoGraph> {
    check_nonempty(n)?;
    if c > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "cache size {c} exceeds n - 1 = {}",
            n - 1
        )));
    }
    let mut rng = seed.rng();
    let mut g = SideInfoGraph::empty(n, GraphKind::Directed);
    for i in 0..n {
        for k in index::sample(&mut rng, n - 1, c) {
            let j = if k >= i { k + 1 } else { k };
            g.adj[i * n + j] = true;
        }
    }
    Ok(g)
}

/// Graph built from three disjoint cliques with random inter-group edges,
/// together with the group partition (a clique cover of size 3).
pub fn gen_three_clique_coverable_certified(
    n: usize,
    p: f64,
    seed: RngSeed,
) -> Result<(SideInfoGraph, [Vec<usize>; 3])> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n = {n} < 3")));
    }
    check_probability(p)?;
    let mut rng = seed.rng();
    let group = loop {
        let g: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        if (0..3).all(|k| g.contains(&k)) {
            break g;
        }
    };
    let mut g = SideInfoGraph::empty(n, GraphKind::Undirected);
    for i in 0..n {
        for j in i + 1..n {
            if group[i] == group[j] || rng.random_bool(p) {
                g.set_pair(i, j);
            }
        }
    }
    let mut groups: [Vec<usize>; 3] = Default::default();
    for (v, &k) in group.iter().enumerate() {
        groups[k].push(v);
    }
    Ok((g, groups))
}

pub fn gen_three_clique_coverable(n: usize, p: f64, seed: RngSeed) -> Result<SideInfoGraph> {
    gen_three_clique_coverable_certified(n, p, seed).map(|(g, _)| g)
}

/// Maximal undirected subgraph: keeps `(i, j)` iff `(j, i)` is also present.
pub fn undirected_subgraph(g: &SideInfoGraph) -> SideInfoGraph {
    let n = g.n;
    let mut out = SideInfoGraph::empty(n, GraphKind::Undirected);
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(i, j) && g.has_edge(j, i) {
                out.set_pair(i, j);
            }
        }
    }
    out
}

/// Complement of an undirected graph.
pub fn complement(g: &SideInfoGraph) -> Result<SideInfoGraph> {
    g.require_undirected()?;
    let n = g.n;
    let mut out = SideInfoGraph::empty(n, GraphKind::Undirected);
    for i in 0..n {
        for j in i + 1..n {
            if !g.has_edge(i, j) {
                out.set_pair(i, j);
            }
        }
    }
    Ok(out)
}

pub const INDEPENDENCE_LIMIT: usize = 30;
pub const CLIQUE_COVER_LIMIT: usize = 12;

/// Exact independence number by branch and bound.
pub fn independence_number(g: &SideInfoGraph) -> Result<usize> {
    g.require_undirected()?;
    if g.n > INDEPENDENCE_LIMIT {
        return Err(Error::SizeLimit {
            n: g.n,
            limit: INDEPENDENCE_LIMIT,
        });
    }
    let nbrs = g.neighbour_masks();
    let all = if g.n == 64 { u64::MAX } else { (1u64 << g.n) - 1 };
    let mut best = 0;
    max_independent(all, 0, &nbrs, &mut best);
    Ok(best as usize)
}

fn max_independent(cand: u64, taken: u32, nbrs: &[u64], best: &mut u32) {
    if cand == 0 {
        *best = (*best).max(taken);
        return;
    }
    if taken + cand.count_ones() <= *best {
        return;
    }
    // A vertex with at most one candidate neighbour can always be taken.
    let mut bits = cand;
    let mut branch = 0usize;
    let mut branch_deg = 0u32;
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let deg = (nbrs[v] & cand).count_ones();
        if deg <= 1 {
            let rest = cand & !(1u64 << v) & !nbrs[v];
            max_independent(rest, taken + 1, nbrs, best);
            return;
        }
        if deg > branch_deg {
            branch = v;
            branch_deg = deg;
        }
    }
    let v = branch;
    max_independent(cand & !(1u64 << v) & !nbrs[v], taken + 1, nbrs, best);
    max_independent(cand & !(1u64 << v), taken, nbrs, best);
}

/// Exact minimum clique cover number (chromatic number of the complement),
/// by dynamic programming over vertex subsets.
pub fn exact_clique_cover(g: &SideInfoGraph) -> Result<usize> {
    g.require_undirected()?;
    let n = g.n;
    if n > CLIQUE_COVER_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: CLIQUE_COVER_LIMIT,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let nbrs = g.neighbour_masks();
    let full = 1usize << n;
    let mut is_clique = vec![false; full];
    is_clique[0] = true;
    for s in 1..full {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        is_clique[s] = is_clique[rest] && (rest as u64 & !nbrs[v]) == 0;
    }
    let mut cover = vec![usize::MAX; full];
    cover[0] = 0;
    for s in 1..full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        // enumerate subsets t of rest; clique = t | low
        let mut t = rest;
        loop {
            let c = t | low;
            if is_clique[c] && cover[s ^ c] != usize::MAX {
                cover[s] = cover[s].min(cover[s ^ c] + 1);
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
    }
    Ok(cover[full - 1])
}

/// Searches for a partition of the vertices into at most `k` cliques by
/// backtracking k-colouring of the complement. No size guard; intended for
/// small `k`.
pub fn clique_cover_within(g: &SideInfoGraph, k: usize) -> Result<Option<Vec<Vec<usize>>>> {
    g.require_undirected()?;
    let n = g.n;
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    if k == 0 {
        return Ok(None);
    }
    // conflict(i, j): i and j cannot share a clique
    let conflict = |i: usize, j: usize| i != j && !g.has_edge(i, j);
    let mut color = vec![usize::MAX; n];
    fn go(
        color: &mut [usize],
        k: usize,
        conflict: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        let n = color.len();
        // DSatur: uncoloured vertex with most distinct neighbour colours
        let mut pick = None;
        let mut pick_sat = 0usize;
        let mut pick_deg = 0usize;
        for v in 0..n {
            if color[v] != usize::MAX {
                continue;
            }
            let mut seen = 0u64;
            let mut deg = 0;
            for u in 0..n {
                if conflict(v, u) {
                    deg += 1;
                    if color[u] != usize::MAX {
                        seen |= 1 << color[u];
                    }
                }
            }
            let sat = seen.count_ones() as usize;
            if pick.is_none() || sat > pick_sat || (sat == pick_sat && deg > pick_deg) {
                pick = Some((v, seen));
                pick_sat = sat;
                pick_deg = deg;
            }
        }
        let Some((v, seen)) = pick else {
            return true;
        };
        let used = color.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |&c| c + 1);
        for c in 0..k.min(used + 1) {
            if seen & (1 << c) == 0 {
                color[v] = c;
                if go(color, k, conflict) {
                    return true;
                }
                color[v] = usize::MAX;
            }
        }
        false
    }
    if k > 63 {
        return Err(Error::InvalidParameter("k must be below 64".into()));
    }
    if !go(&mut color, k, &conflict) {
        return Ok(None);
    }
    let classes = color.iter().max().map_or(0, |&c| c + 1);
    let mut cover = vec![Vec::new(); classes];
    for (v, &c) in color.iter().enumerate() {
        cover[c].push(v);
    }
    Ok(Some(cover))
}
