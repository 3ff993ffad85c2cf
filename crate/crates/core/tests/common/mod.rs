//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use minrank::netcode::{Demand, NetEdge, NetworkSpec};
use minrank::{GraphKind, RngSeed, SideInfoGraph};
use nalgebra::DMatrix;
use rand::Rng;

/// Undirected graph as adjacency bitmasks.
pub type Masks = Vec<u32>;

pub fn masks(g: &SideInfoGraph) -> Masks {
    (0..g.n())
        .map(|i| (0..g.n()).filter(|&j| g.has_edge(i, j)).fold(0u32, |m, j| m | 1 << j))
        .collect()
}

pub fn graph_of(adj: &Masks) -> SideInfoGraph {
    let n = adj.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| adj[i] >> j & 1 == 1)
        .collect();
    SideInfoGraph::from_pairs(n, &pairs).unwrap()
}

/// Largest independent set by subset enumeration.
pub fn brute_alpha(adj: &Masks) -> usize {
    let n = adj.len();
    (0u32..1 << n)
        .filter(|&s| (0..n).all(|i| s >> i & 1 == 0 || adj[i] & s == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap()
}

fn is_clique(adj: &Masks, s: u32) -> bool {
    (0..adj.len()).all(|i| s >> i & 1 == 0 || (s & !(1 << i)) & !adj[i] == 0)
}

/// Minimum clique partition by dynamic programming over vertex subsets.
pub fn brute_clique_cover(adj: &Masks) -> usize {
    let n = adj.len();
    let full = (1u32 << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s & !low;
        let mut sub = rest;
        loop {
            let c = sub | low;
            if is_clique(adj, c) && best[(s & !c) as usize] != usize::MAX {
                best[s as usize] = best[s as usize].min(best[(s & !c) as usize] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full as usize]
}

pub fn is_connected(adj: &Masks) -> bool {
    let n = adj.len();
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let i = frontier.trailing_zeros() as usize;
        frontier &= !(1 << i);
        let new = adj[i] & !seen;
        seen |= new;
        frontier |= new;
    }
    seen.count_ones() as usize == n
}

/// Canonical form: lexicographically smallest upper-triangle bit string over
/// vertex orders that respect the degree partition.
fn canonical(adj: &Masks) -> u64 {
    let n = adj.len();
    let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| deg[i]);
    let mut best = u64::MAX;
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(
        adj: &Masks,
        deg: &[u32],
        order: &[usize],
        perm: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut u64,
    ) {
        let n = adj.len();
        if perm.len() == n {
            let mut code = 0u64;
            for a in 0..n {
                for b in a + 1..n {
                    code = code << 1 | (adj[perm[a]] >> perm[b] & 1) as u64;
                }
            }
            *best = (*best).min(code);
            return;
        }
        let want = deg[order[perm.len()]];
        for v in 0..n {
            if !used[v] && deg[v] == want {
                used[v] = true;
                perm.push(v);
                rec(adj, deg, order, perm, used, best);
                perm.pop();
                used[v] = false;
            }
        }
    }
    rec(adj, &deg, &order, &mut perm, &mut used, &mut best);
    best
}

/// One representative per isomorphism class of graphs on `n` vertices,
/// grown vertex by vertex.
pub fn graphs_up_to_iso(n: usize) -> Vec<Masks> {
    let mut level: Vec<Masks> = vec![vec![]];
    for k in 0..n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for nb in 0u32..1 << k {
                let mut h: Masks = g.clone();
                for (i, m) in h.iter_mut().enumerate() {
                    if nb >> i & 1 == 1 {
                        *m |= 1 << k;
                    }
                }
                h.push(nb);
                if seen.insert(canonical(&h)) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level
}

/// Random acyclic network with at most `max_symbols` messages plus edges.
pub fn tiny_network(seed: RngSeed, max_symbols: usize) -> NetworkSpec {
    let mut rng = seed.rng();
    loop {
        let nodes = rng.random_range(3..=5usize);
        let k = rng.random_range(1..=2usize);
        let e = rng.random_range(2..=max_symbols - k);
        let edges: Vec<NetEdge> = (0..e)
            .map(|_| {
                let tail = rng.random_range(0..nodes - 1);
                let head = rng.random_range(tail + 1..nodes);
                NetEdge { tail, head, capacity: 1 }
            })
            .collect();
        let sources: Vec<usize> = (0..k).map(|_| rng.random_range(0..nodes - 1)).collect();
        let demands: Vec<Demand> = (0..rng.random_range(1..=2))
            .filter_map(|_| {
                let message = rng.random_range(0..k);
                let node = rng.random_range(1..nodes);
                (node != sources[message]).then_some(Demand { node, message })
            })
            .collect();
        if demands.is_empty() {
            continue;
        }
        let net = NetworkSpec {
            nodes: (0..nodes).map(|v| format!("v{v}")).collect(),
            edges,
            messages: (0..k).map(|m| format!("X{}", m + 1)).collect(),
            sources,
            demands,
        };
        if coefficient_bits(&net) <= 16 {
            return net;
        }
    }
}

fn inputs(net: &NetworkSpec, e: usize) -> (Vec<usize>, Vec<usize>) {
    let tail = net.edges[e].tail;
    let srcs = (0..net.messages.len()).filter(|&m| net.sources[m] == tail).collect();
    let ins = (0..net.edges.len()).filter(|&f| net.edges[f].head == tail).collect();
    (srcs, ins)
}

fn coefficient_bits(net: &NetworkSpec) -> usize {
    (0..net.edges.len())
        .map(|e| {
            let (s, i) = inputs(net, e);
            s.len() + i.len()
        })
        .sum()
}

fn rank(rows: &[Vec<f64>], k: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]).rank(1e-9)
}

/// Exhaustive search over {0, 1} local coefficients (unit capacities,
/// edges listed in topological order). Decoders are arbitrary real maps, so a
/// demand is met when the wanted unit vector lies in the span of what the
/// node sees.
pub fn binary_oracle(net: &NetworkSpec) -> bool {
    let k = net.messages.len();
    let ne = net.edges.len();
    let order = net.topological_edges().unwrap();
    let total = coefficient_bits(net);
    for assignment in 0u32..1 << total {
        let mut global = vec![vec![0.0; k]; ne];
        let mut bit = 0;
        for &e in &order {
            let (srcs, ins) = inputs(net, e);
            let mut v = vec![0.0; k];
            for m in srcs {
                if assignment >> bit & 1 == 1 {
                    v[m] += 1.0;
                }
                bit += 1;
            }
            for f in ins {
                if assignment >> bit & 1 == 1 {
                    for (a, b) in v.iter_mut().zip(&global[f]) {
                        *a += b;
                    }
                }
                bit += 1;
            }
            global[e] = v;
        }
        let ok = net.demands.iter().all(|d| {
            let mut seen: Vec<Vec<f64>> = (0..ne).filter(|&f| net.edges[f].head == d.node).map(|f| global[f].clone()).collect();
            for m in 0..k {
                if net.sources[m] == d.node {
                    let mut u = vec![0.0; k];
                    u[m] = 1.0;
                    seen.push(u);
                }
            }
            let before = rank(&seen, k);
            let mut u = vec![0.0; k];
            u[d.message] = 1.0;
            seen.push(u);
            rank(&seen, k) == before
        });
        if ok {
            return true;
        }
    }
    false
}

/// Cut bound: if removing edge set `S` leaves a set of demand nodes
/// unreachable from every source node, those nodes learn only functions of
/// the symbols on `S`, so they cannot want more distinct messages than
/// `S` carries. Returns true when some cut proves no code exists.
pub fn cut_bound_violated(net: &NetworkSpec) -> bool {
    let ne = net.edges.len();
    assert!(ne <= 16);
    (0u32..1 << ne).any(|cut| {
        let mut reach = vec![false; net.nodes.len()];
        for &s in &net.sources {
            reach[s] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for (f, e) in net.edges.iter().enumerate() {
                if cut >> f & 1 == 0 && reach[e.tail] && !reach[e.head] {
                    reach[e.head] = true;
                    changed = true;
                }
            }
        }
        let wanted: HashSet<usize> = net.demands.iter().filter(|d| !reach[d.node]).map(|d| d.message).collect();
        let capacity: u32 = net.edges.iter().enumerate().filter(|(f, _)| cut >> f & 1 == 1).map(|(_, e)| e.capacity).sum();
        wanted.len() > capacity as usize
    })
}

/// Every user recovers its message from some transmission whose other terms
/// it caches.
pub fn transmissions_decodable(g: &SideInfoGraph, tx: &[Vec<usize>]) -> bool {
    (0..g.n()).all(|u| {
        tx.iter()
            .any(|t| t.contains(&u) && t.iter().all(|&m| m == u || g.has_edge(u, m)))
    })
}

pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> SideInfoGraph {
    SideInfoGraph::from_pairs(n, pairs).unwrap()
}

pub fn directed(n: usize, edges: &[(usize, usize)]) -> SideInfoGraph {
    SideInfoGraph::from_edges(n, GraphKind::Directed, edges).unwrap()
}
