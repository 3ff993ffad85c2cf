//! Linear network codes through the network-to-index-coding reduction.
//!
//! A capacitated acyclic network is split into unit edges and turned into an
//! index coding instance whose messages are the source messages plus one
//! symbol per unit edge. The instance has a code of length equal to the
//! number of unit edges exactly when the network has a linear solution; such
//! a completion is turned back into local edge functions and sink decoders
//! and checked by simulation.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::codec::{IndexCode, MessageVector};
use crate::error::{Error, Result};
use crate::rankmin::{self, numerical_rank, PatternMatrix, SolverConfig, SolverOutcome};
use crate::rng::RngSeed;

/// Printed when the completion rank misses the capacity sum.
pub const UNKNOWN_MESSAGE: &str = "Either the network does not admit a linear network code \
or the rank minimization method could not find an optimal index coding solution.";

/// Default solver budget for the pipeline. Reduced instances are small but
/// converge slowly, so restarts and cycles are raised over the graph defaults.
pub const NETWORK_RESTARTS: usize = 10;
pub const NETWORK_MAX_ITERS: usize = 50_000;

pub fn network_config(seed: RngSeed) -> SolverConfig {
    SolverConfig {
        restarts: NETWORK_RESTARTS,
        max_iters: NETWORK_MAX_ITERS,
        variant: rankmin::Variant::ApSvd,
        seed,
        ..SolverConfig::default()
    }
}

/// Gap target when tightening a completion before extraction.
const POLISH_EPSILON: f64 = 1e-10;
const POLISH_ITERS: usize = 20_000;
/// Fresh solver runs at the target rank when a completion cannot be
/// polished or read off as a code.
const EXTRACT_ROUNDS: u64 = 4;
/// Relative residual allowed in local coefficient and decoder fits.
pub const FIT_TOLERANCE: f64 = 1e-6;
/// Simulation error allowed per unit of `x_max * sqrt(k)`.
pub const VERIFY_TOLERANCE: f64 = 1e-6;
pub const VERIFY_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetEdge {
    pub tail: usize,
    pub head: usize,
    pub capacity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Demand {
    pub node: usize,
    pub message: usize,
}

/// A capacitated network with named nodes and messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<NetEdge>,
    pub messages: Vec<String>,
    /// Origin node of each message.
    pub sources: Vec<usize>,
    pub demands: Vec<Demand>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes.len();
        for e in &self.edges {
            if e.tail >= nn || e.head >= nn {
                return Err(Error::InvalidParameter("edge endpoint out of range".into()));
            }
            if e.capacity == 0 {
                return Err(Error::InvalidParameter("edge capacity must be positive".into()));
            }
        }
        if self.sources.len() != self.messages.len() {
            return Err(Error::InvalidParameter("every message needs exactly one source".into()));
        }
        if self.sources.iter().any(|&s| s >= nn) {
            return Err(Error::InvalidParameter("source node out of range".into()));
        }
        for d in &self.demands {
            if d.node >= nn || d.message >= self.messages.len() {
                return Err(Error::InvalidParameter("demand refers to an unknown node or message".into()));
            }
        }
        Ok(())
    }

    pub fn capacity_sum(&self) -> usize {
        self.edges.iter().map(|e| e.capacity as usize).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.edges.iter().all(|e| e.capacity == 1)
    }

    /// Edge indices in an order where every edge comes after the edges into its tail.
    pub fn topological_edges(&self) -> Result<Vec<usize>> {
        let nn = self.nodes.len();
        let mut indeg = vec![0usize; nn];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for (k, e) in self.edges.iter().enumerate() {
            indeg[e.head] += 1;
            out[e.tail].push(k);
        }
        let mut queue: VecDeque<usize> = (0..nn).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.edges.len());
        while let Some(v) = queue.pop_front() {
            for &k in &out[v] {
                order.push(k);
                let h = self.edges[k].head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    queue.push_back(h);
                }
            }
        }
        if order.len() != self.edges.len() {
            return Err(Error::UnsupportedTopology("network has a directed cycle".into()));
        }
        Ok(order)
    }

    pub fn in_edges(&self, node: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&k| self.edges[k].head == node).collect()
    }

    pub fn sources_at(&self, node: usize) -> Vec<usize> {
        (0..self.messages.len()).filter(|&m| self.sources[m] == node).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.nodes {
            let _ = writeln!(s, "node {v}");
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {}", self.nodes[e.tail], self.nodes[e.head], e.capacity);
        }
        for (m, name) in self.messages.iter().enumerate() {
            let _ = writeln!(s, "source {name} {}", self.nodes[self.sources[m]]);
        }
        for d in &self.demands {
            let _ = writeln!(s, "demand {} {}", self.nodes[d.node], self.messages[d.message]);
        }
        s
    }

    /// Parses `node`, `edge <tail> <head> <capacity>`, `source <msg> <node>`
    /// and `demand <node> <msg>` lines. Nodes must be declared before use;
    /// `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut net = NetworkSpec {
            nodes: Vec::new(),
            edges: Vec::new(),
            messages: Vec::new(),
            sources: Vec::new(),
            demands: Vec::new(),
        };
        let mut node_ids: BTreeMap<String, usize> = BTreeMap::new();
        let mut msg_ids: BTreeMap<String, usize> = BTreeMap::new();
        let mut pending: Vec<(usize, usize, String)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let node = |name: &str| {
                node_ids
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::parse(line_no, format!("undeclared node {name:?}")))
            };
            match toks[..] {
                ["node", name] => {
                    if node_ids.insert(name.to_string(), net.nodes.len()).is_some() {
                        return Err(Error::parse(line_no, format!("node {name:?} declared twice")));
                    }
                    net.nodes.push(name.to_string());
                }
                ["edge", tail, head, cap] => {
                    let capacity: u32 = cap
                        .parse()
                        .ok()
                        .filter(|&c| c > 0)
                        .ok_or_else(|| Error::parse(line_no, format!("bad capacity {cap:?}")))?;
                    net.edges.push(NetEdge {
                        tail: node(tail)?,
                        head: node(head)?,
                        capacity,
                    });
                }
                ["source", msg, at] => {
                    let at = node(at)?;
                    if msg_ids.insert(msg.to_string(), net.messages.len()).is_some() {
                        return Err(Error::parse(line_no, format!("message {msg:?} has two sources")));
                    }
                    net.messages.push(msg.to_string());
                    net.sources.push(at);
                }
                ["demand", at, msg] => pending.push((line_no, node(at)?, msg.to_string())),
                _ => return Err(Error::parse(line_no, format!("unrecognised line {line:?}"))),
            }
        }
        for (line_no, at, msg) in pending {
            let message = *msg_ids
                .get(&msg)
                .ok_or_else(|| Error::parse(line_no, format!("demanded message {msg:?} has no source")))?;
            net.demands.push(Demand { node: at, message });
        }
        net.validate()?;
        Ok(net)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Two sources, seven unit edges through a shared bottleneck, both sinks
    /// demanding both messages.
    pub fn butterfly() -> Self {
        Self::from_text(
            "node s1\nnode s2\nnode c\nnode d\nnode t1\nnode t2\n\
             edge s1 t1 1\nedge s1 c 1\nedge s2 c 1\nedge s2 t2 1\nedge c d 1\nedge d t1 1\nedge d t2 1\n\
             source X1 s1\nsource X2 s2\n\
             demand t1 X1\ndemand t1 X2\ndemand t2 X1\ndemand t2 X2\n",
        )
        .expect("valid network")
    }

    /// A chain of `len` unit edges carrying one message to the far end.
    pub fn path(len: usize) -> Self {
        let mut text = String::new();
        for v in 0..=len {
            let _ = writeln!(text, "node v{v}");
        }
        for v in 0..len {
            let _ = writeln!(text, "edge v{v} v{} 1", v + 1);
        }
        let _ = writeln!(text, "source X1 v0\ndemand v{len} X1");
        Self::from_text(&text).expect("valid network")
    }

    /// Two unicast sessions forced through one shared unit edge.
    pub fn starved_two_unicast() -> Self {
        Self::from_text(
            "node s1\nnode s2\nnode u\nnode v\nnode t1\nnode t2\n\
             edge s1 u 1\nedge s2 u 1\nedge u v 1\nedge v t1 1\nedge v t2 1\n\
             source X1 s1\nsource X2 s2\ndemand t1 X1\ndemand t2 X2\n",
        )
        .expect("valid network")
    }
}

/// Replaces every edge of capacity `c` by `c` parallel unit edges.
pub fn split_capacities(net: &NetworkSpec) -> NetworkSpec {
    let edges = net
        .edges
        .iter()
        .flat_map(|e| {
            std::iter::repeat(NetEdge {
                capacity: 1,
                ..*e
            })
            .take(e.capacity as usize)
        })
        .collect();
    NetworkSpec {
        edges,
        ..net.clone()
    }
}

/// A symbol of the reduced instance: a source message or a unit-edge symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Symbol {
    Source(usize),
    Edge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReceiverRole {
    /// The tail of an edge, computing that edge's symbol from its inputs.
    EdgeTail(usize),
    /// A sink that must recover a demanded message.
    Demand(usize),
    /// A receiver holding every source message that wants one edge symbol.
    AllSources(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Receiver {
    pub want: usize,
    pub has: Vec<usize>,
    pub role: ReceiverRole,
}

impl Receiver {
    /// Already holds what it wants.
    pub fn is_trivial(&self) -> bool {
        self.has.contains(&self.want)
    }
}

/// The index coding instance equivalent to a unit-capacity network. Message
/// `m < k` is source message `m`; message `k + e` is the symbol on edge `e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcInstance {
    pub sources: usize,
    pub edges: usize,
    pub receivers: Vec<Receiver>,
}

impl IcInstance {
    pub fn message_count(&self) -> usize {
        self.sources + self.edges
    }

    pub fn symbol(&self, m: usize) -> Symbol {
        if m < self.sources {
            Symbol::Source(m)
        } else {
            Symbol::Edge(m - self.sources)
        }
    }

    pub fn index(&self, s: Symbol) -> usize {
        match s {
            Symbol::Source(m) => m,
            Symbol::Edge(e) => self.sources + e,
        }
    }

    /// Indices of the receivers that are not trivially satisfied; these are
    /// the rows of [`IcInstance::pattern`].
    pub fn active_receivers(&self) -> Vec<usize> {
        (0..self.receivers.len())
            .filter(|&r| !self.receivers[r].is_trivial())
            .collect()
    }

    /// One row per active receiver, one column per message.
    pub fn pattern(&self) -> PatternMatrix {
        let rows: Vec<(usize, Vec<usize>)> = self
            .active_receivers()
            .into_iter()
            .map(|r| (self.receivers[r].want, self.receivers[r].has.clone()))
            .collect();
        PatternMatrix::from_receivers(self.message_count(), &rows)
    }
}

pub fn reduce_to_index_coding(net: &NetworkSpec) -> Result<IcInstance> {
    net.validate()?;
    if !net.is_unit() {
        return Err(Error::Precondition("split capacities before reducing".into()));
    }
    net.topological_edges()?;
    let k = net.messages.len();
    let inputs = |node: usize| -> Vec<usize> {
        let mut has: Vec<usize> = net.sources_at(node);
        has.extend(net.in_edges(node).into_iter().map(|e| k + e));
        has
    };
    let mut receivers = Vec::with_capacity(2 * net.edges.len() + net.demands.len());
    for (e, edge) in net.edges.iter().enumerate() {
        receivers.push(Receiver {
            want: k + e,
            has: inputs(edge.tail),
            role: ReceiverRole::EdgeTail(e),
        });
    }
    for (d, demand) in net.demands.iter().enumerate() {
        receivers.push(Receiver {
            want: demand.message,
            has: inputs(demand.node),
            role: ReceiverRole::Demand(d),
        });
    }
    for e in 0..net.edges.len() {
        receivers.push(Receiver {
            want: k + e,
            has: (0..k).collect(),
            role: ReceiverRole::AllSources(e),
        });
    }
    Ok(IcInstance {
        sources: k,
        edges: net.edges.len(),
        receivers,
    })
}

/// Linear combination of symbols available at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMap {
    pub inputs: Vec<Symbol>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkCode {
    /// The capacity-split network the code runs on.
    pub network: NetworkSpec,
    /// Local function of each unit edge over its tail's inputs.
    pub edge_functions: Vec<LinearMap>,
    /// Decoder of each demand over its node's inputs.
    pub decoders: Vec<LinearMap>,
    /// Row `e` expresses edge symbol `e` in terms of the source messages.
    #[serde(serialize_with = "serialize_matrix")]
    pub global: DMatrix<f64>,
    /// Gap of the completion the code was read from.
    pub completion_residual: f64,
    /// Worst aggregate decoding error seen in verification.
    pub verification_error: f64,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

impl NetworkCode {
    pub fn broadcast_dimension(&self) -> usize {
        self.network.edges.len()
    }

    /// Runs the code on `x`: edge symbols in topological order, then every
    /// decoder. Returns the decoded value of each demand.
    pub fn simulate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let order = self.network.topological_edges()?;
        let mut y = vec![0.0; self.network.edges.len()];
        let value = |s: Symbol, y: &[f64]| match s {
            Symbol::Source(m) => x[m],
            Symbol::Edge(e) => y[e],
        };
        for e in order {
            let f = &self.edge_functions[e];
            y[e] = f.inputs.iter().zip(&f.coefficients).map(|(&s, c)| c * value(s, &y)).sum();
        }
        Ok(DVector::from_iterator(
            self.decoders.len(),
            self.decoders
                .iter()
                .map(|d| d.inputs.iter().zip(&d.coefficients).map(|(&s, c)| c * value(s, &y)).sum()),
        ))
    }

    /// Worst aggregate error between demanded and decoded messages over
    /// `trials` random message vectors.
    pub fn verify(&self, trials: usize, x_max: f64, seed: RngSeed) -> Result<f64> {
        let k = self.network.messages.len();
        let mut worst = 0.0f64;
        for t in 0..trials {
            let x = MessageVector::random(k, x_max, seed.derive(&[t as u64]))?;
            let got = self.simulate(x.x())?;
            let want = DVector::from_iterator(
                self.network.demands.len(),
                self.network.demands.iter().map(|d| x.x()[d.message]),
            );
            worst = worst.max((got - want).norm());
        }
        Ok(worst)
    }

    pub fn listing(&self) -> String {
        let net = &self.network;
        let name = |s: Symbol| match s {
            Symbol::Source(m) => net.messages[m].clone(),
            Symbol::Edge(e) => format!("Y{}", e + 1),
        };
        let combo = |f: &LinearMap| {
            let terms: Vec<String> = f
                .inputs
                .iter()
                .zip(&f.coefficients)
                .filter(|(_, c)| c.abs() > 1e-12)
                .map(|(&s, c)| format!("{c:+.6} {}", name(s)))
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" ")
            }
        };
        let mut s = String::new();
        let _ = writeln!(s, "network code, broadcast dimension {}", self.broadcast_dimension());
        for (e, f) in self.edge_functions.iter().enumerate() {
            let edge = net.edges[e];
            let _ = writeln!(
                s,
                "Y{} ({} -> {}) = {}",
                e + 1,
                net.nodes[edge.tail],
                net.nodes[edge.head],
                combo(f)
            );
        }
        for (d, f) in self.decoders.iter().enumerate() {
            let demand = net.demands[d];
            let _ = writeln!(
                s,
                "{} decodes {} = {}",
                net.nodes[demand.node],
                net.messages[demand.message],
                combo(f)
            );
        }
        let _ = writeln!(s, "verification error {:.3e}", self.verification_error);
        s
    }
}

/// Outcome of the network pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NetworkOutcome {
    Code(NetworkCode),
    Unknown {
        /// Lowest completion rank found, when a search ran.
        r_star: Option<usize>,
        /// Capacity sum the rank had to match.
        target: usize,
    },
}

impl fmt::Display for NetworkOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkOutcome::Code(code) => f.write_str(&code.listing()),
            NetworkOutcome::Unknown { r_star, target } => {
                match r_star {
                    Some(r) => writeln!(f, "UNKNOWN: best completion rank {r}, capacity sum {target}")?,
                    None => writeln!(f, "UNKNOWN: capacity sum {target}")?,
                }
                writeln!(f, "{UNKNOWN_MESSAGE}")
            }
        }
    }
}

/// Uncoded completion: each receiver row keeps only its wanted column.
fn uncoded_completion(pattern: &PatternMatrix) -> SolverOutcome {
    let mut m = DMatrix::<f64>::zeros(pattern.rows(), pattern.cols());
    let mut wanted = vec![false; pattern.cols()];
    for i in 0..pattern.rows() {
        if let Some(w) = pattern.wanted(i) {
            m[(i, w)] = 1.0;
            wanted[w] = true;
        }
    }
    SolverOutcome {
        m_star: m,
        r_star: wanted.iter().filter(|&&w| w).count(),
        residual: 0.0,
        iterations: 0,
        wall_time: 0.0,
        attempts: Vec::new(),
    }
}

/// The full pipeline: split, reduce, complete at rank equal to the capacity
/// sum, and extract a verified code. When no completion of that rank is
/// found the rank sweep continues from the uncoded completion to report the
/// lowest rank reached, and the outcome is [`NetworkOutcome::Unknown`].
pub fn solve_network(net: &NetworkSpec, cfg: &SolverConfig) -> Result<NetworkOutcome> {
    cfg.validate()?;
    net.validate()?;
    let split = split_capacities(net);
    let ic = reduce_to_index_coding(&split)?;
    let target = split.edges.len();
    let pattern = ic.pattern();
    let cfg = SolverConfig {
        variant: cfg.variant.general(),
        ..*cfg
    };
    if pattern.rows() == 0 {
        return extract_network_code(&ic, None, &split).map(NetworkOutcome::Code);
    }
    if target == 0 {
        return Ok(NetworkOutcome::Unknown { r_star: None, target });
    }
    let mut last_err = None;
    for round in 0..EXTRACT_ROUNDS {
        let round_cfg = SolverConfig {
            seed: if round == 0 { cfg.seed } else { cfg.seed.derive(&[round]) },
            ..cfg
        };
        let Some(out) = rankmin::attempt(&pattern, target, &round_cfg)? else {
            if round == 0 {
                break;
            }
            continue;
        };
        let polish_cfg = SolverConfig {
            epsilon: POLISH_EPSILON,
            max_iters: POLISH_ITERS,
            ..round_cfg
        };
        let Some((m_star, _)) = rankmin::refine(&pattern, out.m_star, target, &polish_cfg)? else {
            last_err = Some(Error::Extraction(format!("completion at rank {target} could not be tightened")));
            continue;
        };
        let code = IndexCode::new(m_star, target, pattern.clone(), cfg.epsilon)?;
        match extract_network_code(&ic, Some(&code), &split) {
            Ok(c) => return Ok(NetworkOutcome::Code(c)),
            Err(e) => last_err = Some(e),
        }
    }
    if let Some(e) = last_err {
        return Err(e);
    }
    let start = uncoded_completion(&pattern);
    let best = if start.r_star > target + 1 {
        rankmin::sweep(&pattern, start, target + 1, &cfg)?.r_star
    } else {
        start.r_star
    };
    Ok(NetworkOutcome::Unknown {
        r_star: Some(best),
        target,
    })
}

/// Least-squares fit of `target` by the rows of `basis`; returns the
/// coefficients and the residual norm.
fn fit(basis: &DMatrix<f64>, target: &DVector<f64>) -> (DVector<f64>, f64) {
    if basis.nrows() == 0 {
        return (DVector::zeros(0), target.norm());
    }
    let svd = basis.transpose().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let c = svd
        .solve(target, tol)
        .unwrap_or_else(|_| DVector::zeros(basis.nrows()));
    let res = (basis.transpose() * &c - target).norm();
    (c, res)
}

/// Reads a network code off an index code of length equal to the number of
/// unit edges. With the broadcast fixed to zero the code's equations pin
/// every edge symbol as a linear function of the sources; local functions and
/// decoders are then least-squares fits against each node's inputs.
pub fn extract_network_code(ic: &IcInstance, code: Option<&IndexCode>, net: &NetworkSpec) -> Result<NetworkCode> {
    let k = ic.sources;
    let ne = ic.edges;
    if net.edges.len() != ne || net.messages.len() != k {
        return Err(Error::InvalidParameter("instance does not match the network".into()));
    }
    let (global, residual) = match code {
        None if ne == 0 => (DMatrix::<f64>::zeros(0, k), 0.0),
        None => return Err(Error::Extraction("no index code supplied".into())),
        Some(code) => {
            if code.r_star != ne {
                return Err(Error::Precondition(format!(
                    "code length {} differs from the capacity sum {ne}",
                    code.r_star
                )));
            }
            let a_x = code.a.columns(0, k).into_owned();
            let a_y = code.a.columns(k, ne).into_owned();
            if numerical_rank(&a_y, 1e-10) < ne {
                return Err(Error::Extraction("edge symbols are not determined by the sources".into()));
            }
            let lu = a_y.lu();
            let g = lu
                .solve(&(-a_x))
                .ok_or_else(|| Error::Extraction("edge block of the encoder is singular".into()))?;
            let residual = crate::rankmin::project::spectral_norm(
                &(crate::rankmin::project_d(&code.m_star, &code.pattern) - &code.m_star),
            );
            (g, residual)
        }
    };
    let symbol_vec = |s: Symbol| -> DVector<f64> {
        match s {
            Symbol::Source(m) => DVector::from_fn(k, |i, _| if i == m { 1.0 } else { 0.0 }),
            Symbol::Edge(e) => global.row(e).transpose(),
        }
    };
    let node_inputs = |node: usize| -> Vec<Symbol> {
        let mut v: Vec<Symbol> = net.sources_at(node).into_iter().map(Symbol::Source).collect();
        v.extend(net.in_edges(node).into_iter().map(Symbol::Edge));
        v
    };
    let fit_map = |inputs: Vec<Symbol>, target: DVector<f64>, what: &str| -> Result<LinearMap> {
        let basis = DMatrix::from_fn(inputs.len(), k, |r, c| symbol_vec(inputs[r])[c]);
        let (coef, res) = fit(&basis, &target);
        let scale = target.norm().max(1.0);
        if res > FIT_TOLERANCE * scale {
            return Err(Error::Extraction(format!("{what} is not computable from its inputs (residual {res:.3e})")));
        }
        Ok(LinearMap {
            inputs,
            coefficients: coef.iter().copied().collect(),
        })
    };

    let mut edge_functions = Vec::with_capacity(ne);
    for (e, edge) in net.edges.iter().enumerate() {
        edge_functions.push(fit_map(node_inputs(edge.tail), global.row(e).transpose(), &format!("edge {}", e + 1))?);
    }
    let mut decoders = Vec::with_capacity(net.demands.len());
    for d in &net.demands {
        let target = symbol_vec(Symbol::Source(d.message));
        let label = format!("{} at {}", net.messages[d.message], net.nodes[d.node]);
        decoders.push(fit_map(node_inputs(d.node), target, &label)?);
    }
    let mut out = NetworkCode {
        network: net.clone(),
        edge_functions,
        decoders,
        global,
        completion_residual: residual,
        verification_error: 0.0,
    };
    let x_max = 1.0;
    let err = out.verify(VERIFY_TRIALS, x_max, RngSeed(0x5eed))?;
    let tol = VERIFY_TOLERANCE * x_max * (k.max(1) as f64).sqrt();
    if err > tol {
        return Err(Error::InconsistentCode(format!(
            "simulated decoding error {err:.3e} exceeds {tol:.3e}"
        )));
    }
    out.verification_error = err;
    Ok(out)
}
