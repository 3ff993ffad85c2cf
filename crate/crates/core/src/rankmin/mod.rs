//! Rank minimization over the index-coding pattern.
//!
//! Three attempt kernels search for a completion of a given rank:
//! alternating projections ([`ap_attempt`]), directional alternating
//! projections ([`dirap_attempt`]) and alternating minimization
//! ([`altmin_attempt`]). [`solve`] wraps them in a rank sweep that starts from
//! the greedy clique cover and lowers the target rank until an attempt fails.

mod altmin;
mod ap;
pub mod matio;
mod pattern;
pub mod project;

use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use altmin::altmin_attempt;
pub use ap::{ap_attempt, dirap_attempt, refine};
pub use pattern::{Cell, PatternMatrix};
pub use project::{project_c_psd, project_c_svd, project_d, spectral_norm};

use crate::coloring::greedy_clique_cover;
use crate::error::{Error, Result};
use crate::graph::{undirected_subgraph, SideInfoGraph};
use crate::rng::RngSeed;

/// Which rank-minimization kernel to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Alternating projections onto PSD rank-r matrices (eigendecomposition).
    ApEig,
    /// Alternating projections onto rank-r matrices (SVD).
    ApSvd,
    DirapEig,
    DirapSvd,
    #[serde(rename = "altmin")]
    AltMin,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::ApEig,
        Variant::ApSvd,
        Variant::DirapEig,
        Variant::DirapSvd,
        Variant::AltMin,
    ];

    /// Eigendecomposition variants work on the symmetric pattern of the
    /// undirected subgraph.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Variant::ApEig | Variant::DirapEig)
    }

    /// The variant that handles non-symmetric and rectangular patterns:
    /// eigendecomposition variants map to their SVD counterparts.
    pub fn general(self) -> Variant {
        match self {
            Variant::ApEig => Variant::ApSvd,
            Variant::DirapEig => Variant::DirapSvd,
            v => v,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::ApEig => "ap-eig",
            Variant::ApSvd => "ap-svd",
            Variant::DirapEig => "dirap-eig",
            Variant::DirapSvd => "dirap-svd",
            Variant::AltMin => "altmin",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stopping tolerance on the spectral-norm gap.
    pub epsilon: f64,
    /// Projection cycles per restart.
    pub max_iters: usize,
    /// Random restarts per target rank.
    pub restarts: usize,
    pub variant: Variant,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tolerance: f64,
    #[serde(with = "seed_serde")]
    pub seed: RngSeed,
}

mod seed_serde {
    use super::RngSeed;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &RngSeed, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_u64(s.0)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<RngSeed, D::Error> {
        u64::deserialize(de).map(RngSeed)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            max_iters: 10_000,
            restarts: 3,
            variant: Variant::ApEig,
            rank_tolerance: 1e-6,
            seed: RngSeed(0),
        }
    }
}

impl SolverConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: RngSeed) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidParameter(
                "max_iters and restarts must be at least 1".into(),
            ));
        }
        if !(self.rank_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("rank_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Why a restart ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    /// Iteration budget exhausted.
    Budget,
    /// Alternating minimization: successive errors differ by at most epsilon.
    Stalled,
    Numerical,
}

/// One restart at one target rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankAttempt {
    pub rank: usize,
    pub restart: usize,
    pub iterations: usize,
    pub residual: f64,
    pub stop: StopReason,
    /// Degenerate steps taken by a fallback path: plain AP steps in DirAP,
    /// pseudoinverse solves in AltMin.
    pub fallbacks: usize,
}

impl RankAttempt {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    /// Completed matrix (the low-rank side of the final cycle).
    pub m_star: DMatrix<f64>,
    /// Target rank of the last successful attempt.
    pub r_star: usize,
    /// Spectral norm of `project_d(m_star) - m_star`.
    pub residual: f64,
    /// Projection cycles summed over every attempt.
    pub iterations: usize,
    pub wall_time: f64,
    pub attempts: Vec<RankAttempt>,
}

/// Result of all restarts at one target rank.
pub(crate) struct RankSearch {
    pub found: Option<(DMatrix<f64>, f64)>,
    pub attempts: Vec<RankAttempt>,
}

impl RankSearch {
    fn into_outcome(self, rank: usize, started: Instant) -> Option<SolverOutcome> {
        let iterations = self.attempts.iter().map(|a| a.iterations).sum();
        let (m_star, residual) = self.found?;
        Some(SolverOutcome {
            m_star,
            r_star: rank,
            residual,
            iterations,
            wall_time: started.elapsed().as_secs_f64(),
            attempts: self.attempts,
        })
    }
}

pub(crate) fn check_attempt_args(pattern: &PatternMatrix, r: usize, symmetric: bool) -> Result<()> {
    let k = pattern.rows().min(pattern.cols());
    if r == 0 || r > k {
        return Err(Error::InvalidParameter(format!("rank {r} outside 1..={k}")));
    }
    if symmetric && !pattern.is_symmetric() {
        return Err(Error::Precondition(
            "eigendecomposition variants need a symmetric pattern".into(),
        ));
    }
    Ok(())
}

/// Random starting point: `B B^T` (PSD, rank r) or `B C^T` (rank r).
pub(crate) fn random_start(rows: usize, cols: usize, r: usize, symmetric: bool, seed: RngSeed) -> DMatrix<f64> {
    let mut rng = seed.rng();
    let b = DMatrix::<f64>::from_fn(rows, r, |_, _| StandardNormal.sample(&mut rng));
    if symmetric {
        &b * b.transpose()
    } else {
        let c = DMatrix::<f64>::from_fn(cols, r, |_, _| StandardNormal.sample(&mut rng));
        b * c.transpose()
    }
}

pub(crate) fn restart_seed(cfg: &SolverConfig, r: usize, restart: usize) -> RngSeed {
    cfg.seed.derive(&[r as u64, restart as u64])
}

pub(crate) fn search(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<RankSearch> {
    match cfg.variant {
        Variant::ApEig | Variant::ApSvd => ap::search(pattern, r, cfg, false),
        Variant::DirapEig | Variant::DirapSvd => ap::search(pattern, r, cfg, true),
        Variant::AltMin => altmin::search(pattern, r, cfg),
    }
}

/// Runs the configured kernel at rank `r`.
pub fn attempt(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<Option<SolverOutcome>> {
    let started = Instant::now();
    Ok(search(pattern, r, cfg)?.into_outcome(r, started))
}

/// Rank sweep from a known completion: keeps lowering the target rank while
/// attempts succeed, never going below `floor` (or 1).
pub fn sweep(
    pattern: &PatternMatrix,
    start: SolverOutcome,
    floor: usize,
    cfg: &SolverConfig,
) -> Result<SolverOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut best = start;
    let mut attempts = std::mem::take(&mut best.attempts);
    let mut iterations = best.iterations;
    while best.r_star > floor.max(1) {
        let r = best.r_star - 1;
        let found = search(pattern, r, cfg)?;
        iterations += found.attempts.iter().map(|a| a.iterations).sum::<usize>();
        attempts.extend(found.attempts);
        let Some((m_star, residual)) = found.found else {
            break;
        };
        best.m_star = m_star;
        best.r_star = r;
        best.residual = residual;
    }
    best.attempts = attempts;
    best.iterations = iterations;
    best.wall_time += started.elapsed().as_secs_f64();
    Ok(best)
}

/// Binary completion from a clique cover: `sum_K 1_K 1_K^T`.
pub fn clique_cover_completion(n: usize, cliques: &[Vec<usize>]) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for clique in cliques {
        for &a in clique {
            for &b in clique {
                m[(a, b)] = 1.0;
            }
        }
    }
    m
}

/// The pattern a variant works on for graph `g`.
pub fn pattern_for(g: &SideInfoGraph, variant: Variant) -> PatternMatrix {
    if variant.is_symmetric() {
        PatternMatrix::from_graph(&undirected_subgraph(g))
    } else {
        PatternMatrix::from_graph(g)
    }
}

/// Rank sweep starting at the greedy colouring number of the undirected
/// subgraph. Returns the completion of the lowest rank reached.
pub fn solve(g: &SideInfoGraph, cfg: &SolverConfig) -> Result<SolverOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let cover = greedy_clique_cover(&undirected_subgraph(g))?;
    let pattern = pattern_for(g, cfg.variant);
    let start = SolverOutcome {
        m_star: clique_cover_completion(g.n(), &cover.cliques),
        r_star: cover.len(),
        residual: 0.0,
        iterations: 0,
        wall_time: 0.0,
        attempts: Vec::new(),
    };
    let mut out = sweep(&pattern, start, 1, cfg)?;
    out.wall_time = started.elapsed().as_secs_f64();
    Ok(out)
}

/// Count of singular values above `rank_tolerance * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rank_tolerance: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tolerance * top).count()
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().sum()
}

/// For a matrix in the pattern region the trace is `n`, so the nuclear norm
/// is at least `n`: nuclear-norm minimization cannot go below full rank.
pub fn nuclear_norm_floor_check(m: &DMatrix<f64>, pattern: &PatternMatrix) -> Result<bool> {
    if !pattern.is_square() {
        return Err(Error::Precondition("pattern must be square".into()));
    }
    if !pattern.contains(m, 1e-12) {
        return Err(Error::Precondition("matrix is not in the pattern region".into()));
    }
    let n = pattern.rows() as f64;
    Ok(nuclear_norm(m) >= n - 1e-6)
}
