use std::time::Instant;

use nalgebra::DMatrix;

use super::project::{pattern_gap, project_c_psd, project_c_svd, project_d_in_place, symmetrize_if_drifted};
use super::{
    check_attempt_args, random_start, restart_seed, PatternMatrix, RankAttempt, RankSearch,
    SolverConfig, SolverOutcome, StopReason,
};
use crate::error::Result;

/// Below this |denominator| the extrapolation step is skipped.
const LAMBDA_DEN_FLOOR: f64 = 1e-12;

/// Alternating projections at rank `r`: returns the first restart whose
/// low-rank iterate is within `epsilon` (spectral norm) of the pattern region.
pub fn ap_attempt(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<Option<SolverOutcome>> {
    let started = Instant::now();
    Ok(search(pattern, r, cfg, false)?.into_outcome(r, started))
}

/// Directional alternating projections: each cycle extrapolates along the
/// pattern-side secant `d + lambda (d' - d)` with
/// `lambda = |d - c|_F^2 / <d - d', d - c>`.
pub fn dirap_attempt(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<Option<SolverOutcome>> {
    let started = Instant::now();
    Ok(search(pattern, r, cfg, true)?.into_outcome(r, started))
}

pub(crate) fn search(
    pattern: &PatternMatrix,
    r: usize,
    cfg: &SolverConfig,
    directional: bool,
) -> Result<RankSearch> {
    let symmetric = cfg.variant.is_symmetric();
    check_attempt_args(pattern, r, symmetric)?;
    let mut attempts = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let start = random_start(
            pattern.rows(),
            pattern.cols(),
            r,
            symmetric,
            restart_seed(cfg, r, restart),
        );
        let (attempt, found) = run(pattern, r, cfg, symmetric, directional, start, restart);
        attempts.push(attempt);
        if let Some(found) = found {
            return Ok(RankSearch {
                found: Some(found),
                attempts,
            });
        }
    }
    Ok(RankSearch {
        found: None,
        attempts,
    })
}

/// Tightens a completion that is already close: alternating least squares
/// from the rank-`r` factorization of `start`, then plain alternating
/// projections if that falls short. Returns a rank-`r` point whose gap is at
/// most `cfg.epsilon`.
pub fn refine(
    pattern: &PatternMatrix,
    start: DMatrix<f64>,
    r: usize,
    cfg: &SolverConfig,
) -> Result<Option<(DMatrix<f64>, f64)>> {
    check_attempt_args(pattern, r, false)?;
    if let Some(m) = super::altmin::polish(pattern, &start, r, cfg.epsilon, cfg.max_iters) {
        let gap = pattern_gap(&m, pattern, cfg.epsilon);
        if gap <= cfg.epsilon {
            return Ok(Some((m, gap)));
        }
    }
    Ok(run(pattern, r, cfg, false, false, start, 0).1)
}

fn run(
    pattern: &PatternMatrix,
    r: usize,
    cfg: &SolverConfig,
    symmetric: bool,
    directional: bool,
    start: DMatrix<f64>,
    restart: usize,
) -> (RankAttempt, Option<(DMatrix<f64>, f64)>) {
    let project_c = |m: &DMatrix<f64>| {
        if symmetric {
            project_c_psd(m, r)
        } else {
            project_c_svd(m, r)
        }
    };
    let project_d = |m: &mut DMatrix<f64>| {
        project_d_in_place(m, pattern);
        if symmetric {
            symmetrize_if_drifted(m);
        }
    };

    let mut attempt = RankAttempt {
        rank: r,
        restart,
        iterations: 0,
        residual: f64::INFINITY,
        stop: StopReason::Budget,
        fallbacks: 0,
    };
    let mut d = start;
    project_d(&mut d);
    for it in 1..=cfg.max_iters {
        attempt.iterations = it;
        let c = match project_c(&d) {
            Ok(c) => c,
            Err(_) => {
                attempt.stop = StopReason::Numerical;
                return (attempt, None);
            }
        };
        let gap = pattern_gap(&c, pattern, cfg.epsilon);
        attempt.residual = gap;
        if gap <= cfg.epsilon {
            attempt.stop = StopReason::Converged;
            return (attempt, Some((c, gap)));
        }
        let mut next = c.clone();
        project_d(&mut next);
        if directional {
            let to_c = &d - &c;
            let step = &d - &next;
            let num = to_c.norm_squared();
            let den = step.dot(&to_c);
            if den.abs() < LAMBDA_DEN_FLOOR {
                attempt.fallbacks += 1;
                d = next;
            } else {
                let lambda = num / den;
                d -= step * lambda;
            }
        } else {
            d = next;
        }
        if !d.iter().all(|x| x.is_finite()) {
            attempt.stop = StopReason::Numerical;
            return (attempt, None);
        }
    }
    (attempt, None)
}
