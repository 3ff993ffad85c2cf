//! Alternating minimization over a rank-r factorization `E F^T`.
//!
//! Only the fixed cells of the pattern (the wanted `1`s and the forbidden
//! `0`s) enter the objective; free cells take whatever `E F^T` gives them.
//! Each half-step is a set of independent small least-squares problems, one
//! per column (for `F`) or per row (for `E`).

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::project::pattern_gap;
use super::{
    check_attempt_args, restart_seed, Cell, PatternMatrix, RankAttempt, RankSearch, SolverConfig,
    SolverOutcome, StopReason,
};
use crate::error::Result;

pub fn altmin_attempt(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<Option<SolverOutcome>> {
    let started = Instant::now();
    Ok(search(pattern, r, cfg)?.into_outcome(r, started))
}

pub(crate) fn search(pattern: &PatternMatrix, r: usize, cfg: &SolverConfig) -> Result<RankSearch> {
    check_attempt_args(pattern, r, false)?;
    let fixed_by_col: Vec<Vec<(usize, f64)>> = (0..pattern.cols())
        .map(|j| fixed_line(pattern, j, false))
        .collect();
    let fixed_by_row: Vec<Vec<(usize, f64)>> = (0..pattern.rows())
        .map(|i| fixed_line(pattern, i, true))
        .collect();

    let mut attempts = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let mut rng = restart_seed(cfg, r, restart).rng();
        let e0 = DMatrix::<f64>::from_fn(pattern.rows(), r, |_, _| StandardNormal.sample(&mut rng));
        let (attempt, found) = run(pattern, r, cfg, e0, &fixed_by_col, &fixed_by_row, restart);
        attempts.push(attempt);
        if found.is_some() {
            return Ok(RankSearch { found, attempts });
        }
    }
    Ok(RankSearch {
        found: None,
        attempts,
    })
}

/// Alternating least squares started from the rank-`r` factorization of
/// `start`. Returns `E F^T` once the fixed-cell error is at most `tol`.
pub(crate) fn polish(
    pattern: &PatternMatrix,
    start: &DMatrix<f64>,
    r: usize,
    tol: f64,
    max_iters: usize,
) -> Option<DMatrix<f64>> {
    let fixed_by_col: Vec<Vec<(usize, f64)>> = (0..pattern.cols()).map(|j| fixed_line(pattern, j, false)).collect();
    let fixed_by_row: Vec<Vec<(usize, f64)>> = (0..pattern.rows()).map(|i| fixed_line(pattern, i, true)).collect();
    let svd = start.clone().svd(true, false);
    let u = svd.u.as_ref()?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut e = DMatrix::<f64>::zeros(pattern.rows(), r);
    for (c, &k) in idx.iter().take(r).enumerate() {
        e.set_column(c, &(u.column(k) * svd.singular_values[k].sqrt()));
    }
    let mut f = DMatrix::<f64>::zeros(pattern.cols(), r);
    for _ in 0..max_iters {
        fit_factor(&e, &mut f, &fixed_by_col);
        fit_factor(&f, &mut e, &fixed_by_row);
        if !e.iter().chain(f.iter()).all(|x| x.is_finite()) {
            return None;
        }
        if fixed_error(&e, &f, &fixed_by_row) <= tol {
            return Some(&e * f.transpose());
        }
    }
    None
}

/// Fixed cells along one row (`by_row`) or column, as `(other index, target)`.
fn fixed_line(pattern: &PatternMatrix, k: usize, by_row: bool) -> Vec<(usize, f64)> {
    let len = if by_row { pattern.cols() } else { pattern.rows() };
    (0..len)
        .filter_map(|t| {
            let cell = if by_row { pattern.cell(k, t) } else { pattern.cell(t, k) };
            match cell {
                Cell::Zero => Some((t, 0.0)),
                Cell::One => Some((t, 1.0)),
                Cell::Star => None,
            }
        })
        .collect()
}

fn run(
    pattern: &PatternMatrix,
    r: usize,
    cfg: &SolverConfig,
    mut e: DMatrix<f64>,
    fixed_by_col: &[Vec<(usize, f64)>],
    fixed_by_row: &[Vec<(usize, f64)>],
    restart: usize,
) -> (RankAttempt, Option<(DMatrix<f64>, f64)>) {
    let mut attempt = RankAttempt {
        rank: r,
        restart,
        iterations: 0,
        residual: f64::INFINITY,
        stop: StopReason::Budget,
        fallbacks: 0,
    };
    let mut f = DMatrix::<f64>::zeros(pattern.cols(), r);
    let mut prev_err = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        attempt.iterations = it;
        attempt.fallbacks += fit_factor(&e, &mut f, fixed_by_col);
        attempt.fallbacks += fit_factor(&f, &mut e, fixed_by_row);
        if !e.iter().chain(f.iter()).all(|x| x.is_finite()) {
            attempt.stop = StopReason::Numerical;
            return (attempt, None);
        }
        let err = fixed_error(&e, &f, fixed_by_row);
        if err <= cfg.epsilon {
            let m = &e * f.transpose();
            let gap = pattern_gap(&m, pattern, cfg.epsilon);
            attempt.residual = gap;
            attempt.stop = StopReason::Converged;
            return (attempt, Some((m, gap)));
        }
        attempt.residual = err;
        if (err - prev_err).abs() <= cfg.epsilon {
            attempt.stop = StopReason::Stalled;
            return (attempt, None);
        }
        prev_err = err;
    }
    (attempt, None)
}

/// Frobenius error of `E F^T` on the fixed cells.
fn fixed_error(e: &DMatrix<f64>, f: &DMatrix<f64>, fixed_by_row: &[Vec<(usize, f64)>]) -> f64 {
    let mut acc = 0.0;
    for (i, line) in fixed_by_row.iter().enumerate() {
        for &(j, t) in line {
            let v = e.row(i).dot(&f.row(j)) - t;
            acc += v * v;
        }
    }
    acc.sqrt()
}

/// With `known` fixed, solves for each row `k` of `target` the least-squares
/// problem over the fixed cells of line `k`. Returns the number of
/// subproblems that needed the pseudoinverse.
fn fit_factor(known: &DMatrix<f64>, target: &mut DMatrix<f64>, lines: &[Vec<(usize, f64)>]) -> usize {
    let r = known.ncols();
    let mut fallbacks = 0;
    for (k, line) in lines.iter().enumerate() {
        let mut gram = DMatrix::<f64>::zeros(r, r);
        let mut rhs = DVector::<f64>::zeros(r);
        for &(t, val) in line {
            let row = known.row(t);
            gram.ger(1.0, &row.transpose(), &row.transpose(), 1.0);
            if val != 0.0 {
                rhs.axpy(val, &row.transpose(), 1.0);
            }
        }
        let sol = if line.len() >= r {
            Cholesky::new(gram)
                .filter(well_conditioned)
                .map(|c| c.solve(&rhs))
        } else {
            None
        };
        let sol = match sol {
            Some(s) => s,
            None => {
                fallbacks += 1;
                minimum_norm_solution(known, line)
            }
        };
        target.set_row(k, &sol.transpose());
    }
    fallbacks
}

fn well_conditioned(chol: &Cholesky<f64, nalgebra::Dyn>) -> bool {
    let l = chol.l_dirty().diagonal();
    l.min() > 1e-8 * l.max()
}

/// Pseudoinverse solution of the line's subsystem.
fn minimum_norm_solution(known: &DMatrix<f64>, line: &[(usize, f64)]) -> DVector<f64> {
    let r = known.ncols();
    if line.is_empty() {
        return DVector::zeros(r);
    }
    let a = DMatrix::<f64>::from_fn(line.len(), r, |i, c| known[(line[i].0, c)]);
    let b = DVector::<f64>::from_iterator(line.len(), line.iter().map(|&(_, v)| v));
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(r))
}
