//! Index codes from completed matrices: encoder extraction, broadcast
//! encoding and per-user linear decoding.
//!
//! A code broadcasts `Y = A X`, where the rows of `A` are `r` linearly
//! independent rows of the completion `M*`. User `i` recovers its message
//! from row `m_i` of `M*`: if `m_i` is itself a row of `A` it reads the
//! matching broadcast symbol, otherwise it rebuilds `m_i X` as `m_i A^+ Y`.
//! Either way it then cancels the cached messages, `X_i ~ m_i X - m_i phi_i`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::SideInfoGraph;
use crate::rankmin::{Cell, PatternMatrix};
use crate::rng::RngSeed;

/// Relative residual below which a candidate row counts as dependent on the
/// rows already chosen.
pub const ROW_INDEPENDENCE: f64 = 1e-3;

/// Above this condition number of `A A^T` the pseudoinverse is taken from an SVD.
const PINV_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexCode {
    pub m_star: DMatrix<f64>,
    pub r_star: usize,
    /// `r_star x cols` encoding matrix.
    pub a: DMatrix<f64>,
    /// Row of `m_star` behind each row of `a`.
    pub rows: Vec<usize>,
    /// Pseudoinverse of `a`.
    pub a_pinv: DMatrix<f64>,
    pub pattern: PatternMatrix,
    pub epsilon: f64,
}

impl IndexCode {
    pub fn new(m_star: DMatrix<f64>, r_star: usize, pattern: PatternMatrix, epsilon: f64) -> Result<Self> {
        if (m_star.nrows(), m_star.ncols()) != (pattern.rows(), pattern.cols()) {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{} but pattern is {}x{}",
                m_star.nrows(),
                m_star.ncols(),
                pattern.rows(),
                pattern.cols()
            )));
        }
        let (a, rows) = extract_encoder(&m_star, r_star)?;
        let a_pinv = pseudoinverse(&a)?;
        Ok(IndexCode {
            m_star,
            r_star,
            a,
            rows,
            a_pinv,
            pattern,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.r_star
    }

    pub fn is_empty(&self) -> bool {
        self.r_star == 0
    }

    /// Position of receiver `user`'s row among the rows of `a`.
    pub fn broadcast_slot(&self, user: usize) -> Option<usize> {
        self.rows.iter().position(|&k| k == user)
    }
}

/// Messages with a known amplitude bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageVector {
    x: DVector<f64>,
    x_max: f64,
}

impl MessageVector {
    pub fn new(x: DVector<f64>, x_max: f64) -> Result<Self> {
        if !(x_max >= 0.0) || !x_max.is_finite() {
            return Err(Error::InvalidParameter("x_max must be finite and non-negative".into()));
        }
        if let Some(v) = x.iter().find(|v| !(v.abs() <= x_max)) {
            return Err(Error::InvalidParameter(format!("message {v} exceeds x_max {x_max}")));
        }
        Ok(MessageVector { x, x_max })
    }

    /// Independent uniform messages on `[-x_max, x_max]`.
    pub fn random(n: usize, x_max: f64, seed: RngSeed) -> Result<Self> {
        let mut rng = seed.rng();
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0) * x_max);
        Self::new(x, x_max)
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// A receiver's cached messages, zero outside its side information.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfoVector {
    pub phi: DVector<f64>,
}

impl SideInfoVector {
    /// Side information of row `user` of `pattern`: the messages at its free cells.
    pub fn for_user(pattern: &PatternMatrix, user: usize, x: &DVector<f64>) -> Self {
        let phi = DVector::from_fn(pattern.cols(), |j, _| {
            if pattern.cell(user, j) == Cell::Star {
                x[j]
            } else {
                0.0
            }
        });
        SideInfoVector { phi }
    }
}

pub fn build_pattern_matrix(g: &SideInfoGraph) -> PatternMatrix {
    PatternMatrix::from_graph(g)
}

/// Picks `r_star` linearly independent rows of `m_star`, scanning rows in
/// order and keeping each one whose residual against the rows kept so far is
/// at least [`ROW_INDEPENDENCE`] of its norm. If the scan comes up short the
/// selection restarts with largest-residual pivoting.
pub fn extract_encoder(m_star: &DMatrix<f64>, r_star: usize) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if r_star == 0 || r_star > m_star.nrows().min(m_star.ncols()) {
        return Err(Error::InvalidParameter(format!("rank {r_star} does not fit the matrix")));
    }
    let rows = in_order_rows(m_star, r_star).map_or_else(|| pivoted_rows(m_star, r_star), Ok)?;
    let a = m_star.select_rows(rows.iter());
    Ok((a, rows))
}

/// Residual of `v` after removing its components along the orthonormal `basis`.
fn residual(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    // two passes of Gram-Schmidt for stability
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(&r);
            r.axpy(-c, q, 1.0);
        }
    }
    r
}

fn in_order_rows(m: &DMatrix<f64>, r: usize) -> Option<Vec<usize>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(r);
    let mut chosen = Vec::with_capacity(r);
    for i in 0..m.nrows() {
        let v = m.row(i).transpose();
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let res = residual(&v, &basis);
        let rn = res.norm();
        if rn >= ROW_INDEPENDENCE * norm {
            basis.push(res / rn);
            chosen.push(i);
            if chosen.len() == r {
                return Some(chosen);
            }
        }
    }
    None
}

fn pivoted_rows(m: &DMatrix<f64>, r: usize) -> Result<Vec<usize>> {
    let scale = (0..m.nrows()).map(|i| m.row(i).norm()).fold(0.0f64, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(r);
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    while chosen.len() < r {
        let best = (0..m.nrows())
            .filter(|i| !chosen.contains(i))
            .map(|i| {
                let res = residual(&m.row(i).transpose(), &basis);
                (i, res.norm(), res)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((i, rn, res)) if rn > 1e-12 * scale && scale > 0.0 => {
                basis.push(res / rn);
                chosen.push(i);
            }
            _ => {
                return Err(Error::RankExtraction {
                    wanted: r,
                    found: chosen.len(),
                })
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// `A^T (A A^T)^{-1}`, or the SVD pseudoinverse when `A A^T` is badly conditioned.
pub fn pseudoinverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = a * a.transpose();
    let eig = SymmetricEigen::new(gram.clone());
    let hi = eig.eigenvalues.max();
    let lo = eig.eigenvalues.min();
    if hi <= 0.0 || !hi.is_finite() {
        return Err(Error::Decoding("encoding matrix is zero".into()));
    }
    if lo > 0.0 && hi / lo <= PINV_CONDITION_LIMIT {
        if let Some(inv) = gram.cholesky().map(|c| c.inverse()) {
            return Ok(a.transpose() * inv);
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-14 * smax {
        return Err(Error::Decoding("encoding matrix is rank deficient".into()));
    }
    svd.pseudo_inverse(0.0).map_err(|e| Error::Decoding(e.to_string()))
}

pub fn encode(a: &DMatrix<f64>, x: &MessageVector) -> Result<DVector<f64>> {
    if a.ncols() != x.len() {
        return Err(Error::InvalidParameter(format!(
            "encoder has {} columns but there are {} messages",
            a.ncols(),
            x.len()
        )));
    }
    Ok(a * x.x())
}

/// Estimate of the message wanted by receiver `user`, from the broadcast `y`
/// and its side information `phi`.
pub fn decode(code: &IndexCode, y: &DVector<f64>, user: usize, phi: &SideInfoVector) -> Result<f64> {
    if user >= code.pattern.rows() {
        return Err(Error::InvalidParameter(format!("no receiver {user}")));
    }
    if y.len() != code.r_star || phi.phi.len() != code.pattern.cols() {
        return Err(Error::InvalidParameter("broadcast or side information has the wrong length".into()));
    }
    if let Some(j) = (0..phi.phi.len()).find(|&j| phi.phi[j] != 0.0 && code.pattern.cell(user, j) != Cell::Star) {
        return Err(Error::Decoding(format!("receiver {user} does not cache message {j}")));
    }
    let row = code.m_star.row(user);
    let known = row.dot(&phi.phi.transpose());
    let combined = match code.broadcast_slot(user) {
        Some(k) => y[k],
        None => (row * &code.a_pinv * y)[0],
    };
    Ok(combined - known)
}

/// Encodes `x` and decodes it at every receiver.
pub fn decode_all(code: &IndexCode, x: &MessageVector) -> Result<DVector<f64>> {
    let y = encode(&code.a, x)?;
    let mut out = DVector::zeros(code.pattern.rows());
    for user in 0..code.pattern.rows() {
        let phi = SideInfoVector::for_user(&code.pattern, user, x.x());
        out[user] = decode(code, &y, user, &phi)?;
    }
    Ok(out)
}

/// Upper bound `epsilon * x_max * sqrt(n)` on the aggregate decoding error.
pub fn error_bound(epsilon: f64, x_max: f64, n: usize) -> f64 {
    epsilon * x_max * (n as f64).sqrt()
}

/// Euclidean distance between sent and decoded messages.
pub fn aggregate_error(x: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::InvalidParameter("vectors differ in length".into()));
    }
    Ok((x - x_hat).norm())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::coloring::greedy_clique_cover;
    use crate::graph::tests::fig1;
    use crate::graph::{gen_undirected_er, GraphKind};
    use crate::rankmin::clique_cover_completion;

    /// The rank-2 completion of the Fig. 1 pattern as printed to four decimals.
    pub(crate) fn example_m_star() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.4492, 1.8671, 1e-5, //
                0.6900, 1.0, 1.2883, -1e-5, //
                9e-6, 0.7762, 1.0, -0.7519, //
                0.7122, 1e-5, -1e-5, 1.0,
            ],
        )
    }

    fn example_x() -> MessageVector {
        MessageVector::new(DVector::from_vec(vec![10.0, 10.0, -10.0, 10.0]), 10.0).unwrap()
    }

    #[test]
    fn pattern_examples() {
        let p = build_pattern_matrix(&fig1());
        assert_eq!(p.to_string(), "1 * * 0\n* 1 * 0\n0 * 1 *\n* 0 0 1\n");
        assert_eq!(build_pattern_matrix(&SideInfoGraph::empty(3, GraphKind::Directed)), PatternMatrix::identity(3));
        let c = build_pattern_matrix(&SideInfoGraph::complete(3));
        assert_eq!(c.to_string(), "1 * *\n* 1 *\n* * 1\n");
    }

    #[test]
    fn example_encoder_rows() {
        let (a, rows) = extract_encoder(&example_m_star(), 2).unwrap();
        assert_eq!(rows, vec![0, 2]);
        assert_eq!(a.row(1), example_m_star().row(2));
    }

    #[test]
    fn trivial_encoders() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(extract_encoder(&id, 4).unwrap().0, id);
        let ones = DMatrix::<f64>::from_element(3, 3, 1.0);
        let (a, rows) = extract_encoder(&ones, 1).unwrap();
        assert_eq!(rows, vec![0]);
        assert_eq!(a, DMatrix::from_element(1, 3, 1.0));
        assert!(matches!(
            extract_encoder(&ones, 2),
            Err(Error::RankExtraction { wanted: 2, found: 1 })
        ));
    }

    #[test]
    fn pivoting_recovers_late_rows() {
        // first two rows equal, third independent
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(extract_encoder(&m, 2).unwrap().1, vec![0, 2]);
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1e-5, 0.0, 0.0]);
        let (_, rows) = extract_encoder(&m, 2).unwrap();
        assert_eq!(rows, vec![0, 1]);
    }

    #[test]
    fn example_broadcast() {
        let (a, _) = extract_encoder(&example_m_star(), 2).unwrap();
        let y = encode(&a, &example_x()).unwrap();
        assert!((y[0] - 5.8211).abs() <= 1e-3);
        assert!((y[1] - -9.7575).abs() <= 1e-3);
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(encode(&id, &example_x()).unwrap(), example_x().x().clone());
    }

    #[test]
    fn example_decoding() {
        let pattern = build_pattern_matrix(&fig1());
        let code = IndexCode::new(example_m_star(), 2, pattern, 1e-3).unwrap();
        let x = example_x();
        let x_hat = decode_all(&code, &x).unwrap();
        let printed = [9.999, 9.9998, -9.9997, 10.0002];
        for (got, want) in x_hat.iter().zip(printed) {
            assert!((got - want).abs() <= 2e-3, "{got} vs {want}");
        }
        let err = aggregate_error(x.x(), &x_hat).unwrap();
        assert!(err <= error_bound(1e-3, 10.0, 4));
        let listed = DVector::from_vec(printed.to_vec());
        assert!(aggregate_error(x.x(), &listed).unwrap() <= 0.02);
    }

    #[test]
    fn identity_code_is_exact() {
        let code = IndexCode::new(DMatrix::identity(5, 5), 5, PatternMatrix::identity(5), 1e-3).unwrap();
        let x = MessageVector::random(5, 3.0, RngSeed(1)).unwrap();
        let x_hat = decode_all(&code, &x).unwrap();
        assert_eq!(&x_hat, x.x());
    }

    #[test]
    fn clique_cover_codes_are_exact() {
        for s in 0..10 {
            let g = gen_undirected_er(15, 0.5, RngSeed(s)).unwrap();
            let cover = greedy_clique_cover(&g).unwrap();
            let m = clique_cover_completion(15, &cover.cliques);
            let code = IndexCode::new(m, cover.len(), build_pattern_matrix(&g), 0.0).unwrap();
            let x = MessageVector::random(15, 10.0, RngSeed(100 + s)).unwrap();
            let x_hat = decode_all(&code, &x).unwrap();
            assert!(aggregate_error(x.x(), &x_hat).unwrap() <= 1e-9);
            for i in 0..15 {
                let row = code.m_star.row(i);
                let back = &row * &code.a_pinv * &code.a;
                assert!((back - row).norm() <= 1e-6 * row.norm());
            }
        }
    }

    #[test]
    fn broadcast_rows_skip_the_pseudoinverse() {
        let pattern = build_pattern_matrix(&fig1());
        let mut code = IndexCode::new(example_m_star(), 2, pattern, 1e-3).unwrap();
        let x = example_x();
        let before = decode_all(&code, &x).unwrap();
        code.a_pinv.fill(1234.5);
        let after = decode_all(&code, &x).unwrap();
        for &k in &code.rows {
            assert_eq!(before[k], after[k]);
        }
        assert_ne!(before[1], after[1]);
    }

    #[test]
    fn decode_rejects_foreign_side_information() {
        let pattern = build_pattern_matrix(&fig1());
        let code = IndexCode::new(example_m_star(), 2, pattern, 1e-3).unwrap();
        let y = DVector::zeros(2);
        let phi = SideInfoVector { phi: DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]) };
        assert!(matches!(decode(&code, &y, 0, &phi), Err(Error::Decoding(_))));
    }

    #[test]
    fn bound_and_error_arithmetic() {
        assert!((error_bound(1e-3, 10.0, 4) - 0.02).abs() < 1e-15);
        assert_eq!(error_bound(0.0, 5.0, 9), 0.0);
        assert!((error_bound(1e-3, 1.0, 100) - 0.01).abs() < 1e-15);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(aggregate_error(&x, &x).unwrap(), 0.0);
        let shifted = x.add_scalar(0.5);
        assert!((aggregate_error(&x, &shifted).unwrap() - 0.5 * 2.0).abs() < 1e-15);
        assert!(aggregate_error(&x, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn message_bounds_enforced() {
        assert!(MessageVector::new(DVector::from_vec(vec![1.0, -3.0]), 2.0).is_err());
        assert!(MessageVector::new(DVector::from_vec(vec![f64::NAN]), 2.0).is_err());
        let x = MessageVector::random(50, 2.0, RngSeed(3)).unwrap();
        assert!(x.x().iter().all(|v| v.abs() <= 2.0));
    }
}
