//! C ABI over the `minrank` crate.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `*_new`/`*_parse`/`minrank_solve` call and released with the matching
//! `*_free`. Fallible calls return a [`MinrankStatus`]; the message for the
//! most recent failure on the calling thread is available from
//! [`minrank_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minrank::codec::{self, IndexCode, MessageVector, SideInfoVector};
use minrank::rankmin::{self, PatternMatrix, SolverConfig, SolverOutcome, Variant};
use minrank::{Error, GraphKind, RngSeed, SideInfoGraph};
use nalgebra::DVector;

/// Status returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinrankStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Numerical = 4,
    Decoding = 5,
    Panic = 6,
}

/// Rank minimization method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinrankVariant {
    ApEig = 0,
    ApSvd = 1,
    DirapEig = 2,
    DirapSvd = 3,
    AltMin = 4,
}

impl From<MinrankVariant> for Variant {
    fn from(v: MinrankVariant) -> Self {
        match v {
            MinrankVariant::ApEig => Variant::ApEig,
            MinrankVariant::ApSvd => Variant::ApSvd,
            MinrankVariant::DirapEig => Variant::DirapEig,
            MinrankVariant::DirapSvd => Variant::DirapSvd,
            MinrankVariant::AltMin => Variant::AltMin,
        }
    }
}

/// Solver settings. Obtain defaults from [`minrank_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MinrankConfig {
    pub variant: MinrankVariant,
    pub epsilon: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Side information graph.
pub struct MinrankGraph(SideInfoGraph);

/// Result of a rank minimization run.
pub struct MinrankOutcome {
    outcome: SolverOutcome,
    pattern: PatternMatrix,
    epsilon: f64,
}

/// Linear index code built from an outcome.
pub struct MinrankCode(IndexCode);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> MinrankStatus {
    match err {
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::Csv(_) => MinrankStatus::Parse,
        Error::Numerical(_) | Error::RankExtraction { .. } | Error::Extraction(_) => MinrankStatus::Numerical,
        Error::Decoding(_) | Error::InconsistentCode(_) => MinrankStatus::Decoding,
        _ => MinrankStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (MinrankStatus, String)>) -> MinrankStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MinrankStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MinrankStatus::Panic
        }
    }
}

fn lib_err(err: Error) -> (MinrankStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (MinrankStatus, String) {
    (MinrankStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> (MinrankStatus, String) {
    (MinrankStatus::InvalidArgument, msg.into())
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (MinrankStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (MinrankStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], (MinrankStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (MinrankStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn minrank_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn minrank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default solver settings.
#[no_mangle]
pub extern "C" fn minrank_config_default() -> MinrankConfig {
    let d = SolverConfig::default();
    MinrankConfig {
        variant: MinrankVariant::ApEig,
        epsilon: d.epsilon,
        max_iters: d.max_iters,
        restarts: d.restarts,
        seed: d.seed.0,
    }
}

/// Creates a graph on `n` vertices with no edges.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_graph_new(n: usize, directed: bool, out: *mut *mut MinrankGraph) -> MinrankStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let kind = if directed { GraphKind::Directed } else { GraphKind::Undirected };
        let g = Box::new(MinrankGraph(SideInfoGraph::empty(n, kind)));
        write_out(out, Box::into_raw(g), "out")
    })
}

/// Parses a graph in the text format written by the command-line tool.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn minrank_graph_parse(text: *const c_char, out: *mut *mut MinrankGraph) -> MinrankStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (MinrankStatus::Parse, e.to_string()))?;
        let g = SideInfoGraph::from_text(text).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(MinrankGraph(g))), "out")
    })
}

/// Adds edge `(i, j)` (0-based): user `i` caches message `j`. On an undirected graph
/// the reverse edge is added too.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_graph_add_edge(graph: *mut MinrankGraph, i: usize, j: usize) -> MinrankStatus {
    guard(|| {
        let g = graph.as_mut().ok_or_else(|| null("graph"))?;
        let n = g.0.n();
        let kind = g.0.kind();
        let mut edges: Vec<(usize, usize)> = g.0.edges().collect();
        edges.push((i, j));
        if kind == GraphKind::Undirected {
            edges.push((j, i));
        }
        g.0 = SideInfoGraph::from_edges(n, kind, &edges).map_err(lib_err)?;
        Ok(())
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_graph_size(graph: *const MinrankGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn minrank_graph_free(graph: *mut MinrankGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Greedy clique cover size of the graph's undirected part.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minrank_greedy_coloring(graph: *const MinrankGraph, out: *mut usize) -> MinrankStatus {
    guard(|| {
        let g = as_ref(graph, "graph")?;
        let k = minrank::coloring::greedy_coloring_number(&minrank::graph::undirected_subgraph(&g.0)).map_err(lib_err)?;
        write_out(out, k, "out")
    })
}

/// Runs the rank sweep on `graph`.
///
/// # Safety
/// `graph` and `config` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn minrank_solve(
    graph: *const MinrankGraph,
    config: *const MinrankConfig,
    out: *mut *mut MinrankOutcome,
) -> MinrankStatus {
    guard(|| {
        let g = as_ref(graph, "graph")?;
        let c = as_ref(config, "config")?;
        let cfg = SolverConfig {
            epsilon: c.epsilon,
            max_iters: c.max_iters,
            restarts: c.restarts,
            variant: c.variant.into(),
            seed: RngSeed(c.seed),
            ..SolverConfig::default()
        };
        let outcome = rankmin::solve(&g.0, &cfg).map_err(lib_err)?;
        let handle = MinrankOutcome {
            outcome,
            pattern: rankmin::pattern_for(&g.0, cfg.variant),
            epsilon: cfg.epsilon,
        };
        write_out(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// Rank of the completion found, or 0 for a null handle.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_outcome_rank(outcome: *const MinrankOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.outcome.r_star)
}

/// Final gap between the completion and the pattern, or NaN for null.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_outcome_residual(outcome: *const MinrankOutcome) -> f64 {
    outcome.as_ref().map_or(f64::NAN, |o| o.outcome.residual)
}

/// Projection cycles over all attempts, or 0 for null.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_outcome_iterations(outcome: *const MinrankOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.outcome.iterations)
}

/// Copies the completed `n x n` matrix into `buf` in row-major order.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn minrank_outcome_matrix(outcome: *const MinrankOutcome, buf: *mut f64, len: usize) -> MinrankStatus {
    guard(|| {
        let o = as_ref(outcome, "outcome")?;
        let m = &o.outcome.m_star;
        if len != m.len() {
            return Err(invalid(format!("buffer holds {len} values, matrix has {}", m.len())));
        }
        let buf = slice_mut(buf, len, "buf")?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                buf[i * m.ncols() + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Releases an outcome. Null is ignored.
///
/// # Safety
/// `outcome` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn minrank_outcome_free(outcome: *mut MinrankOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Builds an index code (encoder rows and decoders) from an outcome.
///
/// # Safety
/// `outcome` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minrank_code_new(outcome: *const MinrankOutcome, out: *mut *mut MinrankCode) -> MinrankStatus {
    guard(|| {
        let o = as_ref(outcome, "outcome")?;
        let code = IndexCode::new(o.outcome.m_star.clone(), o.outcome.r_star, o.pattern.clone(), o.epsilon)
            .map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(MinrankCode(code))), "out")
    })
}

/// Number of broadcast symbols, or 0 for null.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_code_length(code: *const MinrankCode) -> usize {
    code.as_ref().map_or(0, |c| c.0.len())
}

/// Number of messages, or 0 for null.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn minrank_code_messages(code: *const MinrankCode) -> usize {
    code.as_ref().map_or(0, |c| c.0.a.ncols())
}

/// Encodes `n` messages into `len` broadcast symbols.
///
/// # Safety
/// `x` must point to `n` doubles and `y` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn minrank_encode(
    code: *const MinrankCode,
    x: *const f64,
    n: usize,
    y: *mut f64,
    len: usize,
) -> MinrankStatus {
    guard(|| {
        let c = as_ref(code, "code")?;
        if n != c.0.a.ncols() || len != c.0.len() {
            return Err(invalid(format!(
                "expected {} messages and {} symbols, got {n} and {len}",
                c.0.a.ncols(),
                c.0.len()
            )));
        }
        let xs = DVector::from_column_slice(slice(x, n, "x")?);
        let bound = xs.amax().max(f64::MIN_POSITIVE);
        let msg = MessageVector::new(xs, bound).map_err(lib_err)?;
        let out = codec::encode(&c.0.a, &msg).map_err(lib_err)?;
        slice_mut(y, len, "y")?.copy_from_slice(out.as_slice());
        Ok(())
    })
}

/// Decodes the message wanted by `user` from the broadcast `y` and the
/// user's cache. `cache` holds `n` values; only entries of messages the
/// user caches are read.
///
/// # Safety
/// `y` must point to `len` doubles, `cache` to `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn minrank_decode(
    code: *const MinrankCode,
    y: *const f64,
    len: usize,
    user: usize,
    cache: *const f64,
    n: usize,
    out: *mut f64,
) -> MinrankStatus {
    guard(|| {
        let c = as_ref(code, "code")?;
        if n != c.0.a.ncols() || len != c.0.len() {
            return Err(invalid(format!(
                "expected {} messages and {} symbols, got {n} and {len}",
                c.0.a.ncols(),
                c.0.len()
            )));
        }
        if user >= n {
            return Err(invalid(format!("user {user} out of range for {n} users")));
        }
        let ys = DVector::from_column_slice(slice(y, len, "y")?);
        let xs = DVector::from_column_slice(slice(cache, n, "cache")?);
        let phi = SideInfoVector::for_user(&c.0.pattern, user, &xs);
        let v = codec::decode(&c.0, &ys, user, &phi).map_err(lib_err)?;
        write_out(out, v, "out")
    })
}

/// Releases a code. Null is ignored.
///
/// # Safety
/// `code` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn minrank_code_free(code: *mut MinrankCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}
