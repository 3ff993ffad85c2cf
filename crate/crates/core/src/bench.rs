//! Paired experiments: every method runs on the same graph realizations and
//! each (graph, method) pair becomes one CSV row.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{greedy_coloring_number, ldg, LdgChoice};
use crate::error::{Error, Result};
use crate::graph::{
    gen_directed_er, gen_directed_regular, gen_three_clique_coverable, gen_undirected_er, undirected_subgraph,
    SideInfoGraph,
};
use crate::rankmin::{solve, PatternMatrix, SolverConfig, Variant};
use crate::rng::RngSeed;

/// Exact CSV header of experiment outputs.
pub const CSV_HEADER: &str = "family,n,p_or_c,method,trial,code_length,wall_time_s,iterations,residual,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "er-undirected", alias = "UNDIRECTED_ER")]
    UndirectedEr,
    #[serde(rename = "er-directed", alias = "DIRECTED_ER")]
    DirectedEr,
    #[serde(rename = "regular", alias = "DIRECTED_REGULAR")]
    DirectedRegular,
    #[serde(rename = "three-clique", alias = "THREE_CLIQUE")]
    ThreeClique,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::UndirectedEr,
        Family::DirectedEr,
        Family::DirectedRegular,
        Family::ThreeClique,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::UndirectedEr => "er-undirected",
            Family::DirectedEr => "er-directed",
            Family::DirectedRegular => "regular",
            Family::ThreeClique => "three-clique",
        }
    }

    /// Draws one graph. `param` is the edge probability, or the cache size
    /// for the regular family.
    pub fn generate(self, n: usize, param: f64, seed: RngSeed) -> Result<SideInfoGraph> {
        match self {
            Family::UndirectedEr => gen_undirected_er(n, param, seed),
            Family::DirectedEr => gen_directed_er(n, param, seed),
            Family::DirectedRegular => gen_directed_regular(n, cache_size(param)?, seed),
            Family::ThreeClique => gen_three_clique_coverable(n, param, seed),
        }
    }
}

fn cache_size(param: f64) -> Result<usize> {
    if param >= 0.0 && param.fract() == 0.0 && param.is_finite() {
        Ok(param as usize)
    } else {
        Err(Error::InvalidParameter(format!("cache size {param} is not a non-negative integer")))
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown graph family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(alias = "GREEDY_COLORING")]
    GreedyColoring,
    #[serde(alias = "LDG")]
    Ldg,
    #[serde(alias = "AP_EIG")]
    ApEig,
    #[serde(alias = "AP_SVD")]
    ApSvd,
    #[serde(alias = "DIRAP_EIG")]
    DirapEig,
    #[serde(alias = "DIRAP_SVD")]
    DirapSvd,
    #[serde(rename = "altmin", alias = "ALTMIN")]
    AltMin,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::GreedyColoring,
        Method::Ldg,
        Method::ApEig,
        Method::ApSvd,
        Method::DirapEig,
        Method::DirapSvd,
        Method::AltMin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GreedyColoring => "greedy-coloring",
            Method::Ldg => "ldg",
            Method::ApEig => "ap-eig",
            Method::ApSvd => "ap-svd",
            Method::DirapEig => "dirap-eig",
            Method::DirapSvd => "dirap-svd",
            Method::AltMin => "altmin",
        }
    }

    /// The rank-minimization variant behind a solver method.
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::GreedyColoring | Method::Ldg => None,
            Method::ApEig => Some(Variant::ApEig),
            Method::ApSvd => Some(Variant::ApSvd),
            Method::DirapEig => Some(Variant::DirapEig),
            Method::DirapSvd => Some(Variant::DirapSvd),
            Method::AltMin => Some(Variant::AltMin),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Code length and cost of one method on one graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub code_length: usize,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Runs `method` on `g`; solver methods use `cfg` with the method's variant.
pub fn evaluate(method: Method, g: &SideInfoGraph, cfg: &SolverConfig) -> Result<Evaluation> {
    let started = Instant::now();
    let (code_length, iterations, residual) = match method.variant() {
        None if method == Method::GreedyColoring => (greedy_coloring_number(&undirected_subgraph(g))?, 0, 0.0),
        None => (ldg(&PatternMatrix::from_graph(g), LdgChoice::First).len(), 0, 0.0),
        Some(variant) => {
            let out = solve(g, &cfg.with_variant(variant))?;
            (out.r_star, out.iterations, out.residual)
        }
    };
    Ok(Evaluation {
        code_length,
        wall_time_s: started.elapsed().as_secs_f64(),
        iterations,
        residual,
    })
}

fn default_trials() -> usize {
    1000
}

fn default_timing() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    pub n_values: Vec<usize>,
    /// Edge probabilities, or cache sizes for the regular family.
    pub p_or_c_values: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Record wall time; when false the column is written as 0 so outputs
    /// are byte-for-byte reproducible.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.p_or_c_values.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParameter("n_values, p_or_c_values and methods must be nonempty".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        for &v in &self.p_or_c_values {
            match self.family {
                Family::DirectedRegular => {
                    let c = cache_size(v)?;
                    if let Some(&n) = self.n_values.iter().find(|&&n| c >= n) {
                        return Err(Error::InvalidParameter(format!("cache size {c} needs n > {c}, got {n}")));
                    }
                }
                _ if !(0.0..=1.0).contains(&v) => {
                    return Err(Error::InvalidParameter(format!("probability {v} outside [0, 1]")));
                }
                _ => {}
            }
        }
        if self.family == Family::ThreeClique && self.n_values.iter().any(|&n| n < 3) {
            return Err(Error::InvalidParameter("three-clique graphs need n >= 3".into()));
        }
        self.solver.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Grid points in output order.
    pub fn grid(&self) -> Vec<(usize, f64)> {
        self.n_values
            .iter()
            .flat_map(|&n| self.p_or_c_values.iter().map(move |&p| (n, p)))
            .collect()
    }

    /// Seed of the graph for grid point `point` and trial `trial`.
    pub fn graph_seed(&self, point: usize, trial: usize) -> RngSeed {
        RngSeed(self.seed).derive(&[point as u64, trial as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: Family,
    pub n: usize,
    pub p_or_c: f64,
    pub method: Method,
    pub trial: usize,
    pub code_length: usize,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Seed of the graph realization.
    pub seed: u64,
}

/// Runs every method on every realization. Rows come out ordered by grid
/// point, trial and method regardless of `threads`.
pub fn run_experiment(spec: &ExperimentSpec, threads: Option<usize>) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, f64, usize)> = spec
        .grid()
        .into_iter()
        .enumerate()
        .flat_map(|(point, (n, p))| (0..spec.trials).map(move |t| (point, n, p, t)))
        .collect();
    let run_job = |&(point, n, p, trial): &(usize, usize, f64, usize)| -> Result<Vec<ResultRow>> {
        let seed = spec.graph_seed(point, trial);
        let g = spec.family.generate(n, p, seed)?;
        let cfg = spec.solver.with_seed(seed.derive(&[u64::MAX]));
        spec.methods
            .iter()
            .map(|&method| {
                let ev = evaluate(method, &g, &cfg)?;
                Ok(ResultRow {
                    family: spec.family,
                    n,
                    p_or_c: p,
                    method,
                    trial,
                    code_length: ev.code_length,
                    wall_time_s: if spec.timing { ev.wall_time_s } else { 0.0 },
                    iterations: ev.iterations,
                    residual: ev.residual,
                    seed: seed.0,
                })
            })
            .collect()
    };
    let nested: Vec<Result<Vec<ResultRow>>> = match threads {
        Some(1) => jobs.iter().map(run_job).collect(),
        _ => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            pool.install(|| jobs.par_iter().map(run_job).collect())
        }
    };
    let mut rows = Vec::with_capacity(jobs.len() * spec.methods.len());
    for r in nested {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::parse(1, format!("unexpected header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Percentage saved against multicasting, which needs `n - min_i |H_i|`
/// transmissions. Zero when that count is zero.
pub fn savings_vs_multicast(row: &ResultRow, g: &SideInfoGraph) -> f64 {
    let min_has = (0..g.n()).map(|i| g.out_degree(i)).min().unwrap_or(0);
    let multicast = g.n() - min_has;
    if multicast == 0 {
        return 0.0;
    }
    100.0 * (1.0 - row.code_length as f64 / multicast as f64)
}

pub fn savings_vs_uncoded(row: &ResultRow) -> f64 {
    100.0 * (1.0 - row.code_length as f64 / row.n as f64)
}

fn in_slice(row: &ResultRow, method: Method, n: usize, p: f64) -> bool {
    row.method == method && row.n == n && row.p_or_c == p
}

/// Frequency of each code length within one (method, n, p) slice.
pub fn histogram(rows: &[ResultRow], method: Method, n: usize, p: f64) -> Result<BTreeMap<usize, usize>> {
    let mut bins = BTreeMap::new();
    for row in rows.iter().filter(|r| in_slice(r, method, n, p)) {
        *bins.entry(row.code_length).or_insert(0) += 1;
    }
    if bins.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    Ok(bins)
}

/// Mean code length within one slice.
pub fn mean_length(rows: &[ResultRow], method: Method, n: usize, p: f64) -> Option<f64> {
    let lengths: Vec<f64> = rows
        .iter()
        .filter(|r| in_slice(r, method, n, p))
        .map(|r| r.code_length as f64)
        .collect();
    (!lengths.is_empty()).then(|| lengths.iter().sum::<f64>() / lengths.len() as f64)
}

/// Mean iteration count within one slice.
pub fn mean_iterations(rows: &[ResultRow], method: Method, n: usize, p: f64) -> Option<f64> {
    let its: Vec<f64> = rows
        .iter()
        .filter(|r| in_slice(r, method, n, p))
        .map(|r| r.iterations as f64)
        .collect();
    (!its.is_empty()).then(|| its.iter().sum::<f64>() / its.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::fig1;

    fn spec(family: Family, n: Vec<usize>, p: Vec<f64>, methods: Vec<Method>, trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            family,
            n_values: n,
            p_or_c_values: p,
            methods,
            trials,
            seed: 11,
            solver: SolverConfig {
                max_iters: 300,
                ..SolverConfig::default()
            },
            timing: false,
        }
    }

    #[test]
    fn extreme_probabilities() {
        let all = Method::ALL.to_vec();
        let rows = run_experiment(&spec(Family::UndirectedEr, vec![6], vec![1.0], all.clone(), 1), Some(1)).unwrap();
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| r.code_length == 1), "{rows:?}");
        let rows = run_experiment(&spec(Family::DirectedEr, vec![5], vec![0.0], all, 1), Some(1)).unwrap();
        assert!(rows.iter().all(|r| r.code_length == 5), "{rows:?}");
    }

    #[test]
    fn rows_are_paired_and_ordered() {
        let s = spec(
            Family::UndirectedEr,
            vec![8, 10],
            vec![0.3, 0.6],
            vec![Method::GreedyColoring, Method::Ldg, Method::ApEig],
            3,
        );
        let rows = run_experiment(&s, Some(1)).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3 * 3);
        for chunk in rows.chunks(3) {
            assert!(chunk.iter().all(|r| r.seed == chunk[0].seed && r.trial == chunk[0].trial));
            assert!(chunk.iter().all(|r| r.code_length >= 1 && r.code_length <= r.n));
        }
        let threaded = run_experiment(&s, Some(3)).unwrap();
        assert_eq!(rows, threaded);
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let s = spec(Family::ThreeClique, vec![6], vec![0.5], vec![Method::Ldg, Method::ApSvd], 2);
        let rows = run_experiment(&s, Some(1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert!(text.lines().nth(1).unwrap().starts_with("three-clique,6,0.5,ldg,0,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn regular_family_uses_cache_size() {
        let s = spec(Family::DirectedRegular, vec![10], vec![3.0], vec![Method::GreedyColoring], 2);
        let rows = run_experiment(&s, Some(1)).unwrap();
        let g = Family::DirectedRegular.generate(10, 3.0, RngSeed(rows[0].seed)).unwrap();
        assert_eq!(g.edge_count(), 30);
        assert!(Family::DirectedRegular.generate(10, 2.5, RngSeed(0)).is_err());
        let bad = spec(Family::DirectedRegular, vec![3], vec![3.0], vec![Method::Ldg], 1);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(Family::UndirectedEr, vec![5], vec![0.5], vec![Method::Ldg], 1);
        s.validate().unwrap();
        s.trials = 0;
        assert!(s.validate().is_err());
        let s = spec(Family::UndirectedEr, vec![5], vec![1.5], vec![Method::Ldg], 1);
        assert!(s.validate().is_err());
        let s = spec(Family::UndirectedEr, vec![], vec![0.5], vec![Method::Ldg], 1);
        assert!(s.validate().is_err());
        let json = r#"{"family":"UNDIRECTED_ER","n_values":[10],"p_or_c_values":[0.5],"methods":["AP_EIG","greedy-coloring"]}"#;
        let parsed = ExperimentSpec::from_json(json).unwrap();
        assert_eq!(parsed.trials, 1000);
        assert_eq!(parsed.methods, vec![Method::ApEig, Method::GreedyColoring]);
        assert!(parsed.timing);
    }

    fn row(n: usize, code_length: usize) -> ResultRow {
        ResultRow {
            family: Family::DirectedEr,
            n,
            p_or_c: 0.5,
            method: Method::ApSvd,
            trial: 0,
            code_length,
            wall_time_s: 0.0,
            iterations: 0,
            residual: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn savings_examples() {
        let g = fig1();
        assert!((savings_vs_multicast(&row(4, 2), &g) - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(savings_vs_multicast(&row(4, 3), &g), 0.0);
        let empty = SideInfoGraph::empty(4, crate::graph::GraphKind::Directed);
        assert_eq!(savings_vs_multicast(&row(4, 4), &empty), 0.0);
        assert_eq!(savings_vs_multicast(&row(1, 1), &SideInfoGraph::empty(1, crate::graph::GraphKind::Directed)), 0.0);
        assert_eq!(savings_vs_uncoded(&row(4, 4)), 0.0);
        assert_eq!(savings_vs_uncoded(&row(4, 2)), 50.0);
        assert_eq!(savings_vs_uncoded(&row(4, 1)), 75.0);
    }

    #[test]
    fn histogram_examples() {
        let rows = vec![row(9, 5)];
        assert_eq!(histogram(&rows, Method::ApSvd, 9, 0.5).unwrap(), BTreeMap::from([(5, 1)]));
        assert!(matches!(histogram(&rows, Method::Ldg, 9, 0.5), Err(Error::EmptyHistogram)));
        let s = spec(Family::UndirectedEr, vec![7], vec![1.0], vec![Method::ApEig], 100);
        let rows = run_experiment(&s, None).unwrap();
        assert_eq!(histogram(&rows, Method::ApEig, 7, 1.0).unwrap(), BTreeMap::from([(1, 100)]));
        assert_eq!(mean_length(&rows, Method::ApEig, 7, 1.0), Some(1.0));
        assert_eq!(mean_length(&rows, Method::Ldg, 7, 1.0), None);
    }
}
