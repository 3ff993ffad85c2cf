mod common;

use common::{brute_alpha, brute_clique_cover, graph_of, masks, transmissions_decodable};
use minrank::bench::{self, ExperimentSpec, Family, Method};
use minrank::codec::{self, IndexCode, MessageVector};
use minrank::coloring::{greedy_clique_cover, greedy_coloring_number, ldg, LdgChoice};
use minrank::graph::{
    self, complement, gen_directed_er, gen_directed_regular, gen_three_clique_coverable_certified, gen_undirected_er,
    undirected_subgraph,
};
use minrank::rankmin::{self, clique_cover_completion, project_c_psd, project_c_svd, project_d, Cell};
use minrank::{PatternMatrix, RngSeed, SideInfoGraph, SolverConfig, Variant};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn small_undirected() -> impl Strategy<Value = SideInfoGraph> {
    (2usize..=9, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, p, s)| gen_undirected_er(n, p, RngSeed(s)).unwrap())
}

fn small_directed() -> impl Strategy<Value = SideInfoGraph> {
    (2usize..=9, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, p, s)| gen_directed_er(n, p, RngSeed(s)).unwrap())
}

fn random_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = RngSeed(seed).rng();
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-4.0..4.0))
}

fn fast_cfg(seed: u64) -> SolverConfig {
    SolverConfig { max_iters: 1500, ..SolverConfig::default().with_seed(RngSeed(seed)) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generators_are_deterministic(n in 3usize..20, p in 0.0f64..=1.0, s in any::<u64>()) {
        let seed = RngSeed(s);
        prop_assert_eq!(gen_undirected_er(n, p, seed).unwrap(), gen_undirected_er(n, p, seed).unwrap());
        prop_assert_eq!(gen_directed_er(n, p, seed).unwrap(), gen_directed_er(n, p, seed).unwrap());
        let c = n / 2;
        prop_assert_eq!(gen_directed_regular(n, c, seed).unwrap(), gen_directed_regular(n, c, seed).unwrap());
        for family in Family::ALL {
            let param = if family == Family::DirectedRegular { c as f64 } else { p };
            prop_assert_eq!(family.generate(n, param, seed).unwrap(), family.generate(n, param, seed).unwrap());
        }
    }

    #[test]
    fn three_clique_certificate_holds(n in 3usize..40, p in 0.0f64..=1.0, s in any::<u64>()) {
        let (g, groups) = gen_three_clique_coverable_certified(n, p, RngSeed(s)).unwrap();
        let mut seen = vec![0; n];
        for group in &groups {
            for &a in group {
                seen[a] += 1;
                for &b in group {
                    prop_assert!(a == b || g.has_edge(a, b));
                }
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert!(graph::clique_cover_within(&g, 3).unwrap().is_some());
    }

    #[test]
    fn regular_graphs_have_fixed_out_degree(n in 2usize..30, s in any::<u64>()) {
        let c = s as usize % n;
        let g = gen_directed_regular(n, c, RngSeed(s)).unwrap();
        prop_assert!((0..n).all(|i| g.out_degree(i) == c));
        prop_assert_eq!(g.edge_count(), n * c);
    }

    #[test]
    fn subgraph_and_complement_algebra(g in small_directed()) {
        let u = undirected_subgraph(&g);
        prop_assert_eq!(undirected_subgraph(&u), u.clone());
        prop_assert_eq!(complement(&complement(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn rank_bracket_chain(g in small_undirected()) {
        let adj = masks(&g);
        let alpha = graph::independence_number(&g).unwrap();
        let cover = graph::exact_clique_cover(&g).unwrap();
        prop_assert_eq!(alpha, brute_alpha(&adj));
        prop_assert_eq!(cover, brute_clique_cover(&adj));
        prop_assert!(alpha <= cover);
        prop_assert!(cover <= greedy_coloring_number(&g).unwrap());
    }

    #[test]
    fn greedy_cover_is_valid_and_deterministic(g in small_undirected()) {
        let a = greedy_clique_cover(&g).unwrap();
        a.validate(&g).unwrap();
        prop_assert_eq!(a, greedy_clique_cover(&g).unwrap());
    }

    #[test]
    fn ldg_codes_decode(g in small_directed(), s in any::<u64>()) {
        let pattern = PatternMatrix::from_graph(&g);
        for choice in [LdgChoice::First, LdgChoice::Random(RngSeed(s))] {
            let out = ldg(&pattern, choice);
            prop_assert!(out.len() <= g.n());
            for row in &out.rows {
                for (j, &cell) in row.iter().enumerate() {
                    if cell == Cell::One {
                        prop_assert!(out.origin.iter().flatten().any(|&u| u == j));
                    }
                }
            }
            prop_assert!(transmissions_decodable(&g, &out.transmissions()));
        }
    }

    #[test]
    fn project_d_is_exact(g in small_directed(), s in any::<u64>()) {
        let p = PatternMatrix::from_graph(&g);
        let m = random_matrix(g.n(), s);
        let d = project_d(&m, &p);
        for (i, j, t) in p.fixed_cells() {
            prop_assert_eq!(d[(i, j)], t);
        }
        prop_assert_eq!(project_d(&d, &p), d);
    }

    #[test]
    fn low_rank_projections(n in 2usize..9, s in any::<u64>()) {
        let r = 1 + s as usize % (n - 1);
        let m = random_matrix(n, s);
        let sym = (&m + m.transpose()) * 0.5;
        let c = project_c_psd(&sym, r).unwrap();
        prop_assert!(c.clone().symmetric_eigen().eigenvalues.min() >= -1e-10);
        prop_assert!(rankmin::numerical_rank(&c, 1e-9) <= r);
        prop_assert!((project_c_psd(&c, r).unwrap() - &c).norm() <= 1e-9);
        let o = project_c_svd(&m, r).unwrap();
        prop_assert!(rankmin::numerical_rank(&o, 1e-9) <= r);
        let mut rng = RngSeed(s ^ 1).rng();
        for _ in 0..20 {
            let a = DMatrix::from_fn(n, r, |_, _| rng.random_range(-2.0..2.0));
            let b = DMatrix::from_fn(r, n, |_, _| rng.random_range(-2.0..2.0));
            prop_assert!((&m - &o).norm() <= (&m - a * b).norm() + 1e-12);
        }
    }

    #[test]
    fn d_feasible_trace(g in small_directed(), s in any::<u64>()) {
        let p = PatternMatrix::from_graph(&g);
        let m = project_d(&random_matrix(g.n(), s), &p);
        prop_assert_eq!(m.trace(), g.n() as f64);
        prop_assert!(rankmin::nuclear_norm(&m) >= g.n() as f64 - 1e-6);
    }

    #[test]
    fn clique_cover_codes_are_exact(g in small_undirected(), s in any::<u64>()) {
        let cover = greedy_clique_cover(&g).unwrap();
        let n = g.n();
        let m = clique_cover_completion(n, &cover.cliques);
        let pattern = PatternMatrix::from_graph(&g);
        prop_assert_eq!(project_d(&m, &pattern), m.clone());
        let code = IndexCode::new(m.clone(), cover.len(), pattern, 1e-3).unwrap();
        let x = MessageVector::random(n, 5.0, RngSeed(s)).unwrap();
        let x_hat = codec::decode_all(&code, &x).unwrap();
        prop_assert!((x_hat - x.x()).amax() <= 1e-9);
        let proj = &code.a_pinv * &code.a;
        for i in 0..n {
            let row = m.row(i);
            prop_assert!((&row - &row * &proj).norm() <= 1e-6 * row.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_stays_below_greedy(g in small_undirected(), s in any::<u64>()) {
        let cfg = fast_cfg(s);
        let out = rankmin::solve(&g, &cfg).unwrap();
        prop_assert!(out.r_star <= greedy_coloring_number(&g).unwrap());
        prop_assert!(out.residual <= cfg.epsilon);
    }

    #[test]
    fn decode_error_within_bound(g in small_directed(), s in any::<u64>(), x_max in 0.5f64..50.0) {
        for variant in [Variant::ApEig, Variant::ApSvd] {
            let cfg = SolverConfig { variant, ..fast_cfg(s) };
            let out = rankmin::solve(&g, &cfg).unwrap();
            let code = IndexCode::new(out.m_star, out.r_star, rankmin::pattern_for(&g, variant), cfg.epsilon).unwrap();
            let x = MessageVector::random(g.n(), x_max, RngSeed(s ^ 7)).unwrap();
            let err = codec::aggregate_error(x.x(), &codec::decode_all(&code, &x).unwrap()).unwrap();
            prop_assert!(err <= codec::error_bound(cfg.epsilon, x_max, g.n()));
        }
    }

    #[test]
    fn broadcast_users_skip_the_pseudoinverse(g in small_directed(), s in any::<u64>()) {
        let cfg = SolverConfig { variant: Variant::ApSvd, ..fast_cfg(s) };
        let out = rankmin::solve(&g, &cfg).unwrap();
        let code = IndexCode::new(out.m_star, out.r_star, rankmin::pattern_for(&g, cfg.variant), cfg.epsilon).unwrap();
        let mut tampered = code.clone();
        tampered.a_pinv.fill(1e6);
        let x = MessageVector::random(g.n(), 3.0, RngSeed(s)).unwrap();
        let honest = codec::decode_all(&code, &x).unwrap();
        let broken = codec::decode_all(&tampered, &x).unwrap();
        for u in 0..g.n() {
            if code.broadcast_slot(u).is_some() {
                prop_assert_eq!(honest[u], broken[u]);
            }
        }
    }
}

#[test]
fn pseudoinverse_on_independent_rows() {
    let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 3.0, -1.0]);
    let p = codec::pseudoinverse(&a).unwrap();
    assert!((&a * &p - DMatrix::<f64>::identity(2, 2)).norm() <= 1e-12);
    assert!((&a * &p * &a - &a).norm() <= 1e-12);
    assert!((&p * &a * &p - &p).norm() <= 1e-12);
}

#[test]
fn paired_trials_share_graphs() {
    let spec = ExperimentSpec {
        family: Family::UndirectedEr,
        n_values: vec![8, 12],
        p_or_c_values: vec![0.3, 0.7],
        methods: vec![Method::GreedyColoring, Method::Ldg, Method::ApEig],
        trials: 3,
        seed: 4,
        solver: SolverConfig { max_iters: 500, ..SolverConfig::default() },
        timing: false,
    };
    let rows = bench::run_experiment(&spec, Some(1)).unwrap();
    assert_eq!(rows.len(), 4 * 3 * 3);
    for chunk in rows.chunks(3) {
        assert!(chunk.iter().all(|r| r.seed == chunk[0].seed && r.trial == chunk[0].trial && r.n == chunk[0].n));
        let g = spec.family.generate(chunk[0].n, chunk[0].p_or_c, RngSeed(chunk[0].seed)).unwrap();
        assert_eq!(chunk[0].code_length, greedy_coloring_number(&g).unwrap());
    }
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf).unwrap();
    assert_eq!(bench::read_csv(&buf[..]).unwrap(), rows);
    let parallel = bench::run_experiment(&spec, Some(2)).unwrap();
    assert_eq!(parallel, rows);
}

#[test]
fn graph_text_round_trip() {
    for s in 0..10 {
        let g = gen_directed_er(9, 0.4, RngSeed(s)).unwrap();
        assert_eq!(SideInfoGraph::from_text(&g.to_text()).unwrap(), g);
        let u = graph_of(&masks(&undirected_subgraph(&g)));
        assert_eq!(u, undirected_subgraph(&g));
    }
}
