use minrank::bench::{self, ExperimentSpec, Family, Method};
use minrank::SolverConfig;

/// Share of the AP_EIG length histogram within two of its mode.
fn mass_near_mode(n: usize, p: f64, trials: usize) -> (f64, usize, usize) {
    let spec = ExperimentSpec {
        family: Family::UndirectedEr,
        n_values: vec![n],
        p_or_c_values: vec![p],
        methods: vec![Method::ApEig],
        trials,
        seed: 6,
        solver: SolverConfig::default(),
        timing: false,
    };
    let rows = bench::run_experiment(&spec, None).unwrap();
    let hist = bench::histogram(&rows, Method::ApEig, n, p).unwrap();
    assert_eq!(hist.values().sum::<usize>(), trials);
    let (&mode, _) = hist.iter().max_by_key(|(len, count)| (**count, std::cmp::Reverse(**len))).unwrap();
    let near: usize = hist.range(mode.saturating_sub(2)..=mode + 2).map(|(_, c)| c).sum();
    let peaks = hist
        .iter()
        .filter(|(len, count)| {
            let left = hist.get(&(**len - 1)).copied().unwrap_or(0);
            let right = hist.get(&(**len + 1)).copied().unwrap_or(0);
            **count > left && **count >= right
        })
        .count();
    (near as f64 / trials as f64, mode, peaks)
}

#[test]
fn code_lengths_concentrate_at_desk_scale() {
    let (share, mode, _) = mass_near_mode(30, 0.5, 60);
    assert!(share >= 0.6, "only {share:.2} of the mass within 2 of mode {mode}");
}

#[test]
#[ignore = "n = 100 with 300 trials takes hours on one core"]
fn code_lengths_concentrate_at_full_scale() {
    let (share, mode, peaks) = mass_near_mode(100, 0.5, 300);
    assert!(share >= 0.6, "only {share:.2} of the mass within 2 of mode {mode}");
    assert_eq!(peaks, 1);
}
