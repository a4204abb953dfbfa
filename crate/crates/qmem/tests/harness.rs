use std::path::PathBuf;

use proptest::prelude::*;
use qmem::commands::{fstar, simulate_config, SimulateOptions};
use qmem::config::RouteChoice;
use qmem::{read_ensemble_csv, read_trajectory_csv, simulate, tabulate, write_ensemble_csv, ExperimentConfig};
use qmem_core::{LogicalState, MetricKind, NoiseKind};

fn small(code: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "code = {code}\nOmega = 200\nalpha = 5\nGamma = 1\ntheta = 0, 5pi/1000\nT = 0.4\nsample_dt = 0.05\n\
         n_trajectories = 12\nseed = 3\ntau = 0.05, 0.1\nwrite_trajectories = true\n"
    ))
    .unwrap()
}

fn opts(workers: usize, out: PathBuf) -> SimulateOptions {
    SimulateOptions {
        workers,
        seed: None,
        out: Some(out),
    }
}

#[test]
fn lossless_noiseless_single_trajectory_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("five_qubit");
    c.gamma = 0.0;
    c.theta_list = vec![0.0];
    c.n_trajectories = 1;
    simulate_config(&c, &opts(1, dir.path().into())).unwrap();
    let text = std::fs::read_to_string(dir.path().join("fidelity_theta0.csv")).unwrap();
    let table = read_ensemble_csv(text.as_bytes(), 1, 3).unwrap();
    assert!(table.fidelity.mean.iter().all(|f| (f - 1.0).abs() < 1e-9));
    assert!(table.fidelity.std_error.iter().all(|&e| e == 0.0));
}

#[test]
fn outputs_reparse_exactly_and_ignore_worker_count() {
    let c = small("bitflip_three");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    simulate_config(&c, &opts(1, a.path().into())).unwrap();
    simulate_config(&c, &opts(3, b.path().into())).unwrap();
    let runs = simulate(&c, 2).unwrap();
    for (k, run) in runs.iter().enumerate() {
        for name in [format!("fidelity_theta{k}.csv"), format!("trajectories_theta{k}.csv")] {
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(x, y, "{name}");
        }
        let text = std::fs::read(a.path().join(format!("fidelity_theta{k}.csv"))).unwrap();
        let parsed = read_ensemble_csv(&text[..], c.n_trajectories, c.seed).unwrap();
        assert_eq!(parsed, run.table);
        let header = std::str::from_utf8(&text).unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, "t,F_mean,F_se,Fstar_0.05_mean,Fstar_0.05_se,Fstar_0.1_mean,Fstar_0.1_se");
    }
    for f in ["config.txt", "fidelity.svg", "fstar_theta0.svg", "fstar_theta1.svg"] {
        assert!(a.path().join(f).exists(), "{f}");
    }
    let saved = ExperimentConfig::load(&a.path().join("config.txt")).unwrap();
    assert_eq!(saved.output_dir, a.path());
}

#[test]
fn fstar_from_trajectory_file_matches_simulation() {
    let c = small("bitflip_three");
    let dir = tempfile::tempdir().unwrap();
    simulate_config(&c, &opts(1, dir.path().into())).unwrap();
    let traj = dir.path().join("trajectories_theta1.csv");
    let recomputed = fstar(&traj, &c.tau_list).unwrap();
    let mut table = read_ensemble_csv(recomputed.as_bytes(), c.n_trajectories, c.seed).unwrap();
    let original = std::fs::read(dir.path().join("fidelity_theta1.csv")).unwrap();
    let original = read_ensemble_csv(&original[..], c.n_trajectories, c.seed).unwrap();
    table.fidelity.seed = original.fidelity.seed;
    assert_eq!(table, original);
    let records = read_trajectory_csv(std::fs::File::open(&traj).unwrap()).unwrap();
    assert_eq!(records.len(), c.n_trajectories);
    let direct = tabulate(&records, &c.tau_list, c.seed).unwrap();
    let mut buf = Vec::new();
    write_ensemble_csv(&mut buf, &direct).unwrap();
    assert_eq!(read_ensemble_csv(&buf[..], c.n_trajectories, c.seed).unwrap(), direct);
}

#[test]
fn windowed_columns_are_ordered_in_tau() {
    let mut c = small("five_qubit");
    c.tau_list = vec![0.05, 0.1, 0.15, 0.2];
    c.theta_list = vec![10.0 * std::f64::consts::PI / 1000.0];
    let run = &simulate(&c, 1).unwrap()[0];
    let f = &run.table.fidelity;
    let mut prev = f.mean.clone();
    for (_, w) in &run.table.windowed {
        for i in 0..w.mean.len() {
            assert!(w.mean[i] >= f.mean[i] - 1e-15);
            assert!(w.mean[i] >= prev[i] - 1e-15);
        }
        prev = w.mean.clone();
    }
}

#[test]
fn bad_routes_fail_before_running() {
    let mut c = small("five_qubit");
    c.routes = RouteChoice::Explicit(vec![vec![1, 2, 3, 4]; 4]);
    assert!(simulate(&c, 1).is_err());
}

fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::sample::select(vec!["five_qubit", "steane_seven", "bacon_shor_nine", "bitflip_three"]),
        prop::sample::select(vec![LogicalState::Zero, LogicalState::One, LogicalState::Plus, LogicalState::Minus]),
        (0.0f64..500.0, 0.0f64..50.0, 0.0f64..5.0, 0.0f64..2.0),
        proptest::collection::vec(0.0f64..0.1, 1..6),
        prop::bool::ANY,
        (0.5f64..5.0, 0usize..3, 1usize..10_000, any::<u64>()),
        prop::bool::ANY,
        proptest::collection::vec(0.0f64..0.5, 0..8),
        prop::sample::select(vec![RouteChoice::Naive, RouteChoice::Optimal]),
    )
        .prop_map(|(code, logical, rates, thetas, spont, (t, dt_kind, n, seed), sub, taus, routes)| {
            let sample_dt = t / 20.0;
            ExperimentConfig {
                code: code.into(),
                logical_state: logical,
                omega: rates.0,
                alpha: rates.1,
                gamma: rates.2,
                relay_dephasing: rates.3,
                theta_list: thetas,
                noise_kind: if spont { NoiseKind::Spontaneous } else { NoiseKind::BitFlip },
                routes,
                t_final: t,
                dt: match dt_kind {
                    0 => None,
                    1 => Some(sample_dt),
                    _ => Some(sample_dt / 7.0),
                },
                sample_dt,
                n_trajectories: n,
                seed,
                metric: if sub { MetricKind::Subsystem } else { MetricKind::Strict },
                tau_list: taus,
                output_dir: PathBuf::from("runs/sweep"),
                write_trajectories: spont,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn config_round_trip(c in config_strategy()) {
        let text = c.render();
        prop_assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    }
}
