use volterra_lab::{run_with, Experiment, ExperimentConfig, ExperimentReport, Format, RunOptions};

fn run(cfg: &ExperimentConfig) -> ExperimentReport {
    run_with(cfg, &RunOptions::default()).expect("valid config")
}

fn without_walls(report: &ExperimentReport) -> ExperimentReport {
    let mut r = report.clone();
    r.started_unix_s = 0;
    r.wall_time_s = 0.0;
    r.records.iter_mut().for_each(|x| x.wall_time_s = 0.0);
    r.verdicts.iter_mut().for_each(|x| x.wall_time_s = 0.0);
    r
}

fn body(csv: &str) -> &str {
    let (comment, rest) = csv.split_once('\n').unwrap();
    assert!(comment.starts_with("# volterra-lab "));
    rest
}

#[test]
fn volterra_1d_three_nilpotent_records() {
    let cfg = ExperimentConfig::new(Experiment::Volterra1d).with("dims", "64,128,256");
    let report = run(&cfg);
    assert_eq!(report.records.len(), 3);
    assert!(report.verdicts.is_empty());
    for (r, n) in report.records.iter().zip([64, 128, 256]) {
        assert_eq!(r.dim, Some(n));
        assert!(r.spectral_radius.unwrap() < 1e-8);
        assert!(r.s1.unwrap() > 0.05);
        assert!(r.error.is_none());
    }
    assert!(!report.has_errors());
}

#[test]
fn criterion_n0_converges_to_a_quarter() {
    let cfg = ExperimentConfig::new(Experiment::Criterion).with("n", "0").with("eps_list", "1e-2, 1e-4, 1e-6");
    let report = run(&cfg);
    assert_eq!(report.records.len(), 1);
    let c = report.records[0].criterion.as_ref().unwrap();
    assert!(!c.divergent);
    assert!((c.limit.unwrap() - 0.25).abs() < 1e-3);
    assert_eq!(report.records[0].params.get("n").map(String::as_str), Some("0"));
}

#[test]
fn criterion_rows_in_config_order() {
    let cfg = ExperimentConfig::new(Experiment::Criterion).with("n", "0..3").with("eps_list", "1e-1,1e-2,1e-3,1e-4");
    let report = run(&cfg);
    let ns: Vec<&str> = report.records.iter().map(|r| r.params["n"].as_str()).collect();
    assert_eq!(ns, ["0", "1", "2", "3"]);
    let divergent: Vec<bool> = report.records.iter().map(|r| r.criterion.as_ref().unwrap().divergent).collect();
    assert_eq!(divergent, [false, true, true, true]);
}

#[test]
fn power_law_sweep_five_persistent_verdicts() {
    let cfg = ExperimentConfig::new(Experiment::PerturbThm21)
        .with("alpha", "1")
        .with("q", "1")
        .with("a", "1")
        .with("seeds", "1..5")
        .with("dims", "64,256,1024");
    let report = run(&cfg);
    assert_eq!(report.verdicts.len(), 5);
    for (v, seed) in report.verdicts.iter().zip(1..) {
        assert_eq!(v.params["seed"], seed.to_string());
        assert_eq!(v.persistent_nonzero(), Some(true));
        assert_eq!(v.adjoint_persistent_nonzero, Some(true));
        assert!(v.adjoint_mismatch.unwrap() < 1e-8);
    }
    assert_eq!(report.records.len(), 15);
    // ordered by tuple, then dimension
    let keys: Vec<(String, usize)> =
        report.records.iter().map(|r| (r.params["seed"].clone(), r.dim.unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by_key(|(s, d)| (s.parse::<u64>().unwrap(), *d));
    assert_eq!(keys, sorted);
    assert!(report.records.iter().all(|r| r.top_eigenvalues.len() == 3 && r.persistent_nonzero == Some(true)));
}

#[test]
fn log_profile_records_carry_log_fits() {
    let cfg = ExperimentConfig::new(Experiment::PerturbThm23)
        .with("beta", "-1")
        .with("q", "0.8")
        .with("seeds", "3")
        .with("dims", "32,64,128");
    let report = run(&cfg);
    assert_eq!(report.verdicts.len(), 1);
    assert_eq!(report.verdicts[0].persistent_nonzero(), Some(true));
    let fit = report.records[2].fit.as_ref().unwrap();
    assert_eq!(fit.kind, vlab_core::asymptotics::DecayKind::SlowlyVaryingLog);
}

#[test]
fn snumbers_power_fit() {
    let cfg = ExperimentConfig::new(Experiment::Snumbers)
        .with("alpha", "1.5")
        .with("q", "0.25")
        .with("seeds", "7")
        .with("dims", "400")
        .with("window", "10,40");
    let report = run(&cfg);
    assert!(report.verdicts.is_empty());
    // T has s_1(T) = 1, so only the tail of C + T follows C's law
    let r = &report.records[0];
    let fit = r.fit.as_ref().unwrap();
    assert_eq!(fit.kind, vlab_core::asymptotics::DecayKind::PowerLaw);
    assert_eq!(fit.fit_window, (10, 40));
    assert!((1.3..1.8).contains(&fit.exponent), "{}", fit.exponent);
    let order = r.schatten_order.unwrap().finite().unwrap();
    assert!((order * fit.exponent - 1.0).abs() < 1e-12);
}

#[test]
fn disk_restriction_with_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("zeros.txt");
    let cfg = ExperimentConfig::new(Experiment::DiskRestriction)
        .with("n_max", "4,6,8")
        .with("k_max", "4,6,8")
        .with("seeds", "1,2")
        .with("rank", "3");
    let opts = RunOptions { bessel_cache: Some(cache.clone()) };
    let first = run_with(&cfg, &opts).unwrap();
    assert!(cache.exists());
    let second = run_with(&cfg, &opts).unwrap();
    assert_eq!(without_walls(&first), without_walls(&second));
    assert_eq!(first.verdicts.len(), 2);
    assert!(first.verdicts.iter().all(|v| v.persistent_nonzero() == Some(true)));
    let levels: Vec<&str> = first.records.iter().map(|r| r.params["level"].as_str()).collect();
    assert_eq!(levels, ["4x4", "6x6", "8x8", "4x4", "6x6", "8x8"]);
}

#[test]
fn validation_examples() {
    let ok = ExperimentConfig::new(Experiment::PerturbThm21)
        .with("alpha", "1")
        .with("q", "1")
        .with("seeds", "1..5")
        .with("dims", "64,256,1024");
    assert!(ok.validate().is_empty());

    let mut missing = ok.clone();
    missing.parameters.remove("alpha");
    let p = missing.validate();
    assert_eq!(p.len(), 1, "{p:?}");
    assert!(p[0].contains("alpha"));

    let p = ok.clone().with("dims", "64,32,1024").validate();
    assert_eq!(p.len(), 1, "{p:?}");
    assert!(p[0].contains("dims"));

    let p = ok.clone().with("colour", "red").validate();
    assert_eq!(p.len(), 1);
    assert!(p[0].contains("colour"));

    let p = ok.with("format", "xml").validate();
    assert_eq!(p.len(), 1);
    assert!(p[0].contains("format"));

    let bad = ExperimentConfig::new(Experiment::Criterion).with("n", "1").with("eps_list", "1e-2,1e-1,1e-3");
    assert!(bad.validate().iter().any(|p| p.contains("eps_list")));
    assert!(run_with(&bad, &RunOptions::default()).is_err());
}

#[test]
fn csv_is_byte_deterministic() {
    let cfg = ExperimentConfig::new(Experiment::PerturbThm21)
        .with("alpha", "0.5,1.5")
        .with("q", "2")
        .with("seeds", "4,2")
        .with("dims", "16,32,48");
    let a = run(&cfg).to_csv().unwrap();
    let b = run(&cfg).to_csv().unwrap();
    assert_eq!(body(&a), body(&b));
    let lines: Vec<&str> = body(&a).lines().collect();
    assert_eq!(lines.len(), 1 + 4 * 3);
    assert!(lines[0].starts_with("experiment,params,dim,spectral_radius,ev1_re,ev1_im"));
    // tuples follow config order: alpha 0.5 before 1.5, seed 4 before 2
    assert!(lines[1].contains("alpha=0.5") && lines[1].contains("seed=4"));
    assert!(lines[4].contains("alpha=0.5") && lines[4].contains("seed=2"));
    assert!(lines[7].contains("alpha=1.5"));
}

#[test]
fn csv_is_independent_of_thread_count() {
    let cfg = ExperimentConfig::new(Experiment::PerturbThm23)
        .with("beta", "-1")
        .with("q", "0.4,2")
        .with("seeds", "1..3")
        .with("dims", "16,24,40");
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&cfg));
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(&cfg));
    assert_eq!(body(&one.to_csv().unwrap()), body(&many.to_csv().unwrap()));
}

#[test]
fn json_round_trip() {
    let mut cfg = ExperimentConfig::new(Experiment::PerturbThm21)
        .with("alpha", "1")
        .with("q", "1")
        .with("seeds", "9")
        .with("dims", "16,32,64")
        .with("q_j", "0.5");
    cfg.format = Format::Json;
    let report = run(&cfg);
    let text = report.to_json().unwrap();
    assert_eq!(ExperimentReport::from_json(&text).unwrap(), report);

    let crit = run(&ExperimentConfig::new(Experiment::Criterion).with("n", "0,2").with("eps_list", "0.1,0.01,0.001"));
    assert_eq!(ExperimentReport::from_json(&crit.to_json().unwrap()).unwrap(), crit);
}
