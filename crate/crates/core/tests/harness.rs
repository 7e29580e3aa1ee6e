use std::path::Path;

use qkd_epsilon::budget::Family;
use qkd_epsilon::harness::{
    emit_results, load_config, run_sweep, OutputFormat, ProtocolParams, SweepSpec,
};
use qkd_epsilon::Error;

fn quick(family: Family) -> SweepSpec {
    let mut spec = SweepSpec::defaults(family);
    spec.cga_config.population = 60;
    spec.cga_config.iterations = 60;
    spec
}

#[test]
fn config_file_with_every_section() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dv.toml");
    std::fs::write(
        &path,
        r#"
family = "DV"

[protocol]
length_km = 50.0
qber_override = 0.03

[budget]
eps = 1e-12

[cga]
population = 40
seed = 5

[sweep]
eps_levels = [1e-15, 1e-12]
include_oracle = true
oracle_points = 20
output = "out.json"
format = "json"
"#,
    )
    .unwrap();
    let spec = load_config(&path).unwrap();
    assert_eq!(spec.family, Family::Dv);
    match &spec.protocol {
        ProtocolParams::Dv(p) => {
            assert_eq!(p.length_km, 50.0);
            assert_eq!(p.qber_override, Some(0.03));
            assert_eq!(p.clock_hz, 2e9);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(spec.cga_config.population, 40);
    assert_eq!(spec.cga_config.iterations, 300);
    assert_eq!(spec.eps_levels, vec![1e-15, 1e-12]);
    assert_eq!(spec.format, OutputFormat::Json);
    assert_eq!(spec.budget.eps, Some(1e-12));
}

#[test]
fn missing_file_is_io_error_with_path() {
    let err = load_config(Path::new("/nonexistent/dir/cfg.toml")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/cfg.toml"));
    assert!(!err.is_validation());
}

#[test]
fn sweep_invariants_cv() {
    let mut spec = quick(Family::Cv);
    spec.eps_levels = vec![1e-12, 1e-10, 1e-8, 1e-6];
    let res = run_sweep(&spec).unwrap();
    check_sweep(&res.records);
}

#[test]
fn sweep_invariants_dv() {
    let mut spec = quick(Family::Dv);
    spec.eps_levels = vec![1e-17, 1e-14, 1e-11, 1e-8, 1e-5];
    let res = run_sweep(&spec).unwrap();
    check_sweep(&res.records);
}

fn check_sweep(records: &[qkd_epsilon::harness::LevelRecord]) {
    let clamp = |r: Option<f64>| r.unwrap().max(0.0);
    for r in records {
        assert!(r.errors.is_empty(), "{:?}", r.errors);
        let opt = r.rate_opt().unwrap();
        assert!(opt >= r.rate_sym().unwrap() - 1e-9, "eps {:e}", r.eps_total);
        assert!(
            opt >= r.rate_asym().unwrap() - 1e-9,
            "eps {:e}",
            r.eps_total
        );
    }
    for w in records.windows(2) {
        assert!(clamp(w[1].rate_opt()) >= clamp(w[0].rate_opt()));
        assert!(clamp(w[1].rate_sym()) >= clamp(w[0].rate_sym()));
        assert!(clamp(w[1].rate_asym()) >= clamp(w[0].rate_asym()));
    }
}

#[test]
fn sweep_with_oracle_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = quick(Family::Cv);
    spec.eps_levels = vec![3e-13, 1e-9];
    spec.include_oracle = true;
    spec.oracle_points = 40;
    spec.output_path = Some(dir.path().join("nested/sweep.json"));
    spec.format = OutputFormat::Json;
    let res = run_sweep(&spec).unwrap();

    for r in &res.records {
        let (opt, oracle) = (r.rate_opt().unwrap(), r.rate_oracle().unwrap());
        assert!(
            opt >= oracle - qkd_epsilon::oracle::oracle_slack(oracle),
            "{opt} vs {oracle}"
        );
    }

    let text = std::fs::read_to_string(spec.output_path.as_ref().unwrap()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = &v["levels"][0];
    // 3e-13 is below every CV positivity edge
    assert_eq!(first["rate_sym_bps"], 0.0);
    assert!(first["raw"]["rate_sym_bps"].as_f64().unwrap() < 0.0);
    assert_eq!(
        first["record"]["optimized"]["fitness_history"]
            .as_array()
            .unwrap()
            .len(),
        spec.cga_config.iterations + 1
    );
}

#[test]
fn csv_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = quick(Family::Cv);
    spec.cga_config.iterations = 5;
    let res = run_sweep(&spec).unwrap();
    let path = dir.path().join("sweep.csv");
    emit_results(&res, OutputFormat::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(
        lines[0],
        "eps_total,eps_pe_opt,eps_cor_opt,eps_sec_opt,rate_opt_bps,rate_sym_bps,rate_asym_bps,rate_oracle_bps"
    );
    assert!(
        lines[1..].iter().all(|l| l.ends_with(',')),
        "oracle column must be empty"
    );
}
