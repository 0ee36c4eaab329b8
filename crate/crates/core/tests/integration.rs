mod common;

use std::path::Path;
use std::process::Command;

use fair_kcenter::fdlp::RowKind;
use fair_kcenter::io::{load_dataset, ColumnSpec, RunReport, RunStatus};
use fair_kcenter::joiner::JoinerKey;
use fair_kcenter::{
    build_frequency_table, build_lp, check_feasible, distance_matrix, greedy_k_center, joiner_of,
    randomized_assign, FairnessParams,
};
use rand::Rng;

use common::*;

#[test]
fn geometric_example_reproduces_caption_and_table() {
    let ex = geometric_example();
    let dmat = distance_matrix(&ex.points, ex.centers.coords()).unwrap();
    let key = |p: usize| joiner_of(p - 1, &dmat, EXAMPLE_LAMBDA).unwrap();
    assert_eq!(key(6), JoinerKey::from_centers(&[1]).unwrap());
    assert_eq!(key(12), JoinerKey::from_centers(&[0, 2]).unwrap());
    assert_eq!(key(11), JoinerKey::from_centers(&[0, 1, 2]).unwrap());

    let table = build_frequency_table(&ex.model, &dmat, EXAMPLE_LAMBDA).unwrap();
    assert_eq!(table.nonempty_joiners(), 6);
    assert_eq!(table.count(0, JoinerKey::from_centers(&[0, 1]).unwrap()), 0);
    let reference = example_table(EXAMPLE_LAMBDA);
    let summary = |t: &fair_kcenter::FrequencyTable| {
        t.entries()
            .iter()
            .map(|e| (e.signature, e.joiner, e.count()))
            .collect::<Vec<_>>()
    };
    assert_eq!(summary(&table), summary(&reference));
}

#[test]
fn example_lp_feasibility_threshold() {
    let table = example_table(EXAMPLE_LAMBDA);
    let model = example_table_model(&table);
    let lp_at = |alpha: f64| {
        let params = FairnessParams::uniform(3, alpha, 0.0).unwrap();
        build_lp(&table, &params, &model).unwrap()
    };
    let loose = lp_at(0.5);
    assert!(check_feasible(loose.program()).unwrap().is_feasible());
    let tight = lp_at(1.0 / 14.0);
    assert!(!check_feasible(tight.program()).unwrap().is_feasible());

    let dominance = loose
        .row_kinds()
        .iter()
        .filter(|k| matches!(k, RowKind::Dominance { .. }))
        .count();
    assert_eq!(dominance, 9);
    assert!(!loose
        .row_kinds()
        .iter()
        .any(|k| matches!(k, RowKind::Protection { .. })));
}

#[test]
fn feasibility_is_monotone_in_lambda() {
    for seed in 0..20 {
        let mut rng = rng(7_000 + seed);
        let n = rng.gen_range(20..=60);
        let points = random_points(&mut rng, n, 2, 10.0);
        let model = random_model(&mut rng, n, 3, 2);
        let params = fair_kcenter::params_from_delta(&model, 0.3).unwrap();
        let centers = greedy_k_center(&points, None, 4).unwrap();
        let dmat = distance_matrix(&points, centers.coords()).unwrap();
        let start = dmat.max_row_min();
        let mut seen_feasible = false;
        for step in 0..30 {
            let lambda = start + step as f64 * dmat.max() / 29.0;
            let table = build_frequency_table(&model, &dmat, lambda).unwrap();
            let lp = build_lp(&table, &params, &model).unwrap();
            let feasible = check_feasible(lp.program()).unwrap().is_feasible();
            assert!(feasible || !seen_feasible, "seed {seed}: infeasible at {lambda} after a feasible radius");
            seen_feasible |= feasible;
        }
        assert!(seen_feasible, "seed {seed}: never feasible");
    }
}

#[test]
fn rounding_matches_fractional_splits_in_expectation() {
    let mut rng = rng(99);
    let n = 300;
    let points = random_points(&mut rng, n, 2, 10.0);
    let model = random_model(&mut rng, n, 3, 2);
    let params = FairnessParams::uniform(3, 1.0, 0.0).unwrap();
    let centers = greedy_k_center(&points, None, 5).unwrap();
    let dmat = distance_matrix(&points, centers.coords()).unwrap();
    let table = build_frequency_table(&model, &dmat, 0.6 * dmat.max()).unwrap();
    let lp = build_lp(&table, &params, &model).unwrap();

    // Random positive weights per entry, scaled to the entry's count.
    let mut x = vec![0.0; lp.variables().len()];
    for (e, entry) in table.entries().iter().enumerate() {
        let vars: Vec<usize> = lp.entry_variables(e).collect();
        let w: Vec<f64> = vars.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        for (v, wi) in vars.iter().zip(&w) {
            x[*v] = entry.count() as f64 * wi / total;
        }
    }
    assert!(lp.program().max_violation(&x) < 1e-9);

    let draws = 2000;
    let mut sums = vec![0usize; x.len()];
    for d in 0..draws {
        let asg = randomized_assign(&lp, &x, &table, n, d).unwrap();
        for (e, entry) in table.entries().iter().enumerate() {
            for v in lp.entry_variables(e) {
                let j = lp.variables()[v].center;
                sums[v] += entry.members.iter().filter(|&&p| asg.labels()[p] == j).count();
            }
        }
    }
    let mut outside = 0;
    for (v, var) in lp.variables().iter().enumerate() {
        let count = table.entries()[var.entry].count() as f64;
        let p = x[v] / count;
        let se = (count * p * (1.0 - p) / draws as f64).sqrt();
        let mean = sums[v] as f64 / draws as f64;
        if (mean - x[v]).abs() > 3.0 * se {
            outside += 1;
        }
    }
    let cells = x.len();
    assert!(cells > 50, "too few cells ({cells}) to be meaningful");
    assert!(
        outside as f64 <= 0.01 * cells as f64 + 1.0,
        "{outside} of {cells} cells outside 3 SE"
    );
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fair-kcenter"))
}

fn synth_csv(dir: &Path, n: usize, groups: usize) -> std::path::PathBuf {
    let path = dir.join("data.csv");
    let out = bin()
        .args(["synth", "--n", &n.to_string(), "--groups", &groups.to_string(), "--overlap", "0.2"])
        .args(["--seed", "3", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn cli_run_writes_report_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path(), 150, 2);
    let report_path = dir.path().join("report.json");
    let lp_path = dir.path().join("lp.txt");
    let table_path = dir.path().join("table.csv");
    let out = bin()
        .args(["run", "--input"])
        .arg(&data)
        .args(["--k", "4", "--delta", "0.2", "--group-cols", "g0,g1", "--repeats", "3", "--trace"])
        .arg("--output")
        .arg(&report_path)
        .arg("--dump-lp")
        .arg(&lp_path)
        .arg("--dump-table")
        .arg(&table_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.status, RunStatus::Ok);
    assert_eq!(report.centers.len(), 4);
    assert_eq!(report.violation.as_ref().unwrap().per_repeat.len(), 3);
    assert_eq!(report.clusters.iter().map(|c| c.size).sum::<usize>(), 150);
    assert!(report.trace.is_some());

    let lp_text = std::fs::read_to_string(&lp_path).unwrap();
    let lp = report.lp.unwrap();
    assert!(lp_text.contains(&format!("vars {}", lp.variables)));
    let table_text = std::fs::read_to_string(&table_path).unwrap();
    assert!(table_text.starts_with("mask,signature,count\n"));
}

#[test]
fn cli_rejects_conflicting_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path(), 20, 2);
    let out = bin()
        .args(["run", "--input"])
        .arg(&data)
        .args(["--k", "2", "--delta", "0.2", "--alpha", "0.5", "--beta", "0.1", "--group-cols", "g0,g1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bin()
        .args(["run", "--input"])
        .arg(&data)
        .args(["--k", "2", "--group-cols", "g0,g1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn cli_reports_na_and_tle() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path(), 60, 2);
    // Two groups covering every point cannot both stay under 30%.
    let out = bin()
        .args(["run", "--input"])
        .arg(&data)
        .args(["--k", "3", "--alpha", "0.3", "--beta", "0", "--group-cols", "g0,g1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.status, RunStatus::NotAvailable);
    assert!(report.cost.is_none());

    let out = bin()
        .args(["run", "--input"])
        .arg(&data)
        .args(["--k", "3", "--delta", "0.3", "--group-cols", "g0,g1", "--tle-seconds", "1e-9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.status, RunStatus::TimeLimitExceeded);
    assert!(report.trace.is_some());
}

#[test]
fn cli_sweep_emits_tidy_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path(), 120, 2);
    let plot = dir.path().join("plot.csv");
    let out = bin()
        .args(["sweep", "--input"])
        .arg(&data)
        .args(["--k", "1", "--delta", "0.2", "--group-cols", "g0,g1", "--axis", "k", "--values", "3,4,5"])
        .arg("--output")
        .arg(&plot)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&plot).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,metric,value");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("3,cost,"));
}

#[test]
fn loader_reads_files_with_categorical_groups() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("people.csv");
    std::fs::write(
        &path,
        "age,balance,marital,default\n30,100,married,0\n45,2500,single,1\n50,80,divorced,0\n",
    )
    .unwrap();
    let spec = ColumnSpec {
        group_cols: vec!["marital".into(), "default".into()],
        feature_cols: Some(vec!["age".into(), "balance".into()]),
        normalize: false,
    };
    let d = load_dataset(&path, &spec).unwrap();
    assert_eq!(d.points.len(), 3);
    assert_eq!(
        d.group_names,
        vec!["marital=divorced", "marital=married", "marital=single", "default"]
    );
    assert_eq!(d.model.max_groups_per_point(), 2);
    assert!(load_dataset(dir.path().join("missing.csv"), &spec).is_err());
}

#[test]
fn synthetic_csv_round_trips_through_loader() {
    let cfg = fair_kcenter::synth::SyntheticConfig {
        n: 80,
        dim: 3,
        groups: 4,
        overlap: 0.4,
        seed: 5,
        ..Default::default()
    };
    let data = fair_kcenter::synth::generate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.csv");
    fair_kcenter::synth::write_csv(&data, std::fs::File::create(&path).unwrap()).unwrap();
    let spec = ColumnSpec {
        group_cols: (0..4).map(|g| format!("g{g}")).collect(),
        feature_cols: None,
        normalize: false,
    };
    let loaded = load_dataset(&path, &spec).unwrap();
    assert_eq!(loaded.points, data.points);
    assert_eq!(loaded.model.signatures(), data.model.signatures());
    for p in 0..80 {
        assert_eq!(loaded.model.signature_of(p), data.model.signature_of(p));
    }
}

#[test]
fn small_fair_run_cost_sits_between_greedy_and_three_times_greedy() {
    use fair_kcenter::io::{run_dataset, Algorithm, Bounds, Dataset, RunConfig};
    let data = fair_kcenter::synth::generate(&fair_kcenter::synth::SyntheticConfig {
        n: 60,
        groups: 2,
        seed: 12,
        ..Default::default()
    })
    .unwrap();
    let dataset = Dataset {
        points: data.points,
        model: data.model,
        feature_names: vec!["f0".into(), "f1".into()],
        group_names: vec!["g0".into(), "g1".into()],
    };
    let config = |algorithm| RunConfig {
        input: "synthetic".into(),
        columns: ColumnSpec::default(),
        k: 3,
        epsilon: 1e-3,
        bounds: Bounds::Delta(0.2),
        algorithm,
        seed: 0,
        repeats: 1,
        trace: false,
        tle_seconds: 60.0,
    };
    let greedy = run_dataset(&dataset, &config(Algorithm::Greedy)).unwrap();
    let fair = run_dataset(&dataset, &config(Algorithm::Fair)).unwrap();
    let g = greedy.cost.unwrap();
    let f = fair.cost.unwrap();
    assert!(f >= g - 1e-12, "fair {f} below greedy {g}");
    assert!(f <= 3.0 * g + 1e-3, "fair {f} above 3 x greedy {g}");
    let v = greedy.violation.unwrap();
    assert_eq!(v.median, v.max);
}
