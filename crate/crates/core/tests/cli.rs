use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_solah");

fn data(name: &str) -> String {
    format!("{}/../../data/{name}.csv", env!("CARGO_MANIFEST_DIR"))
}

fn solah(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_file_exits_2_naming_the_path() {
    let o = solah(&["crossval", "/no/such/wine.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/wine.csv"));
}

#[test]
fn one_fold_is_a_usage_error() {
    let o = solah(&["crossval", &data("wine"), "--folds", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = solah(&["crossval"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn crossval_report_carries_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let o = solah(&["crossval", &data("wine"), "--k", "5", "--folds", "10", "--seed", "1", "-o", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    for key in ["accuracy:", "auc:", "rules:", "levels:", "clusters:", "time_ms:", "# k = 5", "# folds = 10", "# seed = 1"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
    // the report header is a valid config
    let cfg = solah::RunConfig::from_text(&text.lines().filter(|l| l.starts_with('#')).collect::<Vec<_>>().join("\n")).unwrap();
    assert_eq!(cfg.k, 5);
}

fn train_flat(dir: &Path) -> String {
    let model = dir.join("model.json");
    let o = solah(&["train", &data("wine"), "--flat", "--labels", "2", "-o", model.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    model.to_str().unwrap().to_string()
}

#[test]
fn predict_is_deterministic_and_checks_arity() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_flat(dir.path());
    let rows = dir.path().join("rows.csv");
    let text = std::fs::read_to_string(data("wine")).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    std::fs::write(&rows, first[..13].join(",") + "\n").unwrap();
    let a = solah(&["predict", &model, rows.to_str().unwrap()]);
    let b = solah(&["predict", &model, rows.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let line = stdout(&a);
    let fields: Vec<&str> = line.trim().split(',').collect();
    let masses: Vec<f64> = fields[1..].iter().map(|v| v.parse().unwrap()).collect();
    let best = (0..3).max_by(|&i, &j| masses[i].total_cmp(&masses[j]).then(j.cmp(&i))).unwrap();
    assert_eq!(fields[0], format!("class_{best}"));

    std::fs::write(&rows, "1,2,3\n").unwrap();
    let o = solah(&["predict", &model, rows.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 13"));
}

#[test]
fn exported_rules_of_a_flat_model_are_the_tree_rules() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_flat(dir.path());
    let o = solah(&["export-rules", &model]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let m = solah::Model::load(&model).unwrap();
    let rules: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rules.len(), m.rule_count());
    assert!(rules.iter().all(|r| r.contains(" → ")));
}

#[test]
fn build_writes_a_loadable_hierarchy() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let o = solah(&["build", &data("wine"), "--k", "4", "-o", h.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&h).unwrap();
    let hierarchy = solah::Hierarchy::from_text(&text).unwrap();
    assert_eq!(hierarchy.n_attributes, 13);
    let model = dir.path().join("m.json");
    let o = solah(&["train", &data("wine"), "--hierarchy", h.to_str().unwrap(), "-o", model.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn inspect_dcorr_cluster_and_roc_run() {
    for cmd in ["inspect", "dcorr", "cluster"] {
        let o = solah(&[cmd, &data("wine")]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        assert!(stdout(&o).contains("# seed = 1"), "{cmd}");
    }
    let o = solah(&["roc", &data("wbc"), "--folds", "3", "--positive", "malignant"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "fpr,tpr");
    assert_eq!(body[1], "0,0");
    assert_eq!(*body.last().unwrap(), "1,1");
}
