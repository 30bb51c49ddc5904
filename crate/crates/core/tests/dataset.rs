use std::collections::HashMap;

use proptest::prelude::*;

use solah::dataset::{AttributeKind, Dataset, FoldPlan, Schema};

fn cell() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![9 => (-1e6f64..1e6).prop_map(Some), 1 => Just(None)]
}

fn table() -> impl Strategy<Value = (Vec<Vec<Option<f64>>>, Vec<Vec<usize>>, Vec<usize>)> {
    (3usize..30, 1usize..4, 0usize..3).prop_flat_map(|(n, n_cont, n_disc)| {
        (
            prop::collection::vec(prop::collection::vec(cell(), n), n_cont),
            prop::collection::vec(prop::collection::vec(0usize..4, n), n_disc),
            prop::collection::vec(0usize..3, n),
        )
    })
}

fn render(cont: &[Vec<Option<f64>>], disc: &[Vec<usize>], goal: &[usize]) -> String {
    let mut header: Vec<String> = (0..cont.len()).map(|a| format!("c{a}")).collect();
    header.extend((0..disc.len()).map(|a| format!("d{a}")));
    header.push("class".into());
    let mut out = header.join(",") + "\n";
    for i in 0..goal.len() {
        let mut row: Vec<String> = cont
            .iter()
            .map(|c| c[i].map_or("?".to_string(), |v| format!("{v}")))
            .collect();
        row.extend(disc.iter().map(|c| ["red", "green", "blue", "grey"][c[i]].to_string()));
        row.push(format!("k{}", goal[i]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn kinds(n_cont: usize, n_disc: usize) -> Schema {
    let mut schema = Schema {
        header: Some(true),
        ..Schema::default()
    };
    for a in 0..n_cont {
        schema.kinds.insert(a, AttributeKind::Continuous);
    }
    for a in n_cont..n_cont + n_disc {
        schema.kinds.insert(a, AttributeKind::Discrete);
    }
    schema
}

proptest! {
    #[test]
    fn csv_roundtrip((cont, disc, goal) in table()) {
        prop_assume!(goal.iter().any(|&g| g != goal[0]));
        prop_assume!(cont.iter().all(|c| c.iter().any(Option::is_some)));
        let schema = kinds(cont.len(), disc.len());
        let d = Dataset::parse_csv("t", &render(&cont, &disc, &goal), &schema).unwrap();
        let back = Dataset::parse_csv("t", &d.to_csv(), &schema).unwrap();
        prop_assert_eq!(&back, &d);
        for (a, col) in cont.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                match v {
                    Some(v) => prop_assert_eq!(d.value(i, a).to_bits(), v.to_bits()),
                    None => prop_assert!(d.value(i, a).is_nan()),
                }
            }
        }
    }

    #[test]
    fn folds_cover_every_sample_once(goal in prop::collection::vec(0usize..3, 10..80), k in 2usize..10, seed in 0u64..1000) {
        prop_assume!(goal.iter().any(|&g| g != goal[0]));
        let cont = vec![goal.iter().map(|&g| Some(g as f64 * 1.5)).collect::<Vec<_>>()];
        let d = Dataset::parse_csv("t", &render(&cont, &[], &goal), &kinds(1, 0)).unwrap();
        let plan = FoldPlan::stratified(&d, k, seed).unwrap();
        let mut seen = vec![0; d.len()];
        for f in 0..plan.len() {
            for &i in plan.test(f) {
                seen[i] += 1;
            }
            let train = plan.train(f);
            prop_assert_eq!(train.len() + plan.test(f).len(), d.len());
            prop_assert!(train.iter().all(|i| !plan.test(f).contains(i)));
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let sizes: Vec<usize> = (0..plan.len()).map(|f| plan.test(f).len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        // each class spreads evenly over the folds
        for c in 0..d.n_classes() {
            let per: Vec<usize> = (0..plan.len())
                .map(|f| plan.test(f).iter().filter(|&&i| d.goal()[i] == c).count())
                .collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(FoldPlan::from_text(&plan.to_text()).unwrap(), plan.clone());
        prop_assert_eq!(FoldPlan::stratified(&d, k, seed).unwrap(), plan);
    }
}

#[test]
fn bundled_datasets_load_with_expected_shapes() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/");
    let expected = [
        ("wine", 178, 13, 3),
        ("wbc", 699, 9, 2),
        ("wdbc", 569, 30, 2),
        ("glass", 214, 9, 6),
        ("diabetes", 768, 8, 2),
        ("ionosphere", 351, 33, 2),
        ("sonar", 208, 60, 2),
    ];
    for (name, n, attrs, classes) in expected {
        let d = Dataset::load_csv(format!("{root}{name}.csv"), &Schema::default()).unwrap();
        assert_eq!((d.len(), d.n_attributes(), d.n_classes()), (n, attrs, classes), "{name}");
    }
    let wbc = Dataset::load_csv(format!("{root}wbc.csv"), &Schema::default()).unwrap();
    assert_eq!(wbc.missing_count(), 16);
    let counts: HashMap<&str, usize> = wbc
        .classes
        .iter()
        .map(String::as_str)
        .zip(wbc.class_counts())
        .collect();
    assert_eq!(counts["benign"], 458);
}
