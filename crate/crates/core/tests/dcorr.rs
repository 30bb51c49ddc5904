mod common;

use proptest::prelude::*;
use rand::Rng;

use solah::dataset::Schema;
use solah::dcorr::{dcorr, DCorrMatrix, GoalEncoding};
use solah::Dataset;

use common::*;

#[test]
fn matches_definition_on_random_columns() {
    let mut r = rng(42);
    for _ in 0..100 {
        let n = r.gen_range(3..=50);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * r.gen_range(0.0..1.0) + r.gen_range(-1.0..1.0)).collect();
        let got = dcorr(&x, &y).unwrap().value;
        let want = dcorr_oracle(&x, &y);
        assert!((got - want).abs() < 1e-12, "n={n}: {got} vs {want}");
    }
}

#[test]
fn matrix_is_symmetric_with_unit_diagonal() {
    let text = "a,b,c,y\n1,2,0.5,p\n2,4,0.1,p\n3,5,0.9,n\n4,9,0.3,n\n5,11,0.7,n\n6,12,0.2,p\n";
    let d = Dataset::parse_csv("t", text, &Schema::default()).unwrap();
    let rows: Vec<usize> = (0..d.len()).collect();
    let m = DCorrMatrix::compute(&d, &rows, GoalEncoding::ClassCode).unwrap();
    for i in 0..3 {
        assert!((m.matrix[i][i] - 1.0).abs() < 1e-12);
        for j in 0..3 {
            assert_eq!(m.matrix[i][j], m.matrix[j][i]);
        }
        let col: Vec<f64> = rows.iter().map(|&s| d.value(s, i)).collect();
        let goal: Vec<f64> = d.goal().iter().map(|&c| c as f64).collect();
        assert!((m.goal[i] - dcorr_oracle(&col, &goal)).abs() < 1e-12);
    }
    assert!(m.clustering_input().iter().enumerate().all(|(i, r)| r[i] == 0.0));
}

#[test]
fn binary_goal_encodings_agree() {
    // with two classes one-hot distances are a scaled copy of code distances
    let text = "a,b,y\n1,2,p\n2,1,p\n3,5,n\n4,3,n\n5,8,n\n6,1,p\n";
    let d = Dataset::parse_csv("t", text, &Schema::default()).unwrap();
    let rows: Vec<usize> = (0..d.len()).collect();
    let a = DCorrMatrix::compute(&d, &rows, GoalEncoding::ClassCode).unwrap();
    let b = DCorrMatrix::compute(&d, &rows, GoalEncoding::OneHot).unwrap();
    for (x, y) in a.goal.iter().zip(&b.goal) {
        assert!((x - y).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn self_symmetry_affine_and_range(
        pairs in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 3..40),
        scale in 0.1f64..10.0,
        shift in -10.0f64..10.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let xy = dcorr(&x, &y).unwrap();
        prop_assume!(!xy.degenerate);
        prop_assert!((dcorr(&x, &x).unwrap().value - 1.0).abs() < 1e-12);
        prop_assert_eq!(xy.value, dcorr(&y, &x).unwrap().value);
        let x2: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        prop_assert!((dcorr(&x2, &y).unwrap().value - xy.value).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&xy.value));
    }
}
