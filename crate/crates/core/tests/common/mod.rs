#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use kfhe::dataset::{load_csv, Column, CsvOptions, FeatureKind, FeatureSpec, Features, Schema};
use kfhe::Dataset;
use proptest::prelude::*;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(format!("{name}.csv"))
}

pub fn bundled(name: &str) -> Dataset {
    load_csv(data_path(name), &CsvOptions::default()).unwrap()
}

/// Small mixed-type dataset: numeric columns first, then categorical ones.
pub fn build(numeric: Vec<Vec<f64>>, categorical: Vec<(Vec<u32>, usize)>, labels: Vec<usize>, c: usize) -> Dataset {
    let mut features = Vec::new();
    let mut columns = Vec::new();
    for (j, col) in numeric.into_iter().enumerate() {
        features.push(FeatureSpec { name: format!("x{j}"), kind: FeatureKind::Numeric });
        columns.push(Column::Numeric(col));
    }
    for (j, (col, levels)) in categorical.into_iter().enumerate() {
        let levels = (0..levels).map(|l| format!("l{l}")).collect();
        features.push(FeatureSpec { name: format!("k{j}"), kind: FeatureKind::Categorical { levels } });
        columns.push(Column::Categorical(col));
    }
    let schema = Arc::new(Schema { features, label_name: "y".into() });
    let f = Features::new(schema, columns).unwrap();
    Dataset::new(f, labels, (0..c).map(|i| format!("c{i}")).collect()).unwrap()
}

/// Random dataset with up to `max_n` rows, 2..=`max_c` classes, a couple of
/// numeric columns on a coarse grid (so ties occur) and one categorical column.
pub fn arb_dataset(max_n: usize, max_c: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_c, 1..=max_n, 1usize..=3, 2usize..=5).prop_flat_map(|(c, n, d, levels)| {
        (
            proptest::collection::vec(proptest::collection::vec(-20i32..20, n), d),
            proptest::collection::vec(0..levels as u32, n),
            proptest::collection::vec(0..c, n),
            Just((c, levels)),
        )
            .prop_map(|(num, cat, labels, (c, levels))| {
                let numeric = num.into_iter().map(|col| col.into_iter().map(|v| v as f64 / 4.0).collect()).collect();
                build(numeric, vec![(cat, levels)], labels, c)
            })
    })
}
