#![no_main]

use std::sync::Arc;

use kfhe::dataset::{FeatureKind, FeatureSpec, Features, Schema};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let schema = Arc::new(Schema {
        features: vec![
            FeatureSpec { name: "x".into(), kind: FeatureKind::Numeric },
            FeatureSpec { name: "k".into(), kind: FeatureKind::Categorical { levels: vec!["a".into(), "b".into()] } },
        ],
        label_name: "y".into(),
    });
    if let Ok((features, labels)) = Features::from_csv_reader(data, &schema) {
        assert_eq!(features.width(), 2);
        if let Some(labels) = labels {
            assert_eq!(labels.len(), features.rows());
        }
    }
});
