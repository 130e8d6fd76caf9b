#![no_main]

use kfhe::dataset::{from_csv_reader, CsvOptions, LabelColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for label in [LabelColumn::Last, LabelColumn::Index(0)] {
        let options = CsvOptions { label, ..Default::default() };
        if let Ok(ds) = from_csv_reader(data, &options) {
            assert_eq!(ds.labels().len(), ds.rows());
            assert!(ds.labels().iter().all(|&l| l < ds.class_count()));
        }
    }
});
