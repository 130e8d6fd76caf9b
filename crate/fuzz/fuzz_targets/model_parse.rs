#![no_main]

use kfhe::model_io::{from_text, to_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(saved) = from_text(text) {
        let again = from_text(&to_text(&saved)).expect("re-parse of a written model");
        assert_eq!(to_text(&again), to_text(&saved));
    }
});
