#![no_main]

use libfuzzer_sys::fuzz_target;
use quasiriesz_cli::config::config_from_text;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = config_from_text(text) {
        let back = config_from_text(&config.canonical_json().unwrap()).unwrap();
        assert_eq!(back, config);
    }
});
