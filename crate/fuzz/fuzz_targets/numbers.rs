#![no_main]

use libfuzzer_sys::fuzz_target;
use quasiriesz::parse::{decimal_digits, integer, rational, rational_to_string};
use quasiriesz::Alpha;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 512 {
        return;
    }
    if let Ok(q) = rational(text) {
        assert_eq!(rational(&rational_to_string(&q)).unwrap(), q);
    }
    let _ = integer(text);
    let _ = decimal_digits(text);
    let _ = Alpha::decimal(text);
});
