#![no_main]

use libfuzzer_sys::fuzz_target;
use quasiriesz::parse::{int_range, radii};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((lo, hi)) = int_range(text) {
        assert!(lo <= hi);
    }
    if let Ok(rs) = radii(text) {
        assert!(rs.iter().all(|r| r.is_finite() && *r > 0.0));
    }
});
