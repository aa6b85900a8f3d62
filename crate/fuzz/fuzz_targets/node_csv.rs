#![no_main]

use libfuzzer_sys::fuzz_target;
use quasiriesz::{Alpha, NodeSet};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let alpha = Alpha::sqrt_int(2).unwrap();
    if let Ok(nodes) = NodeSet::from_csv(&alpha, text) {
        let again = NodeSet::from_csv(&alpha, &nodes.to_csv(&[]).unwrap()).unwrap();
        assert_eq!(again.len(), nodes.len());
    }
});
