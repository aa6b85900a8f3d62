#![no_main]

use libfuzzer_sys::fuzz_target;
use quasiriesz::schema::{parse_spectrum, parse_spectrum_file, to_canonical_json, SpectrumFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_spectrum_file(text) else { return };
    let Ok(spectrum) = file.spectrum() else { return };
    // canonical output must re-read to the same spectrum
    let combo = file.combo().ok();
    let canonical = SpectrumFile::canonical(&spectrum, combo.as_ref());
    let out = to_canonical_json(&canonical).expect("canonical output serialises");
    assert_eq!(parse_spectrum(&out).expect("canonical output parses"), spectrum);
});
