//! Pinned values for the two-band spectrum `[0, √2) ∪ [2, 3)`, recorded from
//! a reviewed run. A change here means the numerics moved.

use quasiriesz::avdonin::{avdonin_report, s_sequence_boundedness, AvdoninConfig};
use quasiriesz::duality::{duality_experiment, Consistency, DualityConfig};
use quasiriesz::riesz::{window_sweep, Perturbation};
use quasiriesz::schema::{parse_spectrum, parse_spectrum_file, to_canonical_json, SpectrumFile};
use quasiriesz::Spectrum;

const TWO_BAND: &str = include_str!("../../../data/two_band.json");

fn two_band() -> Spectrum {
    parse_spectrum(TWO_BAND).unwrap()
}

fn close(actual: f64, expected: f64, rel: f64) -> bool {
    (actual - expected).abs() <= rel * expected.abs()
}

#[test]
fn mean_condition_on_the_full_window() {
    let r = avdonin_report(&two_band(), &AvdoninConfig::default()).unwrap();
    assert!(r.pass());
    assert_eq!(r.mean.n_used, 50);
    assert!(close(r.mean.margin, 0.1242, 0.01), "margin {}", r.mean.margin);
    assert!(close(r.mean.c_estimate, 1.46446, 1e-4), "c {}", r.mean.c_estimate);
    assert!(r.mean.c_estimate > 0.0);
}

#[test]
fn boundedness_witness() {
    let b = s_sequence_boundedness(&two_band(), (-100_000, 100_000), (-10_000, 10_000)).unwrap();
    assert!(close(b.sup_dev, 0.499998, 1e-4), "sup {}", b.sup_dev);
    assert!(b.growth < 0.05);
}

#[test]
fn certificate_sweep() {
    let sweep = window_sweep(&two_band(), &[25.0, 50.0, 100.0], Perturbation::None, 1e-8).unwrap();
    assert!(sweep.interlacing);
    let conds: Vec<f64> = sweep.rows.iter().map(|r| r.bounds.cond.unwrap()).collect();
    for (c, e) in conds.iter().zip([3335.8, 4145.1, 4397.1]) {
        assert!(close(*c, e, 1e-3), "cond {c} vs {e}");
    }
    assert!(close(sweep.rows[2].bounds.lambda_min, 1.1339e-3, 1e-3));
    assert!(sweep.cond_drift.unwrap() < 2.0);
}

#[test]
fn duality_is_corroborated() {
    let r = duality_experiment(&two_band(), &DualityConfig::default()).unwrap();
    assert_eq!(r.consistency, Consistency::Corroborated);
    assert!(r.primal_audit.consistent && r.dual_audit.consistent);
    assert!(r.primal_density.rel_error < 0.05 && r.dual_density.rel_error < 0.05);
}

#[test]
fn canonical_output_round_trips() {
    let s = two_band();
    let file = parse_spectrum_file(TWO_BAND).unwrap();
    let canonical = SpectrumFile::canonical(&s, Some(&file.combo().unwrap()));
    let text = to_canonical_json(&canonical).unwrap();
    assert_eq!(parse_spectrum(&text).unwrap(), s);
    // the canonical form is a fixed point
    let again = SpectrumFile::canonical(&parse_spectrum(&text).unwrap(), None);
    assert_eq!(to_canonical_json(&again).unwrap(), text);
}
