//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use quasiriesz::avdonin::{
    avdonin_report, block_count_mismatch, block_sum_identities, deltas, s_sequence_boundedness, AvdoninConfig,
    Precision,
};
use quasiriesz::duality::{duality_experiment, Consistency, DualityConfig};
use quasiriesz::quasicrystal::{
    block_count, dual_window, partition_enumerate, primal_window, verify_partition, Anchor, CoordBox,
};
use quasiriesz::riesz::{ft_indicator, gram, spectral_bounds, window_sweep, Perturbation};
use quasiriesz::sampling::{reconstruction_experiment, ReconstructionConfig};
use quasiriesz::schema::parse_spectrum;
use quasiriesz::{Lattice2, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../core/tests/support/quadrature.rs"]
mod quadrature;

const PARTITION_BOX: i64 = 2000;
const BLOCK_WINDOW: i64 = 10_000;
const BLOCK_SUM_TOL: f64 = 1e-9;
const BOUND_OUTER: i64 = 100_000;
const BOUND_INNER: i64 = 10_000;
const BOUND_GROWTH: f64 = 0.05;
const C_TOL: f64 = 0.01;
const UNIT_N_MAX: usize = 1000;
const UNIT_SUP_FRACTION: f64 = 0.9;
const RADII: [f64; 3] = [25.0, 50.0, 100.0];
const PLATEAU_DRIFT: f64 = 2.0;
const NEAR_DUPLICATE_DROP: f64 = 1e3;
const EIGEN_TOL: f64 = 1e-8;
const INTERIOR_ERROR: f64 = 1e-3;
const ORACLE_AGREEMENT: f64 = 0.01;
const TRANSFORM_SAMPLES: usize = 1000;
const TRANSFORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 0.05;

struct Line {
    pass: bool,
    detail: String,
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn spectra() -> [(&'static str, Spectrum); 2] {
    let load = |n: &str| parse_spectrum(&std::fs::read_to_string(data(n)).expect("data file")).expect("valid spectrum");
    [("S1", load("unit.json")), ("S2", load("two_band.json"))]
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn c1_partition() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let r = verify_partition(&Lattice2::gamma(s.alpha()), &s, CoordBox::square(PARTITION_BOX))
            .expect("partition check");
        pass &= r.equal;
        detail.push(format!("{name}: {} nodes equal={}", r.cut_project_count, r.equal));
    }
    let e = t.elapsed();
    pass &= within(e, 10.0);
    Line { pass, detail: format!("{} [{:.2}s < 10s]", detail.join(", "), e.as_secs_f64()) }
}

fn c2_block_counts() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let nodes = partition_enumerate(&s, (-BLOCK_WINDOW, BLOCK_WINDOW), Anchor::Origin).unwrap();
        let phi_ok = block_count_mismatch(&s, &nodes).unwrap().is_none();
        // s_n − s_{n−1} against the band formula as a second count
        let formula_ok = nodes.blocks().iter().all(|b| block_count(&s, b.n).unwrap() == b.len() as u64);
        let steps_ok = nodes.blocks().windows(2).all(|w| w[0].end == w[1].start);
        pass &= phi_ok && formula_ok && steps_ok;
        detail.push(format!("{name}: {} blocks phi={phi_ok} formula={formula_ok}", nodes.blocks().len()));
    }
    let e = t.elapsed();
    pass &= within(e, 5.0);
    Line { pass, detail: format!("{} [{:.2}s < 5s]", detail.join(", "), e.as_secs_f64()) }
}

fn c3_block_sums() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let range = (-BLOCK_WINDOW, BLOCK_WINDOW);
        let nodes = partition_enumerate(&s, range, Anchor::Origin).unwrap();
        let d = deltas(&nodes, s.measure(), Precision::Float).unwrap();
        let sums = block_sum_identities(&s, &nodes, &d, range).unwrap();
        pass &= sums.blocks == (2 * BLOCK_WINDOW + 1) as usize && sums.max_abs_err <= BLOCK_SUM_TOL;
        detail.push(format!("{name}: max err {:.2e} at n={}", sums.max_abs_err, sums.worst_block));
    }
    let e = t.elapsed();
    pass &= within(e, 10.0);
    Line { pass, detail: format!("{} (tol {BLOCK_SUM_TOL:e}) [{:.2}s < 10s]", detail.join(", "), e.as_secs_f64()) }
}

fn c4_boundedness() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let b = s_sequence_boundedness(&s, (-BOUND_OUTER, BOUND_OUTER), (-BOUND_INNER, BOUND_INNER)).unwrap();
        let ok = b.sup_dev.is_finite() && b.growth < BOUND_GROWTH && (name != "S1" || b.sup_dev == 0.0);
        pass &= ok;
        detail.push(format!("{name}: sup {:.6} const {:.6} growth {:.2e}", b.sup_dev, b.const_estimate, b.growth));
    }
    Line { pass, detail: format!("{} [{:.2}s]", detail.join(", "), t.elapsed().as_secs_f64()) }
}

fn c5_mean_condition() -> Line {
    let t = Instant::now();
    let [(_, s1), (_, s2)] = spectra();
    let r1 = avdonin_report(&s1, &AvdoninConfig::default()).unwrap();
    let m1 = &r1.mean;
    let best1 = m1.rows.iter().filter(|r| r.n <= UNIT_N_MAX).map(|r| r.sup_deviation).fold(f64::INFINITY, f64::min);
    let ok1 = m1.threshold == 0.25 && (m1.c_estimate - 0.5).abs() <= C_TOL && best1 <= UNIT_SUP_FRACTION * m1.threshold;
    let r2 = avdonin_report(&s2, &AvdoninConfig::default()).unwrap();
    let m2 = &r2.mean;
    let ok2 = m2.pass && m2.n_used <= 10_000 && m2.margin >= 0.1;
    let e = t.elapsed();
    Line {
        pass: ok1 && ok2 && within(e, 60.0),
        detail: format!(
            "S1: threshold {} c {:.5} best sup(N<=1000) {:.4}; S2: threshold {:.5} N={} sup {:.5} margin {:.3} [{:.2}s < 60s]",
            m1.threshold, m1.c_estimate, best1, m2.threshold, m2.n_used, m2.sup_block_deviation, m2.margin, e.as_secs_f64()
        ),
    }
}

fn c6_riesz_witness() -> Line {
    let t = Instant::now();
    let [_, (_, s2)] = spectra();
    let sweep = window_sweep(&s2, &RADII, Perturbation::None, EIGEN_TOL).unwrap();
    let drift = sweep.cond_drift.unwrap_or(f64::INFINITY);
    let near = window_sweep(&s2, &[100.0], Perturbation::AddNear, EIGEN_TOL).unwrap();
    let base = sweep.rows.last().unwrap().bounds.lambda_min;
    let drop = base / near.rows[0].bounds.lambda_min;
    let conds: Vec<String> =
        sweep.rows.iter().map(|r| format!("{:.1}", r.bounds.cond.unwrap_or(f64::INFINITY))).collect();
    let e = t.elapsed();
    Line {
        pass: drift < PLATEAU_DRIFT && sweep.interlacing && drop >= NEAR_DUPLICATE_DROP && within(e, 120.0),
        detail: format!(
            "cond {} drift {drift:.3}, interlacing {}, near-duplicate drop {drop:.3e} [{:.2}s < 120s]",
            conds.join("/"),
            sweep.interlacing,
            e.as_secs_f64()
        ),
    }
}

fn c7_reconstruction() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let run = reconstruction_experiment(&s, &ReconstructionConfig::default()).unwrap();
        let r = &run.report;
        pass &= r.interior_rel_error <= INTERIOR_ERROR && r.oracle_agreement <= ORACLE_AGREEMENT;
        detail.push(format!(
            "{name}: interior err {:.3e} (need <= {INTERIOR_ERROR:e}), QR oracle {:.3e}, agreement {:.1e}",
            r.interior_rel_error, r.oracle_interior_rel_error, r.oracle_agreement
        ));
    }
    let e = t.elapsed();
    pass &= within(e, 60.0);
    Line { pass, detail: format!("{} [{:.2}s < 60s]", detail.join("; "), e.as_secs_f64()) }
}

/// Up to four bands with endpoints in `(1/8)ℤ + ℤ√2`, written as input text.
fn random_spectrum(rng: &mut ChaCha8Rng) -> Spectrum {
    let mut terms = Vec::new();
    let (mut u, mut v) = (rng.gen_range(-40i64..40), rng.gen_range(-2i64..=2));
    for _ in 0..rng.gen_range(1..=4) {
        let (n, m) = (rng.gen_range(0i64..=1), rng.gen_range(1i64..=3));
        terms.push(format!(r#"{{"coeff": "1", "lo": {{"u": "{u}/8", "v": {v}}}, "len": {{"n": {n}, "m": {m}}}}}"#));
        u += 8 * m + rng.gen_range(1i64..=16);
        v += n;
    }
    let text = format!(
        r#"{{"alpha": {{"kind": "sqrt", "value": "2"}}, "beta": {{"kind": "rational", "value": "1"}}, "terms": [{}]}}"#,
        terms.join(",")
    );
    parse_spectrum(&text).expect("random spectrum")
}

fn c8_transforms() -> Line {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..TRANSFORM_SAMPLES {
        let s = random_spectrum(&mut rng);
        let x: f64 = rng.gen_range(-50.0..50.0);
        let ends: Vec<(f64, f64)> =
            s.bands().iter().map(|b| (s.alpha().to_f64(b.lo()), s.alpha().to_f64(b.hi()))).collect();
        worst = worst.max((ft_indicator(&s, x) - quadrature::ft_bands(&ends, x, 1e-14)).norm());
    }
    // Gram invariants on every matrix built here
    let mut matrices = 0;
    let mut invariants = true;
    let mut check = |nodes: &quasiriesz::NodeSet, space: &Spectrum| {
        let g = gram(nodes, space).unwrap();
        let b = spectral_bounds(&g, EIGEN_TOL).unwrap();
        invariants &= g.hermitian_defect() == 0.0 && b.lambda_min > -EIGEN_TOL * b.lambda_max;
        matrices += 1;
    };
    for (_, s) in spectra() {
        let interval = Spectrum::interval(s.alpha().clone(), quasiriesz::QNum::zero(), s.measure().clone()).unwrap();
        for r in RADII {
            check(&primal_window(&s, r).unwrap(), &s);
            check(&dual_window(&s, r).unwrap(), &interval);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let s = random_spectrum(&mut rng);
        check(&primal_window(&s, 10.0).unwrap(), &s);
    }
    Line {
        pass: worst <= TRANSFORM_TOL && invariants,
        detail: format!(
            "max |ft - quadrature| {worst:.2e} over {TRANSFORM_SAMPLES} (tol {TRANSFORM_TOL:e}); {matrices} Gram matrices Hermitian/PSD={invariants} [{:.2}s]",
            t.elapsed().as_secs_f64()
        ),
    }
}

fn c9_duality() -> Line {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in spectra() {
        let r = duality_experiment(&s, &DualityConfig::default()).unwrap();
        let audits = [&r.primal_audit, &r.dual_audit];
        let resolved: usize = audits.iter().map(|a| a.resolved()).sum();
        let total: usize = audits.iter().map(|a| a.cases.len()).sum();
        let open_excluded =
            audits.iter().all(|a| a.cases.iter().filter(|c| c.exact_hit).all(|c| c.included == c.closed_end));
        let ok = r.consistency == Consistency::Corroborated
            && audits.iter().all(|a| a.consistent)
            && resolved == total
            && open_excluded
            && r.primal_density.rel_error <= DENSITY_TOL
            && r.dual_density.rel_error <= DENSITY_TOL;
        let open_hit = r.dual_audit.cases.iter().find(|c| c.n == 2 && c.m == 1);
        let s2_hit_ok = name != "S2" || open_hit.is_some_and(|c| c.exact_hit && !c.closed_end && !c.included);
        pass &= ok && s2_hit_ok;
        detail.push(format!(
            "{name}: drift {:.3}/{:.3} {:?}, audit {resolved}/{total} exact ({} endpoint hits), density {:.1e}/{:.1e}",
            r.primal.cond_drift.unwrap_or(f64::INFINITY),
            r.dual.cond_drift.unwrap_or(f64::INFINITY),
            r.consistency,
            r.primal_audit.exact_hits + r.dual_audit.exact_hits,
            r.primal_density.rel_error,
            r.dual_density.rel_error
        ));
    }
    Line { pass, detail: format!("{} [{:.2}s]", detail.join("; "), t.elapsed().as_secs_f64()) }
}

/// Every subcommand on the two-band spectrum, run from `dir`.
fn suite(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let spectrum = data("two_band.json");
    let s = spectrum.to_str().unwrap();
    let runs: [&[&str]; 6] = [
        &["construct", "--spectrum", s, "--n-range", "-100:100", "--out", "construct"],
        &["verify", "--spectrum", s, "--out", "verify"],
        &["certify", "--spectrum", s, "--out", "certify"],
        &["certify", "--spectrum", s, "--radii", "100", "--perturb", "add-near", "--out", "certify-near"],
        &["reconstruct", "--spectrum", s, "--out", "reconstruct"],
        &["duality", "--spectrum", s, "--out", "duality"],
    ];
    for args in runs {
        let status = Command::new(env!("CARGO_BIN_EXE_quasiriesz"))
            .args(args)
            .current_dir(dir)
            .stderr(Stdio::null())
            .status()
            .unwrap();
        // verdict failures still write artifacts
        assert!(matches!(status.code(), Some(0 | 1)), "{args:?} exited with {status}");
    }
    let mut files = Vec::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        files.push((rel, std::fs::read(&entry).unwrap()));
    }
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn c10_determinism() -> Line {
    let t = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = suite(a.path());
    let second = suite(b.path());
    let identical = first == second && !first.is_empty();
    let bytes: usize = first.iter().map(|f| f.1.len()).sum();
    Line {
        pass: identical,
        detail: format!(
            "{} artifacts, {bytes} bytes, identical={identical} [{:.2}s]",
            first.len(),
            t.elapsed().as_secs_f64()
        ),
    }
}

type Criterion = (&'static str, fn() -> Line);

fn main() {
    let criteria: [Criterion; 10] = [
        ("partition oracle", c1_partition),
        ("block-count identity", c2_block_counts),
        ("block-sum identity", c3_block_sums),
        ("boundedness witness", c4_boundedness),
        ("mean condition", c5_mean_condition),
        ("finite-section Riesz witness", c6_riesz_witness),
        ("reconstruction", c7_reconstruction),
        ("transform exactness", c8_transforms),
        ("duality consistency", c9_duality),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let line = f();
        failed += usize::from(!line.pass);
        println!("criterion {:>2} {:<30} {}  {}", i + 1, name, if line.pass { "PASS" } else { "FAIL" }, line.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
