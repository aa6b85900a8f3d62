use anyhow::{Context, Result};
use quasiriesz::avdonin::{
    avdonin_report, block_count_mismatch, block_sum_identities, deltas, log_grid, s_sequence_boundedness,
    AvdoninConfig, AvdoninReport, BlockSumSummary, Boundedness,
};
use quasiriesz::duality::{duality_experiment, paired_csv, Consistency, DualityConfig, DualityReport};
use quasiriesz::quasicrystal::{partition_enumerate, Anchor};
use quasiriesz::riesz::{window_sweep, Perturbation, Sweep};
use quasiriesz::sampling::{grid, reconstruction_experiment, ReconstructionConfig, ReconstructionReport};
use quasiriesz::schema::{to_canonical_json, SpectrumFile};
use quasiriesz::{QNum, Spectrum};
use serde::Serialize;

use crate::config::{Command, Provenance, RunConfig};

/// Verdict thresholds.
pub const BLOCK_SUM_TOL: f64 = 1e-9;
pub const BOUND_GROWTH: f64 = 0.05;
pub const PLATEAU_DRIFT: f64 = 2.0;
pub const INTERIOR_ERROR: f64 = 1e-3;
pub const ORACLE_AGREEMENT: f64 = 0.01;
pub const DENSITY_TOL: f64 = 0.05;
/// Spacing of the reconstruction CSV grid.
const TRACE_STEP: f64 = 0.1;

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub struct Outcome {
    pub pass: bool,
    pub artifacts: Vec<Artifact>,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    pass: bool,
    result: T,
}

fn json_artifact<T: Serialize>(name: &str, provenance: &Provenance, pass: bool, result: T) -> Result<Artifact> {
    let mut contents = serde_json::to_string_pretty(&Document { provenance, pass, result })?;
    contents.push('\n');
    Ok(Artifact { name: name.to_string(), contents })
}

fn csv_artifact(name: &str, provenance: &Provenance, header: &[&str], rows: Vec<Vec<String>>) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let body = String::from_utf8(w.into_inner().context("csv buffer")?)?;
    let mut contents = String::new();
    for line in provenance.csv_header()? {
        contents.push_str("# ");
        contents.push_str(&line);
        contents.push('\n');
    }
    contents.push_str(&body);
    Ok(Artifact { name: name.to_string(), contents })
}

fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub fn run(config: &RunConfig, spectrum: &Spectrum) -> Result<Outcome> {
    let provenance = Provenance::new(config)?;
    let canonical = SpectrumFile::canonical(spectrum, Some(&config.spectrum.combo()?));
    let mut artifacts = vec![Artifact { name: "spectrum.json".into(), contents: to_canonical_json(&canonical)? }];
    let pass = match config.command {
        Command::Construct => construct(config, spectrum, &provenance, &mut artifacts)?,
        Command::Verify => verify(config, spectrum, &provenance, &mut artifacts)?,
        Command::Certify => certify(config, spectrum, &provenance, &mut artifacts)?,
        Command::Reconstruct => reconstruct(config, spectrum, &provenance, &mut artifacts)?,
        Command::Duality => duality(config, spectrum, &provenance, &mut artifacts)?,
    };
    Ok(Outcome { pass, artifacts })
}

#[derive(Serialize)]
struct ConstructResult {
    n_range: (i64, i64),
    nodes: usize,
    first_index: i64,
    blocks: usize,
    /// `(n, #Λ_n, φ(nα))` of the first disagreeing block.
    block_count_mismatch: Option<(i64, u64, u64)>,
}

fn construct(config: &RunConfig, s: &Spectrum, p: &Provenance, out: &mut Vec<Artifact>) -> Result<bool> {
    let nodes = partition_enumerate(s, config.n_range, Anchor::Origin)?;
    let mismatch = block_count_mismatch(s, &nodes)?;
    let pass = mismatch.is_none();
    out.push(Artifact { name: "nodes.csv".into(), contents: nodes.to_csv(&p.csv_header()?)? });
    let result = ConstructResult {
        n_range: config.n_range,
        nodes: nodes.len(),
        first_index: nodes.first_index(),
        blocks: nodes.blocks().len(),
        block_count_mismatch: mismatch,
    };
    out.push(json_artifact("construct.json", p, pass, result)?);
    Ok(pass)
}

#[derive(Serialize)]
struct VerifyResult {
    block_count_mismatch: Option<(i64, u64, u64)>,
    block_sums: BlockSumSummary,
    boundedness: Boundedness,
    avdonin: AvdoninReport,
    verdicts: VerifyVerdicts,
}

#[derive(Serialize)]
struct VerifyVerdicts {
    block_counts: bool,
    block_sums: bool,
    boundedness: bool,
    avdonin: bool,
}

fn verify(config: &RunConfig, s: &Spectrum, p: &Provenance, out: &mut Vec<Artifact>) -> Result<bool> {
    let nodes = partition_enumerate(s, config.n_range, Anchor::Origin)?;
    let mismatch = block_count_mismatch(s, &nodes)?;
    let d = deltas(&nodes, s.measure(), config.precision)?;
    let block_sums = block_sum_identities(s, &nodes, &d, config.n_range)?;
    let boundedness = s_sequence_boundedness(s, config.bound_range, config.n_range)?;
    let avdonin = avdonin_report(
        s,
        &AvdoninConfig {
            a_range: config.a_range,
            n_grid: log_grid(config.n_max),
            required_margin: config.required_margin,
            precision: config.precision,
        },
    )?;
    let verdicts = VerifyVerdicts {
        block_counts: mismatch.is_none(),
        block_sums: block_sums.max_abs_err <= BLOCK_SUM_TOL,
        boundedness: boundedness.sup_dev.is_finite() && boundedness.growth < BOUND_GROWTH,
        avdonin: avdonin.pass(),
    };
    let pass = verdicts.block_counts && verdicts.block_sums && verdicts.boundedness && verdicts.avdonin;
    let rows = avdonin.mean.rows.iter().map(|r| vec![r.n.to_string(), sci(r.c), sci(r.sup_deviation)]).collect();
    out.push(csv_artifact("mean.csv", p, &["N", "c", "sup_deviation"], rows)?);
    let result = VerifyResult { block_count_mismatch: mismatch, block_sums, boundedness, avdonin, verdicts };
    out.push(json_artifact("verify.json", p, pass, result)?);
    Ok(pass)
}

#[derive(Serialize)]
struct CertifyResult {
    sweep: Sweep,
    plateau: bool,
}

fn sweep_rows(sweep: &Sweep) -> Vec<Vec<String>> {
    sweep
        .rows
        .iter()
        .map(|r| {
            let b = &r.bounds;
            vec![
                format!("{}", r.radius),
                b.dim.to_string(),
                sci(b.lambda_min),
                sci(b.lambda_max),
                b.cond.map(sci).unwrap_or_default(),
                sci(b.residual),
                serde_json::to_value(b.solver).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            ]
        })
        .collect()
}

fn certify(config: &RunConfig, s: &Spectrum, p: &Provenance, out: &mut Vec<Artifact>) -> Result<bool> {
    let sweep = window_sweep(s, &config.radii, config.perturb, config.tol)?;
    let plateau = sweep.cond_drift.is_some_and(|d| d < PLATEAU_DRIFT);
    // a perturbed family is reported, not judged on its plateau
    let pass = sweep.interlacing && (config.perturb != Perturbation::None || plateau);
    out.push(csv_artifact(
        "certify.csv",
        p,
        &["radius", "dim", "lambda_min", "lambda_max", "cond", "residual", "solver"],
        sweep_rows(&sweep),
    )?);
    out.push(json_artifact("certify.json", p, pass, CertifyResult { sweep, plateau })?);
    Ok(pass)
}

fn reconstruct(config: &RunConfig, s: &Spectrum, p: &Provenance, out: &mut Vec<Artifact>) -> Result<bool> {
    let rc = ReconstructionConfig {
        kernels: config.kernels,
        seed: config.seed,
        signal_radius: config.signal_radius,
        sample_radius: config.sample_radius,
        eval_radius: config.eval_radius,
        tol: config.tol,
        grid_step: config.grid_step,
    };
    let run = reconstruction_experiment(s, &rc)?;
    let report: ReconstructionReport = run.report.clone();
    let pass = report.interior_rel_error <= INTERIOR_ERROR && report.oracle_agreement <= ORACLE_AGREEMENT;
    let ts = grid(-config.eval_radius, config.eval_radius, TRACE_STEP)?;
    let rows = ts
        .iter()
        .map(|&t| {
            let (f, g) = (run.signal.eval(t), run.cg.eval(t));
            vec![format!("{t}"), sci(f.re), sci(f.im), sci(g.re), sci(g.im)]
        })
        .collect();
    out.push(csv_artifact("reconstruct.csv", p, &["t", "f_re", "f_im", "recon_re", "recon_im"], rows)?);
    out.push(json_artifact("reconstruct.json", p, pass, report)?);
    Ok(pass)
}

fn duality(config: &RunConfig, s: &Spectrum, p: &Provenance, out: &mut Vec<Artifact>) -> Result<bool> {
    let anchor = QNum::rational(quasiriesz::parse::rational(&config.anchor)?);
    let report: DualityReport = duality_experiment(
        s,
        &DualityConfig {
            radii: config.radii.clone(),
            tol: config.tol,
            anchor,
            plateau_drift: PLATEAU_DRIFT,
            ..Default::default()
        },
    )?;
    let pass = report.consistency == Consistency::Corroborated
        && report.primal_audit.consistent
        && report.dual_audit.consistent
        && report.primal_density.rel_error <= DENSITY_TOL
        && report.dual_density.rel_error <= DENSITY_TOL;
    let mut table = String::new();
    for line in p.csv_header()? {
        table.push_str("# ");
        table.push_str(&line);
        table.push('\n');
    }
    table.push_str(&paired_csv(&report)?);
    out.push(Artifact { name: "duality.csv".into(), contents: table });
    out.push(json_artifact("duality.json", p, pass, report)?);
    Ok(pass)
}
