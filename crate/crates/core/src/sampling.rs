//! Band-limited test signals and their reconstruction from samples.
//!
//! Signals are finite combinations `f(t) = Σ a_j K(t − c_j)` of the
//! reproducing kernel `K = 1̂_S`, so they lie in `PW_S` by construction and
//! evaluate in closed form. Reconstruction from `f|_Λ` solves `G a = f|_Λ`
//! for the Gram matrix of the nodes; the interpolant
//! `f̃ = Σ a_j K(· − λ_j)` is the orthogonal projection of `f` onto the span
//! of the node kernels.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, norm, pairwise_sum, pairwise_sum_c, qr_solve};
use crate::quasicrystal::{primal_window, NodeSet};
use crate::riesz::{ft_indicator, gram, GramMatrix};
use crate::spectra::Spectrum;

#[derive(Clone, Debug)]
pub struct BandlimitedSignal {
    spectrum: Spectrum,
    /// `(c_j, a_j)`
    terms: Vec<(f64, Complex64)>,
}

impl BandlimitedSignal {
    pub fn new(spectrum: Spectrum, terms: Vec<(f64, Complex64)>) -> BandlimitedSignal {
        BandlimitedSignal { spectrum, terms }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let parts: Vec<Complex64> = self.terms.iter().map(|&(c, a)| a * ft_indicator(&self.spectrum, t - c)).collect();
        pairwise_sum_c(&parts)
    }

    /// `‖f‖²` from the coefficients: `Σ_jk conj(a_k) a_j K(c_k − c_j)`.
    pub fn norm_sqr(&self) -> f64 {
        let rows: Vec<Complex64> = self
            .terms
            .par_iter()
            .map(|&(ck, ak)| {
                let parts: Vec<Complex64> =
                    self.terms.iter().map(|&(cj, aj)| ak.conj() * aj * ft_indicator(&self.spectrum, ck - cj)).collect();
                pairwise_sum_c(&parts)
            })
            .collect();
        pairwise_sum_c(&rows).re
    }

    pub fn add(&self, other: &BandlimitedSignal) -> BandlimitedSignal {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        BandlimitedSignal { spectrum: self.spectrum.clone(), terms }
    }
}

/// `count` kernels with centres uniform in `[−half_width, half_width]` and
/// standard complex Gaussian coefficients (`E|a|² = 1`).
pub fn synthesize_random(spectrum: &Spectrum, count: usize, half_width: f64, seed: u64) -> Result<BandlimitedSignal> {
    if count == 0 {
        return Err(Error::InvalidInput("a signal needs at least one kernel".into()));
    }
    if !(half_width.is_finite() && half_width >= 0.0) {
        return Err(Error::InvalidInput(format!("window half-width {half_width} is invalid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    let terms = (0..count)
        .map(|_| {
            let c = if half_width == 0.0 { 0.0 } else { rng.gen_range(-half_width..=half_width) };
            let a = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            (c, a)
        })
        .collect();
    Ok(BandlimitedSignal { spectrum: spectrum.clone(), terms })
}

/// `f(λ_j)` for every node.
pub fn sample(f: &BandlimitedSignal, nodes: &NodeSet) -> Vec<Complex64> {
    nodes.nodes().par_iter().map(|n| f.eval(n.approx)).collect()
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    spectrum: Spectrum,
    nodes: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    /// `‖samples − G a‖ / ‖samples‖`.
    pub cg_residual: f64,
    pub iterations: usize,
    pub ritz_bounds: Option<(f64, f64)>,
}

impl Reconstruction {
    pub fn eval(&self, t: f64) -> Complex64 {
        let parts: Vec<Complex64> =
            self.nodes.iter().zip(&self.coefficients).map(|(&l, &a)| a * ft_indicator(&self.spectrum, t - l)).collect();
        pairwise_sum_c(&parts)
    }

    pub fn as_signal(&self) -> BandlimitedSignal {
        BandlimitedSignal {
            spectrum: self.spectrum.clone(),
            terms: self.nodes.iter().cloned().zip(self.coefficients.iter().cloned()).collect(),
        }
    }
}

/// CG solve of `G a = samples`, stopped at relative residual `tol`.
pub fn reconstruct(samples: &[Complex64], nodes: &NodeSet, spectrum: &Spectrum, tol: f64) -> Result<Reconstruction> {
    let g = gram(nodes, spectrum)?;
    reconstruct_with(&g, samples, spectrum, tol)
}

pub fn reconstruct_with(
    g: &GramMatrix,
    samples: &[Complex64],
    spectrum: &Spectrum,
    tol: f64,
) -> Result<Reconstruction> {
    if samples.len() != g.dim() {
        return Err(Error::InvalidInput(format!("{} samples for {} nodes", samples.len(), g.dim())));
    }
    let out = conjugate_gradient(g.matrix(), samples, tol, 20 * g.dim().max(10))?;
    Ok(Reconstruction {
        spectrum: spectrum.clone(),
        nodes: g.nodes().to_vec(),
        coefficients: out.x,
        cg_residual: out.relative_residual,
        iterations: out.iterations,
        ritz_bounds: out.ritz_bounds,
    })
}

/// Dense least-squares solve of the same system, as an oracle.
pub fn reconstruct_qr(g: &GramMatrix, samples: &[Complex64], spectrum: &Spectrum) -> Result<Reconstruction> {
    let x = qr_solve(g.matrix(), samples).ok_or_else(|| Error::InvalidInput("Gram matrix is singular".into()))?;
    let ax = crate::linalg::HermitianOp::apply(g.matrix(), &x);
    let res: Vec<Complex64> = samples.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let b = norm(samples);
    Ok(Reconstruction {
        spectrum: spectrum.clone(),
        nodes: g.nodes().to_vec(),
        coefficients: x,
        cg_residual: if b == 0.0 { 0.0 } else { norm(&res) / b },
        iterations: 0,
        ritz_bounds: None,
    })
}

/// Uniform grid over `[lo, hi]` with spacing at most `step`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::InvalidInput(format!("grid [{lo}, {hi}] with step {step}")));
    }
    let cells = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / cells as f64;
    Ok((0..=cells).map(|i| if i == cells { hi } else { lo + i as f64 * h }).collect())
}

/// Trapezoid-weighted `‖f‖²` of grid values.
fn trapezoid_norm_sqr(values: &[Complex64], h: f64) -> f64 {
    let n = values.len();
    let terms: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v.norm_sqr() } else { v.norm_sqr() })
        .collect();
    h * pairwise_sum(&terms)
}

/// Relative `L²` error `‖f − g‖ / ‖f‖` on `[lo, hi]` by the trapezoid
/// rule; `‖g‖` when `f` vanishes on the grid.
pub fn interior_error(
    f: &(dyn Fn(f64) -> Complex64 + Sync),
    g: &(dyn Fn(f64) -> Complex64 + Sync),
    interval: (f64, f64),
    step: f64,
) -> Result<f64> {
    let ts = grid(interval.0, interval.1, step)?;
    let h = ts[1] - ts[0];
    let pairs: Vec<(Complex64, Complex64)> = ts.par_iter().map(|&t| (f(t), g(t))).collect();
    let fv: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let dv: Vec<Complex64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let nf = trapezoid_norm_sqr(&fv, h);
    let nd = trapezoid_norm_sqr(&dv, h);
    if nf == 0.0 {
        let gv: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
        return Ok(trapezoid_norm_sqr(&gv, h).sqrt());
    }
    Ok((nd / nf).sqrt())
}

/// `‖f‖²` by the trapezoid rule over `[−half_width, half_width]`.
pub fn grid_norm_sqr(f: &BandlimitedSignal, half_width: f64, step: f64) -> Result<f64> {
    let ts = grid(-half_width, half_width, step)?;
    let h = ts[1] - ts[0];
    let values: Vec<Complex64> = ts.par_iter().map(|&t| f.eval(t)).collect();
    Ok(trapezoid_norm_sqr(&values, h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub kernels: usize,
    pub seed: u64,
    /// Centres drawn from `[−signal_radius, signal_radius]`.
    pub signal_radius: f64,
    pub sample_radius: f64,
    pub eval_radius: f64,
    pub tol: f64,
    pub grid_step: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            kernels: 40,
            seed: 7,
            signal_radius: 20.0,
            sample_radius: 30.0,
            eval_radius: 10.0,
            tol: 1e-10,
            grid_step: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub nodes: usize,
    pub cg_iterations: usize,
    pub cg_residual: f64,
    /// `‖sample(f̃) − samples‖ / ‖samples‖` from a fresh evaluation.
    pub interpolation_residual: f64,
    pub interior_rel_error: f64,
    pub oracle_interior_rel_error: f64,
    /// `|e_cg − e_qr| / e_qr`.
    pub oracle_agreement: f64,
    pub ritz_bounds: Option<(f64, f64)>,
}

pub struct ReconstructionRun {
    pub signal: BandlimitedSignal,
    pub nodes: NodeSet,
    pub cg: Reconstruction,
    pub qr: Reconstruction,
    pub report: ReconstructionReport,
}

/// Synthesises, samples on `Λ(Γ, [0, mes S)) ∩ [−R, R]`, reconstructs by CG
/// and by the dense oracle, and compares both on the interior interval.
pub fn reconstruction_experiment(spectrum: &Spectrum, config: &ReconstructionConfig) -> Result<ReconstructionRun> {
    let signal = synthesize_random(spectrum, config.kernels, config.signal_radius, config.seed)?;
    let nodes = primal_window(spectrum, config.sample_radius)?;
    let samples = sample(&signal, &nodes);
    let g = gram(&nodes, spectrum)?;
    let cg = reconstruct_with(&g, &samples, spectrum, config.tol)?;
    let qr = reconstruct_qr(&g, &samples, spectrum)?;
    let back = sample(&cg.as_signal(), &nodes);
    let diff: Vec<Complex64> = back.iter().zip(&samples).map(|(a, b)| a - b).collect();
    let s_norm = norm(&samples);
    let interpolation_residual = if s_norm == 0.0 { norm(&back) } else { norm(&diff) / s_norm };
    let interval = (-config.eval_radius, config.eval_radius);
    let f = |t: f64| signal.eval(t);
    let e_cg = interior_error(&f, &|t| cg.eval(t), interval, config.grid_step)?;
    let e_qr = interior_error(&f, &|t| qr.eval(t), interval, config.grid_step)?;
    let oracle_agreement = if e_qr == 0.0 { (e_cg - e_qr).abs() } else { (e_cg - e_qr).abs() / e_qr };
    let report = ReconstructionReport {
        nodes: nodes.len(),
        cg_iterations: cg.iterations,
        cg_residual: cg.cg_residual,
        interpolation_residual,
        interior_rel_error: e_cg,
        oracle_interior_rel_error: e_qr,
        oracle_agreement,
        ritz_bounds: cg.ritz_bounds,
    };
    Ok(ReconstructionRun { signal, nodes, cg, qr, report })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RedundancyProbe {
    pub full_error: f64,
    pub reduced_error: f64,
    /// The removed node's value.
    pub removed: f64,
}

/// Interior error with and without the node nearest the origin; the best
/// approximation from a smaller node set cannot be better.
pub fn redundancy_probe(spectrum: &Spectrum, config: &ReconstructionConfig) -> Result<RedundancyProbe> {
    let signal = synthesize_random(spectrum, config.kernels, config.signal_radius, config.seed)?;
    let nodes = primal_window(spectrum, config.sample_radius)?;
    let i = nodes
        .nodes()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.approx.abs().total_cmp(&b.1.approx.abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidInput("empty node set".into()))?;
    let removed = nodes.nodes()[i].approx;
    let reduced = nodes.without(i);
    let interval = (-config.eval_radius, config.eval_radius);
    let f = |t: f64| signal.eval(t);
    let mut errors = [0.0; 2];
    for (slot, set) in errors.iter_mut().zip([&nodes, &reduced]) {
        let g = gram(set, spectrum)?;
        let r = reconstruct_qr(&g, &sample(&signal, set), spectrum)?;
        *slot = interior_error(&f, &|t| r.eval(t), interval, config.grid_step)?;
    }
    Ok(RedundancyProbe { full_error: errors[0], reduced_error: errors[1], removed })
}
