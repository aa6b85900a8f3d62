//! Gram matrices of exponential systems over a multiband spectrum and their
//! finite-section spectral bounds.
//!
//! With `f̂(x) = ∫ f(t) e^{2πixt} dt`, the inner product of `e^{2πiλx}` and
//! `e^{2πiμx}` in `L²(S)` is `1̂_S(λ − μ)`. Nested windows
//! `Λ ∩ [−R, R]` give principal submatrices, so `λ_min` can only fall and
//! `λ_max` can only rise as `R` grows; a Riesz sequence keeps both inside
//! its frame bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_extremal, lanczos_extremal, pairwise_sum_c};
use crate::qnum::QNum;
use crate::quasicrystal::{primal_window, NodeSet};
use crate::spectra::Spectrum;

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;

/// `1̂_S(t) = Σ |I|·sinc(π t |I|)·e^{2πi t·mid(I)}` over the bands.
pub fn ft_indicator(spectrum: &Spectrum, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(spectrum.measure_f64(), 0.0);
    }
    let terms: Vec<Complex64> = spectrum
        .float_bands()
        .iter()
        .map(|&(mid, len)| {
            let x = std::f64::consts::PI * t * len;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            // fractional turn of t·mid with a single rounding
            let turns = t.mul_add(mid, -(t * mid).round());
            let (s, c) = (std::f64::consts::TAU * turns).sin_cos();
            Complex64::new(c, s) * (len * sinc)
        })
        .collect();
    pairwise_sum_c(&terms)
}

/// `G_jk = 1̂_S(λ_j − λ_k)` for the nodes in their stored order.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    matrix: DMatrix<Complex64>,
    nodes: Vec<f64>,
    measure: f64,
}

impl GramMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Largest `|G_jk − conj(G_kj)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.matrix[(j, k)] - self.matrix[(k, j)].conj()).norm());
            }
        }
        worst
    }
}

/// Gram matrix of `E(Λ)` in `L²(S)`. Exactly coinciding nodes are an error.
pub fn gram(nodes: &NodeSet, spectrum: &Spectrum) -> Result<GramMatrix> {
    assemble(nodes, spectrum, false)
}

/// As [`gram`], but keeps repeated nodes (the matrix is then singular).
pub fn gram_allow_duplicates(nodes: &NodeSet, spectrum: &Spectrum) -> Result<GramMatrix> {
    assemble(nodes, spectrum, true)
}

fn assemble(nodes: &NodeSet, spectrum: &Spectrum, allow_duplicates: bool) -> Result<GramMatrix> {
    let alpha = nodes.alpha();
    let values: Vec<&QNum> = nodes.nodes().iter().map(|n| &n.value).collect();
    let n = values.len();
    let rows: Vec<Result<Vec<Complex64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::with_capacity(n - j);
            for k in j..n {
                if k == j {
                    row.push(Complex64::new(spectrum.measure_f64(), 0.0));
                    continue;
                }
                let diff = values[j] - values[k];
                if diff.is_zero() && !allow_duplicates {
                    return Err(Error::DuplicateNode(format!("node {} appears twice", values[j])));
                }
                row.push(ft_indicator(spectrum, alpha.to_f64(&diff)));
            }
            Ok(row)
        })
        .collect();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for (j, row) in rows.into_iter().enumerate() {
        for (off, z) in row?.into_iter().enumerate() {
            let k = j + off;
            matrix[(j, k)] = z;
            matrix[(k, j)] = z.conj();
        }
    }
    Ok(GramMatrix { matrix, nodes: nodes.approx_values(), measure: spectrum.measure_f64() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max / λ_min`, absent when `λ_min ≤ 0`.
    pub cond: Option<f64>,
    /// Larger of the two eigenpair residuals `‖Gx − λx‖`.
    pub residual: f64,
    pub residual_tolerance: f64,
    pub solver: Solver,
}

/// Extremal eigenvalues of `G`, dense up to [`DENSE_LIMIT`] and Lanczos
/// beyond. Residuals above `tol·‖G‖` are an error.
pub fn spectral_bounds(g: &GramMatrix, tol: f64) -> Result<SpectralBounds> {
    let dim = g.dim();
    if dim == 0 {
        return Err(Error::InvalidInput("empty Gram matrix".into()));
    }
    let (solver, (lo, hi)) = if dim <= DENSE_LIMIT {
        (Solver::Dense, dense_extremal(g.matrix()))
    } else {
        (Solver::Lanczos, lanczos_extremal(g.matrix(), tol, dim.min(2000), 0x5eed)?)
    };
    let scale = hi.value.abs().max(f64::MIN_POSITIVE);
    let residual = lo.residual.max(hi.residual);
    if residual > tol * scale {
        return Err(Error::NoConvergence { iterations: 0, residual: residual / scale });
    }
    let cond = (lo.value > 0.0).then(|| hi.value / lo.value);
    Ok(SpectralBounds {
        dim,
        lambda_min: lo.value,
        lambda_max: hi.value,
        cond,
        residual,
        residual_tolerance: tol,
        solver,
    })
}

/// Modification applied to every window of a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    #[default]
    None,
    /// Adds `λ₀ + 1/10000` next to the node `λ₀ = 0`.
    AddNear,
    /// Removes the node `λ₀ = 0`.
    Remove,
}

impl Perturbation {
    pub fn offset() -> BigRational {
        BigRational::new(1.into(), 10_000.into())
    }

    fn apply(self, nodes: NodeSet) -> Result<NodeSet> {
        match self {
            Perturbation::None => Ok(nodes),
            Perturbation::AddNear => nodes.with_added(QNum::rational(Perturbation::offset())),
            Perturbation::Remove => {
                let i = nodes
                    .nodes()
                    .iter()
                    .position(|n| n.value.is_zero())
                    .ok_or_else(|| Error::InvalidInput("node set does not contain 0".into()))?;
                Ok(nodes.without(i))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub radius: f64,
    pub bounds: SpectralBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub perturbation: Perturbation,
    pub rows: Vec<SweepRow>,
    /// `λ_min` non-increasing and `λ_max` non-decreasing along the radii,
    /// up to the eigenpair residuals.
    pub interlacing: bool,
    /// Largest ratio of condition numbers across the radii.
    pub cond_drift: Option<f64>,
}

/// Bounds of `E(Λ(Γ, [0, mes S)) ∩ [−R, R])` in `L²(S)` for each radius.
pub fn window_sweep(spectrum: &Spectrum, radii: &[f64], perturbation: Perturbation, tol: f64) -> Result<Sweep> {
    sweep_with(radii, perturbation, tol, spectrum, |r| primal_window(spectrum, r))
}

/// Sweep over windows produced by `window`, against the space `L²(space)`.
pub fn sweep_with(
    radii: &[f64],
    perturbation: Perturbation,
    tol: f64,
    space: &Spectrum,
    window: impl Fn(f64) -> Result<NodeSet>,
) -> Result<Sweep> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("radii must be non-empty and strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let nodes = perturbation.apply(window(r)?)?;
        let g = gram(&nodes, space)?;
        rows.push(SweepRow { radius: r, bounds: spectral_bounds(&g, tol)? });
    }
    let interlacing = rows.windows(2).all(|w| {
        let (a, b) = (&w[0].bounds, &w[1].bounds);
        let slack = a.residual + b.residual + 64.0 * f64::EPSILON * b.lambda_max;
        b.lambda_min <= a.lambda_min + slack && b.lambda_max >= a.lambda_max - slack
    });
    let conds: Option<Vec<f64>> = rows.iter().map(|r| r.bounds.cond).collect();
    let cond_drift = conds.map(|c| {
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi / lo
    });
    Ok(Sweep { perturbation, rows, interlacing, cond_drift })
}

#[cfg(test)]
#[path = "../tests/support/quadrature.rs"]
mod quadrature;
