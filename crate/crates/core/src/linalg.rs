//! Small dense Hermitian toolkit: deterministic reductions, conjugate
//! gradients and a Lanczos extremal eigen-solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

const PAIRWISE_LEAF: usize = 32;

/// Pairwise (cascade) summation; fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum_c(a) + pairwise_sum_c(b)
}

/// `Σ conj(a_i) b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let terms: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x.conj() * y).collect();
    pairwise_sum_c(&terms)
}

pub fn norm(a: &[Complex64]) -> f64 {
    let terms: Vec<f64> = a.iter().map(|x| x.norm_sqr()).collect();
    pairwise_sum(&terms).sqrt()
}

/// A Hermitian linear operator.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

impl HermitianOp for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    /// Row `i` is the conjugate of column `i`, which is contiguous.
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.ncols())
            .into_par_iter()
            .map(|i| {
                let col = self.column(i);
                let row: Vec<Complex64> = col.iter().zip(x).map(|(g, xj)| g.conj() * xj).collect();
                pairwise_sum_c(&row)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<Complex64>,
    /// `‖b − Ax‖ / ‖b‖` recomputed from the final iterate.
    pub relative_residual: f64,
    pub iterations: usize,
    /// Extremal Ritz values of the Lanczos tridiagonal implied by CG.
    pub ritz_bounds: Option<(f64, f64)>,
}

/// Conjugate gradients for Hermitian positive definite `A`.
///
/// Stops when the recursive residual drops below `tol·‖b‖`; returns
/// [`Error::Stagnation`] when `max_iter` is reached or the search
/// direction loses positivity first.
pub fn conjugate_gradient(op: &dyn HermitianOp, b: &[Complex64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = op.dim();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![Complex64::new(0.0, 0.0); n],
            relative_residual: 0.0,
            iterations: 0,
            ritz_bounds: None,
        });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap).re;
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let step = rr / pap;
        for i in 0..n {
            x[i] += p[i] * step;
            r[i] -= ap[i] * step;
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        steps.push((step, beta));
        rr = rr_new;
        iterations += 1;
        if rr.sqrt() <= tol * b_norm {
            converged = true;
            break;
        }
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
    }
    let ax = op.apply(&x);
    let res: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let relative_residual = norm(&res) / b_norm;
    let ritz_bounds = cg_ritz_bounds(&steps);
    if !converged {
        let condition = ritz_bounds.map_or(f64::INFINITY, |(lo, hi)| hi / lo);
        return Err(Error::Stagnation { residual: relative_residual, condition });
    }
    Ok(CgOutcome { x, relative_residual, iterations, ritz_bounds })
}

/// Extremal eigenvalues of the tridiagonal matrix whose entries follow from
/// the CG step lengths.
fn cg_ritz_bounds(steps: &[(f64, f64)]) -> Option<(f64, f64)> {
    let k = steps.len();
    if k == 0 {
        return None;
    }
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let (a, _) = steps[i];
        let mut d = 1.0 / a;
        if i > 0 {
            let (a_prev, b_prev) = steps[i - 1];
            d += b_prev / a_prev;
            let off = b_prev.sqrt() / a_prev;
            t[(i, i - 1)] = off;
            t[(i - 1, i)] = off;
        }
        t[(i, i)] = d;
    }
    let ev = SymmetricEigen::new(t).eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

/// An eigenpair with its residual `‖Ax − λx‖`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

fn residual(op: &dyn HermitianOp, value: f64, v: &[Complex64]) -> f64 {
    let av = op.apply(v);
    let diff: Vec<Complex64> = av.iter().zip(v).map(|(a, x)| a - x * value).collect();
    norm(&diff)
}

/// Smallest and largest eigenpairs by a dense Hermitian solve.
pub fn dense_extremal(m: &DMatrix<Complex64>) -> (EigenPair, EigenPair) {
    let eig = SymmetricEigen::new(m.clone());
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < eig.eigenvalues[imin] {
            imin = i;
        }
        if v > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let pick = |i: usize| {
        let vector: Vec<Complex64> = eig.eigenvectors.column(i).iter().cloned().collect();
        let value = eig.eigenvalues[i];
        let pair = EigenPair { residual: residual(m, value, &vector), value, vector };
        refine(m, pair, scale)
    };
    (pick(imin), pick(imax))
}

/// Shifted inverse iteration on a computed eigenpair whose residual is above
/// roundoff level; keeps the better of the two.
fn refine(m: &DMatrix<Complex64>, pair: EigenPair, scale: f64) -> EigenPair {
    let n = m.nrows();
    let floor = 16.0 * f64::EPSILON * scale * (n as f64).sqrt();
    if pair.residual <= floor {
        return pair;
    }
    let mut best = pair;
    let mut shifted = m.clone();
    // a nudge keeps the factorisation regular when the shift is exact
    let sigma = best.value - floor;
    for i in 0..n {
        shifted[(i, i)] -= Complex64::new(sigma, 0.0);
    }
    let lu = shifted.lu();
    let mut x = DVector::from_column_slice(&best.vector);
    for _ in 0..3 {
        let Some(y) = lu.solve(&x) else { break };
        let ny = y.norm();
        if !ny.is_finite() || ny == 0.0 {
            break;
        }
        x = y / Complex64::new(ny, 0.0);
        let v: Vec<Complex64> = x.iter().cloned().collect();
        let mv = m.apply(&v);
        let value = dot(&v, &mv).re;
        let r = residual(m, value, &v);
        if r < best.residual {
            best = EigenPair { value, vector: v, residual: r };
        }
        if best.residual <= floor {
            break;
        }
    }
    best
}

/// Lanczos with full reorthogonalisation for the extremal eigenpairs of a
/// Hermitian operator. Converged when both Ritz residuals fall below
/// `tol · |θ_max|`.
pub fn lanczos_extremal(op: &dyn HermitianOp, tol: f64, max_iter: usize, seed: u64) -> Result<(EigenPair, EigenPair)> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    let qn = norm(&q);
    q.iter_mut().for_each(|x| *x /= qn);
    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let limit = max_iter.min(n);
    let mut last_residual = f64::INFINITY;
    let mut norm_est = 0.0f64;
    let mut next_check = 10;
    for k in 0..limit {
        let mut w = op.apply(&basis[k]);
        let a = dot(&basis[k], &w).re;
        alphas.push(a);
        // two passes of Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= bi * c;
                }
            }
        }
        let beta = norm(&w);
        let m = alphas.len();
        norm_est = norm_est.max(a.abs() + beta);
        let invariant = beta <= f64::EPSILON * norm_est;
        // the tridiagonal solve is cubic in m; check convergence sparsely
        if m < next_check && m != limit && !invariant {
            betas.push(beta);
            basis.push(w.into_iter().map(|x| x / beta).collect());
            continue;
        }
        next_check = (m + 10).max(m * 5 / 4);
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (mut imin, mut imax) = (0, 0);
        for (i, &v) in eig.eigenvalues.iter().enumerate() {
            if v < eig.eigenvalues[imin] {
                imin = i;
            }
            if v > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        // Ritz residual = β_k · |last component of the Ritz vector|
        let scale = eig.eigenvalues[imax].abs().max(eig.eigenvalues[imin].abs()).max(f64::MIN_POSITIVE);
        let r_min = beta * eig.eigenvectors[(m - 1, imin)].abs();
        let r_max = beta * eig.eigenvectors[(m - 1, imax)].abs();
        last_residual = r_min.max(r_max);
        let done = last_residual <= tol * scale || invariant || m == n;
        if done {
            let ritz = |i: usize| {
                let y = eig.eigenvectors.column(i);
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                for (j, b) in basis.iter().enumerate() {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += bi * y[j];
                    }
                }
                let value = eig.eigenvalues[i];
                EigenPair { residual: residual(op, value, &v), value, vector: v }
            };
            return Ok((ritz(imin), ritz(imax)));
        }
        betas.push(beta);
        basis.push(w.into_iter().map(|x| x / beta).collect());
    }
    Err(Error::NoConvergence { iterations: limit, residual: last_residual })
}

/// Householder QR least-squares solve, used as an independent check of CG.
pub fn qr_solve(m: &DMatrix<Complex64>, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let rhs = DVector::from_column_slice(b);
    let qr = m.clone().qr();
    qr.solve(&rhs).map(|x| x.iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hpd(n: usize, seed: u64, shift: f64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        let mut h = a.adjoint() * &a;
        for i in 0..n {
            h[(i, i)] += shift;
        }
        h
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn cg_solves_hpd_system() {
        let h = random_hpd(40, 1, 5.0);
        let b: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let out = conjugate_gradient(&h, &b, 1e-12, 500).unwrap();
        assert!(out.relative_residual < 1e-10);
        let direct = qr_solve(&h, &b).unwrap();
        let diff: Vec<Complex64> = out.x.iter().zip(&direct).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) / norm(&direct) < 1e-9);
        let (lo, hi) = out.ritz_bounds.unwrap();
        let (emin, emax) = dense_extremal(&h);
        assert!((hi - emax.value).abs() / emax.value < 1e-6);
        assert!(lo >= emin.value * (1.0 - 1e-6));
    }

    #[test]
    fn cg_zero_rhs() {
        let h = random_hpd(5, 2, 1.0);
        let out = conjugate_gradient(&h, &[Complex64::new(0.0, 0.0); 5], 1e-12, 10).unwrap();
        assert!(out.x.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn cg_reports_stagnation() {
        let h = random_hpd(60, 3, 1e-9);
        let b = vec![Complex64::new(1.0, 0.0); 60];
        assert!(matches!(conjugate_gradient(&h, &b, 1e-14, 3), Err(Error::Stagnation { .. })));
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = random_hpd(120, 4, 0.5);
        let (dmin, dmax) = dense_extremal(&h);
        let (lmin, lmax) = lanczos_extremal(&h, 1e-10, 120, 7).unwrap();
        assert!((lmax.value - dmax.value).abs() <= 1e-8 * dmax.value);
        assert!((lmin.value - dmin.value).abs() <= 1e-8 * dmax.value);
        assert!(lmin.residual <= 1e-7 * dmax.value);
        assert!(dmin.residual <= 1e-10 * dmax.value);
    }
}
