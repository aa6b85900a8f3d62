//! Deviation sequences and the three sufficient conditions for a perturbed
//! exponential system: separation, bounded deviation `δ_j = λ_j − j/mes S`,
//! and the quarter-in-the-mean bound
//!
//! ```text
//! sup_a | (1/N) Σ_{j=a+1}^{a+N} δ_j − c | < 1 / (4 mes S).
//! ```
//!
//! Node sets come from the block enumeration of `Λ*(Γ, S)`; exact arithmetic
//! is used for `δ_j` whenever `1/mes S` lies in `ℚ + ℤα`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::qnum::QNum;
use crate::quasicrystal::{partition_enumerate, sort_nodes, Anchor, NodeSet};
use crate::spectra::Spectrum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// 64-bit floats from exact node values.
    #[default]
    Float,
    /// Exact `ℚ + ℤα` arithmetic where `1/mes S` is representable, floats
    /// otherwise.
    Exact,
}

/// `δ_j = λ_j − j/mes S` over a contiguous index window.
#[derive(Clone, Debug)]
pub struct DeltaSeq {
    first_index: i64,
    values: Vec<f64>,
    exact: Option<Vec<QNum>>,
    measure: QNum,
    measure_f64: f64,
}

impl DeltaSeq {
    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    /// One past the last index.
    pub fn end_index(&self) -> i64 {
        self.first_index + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[QNum]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn measure(&self) -> &QNum {
        &self.measure
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        let i = usize::try_from(j.checked_sub(self.first_index)?).ok()?;
        self.values.get(i).copied()
    }

    fn position(&self, j: i64) -> Option<usize> {
        let i = usize::try_from(j.checked_sub(self.first_index)?).ok()?;
        (i <= self.values.len()).then_some(i)
    }

    pub fn sup(&self) -> f64 {
        sup_abs(&self.values)
    }
}

fn sup_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `δ_j` for every node, in enumeration order.
pub fn deltas(nodes: &NodeSet, measure: &QNum, precision: Precision) -> Result<DeltaSeq> {
    let alpha = nodes.alpha();
    if alpha.sign(measure)?.is_le() {
        return Err(Error::InvalidInput(format!("measure {measure} is not positive")));
    }
    let inv = match precision {
        Precision::Exact => alpha.reciprocal(measure),
        Precision::Float => None,
    };
    let j0 = nodes.first_index();
    let (values, exact) = match inv {
        Some(inv) => {
            let exact: Vec<QNum> = nodes
                .nodes()
                .par_iter()
                .enumerate()
                .map(|(i, node)| &node.value - &inv.scale_int(&BigInt::from(j0 + i as i64)))
                .collect();
            let values = exact.par_iter().map(|d| alpha.to_f64(d)).collect();
            (values, Some(exact))
        }
        None => {
            let inv = 1.0 / alpha.to_f64(measure);
            let values =
                nodes.nodes().iter().enumerate().map(|(i, node)| node.approx - (j0 + i as i64) as f64 * inv).collect();
            (values, None)
        }
    };
    Ok(DeltaSeq { first_index: j0, values, exact, measure: measure.clone(), measure_f64: alpha.to_f64(measure) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    /// Minimum gap between consecutive sorted values.
    pub gap: f64,
    /// Some two nodes coincide exactly.
    pub duplicate: bool,
}

/// Minimum consecutive gap of the value-sorted nodes, decided exactly.
pub fn separation_gap(nodes: &NodeSet) -> Result<Separation> {
    if nodes.len() < 2 {
        return Err(Error::InvalidInput("separation needs at least two nodes".into()));
    }
    let alpha = nodes.alpha();
    let mut sorted = nodes.nodes().to_vec();
    sort_nodes(alpha, &mut sorted)?;
    let diffs: Vec<QNum> = sorted.par_windows(2).map(|w| &w[1].value - &w[0].value).collect();
    let duplicate = diffs.iter().any(QNum::is_zero);
    // float screen, then exact minimum among the candidates
    let approx: Vec<f64> = diffs.par_iter().map(|d| alpha.to_f64(d)).collect();
    let floor = approx.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut best: Option<&QNum> = None;
    for (d, a) in diffs.iter().zip(&approx) {
        if *a <= floor + 1e-9 * (1.0 + floor.abs()) {
            best = match best {
                Some(b) if !alpha.lt(d, b)? => Some(b),
                _ => Some(d),
            };
        }
    }
    let gap = best.map(|b| alpha.to_f64(b)).unwrap_or(floor);
    Ok(Separation { gap, duplicate })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Boundedness {
    pub n_range: (i64, i64),
    pub inner_range: (i64, i64),
    /// `sup |e_n − const|` over the full window, `e_n = s_n − n·mes S`.
    pub sup_dev: f64,
    /// Midrange of `e_n` over the full window.
    pub const_estimate: f64,
    pub inner_sup_dev: f64,
    pub inner_const_estimate: f64,
    /// `sup_dev / inner_sup_dev − 1`, zero when both vanish.
    pub growth: f64,
}

/// Boundedness witness for `s_n − n·mes S` over `n_range`, compared to the
/// sub-window `inner`.
pub fn s_sequence_boundedness(spectrum: &Spectrum, n_range: (i64, i64), inner: (i64, i64)) -> Result<Boundedness> {
    if inner.0 < n_range.0 || inner.1 > n_range.1 || inner.0 > inner.1 {
        return Err(Error::InsufficientWindow(format!(
            "inner window {}:{} is not inside {}:{}",
            inner.0, inner.1, n_range.0, n_range.1
        )));
    }
    let nodes = partition_enumerate(spectrum, n_range, Anchor::Origin)?;
    let e = s_deviations(spectrum, &nodes)?;
    let (c_full, d_full) = midrange(&e);
    let lo = (inner.0 - n_range.0) as usize;
    let hi = (inner.1 - n_range.0) as usize;
    let (c_in, d_in) = midrange(&e[lo..=hi]);
    let growth = if d_full == 0.0 { 0.0 } else { d_full / d_in - 1.0 };
    Ok(Boundedness {
        n_range,
        inner_range: inner,
        sup_dev: d_full,
        const_estimate: c_full,
        inner_sup_dev: d_in,
        inner_const_estimate: c_in,
        growth,
    })
}

/// Central half of a block range.
pub fn half_window(n_range: (i64, i64)) -> (i64, i64) {
    let w = (n_range.1 - n_range.0) / 4;
    (n_range.0 + w, n_range.1 - w)
}

/// `e_n = s_n − n·mes S` for every block, exact before rounding.
pub fn s_deviations(spectrum: &Spectrum, nodes: &NodeSet) -> Result<Vec<f64>> {
    let alpha = spectrum.alpha();
    let mes = spectrum.measure();
    Ok(nodes
        .blocks()
        .par_iter()
        .map(|b| alpha.to_f64(&(QNum::int(b.end) - mes.scale_int(&BigInt::from(b.n)))))
        .collect())
}

/// `(midrange, half range)`.
fn midrange(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let c = lo + (hi - lo) / 2.0;
    (c, (hi - c).max(c - lo))
}

/// First block whose size differs from `φ(nα)`, with both counts.
pub fn block_count_mismatch(spectrum: &Spectrum, nodes: &NodeSet) -> Result<Option<(i64, u64, u64)>> {
    let found: Result<Vec<Option<(i64, u64, u64)>>> = nodes
        .blocks()
        .par_iter()
        .map(|b| {
            let phi = spectrum.phi(&QNum::alpha_multiple(b.n))?;
            Ok((phi != b.len() as u64).then_some((b.n, b.len() as u64, phi)))
        })
        .collect();
    Ok(found?.into_iter().flatten().next())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSum {
    pub n: i64,
    /// `Σ δ_j` over the block.
    pub lhs: f64,
    /// `τ₁(nα) − S₂(n)`.
    pub rhs: f64,
    pub abs_err: f64,
    pub exact: bool,
}

/// Checks `Σ_{j=s_{n−1}}^{s_n − 1} δ_j = τ₁(nα) − S₂(n)` with
/// `τ₁(x) = Σ_k (x − k)·1_S(x − k)` by direct enumeration and
/// `S₂(n) = φ·((s_{n−1} + s_n − 1)/(2 mes S) − n)`.
pub fn block_sum_identity(spectrum: &Spectrum, nodes: &NodeSet, deltas: &DeltaSeq, n: i64) -> Result<BlockSum> {
    let alpha = spectrum.alpha();
    let block = nodes
        .block(n)
        .ok_or_else(|| Error::InsufficientWindow(format!("block {n} is outside the enumerated window")))?;
    let (lo, hi) = match (deltas.position(block.start), deltas.position(block.end)) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::InsufficientWindow(format!("block {n} is outside the deviation window"))),
    };
    let translates = spectrum.integer_translates(&QNum::alpha_multiple(n))?;
    let phi = BigInt::from(block.len());
    // φ·(s_{n−1} + s_n − 1) is even
    let pair = BigRational::new(phi.clone() * BigInt::from(block.start + block.end - 1), BigInt::from(2));
    if let (Some(exact), Some(inv)) = (deltas.exact(), alpha.reciprocal(deltas.measure())) {
        let lhs = exact[lo..hi].iter().fold(QNum::zero(), |acc, d| &acc + d);
        let tau = translates.iter().fold(QNum::zero(), |acc, (_, y)| &acc + y);
        let s2 = inv.scale_rational(&pair).ok_or_else(|| Error::NotRepresentable(format!("{pair} / mes S")))?
            - QNum::int(&phi * BigInt::from(n));
        let rhs = tau - s2;
        let err = &lhs - &rhs;
        return Ok(BlockSum {
            n,
            lhs: alpha.to_f64(&lhs),
            rhs: alpha.to_f64(&rhs),
            abs_err: alpha.to_f64(&err).abs(),
            exact: true,
        });
    }
    let lhs = pairwise_sum(&deltas.values()[lo..hi]);
    let tau = pairwise_sum(&translates.iter().map(|(_, y)| alpha.to_f64(y)).collect::<Vec<_>>());
    let phi_f = block.len() as f64;
    let mes = deltas.measure_f64;
    let s2 = pair.to_f64().unwrap_or(f64::NAN) / mes - phi_f * n as f64;
    let rhs = tau - s2;
    Ok(BlockSum { n, lhs, rhs, abs_err: (lhs - rhs).abs(), exact: false })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSumSummary {
    pub n_range: (i64, i64),
    pub blocks: usize,
    pub max_abs_err: f64,
    pub worst_block: i64,
    pub exact: bool,
}

pub fn block_sum_identities(
    spectrum: &Spectrum,
    nodes: &NodeSet,
    deltas: &DeltaSeq,
    n_range: (i64, i64),
) -> Result<BlockSumSummary> {
    let sums: Result<Vec<BlockSum>> =
        (n_range.0..=n_range.1).into_par_iter().map(|n| block_sum_identity(spectrum, nodes, deltas, n)).collect();
    let sums = sums?;
    let mut worst = (0.0f64, n_range.0);
    for s in &sums {
        if s.abs_err > worst.0 {
            worst = (s.abs_err, s.n);
        }
    }
    Ok(BlockSumSummary {
        n_range,
        blocks: sums.len(),
        max_abs_err: worst.0,
        worst_block: worst.1,
        exact: sums.iter().all(|s| s.exact),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub n: usize,
    /// Grand mean of the length-`n` window averages.
    pub c: f64,
    pub sup_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanCondition {
    pub a_range: (i64, i64),
    pub rows: Vec<MeanRow>,
    /// `1 / (4 mes S)`.
    pub threshold: f64,
    pub required_margin: f64,
    /// Smallest grid `N` meeting the margin, else the best `N`.
    pub n_used: usize,
    pub c_estimate: f64,
    pub sup_block_deviation: f64,
    /// `1 − sup_block_deviation / threshold`.
    pub margin: f64,
    pub pass: bool,
    /// Sup deviation non-increasing along the grid up to 10% noise.
    pub trend_non_increasing: bool,
}

/// Neumaier-compensated prefix sums of `xs − shift`, with `P[0] = 0`.
fn prefix_sums(xs: &[f64], shift: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    out.push(0.0);
    for &x in xs {
        let y = x - shift;
        let t = s + y;
        if s.abs() >= y.abs() {
            comp += (s - t) + y;
        } else {
            comp += (y - t) + s;
        }
        s = t;
        out.push(s + comp);
    }
    out
}

/// Window averages of `δ_{a+1} … δ_{a+N}` for every `a` in `a_range` and `N`
/// in the grid; `c` is the grand mean per `N`.
pub fn avdonin_mean_condition(
    deltas: &DeltaSeq,
    n_grid: &[usize],
    a_range: (i64, i64),
    required_margin: f64,
) -> Result<MeanCondition> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::InvalidInput("empty N grid".into()))?;
    if n_grid.contains(&0) {
        return Err(Error::InvalidInput("window length N must be positive".into()));
    }
    if a_range.0 > a_range.1 {
        return Err(Error::InvalidInput(format!("empty shift range {}:{}", a_range.0, a_range.1)));
    }
    let need = (a_range.0 + 1, a_range.1 + n_max as i64);
    if need.0 < deltas.first_index() || need.1 >= deltas.end_index() {
        return Err(Error::InsufficientWindow(format!(
            "indices {}:{} needed, {}:{} available",
            need.0,
            need.1,
            deltas.first_index(),
            deltas.end_index() - 1
        )));
    }
    let base = (need.0 - deltas.first_index()) as usize;
    let span = &deltas.values()[base..=(need.1 - deltas.first_index()) as usize];
    let shift = pairwise_sum(span) / span.len() as f64;
    let prefix = prefix_sums(span, shift);
    let count = (a_range.1 - a_range.0 + 1) as usize;
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    for &n in &grid {
        // window starting at position i covers prefix[i + n] − prefix[i]
        let averages: Vec<f64> = (0..count).into_par_iter().map(|i| (prefix[i + n] - prefix[i]) / n as f64).collect();
        let c_rel = pairwise_sum(&averages) / count as f64;
        let sup = averages.par_iter().map(|a| (a - c_rel).abs()).reduce(|| 0.0, f64::max);
        rows.push(MeanRow { n, c: c_rel + shift, sup_deviation: sup });
    }
    let threshold = 1.0 / (4.0 * deltas.measure_f64);
    let limit = threshold * (1.0 - required_margin);
    let chosen = rows
        .iter()
        .find(|r| r.sup_deviation < limit)
        .or_else(|| rows.iter().min_by(|a, b| a.sup_deviation.total_cmp(&b.sup_deviation)))
        .expect("grid is non-empty");
    let margin = 1.0 - chosen.sup_deviation / threshold;
    let trend_non_increasing = rows.windows(2).all(|w| w[1].sup_deviation <= 1.1 * w[0].sup_deviation);
    Ok(MeanCondition {
        a_range,
        threshold,
        required_margin,
        n_used: chosen.n,
        c_estimate: chosen.c,
        sup_block_deviation: chosen.sup_deviation,
        margin,
        pass: chosen.sup_deviation < threshold && margin >= required_margin,
        trend_non_increasing,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationBound {
    pub sup: f64,
    /// Sup over the central half of the index window.
    pub inner_sup: f64,
    pub pass: bool,
}

/// Empirical test of `sup |δ_j| < ∞`: the sup over the full window may
/// exceed the central half-window sup by at most 5%.
pub fn bounded_deviation(deltas: &DeltaSeq) -> DeviationBound {
    let v = deltas.values();
    let q = v.len() / 4;
    let sup = sup_abs(v);
    let inner_sup = sup_abs(&v[q..v.len() - q]);
    DeviationBound { sup, inner_sup, pass: sup.is_finite() && sup <= 1.05 * inner_sup }
}

/// `1, 2, 5, 10, 20, 50, …` up to `max`.
pub fn log_grid(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = m * decade;
            if n > max {
                break 'outer;
            }
            out.push(n);
        }
        decade *= 10;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvdoninConfig {
    pub a_range: (i64, i64),
    pub n_grid: Vec<usize>,
    pub required_margin: f64,
    pub precision: Precision,
}

impl Default for AvdoninConfig {
    fn default() -> Self {
        AvdoninConfig {
            a_range: (-100_000, 100_000),
            n_grid: log_grid(10_000),
            required_margin: 0.1,
            precision: Precision::Float,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub separation: bool,
    pub bounded_deviation: bool,
    pub mean_condition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvdoninReport {
    pub n_range: (i64, i64),
    pub index_range: (i64, i64),
    pub exact: bool,
    pub separation_gap: f64,
    pub duplicate: bool,
    pub delta_sup: f64,
    pub delta_sup_inner: f64,
    pub mean: MeanCondition,
    pub verdict: Verdicts,
}

impl AvdoninReport {
    pub fn pass(&self) -> bool {
        self.verdict.separation && self.verdict.bounded_deviation && self.verdict.mean_condition
    }
}

/// Block range whose enumeration (anchored at `s_{−1} = 0`) covers the
/// index range `[j_lo, j_hi]`.
pub fn covering_blocks(spectrum: &Spectrum, j_range: (i64, i64)) -> Result<(i64, i64)> {
    let alpha = spectrum.alpha();
    let mes = spectrum.measure_f64();
    let extent = (alpha.to_f64(spectrum.upper()) - alpha.to_f64(spectrum.lower())).ceil() as i64;
    let mut pad = 4 + 2 * extent;
    for _ in 0..8 {
        let n_lo = (j_range.0 as f64 / mes).floor() as i64 - pad;
        let n_hi = (j_range.1 as f64 / mes).ceil() as i64 + pad;
        let probe = partition_enumerate(spectrum, (n_lo, n_lo), Anchor::Origin)?;
        let last = partition_enumerate(spectrum, (n_hi, n_hi), Anchor::Origin)?;
        if probe.first_index() <= j_range.0 && last.first_index() + last.len() as i64 > j_range.1 {
            return Ok((n_lo, n_hi));
        }
        pad *= 2;
    }
    Err(Error::InsufficientWindow(format!("no block range covers indices {}:{}", j_range.0, j_range.1)))
}

/// Conditions (a)–(c) on the dual enumeration of `S`.
pub fn avdonin_report(spectrum: &Spectrum, config: &AvdoninConfig) -> Result<AvdoninReport> {
    let n_max = *config.n_grid.iter().max().ok_or_else(|| Error::InvalidInput("empty N grid".into()))? as i64;
    let n_range = covering_blocks(spectrum, (config.a_range.0 + 1, config.a_range.1 + n_max))?;
    let nodes = partition_enumerate(spectrum, n_range, Anchor::Origin)?;
    let d = deltas(&nodes, spectrum.measure(), config.precision)?;
    let sep = separation_gap(&nodes)?;
    let bound = bounded_deviation(&d);
    let mean = avdonin_mean_condition(&d, &config.n_grid, config.a_range, config.required_margin)?;
    Ok(AvdoninReport {
        n_range,
        index_range: (d.first_index(), d.end_index() - 1),
        exact: d.is_exact(),
        separation_gap: sep.gap,
        duplicate: sep.duplicate,
        delta_sup: bound.sup,
        delta_sup_inner: bound.inner_sup,
        verdict: Verdicts {
            separation: !sep.duplicate && sep.gap > 0.0,
            bounded_deviation: bound.pass,
            mean_condition: mean.pass,
        },
        mean,
    })
}
