//! Paired finite sections of the primal and dual quasicrystal systems.
//!
//! `E(Λ(Γ, I))` is measured in `L²(S)` and `E(Λ*(Γ, S))` in `L²(I)`, with
//! both sets cut from the same `Γ` and `I = [a, a + mes S)` (`a = 0` unless
//! asked otherwise). The two Riesz basis properties are equivalent in the
//! infinite setting; finite sections can only corroborate that, so the
//! report speaks of consistency and never of proof.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qnum::QNum;
use crate::quasicrystal::{dual_window, points_in_strip, primal_window_in, CoordBox, Lattice2, Projection, UNBOUNDED};
use crate::riesz::{sweep_with, Perturbation, Sweep};
use crate::spectra::{Interval, Spectrum};

/// Half-width of the strip searched around each endpoint.
pub fn audit_epsilon() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCase {
    pub n: i64,
    pub m: i64,
    /// The projection tested against the windows, exact.
    pub value: String,
    pub endpoint: String,
    /// The endpoint is a band's closed (lower) end.
    pub closed_end: bool,
    pub exact_hit: bool,
    pub distance: f64,
    pub included: bool,
    /// What `lo ≤ x < hi` on `f64` approximations would have said.
    pub float_included: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryAudit {
    pub projection: Projection,
    pub cases: Vec<BoundaryCase>,
    pub exact_hits: usize,
    /// Cases whose float distance is below rounding noise, so any float
    /// decision would have been a guess.
    pub float_ambiguous: usize,
    pub float_disagreements: usize,
    /// Every case agrees with the side-of-endpoint rule: inside iff at or
    /// past a closed end, or strictly before an open end.
    pub consistent: bool,
}

impl BoundaryAudit {
    pub fn resolved(&self) -> usize {
        self.cases.len()
    }
}

fn window_contains(alpha: &crate::qnum::Alpha, windows: &[Interval], x: &QNum) -> Result<bool> {
    for w in windows {
        if w.contains(alpha, x)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Lattice points of the box whose projection lies within
/// [`audit_epsilon`] of a window endpoint, with membership in the union of
/// `windows` decided exactly.
pub fn boundary_audit(
    lattice: &Lattice2,
    proj: Projection,
    windows: &[Interval],
    bx: CoordBox,
) -> Result<BoundaryAudit> {
    let alpha = lattice.alpha();
    let eps = QNum::rational(audit_epsilon());
    let mut cases = Vec::new();
    let windows_f: Vec<(f64, f64)> = windows.iter().map(|w| (alpha.to_f64(w.lo()), alpha.to_f64(w.hi()))).collect();
    let mut consistent = true;
    for w in windows {
        for (endpoint, closed_end) in [(w.lo(), true), (w.hi(), false)] {
            let lo = endpoint - &eps;
            let hi = endpoint + &eps;
            let mut hits = points_in_strip(lattice, proj, &lo, &hi, bx)?;
            // the strip is half-open; pick up `endpoint + ε` itself
            hits.extend(
                points_in_strip(lattice, proj, &hi, &(&hi + &eps), bx)?
                    .into_iter()
                    .filter(|h| h.point.project(proj) == &hi),
            );
            for h in hits {
                let x = h.point.project(proj).clone();
                let side = alpha.cmp(&x, endpoint)?;
                let included = window_contains(alpha, windows, &x)?;
                let expected = if closed_end { side.is_ge() } else { side.is_lt() };
                consistent &= included == expected;
                let xf = alpha.to_f64(&x);
                cases.push(BoundaryCase {
                    n: h.n,
                    m: h.m,
                    value: x.to_string(),
                    endpoint: endpoint.to_string(),
                    closed_end,
                    exact_hit: side.is_eq(),
                    distance: xf - alpha.to_f64(endpoint),
                    included,
                    float_included: windows_f.iter().any(|&(a, b)| a <= xf && xf < b),
                });
            }
        }
    }
    cases.sort_by(|a, b| (a.endpoint.as_str(), a.n, a.m).cmp(&(b.endpoint.as_str(), b.n, b.m)));
    let exact_hits = cases.iter().filter(|c| c.exact_hit).count();
    let float_ambiguous =
        cases.iter().filter(|c| c.distance.abs() <= 8.0 * f64::EPSILON * (1.0 + c.distance.abs())).count();
    let float_disagreements = cases.iter().filter(|c| c.included != c.float_included).count();
    Ok(BoundaryAudit { projection: proj, cases, exact_hits, float_ambiguous, float_disagreements, consistent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Consistency {
    /// Both condition numbers plateau.
    Corroborated,
    /// Exactly one side plateaus.
    Inconsistent,
    /// Neither side plateaus on these radii.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Density {
    pub radius: f64,
    pub count: usize,
    /// `count / 2R`.
    pub density: f64,
    /// `|density − mes S| / mes S`.
    pub rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct DualityConfig {
    pub radii: Vec<f64>,
    pub tol: f64,
    /// Lower end `a` of `I = [a, a + mes S)`.
    pub anchor: QNum,
    pub density_radius: f64,
    /// Largest tolerated condition drift for a plateau.
    pub plateau_drift: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            radii: vec![25.0, 50.0, 100.0],
            tol: 1e-8,
            anchor: QNum::zero(),
            density_radius: 500.0,
            plateau_drift: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub radii: Vec<f64>,
    pub measure: f64,
    pub window: (String, String),
    /// `E(Λ(Γ, I))` in `L²(S)`.
    pub primal: Sweep,
    /// `E(Λ*(Γ, S))` in `L²(I)`.
    pub dual: Sweep,
    pub primal_density: Density,
    pub dual_density: Density,
    /// `Γ*` against the bands of `S` (first coordinate).
    pub dual_audit: BoundaryAudit,
    /// `Γ` against `I` (second coordinate).
    pub primal_audit: BoundaryAudit,
    pub consistency: Consistency,
}

impl DualityReport {
    pub fn plateaus(sweep: &Sweep, drift: f64) -> bool {
        sweep.cond_drift.is_some_and(|d| d < drift)
    }
}

fn density(count: usize, radius: f64, measure: f64) -> Density {
    let density = count as f64 / (2.0 * radius);
    Density { radius, count, density, rel_error: (density - measure).abs() / measure }
}

pub fn duality_experiment(spectrum: &Spectrum, config: &DualityConfig) -> Result<DualityReport> {
    let alpha = spectrum.alpha();
    let lo = config.anchor.clone();
    let hi = &lo + spectrum.measure();
    let window = Interval::new(alpha, lo.clone(), hi.clone())?;
    let interval = Spectrum::interval(alpha.clone(), lo.clone(), hi.clone())?;
    let radius = config.radii.iter().cloned().fold(0.0, f64::max);
    if !(radius > 0.0) || !(config.density_radius > 0.0) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let (primal, dual) = rayon::join(
        || sweep_with(&config.radii, Perturbation::None, config.tol, spectrum, |r| primal_window_in(alpha, &window, r)),
        || sweep_with(&config.radii, Perturbation::None, config.tol, &interval, |r| dual_window(spectrum, r)),
    );
    let (primal, dual) = (primal?, dual?);
    let measure = spectrum.measure_f64();
    let primal_density =
        density(primal_window_in(alpha, &window, config.density_radius)?.len(), config.density_radius, measure);
    let dual_density = density(dual_window(spectrum, config.density_radius)?.len(), config.density_radius, measure);

    // boxes cover every lattice point whose other projection is within the largest radius
    let r = radius.ceil() as i64;
    let gamma = Lattice2::gamma(alpha);
    let lower = alpha.to_f64(spectrum.lower()).floor() as i64;
    let upper = alpha.to_f64(spectrum.upper()).ceil() as i64;
    let dual_box = CoordBox { n: (-UNBOUNDED, UNBOUNDED), m: (-r - upper - 1, r - lower + 1) };
    let dual_audit = boundary_audit(&gamma.dual()?, Projection::First, spectrum.bands(), dual_box)?;
    let (a, b) = (alpha.to_f64(&lo).floor() as i64, alpha.to_f64(&hi).ceil() as i64);
    let primal_box = CoordBox { n: (-r + a - 1, r + b + 1), m: (-UNBOUNDED, UNBOUNDED) };
    let primal_audit = boundary_audit(&gamma, Projection::Second, std::slice::from_ref(&window), primal_box)?;

    let consistency = match (
        DualityReport::plateaus(&primal, config.plateau_drift),
        DualityReport::plateaus(&dual, config.plateau_drift),
    ) {
        (true, true) => Consistency::Corroborated,
        (false, false) => Consistency::Undetermined,
        _ => Consistency::Inconsistent,
    };
    Ok(DualityReport {
        radii: config.radii.clone(),
        measure,
        window: (lo.to_string(), hi.to_string()),
        primal,
        dual,
        primal_density,
        dual_density,
        dual_audit,
        primal_audit,
        consistency,
    })
}

/// Paired bounds table: one row per radius.
pub fn paired_csv(report: &DualityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "radius",
        "primal_dim",
        "primal_lambda_min",
        "primal_lambda_max",
        "primal_cond",
        "dual_dim",
        "dual_lambda_min",
        "dual_lambda_max",
        "dual_cond",
    ])?;
    for (p, d) in report.primal.rows.iter().zip(&report.dual.rows) {
        let cond = |c: Option<f64>| c.map_or_else(String::new, |c| format!("{c:e}"));
        w.write_record([
            format!("{}", p.radius),
            p.bounds.dim.to_string(),
            format!("{:e}", p.bounds.lambda_min),
            format!("{:e}", p.bounds.lambda_max),
            cond(p.bounds.cond),
            d.bounds.dim.to_string(),
            format!("{:e}", d.bounds.lambda_min),
            format!("{:e}", d.bounds.lambda_max),
            cond(d.bounds.cond),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::Alpha;

    fn q(u: i64, v: i64) -> QNum {
        QNum::new(BigRational::from_integer(u.into()), v.into())
    }

    fn two_band(alpha: &Alpha) -> Spectrum {
        Spectrum::new(
            alpha.clone(),
            vec![Interval::new(alpha, q(0, 0), q(1, 0)).unwrap(), Interval::new(alpha, q(2, 0), q(2, 1)).unwrap()],
        )
        .unwrap()
    }

    fn unit(alpha: &Alpha) -> Spectrum {
        Spectrum::interval(alpha.clone(), q(0, 0), q(1, 0)).unwrap()
    }

    fn sqrt2() -> Alpha {
        Alpha::sqrt_int(2).unwrap()
    }

    fn dual_audit(s: &Spectrum, r: i64) -> BoundaryAudit {
        let gamma = Lattice2::gamma(s.alpha());
        let bx = CoordBox { n: (-UNBOUNDED, UNBOUNDED), m: (-r, r) };
        boundary_audit(&gamma.dual().unwrap(), Projection::First, s.bands(), bx).unwrap()
    }

    #[test]
    fn open_end_hit_is_excluded() {
        let a = sqrt2();
        let audit = dual_audit(&two_band(&a), 10);
        let hit = audit.cases.iter().find(|c| c.n == 2 && c.m == 1).expect("k=2, m=1 lands on 2+√2");
        assert!(hit.exact_hit && !hit.closed_end && !hit.included);
        assert!(audit.consistent);
    }

    #[test]
    fn closed_end_hits_are_included() {
        let a = sqrt2();
        let audit = dual_audit(&two_band(&a), 10);
        // p₁ = k + m√2 is rational only for m = 0: hits at 0, 1 and 2
        let on_lo: Vec<_> = audit.cases.iter().filter(|c| c.exact_hit && c.closed_end).collect();
        assert_eq!(on_lo.len(), 2);
        assert!(on_lo.iter().all(|c| c.included && c.m == 0));
        let at_one = audit.cases.iter().find(|c| c.exact_hit && c.value == "1").unwrap();
        assert!(!at_one.included);
        assert_eq!(audit.exact_hits, 4);
        assert_eq!(audit.float_ambiguous, 4);
    }

    fn sqrt2_decimal(digits: u32) -> String {
        let s = (BigInt::from(2) * BigInt::from(10u32).pow(2 * (digits - 1))).sqrt().to_string();
        format!("{}.{}", &s[..1], &s[1..])
    }

    #[test]
    fn membership_is_precision_independent() {
        let alphas =
            [sqrt2(), Alpha::decimal(&sqrt2_decimal(100)).unwrap(), Alpha::decimal(&sqrt2_decimal(150)).unwrap()];
        let decisions: Vec<Vec<(i64, i64, bool)>> = alphas
            .iter()
            .map(|a| dual_audit(&two_band(a), 30).cases.iter().map(|c| (c.n, c.m, c.included)).collect())
            .collect();
        assert_eq!(decisions[0], decisions[1]);
        assert_eq!(decisions[0], decisions[2]);
    }

    #[test]
    fn primal_audit_on_unit_window() {
        let a = sqrt2();
        let gamma = Lattice2::gamma(&a);
        let w = Interval::new(&a, q(0, 0), q(1, 0)).unwrap();
        let audit =
            boundary_audit(&gamma, Projection::Second, &[w], CoordBox { n: (-20, 20), m: (-UNBOUNDED, UNBOUNDED) })
                .unwrap();
        // p₂ = m − n√2 hits integers only at n = 0
        assert_eq!(audit.exact_hits, 2);
        assert!(audit.consistent);
        assert!(audit.cases.iter().filter(|c| c.exact_hit).all(|c| c.included == c.closed_end));
    }

    #[test]
    fn unit_interval_is_corroborated() {
        let s = unit(&sqrt2());
        let report = duality_experiment(
            &s,
            &DualityConfig { radii: vec![10.0, 20.0, 40.0], density_radius: 200.0, ..Default::default() },
        )
        .unwrap();
        assert_eq!(report.consistency, Consistency::Corroborated);
        assert!(report.primal.interlacing && report.dual.interlacing);
        assert!(report.primal_density.rel_error < 0.05 && report.dual_density.rel_error < 0.05);
        assert!(report.primal_audit.consistent && report.dual_audit.consistent);
        let csv = paired_csv(&report).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn shifted_anchor_keeps_bounds() {
        let s = two_band(&sqrt2());
        let base = DualityConfig { radii: vec![10.0, 20.0], density_radius: 100.0, ..Default::default() };
        let a = duality_experiment(&s, &base).unwrap();
        let b = duality_experiment(&s, &DualityConfig { anchor: q(1, 0), ..base }).unwrap();
        assert_eq!(b.window.0, "1");
        // the dual side is measured on a translate of I: a unitary change
        for (x, y) in a.dual.rows.iter().zip(&b.dual.rows) {
            assert!((x.bounds.lambda_min - y.bounds.lambda_min).abs() < 1e-9);
        }
    }
}
