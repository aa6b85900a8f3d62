//! Multiband spectra with exact endpoints.
//!
//! A spectrum is a union of finitely many pairwise disjoint bands
//! `[a₁, b₁) ∪ … ∪ [a_ν, b_ν)` with endpoints in ℚ + ℤα. Inputs are linear
//! combinations of interval indicators whose lengths lie in ℤα + ℤβ; they
//! are first rescaled to the normal form (α irrational, β = 1) and then
//! flattened into disjoint bands.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::qnum::{rational_sqrt, Alpha, Base, QNum};

/// Semi-closed interval `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: QNum,
    hi: QNum,
}

impl Interval {
    pub fn new(alpha: &Alpha, lo: QNum, hi: QNum) -> Result<Interval> {
        if !alpha.lt(&lo, &hi)? {
            return Err(Error::InvalidInput(format!("interval [{lo}, {hi}) is empty")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> &QNum {
        &self.lo
    }

    pub fn hi(&self) -> &QNum {
        &self.hi
    }

    pub fn length(&self) -> QNum {
        &self.hi - &self.lo
    }

    pub fn contains(&self, alpha: &Alpha, x: &QNum) -> Result<bool> {
        Ok(alpha.le(&self.lo, x)? && alpha.lt(x, &self.hi)?)
    }
}

/// A real number as it appears in an input file: either rational or a
/// rational multiple of a catalogued irrational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Real {
    Rational(BigRational),
    Irrational(Alpha),
}

impl Real {
    pub fn signum(&self) -> Result<Ordering> {
        match self {
            Real::Rational(q) => Ok(q.cmp(&BigRational::zero())),
            Real::Irrational(a) => a.sign(&QNum::alpha_multiple(1)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Real::Rational(q) if q.is_zero())
    }

    fn abs(&self) -> Result<Real> {
        if self.signum()? != Ordering::Less {
            return Ok(self.clone());
        }
        Ok(match self {
            Real::Rational(q) => Real::Rational(-q),
            Real::Irrational(a) => Real::Irrational(a.scaled(&-BigRational::one())?),
        })
    }

    /// `self / other`, when the quotient stays inside the supported forms.
    pub fn ratio(&self, other: &Real) -> Result<Real> {
        let unsupported = || {
            Error::InvalidInput(format!(
                "ratio {self:?} / {other:?} is outside the supported constants (rational, sqrt, golden, decimal)"
            ))
        };
        match (self, other) {
            (_, o) if o.is_zero() => Err(Error::InvalidInput("division by zero constant".into())),
            (Real::Rational(p), Real::Rational(q)) => Ok(Real::Rational(p / q)),
            (Real::Irrational(a), Real::Rational(q)) => Ok(Real::Irrational(a.scaled(&q.recip())?)),
            (Real::Rational(p), _) if p.is_zero() => Ok(Real::Rational(BigRational::zero())),
            (Real::Rational(p), Real::Irrational(b)) => match b.base() {
                // p / (s√r) = p/(s·r) · √r
                Base::Sqrt(r) => {
                    let root = Alpha::sqrt(r.clone())?;
                    Ok(Real::Irrational(root.scaled(&(p / (b.scale() * r)))?))
                }
                _ => Err(unsupported()),
            },
            (Real::Irrational(a), Real::Irrational(b)) => {
                let s = a.scale() / b.scale();
                match (a.base(), b.base()) {
                    (Base::Sqrt(r1), Base::Sqrt(r2)) => {
                        let q = r1 / r2;
                        match rational_sqrt(&q) {
                            Some(root) => Ok(Real::Rational(s * root)),
                            None => Ok(Real::Irrational(Alpha::sqrt(q)?.scaled(&s)?)),
                        }
                    }
                    (Base::Golden, Base::Golden) => Ok(Real::Rational(s)),
                    (Base::Decimal(d1), Base::Decimal(d2)) if d1.value() == d2.value() => Ok(Real::Rational(s)),
                    _ => Err(unsupported()),
                }
            }
        }
    }
}

/// One input term `coeff · 1_[lo, lo + n·α + m·β)` with `lo = u + v·α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTerm {
    pub coeff: BigRational,
    pub lo_u: BigRational,
    pub lo_v: BigInt,
    pub len_n: BigInt,
    pub len_m: BigInt,
}

/// One term of a normal-form combination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: BigRational,
    pub interval: Interval,
}

/// `Σ c_j 1_{I_j}` over the session constant, each `|I_j| ∈ ℤ + ℤα`.
#[derive(Clone, Debug)]
pub struct IndicatorCombo {
    alpha: Alpha,
    terms: Vec<Term>,
}

impl IndicatorCombo {
    pub fn new(alpha: Alpha, terms: Vec<Term>) -> Result<IndicatorCombo> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("combination has no terms".into()));
        }
        for t in &terms {
            let len = t.interval.length();
            if !len.u().is_integer() {
                return Err(Error::InvalidInput(format!(
                    "length {len} of [{}, {}) is not in Z + Z·alpha",
                    t.interval.lo, t.interval.hi
                )));
            }
        }
        Ok(IndicatorCombo { alpha, terms })
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `Σ c_j |I_j|`, exact.
    pub fn weighted_length(&self) -> Result<QNum> {
        let mut acc = QNum::zero();
        for t in &self.terms {
            acc = acc
                + t.interval.length().scale_rational(&t.coeff).ok_or_else(|| {
                    Error::NotRepresentable(format!("{} · |[{}, {})|", t.coeff, t.interval.lo, t.interval.hi))
                })?;
        }
        Ok(acc)
    }
}

type EndpointMap = Box<dyn Fn(&RawTerm) -> Result<QNum>>;

/// Rescales an input in ℤα + ℤβ to the normal form `(α', 1)`.
///
/// `commensurable` carries the caller-declared generator `g` when α and β
/// are rationally dependent; the lengths then reduce to integers and the
/// new constant is the golden ratio.
pub fn rescale_to_normal_form(
    alpha: &Real,
    beta: &Real,
    terms: &[RawTerm],
    commensurable: Option<&Real>,
) -> Result<IndicatorCombo> {
    if alpha.is_zero() && beta.is_zero() {
        return Err(Error::InvalidInput("alpha and beta are both zero".into()));
    }
    if let Some(g) = commensurable {
        return rescale_commensurable(alpha, beta, terms, g);
    }
    let dependent = || {
        Error::InvalidInput(
            "alpha and beta are rationally dependent; declare the common generator (commensurable)".into(),
        )
    };
    // (new alpha, swap (n, m) roles, sign applied to the integer part)
    let (new_alpha, swap, sign, endpoint): (Alpha, bool, BigInt, EndpointMap) = match (alpha, beta) {
        (Real::Rational(_), Real::Rational(_)) => return Err(dependent()),
        (Real::Irrational(_), Real::Rational(r)) | (Real::Rational(r), Real::Irrational(_)) if r.is_zero() => {
            return Err(dependent())
        }
        (Real::Irrational(a), Real::Rational(b)) => {
            let b_abs = b.abs();
            let na = a.scaled(&b_abs.recip())?;
            let sign = BigInt::from(if b.is_negative() { -1 } else { 1 });
            let inv = b_abs.recip();
            (na, false, sign, Box::new(move |t: &RawTerm| Ok(QNum::new(&t.lo_u * &inv, t.lo_v.clone()))))
        }
        (Real::Rational(a), Real::Irrational(b)) => {
            let a_abs = a.abs();
            let na = b.scaled(&a_abs.recip())?;
            let sign = BigInt::from(if a.is_negative() { -1 } else { 1 });
            let a = a.clone();
            (
                na,
                true,
                sign,
                Box::new(move |t: &RawTerm| {
                    let lo = &t.lo_u + &a * BigRational::from_integer(t.lo_v.clone());
                    Ok(QNum::rational(lo / &a_abs))
                }),
            )
        }
        (Real::Irrational(_), Real::Irrational(_)) => {
            let b_abs = beta.abs()?;
            let na = match alpha.ratio(&b_abs)? {
                Real::Rational(_) => return Err(dependent()),
                Real::Irrational(na) => na,
            };
            let sign = BigInt::from(if beta.signum()? == Ordering::Less { -1 } else { 1 });
            (
                na,
                false,
                sign,
                Box::new(|t: &RawTerm| {
                    if !t.lo_u.is_zero() {
                        return Err(Error::NotRepresentable(format!(
                            "endpoint {} / beta with irrational beta",
                            t.lo_u
                        )));
                    }
                    Ok(QNum::alpha_multiple(t.lo_v.clone()))
                }),
            )
        }
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let (n, m) = if swap { (t.len_m.clone(), &t.len_n * &sign) } else { (t.len_n.clone(), &t.len_m * &sign) };
        let lo = endpoint(t)?;
        let hi = lo.add_int(&m) + QNum::alpha_multiple(n);
        out.push(Term { coeff: t.coeff.clone(), interval: Interval::new(&new_alpha, lo, hi)? });
    }
    IndicatorCombo::new(new_alpha, out)
}

fn rescale_commensurable(alpha: &Real, beta: &Real, terms: &[RawTerm], g: &Real) -> Result<IndicatorCombo> {
    if g.is_zero() {
        return Err(Error::InvalidInput("commensurable generator must be nonzero".into()));
    }
    let g = g.abs()?;
    let as_rational = |r: Real, what: &str| match r {
        Real::Rational(q) => Ok(q),
        Real::Irrational(_) => {
            Err(Error::InvalidInput(format!("{what} is not a rational multiple of the declared generator")))
        }
    };
    let p = as_rational(alpha.ratio(&g)?, "alpha")?;
    let q = as_rational(beta.ratio(&g)?, "beta")?;
    let golden = Alpha::golden();
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let len = BigRational::from_integer(t.len_n.clone()) * &p + BigRational::from_integer(t.len_m.clone()) * &q;
        if !len.is_integer() {
            return Err(Error::InvalidInput(format!("length {len} (in units of the generator) is not an integer")));
        }
        let lo_u = as_rational(Real::Rational(t.lo_u.clone()).ratio(&g)?, "endpoint")?;
        let lo = QNum::rational(lo_u + BigRational::from_integer(t.lo_v.clone()) * &p);
        let hi = lo.add_int(&len.to_integer());
        out.push(Term { coeff: t.coeff.clone(), interval: Interval::new(&golden, lo, hi)? });
    }
    IndicatorCombo::new(golden, out)
}

/// Disjoint-band spectrum with cached exact measure.
#[derive(Clone, Debug)]
pub struct Spectrum {
    alpha: Alpha,
    bands: Vec<Interval>,
    measure: QNum,
    /// (midpoint, length) per band, each rounded once from exact values.
    float_bands: Vec<(f64, f64)>,
}

impl Spectrum {
    /// Builds a spectrum from bands already in the maximal merged form.
    pub fn new(alpha: Alpha, bands: Vec<Interval>) -> Result<Spectrum> {
        if bands.is_empty() {
            return Err(Error::InvalidInput("spectrum has no bands".into()));
        }
        for w in bands.windows(2) {
            if !alpha.lt(&w[0].hi, &w[1].lo)? {
                return Err(Error::InvalidInput(format!(
                    "bands [{}, {}) and [{}, {}) are not separated by a gap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        for b in &bands {
            if !alpha.lt(&b.lo, &b.hi)? {
                return Err(Error::InvalidInput(format!("band [{}, {}) is empty", b.lo, b.hi)));
            }
        }
        let measure = bands.iter().fold(QNum::zero(), |acc, b| acc + b.length());
        let two = BigRational::from_integer(2.into());
        let float_bands = bands
            .iter()
            .map(|b| {
                let mid = (&b.lo + &b.hi).scale_rational(&two.recip());
                let mid = match mid {
                    Some(m) => alpha.to_f64(&m),
                    None => 0.5 * (alpha.to_f64(&b.lo) + alpha.to_f64(&b.hi)),
                };
                (mid, alpha.to_f64(&b.length()))
            })
            .collect();
        Ok(Spectrum { alpha, bands, measure, float_bands })
    }

    /// `[lo, hi)` as a one-band spectrum.
    pub fn interval(alpha: Alpha, lo: QNum, hi: QNum) -> Result<Spectrum> {
        let band = Interval::new(&alpha, lo, hi)?;
        Spectrum::new(alpha, vec![band])
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn bands(&self) -> &[Interval] {
        &self.bands
    }

    /// `(midpoint, length)` of each band in floating point.
    pub fn float_bands(&self) -> &[(f64, f64)] {
        &self.float_bands
    }

    /// Lebesgue measure, exact.
    pub fn measure(&self) -> &QNum {
        &self.measure
    }

    pub fn measure_f64(&self) -> f64 {
        self.alpha.to_f64(&self.measure)
    }

    pub fn lower(&self) -> &QNum {
        &self.bands[0].lo
    }

    pub fn upper(&self) -> &QNum {
        &self.bands[self.bands.len() - 1].hi
    }

    /// Exact half-open membership.
    pub fn contains(&self, x: &QNum) -> Result<bool> {
        // last band with lo ≤ x
        let (mut lo, mut hi) = (0usize, self.bands.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.alpha.le(&self.bands[mid].lo, x)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return Ok(false);
        }
        self.alpha.lt(x, &self.bands[lo - 1].hi)
    }

    /// All `(k, x − k)` with `x − k ∈ S`, by direct scan of
    /// `k = ⌈x − b_ν⌉ … ⌊x − a₁⌋`, ascending in `k`.
    pub fn integer_translates(&self, x: &QNum) -> Result<Vec<(BigInt, QNum)>> {
        let k_lo = self.alpha.ceil(&(x - self.upper()))?;
        let k_hi = self.alpha.floor(&(x - self.lower()))?;
        let mut out = Vec::new();
        let mut k = k_lo;
        while k <= k_hi {
            let y = x.add_int(&-&k);
            if self.contains(&y)? {
                out.push((k.clone(), y));
            }
            k += 1;
        }
        Ok(out)
    }

    /// The periodisation `φ(x) = Σ_k 1_S(x − k)`.
    pub fn phi(&self, x: &QNum) -> Result<u64> {
        Ok(self.integer_translates(x)?.len() as u64)
    }

    /// `∫₀¹ φ` summed exactly piece by piece between the breakpoints in `[0, 1)`.
    pub fn phi_period_integral(&self) -> Result<QNum> {
        let mut cuts = vec![QNum::zero(), QNum::int(1)];
        for b in &self.bands {
            for e in [&b.lo, &b.hi] {
                let f = self.alpha.floor(e)?;
                cuts.push(e.add_int(&-f));
            }
        }
        sort_dedup(&self.alpha, &mut cuts)?;
        let mut acc = QNum::zero();
        for w in cuts.windows(2) {
            let phi = self.phi(&w[0])?;
            acc = acc + (&w[1] - &w[0]).scale_int(&BigInt::from(phi));
        }
        Ok(acc)
    }

    /// The trivial coefficient-one combination of the bands.
    pub fn to_combo(&self) -> IndicatorCombo {
        IndicatorCombo {
            alpha: self.alpha.clone(),
            terms: self.bands.iter().map(|b| Term { coeff: BigRational::one(), interval: b.clone() }).collect(),
        }
    }
}

impl PartialEq for Spectrum {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.bands == other.bands
    }
}

/// Exact sort with duplicates removed.
pub fn sort_dedup(alpha: &Alpha, xs: &mut Vec<QNum>) -> Result<()> {
    let mut err = None;
    xs.sort_by(|a, b| match alpha.cmp(a, b) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    xs.dedup();
    Ok(())
}

/// Flattens `Σ c_j 1_{I_j}` into disjoint bands, rejecting non-indicators.
pub fn normalize_combo(combo: &IndicatorCombo) -> Result<Spectrum> {
    let alpha = &combo.alpha;
    let mut cuts: Vec<QNum> = combo.terms.iter().flat_map(|t| [t.interval.lo.clone(), t.interval.hi.clone()]).collect();
    sort_dedup(alpha, &mut cuts)?;
    // cover[i][j]: term j covers cell i  ⇔  lo_j ≤ cut_i and cut_{i+1} ≤ hi_j
    let pos = |x: &QNum| cuts.iter().position(|c| c == x).expect("endpoint is a cut");
    let spans: Vec<(usize, usize)> = combo.terms.iter().map(|t| (pos(&t.interval.lo), pos(&t.interval.hi))).collect();
    let mut bands: Vec<Interval> = Vec::new();
    let mut open: Option<QNum> = None;
    for i in 0..cuts.len() - 1 {
        let value: BigRational =
            combo.terms.iter().zip(&spans).filter(|(_, &(a, b))| a <= i && i < b).map(|(t, _)| t.coeff.clone()).sum();
        let inside = if value.is_zero() {
            false
        } else if value.is_one() {
            true
        } else {
            return Err(Error::NotIndicator {
                lo: cuts[i].to_string(),
                hi: cuts[i + 1].to_string(),
                value: value.to_string(),
            });
        };
        match (inside, open.take()) {
            (true, None) => open = Some(cuts[i].clone()),
            (true, Some(start)) => open = Some(start),
            (false, Some(start)) => bands.push(Interval { lo: start, hi: cuts[i].clone() }),
            (false, None) => {}
        }
    }
    if let Some(start) = open {
        bands.push(Interval { lo: start, hi: cuts[cuts.len() - 1].clone() });
    }
    if bands.is_empty() {
        return Err(Error::InvalidInput("combination is identically zero".into()));
    }
    Spectrum::new(alpha.clone(), bands)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> Alpha {
        Alpha::sqrt_int(2).unwrap()
    }

    fn q(u: i64, v: i64) -> QNum {
        QNum::new(BigRational::from_integer(u.into()), v.into())
    }

    fn term(c: i64, lo: QNum, hi: QNum) -> Term {
        Term { coeff: BigRational::from_integer(c.into()), interval: Interval::new(&sqrt2(), lo, hi).unwrap() }
    }

    fn raw(lo: i64, n: i64, m: i64) -> RawTerm {
        RawTerm {
            coeff: BigRational::one(),
            lo_u: BigRational::from_integer(lo.into()),
            lo_v: BigInt::zero(),
            len_n: n.into(),
            len_m: m.into(),
        }
    }

    pub(crate) fn two_band() -> Spectrum {
        Spectrum::new(
            sqrt2(),
            vec![
                Interval::new(&sqrt2(), q(0, 0), q(1, 0)).unwrap(),
                Interval::new(&sqrt2(), q(2, 0), q(2, 1)).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn interval_with_a_hole() {
        let combo = IndicatorCombo::new(sqrt2(), vec![term(1, q(0, 0), q(3, 0)), term(-1, q(1, 0), q(2, 0))]).unwrap();
        let s = normalize_combo(&combo).unwrap();
        assert_eq!(s.bands().len(), 2);
        assert_eq!(s.bands()[0], Interval { lo: q(0, 0), hi: q(1, 0) });
        assert_eq!(s.bands()[1], Interval { lo: q(2, 0), hi: q(3, 0) });
        assert_eq!(s.measure(), &q(2, 0));
    }

    #[test]
    fn disjoint_terms_pass_through() {
        let combo = IndicatorCombo::new(sqrt2(), vec![term(1, q(0, 0), q(1, 0)), term(1, q(2, 0), q(2, 1))]).unwrap();
        let s = normalize_combo(&combo).unwrap();
        assert_eq!(s, two_band());
        assert_eq!(s.measure(), &q(1, 1));
    }

    #[test]
    fn overlap_is_not_an_indicator() {
        let combo = IndicatorCombo::new(sqrt2(), vec![term(1, q(0, 0), q(2, 0)), term(1, q(1, 0), q(3, 0))]).unwrap();
        match normalize_combo(&combo).unwrap_err() {
            Error::NotIndicator { lo, hi, value } => {
                assert_eq!((lo.as_str(), hi.as_str(), value.as_str()), ("1", "2", "2"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn adjacent_terms_merge() {
        let combo = IndicatorCombo::new(sqrt2(), vec![term(1, q(0, 0), q(1, 0)), term(1, q(1, 0), q(1, 1))]).unwrap();
        let s = normalize_combo(&combo).unwrap();
        assert_eq!(s.bands(), &[Interval { lo: q(0, 0), hi: q(1, 1) }]);
    }

    #[test]
    fn zero_combination_rejected() {
        let combo = IndicatorCombo::new(sqrt2(), vec![term(1, q(0, 0), q(1, 0)), term(-1, q(0, 0), q(1, 0))]).unwrap();
        assert!(normalize_combo(&combo).is_err());
    }

    #[test]
    fn rational_length_part_must_be_integral() {
        let half = QNum::rational(BigRational::new(1.into(), 2.into()));
        let bad = Term { coeff: BigRational::one(), interval: Interval::new(&sqrt2(), q(0, 0), half).unwrap() };
        assert!(IndicatorCombo::new(sqrt2(), vec![bad]).is_err());
    }

    #[test]
    fn measures() {
        let unit = Spectrum::interval(sqrt2(), q(0, 0), q(1, 0)).unwrap();
        assert_eq!(unit.measure(), &q(1, 0));
        assert_eq!(two_band().measure(), &q(1, 1));
    }

    #[test]
    fn phi_examples() {
        let unit = Spectrum::interval(sqrt2(), q(0, 0), q(1, 0)).unwrap();
        for x in [q(0, 0), q(0, 1), q(5, -3), QNum::rational(BigRational::new(7.into(), 3.into()))] {
            assert_eq!(unit.phi(&x).unwrap(), 1);
        }
        let s = two_band();
        // integer points of S: 0, 2 and 3 (3 < 2 + √2)
        assert_eq!(s.phi(&q(0, 0)).unwrap(), 3);
        let x = QNum::rational(BigRational::new(5.into(), 2.into()));
        let hits = s.integer_translates(&x).unwrap();
        let ks: Vec<i64> = hits.iter().map(|(k, _)| k.try_into().unwrap()).collect();
        assert_eq!(ks, vec![0, 2]);
    }

    #[test]
    fn phi_integrates_to_measure() {
        assert_eq!(two_band().phi_period_integral().unwrap(), q(1, 1));
        let s = Spectrum::new(
            sqrt2(),
            vec![
                Interval::new(&sqrt2(), q(-3, 1), q(0, 0)).unwrap(),
                Interval::new(&sqrt2(), q(1, 0), q(4, 0)).unwrap(),
                Interval::new(&sqrt2(), q(5, 0), q(7, 2)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s.phi_period_integral().unwrap(), s.measure().clone());
    }

    #[test]
    fn membership_is_half_open() {
        let s = two_band();
        assert!(s.contains(&q(0, 0)).unwrap());
        assert!(!s.contains(&q(1, 0)).unwrap());
        assert!(s.contains(&q(2, 0)).unwrap());
        assert!(!s.contains(&q(2, 1)).unwrap());
        assert!(!s.contains(&q(-1, 0)).unwrap());
        assert!(s.contains(&q(3, 0)).unwrap());
    }

    #[test]
    fn rescale_divides_by_beta() {
        let alpha = Real::Irrational(Alpha::sqrt_int(8).unwrap());
        let beta = Real::Rational(BigRational::from_integer(2.into()));
        let combo = rescale_to_normal_form(&alpha, &beta, &[raw(0, 1, 0), raw(4, 0, 1)], None).unwrap();
        assert_eq!(combo.alpha(), &sqrt2());
        assert_eq!(combo.terms()[0].interval.length(), q(0, 1));
        assert_eq!(combo.terms()[1].interval.length(), q(1, 0));
        assert_eq!(combo.terms()[1].interval.lo(), &q(2, 0));
    }

    #[test]
    fn rescale_commensurable_uses_golden() {
        let alpha = Real::Rational(BigRational::from_integer(2.into()));
        let beta = Real::Rational(BigRational::from_integer(3.into()));
        let g = Real::Rational(BigRational::one());
        let combo = rescale_to_normal_form(&alpha, &beta, &[raw(0, 1, 0), raw(5, 0, 1)], Some(&g)).unwrap();
        assert_eq!(combo.alpha(), &Alpha::golden());
        assert_eq!(combo.terms()[0].interval.length(), q(2, 0));
        assert_eq!(combo.terms()[1].interval.length(), q(3, 0));
        assert!(combo.terms().iter().all(|t| t.interval.lo().is_rational()));
    }

    #[test]
    fn rescale_normal_form_unchanged() {
        let alpha = Real::Irrational(sqrt2());
        let beta = Real::Rational(BigRational::one());
        let combo = rescale_to_normal_form(&alpha, &beta, &[raw(0, 1, 1)], None).unwrap();
        assert_eq!(combo.alpha(), &sqrt2());
        assert_eq!(combo.terms()[0].interval, Interval { lo: q(0, 0), hi: q(1, 1) });
    }

    #[test]
    fn rescale_rejects_undeclared_dependence() {
        let two = Real::Rational(BigRational::from_integer(2.into()));
        let three = Real::Rational(BigRational::from_integer(3.into()));
        assert!(rescale_to_normal_form(&two, &three, &[raw(0, 1, 0)], None).is_err());
        let a = Real::Irrational(Alpha::sqrt_int(8).unwrap());
        let b = Real::Irrational(sqrt2());
        assert!(rescale_to_normal_form(&a, &b, &[raw(0, 1, 0)], None).is_err());
        // a declared generator that does not divide alpha
        let g = Real::Rational(BigRational::one());
        assert!(rescale_to_normal_form(&Real::Irrational(sqrt2()), &three, &[raw(0, 1, 0)], Some(&g)).is_err());
    }

    #[test]
    fn rescale_swaps_when_alpha_is_rational() {
        // α = 2, β = 2√3  →  α' = √3, lengths n·2 + m·2√3 = 2(n + m√3)
        let alpha = Real::Rational(BigRational::from_integer(2.into()));
        let beta = Real::Irrational(Alpha::sqrt_int(12).unwrap());
        let combo = rescale_to_normal_form(&alpha, &beta, &[raw(0, 1, 1)], None).unwrap();
        assert_eq!(combo.alpha(), &Alpha::sqrt_int(3).unwrap());
        assert_eq!(combo.terms()[0].interval.length(), q(1, 1));
    }

    #[test]
    fn negative_beta_keeps_orientation() {
        let alpha = Real::Irrational(sqrt2());
        let beta = Real::Rational(BigRational::from_integer((-1).into()));
        // length √2·1 + (-1)·(-2) = √2 + 2
        let combo = rescale_to_normal_form(&alpha, &beta, &[raw(0, 1, -2)], None).unwrap();
        assert_eq!(combo.terms()[0].interval.length(), q(2, 1));
    }

    #[test]
    fn measure_matches_weighted_length() {
        let combo = IndicatorCombo::new(
            sqrt2(),
            vec![term(1, q(0, 0), q(3, 1)), term(-1, q(1, 0), q(2, 0)), term(1, q(5, 0), q(6, 0))],
        )
        .unwrap();
        let s = normalize_combo(&combo).unwrap();
        assert_eq!(s.measure(), &combo.weighted_length().unwrap());
    }

    #[test]
    fn trivial_combo_is_identity() {
        let s = two_band();
        assert_eq!(normalize_combo(&s.to_combo()).unwrap(), s);
    }
}
