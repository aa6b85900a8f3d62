//! JSON form of spectrum inputs.
//!
//! ```json
//! {
//!   "alpha": {"kind": "sqrt", "value": "2"},
//!   "beta": {"kind": "rational", "value": "1"},
//!   "terms": [
//!     {"coeff": "1", "lo": {"u": "0", "v": 0}, "len": {"n": 0, "m": 1}},
//!     {"coeff": "1", "lo": {"u": "2", "v": 0}, "len": {"n": 1, "m": 0}}
//!   ]
//! }
//! ```
//!
//! A term is `coeff · 1_[lo, lo + n·α + m·β)` with `lo = u + v·α`. Rationals
//! are written `p/q` or as decimals; integers may be JSON numbers or
//! strings. Rationally dependent `α, β` need a `commensurable` generator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parse;
use crate::qnum::{Alpha, Base, QNum};
use crate::spectra::{normalize_combo, rescale_to_normal_form, IndicatorCombo, RawTerm, Real, Spectrum};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntText {
    Int(i64),
    Text(String),
}

impl IntText {
    fn from_big(z: &BigInt) -> IntText {
        z.to_i64().map_or_else(|| IntText::Text(z.to_string()), IntText::Int)
    }

    fn integer(&self) -> Result<BigInt> {
        match self {
            IntText::Int(i) => Ok(BigInt::from(*i)),
            IntText::Text(s) => parse::integer(s),
        }
    }

    fn rational(&self) -> Result<BigRational> {
        match self {
            IntText::Int(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
            IntText::Text(s) => parse::rational(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantKind {
    Rational,
    Sqrt,
    Golden,
    Decimal,
}

/// `scale · base`, where the base is `value` itself (rational, decimal),
/// `√value`, or the golden ratio (no value).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSpec {
    pub kind: ConstantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<IntText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<IntText>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QNumSpec {
    pub u: IntText,
    pub v: IntText,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthSpec {
    pub n: IntText,
    pub m: IntText,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: IntText,
    pub lo: QNumSpec,
    pub len: LengthSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub lo: QNumSpec,
    pub hi: QNumSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub alpha: ConstantSpec,
    pub beta: ConstantSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commensurable: Option<ConstantSpec>,
    pub terms: Vec<TermSpec>,
    /// Written on output; checked against the normalised result on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<Vec<BandSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<QNumSpec>,
}

impl ConstantSpec {
    pub fn real(&self) -> Result<Real> {
        let scale = match &self.scale {
            Some(s) => s.rational()?,
            None => BigRational::one(),
        };
        let value = || {
            self.value.as_ref().ok_or_else(|| Error::InvalidInput(format!("{:?} constant needs a value", self.kind)))
        };
        let irrational = |a: Alpha| Ok(Real::Irrational(a.scaled(&scale)?));
        match self.kind {
            ConstantKind::Rational => Ok(Real::Rational(value()?.rational()? * scale)),
            ConstantKind::Sqrt => irrational(Alpha::sqrt(value()?.rational()?)?),
            ConstantKind::Golden => {
                if self.value.is_some() {
                    return Err(Error::InvalidInput("golden constant takes no value".into()));
                }
                irrational(Alpha::golden())
            }
            ConstantKind::Decimal => match value()? {
                IntText::Text(s) => irrational(Alpha::decimal(s)?),
                IntText::Int(_) => Err(Error::InvalidInput("decimal constant must be a string of digits".into())),
            },
        }
    }

    pub fn of_alpha(alpha: &Alpha) -> ConstantSpec {
        let scale = (!alpha.scale().is_one()).then(|| IntText::Text(parse::rational_to_string(alpha.scale())));
        let (kind, value) = match alpha.base() {
            Base::Sqrt(r) => (ConstantKind::Sqrt, Some(IntText::Text(parse::rational_to_string(r)))),
            Base::Golden => (ConstantKind::Golden, None),
            Base::Decimal(d) => (ConstantKind::Decimal, Some(IntText::Text(d.text().to_string()))),
        };
        ConstantSpec { kind, value, scale }
    }

    pub fn one() -> ConstantSpec {
        ConstantSpec { kind: ConstantKind::Rational, value: Some(IntText::Text("1".into())), scale: None }
    }
}

impl QNumSpec {
    pub fn of(q: &QNum) -> QNumSpec {
        QNumSpec { u: IntText::Text(parse::rational_to_string(q.u())), v: IntText::from_big(q.v()) }
    }

    pub fn value(&self) -> Result<QNum> {
        Ok(QNum::new(self.u.rational()?, self.v.integer()?))
    }
}

impl SpectrumFile {
    /// Terms in the input's own `(α, β)` coordinates.
    pub fn raw_terms(&self) -> Result<Vec<RawTerm>> {
        self.terms
            .iter()
            .map(|t| {
                Ok(RawTerm {
                    coeff: t.coeff.rational()?,
                    lo_u: t.lo.u.rational()?,
                    lo_v: t.lo.v.integer()?,
                    len_n: t.len.n.integer()?,
                    len_m: t.len.m.integer()?,
                })
            })
            .collect()
    }

    /// The normal-form combination.
    pub fn combo(&self) -> Result<IndicatorCombo> {
        let commensurable = self.commensurable.as_ref().map(ConstantSpec::real).transpose()?;
        rescale_to_normal_form(&self.alpha.real()?, &self.beta.real()?, &self.raw_terms()?, commensurable.as_ref())
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let s = normalize_combo(&self.combo()?)?;
        if let Some(bands) = &self.bands {
            let listed: Vec<(QNum, QNum)> =
                bands.iter().map(|b| Ok((b.lo.value()?, b.hi.value()?))).collect::<Result<_>>()?;
            let actual: Vec<(QNum, QNum)> = s.bands().iter().map(|b| (b.lo().clone(), b.hi().clone())).collect();
            if listed != actual {
                return Err(Error::InvalidInput("listed bands disagree with the normalised terms".into()));
            }
        }
        if let Some(m) = &self.measure {
            if &m.value()? != s.measure() {
                return Err(Error::InvalidInput(format!("listed measure disagrees with {}", s.measure())));
            }
        }
        Ok(s)
    }

    /// Canonical normal form: `β = 1`, one unit term per band when every
    /// band length lies in `ℤ + ℤα`, and the canonical combination otherwise.
    pub fn canonical(spectrum: &Spectrum, combo: Option<&IndicatorCombo>) -> SpectrumFile {
        let integral = spectrum.bands().iter().all(|b| b.length().u().is_integer());
        let term = |coeff: &BigRational, lo: &QNum, hi: &QNum| {
            let len = hi - lo;
            TermSpec {
                coeff: IntText::Text(parse::rational_to_string(coeff)),
                lo: QNumSpec::of(lo),
                len: LengthSpec { n: IntText::from_big(len.v()), m: IntText::from_big(&len.u().to_integer()) },
            }
        };
        let terms = match combo {
            Some(c) if !integral => canonical_terms(c).iter().map(|(k, lo, hi)| term(k, lo, hi)).collect(),
            _ => spectrum.bands().iter().map(|b| term(&BigRational::one(), b.lo(), b.hi())).collect(),
        };
        SpectrumFile {
            alpha: ConstantSpec::of_alpha(spectrum.alpha()),
            beta: ConstantSpec::one(),
            commensurable: None,
            terms,
            bands: Some(
                spectrum
                    .bands()
                    .iter()
                    .map(|b| BandSpec { lo: QNumSpec::of(b.lo()), hi: QNumSpec::of(b.hi()) })
                    .collect(),
            ),
            measure: Some(QNumSpec::of(spectrum.measure())),
        }
    }
}

/// Terms sorted by `(lo, hi)`, coefficients of equal intervals summed and
/// zero terms dropped.
fn canonical_terms(combo: &IndicatorCombo) -> Vec<(BigRational, QNum, QNum)> {
    let alpha = combo.alpha();
    let mut terms: Vec<(BigRational, QNum, QNum)> =
        combo.terms().iter().map(|t| (t.coeff.clone(), t.interval.lo().clone(), t.interval.hi().clone())).collect();
    // endpoints were compared when the combination was built, so the order is decidable
    terms.sort_by(|a, b| {
        alpha.cmp(&a.1, &b.1).and_then(|o| Ok(o.then(alpha.cmp(&a.2, &b.2)?))).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<(BigRational, QNum, QNum)> = Vec::new();
    for t in terms {
        match out.last_mut() {
            Some(last) if last.1 == t.1 && last.2 == t.2 => last.0 += t.0,
            _ => out.push(t),
        }
    }
    out.retain(|t| !t.0.is_zero());
    out
}

pub fn parse_spectrum_file(text: &str) -> Result<SpectrumFile> {
    Ok(serde_json::from_str(text)?)
}

/// Parses and normalises a spectrum file.
pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    parse_spectrum_file(text)?.spectrum()
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_canonical_json(file: &SpectrumFile) -> Result<String> {
    let mut s = serde_json::to_string_pretty(file)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_BAND: &str = r#"{
        "alpha": {"kind": "sqrt", "value": "2"},
        "beta": {"kind": "rational", "value": "1"},
        "terms": [
            {"coeff": "1", "lo": {"u": "0", "v": 0}, "len": {"n": 0, "m": 1}},
            {"coeff": "1", "lo": {"u": "2", "v": 0}, "len": {"n": 1, "m": 0}}
        ]
    }"#;

    fn q(u: i64, v: i64) -> QNum {
        QNum::new(BigRational::from_integer(u.into()), v.into())
    }

    #[test]
    fn two_band_file() {
        let s = parse_spectrum(TWO_BAND).unwrap();
        assert_eq!(s.bands().len(), 2);
        assert_eq!(s.measure(), &q(1, 1));
        assert_eq!(s.alpha(), &Alpha::sqrt_int(2).unwrap());
    }

    #[test]
    fn canonical_round_trip() {
        let s = parse_spectrum(TWO_BAND).unwrap();
        let file = SpectrumFile::canonical(&s, None);
        let text = to_canonical_json(&file).unwrap();
        let back = parse_spectrum_file(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.spectrum().unwrap(), s);
        assert_eq!(to_canonical_json(&SpectrumFile::canonical(&back.spectrum().unwrap(), None)).unwrap(), text);
    }

    #[test]
    fn rescaled_by_beta() {
        // α = 2√2, β = 2, lengths 2√2 and 2 → √2 and 1
        let text = r#"{"alpha": {"kind": "sqrt", "value": "2", "scale": "2"}, "beta": {"kind": "rational", "value": 2},
            "terms": [{"coeff": 1, "lo": {"u": 0, "v": 0}, "len": {"n": 1, "m": 0}},
                      {"coeff": 1, "lo": {"u": 6, "v": 0}, "len": {"n": 0, "m": 1}}]}"#;
        let s = parse_spectrum(text).unwrap();
        assert_eq!(s.alpha(), &Alpha::sqrt_int(2).unwrap());
        assert_eq!(s.measure(), &q(1, 1));
    }

    #[test]
    fn commensurable_needs_declaration() {
        let base = r#""alpha": {"kind": "rational", "value": 2}, "beta": {"kind": "rational", "value": 3},
            "terms": [{"coeff": 1, "lo": {"u": 0, "v": 0}, "len": {"n": 1, "m": 0}},
                      {"coeff": 1, "lo": {"u": 5, "v": 0}, "len": {"n": 0, "m": 1}}]"#;
        assert!(parse_spectrum(&format!("{{{base}}}")).is_err());
        let s = parse_spectrum(&format!(r#"{{{base}, "commensurable": {{"kind": "rational", "value": 1}}}}"#)).unwrap();
        assert_eq!(s.alpha(), &Alpha::golden());
        assert_eq!(s.measure(), &q(5, 0));
    }

    #[test]
    fn overlap_is_not_an_indicator() {
        let text = r#"{"alpha": {"kind": "sqrt", "value": "2"}, "beta": {"kind": "rational", "value": "1"},
            "terms": [{"coeff": "1", "lo": {"u": "0", "v": 0}, "len": {"n": 0, "m": 2}},
                      {"coeff": "1", "lo": {"u": "1", "v": 0}, "len": {"n": 0, "m": 2}}]}"#;
        let err = parse_spectrum(text).unwrap_err().to_string();
        assert!(err.contains("not an indicator function"), "{err}");
    }

    #[test]
    fn hole_with_fractional_offset_keeps_combination() {
        // [0, 3) − [1/2, 3/2): bands of length 1/2 and 3/2
        let text = r#"{"alpha": {"kind": "golden"}, "beta": {"kind": "rational", "value": "1"},
            "terms": [{"coeff": "-1", "lo": {"u": "1/2", "v": 0}, "len": {"n": 0, "m": 1}},
                      {"coeff": "1", "lo": {"u": "0", "v": 0}, "len": {"n": 0, "m": 3}}]}"#;
        let file = parse_spectrum_file(text).unwrap();
        let s = file.spectrum().unwrap();
        let out = SpectrumFile::canonical(&s, Some(&file.combo().unwrap()));
        assert_eq!(out.terms.len(), 2);
        assert_eq!(out.terms[0].coeff, IntText::Text("1".into()));
        assert_eq!(parse_spectrum_file(&to_canonical_json(&out).unwrap()).unwrap().spectrum().unwrap(), s);
    }

    #[test]
    fn listed_bands_are_checked() {
        let s = parse_spectrum(TWO_BAND).unwrap();
        let mut file = SpectrumFile::canonical(&s, None);
        file.measure = Some(QNumSpec::of(&q(2, 1)));
        assert!(file.spectrum().is_err());
    }

    #[test]
    fn malformed_inputs_are_errors() {
        for text in [
            "",
            "{}",
            r#"{"alpha": {"kind": "cubic", "value": "2"}, "beta": {"kind": "rational", "value": "1"}, "terms": []}"#,
            r#"{"alpha": {"kind": "sqrt", "value": "4"}, "beta": {"kind": "rational", "value": "1"}, "terms": []}"#,
            r#"{"alpha": {"kind": "sqrt", "value": "2"}, "beta": {"kind": "rational", "value": "1"}, "terms": []}"#,
            r#"{"alpha": {"kind": "golden", "value": "2"}, "beta": {"kind": "rational", "value": "1"}, "terms": []}"#,
            r#"{"alpha": {"kind": "decimal", "value": "1.414"}, "beta": {"kind": "rational", "value": "1"}, "terms": []}"#,
        ] {
            assert!(parse_spectrum(text).is_err(), "{text}");
        }
    }

    proptest! {
        #[test]
        fn canonical_output_is_a_fixed_point(a in -20i64..20, la in 1i64..5, gap in 1i64..5, v in 0i64..3) {
            let text = format!(
                r#"{{"alpha": {{"kind": "sqrt", "value": "3"}}, "beta": {{"kind": "rational", "value": "1"}},
                "terms": [{{"coeff": "1", "lo": {{"u": "{a}", "v": 0}}, "len": {{"n": 0, "m": {la}}}}},
                          {{"coeff": "1", "lo": {{"u": "{}", "v": 0}}, "len": {{"n": {v}, "m": 1}}}}]}}"#,
                a + la + gap
            );
            let s = parse_spectrum(&text).unwrap();
            let once = to_canonical_json(&SpectrumFile::canonical(&s, None)).unwrap();
            let twice = to_canonical_json(&SpectrumFile::canonical(&parse_spectrum(&once).unwrap(), None)).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
