//! Text forms of exact numbers and command-line ranges.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest decimal exponent accepted, keeping untrusted input from
/// requesting astronomically large powers of ten.
const MAX_EXPONENT: i64 = 4096;
const MAX_LEN: usize = 1 << 16;

/// Parses `p/q`, an integer, or a plain decimal (`-0.125`, `1e-4`).
pub fn rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.len() > MAX_LEN {
        return Err(Error::Parse("number literal too long".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = integer(p)?;
        let q = integer(q)?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    decimal_digits(s).map(|(v, _, _)| v)
}

pub fn integer(text: &str) -> Result<BigInt> {
    let s = text.trim();
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("not an integer: {s:?}")));
    }
    s.trim_start_matches('+').parse::<BigInt>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Parses a decimal literal and returns its exact value, the number of
/// significant digits and the exponent of its last digit.
pub fn decimal_digits(text: &str) -> Result<(BigRational, usize, i64)> {
    let s = text.trim();
    if s.is_empty() || s.len() > MAX_LEN {
        return Err(Error::Parse("empty or oversized decimal".into()));
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..].parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    if exp.abs() > MAX_EXPONENT {
        return Err(Error::Parse(format!("exponent out of range in {s:?}")));
    }
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a decimal number: {s:?}")));
    }
    let all: String = [int_part, frac_part].concat();
    let last_exp = exp - frac_part.len() as i64;
    if last_exp.abs() > MAX_EXPONENT {
        return Err(Error::Parse(format!("exponent out of range in {s:?}")));
    }
    let significant = all.trim_start_matches('0').len();
    let mut n: BigInt =
        if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| Error::Parse(s.into()))? };
    if neg {
        n = -n;
    }
    let ten = BigInt::from(10u32);
    let scale = ten.pow(last_exp.unsigned_abs() as u32);
    let value = if last_exp >= 0 { BigRational::from_integer(n * scale) } else { BigRational::new(n, scale) };
    Ok((value, significant, last_exp))
}

/// Canonical text of a rational: `p` or `p/q`.
pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `lo:hi` with `lo ≤ hi`, both inclusive.
pub fn int_range(text: &str) -> Result<(i64, i64)> {
    let (a, b) = text.split_once(':').ok_or_else(|| Error::Parse(format!("expected lo:hi, got {text:?}")))?;
    let lo: i64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad range start {a:?}")))?;
    let hi: i64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad range end {b:?}")))?;
    if lo > hi {
        return Err(Error::Parse(format!("empty range {lo}:{hi}")));
    }
    Ok((lo, hi))
}

/// Comma-separated positive finite reals, strictly ascending.
pub fn radii(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let r: f64 = part.trim().parse().map_err(|_| Error::Parse(format!("bad radius {part:?}")))?;
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Parse(format!("radius must be positive and finite, got {r}")));
        }
        if out.last().is_some_and(|&prev| r <= prev) {
            return Err(Error::Parse("radii must be strictly ascending".into()));
        }
        out.push(r);
    }
    Ok(out)
}
