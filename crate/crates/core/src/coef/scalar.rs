use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Exact rational ground-field element. `BigRational` keeps every value in
/// lowest terms with a positive denominator.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

pub fn scalar_to_f64(q: &Scalar) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator or denominator too large for a direct conversion
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn scalar_from_f64(v: f64) -> Option<Scalar> {
    Scalar::from_float(v)
}

/// Parses `12`, `-3`, `0.25`, `1e-3` or `3/4` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Scalar> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{whole}{frac}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Scalar::from_integer(numer);
    if scale >= 0 {
        q *= Scalar::from_integer(num::pow(ten, scale as usize));
    } else {
        q /= Scalar::from_integer(num::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

/// `q^e` for an integer exponent; `None` for `0^(negative)`.
pub(crate) fn pow_int(q: &Scalar, e: i64) -> Option<Scalar> {
    if e < 0 && q.is_zero() {
        return None;
    }
    let mut base = if e < 0 { q.recip() } else { q.clone() };
    let mut n = e.unsigned_abs();
    let mut acc = Scalar::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    Some(acc)
}

pub(crate) fn as_small_int(q: &Scalar) -> Option<i64> {
    if q.is_integer() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

pub(crate) fn is_positive(q: &Scalar) -> bool {
    q.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.5"), Some(ratio(1, 2)));
        assert_eq!(parse_decimal("-1.25"), Some(ratio(-5, 4)));
        assert_eq!(parse_decimal("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_decimal("2e-2"), Some(ratio(1, 50)));
        assert_eq!(parse_decimal("7"), Some(int(7)));
        assert_eq!(parse_decimal("1/0"), None);
        assert_eq!(parse_decimal("abc"), None);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow_int(&ratio(2, 3), 3), Some(ratio(8, 27)));
        assert_eq!(pow_int(&ratio(2, 3), -2), Some(ratio(9, 4)));
        assert_eq!(pow_int(&int(0), -1), None);
        assert_eq!(pow_int(&int(0), 0), Some(int(1)));
    }
}

/// `q^e` when the result is rational, e.g. `4^(3/2) = 8`.
pub(crate) fn exact_pow(q: &Scalar, e: &Scalar) -> Option<Scalar> {
    if !q.is_positive() {
        return None;
    }
    let d = e.denom().to_u32().filter(|d| *d <= 16)?;
    let root = |n: &BigInt| {
        let r = n.nth_root(d);
        (num::pow(r.clone(), d as usize) == *n).then_some(r)
    };
    let base = Scalar::new(root(q.numer())?, root(q.denom())?);
    pow_int(&base, e.numer().to_i64()?)
}
