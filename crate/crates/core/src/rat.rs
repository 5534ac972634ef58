//! Exact rational scalars.
//!
//! `Rat` is arbitrary precision, always in lowest terms with positive
//! denominator. Serialized form is `"p/q"`, or `"p"` when the denominator
//! is 1.

use crate::error::Error;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// 1/n!
pub fn inv_factorial(n: u32) -> Rat {
    let mut f = BigInt::one();
    for i in 2..=n as u64 {
        f *= i;
    }
    Rat::new(BigInt::one(), f)
}

/// Bernoulli numbers with the `B_1 = -1/2` convention, via the
/// defining recurrence `sum_{j<=m} C(m+1, j) B_j = 0`.
pub fn bernoulli(upto: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(upto + 1);
    for m in 0..=upto {
        if m == 0 {
            b.push(one());
            continue;
        }
        // B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j
        let mut acc = zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rat::from_integer(binomial(m as u64 + 1, j as u64)) * bj;
        }
        b.push(-acc / int(m as i64 + 1));
    }
    b
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn format(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator {s:?}")))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator {s:?}")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_parse_roundtrip() {
        for r in [int(0), int(7), int(-3), frac(1, 2), frac(-22, 7)] {
            assert_eq!(parse(&format(&r)).unwrap(), r);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("1/y").is_err());
    }

    #[test]
    fn lowest_terms() {
        let r = frac(4, 6);
        assert_eq!(format(&r), "2/3");
        let r = frac(3, -6);
        assert_eq!(format(&r), "-1/2");
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(6);
        assert_eq!(b[0], int(1));
        assert_eq!(b[1], frac(-1, 2));
        assert_eq!(b[2], frac(1, 6));
        assert_eq!(b[3], int(0));
        assert_eq!(b[4], frac(-1, 30));
        assert_eq!(b[5], int(0));
        assert_eq!(b[6], frac(1, 42));
    }
}
