//! Exact scalar weights for probabilistic branching.
//!
//! Payload equality decides provable equivalence, so only exact number types
//! qualify. Floating point types are deliberately not `Weight`s.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Weight:
    Num + Signed + Clone + Ord + Hash + Debug + Display + Send + Sync + 'static
{
    fn from_rational(r: &BigRational) -> Option<Self>;
    fn to_rational(&self) -> BigRational;

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&BigRational::new(numer.into(), denom.into()))
            .expect("small ratio fits every weight type")
    }

    fn is_probability(&self) -> bool {
        !self.is_negative() && *self <= Self::one()
    }
}

impl Weight for BigRational {
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

macro_rules! machine_ratio_weight {
    ($($int:ty),*) => {$(
        impl Weight for Ratio<$int> {
            fn from_rational(r: &BigRational) -> Option<Self> {
                let numer = r.numer().to_string().parse::<$int>().ok()?;
                let denom = r.denom().to_string().parse::<$int>().ok()?;
                Some(Ratio::new(numer, denom))
            }

            fn to_rational(&self) -> BigRational {
                BigRational::new(
                    BigInt::from_i128(*self.numer() as i128).unwrap(),
                    BigInt::from_i128(*self.denom() as i128).unwrap(),
                )
            }
        }
    )*};
}

machine_ratio_weight!(i32, i64, i128);

/// Parses `p/q`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Invalid(format!("not an exact rational: `{text}`"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        return Ok(BigRational::new(int * &scale + frac, scale));
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Parses a probability in `[0, 1]` into the weight type `W`.
pub fn parse_probability<W: Weight>(text: &str) -> Result<W> {
    let r = parse_rational(text)?;
    if r.is_negative() || r > BigRational::one() {
        return Err(Error::MalformedPayload(format!(
            "probability `{text}` outside [0,1]"
        )));
    }
    W::from_rational(&r)
        .ok_or_else(|| Error::Invalid(format!("`{text}` does not fit the weight type")))
}

/// Approximate value, for display only.
pub fn approx<W: Weight>(w: &W) -> f64 {
    let r = w.to_rational();
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("1").unwrap(), q(1, 1));
        assert_eq!(parse_rational("2/6").unwrap(), q(1, 3));
    }

    #[test]
    fn rejects_malformed_numbers() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("0.3e1").is_err());
        assert!(parse_probability::<BigRational>("3/2").is_err());
        assert!(parse_probability::<BigRational>("-1/2").is_err());
    }

    #[test]
    fn machine_ratios_round_trip() {
        let w = <Ratio<i64> as Weight>::ratio(3, 9);
        assert_eq!(w, Ratio::new(1, 3));
        assert_eq!(w.to_rational(), q(1, 3));
        let huge = parse_rational("123456789012345678901234567890/7").unwrap();
        assert!(<Ratio<i64> as Weight>::from_rational(&huge).is_none());
    }
}
