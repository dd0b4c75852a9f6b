//! Exact rational arithmetic helpers. All numeric reasoning in this crate is
//! performed on arbitrary-precision rationals; floating point never appears.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_bigint(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Renders a rational without the `/1` suffix for integers.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn is_negative(r: &Rat) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_suppresses_unit_denominator() {
        assert_eq!(rat_str(&rat(3)), "3");
        assert_eq!(rat_str(&rat(-7)), "-7");
        assert_eq!(rat_str(&rat_frac(5, 2)), "5/2");
        assert_eq!(rat_str(&rat_frac(-1, 3)), "-1/3");
        assert_eq!(rat_str(&rat_frac(4, 2)), "2");
    }
}
