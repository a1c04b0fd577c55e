//! Exact complex arithmetic over dyadic rationals.
//!
//! A [`ComplexDyadic`] is a pair of [`Dyadic`] components.  Addition,
//! subtraction, multiplication and negation are exact; modulus-related
//! queries go through the exact squared norm so that all comparisons against
//! radii can be decided without rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::dyadic::{Dyadic, Rounding};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ComplexDyadic {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl ComplexDyadic {
    pub fn new(re: Dyadic, im: Dyadic) -> Self {
        ComplexDyadic { re, im }
    }

    pub fn zero() -> Self {
        ComplexDyadic {
            re: Dyadic::zero(),
            im: Dyadic::zero(),
        }
    }

    pub fn one() -> Self {
        ComplexDyadic {
            re: Dyadic::one(),
            im: Dyadic::zero(),
        }
    }

    pub fn from_re(re: Dyadic) -> Self {
        ComplexDyadic {
            re,
            im: Dyadic::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Exact `|z|^2 = re^2 + im^2`.
    pub fn norm_sq(&self) -> Dyadic {
        self.re.square() + self.im.square()
    }

    /// Dyadic lower bound on `|z|`, within one step of the grid `2^grid`.
    pub fn abs_lower(&self, grid: i64) -> Dyadic {
        Dyadic::sqrt_to_grid(&self.norm_sq(), grid, Rounding::Down).expect("norm_sq >= 0")
    }

    /// Dyadic upper bound on `|z|`, within one step of the grid `2^grid`.
    pub fn abs_upper(&self, grid: i64) -> Dyadic {
        Dyadic::sqrt_to_grid(&self.norm_sq(), grid, Rounding::Up).expect("norm_sq >= 0")
    }

    /// Exact scaling by a dyadic factor.
    pub fn scale(&self, k: &Dyadic) -> ComplexDyadic {
        ComplexDyadic {
            re: &self.re * k,
            im: &self.im * k,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> ComplexDyadic {
        ComplexDyadic {
            re: self.re.mul_pow2(k),
            im: self.im.mul_pow2(k),
        }
    }

    pub fn conj(&self) -> ComplexDyadic {
        ComplexDyadic {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
}

impl Add<&ComplexDyadic> for &ComplexDyadic {
    type Output = ComplexDyadic;
    fn add(self, rhs: &ComplexDyadic) -> ComplexDyadic {
        ComplexDyadic {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub<&ComplexDyadic> for &ComplexDyadic {
    type Output = ComplexDyadic;
    fn sub(self, rhs: &ComplexDyadic) -> ComplexDyadic {
        ComplexDyadic {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul<&ComplexDyadic> for &ComplexDyadic {
    type Output = ComplexDyadic;
    fn mul(self, rhs: &ComplexDyadic) -> ComplexDyadic {
        ComplexDyadic {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &ComplexDyadic {
    type Output = ComplexDyadic;
    fn neg(self) -> ComplexDyadic {
        ComplexDyadic {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<ComplexDyadic> for ComplexDyadic {
            type Output = ComplexDyadic;
            fn $method(self, rhs: ComplexDyadic) -> ComplexDyadic {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Text format: `"RE,IM"` with each component in dyadic `MpE` notation.
impl fmt::Display for ComplexDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.re, self.im)
    }
}

impl FromStr for ComplexDyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let (re, im) = s.split_once(',').ok_or_else(|| {
            Error::Parse(format!(
                "invalid complex literal {s:?} (expected \"RE,IM\")"
            ))
        })?;
        Ok(ComplexDyadic {
            re: re.trim().parse()?,
            im: im.trim().parse()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    fn c(re: (i64, i64), im: (i64, i64)) -> ComplexDyadic {
        ComplexDyadic::new(dy(re.0, re.1), dy(im.0, im.1))
    }

    #[test]
    fn multiplication_is_exact() {
        // (1 + 2i)(3 - i) = 5 + 5i
        let a = c((1, 0), (2, 0));
        let b = c((3, 0), (-1, 0));
        assert_eq!(&a * &b, c((5, 0), (5, 0)));
        // i * i = -1
        let i = c((0, 0), (1, 0));
        assert_eq!(&i * &i, c((-1, 0), (0, 0)));
    }

    #[test]
    fn norm_and_abs_bounds() {
        let z = c((3, 0), (4, 0));
        assert_eq!(z.norm_sq(), dy(25, 0));
        assert_eq!(z.abs_lower(0), dy(5, 0));
        assert_eq!(z.abs_upper(0), dy(5, 0));
        let z = c((1, 0), (1, 0)); // |z| = sqrt 2
        let lo = z.abs_lower(-20);
        let hi = z.abs_upper(-20);
        assert!(lo.square() <= dy(2, 0) && dy(2, 0) <= hi.square());
        assert!(&hi - &lo <= Dyadic::two_pow(-20));
    }

    #[test]
    fn parse_round_trip() {
        let z: ComplexDyadic = "5p-4,-1p1".parse().unwrap();
        assert_eq!(z, c((5, -4), (-2, 0)));
        assert_eq!(z.to_string(), "5p-4,-1p1");
        assert!("5p-4".parse::<ComplexDyadic>().is_err());
    }
}
