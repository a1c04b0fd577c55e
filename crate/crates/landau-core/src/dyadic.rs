//! Exact dyadic rational arithmetic with directed rounding.
//!
//! A dyadic rational is a number of the form `m * 2^e` with an
//! arbitrary-precision integer mantissa `m` and a machine-width exponent `e`.
//! The set of dyadics is closed under addition, subtraction, multiplication
//! and halving, so those operations are implemented exactly, with no rounding
//! whatsoever.  Division, square root and reciprocal are not closed; they are
//! provided as *grid-rounded* operations: the caller picks a grid `2^g` and a
//! rounding direction, and the result is the exact value rounded onto that
//! grid in the requested direction.  All certified bounds in this crate are
//! obtained by choosing the rounding direction that keeps the final
//! inequality valid.
//!
//! # Canonical form
//!
//! Every [`Dyadic`] keeps its mantissa odd (or zero, with exponent zero).
//! This makes structural equality coincide with numerical equality, so
//! dyadics can be hashed and used as exact map keys — lattice bookkeeping in
//! the covering-grid code relies on this.
//!
//! # Constants
//!
//! The two irrational constants needed elsewhere in the crate, `e` and `√2`,
//! are produced on demand as two-sided enclosures at any requested precision:
//! `e` from partial sums of `Σ 1/k!` with a factorial tail bound, `√2` from
//! the directed integer square root.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// Rounding direction for grid-rounded operations.
///
/// `Down` rounds toward −∞, `Up` toward +∞, and `Nearest` to the closest
/// grid point with ties toward +∞.  Directed variants are what downstream
/// certificates rely on: a `Down` result is a guaranteed lower bound for the
/// exact value and an `Up` result a guaranteed upper bound, each within one
/// grid step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

/// An exact dyadic rational `mantissa * 2^exponent` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

fn shl(m: &BigInt, k: i64) -> BigInt {
    debug_assert!(k >= 0, "negative shift");
    m << usize::try_from(k).expect("shift fits usize")
}

impl Dyadic {
    /// Builds a dyadic from any mantissa/exponent pair, normalising to
    /// canonical form (odd or zero mantissa; zero has exponent 0).
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Dyadic {
                mantissa,
                exponent: 0,
            };
        }
        let tz = mantissa.trailing_zeros().expect("nonzero") as i64;
        Dyadic {
            mantissa: &mantissa >> usize::try_from(tz).expect("shift fits usize"),
            exponent: exponent + tz,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    /// `2^e` as a dyadic.
    pub fn two_pow(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn from_int(i: i64) -> Self {
        Dyadic::new(BigInt::from(i), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Sign of the value: −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.mantissa.is_zero() {
            0
        } else if self.mantissa.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Exact halving (dyadics are closed under it).
    pub fn half(&self) -> Dyadic {
        self.mul_pow2(-1)
    }

    /// `floor(log2(self))` for a strictly positive value: the unique `k`
    /// with `2^k <= self < 2^(k+1)`.
    pub fn floor_log2(&self) -> i64 {
        assert!(self.is_positive(), "floor_log2 requires a positive value");
        (self.mantissa.bits() as i64 - 1) + self.exponent
    }

    /// `Some(e)` iff the value is exactly `2^e`.
    pub fn as_power_of_two(&self) -> Option<i64> {
        if self.mantissa.is_one() {
            Some(self.exponent)
        } else {
            None
        }
    }

    /// Exact square.
    pub fn square(&self) -> Dyadic {
        self * self
    }

    /// Exact `self^k` by binary exponentiation (`x^0 = 1`).
    pub fn pow(&self, k: u64) -> Dyadic {
        let mut result = Dyadic::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Rounds onto the grid `2^grid` in the given direction.  Exact when the
    /// value is already on the grid.
    pub fn round_to_grid(&self, grid: i64, mode: Rounding) -> Dyadic {
        // value / 2^grid = mantissa * 2^(exponent - grid); round that to an
        // integer q, result is q * 2^grid.
        let t = self.exponent - grid;
        if t >= 0 {
            // Already on the grid.
            return self.clone();
        }
        let den = BigInt::one() << usize::try_from(-t).expect("shift fits usize");
        let q = round_ratio(&self.mantissa, &den, mode);
        Dyadic::new(q, grid)
    }

    /// `num / den` rounded onto the grid `2^grid`.
    ///
    /// For `Down`/`Up` the result brackets the exact quotient within one grid
    /// step: `down <= num/den <= up` and `up - down <= 2^grid`.  For
    /// `Nearest` the error is at most `2^(grid-1)` (ties toward +∞).
    pub fn div_to_grid(
        num: &Dyadic,
        den: &Dyadic,
        grid: i64,
        mode: Rounding,
    ) -> Result<Dyadic, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // num/den / 2^grid = (m1 / m2) * 2^(e1 - e2 - grid) = a / b.
        let t = num.exponent - den.exponent - grid;
        let (mut a, mut b) = if t >= 0 {
            (shl(&num.mantissa, t), den.mantissa.clone())
        } else {
            (num.mantissa.clone(), shl(&den.mantissa, -t))
        };
        if b.is_negative() {
            a = -a;
            b = -b;
        }
        Ok(Dyadic::new(round_ratio(&a, &b, mode), grid))
    }

    /// Reciprocal rounded onto the grid `2^grid`.
    pub fn recip_to_grid(&self, grid: i64, mode: Rounding) -> Result<Dyadic, Error> {
        Dyadic::div_to_grid(&Dyadic::one(), self, grid, mode)
    }

    /// Square root rounded onto the grid `2^grid`.
    ///
    /// `Down` yields the largest grid point whose square does not exceed the
    /// radicand, `Up` the smallest grid point whose square is at least the
    /// radicand; `Nearest` picks the closer of the two (ties toward +∞).
    pub fn sqrt_to_grid(x: &Dyadic, grid: i64, mode: Rounding) -> Result<Dyadic, Error> {
        if x.is_negative() {
            return Err(Error::NegativeRadicand);
        }
        if x.is_zero() {
            return Ok(Dyadic::zero());
        }
        // floor(sqrt(x) / 2^g) = floor(sqrt(m * 2^(e - 2g))).  When the net
        // shift s = e - 2g is negative, use floor(sqrt(n) / 2^d) =
        // floor(floor(sqrt(n << 2d)) / 2^d) (floor composes with integer
        // division by a positive integer).
        let s = x.exponent - 2 * grid;
        let k_floor = if s >= 0 {
            shl(&x.mantissa, s).sqrt()
        } else {
            let d = -s;
            // floor(sqrt(m * 2^(-d))) = floor(isqrt(m << d) >> d)
            shl(&x.mantissa, d).sqrt() >> usize::try_from(d).expect("shift fits usize")
        };
        let lo = Dyadic::new(k_floor.clone(), grid);
        let exact = lo.square() == *x;
        let hi = if exact {
            lo.clone()
        } else {
            Dyadic::new(k_floor + BigInt::one(), grid)
        };
        Ok(match mode {
            Rounding::Down => lo,
            Rounding::Up => hi,
            Rounding::Nearest => {
                if exact {
                    lo
                } else {
                    // pick the endpoint whose square is closer to x; ties up.
                    let dl = x - &lo.square();
                    let dh = &hi.square() - x;
                    // sqrt(x) - lo <= hi - sqrt(x)  <=>  x - lo^2 <= hi^2 - x
                    // is not exactly equivalent, but comparing the squared
                    // gaps against the midpoint is: sqrt(x) closer to hi iff
                    // x > ((lo+hi)/2)^2.
                    let mid = (&lo + &hi).half();
                    if x > &mid.square() {
                        hi
                    } else if x < &mid.square() {
                        lo
                    } else {
                        // tie toward +∞
                        let _ = (dl, dh);
                        hi
                    }
                }
            }
        })
    }

    /// `floor(log2(num/den))` for strictly positive `num`, `den`.
    pub fn ratio_floor_log2(num: &Dyadic, den: &Dyadic) -> i64 {
        assert!(num.is_positive() && den.is_positive());
        let a = &num.mantissa;
        let b = &den.mantissa;
        let t = a.bits() as i64 - b.bits() as i64;
        // a/b ∈ [2^(t-1), 2^(t+1)); resolve between t-1 and t exactly.
        let ge = if t >= 0 {
            *a >= shl(b, t)
        } else {
            shl(a, -t) >= *b
        };
        let base = if ge { t } else { t - 1 };
        base + num.exponent - den.exponent
    }

    /// `floor(num/den)` as a big integer.
    pub fn ratio_floor(num: &Dyadic, den: &Dyadic) -> Result<BigInt, Error> {
        let q = Dyadic::div_to_grid(num, den, 0, Rounding::Down)?;
        Ok(shl(&q.mantissa, q.exponent))
    }

    /// Approximate `f64` rendering.  For human-facing summaries only — the
    /// conversion rounds and may overflow to ±∞ for extreme exponents.
    pub fn to_f64(&self) -> f64 {
        let m = self.mantissa.to_f64().unwrap_or(f64::NAN);
        let e = self.exponent.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        m * 2f64.powi(e)
    }
}

/// Rounds the exact rational `a / b` (with `b > 0`) to an integer.
fn round_ratio(a: &BigInt, b: &BigInt, mode: Rounding) -> BigInt {
    debug_assert!(b.is_positive());
    match mode {
        Rounding::Down => a.div_floor(b),
        Rounding::Up => a.div_ceil(b),
        // floor((2a + b) / 2b) rounds to nearest with ties toward +∞.
        Rounding::Nearest => ((a << 1usize) + b).div_floor(&(b << 1usize)),
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        // Align exponents and compare mantissas exactly.
        let e = self.exponent.min(other.exponent);
        let ma = shl(&self.mantissa, self.exponent - e);
        let mb = shl(&other.mantissa, other.exponent - e);
        ma.cmp(&mb)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
        impl $trait<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$method(&rhs)
            }
        }
    };
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        Dyadic::new(
            shl(&self.mantissa, self.exponent - e) + shl(&rhs.mantissa, rhs.exponent - e),
            e,
        )
    }
}
forward_binop!(Add, add);

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        Dyadic::new(
            shl(&self.mantissa, self.exponent - e) - shl(&rhs.mantissa, rhs.exponent - e),
            e,
        )
    }
}
forward_binop!(Sub, sub);

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // odd * odd = odd: canonical form is preserved without re-normalising.
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}
forward_binop!(Mul, mul);

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl From<i64> for Dyadic {
    fn from(i: i64) -> Self {
        Dyadic::from_int(i)
    }
}

impl From<BigInt> for Dyadic {
    fn from(m: BigInt) -> Self {
        Dyadic::new(m, 0)
    }
}

/// Text format: `"MpE"` for `M * 2^E`, e.g. `"5p-4"` for `5/16`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}p{}", self.mantissa, self.exponent)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Parses `"MpE"`; a bare integer `"M"` is accepted as `M * 2^0`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid dyadic literal {s:?} (expected \"MpE\")"));
        let (m_str, e_str) = match s.split_once('p') {
            Some((m, e)) => (m, Some(e)),
            None => (s, None),
        };
        let mantissa = BigInt::from_str(m_str).map_err(|_| bad())?;
        let exponent = match e_str {
            Some(e) => i64::from_str(e).map_err(|_| bad())?,
            None => 0,
        };
        Ok(Dyadic::new(mantissa, exponent))
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A closed interval `[lo, hi]` of dyadics used as a two-sided enclosure of
/// a real number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Enclosure {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    pub fn point(x: Dyadic) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.lo <= *x && *x <= self.hi
    }
}

/// Two-sided enclosure of Euler's number `e` with width at most `2^-(p+1)`.
///
/// Uses `e = Σ_{k<=K} 1/k! + R_K` with `0 < R_K < 2/(K+1)!` and picks the
/// smallest `K` with `(K+1)! >= 2^(p+3)`.  The partial sum is evaluated as a
/// single exact rational `A / K!` and bracketed by directed division at grid
/// `2^-(p+2)`; the tail bound is absorbed into the upper endpoint.
pub fn euler_enclosure(p: u32) -> Enclosure {
    let target = BigInt::one() << (p as usize + 3);
    let mut k: u64 = 0;
    let mut fact_k1 = BigInt::one(); // (k+1)!
    while fact_k1 < target {
        k += 1;
        fact_k1 *= k + 1;
    }
    // A = Σ_{j=0..K} K!/j!, accumulated from the smallest term upward.
    let mut term = BigInt::one(); // K!/K!
    let mut sum = BigInt::one();
    for j in (1..=k).rev() {
        term *= j;
        sum += &term;
    }
    let kfact = if k == 0 { BigInt::one() } else { term };
    let num = Dyadic::new(sum, 0);
    let den = Dyadic::new(kfact, 0);
    let grid = -(p as i64 + 2);
    let lo = Dyadic::div_to_grid(&num, &den, grid, Rounding::Down).expect("den > 0");
    let hi = Dyadic::div_to_grid(&num, &den, grid, Rounding::Up).expect("den > 0")
        + Dyadic::two_pow(grid);
    Enclosure::new(lo, hi)
}

/// Two-sided enclosure of `√2` with width at most `2^-(p+1)`.
pub fn sqrt2_enclosure(p: u32) -> Enclosure {
    let two = Dyadic::from_int(2);
    let grid = -(p as i64 + 1);
    let lo = Dyadic::sqrt_to_grid(&two, grid, Rounding::Down).expect("nonnegative");
    let hi = Dyadic::sqrt_to_grid(&two, grid, Rounding::Up).expect("nonnegative");
    Enclosure::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    fn to_ratio(d: &Dyadic) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        let base = BigRational::from_integer(d.mantissa().clone());
        let mut r = base;
        if d.exponent() >= 0 {
            for _ in 0..d.exponent() {
                r *= two.clone();
            }
        } else {
            for _ in 0..(-d.exponent()) {
                r /= two.clone();
            }
        }
        r
    }

    #[test]
    fn canonical_form() {
        let d = dy(4, 0);
        assert_eq!(d.mantissa(), &BigInt::from(1));
        assert_eq!(d.exponent(), 2);
        let z = dy(0, 7);
        assert!(z.is_zero());
        assert_eq!(z.exponent(), 0);
        assert_eq!(dy(-12, -1), dy(-3, 1));
    }

    #[test]
    fn ring_op_examples() {
        // 1*2^0 + 1*2^-1 = 3*2^-1
        assert_eq!(dy(1, 0) + dy(1, -1), dy(3, -1));
        // x + 0 = x
        let x = dy(-7, 3);
        assert_eq!(&x + &Dyadic::zero(), x);
        // (3*2^-2) * (-1*2^1) = -3*2^-1
        assert_eq!(dy(3, -2) * dy(-1, 1), dy(-3, -1));
    }

    #[test]
    fn division_examples() {
        // 1/3 rounded down on grid 2^-4 is 5*2^-4 = 0.3125.
        let q = Dyadic::div_to_grid(&dy(1, 0), &dy(3, 0), -4, Rounding::Down).unwrap();
        assert_eq!(q, dy(5, -4));
        assert_eq!(q.to_string(), "5p-4");
        // Rounded up: 6*2^-4 = 3*2^-3.
        let q = Dyadic::div_to_grid(&dy(1, 0), &dy(3, 0), -4, Rounding::Up).unwrap();
        assert_eq!(q, dy(3, -3));
        // Nearest: 16/3 = 5.33 -> 5.
        let q = Dyadic::div_to_grid(&dy(1, 0), &dy(3, 0), -4, Rounding::Nearest).unwrap();
        assert_eq!(q, dy(5, -4));
        // Negative divisor is normalised.
        let q = Dyadic::div_to_grid(&dy(1, 0), &dy(-3, 0), -4, Rounding::Down).unwrap();
        assert_eq!(q, dy(-6, -4));
        assert!(matches!(
            Dyadic::div_to_grid(&dy(1, 0), &Dyadic::zero(), -4, Rounding::Down),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn sqrt_examples() {
        // sqrt(4) is exact at any grid.
        let q = Dyadic::sqrt_to_grid(&dy(4, 0), -20, Rounding::Up).unwrap();
        assert_eq!(q, dy(2, 0));
        // floor(sqrt(2)) on grid 2^-7 = 181*2^-7; |181/128 - sqrt2| < 2^-8.
        let q = Dyadic::sqrt_to_grid(&dy(2, 0), -7, Rounding::Down).unwrap();
        assert_eq!(q, dy(181, -7));
        let q = Dyadic::sqrt_to_grid(&dy(2, 0), -7, Rounding::Up).unwrap();
        assert_eq!(q, dy(182, -7));
        assert!(matches!(
            Dyadic::sqrt_to_grid(&dy(-1, 0), 0, Rounding::Down),
            Err(Error::NegativeRadicand)
        ));
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["5p-4", "-1p1", "0p0", "3p-1", "12345678901234567890123p-61"] {
            let d: Dyadic = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        // Non-canonical input parses to canonical form.
        let d: Dyadic = "4p-1".parse().unwrap();
        assert_eq!(d.to_string(), "1p1");
        let d: Dyadic = "7".parse().unwrap();
        assert_eq!(d, dy(7, 0));
        assert!("xp2".parse::<Dyadic>().is_err());
        assert!("1p".parse::<Dyadic>().is_err());
        assert!("1.5".parse::<Dyadic>().is_err());
    }

    #[test]
    fn floor_log2_and_power_of_two() {
        assert_eq!(dy(1, 0).floor_log2(), 0);
        assert_eq!(dy(3, -2).floor_log2(), -1); // 0.75 lies in [2^-1, 2^0)
        assert_eq!(dy(5, 0).floor_log2(), 2);
        assert_eq!(dy(1, -9).as_power_of_two(), Some(-9));
        assert_eq!(dy(3, -9).as_power_of_two(), None);
        assert_eq!(Dyadic::ratio_floor_log2(&dy(1, 0), &dy(3, 0)), -2); // 1/3 in [2^-2, 2^-1)
        assert_eq!(Dyadic::ratio_floor_log2(&dy(1, 1), &dy(1, 0)), 1);
        assert_eq!(Dyadic::ratio_floor_log2(&dy(7, 0), &dy(1, 0)), 2);
    }

    #[test]
    fn grid_rounding() {
        let x = dy(5, -4); // 0.3125
        assert_eq!(x.round_to_grid(-2, Rounding::Down), dy(1, -2));
        assert_eq!(x.round_to_grid(-2, Rounding::Up), dy(1, -1));
        assert_eq!(x.round_to_grid(-2, Rounding::Nearest), dy(1, -2));
        // tie: 0.375 at grid 2^-2 -> up
        assert_eq!(dy(3, -3).round_to_grid(-2, Rounding::Nearest), dy(1, -1));
        // negative value floor
        assert_eq!(dy(-5, -4).round_to_grid(-2, Rounding::Down), dy(-1, -1));
    }

    #[test]
    fn euler_enclosure_brackets_e() {
        // 2.718281828459045235360287 < e < 2.718281828459045235360288
        let enc = euler_enclosure(64);
        assert!(enc.width() <= Dyadic::two_pow(-65));
        // Compare against decimal rationals via exact arithmetic.
        let lo_ref = BigRational::new(
            BigInt::from(2718281828459045235u64),
            BigInt::from(1000000000000000000u64),
        );
        let hi_ref = BigRational::new(
            BigInt::from(2718281828459045236u64),
            BigInt::from(1000000000000000000u64),
        );
        assert!(to_ratio(&enc.lo) < hi_ref);
        assert!(to_ratio(&enc.hi) > lo_ref);
        // Enclosures at increasing precision nest around the same value.
        let wide = euler_enclosure(10);
        assert!(wide.lo <= enc.lo && enc.hi <= wide.hi);
    }

    #[test]
    fn sqrt2_enclosure_brackets_sqrt2() {
        let enc = sqrt2_enclosure(64);
        assert!(enc.width() <= Dyadic::two_pow(-65));
        // lo^2 < 2 < hi^2
        assert!(enc.lo.square() < dy(2, 0));
        assert!(enc.hi.square() > dy(2, 0));
    }

    proptest! {
        #[test]
        fn ring_ops_agree_with_rationals(
            m1 in -1_000_000i64..1_000_000,
            e1 in -40i64..40,
            m2 in -1_000_000i64..1_000_000,
            e2 in -40i64..40,
        ) {
            let a = dy(m1, e1);
            let b = dy(m2, e2);
            let (ra, rb) = (to_ratio(&a), to_ratio(&b));
            prop_assert_eq!(to_ratio(&(&a + &b)), &ra + &rb);
            prop_assert_eq!(to_ratio(&(&a - &b)), &ra - &rb);
            prop_assert_eq!(to_ratio(&(&a * &b)), &ra * &rb);
            prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
        }

        #[test]
        fn directed_division_brackets(
            m1 in -1_000_000i64..1_000_000,
            m2 in 1i64..1_000_000,
            g in -60i64..4,
        ) {
            let a = dy(m1, 0);
            let b = dy(m2, 0);
            let lo = Dyadic::div_to_grid(&a, &b, g, Rounding::Down).unwrap();
            let hi = Dyadic::div_to_grid(&a, &b, g, Rounding::Up).unwrap();
            let exact = to_ratio(&a) / to_ratio(&b);
            prop_assert!(to_ratio(&lo) <= exact);
            prop_assert!(exact <= to_ratio(&hi));
            prop_assert!(&hi - &lo <= Dyadic::two_pow(g));
            // Exactly representable quotients are returned exactly.
            if (&exact * to_ratio(&Dyadic::two_pow(-g))).is_integer() {
                prop_assert_eq!(to_ratio(&lo), exact.clone());
                prop_assert_eq!(to_ratio(&hi), exact);
            }
            let near = Dyadic::div_to_grid(&a, &b, g, Rounding::Nearest).unwrap();
            prop_assert!(near == lo || near == hi);
        }

        #[test]
        fn directed_sqrt_brackets(
            m in 0i64..1_000_000_000,
            e in -30i64..10,
            g in -40i64..2,
        ) {
            let x = dy(m, e);
            let lo = Dyadic::sqrt_to_grid(&x, g, Rounding::Down).unwrap();
            let hi = Dyadic::sqrt_to_grid(&x, g, Rounding::Up).unwrap();
            prop_assert!(lo.square() <= x);
            prop_assert!(hi.square() >= x);
            prop_assert!(&hi - &lo <= Dyadic::two_pow(g));
            prop_assert!(!lo.is_negative());
        }

        #[test]
        fn grid_rounding_brackets(
            m in -1_000_000i64..1_000_000,
            e in -40i64..10,
            g in -30i64..10,
        ) {
            let x = dy(m, e);
            let lo = x.round_to_grid(g, Rounding::Down);
            let hi = x.round_to_grid(g, Rounding::Up);
            prop_assert!(lo <= x && x <= hi);
            prop_assert!(&hi - &lo <= Dyadic::two_pow(g));
            let near = x.round_to_grid(g, Rounding::Nearest);
            let err = (&near - &x).abs();
            prop_assert!(err <= Dyadic::two_pow(g - 1));
        }

        #[test]
        fn parse_round_trip_random(m in any::<i64>(), e in -200i64..200) {
            let d = dy(m, e);
            let s = d.to_string();
            let back: Dyadic = s.parse().unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
