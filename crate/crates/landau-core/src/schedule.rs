//! The bound schedule governing the encoded function class.
//!
//! Streams encode analytic functions on the unit disc through the derivative
//! series `f′(z) = 1 + Σ_{n≥1} a_n z^n`, with coefficient `a_n` confined to
//! the square `[-m_n, m_n]^2`.  The schedule fixes, once and for all:
//!
//! * a constant `c = 1 + 2^-k` slightly above 1 (`k` is configurable and
//!   defaults to 100 at the CLI);
//! * the per-coefficient root-box half-widths `m_n`, dyadic numbers pinned to
//!   the window `c·e·(n+2)/2 ≤ m_n ≤ c·e·(n+2)/2 + 2^-n` — the linear growth
//!   rate comes from the classical coefficient bound for the normalised
//!   class, inflated by `c` so a dyadic value exists in every window;
//! * closed-form sup bounds `μ′_r ≥ sup_{|z|<r} |f′|` and
//!   `μ″_r ≥ sup_{|z|<r} |f″|` valid for *every* stream-encoded function
//!   (the `√2` factor accounts for box corners, where `|a_n|` reaches
//!   `√2·m_n`);
//! * a closed-form tail majorant for `Σ_{n>N} √2·m_n·r^n`, the quantity that
//!   controls truncation error in series evaluation.
//!
//! All four are computed as *directed* dyadic bounds: every rounding step
//! moves the result in the direction that keeps it a valid upper bound.
//! `m_n` is a pure function of `(c, n)` — it never depends on the working
//! precision of a particular evaluation — so cached and freshly computed
//! values can never disagree.

use crate::dyadic::{euler_enclosure, sqrt2_enclosure, Dyadic, Enclosure, Rounding};
use crate::error::Error;

/// Grid used for the directed reciprocals inside the closed-form bounds.
/// Any fixed, sufficiently fine grid works; the value is part of the
/// deterministic output contract.
const BOUND_GRID: i64 = -96;

/// Working precision of the stored `e` and `√2` enclosures.
const WORKING_PREC: u32 = 128;

/// Extra precision (beyond `n`) used when deriving `m_n`.
const M_GUARD_BITS: u32 = 40;

#[derive(Debug, Clone)]
pub struct BoundSchedule {
    c_exponent: u32,
    c: Dyadic,
    e_work: Enclosure,
    sqrt2_work: Enclosure,
}

impl BoundSchedule {
    /// Builds a schedule with `c = 1 + 2^-c_exponent`.
    pub fn new(c_exponent: u32) -> Self {
        let c = Dyadic::one() + Dyadic::two_pow(-(c_exponent as i64));
        BoundSchedule {
            c_exponent,
            c,
            e_work: euler_enclosure(WORKING_PREC),
            sqrt2_work: sqrt2_enclosure(WORKING_PREC),
        }
    }

    pub fn c_exponent(&self) -> u32 {
        self.c_exponent
    }

    /// The exact dyadic constant `c = 1 + 2^-k`.
    pub fn c(&self) -> &Dyadic {
        &self.c
    }

    /// Working-precision enclosure of Euler's number.
    pub fn e_enclosure(&self) -> &Enclosure {
        &self.e_work
    }

    /// Working-precision enclosure of `√2`.
    pub fn sqrt2_enclosure(&self) -> &Enclosure {
        &self.sqrt2_work
    }

    /// The root-box half-width `m_n` for coefficient `n ≥ 1`.
    ///
    /// Computed as `c · e_hi · (n+2)/2` rounded up to the grid `2^-(n+2)`,
    /// where `e_hi` comes from a fresh enclosure of `e` at precision
    /// `n + 40`.  This lands in the window `[c·e·(n+2)/2, c·e·(n+2)/2 + 2^-n]`:
    /// rounding up adds at most `2^-(n+2)` and the enclosure slack at most
    /// `c·(n+2)/2 · 2^-(n+41) < 2^-(n+34)`.
    pub fn coefficient_bound(&self, n: u64) -> Dyadic {
        assert!(n >= 1, "coefficients are indexed from 1");
        let prec = u32::try_from(n).unwrap_or(u32::MAX - M_GUARD_BITS) + M_GUARD_BITS;
        let e_hi = euler_enclosure(prec).hi;
        let x = &self.c * &e_hi * Dyadic::from_int(n as i64 + 2).half();
        x.round_to_grid(-(n as i64 + 2), Rounding::Up)
    }

    /// Upper bound `μ′_r` on `sup { |f′(z)| : |z| < r }`, valid for every
    /// stream-encoded function:
    /// `μ′_r = √2·( c·e/2·(1/(1-r) + 1/(1-r)^2) + (2 - c·e) )`,
    /// with every step rounded toward +∞.  Accepts `0 ≤ r < 1`.
    pub fn first_derivative_sup(&self, r: &Dyadic) -> Result<Dyadic, Error> {
        check_radius(r)?;
        let one_minus = Dyadic::one() - r;
        let u1 = Dyadic::div_to_grid(&Dyadic::one(), &one_minus, BOUND_GRID, Rounding::Up)?;
        let u2 = Dyadic::div_to_grid(
            &Dyadic::one(),
            &one_minus.square(),
            BOUND_GRID,
            Rounding::Up,
        )?;
        let ce_hi = &self.c * &self.e_work.hi;
        let ce_lo = &self.c * &self.e_work.lo;
        // (2 - c·e) is negative; using the lower enclosure endpoint keeps the
        // whole expression an upper bound.
        let inner = ce_hi.half() * (u1 + u2) + Dyadic::from_int(2) - ce_lo;
        Ok(&self.sqrt2_work.hi * &inner)
    }

    /// Upper bound `μ″_r` on `sup { |f″(z)| : |z| < r }`:
    /// `μ″_r = √2·( c·e/(1-r)^3 + c·e/(2·(1-r)^2) + 2 )`,
    /// rounded toward +∞.  Accepts `0 ≤ r < 1`.
    pub fn second_derivative_sup(&self, r: &Dyadic) -> Result<Dyadic, Error> {
        check_radius(r)?;
        let one_minus = Dyadic::one() - r;
        let u2 = Dyadic::div_to_grid(
            &Dyadic::one(),
            &one_minus.square(),
            BOUND_GRID,
            Rounding::Up,
        )?;
        let u3 = Dyadic::div_to_grid(&Dyadic::one(), &one_minus.pow(3), BOUND_GRID, Rounding::Up)?;
        let ce_hi = &self.c * &self.e_work.hi;
        let inner = &ce_hi * &u3 + ce_hi.half() * u2 + Dyadic::from_int(2);
        Ok(&self.sqrt2_work.hi * &inner)
    }

    /// Closed-form upper bound on the derivative-series tail
    /// `Σ_{n>N} √2·m_n·r^n`.
    ///
    /// From `m_n ≤ c·e·(n+2)/2 + 2^-n` and the differentiated geometric
    /// series:
    ///
    /// ```text
    /// Σ_{n>N} (n+2) r^n   = r^(N+1) · ((N+3)(1-r) + r) / (1-r)^2
    /// Σ_{n>N} 2^-n r^n    = (r/2)^(N+1) · 2/(2-r)
    /// ```
    ///
    /// The reciprocals `1/(1-r)^2` and `2/(2-r)` are rounded up once and held
    /// fixed across all `N`, which makes the bound *exactly* non-increasing
    /// in `N` (the ratio of consecutive polynomial factors is
    /// `r·[(N+4)(1-r)+r] / [(N+3)(1-r)+r] ≤ 1` because the difference of the
    /// two sides equals `(1-r)^2(N+3) ≥ 0`).  Accepts `0 ≤ r < 1`; `r = 0`
    /// yields exactly zero.
    pub fn tail_bound(&self, n_trunc: u64, r: &Dyadic) -> Result<Dyadic, Error> {
        check_radius(r)?;
        if r.is_zero() {
            return Ok(Dyadic::zero());
        }
        let one_minus = Dyadic::one() - r;
        let u2 = Dyadic::div_to_grid(
            &Dyadic::one(),
            &one_minus.square(),
            BOUND_GRID,
            Rounding::Up,
        )?;
        let ub2 = Dyadic::div_to_grid(
            &Dyadic::from_int(2),
            &(Dyadic::from_int(2) - r),
            BOUND_GRID,
            Rounding::Up,
        )?;
        let n3 = Dyadic::from_int(n_trunc as i64 + 3);
        let poly = &n3 * &one_minus + r;
        let r_pow = r.pow(n_trunc + 1);
        let rh_pow = r.half().pow(n_trunc + 1);
        let ce_hi = &self.c * &self.e_work.hi;
        let linear_part = ce_hi.half() * &r_pow * poly * u2;
        let geometric_part = &rh_pow * &ub2;
        Ok(&self.sqrt2_work.hi * &(linear_part + geometric_part))
    }
}

fn check_radius(r: &Dyadic) -> Result<(), Error> {
    if r.is_negative() || *r >= Dyadic::one() {
        return Err(Error::RadiusOutOfRange);
    }
    Ok(())
}

/// Where the sup bounds `μ′`, `μ″` used by a pipeline come from.
///
/// `Generic` derives them from the schedule's closed forms — always sound,
/// but so conservative near the boundary that grids become astronomically
/// large.  `Injected` substitutes caller-supplied bounds for a specific
/// function; they are sample-audited at the radius of use before anything
/// depends on them, and every certificate records which provider produced
/// its numbers.
#[derive(Debug, Clone)]
pub enum BoundsProvider {
    Generic,
    Injected {
        name: String,
        first_sup: Dyadic,
        second_sup: Dyadic,
    },
}

impl BoundsProvider {
    pub fn injected(name: impl Into<String>, first_sup: Dyadic, second_sup: Dyadic) -> Self {
        BoundsProvider::Injected {
            name: name.into(),
            first_sup,
            second_sup,
        }
    }

    pub fn is_injected(&self) -> bool {
        matches!(self, BoundsProvider::Injected { .. })
    }

    /// The `μ′` bound to use on the disc of radius `r`.
    pub fn first_sup(&self, schedule: &BoundSchedule, r: &Dyadic) -> Result<Dyadic, Error> {
        match self {
            BoundsProvider::Generic => schedule.first_derivative_sup(r),
            BoundsProvider::Injected { first_sup, .. } => Ok(first_sup.clone()),
        }
    }

    /// The `μ″` bound to use on the disc of radius `r_hat`.
    pub fn second_sup(&self, schedule: &BoundSchedule, r_hat: &Dyadic) -> Result<Dyadic, Error> {
        match self {
            BoundsProvider::Generic => schedule.second_derivative_sup(r_hat),
            BoundsProvider::Injected { second_sup, .. } => Ok(second_sup.clone()),
        }
    }

    /// Provenance string recorded in certificates.
    pub fn provenance(&self) -> String {
        match self {
            BoundsProvider::Generic => "generic-class-bounds".to_string(),
            BoundsProvider::Injected { name, .. } => format!("injected:{name}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    /// Exact comparison of a dyadic against the decimal rational p/q.
    fn cmp_decimal(d: &Dyadic, p: i128, q: i128) -> std::cmp::Ordering {
        // d <=> p/q  <=>  d*q <=> p  (q > 0)
        let dq = d * &Dyadic::new(BigInt::from(q), 0);
        dq.cmp(&Dyadic::new(BigInt::from(p), 0))
    }

    fn sched() -> BoundSchedule {
        BoundSchedule::new(100)
    }

    #[test]
    fn coefficient_bound_window_small_n() {
        let s = sched();
        let e = euler_enclosure(160);
        for n in 1..=16u64 {
            let m = s.coefficient_bound(n);
            // lower: m_n >= c*e*(n+2)/2 >= e_lo*(n+2)/2
            let lo = &e.lo * &Dyadic::from_int(n as i64 + 2).half();
            // upper: m_n <= c*e*(n+2)/2 + 2^-n <= c*e_hi*(n+2)/2 + 2^-n
            let hi = s.c() * &e.hi * Dyadic::from_int(n as i64 + 2).half()
                + Dyadic::two_pow(-(n as i64));
            assert!(m >= lo, "m_{n} below window");
            assert!(m <= hi, "m_{n} above window");
        }
    }

    #[test]
    fn coefficient_bound_examples() {
        let s = sched();
        // m_1 in [3e/2, 3e/2 + 1/2] ~ [4.0774, 4.5774]
        let m1 = s.coefficient_bound(1);
        assert_eq!(cmp_decimal(&m1, 40774, 10000), std::cmp::Ordering::Greater);
        assert_eq!(cmp_decimal(&m1, 45775, 10000), std::cmp::Ordering::Less);
        // m_2 in [2e, 2e + 1/4] ~ [5.4366, 5.6866]
        let m2 = s.coefficient_bound(2);
        assert_eq!(cmp_decimal(&m2, 54365, 10000), std::cmp::Ordering::Greater);
        assert_eq!(cmp_decimal(&m2, 56866, 10000), std::cmp::Ordering::Less);
        // Determinism: recomputation gives the identical dyadic.
        assert_eq!(m1, s.coefficient_bound(1));
    }

    #[test]
    fn first_derivative_sup_values() {
        let s = sched();
        let half = dy(1, -1);
        let mu = s.first_derivative_sup(&half).unwrap();
        // sqrt2*(2ce+2) = 10.5168891... ; our directed bound sits within 2^-90.
        assert_eq!(
            cmp_decimal(&mu, 10516889, 1000000),
            std::cmp::Ordering::Greater
        );
        assert_eq!(
            cmp_decimal(&mu, 10516890, 1000000),
            std::cmp::Ordering::Less
        );
        // r = 0 degenerates to 2*sqrt2 = 2.8284271...
        let mu0 = s.first_derivative_sup(&Dyadic::zero()).unwrap();
        assert_eq!(
            cmp_decimal(&mu0, 2828427, 1000000),
            std::cmp::Ordering::Greater
        );
        assert_eq!(
            cmp_decimal(&mu0, 2828428, 1000000),
            std::cmp::Ordering::Less
        );
        // Monotone in r.
        let mu34 = s.first_derivative_sup(&dy(3, -2)).unwrap();
        assert!(mu <= mu34);
        assert!(s.first_derivative_sup(&Dyadic::one()).is_err());
        assert!(s.first_derivative_sup(&dy(-1, -1)).is_err());
    }

    #[test]
    fn second_derivative_sup_values() {
        let s = sched();
        let half = dy(1, -1);
        let mu = s.second_derivative_sup(&half).unwrap();
        // sqrt2*(10ce+2) = 41.2707374...
        assert_eq!(
            cmp_decimal(&mu, 41270737, 1000000),
            std::cmp::Ordering::Greater
        );
        assert_eq!(
            cmp_decimal(&mu, 41270738, 1000000),
            std::cmp::Ordering::Less
        );
        // r = 0: sqrt2*(1.5e+2) = 8.5947737...
        let mu0 = s.second_derivative_sup(&Dyadic::zero()).unwrap();
        assert_eq!(
            cmp_decimal(&mu0, 8594773, 1000000),
            std::cmp::Ordering::Greater
        );
        assert_eq!(
            cmp_decimal(&mu0, 8594774, 1000000),
            std::cmp::Ordering::Less
        );
        assert!(mu0.is_positive());
    }

    #[test]
    fn tail_bound_properties() {
        let s = sched();
        let half = dy(1, -1);
        // Zero radius: empty tail.
        assert!(s.tail_bound(5, &Dyadic::zero()).unwrap().is_zero());
        // Exactly non-increasing in N.
        let mut prev = s.tail_bound(0, &half).unwrap();
        for n in 1..=40 {
            let next = s.tail_bound(n, &half).unwrap();
            assert!(next <= prev, "tail bound increased at N={n}");
            prev = next;
        }
        // Dominates a brute-force partial sum of the true series.
        let sqrt2_lo = &sqrt2_enclosure(96).lo;
        let mut partial = Dyadic::zero();
        for n in 1..=50u64 {
            partial = partial + sqrt2_lo * &s.coefficient_bound(n) * half.pow(n);
        }
        assert!(s.tail_bound(0, &half).unwrap() >= partial);
        // Eventually tiny.
        assert!(s.tail_bound(120, &half).unwrap() <= Dyadic::two_pow(-100));
    }

    #[test]
    fn bounds_provider_dispatch() {
        let s = sched();
        let half = dy(1, -1);
        let generic = BoundsProvider::Generic;
        assert_eq!(
            generic.first_sup(&s, &half).unwrap(),
            s.first_derivative_sup(&half).unwrap()
        );
        assert_eq!(generic.provenance(), "generic-class-bounds");
        let inj = BoundsProvider::injected("fixture", dy(2, 0), dy(1, -10));
        assert_eq!(inj.first_sup(&s, &half).unwrap(), dy(2, 0));
        assert_eq!(inj.second_sup(&s, &half).unwrap(), dy(1, -10));
        assert_eq!(inj.provenance(), "injected:fixture");
        assert!(inj.is_injected() && !generic.is_injected());
    }
}
