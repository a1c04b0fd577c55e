//! Rigorous evaluation of stream-encoded series at dyadic points.
//!
//! A stream encodes `f′(z) = 1 + Σ_{n≥1} a_n z^n`.  This module evaluates,
//! to a caller-chosen absolute tolerance, one of three associated functions
//! on a closed disc `|z| ≤ r` (the *shell*, `0 ≤ r < 1`):
//!
//! * [`EvalOrder::Value`] — `f′(z)` itself;
//! * [`EvalOrder::Antiderivative`] — `f(z) = z + Σ_{n≥1} a_n z^{n+1}/(n+1)`,
//!   the normalised primitive with `f(0) = 0`, `f′(0) = 1`;
//! * [`EvalOrder::Derivative(d)`] — the `d`-th derivative of `f′` (`d ≥ 1`).
//!
//! # Error budget
//!
//! The returned point `v` satisfies `|v − F(z)| ≤ tol` where `F` is the
//! selected function of the encoded stream.  The budget is split so that
//! every contribution is bounded by an exactly-verified dyadic inequality:
//!
//! * truncation of the series after `N` terms — at most `tol/2`, with `N`
//!   chosen minimal against the monotone class tail bound;
//! * coefficient uncertainty — each `a_n` is read to `k` quadrant digits
//!   and replaced by its box centre; the digit depth `k` is chosen so the
//!   summed effect is at most `tol/8`;
//! * antiderivative division rounding (`q_n = ĉ_n/(n+1)`) — at most
//!   `tol/16`;
//! * evaluation arithmetic — `0` on the exact path, at most `tol/8` on the
//!   fixed-point fast path (the fast path is only enabled when that holds).
//!
//! The total is at most `13/16·tol < tol`.  An even split between
//! truncation and the remaining sources would work as well; the skew toward
//! truncation keeps `N` (and with it the stream query depth and per-point
//! cost) lower at an immaterial cost in digit depth.
//!
//! # Preparation versus evaluation
//!
//! [`SeriesApproximation::prepare`] does all stream reading and budget
//! selection once; [`SeriesApproximation::eval`] is then a pure function of
//! the prepared data, safe to call from many threads in parallel.  Pipelines
//! exploit this split: preparation is instrumented and single-threaded,
//! bulk evaluation is embarrassingly parallel and touches no stream.
//!
//! Path selection inside `eval` depends only on the prepared data and the
//! input point, never on timing or thread identity, so results are
//! bit-for-bit deterministic.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::ComplexDyadic;
use crate::dyadic::{Dyadic, Rounding};
use crate::error::Error;
use crate::schedule::BoundSchedule;
use crate::stream::{coefficient_box, PiStream};

/// Hard cap on the truncation order; tolerances needing more terms are
/// rejected as infeasible rather than ground through.
const MAX_TRUNCATION_ORDER: u64 = 200_000;

/// Grid for directed divisions in budget arithmetic (2^-96 resolution).
const BUDGET_GRID: i64 = -96;

/// Which function of the encoded series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOrder {
    /// The normalised antiderivative `f` with `f(0) = 0`, `f′(0) = 1`.
    Antiderivative,
    /// The encoded series `f′` itself.
    Value,
    /// The `d`-th derivative of `f′` (`d ≥ 1`).
    Derivative(u32),
}

/// A single evaluation request.
#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub order: EvalOrder,
    pub z: ComplexDyadic,
    pub tol: Dyadic,
}

/// Fixed-point evaluation plan: polynomial coefficients scaled by `2^w`.
#[derive(Debug, Clone)]
struct FastPlan {
    w: u32,
    coeffs: Vec<(i128, i128)>,
}

/// A prepared polynomial approximation of one function on one shell.
///
/// Preparation reads the stream (recording queries); evaluation is pure.
#[derive(Debug, Clone)]
pub struct SeriesApproximation {
    order: EvalOrder,
    shell: Dyadic,
    shell_sq: Dyadic,
    tol: Dyadic,
    truncation_order: u64,
    digit_depth: u32,
    /// Polynomial coefficients `C[j]` of the inner polynomial `Σ C[j] z^j`.
    coeffs: Vec<ComplexDyadic>,
    /// Whether the result is `z·P(z)` (antiderivative) rather than `P(z)`.
    trailing_mul_z: bool,
    fast: Option<FastPlan>,
}

/// Product `n·(n−1)···(n−d+1)` (the falling factorial, `d` factors).
fn falling(n: u64, d: u32) -> BigInt {
    (0..d as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

/// Upper bound on the truncation error of dropping all series terms with
/// index `> n_trunc`, for the requested order, on the shell of radius `r`.
fn truncation_error(
    schedule: &BoundSchedule,
    order: EvalOrder,
    r: &Dyadic,
    n_trunc: u64,
) -> Result<Dyadic, Error> {
    match order {
        // |Σ_{n>N} a_n z^n| ≤ tail(N, r); the antiderivative terms
        // a_n z^{n+1}/(n+1) are no larger than a_n z^n in modulus on r < 1.
        EvalOrder::Value | EvalOrder::Antiderivative => schedule.tail_bound(n_trunc, r),
        // Cauchy estimate: the dropped tail h(z) = Σ_{n>N} a_n z^n is
        // bounded by tail(N, s) on the larger disc s = (1+r)/2, hence its
        // d-th derivative on |z| ≤ r is at most d!·tail(N, s)/((s−r))^d
        // with s − r = (1−r)/2.
        EvalOrder::Derivative(d) => {
            assert!(d >= 1, "derivative order must be at least 1");
            let s = (&Dyadic::one() + r).half();
            let tail = schedule.tail_bound(n_trunc, &s)?;
            let gap = (&Dyadic::one() - r).half();
            let gap_pow = gap.pow(d as u64);
            let inv_gap = Dyadic::div_to_grid(&Dyadic::one(), &gap_pow, BUDGET_GRID, Rounding::Up)?;
            Ok(&(&Dyadic::from(falling(d as u64, d)) * &tail) * &inv_gap)
        }
    }
}

/// Smallest truncation order whose tail error is at most `target`.
///
/// The tail bound is non-increasing in the truncation order, so a doubling
/// bracket followed by binary search finds the minimum.  Orders beyond
/// [`MAX_TRUNCATION_ORDER`] are refused as [`Error::ToleranceTooTight`].
fn select_truncation(
    schedule: &BoundSchedule,
    order: EvalOrder,
    r: &Dyadic,
    target: &Dyadic,
) -> Result<u64, Error> {
    let err = |n: u64| truncation_error(schedule, order, r, n);
    if &err(0)? <= target {
        return Ok(0);
    }
    let mut hi = 1u64;
    while &err(hi)? > target {
        hi *= 2;
        if hi > MAX_TRUNCATION_ORDER {
            return Err(Error::ToleranceTooTight(MAX_TRUNCATION_ORDER));
        }
    }
    let mut lo = hi / 2; // err(lo) > target, err(hi) ≤ target
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if &err(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

impl SeriesApproximation {
    /// Reads the stream and fixes every budget for evaluating `order` on
    /// `|z| ≤ shell` to absolute tolerance `tol`.
    ///
    /// Stream queries happen only here.  Fails with
    /// [`Error::RadiusOutOfRange`] unless `0 ≤ shell < 1`, and with
    /// [`Error::ToleranceTooTight`] when the truncation order would exceed
    /// the hard cap.
    pub fn prepare(
        s: &PiStream,
        schedule: &BoundSchedule,
        order: EvalOrder,
        shell: &Dyadic,
        tol: &Dyadic,
    ) -> Result<Self, Error> {
        assert!(tol.is_positive(), "tolerance must be positive");
        if let EvalOrder::Derivative(d) = order {
            assert!(d >= 1, "derivative order must be at least 1");
        }
        // Truncation: tail after N terms ≤ tol/2 (also validates the shell).
        let n_trunc = select_truncation(schedule, order, shell, &tol.half())?;

        // Digit depth: reading each coefficient to k digits perturbs term n
        // by at most √2·m_n·2^-k·W_n, where W_n bounds the weight the term
        // carries at |z| ≤ r.  A uniform k with
        //     √2·max_n(m_n·W_n)·N·2^-k ≤ tol/8
        // caps the summed effect by tol/8.  All quantities are dyadic, so
        // the inequality is checked exactly.
        let sqrt2_up = schedule.sqrt2_enclosure().hi.clone();
        let mut weighted_max = Dyadic::zero();
        let mut r_pow = Dyadic::one(); // r^n, maintained incrementally
        for n in 1..=n_trunc {
            r_pow = &r_pow * shell;
            let m_n = schedule.coefficient_bound(n);
            let w_n = match order {
                // |z^n| ≤ r^n; |z^{n+1}/(n+1)| ≤ r^n as well.
                EvalOrder::Value | EvalOrder::Antiderivative => r_pow.clone(),
                EvalOrder::Derivative(d) => {
                    if n < d as u64 {
                        continue; // term differentiates away entirely
                    }
                    // weight n(n−1)···(n−d+1)·r^{n−d}, with r^0 = 1 even at
                    // r = 0 (dividing r_pow back down is not exact in
                    // general, so compute the lower power directly).
                    &Dyadic::from(falling(n, d)) * &shell.pow(n - d as u64)
                }
            };
            let b_n = &m_n * &w_n;
            if b_n > weighted_max {
                weighted_max = b_n;
            }
        }
        let tol_eighth = tol.mul_pow2(-3);
        let digit_depth = if n_trunc == 0 || weighted_max.is_zero() {
            0
        } else {
            let budget_num = &(&sqrt2_up * &weighted_max) * &Dyadic::from_int(n_trunc as i64);
            let mut k = if budget_num <= tol_eighth {
                0i64
            } else {
                Dyadic::ratio_floor_log2(&budget_num, &tol_eighth) + 1
            };
            // Make k minimal (the log estimate can overshoot by one).
            while k > 0 && budget_num.mul_pow2(-(k - 1)) <= tol_eighth {
                k -= 1;
            }
            assert!(budget_num.mul_pow2(-k) <= tol_eighth);
            k as u32
        };

        // Read the coefficient boxes and take their centres.
        let mut centres = Vec::with_capacity(n_trunc as usize);
        for n in 1..=n_trunc {
            centres.push(coefficient_box(s, schedule, n, digit_depth).centre());
        }

        // Assemble the inner polynomial for the requested order.
        let mut coeffs: Vec<ComplexDyadic>;
        let trailing_mul_z;
        match order {
            EvalOrder::Value => {
                coeffs = Vec::with_capacity(centres.len() + 1);
                coeffs.push(ComplexDyadic::one());
                coeffs.extend(centres.iter().cloned());
                trailing_mul_z = false;
            }
            EvalOrder::Antiderivative => {
                // f(z) = z·(1 + Σ q_n z^n) with q_n = ĉ_n/(n+1), divisions
                // rounded to nearest on a grid fine enough that the N
                // rounded divisions cost at most tol/16 in total:
                //     √2·N·2^{g−1} ≤ tol/16.
                coeffs = Vec::with_capacity(centres.len() + 1);
                coeffs.push(ComplexDyadic::one());
                if n_trunc > 0 {
                    let tol_16 = tol.mul_pow2(-4);
                    let scaled_n = &sqrt2_up * &Dyadic::from_int(n_trunc as i64);
                    let mut g = Dyadic::ratio_floor_log2(&tol_16, &scaled_n) + 1;
                    while scaled_n.mul_pow2(g - 1) > tol_16 {
                        g -= 1;
                    }
                    assert!(scaled_n.mul_pow2(g - 1) <= tol_16);
                    for (i, c) in centres.iter().enumerate() {
                        let den = Dyadic::from_int(i as i64 + 2);
                        coeffs.push(ComplexDyadic::new(
                            Dyadic::div_to_grid(&c.re, &den, g, Rounding::Nearest)?,
                            Dyadic::div_to_grid(&c.im, &den, g, Rounding::Nearest)?,
                        ));
                    }
                }
                trailing_mul_z = true;
            }
            EvalOrder::Derivative(d) => {
                let d64 = d as u64;
                coeffs = Vec::new();
                if n_trunc >= d64 {
                    for n in d64..=n_trunc {
                        let factor = Dyadic::from(falling(n, d));
                        coeffs.push(centres[(n - 1) as usize].scale(&factor));
                    }
                }
                trailing_mul_z = false;
            }
        }

        let fast = Self::build_fast_plan(&coeffs, shell, tol);

        Ok(SeriesApproximation {
            order,
            shell: shell.clone(),
            shell_sq: shell.square(),
            tol: tol.clone(),
            truncation_order: n_trunc,
            digit_depth,
            coeffs,
            trailing_mul_z,
            fast,
        })
    }

    /// Builds the fixed-point plan when its rigorously-bounded rounding
    /// error fits in the `tol/8` arithmetic budget; otherwise evaluation
    /// falls back to exact dyadic arithmetic.
    ///
    /// With `w` fractional bits, Horner over `|z| ≤ r` loses at most
    /// `2^-w` per step to the post-multiply shift and `2^-w` per
    /// coefficient to pre-rounding; both geometric sums are bounded by
    /// `U1 = 1/(1−r)` giving a total of `2·U1·2^-w`.  We also require
    /// `U1 ≤ 2^{w−1}` (so the accumulated error stays below 1) and that
    /// every intermediate, bounded by `V = (Mmax+1)·U1 + 2` in modulus,
    /// fits scaled in 62 bits so that i128 products cannot overflow.
    fn build_fast_plan(coeffs: &[ComplexDyadic], shell: &Dyadic, tol: &Dyadic) -> Option<FastPlan> {
        if coeffs.is_empty() {
            return None;
        }
        let one = Dyadic::one();
        let gap = &one - shell;
        if !gap.is_positive() {
            return None;
        }
        let u1 = Dyadic::div_to_grid(&one, &gap, BUDGET_GRID, Rounding::Up).ok()?;
        let m_max = coeffs
            .iter()
            .map(|c| &c.re.abs() + &c.im.abs())
            .max()
            .unwrap_or_else(Dyadic::zero);
        let v = &(&(&m_max + &one) * &u1) + &Dyadic::from_int(2);
        let mut w: u32 = 50;
        let cap = Dyadic::two_pow(62);
        while w >= 24 && v.mul_pow2(w as i64) >= cap {
            w -= 1;
        }
        if w < 24 {
            return None;
        }
        if u1 > Dyadic::two_pow(w as i64 - 1) {
            return None;
        }
        // Arithmetic budget: (2·U1 + 2)·2^-w ≤ tol/8, checked exactly.
        let arith = (&(&u1 + &u1) + &Dyadic::from_int(2)).mul_pow2(-(w as i64));
        if arith > tol.mul_pow2(-3) {
            return None;
        }
        let to_fixed = |d: &Dyadic| -> i128 {
            let rounded = d.round_to_grid(-(w as i64), Rounding::Nearest);
            let shift = rounded.exponent() + w as i64;
            debug_assert!(shift >= 0);
            let scaled: BigInt = rounded.mantissa() << (shift as usize);
            scaled
                .to_i128()
                .expect("fixed-point coefficient fits in i128 by the V bound")
        };
        let fixed = coeffs
            .iter()
            .map(|c| (to_fixed(&c.re), to_fixed(&c.im)))
            .collect();
        Some(FastPlan { w, coeffs: fixed })
    }

    /// Evaluates the prepared approximation at `z`.
    ///
    /// Returns [`Error::PointOutsideDisc`] when `|z|² > shell²` (exact
    /// comparison).  Otherwise the result differs from the encoded
    /// function's value by at most the prepared tolerance.
    pub fn eval(&self, z: &ComplexDyadic) -> Result<ComplexDyadic, Error> {
        if z.norm_sq() > self.shell_sq {
            return Err(Error::PointOutsideDisc);
        }
        let inner = match &self.fast {
            Some(plan)
                if z.re.exponent() >= -(plan.w as i64) && z.im.exponent() >= -(plan.w as i64) =>
            {
                Self::eval_fast(plan, z)
            }
            _ => self.eval_exact(z),
        };
        Ok(if self.trailing_mul_z {
            &inner * z
        } else {
            inner
        })
    }

    /// Exact dyadic Horner evaluation; zero arithmetic error.
    fn eval_exact(&self, z: &ComplexDyadic) -> ComplexDyadic {
        let mut h = ComplexDyadic::zero();
        for c in self.coeffs.iter().rev() {
            h = &(&h * z) + c;
        }
        h
    }

    /// Fixed-point Horner; error covered by the `tol/8` arithmetic budget.
    fn eval_fast(plan: &FastPlan, z: &ComplexDyadic) -> ComplexDyadic {
        let w = plan.w;
        let scale = |d: &Dyadic| -> i128 {
            let shift = d.exponent() + w as i64;
            let scaled: BigInt = d.mantissa() << (shift as usize);
            scaled
                .to_i128()
                .expect("point component fits in i128: |z| < 1")
        };
        let zr = scale(&z.re);
        let zi = scale(&z.im);
        let round_shift = |v: i128| -> i128 { (v + (1i128 << (w - 1))) >> w };
        let (last, rest) = plan.coeffs.split_last().expect("fast plan is non-empty");
        let (mut hr, mut hi) = *last;
        for &(cr, ci) in rest.iter().rev() {
            let tr = hr * zr - hi * zi;
            let ti = hr * zi + hi * zr;
            hr = round_shift(tr) + cr;
            hi = round_shift(ti) + ci;
        }
        ComplexDyadic::new(
            Dyadic::new(BigInt::from(hr), -(w as i64)),
            Dyadic::new(BigInt::from(hi), -(w as i64)),
        )
    }

    /// Number of series terms kept (`N`; terms with index `> N` truncated).
    pub fn truncation_order(&self) -> u64 {
        self.truncation_order
    }

    /// Quadrant digits read per coefficient.
    pub fn digit_depth(&self) -> u32 {
        self.digit_depth
    }

    pub fn shell(&self) -> &Dyadic {
        &self.shell
    }

    pub fn tolerance(&self) -> &Dyadic {
        &self.tol
    }

    pub fn order(&self) -> EvalOrder {
        self.order
    }

    /// Whether bulk evaluation runs on the fixed-point path.
    pub fn uses_fast_path(&self) -> bool {
        self.fast.is_some()
    }

    /// Fraction bits of the fixed-point path, when active.  Fast-path
    /// results land on the grid `2^-(w + |input grid|)` exactly.
    pub(crate) fn fast_fraction_bits(&self) -> Option<u32> {
        self.fast.as_ref().map(|p| p.w)
    }
}

/// One-shot evaluation: prepares an approximation and evaluates it at the
/// request's point.
///
/// When `shell` is `None` a shell is derived from the point itself: the
/// smallest convenient dyadic upper bound on `|z|` that is still below 1.
/// Points with `|z| ≥ 1` are rejected.
pub fn eval_series(
    s: &PiStream,
    schedule: &BoundSchedule,
    request: &EvalRequest,
    shell: Option<&Dyadic>,
) -> Result<ComplexDyadic, Error> {
    let derived;
    let shell = match shell {
        Some(r) => r,
        None => {
            let nsq = request.z.norm_sq();
            if nsq >= Dyadic::one() {
                return Err(Error::PointOutsideDisc);
            }
            let mut found = None;
            for g in [8i64, 16, 32, 64, 128, 256, 512, 1024] {
                let u = Dyadic::sqrt_to_grid(&nsq, -g, Rounding::Up)?;
                if u < Dyadic::one() {
                    found = Some(u);
                    break;
                }
            }
            derived = found.ok_or(Error::PointOutsideDisc)?;
            &derived
        }
    };
    let approx = SeriesApproximation::prepare(s, schedule, request.order, shell, &request.tol)?;
    approx.eval(&request.z)
}

/// Number of sample points drawn by the injected-bound audits.
const AUDIT_SAMPLES: usize = 128;
/// Evaluation tolerance used by the audits: 2^-12.
const AUDIT_TOL_EXP: i64 = -12;
/// Fixed RNG seed so audits are reproducible bit for bit.
const AUDIT_SEED: u64 = 0x6c61_6e64_6175_3031;

/// Deterministic quasi-uniform sample of the disc `|z| ≤ scale`.
fn audit_points(scale: &Dyadic) -> Vec<ComplexDyadic> {
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    let mut pts = Vec::with_capacity(AUDIT_SAMPLES);
    let one = Dyadic::one();
    while pts.len() < AUDIT_SAMPLES {
        let a: i64 = rng.gen_range(-(1 << 20)..=(1 << 20));
        let b: i64 = rng.gen_range(-(1 << 20)..=(1 << 20));
        let u = Dyadic::new(BigInt::from(a), -20);
        let v = Dyadic::new(BigInt::from(b), -20);
        if &u.square() + &v.square() <= one {
            pts.push(ComplexDyadic::new(u * scale, v * scale));
        }
    }
    pts
}

/// Core of both audits: certify `|F(z)| > bound` at some sample point, in
/// which case the injected bound is demonstrably false.
fn audit_sup(
    s: &PiStream,
    schedule: &BoundSchedule,
    order: EvalOrder,
    radius: &Dyadic,
    bound: &Dyadic,
    label: &str,
) -> Result<(), Error> {
    // Sample strictly inside: radius·(1 − 2^-8), so a violation here is a
    // violation of the claimed sup over the full open disc of `radius`.
    let shell = radius - &radius.mul_pow2(-8);
    let tol = Dyadic::two_pow(AUDIT_TOL_EXP);
    let approx = SeriesApproximation::prepare(s, schedule, order, &shell, &tol)?;
    for z in audit_points(&shell) {
        let v = approx.eval(&z)?;
        // |F(z)| ≥ √(|v|²)↓ − tol: certified lower bound on the true value.
        let lb = &Dyadic::sqrt_to_grid(&v.norm_sq(), -24, Rounding::Down)? - &tol;
        if &lb > bound {
            return Err(Error::InjectedBoundRejected(format!(
                "{label}: |value| ≥ {lb} exceeds the injected bound {bound} at z = {z}"
            )));
        }
    }
    Ok(())
}

/// Spot-checks an injected sup of `|f′|` on the disc of the given radius.
///
/// The check can only ever refute (never prove) the bound: it certifies a
/// strict violation at one of 128 fixed pseudo-random sample points and
/// reports [`Error::InjectedBoundRejected`].  Passing is a smoke test, not
/// a proof — injected bounds remain the caller's responsibility and are
/// flagged as such in certificates.
pub fn audit_first_sup(
    s: &PiStream,
    schedule: &BoundSchedule,
    radius: &Dyadic,
    bound: &Dyadic,
    label: &str,
) -> Result<(), Error> {
    audit_sup(s, schedule, EvalOrder::Value, radius, bound, label)
}

/// Spot-checks an injected sup of `|f″|`; see [`audit_first_sup`].
pub fn audit_second_sup(
    s: &PiStream,
    schedule: &BoundSchedule,
    radius: &Dyadic,
    bound: &Dyadic,
    label: &str,
) -> Result<(), Error> {
    audit_sup(s, schedule, EvalOrder::Derivative(1), radius, bound, label)
}
