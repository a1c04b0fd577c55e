//! Certified lower bounds for the inner radius of `f(𝔻_r)`.
//!
//! The pipeline assembled by [`certified_lower_bound`] turns a stream-encoded
//! function class member into a dyadic `l` with `l ≤ λ_f(𝔻_r)` (the radius of
//! the largest disc contained in the image of the open disc of radius `r`
//! under the normalised `f`, `f(0) = 0`, `f′(0) = 1`):
//!
//! 1. **Circle certificate** ([`find_certified_circle`]): a circle
//!    `|z| = r̂ ∈ (r, 1)` on which `|f′| ≥ ρ > 0`, found by dovetailing
//!    candidate radii against arc-refinement levels.  Each attempt covers
//!    the circle by `2M` arcs (`M = 32·2^level` per half-circle family),
//!    evaluates `f′` rigorously at a dyadic point near each arc midpoint,
//!    and subtracts exact Lipschitz slack `μ″·(arc reach + rounding)`.
//! 2. **Margin derivation** ([`derive_grid_parameters`]): a power-of-two
//!    margin `Δ` with `4μ″·Δ ≤ ρ` and `2Δ < r̂ − r`, so `|f′| ≥ 3ρ/4` holds
//!    on the closed annulus of width `Δ` inside the circle; the sound image
//!    resolution is `ε = ρΔ/16`.
//! 3. **Covering grid + distance transform**: the image of `𝔻_r` is covered
//!    at resolution `ε`; the largest lattice-certified inscribed disc gives
//!    the reported bound as the lower end of a width-`2^-(n+3)` enclosure.
//!
//! The reported bound converges to `λ` from below: `λ_f(𝔻_r) ≥ r·λ_f(𝔻)`
//! by rescaling, so with `r = 1 − 2^-(n+1)` and `λ > ½` the loss of the
//! restriction step is below `2^-(n+2)` and the reported value is within
//! `2^-n·λ` of the true `λ_f(𝔻)` once the resolution is fine enough.
//!
//! Every certificate records the exact dyadic scalars of the inequalities
//! it relied on; [`LambdaCertificate::audit`] re-verifies them without
//! re-running the pipeline.  When the resolution is supplied externally
//! instead of derived ([`CertificateMode::Overridden`]), the recorded
//! inequalities still hold as stated but the sound-resolution relation
//! `ε ≤ ρΔ/16` is not enforced, and consumers must treat the bound as
//! diagnostic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexDyadic;
use crate::dyadic::{Dyadic, Rounding};
use crate::error::Error;
use crate::eval::{audit_first_sup, audit_second_sup, EvalOrder, SeriesApproximation};
use crate::grid::{
    disc_enclosure, image_covering_grid, inscribed_radius_estimate, GridBuildTrace, ResourceLimits,
    TraceMode,
};
use crate::schedule::{BoundSchedule, BoundsProvider};
use crate::stream::PiStream;

/// Cap on the candidate-radius / arc-level dovetailing in
/// [`find_certified_circle`].  Round `k` tries level `k − i` for the `i`-th
/// candidate radius, so `max_rounds` bounds both the number of radii tried
/// and the finest arc level (`2M = 64·2^level` arcs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleBudget {
    pub max_rounds: u32,
}

impl Default for CircleBudget {
    fn default() -> Self {
        CircleBudget { max_rounds: 24 }
    }
}

/// A successfully certified circle: `|f′| ≥ min_arc_bound > 0` everywhere
/// on `|z| = radius`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleWitness {
    /// Circle radius `r̂` (dyadic, strictly inside the unit disc).
    pub radius: Dyadic,
    /// Arc-refinement level used.
    pub level: u32,
    /// Arcs per half-circle family: `32·2^level`.
    pub arcs_per_family: u64,
    /// Evaluation tolerance per arc midpoint: `2^-(5+level)`.
    pub tau: Dyadic,
    /// Certified lower bound `ρ` for `|f′|` on the circle (exact minimum
    /// of the per-arc bounds).
    pub min_arc_bound: Dyadic,
    /// Second-derivative sup `μ″` on `𝔻_radius` used as Lipschitz constant.
    pub second_sup: Dyadic,
}

/// `⌈log₂ d⌉` for positive `d`.
fn ceil_log2(d: &Dyadic) -> i64 {
    assert!(d.is_positive());
    match d.as_power_of_two() {
        Some(f) => f,
        None => d.floor_log2() + 1,
    }
}

/// Tries to certify `|f′| > 0` on the circle `|z| = candidate` at one arc
/// level.  Returns the witness on success, `None` when some arc's lower
/// bound fails to be positive (a finer level or another radius may still
/// succeed), and an error only for genuine evaluation failures.
///
/// The circle is split per half (`re ≥ 0` and `re ≤ 0`) into `M = 32·2^level`
/// arcs via the rational parametrisation `z(t) = r̂·(±(1−t²), 2t)/(1+t²)`,
/// `t ∈ [−1, 1]`, which satisfies `|z(t)| = r̂` exactly and `|dz/dt| ≤ 2r̂`.
/// For the arc around `t_mid = −1 + (2j+1)/M` the certified bound is
///
/// ```text
/// arc_lb = |v|_lower − τ − μ″·(2r̂/M + err_z)
/// ```
///
/// with `v` a `τ`-accurate value of `f′` at a dyadic `ẑ` within `err_z` of
/// `z(t_mid)`, all terms exact dyadics and the rounding directions chosen
/// downward.  `arc_lb` therefore lower-bounds `min |f′|` over the arc, so a
/// circle through a zero of `f′` is rejected at every level.
///
/// `ẑ` is the componentwise nearest point of the grid `2^-gz`,
/// `gz = level + 8 + max(0, ⌈log₂ μ″⌉)`, nudged inward once by the factor
/// `1 − 2^-(gz−2)` if it lands outside the closed disc; for `r̂ ≥ ¼` the
/// nudge always suffices because the outward excess is at most
/// `√2·2^-(gz+1) ≤ 4r̂·2^-gz·|ẑ|/(r̂+√2·2^-(gz+1))`.
///
/// The caller is responsible for vetting an injected `μ″` (see
/// [`find_certified_circle`], which audits it once per radius).
pub fn certify_circle_at(
    s: &PiStream,
    schedule: &BoundSchedule,
    bounds: &BoundsProvider,
    candidate: &Dyadic,
    level: u32,
) -> Result<Option<CircleWitness>, Error> {
    assert!(
        candidate >= &Dyadic::two_pow(-2) && candidate < &Dyadic::one(),
        "circle radius must lie in [1/4, 1) for the inward nudge to be valid"
    );
    assert!(level <= 40, "arc level out of the supported range");
    let second = bounds.second_sup(schedule, candidate)?;
    assert!(second.is_positive(), "Lipschitz bound must be positive");

    let m: u64 = 32u64 << level;
    let tau = Dyadic::two_pow(-(5 + level as i64));
    let approx = SeriesApproximation::prepare(s, schedule, EvalOrder::Value, candidate, &tau)?;

    let gz = level as i64 + 8 + ceil_log2(&second).max(0);
    // Componentwise nearest rounding to the grid 2^-gz errs by at most
    // 2^-(gz+1) per axis, √2·2^-(gz+1) in modulus.
    let round_err = schedule.sqrt2_enclosure().hi.mul_pow2(-(gz + 1));
    let arc_reach = candidate.mul_pow2(-(4 + level as i64)); // 2r̂/M
    let abs_grid = -(level as i64 + 11);
    let r_hat_sq = candidate.square();
    let nudge = &Dyadic::one() - &Dyadic::two_pow(-(gz - 2));

    enum Stop {
        Failed,
        Real(Error),
    }

    let arc_bound = |idx: u64| -> Result<Dyadic, Stop> {
        let (family, j) = (idx / m, idx % m);
        // t_mid = (2j+1−M)/M; on this grid p is odd and |p| < q ≤ 2^45.
        let q = m as i64;
        let p = 2 * j as i64 + 1 - q;
        let den = Dyadic::from_int(q * q + p * p);
        let re_int = if family == 0 {
            q * q - p * p
        } else {
            p * p - q * q
        };
        let num_re = candidate * &Dyadic::from_int(re_int);
        let num_im = candidate * &Dyadic::from_int(2 * p * q);
        let re = Dyadic::div_to_grid(&num_re, &den, -gz, Rounding::Nearest).map_err(Stop::Real)?;
        let im = Dyadic::div_to_grid(&num_im, &den, -gz, Rounding::Nearest).map_err(Stop::Real)?;
        let mut z_hat = ComplexDyadic::new(re, im);
        let mut err_z = round_err.clone();
        if z_hat.norm_sq() > r_hat_sq {
            err_z = &err_z + &(&(candidate + &err_z) * &Dyadic::two_pow(-(gz - 2)));
            z_hat = z_hat.scale(&nudge);
            assert!(
                z_hat.norm_sq() <= r_hat_sq,
                "inward nudge must land inside the closed disc"
            );
        }
        let v = approx.eval(&z_hat).map_err(Stop::Real)?;
        let lb = &(&v.abs_lower(abs_grid) - &tau) - &(&second * &(&arc_reach + &err_z));
        if lb.is_positive() {
            Ok(lb)
        } else {
            Err(Stop::Failed)
        }
    };

    let min_bound = (0..2 * m)
        .into_par_iter()
        .map(arc_bound)
        .try_reduce_with(|a, b| Ok(if a <= b { a } else { b }))
        .expect("at least one arc");
    match min_bound {
        Ok(rho) => Ok(Some(CircleWitness {
            radius: candidate.clone(),
            level,
            arcs_per_family: m,
            tau,
            min_arc_bound: rho,
            second_sup: second,
        })),
        Err(Stop::Failed) => Ok(None),
        Err(Stop::Real(e)) => Err(e),
    }
}

/// Candidate circle radii in `(radius, 1)`: dyadics `j·2^-g` enumerated by
/// ascending denominator exponent `g`, then ascending odd numerator `j`.
fn extend_candidates(radius: &Dyadic, out: &mut Vec<Dyadic>, g: &mut i64) {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::One;
    loop {
        *g += 1;
        let scaled = radius.mul_pow2(*g);
        let mut j =
            Dyadic::ratio_floor(&scaled, &Dyadic::one()).expect("unit denominator") + BigInt::one();
        if j.is_even() {
            j += 1;
        }
        let top = BigInt::one() << (*g as usize);
        let mut added = false;
        while j < top {
            out.push(Dyadic::new(j.clone(), -*g));
            j += 2;
            added = true;
        }
        if added {
            return;
        }
    }
}

/// Searches for a certified circle above `radius` by dovetailing candidate
/// radii against arc levels: round `k` tries `(candidate_i, level = k − i)`
/// for `i = 1..=k`, so every pair is attempted exactly once and cheap
/// coarse attempts come first.  An injected second-derivative bound is
/// sample-audited once per distinct radius before its first use.
pub fn find_certified_circle(
    s: &PiStream,
    schedule: &BoundSchedule,
    bounds: &BoundsProvider,
    radius: &Dyadic,
    budget: &CircleBudget,
) -> Result<CircleWitness, Error> {
    assert!(
        radius >= &Dyadic::two_pow(-2) && radius < &Dyadic::one(),
        "inner radius must lie in [1/4, 1)"
    );
    let mut candidates: Vec<Dyadic> = Vec::new();
    let mut g: i64 = 0;
    let mut audited: Vec<Dyadic> = Vec::new();
    for k in 1..=budget.max_rounds {
        for i in 1..=k {
            let level = k - i;
            while candidates.len() < i as usize {
                extend_candidates(radius, &mut candidates, &mut g);
            }
            let c = candidates[i as usize - 1].clone();
            if bounds.is_injected() && !audited.contains(&c) {
                let second = bounds.second_sup(schedule, &c)?;
                audit_second_sup(s, schedule, &c, &second, &bounds.provenance())?;
                audited.push(c.clone());
            }
            if let Some(w) = certify_circle_at(s, schedule, bounds, &c, level)? {
                return Ok(w);
            }
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no certified circle within {} dovetailing rounds",
        budget.max_rounds
    )))
}

/// Margin and resolution derived from a circle certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParameters {
    /// Power-of-two margin `Δ` with `4μ″·Δ ≤ ρ` and `2Δ < r̂ − r`.
    pub margin: Dyadic,
    /// Sound image resolution `ε = ρ·Δ/16` (exact).
    pub eps: Dyadic,
    /// Inner annulus radius `r̄ = r̂ − Δ`.
    pub inner_radius: Dyadic,
}

/// Derives the covering resolution from a certified circle.
///
/// `Δ = 2^min(e1, e2)` where `2^e1 ≤ ρ/(4μ″)` via an exact ratio floor and
/// `e2` keeps `2Δ` strictly below `d = r̂ − radius` (one halving when `d` is
/// an exact power of two, since `2·2^(f−1) = 2^f = d` would not be strict).
/// Both defining inequalities are re-verified exactly before returning.
pub fn derive_grid_parameters(
    witness: &CircleWitness,
    radius: &Dyadic,
) -> Result<GridParameters, Error> {
    let rho = &witness.min_arc_bound;
    assert!(rho.is_positive(), "witness must carry a positive bound");
    let d = &witness.radius - radius;
    if !d.is_positive() {
        return Err(Error::DegenerateWindow);
    }
    let e1 = Dyadic::ratio_floor_log2(rho, &witness.second_sup.mul_pow2(2));
    let e2 = match d.as_power_of_two() {
        Some(f) => f - 2,
        None => d.floor_log2() - 1,
    };
    let margin = Dyadic::two_pow(e1.min(e2));
    assert!(&margin.mul_pow2(2) * &witness.second_sup <= *rho);
    assert!(margin.mul_pow2(1) < d);
    let eps = (rho * &margin).mul_pow2(-4);
    let inner_radius = &witness.radius - &margin;
    Ok(GridParameters {
        margin,
        eps,
        inner_radius,
    })
}

/// Whether the covering resolution was derived soundly or supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// `eps_used` equals the derived `ρΔ/16`.
    Sound,
    /// `eps_used` was supplied externally; diagnostic only.
    Overridden,
}

/// Configuration for [`certified_lower_bound`].
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub bounds: BoundsProvider,
    /// Replaces the derived resolution when set (mode becomes
    /// [`CertificateMode::Overridden`] even if the values coincide).
    pub eps_override: Option<Dyadic>,
    pub circle_budget: CircleBudget,
    pub limits: ResourceLimits,
    pub trace: TraceMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bounds: BoundsProvider::Generic,
            eps_override: None,
            circle_budget: CircleBudget::default(),
            limits: ResourceLimits::default(),
            trace: TraceMode::Stats,
        }
    }
}

/// A self-describing record of one lower-bound computation: every scalar
/// of every inequality the pipeline relied on, but no bulk data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaCertificate {
    /// Precision index `n ≥ 1`.
    pub precision: u32,
    /// Inner disc radius `r = 1 − 2^-(n+1)`.
    pub radius: Dyadic,
    pub mode: CertificateMode,
    /// Where the derivative bounds came from (generic class bounds or an
    /// injected, sample-audited pair).
    pub bounds_provenance: String,
    /// Sup of `|f′|` on `𝔻_radius` used for grid sizing.
    pub first_sup: Dyadic,
    /// Sup of `|f″|` on `𝔻_circle_radius` used on the circle.
    pub second_sup: Dyadic,
    pub circle_radius: Dyadic,
    pub arc_level: u32,
    pub arcs_per_family: u64,
    pub tau: Dyadic,
    pub min_arc_bound: Dyadic,
    pub margin: Dyadic,
    /// Derived sound resolution `ρΔ/16`.
    pub eps_sound: Dyadic,
    /// Resolution the grid was actually built at.
    pub eps_used: Dyadic,
    /// Lattice pitch of the covering grid, always `eps_used / 4`.
    pub delta: Dyadic,
    /// Number of marked lattice points `|G|`.
    pub grid_points: u64,
    /// Exact squared lattice distance certified by the distance transform.
    pub disc_squared: i64,
    pub disc_lower: Dyadic,
    pub disc_upper: Dyadic,
    /// The reported bound: lower end of the inscribed-disc enclosure.
    pub lower_bound: Dyadic,
    /// Deepest stream position consulted while producing this certificate.
    pub query_depth: u64,
}

impl LambdaCertificate {
    /// Re-verifies every recorded relation without re-running the pipeline:
    /// the radius schedule, the arc-family shape, the margin inequalities,
    /// the resolution arithmetic, and the disc enclosure (recomputed from
    /// `disc_squared` and compared bit-for-bit).
    pub fn audit(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::CertificateAudit(msg));
        if self.precision < 1 {
            return fail("precision index must be at least 1".into());
        }
        let radius = &Dyadic::one() - &Dyadic::two_pow(-(self.precision as i64 + 1));
        if self.radius != radius {
            return fail(format!(
                "radius {} does not match 1 - 2^-{}",
                self.radius,
                self.precision + 1
            ));
        }
        if self.arcs_per_family != 32u64 << self.arc_level {
            return fail("arc count does not match the recorded level".into());
        }
        if self.tau != Dyadic::two_pow(-(5 + self.arc_level as i64)) {
            return fail("arc tolerance does not match the recorded level".into());
        }
        if !self.min_arc_bound.is_positive() {
            return fail("recorded circle bound is not positive".into());
        }
        if !self.first_sup.is_positive() || !self.second_sup.is_positive() {
            return fail("derivative sups must be positive".into());
        }
        if self.circle_radius <= self.radius || self.circle_radius >= Dyadic::one() {
            return fail("circle radius must lie strictly between r and 1".into());
        }
        if self.margin.as_power_of_two().is_none() {
            return fail("margin must be a power of two".into());
        }
        if &self.margin.mul_pow2(2) * &self.second_sup > self.min_arc_bound {
            return fail("margin inequality 4·mu2·margin <= rho fails".into());
        }
        if self.margin.mul_pow2(1) >= &self.circle_radius - &self.radius {
            return fail("margin inequality 2·margin < r_hat - r fails".into());
        }
        if self.eps_sound != (&self.min_arc_bound * &self.margin).mul_pow2(-4) {
            return fail("sound resolution is not rho*margin/16".into());
        }
        if !self.eps_used.is_positive() {
            return fail("used resolution must be positive".into());
        }
        if matches!(self.mode, CertificateMode::Sound) && self.eps_used != self.eps_sound {
            return fail("sound mode requires eps_used == eps_sound".into());
        }
        if self.delta != self.eps_used.mul_pow2(-2) {
            return fail("grid pitch must be eps_used / 4".into());
        }
        if self.grid_points == 0 {
            return fail("a covering grid is never empty".into());
        }
        if self.disc_squared < 0 {
            return fail("squared lattice distance cannot be negative".into());
        }
        let est = disc_enclosure(
            self.disc_squared,
            &self.eps_used.mul_pow2(-2),
            1,
            self.precision + 3,
        );
        if est.lower != self.disc_lower || est.upper != self.disc_upper {
            return fail("disc enclosure does not reproduce from disc_squared".into());
        }
        if self.lower_bound != self.disc_lower {
            return fail("reported bound must be the enclosure's lower end".into());
        }
        Ok(())
    }
}

/// Runs the full pipeline at precision index `n`: certify a circle above
/// `r = 1 − 2^-(n+1)`, derive the resolution, build the covering grid of
/// `f(𝔻_r)` (always at radius `r`; the reported bound needs no annulus
/// shrinkage), and report the lattice-certified inscribed radius as a
/// width-`2^-(n+3)` enclosure's lower end.
///
/// Injected derivative bounds are sample-audited before first use; a
/// failed audit aborts with [`Error::InjectedBoundRejected`].  All stream
/// queries land on `s`'s log, so `s.query_depth()` after the call (and the
/// `query_depth` field of the certificate) reflects the whole run.
pub fn certified_lower_bound(
    s: &PiStream,
    schedule: &BoundSchedule,
    precision: u32,
    config: &PipelineConfig,
) -> Result<(LambdaCertificate, GridBuildTrace), Error> {
    assert!(precision >= 1, "precision index starts at 1");
    let radius = &Dyadic::one() - &Dyadic::two_pow(-(precision as i64 + 1));
    let first = config.bounds.first_sup(schedule, &radius)?;
    if config.bounds.is_injected() {
        audit_first_sup(s, schedule, &radius, &first, &config.bounds.provenance())?;
    }
    let witness =
        find_certified_circle(s, schedule, &config.bounds, &radius, &config.circle_budget)?;
    let params = derive_grid_parameters(&witness, &radius)?;
    let (eps_used, mode) = match &config.eps_override {
        Some(eps) => {
            assert!(eps.is_positive(), "resolution override must be positive");
            (eps.clone(), CertificateMode::Overridden)
        }
        None => (params.eps.clone(), CertificateMode::Sound),
    };
    let (grid, trace) = image_covering_grid(
        s,
        schedule,
        &radius,
        &eps_used,
        &first,
        &config.limits,
        config.trace,
    )?;
    let est = inscribed_radius_estimate(&grid, precision + 3)?;
    let certificate = LambdaCertificate {
        precision,
        radius,
        mode,
        bounds_provenance: config.bounds.provenance(),
        first_sup: first,
        second_sup: witness.second_sup,
        circle_radius: witness.radius,
        arc_level: witness.level,
        arcs_per_family: witness.arcs_per_family,
        tau: witness.tau,
        min_arc_bound: witness.min_arc_bound,
        margin: params.margin,
        eps_sound: params.eps,
        delta: grid.delta.clone(),
        grid_points: trace.image_count,
        eps_used,
        disc_squared: est.s,
        disc_lower: est.lower.clone(),
        disc_upper: est.upper,
        lower_bound: est.lower,
        query_depth: s.query_depth(),
    };
    Ok((certificate, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::encode_coefficients;
    use num_bigint::BigInt;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    fn sched() -> BoundSchedule {
        BoundSchedule::new(100)
    }

    #[test]
    fn candidate_enumeration_is_ordered() {
        let mut out = Vec::new();
        let mut g = 0i64;
        while out.len() < 6 {
            extend_candidates(&dy(1, -1), &mut out, &mut g);
        }
        // (1/2, 1): g=2 gives 3/4; g=3 gives 5/8, 7/8; g=4 gives 9/16…
        assert_eq!(out[0], dy(3, -2));
        assert_eq!(out[1], dy(5, -3));
        assert_eq!(out[2], dy(7, -3));
        assert_eq!(out[3], dy(9, -4));
        assert_eq!(out[4], dy(11, -4));
        assert_eq!(out[5], dy(13, -4));

        // Radius close to 1: the first candidate is 1 − 2^-(n+2).
        let mut out = Vec::new();
        let mut g = 0i64;
        let r = &Dyadic::one() - &Dyadic::two_pow(-6);
        extend_candidates(&r, &mut out, &mut g);
        assert_eq!(out[0], &Dyadic::one() - &Dyadic::two_pow(-7));
    }

    #[test]
    fn circle_through_a_zero_is_always_rejected() {
        // f′(z) = 1 − 2z vanishes at z = 1/2, which lies on the circle
        // |z| = 1/2; soundness of the per-arc bounds forces rejection at
        // every level.
        let sc = sched();
        let s = encode_coefficients(&[ComplexDyadic::from_re(dy(-1, 1))], &sc, 128).unwrap();
        for level in 0..4 {
            let out =
                certify_circle_at(&s, &sc, &BoundsProvider::Generic, &dy(1, -1), level).unwrap();
            assert!(out.is_none(), "level {level} must reject");
        }
    }

    #[test]
    fn identity_circle_certifies_and_derives_parameters() {
        let sc = sched();
        let s = encode_coefficients(&[], &sc, 128).unwrap();
        let r = dy(1, -1);
        let witness = find_certified_circle(
            &s,
            &sc,
            &BoundsProvider::Generic,
            &r,
            &CircleBudget::default(),
        )
        .unwrap();
        assert!(witness.min_arc_bound.is_positive());
        assert!(witness.radius > r && witness.radius < Dyadic::one());
        assert_eq!(witness.arcs_per_family, 32u64 << witness.level);
        // |f′| ≡ 1, so the certified minimum can never exceed 1.
        assert!(witness.min_arc_bound < Dyadic::one());
        assert!(s.query_depth() > 0);

        let params = derive_grid_parameters(&witness, &r).unwrap();
        assert!(params.eps.is_positive());
        assert!(params.inner_radius > r);
        // Degenerate gaps are rejected.
        assert!(matches!(
            derive_grid_parameters(&witness, &witness.radius).unwrap_err(),
            Error::DegenerateWindow
        ));
    }

    #[test]
    fn margin_derivation_matches_worked_example() {
        // ρ = 1/2, μ″ = 10565/256 ≈ 41.27, r = 1/2, r̂ = 3/4:
        // e1 = ⌊log2(ρ/4μ″)⌋ = −9, d = 1/4 exact power of two so e2 = −4,
        // Δ = 2^-9, ε = ρΔ/16 = 2^-14.
        let witness = CircleWitness {
            radius: dy(3, -2),
            level: 3,
            arcs_per_family: 32 << 3,
            tau: Dyadic::two_pow(-8),
            min_arc_bound: dy(1, -1),
            second_sup: dy(10565, -8),
        };
        let params = derive_grid_parameters(&witness, &dy(1, -1)).unwrap();
        assert_eq!(params.margin, dy(1, -9));
        assert_eq!(params.eps, dy(1, -14));
        assert_eq!(params.inner_radius, &dy(3, -2) - &dy(1, -9));
    }

    #[test]
    fn false_injected_second_bound_is_rejected() {
        // f″ ≡ −2 for a₁ = −2, so claiming sup |f″| = 1 must fail the audit.
        let sc = sched();
        let s = encode_coefficients(&[ComplexDyadic::from_re(dy(-1, 1))], &sc, 128).unwrap();
        let bad = BoundsProvider::injected("test", dy(4, 0), dy(1, 0));
        let err =
            find_certified_circle(&s, &sc, &bad, &dy(1, -1), &CircleBudget::default()).unwrap_err();
        assert!(matches!(err, Error::InjectedBoundRejected(_)));
    }

    fn identity_pipeline_config() -> PipelineConfig {
        PipelineConfig {
            // True sups for the identity are 1 and 0; these injected values
            // are honest and keep the circle search at the cheapest level.
            bounds: BoundsProvider::injected(
                "identity",
                &Dyadic::one() + &Dyadic::two_pow(-8),
                Dyadic::two_pow(-10),
            ),
            eps_override: Some(Dyadic::two_pow(-4)),
            circle_budget: CircleBudget::default(),
            limits: ResourceLimits::default(),
            trace: TraceMode::Stats,
        }
    }

    #[test]
    fn identity_pipeline_produces_auditable_certificate() {
        let sc = sched();
        let s = encode_coefficients(&[], &sc, 128).unwrap();
        let (cert, trace) = certified_lower_bound(&s, &sc, 1, &identity_pipeline_config()).unwrap();
        // Image of 𝔻_{3/4} under the identity is 𝔻_{3/4}: at resolution
        // 2^-4 the certified inscribed radius comes out near 3/4.
        assert_eq!(cert.mode, CertificateMode::Overridden);
        assert_eq!(cert.radius, dy(3, -2));
        assert!(cert.lower_bound > dy(11, -4)); // > 0.6875
        assert!(cert.lower_bound < dy(13, -4)); // < 0.8125
        assert!(cert.disc_lower <= cert.disc_upper);
        assert!(cert.query_depth > 0);
        assert_eq!(cert.bounds_provenance, "injected:identity");
        assert!(trace.source_count > 0);
        cert.audit().unwrap();

        // JSON round trip preserves everything bit-for-bit.
        let json = serde_json::to_string_pretty(&cert).unwrap();
        let back: LambdaCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        back.audit().unwrap();
    }

    #[test]
    fn audit_rejects_tampered_certificates() {
        let sc = sched();
        let s = encode_coefficients(&[], &sc, 128).unwrap();
        let (cert, _) = certified_lower_bound(&s, &sc, 1, &identity_pipeline_config()).unwrap();

        let mut inflated = cert.clone();
        inflated.lower_bound = &inflated.lower_bound + &Dyadic::one();
        assert!(matches!(
            inflated.audit().unwrap_err(),
            Error::CertificateAudit(_)
        ));

        let mut wrong_eps = cert.clone();
        wrong_eps.eps_sound = wrong_eps.eps_sound.mul_pow2(1);
        assert!(wrong_eps.audit().is_err());

        let mut wrong_mode = cert;
        wrong_mode.mode = CertificateMode::Sound; // eps_used ≠ eps_sound
        assert!(wrong_mode.audit().is_err());
    }

    #[test]
    fn false_injected_first_bound_is_rejected_by_pipeline() {
        let sc = sched();
        let s = encode_coefficients(&[], &sc, 128).unwrap();
        let config = PipelineConfig {
            bounds: BoundsProvider::injected("bogus", dy(1, -1), Dyadic::two_pow(-10)),
            ..identity_pipeline_config()
        };
        // sup |f′| = 1 for the identity, so the claimed 1/2 must fail.
        let err = certified_lower_bound(&s, &sc, 1, &config).unwrap_err();
        assert!(matches!(err, Error::InjectedBoundRejected(_)));
    }
}
