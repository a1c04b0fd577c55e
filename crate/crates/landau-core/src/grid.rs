//! Certified covering grids for images of discs, and disc-size estimates.
//!
//! [`image_covering_grid`] samples a stream-encoded function `f` (the
//! antiderivative, normalised so `f(0) = 0`, `f′(0) = 1`) on a fine square
//! lattice inside the disc `|z| < r` and marks every output-lattice point
//! lying provably close to a computed value.  With the pitches chosen here,
//! the marked set `G` certifies the image two-sidedly: every marked point
//! lies within `δ = ε/4` of the image, and every image point lies within
//! `ε` of a marked point.
//!
//! * source pitch `δ_D`: the largest power of two `≤ ε/(16·μ′)`, where `μ′`
//!   bounds `|f′|` on the disc — consecutive samples then have images less
//!   than `ε/16` apart;
//! * evaluation tolerance `ε/16`;
//! * a lattice point `y` is marked when `|v − yδ| ≤ 3ε/16` for a computed
//!   value `v` (so `|f(z) − yδ| ≤ ε/4`; conversely the lattice point
//!   nearest `v` — at most `0.71·δ ≤ 3ε/16` away — is always marked, so
//!   every sample marks at least one point and the grid is never empty).
//!
//! All membership tests are exact dyadic comparisons.  Bulk marking runs on
//! an integer lane (one common power-of-two scaling, `i128` arithmetic)
//! whenever the scaled quantities provably fit; values that do not fit take
//! the exact dyadic lane.  Both lanes decide the *same* inequalities, so
//! the marked set is identical either way, and the parallel reduction is a
//! commutative bitmap union — output never depends on the thread count.
//!
//! [`inscribed_radius_estimate`] and [`raster_largest_disc`] then turn a
//! marked set into a two-sided dyadic enclosure of an inscribed-disc
//! radius via the exact integer distance transform.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexDyadic;
use crate::dyadic::{Dyadic, Rounding};
use crate::edt::{squared_distance_to_complement, CellGrid};
use crate::error::Error;
use crate::eval::{EvalOrder, SeriesApproximation};
use crate::schedule::BoundSchedule;
use crate::stream::PiStream;

/// Caps on the two quantities that grow quadratically with precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceLimits {
    /// Maximum number of source-lattice sample points.
    pub max_grid_points: u64,
    /// Maximum number of cells in the output window bitmap.
    pub max_window_cells: u64,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits {
            max_grid_points: 1_000_000_000,
            max_window_cells: 400_000_000,
        }
    }
}

/// How much diagnostic information a grid build records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Counters and budgets only.
    Stats,
    /// Additionally keep a small deterministic sample of `(z, f(z))` pairs.
    Full,
}

/// Diagnostics from one covering-grid build.
#[derive(Debug, Clone)]
pub struct GridBuildTrace {
    pub eps: Dyadic,
    pub delta: Dyadic,
    /// Source-lattice pitch (a power of two).
    pub delta_d: Dyadic,
    /// Evaluator tolerance (`ε/16`).
    pub tolerance: Dyadic,
    pub source_count: u64,
    pub image_count: u64,
    /// Output window is `window_dim × window_dim` cells.
    pub window_dim: u64,
    pub truncation_order: u64,
    pub digit_depth: u32,
    pub fast_eval: bool,
    pub integer_lane: bool,
    /// `(z, value)` pairs for the first few source points (Full mode only).
    pub samples: Vec<(ComplexDyadic, ComplexDyadic)>,
}

/// `delta · i`, exactly.
fn lattice_coord(delta: &Dyadic, i: i64) -> Dyadic {
    delta * &Dyadic::from_int(i)
}

/// A `δ`-indexed covering set for an image region.
///
/// `points` holds lattice indices `(i, j)` standing for `(i·δ, j·δ)`.
/// The pitch is locked to `δ = ε/4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringGrid {
    pub eps: Dyadic,
    pub delta: Dyadic,
    pub points: BTreeSet<(i64, i64)>,
}

impl CoveringGrid {
    /// Whether `p` is within the certified covering distance `3ε/4` of some
    /// grid point (strict exact comparison).
    pub fn covers(&self, p: &ComplexDyadic) -> bool {
        let reach = &self.delta * &Dyadic::from_int(3); // 3δ = 3ε/4
        let reach_sq = reach.square();
        let lo_i = ceil_ratio(&(&p.re - &reach), &self.delta);
        let hi_i = floor_ratio(&(&p.re + &reach), &self.delta);
        let lo_j = ceil_ratio(&(&p.im - &reach), &self.delta);
        let hi_j = floor_ratio(&(&p.im + &reach), &self.delta);
        for i in lo_i..=hi_i {
            for j in lo_j..=hi_j {
                if !self.points.contains(&(i, j)) {
                    continue;
                }
                let dx = &p.re - &lattice_coord(&self.delta, i);
                let dy = &p.im - &lattice_coord(&self.delta, j);
                if &dx.square() + &dy.square() < reach_sq {
                    return true;
                }
            }
        }
        false
    }

    /// Serialises as CSV: an `eps,delta` header, one line with their dyadic
    /// values, then one `i,j` line per point in lexicographic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,delta\n");
        out.push_str(&format!("{},{}\n", self.eps, self.delta));
        for (i, j) in &self.points {
            out.push_str(&format!("{i},{j}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "eps,delta" => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected 'eps,delta' header, got {other:?}"
                )))
            }
        }
        let vals = lines
            .next()
            .ok_or_else(|| Error::Parse("missing eps,delta values".into()))?;
        let mut parts = vals.trim().split(',');
        let (eps, delta) = match (parts.next(), parts.next(), parts.next()) {
            (Some(e), Some(d), None) => (e.parse::<Dyadic>()?, d.parse::<Dyadic>()?),
            _ => return Err(Error::Parse(format!("malformed values line {vals:?}"))),
        };
        if !eps.is_positive() || delta != eps.mul_pow2(-2) {
            return Err(Error::Parse("grid pitch must be eps/4 with eps > 0".into()));
        }
        let mut points = BTreeSet::new();
        for line in lines {
            let mut parts = line.trim().split(',');
            let (i, j) = match (parts.next(), parts.next(), parts.next()) {
                (Some(i), Some(j), None) => (i, j),
                _ => return Err(Error::Parse(format!("malformed point line {line:?}"))),
            };
            let i: i64 = i
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {i:?}")))?;
            let j: i64 = j
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {j:?}")))?;
            points.insert((i, j));
        }
        Ok(CoveringGrid { eps, delta, points })
    }
}

/// `floor(num/den)` as `i64` for dyadics with `den > 0`.
fn floor_ratio(num: &Dyadic, den: &Dyadic) -> i64 {
    Dyadic::ratio_floor(num, den)
        .expect("positive denominator")
        .to_i64()
        .expect("ratio fits i64 for window-bounded inputs")
}

/// `ceil(num/den)` as `i64` for dyadics with `den > 0`.
fn ceil_ratio(num: &Dyadic, den: &Dyadic) -> i64 {
    -floor_ratio(&-num, den)
}

/// Ceiling division for `i128` with positive divisor.
fn ceil_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

/// Floor of a dyadic as a big integer.
fn dyadic_floor(d: &Dyadic) -> BigInt {
    Dyadic::ratio_floor(d, &Dyadic::one()).expect("unit denominator")
}

/// Exact conversion of an integral dyadic to `i128`.
fn dyadic_to_i128(d: &Dyadic) -> i128 {
    let e = d.exponent();
    assert!(e >= 0, "value must be integral");
    (d.mantissa() << (e as usize))
        .to_i128()
        .expect("checked against the i128 range before use")
}

/// Integer-lane constants: everything pre-scaled by `2^shift`.
#[derive(Debug, Clone, Copy)]
struct IntegerLane {
    shift: i64,
    delta: i128,
    tau: i128,
    tau_sq: i128,
}

/// The marking rule for one computed value: all output-lattice indices
/// within the exact reach `τ`, bounds-checked against the window.
#[derive(Debug, Clone)]
struct MarkPlan {
    delta: Dyadic,
    tau: Dyadic,
    tau_sq: Dyadic,
    half_span: i64,
    lane: Option<IntegerLane>,
}

impl MarkPlan {
    /// Lattice indices `(i, j)` with `|v − (iδ, jδ)| ≤ τ` (exact).  Errors
    /// when a hit falls outside the certified window: the window is sized
    /// from the first-derivative bound, so an escape refutes that bound.
    fn hits(&self, v: &ComplexDyadic) -> Result<Vec<(i64, i64)>, Error> {
        let mut out = Vec::with_capacity(4);
        match self.lane {
            Some(lane) if v.re.exponent() >= -lane.shift && v.im.exponent() >= -lane.shift => {
                let cr = dyadic_to_i128(&v.re.mul_pow2(lane.shift));
                let ci = dyadic_to_i128(&v.im.mul_pow2(lane.shift));
                for yi in
                    ceil_div(cr - lane.tau, lane.delta)..=(cr + lane.tau).div_euclid(lane.delta)
                {
                    for yj in
                        ceil_div(ci - lane.tau, lane.delta)..=(ci + lane.tau).div_euclid(lane.delta)
                    {
                        let dx = cr - yi * lane.delta;
                        let dy = ci - yj * lane.delta;
                        if dx * dx + dy * dy <= lane.tau_sq {
                            out.push((yi as i64, yj as i64));
                        }
                    }
                }
            }
            _ => {
                for yi in ceil_ratio(&(&v.re - &self.tau), &self.delta)
                    ..=floor_ratio(&(&v.re + &self.tau), &self.delta)
                {
                    for yj in ceil_ratio(&(&v.im - &self.tau), &self.delta)
                        ..=floor_ratio(&(&v.im + &self.tau), &self.delta)
                    {
                        let dx = &v.re - &lattice_coord(&self.delta, yi);
                        let dy = &v.im - &lattice_coord(&self.delta, yj);
                        if &dx.square() + &dy.square() <= self.tau_sq {
                            out.push((yi, yj));
                        }
                    }
                }
            }
        }
        for &(i, j) in &out {
            if i.abs() > self.half_span || j.abs() > self.half_span {
                return Err(Error::InjectedBoundRejected(
                    "computed value escapes the output window sized from the \
                     first-derivative bound; the bound is violated"
                        .into(),
                ));
            }
        }
        Ok(out)
    }
}

/// Builds the covering grid of the image `f(𝔻_r)` at resolution `eps`.
///
/// `first_sup` must bound `|f′|` on the disc; it controls the source
/// lattice pitch and the output window size.  `radius` must satisfy
/// `0 < r < 1` and `eps > 0`.  The source lattice (strict interior of the
/// disc) and the output window are checked against `limits` before any
/// heavy work starts.
pub fn image_covering_grid(
    s: &PiStream,
    schedule: &BoundSchedule,
    radius: &Dyadic,
    eps: &Dyadic,
    first_sup: &Dyadic,
    limits: &ResourceLimits,
    mode: TraceMode,
) -> Result<(CoveringGrid, GridBuildTrace), Error> {
    if !radius.is_positive() || radius >= &Dyadic::one() {
        return Err(Error::RadiusOutOfRange);
    }
    assert!(eps.is_positive(), "eps must be positive");
    assert!(
        first_sup.is_positive(),
        "first-derivative bound must be positive"
    );

    let delta = eps.mul_pow2(-2); // δ = ε/4
    let tau = &eps.mul_pow2(-4) * &Dyadic::from_int(3); // marking reach 3ε/16
    let tol = eps.mul_pow2(-4); // evaluator tolerance ε/16

    // Source pitch: largest power of two ≤ ε/(16·μ′).
    let g_d = Dyadic::ratio_floor_log2(eps, &first_sup.mul_pow2(4));
    let delta_d = Dyadic::two_pow(g_d);

    // Strict-interior source lattice: indices (a, b) with a² + b² < (r/δ_D)².
    // The squared ratio is an exact dyadic, so the strict test reduces to an
    // integer threshold (shaved by one when the ratio is itself an integer).
    let ratio_sq = radius.square().mul_pow2(-2 * g_d);
    let t_max: i64 = {
        let adjust = if ratio_sq.exponent() >= 0 { 1 } else { 0 };
        let t = dyadic_floor(&ratio_sq) - BigInt::from(adjust);
        t.to_i64()
            .ok_or_else(|| Error::ResourceCap("source lattice index range exceeds i64".into()))?
    };
    if t_max < 0 {
        return Err(Error::ResourceCap(
            "source pitch is coarser than the disc radius".into(),
        ));
    }
    // The lattice size is within O(√t) of π·t, so this pre-check keeps the
    // exact count loop below short.
    if t_max >= 4 && t_max as u64 > limits.max_grid_points {
        return Err(Error::ResourceCap(format!(
            "source lattice needs at least {t_max} points, cap is {}",
            limits.max_grid_points
        )));
    }
    let b_max = (t_max as u64).sqrt() as i64;
    let mut source_count: u64 = 0;
    for b in -b_max..=b_max {
        let rem = (t_max - b * b) as u64;
        source_count += 2 * rem.sqrt() + 1;
    }
    if source_count > limits.max_grid_points {
        return Err(Error::ResourceCap(format!(
            "source lattice needs {source_count} points, cap is {}",
            limits.max_grid_points
        )));
    }

    // Output window: |f| ≤ μ′·r on the disc, computed values stray at most
    // tol further, marks at most τ beyond that.
    let f_max = &(&(first_sup * radius) + &tol) + &tau;
    let half_big =
        dyadic_floor(&Dyadic::div_to_grid(&f_max, &delta, 0, Rounding::Down)?) + BigInt::from(2);
    let dim_big = &half_big * BigInt::from(2) + BigInt::from(1);
    let cells_big = &dim_big * &dim_big;
    if cells_big > BigInt::from(limits.max_window_cells) {
        return Err(Error::ResourceCap(format!(
            "output window needs {cells_big} cells, cap is {}",
            limits.max_window_cells
        )));
    }
    let half_span = half_big.to_i64().expect("bounded by the window cap");
    let dim = dim_big.to_usize().expect("bounded by the window cap");
    if dim > 30_000 {
        return Err(Error::ResourceCap(format!(
            "output window dimension {dim} exceeds the distance-transform cap"
        )));
    }

    // One instrumented preparation; evaluation below is pure and parallel.
    let approx =
        SeriesApproximation::prepare(s, schedule, EvalOrder::Antiderivative, radius, &tol)?;

    // Integer-lane feasibility: one scaling 2^shift must make τ, δ and the
    // computed values integral, with every squared term inside i128.
    // Fast-path values have exponents ≥ −(w − g_D) by construction.
    let lane = {
        let mut shift = (-delta.exponent()).max(-tau.exponent());
        if let Some(w) = approx.fast_fraction_bits() {
            shift = shift.max(w as i64 - g_d);
        }
        let fits = approx.fast_fraction_bits().is_some()
            && shift <= 120
            && delta.mul_pow2(shift) < Dyadic::two_pow(58)
            && f_max.mul_pow2(shift) < Dyadic::two_pow(120);
        if fits {
            let delta_i = dyadic_to_i128(&delta.mul_pow2(shift));
            let tau_i = dyadic_to_i128(&tau.mul_pow2(shift));
            Some(IntegerLane {
                shift,
                delta: delta_i,
                tau: tau_i,
                tau_sq: tau_i * tau_i,
            })
        } else {
            None
        }
    };
    let plan = MarkPlan {
        delta: delta.clone(),
        tau: tau.clone(),
        tau_sq: tau.square(),
        half_span,
        lane,
    };

    // Parallel sweep over source-lattice rows; per-thread bitmaps united by
    // a commutative OR, so the result is independent of scheduling.
    let rows: Vec<i64> = (-b_max..=b_max).collect();
    let marked = rows
        .par_iter()
        .try_fold(
            || CellGrid::new(dim, dim),
            |mut acc, &b| -> Result<CellGrid, Error> {
                let rem = (t_max - b * b) as u64;
                let a_max = rem.sqrt() as i64;
                let im = Dyadic::new(BigInt::from(b), g_d);
                for a in -a_max..=a_max {
                    let z = ComplexDyadic::new(Dyadic::new(BigInt::from(a), g_d), im.clone());
                    let v = approx.eval(&z)?;
                    for (yi, yj) in plan.hits(&v)? {
                        acc.set((yj + half_span) as usize, (yi + half_span) as usize);
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || CellGrid::new(dim, dim),
            |mut a, b| {
                a.union_with(&b);
                Ok(a)
            },
        )?;

    let mut points = BTreeSet::new();
    marked.for_each_set(|row, col| {
        points.insert((col as i64 - half_span, row as i64 - half_span));
    });

    // Deterministic sample trace: the first few points in row-major order.
    let samples = if matches!(mode, TraceMode::Full) {
        let mut out = Vec::new();
        'outer: for b in -b_max..=b_max {
            let rem = (t_max - b * b) as u64;
            let a_max = rem.sqrt() as i64;
            for a in -a_max..=a_max {
                let z = ComplexDyadic::new(
                    Dyadic::new(BigInt::from(a), g_d),
                    Dyadic::new(BigInt::from(b), g_d),
                );
                let v = approx.eval(&z)?;
                out.push((z, v));
                if out.len() == 64 {
                    break 'outer;
                }
            }
        }
        out
    } else {
        Vec::new()
    };

    let trace = GridBuildTrace {
        eps: eps.clone(),
        delta: delta.clone(),
        delta_d,
        tolerance: tol,
        source_count,
        image_count: points.len() as u64,
        window_dim: dim as u64,
        truncation_order: approx.truncation_order(),
        digit_depth: approx.digit_depth(),
        fast_eval: approx.uses_fast_path(),
        integer_lane: plan.lane.is_some(),
        samples,
    };
    Ok((
        CoveringGrid {
            eps: eps.clone(),
            delta,
            points,
        },
        trace,
    ))
}

/// Two-sided dyadic enclosure of a disc radius derived from an exact
/// squared lattice distance `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscEstimate {
    /// The exact integer: max over the set of the squared lattice distance
    /// to the set's complement.
    pub s: i64,
    pub lower: Dyadic,
    pub upper: Dyadic,
}

/// `√s` bracketed downward/upward on a grid fine enough that scaling by
/// `delta` keeps each end within `2^-prec` of the true root multiple.
fn root_bracket(s: i64, delta: &Dyadic, prec: u32) -> (Dyadic, Dyadic) {
    let grid = -(prec as i64) - delta.floor_log2() - 2;
    let s_dy = Dyadic::from_int(s);
    let lo = Dyadic::sqrt_to_grid(&s_dy, grid, Rounding::Down).expect("s ≥ 0");
    let hi = Dyadic::sqrt_to_grid(&s_dy, grid, Rounding::Up).expect("s ≥ 0");
    (lo, hi)
}

/// Enclosure of `δ·(√s + offset)` with width at most `2^-prec`, the lower
/// end clamped at 0.
pub(crate) fn disc_enclosure(s: i64, delta: &Dyadic, offset: i64, prec: u32) -> DiscEstimate {
    let (root_lo, root_hi) = root_bracket(s, delta, prec);
    let off = Dyadic::from_int(offset);
    let lower_raw = delta * &(&root_lo + &off);
    let lower = if lower_raw.is_negative() {
        Dyadic::zero()
    } else {
        lower_raw
    };
    let upper = delta * &(&root_hi + &off);
    let width = &upper - &lower;
    assert!(
        width <= Dyadic::two_pow(-(prec as i64)),
        "enclosure width must meet the requested precision"
    );
    DiscEstimate { s, lower, upper }
}

/// Estimates the inscribed-disc radius certified by a covering grid.
///
/// `s` is the exact maximum over grid points of the squared lattice
/// distance to the complement of the point set; the returned enclosure
/// brackets `δ·(1 + √s)` with width at most `2^-prec`.
pub fn inscribed_radius_estimate(grid: &CoveringGrid, prec: u32) -> Result<DiscEstimate, Error> {
    let s = max_square_distance(&grid.points)?;
    Ok(disc_enclosure(s, &grid.delta, 1, prec))
}

/// Exact `max_{g ∈ points} dist²(g, ℤ² ∖ points)` via the distance
/// transform on the one-cell-inflated bounding window.
fn max_square_distance(points: &BTreeSet<(i64, i64)>) -> Result<i64, Error> {
    if points.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (mut min_i, mut max_i, mut min_j, mut max_j) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(i, j) in points {
        min_i = min_i.min(i);
        max_i = max_i.max(i);
        min_j = min_j.min(j);
        max_j = max_j.max(j);
    }
    let rows = (max_i - min_i + 3) as u64;
    let cols = (max_j - min_j + 3) as u64;
    if rows > 30_000 || cols > 30_000 {
        return Err(Error::ResourceCap(format!(
            "distance-transform window {rows}×{cols} exceeds the supported size"
        )));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let mut cells = CellGrid::new(rows, cols);
    for &(i, j) in points {
        cells.set((i - min_i + 1) as usize, (j - min_j + 1) as usize);
    }
    let dist = squared_distance_to_complement(&cells);
    let mut best = 0i64;
    cells.for_each_set(|r, c| {
        best = best.max(dist[r * cols + c] as i64);
    });
    Ok(best)
}

/// Largest disc contained in a union of grid cells, bracketed to `2^-prec`.
///
/// Cells have pitch `delta` and are *centred* on lattice points (cell
/// `(i, j)` covers `(i·δ, j·δ) ± δ/2` per axis).  With `s` the exact max
/// over occupied cells of the squared lattice distance to the complement,
/// the true largest inscribed disc radius `R` satisfies
/// `δ·(√s − 1) ≤ R ≤ δ·(√s + 1)`:
///
/// * any point within `δ·(√s − 1)` of the best centre sits in a cell whose
///   centre is within `√s − 1 + √2/2 < √s` lattice units, hence occupied;
/// * conversely a disc `B(w, R)` inside the union keeps every complement
///   centre at distance ≥ `R` (each centre lies in its own cell's open
///   interior, which the disc cannot meet), so the centre nearest `w` —
///   occupied, within `√2/2·δ` of `w` — has complement distance greater
///   than `R/δ − 1` lattice units.
pub fn raster_largest_disc(
    mask: &CellGrid,
    delta: &Dyadic,
    prec: u32,
) -> Result<DiscEstimate, Error> {
    assert!(delta.is_positive(), "cell pitch must be positive");
    let mut points = BTreeSet::new();
    mask.for_each_set(|r, c| {
        points.insert((r as i64, c as i64));
    });
    let s = max_square_distance(&points)?;
    // Asymmetric bracket: each end is within 2^-prec of its exact target
    // δ·(√s ∓ 1); the ±1 slack itself is inherent to cell resolution.
    let (root_lo, root_hi) = root_bracket(s, delta, prec);
    let lower_raw = delta * &(&root_lo - &Dyadic::one());
    let lower = if lower_raw.is_negative() {
        Dyadic::zero()
    } else {
        lower_raw
    };
    let upper = delta * &(&root_hi + &Dyadic::one());
    Ok(DiscEstimate { s, lower, upper })
}
