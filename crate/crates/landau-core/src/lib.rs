//! Rigorous lower bounds for Landau's constant via exact dyadic arithmetic.
//!
//! Landau's constant is the infimum, over analytic functions on the unit
//! disc normalised by `f(0) = 0` and `f′(0) = 1`, of the radius of the
//! largest disc contained in the image `f(𝔻)`.  This crate computes
//! *certified* dyadic lower bounds for that radius, for single functions
//! and for breadth-first enumerations of a coefficient-box function class:
//!
//! * [`dyadic`] — exact arbitrary-precision dyadic arithmetic with
//!   directed rounding, plus enclosures of the constants `e` and `√2`;
//! * [`rect`] — quadrant symbols, words, and box refinement;
//! * [`schedule`] — the coefficient-bound schedule of the function class
//!   and the generic/injected derivative-sup providers;
//! * [`stream`] — interleaved symbol streams encoding one coefficient
//!   chain per channel, with query-depth instrumentation;
//! * [`eval`] — rigorous series evaluation (value, antiderivative,
//!   derivatives) to a requested tolerance, with sample audits for
//!   injected bounds;
//! * [`edt`] — an exact integer squared-distance transform on bitmaps;
//! * [`grid`] — certified covering grids of image discs and two-sided
//!   inscribed-radius estimates;
//! * [`certificate`] — the circle/margin/grid pipeline producing
//!   auditable lower-bound certificates;
//! * [`search`] — prefix enumeration of the class with exact infima and
//!   replay checks.
//!
//! All decision-making arithmetic is exact: comparisons are between
//! canonical dyadics, roundings are directed and grid-pinned, and every
//! parallel reduction is a commutative exact operation, so results are
//! bit-for-bit reproducible across thread counts.

pub mod certificate;
pub mod complex;
pub mod dyadic;
pub mod edt;
pub mod error;
pub mod eval;
pub mod grid;
pub mod rect;
pub mod schedule;
pub mod search;
pub mod stream;

pub use certificate::{
    certified_lower_bound, certify_circle_at, derive_grid_parameters, find_certified_circle,
    CertificateMode, CircleBudget, CircleWitness, GridParameters, LambdaCertificate,
    PipelineConfig,
};
pub use complex::ComplexDyadic;
pub use dyadic::{euler_enclosure, sqrt2_enclosure, Dyadic, Enclosure, Rounding};
pub use edt::{squared_distance_to_complement, CellGrid};
pub use error::Error;
pub use eval::{
    audit_first_sup, audit_second_sup, eval_series, EvalOrder, EvalRequest, SeriesApproximation,
};
pub use grid::{
    image_covering_grid, inscribed_radius_estimate, raster_largest_disc, CoveringGrid,
    DiscEstimate, GridBuildTrace, ResourceLimits, TraceMode,
};
pub use rect::{parse_word, word_to_string, Rect, Symbol, Word};
pub use schedule::{BoundSchedule, BoundsProvider};
pub use search::{
    landau_estimate, replay_word, words_of_length, SearchBudget, SearchReport, SearchStatus,
    WordResult,
};
pub use stream::{
    channel_position, coefficient_box, encode_coefficients, parse_stream_file, steer, PiStream,
    QueryLog,
};
