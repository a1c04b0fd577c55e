//! Breadth-first search over stream prefixes for a class-wide estimate.
//!
//! A function of the class is presented as an infinite quadrant-symbol
//! stream, so the infimum of the certified lower bound over the whole class
//! can be approached by enumerating all `4^t` symbol prefixes of length `t`
//! and running the certificate pipeline on each prefix padded with the
//! constant filler `'1'`.
//!
//! The enumeration at depth `t` is *exhaustive* exactly when every run
//! consulted only stream positions `≤ t`: the pipeline is deterministic, so
//! its run on any stream sharing a queried prefix is identical symbol for
//! symbol, and the padded representative stands for every class member with
//! that prefix.  [`SearchStatus::Certified`] records that situation; until
//! it occurs the report is labelled [`SearchStatus::BudgetExhausted`] and
//! the infimum is exact only over the sampled representatives (still a
//! valid certified lower bound for each of them).  [`replay_word`] checks
//! the prefix-invariance claim directly by re-running a recorded word with
//! all unqueried positions altered.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{certified_lower_bound, PipelineConfig};
use crate::dyadic::Dyadic;
use crate::error::Error;
use crate::rect::{parse_word, word_to_string, Symbol, Word};
use crate::schedule::BoundSchedule;
use crate::stream::PiStream;

/// All words of length `t` over the symbols `1..=4` in lexicographic order.
pub fn words_of_length(t: u32) -> Vec<Word> {
    assert!(t <= 13, "4^t words: refusing t > 13");
    let count = 4u64.pow(t);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut word = Vec::with_capacity(t as usize);
        for pos in (0..t).rev() {
            let digit = (idx >> (2 * pos)) & 3;
            word.push(Symbol::all()[digit as usize]);
        }
        out.push(word);
    }
    out
}

/// How deep the prefix enumeration is allowed to go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Maximum prefix length `t` (the level `t` costs `4^t` pipeline runs).
    pub max_t: u32,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_t: 1 }
    }
}

/// Outcome of one word's pipeline run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordResult {
    /// The prefix, written with the symbols `1..=4` (empty for `t = 0`).
    pub word: String,
    /// Certified lower bound reported for the padded representative.
    pub lower_bound: Dyadic,
    /// Deepest stream position the run consulted.
    pub query_depth: u64,
}

/// Whether the final level was exhaustive for the whole class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// Every run at the reported level stayed within the enumerated prefix,
    /// so `l_infimum` lower-bounds the whole class.
    Certified,
    /// Some run consulted positions beyond the level (or a deeper level was
    /// cut short); `l_infimum` is exact over the sampled words only.
    BudgetExhausted,
}

/// Result of [`landau_estimate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Precision index forwarded to every pipeline run.
    pub precision: u32,
    /// Requested maximum prefix length.
    pub requested_depth: u32,
    /// Deepest fully completed level; `results` belongs to it.
    pub completed_depth: u32,
    pub status: SearchStatus,
    /// Exact minimum of the per-word lower bounds.
    pub l_infimum: Dyadic,
    /// Maximum query depth across the reported level.
    pub max_query_depth: u64,
    pub results: Vec<WordResult>,
    /// Classical enclosure of Landau's constant, for context only; no
    /// computation in this crate consumes these digits.
    pub reference_lower: String,
    pub reference_upper: String,
}

fn assemble(
    precision: u32,
    requested_depth: u32,
    completed_depth: u32,
    status: SearchStatus,
    results: Vec<WordResult>,
) -> SearchReport {
    let l_infimum = results
        .iter()
        .map(|r| r.lower_bound.clone())
        .min()
        .expect("a completed level is never empty");
    let max_query_depth = results.iter().map(|r| r.query_depth).max().unwrap_or(0);
    SearchReport {
        precision,
        requested_depth,
        completed_depth,
        status,
        l_infimum,
        max_query_depth,
        results,
        reference_lower: "0.5".into(),
        reference_upper: "0.54325".into(),
    }
}

/// Runs the certificate pipeline over every prefix of length `0..=max_t`
/// and reports the level-wide infimum.
///
/// Words within a level run in parallel; results are kept in lexicographic
/// word order and all minima are exact, so the report is independent of
/// thread count.  Error policy per level: a pipeline
/// [`Error::BudgetExhausted`] at level 0 propagates (there is nothing to
/// report), at deeper levels it downgrades the search to the last completed
/// level; every other error always propagates.
pub fn landau_estimate(
    schedule: &BoundSchedule,
    precision: u32,
    config: &PipelineConfig,
    budget: &SearchBudget,
) -> Result<SearchReport, Error> {
    let mut last: Option<(u32, Vec<WordResult>)> = None;
    for t in 0..=budget.max_t {
        let outcomes: Vec<Result<WordResult, Error>> = words_of_length(t)
            .into_par_iter()
            .map(|w| {
                let label = word_to_string(&w);
                let s = PiStream::padded(w, Symbol::ONE);
                let (cert, _) = certified_lower_bound(&s, schedule, precision, config)?;
                Ok(WordResult {
                    word: label,
                    lower_bound: cert.lower_bound,
                    query_depth: cert.query_depth,
                })
            })
            .collect();
        let mut results = Vec::with_capacity(outcomes.len());
        for outcome in outcomes {
            match outcome {
                Ok(r) => results.push(r),
                Err(Error::BudgetExhausted(_)) if t > 0 => {
                    let (depth, prior) = last.expect("t > 0 implies a completed level");
                    return Ok(assemble(
                        precision,
                        budget.max_t,
                        depth,
                        SearchStatus::BudgetExhausted,
                        prior,
                    ));
                }
                Err(e) => return Err(e),
            }
        }
        if results.iter().all(|r| r.query_depth <= t as u64) {
            return Ok(assemble(
                precision,
                budget.max_t,
                t,
                SearchStatus::Certified,
                results,
            ));
        }
        last = Some((t, results));
    }
    let (depth, results) = last.expect("level 0 always completes or errors");
    Ok(assemble(
        precision,
        budget.max_t,
        depth,
        SearchStatus::BudgetExhausted,
        results,
    ))
}

/// Re-runs a recorded word with every unqueried position altered.
///
/// The replay stream repeats the recorded prefix, pads with `'1'` up to the
/// recorded query depth so all consulted positions match the original run,
/// and then switches the filler to `'3'`.  A sound record reproduces the
/// lower bound bit for bit, because the original run never consulted a
/// position beyond its recorded depth and the pipeline is deterministic.
pub fn replay_word(
    schedule: &BoundSchedule,
    precision: u32,
    config: &PipelineConfig,
    result: &WordResult,
) -> Result<Dyadic, Error> {
    let mut prefix = parse_word(&result.word)?;
    while (prefix.len() as u64) < result.query_depth {
        prefix.push(Symbol::ONE);
    }
    let s = PiStream::padded(prefix, Symbol::THREE);
    let (cert, _) = certified_lower_bound(&s, schedule, precision, config)?;
    Ok(cert.lower_bound)
}
