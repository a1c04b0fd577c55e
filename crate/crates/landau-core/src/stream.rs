//! Symbol streams: the infinite-word representation of analytic functions.
//!
//! A function with derivative series `f′(z) = 1 + Σ_{n≥1} a_n z^n` is
//! represented by one infinite word over `{1,2,3,4}`.  A fixed interleaving
//! schedule splits stream positions into *channels*, one per coefficient
//! index, and the successive symbols of channel `n` drive the quadrant
//! subdivision of the root box `[-m_n, m_n]^2`: after `k` symbols the
//! coefficient is pinned to a box of half-width `m_n·2^-k`.  Every channel
//! recurs infinitely often, so every coefficient can be refined to any
//! accuracy from one stream.
//!
//! # Interleaving schedule
//!
//! Positions are 1-based.  The channel of position `p` follows the
//! triangular pattern `0, 0, 1, 0, 1, 2, 0, 1, 2, 3, …`: block `j ≥ 1`
//! occupies positions `T_{j-1}+1 ..= T_j` (with `T_j = j(j+1)/2` the `j`-th
//! triangular number) and lists channels `0, 1, …, j-1` in order.  Channel
//! `n` therefore appears in every block `j > n`, at position `T_{j-1}+n+1` —
//! a closed form used by both directions of the lookup.
//!
//! Channel 0 is never attached to a coefficient (coefficients are indexed
//! from 1); it is reserved padding, which keeps the schedule exactly the
//! triangular sequence above while matching the series index set.
//!
//! # Query logging
//!
//! Reading position `p` records `p` into the stream's [`QueryLog`] (a
//! monotone maximum).  The search driver's stopping rule is built on this
//! instrumentation: a computation that never consulted positions beyond `t`
//! produces bit-identical results for *any* stream agreeing on the first `t`
//! symbols.  Logs are confined to one task; parallel pipelines clone the
//! stream view with [`PiStream::fork`] and merge depths back with
//! [`PiStream::absorb`].

use std::cell::Cell;
use std::sync::Arc;

use num_integer::Roots;

use crate::complex::ComplexDyadic;
use crate::error::Error;
use crate::rect::{parse_word, Rect, Symbol, Word};
use crate::schedule::BoundSchedule;

/// Triangular number `T_j = j(j+1)/2`.
fn triangular(j: u64) -> u64 {
    debug_assert!(j < (1 << 32), "block index overflows the position space");
    j * (j + 1) / 2
}

/// The `(channel, occurrence)` pair of a 1-based stream position.
///
/// `occurrence` counts from 1: it says this is the `occurrence`-th symbol of
/// that channel.
pub fn schedule_at(p: u64) -> (u64, u64) {
    assert!(p >= 1, "stream positions are 1-based");
    // Find the block j with T_{j-1} < p <= T_j; seed with the integer sqrt
    // of the inverted triangular formula, then correct exactly.
    let disc = 8u128 * p as u128 + 1;
    let mut j = ((disc.sqrt() - 1) / 2) as u64;
    while triangular(j) < p {
        j += 1;
    }
    while j >= 1 && triangular(j - 1) >= p {
        j -= 1;
    }
    let channel = p - triangular(j - 1) - 1;
    (channel, j - channel)
}

/// The stream position of the `occurrence`-th symbol of `channel`
/// (`occurrence ≥ 1`).
pub fn channel_position(channel: u64, occurrence: u64) -> u64 {
    assert!(occurrence >= 1, "occurrences are 1-based");
    let j = channel + occurrence; // the block containing it
    triangular(j - 1) + channel + 1
}

/// The first `count` positions of `channel`, in increasing order.
pub fn channel_positions(channel: u64, count: u64) -> Vec<u64> {
    (1..=count).map(|k| channel_position(channel, k)).collect()
}

/// Monotone record of the deepest stream position consulted.
#[derive(Debug, Default)]
pub struct QueryLog(Cell<u64>);

impl QueryLog {
    pub fn new() -> Self {
        QueryLog(Cell::new(0))
    }

    pub fn record(&self, p: u64) {
        if p > self.0.get() {
            self.0.set(p);
        }
    }

    /// Deepest position consulted so far; 0 if untouched.
    pub fn max_index(&self) -> u64 {
        self.0.get()
    }

    /// Max-merge another log into this one.
    pub fn merge_from(&self, other: &QueryLog) {
        self.record(other.max_index());
    }
}

/// How the underlying infinite word is generated.
#[derive(Debug)]
enum StreamSource {
    /// A finite word followed by an infinite run of the padding symbol.
    Padded { word: Word, filler: Symbol },
    /// Per-channel steering words produced by [`encode_coefficients`]:
    /// channel `n ∈ 1..=channels.len()` plays back its steering word and
    /// then pads with `filler`; channels beyond the list steer their box
    /// toward 0 forever (symbol `1`, then `3` repeated — the lower-left
    /// child of a centred square has 0 on its upper-right corner, and from
    /// then on the upper-right child keeps it there); channel 0 is padding.
    Steered { channels: Vec<Word>, filler: Symbol },
}

impl StreamSource {
    fn symbol_at(&self, p: u64) -> Symbol {
        match self {
            StreamSource::Padded { word, filler } => {
                let idx = (p - 1) as usize;
                word.get(idx).copied().unwrap_or(*filler)
            }
            StreamSource::Steered { channels, filler } => {
                let (n, k) = schedule_at(p);
                if n == 0 {
                    return *filler;
                }
                match channels.get((n - 1) as usize) {
                    Some(word) => word.get((k - 1) as usize).copied().unwrap_or(*filler),
                    None => {
                        if k == 1 {
                            Symbol::ONE
                        } else {
                            Symbol::THREE
                        }
                    }
                }
            }
        }
    }
}

/// A readable view of an infinite symbol stream with query instrumentation.
///
/// The source is shared and immutable; the query log belongs to this view.
/// A view is `Send` but deliberately not `Sync`: concurrent consumers fork
/// their own views and merge the logs afterwards.
#[derive(Debug)]
pub struct PiStream {
    source: Arc<StreamSource>,
    log: QueryLog,
}

impl PiStream {
    /// Stream consisting of `word` followed by `filler` repeated forever.
    pub fn padded(word: Word, filler: Symbol) -> Self {
        PiStream {
            source: Arc::new(StreamSource::Padded { word, filler }),
            log: QueryLog::new(),
        }
    }

    fn steered(channels: Vec<Word>, filler: Symbol) -> Self {
        PiStream {
            source: Arc::new(StreamSource::Steered { channels, filler }),
            log: QueryLog::new(),
        }
    }

    /// Reads the symbol at 1-based position `p`, recording `p` in the log.
    pub fn symbol_at(&self, p: u64) -> Symbol {
        self.log.record(p);
        self.source.symbol_at(p)
    }

    /// Deepest position consulted through this view (0 if none).
    pub fn query_depth(&self) -> u64 {
        self.log.max_index()
    }

    /// A new view of the same source with a fresh, empty log.
    pub fn fork(&self) -> PiStream {
        PiStream {
            source: Arc::clone(&self.source),
            log: QueryLog::new(),
        }
    }

    /// Max-merges the query depth of a forked view back into this one.
    pub fn absorb(&self, other: &PiStream) {
        self.log.merge_from(&other.log);
    }

    /// Materialises the first `len` symbols as a finite word.
    pub fn prefix(&self, len: u64) -> Word {
        (1..=len).map(|p| self.symbol_at(p)).collect()
    }
}

/// The coefficient box for channel `n ≥ 1` after `k` refinement steps:
/// the root `[-m_n, m_n]^2` refined by the first `k` symbols of channel `n`.
/// Reads `k` stream positions (recorded in the log).  The result has
/// half-width `m_n·2^-k` per axis and always contains coefficient `n` of
/// the encoded function.
pub fn coefficient_box(s: &PiStream, schedule: &BoundSchedule, n: u64, k: u32) -> Rect {
    assert!(n >= 1, "coefficients are indexed from 1");
    let root = Rect::centred_square(&schedule.coefficient_bound(n));
    let word: Word = (1..=k as u64)
        .map(|occ| s.symbol_at(channel_position(n, occ)))
        .collect();
    root.refine(&word)
}

/// Steers one coefficient toward `target` inside `root` for `depth` steps.
///
/// At each step the lowest-numbered child whose *closed* box contains the
/// target is chosen — the documented tie-break for targets that sit on a
/// child boundary, which keeps fixtures deterministic.
pub fn steer(root: &Rect, target: &ComplexDyadic, depth: u32) -> Word {
    let mut word = Word::with_capacity(depth as usize);
    let mut rect = root.clone();
    for _ in 0..depth {
        let sym = Symbol::all()
            .into_iter()
            .find(|&s| rect.child(s).contains(target))
            .expect("target inside the closed box stays inside some closed child");
        rect = rect.child(sym);
        word.push(sym);
    }
    word
}

/// Encodes a finite coefficient list as a stream.
///
/// `coeffs[i]` becomes coefficient `i+1` and must lie strictly inside its
/// root box `[-m_n, m_n]^2`.  Channel `n`'s boxes then contain the target at
/// every refinement depth `k ≤ depth`; beyond `depth` the channel pads with
/// symbol `1`.  Channels past the list are steered to the value 0 forever,
/// so an empty list encodes the identity-derivative function `f′ ≡ 1`
/// (every coefficient box shrinks onto the origin).
pub fn encode_coefficients(
    coeffs: &[ComplexDyadic],
    schedule: &BoundSchedule,
    depth: u32,
) -> Result<PiStream, Error> {
    let mut channels = Vec::with_capacity(coeffs.len());
    for (i, target) in coeffs.iter().enumerate() {
        let n = (i + 1) as u64;
        let root = Rect::centred_square(&schedule.coefficient_bound(n));
        if !root.contains_strictly(target) {
            return Err(Error::CoefficientOutOfBounds { index: n as usize });
        }
        channels.push(steer(&root, target, depth));
    }
    Ok(PiStream::steered(channels, Symbol::ONE))
}

/// Parses a stream fixture from its text form.
///
/// Two formats are accepted; blank lines and `#` comments are skipped:
///
/// * padded-word form — first content line `pad=1`, optional second line a
///   finite word over `1234` (absent means the empty word);
/// * coefficient form — lines `n re im` with `n ≥ 1` and dyadic components
///   in `MpE` notation, fed through [`encode_coefficients`] with the given
///   steering depth.  Missing indices encode as 0; an empty file is the
///   identity fixture.
pub fn parse_stream_file(
    text: &str,
    schedule: &BoundSchedule,
    encode_depth: u32,
) -> Result<PiStream, Error> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if let Some(first) = lines.first() {
        if let Some(pad) = first.strip_prefix("pad=") {
            if pad.trim() != "1" {
                return Err(Error::Parse(format!(
                    "unsupported padding symbol {pad:?} (only pad=1 is defined)"
                )));
            }
            if lines.len() > 2 {
                return Err(Error::Parse(
                    "padded stream file has trailing content".into(),
                ));
            }
            let word = match lines.get(1) {
                Some(w) => parse_word(w)?,
                None => Word::new(),
            };
            return Ok(PiStream::padded(word, Symbol::ONE));
        }
    }
    // Coefficient fixture form.
    let mut entries: Vec<(u64, ComplexDyadic)> = Vec::new();
    for line in &lines {
        let mut parts = line.split_whitespace();
        let (n, re, im) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(re), Some(im), None) => (n, re, im),
            _ => {
                return Err(Error::Parse(format!(
                    "expected \"n re im\" coefficient line, got {line:?}"
                )))
            }
        };
        let n: u64 = n
            .parse()
            .map_err(|_| Error::Parse(format!("invalid coefficient index {n:?}")))?;
        if n == 0 {
            return Err(Error::Parse("coefficient indices start at 1".into()));
        }
        let value = ComplexDyadic::new(re.parse()?, im.parse()?);
        if entries.iter().any(|(m, _)| *m == n) {
            return Err(Error::Parse(format!("duplicate coefficient index {n}")));
        }
        entries.push((n, value));
    }
    let max_n = entries.iter().map(|(n, _)| *n).max().unwrap_or(0);
    let mut coeffs = vec![ComplexDyadic::zero(); max_n as usize];
    for (n, v) in entries {
        coeffs[(n - 1) as usize] = v;
    }
    encode_coefficients(&coeffs, schedule, encode_depth)
}
