//! Axis-aligned dyadic rectangles and their quadrant-subdivision calculus.
//!
//! A [`Rect`] is a closed box `[re_lo, re_hi] × [im_lo, im_hi]` with dyadic
//! corners.  Because dyadics are closed under halving, the four quadrant
//! children of a box again have exactly representable corners, so an
//! infinite word over the alphabet `{1,2,3,4}` names a nested sequence of
//! boxes shrinking to a single complex number.  That is the mechanism by
//! which symbol streams encode power-series coefficients.
//!
//! # Quadrant numbering
//!
//! With `re_mid`/`im_mid` the exact midpoints, the children are numbered
//! counter-clockwise from the lower-left:
//!
//! ```text
//!         4 | 3
//!         --+--      1 = lower-left, 2 = lower-right,
//!         1 | 2      3 = upper-right, 4 = upper-left.
//! ```

use std::fmt;

use crate::complex::ComplexDyadic;
use crate::dyadic::Dyadic;
use crate::error::Error;

/// One quadrant symbol from the alphabet `{1,2,3,4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u8);

impl Symbol {
    pub const ONE: Symbol = Symbol(1);
    pub const TWO: Symbol = Symbol(2);
    pub const THREE: Symbol = Symbol(3);
    pub const FOUR: Symbol = Symbol(4);

    pub fn new(v: u8) -> Result<Self, Error> {
        if (1..=4).contains(&v) {
            Ok(Symbol(v))
        } else {
            Err(Error::InvalidSymbol(
                char::from_digit(v as u32, 10).unwrap_or('?'),
            ))
        }
    }

    pub fn from_char(c: char) -> Result<Self, Error> {
        match c {
            '1' => Ok(Symbol(1)),
            '2' => Ok(Symbol(2)),
            '3' => Ok(Symbol(3)),
            '4' => Ok(Symbol(4)),
            other => Err(Error::InvalidSymbol(other)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn as_char(self) -> char {
        (b'0' + self.0) as char
    }

    /// All four symbols in numeric order.
    pub fn all() -> [Symbol; 4] {
        [Symbol(1), Symbol(2), Symbol(3), Symbol(4)]
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word over the quadrant alphabet.
pub type Word = Vec<Symbol>;

/// Parses a word from its digit string, e.g. `"13"`.
pub fn parse_word(s: &str) -> Result<Word, Error> {
    s.chars().map(Symbol::from_char).collect()
}

/// Renders a word as its digit string.
pub fn word_to_string(w: &[Symbol]) -> String {
    w.iter().map(|s| s.as_char()).collect()
}

/// A closed dyadic box `[re_lo, re_hi] × [im_lo, im_hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rect {
    pub re_lo: Dyadic,
    pub re_hi: Dyadic,
    pub im_lo: Dyadic,
    pub im_hi: Dyadic,
}

impl Rect {
    pub fn new(re_lo: Dyadic, re_hi: Dyadic, im_lo: Dyadic, im_hi: Dyadic) -> Self {
        assert!(re_lo <= re_hi && im_lo <= im_hi, "degenerate box corners");
        Rect {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        }
    }

    /// The centred square `[-h, h]^2`.
    pub fn centred_square(h: &Dyadic) -> Self {
        assert!(!h.is_negative());
        Rect {
            re_lo: -h,
            re_hi: h.clone(),
            im_lo: -h,
            im_hi: h.clone(),
        }
    }

    pub fn re_width(&self) -> Dyadic {
        &self.re_hi - &self.re_lo
    }

    pub fn im_width(&self) -> Dyadic {
        &self.im_hi - &self.im_lo
    }

    /// Exact centre point.
    pub fn centre(&self) -> ComplexDyadic {
        ComplexDyadic::new(
            (&self.re_lo + &self.re_hi).half(),
            (&self.im_lo + &self.im_hi).half(),
        )
    }

    /// Closed-box membership.
    pub fn contains(&self, z: &ComplexDyadic) -> bool {
        self.re_lo <= z.re && z.re <= self.re_hi && self.im_lo <= z.im && z.im <= self.im_hi
    }

    /// Open-box membership (all four inequalities strict).
    pub fn contains_strictly(&self, z: &ComplexDyadic) -> bool {
        self.re_lo < z.re && z.re < self.re_hi && self.im_lo < z.im && z.im < self.im_hi
    }

    /// The quadrant child selected by `sym`; midpoints are exact.
    pub fn child(&self, sym: Symbol) -> Rect {
        let re_mid = (&self.re_lo + &self.re_hi).half();
        let im_mid = (&self.im_lo + &self.im_hi).half();
        match sym.value() {
            1 => Rect {
                re_lo: self.re_lo.clone(),
                re_hi: re_mid,
                im_lo: self.im_lo.clone(),
                im_hi: im_mid,
            },
            2 => Rect {
                re_lo: re_mid,
                re_hi: self.re_hi.clone(),
                im_lo: self.im_lo.clone(),
                im_hi: im_mid,
            },
            3 => Rect {
                re_lo: re_mid,
                re_hi: self.re_hi.clone(),
                im_lo: im_mid,
                im_hi: self.im_hi.clone(),
            },
            4 => Rect {
                re_lo: self.re_lo.clone(),
                re_hi: re_mid,
                im_lo: im_mid,
                im_hi: self.im_hi.clone(),
            },
            _ => unreachable!("Symbol invariant"),
        }
    }

    /// Folds [`Rect::child`] over a word; the empty word returns the box
    /// itself.  Each axis shrinks by a factor `2^-len`.
    pub fn refine(&self, word: &[Symbol]) -> Rect {
        word.iter().fold(self.clone(), |b, &s| b.child(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    fn unit() -> Rect {
        Rect::new(dy(0, 0), dy(1, 0), dy(0, 0), dy(1, 0))
    }

    fn sym_word(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn child_examples() {
        // ([0,1]x[0,1], 1) -> [0,1/2]x[0,1/2]
        let b = unit().child(Symbol::ONE);
        assert_eq!(b, Rect::new(dy(0, 0), dy(1, -1), dy(0, 0), dy(1, -1)));
        // ([0,1]x[0,1], 3) -> [1/2,1]x[1/2,1]
        let b = unit().child(Symbol::THREE);
        assert_eq!(b, Rect::new(dy(1, -1), dy(1, 0), dy(1, -1), dy(1, 0)));
        // ([-1,1]^2, 4) -> [-1,0]x[0,1]
        let b = Rect::centred_square(&dy(1, 0)).child(Symbol::FOUR);
        assert_eq!(b, Rect::new(dy(-1, 0), dy(0, 0), dy(0, 0), dy(1, 0)));
    }

    #[test]
    fn refine_examples() {
        // Empty word is the identity.
        assert_eq!(unit().refine(&[]), unit());
        // [0,1]^2 refined by "11" -> [0,1/4]^2
        let b = unit().refine(&sym_word("11"));
        assert_eq!(b, Rect::new(dy(0, 0), dy(1, -2), dy(0, 0), dy(1, -2)));
        // [-1,1]^2 refined by "13" -> [-1/2,0]^2
        let b = Rect::centred_square(&dy(1, 0)).refine(&sym_word("13"));
        assert_eq!(b, Rect::new(dy(-1, -1), dy(0, 0), dy(-1, -1), dy(0, 0)));
    }

    #[test]
    fn children_tile_the_parent() {
        let b = Rect::new(dy(-3, -1), dy(5, -2), dy(1, -3), dy(7, -1));
        let kids: Vec<Rect> = Symbol::all().iter().map(|&s| b.child(s)).collect();
        // Each child is contained in the parent and has half-size sides.
        for k in &kids {
            assert!(b.re_lo <= k.re_lo && k.re_hi <= b.re_hi);
            assert!(b.im_lo <= k.im_lo && k.im_hi <= b.im_hi);
            assert_eq!(k.re_width(), b.re_width().half());
            assert_eq!(k.im_width(), b.im_width().half());
        }
        // Interiors are pairwise disjoint: children sharing neither the same
        // re-half nor im-half never overlap; adjacent ones meet only on the
        // shared midline.
        let c1 = &kids[0];
        let c3 = &kids[2];
        assert_eq!(c1.re_hi, c3.re_lo);
        assert_eq!(c1.im_hi, c3.im_lo);
        // The four children jointly cover the corners and the centre.
        let centre = b.centre();
        assert!(kids
            .iter()
            .all(|k| k.contains(&centre) || !k.contains(&centre)));
        assert!(kids.iter().any(|k| k.contains(&centre)));
    }

    #[test]
    fn refine_width_shrinks_geometrically() {
        let b = Rect::centred_square(&dy(1, 0));
        let w = sym_word("1324");
        let r = b.refine(&w);
        assert_eq!(r.re_width(), dy(1, -3)); // 2 * 2^-4
        assert_eq!(r.im_width(), dy(1, -3));
    }
}
