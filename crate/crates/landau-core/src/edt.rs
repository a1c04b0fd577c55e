//! Exact squared Euclidean distance transform on cell grids.
//!
//! Input is a rectangular boolean grid of cells; output is, per cell, the
//! exact squared Euclidean distance (in cell units) to the nearest cell of
//! the *complement* of the occupied set.  All arithmetic is integer, so the
//! result is exact and independent of evaluation order or thread count.
//!
//! Callers are expected to pass a window that contains the occupied set
//! with at least one empty boundary ring (an inflated bounding box).  Under
//! that convention the window is self-contained: for any cell `x` inside
//! the window and any complement cell `y` outside it, clamping `y`'s
//! coordinates to the window moves each coordinate weakly closer to `x` and
//! lands on the boundary ring, which is itself complement.  Hence the
//! nearest complement cell within the window is the nearest overall, and
//! the transform computed on the window alone is the true unbounded one.
//! The convention also guarantees every row contains a complement cell,
//! which the row pass asserts.
//!
//! The transform runs in two separable passes: a two-sweep row pass
//! producing horizontal distances, then a column pass computing the lower
//! envelope of the parabolas `i ↦ (i − i′)² + rowdist(i′)²` per column.
//! Envelope takeover abscissae are rationals; they are compared by cross
//! multiplication in `i64`, which cannot overflow for supported grid sizes
//! (dimensions are capped at 30 000, so numerators stay below `2³³` and
//! cross products below `2⁵⁰`).

use rayon::prelude::*;

/// Largest supported dimension; keeps squared distances within `i32` and
/// envelope cross products within `i64`.
const MAX_DIM: usize = 30_000;

/// A row-major rectangular grid of boolean cells, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGrid {
    rows: usize,
    cols: usize,
    words: Vec<u64>,
}

impl CellGrid {
    /// An all-empty grid.  Panics if a dimension exceeds the supported cap.
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid must be non-empty");
        assert!(
            rows <= MAX_DIM && cols <= MAX_DIM,
            "grid dimension exceeds {MAX_DIM}"
        );
        let bits = rows * cols;
        CellGrid {
            rows,
            cols,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn bit_index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize) {
        let b = self.bit_index(row, col);
        self.words[b / 64] |= 1u64 << (b % 64);
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        let b = self.bit_index(row, col);
        self.words[b / 64] >> (b % 64) & 1 == 1
    }

    /// Number of occupied cells.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Unions another grid of identical shape into this one.
    pub fn union_with(&mut self, other: &CellGrid) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    /// Calls `f(row, col)` for every occupied cell, in row-major order.
    pub fn for_each_set(&self, mut f: impl FnMut(usize, usize)) {
        for (wi, &word) in self.words.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = wi * 64 + w.trailing_zeros() as usize;
                if b < self.rows * self.cols {
                    f(b / self.cols, b % self.cols);
                }
                w &= w - 1;
            }
        }
    }
}

/// Horizontal pass: per cell, the distance (in columns) to the nearest
/// complement cell in its own row.  Panics if some row has no complement
/// cell — windows must carry an empty boundary ring.
fn row_distances(grid: &CellGrid) -> Vec<i32> {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut out = vec![0i32; rows * cols];
    out.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
        let inf = i32::MAX / 4;
        let mut d = inf;
        for (j, cell) in row.iter_mut().enumerate() {
            d = if grid.get(i, j) {
                d.saturating_add(1)
            } else {
                0
            };
            *cell = d;
        }
        // Distance is 1-Lipschitz along the row, so a backward relaxation
        // folds in the nearest complement cell on the right.
        for j in (0..cols - 1).rev() {
            row[j] = row[j].min(row[j + 1] + 1);
        }
        let worst = *row.iter().max().unwrap();
        assert!(
            (worst as usize) <= cols,
            "row {i} contains no complement cell; pass a window with an empty boundary ring"
        );
    });
    out
}

/// Lower envelope of `i ↦ (i − q)² + f[q]` over one line (Felzenszwalb &
/// Huttenlocher), with exact rational takeover points.
fn envelope_line(f: &[i64], out: &mut [i32]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n);
    // Takeover abscissa between parabolas p < q: ((f[q]+q²)−(f[p]+p²)) / (2(q−p)).
    let intersect = |p: usize, q: usize| -> (i64, i64) {
        let (p, q) = (p as i64, q as i64);
        (
            (f[q as usize] + q * q) - (f[p as usize] + p * p),
            2 * (q - p),
        )
    };
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut zn: Vec<i64> = Vec::with_capacity(n + 1);
    let mut zd: Vec<i64> = Vec::with_capacity(n + 1);
    v.push(0);
    zn.push(0); // index 0 is a −∞ sentinel, never compared
    zd.push(1);
    for q in 1..n {
        let mut s = intersect(*v.last().unwrap(), q);
        while v.len() > 1 {
            let k = v.len() - 1;
            // Pop while the new takeover is at or left of the previous one.
            if s.0 * zd[k] <= zn[k] * s.1 {
                v.pop();
                zn.pop();
                zd.pop();
                s = intersect(*v.last().unwrap(), q);
            } else {
                break;
            }
        }
        v.push(q);
        zn.push(s.0);
        zd.push(s.1);
    }
    let mut k = 0usize;
    for (i, slot) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && zn[k + 1] < (i as i64) * zd[k + 1] {
            k += 1;
        }
        let d = i as i64 - v[k] as i64;
        *slot = (d * d + f[v[k]]) as i32;
    }
}

/// Parallel transpose of a row-major `rows × cols` matrix.
fn transpose(src: &[i32], rows: usize, cols: usize) -> Vec<i32> {
    let mut dst = vec![0i32; rows * cols];
    dst.par_chunks_mut(rows).enumerate().for_each(|(j, drow)| {
        for (i, slot) in drow.iter_mut().enumerate() {
            *slot = src[i * cols + j];
        }
    });
    dst
}

/// Exact squared Euclidean distance from every cell to the complement of
/// the occupied set, row-major.  Complement cells map to 0.
///
/// Requires the occupied set to avoid the window's boundary ring (see the
/// module docs); violating rows are rejected by assertion.
pub fn squared_distance_to_complement(grid: &CellGrid) -> Vec<i32> {
    let (rows, cols) = (grid.rows, grid.cols);
    let horiz = row_distances(grid);
    // Column pass over the transpose, so each unit of parallel work is a
    // contiguous line.
    let columns = transpose(&horiz, rows, cols);
    let mut result_t = vec![0i32; rows * cols];
    result_t
        .par_chunks_mut(rows)
        .zip(columns.par_chunks(rows))
        .for_each(|(out, g)| {
            let f: Vec<i64> = g.iter().map(|&d| (d as i64) * (d as i64)).collect();
            envelope_line(&f, out);
        });
    transpose(&result_t, cols, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(n²·m²) reference: scan all complement cells.
    fn brute_force(grid: &CellGrid) -> Vec<i32> {
        let (rows, cols) = (grid.rows(), grid.cols());
        let mut out = vec![0i32; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let mut best = i64::MAX;
                for p in 0..rows {
                    for q in 0..cols {
                        if !grid.get(p, q) {
                            let d = (i as i64 - p as i64).pow(2) + (j as i64 - q as i64).pow(2);
                            best = best.min(d);
                        }
                    }
                }
                out[i * cols + j] = best as i32;
            }
        }
        out
    }

    #[test]
    #[allow(clippy::identity_op)] // indices written as row·cols + col
    fn single_cell_and_plus_shape() {
        // One occupied cell in a 3×3 window: distance² = 1.
        let mut g = CellGrid::new(3, 3);
        g.set(1, 1);
        let d = squared_distance_to_complement(&g);
        assert_eq!(d[1 * 3 + 1], 1);
        assert_eq!(d[0], 0);

        // A plus shape in a 5×5 window; the centre sees complement at the
        // four diagonal neighbours: distance² = 2.
        let mut g = CellGrid::new(5, 5);
        for (i, j) in [(1, 2), (2, 1), (2, 2), (2, 3), (3, 2)] {
            g.set(i, j);
        }
        let d = squared_distance_to_complement(&g);
        assert_eq!(d[2 * 5 + 2], 2);
        assert_eq!(d[1 * 5 + 2], 1);
        assert_eq!(brute_force(&g), d);
    }

    #[test]
    fn solid_block_matches_oracle() {
        let mut g = CellGrid::new(12, 9);
        for i in 1..11 {
            for j in 1..8 {
                g.set(i, j);
            }
        }
        assert_eq!(squared_distance_to_complement(&g), brute_force(&g));
    }

    #[test]
    #[should_panic(expected = "no complement cell")]
    fn full_row_is_rejected() {
        let mut g = CellGrid::new(3, 3);
        for j in 0..3 {
            g.set(1, j);
        }
        squared_distance_to_complement(&g);
    }

    #[test]
    fn grid_bit_ops() {
        let mut g = CellGrid::new(2, 70); // spans multiple words
        g.set(0, 0);
        g.set(0, 69);
        g.set(1, 31);
        assert!(g.get(0, 69) && !g.get(1, 69));
        assert_eq!(g.count(), 3);
        let mut seen = Vec::new();
        g.for_each_set(|i, j| seen.push((i, j)));
        assert_eq!(seen, vec![(0, 0), (0, 69), (1, 31)]);
        let mut h = CellGrid::new(2, 70);
        h.set(1, 0);
        h.union_with(&g);
        assert_eq!(h.count(), 4);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            rows in 3usize..16,
            cols in 3usize..16,
            fill in proptest::collection::vec(any::<bool>(), 196),
        ) {
            // Random occupancy strictly inside an empty ring.
            let mut g = CellGrid::new(rows, cols);
            for i in 1..rows - 1 {
                for j in 1..cols - 1 {
                    if fill[(i * cols + j) % fill.len()] {
                        g.set(i, j);
                    }
                }
            }
            prop_assert_eq!(squared_distance_to_complement(&g), brute_force(&g));
        }
    }
}
