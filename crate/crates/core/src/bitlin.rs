//! 64-bit words as row vectors over F2.
//!
//! A word `x` is the vector `(x_1, ..., x_64)` with `x_1` the most
//! significant bit, so the integer value is `sum x_i 2^(64-i)`. Under this
//! orientation the left shift `L` multiplies by two and the right shift `R`
//! halves (dropping the low bit).
//!
//! [`BitMatrix64`] materializes these linear maps explicitly. It is only used
//! to cross-check the word-level operations; the generator never touches it.

use std::fmt;
use std::ops::Mul;

use crate::error::Error;

/// A 64-bit word, read as a row vector in F2^64 (MSB first).
pub type Word64 = u64;

/// A validated shift count in `0..=63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shift(u32);

impl Shift {
    pub fn new(count: u32) -> Result<Self, Error> {
        if count > 63 {
            return Err(Error::ShiftOutOfRange(count));
        }
        Ok(Shift(count))
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

/// `x L^a`, i.e. `2^a x mod 2^64`.
#[inline(always)]
pub fn shl(x: Word64, a: Shift) -> Word64 {
    x << a.0
}

/// `x R^b`, a logical right shift.
#[inline(always)]
pub fn shr(x: Word64, b: Shift) -> Word64 {
    x >> b.0
}

/// The word action of `I ⊕ L^a` (left) or `I ⊕ R^a` (right).
#[inline(always)]
pub fn xorshift_xform(x: Word64, a: Shift, dir: Direction) -> Word64 {
    match dir {
        Direction::Left => x ^ shl(x, a),
        Direction::Right => x ^ shr(x, a),
    }
}

/// The `i`-th standard basis vector, 1-based with `e_1` the MSB.
pub fn basis(i: usize) -> Word64 {
    assert!((1..=64).contains(&i), "basis index {i} outside 1..=64");
    1u64 << (64 - i)
}

/// Bit `x_i` of a word, 1-based from the MSB.
pub fn coordinate(x: Word64, i: usize) -> u8 {
    ((x & basis(i)) != 0) as u8
}

/// A 64x64 matrix over F2 acting on row vectors from the right.
///
/// `rows[i]` is row `i + 1`; `v M` is the xor of the rows selected by the
/// set coordinates of `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix64 {
    rows: [Word64; 64],
}

impl BitMatrix64 {
    pub fn identity() -> Self {
        Self::from_linear_map(|v| v)
    }

    pub fn from_rows(rows: [Word64; 64]) -> Self {
        BitMatrix64 { rows }
    }

    /// Materializes an F2-linear map: row `i` is `op(e_i)`.
    ///
    /// The caller is responsible for `op` actually being linear; a nonlinear
    /// map produces a matrix that only agrees with it on the basis.
    pub fn from_linear_map<F: Fn(Word64) -> Word64>(op: F) -> Self {
        let mut rows = [0u64; 64];
        for (i, row) in rows.iter_mut().enumerate() {
            *row = op(basis(i + 1));
        }
        BitMatrix64 { rows }
    }

    pub fn rows(&self) -> &[Word64; 64] {
        &self.rows
    }

    /// Row `i`, 1-based.
    pub fn row(&self, i: usize) -> Word64 {
        self.rows[i - 1]
    }

    /// Entry `(i, j)`, both 1-based.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        coordinate(self.row(i), j)
    }

    /// `v M`.
    pub fn act(&self, v: Word64) -> Word64 {
        let mut acc = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            if v & basis(i + 1) != 0 {
                acc ^= row;
            }
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        let mut rows = [0u64; 64];
        for (j, out) in rows.iter_mut().enumerate() {
            for i in 0..64 {
                if self.rows[i] & basis(j + 1) != 0 {
                    *out |= basis(i + 1);
                }
            }
        }
        BitMatrix64 { rows }
    }
}

impl Mul for &BitMatrix64 {
    type Output = BitMatrix64;

    /// Row `i` of `A B` is `(row_i A) B`.
    fn mul(self, rhs: &BitMatrix64) -> BitMatrix64 {
        let mut rows = [0u64; 64];
        for (out, row) in rows.iter_mut().zip(self.rows.iter()) {
            *out = rhs.act(*row);
        }
        BitMatrix64 { rows }
    }
}

impl std::ops::BitXor for &BitMatrix64 {
    type Output = BitMatrix64;

    fn bitxor(self, rhs: &BitMatrix64) -> BitMatrix64 {
        let mut rows = self.rows;
        for (out, r) in rows.iter_mut().zip(rhs.rows.iter()) {
            *out ^= r;
        }
        BitMatrix64 { rows }
    }
}

impl fmt::Debug for BitMatrix64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row:064b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(a: u32) -> Shift {
        Shift::new(a).unwrap()
    }

    #[test]
    fn shift_range() {
        assert!(Shift::new(63).is_ok());
        assert!(matches!(Shift::new(64), Err(Error::ShiftOutOfRange(64))));
    }

    #[test]
    fn shl_examples() {
        assert_eq!(shl(1, s(23)), 0x800000);
        assert_eq!(shl(0xdead_beef, s(0)), 0xdead_beef);
        assert_eq!(shl(0x8000_0000_0000_0000, s(1)), 0);
    }

    #[test]
    fn shr_examples() {
        assert_eq!(shr(0x800001, s(17)), 0x40);
        assert_eq!(shr(0xdead_beef, s(0)), 0xdead_beef);
        assert_eq!(shr(1, s(1)), 0);
    }

    #[test]
    fn xform_examples() {
        assert_eq!(xorshift_xform(1, s(23), Direction::Left), 0x800001);
        assert_eq!(xorshift_xform(0, s(5), Direction::Left), 0);
        assert_eq!(xorshift_xform(0, s(5), Direction::Right), 0);
        assert_eq!(xorshift_xform(0x800001, s(17), Direction::Right), 0x800041);
    }

    #[test]
    fn msb_first_coordinates() {
        assert_eq!(basis(1), 1 << 63);
        assert_eq!(basis(64), 1);
        assert_eq!(coordinate(0b100, 62), 1);
        assert_eq!(coordinate(0b100, 64), 0);
    }

    #[test]
    fn identity_matrix() {
        let id = BitMatrix64::identity();
        for i in 1..=64 {
            assert_eq!(id.row(i), basis(i));
        }
    }

    #[test]
    fn left_shift_matrix_is_subdiagonal() {
        // L has ones directly below the diagonal: row i maps e_i to e_{i-1}.
        let l = BitMatrix64::from_linear_map(|v| shl(v, s(1)));
        assert_eq!(l.act(basis(64)), basis(63));
        assert_eq!(l.row(1), 0);
        for i in 2..=64 {
            for j in 1..=64 {
                assert_eq!(l.entry(i, j), (j + 1 == i) as u8, "L[{i},{j}]");
            }
        }
        let r = BitMatrix64::from_linear_map(|v| shr(v, s(1)));
        assert_eq!(r, l.transpose());
    }

    #[test]
    fn xform_matrix_matches_word_action() {
        let m = BitMatrix64::from_linear_map(|v| xorshift_xform(v, s(23), Direction::Left));
        let mut rng = crate::engine::SplitMix64(1);
        for _ in 0..1000 {
            let v = rng.next_u64();
            assert_eq!(m.act(v), xorshift_xform(v, s(23), Direction::Left));
        }
    }

    #[test]
    fn xform_matrix_is_identity_plus_shift() {
        let id = BitMatrix64::identity();
        let l23 = BitMatrix64::from_linear_map(|v| shl(v, s(23)));
        let m = BitMatrix64::from_linear_map(|v| xorshift_xform(v, s(23), Direction::Left));
        assert_eq!(m, &id ^ &l23);
    }

    proptest! {
        #[test]
        fn xform_is_linear(v: u64, w: u64, a in 0u32..64, left: bool) {
            let dir = if left { Direction::Left } else { Direction::Right };
            let a = s(a);
            prop_assert_eq!(
                xorshift_xform(v ^ w, a, dir),
                xorshift_xform(v, a, dir) ^ xorshift_xform(w, a, dir)
            );
        }

        #[test]
        fn shl_is_multiplication(x: u64, a in 0u32..64) {
            prop_assert_eq!(shl(x, s(a)), x.wrapping_mul(1u64 << a));
        }

        #[test]
        fn composition_reverses_matrix_order(v: u64, a in 1u32..64, b in 1u32..64) {
            let f = |x| xorshift_xform(x, s(a), Direction::Left);
            let g = |x| xorshift_xform(x, s(b), Direction::Right);
            let mf = BitMatrix64::from_linear_map(f);
            let mg = BitMatrix64::from_linear_map(g);
            // x (I ⊕ L^a)(I ⊕ R^b) = g(f(x))
            let composed = BitMatrix64::from_linear_map(|x| g(f(x)));
            prop_assert_eq!(&composed, &(&mf * &mg));
            prop_assert_eq!(composed.act(v), g(f(v)));
        }

        #[test]
        fn matrix_action_is_linear(v: u64, w: u64, a in 0u32..64) {
            let m = BitMatrix64::from_linear_map(|x| xorshift_xform(x, s(a), Direction::Right));
            prop_assert_eq!(m.act(v ^ w), m.act(v) ^ m.act(w));
        }
    }
}
