//! When xor agrees with integer sum or difference.
//!
//! For `n`-bit integers, `x ⊕ y = x + y` exactly when no column holds
//! `(1,1)`, `x ⊕ y = x - y` when no column holds `(0,1)`, and
//! `x ⊕ y = y - x` when no column holds `(1,0)`. These three columnwise
//! conditions are the cases A, B and C. Applied to the top bits of
//! `(s, 2^a s)` they give the inner multipliers `1+2^a`, `1-2^a`, `2^a-1`;
//! applied to the two xor operands of an output they give the outer signs.

use rayon::prelude::*;
use serde::Serialize;

use crate::bitlin::{shl, xorshift_xform, Direction, Shift, Word64};
use crate::error::Error;

pub const MAX_CLASSIFY_WIDTH: u32 = 16;
pub const MAX_EXHAUSTIVE_WIDTH: u32 = 12;
/// Largest `n` whose compound probability fits the `u128` rational.
pub const MAX_PROBABILITY_WIDTH: u32 = 15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CaseLabel {
    pub in_a: bool,
    pub in_b: bool,
    pub in_c: bool,
}

impl CaseLabel {
    pub fn any(&self) -> bool {
        self.in_a || self.in_b || self.in_c
    }

    pub fn all(&self) -> bool {
        self.in_a && self.in_b && self.in_c
    }

    fn from_bits(x: u64, y: u64, mask: u64) -> Self {
        CaseLabel {
            in_a: x & y & mask == 0,
            in_b: !x & y & mask == 0,
            in_c: x & !y & mask == 0,
        }
    }
}

fn check_width(n: u32, max: u32) -> Result<(), Error> {
    if n == 0 || n > max {
        return Err(Error::WidthOutOfRange { n, min: 1, max });
    }
    Ok(())
}

fn mask(n: u32) -> u64 {
    (1u64 << n) - 1
}

/// Columnwise case membership of an `n`-bit pair. Bits above `n` are ignored.
pub fn classify(x: u64, y: u64, n: u32) -> Result<CaseLabel, Error> {
    check_width(n, MAX_CLASSIFY_WIDTH)?;
    Ok(CaseLabel::from_bits(x, y, mask(n)))
}

/// The `n` most significant bits of a word, as an `n`-bit integer.
#[inline]
pub fn top_bits(s: Word64, n: u32) -> u64 {
    s >> (64 - n)
}

/// Inner case of `s ⊕ 2^a s` on the top `n` bits.
pub fn classify_inner(s: Word64, a: Shift, n: u32) -> Result<CaseLabel, Error> {
    check_width(n, MAX_CLASSIFY_WIDTH)?;
    Ok(CaseLabel::from_bits(
        top_bits(s, n),
        top_bits(shl(s, a), n),
        mask(n),
    ))
}

/// Outer case of `s_next ⊕ t` on the top `n` bits, where the caller passes
/// `t = s_i (I ⊕ L^a)`.
pub fn classify_outer(s_next: Word64, t: Word64, n: u32) -> Result<CaseLabel, Error> {
    check_width(n, MAX_CLASSIFY_WIDTH)?;
    Ok(CaseLabel::from_bits(
        top_bits(s_next, n),
        top_bits(t, n),
        mask(n),
    ))
}

/// Which of the three arithmetic readings of `u ⊕ v` actually match the top
/// `n` bits of the full 64-bit result: `(sum, u - v, v - u)`.
pub fn arithmetic_agreement(u: Word64, v: Word64, n: u32) -> (bool, bool, bool) {
    let x = top_bits(u ^ v, n);
    (
        x == top_bits(u.wrapping_add(v), n),
        x == top_bits(u.wrapping_sub(v), n),
        x == top_bits(v.wrapping_sub(u), n),
    )
}

/// Inner-case diagnostic: compares `s ⊕ 2^a s` against `(1+2^a)s`,
/// `(1-2^a)s` and `(2^a-1)s` modulo `2^64`, on the top `n` bits.
pub fn inner_agreement(s: Word64, a: Shift, n: u32) -> (bool, bool, bool) {
    arithmetic_agreement(s, shl(s, a), n)
}

/// Outer operand `s_i (I ⊕ L^a)`.
pub fn outer_operand(s: Word64, a: Shift) -> Word64 {
    xorshift_xform(s, a, Direction::Left)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub n: u32,
    pub total: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub ab: u64,
    pub bc: u64,
    pub ca: u64,
    pub abc: u64,
    pub union: u64,
}

impl CaseCounts {
    /// `#X = 4^n`, `#A = 3^n`, pairwise `2^n`, triple `1`, union
    /// `3·3^n - 3·2^n + 1`.
    pub fn closed_form(n: u32) -> Self {
        let p3 = 3u64.pow(n);
        let p2 = 2u64.pow(n);
        CaseCounts {
            n,
            total: 4u64.pow(n),
            a: p3,
            b: p3,
            c: p3,
            ab: p2,
            bc: p2,
            ca: p2,
            abc: 1,
            union: 3 * p3 - 3 * p2 + 1,
        }
    }

    pub fn inclusion_exclusion(&self) -> u64 {
        self.a + self.b + self.c + self.abc - self.ab - self.bc - self.ca
    }

    fn add(mut self, o: &Self) -> Self {
        self.total += o.total;
        self.a += o.a;
        self.b += o.b;
        self.c += o.c;
        self.ab += o.ab;
        self.bc += o.bc;
        self.ca += o.ca;
        self.abc += o.abc;
        self.union += o.union;
        self
    }

    fn tally(&mut self, l: CaseLabel) {
        self.total += 1;
        self.a += l.in_a as u64;
        self.b += l.in_b as u64;
        self.c += l.in_c as u64;
        self.ab += (l.in_a && l.in_b) as u64;
        self.bc += (l.in_b && l.in_c) as u64;
        self.ca += (l.in_c && l.in_a) as u64;
        self.abc += l.all() as u64;
        self.union += l.any() as u64;
    }
}

/// Enumerates all `4^n` pairs. Rows are counted in parallel and summed, so
/// the result does not depend on the partition.
pub fn count_cases(n: u32) -> Result<CaseCounts, Error> {
    check_width(n, MAX_EXHAUSTIVE_WIDTH)?;
    let m = mask(n);
    let counts = (0..=m)
        .into_par_iter()
        .map(|x| {
            let mut row = CaseCounts::default();
            for y in 0..=m {
                row.tally(CaseLabel::from_bits(x, y, m));
            }
            row
        })
        .reduce(CaseCounts::default, |acc, row| acc.add(&row));
    Ok(CaseCounts { n, ..counts })
}

/// Outcome of an exhaustive inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    pub n: u32,
    pub pairs: u64,
    /// Pairs where the inequality failed. Zero when the statement holds.
    pub inequality_violations: u64,
    /// Pairs where equality and the columnwise condition disagree.
    pub condition_mismatches: u64,
    pub equality_pairs: u64,
    /// Equality with the arithmetic side reduced mod `2^n`; only meaningful
    /// for the sum.
    pub modular_equality_pairs: Option<u64>,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.inequality_violations == 0 && self.condition_mismatches == 0
    }
}

/// `x ⊕ y <= x + y` over all `n`-bit pairs, with equality exactly when
/// `x & y == 0`. No modulus on the sum.
pub fn verify_xor_sum(n: u32) -> Result<InequalityCheck, Error> {
    check_width(n, MAX_EXHAUSTIVE_WIDTH)?;
    let m = mask(n);
    let (viol, mism, eq, modeq) = (0..=m)
        .into_par_iter()
        .map(|x| {
            let mut acc = (0u64, 0u64, 0u64, 0u64);
            for y in 0..=m {
                let xor = x ^ y;
                let sum = x + y;
                acc.0 += (xor > sum) as u64;
                acc.1 += ((xor == sum) != (x & y == 0)) as u64;
                acc.2 += (xor == sum) as u64;
                acc.3 += (xor == sum & m) as u64;
            }
            acc
        })
        .reduce(
            || (0, 0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3),
        );
    Ok(InequalityCheck {
        n,
        pairs: 1 << (2 * n),
        inequality_violations: viol,
        condition_mismatches: mism,
        equality_pairs: eq,
        modular_equality_pairs: Some(modeq),
    })
}

/// `x ⊕ y >= x - y` over all `n`-bit pairs, signed and without modulus, with
/// equality exactly when `!x & y == 0`.
pub fn verify_xor_diff(n: u32) -> Result<InequalityCheck, Error> {
    check_width(n, MAX_EXHAUSTIVE_WIDTH)?;
    let m = mask(n);
    let (viol, mism, eq) = (0..=m)
        .into_par_iter()
        .map(|x| {
            let mut acc = (0u64, 0u64, 0u64);
            for y in 0..=m {
                let xor = (x ^ y) as i64;
                let diff = x as i64 - y as i64;
                acc.0 += (xor < diff) as u64;
                acc.1 += ((xor == diff) != (!x & y & m == 0)) as u64;
                acc.2 += (xor == diff) as u64;
            }
            acc
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(InequalityCheck {
        n,
        pairs: 1 << (2 * n),
        inequality_violations: viol,
        condition_mismatches: mism,
        equality_pairs: eq,
        modular_equality_pairs: None,
    })
}

/// `(((3/4)^n)^2 · 3)^2 = 3^(4n+2) / 2^(8n)`, as an exact fraction and a
/// float. `n = 0` evaluates to 9 and is marked degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompoundProbability {
    pub n: u32,
    pub numerator: u128,
    pub denominator: u128,
    pub value: f64,
    pub degenerate: bool,
}

pub fn compound_probability(n: u32) -> Result<CompoundProbability, Error> {
    if n > MAX_PROBABILITY_WIDTH {
        return Err(Error::WidthOutOfRange {
            n,
            min: 0,
            max: MAX_PROBABILITY_WIDTH,
        });
    }
    let numerator = 3u128.pow(4 * n + 2);
    let denominator = 1u128 << (8 * n);
    Ok(CompoundProbability {
        n,
        numerator,
        denominator,
        value: numerator as f64 / denominator as f64,
        degenerate: n == 0,
    })
}

/// Sign pattern of the two outer xor approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OuterCase {
    /// `u ⊕ v ≈ u + v` at both steps.
    Plus,
    /// `u ⊕ v ≈ u - v`.
    Minus,
    /// `u ⊕ v ≈ v - u`.
    TMinus,
}

/// Multiplier pattern of the two inner approximations of `s (I ⊕ L^a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InnerCase {
    /// `1 + 2^a`
    OnePlusPow,
    /// `1 - 2^a`
    OneMinusPow,
    /// `2^a - 1`
    PowMinusOne,
}

impl OuterCase {
    pub const ALL: [OuterCase; 3] = [OuterCase::Plus, OuterCase::Minus, OuterCase::TMinus];

    pub fn symbol(&self) -> &'static str {
        match self {
            OuterCase::Plus => "+",
            OuterCase::Minus => "-",
            OuterCase::TMinus => "t-",
        }
    }
}

impl InnerCase {
    pub const ALL: [InnerCase; 3] = [
        InnerCase::OnePlusPow,
        InnerCase::OneMinusPow,
        InnerCase::PowMinusOne,
    ];

    /// The multiplier `k` with `s (I ⊕ L^a) ≈ k s`.
    pub fn multiplier(&self, a: u32) -> i128 {
        let p = 1i128 << a;
        match self {
            InnerCase::OnePlusPow => 1 + p,
            InnerCase::OneMinusPow => 1 - p,
            InnerCase::PowMinusOne => p - 1,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            InnerCase::OnePlusPow => "1+2^a",
            InnerCase::OneMinusPow => "1-2^a",
            InnerCase::PowMinusOne => "2^a-1",
        }
    }
}

/// `z ≈ coef_x · x + coef_y · y` for one cell of the case grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CaseCoeffs {
    pub coef_x: i128,
    pub coef_y: i8,
}

/// With `u ⊕ v` read as `±u ± v` and `s (I ⊕ L^a)` as `k s`, the two summands
/// of `z` combine to `k x + y`, `-k x + y` or `k x - y`.
pub fn case_coefficients(outer: OuterCase, inner: InnerCase, a: u32) -> CaseCoeffs {
    let k = inner.multiplier(a);
    match outer {
        OuterCase::Plus => CaseCoeffs {
            coef_x: k,
            coef_y: 1,
        },
        OuterCase::Minus => CaseCoeffs {
            coef_x: -k,
            coef_y: 1,
        },
        OuterCase::TMinus => CaseCoeffs {
            coef_x: k,
            coef_y: -1,
        },
    }
}
