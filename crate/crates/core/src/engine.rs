//! xorshift128+.
//!
//! The state `(s_i, s_{i+1})` advances to `(s_{i+1}, s_{i+2})` with
//!
//! ```text
//! s_{i+2} = s_i (I ⊕ L^a)(I ⊕ R^b) ⊕ s_{i+1} (I ⊕ R^c)
//! ```
//!
//! and the state emits `o_i = s_i + s_{i+1} mod 2^64`. The recursion is
//! applied in exactly this form, with `(a, b, c)` free.

use std::fmt;

use serde::Serialize;

use crate::bitlin::{xorshift_xform, Direction, Shift, Word64};
use crate::error::Error;

/// Shift triple `(a, b, c)`, each in `1..=63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    a: Shift,
    b: Shift,
    c: Shift,
}

impl Params {
    pub const DEFAULT: (u32, u32, u32) = (23, 17, 26);

    pub fn new(a: u32, b: u32, c: u32) -> Result<Self, Error> {
        let check = |name, value: u32| {
            if (1..=63).contains(&value) {
                Ok(Shift::new(value).expect("checked range"))
            } else {
                Err(Error::ParamOutOfRange { name, value })
            }
        };
        Ok(Params {
            a: check("a", a)?,
            b: check("b", b)?,
            c: check("c", c)?,
        })
    }

    pub fn a(&self) -> Shift {
        self.a
    }

    pub fn b(&self) -> Shift {
        self.b
    }

    pub fn c(&self) -> Shift {
        self.c
    }

    /// The MSB approximation treats `I ⊕ R^b` and `I ⊕ R^c` as the identity,
    /// which needs both right shifts to be wide. Returns a message when they
    /// are not; the generator itself is still well defined.
    pub fn approximation_warning(&self) -> Option<String> {
        let (b, c) = (self.b.get(), self.c.get());
        if b <= 10 || c <= 10 {
            Some(format!(
                "b={b}, c={c}: MSB approximation assumes both right shifts exceed 10"
            ))
        } else {
            None
        }
    }
}

impl Default for Params {
    fn default() -> Self {
        let (a, b, c) = Self::DEFAULT;
        Params::new(a, b, c).expect("default params are valid")
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl Serialize for Params {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Params", 3)?;
        st.serialize_field("a", &self.a.get())?;
        st.serialize_field("b", &self.b.get())?;
        st.serialize_field("c", &self.c.get())?;
        st.end()
    }
}

/// One generator output word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Output(pub Word64);

impl Output {
    pub fn to_unit(self) -> f64 {
        to_unit(self.0)
    }
}

/// Top 53 bits scaled into `[0, 1)`. Exact in binary64.
#[inline(always)]
pub fn to_unit(o: Word64) -> f64 {
    (o >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The next state word `s_{i+2}` from `(s_i, s_{i+1})`.
#[inline(always)]
pub fn next_word(s0: Word64, s1: Word64, params: &Params) -> Word64 {
    let t = xorshift_xform(s0, params.a, Direction::Left);
    xorshift_xform(t, params.b, Direction::Right) ^ xorshift_xform(s1, params.c, Direction::Right)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenState {
    s0: Word64,
    s1: Word64,
    params: Params,
}

impl GenState {
    pub fn new(s0: Word64, s1: Word64, params: Params) -> Result<Self, Error> {
        if s0 == 0 && s1 == 0 {
            return Err(Error::ZeroState);
        }
        Ok(GenState { s0, s1, params })
    }

    pub fn words(&self) -> (Word64, Word64) {
        (self.s0, self.s1)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// The output of the current state.
    #[inline(always)]
    pub fn output(&self) -> Output {
        Output(self.s0.wrapping_add(self.s1))
    }

    /// Emits `s_i + s_{i+1}` and returns the successor `(s_{i+1}, s_{i+2})`.
    ///
    /// The update is an invertible linear map, so the successor of a nonzero
    /// state is nonzero.
    #[inline(always)]
    pub fn step(&self) -> (GenState, Output) {
        let out = self.output();
        let next = GenState {
            s0: self.s1,
            s1: next_word(self.s0, self.s1, &self.params),
            params: self.params,
        };
        (next, out)
    }

    /// Infinite stream of raw outputs starting from this state.
    pub fn outputs(self) -> Outputs {
        Outputs { state: self }
    }
}

/// Two rounds of SplitMix64 from `seed64` give `(s0, s1)`; `(0, 0)` is
/// replaced by `(1, 0)`.
pub fn seed(seed64: Word64, params: Params) -> GenState {
    let mut sm = SplitMix64(seed64);
    let s0 = sm.next_u64();
    let s1 = sm.next_u64();
    let (s0, s1) = if s0 == 0 && s1 == 0 { (1, 0) } else { (s0, s1) };
    GenState { s0, s1, params }
}

/// SplitMix64 (Steele, Lea, Flood), used only for seed expansion.
#[derive(Clone, Debug)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

pub struct Outputs {
    state: GenState,
}

impl Outputs {
    pub fn state(&self) -> &GenState {
        &self.state
    }
}

impl Iterator for Outputs {
    type Item = Word64;

    #[inline(always)]
    fn next(&mut self) -> Option<Word64> {
        let (next, out) = self.state.step();
        self.state = next;
        Some(out.0)
    }
}

/// `count` overlapping triples `(u_k, u_{k+1}, u_{k+2})` of unit outputs.
/// Consumes `count + 2` outputs.
pub fn triples(state: GenState, count: usize) -> Vec<[f64; 3]> {
    assert!(count >= 1, "triples: count must be at least 1");
    let units: Vec<f64> = state.outputs().take(count + 2).map(to_unit).collect();
    units.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}

/// The same recursion on 8-bit words, small enough to enumerate all `2^16`
/// states. Shift counts are reduced mod 8 and must stay nonzero.
pub mod mini {
    use crate::error::Error;

    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub struct MiniParams {
        pub a: u32,
        pub b: u32,
        pub c: u32,
    }

    impl MiniParams {
        pub fn reduced(a: u32, b: u32, c: u32) -> Result<Self, Error> {
            let r = |name, v: u32| match v % 8 {
                0 => Err(Error::ParamOutOfRange { name, value: v }),
                m => Ok(m),
            };
            Ok(MiniParams {
                a: r("a", a)?,
                b: r("b", b)?,
                c: r("c", c)?,
            })
        }
    }

    pub fn step(s0: u8, s1: u8, p: MiniParams) -> (u8, u8) {
        let t = s0 ^ (s0 << p.a);
        let t = t ^ (t >> p.b);
        (s1, t ^ s1 ^ (s1 >> p.c))
    }

    pub fn output(s0: u8, s1: u8) -> u8 {
        s0.wrapping_add(s1)
    }

    /// Image of every state `(s0, s1)` under `step`, indexed by `s0 << 8 | s1`.
    pub fn state_map(p: MiniParams) -> Vec<u16> {
        (0..=u16::MAX)
            .map(|idx| {
                let (n0, n1) = step((idx >> 8) as u8, idx as u8, p);
                (n0 as u16) << 8 | n1 as u16
            })
            .collect()
    }
}
