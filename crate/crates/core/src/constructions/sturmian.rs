//! Mechanical (Sturmian) words with quadratic-irrational slope, computed with
//! exact integer floors.

use std::collections::HashSet;

use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::Word;

/// `(a + b√d) / c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadIrrational {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl QuadIrrational {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if c == 0 || d < 0 {
            return Err(Error::InvalidArgument(format!(
                "({a} + {b}√{d})/{c} is not a valid quadratic number"
            )));
        }
        Ok(QuadIrrational { a, b, c, d })
    }

    pub fn integer(n: i64) -> Self {
        QuadIrrational { a: n, b: 0, c: 1, d: 0 }
    }

    pub fn is_irrational(&self) -> bool {
        self.b != 0 && !is_square(self.d)
    }

    pub fn to_f64(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.d as f64).sqrt()) / self.c as f64
    }
}

fn is_square(d: i64) -> bool {
    d >= 0 && {
        let r = (d as u64).sqrt();
        r * r == d as u64
    }
}

/// `⌊(A + B√d) / C⌋` exactly, for `d` a non-square or `B = 0`.
fn floor_quad(a: i128, b: i128, c: i128, d: i128) -> Result<i128> {
    let (a, b, c) = if c < 0 { (-a, -b, -c) } else { (a, b, c) };
    let b2d = b
        .checked_mul(b)
        .and_then(|x| x.checked_mul(d))
        .ok_or(Error::Overflow)?;
    let root = (b2d as u128).sqrt() as i128;
    let floor_bsqrt = if b >= 0 {
        root
    } else if root * root == b2d {
        -root
    } else {
        -root - 1
    };
    let num = a.checked_add(floor_bsqrt).ok_or(Error::Overflow)?;
    Ok(Integer::div_floor(&num, &c))
}

/// Lower mechanical word `y(n) = ⌊(n+1)ρ + θ⌋ − ⌊nρ + θ⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SturmianParams {
    pub slope: QuadIrrational,
    pub intercept: QuadIrrational,
}

impl Default for SturmianParams {
    /// `ρ = (3 − √5)/2`, `θ = 0`.
    fn default() -> Self {
        SturmianParams {
            slope: QuadIrrational { a: 3, b: -1, c: 2, d: 5 },
            intercept: QuadIrrational::integer(0),
        }
    }
}

impl SturmianParams {
    /// Validated parameters: irrational slope in `(1/3, 1/2)`, which rules out
    /// both `11` and `000`; an irrational intercept must share the slope's `d`.
    pub fn new(slope: QuadIrrational, intercept: QuadIrrational) -> Result<Self> {
        if !slope.is_irrational() {
            return Err(Error::RationalSlope);
        }
        if intercept.b != 0 && intercept.d != slope.d {
            return Err(Error::InvalidArgument(
                "intercept must be rational or use the slope's square root".into(),
            ));
        }
        let p = SturmianParams { slope, intercept };
        // irrational ρ lies in (1/3, 1/2) iff ⌊3ρ⌋ = 1 and ⌊2ρ⌋ = 0
        let scaled = |m: i128| {
            floor_quad(
                m * slope.a as i128,
                m * slope.b as i128,
                slope.c as i128,
                slope.d as i128,
            )
        };
        if scaled(3)? != 1 || scaled(2)? != 0 {
            return Err(Error::SlopeOutOfRange);
        }
        Ok(p)
    }

    /// `⌊nρ + θ⌋`
    fn floor_at(&self, n: i64) -> Result<i128> {
        let (s, t) = (self.slope, self.intercept);
        let d = if s.b != 0 { s.d } else { t.d } as i128;
        let n = n as i128;
        let (sa, sb, sc) = (s.a as i128, s.b as i128, s.c as i128);
        let (ta, tb, tc) = (t.a as i128, t.b as i128, t.c as i128);
        let mul = |x: i128, y: i128| x.checked_mul(y).ok_or(Error::Overflow);
        let add = |x: i128, y: i128| x.checked_add(y).ok_or(Error::Overflow);
        let a = add(mul(mul(n, sa)?, tc)?, mul(ta, sc)?)?;
        let b = add(mul(mul(n, sb)?, tc)?, mul(tb, sc)?)?;
        floor_quad(a, b, mul(sc, tc)?, d)
    }

    /// Letter `y(n)`; negative `n` extends the word to the left.
    pub fn letter(&self, n: i64) -> Result<u8> {
        Ok((self.floor_at(n + 1)? - self.floor_at(n)?) as u8)
    }

    pub fn slope_f64(&self) -> f64 {
        self.slope.to_f64()
    }
}

/// `y(from) … y(to)` inclusive.
pub fn sturmian_letters(p: &SturmianParams, from: i64, to: i64) -> Result<Word> {
    if to < from {
        return Ok(Word::empty());
    }
    let mut prev = p.floor_at(from)?;
    let mut out = Vec::with_capacity((to - from + 1) as usize);
    for n in from..=to {
        let next = p.floor_at(n + 1)?;
        out.push((next - prev) as u8);
        prev = next;
    }
    Ok(Word::new(out))
}

/// Default safety cap on window slides when collecting factors.
pub const FACTOR_SLIDE_CAP: usize = 10_000_000;

/// The `n + 1` distinct factors of length `n` of `y(1 …)`, sorted. Sturmian
/// complexity makes the set complete once `n + 1` factors have been seen.
pub fn sturmian_factors(p: &SturmianParams, n: usize, cap: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return Ok(vec![Word::empty()]);
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut buf: Vec<u8> = sturmian_letters(p, 1, n as i64)?.into_letters();
    let mut start = 1i64;
    let mut slides = 0usize;
    loop {
        seen.insert(buf.clone());
        if seen.len() == n + 1 {
            break;
        }
        slides += 1;
        if slides >= cap {
            return Err(Error::CapExceeded {
                what: "factor window slide",
                cap,
            });
        }
        buf.remove(0);
        buf.push(p.letter(start + n as i64)?);
        start += 1;
    }
    let mut out: Vec<Word> = seen.into_iter().map(Word::new).collect();
    out.sort();
    Ok(out)
}

/// Whether `w` is not a factor of `y`.
pub fn factor_absent(w: &[u8], p: &SturmianParams) -> Result<bool> {
    factor_absent_capped(w, p, FACTOR_SLIDE_CAP)
}

pub fn factor_absent_capped(w: &[u8], p: &SturmianParams, cap: usize) -> Result<bool> {
    if w.iter().any(|&a| a > 1) {
        return Ok(true);
    }
    let n = w.len();
    if n == 0 {
        return Ok(false);
    }
    // generate in blocks to avoid per-letter exact floors
    let mut text: Vec<u8> = Vec::new();
    let mut block = 4 * (n + 1) + 64;
    let mut next_index = 1i64;
    loop {
        let more = sturmian_letters(p, next_index, next_index + block as i64 - 1)?;
        next_index += block as i64;
        text.extend_from_slice(&more);
        let mut seen: HashSet<&[u8]> = HashSet::new();
        for (slides, win) in text.windows(n).enumerate() {
            if slides >= cap {
                return Err(Error::CapExceeded {
                    what: "factor window slide",
                    cap,
                });
            }
            seen.insert(win);
            if seen.len() == n + 1 {
                return Ok(!seen.contains(w));
            }
        }
        if text.len() >= cap + n {
            return Err(Error::CapExceeded {
                what: "factor window slide",
                cap,
            });
        }
        block *= 2;
    }
}

/// Type I word `u_n = 111·y(1…4n)·111`.
pub fn type1_word(p: &SturmianParams, n: usize) -> Result<Word> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mid = sturmian_letters(p, 1, 4 * n as i64)?;
    let mut w = vec![1, 1, 1];
    w.extend_from_slice(&mid);
    w.extend_from_slice(&[1, 1, 1]);
    Ok(Word::new(w))
}
