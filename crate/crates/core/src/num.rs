//! Scalars and wide-range magnitudes.
//!
//! `Wide` keeps a complex mantissa next to an `i64` binary exponent so that
//! products like `(2n)^{2n}` or `1/n!` survive hundreds of powers without
//! leaving the double range. `ExtReal` is the nonnegative counterpart with an
//! explicit infinity, used for every seminorm value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Scalar = Complex64;

pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// Multiplies `x` by `2^e` without overflowing the intermediate factor.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const BIG: f64 = 1.0715086071862673e301; // 2^1000
    const SMALL: f64 = 9.332636185032189e-302; // 2^-1000
    while e > 1000 {
        x *= BIG;
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= SMALL;
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * f64::from_bits(((1023 + e) as u64) << 52)
}

/// Splits a finite nonzero `x` as `m * 2^e` with `0.5 <= |m| < 1`.
pub fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(x * 18446744073709551616.0);
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, biased - 1022)
}

/// Complex number with an unbounded binary exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wide {
    m: Complex64,
    e: i64,
}

impl Wide {
    pub const ZERO: Wide = Wide { m: Complex64::new(0.0, 0.0), e: 0 };
    pub const ONE: Wide = Wide { m: Complex64::new(0.5, 0.0), e: 1 };

    fn normalize(m: Complex64, e: i64) -> Wide {
        let a = m.re.abs().max(m.im.abs());
        if a == 0.0 {
            return Wide::ZERO;
        }
        debug_assert!(a.is_finite(), "non-finite mantissa");
        let (_, k) = frexp(a);
        Wide { m: Complex64::new(ldexp(m.re, -k), ldexp(m.im, -k)), e: e + k }
    }

    pub fn new(z: Complex64) -> Wide {
        Wide::normalize(z, 0)
    }

    pub fn real(x: f64) -> Wide {
        Wide::normalize(re(x), 0)
    }

    /// `2^l` for a real `l`, possibly far outside the double range.
    pub fn exp2(l: f64) -> Wide {
        if l == f64::NEG_INFINITY {
            return Wide::ZERO;
        }
        let k = l.floor();
        Wide::normalize(re((l - k).exp2()), k as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    pub fn mantissa(&self) -> Complex64 {
        self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(ldexp(self.m.re, self.e), ldexp(self.m.im, self.e))
    }

    pub fn abs(&self) -> ExtReal {
        ExtReal::from_parts(self.m.norm(), self.e)
    }

    pub fn conj(&self) -> Wide {
        Wide { m: self.m.conj(), e: self.e }
    }

    pub fn recip(&self) -> Wide {
        assert!(!self.is_zero(), "reciprocal of zero");
        Wide::normalize(self.m.inv(), -self.e)
    }

    pub fn powi(&self, mut n: u64) -> Wide {
        let mut base = *self;
        let mut acc = Wide::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Wide {
        *self * Wide::new(s)
    }
}

impl From<Complex64> for Wide {
    fn from(z: Complex64) -> Wide {
        Wide::new(z)
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, rhs: Wide) -> Wide {
        if self.is_zero() || rhs.is_zero() {
            return Wide::ZERO;
        }
        Wide::normalize(self.m * rhs.m, self.e + rhs.e)
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, rhs: Wide) -> Wide {
        self * rhs.recip()
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, rhs: Wide) -> Wide {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= rhs.e { (self, rhs) } else { (rhs, self) };
        let d = lo.e - hi.e;
        if d < -1100 {
            return hi;
        }
        let shifted = Complex64::new(ldexp(lo.m.re, d), ldexp(lo.m.im, d));
        Wide::normalize(hi.m + shifted, hi.e)
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide { m: -self.m, e: self.e }
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, rhs: Wide) -> Wide {
        self + (-rhs)
    }
}

/// Nonnegative extended real: a wide magnitude or `INFINITY`.
///
/// `0 * INFINITY` is taken to be `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtReal {
    // m in [0.5, 1), or m == 0 with e == 0, or m == +inf with e == 0
    m: FloatBits,
    e: i64,
}

// f64 wrapper that is Eq; all stored values are non-NaN by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
struct FloatBits(f64);
impl Eq for FloatBits {}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal { m: FloatBits(0.0), e: 0 };
    pub const ONE: ExtReal = ExtReal { m: FloatBits(0.5), e: 1 };
    pub const INFINITY: ExtReal = ExtReal { m: FloatBits(f64::INFINITY), e: 0 };

    fn from_parts(m: f64, e: i64) -> ExtReal {
        assert!(m >= 0.0, "ExtReal must be nonnegative, got {m}");
        if m == 0.0 {
            return ExtReal::ZERO;
        }
        if m.is_infinite() {
            return ExtReal::INFINITY;
        }
        let (mm, k) = frexp(m);
        ExtReal { m: FloatBits(mm), e: e + k }
    }

    /// Accepts any nonnegative double including `f64::INFINITY`.
    pub fn new(x: f64) -> ExtReal {
        assert!(!x.is_nan(), "NaN is not an extended real");
        ExtReal::from_parts(x, 0)
    }

    /// `2^l`; `l = +inf` gives `INFINITY`, `l = -inf` gives zero.
    pub fn exp2(l: f64) -> ExtReal {
        if l == f64::INFINITY {
            return ExtReal::INFINITY;
        }
        if l == f64::NEG_INFINITY {
            return ExtReal::ZERO;
        }
        let k = l.floor();
        ExtReal::from_parts((l - k).exp2(), k as i64)
    }

    pub fn is_infinite(&self) -> bool {
        self.m.0.is_infinite()
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        self.m.0 == 0.0
    }

    /// Plain double; saturates to `f64::INFINITY` or `0.0` outside the range.
    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            return f64::INFINITY;
        }
        ldexp(self.m.0, self.e)
    }

    /// `log2` of the value, `-inf` for zero and `+inf` for `INFINITY`.
    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        if self.is_infinite() {
            return f64::INFINITY;
        }
        self.m.0.log2() + self.e as f64
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn powi(self, n: u64) -> ExtReal {
        if n == 0 {
            return ExtReal::ONE;
        }
        if self.is_zero() || self.is_infinite() {
            return self;
        }
        let w = Wide::real(self.m.0).powi(n);
        ExtReal::from_parts(w.mantissa().re, w.exponent() + self.e * n as i64)
    }

    /// `n`-th root.
    pub fn root(self, n: u64) -> ExtReal {
        assert!(n > 0, "zeroth root");
        if self.is_zero() || self.is_infinite() {
            return self;
        }
        ExtReal::exp2(self.log2() / n as f64)
    }

    pub fn recip(self) -> ExtReal {
        if self.is_zero() {
            return ExtReal::INFINITY;
        }
        if self.is_infinite() {
            return ExtReal::ZERO;
        }
        ExtReal::from_parts(1.0 / self.m.0, -self.e)
    }

    /// `|a - b| / max(|a|, |b|)` on finite values, zero when both vanish.
    pub fn rel_diff(self, other: ExtReal) -> f64 {
        if self == other {
            return 0.0;
        }
        if self.is_infinite() || other.is_infinite() {
            return f64::INFINITY;
        }
        let big = self.max(other);
        let small = self.min(other);
        1.0 - (small / big).to_f64()
    }

    /// `self <= other * (1 + rel)` with `INFINITY` handled.
    pub fn le_rel(self, other: ExtReal, rel: f64) -> bool {
        if other.is_infinite() {
            return true;
        }
        if self.is_infinite() {
            return false;
        }
        self <= other * ExtReal::new(1.0 + rel)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &ExtReal) -> Ordering {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Greater,
            (false, true) => return Ordering::Less,
            _ => {}
        }
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.e.cmp(&other.e).then(self.m.0.partial_cmp(&other.m.0).unwrap())
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_infinite() || rhs.is_infinite() {
            return ExtReal::INFINITY;
        }
        let w = Wide { m: re(self.m.0), e: self.e } + Wide { m: re(rhs.m.0), e: rhs.e };
        ExtReal::from_parts(w.mantissa().re, w.exponent())
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    /// Truncated difference `max(self - rhs, 0)`; `INFINITY - finite = INFINITY`.
    fn sub(self, rhs: ExtReal) -> ExtReal {
        if self.is_infinite() {
            return ExtReal::INFINITY;
        }
        if rhs >= self {
            return ExtReal::ZERO;
        }
        let w = Wide { m: re(self.m.0), e: self.e } - Wide { m: re(rhs.m.0), e: rhs.e };
        ExtReal::from_parts(w.mantissa().re.max(0.0), w.exponent())
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        if self.is_zero() || rhs.is_zero() {
            return ExtReal::ZERO;
        }
        if self.is_infinite() || rhs.is_infinite() {
            return ExtReal::INFINITY;
        }
        ExtReal::from_parts(self.m.0 * rhs.m.0, self.e + rhs.e)
    }
}

impl Div for ExtReal {
    type Output = ExtReal;
    fn div(self, rhs: ExtReal) -> ExtReal {
        self * rhs.recip()
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |a, b| a + b)
    }
}

impl From<Wide> for ExtReal {
    fn from(w: Wide) -> ExtReal {
        w.abs()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            return write!(f, "inf");
        }
        let v = self.to_f64();
        if (v == 0.0 && !self.is_zero()) || v.is_infinite() {
            write!(f, "2^{:.6}", self.log2())
        } else {
            write!(f, "{v}")
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.to_f64();
        if self.is_infinite() {
            s.serialize_str("inf")
        } else if (v == 0.0 && !self.is_zero()) || v.is_infinite() {
            s.serialize_str(&format!("2^{:.17e}", self.log2()))
        } else {
            s.serialize_f64(v)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) if v >= 0.0 => Ok(ExtReal::new(v)),
            Repr::Num(v) => Err(serde::de::Error::custom(format!("negative extended real {v}"))),
            Repr::Text(t) if t == "inf" => Ok(ExtReal::INFINITY),
            Repr::Text(t) => t
                .strip_prefix("2^")
                .and_then(|l| l.parse::<f64>().ok())
                .map(ExtReal::exp2)
                .ok_or_else(|| serde::de::Error::custom(format!("bad extended real {t:?}"))),
        }
    }
}

/// Closed interval of extended reals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: ExtReal,
    pub upper: ExtReal,
}

impl Bracket {
    pub fn new(lower: ExtReal, upper: ExtReal) -> Bracket {
        debug_assert!(lower <= upper, "inverted bracket {lower} > {upper}");
        Bracket { lower, upper }
    }

    pub fn exact(v: ExtReal) -> Bracket {
        Bracket { lower: v, upper: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, v: ExtReal, rel: f64) -> bool {
        self.lower.le_rel(v, rel) && v.le_rel(self.upper, rel)
    }

    /// Width relative to `max(upper, 1)`; infinite brackets have infinite width
    /// unless both ends are infinite.
    pub fn rel_width(&self) -> f64 {
        if self.lower.is_infinite() {
            return 0.0;
        }
        if self.upper.is_infinite() {
            return f64::INFINITY;
        }
        let scale = self.upper.max(ExtReal::ONE);
        ((self.upper - self.lower) / scale).to_f64()
    }

    pub fn abs_width(&self) -> f64 {
        if self.lower.is_infinite() {
            return 0.0;
        }
        (self.upper - self.lower).to_f64()
    }

    pub fn midpoint(&self) -> ExtReal {
        if self.upper.is_infinite() {
            return self.upper;
        }
        (self.lower + self.upper) * ExtReal::new(0.5)
    }

    pub fn map_monotone(&self, f: impl Fn(ExtReal) -> ExtReal) -> Bracket {
        Bracket::new(f(self.lower), f(self.upper))
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}
