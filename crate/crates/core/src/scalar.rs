//! Exact and certified real scalars.
//!
//! Every floor or ceiling taken anywhere in the crate goes through
//! [`RealScalar`]. Three representations are supported:
//!
//! * `Rational` — an exact fraction in lowest terms.
//! * `Quadratic` — an exact quadratic irrational `p + q·√d` with `d`
//!   squarefree, `d > 1`, `q ≠ 0`.
//! * `Certified` — a midpoint and a radius; the true value lies in the
//!   closed interval. Floor/ceil queries whose interval touches an integer
//!   are rejected as ambiguous rather than rounded.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default number of decimal digits used when an exact value has to be
/// replaced by an enclosure.
pub const DEFAULT_WORKING_DIGITS: u32 = 50;

static WORKING_DIGITS: AtomicU32 = AtomicU32::new(DEFAULT_WORKING_DIGITS);

/// Largest radius accepted for a user-supplied certified value.
pub fn max_input_radius() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

pub fn working_digits() -> u32 {
    WORKING_DIGITS.load(AtomicOrdering::Relaxed)
}

/// Sets the working precision used for enclosures. Values below 20 are
/// clamped to 20.
pub fn set_working_digits(digits: u32) {
    WORKING_DIGITS.store(digits.max(20), AtomicOrdering::Relaxed);
}

const PI_DIGITS: &str =
    "3.141592653589793238462643383279502884197169399375105820974944592307816";
const E_DIGITS: &str =
    "2.718281828459045235360287471352662497757247093699959574966967627724077";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("ambiguous {op} of {value}: enclosure touches an integer")]
    Ambiguous { op: &'static str, value: String },
    #[error("ambiguous comparison between {0} and {1}")]
    AmbiguousComparison(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("certified radius {0} exceeds 1e-12")]
    RadiusTooLarge(String),
    #[error("cannot parse scalar `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// `rational + coeff·√radicand`, always irrational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quadratic {
    rational: BigRational,
    coeff: BigRational,
    radicand: u64,
}

impl Quadratic {
    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    fn floor(&self) -> BigInt {
        // Write the value as (A + B·√d)/c with integer A, B and c > 0.
        let c = self.rational.denom().lcm(self.coeff.denom());
        let a = self.rational.numer() * (&c / self.rational.denom());
        let b = self.coeff.numer() * (&c / self.coeff.denom());
        let n = &b * &b * BigInt::from(self.radicand);
        let root = n.sqrt();
        let floor_b_sqrt = if b.is_positive() { root } else { -root - 1 };
        (a + floor_b_sqrt).div_floor(&c)
    }

    /// Encloses the value in `[lo, hi]` with width `|coeff|·10^-digits`.
    fn enclosure(&self, digits: u32) -> (BigRational, BigRational) {
        let scale = BigInt::from(10u64).pow(digits);
        let s = (BigInt::from(self.radicand) * &scale * &scale).sqrt();
        let lo_root = BigRational::new(s.clone(), scale.clone());
        let hi_root = BigRational::new(s + 1, scale);
        let a = &self.rational + &self.coeff * &lo_root;
        let b = &self.rational + &self.coeff * &hi_root;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// An enclosure `mid ± radius`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Certified {
    mid: BigRational,
    radius: BigRational,
    irrational: bool,
}

impl Certified {
    pub fn mid(&self) -> &BigRational {
        &self.mid
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    /// Whether the caller declared the enclosed value irrational.
    pub fn declared_irrational(&self) -> bool {
        self.irrational
    }

    fn bounds(&self) -> (BigRational, BigRational) {
        (&self.mid - &self.radius, &self.mid + &self.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RealScalar {
    Rational(BigRational),
    Quadratic(Quadratic),
    Certified(Certified),
}

impl RealScalar {
    pub fn integer(n: i64) -> Self {
        RealScalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Result<Self, ScalarError> {
        if q == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(RealScalar::Rational(BigRational::new(
            BigInt::from(p),
            BigInt::from(q),
        )))
    }

    pub fn from_rational(r: BigRational) -> Self {
        RealScalar::Rational(r)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    /// `√d`, reduced to lowest terms: perfect squares become rationals and
    /// square factors are pulled out (`√12 = 2√3`).
    pub fn sqrt(d: u64) -> Self {
        Self::quadratic(BigRational::zero(), BigRational::one(), d)
    }

    /// `p + q·√d`, normalised.
    pub fn quadratic(p: BigRational, q: BigRational, d: u64) -> Self {
        if q.is_zero() || d == 0 {
            return RealScalar::Rational(p);
        }
        let (outside, inside) = squarefree_split(d);
        let q = q * BigRational::from_integer(BigInt::from(outside));
        if inside == 1 {
            return RealScalar::Rational(p + q);
        }
        RealScalar::Quadratic(Quadratic {
            rational: p,
            coeff: q,
            radicand: inside,
        })
    }

    /// A certified enclosure supplied from outside the crate. The radius must
    /// be nonnegative and below `1e-12`.
    pub fn certified(
        mid: BigRational,
        radius: BigRational,
        irrational: bool,
    ) -> Result<Self, ScalarError> {
        let radius = radius.abs();
        if radius >= max_input_radius() {
            return Err(ScalarError::RadiusTooLarge(radius.to_string()));
        }
        Ok(RealScalar::Certified(Certified {
            mid,
            radius,
            irrational,
        }))
    }

    /// Parses a decimal literal as a declared-irrational certified value whose
    /// radius is half a unit in the last printed place.
    pub fn declared_irrational_decimal(s: &str) -> Result<Self, ScalarError> {
        let (mid, places) = parse_decimal(s).ok_or_else(|| ScalarError::Parse {
            input: s.to_string(),
            reason: "not a decimal literal".into(),
        })?;
        let radius = BigRational::new(BigInt::one(), BigInt::from(2) * BigInt::from(10).pow(places));
        Self::certified(mid, radius, true)
    }

    pub fn pi() -> Self {
        Self::constant(PI_DIGITS)
    }

    pub fn e() -> Self {
        Self::constant(E_DIGITS)
    }

    /// The golden ratio `(1+√5)/2`, represented exactly.
    pub fn golden() -> Self {
        Self::quadratic(
            BigRational::new(1.into(), 2.into()),
            BigRational::new(1.into(), 2.into()),
            5,
        )
    }

    fn constant(digits: &str) -> Self {
        let (mid, places) = parse_decimal(digits).expect("constant literal");
        let radius = BigRational::new(BigInt::one(), BigInt::from(10).pow(places));
        RealScalar::Certified(Certified {
            mid,
            radius,
            irrational: true,
        })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RealScalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// True when the value is known to be irrational: exact quadratic
    /// irrationals and certified values declared irrational.
    pub fn is_known_irrational(&self) -> bool {
        match self {
            RealScalar::Rational(_) => false,
            RealScalar::Quadratic(_) => true,
            RealScalar::Certified(c) => c.irrational,
        }
    }

    /// Closed enclosure `[lo, hi]`; exact values give `lo == hi` when
    /// rational.
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        self.enclosure_with(working_digits())
    }

    fn enclosure_with(&self, digits: u32) -> (BigRational, BigRational) {
        match self {
            RealScalar::Rational(r) => (r.clone(), r.clone()),
            RealScalar::Quadratic(q) => q.enclosure(digits),
            RealScalar::Certified(c) => c.bounds(),
        }
    }

    fn as_certified(&self) -> Certified {
        match self {
            RealScalar::Certified(c) => c.clone(),
            other => {
                let (lo, hi) = other.enclosure();
                let two = BigRational::from_integer(2.into());
                Certified {
                    mid: (&lo + &hi) / &two,
                    radius: (&hi - &lo) / &two,
                    irrational: other.is_known_irrational(),
                }
            }
        }
    }

    pub fn floor(&self) -> Result<BigInt, ScalarError> {
        match self {
            RealScalar::Rational(r) => Ok(r.floor().to_integer()),
            RealScalar::Quadratic(q) => Ok(q.floor()),
            RealScalar::Certified(c) => {
                let (lo, hi) = c.bounds();
                let f = lo.floor();
                // Reject whenever an integer lies in [lo, hi].
                if lo.is_integer() || hi >= &f + BigRational::one() {
                    return Err(ScalarError::Ambiguous {
                        op: "floor",
                        value: self.to_string(),
                    });
                }
                Ok(f.to_integer())
            }
        }
    }

    pub fn ceil(&self) -> Result<BigInt, ScalarError> {
        match self {
            RealScalar::Rational(r) => Ok(r.ceil().to_integer()),
            RealScalar::Quadratic(q) => Ok(q.floor() + 1),
            RealScalar::Certified(_) => self.floor().map(|f| f + 1).map_err(|_| {
                ScalarError::Ambiguous {
                    op: "ceil",
                    value: self.to_string(),
                }
            }),
        }
    }

    pub fn floor_i64(&self) -> Result<i64, ScalarError> {
        Ok(self.floor()?.to_i64().expect("floor fits in i64"))
    }

    pub fn ceil_i64(&self) -> Result<i64, ScalarError> {
        Ok(self.ceil()?.to_i64().expect("ceil fits in i64"))
    }

    /// Whether the value is an integer; ambiguous enclosures are an error.
    pub fn is_integer(&self) -> Result<bool, ScalarError> {
        match self {
            RealScalar::Rational(r) => Ok(r.is_integer()),
            RealScalar::Quadratic(_) => Ok(false),
            RealScalar::Certified(_) => self.floor().map(|_| false),
        }
    }

    /// Whether `self ∈ ℤ + ½`.
    pub fn is_half_odd_integer(&self) -> Result<bool, ScalarError> {
        let shifted = self.add(&RealScalar::ratio(1, 2).expect("nonzero"));
        shifted.is_integer()
    }

    /// Fractional part `{x} = x - ⌊x⌋`.
    pub fn fract(&self) -> Result<RealScalar, ScalarError> {
        let f = self.floor()?;
        Ok(self.sub(&RealScalar::Rational(BigRational::from_integer(f))))
    }

    pub fn neg(&self) -> RealScalar {
        match self {
            RealScalar::Rational(r) => RealScalar::Rational(-r),
            RealScalar::Quadratic(q) => RealScalar::Quadratic(Quadratic {
                rational: -&q.rational,
                coeff: -&q.coeff,
                radicand: q.radicand,
            }),
            RealScalar::Certified(c) => RealScalar::Certified(Certified {
                mid: -&c.mid,
                radius: c.radius.clone(),
                irrational: c.irrational,
            }),
        }
    }

    pub fn add(&self, other: &RealScalar) -> RealScalar {
        use RealScalar::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Rational(a + b),
            (Rational(r), Quadratic(q)) | (Quadratic(q), Rational(r)) => {
                Self::quadratic(&q.rational + r, q.coeff.clone(), q.radicand)
            }
            (Quadratic(a), Quadratic(b)) if a.radicand == b.radicand => Self::quadratic(
                &a.rational + &b.rational,
                &a.coeff + &b.coeff,
                a.radicand,
            ),
            (Rational(r), Certified(c)) | (Certified(c), Rational(r)) => Certified(self::Certified {
                mid: &c.mid + r,
                radius: c.radius.clone(),
                irrational: c.irrational,
            }),
            _ => {
                let a = self.as_certified();
                let b = other.as_certified();
                Certified(self::Certified {
                    mid: a.mid + b.mid,
                    radius: a.radius + b.radius,
                    irrational: false,
                })
            }
        }
    }

    pub fn sub(&self, other: &RealScalar) -> RealScalar {
        self.add(&other.neg())
    }

    pub fn mul_int(&self, k: i64) -> RealScalar {
        self.mul_rational(&BigRational::from_integer(BigInt::from(k)))
    }

    pub fn mul_rational(&self, k: &BigRational) -> RealScalar {
        match self {
            RealScalar::Rational(r) => RealScalar::Rational(r * k),
            RealScalar::Quadratic(q) => Self::quadratic(&q.rational * k, &q.coeff * k, q.radicand),
            RealScalar::Certified(c) => {
                if k.is_zero() {
                    return RealScalar::zero();
                }
                RealScalar::Certified(Certified {
                    mid: &c.mid * k,
                    radius: &c.radius * k.abs(),
                    irrational: c.irrational,
                })
            }
        }
    }

    pub fn mul(&self, other: &RealScalar) -> RealScalar {
        use RealScalar::*;
        match (self, other) {
            (Rational(r), x) | (x, Rational(r)) => x.mul_rational(r),
            (Quadratic(a), Quadratic(b)) if a.radicand == b.radicand => {
                let d = BigRational::from_integer(BigInt::from(a.radicand));
                Self::quadratic(
                    &a.rational * &b.rational + &a.coeff * &b.coeff * d,
                    &a.rational * &b.coeff + &a.coeff * &b.rational,
                    a.radicand,
                )
            }
            _ => {
                let a = self.as_certified();
                let b = other.as_certified();
                Certified(self::Certified {
                    radius: a.mid.abs() * &b.radius + b.mid.abs() * &a.radius + &a.radius * &b.radius,
                    mid: a.mid * b.mid,
                    irrational: false,
                })
            }
        }
    }

    pub fn recip(&self) -> Result<RealScalar, ScalarError> {
        match self {
            RealScalar::Rational(r) => {
                if r.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(RealScalar::Rational(r.recip()))
                }
            }
            RealScalar::Quadratic(q) => {
                // 1/(p + q√d) = (p - q√d)/(p² - q²d); the norm is nonzero
                // because √d is irrational.
                let d = BigRational::from_integer(BigInt::from(q.radicand));
                let norm = &q.rational * &q.rational - &q.coeff * &q.coeff * d;
                Ok(Self::quadratic(&q.rational / &norm, -&q.coeff / &norm, q.radicand))
            }
            RealScalar::Certified(c) => {
                let (lo, hi) = c.bounds();
                if !lo.is_positive() && !hi.is_negative() {
                    return Err(ScalarError::DivisionByZero);
                }
                let denom = &c.mid * &c.mid - &c.radius * &c.radius;
                Ok(RealScalar::Certified(Certified {
                    mid: &c.mid / &denom,
                    radius: &c.radius / denom.abs(),
                    irrational: c.irrational,
                }))
            }
        }
    }

    pub fn div(&self, other: &RealScalar) -> Result<RealScalar, ScalarError> {
        let inv = other.recip()?;
        let mut out = self.mul(&inv);
        // irrational/rational and rational/irrational stay irrational.
        if let RealScalar::Certified(c) = &mut out {
            let one_exact = matches!(self, RealScalar::Rational(r) if !r.is_zero())
                || matches!(other, RealScalar::Rational(_));
            if one_exact && (self.is_known_irrational() || other.is_known_irrational()) {
                c.irrational = true;
            }
        }
        Ok(out)
    }

    /// Exact sign when decidable; an enclosure straddling zero is ambiguous.
    pub fn signum(&self) -> Result<Ordering, ScalarError> {
        match self {
            RealScalar::Rational(r) => Ok(r.cmp(&BigRational::zero())),
            RealScalar::Quadratic(q) => {
                if q.floor().is_negative() {
                    Ok(Ordering::Less)
                } else {
                    Ok(Ordering::Greater)
                }
            }
            RealScalar::Certified(c) => {
                let (lo, hi) = c.bounds();
                if lo.is_positive() {
                    Ok(Ordering::Greater)
                } else if hi.is_negative() {
                    Ok(Ordering::Less)
                } else {
                    Err(ScalarError::Ambiguous {
                        op: "sign",
                        value: self.to_string(),
                    })
                }
            }
        }
    }

    pub fn is_positive(&self) -> Result<bool, ScalarError> {
        Ok(self.signum()? == Ordering::Greater)
    }

    /// Certified comparison.
    pub fn try_cmp(&self, other: &RealScalar) -> Result<Ordering, ScalarError> {
        self.sub(other)
            .signum()
            .map_err(|_| ScalarError::AmbiguousComparison(self.to_string(), other.to_string()))
    }

    /// Midpoint of the working enclosure; a total-order key that agrees with
    /// [`try_cmp`](Self::try_cmp) whenever that comparison is decidable.
    pub fn sort_key(&self) -> BigRational {
        let (lo, hi) = self.enclosure();
        (lo + hi) / BigRational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> f64 {
        let key = match self {
            RealScalar::Rational(r) => r.clone(),
            _ => self.sort_key(),
        };
        rational_to_f64(&key)
    }

    /// Decimal rendering with `sig` significant digits (truncated toward
    /// the enclosure midpoint, never locale formatted).
    pub fn to_decimal(&self, sig: usize) -> String {
        let v = match self {
            RealScalar::Rational(r) => r.clone(),
            RealScalar::Quadratic(q) => {
                let (lo, hi) = q.enclosure(sig as u32 + 10);
                (lo + hi) / BigRational::from_integer(2.into())
            }
            RealScalar::Certified(c) => c.mid.clone(),
        };
        rational_to_decimal(&v, sig)
    }

    pub fn parse(input: &str) -> Result<RealScalar, ScalarError> {
        let mut p = Parser {
            src: input.as_bytes(),
            pos: 0,
            input,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

impl From<i64> for RealScalar {
    fn from(n: i64) -> Self {
        RealScalar::integer(n)
    }
}

impl fmt::Display for RealScalar {
    /// Exact token form accepted by [`RealScalar::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealScalar::Rational(r) => write!(f, "{}", fmt_rational(r)),
            RealScalar::Quadratic(q) => {
                if !q.rational.is_zero() {
                    write!(f, "{}+", fmt_rational(&q.rational))?;
                }
                write!(f, "{}*sqrt{}", fmt_rational(&q.coeff), q.radicand)
            }
            RealScalar::Certified(c) => {
                let name = if c.irrational { "irr" } else { "ival" };
                write!(f, "{}({}, {})", name, fmt_rational(&c.mid), fmt_rational(&c.radius))
            }
        }
    }
}

impl Serialize for RealScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(RealScalar::integer(n)),
            Raw::Float(x) => {
                let r = BigRational::from_float(x)
                    .ok_or_else(|| serde::de::Error::custom("non-finite scalar"))?;
                Ok(RealScalar::Rational(r))
            }
            Raw::Text(s) => RealScalar::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        if r.is_negative() {
            format!("({})", r.numer())
        } else {
            r.numer().to_string()
        }
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// `d = outside² · inside` with `inside` squarefree.
fn squarefree_split(mut d: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut p = 2u64;
    while p * p <= d {
        while d % (p * p) == 0 {
            d /= p * p;
            outside *= p;
        }
        p += 1;
    }
    (outside, d)
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale into i128 range before dividing to keep ~18 digits.
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 && n.abs() < 1e300 && d < 1e300 {
            let approx = n / d;
            if approx.is_finite() {
                let scaled = (r * BigRational::from_integer(BigInt::from(1u64 << 62))).round();
                let back = scaled.to_integer().to_f64().unwrap_or(approx) / (1u64 << 62) as f64;
                if approx.abs() < 1e15 {
                    return back;
                }
                return approx;
            }
        }
    }
    let digits = rational_to_decimal(r, 20);
    digits.parse().unwrap_or(f64::NAN)
}

/// Decimal rendering of an exact rational with `sig` significant digits,
/// truncated.
pub(crate) fn rational_to_decimal(r: &BigRational, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let int_part = a.trunc().to_integer();
    let int_digits = if int_part.is_zero() {
        0
    } else {
        int_part.to_string().len()
    };
    let frac_digits = if int_digits >= sig {
        0
    } else if int_digits > 0 {
        sig - int_digits
    } else {
        // Leading zeros after the point do not count as significant.
        let mut lead = 0usize;
        let mut x = a.clone();
        let ten = BigRational::from_integer(10.into());
        while x < BigRational::one() {
            x *= &ten;
            lead += 1;
        }
        lead - 1 + sig
    };
    let scale = BigInt::from(10).pow(frac_digits as u32);
    let scaled_exact = &a * BigRational::from_integer(scale);
    let exact = scaled_exact.is_integer();
    let s = scaled_exact.trunc().to_integer().to_string();
    let body = if frac_digits == 0 {
        s
    } else {
        let padded = format!("{:0>width$}", s, width = frac_digits + 1);
        let (ip, fp) = padded.split_at(padded.len() - frac_digits);
        // Exact values drop trailing zeros; truncated ones keep every digit.
        let fp = if exact { fp.trim_end_matches('0') } else { fp };
        if fp.is_empty() {
            ip.to_string()
        } else {
            format!("{ip}.{fp}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Parses `[-]digits[.digits]` into an exact rational and the number of
/// fractional places.
fn parse_decimal(s: &str) -> Option<(BigRational, u32)> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.bytes().all(|b| b.is_ascii_digit()) || !fp.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let places = fp.len() as u32;
    let mut r = BigRational::new(n, BigInt::from(10).pow(places));
    if neg {
        r = -r;
    }
    Some((r, places))
}

/// Recursive-descent parser for scalar tokens:
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := unary (('*' | '/') unary)*
/// unary  := '-' unary | atom
/// atom   := number | '~' decimal | 'sqrt' N | 'sqrt(' N ')' | 'pi' | 'e'
///         | 'golden' | 'phi' | 'irr(' r ',' r ')' | 'ival(' r ',' r ')'
///         | '(' expr ')'
/// ```
struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn err(&self, reason: &str) -> ScalarError {
        ScalarError::Parse {
            input: self.input.to_string(),
            reason: format!("{reason} at offset {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RealScalar, ScalarError> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v = v.add(&self.term()?);
            } else if self.eat(b'-') {
                v = v.sub(&self.term()?);
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<RealScalar, ScalarError> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v = v.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let d = self.unary()?;
                v = v.div(&d)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<RealScalar, ScalarError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number_text(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn rational_arg(&mut self) -> Result<BigRational, ScalarError> {
        let v = self.expr()?;
        v.as_rational().cloned().ok_or_else(|| self.err("expected an exact rational"))
    }

    fn atom(&mut self) -> Result<RealScalar, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(v)
            }
            Some(b'~') => {
                self.pos += 1;
                let text = self.number_text();
                RealScalar::declared_irrational_decimal(&text)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let text = self.number_text();
                let (r, _) = parse_decimal(&text).ok_or_else(|| self.err("bad number"))?;
                Ok(RealScalar::Rational(r))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident().to_string();
                match name.as_str() {
                    "sqrt" => {
                        let paren = self.eat(b'(');
                        self.skip_ws();
                        let text = self.number_text();
                        let d: u64 = text.parse().map_err(|_| self.err("bad radicand"))?;
                        if paren && !self.eat(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(RealScalar::sqrt(d))
                    }
                    "pi" => Ok(RealScalar::pi()),
                    "e" => Ok(RealScalar::e()),
                    "golden" | "phi" => Ok(RealScalar::golden()),
                    "irr" | "ival" => {
                        if !self.eat(b'(') {
                            return Err(self.err("expected `(`"));
                        }
                        let mid = self.rational_arg()?;
                        if !self.eat(b',') {
                            return Err(self.err("expected `,`"));
                        }
                        let radius = self.rational_arg()?;
                        if !self.eat(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        if radius.is_negative() {
                            return Err(self.err("negative radius"));
                        }
                        Ok(RealScalar::Certified(Certified {
                            mid,
                            radius,
                            irrational: name == "irr",
                        }))
                    }
                    _ => Err(self.err("unknown identifier")),
                }
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

/// Greatest common divisor on `i64`, always nonnegative.
pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Sign helper used by callers that need `BigInt` results as `i64`.
pub fn big_to_i64(b: &BigInt) -> i64 {
    match b.sign() {
        Sign::NoSign => 0,
        _ => b.to_i64().expect("value fits in i64"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> RealScalar {
        RealScalar::parse(x).unwrap()
    }

    #[test]
    fn rationals_reduce() {
        assert_eq!(s("6/4"), RealScalar::ratio(3, 2).unwrap());
        assert_eq!(s("0.25"), RealScalar::ratio(1, 4).unwrap());
        assert_eq!(s("-3"), RealScalar::integer(-3));
    }

    #[test]
    fn quadratic_floor_and_ceil() {
        let r2 = s("sqrt2");
        assert_eq!(r2.floor_i64().unwrap(), 1);
        assert_eq!(r2.ceil_i64().unwrap(), 2);
        assert_eq!(s("sqrt2-1").floor_i64().unwrap(), 0);
        assert_eq!(s("1-sqrt2").floor_i64().unwrap(), -1);
        assert_eq!(s("sqrt2").mul_int(100).floor_i64().unwrap(), 141);
        assert_eq!(s("-sqrt2").mul_int(3).floor_i64().unwrap(), -5);
        assert_eq!(s("(1+sqrt5)/2").floor_i64().unwrap(), 1);
        assert_eq!(s("1/sqrt2").floor_i64().unwrap(), 0);
        assert_eq!(s("1/sqrt2").ceil_i64().unwrap(), 1);
    }

    #[test]
    fn perfect_squares_collapse() {
        assert_eq!(s("sqrt9"), RealScalar::integer(3));
        assert_eq!(s("sqrt12"), s("2*sqrt3"));
        assert_eq!(s("sqrt2*sqrt2"), RealScalar::integer(2));
    }

    #[test]
    fn certified_floor_rejects_near_integer() {
        let x = RealScalar::certified(
            BigRational::new(BigInt::from(1), BigInt::from(1)),
            BigRational::new(BigInt::from(1), BigInt::from(10).pow(20)),
            true,
        )
        .unwrap();
        assert!(matches!(x.floor(), Err(ScalarError::Ambiguous { .. })));
        assert!(x.is_integer().is_err());
        let pi = RealScalar::pi();
        assert_eq!(pi.floor_i64().unwrap(), 3);
        assert_eq!(pi.mul_int(1000).floor_i64().unwrap(), 3141);
        assert_eq!(s("1/pi").floor_i64().unwrap(), 0);
        assert_eq!(s("e-1").mul_int(7).floor_i64().unwrap(), 12);
    }

    #[test]
    fn certified_radius_limit() {
        let r = RealScalar::certified(BigRational::one(), BigRational::new(1.into(), 1000.into()), true);
        assert!(matches!(r, Err(ScalarError::RadiusTooLarge(_))));
        assert!(RealScalar::parse("~0.70710").unwrap_err().to_string().contains("1e-12"));
        assert!(RealScalar::parse("~0.7071067811865475244").is_ok());
    }

    #[test]
    fn mixed_fields_fall_back_to_enclosures() {
        let x = s("sqrt2+sqrt3");
        assert!(matches!(x, RealScalar::Certified(_)));
        assert_eq!(x.floor_i64().unwrap(), 3);
        assert_eq!(x.mul_int(1000).floor_i64().unwrap(), 3146);
    }

    #[test]
    fn comparisons() {
        assert_eq!(s("sqrt2").try_cmp(&s("1.4142")).unwrap(), Ordering::Greater);
        assert_eq!(s("1+sqrt2").try_cmp(&s("sqrt2+1")).unwrap(), Ordering::Equal);
        assert_eq!(s("pi").try_cmp(&s("355/113")).unwrap(), Ordering::Less);
        assert!(s("pi").try_cmp(&s("pi")).is_err());
    }

    #[test]
    fn display_round_trips() {
        for t in ["3", "-7/3", "sqrt2-1", "(1+sqrt5)/2", "1/pi", "e-1", "~0.12345678901234567", "1/sqrt2"] {
            let v = s(t);
            let back = RealScalar::parse(&v.to_string()).unwrap();
            assert_eq!(v, back, "{t}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(s("1+sqrt2").to_decimal(6), "2.41421");
        assert_eq!(s("1/8").to_decimal(5), "0.125");
        assert_eq!(s("-1/3").to_decimal(4), "-0.3333");
        assert_eq!(s("1/300").to_decimal(3), "0.00333");
        assert!((s("sqrt2").to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn half_odd_integers() {
        assert!(s("5/2").is_half_odd_integer().unwrap());
        assert!(!s("3").is_half_odd_integer().unwrap());
        assert!(!s("sqrt2").is_half_odd_integer().unwrap());
    }

    #[test]
    fn reciprocal_of_certified_keeps_irrational_flag() {
        let inv = s("1/pi");
        assert!(inv.is_known_irrational());
        let ratio = s("1").div(&s("e-1")).unwrap();
        assert!(ratio.is_known_irrational());
        assert_eq!(ratio.floor_i64().unwrap(), 0);
    }
}
