//! Exact truth degrees and the four operator families.
//!
//! Every degree is an arbitrary-precision rational in `[0, 1]`. All four
//! families map rationals to rationals, so nothing here ever rounds.
//! [`LogDyadicDegree`] covers the values of the form `2^r` that the Product
//! canonical model needs, where the t-norm and residuum act on exponents.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegreeError {
    #[error("malformed degree literal `{0}`")]
    Malformed(String),
    #[error("degree {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("unknown operator family `{0}` (expected zadeh, luk, prod or goedel)")]
    UnknownFamily(String),
    #[error("{0} is not defined on log-dyadic degrees")]
    Unsupported(&'static str),
}

/// A truth value: an exact rational in `[0, 1]`, always in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Degree(BigRational);

impl Degree {
    pub fn zero() -> Self {
        Degree(BigRational::zero())
    }

    pub fn one() -> Self {
        Degree(BigRational::one())
    }

    pub fn half() -> Self {
        Degree::ratio(1, 2)
    }

    /// `num/den`; panics if the value is not a degree. Meant for literals.
    pub fn ratio(num: i64, den: i64) -> Self {
        Degree::new(num, den).expect("literal degree out of range")
    }

    pub fn new(num: i64, den: i64) -> Result<Self, DegreeError> {
        if den == 0 {
            return Err(DegreeError::ZeroDenominator(format!("{num}/{den}")));
        }
        Degree::from_ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn from_ratio(value: BigRational) -> Result<Self, DegreeError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(DegreeError::OutOfRange(fmt_ratio(&value)));
        }
        Ok(Degree(value))
    }

    fn raw(value: BigRational) -> Self {
        debug_assert!(!value.is_negative() && value <= BigRational::one());
        Degree(value)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `1 - self`.
    pub fn complement(&self) -> Degree {
        Degree::raw(BigRational::one() - &self.0)
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_ratio(&self.0))
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Degree({self})")
    }
}

/// Accepts `p/q`, integers and terminating decimals (`0.25`, `.5`). Decimals
/// are converted exactly.
impl FromStr for Degree {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let malformed = || DegreeError::Malformed(text.to_string());
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((p, q)) = text.split_once('/') {
            let (p, q) = (p.trim(), q.trim());
            if !digits(p) || !digits(q) {
                return Err(malformed());
            }
            let q: BigInt = q.parse().map_err(|_| malformed())?;
            if q.is_zero() {
                return Err(DegreeError::ZeroDenominator(text.to_string()));
            }
            BigRational::new(p.parse().map_err(|_| malformed())?, q)
        } else {
            let (int, frac) = text.split_once('.').unwrap_or((text, ""));
            if !(digits(int) || (int.is_empty() && digits(frac))) {
                return Err(malformed());
            }
            if text.contains('.') && !digits(frac) {
                return Err(malformed());
            }
            let int: BigInt = if int.is_empty() {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| malformed())?
            };
            let scale = num_traits::pow(BigInt::from(10u8), frac.len());
            let frac: BigInt = if frac.is_empty() {
                BigInt::zero()
            } else {
                frac.parse().map_err(|_| malformed())?
            };
            BigRational::new(int * &scale + frac, scale)
        };
        Degree::from_ratio(value).map_err(|_| DegreeError::OutOfRange(text.to_string()))
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// One of the four families of fuzzy operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperatorFamily {
    Zadeh,
    Lukasiewicz,
    Product,
    Goedel,
}

impl OperatorFamily {
    pub const ALL: [OperatorFamily; 4] = [
        OperatorFamily::Zadeh,
        OperatorFamily::Lukasiewicz,
        OperatorFamily::Product,
        OperatorFamily::Goedel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorFamily::Zadeh => "zadeh",
            OperatorFamily::Lukasiewicz => "lukasiewicz",
            OperatorFamily::Product => "product",
            OperatorFamily::Goedel => "goedel",
        }
    }

    /// Whether the implication is the residuum of the t-norm.
    pub fn is_residuated(self) -> bool {
        !matches!(self, OperatorFamily::Zadeh)
    }

    pub fn tnorm(self, a: &Degree, b: &Degree) -> Degree {
        match self {
            OperatorFamily::Zadeh | OperatorFamily::Goedel => std::cmp::min(a, b).clone(),
            OperatorFamily::Lukasiewicz => {
                let s = &a.0 + &b.0 - BigRational::one();
                if s.is_positive() {
                    Degree::raw(s)
                } else {
                    Degree::zero()
                }
            }
            OperatorFamily::Product => Degree::raw(&a.0 * &b.0),
        }
    }

    pub fn tconorm(self, a: &Degree, b: &Degree) -> Degree {
        match self {
            OperatorFamily::Zadeh | OperatorFamily::Goedel => std::cmp::max(a, b).clone(),
            OperatorFamily::Lukasiewicz => {
                let s = &a.0 + &b.0;
                if s >= BigRational::one() {
                    Degree::one()
                } else {
                    Degree::raw(s)
                }
            }
            OperatorFamily::Product => Degree::raw(&a.0 + &b.0 - &a.0 * &b.0),
        }
    }

    pub fn negation(self, a: &Degree) -> Degree {
        match self {
            OperatorFamily::Zadeh | OperatorFamily::Lukasiewicz => a.complement(),
            OperatorFamily::Product | OperatorFamily::Goedel => {
                if a.is_zero() {
                    Degree::one()
                } else {
                    Degree::zero()
                }
            }
        }
    }

    pub fn implication(self, a: &Degree, b: &Degree) -> Degree {
        match self {
            OperatorFamily::Zadeh => std::cmp::max(a.complement(), b.clone()),
            OperatorFamily::Lukasiewicz => {
                let s = BigRational::one() - &a.0 + &b.0;
                if s >= BigRational::one() {
                    Degree::one()
                } else {
                    Degree::raw(s)
                }
            }
            // a = 0 falls in the a <= b branch.
            OperatorFamily::Product => {
                if a <= b {
                    Degree::one()
                } else {
                    Degree::raw(&b.0 / &a.0)
                }
            }
            OperatorFamily::Goedel => {
                if a <= b {
                    Degree::one()
                } else {
                    b.clone()
                }
            }
        }
    }
}

impl fmt::Display for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorFamily {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zadeh" | "z" => Ok(OperatorFamily::Zadeh),
            "luk" | "lukasiewicz" | "łukasiewicz" | "l" => Ok(OperatorFamily::Lukasiewicz),
            "prod" | "product" | "p" => Ok(OperatorFamily::Product),
            "goedel" | "godel" | "gödel" | "g" => Ok(OperatorFamily::Goedel),
            _ => Err(DegreeError::UnknownFamily(s.to_string())),
        }
    }
}

pub fn tnorm(f: OperatorFamily, a: &Degree, b: &Degree) -> Degree {
    f.tnorm(a, b)
}

pub fn tconorm(f: OperatorFamily, a: &Degree, b: &Degree) -> Degree {
    f.tconorm(a, b)
}

pub fn negation(f: OperatorFamily, a: &Degree) -> Degree {
    f.negation(a)
}

pub fn implication(f: OperatorFamily, a: &Degree, b: &Degree) -> Degree {
    f.implication(a, b)
}

/// Either exactly `0` or `2^exponent` with a rational `exponent <= 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LogDyadicDegree {
    Zero,
    Pow2(BigRational),
}

impl LogDyadicDegree {
    pub fn one() -> Self {
        LogDyadicDegree::Pow2(BigRational::zero())
    }

    pub fn pow2(exponent: BigRational) -> Result<Self, DegreeError> {
        if exponent.is_positive() {
            return Err(DegreeError::OutOfRange(format!("2^{}", fmt_ratio(&exponent))));
        }
        Ok(LogDyadicDegree::Pow2(exponent))
    }

    /// `2^(num/den)`; panics unless `num/den <= 0`.
    pub fn pow2_ratio(num: i64, den: i64) -> Self {
        LogDyadicDegree::pow2(BigRational::new(num.into(), den.into()))
            .expect("positive exponent")
    }

    pub fn exponent(&self) -> Option<&BigRational> {
        match self {
            LogDyadicDegree::Zero => None,
            LogDyadicDegree::Pow2(r) => Some(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogDyadicDegree::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, LogDyadicDegree::Pow2(r) if r.is_zero())
    }

    /// Exact conversion from a degree that is `0` or `1/2^k`.
    pub fn from_degree(d: &Degree) -> Option<Self> {
        if d.is_zero() {
            return Some(LogDyadicDegree::Zero);
        }
        if !d.numer().is_one() {
            return None;
        }
        let den = d.denom().magnitude();
        let k = den.trailing_zeros().unwrap_or(0);
        if *den != BigUint::one() << k {
            return None;
        }
        Some(LogDyadicDegree::Pow2(-BigRational::from_integer(BigInt::from(k))))
    }

    /// Exact conversion when the value is rational, i.e. `0` or an integer exponent.
    pub fn to_degree(&self) -> Option<Degree> {
        match self {
            LogDyadicDegree::Zero => Some(Degree::zero()),
            LogDyadicDegree::Pow2(r) if r.is_integer() => {
                let k = (-r.to_integer()).to_usize()?;
                Some(Degree::raw(BigRational::new(
                    BigInt::one(),
                    BigInt::one() << k,
                )))
            }
            LogDyadicDegree::Pow2(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LogDyadicDegree::Zero => 0.0,
            LogDyadicDegree::Pow2(r) => 2f64.powf(r.to_f64().unwrap_or(f64::NEG_INFINITY)),
        }
    }

    /// Rational bounds `lo <= value <= hi` with `hi - lo < 2^-bits`.
    pub fn enclose(&self, bits: u32) -> (BigRational, BigRational) {
        match self {
            LogDyadicDegree::Zero => (BigRational::zero(), BigRational::zero()),
            LogDyadicDegree::Pow2(r) => enclose_pow2(r, bits),
        }
    }

    /// Exact comparison against a rational degree.
    pub fn cmp_degree(&self, d: &Degree) -> Ordering {
        match self {
            LogDyadicDegree::Zero => BigRational::zero().cmp(d.as_ratio()),
            LogDyadicDegree::Pow2(r) if r.is_integer() => {
                self.to_degree().map(|v| v.cmp(d)).unwrap_or(Ordering::Less)
            }
            // 2^r is irrational here, so refinement separates it from `d`.
            LogDyadicDegree::Pow2(r) => {
                let mut bits = 64;
                loop {
                    let (lo, hi) = enclose_pow2(r, bits);
                    if &hi < d.as_ratio() {
                        return Ordering::Less;
                    }
                    if &lo > d.as_ratio() {
                        return Ordering::Greater;
                    }
                    bits *= 2;
                }
            }
        }
    }
}

impl PartialOrd for LogDyadicDegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogDyadicDegree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogDyadicDegree::Zero, LogDyadicDegree::Zero) => Ordering::Equal,
            (LogDyadicDegree::Zero, LogDyadicDegree::Pow2(_)) => Ordering::Less,
            (LogDyadicDegree::Pow2(_), LogDyadicDegree::Zero) => Ordering::Greater,
            (LogDyadicDegree::Pow2(r), LogDyadicDegree::Pow2(s)) => r.cmp(s),
        }
    }
}

impl fmt::Display for LogDyadicDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogDyadicDegree::Zero => f.write_str("0"),
            LogDyadicDegree::Pow2(r) if r.is_zero() => f.write_str("1"),
            LogDyadicDegree::Pow2(r) => write!(f, "2^({})", fmt_ratio(r)),
        }
    }
}

impl fmt::Debug for LogDyadicDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogDyadicDegree::Zero => f.write_str("Zero"),
            LogDyadicDegree::Pow2(r) => write!(f, "Pow2({})", fmt_ratio(r)),
        }
    }
}

impl Serialize for LogDyadicDegree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Product t-norm on exponents: `2^r * 2^s = 2^(r+s)`.
pub fn ld_tnorm(a: &LogDyadicDegree, b: &LogDyadicDegree) -> LogDyadicDegree {
    match (a, b) {
        (LogDyadicDegree::Pow2(r), LogDyadicDegree::Pow2(s)) => LogDyadicDegree::Pow2(r + s),
        _ => LogDyadicDegree::Zero,
    }
}

/// Product residuum: `1` if `a <= b`, otherwise `b / a`.
pub fn ld_implication(a: &LogDyadicDegree, b: &LogDyadicDegree) -> LogDyadicDegree {
    if a <= b {
        return LogDyadicDegree::one();
    }
    match (a, b) {
        (LogDyadicDegree::Pow2(r), LogDyadicDegree::Pow2(s)) => LogDyadicDegree::Pow2(s - r),
        _ => LogDyadicDegree::Zero,
    }
}

/// Strict negation.
pub fn ld_negation(a: &LogDyadicDegree) -> LogDyadicDegree {
    match a {
        LogDyadicDegree::Zero => LogDyadicDegree::one(),
        LogDyadicDegree::Pow2(_) => LogDyadicDegree::Zero,
    }
}

/// `a + b - ab` leaves the `2^r` form.
pub fn ld_tconorm(
    _a: &LogDyadicDegree,
    _b: &LogDyadicDegree,
) -> Result<LogDyadicDegree, DegreeError> {
    Err(DegreeError::Unsupported("the Product t-conorm"))
}

// Fixed-point helpers for enclosing 2^r. Numbers are integers scaled by 2^prec.

fn ceil_sqrt(n: &BigInt) -> BigInt {
    let s = n.sqrt();
    if &(&s * &s) == n {
        s
    } else {
        s + 1
    }
}

fn ceil_nth_root(n: &BigInt, k: u32) -> BigInt {
    let s = n.nth_root(k);
    if &num_traits::pow(s.clone(), k as usize) == n {
        s
    } else {
        s + 1
    }
}

fn enclose_pow2(r: &BigRational, bits: u32) -> (BigRational, BigRational) {
    debug_assert!(!r.is_positive());
    let neg = -r;
    let int_part = neg.floor().to_integer();
    let frac = &neg - BigRational::from_integer(int_part.clone());
    let den = frac.denom().clone();
    let guard = 2 * (64 - den.bits().leading_zeros()) + 16;
    let prec = bits as usize + guard as usize + 8;
    let scale = BigInt::one() << prec;

    let (mut lo, mut hi) = if frac.is_zero() {
        (scale.clone(), scale.clone())
    } else if den.magnitude().count_ones() == 1 {
        // frac = p / 2^m: multiply 2^(-2^-j) for each set bit j of p.
        let m = den.magnitude().trailing_zeros().unwrap_or(0);
        let p = frac.numer().magnitude().clone();
        let mut lo = scale.clone();
        let mut hi = scale.clone();
        let mut c_lo = &scale >> 1usize;
        let mut c_hi = c_lo.clone();
        for j in 1..=m {
            c_lo = (&c_lo * &scale).sqrt();
            c_hi = ceil_sqrt(&(&c_hi * &scale));
            if p.bit(m - j) {
                lo = (&lo * &c_lo) >> prec;
                hi = (&hi * &c_hi + &scale - 1) >> prec;
            }
        }
        (lo, hi)
    } else if let Some(q) = den.to_u32().filter(|q| *q <= 256) {
        // 2^(-p/q) * 2^prec = (2^(prec*q - p))^(1/q)
        let p = frac.numer().to_u32().unwrap_or(0);
        let radicand = BigInt::one() << (prec * q as usize - p as usize);
        (radicand.nth_root(q), ceil_nth_root(&radicand, q))
    } else {
        let v = 2f64.powf(-frac.to_f64().unwrap_or(0.0));
        let eps = 1e-12;
        let to_fixed = |x: f64| {
            BigRational::from_float(x.clamp(0.0, 1.0))
                .map(|r| (r * BigRational::from_integer(scale.clone())).floor().to_integer())
                .unwrap_or_default()
        };
        (to_fixed(v - eps), to_fixed(v + eps) + 1)
    };

    let shift = int_part.to_usize().unwrap_or(usize::MAX);
    if shift >= prec {
        lo = BigInt::zero();
        hi = BigInt::one();
    } else {
        lo >>= shift;
        hi = (hi + (BigInt::one() << shift) - 1) >> shift;
    }
    (
        BigRational::new(lo, scale.clone()),
        BigRational::new(hi.min(scale.clone()), scale),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use OperatorFamily::*;

    fn d(s: &str) -> Degree {
        s.parse().unwrap()
    }

    #[test]
    fn table_examples() {
        assert_eq!(tnorm(Lukasiewicz, &d("3/5"), &d("7/10")), d("3/10"));
        assert_eq!(tnorm(Product, &d("1/2"), &d("1/2")), d("1/4"));
        assert_eq!(tconorm(Lukasiewicz, &d("3/5"), &d("7/10")), d("1"));
        assert_eq!(tconorm(Product, &d("1/2"), &d("1/2")), d("3/4"));
        assert_eq!(negation(Lukasiewicz, &d("1/4")), d("3/4"));
        assert_eq!(negation(Product, &d("1/4")), d("0"));
        assert_eq!(negation(Goedel, &d("0")), d("1"));
        assert_eq!(implication(Product, &d("4/5"), &d("2/5")), d("1/2"));
        assert_eq!(implication(Zadeh, &d("3/10"), &d("1/5")), d("7/10"));
        for f in [Lukasiewicz, Product, Goedel] {
            assert_eq!(implication(f, &d("1/3"), &d("1/2")), Degree::one());
            assert_eq!(implication(f, &d("0"), &d("0")), Degree::one());
        }
    }

    #[test]
    fn units() {
        let a = d("5/7");
        for f in OperatorFamily::ALL {
            assert_eq!(tnorm(f, &a, &Degree::one()), a);
            assert_eq!(tconorm(f, &a, &Degree::zero()), a);
        }
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(d("0.5"), Degree::half());
        assert_eq!(d(".25"), d("1/4"));
        assert_eq!(d("0.2"), d("1/5"));
        assert_eq!(d("1.000"), Degree::one());
        assert_eq!(d("6/8"), d("3/4"));
        assert!(matches!("3/2".parse::<Degree>(), Err(DegreeError::OutOfRange(_))));
        assert!(matches!("1.5".parse::<Degree>(), Err(DegreeError::OutOfRange(_))));
        assert!(matches!("1/0".parse::<Degree>(), Err(DegreeError::ZeroDenominator(_))));
        for bad in ["", ".", "1.", "-1/2", "a", "1/2/3", "0x1", "1e-1"] {
            assert!(bad.parse::<Degree>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn family_names() {
        assert_eq!("luk".parse::<OperatorFamily>().unwrap(), Lukasiewicz);
        assert_eq!("Gödel".parse::<OperatorFamily>().unwrap(), Goedel);
        assert!("min".parse::<OperatorFamily>().is_err());
    }

    #[test]
    fn log_dyadic_ops() {
        let p = LogDyadicDegree::pow2_ratio;
        assert_eq!(ld_tnorm(&p(-1, 2), &p(-1, 2)), p(-1, 1));
        assert_eq!(ld_tnorm(&LogDyadicDegree::Zero, &p(-1, 1)), LogDyadicDegree::Zero);
        assert_eq!(ld_tnorm(&p(0, 1), &p(-1, 4)), p(-1, 4));
        assert_eq!(ld_implication(&p(-1, 4), &p(-1, 2)), p(-1, 4));
        assert_eq!(ld_implication(&p(-1, 1), &p(-1, 1)), p(0, 1));
        assert_eq!(ld_implication(&p(-1, 1), &LogDyadicDegree::Zero), LogDyadicDegree::Zero);
        assert_eq!(ld_negation(&LogDyadicDegree::Zero), p(0, 1));
        assert_eq!(ld_negation(&p(0, 1)), LogDyadicDegree::Zero);
        assert_eq!(ld_negation(&p(-3, 8)), LogDyadicDegree::Zero);
        assert!(ld_tconorm(&p(-1, 1), &p(-1, 1)).is_err());
        assert!(LogDyadicDegree::Zero < p(-100, 1));
        assert!(p(-1, 2) < p(-1, 4));
    }

    #[test]
    fn log_dyadic_rational_conversions() {
        let half = LogDyadicDegree::from_degree(&Degree::half()).unwrap();
        assert_eq!(half, LogDyadicDegree::pow2_ratio(-1, 1));
        assert_eq!(half.to_degree(), Some(Degree::half()));
        assert_eq!(LogDyadicDegree::from_degree(&d("1/3")), None);
        assert_eq!(LogDyadicDegree::pow2_ratio(-1, 2).to_degree(), None);
        assert_eq!(
            LogDyadicDegree::pow2_ratio(-1, 2).cmp_degree(&d("7/10")),
            Ordering::Greater
        );
        assert_eq!(
            LogDyadicDegree::pow2_ratio(-1, 2).cmp_degree(&d("71/100")),
            Ordering::Less
        );
        assert_eq!(LogDyadicDegree::pow2_ratio(-2, 1).cmp_degree(&d("1/4")), Ordering::Equal);
    }

    #[test]
    fn enclosure_is_tight_and_correct() {
        for (num, den) in [(-1, 2), (-3, 8), (-5, 1), (-7, 3), (-1, 1 << 40), (-123, 64)] {
            let v = LogDyadicDegree::pow2_ratio(num, den);
            let (lo, hi) = v.enclose(60);
            assert!(lo <= hi);
            assert!(&hi - &lo < BigRational::new(1.into(), BigInt::one() << 50usize));
            let f = v.to_f64();
            assert!(lo.to_f64().unwrap() <= f + 1e-15 && f - 1e-15 <= hi.to_f64().unwrap());
        }
    }
}
