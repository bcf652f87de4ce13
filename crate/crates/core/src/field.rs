//! Exact scalar arithmetic: prime fields GF(p) and arbitrary-precision rationals.
//!
//! A [`FieldSpec`] names the arithmetic domain of a scheme. Every matrix entry is a
//! [`FieldElement`] in canonical form: residues in `[0, p)` for prime fields, and
//! lowest-terms fractions with a positive denominator for the reals.
//!
//! The operator impls (`&a + &b`, ...) panic when the operands come from different
//! fields, the same way slice indexing panics out of bounds. The `checked_*` methods
//! return [`Error::FieldMismatch`] instead.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest modulus accepted by [`PrimeModulus::new`].
pub const MAX_MODULUS: u64 = 1 << 61;

/// A prime modulus, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_MODULUS {
            return Err(Error::InvalidField(format!(
                "modulus {p} exceeds the supported maximum 2^61"
            )));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// Deterministic Miller-Rabin; the fixed witness set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The arithmetic domain of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Prime(PrimeModulus),
    /// Structural work runs on exact rationals; statistics on `f64`.
    Real,
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        PrimeModulus::new(p).map(FieldSpec::Prime)
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            FieldSpec::Prime(p) => Some(p.get()),
            FieldSpec::Real => None,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, FieldSpec::Real)
    }

    pub fn zero(&self) -> FieldElement {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        match *self {
            FieldSpec::Prime(p) => FieldElement::Prime(Fp::from_i128(v as i128, p)),
            FieldSpec::Real => FieldElement::Rational(BigRational::from_integer(BigInt::from(v))),
        }
    }

    /// Interprets `num/den` in this field. Over GF(p) this is `num * den^-1`.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<FieldElement> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match *self {
            FieldSpec::Prime(p) => {
                let n = Fp::from_bigint(num, p);
                let d = Fp::from_bigint(den, p);
                let d_inv = d.inv().ok_or(Error::DivisionByZero)?;
                Ok(FieldElement::Prime(n.mul(d_inv)))
            }
            FieldSpec::Real => Ok(FieldElement::Rational(BigRational::new(
                num.clone(),
                den.clone(),
            ))),
        }
    }

    /// Converts an element of another field into this one. Rationals map into
    /// GF(p) by reducing numerator and denominator; GF elements only convert to
    /// their own field.
    pub fn convert(&self, x: &FieldElement) -> Result<FieldElement> {
        match x {
            FieldElement::Rational(r) => self.from_ratio(r.numer(), r.denom()),
            FieldElement::Prime(a) if Some(a.modulus.get()) == self.modulus() => Ok(x.clone()),
            FieldElement::Prime(_) => Err(Error::FieldMismatch {
                left: x.field(),
                right: *self,
            }),
        }
    }

    /// Parses a matrix entry written as an integer literal or an `"a/b"` string.
    pub fn parse_entry(&self, s: &str) -> Result<FieldElement> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let parse = |t: &str| {
            BigInt::from_str(t).map_err(|_| Error::Parse(format!("invalid matrix entry {s:?}")))
        };
        self.from_ratio(&parse(num)?, &parse(den)?)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "gf:{}", p.get()),
            FieldSpec::Real => f.write_str("real"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("real") {
            return Ok(FieldSpec::Real);
        }
        let p = s
            .strip_prefix("gf:")
            .or_else(|| s.strip_prefix("GF:"))
            .ok_or_else(|| Error::Parse(format!("unknown field {s:?}; expected \"gf:<p>\" or \"real\"")))?;
        let p = p
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("invalid modulus in {s:?}")))?;
        FieldSpec::prime(p)
    }
}

/// An element of GF(p) in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    modulus: PrimeModulus,
}

impl Fp {
    pub fn new(value: u64, modulus: PrimeModulus) -> Self {
        Fp {
            value: value % modulus.get(),
            modulus,
        }
    }

    fn from_i128(v: i128, modulus: PrimeModulus) -> Self {
        let p = modulus.get() as i128;
        Fp {
            value: v.rem_euclid(p) as u64,
            modulus,
        }
    }

    fn from_bigint(v: &BigInt, modulus: PrimeModulus) -> Self {
        let p = BigInt::from(modulus.get());
        let r = ((v % &p) + &p) % &p;
        Fp {
            value: r.to_u64().expect("residue fits in u64"),
            modulus,
        }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    fn add(self, o: Fp) -> Fp {
        Fp {
            value: add_mod(self.value, o.value, self.modulus.get()),
            modulus: self.modulus,
        }
    }

    fn neg(self) -> Fp {
        let p = self.modulus.get();
        Fp {
            value: (p - self.value) % p,
            modulus: self.modulus,
        }
    }

    fn mul(self, o: Fp) -> Fp {
        Fp {
            value: mul_mod(self.value, o.value, self.modulus.get()),
            modulus: self.modulus,
        }
    }

    /// Fermat inverse; `None` for zero.
    pub fn inv(self) -> Option<Fp> {
        if self.value == 0 {
            return None;
        }
        let p = self.modulus.get();
        Some(Fp {
            value: pow_mod(self.value, p - 2, p),
            modulus: self.modulus,
        })
    }
}

/// A scalar from some [`FieldSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Prime(Fp),
    Rational(BigRational),
}

impl FieldElement {
    pub fn field(&self) -> FieldSpec {
        match self {
            FieldElement::Prime(a) => FieldSpec::Prime(a.modulus),
            FieldElement::Rational(_) => FieldSpec::Real,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Prime(a) => a.value == 0,
            FieldElement::Rational(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Prime(a) => a.value == 1,
            FieldElement::Rational(r) => r.is_one(),
        }
    }

    /// Residue for GF(p) elements.
    pub fn residue(&self) -> Option<u64> {
        match self {
            FieldElement::Prime(a) => Some(a.value),
            FieldElement::Rational(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElement::Rational(r) => Some(r),
            FieldElement::Prime(_) => None,
        }
    }

    /// Float value of a rational; GF elements map to their residue.
    pub fn to_f64(&self) -> f64 {
        match self {
            FieldElement::Prime(a) => a.value as f64,
            FieldElement::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        let (l, r) = (self.field(), other.field());
        if l == r {
            Ok(())
        } else {
            Err(Error::FieldMismatch { left: l, right: r })
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElement::Prime(a), FieldElement::Prime(b)) => FieldElement::Prime(a.add(*b)),
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElement::Prime(a), FieldElement::Prime(b)) => FieldElement::Prime(a.mul(*b)),
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a * b),
            _ => unreachable!(),
        })
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<FieldElement> {
        match self {
            FieldElement::Prime(a) => a.inv().map(FieldElement::Prime).ok_or(Error::DivisionByZero),
            FieldElement::Rational(r) if r.is_zero() => Err(Error::DivisionByZero),
            FieldElement::Rational(r) => Ok(FieldElement::Rational(r.recip())),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Prime(a) => write!(f, "{}", a.value),
            FieldElement::Rational(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            FieldElement::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Prime(a) => FieldElement::Prime(a.neg()),
            FieldElement::Rational(r) => FieldElement::Rational(-r),
        }
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.checked_add(rhs).expect("field mismatch")
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.checked_sub(rhs).expect("field mismatch")
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.checked_mul(rhs).expect("field mismatch")
    }
}
