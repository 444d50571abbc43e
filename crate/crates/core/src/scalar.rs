//! Exact scalars: arbitrary-precision rationals and residues modulo a prime.
//!
//! Every structure in the crate lives over a single [`Field`]. Scalars carry
//! enough information to do arithmetic on their own (a residue remembers its
//! modulus), so the `std::ops` impls work without a field context. Mixing
//! scalars from different fields through the operators is a programming
//! error and panics; the `try_*` methods report it as [`ScalarError::FieldMismatch`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use malachite_base::num::arithmetic::traits::{CheckedSqrt, Reciprocal};
use malachite_q::Rational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Largest modulus accepted for prime fields; products of residues must fit in a `u64`.
pub const MAX_PRIME: u64 = (1 << 32) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalars belong to different fields")]
    FieldMismatch,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_PRIME}")]
    ModulusTooLarge(u64),
    #[error("cannot parse scalar: {0}")]
    Parse(String),
}

/// The base field K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", try_from = "RawField")]
pub enum Field {
    #[serde(rename = "Q")]
    Rationals,
    #[serde(rename = "GFp")]
    PrimeField { p: u64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum RawField {
    #[serde(rename = "Q")]
    Rationals,
    #[serde(rename = "GFp")]
    PrimeField { p: u64 },
}

impl TryFrom<RawField> for Field {
    type Error = ScalarError;

    fn try_from(raw: RawField) -> Result<Self, Self::Error> {
        match raw {
            RawField::Rationals => Ok(Field::Rationals),
            RawField::PrimeField { p } => Field::prime(p),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

impl Field {
    /// GF(p), rejecting composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Self, ScalarError> {
        if p > MAX_PRIME {
            return Err(ScalarError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(ScalarError::NotPrime(p));
        }
        Ok(Field::PrimeField { p })
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rationals => 0,
            Field::PrimeField { p } => *p,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rational(Rational::from(n)),
            Field::PrimeField { p } => Scalar::Residue {
                value: n.rem_euclid(*p as i64) as u64,
                p: *p,
            },
        }
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        x.field() == *self
    }

    /// Whether `x` is a square in the field (zero counts as a square).
    pub fn is_square(&self, x: &Scalar) -> bool {
        match x {
            Scalar::Rational(q) => *q >= 0u32 && q.clone().checked_sqrt().is_some(),
            Scalar::Residue { value, p } => {
                *value == 0 || *p == 2 || pow_mod(*value, (p - 1) / 2, *p) == 1
            }
        }
    }

    /// A square root of `x` when one is cheap to find: always over Q,
    /// by search over small prime fields.
    pub fn sqrt(&self, x: &Scalar) -> Option<Scalar> {
        match x {
            Scalar::Rational(q) if *q >= 0u32 => q.clone().checked_sqrt().map(Scalar::Rational),
            Scalar::Rational(_) => None,
            Scalar::Residue { value, p } if *p <= 1 << 16 => (0..*p)
                .find(|r| r * r % p == *value)
                .map(|r| Scalar::Residue { value: r, p: *p }),
            Scalar::Residue { .. } => None,
        }
    }

    /// True iff char K = 0 or char K > `dim`, the hypothesis under which the
    /// radical of a graded finite-dimensional algebra is known to be graded.
    pub fn char_precondition(&self, dim: usize) -> bool {
        match self {
            Field::Rationals => true,
            Field::PrimeField { p } => *p > dim as u64,
        }
    }

    /// Decode a scalar: rationals as `"n/d"`, `"n"` or a JSON integer;
    /// residues as a JSON integer (reduced modulo p) or a decimal string.
    pub fn parse_scalar(&self, v: &Value) -> Result<Scalar, ScalarError> {
        match self {
            Field::Rationals => match v {
                Value::String(s) => Rational::from_str(s.trim())
                    .map(Scalar::Rational)
                    .map_err(|_| ScalarError::Parse(s.clone())),
                Value::Number(n) => n
                    .as_i64()
                    .map(|n| self.from_i64(n))
                    .ok_or_else(|| ScalarError::Parse(n.to_string())),
                other => Err(ScalarError::Parse(other.to_string())),
            },
            Field::PrimeField { .. } => {
                let n = match v {
                    Value::Number(n) => n.as_i64(),
                    Value::String(s) => s.trim().parse::<i64>().ok(),
                    _ => None,
                };
                n.map(|n| self.from_i64(n))
                    .ok_or_else(|| ScalarError::Parse(v.to_string()))
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "Q"),
            Field::PrimeField { p } => write!(f, "GF({p})"),
        }
    }
}

/// An exact field element.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Rational(Rational),
    /// Residue in `[0, p)`.
    Residue { value: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rationals,
            Scalar::Residue { p, .. } => Field::PrimeField { p: *p },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => *q == 0u32,
            Scalar::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => *q == 1u32,
            Scalar::Residue { value, .. } => *value == 1,
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a + b)),
            (Scalar::Residue { value: a, p }, Scalar::Residue { value: b, p: q }) if p == q => {
                Ok(Scalar::Residue {
                    value: (a + b) % p,
                    p: *p,
                })
            }
            _ => Err(ScalarError::FieldMismatch),
        }
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a * b)),
            (Scalar::Residue { value: a, p }, Scalar::Residue { value: b, p: q }) if p == q => {
                Ok(Scalar::Residue {
                    value: a * b % p,
                    p: *p,
                })
            }
            _ => Err(ScalarError::FieldMismatch),
        }
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(q) => Scalar::Rational(q.reciprocal()),
            Scalar::Residue { value, p } => Scalar::Residue {
                value: pow_mod(*value, p - 2, *p),
                p: *p,
            },
        })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_mul(&other.inv()?)
    }

    /// `self += a * b`, the inner-loop primitive of elimination and products.
    pub fn add_mul_assign(&mut self, a: &Scalar, b: &Scalar) {
        match (self, a, b) {
            (Scalar::Rational(acc), Scalar::Rational(x), Scalar::Rational(y)) => {
                *acc += x * y;
            }
            (
                Scalar::Residue { value, p },
                Scalar::Residue { value: x, p: px },
                Scalar::Residue { value: y, p: py },
            ) if p == px && p == py => {
                *value = (*value + x * y % *p) % *p;
            }
            _ => panic!("{}", ScalarError::FieldMismatch),
        }
    }

    /// JSON encoding: rationals as strings (`"3/4"`, `"-2"`), residues as integers.
    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Rational(q) => Value::String(q.to_string()),
            Scalar::Residue { value, .. } => Value::from(*value),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{q}"),
            Scalar::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Residue { value, p } => Scalar::Residue {
                value: (p - value) % p,
                p: *p,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$try(rhs).expect("scalar field mismatch")
            }
        }

        impl $trait<Scalar> for Scalar {
            type Output = Scalar;

            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$try(&rhs).expect("scalar field mismatch")
            }
        }

        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$try(rhs).expect("scalar field mismatch")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        Field::Rationals.parse_scalar(&Value::String(s.into())).unwrap()
    }

    #[test]
    fn rational_addition() {
        assert_eq!(q("1/3") + q("1/6"), q("1/2"));
    }

    #[test]
    fn inverse_in_gf5() {
        let f = Field::prime(5).unwrap();
        assert_eq!(f.from_i64(2).inv().unwrap(), f.from_i64(3));
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(Field::Rationals.zero().inv(), Err(ScalarError::DivisionByZero));
        let f = Field::prime(7).unwrap();
        assert_eq!(f.zero().inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn mixing_fields_is_an_error() {
        let a = Field::Rationals.one();
        let b = Field::prime(5).unwrap().one();
        assert_eq!(a.try_add(&b), Err(ScalarError::FieldMismatch));
        assert_eq!(a.try_mul(&b), Err(ScalarError::FieldMismatch));
    }

    #[test]
    fn composite_modulus_rejected() {
        assert_eq!(Field::prime(91), Err(ScalarError::NotPrime(91)));
        assert!(Field::prime(1 << 33).is_err());
    }

    #[test]
    fn characteristic_hypothesis() {
        assert!(Field::Rationals.char_precondition(100));
        assert!(Field::prime(101).unwrap().char_precondition(100));
        assert!(!Field::prime(5).unwrap().char_precondition(100));
    }

    #[test]
    fn squares() {
        let f = Field::prime(5).unwrap();
        assert!(f.is_square(&f.from_i64(4)));
        assert!(!f.is_square(&f.from_i64(2)));
        assert!(Field::Rationals.is_square(&q("9/4")));
        assert!(!Field::Rationals.is_square(&q("2")));
        assert!(!Field::Rationals.is_square(&q("-1")));
    }

    #[test]
    fn json_encoding() {
        assert_eq!(q("6/8").to_json(), Value::String("3/4".into()));
        assert_eq!(q("-4/2").to_json(), Value::String("-2".into()));
        let f = Field::prime(5).unwrap();
        assert_eq!(f.parse_scalar(&serde_json::json!(-1)).unwrap().to_json(), serde_json::json!(4));
        let parsed: Field = serde_json::from_str(r#"{"kind":"GFp","p":101}"#).unwrap();
        assert_eq!(parsed, Field::PrimeField { p: 101 });
        assert!(serde_json::from_str::<Field>(r#"{"kind":"GFp","p":100}"#).is_err());
        assert_eq!(serde_json::to_string(&Field::Rationals).unwrap(), r#"{"kind":"Q"}"#);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rat() -> impl Strategy<Value = Scalar> {
            (-50i64..50, 1i64..20).prop_map(|(n, d)| Scalar::Rational(Rational::from_signeds(n, d)))
        }

        fn res() -> impl Strategy<Value = Scalar> {
            (0u64..101).prop_map(|v| Scalar::Residue { value: v, p: 101 })
        }

        proptest! {
            #[test]
            fn rational_field_axioms(a in rat(), b in rat(), c in rat()) {
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
                if !a.is_zero() {
                    prop_assert!((&a * &a.inv().unwrap()).is_one());
                }
                let round = Field::Rationals.parse_scalar(&a.to_json()).unwrap();
                prop_assert_eq!(round, a);
            }

            #[test]
            fn prime_field_axioms(a in res(), b in res(), c in res()) {
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                prop_assert!((&a + &(-&a)).is_zero());
                if !a.is_zero() {
                    prop_assert!((&a * &a.inv().unwrap()).is_one());
                }
                let f = a.field();
                prop_assert_eq!(f.parse_scalar(&a.to_json()).unwrap(), a);
            }
        }
    }
}
