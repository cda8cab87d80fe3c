//! Exact arithmetic in the prime fields GF(p) and in the rationals.
//!
//! Two layers live here. [`FieldSpec`] and [`FieldElem`] are the runtime,
//! self-describing values used at API and serialization boundaries; every
//! operation on them is checked. The [`Field`] trait, implemented by
//! [`PrimeField`] and [`Rationals`], is what the linear-algebra and proof
//! engines are generic over, so the hot loops run on plain `u64` residues
//! or `BigRational`s without per-operation dispatch.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is neither 0 nor a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields ({0} and {1})")]
    MixedFields(FieldSpec, FieldSpec),
}

/// A prime field GF(p) or the rationals (characteristic 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    characteristic: u64,
}

impl FieldSpec {
    pub const RATIONALS: FieldSpec = FieldSpec { characteristic: 0 };

    pub fn new(characteristic: u64) -> Result<Self, FieldError> {
        if characteristic == 0 || is_prime(characteristic) {
            Ok(FieldSpec { characteristic })
        } else {
            Err(FieldError::NotPrime(characteristic))
        }
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(FieldSpec { characteristic: p })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn is_rational(&self) -> bool {
        self.characteristic == 0
    }

    pub fn zero(&self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElem {
        match self.characteristic {
            0 => FieldElem::Rational(BigRational::from_integer(BigInt::from(v))),
            p => FieldElem::Prime { value: PrimeField { p }.from_i64(v), modulus: p },
        }
    }

    /// Exact rational `num/den`; in GF(p) this is `num * den^-1`.
    pub fn ratio(&self, num: i64, den: i64) -> Result<FieldElem, FieldError> {
        self.from_i64(num).div(&self.from_i64(den))
    }
}

impl TryFrom<u64> for FieldSpec {
    type Error = FieldError;
    fn try_from(c: u64) -> Result<Self, FieldError> {
        FieldSpec::new(c)
    }
}

impl From<FieldSpec> for u64 {
    fn from(f: FieldSpec) -> u64 {
        f.characteristic
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.characteristic {
            0 => write!(f, "Q"),
            p => write!(f, "GF({p})"),
        }
    }
}

/// An element of some [`FieldSpec`], always in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Prime { value: u64, modulus: u64 },
    Rational(BigRational),
}

impl FieldElem {
    pub fn field(&self) -> FieldSpec {
        match self {
            FieldElem::Prime { modulus, .. } => FieldSpec { characteristic: *modulus },
            FieldElem::Rational(_) => FieldSpec::RATIONALS,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Prime { value, .. } => *value == 0,
            FieldElem::Rational(q) => q.is_zero(),
        }
    }

    fn same_field(&self, other: &FieldElem) -> Result<(), FieldError> {
        let (a, b) = (self.field(), other.field());
        if a == b {
            Ok(())
        } else {
            Err(FieldError::MixedFields(a, b))
        }
    }

    fn binary(
        &self,
        other: &FieldElem,
        pf: impl Fn(&PrimeField, &u64, &u64) -> u64,
        qf: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<FieldElem, FieldError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElem::Prime { value: a, modulus }, FieldElem::Prime { value: b, .. }) => {
                FieldElem::Prime { value: pf(&PrimeField { p: *modulus }, a, b), modulus: *modulus }
            }
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(qf(a, b)),
            _ => unreachable!("field equality checked above"),
        })
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.binary(other, |f, a, b| f.add(a, b), |a, b| a + b)
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.binary(other, |f, a, b| f.sub(a, b), |a, b| a - b)
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.binary(other, |f, a, b| f.mul(a, b), |a, b| a * b)
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.same_field(other)?;
        if other.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        self.binary(other, |f, a, b| f.mul(a, &f.inv(b)), |a, b| a / b)
    }

    pub fn inv(&self) -> Result<FieldElem, FieldError> {
        self.field().one().div(self)
    }

    pub fn neg(&self) -> FieldElem {
        match self {
            FieldElem::Prime { value, modulus } => {
                FieldElem::Prime { value: PrimeField { p: *modulus }.neg(value), modulus: *modulus }
            }
            FieldElem::Rational(q) => FieldElem::Rational(-q),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Prime { value, .. } => write!(f, "{value}"),
            FieldElem::Rational(q) => write!(f, "{q}"),
        }
    }
}

/// Field operations the exact linear algebra and the proof engines are generic over.
pub trait Field: Clone + Send + Sync + fmt::Debug {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse. Callers guarantee `a != 0`.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn to_elem(&self, a: &Self::Elem) -> FieldElem;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// `acc <- acc - c * x`
    fn sub_mul_assign(&self, acc: &mut Self::Elem, c: &Self::Elem, x: &Self::Elem) {
        *acc = self.sub(acc, &self.mul(c, x));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Caller is responsible for `p` being prime; use [`FieldSpec::prime`] to validate.
    pub fn new(p: u64) -> Self {
        debug_assert!(is_prime(p));
        PrimeField { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn spec(&self) -> FieldSpec {
        FieldSpec { characteristic: self.p }
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.p as i128) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero in GF({})", self.p);
        // Fermat: a^(p-2)
        let mut base = *a;
        let mut exp = self.p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }
    fn to_elem(&self, a: &u64) -> FieldElem {
        FieldElem::Prime { value: *a, modulus: self.p }
    }
    fn is_one(&self, a: &u64) -> bool {
        *a == 1
    }
    #[inline]
    fn sub_mul_assign(&self, acc: &mut u64, c: &u64, x: &u64) {
        let prod = self.mul(c, x);
        *acc = self.sub(acc, &prod);
    }
}

/// The rationals, with exact arbitrary-precision elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::RATIONALS
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero in Q");
        a.recip()
    }
    fn to_elem(&self, a: &BigRational) -> FieldElem {
        FieldElem::Rational(a.clone())
    }
    fn is_one(&self, a: &BigRational) -> bool {
        a.is_one()
    }
    fn sub_mul_assign(&self, acc: &mut BigRational, c: &BigRational, x: &BigRational) {
        if c.is_integer() && x.is_integer() && acc.is_integer() {
            let v = acc.numer() - c.numer() * x.numer();
            *acc = BigRational::from_integer(v);
        } else {
            *acc -= c * x;
        }
    }
}

/// Dynamically dispatched arithmetic on [`FieldElem`]s of this field.
/// Slower than the concrete fields; used where the field is only known at
/// run time and speed does not matter.
impl Field for FieldSpec {
    type Elem = FieldElem;

    fn spec(&self) -> FieldSpec {
        *self
    }
    fn zero(&self) -> FieldElem {
        FieldSpec::zero(self)
    }
    fn one(&self) -> FieldElem {
        FieldSpec::one(self)
    }
    fn from_i64(&self, v: i64) -> FieldElem {
        FieldSpec::from_i64(self, v)
    }
    fn is_zero(&self, a: &FieldElem) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.add(b).expect("elements of one field")
    }
    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.sub(b).expect("elements of one field")
    }
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        a.mul(b).expect("elements of one field")
    }
    fn neg(&self, a: &FieldElem) -> FieldElem {
        a.neg()
    }
    fn inv(&self, a: &FieldElem) -> FieldElem {
        a.inv().expect("inverse of a nonzero element")
    }
    fn to_elem(&self, a: &FieldElem) -> FieldElem {
        a.clone()
    }
}

/// Runs `$body` with `$f` bound to the concrete field selected by a [`FieldSpec`].
///
/// ```
/// use algiso::field::{Field, FieldSpec};
/// let spec = FieldSpec::new(5).unwrap();
/// let two_inv = algiso::with_field!(spec, f => f.to_elem(&f.inv(&f.from_i64(2))));
/// assert_eq!(two_inv, spec.from_i64(3));
/// ```
#[macro_export]
macro_rules! with_field {
    ($spec:expr, $f:ident => $body:expr) => {{
        let spec: $crate::field::FieldSpec = $spec;
        if spec.is_rational() {
            let $f = $crate::field::Rationals;
            $body
        } else {
            let $f = $crate::field::PrimeField::new(spec.characteristic());
            $body
        }
    }};
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn gf3_addition_wraps() {
        let f = gf(3);
        assert_eq!(f.from_i64(2).add(&f.from_i64(2)).unwrap(), f.from_i64(1));
    }

    #[test]
    fn gf5_inverse_of_two() {
        let f = gf(5);
        assert_eq!(f.from_i64(2).inv().unwrap(), f.from_i64(3));
    }

    #[test]
    fn rational_sum_is_reduced() {
        let q = FieldSpec::RATIONALS;
        let sum = q.ratio(1, 3).unwrap().add(&q.ratio(1, 6).unwrap()).unwrap();
        assert_eq!(sum, q.ratio(1, 2).unwrap());
        let q2 = q.ratio(2, -4).unwrap();
        match q2 {
            FieldElem::Rational(r) => {
                assert_eq!(*r.numer(), BigInt::from(-1));
                assert_eq!(*r.denom(), BigInt::from(2));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let f = gf(7);
        assert_eq!(f.one().div(&f.zero()), Err(FieldError::DivisionByZero));
        let q = FieldSpec::RATIONALS;
        assert_eq!(q.one().div(&q.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = gf(2).one();
        let b = gf(3).one();
        assert!(matches!(a.add(&b), Err(FieldError::MixedFields(_, _))));
        assert!(matches!(a.mul(&FieldSpec::RATIONALS.one()), Err(FieldError::MixedFields(_, _))));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert_eq!(FieldSpec::new(4), Err(FieldError::NotPrime(4)));
        assert_eq!(FieldSpec::new(1), Err(FieldError::NotPrime(1)));
        assert!(FieldSpec::new(0).unwrap().is_rational());
        assert!(FieldSpec::new(2_305_843_009_213_693_951).is_ok());
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..2000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "n = {n}");
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_primes() {
        for p in [2u64, 3, 5] {
            let f = PrimeField::new(p);
            for a in 0..p {
                for b in 0..p {
                    assert_eq!(f.add(&a, &b), f.add(&b, &a));
                    assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
                    assert_eq!(f.sub(&f.add(&a, &b), &b), a);
                    for c in 0..p {
                        assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
                        assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                        assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                    }
                }
                if a != 0 {
                    assert_eq!(f.mul(&a, &f.inv(&a)), 1);
                }
            }
        }
    }

    #[test]
    fn serde_as_integer() {
        let f = gf(3);
        assert_eq!(serde_json::to_string(&f).unwrap(), "3");
        let back: FieldSpec = serde_json::from_str("0").unwrap();
        assert!(back.is_rational());
        assert!(serde_json::from_str::<FieldSpec>("6").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rational_roundtrip(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
                let q = FieldSpec::RATIONALS;
                let x = q.ratio(a, b).unwrap();
                let y = q.ratio(c, d).unwrap();
                prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x);
            }

            #[test]
            fn random_triples_gf_p(p in prop::sample::select(vec![2u64, 3, 5, 7, 101]), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
                let f = FieldSpec::prime(p).unwrap();
                let (a, b, c) = (f.from_i64(a as i64), f.from_i64(b as i64), f.from_i64(c as i64));
                let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
                let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
                if !a.is_zero() {
                    prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
                }
            }
        }
    }
}
