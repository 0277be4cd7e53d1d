//! Exact coefficient arithmetic over the two fields the crate needs:
//! arbitrary-precision rationals (characteristic 0) and prime fields F_p
//! (characteristic p), behind a single descriptor type.
//!
//! Values are immutable and kept in canonical form: rationals as reduced
//! fractions with positive denominator, prime-field elements as least
//! residues. All operations are pure, so everything here is thread-safe.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Largest accepted prime modulus. Coefficient fields beyond this are
/// useless to the rest of the crate (truncation orders stay tiny), and the
/// bound keeps the primality check and residue arithmetic trivially exact
/// in 64 bits.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Errors from field construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    /// Division by zero, including `inv(0)`.
    #[error("DivisionByZero: inverse or division by zero")]
    DivisionByZero,
    /// Operands belong to different fields.
    #[error("FieldMismatch: operands belong to different fields")]
    FieldMismatch,
    /// Requested modulus fails the deterministic primality test.
    #[error("NotPrime: {0} is not prime")]
    NotPrime(u64),
    /// Requested modulus is at or above [`MAX_MODULUS`].
    #[error("ModulusTooLarge: {0} >= 2^31")]
    ModulusTooLarge(u64),
    /// A field-element literal failed to parse.
    #[error("InvalidLiteral: cannot parse {0:?} as a field element")]
    InvalidLiteral(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum FieldKind {
    Rationals,
    Prime(u64),
}

/// A field descriptor: either the rationals or F_p for a validated prime p.
///
/// Two descriptors are equal iff they denote the same field. The descriptor
/// owns element construction, so every `Elem` starts out canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    kind: FieldKind,
}

/// An element of a [`Field`].
///
/// Invariants (maintained by every constructor and operation): rationals are
/// reduced with positive denominator; prime-field residues lie in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    Rational(BigRational),
    Prime { residue: u64, modulus: u64 },
}

/// Deterministic primality test by trial division; exact for all `n < 2^31`.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    if n.is_multiple_of(3) {
        return n == 3;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

impl Field {
    /// The field of rational numbers.
    pub fn rationals() -> Field {
        Field { kind: FieldKind::Rationals }
    }

    /// The prime field F_p. Rejects composite moduli and moduli >= 2^31.
    pub fn prime_field(p: u64) -> Result<Field, FieldError> {
        if p >= MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field { kind: FieldKind::Prime(p) })
    }

    /// The characteristic: 0 for the rationals, p for F_p.
    pub fn characteristic(&self) -> u64 {
        match self.kind {
            FieldKind::Rationals => 0,
            FieldKind::Prime(p) => p,
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self.kind, FieldKind::Rationals)
    }

    /// The modulus when this is a prime field.
    pub fn modulus(&self) -> Option<u64> {
        match self.kind {
            FieldKind::Rationals => None,
            FieldKind::Prime(p) => Some(p),
        }
    }

    pub fn zero(&self) -> Elem {
        self.from_i64(0)
    }

    pub fn one(&self) -> Elem {
        self.from_i64(1)
    }

    /// Embed a signed integer (reduced mod p over F_p).
    pub fn from_i64(&self, n: i64) -> Elem {
        match self.kind {
            FieldKind::Rationals => Elem::Rational(BigRational::from_integer(BigInt::from(n))),
            FieldKind::Prime(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Elem::Prime { residue: r, modulus: p }
            }
        }
    }

    /// True when `a` is an element of this field (right variant, right
    /// modulus, canonical residue).
    pub fn contains(&self, a: &Elem) -> bool {
        match (self.kind, a) {
            (FieldKind::Rationals, Elem::Rational(_)) => true,
            (FieldKind::Prime(p), Elem::Prime { residue, modulus }) => {
                *modulus == p && *residue < p
            }
            _ => false,
        }
    }

    fn check2(&self, a: &Elem, b: &Elem) -> Result<(), FieldError> {
        if self.contains(a) && self.contains(b) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn check1(&self, a: &Elem) -> Result<(), FieldError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Result<Elem, FieldError> {
        self.check2(a, b)?;
        Ok(add_raw(a, b))
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem, FieldError> {
        self.check2(a, b)?;
        Ok(sub_raw(a, b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem, FieldError> {
        self.check2(a, b)?;
        Ok(mul_raw(a, b))
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem, FieldError> {
        self.check2(a, b)?;
        if b.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(mul_raw(a, &inv_raw(b)))
    }

    pub fn neg(&self, a: &Elem) -> Result<Elem, FieldError> {
        self.check1(a)?;
        Ok(neg_raw(a))
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, FieldError> {
        self.check1(a)?;
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(inv_raw(a))
    }

    /// Parse one element literal. Rationals accept `"n"` or `"n/d"` with an
    /// optional leading minus; prime fields accept a plain (optionally
    /// signed) integer, reduced mod p.
    pub fn parse_elem(&self, text: &str) -> Result<Elem, FieldError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(FieldError::InvalidLiteral(text.to_string()));
        }
        match self.kind {
            FieldKind::Rationals => {
                let (ns, ds) = match t.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (t, "1"),
                };
                let n: BigInt =
                    ns.parse().map_err(|_| FieldError::InvalidLiteral(text.to_string()))?;
                let d: BigInt =
                    ds.parse().map_err(|_| FieldError::InvalidLiteral(text.to_string()))?;
                if d.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Ok(Elem::Rational(BigRational::new(n, d)))
            }
            FieldKind::Prime(p) => {
                let n: i128 =
                    t.parse().map_err(|_| FieldError::InvalidLiteral(text.to_string()))?;
                let r = n.rem_euclid(p as i128) as u64;
                Ok(Elem::Prime { residue: r, modulus: p })
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Rationals => write!(f, "Q"),
            FieldKind::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

// Raw operations assume both operands are canonical members of one field;
// the public methods validate that first.

fn add_raw(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x + y),
        (Elem::Prime { residue: x, modulus: p }, Elem::Prime { residue: y, .. }) => {
            Elem::Prime { residue: (x + y) % p, modulus: *p }
        }
        _ => unreachable!("operands validated to share a field"),
    }
}

fn sub_raw(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x - y),
        (Elem::Prime { residue: x, modulus: p }, Elem::Prime { residue: y, .. }) => {
            Elem::Prime { residue: (x + p - y) % p, modulus: *p }
        }
        _ => unreachable!("operands validated to share a field"),
    }
}

fn mul_raw(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x * y),
        // p < 2^31, so the product of two residues fits in u64.
        (Elem::Prime { residue: x, modulus: p }, Elem::Prime { residue: y, .. }) => {
            Elem::Prime { residue: x * y % p, modulus: *p }
        }
        _ => unreachable!("operands validated to share a field"),
    }
}

fn neg_raw(a: &Elem) -> Elem {
    match a {
        Elem::Rational(x) => Elem::Rational(-x),
        Elem::Prime { residue, modulus: p } => {
            Elem::Prime { residue: (p - residue) % p, modulus: *p }
        }
    }
}

fn inv_raw(a: &Elem) -> Elem {
    match a {
        Elem::Rational(x) => Elem::Rational(x.recip()),
        Elem::Prime { residue, modulus: p } => {
            Elem::Prime { residue: mod_inverse(*residue, *p), modulus: *p }
        }
    }
}

/// Modular inverse by the extended Euclidean algorithm. `a` must be a
/// nonzero residue mod the prime `p`.
fn mod_inverse(a: u64, p: u64) -> u64 {
    debug_assert!(a != 0 && a < p);
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "gcd(a, p) must be 1 for prime p");
    t0.rem_euclid(p as i128) as u64
}

impl Elem {
    pub fn is_zero(&self) -> bool {
        match self {
            Elem::Rational(x) => x.is_zero(),
            Elem::Prime { residue, .. } => *residue == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Elem::Rational(x) => x.is_one(),
            Elem::Prime { residue, modulus } => *residue == 1 % *modulus,
        }
    }

    /// The underlying rational, when this is a rational element.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Elem::Rational(x) => Some(x),
            Elem::Prime { .. } => None,
        }
    }

    /// The underlying residue, when this is a prime-field element.
    pub fn as_residue(&self) -> Option<u64> {
        match self {
            Elem::Rational(_) => None,
            Elem::Prime { residue, .. } => Some(*residue),
        }
    }

    /// True for rational elements with value > 0. Prime fields are unordered,
    /// so this is false for them.
    pub fn is_positive_rational(&self) -> bool {
        match self {
            Elem::Rational(x) => x.is_positive(),
            Elem::Prime { .. } => false,
        }
    }

    /// Plain text form used inside coefficient lists: `n` or `n/d` for
    /// rationals, the bare residue for prime fields. Round-trips through
    /// [`Field::parse_elem`].
    pub fn render_plain(&self) -> String {
        match self {
            Elem::Rational(x) => {
                if x.denom().is_one() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            Elem::Prime { residue, .. } => residue.to_string(),
        }
    }

    /// Exponentiation by repeated squaring (used by tests to cross-check
    /// `inv(a) = a^(p-2)` in F_p).
    pub fn pow(&self, mut k: u64) -> Elem {
        let mut base = self.clone();
        let mut acc = match self {
            Elem::Rational(_) => Elem::Rational(BigRational::one()),
            Elem::Prime { modulus, .. } => Elem::Prime { residue: 1 % *modulus, modulus: *modulus },
        };
        while k > 0 {
            if k & 1 == 1 {
                acc = mul_raw(&acc, &base);
            }
            base = mul_raw(&base, &base);
            k >>= 1;
        }
        acc
    }
}

impl fmt::Display for Elem {
    /// Standalone rendering: `n/d` (or `n`) for rationals, `t mod p` for
    /// prime-field elements.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Rational(_) => write!(f, "{}", self.render_plain()),
            Elem::Prime { residue, modulus } => write!(f, "{residue} mod {modulus}"),
        }
    }
}
