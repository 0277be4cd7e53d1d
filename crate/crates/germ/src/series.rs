//! The group of truncated formal changes of variable
//! `f(x) = x + a_2 x^2 + ... + a_N x^N`, computed modulo `x^{N+1}`, under
//! composition.
//!
//! The coefficient of `x` is pinned to 1 by the representation (only
//! `a_2..a_N` are stored), so membership in the group "tangent to the
//! identity" is structural rather than checked at runtime. Composition is
//! evaluated by Horner's scheme over truncated polynomial multiplication,
//! O(N^3) field operations; at the precisions this crate cares about
//! (N <= 13 in the prime-field regime, small N over Q) clarity beats any
//! asymptotically faster scheme.

use crate::fields::{Elem, Field, FieldError};
use std::fmt;

/// Errors from series construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    /// Operands live over different coefficient fields.
    #[error("FieldMismatch: series are over different fields")]
    FieldMismatch,
    /// Operands have different truncation orders.
    #[error("PrecisionMismatch: series have precisions {left} and {right}")]
    PrecisionMismatch { left: usize, right: usize },
    /// A coefficient literal failed to parse; `position` is the byte offset
    /// of the offending token in the input text.
    #[error("ParseError: invalid coefficient at byte {position}: {message}")]
    Parse { position: usize, message: String },
    /// An underlying field operation was rejected.
    #[error("{0}")]
    Field(#[from] FieldError),
}

/// The lowest nontrivial term of a series, written `f(x) = x - alpha
/// x^{r+1} + O(x^{r+2})`, or the marker for a series equal to the identity
/// at the working precision. `r` and `alpha` are conjugation invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationData {
    /// Equal to the identity modulo `x^{N+1}`.
    FlatAtPrecision,
    /// `f(x) = x - alpha x^{r+1} + O(x^{r+2})` with `alpha != 0`.
    Leading { r: usize, alpha: Elem },
}

/// A truncated change of variable `x + a_2 x^2 + ... + a_N x^N` (mod
/// `x^{N+1}`). `precision()` is N; the stored coefficients are `a_2..a_N`
/// (none when N = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    field: Field,
    coeffs: Vec<Elem>,
}

impl TruncSeries {
    /// The identity `x` at precision `n >= 1`.
    pub fn identity(field: Field, n: usize) -> TruncSeries {
        assert!(n >= 1, "precision must be at least 1");
        TruncSeries { field, coeffs: vec![field.zero(); n - 1] }
    }

    /// Build from the coefficient list `a_2..a_N` (so N = coeffs.len() + 1).
    /// Every coefficient must belong to `field`.
    pub fn from_coeffs(field: Field, coeffs: Vec<Elem>) -> Result<TruncSeries, SeriesError> {
        if !coeffs.iter().all(|c| field.contains(c)) {
            return Err(SeriesError::FieldMismatch);
        }
        Ok(TruncSeries { field, coeffs })
    }

    /// Convenience constructor from small integers.
    pub fn from_i64_coeffs(field: Field, coeffs: &[i64]) -> TruncSeries {
        TruncSeries { field, coeffs: coeffs.iter().map(|&c| field.from_i64(c)).collect() }
    }

    /// The elementary series `x + c x^s` at the given precision (`2 <= s <=
    /// n`; a zero `c` yields the identity).
    pub fn elementary(field: Field, n: usize, s: usize, c: Elem) -> Result<TruncSeries, SeriesError> {
        assert!((2..=n).contains(&s), "elementary exponent must satisfy 2 <= s <= N");
        if !field.contains(&c) {
            return Err(SeriesError::FieldMismatch);
        }
        let mut coeffs = vec![field.zero(); n - 1];
        coeffs[s - 2] = c;
        Ok(TruncSeries { field, coeffs })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// The truncation order N (arithmetic is modulo `x^{N+1}`).
    pub fn precision(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// The coefficients `a_2..a_N`.
    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// The coefficient `a_j` for `2 <= j <= N`.
    pub fn coeff(&self, j: usize) -> &Elem {
        assert!((2..=self.precision()).contains(&j), "coefficient index out of range");
        &self.coeffs[j - 2]
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check_compatible(&self, other: &TruncSeries) -> Result<(), SeriesError> {
        if self.field != other.field {
            return Err(SeriesError::FieldMismatch);
        }
        if self.precision() != other.precision() {
            return Err(SeriesError::PrecisionMismatch {
                left: self.precision(),
                right: other.precision(),
            });
        }
        Ok(())
    }

    /// Dense degree-indexed form `[0, 1, a_2, ..., a_N]` used by the
    /// arithmetic helpers below.
    fn to_dense(&self) -> Vec<Elem> {
        let mut v = Vec::with_capacity(self.precision() + 1);
        v.push(self.field.zero());
        v.push(self.field.one());
        v.extend(self.coeffs.iter().cloned());
        v
    }

    fn from_dense(field: Field, dense: Vec<Elem>) -> TruncSeries {
        debug_assert!(dense[0].is_zero(), "composite of changes of variable fixes 0");
        debug_assert!(dense[1].is_one(), "composite of changes of variable has derivative 1");
        TruncSeries { field, coeffs: dense.into_iter().skip(2).collect() }
    }

    /// Composition `f(g(x))` modulo `x^{N+1}`.
    ///
    /// Horner over truncated polynomials: with `q(y) = a_2 + a_3 y + ... +
    /// a_N y^{N-2}`, `f(g) = g + g^2 q(g)`.
    pub fn compose(&self, g: &TruncSeries) -> Result<TruncSeries, SeriesError> {
        self.check_compatible(g)?;
        let n = self.precision();
        let field = self.field;
        let gd = g.to_dense();
        if n == 1 {
            return Ok(TruncSeries::identity(field, 1));
        }
        // q(g) by Horner, degrees truncated at N throughout.
        let mut acc = vec![field.zero(); n + 1];
        acc[0] = self.coeffs[n - 2].clone(); // a_N
        for j in (2..n).rev() {
            acc = mul_trunc(&field, &acc, &gd, n);
            acc[0] = add(&field, &acc[0], self.coeff(j));
        }
        // g + g^2 * q(g)
        let g2 = mul_trunc(&field, &gd, &gd, n);
        let mut out = mul_trunc(&field, &acc, &g2, n);
        for (o, gi) in out.iter_mut().zip(gd.iter()) {
            *o = add(&field, o, gi);
        }
        Ok(TruncSeries::from_dense(field, out))
    }

    /// The compositional inverse: the unique `g` with `f(g) = g(f) =
    /// identity` modulo `x^{N+1}`.
    ///
    /// The defining system is triangular with unit diagonal: the degree-d
    /// coefficient of `f(g)` equals `b_d` plus terms involving only
    /// `b_2..b_{d-1}`, so each `b_d` is read off in turn.
    pub fn invert(&self) -> TruncSeries {
        let n = self.precision();
        let field = self.field;
        let mut g = TruncSeries::identity(field, n);
        for d in 2..=n {
            let composed = self.compose(&g).expect("same field and precision by construction");
            let excess = composed.coeff(d);
            if !excess.is_zero() {
                g.coeffs[d - 2] = neg(&field, excess);
            }
        }
        g
    }

    /// Conjugation `g^{-1} . f . g` (a right action: conjugating by `g1`
    /// then `g2` equals conjugating by `g1 . g2`).
    pub fn conjugate(&self, g: &TruncSeries) -> Result<TruncSeries, SeriesError> {
        self.check_compatible(g)?;
        g.invert().compose(&self.compose(g)?)
    }

    /// Valuation data `(r, alpha)` from the lowest nontrivial coefficient:
    /// the smallest `j >= 2` with `a_j != 0` gives `r = j - 1`, `alpha =
    /// -a_j`. The identity yields `FlatAtPrecision`.
    pub fn valuation_data(&self) -> ValuationData {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                return ValuationData::Leading { r: i + 1, alpha: neg(&self.field, c) };
            }
        }
        ValuationData::FlatAtPrecision
    }

    /// k-fold composition `f . f . ... . f` by repeated squaring; `k = 0`
    /// gives the identity.
    pub fn power_compose(&self, mut k: u64) -> TruncSeries {
        let mut acc = TruncSeries::identity(self.field, self.precision());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base).expect("same field and precision by construction");
            }
            base = base.compose(&base).expect("same field and precision by construction");
            k >>= 1;
        }
        acc
    }

    /// The same series truncated to a lower precision `m <= N`.
    pub fn truncated(&self, m: usize) -> Result<TruncSeries, SeriesError> {
        if !(1..=self.precision()).contains(&m) {
            return Err(SeriesError::PrecisionMismatch { left: self.precision(), right: m });
        }
        Ok(TruncSeries { field: self.field, coeffs: self.coeffs[..m - 1].to_vec() })
    }

    /// Parse a comma-separated coefficient list `a_2,...,a_N`; the empty
    /// string is the identity at N = 1. Inverse of [`TruncSeries::format`].
    pub fn parse(text: &str, field: Field) -> Result<TruncSeries, SeriesError> {
        if text.trim().is_empty() {
            return Ok(TruncSeries::identity(field, 1));
        }
        let mut coeffs = Vec::new();
        let mut position = 0usize;
        for token in text.split(',') {
            let elem = field.parse_elem(token).map_err(|e| SeriesError::Parse {
                position: position + (token.len() - token.trim_start().len()),
                message: e.to_string(),
            })?;
            coeffs.push(elem);
            position += token.len() + 1; // +1 for the comma
        }
        Ok(TruncSeries { field, coeffs })
    }

    /// Comma-separated plain coefficient list (`""` for the identity at
    /// N = 1). `parse(format(f)) == f`.
    pub fn format(&self) -> String {
        self.coeffs.iter().map(Elem::render_plain).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for TruncSeries {
    /// Human-readable polynomial form, e.g. `x - 1/6x^3 + 1/120x^5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.render_plain();
            if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {}x^{}", rest, i + 2)?;
            } else {
                write!(f, " + {}x^{}", s, i + 2)?;
            }
        }
        Ok(())
    }
}

fn add(field: &Field, a: &Elem, b: &Elem) -> Elem {
    field.add(a, b).expect("operands constructed in this field")
}

fn neg(field: &Field, a: &Elem) -> Elem {
    field.neg(a).expect("operand constructed in this field")
}

/// Product of two dense degree-indexed polynomials, truncated at degree `n`.
fn mul_trunc(field: &Field, a: &[Elem], b: &[Elem], n: usize) -> Vec<Elem> {
    let mut out = vec![field.zero(); n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            if bj.is_zero() {
                continue;
            }
            let prod = field.mul(ai, bj).expect("operands constructed in this field");
            out[i + j] = add(field, &out[i + j], &prod);
        }
    }
    out
}
