//! Constructive Takens/Venkov normal forms: every non-flat truncated change
//! of variable is conjugate to `f_{r,alpha,beta}(x) = x - alpha x^{r+1} +
//! beta x^{2r+1}`, and the reduction below produces the conjugator
//! explicitly as a product of elementary changes `x + c x^s`.
//!
//! Over a field of characteristic 0 the triple `(r, alpha, beta)` is a
//! complete conjugacy invariant. Over F_p the construction is guaranteed for
//! truncation orders N <= p+2; in that regime `(r, alpha)` is always
//! invariant and `beta` matters exactly when `2r+1 <= N` (equivalently
//! `r <= (p+1)/2` at N = p+2). Higher precisions over F_p are refused: the
//! elimination divisor `r+1-s` can vanish mod p there, and no normal form is
//! claimed.

use crate::fields::Elem;
use crate::series::{SeriesError, TruncSeries, ValuationData};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Errors from normal-form computation and the asymptotic predictor.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalFormError {
    /// Over F_p only truncation orders N <= p+2 are supported.
    #[error("UnsupportedPrecision: normal forms over F_{p} require precision <= {}, got {precision}", p + 2)]
    UnsupportedPrecision { p: u64, precision: usize },
    /// The decreasing-orbit asymptotics require alpha > 0.
    #[error("NegativeAlpha: asymptotic predictions require alpha > 0")]
    NegativeAlpha,
    /// Asymptotic predictions are only defined over the rationals.
    #[error("NotRationalField: asymptotic predictions require rational coefficients")]
    NotRationalField,
    /// An underlying series operation was rejected.
    #[error("{0}")]
    Series(#[from] SeriesError),
}

/// The normal form of a non-flat series: invariants, an explicit conjugator
/// witness, and the normalized series itself.
///
/// `conjugate(f, conjugator) == normalized` holds by construction and is
/// asserted before this value is returned. `beta_significant` is true iff
/// `2r+1 <= N`; when false, `beta` is 0 by convention (the distinction keeps
/// conjugacy decisions honest when the `beta` slot is truncated away).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub r: usize,
    pub alpha: Elem,
    pub beta: Elem,
    pub beta_significant: bool,
    pub conjugator: TruncSeries,
    pub normalized: TruncSeries,
}

/// Reduce `f` to its normal form, or `None` when `f` is the identity at its
/// precision (flat elements have no valuation to normalize around).
///
/// The loop walks `s = 2, 3, ..., N-r`, skipping `s = r+1`: at step `s` the
/// current coefficient `b` of degree `r+s` is killed by conjugating with
/// `g_s(x) = x + c x^s`, `c = b / (alpha (r+1-s))`. Each step leaves degrees
/// below `r+s` untouched, which is asserted after every iteration rather
/// than trusted. The skipped slot `s = r+1` is degree `2r+1`: its
/// coefficient survives as `beta`.
pub fn takens_normal_form(f: &TruncSeries) -> Result<Option<NormalForm>, NormalFormError> {
    let field = f.field();
    let n = f.precision();
    if let Some(p) = field.modulus() {
        if n > (p + 2) as usize {
            return Err(NormalFormError::UnsupportedPrecision { p, precision: n });
        }
    }

    let (r, alpha) = match f.valuation_data() {
        ValuationData::FlatAtPrecision => return Ok(None),
        ValuationData::Leading { r, alpha } => (r, alpha),
    };

    let mut work = f.clone();
    let mut conjugator = TruncSeries::identity(field, n);
    for s in 2..=n.saturating_sub(r) {
        if s == r + 1 {
            continue; // degree 2r+1: the beta slot survives
        }
        let b = work.coeff(r + s).clone();
        if !b.is_zero() {
            // c = b / (alpha * (r+1-s)); the divisor is nonzero here even in
            // characteristic p, because a nonempty loop forces r <= N-2 and
            // hence |r+1-s| <= p-1.
            let divisor = field
                .mul(&alpha, &field.from_i64(r as i64 + 1 - s as i64))
                .expect("alpha and small integers live in this field");
            assert!(!divisor.is_zero(), "elimination divisor vanished; outside guaranteed regime");
            let c = field.div(&b, &divisor).expect("divisor checked nonzero");
            let g_s = TruncSeries::elementary(field, n, s, c)?;
            work = work.conjugate(&g_s)?;
            conjugator = conjugator.compose(&g_s)?;
        }
        // Elimination locality: after step s, every degree in r+2..=r+s is
        // clear except the beta slot 2r+1.
        for d in r + 2..=r + s {
            if d != 2 * r + 1 {
                assert!(
                    work.coeff(d).is_zero(),
                    "elimination step s={s} disturbed degree {d}"
                );
            }
        }
    }

    let beta_significant = 2 * r < n;
    let beta = if beta_significant { work.coeff(2 * r + 1).clone() } else { field.zero() };

    // The result must be exactly x - alpha x^{r+1} (+ beta x^{2r+1}).
    let mut expected = TruncSeries::elementary(field, n, r + 1, field.neg(&alpha).unwrap())?;
    if beta_significant && !beta.is_zero() {
        let beta_term = TruncSeries::elementary(field, n, 2 * r + 1, beta.clone())?;
        // Adding one disjoint monomial: compose is not addition, so patch
        // coefficients directly through the constructor.
        let mut coeffs = expected.coeffs().to_vec();
        coeffs[2 * r - 1] = beta_term.coeff(2 * r + 1).clone();
        expected = TruncSeries::from_coeffs(field, coeffs)?;
    }
    assert_eq!(work, expected, "normalization left a stray coefficient");
    assert_eq!(
        f.conjugate(&conjugator)?,
        work,
        "conjugator does not witness the normal form"
    );

    Ok(Some(NormalForm {
        r,
        alpha,
        beta,
        beta_significant,
        conjugator,
        normalized: work,
    }))
}

/// Decide conjugacy. Returns `Some(w)` with a verified witness satisfying
/// `conjugate(f1, w) == f2`, or `None` when the invariants differ.
///
/// The test compares flatness, `r`, `alpha`, and — exactly when the degree
/// `2r+1` survives the truncation — `beta`. Over F_p at N = p+2 this is the
/// regime where `beta` is irrelevant for `r > (p+1)/2`; over Q it encodes
/// that a truncated-away `beta` cannot separate classes at this precision.
pub fn is_conjugate(
    f1: &TruncSeries,
    f2: &TruncSeries,
) -> Result<Option<TruncSeries>, NormalFormError> {
    if f1.field() != f2.field() {
        return Err(SeriesError::FieldMismatch.into());
    }
    if f1.precision() != f2.precision() {
        return Err(SeriesError::PrecisionMismatch {
            left: f1.precision(),
            right: f2.precision(),
        }
        .into());
    }
    let nf1 = takens_normal_form(f1)?;
    let nf2 = takens_normal_form(f2)?;
    let (nf1, nf2) = match (nf1, nf2) {
        (None, None) => {
            return Ok(Some(TruncSeries::identity(f1.field(), f1.precision())));
        }
        (None, Some(_)) | (Some(_), None) => return Ok(None),
        (Some(a), Some(b)) => (a, b),
    };
    let same = nf1.r == nf2.r
        && nf1.alpha == nf2.alpha
        && (!nf1.beta_significant || nf1.beta == nf2.beta);
    if !same {
        return Ok(None);
    }
    // conj(f1, c1) = normalized = conj(f2, c2), so w = c1 . c2^{-1} carries
    // f1 to f2.
    let witness = nf1.conjugator.compose(&nf2.conjugator.invert())?;
    assert_eq!(
        f1.conjugate(&witness)?,
        *f2,
        "conjugacy witness failed verification"
    );
    Ok(Some(witness))
}

/// Predicted asymptotics of the decreasing orbit `x_{n+1} = f(x_n)` for a
/// rational normal form with `alpha > 0`:
///
/// `x_n = C n^{-b} (1 + gamma ln(n)/n + O(1/n))` with `b = 1/r`,
/// `C = (alpha r)^{-1/r}` and `gamma = (beta/alpha^2 - (r+1)/2) / r^2`.
///
/// `C` is carried exactly as the pair `(c_base, c_root)` meaning
/// `c_base^{-1/c_root}`, plus the floating approximation `c_approx` used by
/// the numeric fitting code. `gamma` is `None` when the `beta` slot was
/// truncated away (no second-order prediction is available then).
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPrediction {
    pub b: BigRational,
    pub c_base: BigRational,
    pub c_root: u32,
    pub c_approx: f64,
    pub gamma: Option<BigRational>,
}

impl AsymptoticPrediction {
    pub fn b_f64(&self) -> f64 {
        self.b.to_f64().expect("1/r is finite")
    }

    pub fn gamma_f64(&self) -> Option<f64> {
        self.gamma.as_ref().map(|g| g.to_f64().expect("gamma is finite"))
    }
}

/// Evaluate the prediction for a normal form over Q with `alpha > 0`.
pub fn predicted_asymptotics(
    nf: &NormalForm,
) -> Result<AsymptoticPrediction, NormalFormError> {
    let alpha = match nf.alpha.as_rational() {
        Some(a) => a.clone(),
        None => return Err(NormalFormError::NotRationalField),
    };
    if !nf.alpha.is_positive_rational() {
        return Err(NormalFormError::NegativeAlpha);
    }
    let beta = nf.beta.as_rational().expect("field checked rational").clone();
    let r = nf.r;
    let rq = BigRational::from_integer(BigInt::from(r));

    let b = rq.recip();
    let c_base = &alpha * &rq;
    let c_approx = c_base.to_f64().expect("alpha r is finite").powf(-1.0 / r as f64);
    let gamma = nf.beta_significant.then(|| {
        let half_r1 = BigRational::new(BigInt::from(r as i64 + 1), BigInt::from(2));
        (beta / (&alpha * &alpha) - half_r1) / (&rq * &rq)
    });

    Ok(AsymptoticPrediction { b, c_base, c_root: r as u32, c_approx, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Field;

    fn q() -> Field {
        Field::rationals()
    }

    fn rat(s: &str) -> Elem {
        q().parse_elem(s).unwrap()
    }

    #[test]
    fn sin_truncation_n7() {
        let f = TruncSeries::parse("0,-1/6,0,1/120,0,-1/5040", q()).unwrap();
        let nf = takens_normal_form(&f).unwrap().unwrap();
        assert_eq!(nf.r, 2);
        assert_eq!(nf.alpha, rat("1/6"));
        assert_eq!(nf.beta, rat("1/120"));
        assert!(nf.beta_significant);
        assert_eq!(f.conjugate(&nf.conjugator).unwrap(), nf.normalized);
    }

    #[test]
    fn cube_term_exercise() {
        let f = TruncSeries::from_i64_coeffs(q(), &[0, -1, 1, 0]); // x - x^3 + x^4
        let nf = takens_normal_form(&f).unwrap().unwrap();
        assert_eq!((nf.r, &nf.alpha, &nf.beta), (2, &rat("1"), &rat("1")));
        assert_eq!(nf.conjugator, TruncSeries::from_i64_coeffs(q(), &[1, 0, 0, 0])); // x + x^2
        assert_eq!(nf.normalized, TruncSeries::from_i64_coeffs(q(), &[0, -1, 0, 1])); // x - x^3 + x^5
    }

    #[test]
    fn already_normal_is_fixed() {
        for n in 3..8 {
            let mut coeffs = vec![0i64; n - 1];
            coeffs[0] = -1; // x - x^2
            let f = TruncSeries::from_i64_coeffs(q(), &coeffs);
            let nf = takens_normal_form(&f).unwrap().unwrap();
            assert_eq!((nf.r, &nf.alpha, &nf.beta), (1, &rat("1"), &rat("0")));
            assert!(nf.conjugator.is_identity(), "N = {n}");
            assert_eq!(nf.normalized, f);
        }
    }

    #[test]
    fn identity_is_flat() {
        assert!(takens_normal_form(&TruncSeries::identity(q(), 6)).unwrap().is_none());
    }

    #[test]
    fn idempotent_on_normalized() {
        let f = TruncSeries::from_i64_coeffs(q(), &[7, -3, 2, 0, 5, 1, -4, 0, 2, 6, -1]);
        let nf = takens_normal_form(&f).unwrap().unwrap();
        let again = takens_normal_form(&nf.normalized).unwrap().unwrap();
        assert_eq!((again.r, &again.alpha, &again.beta), (nf.r, &nf.alpha, &nf.beta));
        assert!(again.conjugator.is_identity());
    }

    #[test]
    fn beta_insignificant_when_truncated() {
        let f = TruncSeries::from_i64_coeffs(q(), &[0, 0, 0, -2]); // x - 2x^5, N = 5
        let nf = takens_normal_form(&f).unwrap().unwrap();
        assert_eq!(nf.r, 4);
        assert!(!nf.beta_significant);
        assert!(nf.beta.is_zero());
    }

    #[test]
    fn char_p_precision_guard() {
        let f5 = Field::prime_field(5).unwrap();
        let f = TruncSeries::from_i64_coeffs(f5, &[1; 8]); // N = 9 > 7 = p + 2
        assert_eq!(
            takens_normal_form(&f),
            Err(NormalFormError::UnsupportedPrecision { p: 5, precision: 9 })
        );
        let ok = TruncSeries::from_i64_coeffs(f5, &[1; 6]); // N = 7
        assert!(takens_normal_form(&ok).is_ok());
    }

    #[test]
    fn conjugates_with_witness() {
        let f1 = TruncSeries::from_i64_coeffs(q(), &[0, -1, 1, 0]); // x - x^3 + x^4
        let f2 = TruncSeries::from_i64_coeffs(q(), &[0, -1, 0, 1]); // x - x^3 + x^5
        let w = is_conjugate(&f1, &f2).unwrap().expect("same invariants (2, 1, 1)");
        assert_eq!(f1.conjugate(&w).unwrap(), f2);
    }

    #[test]
    fn alpha_separates_classes() {
        let f1 = TruncSeries::from_i64_coeffs(q(), &[-1, 0, 0]);
        let f2 = TruncSeries::from_i64_coeffs(q(), &[-2, 0, 0]);
        assert!(is_conjugate(&f1, &f2).unwrap().is_none());
    }

    #[test]
    fn beta_irrelevant_for_large_r_mod_two() {
        let f2f = Field::prime_field(2).unwrap();
        let a = TruncSeries::from_i64_coeffs(f2f, &[0, 1, 0]); // x + x^3
        let b = TruncSeries::from_i64_coeffs(f2f, &[0, 1, 1]); // x + x^3 + x^4
        let w = is_conjugate(&a, &b).unwrap().expect("r = 2 > (p+1)/2, beta ignored");
        assert_eq!(a.conjugate(&w).unwrap(), b);
        // With r = 1 the beta slot is live and separates classes.
        let c = TruncSeries::from_i64_coeffs(f2f, &[1, 0, 0]); // x + x^2
        let d = TruncSeries::from_i64_coeffs(f2f, &[1, 1, 0]); // x + x^2 + x^3
        assert!(is_conjugate(&c, &d).unwrap().is_none());
    }

    #[test]
    fn flat_only_conjugate_to_flat() {
        let id = TruncSeries::identity(q(), 4);
        let f = TruncSeries::from_i64_coeffs(q(), &[1, 0, 0]);
        assert!(is_conjugate(&id, &f).unwrap().is_none());
        let w = is_conjugate(&id, &id).unwrap().unwrap();
        assert!(w.is_identity());
    }

    #[test]
    fn prediction_for_sin() {
        let f = TruncSeries::parse("0,-1/6,0,1/120,0,-1/5040", q()).unwrap();
        let nf = takens_normal_form(&f).unwrap().unwrap();
        let pred = predicted_asymptotics(&nf).unwrap();
        assert_eq!(pred.b, BigRational::new(1.into(), 2.into()));
        assert_eq!(pred.c_base, BigRational::new(1.into(), 3.into()));
        assert_eq!(pred.c_root, 2);
        assert!((pred.c_approx - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(pred.gamma.unwrap(), BigRational::new((-3).into(), 10.into()));
    }

    #[test]
    fn prediction_for_cube_exercise_and_basic_form() {
        let f = TruncSeries::from_i64_coeffs(q(), &[0, -1, 1, 0]);
        let nf = takens_normal_form(&f).unwrap().unwrap();
        let pred = predicted_asymptotics(&nf).unwrap();
        assert!((pred.c_approx - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(pred.gamma.unwrap(), BigRational::new((-1).into(), 8.into()));

        let g = TruncSeries::from_i64_coeffs(q(), &[-1, 0]); // x - x^2
        let nfg = takens_normal_form(&g).unwrap().unwrap();
        let predg = predicted_asymptotics(&nfg).unwrap();
        assert_eq!(predg.b, BigRational::from_integer(1.into()));
        assert_eq!(predg.c_approx, 1.0);
        assert_eq!(predg.gamma.unwrap(), BigRational::from_integer((-1).into()));
    }

    #[test]
    fn prediction_rejects_wrong_domain() {
        let f = TruncSeries::from_i64_coeffs(q(), &[1, 0]); // x + x^2: alpha = -1
        let nf = takens_normal_form(&f).unwrap().unwrap();
        assert_eq!(predicted_asymptotics(&nf), Err(NormalFormError::NegativeAlpha));

        let f3 = Field::prime_field(3).unwrap();
        let g = TruncSeries::from_i64_coeffs(f3, &[1, 0, 0]);
        let nfg = takens_normal_form(&g).unwrap().unwrap();
        assert_eq!(predicted_asymptotics(&nfg), Err(NormalFormError::NotRationalField));
    }

    #[test]
    fn gamma_unavailable_when_beta_truncated() {
        let f = TruncSeries::from_i64_coeffs(q(), &[0, 0, 0, -1]); // x - x^5, N = 5, r = 4
        let nf = takens_normal_form(&f).unwrap().unwrap();
        let pred = predicted_asymptotics(&nf).unwrap();
        assert_eq!(pred.gamma, None);
        assert_eq!(pred.b, BigRational::new(1.into(), 4.into()));
    }
}
