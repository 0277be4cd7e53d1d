//! The finite group Γ_p of truncated changes of variable over F_p at
//! precision p+2 (a quotient of the Nottingham group of order p^{p+1}):
//! element arithmetic, an exhaustive conjugacy-class census, the comparison
//! of that census against the normal-form class list, the "few conjugacy
//! classes" witness q(N), and the Landau/Egyptian-fraction enumeration that
//! bounds group order by class count.
//!
//! Class counts here grow like p^2 while the group order is p^{p+1}: these
//! groups have remarkably few classes for their size, which is exactly what
//! the q(N) witness exploits.

mod census;

use crate::fields::{Field, FieldError};
use crate::normal_form::{takens_normal_form, NormalFormError};
use crate::series::{SeriesError, TruncSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Errors from the p-group operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PGroupError {
    /// Operands belong to groups with different primes.
    #[error("PrimeMismatch: elements belong to different groups")]
    PrimeMismatch,
    /// The census supports p in {2, 3, 5} unconditionally and p = 7 behind
    /// the explicit large-run opt-in (5.76M elements).
    #[error("UnsupportedPrime: census not available for p = {0} (supported: 2, 3, 5; 7 with the large-run opt-in)")]
    UnsupportedPrime(u64),
    /// Landau enumeration is exhaustive and limited to k <= 6 parts.
    #[error("LandauTooLarge: enumeration supports k <= 6, got {0}")]
    LandauTooLarge(u32),
    #[error("{0}")]
    Field(#[from] FieldError),
    #[error("{0}")]
    Series(#[from] SeriesError),
    #[error("{0}")]
    NormalForm(#[from] NormalFormError),
}

/// An element of Γ_p: `x + a_2 x^2 + ... + a_{p+2} x^{p+2}` with
/// coefficients in F_p, indexed canonically by the mixed-radix integer
/// `sum a_j p^{j-2}` (the identity is index 0).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PElement {
    p: u64,
    coeffs: Vec<u64>, // a_2..a_{p+2}, each in [0, p)
}

impl PElement {
    /// Build from coefficients `a_2..a_{p+2}` (exactly p+1 of them, each
    /// reduced mod p). `p` must be prime.
    pub fn new(p: u64, coeffs: Vec<u64>) -> Result<PElement, PGroupError> {
        Field::prime_field(p)?;
        if coeffs.len() != (p + 1) as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(PGroupError::PrimeMismatch);
        }
        Ok(PElement { p, coeffs })
    }

    pub fn identity(p: u64) -> Result<PElement, PGroupError> {
        PElement::new(p, vec![0; (p + 1) as usize])
    }

    /// Decode a canonical index in `[0, p^{p+1})`.
    pub fn from_index(p: u64, mut index: u64) -> Result<PElement, PGroupError> {
        Field::prime_field(p)?;
        let mut coeffs = vec![0u64; (p + 1) as usize];
        for c in coeffs.iter_mut() {
            *c = index % p;
            index /= p;
        }
        if index != 0 {
            return Err(PGroupError::PrimeMismatch);
        }
        Ok(PElement { p, coeffs })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Coefficients `a_2..a_{p+2}`.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// The canonical mixed-radix index; round-trips with `from_index`.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for &c in self.coeffs.iter().rev() {
            idx = idx * self.p + c;
        }
        idx
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// View as a truncated series over F_p at precision p+2.
    pub fn to_series(&self) -> TruncSeries {
        let field = Field::prime_field(self.p).expect("validated at construction");
        let coeffs = self.coeffs.iter().map(|&c| field.from_i64(c as i64)).collect();
        TruncSeries::from_coeffs(field, coeffs).expect("residues are field members")
    }

    /// Inverse view of [`PElement::to_series`]; the series must be over F_p
    /// at precision exactly p+2.
    pub fn from_series(s: &TruncSeries) -> Result<PElement, PGroupError> {
        let p = match s.field().modulus() {
            Some(p) => p,
            None => return Err(PGroupError::PrimeMismatch),
        };
        if s.precision() != (p + 2) as usize {
            return Err(PGroupError::PrimeMismatch);
        }
        let coeffs = s
            .coeffs()
            .iter()
            .map(|c| c.as_residue().expect("prime-field series"))
            .collect();
        PElement::new(p, coeffs)
    }
}

/// Group operation: composition modulo `x^{p+3}`, delegated to the series
/// layer.
pub fn pg_compose(e1: &PElement, e2: &PElement) -> Result<PElement, PGroupError> {
    if e1.p != e2.p {
        return Err(PGroupError::PrimeMismatch);
    }
    PElement::from_series(&e1.to_series().compose(&e2.to_series())?)
}

/// Group inverse, delegated to the series layer.
pub fn pg_invert(e: &PElement) -> PElement {
    PElement::from_series(&e.to_series().invert()).expect("inverse stays in the group")
}

/// k-fold composition power.
pub fn pg_power(e: &PElement, k: u64) -> PElement {
    PElement::from_series(&e.to_series().power_compose(k)).expect("powers stay in the group")
}

/// One conjugacy class of the census: the minimal-index representative and
/// the class size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub rep: PElement,
    pub size: u64,
}

/// The full partition of Γ_p into conjugacy classes, sorted by
/// representative index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCensus {
    pub p: u64,
    pub order: u64,
    pub classes: Vec<ClassInfo>,
}

/// Exhaustively partition Γ_p into conjugacy classes.
///
/// From each unvisited seed (scanned in increasing index order, which makes
/// every representative minimal in its class) the orbit is closed under
/// conjugation by the elementary generators `x + t x^j`, t in F_p^*,
/// 2 <= j <= p+2. Closing under a generating set closes under the whole
/// group, and that the elementary elements generate is re-proved at startup
/// by reconstructing sample elements from them (the census aborts if that
/// fails). Visited marks live in a dense atomic bit array; `threads > 1`
/// splits each breadth-first frontier level across workers, which cannot
/// change the resulting partition (orbit closures are schedule-independent),
/// only the wall-clock time.
///
/// p in {2, 3, 5} runs unconditionally; p = 7 (5,764,801 elements, minutes
/// of work) requires `allow_large`.
pub fn class_census(p: u64, threads: usize, allow_large: bool) -> Result<ClassCensus, PGroupError> {
    match p {
        2 | 3 | 5 => {}
        7 if allow_large => {}
        _ => return Err(PGroupError::UnsupportedPrime(p)),
    }
    let raw = census::census_dense(p, threads.max(1));
    let order = (p as u128).pow(p as u32 + 1) as u64;
    let classes = raw
        .into_iter()
        .map(|(rep_index, size)| {
            Ok(ClassInfo { rep: PElement::from_index(p, rep_index)?, size })
        })
        .collect::<Result<Vec<_>, PGroupError>>()?;
    debug_assert!(classes.windows(2).all(|w| w[0].rep.index() < w[1].rep.index()));
    Ok(ClassCensus { p, order, classes })
}

/// The exact number of conjugacy classes of Γ_p:
/// `1 + (p-1) (p u + (p+1-u))` with `u = floor((p+1)/2)` — the identity,
/// p(p-1) classes for each of the u values of r with a live beta slot, and
/// (p-1) classes for each larger r where beta is truncated away.
pub fn class_count_formula(p: u64) -> u64 {
    let u = p.div_ceil(2);
    1 + (p - 1) * (p * u + (p + 1 - u))
}

/// One element per theoretical conjugacy class: the identity, then
/// `x - alpha x^{r+1} + beta x^{2r+1}` for `r <= (p+1)/2` over all
/// `(alpha, beta)` in F_p^* x F_p, then `x - alpha x^{r+1}` for
/// `(p+1)/2 < r <= p+1` (the beta slot lies beyond degree p+2 there, and
/// those classes are independent of beta anyway).
///
/// The coarser count p(p-1)(p+1), which does not collapse the beta
/// redundancy at large r, bounds this list's length; the exact length is
/// [`class_count_formula`].
pub fn representative_list(p: u64) -> Result<Vec<PElement>, PGroupError> {
    let n = (p + 2) as usize;
    let mut out = vec![PElement::identity(p)?];
    for r in 1..=(p + 1) as usize {
        for alpha in 1..p {
            let neg_alpha = p - alpha; // -alpha mod p
            if 2 * r < n {
                for beta in 0..p {
                    let mut coeffs = vec![0u64; (p + 1) as usize];
                    coeffs[r + 1 - 2] = neg_alpha;
                    coeffs[2 * r + 1 - 2] = beta;
                    out.push(PElement::new(p, coeffs)?);
                }
            } else {
                let mut coeffs = vec![0u64; (p + 1) as usize];
                coeffs[r + 1 - 2] = neg_alpha;
                out.push(PElement::new(p, coeffs)?);
            }
        }
    }
    debug_assert_eq!(out.len() as u64, class_count_formula(p));
    Ok(out)
}

/// One verification check: name, outcome, human-readable detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`verify_census_vs_theory`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusReport {
    pub p: u64,
    pub checks: Vec<CensusCheck>,
}

impl CensusReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Conjugacy invariants of an element, with beta collapsed to the slots that
/// actually survive the truncation. `None` encodes the flat (identity)
/// class.
type InvariantKey = Option<(usize, u64, Option<u64>)>;

fn invariant_key(e: &PElement) -> Result<InvariantKey, PGroupError> {
    let nf = takens_normal_form(&e.to_series())?;
    Ok(nf.map(|nf| {
        let alpha = nf.alpha.as_residue().expect("prime-field normal form");
        let beta = nf
            .beta_significant
            .then(|| nf.beta.as_residue().expect("prime-field normal form"));
        (nf.r, alpha, beta)
    }))
}

/// Check a census against the theoretical class list:
/// (a) the class count equals [`class_count_formula`];
/// (b) census representatives biject onto the theoretical representatives
///     under their normal-form invariants (with beta identified away where
///     insignificant);
/// (c) the class equation holds exactly: sizes divide the group order and
///     `sum over classes of 1/m_i = 1` for the centralizer orders
///     `m_i = |Γ_p| / size_i`.
pub fn verify_census_vs_theory(census: &ClassCensus) -> Result<CensusReport, PGroupError> {
    let p = census.p;
    let mut checks = Vec::new();

    let expected = class_count_formula(p);
    checks.push(CensusCheck {
        name: "class_count",
        passed: census.classes.len() as u64 == expected,
        detail: format!("census has {} classes, formula gives {}", census.classes.len(), expected),
    });

    // Invariant bijection, both directions, with duplicates called out.
    let mut census_keys = Vec::new();
    let mut bijection_ok = true;
    let mut bijection_detail = String::from("census representatives biject onto theory");
    for info in &census.classes {
        let key = invariant_key(&info.rep)?;
        if census_keys.contains(&key) {
            bijection_ok = false;
            bijection_detail = format!(
                "census classes collide on invariants at representative index {}",
                info.rep.index()
            );
        }
        census_keys.push(key);
    }
    let mut theory_keys = Vec::new();
    for rep in representative_list(p)? {
        let key = invariant_key(&rep)?;
        if theory_keys.contains(&key) {
            bijection_ok = false;
            bijection_detail =
                format!("theoretical list collides on invariants at index {}", rep.index());
        }
        theory_keys.push(key);
    }
    if bijection_ok {
        let mut a = census_keys.clone();
        let mut b = theory_keys.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            bijection_ok = false;
            let missing = b.iter().find(|k| !a.contains(k));
            bijection_detail = format!("invariant sets differ (first missing: {missing:?})");
        }
    }
    checks.push(CensusCheck { name: "invariant_bijection", passed: bijection_ok, detail: bijection_detail });

    // Class equation over exact rationals.
    let order = BigInt::from(census.order);
    let mut sum = BigRational::zero();
    let mut equation_ok = true;
    let mut equation_detail = String::from("sum of 1/m_i is exactly 1");
    for info in &census.classes {
        if info.size == 0 || !census.order.is_multiple_of(info.size) {
            equation_ok = false;
            equation_detail = format!(
                "class at representative index {} has size {} which does not divide {}",
                info.rep.index(),
                info.size,
                census.order
            );
            break;
        }
        // 1/m_i = size_i / |Γ|
        sum += BigRational::new(BigInt::from(info.size), order.clone());
    }
    if equation_ok && !sum.is_one() {
        equation_ok = false;
        equation_detail = format!("sum of 1/m_i is {sum}, not 1");
    }
    checks.push(CensusCheck { name: "class_equation", passed: equation_ok, detail: equation_detail });

    Ok(CensusReport { p, checks })
}

/// A certified witness that some group of order >= N has few conjugacy
/// classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QnBound {
    /// Smallest prime with `p^{p+1} >= N`.
    pub p: u64,
    /// `p^{p+1}`, the order of Γ_p.
    pub order: u128,
    /// Exact class count of Γ_p, from [`class_count_formula`].
    pub class_count: u64,
    /// The cruder representative-count bound p^3.
    pub crude_bound: u64,
}

/// For `N >= 2`, find the smallest prime p with `p^{p+1} >= N` (compared
/// exactly in integer arithmetic) and report Γ_p as a witness: any group of
/// order >= N realized as Γ_p x (something abelian of matching size) — or
/// simply Γ_p itself once its order passes N — has at most `class_count`
/// classes, so the minimal class count q(N) over groups of order >= N obeys
/// q(N) <= class_count = O(log^3 N).
pub fn qn_bound(n: u128) -> QnBound {
    assert!(n >= 2, "qn_bound requires N >= 2");
    let mut p = 2u64;
    loop {
        if crate::fields::is_prime_u64(p) {
            let order = (p as u128).pow(p as u32 + 1);
            if order >= n {
                return QnBound { p, order, class_count: class_count_formula(p), crude_bound: p * p * p };
            }
        }
        p += 1;
    }
}

/// One solution of `1/m_1 + ... + 1/m_k = 1` in nonincreasing positive
/// integers; the sum is exactly 1 in rational arithmetic by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandauSolution {
    pub parts: Vec<u64>,
}

/// All Landau solutions for a given k, plus the largest part appearing in
/// any of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandauEnumeration {
    pub k: u32,
    pub solutions: Vec<LandauSolution>,
    /// max over solutions of m_1: the largest centralizer order — hence the
    /// largest group order — consistent with k conjugacy classes.
    pub max_order: u64,
}

/// Exhaustively enumerate `1/m_1 + ... + 1/m_k = 1` for `k <= 6`.
///
/// The recursion picks the smallest part first: with `j` parts left and a
/// remaining target `t`, the next part m satisfies `m >= max(previous,
/// ceil(1/t))` and `j/m >= t` (otherwise even j copies of 1/m fall short),
/// so the search is finite. Solutions are returned sorted lexicographically
/// by their nonincreasing part lists.
pub fn landau_enumerate(k: u32) -> Result<LandauEnumeration, PGroupError> {
    if k == 0 || k > 6 {
        return Err(PGroupError::LandauTooLarge(k));
    }
    fn rec(parts_left: u32, target: BigRational, min_part: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if target <= BigRational::zero() {
            return;
        }
        if parts_left == 1 {
            // target must be 1/m for an integer m >= min_part
            if target.numer().is_one() {
                if let Some(m) = target.denom().try_into().ok().filter(|&m: &u64| m >= min_part) {
                    let mut sol = acc.clone();
                    sol.push(m);
                    out.push(sol);
                }
            }
            return;
        }
        // ceil(1/target)
        let inv = target.recip();
        let mut m: u64 = inv.ceil().numer().try_into().expect("parts stay small");
        m = m.max(min_part);
        loop {
            let frac = BigRational::new(BigInt::from(parts_left), BigInt::from(m));
            if frac < target {
                break;
            }
            acc.push(m);
            rec(parts_left - 1, &target - BigRational::new(BigInt::one(), BigInt::from(m)), m, acc, out);
            acc.pop();
            m += 1;
        }
    }
    let mut raw = Vec::new();
    rec(k, BigRational::one(), 1, &mut Vec::new(), &mut raw);
    let mut solutions: Vec<LandauSolution> = raw
        .into_iter()
        .map(|mut parts| {
            parts.reverse(); // nonincreasing
            LandauSolution { parts }
        })
        .collect();
    solutions.sort_by(|a, b| a.parts.cmp(&b.parts));
    let max_order = solutions.iter().map(|s| s.parts[0]).max().unwrap_or(0);
    Ok(LandauEnumeration { k, solutions, max_order })
}
