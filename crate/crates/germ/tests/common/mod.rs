//! Shared machinery for the integration suites: deterministic random
//! series, and the reusable property checks run by both the `properties`
//! and `acceptance` targets. Each suite returns the number of cases it
//! exercised so callers can report coverage.

use germ::dynamics::{sandwich_check, ComparatorSpec, MapKind, RealMapSpec};
use germ::fields::Field;
use germ::normal_form::{is_conjugate, takens_normal_form};
use germ::pgroup::{class_census, pg_compose, pg_invert, PElement};
use germ::series::TruncSeries;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random series over Q at precision `n`: numerators in [-4, 4],
/// denominators in [1, 4], so composed coefficients stay printable and the
/// exact arithmetic stays fast.
pub fn random_q_series(rng: &mut ChaCha8Rng, n: usize) -> TruncSeries {
    let field = Field::rationals();
    let coeffs = (0..n.saturating_sub(1))
        .map(|_| {
            let numer: i64 = rng.gen_range(-4..=4);
            let denom: i64 = rng.gen_range(1..=4);
            field.parse_elem(&format!("{numer}/{denom}")).expect("valid literal")
        })
        .collect();
    TruncSeries::from_coeffs(field, coeffs).expect("members of Q")
}

/// A random series over F_p at precision `n`.
pub fn random_fp_series(rng: &mut ChaCha8Rng, p: u64, n: usize) -> TruncSeries {
    let field = Field::prime_field(p).expect("p is prime");
    let coeffs =
        (0..n.saturating_sub(1)).map(|_| field.from_i64(rng.gen_range(0..p) as i64)).collect();
    TruncSeries::from_coeffs(field, coeffs).expect("residues mod p")
}

fn random_series(rng: &mut ChaCha8Rng, case: usize) -> TruncSeries {
    // Alternate deterministically between Q and the prime fields.
    let n = rng.gen_range(2..=12);
    match case % 4 {
        0 | 1 => random_q_series(rng, n),
        2 => random_fp_series(rng, 2, n),
        _ => random_fp_series(rng, [3u64, 5, 7][case % 3], n),
    }
}

/// Composition is associative, the identity is neutral, and `invert`
/// produces a two-sided inverse — over Q and over prime fields.
pub fn suite_series_group_axioms() -> usize {
    let mut rng = rng(0x5e71e5);
    let cases = 220;
    for case in 0..cases {
        let f = random_series(&mut rng, case);
        let g = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let h = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let id = TruncSeries::identity(f.field(), f.precision());

        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        assert_eq!(left, right, "associativity failed for {f}, {g}, {h}");

        assert_eq!(f.compose(&id).unwrap(), f);
        assert_eq!(id.compose(&f).unwrap(), f);

        let finv = f.invert();
        assert!(f.compose(&finv).unwrap().is_identity(), "right inverse failed for {f}");
        assert!(finv.compose(&f).unwrap().is_identity(), "left inverse failed for {f}");
    }
    cases
}

/// Coefficients for a second series matching the field and precision of a
/// template.
fn random_like(rng: &mut ChaCha8Rng, like: &TruncSeries) -> Vec<germ::fields::Elem> {
    let field = like.field();
    (0..like.precision().saturating_sub(1))
        .map(|_| match field.modulus() {
            None => {
                let numer: i64 = rng.gen_range(-4..=4);
                let denom: i64 = rng.gen_range(1..=4);
                field.parse_elem(&format!("{numer}/{denom}")).unwrap()
            }
            Some(p) => field.from_i64(rng.gen_range(0..p) as i64),
        })
        .collect()
}

/// Conjugation is a right action: conjugating by g then h equals
/// conjugating by g . h, and conjugating by the identity does nothing.
pub fn suite_conjugation_action() -> usize {
    let mut rng = rng(0xac7104);
    let cases = 220;
    for case in 0..cases {
        let f = random_series(&mut rng, case);
        let g = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let h = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let id = TruncSeries::identity(f.field(), f.precision());

        assert_eq!(f.conjugate(&id).unwrap(), f);
        let stepwise = f.conjugate(&g).unwrap().conjugate(&h).unwrap();
        let combined = f.conjugate(&g.compose(&h).unwrap()).unwrap();
        assert_eq!(stepwise, combined, "action identity failed for {f}");
    }
    cases
}

/// The valuation data (r, alpha) — flatness and leading coefficient — never
/// changes under conjugation.
pub fn suite_valuation_invariance() -> usize {
    let mut rng = rng(0x1a11a);
    let cases = 220;
    for case in 0..cases {
        let f = random_series(&mut rng, case);
        let g = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let conj = f.conjugate(&g).unwrap();
        assert_eq!(f.valuation_data(), conj.valuation_data(), "invariance failed for {f} by {g}");
    }
    cases
}

/// The normal form is a fixed point of normalization, and the returned
/// conjugator actually carries the input to it.
pub fn suite_normal_form_idempotent_and_witnessed() -> usize {
    let mut rng = rng(0x1de270);
    let cases = 220;
    for case in 0..cases {
        // In characteristic p normalization requires N <= p + 2.
        let f = match case % 3 {
            0 | 1 => {
                let n = rng.gen_range(2..=12);
                random_q_series(&mut rng, n)
            }
            _ => {
                let p = [2u64, 3, 5, 7][case % 4];
                let n = rng.gen_range(2..=(p + 2) as usize);
                random_fp_series(&mut rng, p, n)
            }
        };
        match takens_normal_form(&f).unwrap() {
            None => assert!(f.is_identity()),
            Some(nf) => {
                assert_eq!(f.conjugate(&nf.conjugator).unwrap(), nf.normalized);
                let again = takens_normal_form(&nf.normalized).unwrap().unwrap();
                assert!(again.conjugator.is_identity(), "not idempotent for {f}");
                assert_eq!(again.normalized, nf.normalized);
                assert_eq!((again.r, again.alpha, again.beta), (nf.r, nf.alpha, nf.beta));
            }
        }
    }
    cases
}

/// Conjugacy is transitive with verified witnesses, and perturbing the
/// leading coefficient breaks it.
pub fn suite_is_conjugate_transitive() -> usize {
    let mut rng = rng(0x7a2e5);
    let cases = 200;
    for case in 0..cases {
        let n = rng.gen_range(3..=10);
        let mut f = random_q_series(&mut rng, n);
        if f.is_identity() {
            f = TruncSeries::from_i64_coeffs(Field::rationals(), &vec![1; n - 1]);
        }
        let a = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let b = TruncSeries::from_coeffs(f.field(), random_like(&mut rng, &f)).unwrap();
        let g = f.conjugate(&a).unwrap();
        let h = f.conjugate(&b).unwrap();

        let w_fg = is_conjugate(&f, &g).unwrap().expect("f ~ g by construction");
        let w_gh = is_conjugate(&g, &h).unwrap().expect("g ~ h by construction");
        let w_fh = is_conjugate(&f, &h).unwrap().expect("f ~ h by transitivity");
        assert_eq!(f.conjugate(&w_fg).unwrap(), g);
        assert_eq!(g.conjugate(&w_gh).unwrap(), h);
        assert_eq!(f.conjugate(&w_fh).unwrap(), h);

        // Negative control: double the leading coefficient.
        if case % 4 == 0 {
            if let germ::series::ValuationData::Leading { r, .. } = f.valuation_data() {
                let mut coeffs = f.coeffs().to_vec();
                let two = f.field().from_i64(2);
                coeffs[r - 1] = f.field().mul(&coeffs[r - 1], &two).unwrap();
                let scaled = TruncSeries::from_coeffs(f.field(), coeffs).unwrap();
                assert!(
                    is_conjugate(&f, &scaled).unwrap().is_none(),
                    "alpha should separate {f} from {scaled}"
                );
            }
        }
    }
    cases
}

/// Agreement with ground truth obtained by conjugating by *every* group
/// element: exhaustively for the 8 elements over F_2 at N = 4, and on
/// random pairs against a brute-force partition of the 81 elements over F_3
/// at N = 5 (cross-checked against the census sizes).
pub fn suite_partition_agrees_with_brute_force() -> usize {
    // F_2, N = 4: all 64 ordered pairs.
    let f2 = Field::prime_field(2).unwrap();
    let els: Vec<TruncSeries> = (0..8)
        .map(|i| TruncSeries::from_i64_coeffs(f2, &[i & 1, (i >> 1) & 1, (i >> 2) & 1]))
        .collect();
    let brute_same = |a: &TruncSeries, b: &TruncSeries| {
        els.iter().any(|g| a.conjugate(g).unwrap() == *b)
    };
    let mut cases = 0;
    for a in &els {
        for b in &els {
            let expected = brute_same(a, b);
            let got = is_conjugate(a, b).unwrap();
            assert_eq!(got.is_some(), expected, "disagreement on {a} vs {b}");
            cases += 1;
        }
    }

    // F_3, N = 5: brute-force class map, then random pairs.
    let order = 81u64;
    let all: Vec<PElement> = (0..order).map(|i| PElement::from_index(3, i).unwrap()).collect();
    let mut class_of = vec![u64::MAX; order as usize];
    for f in &all {
        if class_of[f.index() as usize] != u64::MAX {
            continue;
        }
        for g in &all {
            let conj = pg_compose(&pg_invert(g), &pg_compose(f, g).unwrap()).unwrap();
            let idx = conj.index() as usize;
            if class_of[idx] == u64::MAX {
                class_of[idx] = f.index();
            }
        }
    }
    // The brute-force partition must reproduce the census sizes.
    let census = class_census(3, 1, false).unwrap();
    for info in &census.classes {
        let brute_size =
            class_of.iter().filter(|&&c| c == info.rep.index()).count() as u64;
        assert_eq!(brute_size, info.size, "size mismatch at rep {}", info.rep.index());
    }
    let mut rng = rng(0xb2f3);
    for _ in 0..200 {
        let i = rng.gen_range(0..order);
        let j = rng.gen_range(0..order);
        let same_brute = class_of[i as usize] == class_of[j as usize];
        let same_inv =
            is_conjugate(&all[i as usize].to_series(), &all[j as usize].to_series())
                .unwrap()
                .is_some();
        assert_eq!(same_inv, same_brute, "disagreement on indices {i}, {j}");
        cases += 1;
    }
    cases
}

/// The comparator actually steps the profile (next(a(u)) = a(u+1) to
/// 1e-12 relative), and its expansion carries the x^{2+delta} coefficient
/// lambda (1 - delta).
pub fn suite_comparator_identity_and_expansion() -> usize {
    let mut rng = rng(0xc00de);
    let cases = 220;
    for _ in 0..cases {
        let lambda = rng.gen_range(-1.0..=1.0);
        let delta = rng.gen_range(0.05..=0.95);
        let spec = ComparatorSpec::power_delta(lambda, delta).unwrap();
        let u = spec.u_min() * (1.0 + rng.gen_range(0.01..1e4));
        let want = spec.a(u + 1.0);
        let got = spec.next(spec.a(u)).unwrap();
        assert!(
            (got - want).abs() <= 1e-12 * want,
            "identity failed: lambda = {lambda}, delta = {delta}, u = {u}"
        );
    }
    // Expansion constant, isolated through the shared lambda = 0 profile.
    let delta = 0.9;
    let base = ComparatorSpec::power_delta(0.0, delta).unwrap();
    let mut rng2 = rng_expansion();
    for _ in 0..cases {
        let lambda = rng2.gen_range(-1.0..=1.0);
        let spec = ComparatorSpec::power_delta(lambda, delta).unwrap();
        let x = 1e-4;
        let ratio = (spec.next(x).unwrap() - base.next(x).unwrap()) / x.powf(2.0 + delta);
        assert!(
            (ratio - lambda * (1.0 - delta)).abs() <= 1e-3,
            "expansion constant off: lambda = {lambda}, ratio = {ratio}"
        );
    }
    2 * cases
}

fn rng_expansion() -> ChaCha8Rng {
    rng(0xe8a51)
}

/// The test map x - x^2 + x^3 sits strictly between the extreme comparator
/// germs on a 500-point grid of (0, 0.05].
pub fn suite_sandwich_on_test_map() -> usize {
    let series = TruncSeries::from_i64_coeffs(Field::rationals(), &[-1, 1]);
    let f = RealMapSpec::new(MapKind::Poly(series), 0.05, 0.05).unwrap();
    let report = sandwich_check(&f, 0.9, 500, 2_000).unwrap();
    assert!(report.pointwise_ok, "pointwise sandwich failed");
    for p in &report.points {
        assert!(p.lower < p.fx && p.fx < p.upper, "not strictly inside at x = {}", p.x);
    }
    assert!(report.smallest_shift.is_some(), "no shift bound found");
    report.points.len()
}
