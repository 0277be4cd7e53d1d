//! Double-double re-run of the sin orbit.
//!
//! The headline orbit computations run in plain f64, and parabolic decay is
//! numerically benign (each step contracts toward 0, so per-step rounding
//! is damped rather than amplified). To back that argument with data
//! instead of trust, this module re-iterates sin in double-double
//! arithmetic (~106 significand bits, far beyond the 64 fractional bits
//! needed here) so the f64 values can be spot-checked at n = 10^6.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2: a ~106-bit significand.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

/// Error-free sum of two doubles (Knuth).
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

/// Error-free sum assuming |a| >= |b| (Dekker).
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

/// Error-free product via fused multiply-add.
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn div_f64(self, d: f64) -> Dd {
        let q = self.hi / d;
        let p = two_prod(q, d);
        let r = ((self.hi - p.hi) - p.lo + self.lo) / d;
        quick_two_sum(q, r)
    }
}

/// sin by Taylor series, valid (and rapidly convergent) for |x| <= 1; the
/// truncation tail is below 1e-35 well before the term cap.
fn dd_sin(x: Dd) -> Dd {
    debug_assert!(x.hi.abs() <= 1.0);
    let neg_x2 = x.mul(x).neg();
    let mut term = x;
    let mut sum = x;
    for k in 1u32..=24 {
        term = term.mul(neg_x2).div_f64((2 * k * (2 * k + 1)) as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    sum
}

/// Iterate x -> sin x from `x0` in double-double arithmetic and report the
/// requested checkpoints rounded back to f64. Requires 0 < x0 <= 1 (the
/// Taylor evaluation is only certified there; the orbit itself then stays
/// inside).
pub fn sin_orbit_extended(x0: f64, checkpoints: &[u64]) -> Vec<(u64, f64)> {
    assert!(x0 > 0.0 && x0 <= 1.0, "extended sin orbit needs x0 in (0, 1]");
    let mut ns: Vec<u64> = checkpoints.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::with_capacity(ns.len());
    let mut x = Dd::from_f64(x0);
    let mut next_idx = 0usize;
    if ns.first() == Some(&0) {
        out.push((0, x.hi));
        next_idx = 1;
    }
    let n_max = ns.last().copied().unwrap_or(0);
    for n in 1..=n_max {
        x = dd_sin(x);
        if next_idx < ns.len() && ns[next_idx] == n {
            out.push((n, x.hi));
            next_idx += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_sin_matches_libm_to_the_ulp() {
        let mut x = 0.017f64;
        while x <= 1.0 {
            let got = dd_sin(Dd::from_f64(x)).hi;
            let want = x.sin();
            assert!(
                (got - want).abs() <= 4.0 * f64::EPSILON * want.abs(),
                "x = {x}: {got} vs {want}"
            );
            x += 0.037;
        }
    }

    #[test]
    fn dd_arithmetic_keeps_the_low_word() {
        // 1 + 2^-60 survives in the low word and resurfaces on subtraction.
        let a = Dd::from_f64(1.0).add(Dd::from_f64(2f64.powi(-60)));
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 2f64.powi(-60));
        let b = a.add(Dd::from_f64(-1.0));
        assert_eq!(b.hi, 2f64.powi(-60));
    }

    #[test]
    fn extended_orbit_agrees_with_f64_at_moderate_depth() {
        let ext = sin_orbit_extended(1.0, &[0, 100, 1000]);
        let mut x = 1.0f64;
        let mut plain = vec![(0u64, x)];
        for n in 1..=1000u64 {
            x = x.sin();
            if n == 100 || n == 1000 {
                plain.push((n, x));
            }
        }
        assert_eq!(ext.len(), plain.len());
        for (&(n1, a), &(n2, b)) in ext.iter().zip(&plain) {
            assert_eq!(n1, n2);
            assert!((a - b).abs() <= 1e-12 * b, "n = {n1}: {a} vs {b}");
        }
    }

    #[test]
    fn extended_orbit_is_strictly_decreasing() {
        let ext = sin_orbit_extended(0.9, &[1, 2, 3, 50, 500]);
        assert!(ext.windows(2).all(|w| w[0].1 > w[1].1));
        assert!(ext.iter().all(|&(_, x)| x > 0.0));
    }
}
