//! Zeta-type tail sums used to complete truncated products analytically.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

/// B_{2i} / (2i)! for i = 1..=10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// Rising factorial s (s+1) ... (s+n-1).
fn pochhammer(s: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (s + k as f64))
}

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q+k)^{-s} for integer s ≥ 2 and q > 0.
///
/// Direct summation until the shifted argument reaches `max(s, 12)`, then
/// Euler–Maclaurin with ten Bernoulli corrections. Relative accuracy is a few
/// ulps over the range used in this crate.
pub fn hurwitz_zeta(s: u32, q: f64) -> f64 {
    debug_assert!(s >= 2 && q > 0.0);
    let sf = f64::from(s);
    let threshold = sf.max(12.0);
    let mut x = q;
    let mut head = 0.0;
    while x < threshold {
        head += x.powi(-(s as i32));
        x += 1.0;
    }
    let xs = x.powi(-(s as i32));
    let mut tail = x * xs / (sf - 1.0) + 0.5 * xs;
    let inv_x2 = 1.0 / (x * x);
    // x^{-s-2i+1}
    let mut power = xs / x;
    for (i, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coeff * pochhammer(sf, 2 * i + 1) * power;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        power *= inv_x2;
    }
    head + tail
}

/// Σ_{m > n} (1/m² − 1/(m+r)²), the tail of the shifted-square series.
pub fn shifted_square_tail(r: f64, n: usize) -> f64 {
    let q = n as f64 + 1.0;
    hurwitz_zeta(2, q) - hurwitz_zeta(2, q + r)
}

/// Im((1+i)^{-n}) · 2^{n/2} = −sin(nπ/4), exact on the eighth roots.
fn sin_eighth(n: i64) -> f64 {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    match n.rem_euclid(8) {
        0 | 4 => 0.0,
        1 | 3 => H,
        2 => 1.0,
        5 | 7 => -H,
        _ => -1.0,
    }
}

/// Im((1+i)^{-n}).
fn im_one_plus_i_pow_neg(n: i64) -> f64 {
    -sin_eighth(n) * 2f64.powf(-(n as f64) / 2.0)
}

/// Coefficients of the asymptotic expansion of a square-ring sum
///
///   Σ_{max(|m|,|n|)=k} (m+in)^{-s} ≈ Σ_i c_i k^{1-s-2i},   s ≡ 0 (mod 4),
///
/// obtained by Euler–Maclaurin along one side of the ring.
fn ring_coefficients(s: u32) -> [f64; 9] {
    debug_assert!(s.is_multiple_of(4) && s >= 4);
    let sf = f64::from(s);
    let n = i64::from(s);
    let mut c = [0.0; 9];
    // ∫_{-1}^{1} (1+ix)^{-s} dx = 2 Im((1+i)^{1-s}) / (1-s)
    c[0] = 4.0 * 2.0 * im_one_plus_i_pow_neg(n - 1) / (1.0 - sf);
    for (i, slot) in c.iter_mut().enumerate().skip(1) {
        let r = 2 * i - 1;
        // f^{(r)}(1) − f^{(r)}(−1) for f(x) = (1+ix)^{-s}, r odd:
        //   (−1)^r (s)_r · i^{r+1} · 2 Im((1+i)^{-s-r}) = −(s)_r (−1)^i 2 Im(...)
        let sign_i = if i % 2 == 0 { 1.0 } else { -1.0 };
        let jump = -pochhammer(sf, r) * sign_i * 2.0 * im_one_plus_i_pow_neg(n + r as i64);
        *slot = 4.0 * BERNOULLI_OVER_FACTORIAL[i - 1] * jump;
    }
    c
}

/// Asymptotic value of one square ring Σ_{max(|m|,|n|)=k} (m+in)^{-s}.
pub fn square_ring_sum(s: u32, k: usize) -> f64 {
    let kf = k as f64;
    ring_coefficients(s)
        .iter()
        .enumerate()
        .map(|(i, c)| c * kf.powf(1.0 - f64::from(s) - 2.0 * i as f64))
        .sum()
}

/// Exact Σ_{max(|m|,|n|)=k} (m+in)^{-s} for s ≡ 0 (mod 4).
pub fn square_ring_sum_exact(s: u32, k: usize) -> f64 {
    // four rotated copies of one half-open side
    let kf = k as f64;
    let side: f64 = (1 - k as i64..=k as i64)
        .map(|t| Complex64::new(kf, t as f64).powi(-(s as i32)).re)
        .sum();
    4.0 * side
}

/// Shell index from which the ring expansion is used for exponent `s`.
fn expansion_start(s: u32) -> usize {
    2 * s as usize + 8
}

fn lattice_tail_uncached(s: u32, half_width: usize) -> f64 {
    let start = half_width.max(expansion_start(s));
    let mut acc: f64 = (half_width + 1..=start)
        .rev()
        .map(|k| square_ring_sum_exact(s, k))
        .sum();
    let q = start as f64 + 1.0;
    for (i, c) in ring_coefficients(s).iter().enumerate() {
        let term = c * hurwitz_zeta(s - 1 + 2 * i as u32, q);
        acc += term;
        if i > 0 && term.abs() <= 1e-19 * acc.abs() {
            break;
        }
    }
    acc
}

/// Σ over unit-lattice points outside the box max(|m|,|n|) ≤ `half_width`
/// of (m+in)^{-s}, for s ≡ 0 (mod 4). Real by symmetry.
///
/// Values are memoized per `(s, half_width)`; they depend on nothing else.
pub fn square_lattice_tail(s: u32, half_width: usize) -> f64 {
    static CACHE: OnceLock<RwLock<HashMap<(u32, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.read().ok().and_then(|m| m.get(&(s, half_width)).copied()) {
        return v;
    }
    let v = lattice_tail_uncached(s, half_width);
    if let Ok(mut m) = cache.write() {
        m.insert((s, half_width), v);
    }
    v
}
