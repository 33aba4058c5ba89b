//! Log-magnitude evaluation of the lattice sigma functions.
//!
//! All products are summed in log space over concentric square shells of
//! lattice indices. Points are grouped into orbits under `w -> -w` and
//! `w -> conj(w)`, and each orbit contributes one value computed from `z²`
//! only, so `value(-z)` and `value(conj z)` reproduce `value(z)` bit for bit.
//!
//! Truncated sums are completed with their analytic tails: for the square
//! lattice the missing part is a power series in `z⁴` whose coefficients are
//! the lattice sums outside the box, and for the shifted real row it is a
//! series in `z²` with Hurwitz-zeta coefficients. Doubling the box is kept as
//! an empirical convergence check on top of that.

use num_complex::Complex64;

use crate::error::{require, Error, Result};
use crate::lattice::LatticeSpec;
use crate::special::{hurwitz_zeta, shifted_square_tail, square_lattice_tail};
use crate::summation::CompensatedSum;

/// Pole-exclusion radius, in units of the lattice pitch for the row ratio
/// product and in absolute units for `psi`.
pub const POLE_EXCLUSION: f64 = 1e-9;

/// Ratio between the smallest box half-width used and `|z|/a`, keeping the
/// tail series well inside its disk of convergence.
const BOX_TO_RADIUS: f64 = 3.0;

/// Tail-series terms below this are dropped.
const SERIES_CUTOFF: f64 = 1e-18;

/// Controls the truncation of the infinite products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Initial half-width of the index box (or length of a one-dimensional
    /// product).
    pub m_min: usize,
    /// Target absolute error in log-magnitude.
    pub tol: f64,
    pub max_doublings: u32,
}

impl TruncationPolicy {
    pub fn new(m_min: usize, tol: f64, max_doublings: u32) -> Result<Self> {
        require(m_min >= 8, "m_min", "m_min >= 8", m_min as f64)?;
        require(tol.is_finite() && tol > 0.0, "tol", "tol > 0", tol)?;
        require(
            (1..=16).contains(&max_doublings),
            "max_doublings",
            "1 <= max_doublings <= 16",
            f64::from(max_doublings),
        )?;
        Ok(Self {
            m_min,
            tol,
            max_doublings,
        })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            m_min: 8,
            tol: 1e-9,
            max_doublings: 6,
        }
    }
}

/// A log-magnitude with a truncation-error estimate; `-inf` at exact zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedLogValue {
    pub log_mag: f64,
    pub err_est: f64,
    pub at_zero: bool,
}

impl WeightedLogValue {
    pub fn zero() -> Self {
        Self {
            log_mag: f64::NEG_INFINITY,
            err_est: 0.0,
            at_zero: true,
        }
    }

    pub fn finite(log_mag: f64, err_est: f64) -> Self {
        debug_assert!(log_mag.is_finite() && err_est.is_finite());
        Self {
            log_mag,
            err_est,
            at_zero: false,
        }
    }

    /// `exp(log_mag)`; overflows for large arguments, so only for display
    /// and for already-weighted values.
    pub fn magnitude(&self) -> f64 {
        self.log_mag.exp()
    }

    /// Adds a finite log-factor, keeping zeros as zeros.
    pub fn shifted(self, delta: f64) -> Self {
        if self.at_zero {
            self
        } else {
            Self::finite(self.log_mag + delta, self.err_est)
        }
    }

    fn combine(self, other: Self) -> Self {
        if self.at_zero || other.at_zero {
            Self::zero()
        } else {
            Self::finite(self.log_mag + other.log_mag, self.err_est + other.err_est)
        }
    }
}

/// ln|1 - s| given s; `near` is ln|1 - s| computed from exact differences,
/// used when s is close to 1.
#[inline]
fn ln_abs_one_minus(s: Complex64, near: impl FnOnce() -> f64) -> f64 {
    let dr = 1.0 - s.re;
    let q = dr * dr + s.im * s.im;
    if q < 0.25 {
        near()
    } else {
        let m2 = s.norm_sqr();
        if m2 < 0.25 {
            0.5 * (m2 - 2.0 * s.re).ln_1p()
        } else {
            0.5 * q.ln()
        }
    }
}

/// Pair term for ±w: ln|1 - u²| + Re(v²) with u = ζ/w, v = ζ/q (scaled
/// coordinates). `w` enters only through `u` unless the factor is near zero.
#[inline]
fn pair_term(zeta: Complex64, u: Complex64, w: Complex64, quad: f64) -> f64 {
    let s = u * u;
    let log_part = ln_abs_one_minus(s, || {
        let wn = w.norm().ln();
        (w - zeta).norm().ln() + (w + zeta).norm().ln() - 2.0 * wn
    });
    log_part + quad
}

/// ζ / (m + i n), written out so that sign and conjugation symmetries of the
/// inputs carry over exactly to the output.
#[inline]
fn div_lattice(zeta: Complex64, m: f64, n: f64) -> Complex64 {
    let d = m * m + n * n;
    Complex64::new((zeta.re * m + zeta.im * n) / d, (zeta.im * m - zeta.re * n) / d)
}

/// Row treatment for the box sum.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Square,
    Shifted(f64),
}

/// Orbit sum over shell `k` of the box, in scaled coordinates. Returns
/// `None` if `zeta` is exactly a point of the shell.
fn shell_sum(zeta: Complex64, row: Row, k: usize, acc: &mut CompensatedSum) -> Option<()> {
    let kf = k as f64;
    let mut add = |v: f64| -> Option<()> {
        if v == f64::NEG_INFINITY {
            None
        } else {
            acc.add(v);
            Some(())
        }
    };

    // Real-row orbit {±k}.
    match row {
        Row::Square => {
            let u = Complex64::new(zeta.re / kf, zeta.im / kf);
            let s = u * u;
            add(pair_term(zeta, u, Complex64::new(kf, 0.0), s.re))?;
        }
        Row::Shifted(r) => {
            let wk = kf + r;
            let u = Complex64::new(zeta.re / wk, zeta.im / wk);
            let v = Complex64::new(zeta.re / kf, zeta.im / kf);
            add(pair_term(zeta, u, Complex64::new(wk, 0.0), (v * v).re))?;
        }
    }

    // Imaginary-axis orbit {±ik}.
    {
        let u = div_lattice(zeta, 0.0, kf);
        let s = u * u;
        add(pair_term(zeta, u, Complex64::new(0.0, kf), s.re))?;
    }

    // Four-point orbits {±(m+in), ±(m-in)} with m, n > 0 on the shell.
    let mut quad = |m: f64, n: f64| -> Option<()> {
        let u1 = div_lattice(zeta, m, n);
        let u2 = div_lattice(zeta, m, -n);
        let t1 = pair_term(zeta, u1, Complex64::new(m, n), (u1 * u1).re);
        let t2 = pair_term(zeta, u2, Complex64::new(m, -n), (u2 * u2).re);
        add(t1 + t2)
    };
    for n in 1..=k {
        quad(kf, n as f64)?;
    }
    for m in 1..k {
        quad(m as f64, kf)?;
    }
    Some(())
}

/// Tail of the square-lattice box sum beyond half-width `m`:
/// −Σ_j Re(ζ^{4j}) T_{4j}(m) / (4j).
fn square_box_tail(zeta: Complex64, m: usize) -> (f64, f64) {
    let z2 = zeta * zeta;
    let z4 = z2 * z2;
    let rho = zeta.norm() / (m as f64 + 1.0);
    let scale = (m as f64 + 1.0).powi(2);
    let mut power = z4;
    let mut acc = 0.0;
    for j in 1..=40u32 {
        let bound = rho.powi(4 * j as i32) * scale;
        if bound < SERIES_CUTOFF && j > 1 {
            return (acc, bound);
        }
        let s = 4 * j;
        acc -= power.re * square_lattice_tail(s, m) / f64::from(s);
        power *= z4;
    }
    (acc, rho.powi(164) * scale)
}

/// Σ_{k>m} [ln|1 − ζ²/(k+r)²| − ln|1 − ζ²/k²|] as a series in ζ².
fn shifted_row_tail(zeta: Complex64, r: f64, m: usize) -> (f64, f64) {
    let z2 = zeta * zeta;
    let q = m as f64 + 1.0;
    let rho2 = zeta.norm_sqr() / (q * q);
    let mut power = z2;
    let mut acc = 0.0;
    for j in 1..=80u32 {
        let bound = rho2.powi(j as i32) * q;
        if bound < SERIES_CUTOFF && j > 1 {
            return (acc, bound);
        }
        let s = 2 * j;
        let diff = if j == 1 {
            -shifted_square_tail(r, m)
        } else {
            hurwitz_zeta(s, q + r) - hurwitz_zeta(s, q)
        };
        acc -= power.re * diff / f64::from(j);
        power *= z2;
    }
    (acc, rho2.powi(81) * q)
}

fn initial_half_width(policy: &TruncationPolicy, scaled_radius: f64) -> usize {
    policy
        .m_min
        .max((BOX_TO_RADIUS * scaled_radius).ceil() as usize + 1)
}

/// Box sum with tail completion, doubled until two successive half-widths
/// agree within `policy.tol`.
fn adaptive_box(zeta: Complex64, row: Row, policy: &TruncationPolicy) -> Result<WeightedLogValue> {
    let tail = |m: usize| -> (f64, f64) {
        let (t, b) = square_box_tail(zeta, m);
        match row {
            Row::Square => (t, b),
            Row::Shifted(r) => {
                let (t2, b2) = shifted_row_tail(zeta, r, m);
                (t + t2, b + b2)
            }
        }
    };

    let mut acc = CompensatedSum::new();
    let mut done = 0usize;
    let mut extend = |to: usize, acc: &mut CompensatedSum| -> Option<()> {
        for k in done + 1..=to {
            shell_sum(zeta, row, k, acc)?;
        }
        done = to;
        Some(())
    };

    let mut m = initial_half_width(policy, zeta.norm());
    if extend(m, &mut acc).is_none() {
        return Ok(WeightedLogValue::zero());
    }
    let (t, _) = tail(m);
    let mut prev = acc.value() + t;
    let mut change = f64::INFINITY;
    for _ in 0..policy.max_doublings {
        m *= 2;
        if extend(m, &mut acc).is_none() {
            return Ok(WeightedLogValue::zero());
        }
        let (t, bound) = tail(m);
        let cur = acc.value() + t;
        change = (cur - prev).abs();
        if change <= policy.tol {
            return Ok(WeightedLogValue::finite(cur, change + bound));
        }
        prev = cur;
    }
    Err(Error::TruncationNotConverged {
        change,
        tol: policy.tol,
        half_width: m,
    })
}

fn scaled(spec: &LatticeSpec, z: Complex64) -> Complex64 {
    z / spec.a()
}

/// Gaussian weight exponent α|z|²/2.
pub fn gaussian_log_weight(spec: &LatticeSpec, z: Complex64) -> f64 {
    0.5 * spec.alpha() * z.norm_sqr()
}

/// log|σ_a(z)| for the square lattice of pitch `a`.
pub fn log_sigma(spec: &LatticeSpec, z: Complex64, policy: &TruncationPolicy) -> Result<WeightedLogValue> {
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(WeightedLogValue::zero());
    }
    let body = adaptive_box(scaled(spec, z), Row::Square, policy)?;
    Ok(body.shifted(z.norm().ln()))
}

/// log|σ_a(z)| − α|z|²/2.
pub fn log_weighted_sigma(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    Ok(log_sigma(spec, z, policy)?.shifted(-gaussian_log_weight(spec, z)))
}

/// log|σ_{a,R}(z)| summed directly over the perturbed lattice, with linear
/// terms at the perturbed points and quadratic terms at the unperturbed ones.
pub fn log_modified_sigma_direct(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(WeightedLogValue::zero());
    }
    let body = adaptive_box(scaled(spec, z), Row::Shifted(spec.r_shift()), policy)?;
    Ok(body.shifted(z.norm().ln()))
}

/// log|σ_{a,R}(z)| − α|z|²/2 via the direct sum.
pub fn log_weighted_modified_sigma(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    Ok(log_modified_sigma_direct(spec, z, policy)?.shifted(-gaussian_log_weight(spec, z)))
}

/// Nearest nonzero multiple of `a` if `z` lies within the pole-exclusion
/// radius of it.
fn near_real_pole(spec: &LatticeSpec, z: Complex64) -> Option<f64> {
    let zeta = scaled(spec, z);
    let k = zeta.re.round();
    if k != 0.0 && (zeta - Complex64::new(k, 0.0)).norm() < POLE_EXCLUSION {
        Some(k * spec.a())
    } else {
        None
    }
}

/// One term of the row ratio product for index k ≥ 1 in scaled coordinates:
/// ln|1 − ζ²/(k+R)²| − ln|1 − ζ²/k²|.
#[inline]
fn row_ratio_term(zeta: Complex64, r: f64, k: usize) -> f64 {
    let kf = k as f64;
    let wk = kf + r;
    let u = Complex64::new(zeta.re / wk, zeta.im / wk);
    let v = Complex64::new(zeta.re / kf, zeta.im / kf);
    let top = ln_abs_one_minus(u * u, || {
        (Complex64::new(wk, 0.0) - zeta).norm().ln() + (Complex64::new(wk, 0.0) + zeta).norm().ln()
            - 2.0 * wk.ln()
    });
    let bottom = ln_abs_one_minus(v * v, || {
        (Complex64::new(kf, 0.0) - zeta).norm().ln() + (Complex64::new(kf, 0.0) + zeta).norm().ln()
            - 2.0 * kf.ln()
    });
    top - bottom
}

/// Σ_{k=from}^{to} row ratio terms; `None` on an exact zero.
fn row_ratio_range(zeta: Complex64, r: f64, from: usize, to: usize, acc: &mut CompensatedSum) -> Option<()> {
    for k in from..=to {
        let t = row_ratio_term(zeta, r, k);
        if t == f64::NEG_INFINITY {
            return None;
        }
        acc.add(t);
    }
    Some(())
}

/// log Π_{m≥1} |(1 − (z/w_m)²) / (1 − (z/z_m)²)|, the real-row correction
/// that turns σ_a into σ_{a,R}.
pub fn log_row_ratio(spec: &LatticeSpec, z: Complex64, policy: &TruncationPolicy) -> Result<WeightedLogValue> {
    if let Some(pole) = near_real_pole(spec, z) {
        return Err(Error::DomainPole { z, pole });
    }
    let zeta = scaled(spec, z);
    let r = spec.r_shift();
    let mut acc = CompensatedSum::new();
    let mut m = initial_half_width(policy, zeta.norm());
    if row_ratio_range(zeta, r, 1, m, &mut acc).is_none() {
        return Ok(WeightedLogValue::zero());
    }
    let mut prev = acc.value() + shifted_row_tail(zeta, r, m).0;
    let mut change = f64::INFINITY;
    for _ in 0..policy.max_doublings {
        let next = 2 * m;
        if row_ratio_range(zeta, r, m + 1, next, &mut acc).is_none() {
            return Ok(WeightedLogValue::zero());
        }
        m = next;
        let (t, bound) = shifted_row_tail(zeta, r, m);
        let cur = acc.value() + t;
        change = (cur - prev).abs();
        if change <= policy.tol {
            return Ok(WeightedLogValue::finite(cur, change + bound));
        }
        prev = cur;
    }
    Err(Error::TruncationNotConverged {
        change,
        tol: policy.tol,
        half_width: m,
    })
}

/// log|σ_{a,R}(z)| as log|σ_a(z)| plus the real-row ratio product.
///
/// Undefined on `aZ \ {0}`, where the ratio factors have poles.
pub fn log_modified_sigma_ratio(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    let row = log_row_ratio(spec, z, policy)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(WeightedLogValue::zero());
    }
    Ok(log_sigma(spec, z, policy)?.combine(row))
}

/// log|σ_a(z)| − α|z|²/2 evaluated at the representative of `z` in the
/// fundamental cell. The weighted modulus is lattice-periodic, so this agrees
/// with [`log_weighted_sigma`] while costing a fixed small box.
pub fn log_weighted_sigma_reduced(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    let a = spec.a();
    let cell = Complex64::new(a * (z.re / a).round(), a * (z.im / a).round());
    log_weighted_sigma(spec, z - cell, policy)
}

/// Single-pass evaluation of log|σ_{a,R}(z)| − α|z|²/2 for dense grids.
///
/// Combines [`log_weighted_sigma_reduced`] with the row ratio product summed
/// once to `3|z|/a` terms plus its analytic tail, without the doubling check.
/// Falls back to the direct sum inside the pole-exclusion radius of `aZ`.
pub fn log_weighted_modified_sigma_fast(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<WeightedLogValue> {
    if near_real_pole(spec, z).is_some() {
        return log_weighted_modified_sigma(spec, z, policy);
    }
    let base = log_weighted_sigma_reduced(spec, z, policy)?;
    if base.at_zero {
        // z ∈ Λ; only the origin and off-row points are zeros of σ_{a,R}
        // there, and the pole check above has excluded the rest.
        return Ok(base);
    }
    let zeta = scaled(spec, z);
    let r = spec.r_shift();
    let m = initial_half_width(policy, zeta.norm());
    let mut acc = CompensatedSum::new();
    if row_ratio_range(zeta, r, 1, m, &mut acc).is_none() {
        return Ok(WeightedLogValue::zero());
    }
    let (t, bound) = shifted_row_tail(zeta, r, m);
    Ok(base.combine(WeightedLogValue::finite(acc.value() + t, bound)))
}

/// log ψ_R(z) for ψ_R(z) = Π_{m≥1} |(m+R−z)/(m−z)| · m/(m+R).
pub fn psi(r: f64, z: Complex64, policy: &TruncationPolicy) -> Result<WeightedLogValue> {
    require(r.is_finite() && r >= 0.0, "R", "R >= 0", r)?;
    let k_max = (2.0 * z.norm() + 2.0).floor() as i64;
    let k = z.re.round();
    if k >= 1.0 && (k as i64) <= k_max && (z - Complex64::new(k, 0.0)).norm() < POLE_EXCLUSION {
        return Err(Error::DomainPole { z, pole: k });
    }
    if r == 0.0 {
        return Ok(WeightedLogValue::finite(0.0, 0.0));
    }

    let term = |m: usize| -> f64 {
        let mf = m as f64;
        let log_num = if z.im == 0.0 {
            let u = r / (mf - z.re);
            if u > -0.5 {
                u.ln_1p()
            } else {
                (mf + r - z.re).abs().ln() - (mf - z.re).abs().ln()
            }
        } else {
            let w = Complex64::new(mf, 0.0) - z;
            let d = w.norm_sqr();
            let u = Complex64::new(r * w.re / d, -r * w.im / d);
            let m2 = u.norm_sqr();
            if m2 < 0.25 {
                0.5 * (2.0 * u.re + m2).ln_1p()
            } else {
                (w + r).norm().ln() - w.norm().ln()
            }
        };
        log_num - (r / mf).ln_1p()
    };
    let range = |from: usize, to: usize, acc: &mut CompensatedSum| -> Option<()> {
        for m in from..=to {
            let t = term(m);
            if t == f64::NEG_INFINITY {
                return None;
            }
            acc.add(t);
        }
        Some(())
    };
    // Σ_{m>n} log-factor = Re Σ_{k≥2} (z^k − (z−R)^k + (−R)^k) ζ(k, n+1) / k
    let tail = |n: usize| -> (f64, f64) {
        let q = n as f64 + 1.0;
        let shifted = z - r;
        let neg_r = Complex64::new(-r, 0.0);
        let rho = (z.norm() + r) / q;
        let (mut pz, mut ps, mut pr) = (z, shifted, neg_r);
        let mut acc = 0.0;
        for k in 2..=120u32 {
            pz *= z;
            ps *= shifted;
            pr *= neg_r;
            let bound = rho.powi(k as i32) * q;
            if bound < SERIES_CUTOFF {
                return (acc, bound);
            }
            let c = (pz - ps) + pr;
            acc += c.re * hurwitz_zeta(k, q) / f64::from(k);
        }
        (acc, rho.powi(121) * q)
    };

    let mut acc = CompensatedSum::new();
    let mut m = initial_half_width(policy, z.norm() + r);
    if range(1, m, &mut acc).is_none() {
        return Ok(WeightedLogValue::zero());
    }
    let mut prev = acc.value() + tail(m).0;
    let mut change = f64::INFINITY;
    for _ in 0..policy.max_doublings {
        let next = 2 * m;
        if range(m + 1, next, &mut acc).is_none() {
            return Ok(WeightedLogValue::zero());
        }
        m = next;
        let (t, bound) = tail(m);
        let cur = acc.value() + t;
        change = (cur - prev).abs();
        if change <= policy.tol {
            return Ok(WeightedLogValue::finite(cur, change + bound));
        }
        prev = cur;
    }
    Err(Error::TruncationNotConverged {
        change,
        tol: policy.tol,
        half_width: m,
    })
}

/// M_R = Σ_{m≥1} R(2m+R)/(m²(m+R)²), with the Hurwitz-zeta tail added.
pub fn m_r_constant(r: f64, tol: f64) -> Result<f64> {
    require(r.is_finite() && r > 0.0, "R", "R > 0", r)?;
    require(tol.is_finite() && tol > 0.0, "tol", "tol > 0", tol)?;
    let partial = |n: usize| -> f64 {
        let mut acc = CompensatedSum::new();
        for m in 1..=n {
            let mf = m as f64;
            acc.add(r * (2.0 * mf + r) / (mf * mf * (mf + r) * (mf + r)));
        }
        acc.add(shifted_square_tail(r, n));
        acc.value()
    };
    let mut n = 16;
    let mut prev = partial(n);
    loop {
        n *= 2;
        let cur = partial(n);
        if (cur - prev).abs() <= tol || n >= 1 << 20 {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Σ_{0<|m|≤M} (1/(2w_m²) − 1/(2z_m²)) over the real row, which tends to
/// −M_R / a².
pub fn hadamard_partial_sum(spec: &LatticeSpec, m_max: usize) -> f64 {
    let a = spec.a();
    let r = spec.r_shift();
    let mut acc = CompensatedSum::new();
    for m in 1..=m_max {
        let zm = a * m as f64;
        let wm = a * (m as f64 + r);
        // ±m contribute equally
        acc.add(1.0 / (wm * wm) - 1.0 / (zm * zm));
    }
    acc.value()
}
