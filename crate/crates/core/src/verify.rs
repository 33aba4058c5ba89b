//! Ratio scans for the comparability estimates, and the exact identities.
//!
//! A scan evaluates the log of a ratio between a computed left-hand side and
//! a distance-based right-hand side at quasi-random points in a list of
//! annuli. Boundedness is read off the global spread; the absence of drift
//! from the medians of inner and outer annuli.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{require, Error, Result};
use crate::exec::map_indexed;
use crate::lattice::{distance_to_lattice, LatticeSpec, Variant};
use crate::sigma::{
    log_modified_sigma_direct, log_modified_sigma_ratio, log_row_ratio, log_weighted_modified_sigma,
    log_weighted_sigma, m_r_constant, hadamard_partial_sum, psi, TruncationPolicy,
};

/// Partial-sum length for the Hadamard correction check.
pub const HADAMARD_TERMS: usize = 10_000;

/// Quasi-random sample layout: `points_per_annulus` Halton points per
/// annulus, area-uniform, with a seeded Cranley–Patterson shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub annuli: Vec<(f64, f64)>,
    pub points_per_annulus: usize,
    pub exclusion_radius: f64,
    pub seed: u64,
}

/// One scanned point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub index: usize,
    pub annulus: usize,
    pub z: Complex64,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

fn annulus_shift(seed: u64, k: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (rng.gen::<f64>(), rng.gen::<f64>())
}

impl ScanGrid {
    pub fn new(annuli: Vec<(f64, f64)>, points_per_annulus: usize, exclusion_radius: f64, seed: u64) -> Result<Self> {
        require(points_per_annulus > 0, "points_per_annulus", "points_per_annulus > 0", 0.0)?;
        require(
            exclusion_radius.is_finite() && exclusion_radius >= 0.0,
            "exclusion_radius",
            "exclusion_radius >= 0",
            exclusion_radius,
        )?;
        for &(lo, hi) in &annuli {
            require(lo >= 0.0 && hi > lo, "annulus", "0 <= r_in < r_out", lo)?;
        }
        for w in annuli.windows(2) {
            require(w[1].0 >= w[0].1, "annuli", "disjoint and increasing", w[1].0)?;
        }
        Ok(Self {
            annuli,
            points_per_annulus,
            exclusion_radius,
            seed,
        })
    }

    /// Same annuli and seed with a different point count. The Halton prefix
    /// property makes the smaller grid a subset of the larger one.
    pub fn with_points(&self, points_per_annulus: usize) -> Self {
        Self {
            points_per_annulus,
            ..self.clone()
        }
    }

    pub fn with_exclusion(&self, exclusion_radius: f64) -> Self {
        Self {
            exclusion_radius,
            ..self.clone()
        }
    }

    fn check_exclusion(&self, a: f64) -> Result<()> {
        require(
            self.exclusion_radius < 0.5 * a,
            "exclusion_radius",
            "exclusion_radius < a/2",
            self.exclusion_radius,
        )
    }

    /// All points, annulus by annulus.
    pub fn points(&self) -> Vec<ScanPoint> {
        let mut out = Vec::with_capacity(self.annuli.len() * self.points_per_annulus);
        for (k, &(lo, hi)) in self.annuli.iter().enumerate() {
            let (su, sv) = annulus_shift(self.seed, k);
            for i in 0..self.points_per_annulus {
                let u = (radical_inverse(i as u64 + 1, 2) + su).fract();
                let v = (radical_inverse(i as u64 + 1, 3) + sv).fract();
                let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
                out.push(ScanPoint {
                    index: out.len(),
                    annulus: k,
                    z: Complex64::from_polar(r, std::f64::consts::TAU * v),
                });
            }
        }
        out
    }

    /// Standard layout over [0.5, 25]: seven annuli including [5, 10] and
    /// [20, 25], 300 points each.
    pub fn standard(seed: u64) -> Self {
        Self {
            annuli: vec![
                (0.5, 1.0),
                (1.0, 2.5),
                (2.5, 5.0),
                (5.0, 10.0),
                (10.0, 15.0),
                (15.0, 20.0),
                (20.0, 25.0),
            ],
            points_per_annulus: 300,
            exclusion_radius: 0.05,
            seed,
        }
    }
}

/// Log-ratio at one used point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub z: Complex64,
    pub log_ratio: f64,
    pub err_est: f64,
}

/// Statistics of the ratio on one annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusStats {
    pub r_in: f64,
    pub r_out: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub n_used: usize,
}

/// Spread and per-annulus statistics of a positive ratio over a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub global_min: f64,
    pub global_max: f64,
    pub per_annulus: Vec<AnnulusStats>,
    pub n_points_used: usize,
    pub n_points_excluded: usize,
    pub samples: Vec<Sample>,
}

impl RatioReport {
    /// global_max / global_min.
    pub fn spread(&self) -> f64 {
        self.global_max / self.global_min
    }

    /// Median on the annulus with exactly these bounds.
    pub fn median_on(&self, r_in: f64, r_out: f64) -> Option<f64> {
        self.per_annulus
            .iter()
            .find(|s| s.r_in == r_in && s.r_out == r_out)
            .map(|s| s.median)
    }

    /// max(m₁/m₂, m₂/m₁) for the medians of two annuli.
    pub fn median_drift(&self, inner: (f64, f64), outer: (f64, f64)) -> Option<f64> {
        let a = self.median_on(inner.0, inner.1)?;
        let b = self.median_on(outer.0, outer.1)?;
        Some((a / b).max(b / a))
    }

    /// Builds the report from per-point results; `None` marks an excluded
    /// point. Points are reduced in index order.
    pub fn from_samples(grid: &ScanGrid, points: &[ScanPoint], values: Vec<Option<(f64, f64)>>) -> Self {
        let mut samples = Vec::new();
        let mut per: Vec<Vec<f64>> = vec![Vec::new(); grid.annuli.len()];
        let mut excluded = 0;
        for (p, v) in points.iter().zip(values) {
            match v {
                Some((log_ratio, err_est)) => {
                    per[p.annulus].push(log_ratio);
                    samples.push(Sample {
                        index: p.index,
                        z: p.z,
                        log_ratio,
                        err_est,
                    });
                }
                None => excluded += 1,
            }
        }
        let per_annulus: Vec<AnnulusStats> = grid
            .annuli
            .iter()
            .zip(per)
            .filter(|(_, v)| !v.is_empty())
            .map(|(&(r_in, r_out), mut v)| {
                v.sort_by(f64::total_cmp);
                AnnulusStats {
                    r_in,
                    r_out,
                    min: v[0].exp(),
                    median: median_sorted(&v).exp(),
                    max: v[v.len() - 1].exp(),
                    n_used: v.len(),
                }
            })
            .collect();
        let lo = samples.iter().map(|s| s.log_ratio).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.log_ratio).fold(f64::NEG_INFINITY, f64::max);
        Self {
            global_min: lo.exp(),
            global_max: hi.exp(),
            per_annulus,
            n_points_used: samples.len(),
            n_points_excluded: excluded,
            samples,
        }
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs `log_ratio` over the grid, skipping points where `dist` is at most
/// the exclusion radius.
fn scan<D, F>(grid: &ScanGrid, dist: D, log_ratio: F) -> Result<RatioReport>
where
    D: Fn(Complex64) -> f64 + Sync + Send,
    F: Fn(Complex64) -> Result<(f64, f64)> + Sync + Send,
{
    let points = grid.points();
    let values = map_indexed(points.len(), |i| {
        let z = points[i].z;
        if dist(z) <= grid.exclusion_radius {
            Ok(None)
        } else {
            log_ratio(z).map(Some)
        }
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_samples(grid, &points, values))
}

/// Distance to Λ ∪ Λ_R.
pub fn distance_to_union(spec: &LatticeSpec, z: Complex64) -> f64 {
    distance_to_lattice(spec, z, Variant::Square).min(distance_to_lattice(spec, z, Variant::Perturbed))
}

/// log of |σ_a(z)| e^{−α|z|²/2} / d(z, Λ).
pub fn sigma_distance_log_ratio(spec: &LatticeSpec, z: Complex64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    let v = log_weighted_sigma(spec, z, policy)?;
    Ok((v.log_mag - distance_to_lattice(spec, z, Variant::Square).ln(), v.err_est))
}

/// log of |σ_{a,R}(z)| e^{−α|z|²/2} (1+|z|)^{2R} / d(z, Λ_R); without the
/// growth factor when `normalized` is false.
pub fn lemma1_log_ratio(
    spec: &LatticeSpec,
    z: Complex64,
    policy: &TruncationPolicy,
    normalized: bool,
) -> Result<(f64, f64)> {
    let v = log_weighted_modified_sigma(spec, z, policy)?;
    let growth = if normalized {
        2.0 * spec.r_shift() * z.norm().ln_1p()
    } else {
        0.0
    };
    Ok((
        v.log_mag + growth - distance_to_lattice(spec, z, Variant::Perturbed).ln(),
        v.err_est,
    ))
}

/// log of the real-row ratio product divided by
/// d(z,Λ_R) / (d(z,Λ) (1+|z|)^{2R}).
pub fn ratio_product_log_ratio(spec: &LatticeSpec, z: Complex64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    let row = log_row_ratio(spec, z, policy)?;
    let rhs = distance_to_lattice(spec, z, Variant::Perturbed).ln()
        - distance_to_lattice(spec, z, Variant::Square).ln()
        - 2.0 * spec.r_shift() * z.norm().ln_1p();
    Ok((row.log_mag - rhs, row.err_est))
}

/// Distance from `z` to {m + shift : m = 0, 1, 2, …}.
pub fn distance_to_half_row(z: Complex64, shift: f64) -> f64 {
    let x = (z.re - shift).round().max(0.0);
    (z - Complex64::new(x + shift, 0.0)).norm()
}

/// log of ψ_R(z) divided by d(z, Z⁺_R) / (d(z, Z⁺) (1+|z|)^R).
pub fn psi_log_ratio(r: f64, z: Complex64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    let v = psi(r, z, policy)?;
    let rhs = distance_to_half_row(z, r).ln() - distance_to_half_row(z, 0.0).ln() - r * z.norm().ln_1p();
    Ok((v.log_mag - rhs, v.err_est))
}

/// |σ_a(z)| e^{−α|z|²/2} against d(z, Λ).
pub fn check_sigma_distance(spec: &LatticeSpec, grid: &ScanGrid, policy: &TruncationPolicy) -> Result<RatioReport> {
    grid.check_exclusion(spec.a())?;
    scan(
        grid,
        |z| distance_to_lattice(spec, z, Variant::Square),
        |z| sigma_distance_log_ratio(spec, z, policy),
    )
}

/// |σ_{a,R}(z)| e^{−α|z|²/2} against d(z, Λ_R) / (1+|z|)^{2R}.
pub fn check_lemma1(spec: &LatticeSpec, grid: &ScanGrid, policy: &TruncationPolicy) -> Result<RatioReport> {
    lemma1_scan(spec, grid, policy, true)
}

/// The same scan with the (1+|z|)^{2R} factor left out. Its medians should
/// drift; used as a negative control for the drift test.
pub fn check_lemma1_without_growth_factor(
    spec: &LatticeSpec,
    grid: &ScanGrid,
    policy: &TruncationPolicy,
) -> Result<RatioReport> {
    lemma1_scan(spec, grid, policy, false)
}

fn lemma1_scan(spec: &LatticeSpec, grid: &ScanGrid, policy: &TruncationPolicy, normalized: bool) -> Result<RatioReport> {
    grid.check_exclusion(spec.a())?;
    scan(
        grid,
        |z| distance_to_lattice(spec, z, Variant::Perturbed),
        |z| lemma1_log_ratio(spec, z, policy, normalized),
    )
}

/// ψ_R(z) against d(z, Z⁺_R) / (d(z, Z⁺)(1+|z|)^R), where Z⁺ = {0, 1, 2, …}
/// and Z⁺_R = Z⁺ + R. Points near either set are excluded.
pub fn check_psi_claim(r: f64, grid: &ScanGrid, policy: &TruncationPolicy) -> Result<RatioReport> {
    require(r.is_finite() && r > 0.0, "R", "R > 0", r)?;
    grid.check_exclusion(1.0)?;
    scan(
        grid,
        |z| distance_to_half_row(z, 0.0).min(distance_to_half_row(z, r)),
        |z| psi_log_ratio(r, z, policy),
    )
}

/// Real-row ratio product against d(z,Λ_R) / (d(z,Λ)(1+|z|)^{2R}). Points
/// near Λ ∪ Λ_R, which covers the poles on aZ, are excluded.
pub fn check_ratio_product(spec: &LatticeSpec, grid: &ScanGrid, policy: &TruncationPolicy) -> Result<RatioReport> {
    grid.check_exclusion(spec.a())?;
    scan(
        grid,
        |z| distance_to_union(spec, z),
        |z| ratio_product_log_ratio(spec, z, policy),
    )
}

/// Largest |lemma1 − (sigma_distance + ratio_product)| over points used by
/// all three reports, minus the summed error estimates. Also returns the
/// number of shared points.
pub fn cross_identity_excess(lemma1: &RatioReport, sigma: &RatioReport, ratio: &RatioReport) -> (f64, usize) {
    use std::collections::HashMap;
    let by_index = |r: &RatioReport| -> HashMap<usize, Sample> { r.samples.iter().map(|s| (s.index, *s)).collect() };
    let s = by_index(sigma);
    let q = by_index(ratio);
    let mut worst = f64::NEG_INFINITY;
    let mut shared = 0;
    for l in &lemma1.samples {
        if let (Some(a), Some(b)) = (s.get(&l.index), q.get(&l.index)) {
            shared += 1;
            let gap = (l.log_ratio - a.log_ratio - b.log_ratio).abs() - (l.err_est + a.err_est + b.err_est);
            worst = worst.max(gap);
        }
    }
    (worst, shared)
}

/// Largest |log ψ_R(z) − log[ψ_β(z − N) Π_{m=1}^{N} (m+β)/|m−z|]| over the
/// samples, with N = ⌊R⌋ and β = R − N.
pub fn check_reduction_identity(r: f64, samples: &[Complex64], policy: &TruncationPolicy) -> Result<f64> {
    require(r.is_finite() && r >= 1.0, "R", "R >= 1", r)?;
    let n = r.floor();
    let beta = r - n;
    let mut worst: f64 = 0.0;
    for &z in samples {
        let k = z.re.round();
        if k >= 0.0 && (z - Complex64::new(k, 0.0)).norm() < 1e-6 {
            return Err(Error::DomainPole { z, pole: k });
        }
        let lhs = psi(r, z, policy)?.log_mag;
        let mut rhs = psi(beta, z - n, policy)?.log_mag;
        for m in 1..=(n as usize) {
            let mf = m as f64;
            rhs += (mf + beta).ln() - (Complex64::new(mf, 0.0) - z).norm().ln();
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// |Σ_{m=1}^{10⁴} (1/w_m² − 1/z_m²) + M_R/a²|.
pub fn check_hadamard_correction(spec: &LatticeSpec, policy: &TruncationPolicy) -> Result<f64> {
    let m_r = m_r_constant(spec.r_shift(), policy.tol.min(1e-12))?;
    let a = spec.a();
    Ok((hadamard_partial_sum(spec, HADAMARD_TERMS) + m_r / (a * a)).abs())
}

/// Difference between the direct and the ratio evaluation of log|σ_{a,R}|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodComparison {
    pub z: Complex64,
    pub direct: f64,
    pub ratio: f64,
    pub err_sum: f64,
}

impl MethodComparison {
    pub fn abs_diff(&self) -> f64 {
        (self.direct - self.ratio).abs()
    }
}

/// `n` seeded points uniform in the disk |z| ≤ radius, keeping only those at
/// distance more than `min_dist` from aZ.
pub fn seeded_disk_points(spec: &LatticeSpec, n: usize, radius: f64, min_dist: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = spec.a();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        let real_row = (z - Complex64::new(a * (z.re / a).round(), 0.0)).norm();
        if z.norm() <= radius && real_row > min_dist {
            out.push(z);
        }
    }
    out
}

/// Direct and ratio evaluations of log|σ_{a,R}| at each point.
pub fn compare_methods(
    spec: &LatticeSpec,
    points: &[Complex64],
    policy: &TruncationPolicy,
) -> Result<Vec<MethodComparison>> {
    map_indexed(points.len(), |i| {
        let z = points[i];
        let d = log_modified_sigma_direct(spec, z, policy)?;
        let r = log_modified_sigma_ratio(spec, z, policy)?;
        Ok(MethodComparison {
            z,
            direct: d.log_mag,
            ratio: r.log_mag,
            err_sum: d.err_est + r.err_est,
        })
    })
    .into_iter()
    .collect()
}
