//! The square lattice Λ = {a(m+in)} and its real-row perturbation Λ_R.
//!
//! In Λ_R every nonzero point on the real axis is pushed outward by `a·R`;
//! all other points, including the origin, are left alone.

use num_complex::Complex64;

use crate::error::{require, Result};

/// Relative tolerance for the stored pitch against `sqrt(pi/alpha)`.
const PITCH_TOLERANCE: f64 = 1e-12;

/// The triple (α, a, R) generating Λ and Λ_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    alpha: f64,
    a: f64,
    r_shift: f64,
}

impl LatticeSpec {
    /// Builds a spec with the critical pitch `a = sqrt(pi / alpha)`.
    pub fn new(alpha: f64, r_shift: f64) -> Result<Self> {
        require(alpha.is_finite() && alpha > 0.0, "alpha", "alpha > 0", alpha)?;
        require(
            r_shift.is_finite() && r_shift > 0.0,
            "r_shift",
            "r_shift > 0",
            r_shift,
        )?;
        Ok(Self {
            alpha,
            a: (std::f64::consts::PI / alpha).sqrt(),
            r_shift,
        })
    }

    /// Builds a spec from an explicitly supplied pitch, rejecting any pitch
    /// that is not `sqrt(pi / alpha)` to within 1e-12 relative.
    pub fn with_pitch(alpha: f64, a: f64, r_shift: f64) -> Result<Self> {
        let spec = Self::new(alpha, r_shift)?;
        require(
            a.is_finite() && ((a - spec.a) / spec.a).abs() <= PITCH_TOLERANCE,
            "a",
            "a = sqrt(pi / alpha)",
            a,
        )?;
        Ok(spec)
    }

    /// The critical-density spec for pitch `a`: α = π / a².
    pub fn from_pitch(a: f64, r_shift: f64) -> Result<Self> {
        require(a.is_finite() && a > 0.0, "a", "a > 0", a)?;
        let mut spec = Self::new(std::f64::consts::PI / (a * a), r_shift)?;
        spec.a = a;
        Ok(spec)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Lattice pitch.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn r_shift(&self) -> f64 {
        self.r_shift
    }

    /// Same α and pitch, different shift.
    pub fn with_shift(&self, r_shift: f64) -> Result<Self> {
        require(
            r_shift.is_finite() && r_shift > 0.0,
            "r_shift",
            "r_shift > 0",
            r_shift,
        )?;
        Ok(Self { r_shift, ..*self })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeIndex {
    pub m: i64,
    pub n: i64,
}

impl LatticeIndex {
    pub fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }
}

/// Which of the two point sets to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// The square lattice Λ.
    Square,
    /// The perturbed lattice Λ_R.
    Perturbed,
}

impl Variant {
    pub fn is_perturbed(self) -> bool {
        matches!(self, Variant::Perturbed)
    }
}

/// The points of Λ or Λ_R inside an open disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Complex64>,
    pub variant: Variant,
    pub center: Complex64,
    pub radius: f64,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Real-row point of Λ_R for index `m` (m ≠ 0): a(m + R·sign m).
#[inline]
pub(crate) fn shifted_row_point(a: f64, r: f64, m: i64) -> f64 {
    let mf = m as f64;
    a * (mf + r * mf.signum())
}

/// z_{m,n} for Λ, w_{m,n} for Λ_R.
pub fn lattice_point(spec: &LatticeSpec, idx: LatticeIndex, variant: Variant) -> Complex64 {
    let a = spec.a;
    if variant.is_perturbed() && idx.n == 0 && idx.m != 0 {
        Complex64::new(shifted_row_point(a, spec.r_shift, idx.m), 0.0)
    } else {
        Complex64::new(a * idx.m as f64, a * idx.n as f64)
    }
}

/// Half-width of the index box that is guaranteed to contain every point of
/// the disk, including row points shifted in from outside the naive box.
fn scan_half_width(spec: &LatticeSpec, center: Complex64, rho: f64) -> i64 {
    ((center.norm() + rho) / spec.a).ceil() as i64 + spec.r_shift.ceil() as i64 + 1
}

/// Lattice points strictly inside the open disk D(center, rho).
pub fn points_in_disk(
    spec: &LatticeSpec,
    center: Complex64,
    rho: f64,
    variant: Variant,
) -> Result<PointSet> {
    require(rho.is_finite() && rho > 0.0, "rho", "rho > 0", rho)?;
    let a = spec.a;
    let rho2 = rho * rho;
    let mut points = Vec::new();

    // Rows n ≠ 0 and, for Λ, the real row, are a plain square grid: only scan
    // the index ranges that can intersect the disk.
    let n_lo = ((center.im - rho) / a).floor() as i64;
    let n_hi = ((center.im + rho) / a).ceil() as i64;
    for n in n_lo..=n_hi {
        if n == 0 && variant.is_perturbed() {
            continue;
        }
        let y = a * n as f64 - center.im;
        let rem = rho2 - y * y;
        if rem <= 0.0 {
            continue;
        }
        let half = rem.sqrt();
        let m_lo = ((center.re - half) / a).floor() as i64;
        let m_hi = ((center.re + half) / a).ceil() as i64;
        for m in m_lo..=m_hi {
            let p = Complex64::new(a * m as f64, a * n as f64);
            if (p - center).norm_sqr() < rho2 {
                points.push(p);
            }
        }
    }

    if variant.is_perturbed() && center.im.abs() < rho {
        let bound = scan_half_width(spec, center, rho);
        for m in -bound..=bound {
            let p = lattice_point(spec, LatticeIndex::new(m, 0), Variant::Perturbed);
            if (p - center).norm_sqr() < rho2 {
                points.push(p);
            }
        }
    }

    Ok(PointSet {
        points,
        variant,
        center,
        radius: rho,
    })
}

/// N(center, rho): number of points in the open disk.
pub fn counting_function(
    spec: &LatticeSpec,
    center: Complex64,
    rho: f64,
    variant: Variant,
) -> Result<usize> {
    points_in_disk(spec, center, rho, variant).map(|s| s.len())
}

/// Brute-force count over the full index box; the reference for
/// [`counting_function`].
pub fn counting_function_brute_force(
    spec: &LatticeSpec,
    center: Complex64,
    rho: f64,
    variant: Variant,
) -> Result<usize> {
    require(rho.is_finite() && rho > 0.0, "rho", "rho > 0", rho)?;
    let bound = scan_half_width(spec, center, rho);
    let rho2 = rho * rho;
    let mut count = 0;
    for m in -bound..=bound {
        for n in -bound..=bound {
            let p = lattice_point(spec, LatticeIndex::new(m, n), variant);
            if (p - center).norm_sqr() < rho2 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Euclidean distance from `z` to the nearest point of Λ or Λ_R.
pub fn distance_to_lattice(spec: &LatticeSpec, z: Complex64, variant: Variant) -> f64 {
    let a = spec.a;
    let (u, v) = (z.re / a, z.im / a);
    match variant {
        Variant::Square => {
            let p = Complex64::new(a * u.round(), a * v.round());
            (z - p).norm()
        }
        Variant::Perturbed => {
            let r = spec.r_shift;
            let mut best = f64::INFINITY;
            // Off-axis rows are unperturbed: the nearest point on each of the
            // two rows bracketing Im z, skipping the real row.
            let n_lo = v.floor() as i64;
            for n in [n_lo - 1, n_lo, n_lo + 1, n_lo + 2] {
                if n == 0 {
                    continue;
                }
                let p = Complex64::new(a * u.round(), a * n as f64);
                best = best.min((z - p).norm());
            }
            // Real row: origin plus the shifted points bracketing Re z.
            best = best.min(z.norm());
            // Shifted row points sit at a(k+R), k ≥ 1, and mirror images.
            let x = u.abs();
            let k_lo = ((x - r).floor() as i64).max(1);
            for k in [k_lo, k_lo + 1] {
                let p = a * (k as f64 + r);
                let dx = a * x - p;
                best = best.min(dx.hypot(z.im));
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn unit(r: f64) -> LatticeSpec {
        LatticeSpec::from_pitch(1.0, r).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(LatticeSpec::new(0.0, 1.0).is_err());
        assert!(LatticeSpec::new(1.0, 0.0).is_err());
        assert!(LatticeSpec::new(-1.0, 1.0).is_err());
        match LatticeSpec::new(std::f64::consts::PI, 0.0) {
            Err(Error::InvalidParameter { requirement, .. }) => assert_eq!(requirement, "r_shift > 0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pitch_is_critical() {
        let spec = LatticeSpec::new(std::f64::consts::PI, 0.5).unwrap();
        assert_eq!(spec.a(), 1.0);
        let spec = LatticeSpec::new(2.0, 0.5).unwrap();
        assert!((spec.a() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-15);
        assert!(LatticeSpec::with_pitch(2.0, spec.a() * (1.0 + 1e-13), 0.5).is_ok());
        assert!(LatticeSpec::with_pitch(2.0, spec.a() * (1.0 + 1e-9), 0.5).is_err());
    }

    #[test]
    fn lattice_point_examples() {
        let spec = unit(0.5);
        let p = lattice_point(&spec, LatticeIndex::new(1, 2), Variant::Perturbed);
        assert_eq!(p, c(1.0, 2.0));
        let p = lattice_point(&spec, LatticeIndex::new(0, 0), Variant::Perturbed);
        assert_eq!(p, c(0.0, 0.0));
        let p = lattice_point(&spec, LatticeIndex::new(-3, 0), Variant::Perturbed);
        assert_eq!(p, c(-3.5, 0.0));
        let p = lattice_point(&spec, LatticeIndex::new(-3, 0), Variant::Square);
        assert_eq!(p, c(-3.0, 0.0));
    }

    #[test]
    fn points_in_disk_examples() {
        let sq = points_in_disk(&unit(1.0), c(0.0, 0.0), 1.5, Variant::Square).unwrap();
        assert_eq!(sq.len(), 9);
        let pert = points_in_disk(&unit(1.0), c(0.0, 0.0), 1.5, Variant::Perturbed).unwrap();
        assert_eq!(pert.len(), 7);
        assert!(!pert.points.contains(&c(1.0, 0.0)));
        assert!(!pert.points.contains(&c(-1.0, 0.0)));
        for r in [0.3, 1.0, 2.7] {
            let s = points_in_disk(&unit(r), c(0.0, 0.0), 0.25, Variant::Perturbed).unwrap();
            assert_eq!(s.points, vec![c(0.0, 0.0)]);
        }
        assert!(points_in_disk(&unit(1.0), c(0.0, 0.0), 0.0, Variant::Square).is_err());
    }

    #[test]
    fn open_disk_excludes_boundary() {
        let n = counting_function(&unit(1.0), c(0.0, 0.0), 1.0, Variant::Square).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn counting_examples() {
        assert_eq!(counting_function(&unit(1.0), c(0.0, 0.0), 1.5, Variant::Square).unwrap(), 9);
        assert_eq!(counting_function(&unit(1.0), c(0.0, 0.0), 1.5, Variant::Perturbed).unwrap(), 7);
        assert_eq!(counting_function(&unit(1.0), c(0.5, 0.5), 0.1, Variant::Square).unwrap(), 0);
    }

    #[test]
    fn distance_examples() {
        let spec = unit(1.0);
        assert!((distance_to_lattice(&spec, c(0.5, 0.0), Variant::Square) - 0.5).abs() < 1e-15);
        assert!(
            (distance_to_lattice(&spec, c(0.5, 0.5), Variant::Square) - 0.5f64.sqrt()).abs() < 1e-15
        );
        assert!((distance_to_lattice(&spec, c(1.0, 0.0), Variant::Perturbed) - 1.0).abs() < 1e-15);
        assert_eq!(distance_to_lattice(&spec, c(2.0, 0.0), Variant::Perturbed), 0.0);
    }

    #[test]
    fn integer_shift_removes_row_points() {
        for r in 1..=3 {
            let spec = unit(r as f64);
            let sq = points_in_disk(&spec, c(0.3, -0.2), 7.3, Variant::Square).unwrap();
            let pert = points_in_disk(&spec, c(0.3, -0.2), 7.3, Variant::Perturbed).unwrap();
            let removed: Vec<Complex64> = (1..=r)
                .flat_map(|m| [c(m as f64, 0.0), c(-(m as f64), 0.0)])
                .collect();
            let mut expected: Vec<_> = sq
                .points
                .iter()
                .filter(|p| !removed.contains(p))
                .map(|p| (p.re.to_bits(), p.im.to_bits()))
                .collect();
            let mut got: Vec<_> = pert.points.iter().map(|p| (p.re.to_bits(), p.im.to_bits())).collect();
            expected.sort_unstable();
            got.sort_unstable();
            assert_eq!(got, expected, "R = {r}");
        }
    }
}
