//! Weighted L^p mass of σ_{a,R} on annuli and the dyadic growth fit.
//!
//! The norm ‖f‖^p = ∫ |f|^p dA_{pα/2}, with dA_β = (β/π) e^{−β|z|²} dA, is
//! integrated with a midpoint product rule in polar coordinates. Radial panels
//! sit on one global grid of step `radial_step · a` and each panel's angular
//! count depends only on the panel, so masses of adjacent annuli add up to the
//! mass of their union.

use num_complex::Complex64;

use crate::error::{require, Error, Result};
use crate::exec::map_indexed;
use crate::lattice::LatticeSpec;
use crate::sigma::{log_weighted_modified_sigma_fast, TruncationPolicy};
use crate::summation::CompensatedSum;

/// Relative change under 2× refinement above which a mass is flagged.
pub const UNDER_RESOLVED_THRESHOLD: f64 = 0.05;

/// Half-width of the no-decision band around slope 0.
pub const BORDERLINE_BAND: f64 = 0.3;

/// Radius, in units of `a`, from which annuli enter the growth fit.
pub const FIT_START: f64 = 4.0;

/// Polar midpoint-rule resolution. Steps are in units of the lattice pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    radial_step: f64,
    angular_step: f64,
    angular_offset: f64,
    check_refinement: bool,
}

impl QuadratureSpec {
    /// Both steps must lie in (0, 1/8] so one lattice cell spans at least
    /// eight panels each way.
    pub fn new(radial_step: f64, angular_step: f64) -> Result<Self> {
        require(
            radial_step > 0.0 && radial_step <= 0.125,
            "radial_step",
            "0 < radial_step <= a/8",
            radial_step,
        )?;
        require(
            angular_step > 0.0 && angular_step <= 0.125,
            "angular_step",
            "0 < angular_step <= a/8",
            angular_step,
        )?;
        Ok(Self {
            radial_step,
            angular_step,
            angular_offset: 0.0,
            check_refinement: true,
        })
    }

    /// Rotates every angular node by `offset` radians.
    pub fn with_offset(mut self, offset: f64) -> Self {
        self.angular_offset = offset;
        self
    }

    /// Toggles the 2× refinement check behind the under-resolution flag.
    pub fn with_refinement_check(mut self, on: bool) -> Self {
        self.check_refinement = on;
        self
    }

    pub fn radial_step(&self) -> f64 {
        self.radial_step
    }

    pub fn angular_step(&self) -> f64 {
        self.angular_step
    }

    pub fn angular_offset(&self) -> f64 {
        self.angular_offset
    }

    pub fn checks_refinement(&self) -> bool {
        self.check_refinement
    }

    /// Same rule with both steps halved.
    pub fn refined(&self) -> Self {
        Self {
            radial_step: 0.5 * self.radial_step,
            angular_step: 0.5 * self.angular_step,
            ..*self
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_step: 0.125,
            angular_step: 0.125,
            angular_offset: 0.0,
            check_refinement: true,
        }
    }
}

/// One radial panel, possibly clipped by the annulus.
#[derive(Debug, Clone, Copy)]
struct Panel {
    r_lo: f64,
    r_hi: f64,
    n_theta: usize,
}

fn grid_index(r: f64, h: f64, up: bool) -> usize {
    let x = r / h;
    let near = x.round();
    if (x - near).abs() <= 1e-9 * near.max(1.0) {
        near as usize
    } else if up {
        x.ceil() as usize
    } else {
        x.floor() as usize
    }
}

fn panels(a: f64, r_in: f64, r_out: f64, quad: &QuadratureSpec) -> Vec<Panel> {
    let h = quad.radial_step * a;
    let arc = quad.angular_step * a;
    let lo = grid_index(r_in, h, false);
    let hi = grid_index(r_out, h, true);
    (lo..hi)
        .filter_map(|k| {
            let r_lo = (k as f64 * h).max(r_in);
            let r_hi = ((k + 1) as f64 * h).min(r_out);
            if r_hi <= r_lo {
                return None;
            }
            let outer = (k + 1) as f64 * h;
            let mut n_theta = ((std::f64::consts::TAU * outer / arc).ceil() as usize).max(8);
            n_theta += n_theta % 2;
            Some(Panel { r_lo, r_hi, n_theta })
        })
        .collect()
}

/// Midpoint rule for `k` integrands at once. `f(z, out)` writes the `k`
/// values of the integrand (with respect to dA) at `z`. Panels run in
/// parallel; each panel is summed sequentially and the panel totals are
/// reduced in index order.
fn integrate_many<F>(
    a: f64,
    r_in: f64,
    r_out: f64,
    quad: &QuadratureSpec,
    k: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(Complex64, &mut [f64]) -> Result<()> + Sync + Send,
{
    if r_out <= r_in {
        return Ok(vec![0.0; k]);
    }
    let plan = panels(a, r_in, r_out, quad);
    let per_panel: Vec<Result<Vec<f64>>> = map_indexed(plan.len(), |i| {
        let panel = plan[i];
        let r = 0.5 * (panel.r_lo + panel.r_hi);
        let d_theta = std::f64::consts::TAU / panel.n_theta as f64;
        let mut sums = vec![CompensatedSum::new(); k];
        let mut buf = vec![0.0; k];
        for j in 0..panel.n_theta {
            let theta = quad.angular_offset + (j as f64 + 0.5) * d_theta;
            f(Complex64::from_polar(r, theta), &mut buf)?;
            for (s, v) in sums.iter_mut().zip(&buf) {
                s.add(*v);
            }
        }
        // ∫ r dr over the panel is exactly r_mid · Δr
        let w = r * (panel.r_hi - panel.r_lo) * d_theta;
        Ok(sums.into_iter().map(|s| s.value() * w).collect())
    });
    let mut totals = vec![CompensatedSum::new(); k];
    for panel in per_panel {
        for (t, s) in totals.iter_mut().zip(panel?) {
            t.add(s);
        }
    }
    Ok(totals.into_iter().map(|t| t.value()).collect())
}

/// ∫ f dA over the annulus r_in ≤ |z| < r_out with the grid of pitch `a`.
pub fn integrate_annulus<F>(a: f64, r_in: f64, r_out: f64, quad: &QuadratureSpec, f: F) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync + Send,
{
    require(a > 0.0, "a", "a > 0", a)?;
    require(r_in >= 0.0 && r_in <= r_out, "r_in", "0 <= r_in <= r_out", r_in)?;
    Ok(integrate_many(a, r_in, r_out, quad, 1, |z, out| {
        out[0] = f(z);
        Ok(())
    })?[0])
}

fn check_p(p: f64) -> Result<()> {
    require(p.is_finite() && p > 0.0, "p", "p > 0", p)
}

/// |σ_{a,R}(z)|^p e^{−pα|z|²/2}, formed in log space; 0 on Λ_R.
pub fn weighted_integrand(spec: &LatticeSpec, p: f64, z: Complex64, policy: &TruncationPolicy) -> Result<f64> {
    check_p(p)?;
    let v = log_weighted_modified_sigma_fast(spec, z, policy)?;
    Ok(if v.at_zero { 0.0 } else { (p * v.log_mag).exp() })
}

fn masses_for(
    spec: &LatticeSpec,
    ps: &[f64],
    r_in: f64,
    r_out: f64,
    quad: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<Vec<f64>> {
    let raw = integrate_many(spec.a(), r_in, r_out, quad, ps.len(), |z, out| {
        let v = log_weighted_modified_sigma_fast(spec, z, policy)?;
        for (o, &p) in out.iter_mut().zip(ps) {
            *o = if v.at_zero { 0.0 } else { (p * v.log_mag).exp() };
        }
        Ok(())
    })?;
    Ok(raw
        .into_iter()
        .zip(ps)
        .map(|(m, &p)| p * spec.alpha() / std::f64::consts::TAU * m)
        .collect())
}

/// (pα/2π) ∫ |σ_{a,R}|^p e^{−pα|z|²/2} dA over r_in ≤ |z| < r_out.
pub fn annulus_mass(
    spec: &LatticeSpec,
    p: f64,
    r_in: f64,
    r_out: f64,
    quad: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<f64> {
    check_p(p)?;
    require(r_in >= 0.0 && r_in <= r_out, "r_in", "0 <= r_in <= r_out", r_in)?;
    Ok(masses_for(spec, &[p], r_in, r_out, quad, policy)?[0])
}

/// Mass of one annulus, with the refinement comparison when it was run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusMass {
    pub r_in: f64,
    pub r_out: f64,
    pub mass: f64,
    /// Mass at doubled resolution, if checked.
    pub refined: Option<f64>,
}

impl AnnulusMass {
    /// |refined − mass| / refined, or 0 when unchecked.
    pub fn refinement_change(&self) -> f64 {
        match self.refined {
            Some(f) if f > 0.0 => (f - self.mass).abs() / f,
            Some(_) => 0.0,
            None => 0.0,
        }
    }

    /// Advisory flag: the 2× refined mass differs by more than 5%.
    pub fn under_resolved(&self) -> bool {
        self.refinement_change() > UNDER_RESOLVED_THRESHOLD
    }

    fn log_mid_radius(&self) -> f64 {
        0.5 * (self.r_in.ln() + self.r_out.ln())
    }
}

/// Annulus masses of one exponent p, with running totals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTrace {
    pub p: f64,
    pub annuli: Vec<AnnulusMass>,
    pub cumulative: Vec<f64>,
    /// Lattice pitch, used to pick annuli for the growth fit.
    pub a: f64,
}

impl NormTrace {
    /// Builds a trace from given masses, e.g. for synthetic checks.
    pub fn from_masses(p: f64, a: f64, annuli: Vec<AnnulusMass>) -> Self {
        let mut acc = CompensatedSum::new();
        let cumulative = annuli
            .iter()
            .map(|m| {
                acc.add(m.mass);
                acc.value()
            })
            .collect();
        Self {
            p,
            annuli,
            cumulative,
            a,
        }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn under_resolved_count(&self) -> usize {
        self.annuli.iter().filter(|m| m.under_resolved()).count()
    }
}

/// Core disk [0, a] followed by dyadic annuli [a, 2a], [2a, 4a], … with the
/// last one clipped at `rho_max`.
pub fn dyadic_ladder(a: f64, rho_max: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, a)];
    let mut r = a;
    while r < rho_max * (1.0 - 1e-12) {
        let next = (2.0 * r).min(rho_max);
        out.push((r, next));
        r = next;
    }
    out
}

/// Norm traces for several exponents from one set of σ_{a,R} evaluations.
pub fn norm_traces(
    spec: &LatticeSpec,
    ps: &[f64],
    rho_max: f64,
    quad: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<Vec<NormTrace>> {
    for &p in ps {
        check_p(p)?;
    }
    let a = spec.a();
    require(rho_max >= FIT_START * a, "rho_max", "rho_max >= 4a", rho_max)?;
    let fine = quad.refined();
    let mut per_p: Vec<Vec<AnnulusMass>> = vec![Vec::new(); ps.len()];
    for (r_in, r_out) in dyadic_ladder(a, rho_max) {
        let coarse = masses_for(spec, ps, r_in, r_out, quad, policy)?;
        let refined = if quad.check_refinement {
            Some(masses_for(spec, ps, r_in, r_out, &fine, policy)?)
        } else {
            None
        };
        for (i, list) in per_p.iter_mut().enumerate() {
            list.push(AnnulusMass {
                r_in,
                r_out,
                mass: coarse[i],
                refined: refined.as_ref().map(|v| v[i]),
            });
        }
    }
    Ok(ps
        .iter()
        .zip(per_p)
        .map(|(&p, annuli)| NormTrace::from_masses(p, a, annuli))
        .collect())
}

/// Norm trace of σ_{a,R} for one exponent.
pub fn norm_trace(
    spec: &LatticeSpec,
    p: f64,
    rho_max: f64,
    quad: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<NormTrace> {
    Ok(norm_traces(spec, &[p], rho_max, quad, policy)?.remove(0))
}

/// Least-squares slope of ln(mass) against ln(geometric mean radius) over
/// annuli starting at or beyond 4a. Needs three such annuli.
pub fn growth_exponent(trace: &NormTrace) -> Result<f64> {
    let start = FIT_START * trace.a * (1.0 - 1e-12);
    let pts: Vec<(f64, f64)> = trace
        .annuli
        .iter()
        .filter(|m| m.r_in >= start && m.mass > 0.0)
        .map(|m| (m.log_mid_radius(), m.mass.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientAnnuli {
            needed: 3,
            found: pts.len(),
        });
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    least_squares_line(pts).1
}

/// (intercept, slope) of the least-squares line through `pts`.
pub(crate) fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Outcome of the growth fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Masses decay: the tail of the norm integral converges.
    Convergent,
    /// Masses grow: the norm is infinite.
    Divergent,
    /// Slope within ±0.3 of zero.
    Borderline,
}

impl Verdict {
    pub fn from_exponent(exponent: f64) -> Self {
        if exponent < -BORDERLINE_BAND {
            Verdict::Convergent
        } else if exponent > BORDERLINE_BAND {
            Verdict::Divergent
        } else {
            Verdict::Borderline
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Borderline => "borderline",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
