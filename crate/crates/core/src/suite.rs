//! The full battery of pass/fail assertions behind `fockzero verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{density_profile, uniform_density_estimate, DensityReport};
use crate::error::Result;
use crate::fock_norm::{growth_exponent, norm_traces, NormTrace, QuadratureSpec, BORDERLINE_BAND};
use crate::lattice::{
    counting_function, counting_function_brute_force, distance_to_lattice, LatticeIndex, LatticeSpec, Variant,
    lattice_point,
};
use crate::sigma::{
    log_modified_sigma_direct, log_modified_sigma_ratio, log_sigma, log_weighted_modified_sigma,
    log_weighted_modified_sigma_fast, log_weighted_sigma, log_weighted_sigma_reduced, m_r_constant, psi,
    TruncationPolicy, WeightedLogValue,
};
use crate::verify::{
    check_hadamard_correction, check_lemma1, check_lemma1_without_growth_factor, check_psi_claim,
    check_ratio_product, check_reduction_identity, check_sigma_distance, compare_methods, cross_identity_excess,
    psi_log_ratio, seeded_disk_points, MethodComparison, RatioReport, ScanGrid,
};

/// Inputs of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub spec: LatticeSpec,
    pub seed: u64,
    pub rho_max: f64,
    pub policy: TruncationPolicy,
    pub quadrature: QuadratureSpec,
}

impl SuiteConfig {
    pub fn new(spec: LatticeSpec, seed: u64) -> Self {
        Self {
            spec,
            seed,
            rho_max: 32.0 * spec.a(),
            policy: TruncationPolicy::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// One named check with its measured value and bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Assertion {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("<= {bound:e}"),
            pass: value <= bound,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!(">= {bound:e}"),
            pass: value >= bound,
        }
    }

    fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("{target} +- {tol}"),
            pass: (value - target).abs() <= tol,
        }
    }

    fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "== 1".into(),
            pass: ok,
        }
    }

    /// `name,value,bound,pass|fail`.
    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.name,
            self.value,
            self.bound,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Everything a suite run produces.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub assertions: Vec<Assertion>,
    pub norm: Vec<NormTrace>,
    pub lemma1: RatioReport,
    pub lemma1_control: RatioReport,
    pub sigma_distance: RatioReport,
    pub ratio_product: RatioReport,
    pub psi_claim: RatioReport,
    pub methods: Vec<MethodComparison>,
    pub density: Vec<(String, DensityReport)>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

/// Annuli of the ψ_R scan.
pub fn psi_grid(seed: u64) -> ScanGrid {
    ScanGrid {
        annuli: vec![(2.0, 4.0), (4.0, 8.0), (8.0, 16.0), (16.0, 32.0), (32.0, 64.0)],
        points_per_annulus: 200,
        exclusion_radius: 0.05,
        seed,
    }
}

/// Dyadic growth exponents for p = 2/R and p = 1/(2R), where 2 − 2pR is −2
/// and +1.
fn norm_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<Vec<NormTrace>> {
    let r = cfg.spec.r_shift();
    let ps = [2.0 / r, 0.5 / r];
    let traces = norm_traces(&cfg.spec, &ps, cfg.rho_max, &cfg.quadrature, &cfg.policy)?;
    let conv = growth_exponent(&traces[0])?;
    let div = growth_exponent(&traces[1])?;
    out.push(Assertion::within("norm_exponent_convergent", conv, -2.0, BORDERLINE_BAND));
    out.push(Assertion::within("norm_exponent_divergent", div, 1.0, BORDERLINE_BAND));
    Ok(traces)
}

fn scan_block(
    cfg: &SuiteConfig,
    out: &mut Vec<Assertion>,
) -> Result<(RatioReport, RatioReport, RatioReport, RatioReport, RatioReport)> {
    let grid = ScanGrid::standard(cfg.seed);
    let inner = (5.0, 10.0);
    let outer = (20.0, 25.0);
    let (spec, pol) = (&cfg.spec, &cfg.policy);

    let lemma1 = check_lemma1(spec, &grid, pol)?;
    out.push(Assertion::at_least("lemma1_points", lemma1.n_points_used as f64, 2000.0));
    out.push(Assertion::at_most("lemma1_spread", lemma1.spread(), 1e3));
    out.push(Assertion::at_most(
        "lemma1_median_drift",
        lemma1.median_drift(inner, outer).unwrap_or(f64::INFINITY),
        3.0,
    ));
    let control = check_lemma1_without_growth_factor(spec, &grid, pol)?;
    out.push(Assertion::at_least(
        "lemma1_control_drift",
        control.median_drift(inner, outer).unwrap_or(0.0),
        3.0,
    ));

    let sigma = check_sigma_distance(spec, &grid, pol)?;
    out.push(Assertion::at_most("sigma_distance_spread", sigma.spread(), 50.0));
    out.push(Assertion::at_most(
        "sigma_distance_median_drift",
        sigma.median_drift(inner, outer).unwrap_or(f64::INFINITY),
        2.0,
    ));

    let ratio = check_ratio_product(spec, &grid, pol)?;
    out.push(Assertion::at_most("ratio_product_spread", ratio.spread(), 1e3));
    let (excess, shared) = cross_identity_excess(&lemma1, &sigma, &ratio);
    out.push(Assertion::at_least("cross_identity_points", shared as f64, 1.0));
    out.push(Assertion::at_most("cross_identity_excess", excess, 1e-6));

    let r = spec.r_shift();
    let psi_rep = check_psi_claim(r, &psi_grid(cfg.seed), pol)?;
    out.push(Assertion::at_most("psi_claim_spread", psi_rep.spread(), 1e2));
    for (label, dir) in [("negative_axis", Complex64::new(-1.0, 0.0)), ("imaginary_axis", Complex64::new(0.0, 1.0))] {
        let vals = [4.0, 8.0, 16.0]
            .iter()
            .map(|&t| psi_log_ratio(r, dir * t, pol).map(|v| v.0))
            .collect::<Result<Vec<_>>>()?;
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(Assertion::at_most(format!("psi_flat_{label}"), (hi - lo).exp(), 1.5));
    }
    Ok((lemma1, control, sigma, ratio, psi_rep))
}

fn method_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<Vec<MethodComparison>> {
    let pts = seeded_disk_points(&cfg.spec, 100, 10.0 * cfg.spec.a(), 0.01 * cfg.spec.a(), cfg.seed);
    let cmp = compare_methods(&cfg.spec, &pts, &cfg.policy)?;
    let worst = cmp
        .iter()
        .map(|c| c.abs_diff() - c.err_sum)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Assertion::at_most("two_method_excess", worst, 1e-6));
    Ok(cmp)
}

fn identity_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<()> {
    let pol = &cfg.policy;
    let zero = Complex64::new(0.0, 0.0);
    for r in [0.25, 0.5, 0.9, 1.0, cfg.spec.r_shift()] {
        let v = psi(r, zero, pol)?;
        out.push(Assertion::at_most(format!("psi_at_zero_R{r}"), v.log_mag.abs(), 0.0));
    }
    for r in [0.25, 0.5, 0.9, 1.0] {
        let v = psi(r, Complex64::new(-1.0, 0.0), pol)?;
        let err = (v.log_mag - (1.0 / (1.0 + r)).ln()).abs();
        out.push(Assertion::at_most(format!("psi_at_minus_one_R{r}"), err, 1e-6));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let samples: Vec<Complex64> = (0..20)
        .map(|_| Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(0.1..6.0)))
        .collect();
    out.push(Assertion::at_most(
        "reduction_identity_R1.6",
        check_reduction_identity(1.6, &samples, pol)?,
        1e-6,
    ));
    out.push(Assertion::within("m_r_R1", m_r_constant(1.0, 1e-12)?, 1.0, 1e-9));
    out.push(Assertion::within("m_r_R2", m_r_constant(2.0, 1e-12)?, 1.25, 1e-9));
    for r in [0.5, 1.0, 1.5, 2.0] {
        let spec = cfg.spec.with_shift(r)?;
        out.push(Assertion::at_most(
            format!("hadamard_correction_R{r}"),
            check_hadamard_correction(&spec, pol)?,
            1e-5,
        ));
    }
    Ok(())
}

type Evaluator = fn(&LatticeSpec, Complex64, &TruncationPolicy) -> Result<WeightedLogValue>;

fn evaluators() -> [(&'static str, Evaluator); 7] {
    [
        ("log_sigma", log_sigma),
        ("log_weighted_sigma", log_weighted_sigma),
        ("log_weighted_sigma_reduced", log_weighted_sigma_reduced),
        ("log_modified_sigma_direct", log_modified_sigma_direct),
        ("log_weighted_modified_sigma", log_weighted_modified_sigma),
        ("log_modified_sigma_ratio", log_modified_sigma_ratio),
        ("log_weighted_modified_sigma_fast", log_weighted_modified_sigma_fast),
    ]
}

fn symmetry_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<()> {
    let a = cfg.spec.a();
    let pts = seeded_disk_points(&cfg.spec, 50, 10.0 * a, 0.01 * a, cfg.seed.wrapping_add(2));
    for (name, f) in evaluators() {
        let mut mismatches = 0usize;
        let mut conj_err: f64 = 0.0;
        for &z in &pts {
            let v = f(&cfg.spec, z, &cfg.policy)?;
            let n = f(&cfg.spec, -z, &cfg.policy)?;
            let c = f(&cfg.spec, z.conj(), &cfg.policy)?;
            if v.log_mag.to_bits() != n.log_mag.to_bits() {
                mismatches += 1;
            }
            conj_err = conj_err.max((v.log_mag - c.log_mag).abs());
        }
        out.push(Assertion::at_most(format!("negation_mismatches_{name}"), mismatches as f64, 0.0));
        out.push(Assertion::at_most(format!("conjugation_error_{name}"), conj_err, 1e-12));
    }
    let mut period_err: f64 = 0.0;
    for &z in &pts {
        let v = log_weighted_sigma(&cfg.spec, z, &cfg.policy)?.log_mag;
        for shift in [Complex64::new(a, 0.0), Complex64::new(0.0, a)] {
            let w = log_weighted_sigma(&cfg.spec, z + shift, &cfg.policy)?.log_mag;
            period_err = period_err.max((v - w).abs());
        }
    }
    out.push(Assertion::at_most("weighted_sigma_periodicity", period_err, 1e-6));
    Ok(())
}

fn density_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<Vec<(String, DensityReport)>> {
    let a = cfg.spec.a();
    let target = cfg.spec.alpha() / std::f64::consts::PI;
    let ladder = [8.0 * a, 16.0 * a, 32.0 * a];
    let mut shifts = vec![0.75, 1.0];
    if !shifts.contains(&cfg.spec.r_shift()) {
        shifts.push(cfg.spec.r_shift());
    }
    let mut cases = vec![("square".to_string(), cfg.spec, Variant::Square)];
    for r in shifts {
        cases.push((format!("perturbed_R{r}"), cfg.spec.with_shift(r)?, Variant::Perturbed));
    }
    let mut reports = Vec::new();
    for (label, spec, variant) in cases {
        let rep = density_profile(&spec, variant, &ladder, 4.0 * a, 0.25 * a)?;
        let (hi, lo) = uniform_density_estimate(&rep)?;
        out.push(Assertion::within(format!("density_plus_{label}"), hi, target, 0.05 * target));
        out.push(Assertion::within(format!("density_minus_{label}"), lo, target, 0.05 * target));
        let worst = rep
            .rho_ladder
            .iter()
            .zip(rep.sup_ratio.iter().zip(&rep.inf_ratio))
            .map(|(rho, (s, i))| (s - target).abs().max((i - target).abs()) * a * rho)
            .fold(0.0, f64::max);
        out.push(Assertion::at_most(format!("density_extremes_{label}"), worst, 4.0));
        reports.push((label, rep));
    }
    Ok(reports)
}

fn counting_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let a = cfg.spec.a();
    let mut mismatches = 0usize;
    for i in 0..100 {
        let c = Complex64::new(rng.gen_range(-10.0..10.0) * a, rng.gen_range(-10.0..10.0) * a);
        let rho = rng.gen_range(0.1..20.0) * a;
        let variant = if i % 2 == 0 { Variant::Square } else { Variant::Perturbed };
        if counting_function(&cfg.spec, c, rho, variant)? != counting_function_brute_force(&cfg.spec, c, rho, variant)? {
            mismatches += 1;
        }
    }
    out.push(Assertion::at_most("counting_mismatches", mismatches as f64, 0.0));
    Ok(())
}

/// Zero placement for R = 1, on the weighted modulus log|σ_{a,1}| − α|z|²/2.
fn zero_block(cfg: &SuiteConfig, out: &mut Vec<Assertion>) -> Result<()> {
    let spec = cfg.spec.with_shift(1.0)?;
    let a = spec.a();
    let pol = &cfg.policy;
    let offset = Complex64::from_polar(1e-9 * a, 0.7);
    let mut near_max = f64::NEG_INFINITY;
    for m in -6i64..=6 {
        for n in -6i64..=6 {
            let p = lattice_point(&spec, LatticeIndex::new(m, n), Variant::Perturbed);
            if p.norm() > 5.0 * a {
                continue;
            }
            let v = log_weighted_modified_sigma(&spec, p + offset, pol)?;
            near_max = near_max.max(v.log_mag);
        }
    }
    out.push(Assertion::at_most("zero_near_points_max", near_max, -20.0));

    let step = a / 12.0;
    let mut far_min = f64::INFINITY;
    for i in -60i64..=60 {
        for j in -60i64..=60 {
            let z = Complex64::new((i as f64 + 0.17) * step, (j as f64 + 0.11) * step);
            if z.norm() > 5.0 * a || distance_to_lattice(&spec, z, Variant::Perturbed) < 0.3 * a {
                continue;
            }
            far_min = far_min.min(log_weighted_modified_sigma(&spec, z, pol)?.log_mag);
        }
    }
    out.push(Assertion::at_least("zero_far_from_points_min", far_min, -5.0));
    let at_one = log_modified_sigma_direct(&spec, Complex64::new(a, 0.0), pol)?;
    out.push(Assertion::holds("finite_at_one", !at_one.at_zero && at_one.log_mag.is_finite()));
    let at_two = log_modified_sigma_direct(&spec, Complex64::new(2.0 * a, 0.0), pol)?;
    out.push(Assertion::holds("zero_at_two", at_two.at_zero));
    Ok(())
}

/// Runs every check and collects the assertions and the underlying reports.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut assertions = Vec::new();
    let norm = norm_block(cfg, &mut assertions)?;
    let (lemma1, lemma1_control, sigma_distance, ratio_product, psi_claim) = scan_block(cfg, &mut assertions)?;
    let methods = method_block(cfg, &mut assertions)?;
    identity_block(cfg, &mut assertions)?;
    symmetry_block(cfg, &mut assertions)?;
    let density = density_block(cfg, &mut assertions)?;
    counting_block(cfg, &mut assertions)?;
    zero_block(cfg, &mut assertions)?;
    Ok(SuiteReport {
        assertions,
        norm,
        lemma1,
        lemma1_control,
        sigma_distance,
        ratio_product,
        psi_claim,
        methods,
        density,
    })
}
