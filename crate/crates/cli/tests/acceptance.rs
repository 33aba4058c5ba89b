//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line to
//! stderr (written directly, so it shows without --nocapture); the test
//! fails if any criterion fails.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use fockzero::density::{density_profile, uniform_density_estimate};
use fockzero::fock_norm::{growth_exponent, norm_traces, QuadratureSpec};
use fockzero::lattice::{counting_function, distance_to_lattice, LatticeIndex, Variant, lattice_point};
use fockzero::sigma::{
    log_modified_sigma_direct, log_modified_sigma_ratio, log_sigma, log_weighted_modified_sigma,
    log_weighted_modified_sigma_fast, log_weighted_sigma, log_weighted_sigma_reduced, m_r_constant, psi,
    WeightedLogValue,
};
use fockzero::verify::{
    check_hadamard_correction, check_lemma1, check_lemma1_without_growth_factor, check_reduction_identity,
    check_sigma_distance, ScanGrid,
};
use fockzero::{LatticeSpec, Result, TruncationPolicy};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn default_spec(r: f64) -> LatticeSpec {
    LatticeSpec::new(std::f64::consts::PI, r).unwrap()
}

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = default_spec(1.0);
    let traces = norm_traces(&s, &[2.0, 0.5], 32.0, &QuadratureSpec::default(), &pol()).unwrap();
    let e_p = growth_exponent(&traces[0]).unwrap();
    let e_q = growth_exponent(&traces[1]).unwrap();
    let elapsed = start.elapsed();
    // expected slopes 2 − 2pR
    let ok = (e_p - (2.0 - 2.0 * 2.0)).abs() <= 0.3
        && (e_q - (2.0 - 2.0 * 0.5)).abs() <= 0.3
        && e_p < 0.0
        && e_q > 0.0
        && elapsed < Duration::from_secs(120);
    Outcome::new(ok, format!("exponent p=2: {e_p:.4}, q=0.5: {e_q:.4}, {elapsed:.1?}"))
}

fn standard_grid() -> ScanGrid {
    ScanGrid::standard(7)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = default_spec(0.75);
    let g = standard_grid();
    let rep = check_lemma1(&s, &g, &pol()).unwrap();
    let control = check_lemma1_without_growth_factor(&s, &g, &pol()).unwrap();
    let elapsed = start.elapsed();
    let spread = rep.spread();
    let drift = rep.median_drift((5.0, 10.0), (20.0, 25.0)).unwrap();
    let control_drift = control.median_drift((5.0, 10.0), (20.0, 25.0)).unwrap();
    let covered = g.annuli.first().unwrap().0 <= 0.5 && g.annuli.last().unwrap().1 >= 25.0;
    let ok = rep.n_points_used >= 2000
        && covered
        && g.exclusion_radius == 0.05
        && spread <= 1e3
        && drift <= 3.0
        && control_drift >= 3.0
        && elapsed < Duration::from_secs(60);
    Outcome::new(
        ok,
        format!(
            "{} points, spread {spread:.3}, drift {drift:.3}, control drift {control_drift:.3}, {elapsed:.1?}",
            rep.n_points_used
        ),
    )
}

fn criterion_3() -> Outcome {
    let rep = check_sigma_distance(&default_spec(0.75), &standard_grid(), &pol()).unwrap();
    let spread = rep.spread();
    let drift = rep.median_drift((5.0, 10.0), (20.0, 25.0)).unwrap();
    Outcome::new(spread <= 50.0 && drift <= 2.0, format!("spread {spread:.3}, drift {drift:.3}"))
}

fn criterion_4() -> Outcome {
    let s = default_spec(0.75);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    let mut n = 0;
    while n < 100 {
        let z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if z.norm() > 10.0 || (z - Complex64::new(z.re.round(), 0.0)).norm() <= 0.01 {
            continue;
        }
        n += 1;
        let d = log_modified_sigma_direct(&s, z, &pol()).unwrap();
        let r = log_modified_sigma_ratio(&s, z, &pol()).unwrap();
        worst = worst.max((d.log_mag - r.log_mag).abs() - (1e-6 + d.err_est + r.err_est));
    }
    Outcome::new(worst <= 0.0, format!("max excess over 1e-6 + err_est: {worst:.3e}"))
}

fn criterion_5() -> Outcome {
    let p = pol();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |cond: bool, note: String| {
        ok &= cond;
        if !cond {
            notes.push(note);
        }
    };
    let origin = Complex64::new(0.0, 0.0);
    for r in [0.25, 0.5, 0.75, 0.9, 1.0, 1.6, 3.0] {
        let v = psi(r, origin, &p).unwrap();
        check(v.log_mag == 0.0, format!("psi_{r}(0) = exp({})", v.log_mag));
    }
    for r in [0.25, 0.5, 0.9, 1.0] {
        let v = psi(r, Complex64::new(-1.0, 0.0), &p).unwrap().log_mag;
        let oracle = (1.0 / (1.0 + r)).ln();
        // second oracle: Γ(1+R)Γ(2)/Γ(2+R)
        let gamma = ln_gamma(1.0 + r) - ln_gamma(2.0 + r);
        check((v - oracle).abs() <= 1e-6 && (oracle - gamma).abs() < 1e-12, format!("psi_{r}(-1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let samples: Vec<Complex64> = (0..20)
        .map(|_| Complex64::new(rng.gen_range(-8.0..8.0), rng.gen_range(0.05..8.0)))
        .collect();
    let red = check_reduction_identity(1.6, &samples, &p).unwrap();
    check(red <= 1e-6, format!("reduction {red:e}"));
    let m1 = m_r_constant(1.0, 1e-13).unwrap();
    let m2 = m_r_constant(2.0, 1e-13).unwrap();
    check((m1 - 1.0).abs() <= 1e-9 && (m2 - 1.25).abs() <= 1e-9, format!("M_1={m1} M_2={m2}"));
    let mut had: f64 = 0.0;
    for r in [0.5, 1.0, 1.5, 2.0] {
        had = had.max(check_hadamard_correction(&default_spec(r), &p).unwrap());
    }
    check(had <= 1e-5, format!("hadamard {had:e}"));
    Outcome::new(
        ok,
        format!("reduction {red:.1e}, M_1 {m1}, M_2 {m2}, hadamard {had:.1e} {}", notes.join("; ")),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

type Eval = fn(&LatticeSpec, Complex64, &TruncationPolicy) -> Result<WeightedLogValue>;

fn criterion_6() -> Outcome {
    let s = default_spec(0.75);
    let evals: [Eval; 7] = [
        log_sigma,
        log_weighted_sigma,
        log_weighted_sigma_reduced,
        log_modified_sigma_direct,
        log_weighted_modified_sigma,
        log_modified_sigma_ratio,
        log_weighted_modified_sigma_fast,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut pts = Vec::new();
    while pts.len() < 50 {
        let z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if z.norm() <= 10.0 && (z - Complex64::new(z.re.round(), 0.0)).norm() > 0.01 {
            pts.push(z);
        }
    }
    let mut neg_mismatch = 0;
    let mut conj_err: f64 = 0.0;
    let mut period_err: f64 = 0.0;
    for &z in &pts {
        for f in evals {
            let v = f(&s, z, &pol()).unwrap().log_mag;
            if v.to_bits() != f(&s, -z, &pol()).unwrap().log_mag.to_bits() {
                neg_mismatch += 1;
            }
            conj_err = conj_err.max((v - f(&s, z.conj(), &pol()).unwrap().log_mag).abs());
        }
        let v = log_weighted_sigma(&s, z, &pol()).unwrap().log_mag;
        for w in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            period_err = period_err.max((v - log_weighted_sigma(&s, z + w, &pol()).unwrap().log_mag).abs());
        }
    }
    Outcome::new(
        neg_mismatch == 0 && conj_err <= 1e-12 && period_err <= 1e-6,
        format!("negation mismatches {neg_mismatch}, conj err {conj_err:.1e}, period err {period_err:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let ladder = [8.0, 16.0, 32.0];
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [(1.0, Variant::Square), (0.75, Variant::Perturbed), (1.0, Variant::Perturbed)];
    for (r, v) in cases {
        let s = default_spec(r);
        let target = s.alpha() / std::f64::consts::PI;
        let rep = density_profile(&s, v, &ladder, 4.0, 0.25).unwrap();
        let (hi, lo) = uniform_density_estimate(&rep).unwrap();
        ok &= (hi - target).abs() <= 0.05 * target && (lo - target).abs() <= 0.05 * target;
        for (rho, (sup, inf)) in ladder.iter().zip(rep.sup_ratio.iter().zip(&rep.inf_ratio)) {
            ok &= (sup - target).abs() <= 4.0 / rho && (inf - target).abs() <= 4.0 / rho;
        }
        parts.push(format!("{v:?} R={r}: ({hi:.4}, {lo:.4})"));
    }
    Outcome::new(ok, parts.join(", "))
}

/// Independent enumeration over the full index box.
fn enumerate(s: &LatticeSpec, v: Variant, c: Complex64, rho: f64) -> usize {
    let b = (c.norm() + rho).ceil() as i64 + s.r_shift().ceil() as i64 + 2;
    let mut n = 0;
    for m in -b..=b {
        for k in -b..=b {
            let p = if v == Variant::Perturbed && k == 0 && m != 0 {
                Complex64::new(m as f64 + s.r_shift() * (m as f64).signum(), 0.0)
            } else {
                Complex64::new(m as f64, k as f64)
            };
            if (p - c).norm_sqr() < rho * rho {
                n += 1;
            }
        }
    }
    n
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut mismatches = 0;
    for i in 0..100 {
        let s = default_spec([0.3, 0.75, 1.0, 1.7][i % 4]);
        let v = if i % 2 == 0 { Variant::Square } else { Variant::Perturbed };
        let c = Complex64::new(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0));
        let rho = rng.gen_range(0.05..20.0);
        if counting_function(&s, c, rho, v).unwrap() != enumerate(&s, v, c, rho) {
            mismatches += 1;
        }
    }
    Outcome::new(mismatches == 0, format!("{mismatches} mismatches in 100"))
}

fn criterion_9() -> Outcome {
    // Tested on the weighted modulus log|σ_{a,1}| − α|z|²/2; the unweighted
    // value carries the e^{α|z|²/2} growth (about +39 at |z| = 5).
    let s = default_spec(1.0);
    let p = pol();
    let mut near_max = f64::NEG_INFINITY;
    let mut zeros = 0;
    for m in -6..=6 {
        for n in -6..=6 {
            let w = lattice_point(&s, LatticeIndex::new(m, n), Variant::Perturbed);
            if w.norm() > 5.0 {
                continue;
            }
            zeros += 1;
            for dir in [0.0, 1.3, 2.9, 4.4] {
                let z = w + Complex64::from_polar(1e-9, dir);
                near_max = near_max.max(log_weighted_modified_sigma(&s, z, &p).unwrap().log_mag);
            }
        }
    }
    let mut far_min = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut used = 0;
    while used < 3000 {
        let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        if z.norm() > 5.0 || distance_to_lattice(&s, z, Variant::Perturbed) < 0.3 {
            continue;
        }
        used += 1;
        far_min = far_min.min(log_weighted_modified_sigma(&s, z, &p).unwrap().log_mag);
    }
    let one = log_modified_sigma_direct(&s, Complex64::new(1.0, 0.0), &p).unwrap();
    let two = log_modified_sigma_direct(&s, Complex64::new(2.0, 0.0), &p).unwrap();
    let ok = near_max < -20.0 && far_min > -5.0 && !one.at_zero && one.log_mag.is_finite() && two.at_zero;
    Outcome::new(
        ok,
        format!(
            "{zeros} zeros, max near zeros {near_max:.2}, min at d >= 0.3 {far_min:.2}, log at 1 = {:.4}, zero at 2: {}",
            one.log_mag, two.at_zero
        ),
    )
}

fn run_verify(out: &Path) -> (Option<i32>, Vec<(String, Vec<u8>)>) {
    let status = Command::new(env!("CARGO_BIN_EXE_fockzero"))
        .args(["verify", "--seed", "7", "--R", "0.75", "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("run fockzero");
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    (status.code(), files)
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (code_a, files_a) = run_verify(a.path());
    let (code_b, files_b) = run_verify(b.path());
    let csvs = files_a.iter().filter(|(n, _)| n.ends_with(".csv")).count();
    Outcome::new(
        code_a == code_b && files_a == files_b && csvs >= 5,
        format!("exit codes {code_a:?}/{code_b:?}, {csvs} CSVs, identical: {}", files_a == files_b),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("membership dichotomy", criterion_1),
        ("perturbed sigma boundedness", criterion_2),
        ("sigma distance estimate", criterion_3),
        ("two-method equivalence", criterion_4),
        ("exact identities", criterion_5),
        ("symmetries", criterion_6),
        ("density condition", criterion_7),
        ("counting exactness", criterion_8),
        ("zero-set placement", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        writeln!(err, "criterion {:>2} {tag} {name}: {}", i + 1, o.detail).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
