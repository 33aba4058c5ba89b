//! The four subcommands. Each computes first and writes its CSVs afterwards.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use fockzero::density::{density_profile, uniform_density_estimate, DensityReport};
use fockzero::fock_norm::{growth_exponent, norm_traces, NormTrace, Verdict, BORDERLINE_BAND};
use fockzero::sigma::{gaussian_log_weight, log_modified_sigma_direct, log_sigma, psi};
use fockzero::suite::{run_suite, SuiteConfig};
use fockzero::verify::{MethodComparison, RatioReport};
use fockzero::{Error, Variant};

use crate::config::RunConfig;
use crate::{EvalTarget, Failure, EXIT_ADVISORY, EXIT_ASSERTION, EXIT_CONFIG};

/// Annuli flagged by the refinement check before `norm` exits with code 3.
const ADVISORY_ANNULI: usize = 2;

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(Failure::io)?;
    w.write_record(header).map_err(Failure::io)?;
    for r in rows {
        w.write_record(r).map_err(Failure::io)?;
    }
    w.flush().map_err(Failure::io)
}

fn write_summary(dir: &Path, lines: &[String]) -> Result<(), Failure> {
    let mut f = File::create(dir.join("summary.txt")).map_err(Failure::io)?;
    for l in lines {
        writeln!(f, "{l}").map_err(Failure::io)?;
    }
    Ok(())
}

/// Parses "re,im".
pub fn parse_point(s: &str) -> Result<Complex64, Failure> {
    let bad = || Failure::config_msg(format!("cannot parse point {s:?}; expected re,im"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn eval(cfg: &RunConfig, target: EvalTarget, raw: &[String]) -> Result<u8, Failure> {
    let points = raw.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
    let spec = &cfg.spec;
    let mut rows = Vec::with_capacity(points.len());
    for z in points {
        let (value, weight) = match target {
            EvalTarget::Sigma => (log_sigma(spec, z, &cfg.policy), gaussian_log_weight(spec, z)),
            EvalTarget::Modified => (
                log_modified_sigma_direct(spec, z, &cfg.policy),
                gaussian_log_weight(spec, z),
            ),
            EvalTarget::Psi => (psi(spec.r_shift(), z, &cfg.policy), 0.0),
        };
        let row = match value {
            Ok(v) => {
                let (lm, lw) = if v.at_zero {
                    ("-inf".to_string(), "-inf".to_string())
                } else {
                    (fmt(v.log_mag), fmt(v.log_mag - weight))
                };
                vec![fmt(z.re), fmt(z.im), lm, lw, fmt(v.err_est), v.at_zero.to_string(), "ok".into()]
            }
            Err(Error::DomainPole { .. }) => {
                vec![fmt(z.re), fmt(z.im), String::new(), String::new(), String::new(), "false".into(), "domain_pole".into()]
            }
            Err(e) => return Err(Failure::numeric(e)),
        };
        rows.push(row);
    }
    let header = ["z_re", "z_im", "log_mag", "log_weighted", "err_est", "at_zero", "status"];
    let name = match target {
        EvalTarget::Sigma => "eval_sigma.csv",
        EvalTarget::Modified => "eval_modified.csv",
        EvalTarget::Psi => "eval_psi.csv",
    };
    write_csv(&cfg.output_dir, name, &header, &rows)?;
    println!("{}", header.join(","));
    for r in &rows {
        println!("{}", r.join(","));
    }
    Ok(0)
}

const NORM_HEADER: [&str; 8] = ["p", "r_in", "r_out", "mass", "cumulative", "refined_mass", "refinement_change", "under_resolved"];

fn norm_rows(traces: &[NormTrace]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in traces {
        for (m, c) in t.annuli.iter().zip(&t.cumulative) {
            rows.push(vec![
                fmt(t.p),
                fmt(m.r_in),
                fmt(m.r_out),
                fmt(m.mass),
                fmt(*c),
                m.refined.map(fmt).unwrap_or_default(),
                fmt(m.refinement_change()),
                m.under_resolved().to_string(),
            ]);
        }
    }
    rows
}

pub fn norm(cfg: &RunConfig) -> Result<u8, Failure> {
    let traces = norm_traces(&cfg.spec, &cfg.p_exponents, cfg.rho_max, &cfg.quadrature, &cfg.policy).map_err(
        |e| match e {
            Error::InvalidParameter { .. } => Failure::config(e),
            other => Failure::numeric(other),
        },
    )?;
    let mut summary = Vec::new();
    let mut flagged = 0;
    for t in &traces {
        let exponent = growth_exponent(t).map_err(Failure::numeric)?;
        let verdict = Verdict::from_exponent(exponent);
        summary.push(format!(
            "growth_exponent_p{},{},+-{},{}",
            t.p,
            exponent,
            BORDERLINE_BAND,
            verdict
        ));
        flagged = flagged.max(t.under_resolved_count());
    }
    write_csv(&cfg.output_dir, "norm_trace.csv", &NORM_HEADER, &norm_rows(&traces))?;
    write_summary(&cfg.output_dir, &summary)?;
    for l in &summary {
        println!("{l}");
    }
    if flagged >= ADVISORY_ANNULI {
        eprintln!("warning: quadrature under-resolved in {flagged} annuli");
        return Ok(EXIT_ADVISORY);
    }
    Ok(0)
}

const DENSITY_HEADER: [&str; 4] = ["variant", "rho", "sup_ratio", "inf_ratio"];

fn density_rows(label: &str, rep: &DensityReport) -> Vec<Vec<String>> {
    rep.rho_ladder
        .iter()
        .zip(rep.sup_ratio.iter().zip(&rep.inf_ratio))
        .map(|(r, (s, i))| vec![label.to_string(), fmt(*r), fmt(*s), fmt(*i)])
        .collect()
}

pub fn density(cfg: &RunConfig) -> Result<u8, Failure> {
    let a = cfg.spec.a();
    let ladder = [cfg.rho_max / 4.0, cfg.rho_max / 2.0, cfg.rho_max];
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (label, variant) in [("square", Variant::Square), ("perturbed", Variant::Perturbed)] {
        let rep = density_profile(&cfg.spec, variant, &ladder, 4.0 * a, 0.25 * a).map_err(|e| match e {
            Error::InvalidParameter { .. } => Failure::config(e),
            other => Failure::numeric(other),
        })?;
        let (hi, lo) = uniform_density_estimate(&rep).map_err(Failure::numeric)?;
        let target = cfg.spec.alpha() / std::f64::consts::PI;
        summary.push(format!("density_plus_{label},{hi},{target},estimate"));
        summary.push(format!("density_minus_{label},{lo},{target},estimate"));
        rows.extend(density_rows(label, &rep));
    }
    write_csv(&cfg.output_dir, "density_profile.csv", &DENSITY_HEADER, &rows)?;
    write_summary(&cfg.output_dir, &summary)?;
    for l in &summary {
        println!("{l}");
    }
    Ok(0)
}

const RATIO_HEADER: [&str; 5] = ["index", "z_re", "z_im", "log_ratio", "err_est"];

fn ratio_rows(rep: &RatioReport) -> Vec<Vec<String>> {
    rep.samples
        .iter()
        .map(|s| vec![s.index.to_string(), fmt(s.z.re), fmt(s.z.im), fmt(s.log_ratio), fmt(s.err_est)])
        .collect()
}

fn method_rows(cmp: &[MethodComparison]) -> Vec<Vec<String>> {
    cmp.iter()
        .map(|c| vec![fmt(c.z.re), fmt(c.z.im), fmt(c.direct), fmt(c.ratio), fmt(c.err_sum)])
        .collect()
}

pub fn verify(cfg: &RunConfig) -> Result<u8, Failure> {
    let suite = SuiteConfig {
        spec: cfg.spec,
        seed: cfg.seed,
        rho_max: cfg.rho_max,
        policy: cfg.policy,
        quadrature: cfg.quadrature,
    };
    let report = run_suite(&suite).map_err(|e| match e {
        Error::InvalidParameter { .. } => Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        },
        other => Failure::numeric(other),
    })?;
    let dir = &cfg.output_dir;
    write_csv(dir, "verify_norm.csv", &NORM_HEADER, &norm_rows(&report.norm))?;
    for (name, rep) in [
        ("verify_lemma1.csv", &report.lemma1),
        ("verify_lemma1_control.csv", &report.lemma1_control),
        ("verify_sigma_distance.csv", &report.sigma_distance),
        ("verify_ratio_product.csv", &report.ratio_product),
        ("verify_psi_claim.csv", &report.psi_claim),
    ] {
        write_csv(dir, name, &RATIO_HEADER, &ratio_rows(rep))?;
    }
    write_csv(
        dir,
        "verify_methods.csv",
        &["z_re", "z_im", "direct", "ratio", "err_sum"],
        &method_rows(&report.methods),
    )?;
    let rows: Vec<Vec<String>> = report
        .density
        .iter()
        .flat_map(|(label, rep)| density_rows(label, rep))
        .collect();
    write_csv(dir, "verify_density.csv", &DENSITY_HEADER, &rows)?;
    let lines: Vec<String> = report.assertions.iter().map(|a| a.summary_line()).collect();
    write_summary(dir, &lines)?;
    let failed: Vec<&str> = report
        .assertions
        .iter()
        .filter(|a| !a.pass)
        .map(|a| a.name.as_str())
        .collect();
    println!("{} assertions, {} failed", report.assertions.len(), failed.len());
    for name in &failed {
        println!("FAIL {name}");
    }
    Ok(if failed.is_empty() { 0 } else { EXIT_ASSERTION })
}
