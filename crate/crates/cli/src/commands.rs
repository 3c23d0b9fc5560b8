//! The four subcommands. Each returns the process exit code: 0 all checks
//! pass, 2 a theorem-scope violation was detected; input errors surface as
//! `Err` and exit with 1.

use std::path::Path;

use anyhow::Context;
use log::info;
use serde::Serialize;

use flatfactor_core::affine::{affine_basis, check_affine, lipschitz_norm};
use flatfactor_core::catalog;
use flatfactor_core::comparison::{check_bruhat_tits, check_cat};
use flatfactor_core::embedding::embed;
use flatfactor_core::hilbert::{
    build_hilbert_model, parallelogram_residual_signed, polarization_gram,
};
use flatfactor_core::space::build_space;
use flatfactor_core::tolerance::Tolerances;
use flatfactor_core::verdict::CheckOutcome;

use crate::config::SpaceConfig;
use crate::report::{ReportDocument, VerdictEntry};

const DEFAULT_SAMPLES: usize = 10_000;

fn effective_samples(flag: Option<usize>, config: &SpaceConfig) -> usize {
    flag.or(config.samples).unwrap_or(DEFAULT_SAMPLES)
}

fn effective_seed(flag: Option<u64>, config: &SpaceConfig) -> u64 {
    flag.unwrap_or(config.seed)
}

/// Prints the affine function space, its norms and Gram matrix, and the
/// Hilbert verdict.
pub fn analyze(config_path: &Path, tol_override: Option<f64>) -> anyhow::Result<i32> {
    let config = SpaceConfig::load(config_path)?;
    let mut tol = config.tolerances();
    if let Some(t) = tol_override {
        tol.parallelogram_detect = t;
    }
    let space = config.build()?;
    let basis = affine_basis(&space);
    println!("space: {}", space.summary());
    println!("dim A = {}", basis.len());
    for (i, f) in basis.iter().enumerate() {
        let norm = lipschitz_norm(&space, f).context("solver produced a non-affine function")?;
        println!("  f{}: {}  (norm {:.9})", i + 1, f.describe(), norm);
    }
    if !basis.is_empty() {
        let gram = polarization_gram(&space, &basis)?;
        println!("gram matrix:");
        for i in 0..gram.nrows() {
            let row: Vec<String> = gram.row(i).iter().map(|v| format!("{v:+.9}")).collect();
            println!("  [{}]", row.join(", "));
        }
        let mut worst = 0.0_f64;
        for i in 0..basis.len() {
            for j in (i + 1)..basis.len() {
                let r = parallelogram_residual_signed(&space, &basis[i], &basis[j])?;
                println!("parallelogram residual (f{}, f{}): {:+.9}", i + 1, j + 1, r);
                worst = worst.max(r.abs());
            }
        }
        info!("worst parallelogram residual: {worst:.3e}");
    }
    match build_hilbert_model(&space, basis, &tol) {
        Ok(model) => {
            println!(
                "hilbert structure certified: dim {} orthonormal coordinates, min gram eigenvalue {:.3e}",
                model.dim(),
                model.min_eigenvalue
            );
            Ok(0)
        }
        Err(e) => {
            println!("hilbert structure REFUTED: {e}");
            Ok(2)
        }
    }
}

/// Runs the full pipeline and prints the report document.
pub fn embed_cmd(
    config_path: &Path,
    samples: Option<usize>,
    seed: Option<u64>,
    tol_override: Option<f64>,
    output: Option<&Path>,
) -> anyhow::Result<i32> {
    let config = SpaceConfig::load(config_path)?;
    let mut tol = config.tolerances();
    if let Some(t) = tol_override {
        tol.pseudometric_slack = t;
        tol.additivity_dev = t;
        tol.normalized_dev = t;
        tol.bruhat_tits_quotient_slack = t;
    }
    let space = config.build()?;
    let samples = effective_samples(samples, &config);
    let seed = effective_seed(seed, &config);
    info!("running pipeline with {samples} samples, seed {seed}");
    let report = embed(&space, &space.basepoint(), samples, seed, &tol);
    let doc = ReportDocument::from_embedding(&report);
    match output {
        Some(path) => {
            std::fs::write(path, doc.to_json())
                .with_context(|| format!("cannot write report to {}", path.display()))?;
            info!("report written to {}", path.display());
        }
        None => println!("{}", doc.to_json()),
    }
    eprint!("{}", doc.summary_table());
    Ok(if doc.all_pass() { 0 } else { 2 })
}

#[derive(Serialize)]
struct VerifyDocument {
    schema: &'static str,
    space: String,
    kappa: f64,
    triangles_used: usize,
    verdicts: Vec<VerdictEntry>,
}

/// Runs the comparison-triangle suite at the given curvature bound.
pub fn verify(
    config_path: &Path,
    kappa: f64,
    samples: Option<usize>,
    seed: Option<u64>,
    tol_override: Option<f64>,
) -> anyhow::Result<i32> {
    let config = SpaceConfig::load(config_path)?;
    let mut tol = config.tolerances();
    if let Some(t) = tol_override {
        tol.cat_violation = t;
        tol.bruhat_tits_slack = t;
    }
    let space = config.build()?;
    let samples = effective_samples(samples, &config);
    let seed = effective_seed(seed, &config);
    let cat = check_cat(&space, kappa, samples, 4, seed, &tol);
    let mut checks: Vec<CheckOutcome> = vec![cat.outcome];
    if kappa == 0.0 {
        checks.push(check_bruhat_tits(&space, samples, seed, &tol));
    }
    let doc = VerifyDocument {
        schema: "flatfactor/verify/v1",
        space: space.summary(),
        kappa,
        triangles_used: cat.triangles_used,
        verdicts: checks.iter().map(VerdictEntry::from).collect(),
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    for v in &doc.verdicts {
        eprintln!(
            "{:<24} {:>6}  worst slack {:+.3e}",
            v.name,
            if v.pass { "yes" } else { "NO" },
            v.worst_slack
        );
    }
    Ok(if doc.verdicts.iter().all(|v| v.pass) { 0 } else { 2 })
}

#[derive(Serialize)]
struct CounterexampleDocument {
    schema: &'static str,
    p: f64,
    projection_affine_deviation: f64,
    parallelogram_residual_signed: f64,
    parallelogram_residual_abs: f64,
    comparison: VerdictEntry,
}

/// Builds the normed plane with exponent `p`, confirms the projections are
/// affine, and reports the parallelogram residual plus a flat-comparison
/// witness. Exits 2 exactly when a violation is detected (any p != 2).
pub fn counterexample(
    p: f64,
    samples: Option<usize>,
    seed: Option<u64>,
    tol_override: Option<f64>,
) -> anyhow::Result<i32> {
    anyhow::ensure!(
        p > 1.0 && p.is_finite(),
        "exponent p must lie in (1, inf), got {p}"
    );
    let mut tol = Tolerances::default();
    if let Some(t) = tol_override {
        tol.affine_check = t;
    }
    let samples = samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = seed.unwrap_or(42);
    let space = build_space(&catalog::normed_plane(p))?;
    let basis = affine_basis(&space);
    let mut projection_dev = 0.0_f64;
    for f in &basis {
        projection_dev = projection_dev.max(check_affine(&space, f, samples.min(2000), seed));
    }
    anyhow::ensure!(
        projection_dev <= tol.affine_check,
        "coordinate projections deviate from affine by {projection_dev:.3e}"
    );
    let signed = parallelogram_residual_signed(&space, &basis[0], &basis[1])?;
    let cat = check_cat(&space, 0.0, samples, 4, seed, &tol);
    let doc = CounterexampleDocument {
        schema: "flatfactor/counterexample/v1",
        p,
        projection_affine_deviation: projection_dev,
        parallelogram_residual_signed: signed,
        parallelogram_residual_abs: signed.abs(),
        comparison: VerdictEntry::from(&cat.outcome),
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    eprintln!(
        "p = {p}: projections affine (deviation {projection_dev:.3e}), parallelogram residual {signed:+.6}",
    );
    if doc.comparison.pass {
        eprintln!("no comparison violation found: the plane is flat");
        Ok(0)
    } else {
        eprintln!(
            "comparison violation {:+.6} with witness: {}",
            doc.comparison.worst_slack,
            doc.comparison.witness.as_deref().unwrap_or("-")
        );
        Ok(2)
    }
}
