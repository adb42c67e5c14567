//! One function per subcommand. Each writes its report into an [`Outputs`]
//! buffer so that the caller can print, save and digest everything uniformly.

use std::fmt::Write as _;
use std::path::PathBuf;

use fracfact::correspond::{correspondence_report, primitive_moves_for_decomposable, Correspondence};
use fracfact::design::{alias_classes, build_design_matrix, expand_defining_contrast, factor_letter, resolution, Word};
use fracfact::family::Family;
use fracfact::fiber::{at_least, enumerate_fiber, exact_null_distribution, Budget};
use fracfact::formats::{parse_matrix, write_matrix};
use fracfact::glm::Statistic;
use fracfact::lattice::{kernel_basis_i64, IntMatrix};
use fracfact::model::{estimability_report, lawrence_lift, sufficient_statistic};
use fracfact::moves::{connectivity_by_total, graver_completion, import_basis, CompletionOptions, MoveSet, Provenance};
use fracfact::sampler::{run_chains, ChainConfig, NullModel, TestResult};
use serde_json::json;

use crate::args::{BasisArgs, Budgets, CorrespondArgs, DesignArgs, EnumerateArgs, Format, ModelArgs, StatisticArg, TestArgs};
use crate::error::CliResult;
use crate::inputs::{find_bundle, load_data, load_design, load_problem, Sources};

/// Everything a command produces: the standard-output report and files.
#[derive(Default)]
pub struct Outputs {
    pub stdout: String,
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn file(&mut self, path: &Option<PathBuf>, contents: impl Into<Vec<u8>>) {
        if let Some(p) = path {
            self.files.push((p.clone(), contents.into()));
        }
    }

    fn json(&mut self, value: &serde_json::Value) {
        self.stdout.push_str(&pretty(value));
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn budget(b: &Budgets) -> Budget {
    Budget { max_points: b.max_fiber_points, ..Budget::default() }
}

fn completion(b: &Budgets) -> CompletionOptions {
    CompletionOptions { max_elements: b.max_graver, ..CompletionOptions::default() }
}

fn statistic(s: StatisticArg) -> Statistic {
    match s {
        StatisticArg::G2 => Statistic::LikelihoodRatio,
        StatisticArg::X2 => Statistic::Pearson,
    }
}

fn words(ws: &[Word]) -> Vec<String> {
    ws.iter().map(Word::to_string).collect()
}

fn csv_row<T: ToString>(cells: impl IntoIterator<Item = T>) -> String {
    let mut s = cells.into_iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn fmt_p(p: Option<f64>) -> String {
    p.map_or_else(|| "n/a".to_string(), |p| format!("{p:.4}"))
}

/// Four decimals, without printing rounding noise as "-0.0000".
fn fmt_stat(t: f64) -> String {
    let t = if t.abs() < 5e-5 { 0.0 } else { t };
    format!("{t:.4}")
}

fn compute_graver(matrix: &[Vec<i64>], budgets: &Budgets) -> CliResult<MoveSet> {
    let basis = kernel_basis_i64(&IntMatrix::from_rows(matrix)?)?;
    let graver = graver_completion(&basis, completion(budgets))?;
    Ok(MoveSet::new(matrix, graver.into_iter().map(|m| m.into_vec()).collect(), Provenance::Computed)?)
}

pub fn design(a: &DesignArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let spec = load_design(sources, a.file.as_deref(), a.bundle.as_deref())?;
    let subgroup = expand_defining_contrast(&spec)?;
    let res = resolution(&subgroup);
    let matrix = build_design_matrix(&spec);
    let classes: Vec<Vec<Word>> = alias_classes(&spec, &subgroup)
        .into_iter()
        .map(|c| c.into_iter().filter(|w| w.len() <= a.max_alias_len).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect();
    let defining: Vec<Word> = subgroup.words().iter().copied().filter(|w| !w.is_identity()).collect();
    let letters: Vec<String> = (0..spec.p()).map(|i| factor_letter(i).to_string()).collect();
    let generators: Vec<String> = spec.generators().iter().map(|g| g.to_string()).collect();
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let _ = writeln!(s, "design: 2^({}-{}), {} runs", spec.p(), spec.q(), spec.runs());
            let _ = writeln!(s, "generators: {}", if generators.is_empty() { "none".into() } else { generators.join(" ") });
            let mut sub = vec!["I".to_string()];
            sub.extend(words(&defining));
            let _ = writeln!(s, "defining contrast subgroup: {}", sub.join(" = "));
            let _ = writeln!(s, "resolution: {res}");
            let _ = writeln!(s, "aliases (words of length <= {}):", a.max_alias_len);
            for c in &classes {
                let _ = writeln!(s, "  {}", words(c).join(" = "));
            }
            let _ = writeln!(s, "design matrix:");
            let _ = writeln!(s, "{:>4} {}", "run", letters.iter().map(|l| format!("{l:>2}")).collect::<Vec<_>>().join(" "));
            for (i, row) in matrix.rows().iter().enumerate() {
                let _ = writeln!(s, "{:>4} {}", i + 1, row.iter().map(|v| format!("{v:>2}")).collect::<Vec<_>>().join(" "));
            }
        }
        Format::Json => out.json(&json!({
            "p": spec.p(),
            "q": spec.q(),
            "runs": spec.runs(),
            "generators": generators,
            "defining_subgroup": words(&defining),
            "resolution": match res {
                fracfact::design::Resolution::Finite(r) => json!(r),
                fracfact::design::Resolution::Unbounded => json!(null),
            },
            "aliases": classes.iter().map(|c| words(c)).collect::<Vec<_>>(),
            "matrix": matrix.rows(),
        })),
        Format::Csv => {
            out.stdout.push_str(&csv_row(std::iter::once("run".to_string()).chain(letters)));
            for (i, row) in matrix.rows().iter().enumerate() {
                out.stdout.push_str(&csv_row(std::iter::once((i + 1) as i64).chain(row.iter().map(|&v| i64::from(v)))));
            }
        }
    }
    Ok(())
}

pub fn model(a: &ModelArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let pb = load_problem(sources, &a.inputs)?;
    let subgroup = expand_defining_contrast(&pb.spec)?;
    let report = estimability_report(&pb.model, &subgroup, pb.spec.runs());
    let x0t = pb.covariates.transpose_rows();
    let runs = pb.covariates.runs();
    let labels = words(pb.covariates.labels());
    let df = runs as i64 - pb.covariates.parameters() as i64;
    out.file(&a.export, write_matrix(&x0t, runs));
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let _ = writeln!(s, "model: {}", pb.model);
            let _ = writeln!(s, "columns: {}", labels.join(" "));
            let _ = writeln!(s, "parameters: {}, runs: {runs}, residual df: {df}", pb.covariates.parameters());
            let _ = writeln!(s, "aliases of the terms:\n{report}");
            let _ = writeln!(s, "transposed covariate matrix:");
            s.push_str(&write_matrix(&x0t, runs));
        }
        Format::Json => out.json(&json!({
            "model": pb.model.to_string(),
            "columns": labels,
            "parameters": pb.covariates.parameters(),
            "runs": runs,
            "df": df,
            "estimable": report.is_estimable(),
            "saturated": report.is_saturated(),
            "collisions": report.collisions.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect::<Vec<_>>(),
            "matrix": x0t,
        })),
        Format::Csv => {
            out.stdout.push_str(&csv_row(std::iter::once("run".to_string()).chain(labels)));
            for i in 0..runs {
                let row = (0..pb.covariates.parameters()).map(|c| i64::from(pb.covariates.entry(i, c)));
                out.stdout.push_str(&csv_row(std::iter::once((i + 1) as i64).chain(row)));
            }
        }
    }
    Ok(())
}

pub fn basis(a: &BasisArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let base = match &a.matrix {
        Some(path) => parse_matrix(&sources.read(path)?)?,
        None => {
            let inputs = crate::args::Inputs {
                bundle: a.bundle.clone(),
                design: a.design.clone(),
                model: a.model.clone(),
                no_closure: a.no_closure,
            };
            load_problem(sources, &inputs)?.covariates.transpose_rows()
        }
    };
    let matrix = if a.lifted { lawrence_lift(&IntMatrix::from_rows(&base)?).matrix().to_i64_rows()? } else { base };
    let cells = matrix.first().map_or(0, Vec::len);
    let set = match &a.source.import {
        Some(path) => import_basis(&sources.read(path)?, &matrix)?,
        None => compute_graver(&matrix, &a.budgets)?,
    };
    let sweep = match (a.verify_connectivity, a.total) {
        (true, Some(t)) => Some(connectivity_by_total(&set, &matrix, t, budget(&a.budgets))?),
        _ => None,
    };
    let text = set.to_text();
    out.file(&a.output, text.clone());
    let mut degrees = std::collections::BTreeMap::new();
    for m in set.moves() {
        *degrees.entry(m.degree()).or_insert(0usize) += 1;
    }
    let provenance = format!("{:?}", set.provenance()).to_lowercase();
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let _ = writeln!(s, "configuration: {} x {cells}, fingerprint {}", matrix.len(), set.fingerprint());
            let _ = writeln!(s, "moves: {} ({provenance})", set.len());
            let d: Vec<String> = degrees.iter().map(|(d, n)| format!("{n} of degree {d}")).collect();
            let _ = writeln!(s, "degrees: {}", d.join(", "));
            if let Some(sweep) = &sweep {
                let _ = writeln!(s, "connectivity by total:");
                for t in sweep {
                    let _ = write!(s, "  total {}: {} fibers, {} points, ", t.total, t.fibers, t.points);
                    match &t.witness {
                        None => {
                            let _ = writeln!(s, "all connected");
                        }
                        Some((u, v)) => {
                            let _ = writeln!(s, "{} disconnected, e.g. {u:?} and {v:?}", t.disconnected);
                        }
                    }
                }
                let broken: usize = sweep.iter().map(|t| t.disconnected).sum();
                let _ = writeln!(s, "{}", if broken == 0 { "all fibers connected" } else { "NOT all fibers connected" });
            }
            if a.output.is_none() {
                s.push_str(&text);
            }
        }
        Format::Json => out.json(&json!({
            "rows": matrix.len(),
            "cells": cells,
            "fingerprint": set.fingerprint(),
            "provenance": provenance,
            "count": set.len(),
            "moves": set.moves().iter().map(|m| m.as_slice()).collect::<Vec<_>>(),
            "connectivity": sweep,
        })),
        Format::Csv => {
            out.stdout.push_str(&csv_row((1..=cells).map(|i| format!("z{i}"))));
            for m in set.moves() {
                out.stdout.push_str(&csv_row(m.as_slice()));
            }
        }
    }
    Ok(())
}

/// Moves for the test: an explicit file, a fresh computation, the bundle's
/// basis, or (failing all) a computation. A lifted basis file is projected
/// onto the observed cells.
fn test_moves(a: &TestArgs, model: &NullModel, sources: &mut Sources) -> CliResult<MoveSet> {
    let k = model.fitted.len();
    let import = |text: &str| -> CliResult<MoveSet> {
        let cols = parse_matrix(text)?.first().map_or(0, Vec::len);
        if cols == 2 * k && matches!(model.family, Family::Binomial { .. }) {
            let lifted = lawrence_lift(&IntMatrix::from_rows(&model.matrix)?).matrix().to_i64_rows()?;
            Ok(import_basis(text, &lifted)?.project(&model.matrix, k)?)
        } else {
            Ok(import_basis(text, &model.matrix)?)
        }
    };
    if let Some(path) = &a.basis {
        return import(&sources.read(path)?);
    }
    let bundled = match (&a.inputs.bundle, &a.inputs.design, &a.inputs.model, a.inputs.no_closure) {
        (Some(name), None, None, false) if !a.compute_basis => find_bundle(name)?.basis.map(|t| (name.clone(), t)),
        _ => None,
    };
    match bundled {
        Some((name, text)) => import(&sources.embedded(&name, "basis", text)),
        // the Graver basis of the lifting projects onto that of X0'
        None => compute_graver(&model.matrix, &a.budgets),
    }
}

fn fitted_csv(y: &[i64], fitted: &[f64], family: &Family) -> String {
    let mut s = String::new();
    match family.denominators() {
        Some(n) => {
            s.push_str("run,observed,denominator,fitted\n");
            for i in 0..y.len() {
                s.push_str(&csv_row([(i + 1).to_string(), y[i].to_string(), n[i].to_string(), format!("{:.6}", fitted[i])]));
            }
        }
        None => {
            s.push_str("run,observed,fitted\n");
            for i in 0..y.len() {
                s.push_str(&csv_row([(i + 1).to_string(), y[i].to_string(), format!("{:.6}", fitted[i])]));
            }
        }
    }
    s
}

pub fn test(a: &TestArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let pb = load_problem(sources, &a.inputs)?;
    let (y, family) = load_data(sources, a.data.as_deref(), a.inputs.bundle.as_deref(), a.family, pb.covariates.runs())?;
    let (nm, fit) = NullModel::fit(&pb.covariates, &y, family.clone(), statistic(a.statistic))?;
    let moves = test_moves(a, &nm, sources)?;
    let cfg = ChainConfig { seed: a.seed, burn_in: a.burn_in, samples: a.samples, batches: a.batches, bins: a.bins };
    let r: TestResult = run_chains(&y, &moves, &nm, &cfg, a.chains)?;
    let provenance = format!("{:?}", moves.provenance()).to_lowercase();
    let report = json!({
        "model": pb.model.to_string(),
        "family": family.name(),
        "runs": y.len(),
        "parameters": pb.covariates.parameters(),
        "iterations": fit.iterations,
        "converged": fit.converged,
        "deviance": fit.deviance,
        "warnings": fit.warnings,
        "statistic": a.statistic,
        "t_obs": r.t_obs,
        "df": r.df,
        "p_asymptotic": r.p_asymptotic,
        "p_mcmc": r.p_mcmc,
        "se_batch": r.se_batch,
        "samples": r.samples,
        "burn_in": r.burn_in,
        "chains": r.chains,
        "batches": a.batches,
        "seed": a.seed,
        "moves": moves.len(),
        "moves_provenance": provenance,
        "moves_fingerprint": moves.fingerprint(),
        "mobility": r.mobility,
        "observed": y,
        "fitted": nm.fitted,
        "batch_means": r.batch_means,
    });
    out.file(&a.histogram, r.histogram.to_csv());
    out.file(&a.fitted, fitted_csv(&y, &nm.fitted, &family));
    out.file(&a.output, pretty(&report));
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let name = statistic(a.statistic).name();
            let _ = writeln!(s, "model: {} ({}, {} runs, {} parameters)", pb.model, family.name(), y.len(), pb.covariates.parameters());
            let _ = writeln!(s, "fit: {} after {} iterations", if fit.converged { "converged" } else { "not converged" }, fit.iterations);
            for w in &fit.warnings {
                let _ = writeln!(s, "  warning: {w}");
            }
            let _ = writeln!(s, "moves: {} ({provenance}, fingerprint {})", moves.len(), moves.fingerprint());
            let _ = writeln!(s, "{name} = {}, df = {}", fmt_stat(r.t_obs), r.df);
            let _ = writeln!(s, "p-value (asymptotic chi-square): {}", fmt_p(r.p_asymptotic));
            let _ = writeln!(s, "p-value (MCMC): {:.4}  batch SE {:.5}", r.p_mcmc, r.se_batch);
            let _ = writeln!(
                s,
                "chain: {} x {} samples after {} burn-in, {} batches, seed {}, mobility {:.3}",
                r.chains, a.samples, r.burn_in, a.batches, a.seed, r.mobility
            );
            let _ = writeln!(s, "fitted values:");
            let _ = writeln!(s, "{:>4} {:>9} {:>10}", "run", "observed", "fitted");
            for (i, (o, m)) in y.iter().zip(&nm.fitted).enumerate() {
                let _ = writeln!(s, "{:>4} {:>9} {:>10.2}", i + 1, o, m);
            }
        }
        Format::Json => out.json(&report),
        Format::Csv => {
            out.stdout.push_str("statistic,t_obs,df,p_asymptotic,p_mcmc,se_batch,samples,burn_in,chains,seed,moves,mobility\n");
            out.stdout.push_str(&csv_row([
                statistic(a.statistic).name().to_string(),
                r.t_obs.to_string(),
                r.df.to_string(),
                r.p_asymptotic.map_or(String::new(), |p| p.to_string()),
                r.p_mcmc.to_string(),
                r.se_batch.to_string(),
                r.samples.to_string(),
                r.burn_in.to_string(),
                r.chains.to_string(),
                a.seed.to_string(),
                moves.len().to_string(),
                r.mobility.to_string(),
            ]));
        }
    }
    Ok(())
}

pub fn enumerate(a: &EnumerateArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let pb = load_problem(sources, &a.inputs)?;
    let (y, family) = load_data(sources, a.data.as_deref(), a.inputs.bundle.as_deref(), a.family, pb.covariates.runs())?;
    let (nm, _) = NullModel::fit(&pb.covariates, &y, family.clone(), statistic(a.statistic))?;
    let target = sufficient_statistic(&nm.matrix, &y)?;
    let fiber = enumerate_fiber(&nm.matrix, &target, family.upper_bounds(), budget(&a.budgets))?;
    let probs = exact_null_distribution(&fiber, &family);
    let t_obs = nm.statistic_of(&y);
    let stats: Vec<f64> = fiber.points().iter().map(|p| nm.statistic_of(p)).collect();
    let p_exact: f64 = stats.iter().zip(&probs).filter(|(t, _)| at_least(**t, t_obs)).map(|(_, p)| p).sum::<f64>().min(1.0);
    let p_asym = nm.asymptotic_pvalue(t_obs);
    if a.points.is_some() {
        let mut csv = csv_row((1..=y.len()).map(|i| format!("y{i}")).chain(["probability".into(), "statistic".into()]));
        for ((p, pr), t) in fiber.points().iter().zip(&probs).zip(&stats) {
            csv.push_str(&csv_row(p.iter().map(i64::to_string).chain([pr.to_string(), t.to_string()])));
        }
        out.file(&a.points, csv);
    }
    let report = json!({
        "model": pb.model.to_string(),
        "family": family.name(),
        "fiber_size": fiber.len(),
        "statistic": a.statistic,
        "t_obs": t_obs,
        "df": nm.df,
        "p_exact": p_exact,
        "p_asymptotic": p_asym,
    });
    out.file(&a.output, pretty(&report));
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let _ = writeln!(s, "model: {} ({}, {} runs)", pb.model, family.name(), y.len());
            let _ = writeln!(s, "fiber size: {}", fiber.len());
            let _ = writeln!(s, "{} = {}, df = {}", statistic(a.statistic).name(), fmt_stat(t_obs), nm.df);
            let _ = writeln!(s, "p-value (exact): {p_exact:.4}");
            let _ = writeln!(s, "p-value (asymptotic chi-square): {}", fmt_p(p_asym));
        }
        Format::Json => out.json(&report),
        Format::Csv => {
            out.stdout.push_str("fiber_size,statistic,t_obs,df,p_exact,p_asymptotic\n");
            out.stdout.push_str(&csv_row([
                fiber.len().to_string(),
                statistic(a.statistic).name().to_string(),
                t_obs.to_string(),
                nm.df.to_string(),
                p_exact.to_string(),
                p_asym.map_or(String::new(), |p| p.to_string()),
            ]));
        }
    }
    Ok(())
}

pub fn correspond(a: &CorrespondArgs, format: Format, sources: &mut Sources, out: &mut Outputs) -> CliResult<()> {
    let pb = load_problem(sources, &a.inputs)?;
    let report = correspondence_report(&pb.spec, &pb.model, a.lifted)?;
    let primitive = match &report.verdict {
        Correspondence::Hierarchical(tm) => match primitive_moves_for_decomposable(tm) {
            Ok(ms) => Some(ms),
            Err(fracfact::Error::NotDecomposable(_)) => None,
            Err(e) => return Err(e.into()),
        },
        _ => None,
    };
    let table = report.table_model().map(|t| t.to_string());
    if let Some(ms) = &primitive {
        out.file(&a.output, ms.to_text());
    }
    match format {
        Format::Text => {
            let s = &mut out.stdout;
            let _ = writeln!(s, "model: {}{}", pb.model, if a.lifted { " (lifted)" } else { "" });
            let _ = writeln!(s, "{report}");
            match &primitive {
                Some(ms) => {
                    let _ = writeln!(s, "decomposable: {} primitive moves", ms.len());
                    s.push_str(&ms.to_text());
                }
                None if matches!(report.verdict, Correspondence::Hierarchical(_)) => {
                    let _ = writeln!(s, "not decomposable");
                }
                None => {}
            }
        }
        Format::Json => out.json(&json!({
            "model": pb.model.to_string(),
            "axes": report.axes,
            "lifted": report.lifted,
            "verdict": report.to_string(),
            "table_model": table,
            "decomposable": primitive.is_some(),
            "moves": primitive.as_ref().map(|ms| ms.moves().iter().map(|m| m.as_slice().to_vec()).collect::<Vec<_>>()),
        })),
        Format::Csv => {
            out.stdout.push_str("model,axes,lifted,table_model,decomposable\n");
            out.stdout.push_str(&csv_row([
                pb.model.to_string(),
                report.axes.to_string(),
                report.lifted.to_string(),
                table.unwrap_or_default(),
                primitive.is_some().to_string(),
            ]));
        }
    }
    Ok(())
}
