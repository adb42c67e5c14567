//! Acceptance criteria 1-9. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fracfact::correspond::{correspondence_report, find_hierarchical, null_model_configuration, primitive_moves_for_decomposable, table_model_matrix, Correspondence, TableModel};
use fracfact::datasets::{WAVE_SOLDER, WAVE_SOLDER_CD_VARIANT_BASIS, WAVE_SOLDER_CD_VARIANT_MATRIX, WINDSHIELD};
use fracfact::design::{build_design_matrix, DesignSpec, Word};
use fracfact::family::Family;
use fracfact::fiber::{enumerate_fiber, exact_null_distribution, exact_pvalue, Budget};
use fracfact::formats::parse_matrix;
use fracfact::glm::{fit, log_likelihood, score, Statistic};
use fracfact::lattice::{kernel_basis_i64, IntMatrix};
use fracfact::model::{build_covariate_matrix, lawrence_lift, sufficient_statistic, CovariateMatrix, ModelSpec};
use fracfact::moves::{connectivity_by_total, graver_completion, import_basis, CompletionOptions, MoveSet, Provenance};
use fracfact::sampler::{run_chain, run_chain_observed, ChainConfig, NullModel};
use fracfact::special::chisq_upper_tail;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn graver(matrix: &[Vec<i64>]) -> MoveSet {
    let basis = kernel_basis_i64(&IntMatrix::from_rows(matrix).unwrap()).unwrap();
    let g = graver_completion(&basis, CompletionOptions::default()).unwrap();
    MoveSet::new(matrix, g.into_iter().map(|m| m.into_vec()).collect(), Provenance::Computed).unwrap()
}

fn covariates(design: &str, model: &str) -> (DesignSpec, ModelSpec, CovariateMatrix) {
    let spec = DesignSpec::parse(design).unwrap();
    let model = ModelSpec::parse(model, true).unwrap();
    let x = build_covariate_matrix(&build_design_matrix(&spec), &model).unwrap();
    (spec, model, x)
}

fn deviance_reproduction() -> Outcome {
    let start = Instant::now();
    let w = WAVE_SOLDER.load().unwrap();
    let f = fit(&w.covariates.rows_f64(), &w.y, &w.family).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mu = &f.mu;
    let ok = (f.deviance - 19.096).abs() <= 0.005
        && f.df == 6
        && (mu[0] - 64.53).abs() <= 0.01
        && (mu[1] - 47.25).abs() <= 0.01
        && (mu[15] - 51.42).abs() <= 0.01
        && elapsed < 1.0;
    (ok, format!("G2 = {:.4}, df = {}, mu = {:.2}, {:.2}, .., {:.2}, {:.3} s", f.deviance, f.df, mu[0], mu[1], mu[15], elapsed))
}

fn asymptotic_p() -> Outcome {
    let p = chisq_upper_tail(19.096, 6);
    let w = WAVE_SOLDER.load().unwrap();
    let f = fit(&w.covariates.rows_f64(), &w.y, &w.family).unwrap();
    let ours = chisq_upper_tail(f.deviance, 6);
    ((p - 0.0040).abs() <= 0.0001, format!("upper tail at 19.096 = {p:.5}; at the fitted G2 = {ours:.5}"))
}

fn mcmc_reproduction() -> Outcome {
    let cfg = ChainConfig { seed: 0, burn_in: 100_000, samples: 1_000_000, batches: 100, bins: 100 };
    let in_range = |p: f64, se: f64| (0.017..=0.047).contains(&p) && (0.002..=0.008).contains(&se);
    let w = WAVE_SOLDER.load().unwrap();
    let (null, _) = NullModel::fit(&w.covariates, &w.y, w.family.clone(), Statistic::LikelihoodRatio).unwrap();

    let g = graver(&null.matrix);
    let a = run_chain(&w.y, &g, &null, &cfg).unwrap();
    let b = run_chain(&w.y, w.basis.as_ref().unwrap(), &null, &cfg).unwrap();

    // the printed 35-move basis only fits the printed matrix (row 7 = CD)
    let printed = parse_matrix(WAVE_SOLDER_CD_VARIANT_MATRIX).unwrap();
    let mut labels: Vec<Word> = w.covariates.labels().to_vec();
    labels[6] = Word::parse("CD").unwrap();
    let cols = printed.iter().map(|r| r.iter().map(|&v| v as i32).collect()).collect();
    let x_cd = CovariateMatrix::from_columns(labels, cols).unwrap();
    let (null_cd, fit_cd) = NullModel::fit(&x_cd, &w.y, Family::Poisson, Statistic::LikelihoodRatio).unwrap();
    let basis35 = import_basis(WAVE_SOLDER_CD_VARIANT_BASIS, &printed).unwrap();
    let c = run_chain(&w.y, &basis35, &null_cd, &cfg).unwrap();

    let ok = in_range(a.p_mcmc, a.se_batch) || in_range(c.p_mcmc, c.se_batch);
    (
        ok,
        format!(
            "Graver ({} moves): p = {:.4}, SE = {:.5}; shipped 23-move basis: p = {:.4}, SE = {:.5}; \
             35-move basis on the printed matrix (G2 = {:.3}): p = {:.4}, SE = {:.5}; target p in [0.017, 0.047], SE in [0.002, 0.008]",
            g.len(),
            a.p_mcmc,
            a.se_batch,
            b.p_mcmc,
            b.se_batch,
            fit_cd.deviance,
            c.p_mcmc,
            c.se_batch
        ),
    )
}

fn basis_import() -> Outcome {
    let header = WAVE_SOLDER_CD_VARIANT_BASIS.lines().find(|l| !l.trim().is_empty()).unwrap().split_whitespace().collect::<Vec<_>>();
    let printed = parse_matrix(WAVE_SOLDER_CD_VARIANT_MATRIX).unwrap();
    let set = import_basis(WAVE_SOLDER_CD_VARIANT_BASIS, &printed).unwrap();
    let annihilated = set.moves().iter().all(|m| printed.iter().all(|r| r.iter().zip(m.as_slice()).map(|(a, b)| a * b).sum::<i64>() == 0));
    let zero_sum = set.moves().iter().all(|m| m.as_slice().iter().sum::<i64>() == 0);
    let ok = header == ["35", "16"] && set.len() == 35 && annihilated && zero_sum;
    (ok, format!("header {:?}, {} moves, X0'z = 0: {annihilated}, sum z = 0: {zero_sum}", header, set.len()))
}

fn oracle_agreement() -> Outcome {
    let designs = [("3 0", "A/B/C"), ("3 0", "AB/C"), ("3 0", "AB/AC"), ("3 0", "AB/AC/BC"), ("4 1\nD=ABC", "A/B/C/D"), ("4 1\nD=ABC", "AB/C/D")];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut agree = 0;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (d, m) = designs[i % designs.len()];
        let (_, _, x) = covariates(d, m);
        let y: Vec<i64> = (0..8).map(|_| rng.gen_range(0..=8)).collect();
        let (null, _) = NullModel::fit(&x, &y, Family::Poisson, Statistic::LikelihoodRatio).unwrap();
        let fiber = enumerate_fiber(&null.matrix, &sufficient_statistic(&null.matrix, &y).unwrap(), None, Budget::default()).unwrap();
        let exact = exact_pvalue(&fiber, &Family::Poisson, |v| null.statistic_of(v), null.statistic_of(&y));
        let moves = graver(&null.matrix);
        let cfg = ChainConfig { seed: i as u64, burn_in: 10_000, samples: 100_000, batches: 100, bins: 10 };
        let r = run_chain(&y, &moves, &null, &cfg).unwrap();
        let gap = (r.p_mcmc - exact).abs();
        let z = if r.se_batch > 0.0 { gap / r.se_batch } else if gap < 1e-12 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        if z <= 3.0 {
            agree += 1;
        }
    }
    (agree >= 18, format!("{agree}/20 instances within 3 batch SEs of the exact p (largest gap {worst:.2} SE)"))
}

fn connectivity() -> Outcome {
    let (spec, model, x) = covariates("5 2\nD=AB\nE=AC", "A/B/C/D/E");
    let report = correspondence_report(&spec, &model, false).unwrap();
    let tm = match report.verdict {
        Correspondence::Hierarchical(tm) => tm,
        v => return (false, format!("unexpected correspondence {v:?}")),
    };
    let moves = primitive_moves_for_decomposable(&tm).unwrap();
    let expected = [vec![1, -1, -1, 1, 0, 0, 0, 0], vec![0, 0, 0, 0, 1, -1, -1, 1]];
    let got: Vec<Vec<i64>> = moves.moves().iter().map(|m| m.as_slice().to_vec()).collect();
    let matrix = x.transpose_rows();
    let moves = MoveSet::new(&matrix, got.clone(), Provenance::Primitive).unwrap();
    let sweep = connectivity_by_total(&moves, &matrix, 6, Budget::default()).unwrap();
    let fibers: usize = sweep.iter().map(|s| s.fibers).sum();
    let connected = sweep.iter().all(|s| s.disconnected == 0);
    let mut each_needed = true;
    for drop in 0..moves.len() {
        let mut i = 0;
        let rest = moves.filtered(|_| {
            i += 1;
            i - 1 != drop
        });
        let s = connectivity_by_total(&rest, &matrix, 6, Budget::default()).unwrap();
        each_needed &= s.iter().any(|s| s.disconnected > 0);
    }
    let ok = got.len() == 2 && expected.iter().all(|e| got.contains(e)) && connected && each_needed;
    (ok, format!("{} moves, {fibers} fibers with total <= 6 all connected: {connected}; each move needed: {each_needed}", got.len()))
}

fn correspondence_table() -> Outcome {
    let tm = |axes: usize, s: &str| TableModel::parse(axes, s).unwrap();
    let rows: [(&str, &str, &str, bool); 11] = [
        ("4 1\nD=ABC", "A/B/C/D", "A/B/C + (ABC)", false),
        ("4 1\nD=ABC", "AB/C/D", "AB/C + (ABC)", false),
        ("4 1\nD=ABC", "AB/AC/D", "AB/AC + (ABC)", false),
        ("5 2\nD=AB\nE=AC", "A/B/C/D/E", "AB/AC", true),
        ("5 2\nD=AB\nE=AC", "A/BC/D/E", "AB/AC/BC", true),
        ("5 2\nD=AB\nE=AC", "A/BE/C/D", "AB/AC + (ABC)", false),
        ("6 3\nD=AB\nE=AC\nF=BC", "A/B/C/D/E/F", "AB/AC/BC", true),
        ("6 2\nE=ABC\nF=ABD", "AB/AC/AD/BC/BD/E/F", "ABC/ABD", true),
        ("6 2\nE=ABC\nF=ABD", "AB/AC/AD/BC/BD/CD/E/F", "ABC/ABD/CD", true),
        ("7 3\nE=ABC\nF=ABD\nG=ACD", "AB/AC/AD/BC/BD/CD/E/F/G", "ABC/ABD/ACD", true),
        ("8 4\nE=ABC\nF=ABD\nG=ACD\nH=BCD", "AB/AC/AD/BC/BD/CD/E/F/G/H", "ABC/ABD/ACD/BCD", true),
    ];
    let mut verified = 0;
    let mut failures = Vec::new();
    for (d, m, want, hierarchical) in rows {
        let (spec, model, _) = covariates(d, m);
        let (axes, x) = null_model_configuration(&spec, &model, false).unwrap();
        let want = tm(axes, want);
        let equivalent = fracfact::correspond::equivalent_sufficient_statistics(&x, &table_model_matrix(&want));
        let verdict = correspondence_report(&spec, &model, false).unwrap().verdict;
        let matches = match (&verdict, hierarchical) {
            (Correspondence::Hierarchical(t), true) | (Correspondence::WithExtras(t), false) => t == &want,
            _ => false,
        };
        if equivalent && matches {
            verified += 1;
        } else {
            failures.push(m);
        }
    }
    let (spec, model, _) = covariates("5 1\nE=ABCD", "A/B/C/D/E");
    let (_, x) = null_model_configuration(&spec, &model, false).unwrap();
    let negative = find_hierarchical(&x, 4).is_none();
    let ok = failures.is_empty() && negative;
    (ok, format!("{verified}/11 rows verified{}; E=ABCD main effects without hierarchical correspondent: {negative}", if failures.is_empty() { String::new() } else { format!(" (failed: {failures:?})") }))
}

fn binomial_path() -> Outcome {
    let w = WINDSHIELD.load().unwrap();
    let n = w.family.denominators().unwrap().to_vec();
    let (null, f) = NullModel::fit(&w.covariates, &w.y, w.family.clone(), Statistic::LikelihoodRatio).unwrap();
    let x0t = w.covariates.transpose_rows();
    let (nu, k) = (x0t.len(), w.y.len());
    let lifted = lawrence_lift(&IntMatrix::from_rows(&x0t).unwrap()).matrix().to_i64_rows().unwrap();
    let blocks = lifted.len() == nu + k
        && (0..nu).all(|r| lifted[r][..k] == x0t[r][..] && lifted[r][k..].iter().all(|&v| v == 0))
        && (0..k).all(|i| (0..2 * k).all(|c| lifted[nu + i][c] == i64::from(c == i || c == k + i)));
    let lifted_graver = graver(&lifted);
    let complement = lifted_graver.moves().iter().all(|m| (0..k).all(|i| m.as_slice()[k + i] == -m.as_slice()[i]));
    let moves = lifted_graver.project(&null.matrix, k).unwrap();
    let mut within = true;
    let mut visited = 0u64;
    let r = run_chain_observed(&w.y, &moves, &null, &ChainConfig::default(), |y| {
        visited += 1;
        within &= y.iter().zip(&n).all(|(&v, &m)| (0..=m).contains(&v));
    })
    .unwrap();
    let ok = f.converged && blocks && complement && within && visited > 0;
    (
        ok,
        format!(
            "fit converged in {} iterations (G2 = {:.3}, df = {}); lifted blocks: {blocks}; {} lifted moves with z[k+i] = -z[i]: {complement}; \
             {visited} visited states within 0..=1000: {within}; p_mcmc = {:.4}",
            f.iterations, f.deviance, f.df, lifted_graver.len(), r.p_mcmc
        ),
    )
}

fn numerical_hygiene() -> Outcome {
    let w = WAVE_SOLDER.load().unwrap();
    let x = w.covariates.rows_f64();
    let beta: Vec<f64> = (0..x[0].len()).map(|j| if j == 0 { 4.0 } else { 0.05 * (j as f64 - 4.5) }).collect();
    let s = score(&x, &w.y, &beta, &w.family);
    let eta = |b: &[f64]| -> Vec<f64> { x.iter().map(|r| r.iter().zip(b).map(|(a, c)| a * c).sum()).collect() };
    let mut worst = 0.0f64;
    for j in 0..beta.len() {
        let h = 1e-5;
        let (mut up, mut down) = (beta.clone(), beta.clone());
        up[j] += h;
        down[j] -= h;
        let fd = (log_likelihood(&w.y, &eta(&up), &w.family) - log_likelihood(&w.y, &eta(&down), &w.family)) / (2.0 * h);
        worst = worst.max((fd - s[j]).abs() / s[j].abs().max(1.0));
    }

    let (_, _, xs) = covariates("4 1\nD=ABC", "A/B/C/D");
    let m = xs.transpose_rows();
    let y = [3, 1, 0, 2, 1, 4, 0, 1];
    let fiber = enumerate_fiber(&m, &sufficient_statistic(&m, &y).unwrap(), None, Budget::default()).unwrap();
    let total: f64 = exact_null_distribution(&fiber, &Family::Poisson).iter().sum();

    let (null, _) = NullModel::fit(&w.covariates, &w.y, Family::Poisson, Statistic::LikelihoodRatio).unwrap();
    let cfg = ChainConfig { seed: 42, burn_in: 1_000, samples: 50_000, batches: 50, bins: 20 };
    let basis = w.basis.as_ref().unwrap();
    let a = run_chain(&w.y, basis, &null, &cfg).unwrap();
    let b = run_chain(&w.y, basis, &null, &cfg).unwrap();
    let same = a.p_mcmc.to_bits() == b.p_mcmc.to_bits()
        && a.batch_means.iter().map(|v| v.to_bits()).eq(b.batch_means.iter().map(|v| v.to_bits()))
        && a.histogram.counts == b.histogram.counts;
    let ok = worst < 1e-6 && (total - 1.0).abs() < 1e-12 && same;
    (ok, format!("score vs finite differences {worst:.1e} relative; weights sum to 1 - {:.1e}; repeated seeded runs identical: {same}", 1.0 - total))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("deviance reproduction", deviance_reproduction),
        ("asymptotic p", asymptotic_p),
        ("MCMC reproduction", mcmc_reproduction),
        ("basis import", basis_import),
        ("oracle agreement", oracle_agreement),
        ("connectivity", connectivity),
        ("correspondence table", correspondence_table),
        ("binomial path", binomial_path),
        ("numerical hygiene", numerical_hygiene),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(e) => (false, format!("panicked: {}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {}: {} {name}: {detail} [{:.1} s]", i + 1, if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
