//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use holgrim::bench::{bench, BenchConfig, Sweep};
use holgrim::combinatorics::JetLayout;
use holgrim::compact::{compact_pipeline, CompactConfig};
use holgrim::functionals::{sigma_star, tau};
use holgrim::geometry::{exact_packing, solve_r, ThresholdQuery};
use holgrim::holgrim::{intermediate_bound, run, Config, Problem, RunResult, Termination};
use holgrim::jets::{linear_combination, Domain, JetFunction};
use holgrim::problems::{gen_problem, probe_error, GeneratorSpec};
use holgrim::recombination::{reduce, ReductionInput};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lift<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `Σ_i w_i m_{·i}` computed column by column.
fn moments_of(moments: &DMatrix<f64>, support: &[usize], weights: &[f64]) -> Vec<f64> {
    (0..moments.nrows())
        .map(|r| support.iter().zip(weights).map(|(&i, w)| w * moments[(r, i)]).sum())
        .collect()
}

/// Nonnegative exact solution of `[1; M]_S w = [total; target]` on the subset
/// `S`, if one exists.
fn subset_solution(moments: &DMatrix<f64>, subset: &[usize], total: f64, target: &[f64]) -> Option<Vec<f64>> {
    let rows = moments.nrows() + 1;
    let a = DMatrix::from_fn(rows, subset.len(), |r, j| if r == 0 { 1.0 } else { moments[(r - 1, subset[j])] });
    let mut rhs = vec![total];
    rhs.extend_from_slice(target);
    let b = DVector::from_vec(rhs.clone());
    let w = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let residual = (&a * &w - &b).amax();
    let scale = 1.0 + inf_norm(&rhs);
    (residual <= 1e-9 * scale && w.iter().all(|&x| x >= -1e-12 * scale)).then(|| w.iter().copied().collect())
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= max)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, q: usize) -> ReductionInput {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let mut moments = DMatrix::from_fn(q - 1, n, |_, _| rng.gen_range(-1.0..1.0));
    match rng.gen_range(0..3) {
        // repeated columns
        0 if n > 1 => {
            for i in 0..n / 3 {
                let src = rng.gen_range(0..n);
                let col = moments.column(src).into_owned();
                moments.set_column(i, &col);
            }
        }
        // low-rank moments
        1 if q > 2 => {
            let first = moments.row(0).into_owned();
            for r in 1..q - 1 {
                let s = rng.gen_range(-2.0..2.0);
                moments.set_row(r, &(&first * s));
            }
        }
        _ => {}
    }
    ReductionInput { weights, moments, tolerance: 0.0 }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let small = case % 2 == 0;
        let (n, q) = if small {
            (rng.gen_range(1..=12), rng.gen_range(1..=4))
        } else {
            (rng.gen_range(1..=50), rng.gen_range(1..=10))
        };
        let input = random_instance(&mut rng, n, q);
        let out = lift(reduce(&input))?;
        let all: Vec<usize> = (0..n).collect();
        let target = moments_of(&input.moments, &all, &input.weights);
        let total: f64 = input.weights.iter().sum();

        ensure!(out.support.len() <= q, "case {case}: support {} > Q = {q}", out.support.len());
        ensure!(out.weights.iter().all(|&w| w >= 0.0), "case {case}: negative weight");
        let sum: f64 = out.weights.iter().sum();
        ensure!((sum - total).abs() <= 1e-12 * total, "case {case}: weight sum {sum} vs {total}");
        let got = moments_of(&input.moments, &out.support, &out.weights);
        let residual = got.iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = 1.0 + inf_norm(&target);
        ensure!(residual <= 1e-9 * scale, "case {case}: moment residual {residual:e}");
        worst = worst.max(residual / scale);

        if small {
            let feasible: Vec<Vec<f64>> = subsets(n, q)
                .into_iter()
                .filter_map(|s| subset_solution(&input.moments, &s, total, &target).map(|w| moments_of(&input.moments, &s, &w)))
                .collect();
            ensure!(!feasible.is_empty(), "case {case}: oracle found no feasible subset");
            for oracle in &feasible {
                let gap = oracle.iter().zip(&got).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                ensure!(gap <= 1e-8, "case {case}: oracle moment gap {gap:e}");
            }
            ensure!(
                subset_solution(&input.moments, &out.support, total, &target).is_some(),
                "case {case}: returned support is not oracle-feasible"
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "runtime {elapsed:?}");
    Ok(format!("200 instances, worst relative residual {worst:.1e}, {elapsed:.2?}"))
}

/// Sorted tuples of length `l` over `0..d`, counted by brute force over
/// `d^l` tuples.
fn sorted_tuples(d: usize, l: usize) -> usize {
    let total = d.pow(l as u32);
    (0..total)
        .filter(|&code| {
            let mut digits = Vec::with_capacity(l);
            let mut c = code;
            for _ in 0..l {
                digits.push(c % d);
                c /= d;
            }
            digits.windows(2).all(|w| w[0] >= w[1])
        })
        .count()
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    for d in 1..=4 {
        for c in 1..=3 {
            let layout = lift(JetLayout::new(d, c, 3))?;
            for l in 0..=3 {
                let dl: usize = (0..=l).map(|j| sorted_tuples(d, j)).sum();
                for p in 0..3 {
                    let t = lift(tau(&layout, p, l))?;
                    ensure!(t.len() == c * dl, "|tau| = {} for d={d} c={c} l={l}", t.len());
                }
                for lambda in 1..=20 {
                    let s = lift(sigma_star(&layout, lambda, l))?;
                    ensure!(s.len() == c * dl * lambda, "|sigma*| = {} for d={d} c={c} l={l} L={lambda}", s.len());
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (d, c, l, Lambda) combinations"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = 0;
    for d in 1..=3 {
        let domain = Arc::new(lift(Domain::new(vec![vec![0.0; d]]))?);
        for c in 1..=2 {
            for l in 0..=2 {
                let gamma = l as f64 + 1.0;
                let zero = lift(JetFunction::zeros(domain.clone(), gamma, c))?;
                let block = zero.table().len();
                let functionals = lift(tau(zero.layout(), 0, l))?;
                let check = |f: &JetFunction| -> Result<(f64, f64), String> {
                    let a = functionals.slots().iter().fold(0.0f64, |m, &s| m.max(f.table()[s].abs()));
                    Ok((a, lift(f.lambda_l(0, l))?))
                };
                for _ in 0..100 {
                    let table: Vec<f64> = (0..block).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let f = lift(JetFunction::new(domain.clone(), gamma, c, table))?;
                    let (a, lambda) = check(&f)?;
                    let bound = (c * d.pow(l as u32)) as f64 * a;
                    ensure!(lambda <= bound * (1.0 + 1e-12), "Lambda {lambda} > c d^l A = {bound} (d={d} c={c} l={l})");
                    ensure!(a <= lambda * (1.0 + 1e-12), "functional {a} > Lambda {lambda} (d={d} c={c} l={l})");
                    cases += 1;
                }
                let (a, lambda) = check(&zero)?;
                ensure!(a == 0.0 && lambda == 0.0, "zero jet gives A = {a}, Lambda = {lambda}");
                for slot in functionals.slots() {
                    let mut table = vec![0.0; block];
                    table[*slot] = 1e-300;
                    let f = lift(JetFunction::new(domain.clone(), gamma, c, table))?;
                    let (a, lambda) = check(&f)?;
                    ensure!(a > 0.0 && lambda > 0.0, "single entry at slot {slot} gives A = {a}, Lambda = {lambda}");
                }
            }
        }
    }
    Ok(format!("{cases} random jets plus zero-equivalence"))
}

struct EndToEnd {
    problem: Problem,
    config: Config,
    result: RunResult,
    elapsed: Duration,
}

fn end_to_end(seed: u64) -> Result<EndToEnd, String> {
    let mut spec = GeneratorSpec::gaussian(300, 100, 2, 2.0, seed);
    spec.positive = true;
    let problem = lift(gen_problem(&spec))?;
    let q = 1;
    let epsilon = 0.1 * problem.norm_budget();
    let epsilon0 = epsilon / (4.0 * problem.outputs() as f64 * (problem.dim() as f64).powi(q as i32));
    let config = Config::single_point(epsilon, epsilon0, q, Config::max_single_steps(&problem), seed);
    let start = Instant::now();
    let result = lift(run(&problem, &config))?;
    Ok(EndToEnd { problem, config, result, elapsed: start.elapsed() })
}

fn criterion_4(e: &EndToEnd) -> Outcome {
    let (problem, result) = (&e.problem, &e.result);
    ensure!(matches!(result.termination, Termination::Criterion { .. }), "no termination: {:?}", result.termination);
    // accuracy from the closed-form features, not the stored jets
    let analytic = problem.analytic().ok_or("generated problem lacks closed forms")?;
    let mut diff: Vec<(usize, f64)> = problem.coefficients().iter().copied().enumerate().collect();
    for (&i, &c) in result.support.iter().zip(&result.coefficients) {
        diff.push((i, -c));
    }
    let worst = problem
        .domain()
        .points()
        .map(|z| analytic.lambda_at(&diff, z, e.config.order_level))
        .fold(0.0, f64::max);
    ensure!(worst <= e.config.epsilon, "max Lambda^q = {worst} > epsilon = {}", e.config.epsilon);
    let sum: f64 = result
        .support
        .iter()
        .zip(&result.coefficients)
        .map(|(&i, c)| c.abs() * problem.scalings()[i])
        .sum();
    let c = problem.norm_budget();
    ensure!((sum - c).abs() <= 1e-10 * c, "coefficient sum {sum} vs C = {c}");
    ensure!(result.coefficients.iter().all(|&x| x >= 0.0), "negative coefficient");
    let m = result.selected_points.len();
    let per_point: usize = (0..=problem.max_order()).map(|j| sorted_tuples(problem.dim(), j)).sum();
    let bound = 1 + m * problem.outputs() * per_point;
    ensure!(result.support.len() <= bound, "support {} > {bound}", result.support.len());
    ensure!(e.elapsed < Duration::from_secs(60), "runtime {:?}", e.elapsed);
    Ok(format!(
        "{} steps, support {}, max Lambda^1 {:.3e} <= {:.3e}, {:.2?}",
        result.steps_completed(),
        result.support.len(),
        worst,
        e.config.epsilon,
        e.elapsed
    ))
}

fn separation_radius(e: &EndToEnd) -> Result<f64, String> {
    lift(solve_r(&ThresholdQuery {
        norm_budget: e.problem.norm_budget(),
        gamma: e.problem.gamma(),
        epsilon: e.config.epsilon,
        epsilon0: e.config.epsilon0,
        outputs: e.problem.outputs(),
        dim: e.problem.dim(),
        level: e.config.order_level,
    }))
}

fn criterion_5(runs: &[EndToEnd]) -> Outcome {
    let mut tightest = f64::INFINITY;
    for (seed, e) in runs.iter().enumerate() {
        let r = separation_radius(e)?;
        let pts = &e.result.selected_points;
        let domain = e.problem.domain();
        for (a, &p) in pts.iter().enumerate() {
            for &q in &pts[a + 1..] {
                let dist = domain
                    .point(p)
                    .iter()
                    .zip(domain.point(q))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                ensure!(dist > r, "seed {seed}: points {p}, {q} at {dist} <= r = {r}");
                tightest = tightest.min(dist / r);
            }
        }
    }
    Ok(format!("{} seeds, smallest distance / r = {tightest:.3}", runs.len()))
}

fn criterion_6() -> Outcome {
    let mut summary = Vec::new();
    for seed in 0..20u64 {
        let lambda = 8 + (seed % 8) as usize;
        let mut spec = GeneratorSpec::gaussian(60, lambda, 2, 2.0, 100 + seed);
        spec.positive = seed % 2 == 0;
        let problem = lift(gen_problem(&spec))?;
        let epsilon = 0.02 * problem.norm_budget();
        let q = 0;
        let epsilon0 = epsilon / (4.0 * problem.outputs() as f64);
        let config = Config::single_point(epsilon, epsilon0, q, Config::max_single_steps(&problem), seed);
        let result = lift(run(&problem, &config))?;
        let r = lift(solve_r(&ThresholdQuery {
            norm_budget: problem.norm_budget(),
            gamma: problem.gamma(),
            epsilon,
            epsilon0,
            outputs: problem.outputs(),
            dim: problem.dim(),
            level: q,
        }))?;
        let packing = lift(exact_packing(problem.domain(), r))?;
        ensure!(
            result.steps_completed() <= packing,
            "seed {seed}: {} steps > packing number {packing}",
            result.steps_completed()
        );
        summary.push(format!("{}/{}", result.steps_completed(), packing));
    }
    Ok(format!("steps/packing: {}", summary.join(" ")))
}

fn criterion_7(e: &EndToEnd) -> Outcome {
    let problem = &e.problem;
    let phi = problem.target();
    let q = e.config.order_level;
    let c = problem.norm_budget();
    let mut selected: Vec<usize> = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0;
    for step in &e.result.steps {
        selected.extend(&step.new_points);
        let u = lift(problem.assemble(&step.coefficients))?;
        let diff = lift(linear_combination(&[(1.0, &phi), (-1.0, &u)]))?;
        for z in 0..problem.domain().len() {
            let dist = problem.domain().distance_to_set(problem.domain().point(z), &selected);
            let bound = intermediate_bound(c, problem.gamma(), q, e.config.epsilon0, dist);
            let value = lift(diff.lambda_l(z, q))?;
            ensure!(value <= bound + 1e-9 * (1.0 + bound), "step {} point {z}: {value} > {bound}", step.step);
            worst = worst.max(value - bound);
            checks += 1;
        }
    }
    Ok(format!("{checks} (step, point) pairs, max value - bound = {worst:.3e}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut spec = GeneratorSpec::gaussian(200, 1, 2, 2.0, 8);
    spec.positive = true;
    let generated = lift(gen_problem(&spec))?;
    let analytic = generated.analytic().ok_or("missing closed forms")?.clone();
    let coefficients = generated.coefficients().to_vec();
    let budget = holgrim::compact::cube_norm_budget(&analytic, &coefficients);
    let epsilon = 0.1 * budget;
    let outcome = lift(compact_pipeline(&analytic, &coefficients, &CompactConfig::new(epsilon, 0, 8)))?;
    ensure!(outcome.run.criterion_met, "cover run did not reach epsilon/2");
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let probes: Vec<Vec<f64>> = (0..200 * outcome.cover.len())
        .map(|_| (0..2).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let error = lift(probe_error(&outcome.problem, &outcome.run.final_pairs(), &probes, 0))?;
    ensure!(error <= epsilon, "probe error {error} > epsilon {epsilon}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "runtime {elapsed:?}");
    Ok(format!(
        "radius {:.4}, {} cover points, {} probes, error {:.3e} <= {:.3e}, {elapsed:.2?}",
        outcome.radius,
        outcome.cover.len(),
        probes.len(),
        error,
        epsilon
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_rel, mut worst_res) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let level = rng.gen_range(0..=2);
        let query = ThresholdQuery {
            norm_budget: 10f64.powf(rng.gen_range(-1.0..3.0)),
            gamma: level as f64 + rng.gen_range(0.1..3.0),
            epsilon: 10f64.powf(rng.gen_range(-3.0..1.0)),
            epsilon0: 0.0,
            outputs: rng.gen_range(1..=3),
            dim: rng.gen_range(1..=4),
            level,
        };
        let r = lift(solve_r(&query))?;
        let rhs = query.epsilon / (query.outputs as f64 * (query.dim as f64).powi(level as i32));
        let exact = (rhs / (2.0 * query.norm_budget)).powf(1.0 / (query.gamma - level as f64));
        let rel = (r - exact).abs() / exact;
        let residual = (2.0 * query.norm_budget * r.powf(query.gamma - level as f64) - rhs).abs() / rhs;
        ensure!(rel <= 1e-10, "{query:?}: r = {r}, closed form {exact}");
        ensure!(residual <= 1e-9, "{query:?}: boundary residual {residual:e}");
        worst_rel = worst_rel.max(rel);
        worst_res = worst_res.max(residual);
    }
    Ok(format!("50 cases, worst relative error {worst_rel:.1e}, boundary residual {worst_res:.1e}"))
}

fn criterion_10() -> Outcome {
    let config = BenchConfig {
        point_grid: vec![],
        ..BenchConfig::default()
    };
    let report = lift(bench(&config))?;
    let rows = report.sweep(Sweep::Features);
    let mut ratios = Vec::new();
    for pair in rows.windows(2) {
        let growth = pair[1].features as f64 / pair[0].features as f64;
        let ratio = pair[1].total() / pair[0].total() / growth;
        ensure!((1.0 / 3.0..=3.0).contains(&ratio), "time ratio / size ratio = {ratio:.2} at {} features", pair[1].features);
        ratios.push(format!("{ratio:.2}"));
    }
    let last = rows.last().ok_or("empty sweep")?;
    let per_step: Vec<f64> = last.step_reduction.iter().map(|d| d.as_secs_f64()).collect();
    let half = per_step.len() / 2;
    let early: f64 = per_step[..half].iter().sum::<f64>() / half as f64;
    let late: f64 = per_step[per_step.len() - half..].iter().sum::<f64>() / half as f64;
    ensure!(late > early, "reduction time does not grow with the step index ({early:e} -> {late:e})");
    Ok(format!(
        "normalized doubling ratios {}, reduction early/late {:.2e}/{:.2e} s",
        ratios.join(", "),
        early,
        late
    ))
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    results.push((1, criterion_1()));
    results.push((2, criterion_2()));
    results.push((3, criterion_3()));
    let runs: Result<Vec<EndToEnd>, String> = (0..10).map(end_to_end).collect();
    match &runs {
        Ok(runs) => {
            results.push((4, criterion_4(&runs[0])));
            results.push((5, criterion_5(runs)));
        }
        Err(e) => {
            results.push((4, Err(e.clone())));
            results.push((5, Err(e.clone())));
        }
    }
    results.push((6, criterion_6()));
    results.push((7, runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_7(&r[0]))));
    results.push((8, criterion_8()));
    results.push((9, criterion_9()));
    results.push((10, criterion_10()));

    let mut failed = 0;
    for (id, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {id:>2}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2}: FAIL  {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
