//! Approximating a combination of 300 Gaussians on 100 points by a handful of
//! them.

use holgrim::holgrim::{run, Config, Termination};
use holgrim::problems::{gen_problem, GeneratorSpec};

fn main() -> holgrim::error::Result<()> {
    let mut spec = GeneratorSpec::gaussian(300, 100, 2, 2.0, 1);
    spec.positive = true;
    let problem = gen_problem(&spec)?;
    let c = problem.norm_budget();

    let epsilon = 0.05 * c;
    let epsilon0 = epsilon / (4.0 * 2.0);
    let config = Config::single_point(epsilon, epsilon0, 1, Config::max_single_steps(&problem), 1);
    let result = run(&problem, &config)?;

    match result.termination {
        Termination::Criterion { at_step } => println!("criterion met before step {at_step}"),
        Termination::MaxSteps => println!("stopped after {} steps", result.steps_completed()),
    }
    for step in &result.steps {
        println!("step {}: new point {:?}, score {:.3e}, support {}", step.step, step.new_points, step.score, step.coefficients.len());
    }
    println!("{} of {} features kept", result.support.len(), problem.len());
    println!("max Lambda^1(phi - u) = {:.4} (epsilon {epsilon:.4})", result.final_lambda_max);
    println!("sum |c_s| A_s = {:.6}, C = {c:.6}", result.coefficient_sum);
    Ok(())
}
