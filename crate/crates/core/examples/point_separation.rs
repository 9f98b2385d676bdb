//! Selected points stay more than r apart, where r solves
//! 2C r^(γ−q) + ε₀ e^r = ε/(c d^q).

use holgrim::geometry::{solve_r, ThresholdQuery};
use holgrim::holgrim::{run, Config};
use holgrim::problems::{gen_problem, GeneratorSpec};

fn main() -> holgrim::error::Result<()> {
    let problem = gen_problem(&GeneratorSpec::gaussian(400, 150, 2, 2.0, 3))?;
    let epsilon = 0.02 * problem.norm_budget();
    let epsilon0 = epsilon / 4.0;
    let config = Config::single_point(epsilon, epsilon0, 0, Config::max_single_steps(&problem), 3);
    let result = run(&problem, &config)?;

    let r = solve_r(&ThresholdQuery {
        norm_budget: problem.norm_budget(),
        gamma: problem.gamma(),
        epsilon,
        epsilon0,
        outputs: problem.outputs(),
        dim: problem.dim(),
        level: 0,
    })?;
    println!("selected {:?}", result.selected_points);
    println!("min separation {:.4e} > r = {r:.4e}", result.min_separation);
    Ok(())
}
