//! Accuracy on the whole unit square from a run on a finite grid cover.

use holgrim::compact::{compact_pipeline, cube_norm_budget, CompactConfig};
use holgrim::problems::{gen_problem, probe_error, GeneratorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> holgrim::error::Result<()> {
    let mut spec = GeneratorSpec::gaussian(200, 1, 2, 2.0, 5);
    spec.positive = true;
    let generated = gen_problem(&spec)?;
    let analytic = generated.analytic().expect("generated problems keep closed forms").clone();
    let coefficients = generated.coefficients().to_vec();

    let epsilon = 0.1 * cube_norm_budget(&analytic, &coefficients);
    let outcome = compact_pipeline(&analytic, &coefficients, &CompactConfig::new(epsilon, 0, 5))?;
    println!(
        "C = {:.3}, cover radius {:.4}, {} cover points, {} features kept",
        outcome.norm_budget,
        outcome.radius,
        outcome.cover.len(),
        outcome.run.support.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probes: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let error = probe_error(&outcome.problem, &outcome.run.final_pairs(), &probes, 0)?;
    println!("max |phi - u| over 10000 random probes: {error:.4} (epsilon {epsilon:.4})");
    Ok(())
}
