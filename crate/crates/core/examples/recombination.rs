//! Carathéodory reduction of 500 weighted points to at most Q while keeping
//! 7 moments and the total weight.

use holgrim::recombination::{reduce, ReductionInput};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> holgrim::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 500;
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let moments = DMatrix::from_fn(7, n, |_, _| rng.gen_range(-1.0..1.0));
    let input = ReductionInput { weights: weights.clone(), moments: moments.clone(), tolerance: 1e-9 };
    let out = reduce(&input)?;

    println!("kept {} of {n} points (Q = {})", out.support.len(), moments.nrows() + 1);
    for (i, w) in out.support.iter().zip(&out.weights) {
        println!("  point {i:>3}: weight {w:.6}");
    }
    println!("weight sum error {:.2e}, moment residual {:.2e}", out.weight_sum_error, out.achieved_residual);
    Ok(())
}
