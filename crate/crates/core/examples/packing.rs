//! Covers and packings: a grid cover, greedy and exact packings of a small
//! point set, and the volumetric upper bound.

use holgrim::geometry::{exact_packing, greedy_packing, grid_cover, volumetric_bound};
use holgrim::jets::Domain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> holgrim::error::Result<()> {
    let cover = grid_cover(2, 0.1)?;
    println!("grid cover of [0,1]^2 at radius 0.1: {} points", cover.len());

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<Vec<f64>> = (0..16).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let domain = Domain::new(points)?;
    for r in [0.1, 0.25, 0.5] {
        let greedy = greedy_packing(&domain, r)?.len();
        let exact = exact_packing(&domain, r)?;
        println!("r = {r}: greedy {greedy}, exact {exact}, volumetric <= {:.1}", volumetric_bound(2, r)?);
    }
    Ok(())
}
