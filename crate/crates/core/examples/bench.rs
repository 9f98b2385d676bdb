//! Phase timings for a small size sweep.

use holgrim::bench::{bench, BenchConfig};

fn main() -> holgrim::error::Result<()> {
    let config = BenchConfig {
        feature_grid: vec![250, 500, 1000],
        fixed_points: 50,
        point_grid: vec![25, 50, 100],
        fixed_features: 250,
        steps: 5,
        repeats: 2,
        ..BenchConfig::default()
    };
    print!("{}", bench(&config)?.render());
    Ok(())
}
