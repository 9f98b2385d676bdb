//! Writing a dataset and a result, reading them back and re-scoring.

use holgrim::format::{load_dataset, parse_result, read_to_string, rescore, write_dataset, write_file, write_result};
use holgrim::holgrim::{run, Config};
use holgrim::problems::{gen_problem, GeneratorSpec};

fn main() -> holgrim::error::Result<()> {
    let dir = std::env::temp_dir().join(format!("holgrim-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| holgrim::error::Error::Io { path: dir.clone(), source: e })?;
    let dataset = dir.join("dataset.txt");
    let result_path = dir.join("result.txt");

    let problem = gen_problem(&GeneratorSpec::gaussian(50, 20, 2, 2.0, 4))?;
    write_file(&dataset, &write_dataset(&problem))?;
    let loaded = load_dataset(&dataset)?;
    println!("reloaded {} features on {} points, C = {}", loaded.len(), loaded.domain().len(), loaded.norm_budget());

    let epsilon = 0.1 * loaded.norm_budget();
    let config = Config::single_point(epsilon, epsilon / 8.0, 1, Config::max_single_steps(&loaded), 0);
    let result = run(&loaded, &config)?;
    write_file(&result_path, &write_result(&result, &dataset.display().to_string()))?;

    let summary = parse_result(&result_path, &read_to_string(&result_path)?)?;
    let scored = rescore(&loaded, &summary)?;
    println!(
        "stored max residual {:e}, recomputed {:e}, deviation {:e}",
        summary.final_functional_max,
        scored.final_functional_max,
        scored.deviation(&summary)
    );
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
