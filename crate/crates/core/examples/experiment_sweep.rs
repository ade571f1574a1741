//! A full sweep written to CSV, configured from `key=value` text the same
//! way the `experiment` subcommand reads a config file.

use avgm::gen::GenModel;
use avgm::harness::{run_experiment, ExperimentConfig, ExperimentResult};

const SWEEP: &str = "
model = normal
d = 20
N = 20000
m = 2,4,8,16
methods = avgm,single,oracle
metrics = mse,mse_gap
reps = 5
seed = 42
";

fn main() -> avgm::Result<()> {
    let mut cfg = ExperimentConfig::new(GenModel::Normal, 20, 20_000);
    cfg.apply_text(SWEEP)?;
    let path = std::env::temp_dir().join("avgm_sweep.csv");
    cfg.output = Some(path.clone());
    let res = run_experiment(&cfg)?;
    println!("{} rows written to {}", res.rows.len(), path.display());

    let back = ExperimentResult::read_csv_path(&path)?;
    for row in back.aggregate_rows() {
        println!(
            "{:<6} m={:<3} {:<7} {:.4e} ± {:.1e}",
            row.method,
            row.m,
            row.metric,
            row.value,
            row.stderr.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
