//! Subsampled averaging on the heteroskedastic model, where local least
//! squares is biased. Each shard also solves on a fraction r of its data and
//! the two averages are combined to cancel the leading bias term.

use avgm::gen::GenModel;
use avgm::harness::{run_experiment, ExperimentConfig, Method, Metric};

fn main() -> avgm::Result<()> {
    let mut cfg = ExperimentConfig::new(GenModel::Heteroskedastic, 20, 50_000);
    cfg.m_grid = vec![8, 64];
    cfg.r_grid = vec![0.01, 0.04, 0.1];
    cfg.methods = vec![Method::Avgm, Method::Savgm, Method::Oracle];
    cfg.repetitions = 10;
    let res = run_experiment(&cfg)?;

    let oracle = res.mean(Method::Oracle, 1, None, Metric::Mse).unwrap();
    println!("oracle            {oracle:.4e}");
    for &m in &cfg.m_grid {
        println!(
            "m = {m:<3} AVGM      {:.4e}",
            res.mean(Method::Avgm, m, None, Metric::Mse).unwrap()
        );
        for &r in &cfg.r_grid {
            let v = res.mean(Method::Savgm, m, Some(r), Metric::Mse).unwrap();
            println!("        SAVGM {r:<4} {v:.4e}");
        }
    }
    Ok(())
}
