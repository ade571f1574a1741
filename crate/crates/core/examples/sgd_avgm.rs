//! One pass of projected SGD per shard, then averaging. Compares the excess
//! error over the centralized solve against exact local minimization.

use avgm::gen::GenModel;
use avgm::harness::{run_experiment, ExperimentConfig, Method, Metric};

fn main() -> avgm::Result<()> {
    let mut cfg = ExperimentConfig::new(GenModel::Normal, 20, 40_000);
    cfg.m_grid = vec![2, 8, 32];
    cfg.methods = vec![Method::Avgm, Method::SgdAvgm, Method::Oracle];
    cfg.metrics = vec![Metric::MseGap];
    cfg.repetitions = 8;
    let res = run_experiment(&cfg)?;

    println!("excess MSE over the oracle");
    println!("{:>4} {:>12} {:>12}", "m", "AVGM", "SGD-AVGM");
    for &m in &cfg.m_grid {
        let a = res.mean(Method::Avgm, m, None, Metric::MseGap).unwrap();
        let s = res.mean(Method::SgdAvgm, m, None, Metric::MseGap).unwrap();
        println!("{m:>4} {a:>12.3e} {s:>12.3e}");
    }
    Ok(())
}
