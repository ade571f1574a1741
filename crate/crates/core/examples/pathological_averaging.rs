//! A strongly convex loss whose Hessian jumps at the minimizer. Averaging
//! shard minimizers leaves a bias that more machines do not remove.

use avgm::gen::GenModel;
use avgm::harness::{run_experiment, ExperimentConfig, Method, Metric};

fn main() -> avgm::Result<()> {
    let n = 1000;
    println!("{:>5} {:>12}", "m", "AVGM MSE");
    for m in [1, 4, 16, 64, 128] {
        let mut cfg = ExperimentConfig::new(GenModel::BernoulliPathological, 1, n * m);
        cfg.m_grid = vec![m];
        cfg.methods = vec![Method::Avgm];
        cfg.repetitions = 50;
        let res = run_experiment(&cfg)?;
        println!(
            "{m:>5} {:>12.4e}",
            res.mean(Method::Avgm, m, None, Metric::Mse).unwrap()
        );
    }
    println!("with 1/m variance reduction the last row would be ~128x below the first");
    Ok(())
}
