//! Ridge logistic regression on sparse binary features, scored on a held-out
//! set by log-loss and AUC.

use avgm::gen::GenModel;
use avgm::harness::{run_experiment, ExperimentConfig, Method, Metric};

fn main() -> avgm::Result<()> {
    let mut cfg = ExperimentConfig::new(GenModel::SparseClick, 200, 40_000);
    cfg.nnz_per_row = 10;
    cfg.m_grid = vec![4, 16];
    cfg.r_grid = vec![0.05];
    cfg.methods = vec![Method::Avgm, Method::Savgm, Method::Single, Method::Oracle];
    cfg.metrics = vec![Metric::Logloss, Metric::Auc];
    cfg.repetitions = 3;
    let res = run_experiment(&cfg)?;

    println!("{:<8} {:>3} {:>10} {:>8}", "method", "m", "logloss", "auc");
    for row in res.aggregate_rows().filter(|r| r.metric == Metric::Logloss) {
        let auc = res.mean(row.method, row.m, row.r, Metric::Auc).unwrap();
        println!(
            "{:<8} {:>3} {:>10.5} {:>8.4}",
            row.method, row.m, row.value, auc
        );
    }
    Ok(())
}
