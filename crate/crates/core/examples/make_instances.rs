//! Regenerates the instance files under `experiments/instances/`.
//!
//! `cargo run --release --example make_instances -- <experiments dir>`

use std::path::PathBuf;

use robust_cpd::environments::{InstanceSpec, NoiseFamily};
use robust_cpd::estimators::HeavyTailParams;

const PARETO_SHAPE: f64 = 1.5;

fn transpose(rows: &[[f64; 7]; 3]) -> Vec<Vec<f64>> {
    (0..7).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

fn main() -> robust_cpd::Result<()> {
    let root: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "experiments".into()).into();
    let dir = root.join("instances");
    std::fs::create_dir_all(&dir)?;

    let breaks: Vec<u64> = (1..7).map(|j| 214 * j).collect();
    let gaussian = transpose(&[
        [1.2, 1.5, 1.5, 2.0, 1.8, 1.2, 1.2],
        [1.0, 1.8, 2.4, 1.8, 1.0, 1.8, 1.0],
        [0.5, 0.5, 0.5, 0.5, 1.0, 0.5, 1.7],
    ]);
    let pareto = transpose(&[
        [1.2, 1.5, 2.0, 2.0, 1.2, 1.2, 0.8],
        [1.0, 2.4, 1.8, 2.8, 1.0, 1.5, 2.0],
        [0.5, 0.5, 0.5, 0.5, 1.7, 1.7, 2.9],
    ]);
    InstanceSpec::from_means(
        &gaussian,
        breaks.clone(),
        1500,
        HeavyTailParams::new(1.0, 1.0)?,
        NoiseFamily::Gaussian { sigma: 1.0 },
    )?
    .save(&dir.join("table1_gaussian.toml"))?;
    InstanceSpec::from_means(
        &pareto,
        breaks,
        1500,
        HeavyTailParams::new(0.45, 3.0)?,
        NoiseFamily::Pareto { shape: PARETO_SHAPE },
    )?
    .save(&dir.join("table2_pareto.toml"))?;

    let ht_unit = HeavyTailParams::new(0.45, 1.0)?;
    for delta in [1.0, 2.0, 5.0, 10.0] {
        let means = vec![vec![1.0, 0.8, 0.5], vec![2.0, 0.8 + delta, 0.5]];
        InstanceSpec::from_means(&means, vec![200], 500, ht_unit, NoiseFamily::Pareto { shape: PARETO_SHAPE })?
            .save(&dir.join(format!("delta_{delta}.toml")))?;
    }

    let stationary = [[1.0, 0.5, 0.1], [1.0, 0.8, 0.7], [1.0, 0.9, 0.1], [1.0, 0.5, 0.5]];
    for (i, row) in stationary.iter().enumerate() {
        InstanceSpec::from_means(&[row.to_vec()], vec![], 300, ht_unit, NoiseFamily::Pareto { shape: PARETO_SHAPE })?
            .save(&dir.join(format!("stationary_{}.toml", i + 1)))?;
    }
    Ok(())
}
