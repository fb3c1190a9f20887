//! Feature selection from a data matrix stored as CSV (rows = features).
//!
//! cargo run --example feature_selection_csv -- data.csv 2 5
//!
//! Without arguments a small random data set is generated first.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fspca::metrics::normalized_explained_variance;
use fspca::solver::{ipu_from_lowrank, SolverConfig};
use fspca::synth::{load_matrix_csv, sample_covariance, write_matrix_csv};

fn main() -> fspca::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = match args.first() {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            // 10 features, 50 samples; features 0..3 share a latent factor
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let z: Vec<f64> = (0..50).map(|_| rng.sample(StandardNormal)).collect();
            let x = DMatrix::from_fn(10, 50, |i, j| {
                let noise: f64 = rng.sample(StandardNormal);
                if i < 3 { 3.0 * z[j] + 0.3 * noise } else { noise }
            });
            let p = std::env::temp_dir().join("fspca_example_data.csv");
            write_matrix_csv(&mut std::fs::File::create(&p)?, &x)?;
            p
        }
    };
    let m = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let k = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);

    let x = load_matrix_csv(&path)?;
    let a = sample_covariance(&x, true)?;
    let rep = ipu_from_lowrank(&a, &SolverConfig::new(m, k))?;
    println!("selected features: [{}]", rep.estimate.support());
    println!("explained variance (normalized): {:.4}", normalized_explained_variance(&a, &rep.estimate, m)?);
    Ok(())
}
