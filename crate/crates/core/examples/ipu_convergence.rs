//! IPU objective trace from a random start and from the low-rank start.
//!
//! cargo run --release --example ipu_convergence

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fspca::solver::{ipu, ipu_from_lowrank, random_subspace_init, SolverConfig};
use fspca::synth::{make_covariance, Scheme, SchemeSpec};

fn main() -> fspca::Result<()> {
    let a = make_covariance(&SchemeSpec::named(Scheme::F, 200, 1, Some(40)))?;
    let cfg = SolverConfig::new(5, 30);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w0 = random_subspace_init(a.dim(), cfg.m, cfg.k, &mut rng)?;
    for (name, rep) in [("random", ipu(&a, &cfg, &w0)?), ("low-rank", ipu_from_lowrank(&a, &cfg)?)] {
        println!("{name} start: {} iterations, stopped by {}", rep.iterations, rep.converged_by.as_str());
        for (t, obj) in rep.objective_trace.iter().enumerate() {
            println!("  t={t:<3} objective {obj:.6}");
        }
    }
    Ok(())
}
