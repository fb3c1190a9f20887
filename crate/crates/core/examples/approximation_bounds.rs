//! Eigenvalue-decay constants and the guaranteed approximation ratio.
//!
//! cargo run --release --example approximation_bounds

use fspca::metrics::{bound_constants, bound_constants_from_spectrum, zipf_g1_bound};
use fspca::oracle::brute_force;
use fspca::solver::{go_lowrank_init, ipu_from_lowrank, SolverConfig};
use fspca::synth::{make_covariance, zipf_spectrum, SchemeSpec};

fn main() -> fspca::Result<()> {
    let (m, k) = (2, 6);
    for t in [1.5, 2.0, 3.0] {
        let a = make_covariance(&SchemeSpec::zipf(1.0, t, 12, 0))?;
        let b = bound_constants(&a, m, k)?;
        let opt = brute_force(&a, m, k)?.optimal_objective;
        let go_ratio = go_lowrank_init(&a, m, k)?.objective(&a)? / opt;
        let ipu_ratio = ipu_from_lowrank(&a, &SolverConfig::new(m, k))?.objective() / opt;
        println!(
            "t={t}: G1 {:.4} G2 {:.4} eps {:.4} -> floor {:.4}; GO ratio {go_ratio:.6}, IPU ratio {ipu_ratio:.6}",
            b.g1,
            b.g2,
            b.epsilon_bound,
            1.0 - b.epsilon_bound
        );
    }

    println!("\nZipf decay: G1 against min(m^-(t-1), 2^-t)");
    for m in [1, 2, 4, 8] {
        let g1 = bound_constants_from_spectrum(&zipf_spectrum(1.0, 2.0, 64), m, m).g1;
        println!("  m={m}: G1 {g1:.4} <= {:.4}", zipf_g1_bound(m, 2.0));
    }
    Ok(())
}
