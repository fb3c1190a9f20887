//! GO on a rank-deficient covariance recovers the exact optimum.
//!
//! cargo run --example go_low_rank

use fspca::matcore::{numerical_rank, RANK_REL_TOL};
use fspca::oracle::brute_force;
use fspca::solver::go;
use fspca::synth::{make_covariance, Scheme, SchemeSpec};

fn main() -> fspca::Result<()> {
    // spectrum {300, 180, 60, 0, ..., 0}: rank 3
    let a = make_covariance(&SchemeSpec::named(Scheme::C, 16, 7, None))?;
    let (m, k) = (3, 6);
    println!("rank(A) = {}", numerical_rank(&a, RANK_REL_TOL)?);

    let w = go(&a, m, k)?;
    let orc = brute_force(&a, m, k)?;
    println!("GO     support [{}]  objective {:.10}", w.support(), w.objective(&a)?);
    println!(
        "oracle support [{}]  objective {:.10}  ({} supports)",
        orc.optimal_support, orc.optimal_objective, orc.num_supports_examined
    );
    Ok(())
}
