//! Compare both solvers with the exhaustive optimum on one instance.
//!
//! cargo run --release --example oracle_check

use fspca::metrics::{best_intersection_ratio, relative_error};
use fspca::oracle::brute_force;
use fspca::solver::{go, ipu_from_lowrank, SolverConfig};
use fspca::synth::{make_covariance, Scheme, SchemeSpec};

fn main() -> fspca::Result<()> {
    let a = make_covariance(&SchemeSpec::named(Scheme::D, 20, 3, None))?;
    let (m, k) = (3, 7);
    let orc = brute_force(&a, m, k)?;
    println!("optimum {:.6} on [{}] ({} ties)", orc.optimal_objective, orc.optimal_support, orc.ties.len());

    let go_w = go(&a, m, k)?;
    let ipu_w = ipu_from_lowrank(&a, &SolverConfig::new(m, k))?.estimate;
    for (name, w) in [("GO", go_w), ("IPU", ipu_w)] {
        let obj = w.objective(&a)?;
        println!(
            "{name:<4} [{}] objective {obj:.6}  IR {:.2}  RE {:.2e}",
            w.support(),
            best_intersection_ratio(w.support(), &orc.ties)?,
            relative_error(obj, orc.optimal_objective)?
        );
    }
    Ok(())
}
