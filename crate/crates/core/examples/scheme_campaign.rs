//! A small seeded campaign against the oracle, written as CSV to stdout.
//!
//! cargo run --release --example scheme_campaign -- [scheme] [trials]

use fspca::bench::{run_campaign, CampaignSpec, Initializer, SolverKind};
use fspca::synth::{Scheme, SchemeSpec};

fn main() -> fspca::Result<()> {
    let mut args = std::env::args().skip(1);
    let scheme: Scheme = args
        .next()
        .unwrap_or_else(|| "D".into())
        .parse()
        .map_err(|e| fspca::FspcaError::InvalidInput(format!("{e}")))?;
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);

    let mut spec = CampaignSpec::new(
        SchemeSpec::named(scheme, 20, 0, None),
        3,
        7,
        SolverKind::Ipu,
        Initializer::RandomSubspace { restarts: 20 },
    );
    spec.trials = trials;
    let table = run_campaign(&spec)?;
    table.write_csv(std::io::stdout())?;
    eprintln!("{}", table.aggregates.summary_line());
    Ok(())
}
