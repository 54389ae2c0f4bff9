//! Monte Carlo population of workers under several mechanisms and policies.
//! Pass a config path to run your own; see configs/simulation.json.

use approval_incentives::sim::{run_simulation, BeliefGenerator, Policy, SimConfig};
use approval_incentives::{Mechanism, MechanismConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = match std::env::args().nth(1) {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => SimConfig {
            num_questions: 5,
            num_gold: 2,
            num_options: 4,
            workers: 2000,
            mechanisms: vec![Mechanism::Approval(MechanismConfig::new(5, 2, 4, 0.0, 1.0, 0.15)?)],
            generator: BeliefGenerator::Dirichlet { concentration: 0.5 },
            policies: Policy::ALL.to_vec(),
            seed: 1,
            miscalibration: 0.0,
        },
    };
    let report = run_simulation(&config)?;
    print!("{}", report.to_table());
    Ok(())
}
