//! The relative-belief rule against the exhaustive oracle.

use approval_incentives::mechanisms::mech1_pay;
use approval_incentives::model::{BeliefProfile, Domain, MechanismConfig};
use approval_incentives::strategy::{brute_force_optimal, relative_belief_choice, relative_belief_plan};

fn main() -> approval_incentives::Result<()> {
    let rho = 0.25;
    let row = [0.5, 0.3, 0.2];
    let choice = relative_belief_choice(&row, rho)?;
    println!("belief {row:?}, rho {rho}");
    for (z, (o, r)) in choice.order.iter().zip(&choice.ratios).enumerate() {
        println!("  position {} option {} ratio {r:.4}{}", z + 1, o + 1, if *r > rho { "  > rho" } else { "" });
    }
    println!("  chosen: {}", choice.options);

    let config = MechanismConfig::new(2, 2, 3, 0.0, 1.0, rho)?;
    let beliefs = BeliefProfile::from_rows(vec![row.to_vec(), vec![0.1, 0.1, 0.8]])?;
    let rule = relative_belief_plan(&beliefs, rho)?;
    let oracle = brute_force_optimal(2, &config, &beliefs, Domain::Approval)?;
    println!("\ntwo questions: rule {rule}, oracle {} (unique: {})", oracle.best(), oracle.is_unique());
    println!(
        "  value {:.6}, runner-up {:?} behind by {:.3e}, {} plans scored",
        oracle.value,
        oracle.runner_up.as_ref().map(|p| p.to_string()),
        oracle.margin.unwrap_or(f64::NAN),
        oracle.plans_evaluated
    );
    println!("  sanity: all-correct pays {}", mech1_pay(&config, &[1, 1])?.amount());
    Ok(())
}
