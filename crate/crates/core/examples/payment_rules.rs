//! Payments of the approval rule, the threshold rule and the baselines on a
//! handful of gold evaluations.

use approval_incentives::mechanisms::{frugal_payment, mech1_pay, mech2_pay};
use approval_incentives::{Mechanism, MechanismConfig, ThresholdConfig};

fn main() -> approval_incentives::Result<()> {
    let config = MechanismConfig::new(3, 3, 4, 0.0, 1.0, 0.1)?;
    println!("approval rule, B=4 G=3 rho=0.1");
    for eval in [[1, 1, 1], [2, 1, 3], [4, 4, 4], [1, -2, 1]] {
        println!("  {eval:?} -> {:.6}", mech1_pay(&config, &eval)?.amount());
    }
    println!("  select-everything floor: {:.6}", frugal_payment(&config));

    let tc = ThresholdConfig::new(2, 2, 4, 0.0, 1.0, 0.3, None)?;
    println!("\nthreshold rule, B=4 G=2 sigma=0.3, sizes {}..={}", tc.min_count(), tc.max_count());
    for eval in [[1, 1], [1, -1], [2, 1], [-2, 1], [-1, -1]] {
        println!("  {eval:?} -> {:.6}", mech2_pay(&tc, &eval)?.amount());
    }

    // every mechanism is also reachable through the tagged enum used by the CLI
    let additive: Mechanism = serde_json::from_str(
        r#"{"mechanism": "additive", "num_gold": 3, "pay_floor": 0.1, "pay_ceiling": 1.0, "per_correct_bonus": 0.2}"#,
    )
    .expect("valid config");
    println!("\n{} on [1, -1, 1] -> {:.6}", additive.name(), additive.payment(&[1, -1, 1])?.amount());
    Ok(())
}
