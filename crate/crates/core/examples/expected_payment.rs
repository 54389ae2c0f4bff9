//! Exact expected payment of a selection plan, by enumeration over gold
//! placements and by the factorised formula.

use approval_incentives::expectation::{expected_payment_generic, expected_payment_mech1};
use approval_incentives::model::{BeliefProfile, MechanismConfig, SelectionPlan};

fn main() -> approval_incentives::Result<()> {
    let config = MechanismConfig::new(4, 2, 3, 0.0, 1.0, 0.2)?;
    let beliefs = BeliefProfile::from_rows(vec![
        vec![0.6, 0.4, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.2, 0.6],
    ])?;
    let plans = [
        vec![vec![0, 1], vec![0], vec![0, 1, 2], vec![2]],
        vec![vec![0], vec![0], vec![0], vec![2]],
        vec![vec![0, 1, 2]; 4],
    ];
    for sets in plans {
        let plan = SelectionPlan::new(sets.into_iter().map(|s| s.into_iter().collect()).collect());
        let coverages = plan.coverages(&beliefs)?;
        let exact = expected_payment_generic(4, 2, &config, &plan.sizes(), &coverages)?;
        let fast = expected_payment_mech1(&config, &plan.sizes(), &coverages)?;
        println!("{:<24} enumerated {exact:.12}  factorised {fast:.12}", format!("{plan}"));
    }
    Ok(())
}
