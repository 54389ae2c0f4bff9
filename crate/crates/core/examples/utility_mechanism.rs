//! Payments for a risk-averse worker: the rule is the approval rule in
//! utility space, so optimal selections are unchanged.

use approval_incentives::mechanisms::utility_pay;
use approval_incentives::model::{BeliefProfile, Domain, MechanismConfig, UtilitySpec};
use approval_incentives::strategy::{brute_force_optimal, brute_force_optimal_utility};
use approval_incentives::Mechanism;

fn main() -> approval_incentives::Result<()> {
    let config = MechanismConfig::new(2, 2, 3, 0.5, 3.0, 0.2)?;
    let beliefs = BeliefProfile::from_rows(vec![vec![0.7, 0.2, 0.1], vec![0.45, 0.45, 0.1]])?;
    let risk_neutral = brute_force_optimal(2, &config, &beliefs, Domain::Approval)?;
    println!("risk neutral optimum: {}", risk_neutral.best());
    for utility in [UtilitySpec::Identity, UtilitySpec::sqrt(), UtilitySpec::Log] {
        let payments: Vec<String> = [[1, 1], [2, 1], [3, 3], [-1, 1]]
            .iter()
            .map(|e| utility_pay(&config, &utility, e).map(|p| format!("{:.4}", p.amount())))
            .collect::<Result<_, _>>()?;
        let mech = Mechanism::Utility { config, utility };
        let best = brute_force_optimal_utility(2, &utility, &mech, &beliefs, Domain::Approval)?;
        println!("{utility:?}: payments [{}], optimum {}", payments.join(", "), best.best());
    }
    Ok(())
}
