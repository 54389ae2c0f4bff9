//! The threshold rule: score table, the belief threshold and the boundary
//! where one option and two options tie.

use approval_incentives::mechanisms::g_score;
use approval_incentives::model::{BeliefProfile, Domain, ThresholdConfig};
use approval_incentives::strategy::{brute_force_optimal, threshold_plan};
use approval_incentives::verify::check_mech2_boundary_equality;

fn main() -> approval_incentives::Result<()> {
    let tc = ThresholdConfig::new(1, 1, 4, 0.0, 1.0, 0.3, None)?;
    println!("B=4 sigma=0.3: sizes {}..={}", tc.min_count(), tc.max_count());
    for x in [-3, -2, -1, 1, 2, 3] {
        if let Ok(g) = g_score(&tc, x) {
            println!("  g({x:>2}) = {g:.4}");
        }
    }
    for row in [vec![0.5, 0.35, 0.1, 0.05], vec![0.9, 0.05, 0.03, 0.02], vec![0.25, 0.25, 0.25, 0.25]] {
        let beliefs = BeliefProfile::from_rows(vec![row.clone()])?;
        let rule = threshold_plan(&beliefs, &tc)?;
        let oracle = brute_force_optimal(1, &tc, &beliefs, Domain::threshold(&tc))?;
        println!("{row:?}: select {rule}, oracle {}", oracle.best());
    }
    println!("{}", check_mech2_boundary_equality(&tc)?);
    Ok(())
}
