//! Runs every verification suite at the default parameters and prints the
//! reports.

use approval_incentives::verify::{run_suite, Suite, SuiteParams};

fn main() -> approval_incentives::Result<()> {
    let params = SuiteParams { trials: 50, resolution: 20, ..SuiteParams::default() };
    let mut failures = 0;
    for suite in Suite::EACH {
        for report in run_suite(suite, &params)? {
            println!("{report}");
            failures += usize::from(!report.passed());
        }
    }
    println!("{failures} failing reports");
    Ok(())
}
