//! For any single-question rule with f(1) > f(-1), builds a belief under which
//! the worker does not prefer the set the belief calls for.

use approval_incentives::verify::{find_impossibility_counterexample, impossibility_grid};

fn main() {
    for (f1, f2, fneg) in [(1.0, 0.5, 0.0), (1.0, 1.0, 0.0), (0.8, 0.3, 0.1), (2.0, 1.9, -1.0)] {
        let (belief, report) = find_impossibility_counterexample(f1, f2, fneg);
        println!("f(1)={f1} f(2)={f2} f(-1)={fneg}: belief {belief:?}");
        println!("  {report}");
    }
    let grid = impossibility_grid(30);
    println!("\ngrid: {}", grid);
}
