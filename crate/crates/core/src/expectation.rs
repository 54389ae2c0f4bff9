//! Exact expected payment from the worker's point of view: an average over
//! every placement of the gold questions and every correct/incorrect outcome
//! on them.
//!
//! The expectation depends on a plan only through the selection sizes `y`
//! and coverages `q`, so everything here takes those two vectors.

use crate::error::{Error, Result};
use crate::mechanisms::PaymentRule;
use crate::model::{MechanismConfig, OutcomeSign, UtilitySpec};

/// Largest `C(N, G) * 2^G` the generic enumerator will attempt.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Iterator over the `k`-subsets of `0..n` in lexicographic order.
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

/// Every way to place `k` gold questions among `n`.
pub fn gold_subsets(n: usize, k: usize) -> Subsets {
    Subsets {
        n,
        current: (k <= n).then(|| (0..k).collect()),
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn check_inputs(n: usize, g: usize, sizes: &[usize], coverages: &[f64]) -> Result<()> {
    if g == 0 || g > n {
        return Err(Error::InvalidConfig(format!("need 1 <= G <= N, got G={g}, N={n}")));
    }
    if sizes.len() != n {
        return Err(Error::DimensionMismatch {
            what: "selection sizes",
            expected: n,
            found: sizes.len(),
        });
    }
    if coverages.len() != n {
        return Err(Error::DimensionMismatch {
            what: "coverages",
            expected: n,
            found: coverages.len(),
        });
    }
    for (i, (&y, &q)) in sizes.iter().zip(coverages).enumerate() {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::DomainError(format!("coverage {q} of question {i} outside [0, 1]")));
        }
        if y == 0 && q != 0.0 {
            return Err(Error::DomainError(format!(
                "question {i} selects nothing but has coverage {q}"
            )));
        }
    }
    Ok(())
}

fn check_enumerable(n: usize, g: usize) -> Result<()> {
    let count = binomial(n, g) * 2f64.powi(g as i32);
    if count > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Calls `visit(probability, evaluation)` for every outcome with non-zero
/// probability, in a fixed order: gold subsets lexicographically, then sign
/// patterns by binary counting (bit set = correct).
///
/// Questions with an empty selection have a single deterministic outcome `0`.
pub fn for_each_outcome<F>(n: usize, g: usize, sizes: &[usize], coverages: &[f64], mut visit: F) -> Result<()>
where
    F: FnMut(f64, &[i32]) -> Result<()>,
{
    check_inputs(n, g, sizes, coverages)?;
    check_enumerable(n, g)?;
    let placement = 1.0 / binomial(n, g);
    let mut eval = vec![0i32; g];
    for subset in gold_subsets(n, g) {
        'signs: for mask in 0u32..(1u32 << g) {
            let mut weight = placement;
            for (k, &question) in subset.iter().enumerate() {
                let correct = mask & (1 << k) != 0;
                let y = sizes[question];
                if y == 0 {
                    if correct {
                        continue 'signs;
                    }
                    eval[k] = 0;
                    continue;
                }
                let sign = if correct { OutcomeSign::Correct } else { OutcomeSign::Wrong };
                let factor = sign.weight(coverages[question]);
                if factor == 0.0 {
                    continue 'signs;
                }
                weight *= factor;
                eval[k] = sign.apply(y);
            }
            visit(weight, &eval)?;
        }
    }
    Ok(())
}

/// Expected payment of any rule by full enumeration.
pub fn expected_payment_generic<R: PaymentRule + ?Sized>(
    n: usize,
    g: usize,
    rule: &R,
    sizes: &[usize],
    coverages: &[f64],
) -> Result<f64> {
    expected_transformed(n, g, rule, sizes, coverages, |p| p)
}

/// Expected `U(payment)`.
pub fn expected_utility<R: PaymentRule + ?Sized>(
    n: usize,
    g: usize,
    utility: &UtilitySpec,
    rule: &R,
    sizes: &[usize],
    coverages: &[f64],
) -> Result<f64> {
    expected_transformed(n, g, rule, sizes, coverages, |p| utility.apply(p))
}

fn expected_transformed<R, T>(n: usize, g: usize, rule: &R, sizes: &[usize], coverages: &[f64], transform: T) -> Result<f64>
where
    R: PaymentRule + ?Sized,
    T: Fn(f64) -> f64,
{
    let mut total = 0.0;
    for_each_outcome(n, g, sizes, coverages, |weight, eval| {
        total += weight * transform(rule.pay(eval)?);
        Ok(())
    })?;
    Ok(total)
}

/// Expected payment under the approval mechanism using its product form.
///
/// For a fixed gold placement the expectation is the product over gold
/// questions of `q_j (1 - rho)^{y_j - 1}`. Averaging that product over all
/// `G`-subsets is the elementary symmetric polynomial `e_G` of the per-question
/// factors divided by `C(N, G)`, computed here in `O(N G)`.
pub fn expected_payment_mech1(config: &MechanismConfig, sizes: &[usize], coverages: &[f64]) -> Result<f64> {
    let (n, g) = (config.num_questions(), config.num_gold());
    check_inputs(n, g, sizes, coverages)?;
    if let Some(&y) = sizes.iter().find(|&&y| y == 0 || y > config.num_options()) {
        return Err(Error::DomainError(format!(
            "selection size {y} outside [1, {}]",
            config.num_options()
        )));
    }
    let keep = 1.0 - config.coarseness();
    // esp[k] = e_k of the factors seen so far
    let mut esp = vec![0.0f64; g + 1];
    esp[0] = 1.0;
    for (&y, &q) in sizes.iter().zip(coverages) {
        let factor = q * keep.powi(y as i32 - 1);
        for k in (1..=g).rev() {
            esp[k] += esp[k - 1] * factor;
        }
    }
    let mean_core = esp[g] / binomial(n, g);
    Ok(config.pay_floor() + config.pay_span() * mean_core)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn instance() -> impl Strategy<Value = (usize, usize, usize, f64, Vec<usize>, Vec<f64>)> {
        (1usize..=6, 2usize..=5).prop_flat_map(|(n, b)| {
            (
                Just(n),
                1..=n,
                Just(b),
                0.01f64..0.99,
                proptest::collection::vec(1..=b, n),
                proptest::collection::vec(0.0f64..=1.0, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn factorised_matches_generic((n, g, b, rf, sizes, mut cov) in instance()) {
            for (q, &y) in cov.iter_mut().zip(&sizes) {
                if y == b { *q = 1.0; }
            }
            let c = MechanismConfig::new(n, g, b, 0.0, 1.0, rf / b as f64).unwrap();
            let generic = expected_payment_generic(n, g, &c, &sizes, &cov).unwrap();
            let fast = expected_payment_mech1(&c, &sizes, &cov).unwrap();
            prop_assert!((generic - fast).abs() <= 1e-12, "{} vs {}", generic, fast);
        }

        #[test]
        fn weights_sum_to_one((n, g, b, _rf, sizes, cov) in instance()) {
            let _ = b;
            let mut total = 0.0;
            for_each_outcome(n, g, &sizes, &cov, |w, _| { total += w; Ok(()) }).unwrap();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn linear_in_the_rule(
            (n, g, b, rf, sizes, mut cov) in instance(),
            shift in -5.0f64..5.0,
            scale in 0.1f64..5.0,
        ) {
            for (q, &y) in cov.iter_mut().zip(&sizes) {
                if y == b { *q = 1.0; }
            }
            let c = MechanismConfig::new(n, g, b, 0.0, 1.0, rf / b as f64).unwrap();
            let base = expected_payment_generic(n, g, &c, &sizes, &cov).unwrap();
            let aff = crate::mechanisms::AffineRule { rule: c, shift, scale };
            let v = expected_payment_generic(n, g, &aff, &sizes, &cov).unwrap();
            prop_assert!((v - (shift + scale * base)).abs() <= 1e-12 * (1.0 + shift.abs() + scale));
        }

        #[test]
        fn monotone_in_coverage(
            (n, g, b, rf, sizes, cov) in instance(),
            which in 0usize..6,
            bump in 0.0f64..1.0,
        ) {
            let c = MechanismConfig::new(n, g, b, 0.0, 1.0, rf / b as f64).unwrap();
            let i = which % n;
            let mut higher = cov.clone();
            higher[i] = cov[i] + (1.0 - cov[i]) * bump;
            let lo = expected_payment_mech1(&c, &sizes, &cov).unwrap();
            let hi = expected_payment_mech1(&c, &sizes, &higher).unwrap();
            prop_assert!(hi + 1e-15 >= lo);
        }
    }
}
