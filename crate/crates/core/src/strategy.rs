//! The worker's side: closed-form optimal selections and an exhaustive
//! oracle that enumerates every joint selection plan.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expectation::{expected_payment_generic, expected_utility};
use crate::mechanisms::PaymentRule;
use crate::model::{BeliefProfile, Domain, OptionSet, SelectionPlan, ThresholdConfig, UtilitySpec, ZERO_BELIEF};

/// Largest number of joint plans the oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e6;

/// Plans within this distance of the best value count as optimal.
pub const ARGMAX_TOLERANCE: f64 = 1e-12;

/// Ratio within this distance of `rho` is reported as degenerate.
pub const RATIO_TOLERANCE: f64 = 1e-12;

/// Belief within this distance of the threshold is reported as degenerate.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

/// Options with non-zero belief.
pub fn rule_coarse_support(row: &[f64]) -> OptionSet {
    row.iter()
        .enumerate()
        .filter(|(_, &p)| p >= ZERO_BELIEF)
        .map(|(i, _)| i)
        .collect()
}

/// Option indices sorted by decreasing belief, ties by index.
fn sorted_by_belief(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    order
}

/// What the approval mechanism incentivises under arbitrary beliefs: take
/// options in decreasing order of belief while each one contributes more
/// than a `rho` fraction of the mass selected so far.
///
/// Errors with [`Error::DegenerateBelief`] when the stopping ratio is within
/// [`RATIO_TOLERANCE`] of `rho`, where two prefixes tie.
pub fn rule_relative_belief(row: &[f64], rho: f64) -> Result<OptionSet> {
    let (set, tie) = relative_prefix(row, rho);
    match tie {
        Some(ratio) => Err(Error::DegenerateBelief(format!(
            "prefix ratio {ratio} equals rho = {rho} within {RATIO_TOLERANCE}"
        ))),
        None => Ok(set),
    }
}

/// Longest prefix with ratio strictly above `rho`, plus the boundary ratio
/// when it ties with `rho`.
pub(crate) fn relative_prefix(row: &[f64], rho: f64) -> (OptionSet, Option<f64>) {
    let order = sorted_by_belief(row);
    let mut set = OptionSet::EMPTY;
    let mut mass = 0.0;
    for &option in &order {
        let p = row[option];
        if p < ZERO_BELIEF {
            break;
        }
        mass += p;
        let ratio = p / mass;
        if (ratio - rho).abs() <= RATIO_TOLERANCE {
            return (set, Some(ratio));
        }
        if ratio < rho {
            break;
        }
        set.insert(option);
    }
    (set, None)
}

/// The relative-belief choice with its working: options in decreasing order
/// of belief, the ratio `p_(z) / (p_(1) + ... + p_(z))` at each position, and
/// the chosen prefix length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixChoice {
    pub options: OptionSet,
    pub prefix_len: usize,
    pub order: Vec<usize>,
    pub ratios: Vec<f64>,
}

pub fn relative_belief_choice(row: &[f64], rho: f64) -> Result<PrefixChoice> {
    let options = rule_relative_belief(row, rho)?;
    let order = sorted_by_belief(row);
    let mut mass = 0.0;
    let ratios = order
        .iter()
        .map(|&o| {
            mass += row[o];
            if mass > 0.0 { row[o] / mass } else { 0.0 }
        })
        .collect();
    Ok(PrefixChoice {
        prefix_len: options.len(),
        options,
        order,
        ratios,
    })
}

/// Every option whose belief exceeds the threshold.
pub fn rule_threshold(row: &[f64], tc: &ThresholdConfig) -> Result<OptionSet> {
    if row.len() != tc.num_options() {
        return Err(Error::DimensionMismatch {
            what: "options per belief row",
            expected: tc.num_options(),
            found: row.len(),
        });
    }
    let sigma = tc.threshold();
    if let Some(p) = row.iter().find(|&&p| (p - sigma).abs() <= THRESHOLD_TOLERANCE) {
        return Err(Error::DegenerateBelief(format!(
            "belief {p} equals the threshold {sigma} within {THRESHOLD_TOLERANCE}"
        )));
    }
    Ok(row
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > sigma)
        .map(|(i, _)| i)
        .collect())
}

/// Outcome of the exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    /// Every plan within [`ARGMAX_TOLERANCE`] of the best value, in enumeration order.
    pub optimal: Vec<SelectionPlan>,
    pub value: f64,
    /// Best value minus the best value outside `optimal`; `None` when every plan is optimal.
    pub margin: Option<f64>,
    /// First plan attaining the best non-optimal value.
    pub runner_up: Option<SelectionPlan>,
    /// Selection sizes of the first optimal plan.
    pub sizes: Vec<usize>,
    pub plans_evaluated: usize,
}

impl StrategyResult {
    pub fn is_unique(&self) -> bool {
        self.optimal.len() == 1
    }

    pub fn contains(&self, plan: &SelectionPlan) -> bool {
        self.optimal.contains(plan)
    }

    pub fn best(&self) -> &SelectionPlan {
        &self.optimal[0]
    }
}

/// The joint plans allowed by a domain, indexed in mixed radix with question
/// 0 varying fastest.
#[derive(Debug, Clone)]
pub struct PlanSpace {
    candidates: Vec<Vec<(OptionSet, usize, f64)>>,
    len: usize,
}

impl PlanSpace {
    pub fn new(beliefs: &BeliefProfile, domain: Domain) -> Result<Self> {
        let b = beliefs.num_options();
        if b > 20 {
            return Err(Error::InstanceTooLarge {
                count: 2f64.powi(b as i32),
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let per_question: Vec<OptionSet> = (0u64..(1u64 << b))
            .map(OptionSet::from_bits)
            .filter(|s| domain.allows_size(s.len(), b))
            .collect();
        let count = (per_question.len() as f64).powi(beliefs.num_questions() as i32);
        if count > BRUTE_FORCE_LIMIT {
            return Err(Error::InstanceTooLarge {
                count,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let candidates = beliefs
            .rows()
            .iter()
            .map(|row| per_question.iter().map(|&s| (s, s.len(), s.coverage(row))).collect())
            .collect();
        Ok(Self {
            candidates,
            len: count as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn digits(&self, mut index: usize) -> impl Iterator<Item = &(OptionSet, usize, f64)> + '_ {
        self.candidates.iter().map(move |c| {
            let d = index % c.len();
            index /= c.len();
            &c[d]
        })
    }

    pub fn plan(&self, index: usize) -> SelectionPlan {
        SelectionPlan::new(self.digits(index).map(|c| c.0).collect())
    }

    pub fn index_of(&self, plan: &SelectionPlan) -> Option<usize> {
        if plan.num_questions() != self.candidates.len() {
            return None;
        }
        let mut index = 0;
        let mut radix = 1;
        for (set, cands) in plan.selected().iter().zip(&self.candidates) {
            let d = cands.iter().position(|c| c.0 == *set)?;
            index += d * radix;
            radix *= cands.len();
        }
        Some(index)
    }

    /// Objective value of every plan, in index order.
    pub fn values<F>(&self, objective: F) -> Result<Vec<f64>>
    where
        F: Fn(&[usize], &[f64]) -> Result<f64> + Sync,
    {
        (0..self.len)
            .into_par_iter()
            .map(|index| {
                let (sizes, coverages): (Vec<usize>, Vec<f64>) = self.digits(index).map(|c| (c.1, c.2)).unzip();
                objective(&sizes, &coverages)
            })
            .collect()
    }
}

/// Argmax set and margin over precomputed plan values.
pub(crate) fn summarise(space: &PlanSpace, values: &[f64]) -> StrategyResult {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut optimal = Vec::new();
    let mut runner_up = f64::NEG_INFINITY;
    let mut runner_up_index = None;
    for (index, &v) in values.iter().enumerate() {
        if v >= best - ARGMAX_TOLERANCE {
            optimal.push(space.plan(index));
        } else if v > runner_up {
            runner_up = v;
            runner_up_index = Some(index);
        }
    }
    let sizes = optimal.first().map(SelectionPlan::sizes).unwrap_or_default();
    StrategyResult {
        optimal,
        value: best,
        margin: runner_up.is_finite().then_some(best - runner_up),
        runner_up: runner_up_index.map(|i| space.plan(i)),
        sizes,
        plans_evaluated: values.len(),
    }
}

/// Exhaustive maximiser of an arbitrary plan objective `(sizes, coverages) -> value`.
pub fn brute_force_optimal_by<F>(beliefs: &BeliefProfile, domain: Domain, objective: F) -> Result<StrategyResult>
where
    F: Fn(&[usize], &[f64]) -> Result<f64> + Sync,
{
    let space = PlanSpace::new(beliefs, domain)?;
    let values = space.values(objective)?;
    Ok(summarise(&space, &values))
}

/// Exhaustive maximiser of expected payment over every joint plan allowed by
/// `domain`, with `g` gold questions among the profile's questions.
pub fn brute_force_optimal<R: PaymentRule + ?Sized>(
    g: usize,
    rule: &R,
    beliefs: &BeliefProfile,
    domain: Domain,
) -> Result<StrategyResult> {
    let n = beliefs.num_questions();
    brute_force_optimal_by(beliefs, domain, |sizes, coverages| {
        expected_payment_generic(n, g, rule, sizes, coverages)
    })
}

/// Exhaustive maximiser of expected utility.
pub fn brute_force_optimal_utility<R: PaymentRule + ?Sized>(
    g: usize,
    utility: &UtilitySpec,
    rule: &R,
    beliefs: &BeliefProfile,
    domain: Domain,
) -> Result<StrategyResult> {
    let n = beliefs.num_questions();
    brute_force_optimal_by(beliefs, domain, |sizes, coverages| {
        expected_utility(n, g, utility, rule, sizes, coverages)
    })
}

/// Per-question relative-belief rule applied to a whole profile.
pub fn relative_belief_plan(beliefs: &BeliefProfile, rho: f64) -> Result<SelectionPlan> {
    beliefs
        .rows()
        .iter()
        .map(|row| rule_relative_belief(row, rho))
        .collect::<Result<Vec<_>>>()
        .map(SelectionPlan::new)
}

/// Per-question support.
pub fn support_plan(beliefs: &BeliefProfile) -> SelectionPlan {
    SelectionPlan::new(beliefs.rows().iter().map(|r| rule_coarse_support(r)).collect())
}

/// Per-question threshold rule applied to a whole profile.
pub fn threshold_plan(beliefs: &BeliefProfile, tc: &ThresholdConfig) -> Result<SelectionPlan> {
    beliefs
        .rows()
        .iter()
        .map(|row| rule_threshold(row, tc))
        .collect::<Result<Vec<_>>>()
        .map(SelectionPlan::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MechanismConfig;

    fn set(options: &[usize]) -> OptionSet {
        options.iter().copied().collect()
    }

    fn profile(rows: &[&[f64]]) -> BeliefProfile {
        BeliefProfile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn support_rule() {
        assert_eq!(rule_coarse_support(&[0.7, 0.3, 0.0, 0.0]), set(&[0, 1]));
        assert_eq!(rule_coarse_support(&[0.25; 4]), OptionSet::full(4));
        assert_eq!(rule_coarse_support(&[1.0, 0.0, 0.0]), set(&[0]));
        assert_eq!(rule_coarse_support(&[1.0 - 1e-13, 1e-13]), set(&[0]));
    }

    #[test]
    fn relative_rule_examples() {
        assert_eq!(rule_relative_belief(&[0.5, 0.3, 0.2], 0.25).unwrap(), set(&[0, 1]));
        for rho in [0.01, 0.1, 0.2, 0.29] {
            assert_eq!(rule_relative_belief(&[0.7, 0.3, 0.0], rho).unwrap(), set(&[0, 1]));
        }
        assert_eq!(rule_relative_belief(&[0.25; 4], 0.2).unwrap(), OptionSet::full(4));
        let choice = relative_belief_choice(&[0.5, 0.3, 0.2], 0.25).unwrap();
        assert_eq!(choice.prefix_len, 2);
        assert_eq!(choice.order, vec![0, 1, 2]);
        assert!((choice.ratios[2] - 0.2).abs() < 1e-15);
        // order of the input does not matter
        assert_eq!(rule_relative_belief(&[0.2, 0.5, 0.3], 0.25).unwrap(), set(&[1, 2]));
    }

    #[test]
    fn relative_rule_degenerate_ratio() {
        // 0.25 / (0.75 + 0.25) = 0.25
        assert!(matches!(
            rule_relative_belief(&[0.75, 0.25], 0.25),
            Err(Error::DegenerateBelief(_))
        ));
    }

    #[test]
    fn threshold_rule_examples() {
        let tc = ThresholdConfig::new(1, 1, 3, 0.0, 1.0, 0.3, None).unwrap();
        assert_eq!(rule_threshold(&[0.5, 0.4, 0.1], &tc).unwrap(), set(&[0, 1]));
        let tc = ThresholdConfig::new(1, 1, 3, 0.0, 1.0, 0.4, None).unwrap();
        assert_eq!(tc.min_count(), 0);
        assert_eq!(rule_threshold(&[0.34, 0.33, 0.33], &tc).unwrap(), OptionSet::EMPTY);
        let tc = ThresholdConfig::new(1, 1, 3, 0.0, 1.0, 0.3, None).unwrap();
        assert!(matches!(
            rule_threshold(&[0.7, 0.3, 0.0], &tc),
            Err(Error::DegenerateBelief(_))
        ));
    }

    #[test]
    fn oracle_single_question() {
        let c = MechanismConfig::new(1, 1, 3, 0.0, 1.0, 0.25).unwrap();
        let p = profile(&[&[0.5, 0.3, 0.2]]);
        let r = brute_force_optimal(1, &c, &p, Domain::Approval).unwrap();
        assert!(r.is_unique());
        assert_eq!(r.best().selected(), &[set(&[0, 1])]);
        assert!((r.value - 0.6).abs() < 1e-15);
        assert_eq!(r.plans_evaluated, 7);
        // the runner-up is the full set at 0.5625
        assert!((r.margin.unwrap() - (0.6 - 0.5625)).abs() < 1e-15);
    }

    #[test]
    fn oracle_certifies_supports_on_coarse_profile() {
        let c = MechanismConfig::new(2, 2, 3, 0.0, 1.0, 0.2).unwrap();
        let p = profile(&[&[0.7, 0.3, 0.0], &[0.4, 0.3, 0.3]]);
        let r = brute_force_optimal(2, &c, &p, Domain::Approval).unwrap();
        assert!(r.is_unique());
        assert_eq!(r.best(), &support_plan(&p));
        assert!(r.margin.unwrap() > 1e-9);
    }

    #[test]
    fn oracle_sees_the_threshold_boundary_tie() {
        for (b, sigma) in [(3usize, 0.3), (4, 0.2)] {
            let tc = ThresholdConfig::new(1, 1, b, 0.0, 1.0, sigma, None).unwrap();
            let mut row = vec![0.0; b];
            row[0] = 1.0 - sigma;
            row[1] = sigma;
            let p = BeliefProfile::from_rows(vec![row]).unwrap();
            let r = brute_force_optimal(1, &tc, &p, Domain::threshold(&tc)).unwrap();
            let single = SelectionPlan::new(vec![set(&[0])]);
            let pair = SelectionPlan::new(vec![set(&[0, 1])]);
            assert!(r.contains(&single) && r.contains(&pair), "{r:?}");
        }
    }

    #[test]
    fn oracle_guard() {
        let c = MechanismConfig::new(6, 6, 4, 0.0, 1.0, 0.2).unwrap();
        let p = BeliefProfile::from_rows(vec![vec![0.25; 4]; 6]).unwrap();
        assert!(matches!(
            brute_force_optimal(6, &c, &p, Domain::Approval),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn plan_space_index_round_trip() {
        let p = BeliefProfile::from_rows(vec![vec![0.5, 0.5, 0.0]; 3]).unwrap();
        let space = PlanSpace::new(&p, Domain::Approval).unwrap();
        assert_eq!(space.len(), 343);
        for i in [0, 1, 50, 342] {
            assert_eq!(space.index_of(&space.plan(i)), Some(i));
        }
    }
}
