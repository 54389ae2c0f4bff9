//! Executable checks of the mechanisms' guarantees. Every check returns a
//! [`VerificationReport`]; failing reports carry a witness that can be
//! replayed through `mechanisms`, `expectation` and `strategy`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expectation::{binomial, expected_payment_generic, gold_subsets, ENUMERATION_LIMIT};
use crate::mechanisms::{mech1_pay, PaymentRule};
use crate::model::{BeliefProfile, Domain, MechanismConfig, OptionSet, SelectionPlan, ThresholdConfig};
use crate::sim::generators::{sample_coarse_row, sample_row_away_from};
use crate::strategy::{brute_force_optimal, support_plan, threshold_plan};

/// Margins at or below this are too small to certify strictness.
pub const STRICTNESS_MARGIN: f64 = 1e-9;

/// Tolerance for exact payment identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Optimal and unique, but by a margin too small to trust in double precision.
    Indeterminate,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Indeterminate => "INDETERMINATE",
        })
    }
}

/// Concrete object that demonstrates a report's conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A belief profile and a plan that beats (or ties) the desired one.
    Deviation {
        beliefs: Vec<Vec<f64>>,
        desired: SelectionPlan,
        deviation: SelectionPlan,
        desired_value: f64,
        deviation_value: f64,
    },
    Evaluation { evaluation: Vec<i32>, payment: f64 },
    /// A gold placement (0-based question indices).
    GoldSubset { subset: Vec<usize>, deficit: f64 },
    Relation { relation: String, m: i32, residual: f64 },
    /// Two-option belief under which selecting `{1}` is weakly preferred to the
    /// support, or the support `{1}` is not strictly preferred.
    Belief {
        belief: Vec<f64>,
        single_value: f64,
        pair_value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub status: Status,
    pub margin: Option<f64>,
    pub details: Value,
    pub witness: Option<Witness>,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    fn new(check: &str, status: Status, parameters: Value) -> Self {
        Self {
            check: check.to_string(),
            status,
            margin: None,
            details: Value::Null,
            witness: None,
            parameters,
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.status, self.check)?;
        if let Some(m) = self.margin {
            write!(f, " margin={m:e}")?;
        }
        if !self.details.is_null() {
            write!(f, " {}", self.details)?;
        }
        if let Some(w) = &self.witness {
            write!(f, " witness={}", serde_json::to_string(w).unwrap_or_default())?;
        }
        Ok(())
    }
}

fn strictness(margin: f64) -> Status {
    if margin > STRICTNESS_MARGIN {
        Status::Pass
    } else if margin > 0.0 {
        Status::Indeterminate
    } else {
        Status::Fail
    }
}

/// Is `desired` the unique expected-payment maximiser, by a margin above
/// [`STRICTNESS_MARGIN`]?
pub fn check_incentive_compatibility<R: PaymentRule + ?Sized>(
    num_gold: usize,
    rule: &R,
    profile: &BeliefProfile,
    domain: Domain,
    desired: &SelectionPlan,
) -> Result<VerificationReport> {
    let n = profile.num_questions();
    let params = json!({
        "num_questions": n,
        "num_gold": num_gold,
        "num_options": profile.num_options(),
        "beliefs": profile.rows(),
        "desired": desired,
    });
    let result = brute_force_optimal(num_gold, rule, profile, domain)?;
    let value_of = |plan: &SelectionPlan| -> Result<f64> {
        let coverages = plan.coverages(profile)?;
        expected_payment_generic(n, num_gold, rule, &plan.sizes(), &coverages)
    };
    let desired_value = value_of(desired)?;
    let deviation = if !result.contains(desired) {
        Some(result.best().clone())
    } else if !result.is_unique() {
        result.optimal.iter().find(|p| *p != desired).cloned()
    } else {
        None
    };
    let mut report;
    match deviation {
        Some(dev) => {
            let deviation_value = value_of(&dev)?;
            report = VerificationReport::new("incentive-compatibility", Status::Fail, params);
            report.margin = Some(desired_value - deviation_value);
            report.witness = Some(Witness::Deviation {
                beliefs: profile.rows().to_vec(),
                desired: desired.clone(),
                deviation: dev,
                desired_value,
                deviation_value,
            });
        }
        None => {
            // a unique optimum with nothing else in the domain is trivially strict
            let margin = result.margin.unwrap_or(f64::INFINITY);
            report = VerificationReport::new("incentive-compatibility", strictness(margin), params);
            report.margin = result.margin;
            if let Some(dev) = result.runner_up {
                let deviation_value = value_of(&dev)?;
                report.witness = Some(Witness::Deviation {
                    beliefs: profile.rows().to_vec(),
                    desired: desired.clone(),
                    deviation: dev,
                    desired_value,
                    deviation_value,
                });
            }
        }
    }
    report.details = json!({ "value": desired_value, "plans_evaluated": result.plans_evaluated });
    Ok(report)
}

/// Does the approval mechanism pay exactly
/// `floor + (1 - rho)^{(B-1)G} * span` to a worker who selects everything?
pub fn check_frugality_bound(config: &MechanismConfig) -> VerificationReport {
    let (b, g) = (config.num_options(), config.num_gold());
    let bound = config.pay_floor() + (1.0 - config.coarseness()).powi(((b - 1) * g) as i32) * config.pay_span();
    let paid = mech1_pay(config, &vec![b as i32; g]).expect("all-B evaluation is in the domain").amount();
    let err = (paid - bound).abs();
    let status = if err <= IDENTITY_TOLERANCE { Status::Pass } else { Status::Fail };
    let mut report = VerificationReport::new(
        "frugality",
        status,
        json!({ "num_options": b, "num_gold": g, "rho": config.coarseness(),
                "pay_floor": config.pay_floor(), "pay_ceiling": config.pay_ceiling() }),
    );
    report.margin = Some(err);
    report.details = json!({ "bound": bound, "paid": paid });
    if status == Status::Fail {
        report.witness = Some(Witness::Evaluation {
            evaluation: vec![b as i32; g],
            payment: paid,
        });
    }
    report
}

/// Every evaluation where at least one question is attempted (`|x| < B`) and
/// every attempted question is wrong must pay the floor. Evaluations the rule
/// rejects as outside its domain are skipped and counted.
pub fn check_no_free_lunch<R: PaymentRule + ?Sized>(
    num_gold: usize,
    num_options: usize,
    pay_floor: f64,
    rule: &R,
) -> Result<VerificationReport> {
    if num_options > 5 || num_gold > 4 || num_options < 2 {
        return Err(Error::InstanceTooLarge {
            count: (num_options as f64).powi(num_gold as i32),
            limit: 625.0,
        });
    }
    let b = num_options as i32;
    // wrong attempts -(B-1)..=-1, or B for "not attempted"
    let values: Vec<i32> = (1..b).map(|k| -k).chain([b]).collect();
    let mut eval = vec![0i32; num_gold];
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst: Option<(Vec<i32>, f64)> = None;
    let total = values.len().pow(num_gold as u32);
    for mut code in 0..total {
        for x in eval.iter_mut() {
            *x = values[code % values.len()];
            code /= values.len();
        }
        if eval.iter().all(|&x| x == b) {
            continue;
        }
        match rule.pay(&eval) {
            Ok(p) => {
                checked += 1;
                let excess = (p - pay_floor).abs();
                if excess > IDENTITY_TOLERANCE && worst.as_ref().is_none_or(|w| excess > (w.1 - pay_floor).abs()) {
                    worst = Some((eval.clone(), p));
                }
            }
            Err(Error::DomainError(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let status = if worst.is_none() { Status::Pass } else { Status::Fail };
    let mut report = VerificationReport::new(
        "no-free-lunch",
        status,
        json!({ "num_gold": num_gold, "num_options": num_options, "pay_floor": pay_floor }),
    );
    report.details = json!({ "evaluations_checked": checked, "outside_rule_domain": skipped });
    if let Some((evaluation, payment)) = worst {
        report.margin = Some((payment - pay_floor).abs());
        report.witness = Some(Witness::Evaluation { evaluation, payment });
    }
    report.note = Some("necessity only: uniqueness over all mechanisms is not finitely checkable".into());
    Ok(report)
}

/// Two-option, single-question witness against strict incentive
/// compatibility for a candidate with values `f(1)`, `f(2)`, `f(-1)`.
///
/// Returns the belief `(p1, 1 - p1)` and a report that passes when the witness
/// is verified: either the support `{1}` is not strictly preferred to `{1,2}`
/// (`p1 = 1`), or `{1}` weakly beats the support `{1,2}`.
pub fn find_impossibility_counterexample(f_pos1: f64, f_pos2: f64, f_neg1: f64) -> (Vec<f64>, VerificationReport) {
    let max_t = 1.0 - 1e-9;
    let p1 = if f_pos1 <= f_pos2 {
        1.0
    } else {
        let denom = f_pos1 - f_neg1;
        let t = if denom > 0.0 { ((f_pos1 - f_pos2) / denom).min(max_t) } else { max_t };
        1.0 - t / 2.0
    };
    let belief = vec![p1, 1.0 - p1];
    let rule = |x: &[i32]| match x[0] {
        1 => f_pos1,
        2 => f_pos2,
        _ => f_neg1,
    };
    let single = expected_payment_generic(1, 1, &rule, &[1], &[p1]).expect("single question");
    let pair = expected_payment_generic(1, 1, &rule, &[2], &[1.0]).expect("single question");
    // support {1}: needs single > pair strictly; support {1,2}: needs pair > single
    let (verified, margin) = if p1 == 1.0 {
        (single <= pair, pair - single)
    } else {
        (single >= pair, single - pair)
    };
    let mut report = VerificationReport::new(
        "impossibility",
        if verified { Status::Pass } else { Status::Fail },
        json!({ "f_pos1": f_pos1, "f_pos2": f_pos2, "f_neg1": f_neg1 }),
    );
    report.margin = Some(margin);
    report.witness = Some(Witness::Belief {
        belief: belief.clone(),
        single_value: single,
        pair_value: pair,
    });
    (belief, report)
}

/// Averaged inequality that any incentive-compatible rule satisfies when one
/// more option is selected on the questions in `raised`, applied to
/// `rule - floor`. On equality, also checks the accompanying zero-payment
/// condition.
pub fn check_lemma1<R: PaymentRule + ?Sized>(
    config: &MechanismConfig,
    rule: &R,
    y: &[usize],
    y_prime: &[usize],
    raised: &[usize],
) -> Result<VerificationReport> {
    let (n, g, b) = (config.num_questions(), config.num_gold(), config.num_options());
    for (what, v) in [("y", y), ("y_prime", y_prime)] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { what, expected: n, found: v.len() });
        }
        if v.iter().any(|&s| s == 0 || s > b) {
            return Err(Error::InvalidConfig(format!("{what} entries must lie in 1..={b}")));
        }
    }
    let mut in_set = vec![false; n];
    for &i in raised {
        if i >= n {
            return Err(Error::InvalidConfig(format!("index {i} outside 0..{n}")));
        }
        in_set[i] = true;
    }
    for i in 0..n {
        let expected = y_prime[i] + usize::from(in_set[i]);
        if y[i] != expected {
            return Err(Error::InvalidConfig(format!(
                "y[{i}] = {} but y_prime[{i}] = {} and index {} the raised set",
                y[i],
                y_prime[i],
                if in_set[i] { "is in" } else { "is not in" }
            )));
        }
    }
    let count = binomial(n, g) * 2f64.powi(g as i32);
    if count > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge { count, limit: ENUMERATION_LIMIT });
    }

    let floor = config.pay_floor();
    let keep = 1.0 - config.coarseness();
    let h = |eval: &[i32]| -> Result<f64> { Ok(rule.pay(eval)? - floor) };
    let placements = binomial(n, g);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    let mut worst: Option<(Vec<usize>, f64)> = None;
    let mut eval = vec![0i32; g];
    for subset in gold_subsets(n, g) {
        for (k, &j) in subset.iter().enumerate() {
            eval[k] = y[j] as i32;
        }
        let left = h(&eval)?;
        for (k, &j) in subset.iter().enumerate() {
            eval[k] = y_prime[j] as i32;
        }
        let hits = subset.iter().filter(|&&j| in_set[j]).count();
        let right = keep.powi(hits as i32) * h(&eval)?;
        lhs += left / placements;
        rhs += right / placements;
        let deficit = right - left;
        if worst.as_ref().is_none_or(|w| deficit > w.1) {
            worst = Some((subset, deficit));
        }
    }
    let gap = lhs - rhs;
    let params = json!({ "num_questions": n, "num_gold": g, "num_options": b, "rho": config.coarseness(),
                         "y": y, "y_prime": y_prime, "raised": raised });
    let mut report;
    if gap < -IDENTITY_TOLERANCE {
        report = VerificationReport::new("lemma1", Status::Fail, params);
        let (subset, deficit) = worst.expect("at least one placement");
        report.witness = Some(Witness::GoldSubset { subset, deficit });
    } else if gap <= IDENTITY_TOLERANCE {
        // equality: every mixed-sign payment on y_prime that could only be
        // wrong on raised questions must be the floor
        let mut violation = None;
        let mut checked = 0usize;
        'outer: for subset in gold_subsets(n, g) {
            for mask in 0u32..(1u32 << g) - 1 {
                let mut ok = true;
                for (k, &j) in subset.iter().enumerate() {
                    let correct = mask & (1 << k) != 0;
                    if !correct && !in_set[j] {
                        ok = false;
                        break;
                    }
                    let y = y_prime[j] as i32;
                    eval[k] = if correct { y } else { -y };
                }
                if !ok || eval.iter().any(|&x| x == -(b as i32)) {
                    continue;
                }
                checked += 1;
                let value = h(&eval)?;
                if value.abs() > IDENTITY_TOLERANCE {
                    violation = Some((eval.clone(), value + floor));
                    break 'outer;
                }
            }
        }
        report = VerificationReport::new(
            "lemma1",
            if violation.is_none() { Status::Pass } else { Status::Fail },
            params,
        );
        report.details = json!({ "equality": true, "zero_payment_evaluations_checked": checked });
        if let Some((evaluation, payment)) = violation {
            report.witness = Some(Witness::Evaluation { evaluation, payment });
        }
    } else {
        report = VerificationReport::new("lemma1", Status::Pass, params);
        report.details = json!({ "equality": false });
    }
    report.margin = Some(gap);
    if let Value::Object(map) = &mut report.details {
        map.insert("lhs".into(), json!(lhs));
        map.insert("rhs".into(), json!(rhs));
    } else {
        report.details = json!({ "lhs": lhs, "rhs": rhs });
    }
    Ok(report)
}

/// Linear relations any incentive-compatible single-question threshold rule
/// must satisfy. Together they force the candidate to be a positive affine
/// image of the threshold score.
pub fn check_threshold_uniqueness_relations<F>(tc: &ThresholdConfig, candidate: F) -> VerificationReport
where
    F: Fn(i32) -> f64,
{
    let sigma = tc.threshold();
    let b = tc.num_options();
    let s_max = tc.max_count() as i32;
    let f = &candidate;
    let mut residuals: Vec<(String, i32, f64)> = Vec::new();
    for m in 1..s_max {
        let r = f(m + 1) - ((1.0 - sigma) * f(m) + sigma * f(-m));
        residuals.push(("f(m+1) = (1-s)f(m) + s f(-m)".into(), m, r));
    }
    for m in 1..s_max - 1 {
        let r = f(m + 2) - ((1.0 - 2.0 * sigma) * f(m) + 2.0 * sigma * f(-m));
        residuals.push(("f(m+2) = (1-2s)f(m) + 2s f(-m)".into(), m, r));
    }
    if (s_max as usize) < b && s_max > 1 {
        let r = (f(-s_max) - f(s_max)) - (f(-(s_max - 1)) - f(s_max - 1));
        residuals.push(("f(-s) - f(s) = f(-(s-1)) - f(s-1)".into(), s_max, r));
    }
    if tc.min_count() == 0 {
        let r = f(0) - (sigma * f(1) + (1.0 - sigma) * f(-1));
        residuals.push(("f(0) = s f(1) + (1-s) f(-1)".into(), 0, r));
    }
    let worst = residuals
        .iter()
        .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
        .cloned();
    let max_residual = worst.as_ref().map_or(0.0, |w| w.2.abs());
    let scale = f(1) - f(-1);
    let violated = if max_residual > IDENTITY_TOLERANCE {
        worst.clone()
    } else if scale <= IDENTITY_TOLERANCE {
        Some(("f(1) - f(-1) > 0".into(), 1, scale))
    } else {
        None
    };
    let mut report = VerificationReport::new(
        "threshold-relations",
        if violated.is_none() { Status::Pass } else { Status::Fail },
        json!({ "num_options": b, "sigma": sigma, "s_min": tc.min_count(), "s_max": s_max }),
    );
    report.margin = Some(max_residual);
    report.details = json!({ "relations": residuals.len(), "max_residual": max_residual, "scale": scale });
    report.witness = violated.map(|(relation, m, residual)| Witness::Relation { relation, m, residual });
    report
}

/// Threshold score as a candidate for [`check_threshold_uniqueness_relations`].
pub fn g_candidate(tc: &ThresholdConfig) -> impl Fn(i32) -> f64 + '_ {
    move |x| (tc.num_options() as f64 - x.unsigned_abs() as f64) * tc.threshold() + if x >= 1 { 1.0 } else { 0.0 }
}

/// Beliefs `(1 - sigma, sigma, 0, ...)` give the threshold mechanism the
/// same expected payment for `{1}` and `{1,2}`, so strictness fails exactly
/// at the threshold.
pub fn check_mech2_boundary_equality(tc: &ThresholdConfig) -> Result<VerificationReport> {
    let single_tc = tc.with_questions(1, 1)?;
    let sigma = tc.threshold();
    let single = expected_payment_generic(1, 1, &single_tc, &[1], &[1.0 - sigma])?;
    let pair = expected_payment_generic(1, 1, &single_tc, &[2], &[1.0])?;
    let diff = (single - pair).abs();
    let mut report = VerificationReport::new(
        "boundary-equality",
        if diff <= IDENTITY_TOLERANCE { Status::Pass } else { Status::Fail },
        json!({ "num_options": tc.num_options(), "sigma": sigma }),
    );
    report.margin = Some(diff);
    report.details = json!({ "single": single, "pair": pair });
    if report.status == Status::Fail {
        let mut belief = vec![0.0; tc.num_options()];
        belief[0] = 1.0 - sigma;
        belief[1] = sigma;
        report.witness = Some(Witness::Belief {
            belief,
            single_value: single,
            pair_value: pair,
        });
    }
    Ok(report)
}

/// Named groups of checks run by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    IcMech1,
    IcMech2,
    Frugality,
    NoFreeLunch,
    Lemma1,
    ImpossibilityGrid,
    ThresholdRelations,
    BoundaryEquality,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::IcMech1,
        Suite::IcMech2,
        Suite::Frugality,
        Suite::NoFreeLunch,
        Suite::Lemma1,
        Suite::ImpossibilityGrid,
        Suite::ThresholdRelations,
        Suite::BoundaryEquality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::IcMech1 => "ic-mech1",
            Suite::IcMech2 => "ic-mech2",
            Suite::Frugality => "frugality",
            Suite::NoFreeLunch => "nfl",
            Suite::Lemma1 => "lemma1",
            Suite::ImpossibilityGrid => "impossibility-grid",
            Suite::ThresholdRelations => "threshold-relations",
            Suite::BoundaryEquality => "boundary-equality",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteParams {
    pub num_options: usize,
    pub num_gold: usize,
    pub num_questions: usize,
    pub rho: f64,
    pub sigma: f64,
    pub pay_floor: f64,
    pub pay_ceiling: f64,
    /// Grid points per axis for the impossibility sweep.
    pub resolution: usize,
    /// Random profiles per incentive-compatibility sweep.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            num_options: 3,
            num_gold: 2,
            num_questions: 3,
            rho: 0.2,
            sigma: 0.3,
            pay_floor: 0.0,
            pay_ceiling: 1.0,
            resolution: 50,
            trials: 100,
            seed: 0,
        }
    }
}

impl SuiteParams {
    pub fn mechanism_config(&self) -> Result<MechanismConfig> {
        MechanismConfig::new(
            self.num_questions,
            self.num_gold,
            self.num_options,
            self.pay_floor,
            self.pay_ceiling,
            self.rho,
        )
    }

    pub fn threshold_config(&self) -> Result<ThresholdConfig> {
        ThresholdConfig::new(
            self.num_questions,
            self.num_gold,
            self.num_options,
            self.pay_floor,
            self.pay_ceiling,
            self.sigma,
            None,
        )
    }
}

/// Folds a sweep into one report: the worst status wins and the first
/// failure's witness is kept.
pub fn summarise_sweep(check: &str, parameters: Value, reports: &[VerificationReport]) -> VerificationReport {
    let failed = reports.iter().filter(|r| r.status == Status::Fail).count();
    let indeterminate = reports.iter().filter(|r| r.status == Status::Indeterminate).count();
    let status = if failed > 0 {
        Status::Fail
    } else if indeterminate > 0 {
        Status::Indeterminate
    } else {
        Status::Pass
    };
    let mut summary = VerificationReport::new(check, status, parameters);
    summary.margin = reports.iter().filter_map(|r| r.margin).reduce(f64::min);
    summary.details = json!({ "instances": reports.len(), "failed": failed, "indeterminate": indeterminate });
    let first_bad = reports
        .iter()
        .find(|r| r.status == Status::Fail)
        .or_else(|| reports.iter().find(|r| r.status == Status::Indeterminate));
    if let Some(bad) = first_bad {
        summary.witness = bad.witness.clone();
        if let (Value::Object(map), Value::Object(instance)) = (&mut summary.details, &bad.parameters) {
            map.insert("first_bad_instance".into(), Value::Object(instance.clone()));
        }
    }
    summary
}

fn ic_mech1_sweep(p: &SuiteParams) -> Result<VerificationReport> {
    let config = p.mechanism_config()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut reports = Vec::with_capacity(p.trials);
    for _ in 0..p.trials {
        let rows = (0..p.num_questions)
            .map(|_| sample_coarse_row(&mut rng, p.num_options, p.rho, p.num_options))
            .collect();
        let profile = BeliefProfile::from_rows(rows)?;
        let desired = support_plan(&profile);
        reports.push(check_incentive_compatibility(
            p.num_gold,
            &config,
            &profile,
            Domain::Approval,
            &desired,
        )?);
    }
    Ok(summarise_sweep(
        "ic-mech1",
        json!({ "num_questions": p.num_questions, "num_gold": p.num_gold, "num_options": p.num_options,
                "rho": p.rho, "trials": p.trials, "seed": p.seed }),
        &reports,
    ))
}

fn ic_mech2_sweep(p: &SuiteParams) -> Result<VerificationReport> {
    let tc = p.threshold_config()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut reports = Vec::with_capacity(p.trials);
    for _ in 0..p.trials {
        let rows = (0..p.num_questions)
            .map(|_| sample_row_away_from(&mut rng, p.num_options, p.sigma, 1e-3))
            .collect();
        let profile = BeliefProfile::from_rows(rows)?;
        let desired = threshold_plan(&profile, &tc)?;
        reports.push(check_incentive_compatibility(
            p.num_gold,
            &tc,
            &profile,
            Domain::threshold(&tc),
            &desired,
        )?);
    }
    Ok(summarise_sweep(
        "ic-mech2",
        json!({ "num_questions": p.num_questions, "num_gold": p.num_gold, "num_options": p.num_options,
                "sigma": p.sigma, "trials": p.trials, "seed": p.seed }),
        &reports,
    ))
}

/// All `(y, y', I)` with `y' in [B]^N`, `I` non-empty and `y' < B` on `I`.
pub fn lemma1_configurations(n: usize, b: usize) -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let total = b.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let y_prime: Vec<usize> = (0..n)
            .map(|_| {
                let v = c % b + 1;
                c /= b;
                v
            })
            .collect();
        for mask in 1u32..(1 << n) {
            let raised: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if raised.iter().any(|&i| y_prime[i] == b) {
                continue;
            }
            let mut y = y_prime.clone();
            for &i in &raised {
                y[i] += 1;
            }
            out.push((y, y_prime.clone(), raised));
        }
    }
    out
}

fn lemma1_sweep(p: &SuiteParams) -> Result<VerificationReport> {
    let config = p.mechanism_config()?;
    let configs = lemma1_configurations(p.num_questions, p.num_options);
    let reports = configs
        .iter()
        .map(|(y, yp, raised)| check_lemma1(&config, &config, y, yp, raised))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = summarise_sweep(
        "lemma1",
        json!({ "num_questions": p.num_questions, "num_gold": p.num_gold, "num_options": p.num_options, "rho": p.rho }),
        &reports,
    );
    let equalities = reports.iter().filter(|r| r.details["equality"] == json!(true)).count();
    if let Value::Object(map) = &mut summary.details {
        map.insert("equalities".into(), json!(equalities));
    }
    // the approval mechanism meets every instance with equality
    if equalities != reports.len() && summary.status == Status::Pass {
        summary.status = Status::Fail;
        summary.witness = reports
            .iter()
            .find(|r| r.details["equality"] != json!(true))
            .and_then(|r| r.witness.clone());
    }
    Ok(summary)
}

/// Sweeps `(f(1), f(2), f(-1))` over `resolution^3` points of `[0,1]^3`.
pub fn impossibility_grid(resolution: usize) -> VerificationReport {
    let r = resolution.max(2);
    let step = |i: usize| i as f64 / (r - 1) as f64;
    let mut verified = 0usize;
    let mut escaped = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let (_, report) = find_impossibility_counterexample(step(i), step(j), step(k));
                if report.passed() {
                    verified += 1;
                } else if escaped.is_empty() {
                    escaped.push(report);
                }
            }
        }
    }
    let total = r * r * r;
    let mut summary = VerificationReport::new(
        "impossibility-grid",
        if verified == total { Status::Pass } else { Status::Fail },
        json!({ "resolution": r }),
    );
    summary.details = json!({ "grid_points": total, "witnesses_verified": verified, "escaped": total - verified });
    summary.witness = escaped.first().and_then(|e| e.witness.clone());
    summary
}

fn threshold_relations_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let tc = p.threshold_config()?;
    let g = g_candidate(&tc);
    let plain = check_threshold_uniqueness_relations(&tc, &g);
    let affine = check_threshold_uniqueness_relations(&tc, |x| 2.0 * g(x) + 5.0);
    let perturbed = check_threshold_uniqueness_relations(&tc, |x| g(x) + if x == -1 { 0.01 } else { 0.0 });
    let ok = plain.passed() && affine.passed() && perturbed.status == Status::Fail;
    let mut summary = VerificationReport::new(
        "threshold-relations",
        if ok { Status::Pass } else { Status::Fail },
        json!({ "num_options": p.num_options, "sigma": p.sigma }),
    );
    summary.margin = plain.margin;
    summary.details = json!({
        "g": plain.status, "affine_2g_plus_5": affine.status, "perturbed_rejected": perturbed.status == Status::Fail,
        "perturbed_residual": perturbed.margin,
    });
    if !ok {
        summary.witness = [&plain, &affine]
            .into_iter()
            .find(|r| !r.passed())
            .and_then(|r| r.witness.clone());
    }
    Ok(summary)
}

/// Sigma grid `0.05, 0.10, ..., 0.45` plus the configured value.
pub fn sigma_grid(extra: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();
    if !grid.iter().any(|&s| (s - extra).abs() < 1e-15) {
        grid.push(extra);
    }
    grid
}

fn boundary_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let reports = sigma_grid(p.sigma)
        .into_iter()
        .map(|sigma| {
            let tc = ThresholdConfig::new(1, 1, p.num_options, p.pay_floor, p.pay_ceiling, sigma, None)?;
            check_mech2_boundary_equality(&tc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = summarise_sweep("boundary-equality", json!({ "num_options": p.num_options }), &reports);
    summary.margin = reports.iter().filter_map(|r| r.margin).reduce(f64::max);
    Ok(summary)
}

/// Runs one suite (or all of them) and returns one report per check.
pub fn run_suite(suite: Suite, params: &SuiteParams) -> Result<Vec<VerificationReport>> {
    let run_one = |s: Suite| -> Result<VerificationReport> {
        match s {
            Suite::IcMech1 => ic_mech1_sweep(params),
            Suite::IcMech2 => ic_mech2_sweep(params),
            Suite::Frugality => Ok(check_frugality_bound(&params.mechanism_config()?)),
            Suite::NoFreeLunch => {
                let config = params.mechanism_config()?;
                check_no_free_lunch(config.num_gold(), config.num_options(), config.pay_floor(), &config)
            }
            Suite::Lemma1 => lemma1_sweep(params),
            Suite::ImpossibilityGrid => Ok(impossibility_grid(params.resolution)),
            Suite::ThresholdRelations => threshold_relations_suite(params),
            Suite::BoundaryEquality => boundary_suite(params),
            Suite::All => unreachable!(),
        }
    };
    match suite {
        Suite::All => Suite::EACH.into_iter().map(run_one).collect(),
        s => Ok(vec![run_one(s)?]),
    }
}

/// Single-question plan selecting option set `options` (0-based).
pub fn single_plan(options: &[usize]) -> SelectionPlan {
    SelectionPlan::new(vec![options.iter().copied().collect::<OptionSet>()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{baseline_additive, AdditiveBaseline, Mechanism};

    fn mc(n: usize, g: usize, b: usize, rho: f64) -> MechanismConfig {
        MechanismConfig::new(n, g, b, 0.0, 1.0, rho).unwrap()
    }

    #[test]
    fn ic_mech1_on_coarse_profile() {
        let c = mc(2, 2, 3, 0.2);
        let p = BeliefProfile::from_rows(vec![vec![0.7, 0.3, 0.0], vec![0.5, 0.25, 0.25]]).unwrap();
        let r = check_incentive_compatibility(2, &c, &p, Domain::Approval, &support_plan(&p)).unwrap();
        assert_eq!(r.status, Status::Pass, "{r}");
        assert!(r.margin.unwrap() > 1e-9);
    }

    /// With no per-option penalty the full selection pays the ceiling, so a
    /// worker certain of one answer is indifferent between it and everything.
    #[test]
    fn ic_fails_without_penalty() {
        let free = |x: &[i32]| if x.iter().all(|&v| v >= 1) { 1.0 } else { 0.0 };
        let p = BeliefProfile::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let r = check_incentive_compatibility(1, &free, &p, Domain::Approval, &single_plan(&[0])).unwrap();
        assert_eq!(r.status, Status::Fail);
        match r.witness.unwrap() {
            Witness::Deviation { deviation, deviation_value, .. } => {
                assert_eq!(deviation, single_plan(&[0, 1]));
                assert_eq!(deviation_value, 1.0);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    /// A small belief below rho makes dropping that option strictly better.
    #[test]
    fn ic_fails_below_coarseness() {
        let c = mc(1, 1, 2, 0.1);
        let p = BeliefProfile::from_rows(vec![vec![0.95, 0.05]]).unwrap();
        let r = check_incentive_compatibility(1, &c, &p, Domain::Approval, &support_plan(&p)).unwrap();
        assert_eq!(r.status, Status::Fail);
        match r.witness.unwrap() {
            Witness::Deviation { deviation, deviation_value, desired_value, .. } => {
                assert_eq!(deviation, single_plan(&[0]));
                assert!((deviation_value - 0.95).abs() < 1e-15);
                assert!((desired_value - 0.9).abs() < 1e-15);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn ic_mech2_thresholded() {
        let tc = ThresholdConfig::new(1, 1, 3, 0.0, 1.0, 0.3, None).unwrap();
        let p = BeliefProfile::from_rows(vec![vec![0.5, 0.4, 0.1]]).unwrap();
        let desired = threshold_plan(&p, &tc).unwrap();
        let r = check_incentive_compatibility(1, &tc, &p, Domain::threshold(&tc), &desired).unwrap();
        assert_eq!(r.status, Status::Pass, "{r}");
    }

    #[test]
    fn frugality() {
        let r = check_frugality_bound(&mc(2, 2, 3, 0.2));
        assert!(r.passed());
        assert!((r.details["bound"].as_f64().unwrap() - 0.4096).abs() < 1e-15);
        let r = check_frugality_bound(&mc(1, 1, 2, 0.3));
        assert!((r.details["bound"].as_f64().unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn no_free_lunch() {
        let c = mc(2, 2, 3, 0.2);
        assert!(check_no_free_lunch(2, 3, 0.0, &c).unwrap().passed());
        let add = AdditiveBaseline { num_gold: 2, pay_floor: 0.0, pay_ceiling: 1.0, per_correct_bonus: 0.5 };
        // (+1, -1) pays the bonus but is not all-wrong; (-1, -1) pays the floor
        assert_eq!(baseline_additive(&add, &[1, -1]).unwrap().amount(), 0.5);
        let r = check_no_free_lunch(2, 2, 0.0, &Mechanism::Additive(add)).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.details["evaluations_checked"], json!(1));
        assert_eq!(r.details["outside_rule_domain"], json!(2));
        let constant = |_: &[i32]| 1.0;
        let r = check_no_free_lunch(2, 3, 0.0, &constant).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(check_no_free_lunch(5, 3, 0.0, &constant).is_err());
    }

    #[test]
    fn impossibility_examples() {
        let (belief, r) = find_impossibility_counterexample(1.0, 0.9, 0.0);
        assert!((belief[0] - 0.95).abs() < 1e-15);
        assert!(r.passed());
        match r.witness.unwrap() {
            Witness::Belief { single_value, pair_value, .. } => {
                assert!((single_value - 0.95).abs() < 1e-15);
                assert_eq!(pair_value, 0.9);
            }
            w => panic!("{w:?}"),
        }
        let (belief, r) = find_impossibility_counterexample(1.0, 1.0, 0.0);
        assert_eq!(belief[0], 1.0);
        assert!(r.passed());
        // the approval mechanism's own slice: threshold equals rho
        let rho = 0.2;
        let (belief, r) = find_impossibility_counterexample(1.0, 1.0 - rho, 0.0);
        assert!(belief[1] < rho);
        assert!(r.passed());
    }

    #[test]
    fn lemma1_mech1_equality() {
        let c = mc(3, 2, 3, 0.2);
        let r = check_lemma1(&c, &c, &[2, 2, 2], &[1, 1, 1], &[0, 1, 2]).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.details["equality"], json!(true));
    }

    #[test]
    fn lemma1_constant_rule_is_strict() {
        let c = mc(3, 2, 3, 0.2);
        let constant = |_: &[i32]| 1.0;
        let r = check_lemma1(&c, &constant, &[2, 2, 2], &[1, 1, 1], &[0, 1, 2]).unwrap();
        assert!(r.passed());
        assert_eq!(r.details["equality"], json!(false));
    }

    #[test]
    fn lemma1_over_penalising_rule_fails() {
        let c = mc(3, 2, 3, 0.2);
        let steep = |x: &[i32]| {
            if x.iter().all(|&v| v >= 1) {
                0.6f64.powi(x.iter().map(|&v| v - 1).sum())
            } else {
                0.0
            }
        };
        let r = check_lemma1(&c, &steep, &[2, 2, 2], &[1, 1, 1], &[0, 1, 2]).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(matches!(r.witness, Some(Witness::GoldSubset { .. })));
    }

    #[test]
    fn lemma1_rejects_bad_shapes() {
        let c = mc(2, 1, 3, 0.2);
        assert!(check_lemma1(&c, &c, &[2, 2], &[1, 1], &[0]).is_err());
        assert!(check_lemma1(&c, &c, &[4, 1], &[3, 1], &[0]).is_err());
    }

    #[test]
    fn threshold_relations() {
        for (b, sigma) in [(3, 0.3), (4, 0.2), (5, 0.15), (4, 0.45), (3, 0.1)] {
            let tc = ThresholdConfig::new(1, 1, b, 0.0, 1.0, sigma, None).unwrap();
            let g = g_candidate(&tc);
            let r = check_threshold_uniqueness_relations(&tc, &g);
            assert!(r.passed(), "{r}");
            assert!(check_threshold_uniqueness_relations(&tc, |x| 2.0 * g(x) + 5.0).passed());
            let bad = check_threshold_uniqueness_relations(&tc, |x| g(x) + if x == -1 { 0.01 } else { 0.0 });
            assert_eq!(bad.status, Status::Fail);
            assert!(matches!(bad.witness, Some(Witness::Relation { .. })));
            assert_eq!(check_threshold_uniqueness_relations(&tc, |x| -g(x)).status, Status::Fail);
        }
    }

    #[test]
    fn boundary_equality_examples() {
        for (b, sigma, expected) in [(3, 0.3, 1.3), (4, 0.2, 1.4)] {
            let tc = ThresholdConfig::new(1, 1, b, 0.0, 1.0, sigma, None).unwrap();
            let r = check_mech2_boundary_equality(&tc).unwrap();
            assert!(r.passed(), "{r}");
            // back to g-space: payment = scale * g
            let single = r.details["single"].as_f64().unwrap();
            assert!((single / tc.scale() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn suites_parse() {
        assert_eq!("nfl".parse::<Suite>().unwrap(), Suite::NoFreeLunch);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn default_suite_passes() {
        let params = SuiteParams { trials: 20, resolution: 10, ..SuiteParams::default() };
        let reports = run_suite(Suite::All, &params).unwrap();
        assert_eq!(reports.len(), 8);
        for r in &reports {
            assert!(r.passed(), "{r}");
        }
    }
}
