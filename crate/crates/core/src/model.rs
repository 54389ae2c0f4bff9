//! Domain types shared by every other module: mechanism parameters, worker
//! beliefs, selections and the signed evaluations that payment rules consume.
//!
//! Options are indexed from 0 inside the library. The command line front end
//! prints them 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on belief rows summing to one.
pub const BELIEF_SUM_TOLERANCE: f64 = 1e-9;

/// Belief entries below this are treated as exact zeros when computing supports.
pub const ZERO_BELIEF: f64 = 1e-12;

/// Largest option count an [`OptionSet`] can hold.
pub const MAX_OPTIONS: usize = 64;

fn check_pay_range(floor: f64, ceiling: f64) -> Result<()> {
    if !floor.is_finite() || !ceiling.is_finite() {
        return Err(Error::InvalidConfig("payment bounds must be finite".into()));
    }
    if ceiling <= floor {
        return Err(Error::InvalidConfig(format!(
            "pay_ceiling ({ceiling}) must exceed pay_floor ({floor})"
        )));
    }
    Ok(())
}

fn check_counts(num_questions: usize, num_gold: usize, num_options: usize, min_options: usize) -> Result<()> {
    if num_gold == 0 || num_gold > num_questions {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= num_gold <= num_questions, got num_gold={num_gold}, num_questions={num_questions}"
        )));
    }
    if num_options < min_options || num_options > MAX_OPTIONS {
        return Err(Error::InvalidConfig(format!(
            "num_options must lie in [{min_options}, {MAX_OPTIONS}], got {num_options}"
        )));
    }
    Ok(())
}

/// Parameters of the approval-voting mechanism: `N` questions of which `G`
/// are gold, `B` options each, payments in `[pay_floor, pay_ceiling]`, and
/// the coarseness level `rho` below which non-zero beliefs are assumed not to
/// occur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMechanismConfig")]
pub struct MechanismConfig {
    num_questions: usize,
    num_gold: usize,
    num_options: usize,
    pay_floor: f64,
    pay_ceiling: f64,
    coarseness: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanismConfig {
    num_questions: usize,
    num_gold: usize,
    num_options: usize,
    pay_floor: f64,
    pay_ceiling: f64,
    #[serde(alias = "rho")]
    coarseness: f64,
}

impl TryFrom<RawMechanismConfig> for MechanismConfig {
    type Error = Error;

    fn try_from(raw: RawMechanismConfig) -> Result<Self> {
        MechanismConfig::new(
            raw.num_questions,
            raw.num_gold,
            raw.num_options,
            raw.pay_floor,
            raw.pay_ceiling,
            raw.coarseness,
        )
    }
}

impl MechanismConfig {
    pub fn new(
        num_questions: usize,
        num_gold: usize,
        num_options: usize,
        pay_floor: f64,
        pay_ceiling: f64,
        coarseness: f64,
    ) -> Result<Self> {
        check_counts(num_questions, num_gold, num_options, 2)?;
        check_pay_range(pay_floor, pay_ceiling)?;
        let limit = 1.0 / num_options as f64;
        if !(coarseness > 0.0 && coarseness < limit) {
            return Err(Error::InvalidConfig(format!(
                "coarseness must lie in (0, 1/B) = (0, {limit}), got {coarseness}"
            )));
        }
        Ok(Self {
            num_questions,
            num_gold,
            num_options,
            pay_floor,
            pay_ceiling,
            coarseness,
        })
    }

    pub fn num_questions(&self) -> usize {
        self.num_questions
    }

    pub fn num_gold(&self) -> usize {
        self.num_gold
    }

    pub fn num_options(&self) -> usize {
        self.num_options
    }

    pub fn pay_floor(&self) -> f64 {
        self.pay_floor
    }

    pub fn pay_ceiling(&self) -> f64 {
        self.pay_ceiling
    }

    pub fn coarseness(&self) -> f64 {
        self.coarseness
    }

    /// `pay_ceiling - pay_floor`.
    pub fn pay_span(&self) -> f64 {
        self.pay_ceiling - self.pay_floor
    }

    /// Same configuration with different payment bounds.
    pub fn with_pay_range(&self, pay_floor: f64, pay_ceiling: f64) -> Result<Self> {
        Self::new(
            self.num_questions,
            self.num_gold,
            self.num_options,
            pay_floor,
            pay_ceiling,
            self.coarseness,
        )
    }

    /// Same configuration with a different question/gold split.
    pub fn with_questions(&self, num_questions: usize, num_gold: usize) -> Result<Self> {
        Self::new(
            num_questions,
            num_gold,
            self.num_options,
            self.pay_floor,
            self.pay_ceiling,
            self.coarseness,
        )
    }
}

/// Parameters of the threshold mechanism, where the worker should select
/// every option whose belief exceeds `threshold`.
///
/// `min_count`, `max_count`, `offset` and `scale` are derived on construction
/// and cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThresholdConfig")]
pub struct ThresholdConfig {
    num_questions: usize,
    num_gold: usize,
    num_options: usize,
    pay_floor: f64,
    pay_ceiling: f64,
    threshold: f64,
    product_offset: f64,
    #[serde(skip_deserializing)]
    min_count: usize,
    #[serde(skip_deserializing)]
    max_count: usize,
    #[serde(skip_deserializing)]
    offset: f64,
    #[serde(skip_deserializing)]
    scale: f64,
}

#[derive(Deserialize)]
struct RawThresholdConfig {
    num_questions: usize,
    num_gold: usize,
    num_options: usize,
    pay_floor: f64,
    pay_ceiling: f64,
    #[serde(alias = "sigma")]
    threshold: f64,
    #[serde(default)]
    product_offset: Option<f64>,
}

impl TryFrom<RawThresholdConfig> for ThresholdConfig {
    type Error = Error;

    fn try_from(raw: RawThresholdConfig) -> Result<Self> {
        ThresholdConfig::new(
            raw.num_questions,
            raw.num_gold,
            raw.num_options,
            raw.pay_floor,
            raw.pay_ceiling,
            raw.threshold,
            raw.product_offset,
        )
    }
}

/// `ceil(1/sigma) - 1`, snapping `1/sigma` to an integer when it is within
/// float noise of one.
fn max_count_for(threshold: f64, num_options: usize) -> usize {
    let inv = 1.0 / threshold;
    let nearest = inv.round();
    let ceil = if (inv - nearest).abs() < 1e-9 { nearest } else { inv.ceil() };
    ((ceil as usize).saturating_sub(1)).min(num_options)
}

impl ThresholdConfig {
    /// `product_offset` defaults to `g(-s_max) - 1` and must not exceed `g(-s_max)`.
    pub fn new(
        num_questions: usize,
        num_gold: usize,
        num_options: usize,
        pay_floor: f64,
        pay_ceiling: f64,
        threshold: f64,
        product_offset: Option<f64>,
    ) -> Result<Self> {
        check_counts(num_questions, num_gold, num_options, 3)?;
        check_pay_range(pay_floor, pay_ceiling)?;
        if !(threshold > 0.0 && threshold < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "threshold must lie in (0, 1/2), got {threshold}"
            )));
        }
        let min_count = usize::from(threshold < 1.0 / num_options as f64);
        let max_count = max_count_for(threshold, num_options);
        let offset = pay_floor;
        let scale = (pay_ceiling - pay_floor)
            / (num_gold as f64 * ((num_options as f64 - 1.0) * threshold + 1.0));
        // g(-s_max) = (B - s_max) * sigma
        let limit = (num_options - max_count) as f64 * threshold;
        let product_offset = product_offset.unwrap_or(limit - 1.0);
        if !product_offset.is_finite() || product_offset > limit {
            return Err(Error::InvalidOffset {
                offset: product_offset,
                limit,
            });
        }
        Ok(Self {
            num_questions,
            num_gold,
            num_options,
            pay_floor,
            pay_ceiling,
            threshold,
            product_offset,
            min_count,
            max_count,
            offset,
            scale,
        })
    }

    pub fn num_questions(&self) -> usize {
        self.num_questions
    }

    pub fn num_gold(&self) -> usize {
        self.num_gold
    }

    pub fn num_options(&self) -> usize {
        self.num_options
    }

    pub fn pay_floor(&self) -> f64 {
        self.pay_floor
    }

    pub fn pay_ceiling(&self) -> f64 {
        self.pay_ceiling
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Fewest options a worker may select on one question (`s_min`).
    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Most options a worker may select on one question (`s_max`).
    pub fn max_count(&self) -> usize {
        self.max_count
    }

    /// Additive constant of the payment, equal to `pay_floor`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Multiplier applied to the summed scores.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Constant `c` subtracted from every score in the multiplicative form.
    pub fn product_offset(&self) -> f64 {
        self.product_offset
    }

    pub fn allows_count(&self, count: usize) -> bool {
        (self.min_count..=self.max_count).contains(&count)
    }

    pub fn with_questions(&self, num_questions: usize, num_gold: usize) -> Result<Self> {
        Self::new(
            num_questions,
            num_gold,
            self.num_options,
            self.pay_floor,
            self.pay_ceiling,
            self.threshold,
            Some(self.product_offset),
        )
    }
}

/// Per-question belief distributions of one worker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefProfile {
    rows: Vec<Vec<f64>>,
    num_options: usize,
    coarse_compliant: Option<bool>,
}

impl BeliefProfile {
    /// Validates raw rows: non-negative entries, equal row lengths, each row
    /// summing to one within [`BELIEF_SUM_TOLERANCE`]. Rows inside the
    /// tolerance are renormalised.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_options = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "belief rows",
                expected: 1,
                found: 0,
            });
        }
        let mut normalised = Vec::with_capacity(rows.len());
        for (question, row) in rows.into_iter().enumerate() {
            if row.len() != num_options {
                return Err(Error::DimensionMismatch {
                    what: "options per belief row",
                    expected: num_options,
                    found: row.len(),
                });
            }
            for (option, &value) in row.iter().enumerate() {
                if value.is_nan() || value < 0.0 {
                    return Err(Error::NegativeBelief {
                        question,
                        option,
                        value,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if !sum.is_finite() || (sum - 1.0).abs() > BELIEF_SUM_TOLERANCE {
                return Err(Error::RowSumOutOfTolerance { question, sum });
            }
            let row = if sum == 1.0 {
                row
            } else {
                row.into_iter().map(|p| p / sum).collect()
            };
            normalised.push(row);
        }
        Ok(Self {
            rows: normalised,
            num_options,
            coarse_compliant: None,
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, question: usize) -> &[f64] {
        &self.rows[question]
    }

    pub fn num_questions(&self) -> usize {
        self.rows.len()
    }

    pub fn num_options(&self) -> usize {
        self.num_options
    }

    /// Whether every entry is exactly zero or strictly above `rho`.
    pub fn is_coarse(&self, rho: f64) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|&p| p == 0.0 || p > rho)
    }

    /// Coarse-compliance recorded by [`validate_beliefs`]; `None` when the
    /// profile was built without a mechanism configuration.
    pub fn coarse_compliant(&self) -> Option<bool> {
        self.coarse_compliant
    }
}

/// Validates a raw `N x B` belief matrix against a mechanism configuration
/// and records whether it satisfies the coarse-belief assumption.
pub fn validate_beliefs(rows: Vec<Vec<f64>>, config: &MechanismConfig) -> Result<BeliefProfile> {
    if rows.len() != config.num_questions() {
        return Err(Error::DimensionMismatch {
            what: "belief rows",
            expected: config.num_questions(),
            found: rows.len(),
        });
    }
    if let Some(row) = rows.iter().find(|r| r.len() != config.num_options()) {
        return Err(Error::DimensionMismatch {
            what: "options per belief row",
            expected: config.num_options(),
            found: row.len(),
        });
    }
    let mut profile = BeliefProfile::from_rows(rows)?;
    profile.coarse_compliant = Some(profile.is_coarse(config.coarseness()));
    Ok(profile)
}

/// A subset of the options of one question, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct OptionSet(u64);

impl OptionSet {
    pub const EMPTY: OptionSet = OptionSet(0);

    pub fn from_bits(bits: u64) -> Self {
        OptionSet(bits)
    }

    pub fn full(num_options: usize) -> Self {
        if num_options >= 64 {
            OptionSet(u64::MAX)
        } else {
            OptionSet((1u64 << num_options) - 1)
        }
    }

    pub fn single(option: usize) -> Self {
        OptionSet(1u64 << option)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, option: usize) -> bool {
        option < 64 && self.0 & (1u64 << option) != 0
    }

    pub fn insert(&mut self, option: usize) {
        self.0 |= 1u64 << option;
    }

    pub fn is_superset_of(self, other: OptionSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.0 & (1u64 << i) != 0)
    }

    /// Total belief mass on the selected options. A set covering every
    /// option has mass exactly one and an empty set mass exactly zero.
    pub fn coverage(self, row: &[f64]) -> f64 {
        if self == OptionSet::full(row.len()) {
            return 1.0;
        }
        if self.is_empty() {
            return 0.0;
        }
        self.iter().map(|i| row[i]).sum::<f64>().clamp(0.0, 1.0)
    }
}

impl FromIterator<usize> for OptionSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = OptionSet::EMPTY;
        for option in iter {
            set.insert(option);
        }
        set
    }
}

impl From<OptionSet> for Vec<usize> {
    fn from(set: OptionSet) -> Self {
        set.iter().collect()
    }
}

impl TryFrom<Vec<usize>> for OptionSet {
    type Error = Error;

    fn try_from(options: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = options.iter().find(|&&o| o >= MAX_OPTIONS) {
            return Err(Error::DomainError(format!("option index {bad} out of range")));
        }
        Ok(options.into_iter().collect())
    }
}

impl fmt::Display for OptionSet {
    /// 1-based, comma separated; `-` for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let mut first = true;
        for option in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{}", option + 1)?;
            first = false;
        }
        Ok(())
    }
}

/// Which payment domain an evaluation or plan is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Every question gets between 1 and `B` options.
    Approval,
    /// Counts between `min` and `max` (inclusive); 0 is legal when `min == 0`.
    Threshold { min: usize, max: usize },
}

impl Domain {
    pub fn threshold(tc: &ThresholdConfig) -> Self {
        Domain::Threshold {
            min: tc.min_count(),
            max: tc.max_count(),
        }
    }

    pub fn allows_size(&self, size: usize, num_options: usize) -> bool {
        match *self {
            Domain::Approval => (1..=num_options).contains(&size),
            Domain::Threshold { min, max } => size >= min && size <= max && size <= num_options,
        }
    }
}

/// The worker's selection on every question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionPlan {
    selected: Vec<OptionSet>,
}

impl SelectionPlan {
    pub fn new(selected: Vec<OptionSet>) -> Self {
        Self { selected }
    }

    pub fn selected(&self) -> &[OptionSet] {
        &self.selected
    }

    pub fn num_questions(&self) -> usize {
        self.selected.len()
    }

    /// Number of options selected per question (`y_i`).
    pub fn sizes(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.len()).collect()
    }

    pub fn coverages(&self, beliefs: &BeliefProfile) -> Result<CoverageVector> {
        if beliefs.num_questions() != self.selected.len() {
            return Err(Error::DimensionMismatch {
                what: "plan questions",
                expected: beliefs.num_questions(),
                found: self.selected.len(),
            });
        }
        Ok(CoverageVector(
            self.selected
                .iter()
                .zip(beliefs.rows())
                .map(|(set, row)| set.coverage(row))
                .collect(),
        ))
    }

    /// Indices of questions whose selection size falls outside `domain`.
    pub fn violations(&self, domain: Domain, num_options: usize) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter(|(_, s)| !domain.allows_size(s.len(), num_options) || s.iter().any(|o| o >= num_options))
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for SelectionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, set) in self.selected.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{set}")?;
        }
        f.write_str("]")
    }
}

/// Per-question probability (under the worker's beliefs) that the correct
/// option is among those selected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageVector(Vec<f64>);

impl CoverageVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::DomainError(format!("coverage {bad} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for CoverageVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Signed per-gold-question outcomes. The magnitude is the number of options
/// selected and the sign records whether the correct option was among them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Evaluation(Vec<i32>);

impl Evaluation {
    pub fn new(values: Vec<i32>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[i32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i32> {
        self.0
    }
}

impl std::ops::Deref for Evaluation {
    type Target = [i32];

    fn deref(&self) -> &[i32] {
        &self.0
    }
}

impl From<Vec<i32>> for Evaluation {
    fn from(values: Vec<i32>) -> Self {
        Self(values)
    }
}

/// Checks one evaluation entry against the approval domain
/// `{-(B-1), ..., -1, 1, ..., B}`.
pub fn check_approval_entry(x: i32, num_options: usize) -> Result<()> {
    let b = num_options as i32;
    if x == 0 {
        return Err(Error::DomainError("0 is not an approval-mechanism evaluation".into()));
    }
    if x > b || x <= -b {
        return Err(Error::DomainError(format!(
            "evaluation {x} outside {{-{}, ..., -1, 1, ..., {b}}}",
            b - 1
        )));
    }
    Ok(())
}

/// Sign of one gold outcome during expectation enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeSign {
    Wrong,
    Correct,
}

impl OutcomeSign {
    /// Probability of this outcome when the selection covers mass `q`.
    pub fn weight(self, q: f64) -> f64 {
        match self {
            OutcomeSign::Wrong => 1.0 - q,
            OutcomeSign::Correct => q,
        }
    }

    pub fn apply(self, size: usize) -> i32 {
        match self {
            OutcomeSign::Wrong => -(size as i32),
            OutcomeSign::Correct => size as i32,
        }
    }
}

/// Turns a plan into the evaluation the requester observes on the gold
/// questions `gold[k]` whose correct options are `truths[k]`.
///
/// An empty selection evaluates to 0, which only the threshold domain admits.
pub fn evaluate_plan(
    plan: &SelectionPlan,
    gold: &[usize],
    truths: &[usize],
    domain: Domain,
) -> Result<Evaluation> {
    if gold.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            what: "gold truths",
            expected: gold.len(),
            found: truths.len(),
        });
    }
    let mut seen = std::collections::HashSet::with_capacity(gold.len());
    let mut values = Vec::with_capacity(gold.len());
    for (&question, &truth) in gold.iter().zip(truths) {
        let Some(&set) = plan.selected().get(question) else {
            return Err(Error::DomainError(format!(
                "gold index {question} outside the {} planned questions",
                plan.num_questions()
            )));
        };
        if !seen.insert(question) {
            return Err(Error::DomainError(format!("gold index {question} repeated")));
        }
        if truth >= MAX_OPTIONS {
            return Err(Error::DomainError(format!("truth {truth} out of range")));
        }
        if set.is_empty() {
            if domain == Domain::Approval {
                return Err(Error::EmptySelectionInMech1Context { question });
            }
            values.push(0);
            continue;
        }
        let size = set.len() as i32;
        values.push(if set.contains(truth) { size } else { -size });
    }
    Ok(Evaluation(values))
}

/// A strictly increasing utility the worker maximises in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum UtilitySpec {
    Identity,
    /// `U(x) = x^gamma` on `x >= 0`.
    Power { gamma: f64 },
    /// `U(x) = ln(1 + x)` on `x > -1`.
    Log,
}

impl UtilitySpec {
    pub fn sqrt() -> Self {
        UtilitySpec::Power { gamma: 0.5 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            UtilitySpec::Identity => x,
            UtilitySpec::Power { gamma } => x.powf(gamma),
            UtilitySpec::Log => x.ln_1p(),
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        match *self {
            UtilitySpec::Identity => v,
            UtilitySpec::Power { gamma } => v.powf(1.0 / gamma),
            UtilitySpec::Log => v.exp_m1(),
        }
    }

    /// Checks that `U` is defined, strictly increasing and invertible on
    /// `[floor, ceiling]`.
    pub fn check_range(&self, floor: f64, ceiling: f64) -> Result<()> {
        match *self {
            UtilitySpec::Identity => Ok(()),
            UtilitySpec::Power { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::NonInvertibleUtility(format!(
                        "power utility needs gamma > 0, got {gamma}"
                    )));
                }
                if floor < 0.0 {
                    return Err(Error::NonInvertibleUtility(format!(
                        "power utility undefined below 0, pay_floor is {floor}"
                    )));
                }
                Ok(())
            }
            UtilitySpec::Log => {
                if floor <= -1.0 {
                    return Err(Error::NonInvertibleUtility(format!(
                        "log utility undefined at or below -1, pay_floor is {floor}"
                    )));
                }
                let _ = ceiling;
                Ok(())
            }
        }
    }
}
