//! Payment rules: the approval-voting mechanism, its utility-adjusted form,
//! the threshold mechanism (additive and multiplicative), and the two
//! single-selection baselines used as comparators.
//!
//! Every rule is a pure function of the gold-question [`Evaluation`]. The
//! [`PaymentRule`] trait lets the expectation and strategy code treat them
//! (and ad-hoc closures) uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_approval_entry, Domain, MechanismConfig, ThresholdConfig, UtilitySpec};

/// A payment amount in currency units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Payment(f64);

impl Payment {
    pub fn new(amount: f64) -> Self {
        Payment(amount)
    }

    pub fn amount(self) -> f64 {
        self.0
    }
}

impl From<Payment> for f64 {
    fn from(p: Payment) -> f64 {
        p.0
    }
}

/// Anything that maps a gold evaluation to a payment.
pub trait PaymentRule: Sync {
    fn pay(&self, eval: &[i32]) -> Result<f64>;
}

impl<F> PaymentRule for F
where
    F: Fn(&[i32]) -> f64 + Sync,
{
    fn pay(&self, eval: &[i32]) -> Result<f64> {
        Ok(self(eval))
    }
}

fn check_len(eval: &[i32], num_gold: usize) -> Result<()> {
    if eval.len() != num_gold {
        return Err(Error::DimensionMismatch {
            what: "evaluation entries",
            expected: num_gold,
            found: eval.len(),
        });
    }
    Ok(())
}

/// `(1 - rho)^{sum(x_i - 1)}` if every answer is correct, else 0.
fn approval_core(config: &MechanismConfig, eval: &[i32]) -> Result<f64> {
    check_len(eval, config.num_gold())?;
    let mut extra = 0i32;
    let mut all_correct = true;
    for &x in eval {
        check_approval_entry(x, config.num_options())?;
        if x < 1 {
            all_correct = false;
        } else {
            extra += x - 1;
        }
    }
    if !all_correct {
        return Ok(0.0);
    }
    Ok(repeated_product(1.0 - config.coarseness(), extra as usize))
}

/// `base^k` by left-to-right multiplication, so every caller rounds the same way.
fn repeated_product(base: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * base)
}

/// What the approval mechanism pays a worker who selects every option on
/// every question: `floor + (1 - rho)^{(B-1)G} * span`.
pub fn frugal_payment(config: &MechanismConfig) -> f64 {
    let extra = (config.num_options() - 1) * config.num_gold();
    config.pay_span() * repeated_product(1.0 - config.coarseness(), extra) + config.pay_floor()
}

/// The approval-voting mechanism: the floor if any gold answer misses the
/// correct option, otherwise the full span shrunk by a factor `(1 - rho)` for
/// every incorrect option selected.
pub fn mech1_pay(config: &MechanismConfig, eval: &[i32]) -> Result<Payment> {
    let core = approval_core(config, eval)?;
    Ok(Payment(config.pay_span() * core + config.pay_floor()))
}

/// Score of a single threshold-mechanism evaluation:
/// `(B - |x|) * sigma + 1{x >= 1}`.
pub fn g_score(tc: &ThresholdConfig, x: i32) -> Result<f64> {
    check_threshold_entry(tc, x)?;
    let count = x.unsigned_abs() as usize;
    if !tc.allows_count(count) {
        return Err(Error::DomainError(format!(
            "count {count} outside [{}, {}]",
            tc.min_count(),
            tc.max_count()
        )));
    }
    Ok(raw_score(tc, x))
}

fn raw_score(tc: &ThresholdConfig, x: i32) -> f64 {
    let b = tc.num_options() as f64;
    (b - x.unsigned_abs() as f64) * tc.threshold() + if x >= 1 { 1.0 } else { 0.0 }
}

fn check_threshold_entry(tc: &ThresholdConfig, x: i32) -> Result<()> {
    let b = tc.num_options() as i32;
    if x > b || x <= -b {
        return Err(Error::DomainError(format!(
            "evaluation {x} outside {{-{}, ..., {b}}}",
            b - 1
        )));
    }
    Ok(())
}

/// Whether every count respects `[s_min, s_max]`; errors on unencodable entries.
fn threshold_counts_ok(tc: &ThresholdConfig, eval: &[i32]) -> Result<bool> {
    check_len(eval, tc.num_gold())?;
    let mut ok = true;
    for &x in eval {
        check_threshold_entry(tc, x)?;
        ok &= tc.allows_count(x.unsigned_abs() as usize);
    }
    Ok(ok)
}

/// The threshold mechanism `a + b * sum g(x_i)`. Any count outside
/// `[s_min, s_max]` pays the floor.
pub fn mech2_pay(tc: &ThresholdConfig, eval: &[i32]) -> Result<Payment> {
    if !threshold_counts_ok(tc, eval)? {
        return Ok(Payment(tc.pay_floor()));
    }
    let total: f64 = eval.iter().map(|&x| raw_score(tc, x)).sum();
    Ok(Payment(tc.offset() + tc.scale() * total))
}

/// Raw multiplicative form `a + b * prod (g(x_i) - c)` with caller-chosen
/// constants. Out-of-range counts pay `a`.
pub fn multiplicative_pay_with(tc: &ThresholdConfig, a: f64, b: f64, c: f64, eval: &[i32]) -> Result<f64> {
    let limit = (tc.num_options() - tc.max_count()) as f64 * tc.threshold();
    if c > limit {
        return Err(Error::InvalidOffset { offset: c, limit });
    }
    if b <= 0.0 {
        return Err(Error::InvalidConfig(format!("multiplicative scale must be positive, got {b}")));
    }
    if !threshold_counts_ok(tc, eval)? {
        return Ok(a);
    }
    let product: f64 = eval.iter().map(|&x| raw_score(tc, x) - c).product();
    Ok(a + b * product)
}

/// Multiplicative threshold mechanism normalised to the configured payment
/// range: `a = pay_floor`, `c = product_offset`, and `b` chosen so that all
/// singleton-correct answers pay exactly `pay_ceiling`.
pub fn mech2_pay_multiplicative(tc: &ThresholdConfig, eval: &[i32]) -> Result<Payment> {
    let c = tc.product_offset();
    let top = raw_score(tc, 1) - c;
    let b = (tc.pay_ceiling() - tc.pay_floor()) / top.powi(tc.num_gold() as i32);
    multiplicative_pay_with(tc, tc.pay_floor(), b, c, eval).map(Payment)
}

/// Approval mechanism for a worker maximising expected `U(payment)`: the
/// approval formula evaluated in utility space and mapped back through `U^-1`.
pub fn utility_pay(config: &MechanismConfig, utility: &UtilitySpec, eval: &[i32]) -> Result<Payment> {
    let (lo, hi) = (config.pay_floor(), config.pay_ceiling());
    utility.check_range(lo, hi)?;
    let core = approval_core(config, eval)?;
    if core == 1.0 {
        return Ok(Payment(hi));
    }
    if core == 0.0 {
        return Ok(Payment(lo));
    }
    let (u_lo, u_hi) = (utility.apply(lo), utility.apply(hi));
    if u_hi.partial_cmp(&u_lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonInvertibleUtility(format!(
            "U(pay_ceiling) = {u_hi} is not above U(pay_floor) = {u_lo}"
        )));
    }
    let value = utility.inverse((u_hi - u_lo) * core + u_lo);
    Ok(Payment(value.clamp(lo, hi)))
}

/// Single-selection baseline: a fixed bonus per correct answer, capped at the ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditiveBaseline {
    pub num_gold: usize,
    pub pay_floor: f64,
    pub pay_ceiling: f64,
    pub per_correct_bonus: f64,
}

/// `pay_floor + bonus * #correct`, capped at `pay_ceiling`. Entries must be ±1.
pub fn baseline_additive(base: &AdditiveBaseline, eval: &[i32]) -> Result<Payment> {
    check_len(eval, base.num_gold)?;
    if let Some(&bad) = eval.iter().find(|x| x.abs() != 1) {
        return Err(Error::DomainError(format!(
            "additive baseline accepts single selections only, got {bad}"
        )));
    }
    let correct = eval.iter().filter(|&&x| x == 1).count() as f64;
    Ok(Payment((base.pay_floor + base.per_correct_bonus * correct).min(base.pay_ceiling)))
}

/// Skip-based single-selection baseline. An evaluation of 0 marks a skipped
/// question.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipBaseline {
    pub num_gold: usize,
    pub pay_floor: f64,
    pub pay_ceiling: f64,
    pub start: f64,
    pub skip_factor: f64,
}

impl SkipBaseline {
    pub fn validate(&self) -> Result<()> {
        if !(self.skip_factor > 0.0 && self.skip_factor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "skip_factor must lie in (0, 1), got {}",
                self.skip_factor
            )));
        }
        if self.start < 0.0 || self.start > self.pay_ceiling - self.pay_floor {
            return Err(Error::InvalidConfig(format!(
                "start must lie in [0, pay_ceiling - pay_floor], got {}",
                self.start
            )));
        }
        Ok(())
    }
}

/// `pay_floor + start * factor^{#skips}` with no wrong answers, else `pay_floor`.
pub fn baseline_skip(base: &SkipBaseline, eval: &[i32]) -> Result<Payment> {
    check_len(eval, base.num_gold)?;
    if let Some(&bad) = eval.iter().find(|x| x.abs() > 1) {
        return Err(Error::DomainError(format!(
            "skip baseline accepts -1, 0 (skip) or +1, got {bad}"
        )));
    }
    if eval.contains(&-1) {
        return Ok(Payment(base.pay_floor));
    }
    let skips = eval.iter().filter(|&&x| x == 0).count() as i32;
    Ok(Payment(base.pay_floor + base.start * base.skip_factor.powi(skips)))
}

/// Approval interface with a bonus that ignores the answers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPayment {
    pub num_gold: usize,
    pub pay_floor: f64,
    pub pay_ceiling: f64,
    pub bonus: f64,
}

/// `a + b * rule` for `b > 0`; expected-payment maximisers are unchanged.
#[derive(Debug, Clone, Copy)]
pub struct AffineRule<R> {
    pub rule: R,
    pub shift: f64,
    pub scale: f64,
}

impl<R: PaymentRule> PaymentRule for AffineRule<R> {
    fn pay(&self, eval: &[i32]) -> Result<f64> {
        Ok(self.shift + self.scale * self.rule.pay(eval)?)
    }
}

/// Any supported payment rule, as read from a JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "kebab-case")]
pub enum Mechanism {
    #[serde(rename = "mech1")]
    Approval(MechanismConfig),
    #[serde(rename = "mech2")]
    Threshold(ThresholdConfig),
    #[serde(rename = "mech2-multiplicative")]
    ThresholdMultiplicative(ThresholdConfig),
    Utility {
        #[serde(flatten)]
        config: MechanismConfig,
        utility: UtilitySpec,
    },
    Additive(AdditiveBaseline),
    Skip(SkipBaseline),
    Fixed(FixedPayment),
}

/// How a worker interacts with a mechanism's interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interface {
    /// Any non-empty subset (or the threshold domain for the threshold rules).
    Approval,
    /// Exactly one option per question.
    Single,
    /// One option or a skip per question.
    SingleOrSkip,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Approval(_) => "mech1",
            Mechanism::Threshold(_) => "mech2",
            Mechanism::ThresholdMultiplicative(_) => "mech2-multiplicative",
            Mechanism::Utility { .. } => "utility",
            Mechanism::Additive(_) => "additive",
            Mechanism::Skip(_) => "skip",
            Mechanism::Fixed(_) => "fixed",
        }
    }

    /// Checks parameters not already enforced by the config constructors.
    pub fn validate(&self) -> Result<()> {
        let range = |lo: f64, hi: f64| {
            if hi > lo {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("pay_ceiling ({hi}) must exceed pay_floor ({lo})")))
            }
        };
        let gold = |g: usize| {
            if g >= 1 {
                Ok(())
            } else {
                Err(Error::InvalidConfig("num_gold must be at least 1".into()))
            }
        };
        match self {
            Mechanism::Utility { config, utility } => {
                utility.check_range(config.pay_floor(), config.pay_ceiling())
            }
            Mechanism::Additive(b) => {
                gold(b.num_gold)?;
                range(b.pay_floor, b.pay_ceiling)?;
                if b.per_correct_bonus < 0.0 {
                    return Err(Error::InvalidConfig("per_correct_bonus must be non-negative".into()));
                }
                Ok(())
            }
            Mechanism::Skip(b) => {
                gold(b.num_gold)?;
                range(b.pay_floor, b.pay_ceiling)?;
                b.validate()
            }
            Mechanism::Fixed(b) => {
                gold(b.num_gold)?;
                range(b.pay_floor, b.pay_ceiling)?;
                if !(0.0..=b.pay_ceiling - b.pay_floor).contains(&b.bonus) {
                    return Err(Error::InvalidConfig("bonus must lie in [0, pay_ceiling - pay_floor]".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn num_gold(&self) -> usize {
        match self {
            Mechanism::Approval(c) | Mechanism::Utility { config: c, .. } => c.num_gold(),
            Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => t.num_gold(),
            Mechanism::Additive(b) => b.num_gold,
            Mechanism::Skip(b) => b.num_gold,
            Mechanism::Fixed(b) => b.num_gold,
        }
    }

    /// `(num_questions, num_options)` where the mechanism fixes them.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            Mechanism::Approval(c) | Mechanism::Utility { config: c, .. } => {
                Some((c.num_questions(), c.num_options()))
            }
            Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => {
                Some((t.num_questions(), t.num_options()))
            }
            _ => None,
        }
    }

    pub fn pay_floor(&self) -> f64 {
        match self {
            Mechanism::Approval(c) | Mechanism::Utility { config: c, .. } => c.pay_floor(),
            Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => t.pay_floor(),
            Mechanism::Additive(b) => b.pay_floor,
            Mechanism::Skip(b) => b.pay_floor,
            Mechanism::Fixed(b) => b.pay_floor,
        }
    }

    pub fn pay_ceiling(&self) -> f64 {
        match self {
            Mechanism::Approval(c) | Mechanism::Utility { config: c, .. } => c.pay_ceiling(),
            Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => t.pay_ceiling(),
            Mechanism::Additive(b) => b.pay_ceiling,
            Mechanism::Skip(b) => b.pay_ceiling,
            Mechanism::Fixed(b) => b.pay_ceiling,
        }
    }

    pub fn interface(&self) -> Interface {
        match self {
            Mechanism::Additive(_) => Interface::Single,
            Mechanism::Skip(_) => Interface::SingleOrSkip,
            _ => Interface::Approval,
        }
    }

    /// Evaluation domain for plans made under this mechanism.
    pub fn domain(&self) -> Domain {
        match self {
            Mechanism::Threshold(t) | Mechanism::ThresholdMultiplicative(t) => Domain::threshold(t),
            Mechanism::Skip(_) => Domain::Threshold { min: 0, max: 1 },
            Mechanism::Additive(_) => Domain::Threshold { min: 1, max: 1 },
            _ => Domain::Approval,
        }
    }

    pub fn payment(&self, eval: &[i32]) -> Result<Payment> {
        match self {
            Mechanism::Approval(c) => mech1_pay(c, eval),
            Mechanism::Threshold(t) => mech2_pay(t, eval),
            Mechanism::ThresholdMultiplicative(t) => mech2_pay_multiplicative(t, eval),
            Mechanism::Utility { config, utility } => utility_pay(config, utility, eval),
            Mechanism::Additive(b) => baseline_additive(b, eval),
            Mechanism::Skip(b) => baseline_skip(b, eval),
            Mechanism::Fixed(b) => {
                check_len(eval, b.num_gold)?;
                Ok(Payment(b.pay_floor + b.bonus))
            }
        }
    }
}

impl PaymentRule for Mechanism {
    fn pay(&self, eval: &[i32]) -> Result<f64> {
        self.payment(eval).map(Payment::amount)
    }
}

impl PaymentRule for MechanismConfig {
    fn pay(&self, eval: &[i32]) -> Result<f64> {
        mech1_pay(self, eval).map(Payment::amount)
    }
}

impl PaymentRule for ThresholdConfig {
    fn pay(&self, eval: &[i32]) -> Result<f64> {
        mech2_pay(self, eval).map(Payment::amount)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, g: usize, b: usize, lo: f64, hi: f64, rho: f64) -> MechanismConfig {
        MechanismConfig::new(n, g, b, lo, hi, rho).unwrap()
    }

    fn tc(g: usize, b: usize, sigma: f64) -> ThresholdConfig {
        ThresholdConfig::new(g, g, b, 0.0, 1.0, sigma, None).unwrap()
    }

    #[test]
    fn mech1_normalisation_and_floor() {
        let c = cfg(3, 3, 4, 0.1, 2.0, 0.1);
        assert_eq!(mech1_pay(&c, &[1, 1, 1]).unwrap().amount(), 2.0);
        assert_eq!(mech1_pay(&c, &[1, -3, 4]).unwrap().amount(), 0.1);
    }

    #[test]
    fn mech1_hand_values() {
        let c = cfg(3, 3, 4, 0.0, 1.0, 0.1);
        let v = mech1_pay(&c, &[2, 1, 3]).unwrap().amount();
        assert!((v - 0.729).abs() < 1e-15);
        let c = cfg(2, 2, 3, 0.0, 1.0, 0.2);
        let v = mech1_pay(&c, &[3, 3]).unwrap().amount();
        assert!((v - 0.4096).abs() < 1e-15);
    }

    #[test]
    fn mech1_domain_errors() {
        let c = cfg(2, 2, 3, 0.0, 1.0, 0.2);
        assert!(matches!(mech1_pay(&c, &[0, 1]), Err(Error::DomainError(_))));
        assert!(matches!(mech1_pay(&c, &[-3, 1]), Err(Error::DomainError(_))));
        assert!(matches!(mech1_pay(&c, &[4, 1]), Err(Error::DomainError(_))));
        assert!(matches!(mech1_pay(&c, &[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mech1_each_wrong_option_costs_rho() {
        let c = cfg(2, 2, 5, 0.0, 1.0, 0.15);
        for a in 1..5 {
            for b in 1..=5 {
                let lo = mech1_pay(&c, &[a + 1, b]).unwrap().amount();
                let hi = mech1_pay(&c, &[a, b]).unwrap().amount();
                assert!((lo - 0.85 * hi).abs() < 1e-15);
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn g_score_values() {
        let t = tc(1, 4, 0.2);
        assert!((g_score(&t, 1).unwrap() - 1.6).abs() < 1e-15);
        assert!((g_score(&t, -2).unwrap() - 0.4).abs() < 1e-15);
        // empty selection needs s_min = 0
        let t0 = tc(1, 3, 0.4);
        assert!((g_score(&t0, 0).unwrap() - 1.2).abs() < 1e-15);
        assert!(g_score(&t, 0).is_err());
        assert!(g_score(&t, -4).is_err());
        assert!(g_score(&t, 5).is_err());
    }

    #[test]
    fn g_score_empty_selection_formula() {
        // (4 - 0) * 0.2 with sigma above 1/B so that 0 is allowed
        let t = ThresholdConfig::new(1, 1, 4, 0.0, 1.0, 0.3, None).unwrap();
        assert_eq!(t.min_count(), 0);
        assert!((g_score(&t, 0).unwrap() - 1.2).abs() < 1e-15);
        assert!((raw_score(&tc(1, 4, 0.2), 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn score_identity() {
        let t = tc(1, 5, 0.15);
        for x in 1..=t.max_count() as i32 {
            if x < 5 {
                assert!((g_score(&t, x).unwrap() - g_score(&t, -x).unwrap() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mech2_values() {
        let t = tc(3, 4, 0.2);
        assert!((mech2_pay(&t, &[1, 1, 1]).unwrap().amount() - 1.0).abs() < 1e-12);
        let t = ThresholdConfig::new(1, 1, 3, 0.0, 1.0, 0.3, None).unwrap();
        assert!((mech2_pay(&t, &[2]).unwrap().amount() - 0.8125).abs() < 1e-15);
        // B=3, sigma=0.45: s_max = 2, so three options is out of range
        let t = ThresholdConfig::new(1, 1, 3, 0.5, 1.0, 0.45, None).unwrap();
        assert_eq!(mech2_pay(&t, &[3]).unwrap().amount(), 0.5);
        // B=4, sigma=0.2: s_min = 1, so a skip is out of range
        let t = ThresholdConfig::new(2, 2, 4, 0.25, 1.0, 0.2, None).unwrap();
        assert_eq!(mech2_pay(&t, &[0, 1]).unwrap().amount(), 0.25);
        assert!(mech2_pay(&t, &[-4, 1]).is_err());
    }

    #[test]
    fn multiplicative_values() {
        let t = tc(2, 4, 0.2);
        let v = multiplicative_pay_with(&t, 0.0, 1.0, 0.0, &[1, -2]).unwrap();
        assert!((v - 0.64).abs() < 1e-15);
        // B=4, sigma=0.3: s_max = 3 and c = g(-3) = 0.3, so a -3 collapses the product
        let t3 = ThresholdConfig::new(2, 2, 4, 0.0, 1.0, 0.3, None).unwrap();
        let v = multiplicative_pay_with(&t3, 0.3, 2.0, 0.3, &[-3, 1]).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        assert!(matches!(
            multiplicative_pay_with(&t, 0.0, 1.0, 0.5, &[1, 1]),
            Err(Error::InvalidOffset { .. })
        ));
        let n = mech2_pay_multiplicative(&t, &[1, 1]).unwrap().amount();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_single_gold_is_affine_in_g() {
        let t = tc(1, 4, 0.2);
        let c = t.product_offset();
        let b = 1.0 / (raw_score(&t, 1) - c);
        for x in [-3, -2, -1, 1, 2, 3, 4] {
            let v = mech2_pay_multiplicative(&t, &[x]).unwrap().amount();
            assert!((v - b * (g_score(&t, x).unwrap() - c)).abs() < 1e-14);
        }
    }

    #[test]
    fn utility_identity_matches_mech1() {
        let c = cfg(2, 2, 4, 0.0, 1.0, 0.2);
        for a in [-3, -1, 1, 2, 4] {
            for b in [1, 3, -2] {
                let u = utility_pay(&c, &UtilitySpec::Identity, &[a, b]).unwrap();
                assert_eq!(u, mech1_pay(&c, &[a, b]).unwrap());
            }
        }
    }

    #[test]
    fn utility_sqrt_example() {
        // core value 0.9 = (1 - 0.1)^1, U^-1(0.9) = 0.81
        let c = cfg(1, 1, 4, 0.0, 1.0, 0.1);
        let v = utility_pay(&c, &UtilitySpec::sqrt(), &[2]).unwrap().amount();
        assert!((v - 0.81).abs() < 1e-12);
        assert_eq!(utility_pay(&c, &UtilitySpec::Log, &[1]).unwrap().amount(), 1.0);
        assert!(matches!(
            utility_pay(&c.with_pay_range(-1.0, 1.0).unwrap(), &UtilitySpec::sqrt(), &[1]),
            Err(Error::NonInvertibleUtility(_))
        ));
    }

    #[test]
    fn additive_baseline() {
        let base = AdditiveBaseline {
            num_gold: 5,
            pay_floor: 0.1,
            pay_ceiling: 1.0,
            per_correct_bonus: 0.1,
        };
        assert_eq!(baseline_additive(&base, &[-1; 5]).unwrap().amount(), 0.1);
        let v = baseline_additive(&base, &[1, 1, -1, 1, -1]).unwrap().amount();
        assert!((v - 0.4).abs() < 1e-15);
        assert!(baseline_additive(&base, &[2, 1, 1, 1, 1]).is_err());
        let full = AdditiveBaseline { per_correct_bonus: 0.2, ..base };
        assert_eq!(baseline_additive(&full, &[1; 5]).unwrap().amount(), 1.0);
    }

    #[test]
    fn skip_baseline() {
        let base = SkipBaseline {
            num_gold: 2,
            pay_floor: 0.0,
            pay_ceiling: 1.0,
            start: 1.0,
            skip_factor: 0.8,
        };
        assert_eq!(baseline_skip(&base, &[1, -1]).unwrap().amount(), 0.0);
        assert!((baseline_skip(&base, &[0, 0]).unwrap().amount() - 0.64).abs() < 1e-15);
        assert_eq!(baseline_skip(&base, &[1, 1]).unwrap().amount(), 1.0);
        assert!(baseline_skip(&base, &[2, 1]).is_err());
        assert!(SkipBaseline { skip_factor: 1.0, ..base }.validate().is_err());
    }

    #[test]
    fn mechanism_json_round_trip() {
        let json = r#"{"mechanism":"mech1","num_questions":3,"num_gold":3,"num_options":4,
                       "pay_floor":0,"pay_ceiling":1,"coarseness":0.1}"#;
        let m: Mechanism = serde_json::from_str(json).unwrap();
        assert_eq!(m.payment(&[2, 1, 3]).unwrap().amount(), 0.9f64.powi(3));
        let back: Mechanism = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);

        let json = r#"{"mechanism":"utility","num_questions":1,"num_gold":1,"num_options":4,
                       "pay_floor":0,"pay_ceiling":1,"coarseness":0.1,
                       "utility":{"family":"power","gamma":0.5}}"#;
        let m: Mechanism = serde_json::from_str(json).unwrap();
        assert!((m.payment(&[2]).unwrap().amount() - 0.81).abs() < 1e-12);

        let json = r#"{"mechanism":"mech2","num_questions":1,"num_gold":1,"num_options":3,
                       "pay_floor":0,"pay_ceiling":1,"threshold":0.3}"#;
        let m: Mechanism = serde_json::from_str(json).unwrap();
        assert!((m.payment(&[2]).unwrap().amount() - 0.8125).abs() < 1e-15);
        let back: Mechanism = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"mechanism":"mech1","num_questions":3,"num_gold":3,"num_options":4,
                      "pay_floor":0,"pay_ceiling":1,"coarseness":0.3}"#;
        assert!(serde_json::from_str::<Mechanism>(bad).is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Every evaluation in `values^g`.
    fn all_evals(values: &[i32], g: usize) -> Vec<Vec<i32>> {
        let mut out = vec![vec![]];
        for _ in 0..g {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    proptest! {
        #[test]
        fn every_rule_stays_in_bounds(
            b in 2usize..=5,
            g in 1usize..=4,
            rho_frac in 0.01f64..0.99,
            lo in -1.0f64..1.0,
            span in 0.1f64..3.0,
        ) {
            let rho = rho_frac / b as f64;
            let hi = lo + span;
            let c = MechanismConfig::new(g, g, b, lo, hi, rho).unwrap();
            let domain: Vec<i32> = (-(b as i32 - 1)..=b as i32).filter(|&x| x != 0).collect();
            for e in all_evals(&domain, g) {
                let p = mech1_pay(&c, &e).unwrap().amount();
                prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
                if lo > -1.0 {
                    let u = utility_pay(&c, &UtilitySpec::Log, &e).unwrap().amount();
                    prop_assert!(u >= lo && u <= hi);
                    let expected = (hi.ln_1p() - lo.ln_1p())
                        * (mech1_pay(&c.with_pay_range(0.0, 1.0).unwrap(), &e).unwrap().amount())
                        + lo.ln_1p();
                    prop_assert!((u.ln_1p() - expected).abs() < 1e-10);
                }
            }
            if b >= 3 {
                for sigma in [0.1, 0.2, 0.3, 0.45] {
                    let t = ThresholdConfig::new(g, g, b, lo, hi, sigma, None).unwrap();
                    let domain: Vec<i32> = (-(b as i32 - 1)..=b as i32).collect();
                    for e in all_evals(&domain, g) {
                        let p = mech2_pay(&t, &e).unwrap().amount();
                        prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
                        let m = mech2_pay_multiplicative(&t, &e).unwrap().amount();
                        prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
                    }
                }
            }
        }
    }
}
