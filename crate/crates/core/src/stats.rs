//! Exact interval estimation for the ratio of two Poisson rates.
//!
//! The rate-ratio interval is built conditionally: given totals
//! `n = x_a + x_b`, the count `x_a` is binomial with success probability
//! `p = (r_a t_a) / (r_a t_a + r_b t_b)`. Exact Clopper-Pearson limits on
//! `p` map to rate-ratio limits through `r = p / (1 - p) * (t_b / t_a)`.
//!
//! Fractional counts (effective counts after underreporting or dynamic
//! adjustment) enter through the continuous generalization of the
//! Clopper-Pearson limits: inversion of the regularized incomplete beta
//! function with shape parameters `(x, n - x + 1)` for the lower limit and
//! `(x + 1, n - x)` for the upper. At integer arguments this reduces
//! exactly to the classical binomial construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::benchmark::{expected_count_delta, BenchmarkKey, BenchmarkRate};
use crate::model::{CrashType, Location, OutcomeLevel};

/// Bisection terminates when the bracket is narrower than this. Tighter
/// than the documented 1e-10 probability tolerance so that equality-style
/// assertions at 1e-10 hold with margin.
const ROOT_TOL: f64 = 1e-12;
const MAX_ITER: u32 = 200;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("successes ({successes}) exceed trials ({trials})")]
    SuccessesExceedTrials { successes: f64, trials: f64 },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("{what} must be finite and non-negative, got {value}")]
    InvalidCount { what: &'static str, value: f64 },
    #[error("{what} must be positive, got {value}")]
    NonPositiveExposure { what: &'static str, value: f64 },
    #[error("both counts are zero; the rate ratio is undefined")]
    UndefinedComparison,
}

/// Two-sided confidence limits on a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionLimits {
    pub lower: f64,
    pub upper: f64,
}

/// Exact Clopper-Pearson limits for `successes` out of `trials` at level
/// `1 - alpha`, generalized to fractional inputs.
///
/// `lower` is 0 when `successes` is 0 and `upper` is 1 when
/// `successes == trials`.
pub fn clopper_pearson(
    successes: f64,
    trials: f64,
    alpha: f64,
) -> Result<ProportionLimits, StatsError> {
    if !successes.is_finite() || successes < 0.0 {
        return Err(StatsError::InvalidCount {
            what: "successes",
            value: successes,
        });
    }
    if !trials.is_finite() || trials <= 0.0 {
        return Err(StatsError::NonPositiveExposure {
            what: "trials",
            value: trials,
        });
    }
    if successes > trials {
        return Err(StatsError::SuccessesExceedTrials { successes, trials });
    }
    if !(0.0..=1.0).contains(&alpha) || alpha == 0.0 || alpha == 1.0 {
        return Err(StatsError::InvalidAlpha(alpha));
    }

    let half = alpha / 2.0;
    let lower = if successes == 0.0 {
        0.0
    } else {
        // Smallest p with I_p(x, n - x + 1) = alpha/2.
        invert_beta_cdf(successes, trials - successes + 1.0, half)
    };
    let upper = if successes == trials {
        1.0
    } else {
        // Largest p with I_p(x + 1, n - x) = 1 - alpha/2.
        invert_beta_cdf(successes + 1.0, trials - successes, 1.0 - half)
    };
    Ok(ProportionLimits { lower, upper })
}

/// Solves `I_p(a, b) = target` for `p` by bracketed bisection.
///
/// The regularized incomplete beta function is strictly increasing in `p`
/// on (0, 1), so the bracket never loses the root. Deterministic across
/// platforms: fixed tolerance, fixed iteration cap.
fn invert_beta_cdf(a: f64, b: f64, target: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut iter = 0;
    while hi - lo > ROOT_TOL && iter < MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    0.5 * (lo + hi)
}

/// Upper bound of a percent-difference interval: finite, or open above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UpperLimit {
    Finite(f64),
    /// The benchmark count was zero; the ratio is unbounded above.
    Unbounded,
}

impl UpperLimit {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            UpperLimit::Finite(v) => Some(v),
            UpperLimit::Unbounded => None,
        }
    }
}

/// ADS-vs-benchmark comparison for one analysis cell.
///
/// `percent_difference` is `100 * (rate_ratio - 1)`; negative values mean
/// the ADS rate is below the benchmark. `ci95` bounds are on the
/// percent-difference scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub location: Option<Location>,
    pub outcome: Option<OutcomeLevel>,
    pub crash_type: Option<CrashType>,
    pub ads_count: f64,
    pub ads_miles: f64,
    pub human_effective_count: f64,
    pub human_exposure: f64,
    pub human_rate_ipmm: f64,
    pub ads_rate_ipmm: f64,
    pub rate_ratio: f64,
    pub percent_difference: f64,
    pub ci_lower: f64,
    pub ci_upper: UpperLimit,
    pub significant: bool,
    pub expected_count_delta: f64,
    pub underreporting_applied: bool,
    pub dynamic_applied: bool,
}

/// Exact confidence interval for the ratio of two Poisson rates
/// `(x_a / t_a) / (x_b / t_b)` at level `1 - alpha`.
///
/// With `x_a = 0` the lower limit is 0 (-100%). With `x_b = 0` the upper
/// limit is open and reported as [`UpperLimit::Unbounded`]; the point
/// estimate is then also unbounded and reported as infinity.
pub fn rate_ratio_ci(
    x_a: f64,
    t_a: f64,
    x_b: f64,
    t_b: f64,
    alpha: f64,
) -> Result<ComparisonResult, StatsError> {
    for (what, value) in [("ads count", x_a), ("benchmark count", x_b)] {
        if !value.is_finite() || value < 0.0 {
            return Err(StatsError::InvalidCount { what, value });
        }
    }
    for (what, value) in [("ads exposure", t_a), ("benchmark exposure", t_b)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(StatsError::NonPositiveExposure { what, value });
        }
    }
    if x_a + x_b == 0.0 {
        return Err(StatsError::UndefinedComparison);
    }

    let n = x_a + x_b;
    let limits = clopper_pearson(x_a, n, alpha)?;
    let scale = t_b / t_a;
    let odds = |p: f64| p / (1.0 - p);

    let ratio_lower = if limits.lower == 0.0 {
        0.0
    } else {
        odds(limits.lower) * scale
    };
    let ci_upper = if limits.upper >= 1.0 {
        UpperLimit::Unbounded
    } else {
        UpperLimit::Finite(100.0 * (odds(limits.upper) * scale - 1.0))
    };

    let ads_rate = 1.0e6 * x_a / t_a;
    let human_rate = 1.0e6 * x_b / t_b;
    let rate_ratio = if x_b == 0.0 {
        f64::INFINITY
    } else {
        (x_a / t_a) / (x_b / t_b)
    };
    let percent_difference = 100.0 * (rate_ratio - 1.0);
    let ci_lower = 100.0 * (ratio_lower - 1.0);
    let significant = match ci_upper {
        UpperLimit::Finite(u) => u < 0.0 || ci_lower > 0.0,
        UpperLimit::Unbounded => ci_lower > 0.0,
    };

    Ok(ComparisonResult {
        location: None,
        outcome: None,
        crash_type: None,
        ads_count: x_a,
        ads_miles: t_a,
        human_effective_count: x_b,
        human_exposure: t_b,
        human_rate_ipmm: human_rate,
        ads_rate_ipmm: ads_rate,
        rate_ratio,
        percent_difference,
        ci_lower,
        ci_upper,
        significant,
        expected_count_delta: expected_count_delta(human_rate, t_a, x_a),
        underreporting_applied: false,
        dynamic_applied: false,
    })
}

/// ADS-side observations for one analysis cell: weighted count and miles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdsObservation {
    pub count: f64,
    pub miles: f64,
}

/// Aggregates a classified ADS corpus into per-cell observations keyed the
/// same way benchmarks are: per location, outcome, and crash type (with the
/// all-type aggregate and the front-to-rear role splits), plus the
/// all-locations entry under `location: None`.
///
/// Records from locations without configured mileage are skipped with a
/// warning; they have no exposure to compare against.
pub fn ads_observations(
    corpus: &[crate::classify::ClassifiedRecord],
    ads_miles: &BTreeMap<Location, f64>,
) -> BTreeMap<BenchmarkKey, AdsObservation> {
    use crate::model::CrashGroup;

    let total_miles: f64 = ads_miles.values().sum();
    let mut out: BTreeMap<BenchmarkKey, AdsObservation> = BTreeMap::new();

    // Seed every cell with zero counts so absent crash types still compare.
    let mut seed = |location: Option<Location>, miles: f64| {
        for outcome in OutcomeLevel::ALL {
            let mut insert = |crash_type: Option<CrashType>| {
                out.insert(
                    BenchmarkKey {
                        location: location.clone(),
                        outcome,
                        crash_type,
                    },
                    AdsObservation { count: 0.0, miles },
                );
            };
            insert(None);
            for group in CrashGroup::ALL {
                insert(Some(CrashType::new(group)));
            }
            insert(Some(CrashType::f2r(crate::model::F2rRole::Striking)));
            insert(Some(CrashType::f2r(crate::model::F2rRole::Struck)));
        }
    };
    for (location, miles) in ads_miles {
        seed(Some(location.clone()), *miles);
    }
    seed(None, total_miles);

    for record in corpus {
        if !ads_miles.contains_key(&record.record.location) {
            log::warn!(
                "record {} is from '{}', which has no configured mileage; skipped",
                record.record.crash_id,
                record.record.location
            );
            continue;
        }
        let weight = record.record.weight;
        for outcome in &record.outcomes {
            let mut bump = |location: Option<Location>, crash_type: Option<CrashType>| {
                if let Some(obs) = out.get_mut(&BenchmarkKey {
                    location,
                    outcome: *outcome,
                    crash_type,
                }) {
                    obs.count += weight;
                }
            };
            for location in [Some(record.record.location.clone()), None] {
                bump(location.clone(), None);
                bump(location.clone(), Some(CrashType::new(record.crash_type.group)));
                if record.crash_type.f2r_role.is_some() {
                    bump(location, Some(record.crash_type));
                }
            }
        }
    }
    out
}

/// A benchmark cell that had no counterpart on one side of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGap {
    pub location: Option<Location>,
    pub outcome: OutcomeLevel,
    pub crash_type: Option<CrashType>,
    pub reason: String,
}

/// Output of [`compare`]: one result per requested cell plus a gap report
/// for cells that could not be compared.
#[derive(Debug, Clone, Default)]
pub struct ComparisonSet {
    pub results: Vec<ComparisonResult>,
    pub gaps: Vec<ComparisonGap>,
}

/// Compares ADS observations against a benchmark set, one result per
/// benchmark cell, in deterministic key order.
///
/// Cells with a benchmark but no ADS exposure, or where both counts are
/// zero, are listed in the gap report rather than silently skipped.
pub fn compare(
    ads: &BTreeMap<BenchmarkKey, AdsObservation>,
    benchmarks: &BTreeMap<BenchmarkKey, BenchmarkRate>,
    alpha: f64,
) -> Result<ComparisonSet, StatsError> {
    let mut set = ComparisonSet::default();
    for (key, bench) in benchmarks {
        let Some(obs) = ads.get(key) else {
            set.gaps.push(ComparisonGap {
                location: key.location.clone(),
                outcome: key.outcome,
                crash_type: key.crash_type,
                reason: "no ADS observation for benchmark cell".to_string(),
            });
            continue;
        };
        if obs.miles <= 0.0 {
            set.gaps.push(ComparisonGap {
                location: key.location.clone(),
                outcome: key.outcome,
                crash_type: key.crash_type,
                reason: "ADS exposure is zero".to_string(),
            });
            continue;
        }
        match rate_ratio_ci(
            obs.count,
            obs.miles,
            bench.effective_count,
            bench.exposure,
            alpha,
        ) {
            Ok(mut result) => {
                result.location = key.location.clone();
                result.outcome = Some(key.outcome);
                result.crash_type = key.crash_type;
                // The benchmark's rate is authoritative; recomputing it from
                // the effective count would reintroduce a rounding trip.
                result.human_rate_ipmm = bench.rate;
                result.expected_count_delta =
                    expected_count_delta(bench.rate, obs.miles, obs.count);
                result.underreporting_applied = bench.underreporting_applied;
                result.dynamic_applied = bench.dynamic_applied;
                set.results.push(result);
            }
            Err(StatsError::UndefinedComparison) => {
                set.gaps.push(ComparisonGap {
                    location: key.location.clone(),
                    outcome: key.outcome,
                    crash_type: key.crash_type,
                    reason: "both counts are zero".to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}
