//! Check suites for `chemclock verify`.

use chemclock::oscillator::{truncation_report, verify_clock_pair, ClockCheck};
use chemclock::trajectory::TrajectoryError;
use chemclock::{find_plateaus, measure_period, PeriodOptions, Trajectory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Deserialize)]
pub struct CheckSuite {
    pub checks: Vec<Check>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `u` and `v` form a symmetric clock pair.
    ClockPair {
        u: String,
        v: String,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(rename = "Delta", default = "default_big_delta")]
        big_delta: f64,
        #[serde(default = "default_transient")]
        transient: f64,
    },
    /// Last sample of `species` lies in `[min, max]`.
    FinalValue { species: String, min: f64, max: f64 },
    /// Every sample from time `from` on lies in `[min, max]`.
    Range {
        species: String,
        from: f64,
        min: f64,
        max: f64,
    },
    /// Mean period of upward crossings of `level` lies in `[min, max]`.
    Period {
        species: String,
        level: f64,
        min: f64,
        max: f64,
        #[serde(default = "default_transient")]
        transient: f64,
    },
    /// Ratio of the mean periods of two species lies in `[min, max]`.
    PeriodRatio {
        numerator: String,
        denominator: String,
        level: f64,
        min: f64,
        max: f64,
        #[serde(default = "default_transient")]
        transient: f64,
    },
    /// Plateau levels (excluding those within `tol` of zero) match `levels`.
    Plateaus {
        species: String,
        levels: Vec<f64>,
        tol: f64,
        #[serde(default = "default_band")]
        band: f64,
        #[serde(default = "default_min_duration")]
        min_duration: f64,
    },
    /// `(u, v)` tracks `max(p - x, 0)`, `max(x - p, 0)`.
    Truncation {
        x: String,
        u: String,
        v: String,
        p: f64,
        tol: f64,
        product_bound: f64,
        min_fraction: f64,
        #[serde(default = "default_transient")]
        transient: f64,
    },
}

fn default_delta() -> f64 {
    0.01
}
fn default_big_delta() -> f64 {
    0.5
}
fn default_transient() -> f64 {
    40.0
}
fn default_band() -> f64 {
    0.02
}
fn default_min_duration() -> f64 {
    2.0
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub measured: serde_json::Value,
    pub bound: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn result(check: String, measured: impl Serialize, bound: String, pass: bool) -> CheckResult {
    CheckResult {
        check,
        measured: serde_json::to_value(measured).unwrap_or(serde_json::Value::Null),
        bound,
        pass,
    }
}

fn column_value(traj: &Trajectory, species: &str, state: &[f64]) -> Result<f64, TrajectoryError> {
    traj.index_of(species)
        .map(|i| state[i])
        .ok_or_else(|| TrajectoryError::UnknownSpecies(species.to_string()))
}

fn period(traj: &Trajectory, species: &str, level: f64, transient: f64) -> Result<f64, TrajectoryError> {
    let opts = PeriodOptions {
        transient,
        skip_crossings: 1,
    };
    match measure_period(traj, species, level, &opts) {
        Ok(stats) => Ok(stats.mean),
        Err(chemclock::trajectory::PeriodError::UnknownSpecies(s)) => Err(TrajectoryError::UnknownSpecies(s)),
        Err(_) => Ok(f64::NAN),
    }
}

impl Check {
    pub fn run(&self, traj: &Trajectory) -> Result<CheckResult, TrajectoryError> {
        Ok(match self {
            Check::ClockPair {
                u,
                v,
                delta,
                big_delta,
                transient,
            } => {
                let cfg = ClockCheck {
                    delta: *delta,
                    big_delta: *big_delta,
                    transient: *transient,
                    ..ClockCheck::default()
                };
                let r = verify_clock_pair(traj, u, v, &cfg)?;
                let bound = format!(
                    "transition fraction < {}, alternations >= 2",
                    cfg.max_transition_fraction
                );
                let pass = r.symmetric;
                result(format!("clock_pair({u}, {v})"), r, bound, pass)
            }
            Check::FinalValue { species, min, max } => {
                let last = traj
                    .final_state()
                    .ok_or(TrajectoryError::Malformed("empty trajectory".into()))?;
                let value = column_value(traj, species, last)?;
                let pass = (*min..=*max).contains(&value);
                result(
                    format!("final_value({species})"),
                    value,
                    format!("[{min}, {max}]"),
                    pass,
                )
            }
            Check::Range {
                species,
                from,
                min,
                max,
            } => {
                let i = traj
                    .index_of(species)
                    .ok_or_else(|| TrajectoryError::UnknownSpecies(species.clone()))?;
                let (lo, hi) = traj
                    .after(*from)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| {
                        (lo.min(s[i]), hi.max(s[i]))
                    });
                let pass = lo >= *min && hi <= *max;
                result(
                    format!("range({species}, t >= {from})"),
                    [lo, hi],
                    format!("[{min}, {max}]"),
                    pass,
                )
            }
            Check::Period {
                species,
                level,
                min,
                max,
                transient,
            } => {
                let p = period(traj, species, *level, *transient)?;
                let pass = (*min..=*max).contains(&p);
                result(format!("period({species})"), p, format!("[{min}, {max}]"), pass)
            }
            Check::PeriodRatio {
                numerator,
                denominator,
                level,
                min,
                max,
                transient,
            } => {
                let ratio =
                    period(traj, numerator, *level, *transient)? / period(traj, denominator, *level, *transient)?;
                let pass = (*min..=*max).contains(&ratio);
                result(
                    format!("period_ratio({numerator} / {denominator})"),
                    ratio,
                    format!("[{min}, {max}]"),
                    pass,
                )
            }
            Check::Plateaus {
                species,
                levels,
                tol,
                band,
                min_duration,
            } => {
                let found: Vec<f64> = find_plateaus(traj, species, *band, *min_duration)?
                    .into_iter()
                    .map(|p| p.value)
                    .filter(|v| v.abs() > *tol)
                    .collect();
                let pass = found.len() == levels.len() && found.iter().zip(levels).all(|(a, b)| (a - b).abs() <= *tol);
                result(
                    format!("plateaus({species})"),
                    found,
                    format!("{levels:?} within {tol}"),
                    pass,
                )
            }
            Check::Truncation {
                x,
                u,
                v,
                p,
                tol,
                product_bound,
                min_fraction,
                transient,
            } => {
                let r = truncation_report(traj, [x, u, v], *p, *tol, *product_bound, *transient)?;
                let pass = r.difference_fraction >= *min_fraction && r.product_fraction >= *min_fraction;
                let bound = format!("fractions >= {min_fraction}");
                result(format!("truncation({x}, {u}, {v})"), r, bound, pass)
            }
        })
    }
}

pub fn run_suite(suite: &CheckSuite, traj: &Trajectory) -> Result<Report, TrajectoryError> {
    let checks = suite
        .checks
        .iter()
        .map(|c| c.run(traj))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}
