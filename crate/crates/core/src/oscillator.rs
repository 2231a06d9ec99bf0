//! Relaxation-oscillator clocks and the three-module counter.
//!
//! One oscillator is four species: a relaxation pair `(x, y)` whose fast
//! variable jumps between the outer branches of the cubic nullcline
//! `y = -x^3 + 6x^2 - 9x + 5`, and a truncated-subtraction pair `(u, v)` that
//! tracks `max(p - x, 0)` and `max(x - p, 0)`. Because `x` spends its time
//! near 0..1 or 3..4 and `p` sits in between, `u` and `v` take turns being
//! essentially zero: a symmetric pair of clock signals used as catalysts.
//!
//! Stacking `m` copies with the xy time scale doubled at each level gives
//! nested clocks for `m + 1` modules. Module 1 is the loop counter's
//! truncated subtraction, so the counter and a cycle limit come for free.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyode::{Monomial, PolyError, PolyOde};
use crate::trajectory::{Trajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum OscillatorError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("a schedule needs at least 2 oscillators, got {0}")]
    TooFewOscillators(usize),
    #[error("counter x must start strictly positive (x = 0 is absorbing), got {0}")]
    CounterStart(f64),
    #[error("cubic does not have two real critical points with positive values: {0}")]
    BadCubic(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `f(x) = -x^3 + 6x^2 - 9x + 5`.
pub fn nullcline_cubic(x: f64) -> f64 {
    ((-x + 6.0) * x - 9.0) * x + 5.0
}

/// `f'(x) = -3x^2 + 12x - 9 = -3 (x - 1)(x - 3)`.
pub fn nullcline_slope(x: f64) -> f64 {
    (-3.0 * x + 12.0) * x - 9.0
}

/// Coefficients `[a3, a2, a1, a0]` of the nullcline cubic.
pub const NULLCLINE_COEFFS: [f64; 4] = [-1.0, 6.0, -9.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub eta1: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub eta2: f64,
    pub p: f64,
    pub c: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            eta1: 0.1,
            epsilon: 0.001,
            rho: 2.1,
            eta2: 10.0,
            p: 2.0,
            c: 5000.0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), OscillatorError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(OscillatorError::InvalidParams(format!("{name} = {v} must be positive")))
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<(), OscillatorError> {
        positive("eta1", self.eta1)?;
        positive("epsilon", self.epsilon)?;
        positive("eta2", self.eta2)?;
        positive("p", self.p)?;
        positive("c", self.c)?;
        if self.epsilon > 0.01 {
            return Err(OscillatorError::InvalidParams(format!(
                "epsilon = {} must be at most 0.01",
                self.epsilon
            )));
        }
        if !(self.rho > 1.0 && self.rho < 3.0) {
            return Err(OscillatorError::InvalidParams(format!(
                "rho = {} must lie strictly inside (1, 3)",
                self.rho
            )));
        }
        if self.c < 100.0 {
            return Err(OscillatorError::InvalidParams(format!(
                "c = {} must be at least 100",
                self.c
            )));
        }
        Ok(())
    }

    /// Same oscillator running `factor` times faster in x and y.
    pub fn with_xy_speedup(&self, factor: f64) -> Self {
        OscillatorParams {
            eta1: self.eta1 * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterParams {
    pub eta3: f64,
    pub eta4: f64,
    pub n: u32,
    #[serde(default = "default_l")]
    pub l: f64,
}

fn default_l() -> f64 {
    1.0
}

impl Default for CounterParams {
    fn default() -> Self {
        CounterParams {
            eta3: 500.0,
            eta4: 1.0,
            n: 4,
            l: 1.0,
        }
    }
}

impl CounterParams {
    pub fn validate(&self) -> Result<(), OscillatorError> {
        positive("eta3", self.eta3)?;
        positive("eta4", self.eta4)?;
        positive("l", self.l)?;
        if self.n < 1 {
            return Err(OscillatorError::InvalidParams("n must be at least 1".into()));
        }
        Ok(())
    }
}

fn mono(factors: &[(&str, u32)]) -> Result<Monomial, PolyError> {
    Monomial::new(factors.iter().copied())
}

/// One oscillator over `x<suffix>, y<suffix>, u<suffix>, v<suffix>`:
///
/// ```text
/// dx/dt = eta1 (-x^3 + 6x^2 - 9x + 5 - y) x / epsilon
/// dy/dt = eta1 (x - rho) y
/// du/dt = eta2 (p - u - c u v)
/// dv/dt = eta2 (x - v - c u v)
/// ```
pub fn build_core(params: &OscillatorParams, suffix: &str) -> Result<PolyOde, OscillatorError> {
    params.validate()?;
    let [x, y, u, v] = ["x", "y", "u", "v"].map(|s| format!("{s}{suffix}"));
    let (x, y, u, v) = (x.as_str(), y.as_str(), u.as_str(), v.as_str());
    let k = params.eta1 / params.epsilon;
    let e2 = params.eta2;
    let [a3, a2, a1, a0] = NULLCLINE_COEFFS;
    let sys = PolyOde::builder()
        .species(x)
        .species(y)
        .species(u)
        .species(v)
        .term(x, a3 * k, mono(&[(x, 4)])?)
        .term(x, a2 * k, mono(&[(x, 3)])?)
        .term(x, a1 * k, mono(&[(x, 2)])?)
        .term(x, a0 * k, mono(&[(x, 1)])?)
        .term(x, -k, mono(&[(x, 1), (y, 1)])?)
        .term(y, params.eta1, mono(&[(x, 1), (y, 1)])?)
        .term(y, -params.eta1 * params.rho, mono(&[(y, 1)])?)
        .term(u, e2 * params.p, Monomial::one())
        .term(u, -e2, mono(&[(u, 1)])?)
        .term(u, -e2 * params.c, mono(&[(u, 1), (v, 1)])?)
        .term(v, e2, mono(&[(x, 1)])?)
        .term(v, -e2, mono(&[(v, 1)])?)
        .term(v, -e2 * params.c, mono(&[(u, 1), (v, 1)])?)
        .build()?;
    Ok(sys)
}

/// Parameters of oscillator `k` (1-based) in a stack: eta1 scaled by 2^(k-1).
pub fn stack_level_params(params: &OscillatorParams, k: usize) -> OscillatorParams {
    params.with_xy_speedup((1u64 << (k - 1)) as f64)
}

/// `m` oscillators with suffixes `1..=m`; oscillator `k` runs its xy-subsystem
/// `2^(k-1)` times faster than the first.
pub fn build_stack(m: usize, params: &OscillatorParams) -> Result<PolyOde, OscillatorError> {
    if m < 1 {
        return Err(OscillatorError::InvalidParams(
            "stack needs at least one oscillator".into(),
        ));
    }
    params.validate()?;
    let mut sys = PolyOde::empty();
    for k in 1..=m {
        sys = sys.compose(&build_core(&stack_level_params(params, k), &k.to_string())?)?;
    }
    Ok(sys)
}

/// Concentration names of the clock signals driving the counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterClocks {
    pub u1: String,
    pub v1: String,
    pub u2: String,
    pub v2: String,
}

impl Default for CounterClocks {
    fn default() -> Self {
        CounterClocks {
            u1: "u1".into(),
            v1: "v1".into(),
            u2: "u2".into(),
            v2: "v2".into(),
        }
    }
}

/// Loop counter over `x, y, z`; the clock species appear as inputs with no
/// equations of their own:
///
/// ```text
/// dx/dt = eta3 (n - y - x) x v1        module 1: x <- n - y
/// dy/dt = eta4 (z - y) u1 u2 x         module 3: y <- z
/// dz/dt = eta4 (y + l - z) u1 v2 x     module 2: z <- y + l
/// ```
pub fn build_counter(cp: &CounterParams, clocks: &CounterClocks) -> Result<PolyOde, OscillatorError> {
    cp.validate()?;
    let (u1, v1, u2, v2) = (
        clocks.u1.as_str(),
        clocks.v1.as_str(),
        clocks.u2.as_str(),
        clocks.v2.as_str(),
    );
    let n = f64::from(cp.n);
    let sys = PolyOde::builder()
        .species("x")
        .species("y")
        .species("z")
        .species(u1)
        .species(v1)
        .species(u2)
        .species(v2)
        .term("x", cp.eta3 * n, mono(&[("x", 1), (v1, 1)])?)
        .term("x", -cp.eta3, mono(&[("x", 1), ("y", 1), (v1, 1)])?)
        .term("x", -cp.eta3, mono(&[("x", 2), (v1, 1)])?)
        .term("y", cp.eta4, mono(&[("z", 1), (u1, 1), (u2, 1), ("x", 1)])?)
        .term("y", -cp.eta4, mono(&[("y", 1), (u1, 1), (u2, 1), ("x", 1)])?)
        .term("z", cp.eta4, mono(&[("y", 1), (u1, 1), (v2, 1), ("x", 1)])?)
        .term("z", cp.eta4 * cp.l, mono(&[(u1, 1), (v2, 1), ("x", 1)])?)
        .term("z", -cp.eta4, mono(&[("z", 1), (u1, 1), (v2, 1), ("x", 1)])?)
        .build()?;
    Ok(sys)
}

/// Initial `(x, y, z)` of the counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterStart {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CounterStart {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, OscillatorError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(OscillatorError::CounterStart(x));
        }
        Ok(CounterStart { x, y, z })
    }

    /// `x = n`, `y = z = 0`.
    pub fn for_params(cp: &CounterParams) -> Self {
        CounterStart {
            x: f64::from(cp.n),
            y: 0.0,
            z: 0.0,
        }
    }
}

/// Every oscillator starts at `(x, y, u, v) = (1, 1, 0, 0)`.
pub const OSCILLATOR_START: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

/// Initial point for `build_stack(m)` optionally followed by the counter.
pub fn initial_state(m: usize, counter: Option<CounterStart>) -> Vec<f64> {
    let mut y0: Vec<f64> = (0..m).flat_map(|_| OSCILLATOR_START).collect();
    if let Some(c) = counter {
        y0.extend([c.x, c.y, c.z]);
    }
    y0
}

/// Clock catalysts per module (1-based module index, network species names).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockAssignment {
    pub module_count: usize,
    pub catalysts: BTreeMap<usize, Vec<String>>,
}

/// Wiring for `m + 1` modules driven by `m` oscillators. Module 1 runs while
/// `V1` is up; module `k` in `2..=m` needs `U1..U(k-1)` and `Vk`; the last
/// module needs `U1..Um`. For `m = 2` this is the counter's wiring:
/// `{V1}`, `{U1, V2}`, `{U1, U2}`.
pub fn assign_catalysts(m: usize) -> Result<ClockAssignment, OscillatorError> {
    if m < 2 {
        return Err(OscillatorError::TooFewOscillators(m));
    }
    let mut catalysts = BTreeMap::new();
    catalysts.insert(1, vec!["V1".to_string()]);
    for k in 2..=m {
        let mut set: Vec<String> = (1..k).map(|j| format!("U{j}")).collect();
        set.push(format!("V{k}"));
        catalysts.insert(k, set);
    }
    catalysts.insert(m + 1, (1..=m).map(|j| format!("U{j}")).collect());
    Ok(ClockAssignment {
        module_count: m + 1,
        catalysts,
    })
}

/// Composed clocks plus counter for `m + 1` modules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub modules: usize,
    pub oscillators: Vec<OscillatorParams>,
    #[serde(with = "assignment_json")]
    pub assignment: BTreeMap<usize, Vec<String>>,
    pub counter: CounterParams,
}

mod assignment_json {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, Vec<String>>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: indexmap::IndexMap<String, &Vec<String>> = map.iter().map(|(k, v)| (k.to_string(), v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, Vec<String>>, D::Error> {
        let raw: BTreeMap<String, Vec<String>> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| serde::de::Error::custom(format!("module key {k:?} is not an integer")))
            })
            .collect()
    }
}

impl Schedule {
    pub fn new(m: usize, params: &OscillatorParams, counter: &CounterParams) -> Result<Self, OscillatorError> {
        let assignment = assign_catalysts(m)?;
        params.validate()?;
        counter.validate()?;
        Ok(Schedule {
            modules: m + 1,
            oscillators: (1..=m).map(|k| stack_level_params(params, k)).collect(),
            assignment: assignment.catalysts,
            counter: *counter,
        })
    }

    pub fn oscillator_count(&self) -> usize {
        self.oscillators.len()
    }

    pub fn clock_assignment(&self) -> ClockAssignment {
        ClockAssignment {
            module_count: self.modules,
            catalysts: self.assignment.clone(),
        }
    }

    /// Oscillators `1..=m` followed by the counter `x, y, z`.
    pub fn system(&self) -> Result<PolyOde, OscillatorError> {
        let m = self.oscillators.len();
        if m < 2 {
            return Err(OscillatorError::TooFewOscillators(m));
        }
        if self.modules != m + 1 {
            return Err(OscillatorError::InvalidParams(format!(
                "{} oscillators regulate {} modules, not {}",
                m,
                m + 1,
                self.modules
            )));
        }
        let mut sys = PolyOde::empty();
        for (k, p) in self.oscillators.iter().enumerate() {
            sys = sys.compose(&build_core(p, &(k + 1).to_string())?)?;
        }
        Ok(sys.compose(&build_counter(&self.counter, &CounterClocks::default())?)?)
    }

    pub fn initial_state(&self) -> Vec<f64> {
        initial_state(self.oscillators.len(), Some(CounterStart::for_params(&self.counter)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullclineGeometry {
    /// Local minimum then local maximum of the cubic, as `(x, y)`.
    pub fold_points: [(f64, f64); 2],
    /// Where the fast jump from each fold lands on the opposite branch.
    pub landing_points: [(f64, f64); 2],
    pub equilibrium: (f64, f64),
}

/// Folds, landing points and equilibrium of `y = a3 x^3 + a2 x^2 + a1 x + a0`.
///
/// `f(x) - f(x_fold)` has a double root at the fold, so the third root, the
/// landing abscissa, is `-a2/a3 - 2 x_fold` by Vieta.
pub fn analyze_nullcline(coeffs: [f64; 4], rho: f64) -> Result<NullclineGeometry, OscillatorError> {
    let [a3, a2, a1, a0] = coeffs;
    let f = |x: f64| ((a3 * x + a2) * x + a1) * x + a0;
    if a3 == 0.0 {
        return Err(OscillatorError::BadCubic("leading coefficient is zero".into()));
    }
    let disc = 4.0 * a2 * a2 - 12.0 * a3 * a1;
    if !(disc > 0.0) {
        return Err(OscillatorError::BadCubic(format!(
            "derivative discriminant {disc} is not positive"
        )));
    }
    let r = disc.sqrt();
    let mut folds = [(-2.0 * a2 - r) / (6.0 * a3), (-2.0 * a2 + r) / (6.0 * a3)];
    folds.sort_by(f64::total_cmp);
    let fold_points = folds.map(|x| (x, f(x)));
    if fold_points.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(OscillatorError::BadCubic("fold values must be positive".into()));
    }
    let landing_points = fold_points.map(|(x, y)| (-a2 / a3 - 2.0 * x, y));
    Ok(NullclineGeometry {
        fold_points,
        landing_points,
        equilibrium: (rho, f(rho)),
    })
}

/// Thresholds for [`verify_clock_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockCheck {
    /// "Close enough to zero".
    pub delta: f64,
    /// "Strictly beyond zero".
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    /// Samples before this time are ignored.
    pub transient: f64,
    /// Largest admissible share of samples spent switching over.
    #[serde(default = "default_max_transition")]
    pub max_transition_fraction: f64,
}

fn default_max_transition() -> f64 {
    0.05
}

impl Default for ClockCheck {
    fn default() -> Self {
        ClockCheck {
            delta: 0.01,
            big_delta: 0.5,
            transient: 40.0,
            max_transition_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockPairReport {
    pub samples: usize,
    /// Share of samples with `min(u, v) < delta`.
    pub low_fraction: f64,
    /// Samples where one signal is below `delta` but the other is not above `Delta`.
    pub exclusion_failures: usize,
    /// Share of samples not in a clean `(low, high)` configuration.
    pub transition_fraction: f64,
    /// Changes of which signal is the low one.
    pub alternations: usize,
    pub symmetric: bool,
}

/// Checks that `u` and `v` behave as a symmetric pair of clock signals:
/// outside short switching windows exactly one of them is near zero while the
/// other is clearly positive, and the roles keep alternating.
pub fn verify_clock_pair(
    traj: &Trajectory,
    u: &str,
    v: &str,
    check: &ClockCheck,
) -> Result<ClockPairReport, TrajectoryError> {
    let iu = traj
        .index_of(u)
        .ok_or_else(|| TrajectoryError::UnknownSpecies(u.to_string()))?;
    let iv = traj
        .index_of(v)
        .ok_or_else(|| TrajectoryError::UnknownSpecies(v.to_string()))?;
    let mut samples = 0usize;
    let mut low = 0usize;
    let mut clean = 0usize;
    let mut exclusion_failures = 0usize;
    let mut alternations = 0usize;
    let mut last_low: Option<bool> = None;
    for (_, s) in traj.after(check.transient) {
        samples += 1;
        let (a, b) = (s[iu], s[iv]);
        let lo = a.min(b);
        let hi = a.max(b);
        if lo < check.delta {
            low += 1;
            if hi > check.big_delta {
                clean += 1;
                let u_is_low = a < b;
                if last_low.is_some_and(|prev| prev != u_is_low) {
                    alternations += 1;
                }
                last_low = Some(u_is_low);
            } else {
                exclusion_failures += 1;
            }
        }
    }
    let frac = |k: usize| if samples == 0 { 0.0 } else { k as f64 / samples as f64 };
    let transition_fraction = if samples == 0 { 1.0 } else { frac(samples - clean) };
    Ok(ClockPairReport {
        samples,
        low_fraction: frac(low),
        exclusion_failures,
        transition_fraction,
        alternations,
        symmetric: samples > 0 && alternations >= 2 && transition_fraction < check.max_transition_fraction,
    })
}

/// How closely `(u, v)` tracks the truncated subtraction of `x` from `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub samples: usize,
    /// Share of samples with `|(u - v) - (p - x)| < difference_tol`.
    pub difference_fraction: f64,
    /// Share of samples with `u v < product_bound`.
    pub product_fraction: f64,
    pub max_difference_error: f64,
    pub max_product: f64,
}

pub fn truncation_report(
    traj: &Trajectory,
    names: [&str; 3],
    p: f64,
    difference_tol: f64,
    product_bound: f64,
    transient: f64,
) -> Result<TruncationReport, TrajectoryError> {
    let idx = names
        .iter()
        .map(|n| {
            traj.index_of(n)
                .ok_or_else(|| TrajectoryError::UnknownSpecies(n.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (ix, iu, iv) = (idx[0], idx[1], idx[2]);
    let mut samples = 0usize;
    let mut diff_ok = 0usize;
    let mut prod_ok = 0usize;
    let mut max_diff = 0.0f64;
    let mut max_prod = 0.0f64;
    for (_, s) in traj.after(transient) {
        samples += 1;
        let d = ((s[iu] - s[iv]) - (p - s[ix])).abs();
        let prod = s[iu] * s[iv];
        max_diff = max_diff.max(d);
        max_prod = max_prod.max(prod);
        diff_ok += usize::from(d < difference_tol);
        prod_ok += usize::from(prod < product_bound);
    }
    let n = samples.max(1) as f64;
    Ok(TruncationReport {
        samples,
        difference_fraction: diff_ok as f64 / n,
        product_fraction: prod_ok as f64 / n,
        max_difference_error: max_diff,
        max_product: max_prod,
    })
}
