//! Adaptive stiff integration of polynomial systems.
//!
//! The stepper is the L-stable Rosenbrock 2(3) pair of Shampine and Reichelt
//! (the scheme behind MATLAB's `ode23s`): one LU factorization of
//! `W = I - h*d*J` per step, three solves, and an embedded third-order error
//! estimate. The Jacobian is the exact derivative of the polynomial field.
//! Output samples come from the method's own second-order interpolant.
//!
//! Concentrations must stay nonnegative. A step whose end point or any
//! interpolated sample dips below `-neg_tol` is rejected and retried with a
//! smaller step; values in `[-neg_tol, 0)` are clamped to zero.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::polyode::{PolyOde, VectorField};
use crate::trajectory::Trajectory;

const D: f64 = 0.292_893_218_813_452_5; // 1 / (2 + sqrt 2)
const E32: f64 = 7.414_213_562_373_095; // 6 + sqrt 2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Spacing of output samples.
    pub sample_dt: f64,
    /// First trial step; chosen from the initial slope when `None`.
    pub initial_step: Option<f64>,
    pub neg_tol: f64,
}

impl IntegrationSpec {
    pub fn new(t_end: f64) -> Self {
        IntegrationSpec {
            t_end,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            max_step: 1.0,
            sample_dt: 0.01,
            initial_step: None,
            neg_tol: 1e-9,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_sample_dt(mut self, dt: f64) -> Self {
        self.sample_dt = dt;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |what: &str| Err(IntegrateError::InvalidSpec(what.to_string()));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive and finite");
        }
        if !(self.rel_tol >= 1e-12) {
            return bad("rel_tol must be at least 1e-12");
        }
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.sample_dt > 0.0) {
            return bad("sample_dt must be positive");
        }
        if !(self.neg_tol >= 0.0) {
            return bad("neg_tol must be nonnegative");
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) {
                return bad("initial_step must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("invalid integration settings: {0}")]
    InvalidSpec(String),
    #[error("initial state has {found} entries, system has {expected} species")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial concentration of {species} is negative or not finite ({value})")]
    InvalidInitial { species: String, value: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("{species} goes below zero ({value}) at t = {t} and cannot be resolved")]
    NegativeExcursion {
        species: String,
        t: f64,
        value: f64,
        state: Vec<f64>,
    },
}

impl IntegrateError {
    /// Time of failure for run-time errors.
    pub fn time(&self) -> Option<f64> {
        match self {
            IntegrateError::StepSizeUnderflow { t, .. } | IntegrateError::NegativeExcursion { t, .. } => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub factorizations: usize,
    /// Largest magnitude clamped from a negative value to zero.
    pub max_clamped: f64,
}

pub fn integrate(sys: &PolyOde, y0: &[f64], spec: &IntegrationSpec) -> Result<Trajectory, IntegrateError> {
    integrate_with_stats(sys, y0, spec).map(|(t, _)| t)
}

pub fn integrate_with_stats(
    sys: &PolyOde,
    y0: &[f64],
    spec: &IntegrationSpec,
) -> Result<(Trajectory, IntegrationStats), IntegrateError> {
    spec.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(IntegrateError::DimensionMismatch {
            expected: n,
            found: y0.len(),
        });
    }
    let names = sys.species_names();
    if let Some((i, &v)) = y0.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(IntegrateError::InvalidInitial {
            species: names[i].clone(),
            value: v,
        });
    }
    let mut stepper = Stepper::new(sys.vector_field(), *spec);
    let (times, states) = stepper.run(y0, &names)?;
    let traj = Trajectory::new(names, times, states).expect("integrator emits strictly increasing samples");
    Ok((traj, stepper.stats))
}

struct StepResult {
    ynew: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    f2: Vec<f64>,
    err: f64,
}

enum Rejection {
    Error(f64),
    Negative { index: usize, value: f64 },
    Singular,
}

struct Stepper {
    field: VectorField,
    spec: IntegrationSpec,
    stats: IntegrationStats,
    jac: Vec<f64>,
}

impl Stepper {
    fn new(field: VectorField, spec: IntegrationSpec) -> Self {
        let n = field.dim();
        Stepper {
            field,
            spec,
            stats: IntegrationStats::default(),
            jac: vec![0.0; n * n],
        }
    }

    fn rhs(&mut self, y: &[f64]) -> Vec<f64> {
        self.stats.rhs_evals += 1;
        let mut out = vec![0.0; y.len()];
        self.field.eval_into(y, &mut out);
        out
    }

    fn weighted_rms(&self, v: &[f64], a: &[f64], b: &[f64]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let sum: f64 = v
            .iter()
            .zip(a.iter().zip(b))
            .map(|(x, (ya, yb))| {
                let sc = self.spec.abs_tol + self.spec.rel_tol * ya.abs().max(yb.abs());
                (x / sc).powi(2)
            })
            .sum();
        (sum / v.len() as f64).sqrt()
    }

    fn initial_step(&self, y: &[f64], f: &[f64]) -> f64 {
        if let Some(h) = self.spec.initial_step {
            return h;
        }
        let d0 = self.weighted_rms(y, y, y);
        let d1 = self.weighted_rms(f, y, y);
        if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
    }

    fn sample_time(&self, k: usize) -> f64 {
        k as f64 * self.spec.sample_dt
    }

    fn run(&mut self, y0: &[f64], names: &[String]) -> Result<(Vec<f64>, Vec<Vec<f64>>), IntegrateError> {
        let n = y0.len();
        let t_end = self.spec.t_end;
        let mut times = vec![0.0];
        let mut states = vec![y0.to_vec()];
        let mut next_sample = 1usize;

        let mut t = 0.0;
        let mut y = y0.to_vec();
        let mut f0 = self.rhs(&y);
        let mut h = self.initial_step(&y, &f0).min(self.spec.max_step);
        let mut last_rejected = false;

        while t < t_end {
            let remaining = t_end - t;
            let mut last = false;
            if h >= remaining || remaining - h < 1e-12 * t_end {
                h = remaining;
                last = true;
            }
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h < h_min {
                return Err(IntegrateError::StepSizeUnderflow { t, h, state: y });
            }

            let attempt = self.try_step(&y, &f0, h);
            let StepResult { ynew, k1, k2, f2, err } = match attempt {
                Ok(parts) => parts,
                Err(reason) => {
                    self.stats.rejected += 1;
                    last_rejected = true;
                    let shrink = match reason {
                        Rejection::Error(err) if err.is_finite() => (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 0.5),
                        Rejection::Negative { index, value } => {
                            if h * 0.5 < h_min {
                                return Err(IntegrateError::NegativeExcursion {
                                    species: names[index].clone(),
                                    t,
                                    value,
                                    state: y,
                                });
                            }
                            0.5
                        }
                        _ => 0.25,
                    };
                    h *= shrink;
                    continue;
                }
            };

            let t_new = if last { t_end } else { t + h };
            // interpolated samples inside (t, t_new]
            let mut pending = Vec::new();
            let mut k = next_sample;
            while self.sample_time(k) <= t_new * (1.0 + 1e-14) {
                let ts = self.sample_time(k).min(t_end);
                let s = (ts - t) / h;
                let a = s * (1.0 - s) / (1.0 - 2.0 * D);
                let b = s * (s - 2.0 * D) / (1.0 - 2.0 * D);
                let yi: Vec<f64> = (0..n).map(|i| y[i] + h * (a * k1[i] + b * k2[i])).collect();
                pending.push((ts, yi));
                k += 1;
            }
            if let Some((index, value)) = pending
                .iter()
                .flat_map(|(_, yi)| yi.iter().copied().enumerate())
                .find(|&(_, v)| v < -self.spec.neg_tol)
            {
                self.stats.rejected += 1;
                last_rejected = true;
                if h * 0.5 < h_min {
                    return Err(IntegrateError::NegativeExcursion {
                        species: names[index].clone(),
                        t,
                        value,
                        state: y,
                    });
                }
                h *= 0.5;
                continue;
            }

            self.stats.accepted += 1;
            let mut clamped = false;
            let mut ynew = ynew;
            for v in ynew.iter_mut() {
                if *v < 0.0 {
                    self.stats.max_clamped = self.stats.max_clamped.max(-*v);
                    *v = 0.0;
                    clamped = true;
                }
            }
            for (ts, mut yi) in pending {
                for v in yi.iter_mut() {
                    if *v < 0.0 {
                        self.stats.max_clamped = self.stats.max_clamped.max(-*v);
                        *v = 0.0;
                    }
                }
                if ts > *times.last().unwrap() {
                    times.push(ts);
                    states.push(yi);
                }
            }
            next_sample = k;
            t = t_new;
            y = ynew;
            // F2 from the step is stale once a component has been clamped
            f0 = if clamped { self.rhs(&y) } else { f2 };

            let growth = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
            };
            let growth = if last_rejected { growth.min(1.0) } else { growth };
            last_rejected = false;
            h = (h * growth).min(self.spec.max_step);
        }
        if *times.last().unwrap() < t_end {
            times.push(t_end);
            states.push(y);
        }
        Ok((times, states))
    }

    fn try_step(&mut self, y: &[f64], f0: &[f64], h: f64) -> Result<StepResult, Rejection> {
        let n = y.len();
        self.field.jacobian_into(y, &mut self.jac);
        let hd = h * D;
        let w = DMatrix::from_fn(n, n, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - hd * self.jac[r * n + c]
        });
        self.stats.factorizations += 1;
        let lu = w.lu();
        let solve = |rhs: Vec<f64>| -> Result<Vec<f64>, Rejection> {
            lu.solve(&DVector::from_vec(rhs))
                .map(|v| v.as_slice().to_vec())
                .ok_or(Rejection::Singular)
        };

        let k1 = solve(f0.to_vec())?;
        let mid: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
        let f1 = self.rhs(&mid);
        let mut k2 = solve((0..n).map(|i| f1[i] - k1[i]).collect())?;
        for i in 0..n {
            k2[i] += k1[i];
        }
        let ynew: Vec<f64> = (0..n).map(|i| y[i] + h * k2[i]).collect();
        let f2 = self.rhs(&ynew);
        let k3 = solve(
            (0..n)
                .map(|i| f2[i] - E32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]))
                .collect(),
        )?;
        let est: Vec<f64> = (0..n).map(|i| h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i])).collect();
        let err = self.weighted_rms(&est, y, &ynew);
        if !err.is_finite() || err > 1.0 {
            return Err(Rejection::Error(err));
        }
        if let Some((index, &value)) = ynew.iter().enumerate().find(|(_, &v)| v < -self.spec.neg_tol) {
            return Err(Rejection::Negative { index, value });
        }
        Ok(StepResult { ynew, k1, k2, f2, err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyode::Monomial;

    fn decay() -> PolyOde {
        PolyOde::builder()
            .species("x")
            .term("x", -1.0, Monomial::var("x").unwrap())
            .build()
            .unwrap()
    }

    #[test]
    fn linear_decay_matches_exponential() {
        let spec = IntegrationSpec::new(1.0);
        let traj = integrate(&decay(), &[1.0], &spec).unwrap();
        let x1 = traj.final_state().unwrap()[0];
        assert!((x1 - (-1.0f64).exp()).abs() < 1e-4, "x(1) = {x1}");
        assert_eq!(*traj.times().last().unwrap(), 1.0);
        assert_eq!(traj.len(), 101);
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let err = |rtol: f64| {
            let spec = IntegrationSpec::new(1.0).with_tolerances(rtol, rtol * 1e-3);
            let traj = integrate(&decay(), &[1.0], &spec).unwrap();
            (traj.final_state().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let (coarse, fine) = (err(1e-4), err(1e-8));
        assert!(fine < coarse / 100.0, "{coarse} vs {fine}");
        assert!(fine < 1e-6);
    }

    #[test]
    fn stiff_linear_pair_is_stable() {
        // fast mode at -1e5 would need h < 2e-5 explicitly
        let sys = PolyOde::builder()
            .species("a")
            .species("b")
            .term("a", -1e5, Monomial::var("a").unwrap())
            .term("b", 1e5, Monomial::var("a").unwrap())
            .term("b", -1.0, Monomial::var("b").unwrap())
            .build()
            .unwrap();
        let (traj, stats) = integrate_with_stats(&sys, &[1.0, 0.0], &IntegrationSpec::new(5.0)).unwrap();
        let end = traj.final_state().unwrap();
        let exact = (-5.0f64).exp() * 1e5 / (1e5 - 1.0);
        assert!((end[1] - exact).abs() < 1e-5, "{} vs {exact}", end[1]);
        assert!(stats.accepted < 5_000, "{stats:?}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let sys = decay();
        assert!(matches!(
            integrate(&sys, &[1.0, 2.0], &IntegrationSpec::new(1.0)),
            Err(IntegrateError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            integrate(&sys, &[-1.0], &IntegrationSpec::new(1.0)),
            Err(IntegrateError::InvalidInitial { .. })
        ));
        assert!(matches!(
            integrate(&sys, &[1.0], &IntegrationSpec::new(0.0)),
            Err(IntegrateError::InvalidSpec(_))
        ));
        let loose = IntegrationSpec::new(1.0).with_tolerances(1e-13, 1e-9);
        assert!(matches!(
            integrate(&sys, &[1.0], &loose),
            Err(IntegrateError::InvalidSpec(_))
        ));
    }

    #[test]
    fn finite_time_blowup_underflows() {
        // dx/dt = x^2 from x = 1 blows up at t = 1
        let sys = PolyOde::builder()
            .species("x")
            .term("x", 1.0, Monomial::new([("x", 2)]).unwrap())
            .build()
            .unwrap();
        let err = integrate(&sys, &[1.0], &IntegrationSpec::new(2.0)).unwrap_err();
        let t = err.time().expect("run-time failure carries a time");
        assert!(t > 0.9 && t < 1.0 + 1e-6, "{err}");
    }

    #[test]
    fn consumption_to_zero_stays_nonnegative() {
        // dx/dt = -100 x y, dy/dt = -100 x y: both drain; x hits near zero
        let xy = Monomial::new([("x", 1), ("y", 1)]).unwrap();
        let sys = PolyOde::builder()
            .species("x")
            .species("y")
            .term("x", -100.0, xy.clone())
            .term("y", -100.0, xy)
            .build()
            .unwrap();
        let (traj, stats) = integrate_with_stats(&sys, &[1.0, 2.0], &IntegrationSpec::new(10.0)).unwrap();
        assert!(traj.states().iter().flatten().all(|&v| v >= 0.0));
        assert!(stats.max_clamped <= 1e-9);
        let end = traj.final_state().unwrap();
        assert!(end[0] < 1e-6 && (end[1] - 1.0).abs() < 1e-5);
    }
}
