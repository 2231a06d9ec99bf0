use chemclock::oscillator::{
    build_stack, initial_state, verify_clock_pair, ClockCheck, CounterParams, OscillatorParams, Schedule,
};
use chemclock::{compile, integrate, measure_period, IntegrationSpec, PeriodOptions, Trajectory};

fn counter_run() -> Trajectory {
    let s = Schedule::new(2, &OscillatorParams::default(), &CounterParams::default()).unwrap();
    integrate(&s.system().unwrap(), &s.initial_state(), &IntegrationSpec::new(150.0)).unwrap()
}

fn first_time_above(traj: &Trajectory, species: &str, level: f64) -> Option<f64> {
    let i = traj.index_of(species).unwrap();
    traj.times()
        .iter()
        .zip(traj.states())
        .find(|(_, s)| s[i] > level)
        .map(|(t, _)| *t)
}

#[test]
fn counter_is_monotone_and_bounded() {
    let traj = counter_run();
    let y = traj.column("y").unwrap();
    let mut peak = f64::NEG_INFINITY;
    for v in &y {
        assert!(*v >= peak - 0.02, "y dropped from {peak} to {v}");
        peak = peak.max(*v);
        assert!(*v <= 4.05);
    }
    assert!(traj.states().iter().all(|s| s.iter().all(|v| *v >= 0.0)));
}

#[test]
fn module_two_fires_before_module_three() {
    let traj = counter_run();
    for k in 1..=4 {
        let level = f64::from(k) - 0.5;
        let z = first_time_above(&traj, "z", level).unwrap();
        let y = first_time_above(&traj, "y", level).unwrap();
        assert!(z < y, "step {k}: z at {z}, y at {y}");
    }
    assert!(first_time_above(&traj, "y", 4.5).is_none());
}

#[test]
fn third_oscillator_halves_again() {
    let traj = integrate(
        &build_stack(3, &OscillatorParams::default()).unwrap(),
        &initial_state(3, None),
        &IntegrationSpec::new(120.0),
    )
    .unwrap();
    let opts = PeriodOptions {
        transient: 20.0,
        skip_crossings: 1,
    };
    let p2 = measure_period(&traj, "x2", 2.0, &opts).unwrap().mean;
    let p3 = measure_period(&traj, "x3", 2.0, &opts).unwrap().mean;
    assert!((p2 / p3 - 2.0).abs() < 0.02, "{p2} / {p3}");
    for k in 1..=3 {
        let r = verify_clock_pair(&traj, &format!("u{k}"), &format!("v{k}"), &ClockCheck::default()).unwrap();
        assert!(r.symmetric, "oscillator {k}: {r:?}");
    }
}

#[test]
fn larger_schedules_compile() {
    for m in 2..=4 {
        let s = Schedule::new(m, &OscillatorParams::default(), &CounterParams::default()).unwrap();
        let sys = s.system().unwrap();
        assert_eq!(sys.dim(), 4 * m + 3);
        assert_eq!(s.initial_state().len(), 4 * m + 3);
        let crn = compile(&sys).unwrap();
        assert_eq!(crn.reactions.len(), 13 * m + 8);
    }
}
