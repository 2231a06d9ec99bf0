//! Sampled solutions and the event analysis done on them.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("times must be strictly increasing (sample {0})")]
    NonMonotoneTime(usize),
    #[error("sample {index} has {found} values, expected {expected}")]
    Width {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown species {0:?}")]
    UnknownSpecies(String),
    #[error("malformed trajectory CSV: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Time-stamped state samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    species: Vec<String>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(species: Vec<String>, times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self, TrajectoryError> {
        if times.len() != states.len() {
            return Err(TrajectoryError::Malformed(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(TrajectoryError::NonMonotoneTime(i + 1));
        }
        if let Some((index, s)) = states.iter().enumerate().find(|(_, s)| s.len() != species.len()) {
            return Err(TrajectoryError::Width {
                index,
                expected: species.len(),
                found: s.len(),
            });
        }
        Ok(Trajectory { species, times, states })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn index_of(&self, species: &str) -> Option<usize> {
        self.species.iter().position(|s| s == species)
    }

    pub fn column(&self, species: &str) -> Result<Vec<f64>, TrajectoryError> {
        let i = self
            .index_of(species)
            .ok_or_else(|| TrajectoryError::UnknownSpecies(species.to_string()))?;
        Ok(self.states.iter().map(|s| s[i]).collect())
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Linear interpolation of every species at `t`, clamped to the sampled
    /// range.
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        let first = *self.times.first()?;
        let last = *self.times.last()?;
        if t <= first {
            return Some(self.states[0].clone());
        }
        if t >= last {
            return self.states.last().cloned();
        }
        let k = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.states[k - 1]
                .iter()
                .zip(&self.states[k])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }

    /// Samples with `t >= t0`.
    pub fn after(&self, t0: f64) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .zip(&self.states)
            .filter(move |(&t, _)| t >= t0)
            .map(|(&t, s)| (t, s.as_slice()))
    }

    /// CSV with header `t,<species...>`; values use shortest round-trip
    /// decimal representation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TrajectoryError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.species.iter().cloned());
        w.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = Vec::with_capacity(s.len() + 1);
            row.push(t.to_string());
            row.extend(s.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TrajectoryError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") {
            return Err(TrajectoryError::Malformed("first column must be 't'".into()));
        }
        let species: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let values: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let values = values.map_err(|e| TrajectoryError::Malformed(format!("row {}: {e}", line + 1)))?;
            let (t, rest) = values
                .split_first()
                .ok_or_else(|| TrajectoryError::Malformed(format!("row {} is empty", line + 1)))?;
            times.push(*t);
            states.push(rest.to_vec());
        }
        Trajectory::new(species, times, states)
    }

    pub fn from_csv(text: &str) -> Result<Self, TrajectoryError> {
        Self::read_csv(text.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Times at which the piecewise-linear interpolant of `species` crosses
/// `level` in the given direction. A sample sitting exactly on the level
/// counts as reached from below (or above).
pub fn detect_crossings(
    traj: &Trajectory,
    species: &str,
    level: f64,
    direction: Direction,
) -> Result<Vec<f64>, TrajectoryError> {
    let values = traj.column(species)?;
    let times = traj.times();
    let mut out: Vec<f64> = Vec::new();
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        let hit = match direction {
            Direction::Up => a < level && b >= level,
            Direction::Down => a > level && b <= level,
        };
        if hit {
            // exact root of the linear interpolant
            let w = (level - a) / (b - a);
            let t = times[k - 1] + w * (times[k] - times[k - 1]);
            if out.last().is_none_or(|&p| t > p) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    /// Crossings before this time are ignored.
    pub transient: f64,
    /// Leading crossings dropped after the transient window.
    pub skip_crossings: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            transient: 0.0,
            skip_crossings: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PeriodStats {
    pub mean: f64,
    pub stddev: f64,
    /// Number of gaps averaged.
    pub count: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum PeriodError {
    #[error("need at least 3 upward crossings after the transient, found {0}")]
    TooFewCrossings(usize),
    #[error("unknown species {0:?}")]
    UnknownSpecies(String),
}

/// Mean and population standard deviation of the gaps between consecutive
/// upward crossings of `level`.
pub fn measure_period(
    traj: &Trajectory,
    species: &str,
    level: f64,
    opts: &PeriodOptions,
) -> Result<PeriodStats, PeriodError> {
    let crossings: Vec<f64> = detect_crossings(traj, species, level, Direction::Up)
        .map_err(|_| PeriodError::UnknownSpecies(species.to_string()))?
        .into_iter()
        .filter(|&t| t >= opts.transient)
        .collect();
    if crossings.len() < 3 || crossings.len() <= opts.skip_crossings + 1 {
        return Err(PeriodError::TooFewCrossings(crossings.len()));
    }
    let gaps: Vec<f64> = crossings[opts.skip_crossings..]
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    Ok(PeriodStats {
        mean,
        stddev: var.sqrt(),
        count: gaps.len(),
    })
}

/// A stretch of time over which a signal stays inside a narrow band.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Plateau {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Maximal runs of samples whose spread stays within `band` and that last at
/// least `min_duration`, reported with their mean value. Adjacent runs whose
/// means differ by less than `band` are merged.
pub fn find_plateaus(
    traj: &Trajectory,
    species: &str,
    band: f64,
    min_duration: f64,
) -> Result<Vec<Plateau>, TrajectoryError> {
    let values = traj.column(species)?;
    let times = traj.times();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let (mut lo, mut hi) = (values[i], values[i]);
        let mut j = i + 1;
        while j < values.len() {
            let (l, h) = (lo.min(values[j]), hi.max(values[j]));
            if h - l > band {
                break;
            }
            (lo, hi) = (l, h);
            j += 1;
        }
        if times[j - 1] - times[i] >= min_duration {
            runs.push((i, j));
            i = j;
        } else {
            i += 1;
        }
    }
    let mean = |(a, b): (usize, usize)| values[a..b].iter().sum::<f64>() / (b - a) as f64;
    let mut out: Vec<(Plateau, usize, usize)> = Vec::new();
    for (a, b) in runs {
        let value = mean((a, b));
        if let Some((last, la, _)) = out.last() {
            if (last.value - value).abs() < band {
                let la = *la;
                out.pop();
                let merged = mean((la, b));
                out.push((
                    Plateau {
                        start: times[la],
                        end: times[b - 1],
                        value: merged,
                    },
                    la,
                    b,
                ));
                continue;
            }
        }
        out.push((
            Plateau {
                start: times[a],
                end: times[b - 1],
                value,
            },
            a,
            b,
        ));
    }
    Ok(out.into_iter().map(|(p, _, _)| p).collect())
}
