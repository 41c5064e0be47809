use std::collections::BTreeMap;
use std::fmt::Write;

use crate::quantum::DensityMatrix;

/// Time series of states and named real observables on a common grid.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

impl Trajectory {
    pub fn push_observable(&mut self, name: &str, value: f64) {
        self.observables.entry(name.to_string()).or_default().push(value);
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn peak(&self, name: &str) -> Option<Peak> {
        global_peak(&self.times, self.series(name)?)
    }

    pub fn first_peak(&self, name: &str) -> Option<Peak> {
        first_peak(&self.times, self.series(name)?, 0.02)
    }

    /// Columns: t followed by observables in name order.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
        let names: Vec<&String> = self.observables.keys().collect();
        out.push('t');
        for n in &names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t}");
            for n in &names {
                let _ = write!(out, ",{}", self.observables[*n].get(k).copied().unwrap_or(f64::NAN));
            }
            out.push('\n');
        }
        out
    }
}

pub fn global_peak(times: &[f64], s: &[f64]) -> Option<Peak> {
    let (index, value) = s
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })?;
    Some(Peak {
        index,
        time: times[index],
        value,
    })
}

/// Fraction of the global maximum a local maximum must reach to count as the first peak.
pub const PEAK_FLOOR: f64 = 0.1;

/// First maximum after which the series drops by more than `rel_drop` of the running maximum.
/// Maxima below `PEAK_FLOOR` times the global maximum are ignored (early numerical ripples).
/// Falls back to the global maximum when no such drop occurs.
pub fn first_peak(times: &[f64], s: &[f64], rel_drop: f64) -> Option<Peak> {
    let floor = PEAK_FLOOR * global_peak(times, s)?.value;
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in s.iter().enumerate() {
        match best {
            Some((_, bv)) if v > bv => best = Some((i, v)),
            Some((bi, bv)) if bv > 0.0 && bv >= floor && v < bv * (1.0 - rel_drop) => {
                return Some(Peak {
                    index: bi,
                    time: times[bi],
                    value: bv,
                })
            }
            None => best = Some((i, v)),
            _ => {}
        }
    }
    global_peak(times, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_peak_stops_at_first_drop() {
        let t: Vec<f64> = (0..7).map(|k| k as f64).collect();
        let s = [0.0, 0.5, 0.6, 0.3, 0.2, 0.9, 0.1];
        let p = first_peak(&t, &s, 0.02).unwrap();
        assert_eq!(p.index, 2);
        assert_eq!(global_peak(&t, &s).unwrap().index, 5);
    }

    #[test]
    fn first_peak_ignores_ripples() {
        let t: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let s = [0.0, 0.01, 0.0, 0.5, 0.8, 0.4];
        assert_eq!(first_peak(&t, &s, 0.02).unwrap().index, 4);
    }
}
