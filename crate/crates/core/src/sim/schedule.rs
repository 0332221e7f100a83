use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One flicker output held for a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlickerState {
    /// Relative radiant intensity per RGB channel.
    pub emission: [f64; 3],
    /// Hold time in seconds.
    pub duration: f64,
}

impl FlickerState {
    pub fn new(emission: [f64; 3], duration: f64) -> Self {
        FlickerState { emission, duration }
    }
}

/// A flicker program: `states` played in order, repeated `cycles` times.
///
/// The program starts with a transition into state 0 from the last state (the
/// light has been cycling before recording starts), so every cycle contains
/// exactly `N = states.len()` transitions, the wrap-around included.
/// Transition `i` is the change into state `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlickerSchedule {
    pub states: Vec<FlickerState>,
    pub cycles: u32,
}

/// A scheduled change of the flicker output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    /// Onset in seconds from the start of the recording.
    pub time: f64,
    /// End of the state this transition enters.
    pub end: f64,
    pub cycle: u32,
    /// Index of the state entered; also the transition index within a cycle.
    pub state: usize,
}

/// Relative intensities of the default three-level program.
pub const DEFAULT_INTENSITIES: [f64; 3] = [1.0, 0.66, 0.33];
/// Default hold time: the light changes color at 3 Hz.
pub const DEFAULT_STATE_DURATION: f64 = 1.0 / 3.0;

impl FlickerSchedule {
    pub fn new(states: Vec<FlickerState>, cycles: u32) -> Result<Self> {
        let s = FlickerSchedule { states, cycles };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Argument("flicker schedule has no states".into()));
        }
        if self.cycles == 0 {
            return Err(Error::Argument("flicker schedule needs at least one cycle".into()));
        }
        for (i, s) in self.states.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::Argument(format!("state {i}: duration must be positive")));
            }
            if s.emission.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Error::Argument(format!(
                    "state {i}: emission must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Red, green, blue at each of `intensities`, ordered R1 G1 B1 R2 G2 B2 ...
    pub fn rgb_levels(intensities: &[f64], duration: f64, cycles: u32) -> Result<Self> {
        let states = intensities
            .iter()
            .flat_map(|&i| {
                (0..3).map(move |c| {
                    let mut e = [0.0; 3];
                    e[c] = i;
                    FlickerState::new(e, duration)
                })
            })
            .collect();
        Self::new(states, cycles)
    }

    /// Nine-state program: three colors at three intensities, 1/3 s each.
    pub fn three_intensity(cycles: u32) -> Self {
        Self::rgb_levels(&DEFAULT_INTENSITIES, DEFAULT_STATE_DURATION, cycles)
            .expect("default schedule is valid")
    }

    /// Three-state program at full intensity only.
    pub fn single_intensity(cycles: u32) -> Self {
        Self::rgb_levels(&[1.0], DEFAULT_STATE_DURATION, cycles).expect("default schedule is valid")
    }

    /// Number of transitions per cycle.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn cycle_duration(&self) -> f64 {
        self.states.iter().map(|s| s.duration).sum()
    }

    pub fn total_duration(&self) -> f64 {
        self.cycle_duration() * self.cycles as f64
    }

    /// All transitions in temporal order.
    pub fn transitions(&self) -> Vec<Transition> {
        let cycle = self.cycle_duration();
        let mut out = Vec::with_capacity(self.n() * self.cycles as usize);
        for c in 0..self.cycles {
            let mut t = c as f64 * cycle;
            for (i, s) in self.states.iter().enumerate() {
                out.push(Transition {
                    time: t,
                    end: t + s.duration,
                    cycle: c,
                    state: i,
                });
                t += s.duration;
            }
        }
        out
    }
}

impl Default for FlickerSchedule {
    fn default() -> Self {
        Self::three_intensity(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_program_layout() {
        let s = FlickerSchedule::three_intensity(1);
        assert_eq!(s.n(), 9);
        assert_eq!(s.states[0].emission, [1.0, 0.0, 0.0]);
        assert_eq!(s.states[4].emission, [0.0, 0.66, 0.0]);
        assert_eq!(s.states[8].emission, [0.0, 0.0, 0.33]);
        assert!((s.cycle_duration() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn transitions_cover_all_cycles() {
        let s = FlickerSchedule::three_intensity(2);
        let tr = s.transitions();
        assert_eq!(tr.len(), 18);
        assert_eq!(tr[9].state, 0);
        assert_eq!(tr[9].cycle, 1);
        assert!((tr[9].time - 3.0).abs() < 1e-12);
        assert!((tr[17].end - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_programs() {
        assert!(FlickerSchedule::new(vec![], 1).is_err());
        assert!(FlickerSchedule::new(vec![FlickerState::new([1.0; 3], 0.0)], 1).is_err());
        assert!(FlickerSchedule::new(vec![FlickerState::new([-1.0, 0.0, 0.0], 1.0)], 1).is_err());
        assert!(FlickerSchedule::new(vec![FlickerState::new([1.0; 3], 1.0)], 0).is_err());
    }
}
