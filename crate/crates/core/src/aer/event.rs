use std::fmt;

use crate::{Error, Result};

/// Direction of the brightness change that triggered an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Brightness decreased (`p = -1`).
    Off,
    /// Brightness increased (`p = +1`).
    On,
}

impl Polarity {
    pub fn from_sign(sign: f64) -> Polarity {
        if sign < 0.0 {
            Polarity::Off
        } else {
            Polarity::On
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::On => 1,
            Polarity::Off => -1,
        }
    }

    pub fn try_from_i64(value: i64) -> Option<Polarity> {
        match value {
            1 => Some(Polarity::On),
            -1 => Some(Polarity::Off),
            _ => None,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// Sensor size in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Resolution {
    pub width: u16,
    pub height: u16,
}

impl Resolution {
    pub const fn new(width: u16, height: u16) -> Self {
        Resolution { width, height }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Row-major pixel index.
    #[inline]
    pub fn index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Iterate pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (u16, u16)> + '_ {
        let w = self.width;
        (0..self.height).flat_map(move |y| (0..w).map(move |x| (x, y)))
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// A single AER record: pixel address, timestamp in microseconds, polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    pub t: u64,
    pub p: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, p: Polarity) -> Self {
        Event { x, y, t, p }
    }
}

/// Time-ordered events from one sensor.
///
/// Construction validates that every event lies inside the resolution and
/// stably sorts by timestamp, so near-simultaneous events that arrive out of
/// order keep their relative order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventStream {
    resolution: Resolution,
    events: Vec<Event>,
}

impl EventStream {
    pub fn new(resolution: Resolution, mut events: Vec<Event>) -> Result<Self> {
        if let Some((i, e)) = events
            .iter()
            .enumerate()
            .find(|(_, e)| !resolution.contains(e.x, e.y))
        {
            return Err(Error::Validation(format!(
                "event {i} at ({}, {}) lies outside the {resolution} sensor",
                e.x, e.y
            )));
        }
        if !events.windows(2).all(|w| w[0].t <= w[1].t) {
            events.sort_by_key(|e| e.t);
        }
        Ok(EventStream { resolution, events })
    }

    pub fn empty(resolution: Resolution) -> Self {
        EventStream {
            resolution,
            events: Vec::new(),
        }
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn first_time(&self) -> Option<u64> {
        self.events.first().map(|e| e.t)
    }

    pub fn last_time(&self) -> Option<u64> {
        self.events.last().map(|e| e.t)
    }

    /// `t_last - t_first`, or `None` for an empty stream.
    pub fn span_us(&self) -> Option<u64> {
        Some(self.last_time()? - self.first_time()?)
    }

    /// Merge with another stream of the same resolution, keeping time order.
    /// Events of `self` precede events of `other` at equal timestamps.
    pub fn merge(&self, other: &EventStream) -> Result<EventStream> {
        if self.resolution != other.resolution {
            return Err(Error::Argument(format!(
                "cannot merge {} and {} streams",
                self.resolution, other.resolution
            )));
        }
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.events.iter().peekable(), other.events.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(ea), Some(eb)) if ea.t <= eb.t => a.next(),
                (Some(_), Some(_)) => b.next(),
                (Some(_), None) => a.next(),
                (None, Some(_)) => b.next(),
                (None, None) => break,
            };
            merged.extend(next.copied());
        }
        Ok(EventStream {
            resolution: self.resolution,
            events: merged,
        })
    }
}
