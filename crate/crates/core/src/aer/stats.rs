use super::{EventStream, Polarity, US_PER_S};
use crate::{Error, Result};

/// Summary statistics of an event stream over a known duration.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamStats {
    pub events: u64,
    pub duration_s: f64,
    /// Events per pixel per second over the whole sensor.
    pub rate_per_pixel_s: f64,
    /// Fraction of pixels with at least one event.
    pub active_fraction: f64,
    pub on_events: u64,
    pub off_events: u64,
}

/// Compute statistics over `duration_us` microseconds of recording.
pub fn stream_stats(stream: &EventStream, duration_us: u64) -> Result<StreamStats> {
    if duration_us == 0 {
        return Err(Error::UndefinedRate("recording duration is zero".into()));
    }
    let res = stream.resolution();
    let pixels = res.pixel_count();
    if pixels == 0 {
        return Err(Error::UndefinedRate("sensor has no pixels".into()));
    }
    let mut active = vec![false; pixels];
    let mut on = 0u64;
    for e in stream.events() {
        active[res.index(e.x, e.y)] = true;
        on += (e.p == Polarity::On) as u64;
    }
    let events = stream.len() as u64;
    let duration_s = duration_us as f64 / US_PER_S;
    Ok(StreamStats {
        events,
        duration_s,
        rate_per_pixel_s: events as f64 / (pixels as f64 * duration_s),
        active_fraction: active.iter().filter(|&&a| a).count() as f64 / pixels as f64,
        on_events: on,
        off_events: events - on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aer::{Event, Resolution};

    #[test]
    fn one_event_per_second_on_vga() {
        let s = EventStream::new(Resolution::new(640, 480), vec![Event::new(3, 3, 10, Polarity::On)]).unwrap();
        let st = stream_stats(&s, 1_000_000).unwrap();
        assert_eq!(st.rate_per_pixel_s, 1.0 / (640.0 * 480.0));
        assert_eq!(st.active_fraction, 1.0 / (640.0 * 480.0));
    }

    #[test]
    fn balanced_polarities() {
        let events = (0..10)
            .map(|i| Event::new(0, 0, i, if i % 2 == 0 { Polarity::On } else { Polarity::Off }))
            .collect();
        let st = stream_stats(&EventStream::new(Resolution::new(1, 1), events).unwrap(), 100).unwrap();
        assert_eq!(st.on_events, st.off_events);
    }

    #[test]
    fn zero_duration_is_an_error() {
        let s = EventStream::empty(Resolution::new(1, 1));
        assert!(matches!(stream_stats(&s, 0), Err(Error::UndefinedRate(_))));
    }
}
