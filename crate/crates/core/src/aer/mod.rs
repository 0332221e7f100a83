//! Address-event representation: the event data model, stream I/O, temporal
//! binning into pseudo-frames and stream statistics.

mod event;
mod frames;
mod io;
mod stats;

pub use event::{Event, EventStream, Polarity, Resolution};
pub use frames::{bin_events, event_count_curve, FrameStack, SliceEntry};
pub use io::{parse_events, write_events, EventFormat, BINARY_HEADER_LEN, BINARY_RECORD_LEN};
pub use stats::{stream_stats, StreamStats};

/// Microseconds per second, the timestamp unit of every [`Event`].
pub const US_PER_S: f64 = 1e6;
