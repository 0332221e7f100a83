//! Text and binary AER serialization.
//!
//! Text: a header line `evt v1 <width> <height>` followed by one `x,y,t,p`
//! record per line, `p` being `1` or `-1`.
//!
//! Binary (little-endian): magic `EVT1`, `u16` width, `u16` height, `u64`
//! event count, then 16-byte records of `u16 x`, `u16 y`, `u64 t`, `i8 p`
//! and three zero pad bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Event, EventStream, Polarity, Resolution};
use crate::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"EVT1";
pub const BINARY_HEADER_LEN: usize = 16;
pub const BINARY_RECORD_LEN: usize = 16;
const TEXT_MAGIC: &str = "evt";
const TEXT_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventFormat {
    Text,
    Binary,
}

impl EventFormat {
    /// Guess the format from a file extension: `.evt`/`.bin` are binary,
    /// anything else is text.
    pub fn from_path(path: &std::path::Path) -> EventFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("evt") | Some("bin") => EventFormat::Binary,
            _ => EventFormat::Text,
        }
    }
}

impl FromStr for EventFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" | "csv" => Ok(EventFormat::Text),
            "binary" | "bin" | "evt" => Ok(EventFormat::Binary),
            other => Err(Error::Argument(format!("unknown event format '{other}'"))),
        }
    }
}

/// Decode an event stream.
///
/// `fallback` supplies the sensor resolution for headerless text input and
/// for empty input; a header always takes precedence. Unsorted records are
/// stably sorted by timestamp.
pub fn parse_events(
    input: &[u8],
    format: EventFormat,
    fallback: Option<Resolution>,
) -> Result<EventStream> {
    match format {
        EventFormat::Text => parse_text(input, fallback),
        EventFormat::Binary => parse_binary(input, fallback),
    }
}

/// Encode a stream. `parse_events` on the output reproduces the stream exactly.
pub fn write_events(stream: &EventStream, format: EventFormat) -> Vec<u8> {
    match format {
        EventFormat::Text => write_text(stream).into_bytes(),
        EventFormat::Binary => write_binary(stream),
    }
}

fn parse_text(input: &[u8], fallback: Option<Resolution>) -> Result<EventStream> {
    let text = std::str::from_utf8(input).map_err(|e| {
        Error::parse_byte(e.valid_up_to(), "input is not valid UTF-8")
    })?;

    let mut resolution = fallback;
    let mut events = Vec::new();
    let mut seen_record = false;
    let mut seen_header = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with(TEXT_MAGIC) {
            if seen_record || seen_header {
                return Err(Error::parse_line(lineno, "header must precede all records"));
            }
            resolution = Some(parse_header(line, lineno)?);
            seen_header = true;
            continue;
        }
        seen_record = true;
        let res = resolution.ok_or_else(|| {
            Error::parse_line(lineno, "record before header and no resolution supplied")
        })?;
        let event = parse_record(line, lineno)?;
        if !res.contains(event.x, event.y) {
            return Err(Error::Validation(format!(
                "record at line {lineno}: pixel ({}, {}) outside {res} sensor",
                event.x, event.y
            )));
        }
        events.push(event);
    }

    EventStream::new(resolution.unwrap_or(Resolution::new(0, 0)), events)
}

fn parse_header(line: &str, lineno: usize) -> Result<Resolution> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        [TEXT_MAGIC, TEXT_VERSION, w, h] => {
            let width = w
                .parse::<u16>()
                .map_err(|_| Error::parse_line(lineno, format!("bad width '{w}'")))?;
            let height = h
                .parse::<u16>()
                .map_err(|_| Error::parse_line(lineno, format!("bad height '{h}'")))?;
            Ok(Resolution::new(width, height))
        }
        _ => Err(Error::parse_line(
            lineno,
            format!("expected 'evt v1 <width> <height>', got '{line}'"),
        )),
    }
}

fn parse_record(line: &str, lineno: usize) -> Result<Event> {
    let mut fields = line.split(',').map(str::trim);
    let mut next = |name: &str| {
        fields
            .next()
            .ok_or_else(|| Error::parse_line(lineno, format!("missing field '{name}'")))
    };
    let x = next("x")?;
    let y = next("y")?;
    let t = next("t")?;
    let p = next("p")?;
    if fields.next().is_some() {
        return Err(Error::parse_line(lineno, "expected 4 fields 'x,y,t,p'"));
    }
    let x = x
        .parse::<u16>()
        .map_err(|_| Error::parse_line(lineno, format!("bad x '{x}'")))?;
    let y = y
        .parse::<u16>()
        .map_err(|_| Error::parse_line(lineno, format!("bad y '{y}'")))?;
    let t = t
        .parse::<u64>()
        .map_err(|_| Error::parse_line(lineno, format!("bad timestamp '{t}'")))?;
    let p = p
        .parse::<i64>()
        .ok()
        .and_then(Polarity::try_from_i64)
        .ok_or_else(|| Error::parse_line(lineno, format!("polarity must be 1 or -1, got '{p}'")))?;
    Ok(Event::new(x, y, t, p))
}

fn write_text(stream: &EventStream) -> String {
    let res = stream.resolution();
    let mut out = String::with_capacity(24 + stream.len() * 16);
    let _ = writeln!(out, "{TEXT_MAGIC} {TEXT_VERSION} {} {}", res.width, res.height);
    for e in stream.events() {
        let _ = writeln!(out, "{},{},{},{}", e.x, e.y, e.t, e.p);
    }
    out
}

fn parse_binary(input: &[u8], fallback: Option<Resolution>) -> Result<EventStream> {
    if input.is_empty() {
        return Ok(EventStream::empty(fallback.unwrap_or(Resolution::new(0, 0))));
    }
    if input.len() < BINARY_HEADER_LEN {
        return Err(Error::parse_byte(input.len(), "truncated header"));
    }
    if &input[..4] != BINARY_MAGIC {
        return Err(Error::parse_byte(0, "bad magic, expected 'EVT1'"));
    }
    let width = u16::from_le_bytes([input[4], input[5]]);
    let height = u16::from_le_bytes([input[6], input[7]]);
    let count = u64::from_le_bytes(input[8..16].try_into().unwrap());
    let resolution = Resolution::new(width, height);

    let body = &input[BINARY_HEADER_LEN..];
    let expected = (count as u128) * BINARY_RECORD_LEN as u128;
    if body.len() as u128 != expected {
        return Err(Error::parse_byte(
            BINARY_HEADER_LEN + body.len() - body.len() % BINARY_RECORD_LEN,
            format!(
                "header declares {count} records but body holds {} bytes",
                body.len()
            ),
        ));
    }

    let mut events = Vec::with_capacity(count as usize);
    for (i, rec) in body.chunks_exact(BINARY_RECORD_LEN).enumerate() {
        let offset = BINARY_HEADER_LEN + i * BINARY_RECORD_LEN;
        let x = u16::from_le_bytes([rec[0], rec[1]]);
        let y = u16::from_le_bytes([rec[2], rec[3]]);
        let t = u64::from_le_bytes(rec[4..12].try_into().unwrap());
        let p = Polarity::try_from_i64(rec[12] as i8 as i64).ok_or_else(|| {
            Error::parse_byte(offset + 12, format!("polarity byte {} is not 1 or -1", rec[12] as i8))
        })?;
        if !resolution.contains(x, y) {
            return Err(Error::Validation(format!(
                "record {i} (byte {offset}): pixel ({x}, {y}) outside {resolution} sensor"
            )));
        }
        events.push(Event::new(x, y, t, p));
    }
    EventStream::new(resolution, events)
}

fn write_binary(stream: &EventStream) -> Vec<u8> {
    let res = stream.resolution();
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + stream.len() * BINARY_RECORD_LEN);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&res.width.to_le_bytes());
    out.extend_from_slice(&res.height.to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    for e in stream.events() {
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.extend_from_slice(&e.t.to_le_bytes());
        out.push(e.p.as_i8() as u8);
        out.extend_from_slice(&[0, 0, 0]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    const VGA: Resolution = Resolution::new(640, 480);

    #[test]
    fn smallest_text_record() {
        let s = parse_events(b"0,0,0,1", EventFormat::Text, Some(VGA)).unwrap();
        assert_eq!(s.events(), &[Event::new(0, 0, 0, Polarity::On)]);
        assert_eq!(s.resolution(), VGA);
    }

    #[test]
    fn empty_input_is_empty_stream() {
        for fmt in [EventFormat::Text, EventFormat::Binary] {
            let s = parse_events(b"", fmt, Some(VGA)).unwrap();
            assert!(s.is_empty());
        }
    }

    #[test]
    fn empty_stream_writes_header_only() {
        let s = EventStream::empty(VGA);
        assert_eq!(write_events(&s, EventFormat::Text), b"evt v1 640 480\n");
        let bin = write_events(&s, EventFormat::Binary);
        assert_eq!(bin.len(), BINARY_HEADER_LEN);
        assert_eq!(parse_events(&bin, EventFormat::Binary, None).unwrap(), s);
    }

    #[test]
    fn shuffled_records_are_sorted() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut events: Vec<Event> = (0..1000)
            .map(|_| {
                Event::new(
                    rng.random_range(0..640),
                    rng.random_range(0..480),
                    rng.random_range(0..50_000),
                    if rng.random_bool(0.5) { Polarity::On } else { Polarity::Off },
                )
            })
            .collect();
        events.shuffle(&mut rng);
        let mut text = String::from("evt v1 640 480\n");
        for e in &events {
            text.push_str(&format!("{},{},{},{}\n", e.x, e.y, e.t, e.p));
        }
        let parsed = parse_events(text.as_bytes(), EventFormat::Text, None).unwrap();

        // reference: insertion sort is stable by construction
        let mut reference: Vec<Event> = Vec::new();
        for e in &events {
            let pos = reference.iter().rposition(|r| r.t <= e.t).map_or(0, |p| p + 1);
            reference.insert(pos, *e);
        }
        assert_eq!(parsed.events(), reference.as_slice());
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let err = parse_events(b"evt v1 4 4\n0,0,0,1\n1,1,x,1\n", EventFormat::Text, None).unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 3, .. }), "{err}");
        let err = parse_events(b"evt v1 4 4\n0,0,0,2\n", EventFormat::Text, None).unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 2, .. }), "{err}");
        let err = parse_events(b"evt v1 4 4\n9,0,0,1\n", EventFormat::Text, None).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("line 2")), "{err}");
        let err = parse_events(b"0,0,0,1\n", EventFormat::Text, None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn binary_errors_carry_offsets() {
        let s = EventStream::new(Resolution::new(4, 4), vec![Event::new(1, 1, 7, Polarity::On)]).unwrap();
        let mut bin = write_events(&s, EventFormat::Binary);
        bin[16 + 12] = 3;
        let err = parse_events(&bin, EventFormat::Binary, None).unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 28, .. }), "{err}");

        let mut bin = write_events(&s, EventFormat::Binary);
        bin.pop();
        assert!(matches!(parse_events(&bin, EventFormat::Binary, None), Err(Error::Parse { .. })));

        let mut bin = write_events(&s, EventFormat::Binary);
        bin[16] = 9;
        assert!(matches!(parse_events(&bin, EventFormat::Binary, None), Err(Error::Validation(_))));
    }

    #[test]
    fn binary_size_is_header_plus_records() {
        let res = Resolution::new(640, 480);
        let n = 1_000_000u64;
        let events = (0..n)
            .map(|i| Event::new((i % 640) as u16, ((i / 640) % 480) as u16, i, Polarity::On))
            .collect();
        let s = EventStream::new(res, events).unwrap();
        let bin = write_events(&s, EventFormat::Binary);
        assert_eq!(bin.len(), 16 + 1_000_000 * 16);
    }

    fn arb_stream() -> impl Strategy<Value = EventStream> {
        (1u16..64, 1u16..64).prop_flat_map(|(w, h)| {
            prop::collection::vec((0..w, 0..h, 0u64..1_000_000_000_000, any::<bool>()), 0..200).prop_map(
                move |recs| {
                    let events = recs
                        .into_iter()
                        .map(|(x, y, t, p)| Event::new(x, y, t, if p { Polarity::On } else { Polarity::Off }))
                        .collect();
                    EventStream::new(Resolution::new(w, h), events).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip_both_formats(s in arb_stream()) {
            for fmt in [EventFormat::Text, EventFormat::Binary] {
                let bytes = write_events(&s, fmt);
                prop_assert_eq!(&parse_events(&bytes, fmt, None).unwrap(), &s);
            }
        }
    }
}
